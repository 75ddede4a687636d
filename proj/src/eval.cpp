#include "georef/eval.hpp"

#include "georef/text.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace georef {

DistanceKm simple_accuracy_error(const GeoPoint& predicted, const GeoPoint& truth) noexcept {
    return haversine_distance(predicted, truth);
}

TruthMap truth_map(const std::vector<OccurrenceRecord>& records) {
    TruthMap m;
    m.reserve(records.size());
    for (const auto& r : records) m.insert_or_assign(r.id, r.truth);
    return m;
}

namespace {

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

}  // namespace

EvaluationSummary summarize(const std::vector<Prediction>& predictions, const TruthMap& truths,
                            const std::vector<double>& radii_km, std::string label) {
    for (double r : radii_km) {
        if (!(r >= 0.0) || !std::isfinite(r)) throw EvalError(EvalError::Kind::BadRadii, "radii must be finite and >= 0");
    }
    EvaluationSummary s;
    s.label = std::move(label);
    s.n_total = predictions.size();

    std::vector<double> errors;
    errors.reserve(predictions.size());
    for (const auto& p : predictions) {
        auto it = truths.find(p.record_id);
        if (it == truths.end()) throw EvalError(EvalError::Kind::MissingTruth, "no truth for record " + p.record_id);
        if (!p.parsed.point) {
            ++s.n_failed;
            continue;
        }
        errors.push_back(simple_accuracy_error(*p.parsed.point, it->second).value());
    }
    // sorted errors make the result independent of input order
    std::sort(errors.begin(), errors.end());

    for (double r : radii_km) {
        const auto hits = static_cast<std::size_t>(std::upper_bound(errors.begin(), errors.end(), r) - errors.begin());
        s.accuracy_at[r] = s.n_total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(s.n_total);
    }
    if (!errors.empty()) {
        s.median_sae_km = median_of(errors);
        s.mean_sae_km = std::accumulate(errors.begin(), errors.end(), 0.0) / static_cast<double>(errors.size());
    }
    return s;
}

std::vector<LengthBin> summarize_by_length(const std::vector<Prediction>& predictions, const TruthMap& truths,
                                           const std::vector<OccurrenceRecord>& records,
                                           const std::vector<std::size_t>& boundaries,
                                           const std::vector<double>& radii_km) {
    for (std::size_t i = 1; i < boundaries.size(); ++i) {
        if (boundaries[i] <= boundaries[i - 1]) {
            throw EvalError(EvalError::Kind::BadBoundaries, "length boundaries must be strictly increasing");
        }
    }
    if (!boundaries.empty() && boundaries.front() == 0) {
        throw EvalError(EvalError::Kind::BadBoundaries, "first length boundary must be > 0");
    }

    std::unordered_map<std::string, std::size_t> length_of;
    for (const auto& r : records) length_of[r.id] = text::scalar_count(r.locality);

    std::vector<LengthBin> bins(boundaries.size() + 1);
    for (std::size_t b = 0; b < bins.size(); ++b) {
        auto& bin = bins[b];
        bin.lower = b == 0 ? 0 : boundaries[b - 1];
        if (b < boundaries.size()) bin.upper = boundaries[b];
        if (b == 0) {
            bin.label = boundaries.empty() ? "All" : "Less than " + std::to_string(boundaries[0]);
        } else if (!bin.upper) {
            bin.label = "More than " + std::to_string(bin.lower);
        } else {
            bin.label = std::to_string(bin.lower) + " - " + std::to_string(*bin.upper);
        }
    }

    std::vector<std::vector<Prediction>> grouped(bins.size());
    for (const auto& p : predictions) {
        auto it = length_of.find(p.record_id);
        if (it == length_of.end()) throw EvalError(EvalError::Kind::MissingTruth, "no record for " + p.record_id);
        const auto b = static_cast<std::size_t>(std::upper_bound(boundaries.begin(), boundaries.end(), it->second) -
                                                boundaries.begin());
        grouped[b].push_back(p);
    }
    for (std::size_t b = 0; b < bins.size(); ++b) {
        bins[b].summary = summarize(grouped[b], truths, radii_km, bins[b].label);
    }
    return bins;
}

std::vector<double> average_ranks(const std::vector<double>& values) {
    const auto n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

namespace {

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

bool all_equal(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

}  // namespace

CorrelationResult spearman(const std::vector<double>& x, const std::vector<double>& y, PValueMethod method) {
    if (x.size() != y.size()) throw EvalError(EvalError::Kind::LengthMismatch, "spearman: x and y differ in length");
    if (x.size() < 3) throw EvalError(EvalError::Kind::TooFewPoints, "spearman needs at least 3 points");
    for (const auto* v : {&x, &y}) {
        for (double d : *v) {
            if (!std::isfinite(d)) throw EvalError(EvalError::Kind::TooFewPoints, "spearman: non-finite value");
        }
    }
    if (all_equal(x) || all_equal(y)) throw EvalError(EvalError::Kind::ZeroVariance, "spearman: all values tied");

    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    CorrelationResult r;
    r.n = x.size();
    r.rho = std::clamp(pearson(rx, ry), -1.0, 1.0);

    if (method == PValueMethod::ExactPermutation) {
        if (r.n > 10) throw EvalError(EvalError::Kind::TooFewPoints, "exact permutation p-value needs n <= 10");
        auto perm = ry;
        std::sort(perm.begin(), perm.end());
        std::size_t total = 0, extreme = 0;
        const double threshold = std::abs(r.rho) - 1e-12;
        do {
            ++total;
            if (std::abs(pearson(rx, perm)) >= threshold) ++extreme;
        } while (std::next_permutation(perm.begin(), perm.end()));
        r.p_value = static_cast<double>(extreme) / static_cast<double>(total);
        return r;
    }

    const double df = static_cast<double>(r.n) - 2.0;
    if (std::abs(r.rho) >= 1.0) {
        r.p_value = 0.0;
        return r;
    }
    const double t = r.rho * std::sqrt(df / (1.0 - r.rho * r.rho));
    boost::math::students_t dist(df);
    r.p_value = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))), 0.0, 1.0);
    return r;
}

}  // namespace georef
