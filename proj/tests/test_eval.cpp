#include <doctest.h>

#include "georef/eval.hpp"
#include "support.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace georef;
using georef::testing::make_record;

namespace {

// Frozen from tests/oracles/derive_values.py (scipy.stats.spearmanr).
const std::vector<double> kLengths{12, 25, 25, 31, 44, 58, 58, 58, 63, 77, 81, 90, 95, 102, 118, 121, 140, 140, 165, 210};
const std::vector<double> kErrors{55.2, 11.5, 80.1, 6.0, 12.4, 3.3, 45.0, 3.3, 9.9, 2.1,
                                  30.7, 5.5,  5.5,  1.2, 24.3, 0.8, 2.4,  7.7, 0.4, 1.9};
constexpr double kFixtureRho = -0.6508303028997416;
constexpr double kFixtureP = 0.0018857166444314212;
constexpr double kMeanOf0_5_50 = 18.333333333333332;

constexpr double kKmPerDegree = kEarthRadiusKm * std::numbers::pi / 180.0;

Prediction at(const std::string& id, std::optional<GeoPoint> p) {
    Prediction pred;
    pred.record_id = id;
    pred.method.model = "m";
    pred.parsed.point = p;
    pred.parsed.failure = p ? ParseFailure::None : ParseFailure::NoCoordinates;
    return pred;
}

// Prediction `km` due north of the truth at the equator.
Prediction north_of_equator(const std::string& id, double km) {
    return at(id, validate_point(km / kKmPerDegree, 0.0));
}

TruthMap equator_truths(std::initializer_list<std::string> ids) {
    TruthMap m;
    for (const auto& id : ids) m.insert_or_assign(id, validate_point(0.0, 0.0));
    return m;
}

EvalError::Kind eval_error(const std::function<void()>& f) {
    try {
        f();
    } catch (const EvalError& e) {
        return e.kind();
    }
    FAIL("expected EvalError");
    return EvalError::Kind::Io;
}

EvaluationSummary nz_row() {
    EvaluationSummary s;
    s.label = "fine-tuned 7B";
    s.n_total = 4063;
    s.n_failed = 0;
    s.accuracy_at = {{10.0, 0.7043}, {1.0, 0.2536}};
    s.median_sae_km = 3.55;
    s.mean_sae_km = 41.95;
    return s;
}

}  // namespace

TEST_CASE("SAE is the great-circle distance") {
    const auto p = validate_point(-41.2866, 174.7756);
    CHECK(simple_accuracy_error(p, p).value() == 0.0);
    CHECK(simple_accuracy_error(validate_point(0.1, 0), validate_point(0, 0)).value() ==
          doctest::Approx(11.119508023353291).epsilon(1e-10));
}

TEST_CASE("summary of SAEs 0, 5 and 50 km") {
    const auto truths = equator_truths({"a", "b", "c"});
    const auto s = summarize({north_of_equator("a", 0), north_of_equator("b", 5), north_of_equator("c", 50)}, truths,
                             {1.0, 10.0});
    CHECK(s.n_total == 3);
    CHECK(s.n_failed == 0);
    CHECK(s.accuracy_at.at(10.0) == doctest::Approx(2.0 / 3.0));
    CHECK(s.accuracy_at.at(1.0) == doctest::Approx(1.0 / 3.0));
    CHECK(*s.median_sae_km == doctest::Approx(5.0).epsilon(1e-10));
    CHECK(*s.mean_sae_km == doctest::Approx(kMeanOf0_5_50).epsilon(1e-10));
}

TEST_CASE("failures count as misses and are excluded from SAE statistics") {
    const auto truths = equator_truths({"a", "b", "c", "d"});
    const auto s = summarize({north_of_equator("a", 0), north_of_equator("b", 3), at("c", std::nullopt),
                              at("d", std::nullopt)},
                             truths);
    CHECK(s.n_total == 4);
    CHECK(s.n_failed == 2);
    CHECK(s.accuracy_at.at(10.0) == 0.5);
    CHECK(s.accuracy_at.at(1.0) == 0.25);
    CHECK(*s.median_sae_km == doctest::Approx(1.5).epsilon(1e-10));

    const auto all_failed = summarize({at("a", std::nullopt)}, truths);
    CHECK_FALSE(all_failed.median_sae_km);
    CHECK_FALSE(all_failed.mean_sae_km);
    CHECK(all_failed.accuracy_at.at(10.0) == 0.0);
}

TEST_CASE("exact predictions score 100% with zero error") {
    const auto truths = equator_truths({"a", "b"});
    const auto s = summarize({north_of_equator("a", 0), north_of_equator("b", 0)}, truths, {0.1, 1, 10});
    for (const auto& [r, acc] : s.accuracy_at) CHECK(acc == 1.0);
    CHECK(*s.median_sae_km == 0.0);
    CHECK(*s.mean_sae_km == 0.0);
}

TEST_CASE("accuracy is monotone in the radius and independent of order") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> km(0.0, 200.0);
    std::vector<Prediction> preds;
    TruthMap truths;
    for (int i = 0; i < 200; ++i) {
        const auto id = std::to_string(i);
        truths.insert_or_assign(id, validate_point(0.0, 0.0));
        preds.push_back(i % 7 == 0 ? at(id, std::nullopt) : north_of_equator(id, km(gen)));
    }
    const std::vector<double> radii{0.5, 1, 5, 10, 25, 100, 1000};
    const auto s = summarize(preds, truths, radii);
    double prev = 0.0;
    for (const auto& [r, acc] : s.accuracy_at) {
        CHECK(acc >= prev);
        prev = acc;
    }
    std::shuffle(preds.begin(), preds.end(), gen);
    const auto again = summarize(preds, truths, radii);
    CHECK(again.accuracy_at == s.accuracy_at);
    CHECK(*again.median_sae_km == *s.median_sae_km);
    CHECK(*again.mean_sae_km == doctest::Approx(*s.mean_sae_km).epsilon(1e-12));
}

TEST_CASE("summary errors") {
    const auto truths = equator_truths({"a"});
    CHECK(eval_error([&] { summarize({north_of_equator("zz", 1)}, truths); }) == EvalError::Kind::MissingTruth);
    CHECK(eval_error([&] { summarize({north_of_equator("a", 1)}, truths, {-1.0}); }) == EvalError::Kind::BadRadii);
}

TEST_CASE("length bins are lower-inclusive and partition the records") {
    std::vector<OccurrenceRecord> recs{
        make_record("l29", std::string(29, 'x'), 0, 0),   make_record("l30", std::string(30, 'x'), 0, 0),
        make_record("l59", std::string(59, 'x'), 0, 0),   make_record("l90", std::string(90, 'x'), 0, 0),
        make_record("l120", std::string(120, 'x'), 0, 0), make_record("l500", std::string(500, 'x'), 0, 0),
        // 29 scalars, more bytes
        make_record("u29", "Río Frío, " + std::string(19, 'y'), 0, 0)};
    std::vector<Prediction> preds;
    for (const auto& r : recs) preds.push_back(north_of_equator(r.id, 2.0));
    const auto truths = truth_map(recs);
    const auto bins = summarize_by_length(preds, truths, recs);
    REQUIRE(bins.size() == 5);
    CHECK(bins[0].label == "Less than 30");
    CHECK(bins[1].label == "30 - 60");
    CHECK(bins[2].label == "60 - 90");
    CHECK(bins[3].label == "90 - 120");
    CHECK(bins[4].label == "More than 120");
    CHECK(bins[0].summary.n_total == 2);
    CHECK(bins[1].summary.n_total == 2);
    CHECK(bins[2].summary.n_total == 0);
    CHECK(bins[3].summary.n_total == 1);
    CHECK(bins[4].summary.n_total == 2);
    std::size_t total = 0;
    for (const auto& b : bins) total += b.summary.n_total;
    CHECK(total == recs.size());
    CHECK(bins[0].lower == 0);
    CHECK(*bins[0].upper == 30);
    CHECK_FALSE(bins[4].upper);

    CHECK(eval_error([&] { summarize_by_length(preds, truths, recs, {30, 30}); }) == EvalError::Kind::BadBoundaries);
    CHECK(eval_error([&] { summarize_by_length(preds, truths, recs, {0, 30}); }) == EvalError::Kind::BadBoundaries);
}

TEST_CASE("average ranks share ties") {
    CHECK(average_ranks({10, 20, 20, 5}) == std::vector<double>{2, 3.5, 3.5, 1});
    CHECK(average_ranks({1, 1, 1}) == std::vector<double>{2, 2, 2});
}

TEST_CASE("Spearman on the tied fixture matches the oracle") {
    const auto r = spearman(kLengths, kErrors);
    CHECK(r.n == 20);
    CHECK(r.rho == doctest::Approx(kFixtureRho).epsilon(1e-12));
    CHECK(r.p_value == doctest::Approx(kFixtureP).epsilon(1e-9));
    const auto swapped = spearman(kErrors, kLengths);
    CHECK(swapped.rho == doctest::Approx(r.rho).epsilon(1e-14));
    CHECK(swapped.p_value == doctest::Approx(r.p_value).epsilon(1e-12));
}

TEST_CASE("Spearman extremes and invariance") {
    const std::vector<double> x{1, 2, 3, 4, 5, 6};
    CHECK(spearman(x, {2, 4, 8, 16, 32, 64}).rho == doctest::Approx(1.0));
    CHECK(spearman(x, {2, 4, 8, 16, 32, 64}).p_value == 0.0);
    CHECK(spearman(x, {6, 5, 4, 3, 2, 1}).rho == doctest::Approx(-1.0));

    std::vector<double> log_errors;
    for (double e : kErrors) log_errors.push_back(std::log(e) * 3.0 + 7.0);
    CHECK(spearman(kLengths, log_errors).rho == doctest::Approx(kFixtureRho).epsilon(1e-12));
}

TEST_CASE("exact permutation p-value for small samples") {
    // one adjacent swap: rho = 0.9; 1 + 4 orderings reach it on each side, so p = 10/120
    const auto r = spearman({1, 2, 3, 4, 5}, {1, 3, 2, 4, 5}, PValueMethod::ExactPermutation);
    CHECK(r.rho == doctest::Approx(0.9));
    CHECK(r.p_value == doctest::Approx(10.0 / 120.0));
    const auto perfect = spearman({1, 2, 3, 4, 5}, {5, 4, 3, 2, 1}, PValueMethod::ExactPermutation);
    CHECK(perfect.p_value == doctest::Approx(2.0 / 120.0));
    CHECK(eval_error([] {
              std::vector<double> v(11);
              for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
              spearman(v, v, PValueMethod::ExactPermutation);
          }) == EvalError::Kind::TooFewPoints);
}

TEST_CASE("Spearman errors") {
    CHECK(eval_error([] { spearman({1, 2}, {1, 2}); }) == EvalError::Kind::TooFewPoints);
    CHECK(eval_error([] { spearman({1, 2, 3}, {1, 2}); }) == EvalError::Kind::LengthMismatch);
    CHECK(eval_error([] { spearman({1, 1, 1}, {1, 2, 3}); }) == EvalError::Kind::ZeroVariance);
    CHECK(eval_error([] { spearman({1, 2, 3}, {4, 4, 4}); }) == EvalError::Kind::ZeroVariance);
}

TEST_CASE("report formats render the table row") {
    const std::vector<EvaluationSummary> rows{nz_row()};
    CHECK(render_report(rows, ReportFormat::Csv) ==
          "Model,No of records,Failed,Accuracy@10km,Accuracy@1km,Med SAE,Mean SAE\n"
          "fine-tuned 7B,4063,0,70.43%,25.36%,3.55km,41.95km\n");
    CHECK(render_report(rows, ReportFormat::Markdown) ==
          "| Model | No of records | Failed | Accuracy@10km | Accuracy@1km | Med SAE | Mean SAE |\n"
          "| --- | ---: | ---: | ---: | ---: | ---: | ---: |\n"
          "| fine-tuned 7B | 4063 | 0 | 70.43% | 25.36% | 3.55km | 41.95km |\n");
    const auto j = nlohmann::json::parse(render_report(rows, ReportFormat::Json));
    CHECK(j[0]["label"] == "fine-tuned 7B");
    CHECK(j[0]["accuracy_at_km"]["10"] == 0.7043);
    CHECK(j[0]["mean_sae_km"] == 41.95);

    auto empty = nz_row();
    empty.median_sae_km.reset();
    empty.mean_sae_km.reset();
    empty.label = "gazetteer, local";
    CHECK(render_report({empty}, ReportFormat::Csv).find("\"gazetteer, local\",4063,0,70.43%,25.36%,n/a,n/a\n") !=
          std::string::npos);

    CHECK(parse_report_format("md") == ReportFormat::Markdown);
    CHECK_THROWS_AS(parse_report_format("xlsx"), std::invalid_argument);
    CHECK(eval_error([] { render_report({}, ReportFormat::Csv); }) == EvalError::Kind::EmptyReport);
}

TEST_CASE("write_report writes the rendered bytes") {
    testing::TempDir dir;
    write_report({nz_row()}, dir.file("r.csv"), ReportFormat::Csv);
    CHECK(testing::slurp(dir.file("r.csv")) == render_report({nz_row()}, ReportFormat::Csv));
    CHECK(eval_error([] { write_report({nz_row()}, "/nonexistent/dir/r.csv", ReportFormat::Csv); }) ==
          EvalError::Kind::Io);
}
