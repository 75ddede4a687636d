// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "georef/analysis.hpp"
#include "georef/baseline.hpp"
#include "georef/cli.hpp"
#include "georef/dataset.hpp"
#include "georef/eval.hpp"
#include "georef/gazetteer.hpp"
#include "georef/geo.hpp"
#include "georef/prediction.hpp"
#include "georef/prompt.hpp"
#include "support.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

using namespace georef;
using georef::testing::make_record;
using georef::testing::slurp;
using georef::testing::test_path;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

/// Collects the first few failure messages of a criterion.
struct Check {
    std::vector<std::string> failures;
    void expect(bool ok, const std::string& what) {
        if (!ok && failures.size() < 5) failures.push_back(what);
    }
    bool ok() const { return failures.empty(); }
};

// ---------------------------------------------------------------------------
// Independent oracles

/// Great-circle distance from the chord between unit vectors, in long double.
long double chord_distance_km(const GeoPoint& a, const GeoPoint& b) {
    constexpr long double deg = 3.14159265358979323846264338327950288L / 180.0L;
    auto xyz = [&](const GeoPoint& p) {
        const long double la = p.lat() * deg, lo = p.lon() * deg;
        return std::array<long double, 3>{std::cos(la) * std::cos(lo), std::cos(la) * std::sin(lo), std::sin(la)};
    };
    const auto u = xyz(a), v = xyz(b);
    long double c2 = 0;
    for (int i = 0; i < 3; ++i) c2 += (u[i] - v[i]) * (u[i] - v[i]);
    const long double c = std::min(2.0L, std::sqrt(c2));
    return 2.0L * 6371.0088L * std::asin(c / 2.0L);
}

/// DBSCAN labels from explicit reachability: core components ordered by
/// their smallest member, border points to the earliest adjacent component.
std::vector<int> dbscan_oracle(const std::vector<GeoPoint>& pts, double eps, int min_pts) {
    const auto n = pts.size();
    std::vector<std::vector<bool>> near(n, std::vector<bool>(n));
    std::vector<bool> core(n);
    for (std::size_t i = 0; i < n; ++i) {
        int count = 0;
        for (std::size_t j = 0; j < n; ++j) {
            near[i][j] = chord_distance_km(pts[i], pts[j]) <= eps;
            count += near[i][j];
        }
        core[i] = count >= min_pts;
    }
    // transitive closure of core-core adjacency
    auto reach = near;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) reach[i][j] = core[i] && core[j] && near[i][j];
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (reach[i][k] && reach[k][j]) reach[i][j] = true;

    std::vector<int> labels(n, -1);
    int next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!core[i] || labels[i] != -1) continue;
        for (std::size_t j = 0; j < n; ++j)
            if (j == i || reach[i][j]) labels[j] = next;
        ++next;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (core[i]) continue;
        int best = -1;
        for (std::size_t j = 0; j < n; ++j) {
            if (core[j] && near[i][j] && (best == -1 || labels[j] < best)) best = labels[j];
        }
        labels[i] = best;
    }
    return labels;
}

/// Spearman's rho by counting ranks and a long double Pearson.
long double spearman_oracle(const std::vector<double>& x, const std::vector<double>& y) {
    auto ranks = [](const std::vector<double>& v) {
        std::vector<long double> r(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            std::size_t less = 0, equal = 0;
            for (double w : v) {
                less += w < v[i];
                equal += w == v[i];
            }
            r[i] = static_cast<long double>(less) + (static_cast<long double>(equal) + 1.0L) / 2.0L;
        }
        return r;
    };
    const auto rx = ranks(x), ry = ranks(y);
    const long double n = static_cast<long double>(x.size());
    const long double mx = std::accumulate(rx.begin(), rx.end(), 0.0L) / n;
    const long double my = std::accumulate(ry.begin(), ry.end(), 0.0L) / n;
    long double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

GeoPoint random_point(std::mt19937_64& gen) { return testing::random_point(gen); }

std::vector<OccurrenceRecord> random_dataset(std::mt19937_64& gen, std::size_t n) {
    std::vector<OccurrenceRecord> out;
    for (std::size_t i = 0; i < n; ++i) {
        const auto p = random_point(gen);
        out.push_back(make_record("r" + std::to_string(i), "locality " + std::to_string(i), p.lat(), p.lon()));
    }
    return out;
}

std::set<std::string> ids_of(const std::vector<OccurrenceRecord>& v) {
    std::set<std::string> s;
    for (const auto& r : v) s.insert(r.id);
    return s;
}

std::vector<std::string> id_list(const std::vector<OccurrenceRecord>& v) {
    std::vector<std::string> s;
    for (const auto& r : v) s.push_back(r.id);
    return s;
}

std::vector<std::string> fixture_localities() {
    std::ifstream in(test_path("fixtures/localities.txt"));
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) out.push_back(line);
    return out;
}

Prediction prediction_at(const std::string& id, const GeoPoint& p) {
    Prediction pred;
    pred.record_id = id;
    pred.parsed.point = p;
    pred.parsed.failure = ParseFailure::None;
    return pred;
}

// ---------------------------------------------------------------------------
// Criteria

Check geodesy() {
    Check c;
    const auto t0 = Clock::now();
    std::mt19937_64 gen(1);
    for (int i = 0; i < 1000; ++i) {
        const auto a = random_point(gen), b = random_point(gen);
        const long double ref = chord_distance_km(a, b);
        const double got = haversine_distance(a, b).value();
        c.expect(std::fabs(got - static_cast<double>(ref)) <= 1e-3 * static_cast<double>(ref) + 1e-9,
                 "pair " + std::to_string(i) + " differs from the chord oracle");
        c.expect(haversine_distance(a, a).value() == 0.0, "identical points are not 0 apart");
    }
    const double antipodal = haversine_distance(validate_point(0, 0), validate_point(0, 180)).value();
    c.expect(std::fabs(antipodal - kHalfCircumferenceKm) <= 1e-9, "antipodal distance is not pi*R");
    const double elapsed = seconds_since(t0);
    c.expect(elapsed < 1.0, "took " + std::to_string(elapsed) + " s");
    return c;
}

Check metrics() {
    Check c;
    constexpr double km_per_deg = kEarthRadiusKm * kPi / 180.0;
    const auto origin = validate_point(0, 0);
    TruthMap truths{{"a", origin}, {"b", origin}, {"c", origin}};
    const auto s = summarize({prediction_at("a", origin), prediction_at("b", validate_point(5 / km_per_deg, 0)),
                              prediction_at("c", validate_point(50 / km_per_deg, 0))},
                             truths, {10, 1});
    const auto row = render_report({s}, ReportFormat::Csv);
    c.expect(row.find(",66.67%,33.33%,5.00km,18.33km") != std::string::npos, "fixture row was " + row);
    c.expect(std::fabs(*s.mean_sae_km - 55.0 / 3.0) < 1e-9, "mean is not 18.33");

    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> km(0, 300);
    std::bernoulli_distribution fails(0.1);
    const std::vector<double> radii{0.1, 1, 5, 10, 50, 100, 250};
    for (int set = 0; set < 1000; ++set) {
        std::vector<Prediction> preds;
        TruthMap t;
        for (int i = 0; i < 25; ++i) {
            const auto id = std::to_string(i);
            t.insert_or_assign(id, origin);
            auto p = prediction_at(id, validate_point(km(gen) / km_per_deg, 0));
            if (fails(gen)) {
                p.parsed.point.reset();
                p.parsed.failure = ParseFailure::NoCoordinates;
            }
            preds.push_back(p);
        }
        const auto sum = summarize(preds, t, radii);
        double prev = -1;
        for (const auto& [r, acc] : sum.accuracy_at) {
            c.expect(acc >= prev, "accuracy not monotone in set " + std::to_string(set));
            prev = acc;
        }
    }
    return c;
}

Check prompt_goldens() {
    Check c;
    const auto rec = make_record("opk", "21 km west of Opotiki, south of Wainui Road", -38.05, 177.05, "NZ", "");
    for (auto p : {PromptPattern::ZeroShot, PromptPattern::ZeroShotCoT, PromptPattern::CoT,
                   PromptPattern::ContextControl, PromptPattern::Persona}) {
        const auto name = std::string(pattern_name(p));
        const auto golden = slurp(test_path("golden/opotiki_" + name + ".txt"));
        c.expect(!golden.empty() && render_prompt(p, rec, "North Island, New Zealand").text == golden,
                 name + " differs from its golden");
    }
    return c;
}

Check round_trip() {
    Check c;
    std::mt19937_64 gen(4);
    for (int i = 0; i < 1000; ++i) {
        const auto p = random_point(gen);
        const auto rec = make_record(std::to_string(i), "somewhere", p.lat(), p.lon());
        const auto example = render_finetune_example(rec, "Region", FinetuneMode::Train);
        const auto parsed = parse_coordinates(example);
        c.expect(parsed.ok() && std::fabs(parsed.point->lat() - p.lat()) <= 5e-7 &&
                     std::fabs(parsed.point->lon() - p.lon()) <= 5e-7,
                 "point " + std::to_string(i) + " did not survive the round trip");
    }
    std::ifstream in(test_path("fixtures/parse_responses.jsonl"));
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++n;
        const auto doc = nlohmann::json::parse(line);
        const auto parsed = parse_coordinates(doc["response"].get<std::string>());
        bool ok = to_string(parsed.failure) == doc["status"].get<std::string>();
        if (ok && parsed.ok()) {
            ok = std::fabs(parsed.point->lat() - doc["lat"].get<double>()) < 1e-12 &&
                 std::fabs(parsed.point->lon() - doc["lon"].get<double>()) < 1e-12;
        }
        c.expect(ok, "fixture response misclassified: " + doc["response"].get<std::string>());
    }
    c.expect(n >= 30, "parse fixture has only " + std::to_string(n) + " responses");
    return c;
}

Check baseline_offline() {
    Check c;
    auto gaz = LocalGazetteer::from_file(testing::asset_path("gazetteer/nz_localities.csv"));
    DictionaryMatcher ner(gaz.names());
    const auto wanaka = georeference_by_gazetteer(
        make_record("w", "10 km N of Lake Wanaka, 1 km N of Makarora. near Pipson Creek", -44.1, 169.3, "NZ", "Otago"),
        ner, gaz, {});
    // mean of Lake Wanaka, Makarora and the nearer Pipson Creek
    const auto expected = validate_point((-44.38 + -44.2311 + -44.205) / 3.0, (169.12 + 169.2303 + 169.265) / 3.0);
    c.expect(wanaka.parsed.ok() && haversine_distance(*wanaka.parsed.point, expected).value() <= 1e-9,
             "Wanaka example missed the cluster centroid");

    const auto fallback =
        georeference_by_gazetteer(make_record("f", "6 km SSE of Westport", -41.8, 171.6, "NZ", "West Coast"), ner, gaz, {});
    c.expect(fallback.parsed.ok() && fallback.parsed.point->lat() == -41.7545 &&
                 fallback.parsed.point->lon() == 171.6007,
             "single-candidate fallback failed");

    const auto none = georeference_by_gazetteer(make_record("n", "on stone, damp gully", -41, 174), ner, gaz, {});
    c.expect(!none.parsed.ok() && none.status() == "no_coordinates", "no-entity record did not fail cleanly");
    return c;
}

Check dbscan_vs_oracle() {
    Check c;
    std::mt19937_64 gen(6);
    std::uniform_real_distribution<double> lat(-42.0, -41.0), lon(173.5, 175.0), eps(5.0, 40.0);
    std::uniform_int_distribution<int> size(1, 12), min_pts(1, 4);
    for (int inst = 0; inst < 50; ++inst) {
        std::vector<GeoPoint> pts;
        const int n = size(gen);
        for (int i = 0; i < n; ++i) pts.push_back(validate_point(lat(gen), lon(gen)));
        const DbscanParams params{eps(gen), min_pts(gen)};
        c.expect(dbscan(pts, params) == dbscan_oracle(pts, params.eps_km, params.min_pts),
                 "instance " + std::to_string(inst) + " differs from the reachability oracle");
    }
    return c;
}

Check split_arithmetic() {
    Check c;
    c.expect(floor_count(20318, 0.2) == 4063, "floor(0.2 * 20318) != 4063");
    c.expect(floor_count(20697, 0.2) == 4139, "floor(0.2 * 20697) != 4139");
    std::mt19937_64 gen(7);
    {
        auto aus = random_dataset(gen, 20697);
        for (auto& r : aus) r.id = "aus-" + r.id;
        std::vector<MixSource> sources{{random_dataset(gen, 20318), 0.2, "NZ"}, {std::move(aus), 0.2, "AUS"}};
        const auto mixed = mix_training_sets(sources, 11);
        c.expect(mixed.size() == 4063 + 4139, "20% + 20% mix has " + std::to_string(mixed.size()) + " records");
    }
    std::uniform_int_distribution<std::size_t> size(10, 400);
    std::uniform_int_distribution<std::size_t> folds(2, 10);
    for (int d = 0; d < 100; ++d) {
        const auto data = random_dataset(gen, size(gen));
        const auto seed = gen();
        const auto s = split(data, {}, seed);
        c.expect(s.train.size() == floor_count(data.size(), 0.7) &&
                     s.train.size() + s.validation.size() == floor_count(data.size(), 0.85),
                 "split sizes off for dataset " + std::to_string(d));
        c.expect(s.train.size() + s.validation.size() + s.test.size() == data.size(), "split is not exhaustive");
        auto all = ids_of(s.train);
        for (const auto* part : {&s.validation, &s.test})
            for (const auto& r : *part) c.expect(all.insert(r.id).second, "split parts overlap");
        c.expect(all == ids_of(data), "split lost records");
        const auto again = split(data, {}, seed);
        c.expect(id_list(again.train) == id_list(s.train) && id_list(again.test) == id_list(s.test),
                 "same seed gave a different split");

        const auto k = std::min(folds(gen), data.size());
        const auto f = kfold(data, k, seed);
        std::set<std::string> tested;
        for (const auto& fold : f) {
            for (const auto& r : fold.test) c.expect(tested.insert(r.id).second, "a record is tested twice");
            c.expect(fold.train.size() + fold.test.size() == data.size(), "fold is not exhaustive");
            const auto test_ids = ids_of(fold.test);
            for (const auto& r : fold.train) c.expect(!test_ids.count(r.id), "fold train and test overlap");
        }
        c.expect(tested == ids_of(data), "k-fold test sets do not cover the data");
        const auto f2 = kfold(data, k, seed);
        for (std::size_t i = 0; i < f.size(); ++i)
            c.expect(id_list(f[i].test) == id_list(f2[i].test), "same seed gave different folds");
    }
    return c;
}

Check spearman_vs_oracle() {
    Check c;
    std::mt19937_64 gen(8);
    std::uniform_int_distribution<int> size(3, 60), small(0, 9);
    for (int v = 0; v < 100; ++v) {
        const int n = size(gen);
        std::vector<double> x(n), y(n);
        // small integer ranges force ties in both vectors
        for (int i = 0; i < n; ++i) {
            x[i] = small(gen);
            y[i] = small(gen) * 1.5;
        }
        if (std::all_of(x.begin(), x.end(), [&](double d) { return d == x[0]; })) x[0] += 1;
        if (std::all_of(y.begin(), y.end(), [&](double d) { return d == y[0]; })) y[0] += 1;
        const double rho = spearman(x, y).rho;
        c.expect(std::fabs(rho - static_cast<double>(spearman_oracle(x, y))) <= 1e-12,
                 "vector " + std::to_string(v) + " differs from the oracle");
        std::vector<double> tx(n);
        for (int i = 0; i < n; ++i) tx[i] = std::exp(x[i]) + x[i] * x[i] * x[i];
        c.expect(std::fabs(spearman(tx, y).rho - rho) <= 1e-12, "monotone transform changed rho");
    }
    std::vector<double> a(30), up(30), down(30);
    for (int i = 0; i < 30; ++i) {
        a[i] = i;
        up[i] = std::pow(1.3, i);
        down[i] = -i * 2.0;
    }
    c.expect(spearman(a, up).rho == 1.0, "rho != 1 on a strictly increasing fixture");
    c.expect(spearman(a, down).rho == -1.0, "rho != -1 on a strictly decreasing fixture");
    return c;
}

Check perturbation() {
    Check c;
    c.expect(strip_distance_values("30 miles S of Auckland City").text == "S of Auckland City",
             "Auckland City example not stripped as expected");
    const auto corpus = fixture_localities();
    c.expect(corpus.size() == 200, "locality fixture does not have 200 entries");
    for (const auto& loc : corpus) {
        const auto once = strip_distance_values(loc);
        const auto twice = strip_distance_values(once.text);
        c.expect(twice.text == once.text && twice.removed.empty(), "not idempotent on: " + loc);
    }
    return c;
}

struct PipelineOutput {
    std::map<std::string, std::string> files;
    bool ok = true;
    std::string error;
};

PipelineOutput run_pipeline(const fs::path& dir, const std::vector<OccurrenceRecord>& records,
                            const std::string& mock_path) {
    PipelineOutput out;
    fs::create_directories(dir);
    const auto input = (dir / "records.jsonl").string();
    write_records_file(input, records);
    std::ostringstream sink;
    auto call = [&](std::vector<std::string> args) {
        const int code = run_cli(args, sink, sink);
        if (code != kExitOk) {
            out.ok = false;
            out.error = args[0] + " exited " + std::to_string(code) + ": " + sink.str();
        }
    };
    call({"predict", "--input", input, "--output", (dir / "llm" / "preds.jsonl").string(), "--mock-responses",
          mock_path, "--model", "mock-7b", "--parallelism", "4"});
    call({"baseline", "--input", input, "--output", (dir / "gaz" / "preds.jsonl").string(), "--gazetteer-file",
          testing::asset_path("gazetteer/nz_localities.csv"), "--parallelism", "4"});
    call({"evaluate", "--predictions", (dir / "llm" / "preds.jsonl").string(), "--predictions",
          (dir / "gaz" / "preds.jsonl").string(), "--truth", input, "--out-dir", (dir / "eval").string(),
          "--by-length", "--correlation"});
    for (const char* name : {"report.csv", "report.json", "report.md", "length_report.csv", "correlation.json"}) {
        out.files[name] = slurp((dir / "eval" / name).string());
    }
    out.files["llm_preds"] = slurp((dir / "llm" / "preds.jsonl").string());
    out.files["gaz_preds"] = slurp((dir / "gaz" / "preds.jsonl").string());
    return out;
}

Check end_to_end() {
    Check c;
    const auto t0 = Clock::now();
    testing::TempDir dir;
    const auto corpus = fixture_localities();
    std::mt19937_64 gen(10);
    std::uniform_real_distribution<double> lat(-46.0, -35.0), lon(167.0, 178.0), jitter(-0.2, 0.2);
    std::vector<OccurrenceRecord> records;
    for (int i = 0; i < 500; ++i) {
        records.push_back(make_record("occ" + std::to_string(i),
                                      corpus[static_cast<std::size_t>(i) % corpus.size()] + " #" + std::to_string(i),
                                      lat(gen), lon(gen), "NZ", ""));
    }
    const auto mock_path = dir.file("mock.jsonl");
    {
        std::ofstream mock(mock_path, std::ios::binary);
        for (std::size_t i = 0; i < records.size(); ++i) {
            const auto& r = records[i];
            nlohmann::json j;
            j["prompt"] = render_prompt(PromptPattern::ContextControl, r, "").text;
            if (i % 17 == 0) {
                j["response"] = "I cannot determine coordinates for this locality.";
            } else {
                const auto guess = validate_point(std::clamp(r.truth.lat() + jitter(gen), -90.0, 90.0),
                                                  std::clamp(r.truth.lon() + jitter(gen), -180.0, 180.0));
                j["response"] = "Reasoning omitted.\n" + completion_line(guess);
            }
            mock << j.dump() << "\n";
        }
    }
    const auto first = run_pipeline(dir.path() / "run1", records, mock_path);
    const auto second = run_pipeline(dir.path() / "run2", records, mock_path);
    c.expect(first.ok, first.error);
    c.expect(second.ok, second.error);
    for (const auto& [name, body] : first.files) {
        c.expect(!body.empty(), name + " is empty");
        c.expect(second.files.at(name) == body, name + " differs between runs");
    }
    const double elapsed = seconds_since(t0);
    c.expect(elapsed < 60.0, "took " + std::to_string(elapsed) + " s");
    return c;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Check()>>> criteria{
        {"geodesy oracle equivalence", geodesy},
        {"metric arithmetic", metrics},
        {"prompt goldens", prompt_goldens},
        {"coordinate round trip and parse corpus", round_trip},
        {"offline gazetteer baseline", baseline_offline},
        {"DBSCAN reachability oracle", dbscan_vs_oracle},
        {"split and mix arithmetic", split_arithmetic},
        {"Spearman oracle", spearman_vs_oracle},
        {"distance-value perturbation", perturbation},
        {"end-to-end mock run", end_to_end},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Check result;
        try {
            result = criteria[i].second();
        } catch (const std::exception& e) {
            result.failures.push_back(std::string("exception: ") + e.what());
        }
        std::cout << (result.ok() ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << "\n";
        for (const auto& f : result.failures) std::cout << "    " << f << "\n";
        failed += !result.ok();
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
