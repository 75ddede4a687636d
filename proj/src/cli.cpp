#include "georef/cli.hpp"

#include "georef/analysis.hpp"
#include "georef/baseline.hpp"
#include "georef/dataset.hpp"
#include "georef/eval.hpp"
#include "georef/gazetteer.hpp"
#include "georef/llm_client.hpp"
#include "georef/prompt.hpp"
#include "georef/text.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace georef {

namespace {

using Json = nlohmann::ordered_json;

struct Failure : std::runtime_error {
    Failure(int code, const std::string& message) : std::runtime_error(message), code(code) {}
    int code;
};

[[noreturn]] void fail(int code, const std::string& message) { throw Failure(code, message); }

struct Options {
    std::string input;
    std::vector<std::string> inputs;
    std::string output;
    std::string out_dir;
    std::optional<std::uint64_t> seed;

    // ingest
    std::string source_label;
    std::string errors_path;
    ColumnMap columns;

    // split / mix / kfold
    std::vector<double> ratios{0.70, 0.15, 0.15};
    std::vector<double> fractions;
    std::vector<std::string> labels;
    std::size_t k = 5;

    // export-finetune
    std::string manifest;
    std::string mode = "train";
    std::string region_labels;
    FinetuneExportConfig finetune;

    // predict
    std::string pattern = "context_control";
    BackendConfig backend{"", "", "", 0.0, 256, 60.0, 3, 0.0, 1.0};
    std::size_t parallelism = 4;
    std::string cache;
    bool no_cache = false;
    std::string mock_responses;
    std::size_t sample = 0;

    // baseline / analyze
    std::string gazetteer = "local";
    std::string gazetteer_file;
    std::string gazetteer_url;
    std::string geonames_user_env = "GEONAMES_USERNAME";
    std::string user_agent = "georef/1.0";
    std::string ner = "dictionary";
    std::string ner_url;
    double eps_km = 25.0;
    int min_pts = 2;
    int max_rows = 10;
    bool no_state = false;
    std::string lookup_cache;
    double http_timeout = 30.0;

    // evaluate
    std::vector<std::string> predictions;
    std::string truth;
    std::vector<double> radii{10.0, 1.0};
    std::vector<std::string> formats{"csv", "json", "markdown"};
    bool by_length = false;
    std::vector<std::size_t> length_bins{30, 60, 90, 120};
    bool correlation = false;

    // analyze / perturb
    std::string lexicon;
    std::string diff;
};

// ---------------------------------------------------------------------------
// helpers

void ensure_parent(const std::string& path) {
    const auto parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
}

std::string dir_of(const std::string& path) {
    auto parent = fs::path(path).parent_path();
    return parent.empty() ? std::string(".") : parent.string();
}

void write_text(const std::string& path, const std::string& body) {
    ensure_parent(path);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(kExitConfig, "cannot write " + path);
    out << body;
    if (!out.flush()) fail(kExitConfig, "write failed for " + path);
}

std::string file_sha256(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return text::sha256_hex(data);
}

std::vector<OccurrenceRecord> load_records(const std::string& path) {
    try {
        return read_records_file(path);
    } catch (const DatasetError& e) {
        fail(kExitConfig, e.what());
    } catch (const std::runtime_error& e) {
        fail(kExitConfig, e.what());
    }
}

void save_records(const std::string& path, const std::vector<OccurrenceRecord>& records) {
    ensure_parent(path);
    write_records_file(path, records);
}

std::uint64_t require_seed(const Options& o) {
    if (!o.seed) fail(kExitConfig, "--seed is required");
    return *o.seed;
}

/// Writes the subcommand's effective settings as run_config.ini in `dir`.
void write_run_config(const CLI::App& sub, const std::string& dir) {
    std::ostringstream body;
    body << "# effective configuration; replay from the same working directory with: georef --config run_config.ini " << sub.get_name() << "\n";
    body << "[" << sub.get_name() << "]\n" << sub.config_to_str(true, false);
    write_text((fs::path(dir) / "run_config.ini").string(), body.str());
}

RegionLabelMap load_region_labels(const std::string& path) {
    RegionLabelMap map;
    if (path.empty()) return map;
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(kExitConfig, "cannot open region labels " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty() || line.front() == '#') continue;
        auto f = text::split(line, '\t');
        if (f.size() != 3) {
            fail(kExitConfig, path + " line " + std::to_string(line_no) + ": expected country_code<TAB>state<TAB>label");
        }
        map.set(std::string(text::trim(f[0])), std::string(text::trim(f[1])), std::string(text::trim(f[2])));
    }
    return map;
}

std::unique_ptr<PlaceNameExtractor> make_ner(const Options& o, const LocalGazetteer* local) {
    if (o.ner == "remote") {
        if (o.ner_url.empty()) fail(kExitConfig, "--ner-url is required for remote NER");
        return std::make_unique<RemoteNer>(o.ner_url, std::chrono::milliseconds(static_cast<int>(o.http_timeout * 1000)));
    }
    if (!local) fail(kExitConfig, "dictionary NER needs --gazetteer-file");
    return std::make_unique<DictionaryMatcher>(local->names());
}

std::optional<LocalGazetteer> load_local_gazetteer(const Options& o) {
    if (o.gazetteer_file.empty()) return std::nullopt;
    try {
        return LocalGazetteer::from_file(o.gazetteer_file);
    } catch (const GazetteerError& e) {
        fail(kExitConfig, e.what());
    }
}

// ---------------------------------------------------------------------------
// subcommands

int cmd_ingest(const Options& o, const CLI::App& sub, std::ostream& err) {
    std::ifstream in(o.input, std::ios::binary);
    if (!in) fail(kExitConfig, "cannot open " + o.input);
    const auto label = o.source_label.empty() ? fs::path(o.input).stem().string() : o.source_label;
    ParseResult parsed;
    try {
        parsed = parse_occurrences(in, o.columns, label);
    } catch (const DatasetError& e) {
        fail(kExitConfig, e.what());
    }
    const auto parsed_count = parsed.records.size();
    auto records = preprocess(std::move(parsed.records));
    const auto dropped = parsed.errors.size() + (parsed_count - records.size());

    if (!o.errors_path.empty()) {
        std::ostringstream report;
        report << "row,reason,detail\n";
        for (const auto& e : parsed.errors) {
            std::string detail = e.detail;
            std::replace(detail.begin(), detail.end(), '"', '\'');
            report << e.row << ',' << to_string(e.reason) << ",\"" << detail << "\"\n";
        }
        write_text(o.errors_path, report.str());
    }
    err << records.size() << " records, " << dropped << " dropped (" << parsed.errors.size() << " invalid, "
        << parsed_count - records.size() << " blank or duplicate)\n";
    if (records.empty()) fail(kExitEmpty, "no records survived ingestion; nothing written");
    save_records(o.output, records);
    write_run_config(sub, dir_of(o.output));
    return kExitOk;
}

Json manifest_entry(const std::string& path, std::size_t count) {
    return Json{{"file", fs::path(path).filename().string()}, {"count", count}, {"sha256", file_sha256(path)}};
}

int cmd_split(const Options& o, const CLI::App& sub, std::ostream& err) {
    const auto seed = require_seed(o);
    if (o.ratios.size() != 3) fail(kExitConfig, "--ratios takes three values: train,validation,test");
    auto records = load_records(o.input);
    if (records.empty()) fail(kExitEmpty, "input has no records");
    DatasetSplit s;
    try {
        s = split(std::move(records), SplitRatios{o.ratios[0], o.ratios[1], o.ratios[2]}, seed);
    } catch (const DatasetError& e) {
        fail(kExitConfig, e.what());
    }
    const fs::path dir(o.out_dir);
    fs::create_directories(dir);
    Json manifest;
    manifest["input"] = o.input;
    manifest["seed"] = seed;
    manifest["ratios"] = {{"train", o.ratios[0]}, {"validation", o.ratios[1]}, {"test", o.ratios[2]}};
    for (auto [name, part] : {std::pair{"train", &s.train}, {"validation", &s.validation}, {"test", &s.test}}) {
        const auto path = (dir / (std::string(name) + ".jsonl")).string();
        save_records(path, *part);
        manifest[name] = manifest_entry(path, part->size());
    }
    write_text((dir / "split_manifest.json").string(), manifest.dump(2) + "\n");
    write_run_config(sub, dir.string());
    err << "train " << s.train.size() << ", validation " << s.validation.size() << ", test " << s.test.size() << "\n";
    return kExitOk;
}

int cmd_mix(const Options& o, const CLI::App& sub, std::ostream& err) {
    const auto seed = require_seed(o);
    if (o.inputs.empty()) fail(kExitConfig, "at least one --input is required");
    if (o.fractions.size() != o.inputs.size()) fail(kExitConfig, "give one --fraction per --input");
    if (!o.labels.empty() && o.labels.size() != o.inputs.size()) fail(kExitConfig, "give one --label per --input");
    std::vector<MixSource> sources;
    Json parts = Json::array();
    for (std::size_t i = 0; i < o.inputs.size(); ++i) {
        MixSource src;
        src.records = load_records(o.inputs[i]);
        src.fraction = o.fractions[i];
        src.label = o.labels.empty() ? fs::path(o.inputs[i]).stem().string() : o.labels[i];
        parts.push_back({{"input", o.inputs[i]},
                         {"label", src.label},
                         {"fraction", src.fraction},
                         {"available", src.records.size()},
                         {"sampled", floor_count(src.records.size(), std::clamp(src.fraction, 0.0, 1.0))}});
        sources.push_back(std::move(src));
    }
    std::vector<OccurrenceRecord> mixed;
    try {
        mixed = mix_training_sets(std::move(sources), seed);
    } catch (const DatasetError& e) {
        fail(kExitConfig, e.what());
    }
    if (mixed.empty()) fail(kExitEmpty, "the mix is empty");
    save_records(o.output, mixed);
    Json manifest;
    manifest["seed"] = seed;
    manifest["sources"] = parts;
    manifest["output"] = manifest_entry(o.output, mixed.size());
    const auto manifest_path = o.manifest.empty() ? (fs::path(dir_of(o.output)) / "mix_manifest.json").string()
                                                  : o.manifest;
    write_text(manifest_path, manifest.dump(2) + "\n");
    write_run_config(sub, dir_of(o.output));
    err << mixed.size() << " records mixed\n";
    return kExitOk;
}

int cmd_kfold(const Options& o, const CLI::App& sub, std::ostream& err) {
    const auto seed = require_seed(o);
    auto records = load_records(o.input);
    std::vector<Fold> folds;
    try {
        folds = kfold(std::move(records), o.k, seed);
    } catch (const DatasetError& e) {
        fail(kExitConfig, e.what());
    }
    const fs::path dir(o.out_dir);
    fs::create_directories(dir);
    Json all = Json::array();
    for (std::size_t i = 0; i < folds.size(); ++i) {
        const auto stem = "fold_" + std::to_string(i + 1);
        const auto train = (dir / (stem + "_train.jsonl")).string();
        const auto test = (dir / (stem + "_test.jsonl")).string();
        save_records(train, folds[i].train);
        save_records(test, folds[i].test);
        Json m;
        m["fold"] = i + 1;
        m["k"] = o.k;
        m["seed"] = seed;
        m["train"] = manifest_entry(train, folds[i].train.size());
        m["test"] = manifest_entry(test, folds[i].test.size());
        write_text((dir / (stem + "_manifest.json")).string(), m.dump(2) + "\n");
        all.push_back(m);
    }
    write_text((dir / "kfold_manifest.json").string(), Json{{"input", o.input}, {"folds", all}}.dump(2) + "\n");
    write_run_config(sub, dir.string());
    err << folds.size() << " folds written\n";
    return kExitOk;
}

int cmd_export(const Options& o, const CLI::App& sub, std::ostream& err) {
    const auto seed = require_seed(o);
    if (o.mode != "train" && o.mode != "test") fail(kExitConfig, "--mode must be train or test");
    const auto records = load_records(o.input);
    if (records.empty()) fail(kExitEmpty, "input has no records");
    const auto labels = load_region_labels(o.region_labels);
    const auto manifest_path =
        o.manifest.empty() ? (fs::path(dir_of(o.output)) / "export_manifest.json").string() : o.manifest;
    ensure_parent(o.output);
    ensure_parent(manifest_path);
    try {
        const auto m = export_finetune_dataset(records, labels, o.output, manifest_path,
                                               o.mode == "train" ? FinetuneMode::Train : FinetuneMode::Test, seed,
                                               o.finetune);
        err << m.count << " examples exported, sha256 " << m.checksum_sha256 << "\n";
    } catch (const PromptError& e) {
        fail(e.kind() == PromptError::Kind::EmptyExport ? kExitEmpty : kExitConfig, e.what());
    }
    write_run_config(sub, dir_of(o.output));
    return kExitOk;
}

int cmd_predict(const Options& o, const CLI::App& sub, std::ostream& err) {
    PromptPattern pattern;
    try {
        pattern = parse_pattern(o.pattern);
    } catch (const PromptError& e) {
        fail(kExitConfig, e.what());
    }
    auto records = load_records(o.input);
    if (records.empty()) fail(kExitEmpty, "input has no records");
    if (o.sample > 0 && o.sample < records.size()) {
        SeededRng rng(require_seed(o));
        std::vector<std::size_t> idx(records.size());
        std::iota(idx.begin(), idx.end(), 0);
        rng.shuffle(idx);
        idx.resize(o.sample);
        std::sort(idx.begin(), idx.end());
        std::vector<OccurrenceRecord> subset;
        for (auto i : idx) subset.push_back(records[i]);
        records = std::move(subset);
    }

    std::unique_ptr<ChatBackend> backend;
    try {
        if (!o.mock_responses.empty()) {
            std::ifstream in(o.mock_responses, std::ios::binary);
            if (!in) fail(kExitConfig, "cannot open " + o.mock_responses);
            auto mock = std::make_unique<MockChatBackend>(o.backend.model_name.empty() ? "mock" : o.backend.model_name);
            mock->load_jsonl(in);
            backend = std::move(mock);
        } else {
            backend = std::make_unique<HttpChatBackend>(o.backend);
        }
    } catch (const LlmError& e) {
        fail(kExitConfig, e.what());
    } catch (const std::invalid_argument& e) {
        fail(kExitConfig, e.what());
    } catch (const std::runtime_error& e) {
        fail(kExitConfig, e.what());
    }

    std::optional<ResponseCache> cache;
    if (!o.no_cache) {
        const auto path = o.cache.empty() ? (fs::path(dir_of(o.output)) / "response_cache.jsonl").string() : o.cache;
        ensure_parent(path);
        cache.emplace(path);
    }

    BatchOptions opts;
    opts.parallelism = o.parallelism;
    opts.cache = cache ? &*cache : nullptr;
    opts.region_labels = load_region_labels(o.region_labels);

    ensure_parent(o.output);
    std::ostringstream log;
    opts.prediction_log = &log;
    std::vector<Prediction> preds;
    try {
        preds = batch_predict(records, pattern, *backend, opts);
    } catch (const LlmError& e) {
        fail(e.kind() == LlmError::Kind::BadConfig ? kExitConfig : kExitUpstream, e.what());
    } catch (const PromptError& e) {
        fail(kExitConfig, e.what());
    }
    write_text(o.output, log.str());
    write_run_config(sub, dir_of(o.output));
    const auto ok = std::count_if(preds.begin(), preds.end(), [](const Prediction& p) { return p.parsed.ok(); });
    err << preds.size() << " predictions, " << ok << " with coordinates\n";
    return kExitOk;
}

int cmd_baseline(const Options& o, const CLI::App& sub, std::ostream& err) {
    const auto records = load_records(o.input);
    if (records.empty()) fail(kExitEmpty, "input has no records");
    const auto timeout = std::chrono::milliseconds(static_cast<int>(o.http_timeout * 1000));
    auto local = load_local_gazetteer(o);

    std::unique_ptr<Gazetteer> web;
    Gazetteer* gaz = nullptr;
    try {
        if (o.gazetteer == "local") {
            if (!local) fail(kExitConfig, "--gazetteer local needs --gazetteer-file");
            gaz = &*local;
        } else if (o.gazetteer == "geonames") {
            web = std::make_unique<GeoNamesWeb>(o.gazetteer_url.empty() ? "http://api.geonames.org" : o.gazetteer_url,
                                                o.geonames_user_env, timeout);
            gaz = web.get();
        } else if (o.gazetteer == "nominatim") {
            web = std::make_unique<NominatimWeb>(
                o.gazetteer_url.empty() ? "https://nominatim.openstreetmap.org" : o.gazetteer_url, o.user_agent,
                timeout);
            gaz = web.get();
        } else {
            fail(kExitConfig, "--gazetteer must be local, geonames or nominatim");
        }
    } catch (const GazetteerError& e) {
        fail(kExitConfig, e.what());
    }

    std::optional<CachingGazetteer> cached;
    auto cache_path = o.lookup_cache;
    if (cache_path.empty() && web) cache_path = (fs::path(dir_of(o.output)) / "gazetteer_cache.jsonl").string();
    if (!cache_path.empty()) {
        ensure_parent(cache_path);
        cached.emplace(*gaz, cache_path);
        gaz = &*cached;
    }

    const auto ner = make_ner(o, local ? &*local : nullptr);
    BaselineConfig config;
    config.dbscan = DbscanParams{o.eps_km, o.min_pts};
    config.max_rows = o.max_rows;
    config.use_state = !o.no_state;
    try {
        config.dbscan.validate();
    } catch (const std::invalid_argument& e) {
        fail(kExitConfig, e.what());
    }

    std::vector<Prediction> preds;
    try {
        preds = batch_georeference(records, *ner, *gaz, config, o.parallelism);
    } catch (const GazetteerError& e) {
        fail(e.kind() == GazetteerError::Kind::BadFile ? kExitConfig : kExitUpstream, e.what());
    }
    std::ostringstream log;
    write_prediction_log(log, preds);
    write_text(o.output, log.str());
    write_run_config(sub, dir_of(o.output));
    const auto ok = std::count_if(preds.begin(), preds.end(), [](const Prediction& p) { return p.parsed.ok(); });
    err << preds.size() << " predictions, " << ok << " with coordinates\n";
    return kExitOk;
}

int cmd_evaluate(const Options& o, const CLI::App& sub, std::ostream& err) {
    if (o.predictions.empty()) fail(kExitConfig, "at least one --predictions log is required");
    const auto records = load_records(o.truth);
    const auto truths = truth_map(records);
    std::vector<ReportFormat> formats;
    for (const auto& f : o.formats) {
        try {
            formats.push_back(parse_report_format(f));
        } catch (const std::invalid_argument& e) {
            fail(kExitConfig, e.what());
        }
    }

    std::vector<EvaluationSummary> summaries;
    std::vector<EvaluationSummary> by_length;
    Json correlations = Json::array();
    std::set<std::string> used;
    try {
        for (const auto& path : o.predictions) {
            std::vector<Prediction> preds;
            try {
                preds = read_prediction_log_file(path);
            } catch (const std::exception& e) {
                fail(kExitConfig, e.what());
            }
            if (preds.empty()) fail(kExitEmpty, path + " holds no predictions");
            auto label = preds.front().method.label();
            for (int n = 2; used.count(label); ++n) label = preds.front().method.label() + " #" + std::to_string(n);
            used.insert(label);

            summaries.push_back(summarize(preds, truths, o.radii, label));
            if (o.by_length) {
                for (auto& bin : summarize_by_length(preds, truths, records, o.length_bins, o.radii)) {
                    bin.summary.label = label + ": " + bin.label;
                    by_length.push_back(std::move(bin.summary));
                }
            }
            if (o.correlation) {
                std::unordered_map<std::string, std::size_t> length_of;
                for (const auto& r : records) length_of[r.id] = text::scalar_count(r.locality);
                std::vector<double> lengths, errors;
                for (const auto& p : preds) {
                    if (!p.parsed.point) continue;
                    lengths.push_back(static_cast<double>(length_of.at(p.record_id)));
                    errors.push_back(simple_accuracy_error(*p.parsed.point, truths.at(p.record_id)).value());
                }
                Json c{{"label", label}, {"x", "length_chars"}, {"y", "sae_km"}};
                try {
                    const auto r = spearman(lengths, errors);
                    c["rho"] = r.rho;
                    c["p_value"] = r.p_value;
                    c["n"] = r.n;
                } catch (const EvalError& e) {
                    c["rho"] = nullptr;
                    c["error"] = e.what();
                }
                correlations.push_back(std::move(c));
            }
        }
    } catch (const EvalError& e) {
        fail(kExitConfig, e.what());
    }

    const fs::path dir(o.out_dir);
    fs::create_directories(dir);
    auto ext = [](ReportFormat f) {
        return f == ReportFormat::Csv ? ".csv" : f == ReportFormat::Json ? ".json" : ".md";
    };
    for (auto f : formats) {
        write_report(summaries, (dir / (std::string("report") + ext(f))).string(), f);
        if (o.by_length) write_report(by_length, (dir / (std::string("length_report") + ext(f))).string(), f);
    }
    if (o.correlation) write_text((dir / "correlation.json").string(), correlations.dump(2) + "\n");
    write_run_config(sub, dir.string());
    err << summaries.size() << " prediction logs evaluated\n";
    return kExitOk;
}

IndicatorLexicon load_lexicon(const Options& o) {
    try {
        return o.lexicon.empty() ? IndicatorLexicon::builtin() : IndicatorLexicon::from_file(o.lexicon);
    } catch (const LexiconError& e) {
        fail(kExitConfig, e.what());
    }
}

int cmd_analyze(const Options& o, const CLI::App& sub, std::ostream& err) {
    const auto records = load_records(o.input);
    if (records.empty()) fail(kExitEmpty, "input has no records");
    const auto lexicon = load_lexicon(o);
    auto local = load_local_gazetteer(o);
    const auto ner = make_ner(o, local ? &*local : nullptr);
    std::vector<AnalysisRow> rows;
    try {
        for (const auto& r : records) rows.push_back(analyze_record(r, *ner, lexicon));
    } catch (const GazetteerError& e) {
        fail(kExitUpstream, e.what());
    }
    std::ostringstream csv;
    write_analysis_csv(csv, rows);
    write_text(o.output, csv.str());
    write_run_config(sub, dir_of(o.output));
    err << rows.size() << " records analysed\n";
    return kExitOk;
}

std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

int cmd_perturb(const Options& o, const CLI::App& sub, std::ostream& err) {
    auto records = load_records(o.input);
    if (records.empty()) fail(kExitEmpty, "input has no records");
    const auto lexicon = load_lexicon(o);
    std::ostringstream diff;
    diff << "id,original,perturbed,removed\n";
    std::size_t changed = 0;
    for (auto& r : records) {
        auto s = strip_distance_values(r.locality, lexicon);
        if (s.removed.empty()) continue;
        ++changed;
        std::string removed;
        for (const auto& span : s.removed) removed += (removed.empty() ? "" : " | ") + span.text;
        diff << csv_quote(r.id) << ',' << csv_quote(r.locality) << ',' << csv_quote(s.text) << ','
             << csv_quote(removed) << '\n';
        r.locality = std::move(s.text);
    }
    save_records(o.output, records);
    const auto diff_path = o.diff.empty() ? (fs::path(dir_of(o.output)) / "perturb_diff.csv").string() : o.diff;
    write_text(diff_path, diff.str());
    write_run_config(sub, dir_of(o.output));
    err << changed << " of " << records.size() << " localities changed\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// command-line definition

void add_ner_options(CLI::App* sub, Options& o) {
    sub->add_option("--gazetteer-file", o.gazetteer_file, "Local gazetteer CSV (name,lat,lon,country_code,admin1,feature_class)")
        ->check(CLI::ExistingFile);
    sub->add_option("--ner", o.ner, "Place-name extractor")->check(CLI::IsMember({"dictionary", "remote"}));
    sub->add_option("--ner-url", o.ner_url, "Remote NER endpoint URL");
    sub->add_option("--http-timeout", o.http_timeout, "Timeout for gazetteer and NER requests, seconds");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Georeferencing of locality descriptions: datasets, prompts, LLM and gazetteer predictions, evaluation"};
    app.name("georef");
    app.option_defaults()->always_capture_default();
    app.set_config("--config", "", "INI file; [subcommand] sections hold option values");
    app.require_subcommand(1);

    auto* ingest = app.add_subcommand("ingest", "Parse an occurrence table into a canonical record file");
    ingest->add_option("--input", o.input, "CSV or TSV occurrence table")->required()->check(CLI::ExistingFile);
    ingest->add_option("--output", o.output, "Record file (JSON lines)")->required();
    ingest->add_option("--source-label", o.source_label, "Dataset label stamped on every record");
    ingest->add_option("--errors", o.errors_path, "Row-error report (CSV)");
    ingest->add_option("--col-locality", o.columns.locality, "Locality column");
    ingest->add_option("--col-lat", o.columns.latitude, "Latitude column");
    ingest->add_option("--col-lon", o.columns.longitude, "Longitude column");
    ingest->add_option("--col-country", o.columns.country_code, "Country-code column");
    ingest->add_option("--col-state", o.columns.state_province, "State/province column (empty: none)");
    ingest->add_option("--col-id", o.columns.id, "Identifier column (empty: row number)");
    ingest->add_flag("--id-required", o.columns.id_required, "Fail when the identifier column is missing");

    auto* split_cmd = app.add_subcommand("split", "Seeded train/validation/test split");
    split_cmd->add_option("--input", o.input, "Record file")->required()->check(CLI::ExistingFile);
    split_cmd->add_option("--out-dir", o.out_dir, "Output directory")->required();
    split_cmd->add_option("--ratios", o.ratios, "train,validation,test")->delimiter(',')->expected(3);
    split_cmd->add_option("--seed", o.seed, "Shuffle seed");

    auto* mix = app.add_subcommand("mix", "Sample and combine training sets");
    mix->add_option("--input", o.inputs, "Record files")->required()->check(CLI::ExistingFile);
    mix->add_option("--fraction", o.fractions, "Fraction of each input to sample")->required();
    mix->add_option("--label", o.labels, "Source label per input (default: file stem)");
    mix->add_option("--output", o.output, "Mixed record file")->required();
    mix->add_option("--manifest", o.manifest, "Manifest path (default: mix_manifest.json next to output)");
    mix->add_option("--seed", o.seed, "Sampling seed");

    auto* kfold_cmd = app.add_subcommand("kfold", "Seeded k-fold partition");
    kfold_cmd->add_option("--input", o.input, "Record file")->required()->check(CLI::ExistingFile);
    kfold_cmd->add_option("--out-dir", o.out_dir, "Output directory")->required();
    kfold_cmd->add_option("--k", o.k, "Number of folds");
    kfold_cmd->add_option("--seed", o.seed, "Shuffle seed");

    auto* exp = app.add_subcommand("export-finetune", "Write fine-tuning examples and a manifest");
    exp->add_option("--input", o.input, "Record file")->required()->check(CLI::ExistingFile);
    exp->add_option("--output", o.output, "Examples (JSON lines)")->required();
    exp->add_option("--manifest", o.manifest, "Manifest path (default: export_manifest.json next to output)");
    exp->add_option("--mode", o.mode, "train (with completion) or test")->check(CLI::IsMember({"train", "test"}));
    exp->add_option("--region-labels", o.region_labels, "TSV: country_code, state, label")->check(CLI::ExistingFile);
    exp->add_option("--seed", o.seed, "Seed of the split being exported (recorded)");
    exp->add_option("--learning-rate", o.finetune.learning_rate, "Recorded hyperparameter");
    exp->add_option("--batch-size", o.finetune.batch_size, "Recorded hyperparameter");
    exp->add_option("--lora-rank", o.finetune.lora_rank, "Recorded hyperparameter");
    exp->add_option("--lora-alpha", o.finetune.lora_alpha, "Recorded hyperparameter");
    exp->add_option("--epochs", o.finetune.epochs, "Recorded hyperparameter");

    auto* predict = app.add_subcommand("predict", "Georeference records with a chat-completion model");
    predict->add_option("--input", o.input, "Record file")->required()->check(CLI::ExistingFile);
    predict->add_option("--output", o.output, "Prediction log (JSON lines)")->required();
    predict->add_option("--pattern", o.pattern, "Prompt pattern");
    predict->add_option("--base-url", o.backend.base_url, "Endpoint base URL");
    predict->add_option("--model", o.backend.model_name, "Model name");
    predict->add_option("--api-key-env", o.backend.api_key_env, "Environment variable holding the API key");
    predict->add_option("--temperature", o.backend.temperature, "Sampling temperature");
    predict->add_option("--max-output-tokens", o.backend.max_output_tokens, "Completion token limit");
    predict->add_option("--timeout", o.backend.timeout_seconds, "Request timeout, seconds");
    predict->add_option("--max-retries", o.backend.max_retries, "Retries for transient failures");
    predict->add_option("--rate-limit", o.backend.rate_limit, "Requests per second (0: unlimited)");
    predict->add_option("--backoff-base", o.backend.backoff_base_seconds, "First retry delay, seconds");
    predict->add_option("--parallelism", o.parallelism, "Concurrent requests")->check(CLI::PositiveNumber);
    predict->add_option("--cache", o.cache, "Response cache (default: response_cache.jsonl next to output)");
    predict->add_flag("--no-cache", o.no_cache, "Disable the response cache");
    predict->add_option("--mock-responses", o.mock_responses, "Offline backend: JSON lines of {prompt, response}")
        ->check(CLI::ExistingFile);
    predict->add_option("--region-labels", o.region_labels, "TSV: country_code, state, label")->check(CLI::ExistingFile);
    predict->add_option("--sample", o.sample, "Predict a seeded random subset of this size");
    predict->add_option("--seed", o.seed, "Seed for --sample");

    auto* baseline = app.add_subcommand("baseline", "Gazetteer-matching baseline");
    baseline->add_option("--input", o.input, "Record file")->required()->check(CLI::ExistingFile);
    baseline->add_option("--output", o.output, "Prediction log (JSON lines)")->required();
    baseline->add_option("--gazetteer", o.gazetteer, "Candidate source")
        ->check(CLI::IsMember({"local", "geonames", "nominatim"}));
    baseline->add_option("--gazetteer-url", o.gazetteer_url, "Web gazetteer base URL");
    baseline->add_option("--geonames-user-env", o.geonames_user_env, "Environment variable holding the GeoNames account");
    baseline->add_option("--user-agent", o.user_agent, "User-Agent sent to Nominatim");
    baseline->add_option("--lookup-cache", o.lookup_cache, "Lookup cache (default for web sources: next to output)");
    baseline->add_option("--eps-km", o.eps_km, "DBSCAN neighbourhood radius, km");
    baseline->add_option("--min-pts", o.min_pts, "DBSCAN core-point threshold");
    baseline->add_option("--max-rows", o.max_rows, "Candidates per place name");
    baseline->add_flag("--no-state", o.no_state, "Do not restrict lookups to the record's state/province");
    baseline->add_option("--parallelism", o.parallelism, "Records processed concurrently")->check(CLI::PositiveNumber);
    add_ner_options(baseline, o);

    auto* evaluate = app.add_subcommand("evaluate", "Score prediction logs against truth");
    evaluate->add_option("--predictions", o.predictions, "Prediction logs")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--truth", o.truth, "Record file with true coordinates")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--out-dir", o.out_dir, "Report directory")->required();
    evaluate->add_option("--radii", o.radii, "Accuracy radii, km")->delimiter(',');
    evaluate->add_option("--formats", o.formats, "csv, json, markdown")
        ->delimiter(',')
        ->check(CLI::IsMember({"csv", "json", "markdown"}));
    evaluate->add_flag("--by-length", o.by_length, "Also report by locality length");
    evaluate->add_option("--length-bins", o.length_bins, "Length bin boundaries, characters")->delimiter(',');
    evaluate->add_flag("--correlation", o.correlation, "Spearman correlation of length and error");

    auto* analyze = app.add_subcommand("analyze", "Count spatial indicators and place names per record");
    analyze->add_option("--input", o.input, "Record file")->required()->check(CLI::ExistingFile);
    analyze->add_option("--output", o.output, "Indicator CSV")->required();
    analyze->add_option("--lexicon", o.lexicon, "Indicator lexicon (default: built in)")->check(CLI::ExistingFile);
    add_ner_options(analyze, o);

    auto* perturb = app.add_subcommand("perturb", "Remove distance values from localities");
    perturb->add_option("--input", o.input, "Record file")->required()->check(CLI::ExistingFile);
    perturb->add_option("--output", o.output, "Perturbed record file")->required();
    perturb->add_option("--diff", o.diff, "Changed rows (default: perturb_diff.csv next to output)");
    perturb->add_option("--lexicon", o.lexicon, "Indicator lexicon (default: built in)")->check(CLI::ExistingFile);

    std::vector<const char*> argv{"georef"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*ingest) return cmd_ingest(o, *ingest, err);
        if (*split_cmd) return cmd_split(o, *split_cmd, err);
        if (*mix) return cmd_mix(o, *mix, err);
        if (*kfold_cmd) return cmd_kfold(o, *kfold_cmd, err);
        if (*exp) return cmd_export(o, *exp, err);
        if (*predict) return cmd_predict(o, *predict, err);
        if (*baseline) return cmd_baseline(o, *baseline, err);
        if (*evaluate) return cmd_evaluate(o, *evaluate, err);
        if (*analyze) return cmd_analyze(o, *analyze, err);
        if (*perturb) return cmd_perturb(o, *perturb, err);
    } catch (const Failure& f) {
        err << "georef: " << f.what() << "\n";
        return f.code;
    } catch (const fs::filesystem_error& e) {
        err << "georef: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "georef: unexpected error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}

int run_cli(int argc, const char* const* argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace georef
