#include "georef/eval.hpp"

#include "georef/text.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace georef {

ReportFormat parse_report_format(const std::string& name) {
    if (name == "csv") return ReportFormat::Csv;
    if (name == "json") return ReportFormat::Json;
    if (name == "markdown" || name == "md") return ReportFormat::Markdown;
    throw std::invalid_argument("unknown report format '" + name + "' (csv, json, markdown)");
}

namespace {

std::string radius_label(double km) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", km);
    return std::string("Accuracy@") + buf + "km";
}

std::string percent(double fraction) { return text::format_fixed(fraction * 100.0, 2) + "%"; }

std::string km(const std::optional<double>& v) { return v ? text::format_fixed(*v, 2) + "km" : "n/a"; }

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

// Columns in display order: largest radius first.
std::vector<double> radii_of(const EvaluationSummary& s) {
    std::vector<double> r;
    for (auto it = s.accuracy_at.rbegin(); it != s.accuracy_at.rend(); ++it) r.push_back(it->first);
    return r;
}

std::vector<std::string> header_for(const std::vector<double>& radii) {
    std::vector<std::string> h{"Model", "No of records", "Failed"};
    for (double r : radii) h.push_back(radius_label(r));
    h.emplace_back("Med SAE");
    h.emplace_back("Mean SAE");
    return h;
}

std::vector<std::string> row_for(const EvaluationSummary& s) {
    std::vector<std::string> row{s.label, std::to_string(s.n_total), std::to_string(s.n_failed)};
    for (auto it = s.accuracy_at.rbegin(); it != s.accuracy_at.rend(); ++it) row.push_back(percent(it->second));
    row.push_back(km(s.median_sae_km));
    row.push_back(km(s.mean_sae_km));
    return row;
}

std::string render_csv(const std::vector<EvaluationSummary>& summaries) {
    std::ostringstream out;
    auto emit = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << csv_field(cells[i]);
        out << '\n';
    };
    emit(header_for(radii_of(summaries.front())));
    for (const auto& s : summaries) emit(row_for(s));
    return out.str();
}

std::string render_markdown(const std::vector<EvaluationSummary>& summaries) {
    std::ostringstream out;
    auto emit = [&](const std::vector<std::string>& cells) {
        out << '|';
        for (const auto& c : cells) out << ' ' << c << " |";
        out << '\n';
    };
    const auto header = header_for(radii_of(summaries.front()));
    emit(header);
    out << '|';
    for (std::size_t i = 0; i < header.size(); ++i) out << (i == 0 ? " --- |" : " ---: |");
    out << '\n';
    for (const auto& s : summaries) emit(row_for(s));
    return out.str();
}

std::string render_json(const std::vector<EvaluationSummary>& summaries) {
    using Json = nlohmann::ordered_json;
    Json arr = Json::array();
    for (const auto& s : summaries) {
        Json j;
        j["label"] = s.label;
        j["n_total"] = s.n_total;
        j["n_failed"] = s.n_failed;
        Json acc = Json::object();
        for (auto it = s.accuracy_at.rbegin(); it != s.accuracy_at.rend(); ++it) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%g", it->first);
            acc[buf] = it->second;
        }
        j["accuracy_at_km"] = acc;
        j["median_sae_km"] = s.median_sae_km ? Json(*s.median_sae_km) : Json(nullptr);
        j["mean_sae_km"] = s.mean_sae_km ? Json(*s.mean_sae_km) : Json(nullptr);
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

}  // namespace

std::string render_report(const std::vector<EvaluationSummary>& summaries, ReportFormat format) {
    if (summaries.empty()) throw EvalError(EvalError::Kind::EmptyReport, "nothing to report");
    switch (format) {
        case ReportFormat::Csv: return render_csv(summaries);
        case ReportFormat::Json: return render_json(summaries);
        case ReportFormat::Markdown: return render_markdown(summaries);
    }
    return {};
}

void write_report(const std::vector<EvaluationSummary>& summaries, const std::string& path, ReportFormat format) {
    const auto body = render_report(summaries, format);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw EvalError(EvalError::Kind::Io, "cannot write report " + path);
    out << body;
    if (!out.flush()) throw EvalError(EvalError::Kind::Io, "write failed for " + path);
}

}  // namespace georef
