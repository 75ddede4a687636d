#include "georef/prediction.hpp"

#include "georef/text.hpp"

#include <json.hpp>

#include <fstream>
#include <stdexcept>

namespace georef {

using Json = nlohmann::ordered_json;

std::string_view Method::kind_name() const noexcept {
    return kind == Kind::Llm ? "llm" : "gazetteer_baseline";
}

std::string Method::label() const {
    if (kind == Kind::GazetteerBaseline) return "gazetteer_baseline/" + model;
    return model + "/" + std::string(pattern_name(pattern));
}

std::string Prediction::status() const {
    if (!error.empty()) return "error:" + error;
    return std::string(to_string(parsed.ok() ? ParseFailure::None : parsed.failure));
}

void write_prediction_log(std::ostream& out, const std::vector<Prediction>& predictions) {
    for (const auto& p : predictions) {
        Json j;
        j["record_id"] = p.record_id;
        j["method"] = p.method.kind_name();
        j["pattern"] = p.method.kind == Method::Kind::Llm ? Json(pattern_name(p.method.pattern)) : Json(nullptr);
        j["model"] = p.method.model;
        j["raw_response"] = p.parsed.raw;
        j["lat"] = p.parsed.point ? Json(p.parsed.point->lat()) : Json(nullptr);
        j["lon"] = p.parsed.point ? Json(p.parsed.point->lon()) : Json(nullptr);
        j["status"] = p.status();
        j["latency_ms"] = p.latency_ms;
        j["attempts"] = p.attempts;
        out << j.dump(-1, ' ', false, Json::error_handler_t::replace) << '\n';
    }
}

namespace {

ParseFailure failure_from_status(const std::string& status) {
    if (status == "out_of_range") return ParseFailure::OutOfRange;
    if (status == "ambiguous") return ParseFailure::Ambiguous;
    return ParseFailure::NoCoordinates;
}

}  // namespace

std::vector<Prediction> read_prediction_log(std::istream& in) {
    std::vector<Prediction> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
            auto j = Json::parse(line);
            Prediction p;
            p.record_id = j.at("record_id").get<std::string>();
            const auto kind = j.at("method").get<std::string>();
            if (kind == "llm") {
                p.method.kind = Method::Kind::Llm;
                p.method.pattern = parse_pattern(j.at("pattern").get<std::string>());
            } else if (kind == "gazetteer_baseline") {
                p.method.kind = Method::Kind::GazetteerBaseline;
            } else {
                throw std::runtime_error("unknown method " + kind);
            }
            p.method.model = j.value("model", std::string());
            p.parsed.raw = j.value("raw_response", std::string());
            p.latency_ms = j.value("latency_ms", std::int64_t{0});
            p.attempts = j.value("attempts", 0);
            const auto status = j.at("status").get<std::string>();
            if (status.rfind("error:", 0) == 0) {
                p.error = status.substr(6);
                p.parsed.failure = ParseFailure::NoCoordinates;
            } else if (status == "ok") {
                p.parsed.point = validate_point(j.at("lat").get<double>(), j.at("lon").get<double>());
                p.parsed.failure = ParseFailure::None;
            } else {
                p.parsed.failure = failure_from_status(status);
            }
            out.push_back(std::move(p));
        } catch (const std::exception& e) {
            throw std::runtime_error("prediction log line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::vector<Prediction> read_prediction_log_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_prediction_log(in);
}

}  // namespace georef
