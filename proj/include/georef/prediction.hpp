#pragma once

#include "georef/prompt.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace georef {

struct Method {
    enum class Kind { Llm, GazetteerBaseline };

    Kind kind = Kind::Llm;
    PromptPattern pattern = PromptPattern::ContextControl;  // Llm only
    std::string model;                                      // model name, or gazetteer source

    /// "llm" or "gazetteer_baseline".
    std::string_view kind_name() const noexcept;
    /// Human label for reports, e.g. "llama-8b/context_control".
    std::string label() const;
};

/// One method's answer for one record.
struct Prediction {
    std::string record_id;
    Method method;
    ParsedCoordinates parsed;
    std::int64_t latency_ms = 0;
    int attempts = 0;
    std::string error;  // request failure kind; empty when a response was obtained

    /// ok | no_coordinates | out_of_range | ambiguous | error:<kind>
    std::string status() const;
};

/// Prediction log: one JSON object per line with fields record_id, method,
/// pattern, model, raw_response, lat, lon, status, latency_ms, attempts.
void write_prediction_log(std::ostream& out, const std::vector<Prediction>& predictions);
std::vector<Prediction> read_prediction_log(std::istream& in);
std::vector<Prediction> read_prediction_log_file(const std::string& path);

}  // namespace georef
