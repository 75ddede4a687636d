#pragma once

#include "georef/dataset.hpp"
#include "georef/geo.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace georef {

enum class PromptPattern {
    ZeroShot,
    ZeroShotCoT,
    CoT,
    ContextControl,
    Persona,
    ContextControlVariant2,
    ContextControlPersonaVariant,
};

std::span<const PromptPattern> all_patterns() noexcept;

/// Stable snake_case name, used in config files, logs and cache keys.
std::string_view pattern_name(PromptPattern pattern) noexcept;

class PromptError : public std::runtime_error {
public:
    enum class Kind { MissingContext, UnknownPattern, EmptyExport, Io };

    PromptError(Kind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Throws PromptError(UnknownPattern).
PromptPattern parse_pattern(std::string_view name);

/// Patterns whose template names the region the locality lies in.
bool is_context_bearing(PromptPattern pattern) noexcept;

/// Raw template with {locality}, {locality_sentence}, {region} and
/// {country} placeholders.
std::string_view template_text(PromptPattern pattern);

/// English short name for an ISO-3166 alpha-2 code; the code itself when unknown.
std::string country_name(std::string_view iso2);

/// "<stateProvince>, <country name>", or the country name alone.
std::string region_label(const OccurrenceRecord& record);

/// Per-(country, state) overrides of the composed region label.
class RegionLabelMap {
public:
    void set(std::string country_code, std::string state_province, std::string label);
    std::string label_for(const OccurrenceRecord& record) const;

private:
    std::map<std::pair<std::string, std::string>, std::string> overrides_;
};

struct RenderedPrompt {
    PromptPattern pattern;
    std::string text;
    std::string record_id;
};

/**
 * Instantiates the pattern template for one record. An empty
 * region_label falls back to region_label(record). Context-bearing
 * patterns throw PromptError(MissingContext) when no region can be formed.
 */
RenderedPrompt render_prompt(PromptPattern pattern, const OccurrenceRecord& record,
                             std::string_view region_label);

enum class FinetuneMode { Train, Test };

/// "Coordinates: <lat>, <lon>" with six decimals.
std::string completion_line(const GeoPoint& point);

/// ContextControl prompt, plus the completion line in Train mode.
std::string render_finetune_example(const OccurrenceRecord& record, std::string_view region_label,
                                    FinetuneMode mode = FinetuneMode::Train);

/// Training hyperparameters written alongside an export. Metadata only.
struct FinetuneExportConfig {
    double learning_rate = 2e-4;
    int batch_size = 32;
    int lora_rank = 32;
    int lora_alpha = 64;
    int epochs = 3;
};

struct ExportManifest {
    std::size_t count = 0;
    std::uint64_t seed = 0;
    FinetuneMode mode = FinetuneMode::Train;
    FinetuneExportConfig config;
    std::string checksum_sha256;  // of the JSONL bytes
};

/**
 * Writes one {"id", "text"} JSON object per line to jsonl_path and a
 * manifest JSON document to manifest_path.
 * Throws PromptError(EmptyExport | Io).
 */
ExportManifest export_finetune_dataset(const std::vector<OccurrenceRecord>& records,
                                       const RegionLabelMap& labels, const std::string& jsonl_path,
                                       const std::string& manifest_path, FinetuneMode mode,
                                       std::uint64_t seed, const FinetuneExportConfig& config = {});

enum class ParseFailure { None, NoCoordinates, OutOfRange, Ambiguous };

std::string_view to_string(ParseFailure failure) noexcept;

/// Either a point or a failure, plus the response it came from.
struct ParsedCoordinates {
    std::optional<GeoPoint> point;
    ParseFailure failure = ParseFailure::NoCoordinates;
    std::string raw;

    bool ok() const noexcept { return point.has_value(); }
};

/**
 * @brief Extracts the final decimal-degree pair from a model response.
 *
 * Shapes are tried in priority order and the last match of the first
 * shape that matches wins:
 *   1. "Coordinates: <lat>, <lon>"
 *   2. "Latitude: <x> ... Longitude: <y>" (either order)
 *   3. a parenthesized or comma-separated pair of decimals; the last pair
 *      with a plausible latitude first is preferred
 * Hemisphere letters (N/S/E/W) set signs and may swap the pair.
 * Degree-minute-second values are not parsed.
 */
ParsedCoordinates parse_coordinates(std::string_view response);

}  // namespace georef
