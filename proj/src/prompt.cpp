#include "georef/prompt.hpp"

#include "georef/assets.hpp"
#include "georef/text.hpp"

#include <json.hpp>

#include <array>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace georef {

namespace {

constexpr std::array kPatterns = {
    PromptPattern::ZeroShot,
    PromptPattern::ZeroShotCoT,
    PromptPattern::CoT,
    PromptPattern::ContextControl,
    PromptPattern::Persona,
    PromptPattern::ContextControlVariant2,
    PromptPattern::ContextControlPersonaVariant,
};

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
    return s;
}

std::string as_sentence(std::string_view locality) {
    std::string out(locality);
    if (out.empty()) return out;
    char last = out.back();
    if (last != '.' && last != '!' && last != '?') out.push_back('.');
    return out;
}

const std::unordered_map<std::string, std::string>& country_table() {
    static const auto table = [] {
        std::unordered_map<std::string, std::string> t;
        auto tsv = embedded_asset("countries.tsv");
        std::istringstream in{std::string(tsv.value_or(""))};
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            auto tab = line.find('\t');
            if (tab == std::string::npos) continue;
            t.emplace(line.substr(0, tab), line.substr(tab + 1));
        }
        return t;
    }();
    return table;
}

std::string upper(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace

std::span<const PromptPattern> all_patterns() noexcept { return kPatterns; }

std::string_view pattern_name(PromptPattern pattern) noexcept {
    switch (pattern) {
        case PromptPattern::ZeroShot: return "zero_shot";
        case PromptPattern::ZeroShotCoT: return "zero_shot_cot";
        case PromptPattern::CoT: return "cot";
        case PromptPattern::ContextControl: return "context_control";
        case PromptPattern::Persona: return "persona";
        case PromptPattern::ContextControlVariant2: return "context_control_variant2";
        case PromptPattern::ContextControlPersonaVariant: return "context_control_persona_variant";
    }
    return "unknown";
}

PromptPattern parse_pattern(std::string_view name) {
    for (auto p : kPatterns) {
        if (pattern_name(p) == name) return p;
    }
    throw PromptError(PromptError::Kind::UnknownPattern, "unknown prompt pattern: " + std::string(name));
}

bool is_context_bearing(PromptPattern pattern) noexcept {
    return pattern == PromptPattern::ContextControl || pattern == PromptPattern::ContextControlVariant2 ||
           pattern == PromptPattern::ContextControlPersonaVariant;
}

std::string_view template_text(PromptPattern pattern) {
    std::string path = "prompts/" + std::string(pattern_name(pattern)) + ".txt";
    auto asset = embedded_asset(path);
    if (!asset) throw std::logic_error("missing prompt template asset " + path);
    return *asset;
}

std::string country_name(std::string_view iso2) {
    auto code = upper(text::trim(iso2));
    const auto& table = country_table();
    auto it = table.find(code);
    return it != table.end() ? it->second : code;
}

std::string region_label(const OccurrenceRecord& record) {
    auto country = country_name(record.country_code);
    auto state = std::string(text::trim(record.state_province));
    if (state.empty()) return country;
    if (country.empty()) return state;
    return state + ", " + country;
}

void RegionLabelMap::set(std::string country_code, std::string state_province, std::string label) {
    overrides_[{upper(country_code), text::collapse_whitespace(state_province)}] = std::move(label);
}

std::string RegionLabelMap::label_for(const OccurrenceRecord& record) const {
    auto it = overrides_.find({upper(record.country_code), text::collapse_whitespace(record.state_province)});
    return it != overrides_.end() ? it->second : region_label(record);
}

RenderedPrompt render_prompt(PromptPattern pattern, const OccurrenceRecord& record,
                             std::string_view region) {
    std::string region_text(text::trim(region));
    if (region_text.empty()) region_text = region_label(record);
    const std::string country = country_name(record.country_code);

    if (is_context_bearing(pattern)) {
        if (region_text.empty()) {
            throw PromptError(PromptError::Kind::MissingContext,
                              "record " + record.id + " has neither region nor country");
        }
        if (pattern == PromptPattern::ContextControlPersonaVariant && country.empty()) {
            throw PromptError(PromptError::Kind::MissingContext, "record " + record.id + " has no country");
        }
    }

    // locality last, so braces inside the locality text are never expanded
    std::string out(template_text(pattern));
    out = replace_all(std::move(out), "{region}", region_text);
    out = replace_all(std::move(out), "{country}", country);
    out = replace_all(std::move(out), "{locality_sentence}", as_sentence(record.locality));
    out = replace_all(std::move(out), "{locality}", record.locality);
    return RenderedPrompt{pattern, std::move(out), record.id};
}

std::string completion_line(const GeoPoint& point) {
    return "Coordinates: " + text::format_fixed(point.lat(), 6) + ", " + text::format_fixed(point.lon(), 6);
}

std::string render_finetune_example(const OccurrenceRecord& record, std::string_view region,
                                    FinetuneMode mode) {
    auto prompt = render_prompt(PromptPattern::ContextControl, record, region).text;
    if (mode == FinetuneMode::Train) {
        prompt += '\n';
        prompt += completion_line(record.truth);
    }
    return prompt;
}

ExportManifest export_finetune_dataset(const std::vector<OccurrenceRecord>& records,
                                       const RegionLabelMap& labels, const std::string& jsonl_path,
                                       const std::string& manifest_path, FinetuneMode mode,
                                       std::uint64_t seed, const FinetuneExportConfig& config) {
    if (records.empty()) {
        throw PromptError(PromptError::Kind::EmptyExport, "no records to export");
    }

    std::string body;
    for (const auto& r : records) {
        nlohmann::ordered_json line;
        line["id"] = r.id;
        line["text"] = render_finetune_example(r, labels.label_for(r), mode);
        body += line.dump();
        body += '\n';
    }

    {
        std::ofstream out(jsonl_path, std::ios::binary | std::ios::trunc);
        if (!out || !out.write(body.data(), static_cast<std::streamsize>(body.size()))) {
            throw PromptError(PromptError::Kind::Io, "cannot write " + jsonl_path);
        }
    }

    ExportManifest manifest;
    manifest.count = records.size();
    manifest.seed = seed;
    manifest.mode = mode;
    manifest.config = config;
    manifest.checksum_sha256 = text::sha256_hex(body);

    nlohmann::ordered_json doc;
    doc["count"] = manifest.count;
    doc["seed"] = manifest.seed;
    doc["mode"] = mode == FinetuneMode::Train ? "train" : "test";
    doc["prompt_pattern"] = pattern_name(PromptPattern::ContextControl);
    doc["checksum_sha256"] = manifest.checksum_sha256;
    doc["learning_rate"] = config.learning_rate;
    doc["batch_size"] = config.batch_size;
    doc["lora_rank"] = config.lora_rank;
    doc["lora_alpha"] = config.lora_alpha;
    doc["epochs"] = config.epochs;

    std::ofstream out(manifest_path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << doc.dump(2) << '\n')) {
        throw PromptError(PromptError::Kind::Io, "cannot write " + manifest_path);
    }
    return manifest;
}

}  // namespace georef
