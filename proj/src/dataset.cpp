#include "georef/dataset.hpp"

#include "table_reader.hpp"

#include "georef/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <optional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace georef {

using Json = nlohmann::ordered_json;

const char* to_string(RowError::Reason reason) noexcept {
    switch (reason) {
        case RowError::Reason::MissingCoordinate: return "MissingCoordinate";
        case RowError::Reason::BadNumber: return "BadNumber";
        case RowError::Reason::OutOfRange: return "OutOfRange";
        case RowError::Reason::NotFinite: return "NotFinite";
        case RowError::Reason::EmptyLocality: return "EmptyLocality";
        case RowError::Reason::MissingCountry: return "MissingCountry";
        case RowError::Reason::FieldCount: return "FieldCount";
        case RowError::Reason::DuplicateId: return "DuplicateId";
    }
    return "Unknown";
}

namespace {

using detail::Row;
using detail::TableReader;

std::optional<double> parse_double(std::string_view s) {
    s = text::trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw std::invalid_argument(std::string(s));
    }
    return value;
}

}  // namespace

ParseResult parse_occurrences(std::istream& in, const ColumnMap& columns,
                              const std::string& source_label) {
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (data.size() >= 3 && data.compare(0, 3, "\xEF\xBB\xBF") == 0) data.erase(0, 3);

    auto first_line_end = data.find('\n');
    std::string_view header_line(data.data(), first_line_end == std::string::npos ? data.size() : first_line_end);
    if (text::trim(header_line).empty()) {
        throw DatasetError(DatasetError::Kind::HeaderMissing, "input has no header line");
    }
    const char delim = header_line.find('\t') != std::string_view::npos ? '\t' : ',';

    TableReader reader(std::move(data), delim);
    auto header_row = reader.next();
    if (!header_row) {
        throw DatasetError(DatasetError::Kind::HeaderMissing, "input has no header line");
    }

    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < header_row->fields.size(); ++i) {
        index.emplace(std::string(text::trim(header_row->fields[i])), i);
    }
    auto column = [&](const std::string& name, bool required) -> std::optional<std::size_t> {
        if (name.empty()) return std::nullopt;
        auto it = index.find(name);
        if (it != index.end()) return it->second;
        if (required) {
            throw DatasetError(DatasetError::Kind::UnknownColumn, "column not in header: " + name);
        }
        return std::nullopt;
    };

    // a header made only of data (no mapped names) is reported as missing
    if (index.find(columns.locality) == index.end() && index.find(columns.latitude) == index.end() &&
        index.find(columns.longitude) == index.end()) {
        throw DatasetError(DatasetError::Kind::HeaderMissing,
                           "first line does not name the locality/latitude/longitude columns");
    }

    const std::size_t col_locality = *column(columns.locality, true);
    const std::size_t col_lat = *column(columns.latitude, true);
    const std::size_t col_lon = *column(columns.longitude, true);
    const std::size_t col_country = *column(columns.country_code, true);
    const auto col_state = column(columns.state_province, true);
    const auto col_id = column(columns.id, columns.id_required);

    ParseResult result;
    std::unordered_set<std::string> seen_ids;
    std::size_t data_row = 0;

    while (auto row = reader.next()) {
        ++data_row;
        auto fail = [&](RowError::Reason reason, std::string detail) {
            result.errors.push_back({row->line, reason, std::move(detail)});
        };
        const auto& f = row->fields;
        if (f.size() != header_row->fields.size()) {
            fail(RowError::Reason::FieldCount, "expected " + std::to_string(header_row->fields.size()) +
                                                   " fields, got " + std::to_string(f.size()));
            continue;
        }

        std::string locality(text::trim(f[col_locality]));
        if (locality.empty()) {
            fail(RowError::Reason::EmptyLocality, "blank locality");
            continue;
        }

        std::optional<double> lat;
        std::optional<double> lon;
        try {
            lat = parse_double(f[col_lat]);
            lon = parse_double(f[col_lon]);
        } catch (const std::invalid_argument& e) {
            fail(RowError::Reason::BadNumber, std::string("not a number: ") + e.what());
            continue;
        }
        if (!lat || !lon) {
            fail(RowError::Reason::MissingCoordinate, !lat ? "empty latitude" : "empty longitude");
            continue;
        }

        std::optional<GeoPoint> truth;
        try {
            truth = validate_point(*lat, *lon);
        } catch (const GeoError& e) {
            fail(e.kind() == GeoError::Kind::NotFinite ? RowError::Reason::NotFinite
                                                       : RowError::Reason::OutOfRange,
                 e.what());
            continue;
        }

        std::string country(text::trim(f[col_country]));
        if (country.empty()) {
            fail(RowError::Reason::MissingCountry, "blank country code");
            continue;
        }
        std::transform(country.begin(), country.end(), country.begin(),
                       [](unsigned char c) { return static_cast<char>(std::toupper(c)); });

        std::string id = col_id ? std::string(text::trim(f[*col_id])) : std::to_string(data_row);
        if (id.empty()) id = std::to_string(data_row);
        if (!seen_ids.insert(id).second) {
            fail(RowError::Reason::DuplicateId, "duplicate id " + id);
            continue;
        }

        result.records.push_back(OccurrenceRecord{
            std::move(id),
            std::move(locality),
            *truth,
            std::move(country),
            col_state ? std::string(text::trim(f[*col_state])) : std::string(),
            source_label,
        });
    }
    return result;
}

std::string normalized_locality(std::string_view locality) {
    return text::collapse_whitespace(text::case_fold(locality));
}

std::vector<OccurrenceRecord> preprocess(std::vector<OccurrenceRecord> records) {
    std::vector<OccurrenceRecord> kept;
    kept.reserve(records.size());
    std::unordered_set<std::string> seen;
    for (auto& r : records) {
        auto key = normalized_locality(r.locality);
        if (key.empty()) continue;
        if (!seen.insert(std::move(key)).second) continue;
        kept.push_back(std::move(r));
    }
    return kept;
}

std::uint64_t SeededRng::below(std::uint64_t bound) {
    // reject the top partial block so every residue is equally likely
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % bound;
}

std::size_t floor_count(std::size_t n, double fraction) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction + 1e-9));
}

DatasetSplit split(std::vector<OccurrenceRecord> records, SplitRatios ratios, std::uint64_t seed) {
    const double parts[] = {ratios.train, ratios.validation, ratios.test};
    for (double r : parts) {
        if (!std::isfinite(r) || r < 0.0) {
            throw DatasetError(DatasetError::Kind::BadRatios, "split ratios must be non-negative");
        }
    }
    if (std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9) {
        throw DatasetError(DatasetError::Kind::BadRatios, "split ratios must sum to 1");
    }

    SeededRng rng(seed);
    rng.shuffle(records);

    const std::size_t n = records.size();
    const std::size_t cut1 = std::min(n, floor_count(n, ratios.train));
    const std::size_t cut2 = std::max(cut1, std::min(n, floor_count(n, ratios.train + ratios.validation)));

    DatasetSplit out;
    out.seed = seed;
    out.ratios = ratios;
    auto begin = std::make_move_iterator(records.begin());
    out.train.assign(begin, begin + static_cast<std::ptrdiff_t>(cut1));
    out.validation.assign(begin + static_cast<std::ptrdiff_t>(cut1), begin + static_cast<std::ptrdiff_t>(cut2));
    out.test.assign(begin + static_cast<std::ptrdiff_t>(cut2), std::make_move_iterator(records.end()));
    return out;
}

std::vector<OccurrenceRecord> mix_training_sets(std::vector<MixSource> sources, std::uint64_t seed) {
    for (const auto& s : sources) {
        if (!std::isfinite(s.fraction) || s.fraction < 0.0 || s.fraction > 1.0) {
            throw DatasetError(DatasetError::Kind::BadFraction, "mix fraction must lie in [0, 1]");
        }
    }
    SeededRng rng(seed);
    std::vector<OccurrenceRecord> mixed;
    for (auto& s : sources) {
        const std::size_t take = floor_count(s.records.size(), s.fraction);
        rng.shuffle(s.records);
        for (std::size_t i = 0; i < take; ++i) {
            auto& r = s.records[i];
            if (r.source_dataset.empty()) r.source_dataset = s.label;
            mixed.push_back(std::move(r));
        }
    }
    rng.shuffle(mixed);
    return mixed;
}

std::vector<Fold> kfold(std::vector<OccurrenceRecord> records, std::size_t k, std::uint64_t seed) {
    if (k < 2 || records.size() < k) {
        throw DatasetError(DatasetError::Kind::BadK, "k-fold needs 2 <= k <= number of records");
    }
    SeededRng rng(seed);
    rng.shuffle(records);

    const std::size_t n = records.size();
    const std::size_t base = n / k;
    const std::size_t extra = n % k;

    std::vector<Fold> folds(k);
    std::size_t start = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t size = base + (f < extra ? 1 : 0);
        for (std::size_t i = 0; i < n; ++i) {
            if (i >= start && i < start + size) {
                folds[f].test.push_back(records[i]);
            } else {
                folds[f].train.push_back(records[i]);
            }
        }
        start += size;
    }
    return folds;
}

void write_records(std::ostream& out, const std::vector<OccurrenceRecord>& records) {
    for (const auto& r : records) {
        Json j;
        j["id"] = r.id;
        j["locality"] = r.locality;
        j["lat"] = r.truth.lat();
        j["lon"] = r.truth.lon();
        j["country_code"] = r.country_code;
        j["state_province"] = r.state_province;
        j["source_dataset"] = r.source_dataset;
        out << j.dump() << '\n';
    }
}

std::vector<OccurrenceRecord> read_records(std::istream& in) {
    std::vector<OccurrenceRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
            auto j = Json::parse(line);
            records.push_back(OccurrenceRecord{
                j.at("id").get<std::string>(),
                j.at("locality").get<std::string>(),
                validate_point(j.at("lat").get<double>(), j.at("lon").get<double>()),
                j.value("country_code", std::string()),
                j.value("state_province", std::string()),
                j.value("source_dataset", std::string()),
            });
        } catch (const std::exception& e) {
            throw DatasetError(DatasetError::Kind::MalformedRecordFile,
                               "record file line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

std::vector<OccurrenceRecord> read_records_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_records(in);
}

void write_records_file(const std::string& path, const std::vector<OccurrenceRecord>& records) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    write_records(out, records);
}

}  // namespace georef
