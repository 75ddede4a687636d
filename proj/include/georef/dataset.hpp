#pragma once

#include "georef/geo.hpp"

#include <cstdint>
#include <iosfwd>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace georef {

/// One specimen record: the locality text and its ground-truth point.
struct OccurrenceRecord {
    std::string id;
    std::string locality;
    GeoPoint truth;
    std::string country_code;    // ISO-3166 alpha-2
    std::string state_province;  // may be empty
    std::string source_dataset;
};

class DatasetError : public std::runtime_error {
public:
    enum class Kind { HeaderMissing, UnknownColumn, BadRatios, BadFraction, BadK, MalformedRecordFile };

    DatasetError(Kind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Header names for each record field. An empty state_province or id
/// column means "not mapped". The id column is optional by default: when
/// gbifID is absent, the 1-based data row number is used.
struct ColumnMap {
    std::string locality = "locality";
    std::string latitude = "decimalLatitude";
    std::string longitude = "decimalLongitude";
    std::string country_code = "countryCode";
    std::string state_province = "stateProvince";
    std::string id = "gbifID";
    bool id_required = false;
};

struct RowError {
    enum class Reason {
        MissingCoordinate,
        BadNumber,
        OutOfRange,
        NotFinite,
        EmptyLocality,
        MissingCountry,
        FieldCount,
        DuplicateId,
    };
    std::size_t row;  // 1-based physical line number in the input
    Reason reason;
    std::string detail;
};

const char* to_string(RowError::Reason reason) noexcept;

struct ParseResult {
    std::vector<OccurrenceRecord> records;
    std::vector<RowError> errors;
};

/**
 * @brief Reads a Darwin-Core style occurrence table.
 *
 * The delimiter is a tab when the header line contains one, otherwise a
 * comma. Comma files follow RFC 4180 quoting; tab files are taken
 * literally, as in GBIF downloads. Malformed rows are collected in
 * ParseResult::errors and never abort the file.
 *
 * Throws DatasetError(HeaderMissing | UnknownColumn).
 */
ParseResult parse_occurrences(std::istream& in, const ColumnMap& columns,
                              const std::string& source_label);

/// Key used for duplicate detection: case-folded, whitespace-collapsed.
std::string normalized_locality(std::string_view locality);

/// Drops records with blank localities and later duplicates of a
/// normalized locality. Survivors keep their relative order.
std::vector<OccurrenceRecord> preprocess(std::vector<OccurrenceRecord> records);

/**
 * Seeded generator for every shuffle and sample in the pipeline.
 * std::mt19937_64 output is fixed by the standard; bounded draws use
 * rejection sampling instead of std::uniform_int_distribution, whose
 * algorithm is implementation-defined.
 */
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound);

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

struct SplitRatios {
    double train = 0.70;
    double validation = 0.15;
    double test = 0.15;
};

struct DatasetSplit {
    std::vector<OccurrenceRecord> train;
    std::vector<OccurrenceRecord> validation;
    std::vector<OccurrenceRecord> test;
    std::uint64_t seed = 0;
    SplitRatios ratios;
};

/// floor(n * fraction), tolerant of representation error in fraction.
std::size_t floor_count(std::size_t n, double fraction);

/// Shuffle with seed, then cut at floor(n*train) and floor(n*(train+validation)).
/// Throws DatasetError(BadRatios).
DatasetSplit split(std::vector<OccurrenceRecord> records, SplitRatios ratios, std::uint64_t seed);

struct MixSource {
    std::vector<OccurrenceRecord> records;
    double fraction = 1.0;
    std::string label;  // stamped on records with an empty source_dataset
};

/// floor(fraction * |source|) seeded samples from each source, concatenated
/// and shuffled. Throws DatasetError(BadFraction).
std::vector<OccurrenceRecord> mix_training_sets(std::vector<MixSource> sources, std::uint64_t seed);

struct Fold {
    std::vector<OccurrenceRecord> train;
    std::vector<OccurrenceRecord> test;
};

/// k folds whose test sizes differ by at most one (larger folds first).
/// Throws DatasetError(BadK) unless 2 <= k <= |records|.
std::vector<Fold> kfold(std::vector<OccurrenceRecord> records, std::size_t k, std::uint64_t seed);

// Canonical record file: one JSON object per line.
void write_records(std::ostream& out, const std::vector<OccurrenceRecord>& records);
std::vector<OccurrenceRecord> read_records(std::istream& in);
std::vector<OccurrenceRecord> read_records_file(const std::string& path);
void write_records_file(const std::string& path, const std::vector<OccurrenceRecord>& records);

}  // namespace georef
