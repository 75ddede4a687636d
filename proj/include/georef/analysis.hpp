#pragma once

#include "georef/dataset.hpp"
#include "georef/gazetteer.hpp"

#include <cstddef>
#include <istream>
#include <regex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace georef {

class LexiconError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct IndicatorCounts {
    std::size_t directional = 0;
    std::size_t distance = 0;
    std::size_t topological = 0;
    std::size_t place_names = 0;

    std::size_t spatial_total() const noexcept { return directional + distance + topological; }
};

/**
 * Term lists by category. Literal terms are stored case-folded with
 * whitespace collapsed; "re:" entries are kept as regular expressions.
 * Sections must be disjoint after normalisation.
 */
struct IndicatorLexicon {
    std::vector<std::string> distance_units;
    std::vector<std::string> proximity;
    std::vector<std::string> directional;
    std::vector<std::string> directional_patterns;
    std::vector<std::string> topological;
    std::vector<std::string> topological_patterns;

    /// Throws LexiconError on unknown sections, bad regexes or overlap.
    static IndicatorLexicon parse(std::istream& in);
    static IndicatorLexicon from_file(const std::string& path);
    /// The lexicon shipped with the library.
    static const IndicatorLexicon& builtin();
};

/// A half-open byte range of a locality string.
struct TextSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::string text;
};

/**
 * Finds quantitative distance expressions (quantity + unit, optionally
 * followed by a direction) in a locality string.
 */
class DistanceMatcher {
public:
    explicit DistanceMatcher(const IndicatorLexicon& lexicon);

    struct Match {
        TextSpan whole;     // qualifier + quantity + unit + direction
        TextSpan quantity;  // qualifier + quantity + unit
    };

    std::vector<Match> find(std::string_view locality) const;

private:
    std::regex pattern_;
};

/**
 * Counts spatial indicators. Quantitative distances are matched first and
 * absorb their direction; proximity words are distance indicators too.
 * Directional and topological terms are then matched on the remaining
 * text, resolving overlaps longest first. place_names stays 0.
 */
IndicatorCounts classify_spatial_indicators(std::string_view locality,
                                            const IndicatorLexicon& lexicon = IndicatorLexicon::builtin());

struct StripResult {
    std::string text;
    std::vector<TextSpan> removed;  // offsets into the input
};

/**
 * Deletes the quantity and unit of every quantitative distance, keeping
 * the direction ("30 miles S of X" -> "S of X"). Proximity words are kept.
 * Leftover empty brackets and doubled whitespace are cleaned up. Input
 * without a quantitative distance is returned unchanged.
 */
StripResult strip_distance_values(std::string_view locality,
                                  const IndicatorLexicon& lexicon = IndicatorLexicon::builtin());

/// Number of place-name mentions (repeats count once per mention).
std::size_t count_place_names(std::string_view locality, const PlaceNameExtractor& ner);

/// Per-record row: id, length_chars, n_place_names, n_directional, n_distance, n_topological.
struct AnalysisRow {
    std::string id;
    std::size_t length_chars = 0;
    IndicatorCounts counts;
};

AnalysisRow analyze_record(const OccurrenceRecord& record, const PlaceNameExtractor& ner,
                           const IndicatorLexicon& lexicon = IndicatorLexicon::builtin());

void write_analysis_csv(std::ostream& out, const std::vector<AnalysisRow>& rows);

}  // namespace georef
