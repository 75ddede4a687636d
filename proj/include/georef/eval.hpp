#pragma once

#include "georef/dataset.hpp"
#include "georef/geo.hpp"
#include "georef/prediction.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace georef {

class EvalError : public std::runtime_error {
public:
    enum class Kind { MissingTruth, TooFewPoints, ZeroVariance, LengthMismatch, BadBoundaries, BadRadii, EmptyReport, Io };

    EvalError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Great-circle distance between prediction and truth.
DistanceKm simple_accuracy_error(const GeoPoint& predicted, const GeoPoint& truth) noexcept;

using TruthMap = std::unordered_map<std::string, GeoPoint>;

TruthMap truth_map(const std::vector<OccurrenceRecord>& records);

inline const std::vector<double> kDefaultRadiiKm{10.0, 1.0};

struct EvaluationSummary {
    std::string label;
    std::size_t n_total = 0;
    std::size_t n_failed = 0;
    std::map<double, double> accuracy_at;  // radius km -> fraction of n_total
    std::optional<double> median_sae_km;   // over successful predictions
    std::optional<double> mean_sae_km;
};

/**
 * Failed predictions count as misses for every radius and are excluded
 * from the SAE statistics. Throws EvalError(MissingTruth) when a
 * prediction has no truth.
 */
EvaluationSummary summarize(const std::vector<Prediction>& predictions, const TruthMap& truths,
                            const std::vector<double>& radii_km = kDefaultRadiiKm, std::string label = {});

struct LengthBin {
    std::size_t lower = 0;             // inclusive, in characters
    std::optional<std::size_t> upper;  // exclusive; none = unbounded
    std::string label;                 // "Less than 30", "30 - 60", ..., "More than 120"
    EvaluationSummary summary;
};

inline const std::vector<std::size_t> kDefaultLengthBoundaries{30, 60, 90, 120};

/// Bins predictions by the Unicode scalar count of their record's locality.
std::vector<LengthBin> summarize_by_length(const std::vector<Prediction>& predictions, const TruthMap& truths,
                                           const std::vector<OccurrenceRecord>& records,
                                           const std::vector<std::size_t>& boundaries = kDefaultLengthBoundaries,
                                           const std::vector<double>& radii_km = kDefaultRadiiKm);

struct CorrelationResult {
    double rho = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
};

enum class PValueMethod { TApproximation, ExactPermutation };

/// Average ranks (1-based) with ties sharing their mean rank.
std::vector<double> average_ranks(const std::vector<double>& values);

/**
 * Spearman's rank correlation: Pearson correlation of average ranks.
 * The two-sided p-value uses Student's t with n-2 degrees of freedom, or
 * full enumeration of rank permutations (n <= 10 only).
 */
CorrelationResult spearman(const std::vector<double>& x, const std::vector<double>& y,
                           PValueMethod method = PValueMethod::TApproximation);

enum class ReportFormat { Csv, Json, Markdown };

ReportFormat parse_report_format(const std::string& name);

/// Percentages and distances with two decimals, e.g. "70.43%" and "3.55km".
std::string render_report(const std::vector<EvaluationSummary>& summaries, ReportFormat format);
void write_report(const std::vector<EvaluationSummary>& summaries, const std::string& path, ReportFormat format);

}  // namespace georef
