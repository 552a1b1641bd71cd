#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qus/metrics.hpp"
#include "qus/roc.hpp"

namespace qus::stats {

enum class Stage { Normal, Mild, Severe };
std::string to_string(Stage s);

/// Normal below 5 %, Mild in [5, 15), Severe at 15 % and above.
Stage stage_for_fat_fraction(double percent);

/// One subject: scalar feature (e.g. median m over the liver ROI) against a
/// reference fat fraction in percent. The stage is derived from the reference.
struct CohortRecord {
    std::string id;
    double feature;
    double reference;
    Stage stage;

    CohortRecord(std::string id, double feature, double reference);
};

struct Comparison {
    Stage negative;
    Stage positive;
    std::string name() const;  // e.g. "Normal-vs-Mild"
};

/// The three pairings of the steatosis analysis.
std::vector<Comparison> default_comparisons();

/// Tukey box statistics. Quartiles use linear interpolation between order
/// statistics (position (n - 1) q); whiskers reach the most extreme values
/// within 1.5 IQR of the box.
struct BoxStats {
    std::size_t n = 0;
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
    double whisker_lo = 0, whisker_hi = 0;
    std::vector<double> outliers;
};
BoxStats box_stats(std::vector<double> values);
double quantile(std::vector<double> values, double q);

struct ComparisonResult {
    Comparison comparison;
    std::size_t n_negative = 0;
    std::size_t n_positive = 0;
    /// Empty when either stage has no subjects.
    std::optional<RocSummary> roc;
    std::optional<TTest> welch;
};

struct CohortReport {
    std::vector<ComparisonResult> comparisons;
    std::vector<std::pair<Stage, BoxStats>> boxes;  // stages with at least one subject
    std::optional<Correlation> correlation;         // feature vs reference, when defined
};

CohortReport cohort_report(const std::vector<CohortRecord>& records,
                           const std::vector<Comparison>& comparisons = default_comparisons());

/// One row per comparison and operating point.
std::string roc_csv(const CohortReport& report);
/// One row per stage.
std::string boxplot_csv(const CohortReport& report);
std::string summary_text(const CohortReport& report);

}  // namespace qus::stats
