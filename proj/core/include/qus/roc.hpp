#pragma once

#include <span>
#include <string>
#include <vector>

namespace qus::stats {

enum class OperatingRule { OptimalF1, Specificity90, Sensitivity90 };
std::string to_string(OperatingRule r);

/// Confusion-matrix summary at one threshold; a sample is called positive
/// when its score is >= threshold. Undefined ratios (no predicted positives,
/// no predicted negatives) are reported as 0.
struct OperatingPoint {
    OperatingRule rule;
    double threshold;
    double sensitivity;
    double specificity;
    double ppv;
    double npv;
    double f1;
};

struct RocPoint {
    double threshold;
    double tpr;
    double fpr;
};

struct RocSummary {
    double auroc;
    std::vector<OperatingPoint> points;  // one per OperatingRule, in enum order
    std::vector<RocPoint> curve;         // thresholds descending, starting at +inf

    const OperatingPoint& at(OperatingRule rule) const;
};

/// AUROC by the Mann-Whitney rank formulation; tied positive/negative pairs
/// count one half. Labels are 0/1. Throws InvalidArgument unless both classes
/// are present.
double auroc(std::span<const double> scores, std::span<const int> labels);

/// Confusion summary for an arbitrary threshold.
OperatingPoint evaluate_threshold(std::span<const double> scores, std::span<const int> labels,
                                  double threshold, OperatingRule rule = OperatingRule::OptimalF1);

/// AUROC plus three operating points: maximal F1 over every distinct
/// threshold (the highest threshold wins a tie), the smallest threshold with
/// specificity >= 0.9, and the largest threshold with sensitivity >= 0.9.
RocSummary roc_analysis(std::span<const double> scores, std::span<const int> labels);

}  // namespace qus::stats
