#include "qus/roc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qus/error.hpp"

namespace qus::stats {
namespace {

struct Counts {
    std::size_t pos = 0;
    std::size_t neg = 0;
};

Counts check_inputs(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw InvalidArgument("roc: scores and labels differ in length");
    Counts c;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (std::isnan(scores[i])) throw InvalidArgument("roc: NaN score");
        if (labels[i] == 1) ++c.pos;
        else if (labels[i] == 0) ++c.neg;
        else throw InvalidArgument("roc: labels must be 0 or 1");
    }
    if (c.pos == 0 || c.neg == 0) throw InvalidArgument("roc: both classes must be present");
    return c;
}

double ratio(std::size_t num, std::size_t den) {
    return den ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

OperatingPoint make_point(OperatingRule rule, double thr, std::size_t tp, std::size_t fp, std::size_t pos,
                          std::size_t neg) {
    const std::size_t fn = pos - tp;
    const std::size_t tn = neg - fp;
    OperatingPoint p{rule, thr, ratio(tp, pos), ratio(tn, neg), ratio(tp, tp + fp), ratio(tn, tn + fn), 0.0};
    p.f1 = (p.ppv + p.sensitivity) > 0.0 ? 2.0 * p.ppv * p.sensitivity / (p.ppv + p.sensitivity) : 0.0;
    return p;
}

}  // namespace

std::string to_string(OperatingRule r) {
    switch (r) {
        case OperatingRule::OptimalF1: return "optimal-F1";
        case OperatingRule::Specificity90: return "spec-90";
        case OperatingRule::Sensitivity90: return "sens-90";
    }
    return "?";
}

const OperatingPoint& RocSummary::at(OperatingRule rule) const {
    for (const auto& p : points) {
        if (p.rule == rule) return p;
    }
    throw InvalidArgument("RocSummary: missing operating point");
}

double auroc(std::span<const double> scores, std::span<const int> labels) {
    const Counts c = check_inputs(scores, labels);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    // Twice the positive rank sum, with tied blocks given their mean rank, so
    // everything stays integral.
    std::size_t twice_rank_sum = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const std::size_t twice_mean_rank = (i + 1) + j;  // ranks i+1 .. j
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] == 1) twice_rank_sum += twice_mean_rank;
        }
        i = j;
    }
    const std::size_t twice_u = twice_rank_sum - c.pos * (c.pos + 1);
    return static_cast<double>(twice_u) / (2.0 * static_cast<double>(c.pos) * static_cast<double>(c.neg));
}

OperatingPoint evaluate_threshold(std::span<const double> scores, std::span<const int> labels, double threshold,
                                  OperatingRule rule) {
    const Counts c = check_inputs(scores, labels);
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i] >= threshold) (labels[i] == 1 ? tp : fp)++;
    }
    return make_point(rule, threshold, tp, fp, c.pos, c.neg);
}

RocSummary roc_analysis(std::span<const double> scores, std::span<const int> labels) {
    const Counts c = check_inputs(scores, labels);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    // Sweep thresholds from +inf down through every distinct score.
    std::vector<OperatingPoint> sweep;
    sweep.push_back(make_point(OperatingRule::OptimalF1, std::numeric_limits<double>::infinity(), 0, 0, c.pos, c.neg));
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        const double thr = scores[order[i]];
        while (i < order.size() && scores[order[i]] == thr) {
            (labels[order[i]] == 1 ? tp : fp)++;
            ++i;
        }
        sweep.push_back(make_point(OperatingRule::OptimalF1, thr, tp, fp, c.pos, c.neg));
    }

    RocSummary out;
    out.auroc = auroc(scores, labels);
    for (const auto& p : sweep) out.curve.push_back({p.threshold, p.sensitivity, 1.0 - p.specificity});

    OperatingPoint best = sweep.front();
    for (const auto& p : sweep) {
        if (p.f1 > best.f1) best = p;
    }
    best.rule = OperatingRule::OptimalF1;

    // Specificity falls and sensitivity rises as the threshold decreases.
    OperatingPoint spec90 = sweep.front();
    for (const auto& p : sweep) {
        if (p.specificity >= 0.9) spec90 = p;
    }
    spec90.rule = OperatingRule::Specificity90;

    OperatingPoint sens90 = sweep.back();
    for (const auto& p : sweep) {
        if (p.sensitivity >= 0.9) {
            sens90 = p;
            break;
        }
    }
    sens90.rule = OperatingRule::Sensitivity90;

    out.points = {best, spec90, sens90};
    return out;
}

}  // namespace qus::stats
