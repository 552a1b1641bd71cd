#include "qus/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "qus/error.hpp"

namespace qus::stats {
namespace {

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

std::string to_string(Stage s) {
    switch (s) {
        case Stage::Normal: return "Normal";
        case Stage::Mild: return "Mild";
        case Stage::Severe: return "Severe";
    }
    return "?";
}

Stage stage_for_fat_fraction(double percent) {
    if (!std::isfinite(percent) || percent < 0.0) throw InvalidArgument("fat fraction must be finite and >= 0");
    if (percent < 5.0) return Stage::Normal;
    if (percent < 15.0) return Stage::Mild;
    return Stage::Severe;
}

CohortRecord::CohortRecord(std::string id_, double feature_, double reference_)
    : id(std::move(id_)), feature(feature_), reference(reference_), stage(stage_for_fat_fraction(reference_)) {
    if (!std::isfinite(feature)) throw InvalidArgument("cohort record " + id + ": non-finite feature");
}

std::string Comparison::name() const { return to_string(negative) + "-vs-" + to_string(positive); }

std::vector<Comparison> default_comparisons() {
    return {{Stage::Normal, Stage::Mild}, {Stage::Mild, Stage::Severe}, {Stage::Normal, Stage::Severe}};
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw InvalidArgument("quantile: empty input");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

BoxStats box_stats(std::vector<double> values) {
    if (values.empty()) throw InvalidArgument("box_stats: empty group");
    std::sort(values.begin(), values.end());
    BoxStats b;
    b.n = values.size();
    b.min = values.front();
    b.max = values.back();
    b.q1 = quantile(values, 0.25);
    b.median = quantile(values, 0.5);
    b.q3 = quantile(values, 0.75);
    const double iqr = b.q3 - b.q1;
    const double lo_fence = b.q1 - 1.5 * iqr;
    const double hi_fence = b.q3 + 1.5 * iqr;
    b.whisker_lo = b.max;
    b.whisker_hi = b.min;
    for (double v : values) {
        if (v < lo_fence || v > hi_fence) {
            b.outliers.push_back(v);
            continue;
        }
        b.whisker_lo = std::min(b.whisker_lo, v);
        b.whisker_hi = std::max(b.whisker_hi, v);
    }
    return b;
}

CohortReport cohort_report(const std::vector<CohortRecord>& records, const std::vector<Comparison>& comparisons) {
    auto features_of = [&](Stage s) {
        std::vector<double> out;
        for (const auto& r : records) {
            if (r.stage == s) out.push_back(r.feature);
        }
        return out;
    };

    CohortReport rep;
    for (const auto& cmp : comparisons) {
        ComparisonResult res;
        res.comparison = cmp;
        const auto neg = features_of(cmp.negative);
        const auto pos = features_of(cmp.positive);
        res.n_negative = neg.size();
        res.n_positive = pos.size();
        if (!neg.empty() && !pos.empty()) {
            std::vector<double> scores = neg;
            scores.insert(scores.end(), pos.begin(), pos.end());
            std::vector<int> labels(neg.size(), 0);
            labels.resize(scores.size(), 1);
            res.roc = roc_analysis(scores, labels);
            if (neg.size() >= 2 && pos.size() >= 2) {
                try {
                    res.welch = welch_test(pos, neg);
                } catch (const InvalidArgument&) {
                }
            }
        }
        rep.comparisons.push_back(std::move(res));
    }
    for (Stage s : {Stage::Normal, Stage::Mild, Stage::Severe}) {
        auto f = features_of(s);
        if (!f.empty()) rep.boxes.emplace_back(s, box_stats(std::move(f)));
    }
    if (records.size() >= 3) {
        std::vector<double> x, y;
        for (const auto& r : records) {
            x.push_back(r.feature);
            y.push_back(r.reference);
        }
        try {
            rep.correlation = pearson(x, y);
        } catch (const Error&) {
        }
    }
    return rep;
}

std::string roc_csv(const CohortReport& report) {
    std::ostringstream os;
    os << "comparison,n_negative,n_positive,auroc,rule,threshold,sensitivity,specificity,ppv,npv,f1,welch_t,welch_p,stars\n";
    for (const auto& c : report.comparisons) {
        const std::string welch = c.welch ? fmt(c.welch->t) + "," + fmt(c.welch->p_value) + "," +
                                                significance_stars(c.welch->p_value)
                                          : "nan,nan,";
        if (!c.roc) {
            os << c.comparison.name() << ',' << c.n_negative << ',' << c.n_positive << ",empty,,,,,,,," << welch << '\n';
            continue;
        }
        for (const auto& p : c.roc->points) {
            os << c.comparison.name() << ',' << c.n_negative << ',' << c.n_positive << ',' << fmt(c.roc->auroc) << ','
               << to_string(p.rule) << ',' << fmt(p.threshold) << ',' << fmt(p.sensitivity) << ','
               << fmt(p.specificity) << ',' << fmt(p.ppv) << ',' << fmt(p.npv) << ',' << fmt(p.f1) << ',' << welch
               << '\n';
        }
    }
    return os.str();
}

std::string boxplot_csv(const CohortReport& report) {
    std::ostringstream os;
    os << "stage,n,min,whisker_lo,q1,median,q3,whisker_hi,max,n_outliers\n";
    for (const auto& [stage, b] : report.boxes) {
        os << to_string(stage) << ',' << b.n << ',' << fmt(b.min) << ',' << fmt(b.whisker_lo) << ',' << fmt(b.q1)
           << ',' << fmt(b.median) << ',' << fmt(b.q3) << ',' << fmt(b.whisker_hi) << ',' << fmt(b.max) << ','
           << b.outliers.size() << '\n';
    }
    return os.str();
}

std::string summary_text(const CohortReport& report) {
    std::ostringstream os;
    if (report.correlation) {
        os << "Pearson r = " << fmt(report.correlation->r) << " (p = " << fmt(report.correlation->p_value) << ", "
           << significance_stars(report.correlation->p_value) << ", n = " << report.correlation->n << ")\n";
    }
    for (const auto& c : report.comparisons) {
        os << c.comparison.name() << ": ";
        if (!c.roc) {
            os << "empty comparison (n_neg = " << c.n_negative << ", n_pos = " << c.n_positive << ")\n";
            continue;
        }
        os << "AUROC " << fmt(c.roc->auroc);
        if (c.welch) os << ", Welch p " << fmt(c.welch->p_value) << " " << significance_stars(c.welch->p_value);
        os << '\n';
        for (const auto& p : c.roc->points) {
            os << "  " << to_string(p.rule) << ": thr " << fmt(p.threshold) << " sens " << fmt(p.sensitivity)
               << " spec " << fmt(p.specificity) << " PPV " << fmt(p.ppv) << " NPV " << fmt(p.npv) << " F1 "
               << fmt(p.f1) << '\n';
        }
    }
    return os.str();
}

}  // namespace qus::stats
