#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "qus/cohort.hpp"
#include "qus/error.hpp"
#include "qus/metrics.hpp"
#include "qus/rng.hpp"
#include "qus/roc.hpp"

namespace {

using namespace qus;
using namespace qus::stats;

ParamMap map_of(std::vector<double> v) {
    ParamMap p(v.size(), 1);
    for (std::size_t i = 0; i < v.size(); ++i) {
        p.m[i] = v[i];
        p.valid[i] = 1;
    }
    return p;
}

TEST(Psnr, IdenticalMaps) {
    const auto a = map_of({0.5, 1.0, 1.5});
    EXPECT_EQ(rmse(a, a), 0.0);
    EXPECT_EQ(psnr(a, a), std::numeric_limits<double>::infinity());
}

TEST(Psnr, KnownMse) { EXPECT_NEAR(psnr_from_mse(0.01, 2.0), 10.0 * std::log10(400.0), 1e-12); }

TEST(Psnr, UniformError) {
    const auto a = map_of({0.5, 1.0, 1.5, 2.0}), b = map_of({0.6, 1.1, 1.6, 2.1});
    EXPECT_NEAR(rmse(b, a), 0.1, 1e-15);
}

TEST(Psnr, LogIdentity) {
    Rng rng(3);
    for (int k = 0; k < 100; ++k) {
        std::vector<double> x(50), y(50);
        for (std::size_t i = 0; i < 50; ++i) {
            x[i] = 0.5 + 1.5 * rng.uniform();
            y[i] = x[i] + 0.3 * rng.normal();
        }
        const auto a = map_of(x), b = map_of(y);
        const double lhs = psnr(b, a, 2.0);
        const double rhs = 10.0 * std::log10(4.0) - 20.0 * std::log10(rmse(b, a));
        EXPECT_NEAR(lhs, rhs, 1e-12);
    }
}

TEST(Psnr, RespectsValidityAndMask) {
    auto a = map_of({1.0, 1.0, 1.0}), b = map_of({1.0, 1.2, 5.0});
    b.set_invalid(2);
    EXPECT_NEAR(mse(b, a), 0.02, 1e-15);
    Mask m(3, 1, 0);
    m[0] = 1;
    EXPECT_EQ(mse(b, a, &m), 0.0);
    m[0] = 0;
    EXPECT_THROW(mse(b, a, &m), InvalidArgument);
    EXPECT_THROW(mse(map_of({1.0}), a), InvalidArgument);
}

TEST(Pearson, ExactLinearity) {
    const std::vector<double> x{1, 2, 3, 4, 5};
    std::vector<double> y, z;
    for (double v : x) {
        y.push_back(2 * v + 3);
        z.push_back(-0.5 * v + 1);
    }
    EXPECT_NEAR(pearson(x, y).r, 1.0, 1e-15);
    EXPECT_NEAR(pearson(x, z).r, -1.0, 1e-15);
    EXPECT_EQ(pearson(x, y).p_value, 0.0);
}

TEST(Pearson, HandExample) {
    const std::vector<double> x{1, 2, 3}, y{1, 3, 2};
    EXPECT_NEAR(pearson(x, y).r, 0.5, 1e-15);
}

TEST(Pearson, ScipyReference) {
    const std::vector<double> x{1, 2, 3, 4, 5, 6}, y{2.1, 3.9, 6.2, 7.8, 10.1, 12.2};
    const auto c = pearson(x, y);
    EXPECT_NEAR(c.r, 0.9991049324808178, 1e-14);
    EXPECT_NEAR(c.p_value, 1.2013602560217847e-06, 1e-15);
    EXPECT_EQ(c.n, 6u);
}

TEST(Pearson, AffineInvariance) {
    Rng rng(8);
    std::vector<double> x(30), y(30), xa(30), ya(30);
    for (std::size_t i = 0; i < 30; ++i) {
        x[i] = rng.normal();
        y[i] = x[i] + rng.normal();
        xa[i] = 3.0 * x[i] - 7.0;
        ya[i] = 0.2 * y[i] + 100.0;
    }
    EXPECT_NEAR(pearson(x, y).r, pearson(xa, ya).r, 1e-12);
}

TEST(Pearson, Errors) {
    const std::vector<double> c{2, 2, 2}, x{1, 2, 3};
    EXPECT_THROW(pearson(c, x), NumericError);
    EXPECT_THROW(pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2}), InvalidArgument);
    EXPECT_THROW(pearson(x, std::vector<double>{1, 2}), InvalidArgument);
}

TEST(Welch, IdenticalGroups) {
    const std::vector<double> a{1.0, 2.5, 3.0, 4.2};
    const auto t = welch_test(a, a);
    EXPECT_EQ(t.t, 0.0);
    EXPECT_EQ(t.p_value, 1.0);
    const std::vector<double> c{2.0, 2.0, 2.0};
    EXPECT_EQ(welch_test(c, c).p_value, 1.0);
}

TEST(Welch, PerfectSeparation) {
    const std::vector<double> a{0, 1e-9, -1e-9, 2e-9}, b{1, 1 + 1e-9, 1 - 1e-9, 1 + 2e-9};
    EXPECT_LT(welch_test(a, b).p_value, 1e-12);
    const std::vector<double> a0{0, 0, 0, 0}, b1{1, 1, 1, 1};
    EXPECT_THROW(welch_test(a0, b1), InvalidArgument);
}

TEST(Welch, ScipyReference) {
    const std::vector<double> a{1, 2, 3}, b{2, 3, 4, 5};
    const auto w = welch_test(a, b);
    EXPECT_NEAR(w.t, -1.7320508075688774, 1e-12);
    EXPECT_NEAR(w.df, 4.959183673469387, 1e-12);
    EXPECT_NEAR(w.p_value, 0.14429304308394356, 1e-9);
    const auto p = pooled_t_test(a, b);
    EXPECT_NEAR(p.t, -1.6598500055174645, 1e-12);
    EXPECT_NEAR(p.df, 5.0, 0.0);
    EXPECT_NEAR(p.p_value, 0.15783881063169586, 1e-9);
}

TEST(Welch, NeedsTwoValues) {
    const std::vector<double> one{1.0}, two{1.0, 2.0};
    EXPECT_THROW(welch_test(one, two), InvalidArgument);
}

TEST(Stars, Cuts) {
    EXPECT_EQ(significance_stars(0.2), "ns");
    EXPECT_EQ(significance_stars(0.04), "*");
    EXPECT_EQ(significance_stars(0.005), "**");
    EXPECT_EQ(significance_stars(0.0005), "***");
    EXPECT_EQ(significance_stars(0.00001), "****");
}

TEST(Roc, PerfectSeparation) {
    const std::vector<double> s{0.1, 0.2, 0.8, 0.9};
    const std::vector<int> l{0, 0, 1, 1};
    const auto r = roc_analysis(s, l);
    EXPECT_EQ(r.auroc, 1.0);
    const auto& f1 = r.at(OperatingRule::OptimalF1);
    EXPECT_EQ(f1.sensitivity, 1.0);
    EXPECT_EQ(f1.specificity, 1.0);
    EXPECT_EQ(f1.f1, 1.0);
}

TEST(Roc, HalfConcordant) {
    const std::vector<double> s{0.9, 0.1, 0.8, 0.2};
    const std::vector<int> l{0, 0, 1, 1};
    EXPECT_EQ(auroc(s, l), 0.5);
}

double brute_force(const std::vector<double>& s, const std::vector<int>& l) {
    double c = 0.0;
    int pairs = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j)
            if (l[i] == 1 && l[j] == 0) {
                ++pairs;
                c += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
            }
    return c / pairs;
}

TEST(Roc, MatchesBruteForceExactly) {
    Rng rng(10);
    for (int k = 0; k < 200; ++k) {
        const std::size_t n = 2 + rng.below(11);
        std::vector<double> s(n);
        std::vector<int> l(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = static_cast<double>(rng.below(5));  // coarse values force ties
            l[i] = static_cast<int>(rng.below(2));
        }
        l[0] = 0;
        l[1] = 1;
        EXPECT_EQ(auroc(s, l), brute_force(s, l));
    }
}

TEST(Roc, InvariantUnderMonotoneTransform) {
    Rng rng(11);
    std::vector<double> s(40), t(40);
    std::vector<int> l(40);
    for (std::size_t i = 0; i < 40; ++i) {
        l[i] = i % 2;
        s[i] = rng.normal() + l[i];
        t[i] = std::exp(3.0 * s[i]) + 1.0;
    }
    EXPECT_EQ(auroc(s, l), auroc(t, l));
}

TEST(Roc, OperatingPointsLieOnTheCurve) {
    Rng rng(12);
    for (int k = 0; k < 20; ++k) {
        std::vector<double> s(30);
        std::vector<int> l(30);
        for (std::size_t i = 0; i < 30; ++i) {
            l[i] = static_cast<int>(rng.below(2));
            s[i] = std::round(4.0 * (rng.normal() + l[i])) / 4.0;
        }
        l[0] = 0;
        l[1] = 1;
        const auto r = roc_analysis(s, l);
        ASSERT_EQ(r.points.size(), 3u);
        for (const auto& p : r.points) {
            const auto again = evaluate_threshold(s, l, p.threshold, p.rule);
            EXPECT_EQ(again.sensitivity, p.sensitivity);
            EXPECT_EQ(again.specificity, p.specificity);
            const bool on_curve = std::any_of(r.curve.begin(), r.curve.end(), [&](const RocPoint& c) {
                return c.tpr == p.sensitivity && c.fpr == 1.0 - p.specificity;
            });
            EXPECT_TRUE(on_curve);
            for (double v : {p.sensitivity, p.specificity, p.ppv, p.npv, p.f1}) {
                EXPECT_GE(v, 0.0);
                EXPECT_LE(v, 1.0);
            }
            if (p.ppv + p.sensitivity > 0)
                EXPECT_NEAR(p.f1, 2 * p.ppv * p.sensitivity / (p.ppv + p.sensitivity), 1e-15);
        }
        EXPECT_GE(r.at(OperatingRule::Specificity90).specificity, 0.9);
        EXPECT_GE(r.at(OperatingRule::Sensitivity90).sensitivity, 0.9);
    }
}

TEST(Roc, Errors) {
    const std::vector<double> s{0.1, 0.2};
    EXPECT_THROW(roc_analysis(s, std::vector<int>{1, 1}), InvalidArgument);
    EXPECT_THROW(auroc(s, std::vector<int>{0, 2}), InvalidArgument);
    EXPECT_THROW(auroc(s, std::vector<int>{0}), InvalidArgument);
}

TEST(Cohort, Stages) {
    EXPECT_EQ(stage_for_fat_fraction(4.99), Stage::Normal);
    EXPECT_EQ(stage_for_fat_fraction(5.0), Stage::Mild);
    EXPECT_EQ(stage_for_fat_fraction(14.9), Stage::Mild);
    EXPECT_EQ(stage_for_fat_fraction(15.0), Stage::Severe);
    EXPECT_EQ(CohortRecord("s", 1.0, 20.0).stage, Stage::Severe);
}

TEST(Cohort, Quartiles) {
    // Type-7 quartiles of the sorted set {0.4 0.9 1.7 2.2 2.8 3.1 4.4 5.9 9.5}.
    const auto b = box_stats({3.1, 0.4, 2.2, 5.9, 1.7, 4.4, 2.8, 9.5, 0.9});
    EXPECT_NEAR(b.q1, 1.7, 1e-15);
    EXPECT_NEAR(b.median, 2.8, 1e-15);
    EXPECT_NEAR(b.q3, 4.4, 1e-15);
    EXPECT_EQ(b.n, 9u);
    EXPECT_EQ(b.whisker_lo, 0.4);
    EXPECT_EQ(b.whisker_hi, 5.9);  // 9.5 lies beyond q3 + 1.5 IQR = 8.45
    ASSERT_EQ(b.outliers.size(), 1u);
    EXPECT_EQ(b.outliers[0], 9.5);
    EXPECT_NEAR(quantile({1, 2, 3, 4}, 0.5), 2.5, 1e-15);
}

TEST(Cohort, MonotoneFeatureSeparatesEveryStage) {
    std::vector<CohortRecord> rec;
    Rng rng(13);
    for (int i = 0; i < 60; ++i) {
        const double ff = 30.0 * rng.uniform();
        rec.emplace_back("s" + std::to_string(i), ff, ff);
    }
    const auto report = cohort_report(rec);
    ASSERT_EQ(report.comparisons.size(), 3u);
    for (const auto& c : report.comparisons) {
        ASSERT_TRUE(c.roc.has_value()) << c.comparison.name();
        EXPECT_EQ(c.roc->auroc, 1.0);
    }
    ASSERT_TRUE(report.correlation.has_value());
    EXPECT_NEAR(report.correlation->r, 1.0, 1e-12);
}

TEST(Cohort, IndependentFeatureIsNearChance) {
    std::vector<CohortRecord> rec;
    Rng rng(14);
    for (int i = 0; i < 100; ++i) rec.emplace_back("s" + std::to_string(i), rng.normal(), 30.0 * rng.uniform());
    const auto report = cohort_report(rec, {{Stage::Normal, Stage::Severe}});
    ASSERT_TRUE(report.comparisons[0].roc.has_value());
    EXPECT_NEAR(report.comparisons[0].roc->auroc, 0.5, 0.1);
}

TEST(Cohort, MissingStageIsMarkedEmpty) {
    std::vector<CohortRecord> rec{{"a", 1.0, 1.0}, {"b", 1.2, 2.0}, {"c", 2.0, 20.0}, {"d", 2.2, 22.0}};
    const auto report = cohort_report(rec);
    for (const auto& c : report.comparisons) {
        const bool mild = c.comparison.negative == Stage::Mild || c.comparison.positive == Stage::Mild;
        EXPECT_EQ(c.roc.has_value(), !mild) << c.comparison.name();
        if (mild) EXPECT_FALSE(c.welch.has_value());
    }
    EXPECT_EQ(report.boxes.size(), 2u);
    EXPECT_NE(roc_csv(report).find("Normal-vs-Mild"), std::string::npos);
    EXPECT_NE(summary_text(report).find("Normal-vs-Severe"), std::string::npos);
    EXPECT_FALSE(boxplot_csv(report).empty());
}

}  // namespace
