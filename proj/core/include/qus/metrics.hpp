#pragma once

#include <span>
#include <string>

#include "qus/image.hpp"

namespace qus::stats {

/// Error of `estimate` against `truth` over pixels valid in both maps and,
/// when given, nonzero in `mask`.
double mse(const ParamMap& estimate, const ParamMap& truth, const Mask* mask = nullptr);
double rmse(const ParamMap& estimate, const ParamMap& truth, const Mask* mask = nullptr);

/// 10 log10(max_value^2 / MSE). Returns +infinity when the maps agree exactly.
double psnr(const ParamMap& estimate, const ParamMap& truth, double max_value = 2.0,
            const Mask* mask = nullptr);
double psnr_from_mse(double mse, double max_value);

// Plain-array forms.
double mse(std::span<const double> a, std::span<const double> b);
double rmse(std::span<const double> a, std::span<const double> b);

struct Correlation {
    double r;
    double t;        // r sqrt((n-2)/(1-r^2))
    double p_value;  // two-sided, Student t with n-2 degrees of freedom
    std::size_t n;
};

/// Sample Pearson correlation. Throws InvalidArgument for n < 3 or
/// mismatched lengths and NumericError when either variance is zero.
Correlation pearson(std::span<const double> x, std::span<const double> y);

struct TTest {
    double t;
    double df;
    double p_value;  // two-sided
};

/// Unequal-variance two-sample t test with Welch-Satterthwaite df.
TTest welch_test(std::span<const double> a, std::span<const double> b);

/// Pooled-variance Student t test.
TTest pooled_t_test(std::span<const double> a, std::span<const double> b);

/// Two-sided p-value of a t statistic with df degrees of freedom.
double student_t_two_sided(double t, double df);

/// "ns", "*", "**", "***", "****" at the 0.05 / 0.01 / 0.001 / 0.0001 cuts.
std::string significance_stars(double p);

}  // namespace qus::stats
