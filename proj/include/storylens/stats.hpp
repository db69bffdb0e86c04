#pragma once

#include <optional>
#include <span>
#include <string_view>

namespace storylens {

double mean(std::span<const double> v);
double population_variance(std::span<const double> v);
double population_std(std::span<const double> v);

enum class EffectDirection { a_greater, b_greater, none };
std::string_view to_string(EffectDirection d);

struct WelchResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;
};

// Two-sided Welch unequal-variance t-test. Requires n >= 2 on both sides.
// Degenerate variance: equal-mean samples give p = 1, otherwise nullopt
// (the rank test stands alone there).
std::optional<WelchResult> welch_t_test(std::span<const double> a, std::span<const double> b);

struct MwuResult {
    double u = 0.0;  // U statistic of the first sample
    double z = 0.0;
    double p = 1.0;  // two-sided, normal approximation with tie correction
};

std::optional<MwuResult> mann_whitney_u(std::span<const double> a, std::span<const double> b);

struct SignificanceResult {
    std::size_t n_a = 0, n_b = 0;
    double mean_a = 0.0, mean_b = 0.0;
    EffectDirection direction = EffectDirection::none;
    std::optional<WelchResult> welch;
    std::optional<MwuResult> mwu;
};

// Welch primary, Mann-Whitney as robustness column. Throws
// std::invalid_argument when either side has n < 2.
SignificanceResult significance_test(std::span<const double> a, std::span<const double> b);

}  // namespace storylens
