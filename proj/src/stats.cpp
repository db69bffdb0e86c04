#include "storylens/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "storylens/evaluation.hpp"

namespace storylens {

double mean(std::span<const double> v) {
    if (v.empty()) return 0.0;
    double sum = 0.0;
    for (double x : v) sum += x;
    return sum / static_cast<double>(v.size());
}

double population_variance(std::span<const double> v) {
    if (v.empty()) return 0.0;
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) {
        const double d = x - m;
        ss += d * d;
    }
    return ss / static_cast<double>(v.size());
}

double population_std(std::span<const double> v) { return std::sqrt(population_variance(v)); }

std::string_view to_string(EffectDirection d) {
    switch (d) {
        case EffectDirection::a_greater: return "a_greater";
        case EffectDirection::b_greater: return "b_greater";
        case EffectDirection::none: return "none";
    }
    return "none";
}

namespace {

double sample_variance(std::span<const double> v) {
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) {
        const double d = x - m;
        ss += d * d;
    }
    return ss / static_cast<double>(v.size() - 1);
}

}  // namespace

std::optional<WelchResult> welch_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2)
        throw std::invalid_argument("welch_t_test: need n >= 2 on both sides");
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double ma = mean(a), mb = mean(b);
    const double va = sample_variance(a), vb = sample_variance(b);
    const double se2 = va / na + vb / nb;
    if (se2 == 0.0) {
        if (ma == mb) return WelchResult{0.0, na + nb - 2.0, 1.0};
        return std::nullopt;  // complete separation with no variance
    }
    WelchResult r;
    r.t = (ma - mb) / std::sqrt(se2);
    r.df = se2 * se2 /
           ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
    boost::math::students_t_distribution<double> dist(r.df);
    r.p = 2.0 * boost::math::cdf(dist, -std::abs(r.t));
    return r;
}

std::optional<MwuResult> mann_whitney_u(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("mann_whitney_u: need non-empty samples");
    const std::size_t na = a.size(), nb = b.size();
    std::vector<double> pooled;
    pooled.reserve(na + nb);
    pooled.insert(pooled.end(), a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    const auto ranks = average_ranks(pooled);

    double rank_sum_a = 0.0;
    for (std::size_t i = 0; i < na; ++i) rank_sum_a += ranks[i];
    MwuResult r;
    r.u = rank_sum_a - static_cast<double>(na) * (static_cast<double>(na) + 1.0) / 2.0;

    const double n = static_cast<double>(na + nb);
    const double mu = static_cast<double>(na) * static_cast<double>(nb) / 2.0;
    // tie correction over rank groups
    double tie_term = 0.0;
    {
        std::vector<double> sorted(pooled);
        std::sort(sorted.begin(), sorted.end());
        std::size_t i = 0;
        while (i < sorted.size()) {
            std::size_t j = i;
            while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
            const double t = static_cast<double>(j - i + 1);
            tie_term += t * t * t - t;
            i = j + 1;
        }
    }
    const double sigma2 = static_cast<double>(na) * static_cast<double>(nb) / 12.0 *
                          ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if (sigma2 <= 0.0) {
        r.z = 0.0;
        r.p = 1.0;  // every observation tied
        return r;
    }
    // continuity correction toward the null
    const double diff = r.u - mu;
    double corrected = 0.0;
    if (diff > 0.5)
        corrected = diff - 0.5;
    else if (diff < -0.5)
        corrected = diff + 0.5;
    r.z = corrected / std::sqrt(sigma2);
    r.p = std::erfc(std::abs(r.z) / std::sqrt(2.0));
    return r;
}

SignificanceResult significance_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2)
        throw std::invalid_argument("significance_test: need n >= 2 on both sides");
    SignificanceResult r;
    r.n_a = a.size();
    r.n_b = b.size();
    r.mean_a = mean(a);
    r.mean_b = mean(b);
    if (r.mean_a > r.mean_b)
        r.direction = EffectDirection::a_greater;
    else if (r.mean_b > r.mean_a)
        r.direction = EffectDirection::b_greater;
    r.welch = welch_t_test(a, b);
    r.mwu = mann_whitney_u(a, b);
    return r;
}

}  // namespace storylens
