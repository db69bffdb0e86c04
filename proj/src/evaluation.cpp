#include "storylens/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace storylens {

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        // positions i..j (0-based) share the mean of ranks i+1..j+1
        const double mean_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
        i = j + 1;
    }
    return ranks;
}

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("spearman: length mismatch");
    if (x.size() < 2) throw std::invalid_argument("spearman: need at least 2 observations");

    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const double n = static_cast<double>(rx.size());

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;

    double cov = 0.0, vx = 0.0, vy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        const double dx = rx[i] - mx;
        const double dy = ry[i] - my;
        cov += dx * dy;
        vx += dx * dx;
        vy += dy * dy;
    }
    if (vx == 0.0 || vy == 0.0) return std::nullopt;  // constant input
    // single sqrt of the product keeps the monotone case at exactly +/-1
    return cov / std::sqrt(vx * vy);
}

EvalResult evaluate_scorer(const ScoredLexicon& lex, ScoreMethod method,
                           const EmbeddingStore& store, double ratio, std::uint64_t seed,
                           double low_pct, double high_pct) {
    if (method != ScoreMethod::emb_sim && method != ScoreMethod::axis_emb)
        throw std::invalid_argument("evaluate_scorer: method must be emb_sim or axis_emb");

    const auto split = split_train_test(lex, ratio, seed);
    if (split.test.entries.empty())
        throw std::runtime_error("evaluate_scorer: empty test split");

    // prototype/axis inputs come from the train split only
    std::set<std::string> prototypes;
    std::vector<double> axis;
    if (method == ScoreMethod::emb_sim) {
        prototypes = terms_above_percentile(split.train, high_pct);
    } else {
        axis = build_axis(percentile_split(split.train, low_pct, high_pct), store);
    }

    std::vector<std::span<const float>> prototype_vectors;
    if (method == ScoreMethod::emb_sim) {
        for (const auto& p : prototypes) {
            const auto v = store.find(p);
            if (v) prototype_vectors.push_back(*v);
        }
        if (prototype_vectors.empty())
            throw std::runtime_error("evaluate_scorer: prototype set empty after filtering");
    }

    std::vector<double> predicted, gold;
    for (const auto& [term, truth] : split.test.entries) {
        const auto tv = store.find(term);
        if (!tv) continue;
        double value = 0.0;
        if (method == ScoreMethod::emb_sim) {
            double sum = 0.0;
            for (const auto& pv : prototype_vectors) sum += cosine(*tv, pv).value_or(0.0);
            value = sum / static_cast<double>(prototype_vectors.size());
        } else {
            const auto projected = cosine(*tv, std::span<const double>(axis));
            if (!projected) continue;  // zero vector in file
            value = *projected;
        }
        predicted.push_back(value);
        gold.push_back(truth);
    }
    if (predicted.size() < 2)
        throw std::runtime_error("evaluate_scorer: test split empty after vocabulary filtering");

    const auto rho = spearman(predicted, gold);
    if (!rho) throw std::runtime_error("evaluate_scorer: constant predictions");

    EvalResult result;
    result.dimension = lex.dimension;
    result.method = method;
    result.spearman = *rho;
    result.n_test = predicted.size();
    result.coverage =
        static_cast<double>(predicted.size()) / static_cast<double>(split.test.entries.size());
    result.ratio = ratio;
    result.seed = seed;
    return result;
}

}  // namespace storylens
