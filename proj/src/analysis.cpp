#include "storylens/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

#include "storylens/rng.hpp"

namespace storylens {

std::string_view to_string(DiffComparison c) {
    return c == DiffComparison::human_vs_machine ? "human_vs_machine" : "human_control";
}

std::vector<GroupStats> group_aggregate(
    const std::vector<StoryScore>& scores,
    const std::unordered_map<std::string, WriterGroup>& writer_of,
    const std::unordered_map<std::string, PovLabel>& pov_of) {
    using Key = std::tuple<WriterGroup, PovLabel, Dimension, ScoreMethod, AttributeSource>;
    std::map<Key, std::vector<double>> cells;
    for (const auto& s : scores) {
        if (!s.z) continue;
        const auto w = writer_of.find(s.story_id);
        const auto p = pov_of.find(s.story_id);
        if (w == writer_of.end() || p == pov_of.end()) continue;
        cells[{w->second, p->second, s.dimension, s.method, s.source}].push_back(*s.z);
    }
    std::vector<GroupStats> out;
    out.reserve(cells.size());
    for (const auto& [key, zs] : cells) {
        GroupStats g;
        g.writer = std::get<0>(key);
        g.pov = std::get<1>(key);
        g.dimension = std::get<2>(key);
        g.method = std::get<3>(key);
        g.source = std::get<4>(key);
        g.n = zs.size();
        g.mean = mean(zs);
        g.std_dev = population_std(zs);
        out.push_back(g);
    }
    return out;
}

namespace {

// first k elements of a seeded shuffle: a draw without replacement
std::vector<double> sample_without_replacement(const std::vector<double>& pool, std::size_t k,
                                               DetRng& rng) {
    std::vector<std::size_t> idx(pool.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    rng.shuffle(idx);
    std::vector<double> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back(pool[idx[i]]);
    return out;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

PromptDiffOutcome prompt_level_diff(const Corpus& corpus,
                                    const std::unordered_map<std::string, double>& story_scores,
                                    Dimension dimension, DiffComparison comparison,
                                    const PromptDiffParams& params) {
    if (params.k == 0) throw std::invalid_argument("prompt_level_diff: k must be >= 1");
    if (params.runs == 0) throw std::invalid_argument("prompt_level_diff: runs must be >= 1");

    PromptDiffOutcome outcome;
    for (const auto& prompt : corpus.prompts()) {
        std::vector<double> human_scores, machine_scores;
        for (std::size_t idx : corpus.stories_of_prompt(prompt.id)) {
            const Story& story = corpus.stories()[idx];
            const auto it = story_scores.find(story.id);
            if (it == story_scores.end()) continue;  // absent scores are excluded
            (story.writer == WriterGroup::human ? human_scores : machine_scores)
                .push_back(it->second);
        }

        DetRng rng(derive_seed(params.seed,
                               prompt.id + "|" + std::string(to_string(comparison))));
        PromptDiff diff;
        diff.prompt_id = prompt.id;
        diff.dimension = dimension;
        diff.comparison = comparison;

        if (comparison == DiffComparison::human_vs_machine) {
            if (human_scores.size() < params.k || machine_scores.size() < params.k) {
                ++outcome.n_skipped;
                continue;
            }
            const double machine_mean =
                mean_of(sample_without_replacement(machine_scores, params.k, rng));
            double human_acc = 0.0;
            for (std::size_t run = 0; run < params.runs; ++run)
                human_acc += mean_of(sample_without_replacement(human_scores, params.k, rng));
            diff.diff = human_acc / static_cast<double>(params.runs) - machine_mean;
        } else {
            if (human_scores.size() < 2 * params.k) {
                ++outcome.n_skipped;
                continue;
            }
            double acc = 0.0;
            for (std::size_t run = 0; run < params.runs; ++run) {
                const auto both = sample_without_replacement(human_scores, 2 * params.k, rng);
                double a = 0.0, b = 0.0;
                for (std::size_t i = 0; i < params.k; ++i) a += both[i];
                for (std::size_t i = params.k; i < 2 * params.k; ++i) b += both[i];
                acc += (a - b) / static_cast<double>(params.k);
            }
            diff.diff = acc / static_cast<double>(params.runs);
        }
        outcome.diffs.push_back(std::move(diff));
    }
    return outcome;
}

DiffSummary summarize_diffs(const std::vector<PromptDiff>& diffs, std::size_t n_bins) {
    if (diffs.empty()) throw std::invalid_argument("summarize_diffs: empty input");
    if (n_bins == 0) throw std::invalid_argument("summarize_diffs: need at least one bin");

    DiffSummary summary;
    summary.dimension = diffs.front().dimension;
    summary.comparison = diffs.front().comparison;
    summary.n = diffs.size();

    std::vector<double> values;
    values.reserve(diffs.size());
    for (const auto& d : diffs) values.push_back(d.diff);
    summary.mean = mean(values);
    summary.std_dev = population_std(values);

    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    summary.median =
        (n % 2 == 1) ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;

    const double lo = sorted.front(), hi = sorted.back();
    if (lo == hi) {
        summary.histogram.push_back({lo, hi, n});
        return summary;
    }
    const double width = (hi - lo) / static_cast<double>(n_bins);
    summary.histogram.resize(n_bins);
    for (std::size_t b = 0; b < n_bins; ++b) {
        summary.histogram[b].left = lo + width * static_cast<double>(b);
        summary.histogram[b].right = lo + width * static_cast<double>(b + 1);
    }
    summary.histogram.back().right = hi;  // close the last bin exactly
    for (double v : values) {
        std::size_t b = static_cast<std::size_t>((v - lo) / width);
        if (b >= n_bins) b = n_bins - 1;  // v == hi
        summary.histogram[b].count += 1;
    }
    return summary;
}

}  // namespace storylens
