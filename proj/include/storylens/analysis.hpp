#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "storylens/corpus.hpp"
#include "storylens/lexicons.hpp"
#include "storylens/pov.hpp"
#include "storylens/scoring.hpp"
#include "storylens/stats.hpp"

namespace storylens {

struct GroupStats {
    WriterGroup writer = WriterGroup::human;
    PovLabel pov = PovLabel::Other;
    Dimension dimension = Dimension::valence;
    ScoreMethod method = ScoreMethod::lex_avg;
    AttributeSource source = AttributeSource::dependency;
    double mean = 0.0;
    double std_dev = 0.0;  // population
    std::size_t n = 0;
};

// Mean/std/n of z per (writer, pov, dimension, method, source); absent
// scores are excluded and empty cells omitted. Rows are emitted in a fixed
// deterministic order.
std::vector<GroupStats> group_aggregate(
    const std::vector<StoryScore>& scores,
    const std::unordered_map<std::string, WriterGroup>& writer_of,
    const std::unordered_map<std::string, PovLabel>& pov_of);

enum class DiffComparison { human_vs_machine, human_control };
std::string_view to_string(DiffComparison c);

struct PromptDiff {
    std::string prompt_id;
    Dimension dimension = Dimension::valence;
    double diff = 0.0;  // sign convention: human minus machine
    DiffComparison comparison = DiffComparison::human_vs_machine;
};

struct PromptDiffParams {
    std::size_t k = 2;       // stories per side
    std::size_t runs = 5;    // resampling runs for the human side
    std::uint64_t seed = 0;  // sampling is reproducible per prompt
};

struct PromptDiffOutcome {
    std::vector<PromptDiff> diffs;
    std::size_t n_skipped = 0;  // prompts without enough stories
};

// Per-prompt difference of mean story scores. human_vs_machine: the machine
// side averages k sampled machine stories, the human side averages k sampled
// human stories per run, over `runs` runs. human_control: two mutually
// exclusive k-subsets of the prompt's human stories per run. `story_scores`
// holds present scores only, for one (dimension, method, source) triple.
PromptDiffOutcome prompt_level_diff(const Corpus& corpus,
                                    const std::unordered_map<std::string, double>& story_scores,
                                    Dimension dimension, DiffComparison comparison,
                                    const PromptDiffParams& params);

struct HistogramBin {
    double left = 0.0;
    double right = 0.0;
    std::size_t count = 0;
};

struct DiffSummary {
    Dimension dimension = Dimension::valence;
    DiffComparison comparison = DiffComparison::human_vs_machine;
    std::size_t n = 0;
    double mean = 0.0;
    double median = 0.0;
    double std_dev = 0.0;  // population
    std::vector<HistogramBin> histogram;
};

// Fixed-width histogram over [min, max]; all-equal diffs occupy one bin.
DiffSummary summarize_diffs(const std::vector<PromptDiff>& diffs, std::size_t n_bins = 30);

}  // namespace storylens
