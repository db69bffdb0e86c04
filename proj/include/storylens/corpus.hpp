#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "storylens/report.hpp"

namespace storylens {

enum class WriterGroup { human, machine };

std::string_view to_string(WriterGroup g);
std::optional<WriterGroup> writer_group_from_string(std::string_view s);

// Whitespace split with leading/trailing ASCII punctuation peeled into
// separate tokens. The literal marker "<newline>" is one token. The
// WritingPrompts corpus is already space-tokenized, so this is near-identity
// on it.
std::vector<std::string> tokenize(std::string_view text);

struct Prompt {
    std::string id;
    std::string text;
};

struct Story {
    std::string id;
    std::string prompt_id;
    WriterGroup writer = WriterGroup::human;
    std::string text;
    std::vector<std::string> tokens;  // derived from text at load time
};

class Corpus {
public:
    void add_prompt(Prompt p);
    void add_story(Story s);  // throws if prompt_id is unknown or id duplicated

    const std::vector<Prompt>& prompts() const { return prompts_; }
    const std::vector<Story>& stories() const { return stories_; }

    const Prompt* find_prompt(std::string_view id) const;
    const Story* find_story(std::string_view id) const;

    // Indices into stories() for one prompt, in insertion order.
    const std::vector<std::size_t>& stories_of_prompt(std::string_view prompt_id) const;

    bool has_prompt(std::string_view id) const { return prompt_index_.count(std::string(id)) > 0; }

private:
    std::vector<Prompt> prompts_;
    std::vector<Story> stories_;
    std::unordered_map<std::string, std::size_t> prompt_index_;
    std::unordered_map<std::string, std::size_t> story_index_;
    std::unordered_map<std::string, std::vector<std::size_t>> prompt_stories_;
};

enum class ParseMode { lenient, strict };

// One JSONL record per line; see README for the schema. Malformed lines are
// reported and skipped in lenient mode, fatal in strict mode. A story whose
// prompt_id never appears is fatal in both modes. `default_writer` applies to
// story records that omit the "writer" field.
Corpus load_corpus(const std::string& path, ParseMode mode, Report& report,
                   std::optional<WriterGroup> default_writer = std::nullopt);

struct GroupStatsRow {
    std::size_t n_prompts = 0;  // prompts with at least one story in the group
    std::size_t n_stories = 0;
    double stories_per_prompt_mean = 0.0;
    double stories_per_prompt_std = 0.0;  // population std
    double tokens_per_story_mean = 0.0;
};

struct CorpusStats {
    GroupStatsRow human;
    GroupStatsRow machine;
    const GroupStatsRow& group(WriterGroup g) const {
        return g == WriterGroup::human ? human : machine;
    }
};

CorpusStats corpus_stats(const Corpus& corpus);

// Converter for the original WritingPrompts paired files: line i of
// `source_path` is the prompt for the story on line i of `target_path`.
// Identical prompt texts collapse to one prompt record. Appends JSONL records
// to `out_path`.
struct WpConvertResult {
    std::size_t n_prompts = 0;
    std::size_t n_stories = 0;
};
WpConvertResult convert_writingprompts(const std::string& source_path,
                                       const std::string& target_path,
                                       const std::string& out_path, WriterGroup writer,
                                       Report& report);

}  // namespace storylens
