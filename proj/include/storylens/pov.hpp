#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "storylens/corpus.hpp"
#include "storylens/report.hpp"

namespace storylens {

enum class PovLabel { FP, SP, TP_M, TP_F, Other };

std::string_view to_string(PovLabel label);
std::optional<PovLabel> pov_label_from_string(std::string_view s);

enum class PronounCategory { first, second, third_male, third_female, uncategorized };

// The four point-of-view pronoun sets, plus an inventory of further personal
// pronouns (they, it, we, ...) that count as pronominal without belonging to
// any category. Membership tests lowercase their argument.
class PronounTable {
public:
    static PronounTable standard();

    PronounTable(std::set<std::string> first_person, std::set<std::string> second_person,
                 std::set<std::string> third_male, std::set<std::string> third_female,
                 std::set<std::string> other_pronouns);

    // uncategorized when the token is in other_pronouns; nullopt when the
    // token is not a known pronoun at all.
    std::optional<PronounCategory> categorize(std::string_view token) const;
    bool is_pronoun(std::string_view token) const { return categorize(token).has_value(); }

private:
    std::set<std::string> first_, second_, male_, female_, other_;
};

enum class MentionKind { pronominal, nominal, named };

struct Mention {
    std::size_t start = 0;  // token span [start, end) in this toolkit's tokenization
    std::size_t end = 0;
    std::string text;
    MentionKind kind = MentionKind::nominal;
};

struct EntityCluster {
    std::string id;
    std::vector<Mention> mentions;

    std::size_t first_mention_pos() const;
};

struct Protagonist {
    EntityCluster cluster;
    std::map<PronounCategory, std::size_t> pronoun_counts;  // sums to #pronominal mentions
};

// Cluster annotation JSONL, one story object per line (schema in README).
// Clusters with any out-of-range span are rejected with a diagnostic naming
// the story and span; unknown story ids produce warnings.
std::unordered_map<std::string, std::vector<EntityCluster>> load_clusters(
    const std::string& path, const Corpus& corpus, Report& report);

// Desk-scale stand-in for external coreference, deliberately lower fidelity:
// first- and second-person pronouns each form one chain; a gendered
// third-person pronoun joins the chain of the nearest preceding capitalized
// name or same-gender pronoun. `name_stopwords` filters capitalized
// function words (sentence-initial "The", ...) out of name candidacy.
std::vector<EntityCluster> resolve_clusters_heuristic(const Story& story,
                                                      const PronounTable& table,
                                                      const std::set<std::string>& name_stopwords);

// Largest cluster by mention count; ties broken by earliest first mention.
// Empty input yields nullopt (story classified Other downstream).
std::optional<Protagonist> select_protagonist(const std::vector<EntityCluster>& clusters,
                                              const PronounTable& table);

// FP/SP when that category exceeds half of all pronominal mentions; else
// TP-M/TP-F when every pronominal mention is male/female respectively;
// else Other. Zero pronominal mentions gives Other.
PovLabel classify_pov(const Protagonist& protagonist);
PovLabel classify_pov(const std::optional<Protagonist>& protagonist);

// Same rule applied to the prompt's pronominal tokens, without coreference.
PovLabel classify_prompt_pov(const Prompt& prompt, const PronounTable& table);

}  // namespace storylens
