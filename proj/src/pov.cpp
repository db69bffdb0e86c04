#include "storylens/pov.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace storylens {

namespace {

using nlohmann::json;

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

std::string_view to_string(PovLabel label) {
    switch (label) {
        case PovLabel::FP: return "FP";
        case PovLabel::SP: return "SP";
        case PovLabel::TP_M: return "TP-M";
        case PovLabel::TP_F: return "TP-F";
        case PovLabel::Other: return "Other";
    }
    return "Other";
}

std::optional<PovLabel> pov_label_from_string(std::string_view s) {
    if (s == "FP") return PovLabel::FP;
    if (s == "SP") return PovLabel::SP;
    if (s == "TP-M") return PovLabel::TP_M;
    if (s == "TP-F") return PovLabel::TP_F;
    if (s == "Other") return PovLabel::Other;
    return std::nullopt;
}

PronounTable::PronounTable(std::set<std::string> first_person,
                           std::set<std::string> second_person, std::set<std::string> third_male,
                           std::set<std::string> third_female,
                           std::set<std::string> other_pronouns)
    : first_(std::move(first_person)),
      second_(std::move(second_person)),
      male_(std::move(third_male)),
      female_(std::move(third_female)),
      other_(std::move(other_pronouns)) {
    // the four category sets must be pairwise disjoint
    auto check_disjoint = [](const std::set<std::string>& a, const std::set<std::string>& b) {
        for (const auto& t : a)
            if (b.count(t) > 0)
                throw std::invalid_argument("pronoun sets overlap on: " + t);
    };
    check_disjoint(first_, second_);
    check_disjoint(first_, male_);
    check_disjoint(first_, female_);
    check_disjoint(second_, male_);
    check_disjoint(second_, female_);
    check_disjoint(male_, female_);
}

PronounTable PronounTable::standard() {
    return PronounTable(
        {"i", "me", "my", "myself", "mine"},
        {"you", "your", "yourself"},
        {"he", "him", "himself", "his"},
        {"she", "her", "herself", "hers"},
        // personal pronouns outside the four categories; they count as
        // pronominal and break third-person exclusivity
        {"they", "them", "their", "theirs", "themselves", "themself", "it", "its", "itself",
         "we", "us", "our", "ours", "ourselves", "yours", "yourselves"});
}

std::optional<PronounCategory> PronounTable::categorize(std::string_view token) const {
    const std::string t = lowercase(token);
    if (first_.count(t)) return PronounCategory::first;
    if (second_.count(t)) return PronounCategory::second;
    if (male_.count(t)) return PronounCategory::third_male;
    if (female_.count(t)) return PronounCategory::third_female;
    if (other_.count(t)) return PronounCategory::uncategorized;
    return std::nullopt;
}

std::size_t EntityCluster::first_mention_pos() const {
    std::size_t pos = std::numeric_limits<std::size_t>::max();
    for (const auto& m : mentions) pos = std::min(pos, m.start);
    return pos;
}

namespace {

std::optional<MentionKind> mention_kind_from_string(std::string_view s) {
    if (s == "pronominal") return MentionKind::pronominal;
    if (s == "nominal") return MentionKind::nominal;
    if (s == "named") return MentionKind::named;
    return std::nullopt;
}

}  // namespace

std::unordered_map<std::string, std::vector<EntityCluster>> load_clusters(
    const std::string& path, const Corpus& corpus, Report& report) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open cluster file: " + path);

    std::unordered_map<std::string, std::vector<EntityCluster>> result;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            report.error(line_no, std::string("malformed JSON: ") + e.what());
            continue;
        }
        try {
            const std::string story_id = rec.at("story_id").get<std::string>();
            const Story* story = corpus.find_story(story_id);
            if (story == nullptr) {
                report.warn(line_no, "unknown story_id: " + story_id);
                continue;
            }
            const std::size_t n_tokens = story->tokens.size();
            std::vector<EntityCluster> clusters;
            for (const auto& jc : rec.at("clusters")) {
                EntityCluster cluster;
                cluster.id = jc.at("id").is_string() ? jc.at("id").get<std::string>()
                                                     : jc.at("id").dump();
                bool rejected = false;
                for (const auto& jm : jc.at("mentions")) {
                    Mention m;
                    const auto start = jm.at("start").get<std::int64_t>();
                    const auto end = jm.at("end").get<std::int64_t>();
                    if (start < 0 || end <= start ||
                        static_cast<std::size_t>(end) > n_tokens) {
                        report.error(line_no, "story " + story_id + " cluster " + cluster.id +
                                                  ": span [" + std::to_string(start) + "," +
                                                  std::to_string(end) + ") outside token range " +
                                                  std::to_string(n_tokens));
                        rejected = true;
                        break;
                    }
                    m.start = static_cast<std::size_t>(start);
                    m.end = static_cast<std::size_t>(end);
                    m.text = jm.at("text").get<std::string>();
                    auto kind = mention_kind_from_string(jm.at("kind").get<std::string>());
                    if (!kind) {
                        report.error(line_no, "story " + story_id + ": unknown mention kind");
                        rejected = true;
                        break;
                    }
                    m.kind = *kind;
                    cluster.mentions.push_back(std::move(m));
                }
                if (rejected) continue;
                if (cluster.mentions.empty()) {
                    report.warn(line_no,
                                "story " + story_id + ": empty cluster " + cluster.id + " dropped");
                    continue;
                }
                clusters.push_back(std::move(cluster));
            }
            result[story_id] = std::move(clusters);
        } catch (const std::exception& e) {
            report.error(line_no, e.what());
        }
    }
    return result;
}

namespace {

bool is_name_candidate(const std::string& token, const PronounTable& table,
                       const std::set<std::string>& name_stopwords) {
    if (token.empty() || !std::isupper(static_cast<unsigned char>(token[0]))) return false;
    for (char c : token)
        if (!std::isalpha(static_cast<unsigned char>(c)) && c != '\'' && c != '-') return false;
    if (table.is_pronoun(token)) return false;
    return name_stopwords.count(lowercase(token)) == 0;
}

struct Chain {
    std::optional<PronounCategory> gender;  // third_male / third_female once known
    std::string name_surface;               // non-empty for name-seeded chains
    std::vector<Mention> mentions;
};

}  // namespace

std::vector<EntityCluster> resolve_clusters_heuristic(
    const Story& story, const PronounTable& table,
    const std::set<std::string>& name_stopwords) {
    std::vector<Chain> chains;
    int fp_chain = -1, sp_chain = -1;
    std::unordered_map<std::string, std::size_t> name_chain;  // lowercased surface -> chain

    // chronological list of (chain, mention) links for backward search
    std::vector<std::pair<std::size_t, PronounCategory>> history;  // chain idx, category of link

    auto add_mention = [&](std::size_t chain_idx, std::size_t pos, const std::string& text,
                           MentionKind kind) {
        chains[chain_idx].mentions.push_back({pos, pos + 1, text, kind});
    };

    for (std::size_t pos = 0; pos < story.tokens.size(); ++pos) {
        const std::string& tok = story.tokens[pos];
        const auto category = table.categorize(tok);
        if (category == PronounCategory::first) {
            if (fp_chain < 0) {
                fp_chain = static_cast<int>(chains.size());
                chains.push_back({PronounCategory::first, "", {}});
            }
            add_mention(static_cast<std::size_t>(fp_chain), pos, tok, MentionKind::pronominal);
        } else if (category == PronounCategory::second) {
            if (sp_chain < 0) {
                sp_chain = static_cast<int>(chains.size());
                chains.push_back({PronounCategory::second, "", {}});
            }
            add_mention(static_cast<std::size_t>(sp_chain), pos, tok, MentionKind::pronominal);
        } else if (category == PronounCategory::third_male ||
                   category == PronounCategory::third_female) {
            // nearest preceding capitalized name (of compatible gender) or
            // same-gender pronoun
            std::optional<std::size_t> target;
            for (auto it = history.rbegin(); it != history.rend(); ++it) {
                Chain& ch = chains[it->first];
                const bool is_name_link = !ch.name_surface.empty() &&
                                          it->second == PronounCategory::uncategorized;
                if (is_name_link) {
                    if (!ch.gender || ch.gender == category) {
                        target = it->first;
                        break;
                    }
                } else if (it->second == category) {
                    target = it->first;
                    break;
                }
            }
            if (!target) {
                target = chains.size();
                chains.push_back({category, "", {}});
            }
            chains[*target].gender = category;
            add_mention(*target, pos, tok, MentionKind::pronominal);
            history.emplace_back(*target, *category);
        } else if (!category && is_name_candidate(tok, table, name_stopwords)) {
            const std::string key = lowercase(tok);
            auto it = name_chain.find(key);
            std::size_t idx;
            if (it == name_chain.end()) {
                idx = chains.size();
                chains.push_back({std::nullopt, tok, {}});
                name_chain.emplace(key, idx);
            } else {
                idx = it->second;
            }
            add_mention(idx, pos, tok, MentionKind::named);
            history.emplace_back(idx, PronounCategory::uncategorized);  // marks a name link
        }
    }

    std::vector<EntityCluster> clusters;
    for (std::size_t i = 0; i < chains.size(); ++i) {
        if (chains[i].mentions.empty()) continue;
        EntityCluster c;
        c.id = "h" + std::to_string(clusters.size());
        c.mentions = std::move(chains[i].mentions);
        clusters.push_back(std::move(c));
    }
    std::sort(clusters.begin(), clusters.end(), [](const EntityCluster& a, const EntityCluster& b) {
        return a.first_mention_pos() < b.first_mention_pos();
    });
    for (std::size_t i = 0; i < clusters.size(); ++i) clusters[i].id = "h" + std::to_string(i);
    return clusters;
}

std::optional<Protagonist> select_protagonist(const std::vector<EntityCluster>& clusters,
                                              const PronounTable& table) {
    if (clusters.empty()) return std::nullopt;
    const EntityCluster* best = nullptr;
    for (const auto& c : clusters) {
        if (c.mentions.empty()) continue;
        if (best == nullptr || c.mentions.size() > best->mentions.size() ||
            (c.mentions.size() == best->mentions.size() &&
             c.first_mention_pos() < best->first_mention_pos())) {
            best = &c;
        }
    }
    if (best == nullptr) return std::nullopt;

    Protagonist result;
    result.cluster = *best;
    for (const auto& m : best->mentions) {
        if (m.kind != MentionKind::pronominal) continue;
        const auto category = table.categorize(m.text);
        result.pronoun_counts[category.value_or(PronounCategory::uncategorized)] += 1;
    }
    return result;
}

namespace {

PovLabel classify_counts(const std::map<PronounCategory, std::size_t>& counts) {
    std::size_t total = 0;
    for (const auto& [cat, n] : counts) total += n;
    if (total == 0) return PovLabel::Other;

    auto count_of = [&](PronounCategory c) {
        auto it = counts.find(c);
        return it == counts.end() ? std::size_t{0} : it->second;
    };
    // strictly more than half; exactly 50% falls through to third person
    if (2 * count_of(PronounCategory::first) > total) return PovLabel::FP;
    if (2 * count_of(PronounCategory::second) > total) return PovLabel::SP;
    if (count_of(PronounCategory::third_male) == total) return PovLabel::TP_M;
    if (count_of(PronounCategory::third_female) == total) return PovLabel::TP_F;
    return PovLabel::Other;
}

}  // namespace

PovLabel classify_pov(const Protagonist& protagonist) {
    return classify_counts(protagonist.pronoun_counts);
}

PovLabel classify_pov(const std::optional<Protagonist>& protagonist) {
    return protagonist ? classify_pov(*protagonist) : PovLabel::Other;
}

PovLabel classify_prompt_pov(const Prompt& prompt, const PronounTable& table) {
    std::map<PronounCategory, std::size_t> counts;
    for (const auto& tok : tokenize(prompt.text)) {
        const auto category = table.categorize(tok);
        if (category) counts[*category] += 1;
    }
    return classify_counts(counts);
}

}  // namespace storylens
