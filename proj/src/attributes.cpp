#include "storylens/attributes.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>
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

// strips surrounding non-alphanumeric characters; keeps interior ones
std::string strip_punct(std::string_view s) {
    std::size_t b = 0, e = s.size();
    auto wordish = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) != 0 ||
               static_cast<unsigned char>(c) >= 0x80;
    };
    while (b < e && !wordish(s[b])) ++b;
    while (e > b && !wordish(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

constexpr std::array<std::string_view, 127> kStopwords = {
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
    "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but",
    "by", "can", "could", "did", "do", "does", "doing", "down", "during", "each", "few", "for",
    "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers", "herself",
    "him", "himself", "his", "how", "i", "if", "in", "into", "is", "it", "its", "itself", "me",
    "more", "most", "my", "myself", "no", "nor", "not", "of", "off", "on", "once", "only", "or",
    "other", "our", "ours", "ourselves", "out", "over", "own", "same", "she", "should", "so",
    "some", "such", "than", "that", "the", "their", "theirs", "them", "themselves", "then",
    "there", "these", "they", "this", "those", "through", "to", "too", "under", "until", "up",
    "upon", "very", "was", "we", "were", "what", "when", "where", "which", "while", "who",
    "whom", "why", "will", "with", "within", "without", "would", "you", "your", "yours",
    "yourself", "yourselves"};

}  // namespace

std::string_view to_string(AttributeSource s) {
    return s == AttributeSource::dependency ? "dependency" : "inference";
}

std::optional<AttributeSource> attribute_source_from_string(std::string_view s) {
    if (s == "dependency") return AttributeSource::dependency;
    if (s == "inference") return AttributeSource::inference;
    return std::nullopt;
}

void AttributeSet::add(std::string_view surface, std::size_t weight) {
    if (surface.empty() || weight == 0) return;
    tokens[std::string(surface)] += weight;
}

std::size_t AttributeSet::total_weight() const {
    std::size_t total = 0;
    for (const auto& [surface, w] : tokens) total += w;
    return total;
}

const std::set<std::string>& builtin_stopwords() {
    static const std::set<std::string> kSet = [] {
        std::set<std::string> s;
        for (auto w : kStopwords) s.emplace(w);
        return s;
    }();
    return kSet;
}

std::set<std::string> load_stopwords(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open stop-word file: " + path);
    std::set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        words.insert(lowercase(line));
    }
    return words;
}

std::vector<std::string> decompose_phrase(std::string_view phrase,
                                          const std::set<std::string>& stopwords) {
    std::vector<std::string> out;
    std::istringstream ss{std::string(phrase)};
    std::string word;
    while (ss >> word) {
        word = strip_punct(lowercase(word));
        if (word.empty() || stopwords.count(word) > 0) continue;
        out.push_back(word);
    }
    return out;
}

std::vector<ParsedSentence> load_conllu(const std::string& path, Report& report) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open CoNLL-U file: " + path);

    std::vector<ParsedSentence> sentences;
    ParsedSentence current;
    std::string line;
    std::size_t line_no = 0;
    auto flush = [&] {
        if (!current.tokens.empty()) {
            if (current.story_id.empty())
                report.warn(line_no, "sentence without story_id comment dropped");
            else
                sentences.push_back(current);
        }
        current = ParsedSentence{};
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            flush();
            continue;
        }
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq != std::string::npos) {
                std::string key = line.substr(1, eq - 1);
                std::string value = line.substr(eq + 1);
                auto trim = [](std::string& s) {
                    s.erase(0, s.find_first_not_of(" \t"));
                    s.erase(s.find_last_not_of(" \t") + 1);
                };
                trim(key);
                trim(value);
                if (key == "story_id") current.story_id = value;
            }
            continue;
        }
        std::vector<std::string> cols;
        std::size_t start = 0;
        while (start <= line.size()) {
            const auto tab = line.find('\t', start);
            if (tab == std::string::npos) {
                cols.push_back(line.substr(start));
                break;
            }
            cols.push_back(line.substr(start, tab - start));
            start = tab + 1;
        }
        if (cols.size() < 8) {
            report.error(line_no, "CoNLL-U row with fewer than 8 columns");
            continue;
        }
        // skip multiword-token and empty-node rows (ids like 3-4 or 5.1)
        if (cols[0].find('-') != std::string::npos || cols[0].find('.') != std::string::npos)
            continue;
        ParsedToken tok;
        tok.form = cols[1];
        tok.lemma = cols[2];
        tok.upos = cols[3];
        try {
            tok.head = static_cast<std::size_t>(std::stoul(cols[6]));
        } catch (const std::exception&) {
            report.error(line_no, "non-numeric HEAD column");
            continue;
        }
        tok.deprel = cols[7];
        current.tokens.push_back(std::move(tok));
    }
    flush();
    return sentences;
}

namespace {

bool is_subject_rel(const std::string& deprel) {
    return deprel == "nsubj" || deprel == "nsubjpass" || deprel == "nsubj:pass";
}

bool is_object_rel(const std::string& deprel) {
    return deprel == "obj" || deprel == "dobj" || deprel == "iobj";
}

bool is_copula_lemma(const std::string& lemma) {
    return lemma == "be" || lemma == "seem" || lemma == "become";
}

}  // namespace

AttributeSet extract_dependency_attributes(const Story& story, const Protagonist& protagonist,
                                           const std::vector<ParsedSentence>& sentences,
                                           Report& report) {
    AttributeSet attrs;
    attrs.story_id = story.id;
    attrs.source = AttributeSource::dependency;

    // story-level token positions covered by protagonist mentions
    std::vector<bool> in_mention(story.tokens.size(), false);
    for (const auto& m : protagonist.cluster.mentions)
        for (std::size_t p = m.start; p < m.end && p < in_mention.size(); ++p)
            in_mention[p] = true;

    std::size_t offset = 0;  // story-level index of the sentence's first token
    for (const auto& sentence : sentences) {
        if (sentence.story_id != story.id) continue;
        const std::size_t n = sentence.tokens.size();
        if (offset + n > story.tokens.size()) {
            report.warn(0, "story " + story.id +
                               ": parse tokens overrun story tokenization; sentence skipped");
            offset += n;
            continue;
        }
        auto mention_at = [&](std::size_t sent_idx) { return in_mention[offset + sent_idx]; };

        for (std::size_t idx = 0; idx < n; ++idx) {
            const ParsedToken& tok = sentence.tokens[idx];
            if (tok.upos == "VERB" || tok.upos == "AUX") {
                if (is_copula_lemma(lowercase(tok.lemma))) continue;
                // verb with a subject or object inside a protagonist mention
                bool attached = false;
                for (std::size_t c = 0; c < n && !attached; ++c) {
                    const ParsedToken& child = sentence.tokens[c];
                    if (child.head != idx + 1) continue;
                    if ((is_subject_rel(child.deprel) || is_object_rel(child.deprel)) &&
                        mention_at(c))
                        attached = true;
                }
                if (attached) attrs.add(lowercase(tok.lemma));
            } else if (tok.upos == "ADJ") {
                bool attached = false;
                // adjectival modifier of a mention token
                if (tok.deprel == "amod" && tok.head >= 1 && mention_at(tok.head - 1))
                    attached = true;
                // predicate adjective: subject of the adjective is a mention
                // (UD copular analysis), or acomp whose verb has a mention subject
                for (std::size_t c = 0; c < n && !attached; ++c) {
                    const ParsedToken& child = sentence.tokens[c];
                    if (child.head == idx + 1 && is_subject_rel(child.deprel) && mention_at(c))
                        attached = true;
                }
                if (!attached && (tok.deprel == "acomp" || tok.deprel == "xcomp") &&
                    tok.head >= 1) {
                    const std::size_t verb = tok.head - 1;
                    for (std::size_t c = 0; c < n && !attached; ++c) {
                        const ParsedToken& child = sentence.tokens[c];
                        if (child.head == verb + 1 &&
                            (is_subject_rel(child.deprel) || is_object_rel(child.deprel)) &&
                            mention_at(c))
                            attached = true;
                    }
                }
                if (attached) attrs.add(lowercase(tok.lemma));
            }
        }
        offset += n;
    }
    return attrs;
}

std::unordered_map<std::string, AttributeSet> load_inference_attributes(
    const std::string& path, const Corpus& corpus, const std::set<std::string>& stopwords,
    Report& report) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open inference file: " + path);

    std::unordered_map<std::string, AttributeSet> result;
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
            if (corpus.find_story(story_id) == nullptr) {
                report.warn(line_no, "unknown story_id: " + story_id);
                continue;
            }
            AttributeSet& attrs = result[story_id];
            attrs.story_id = story_id;
            attrs.source = AttributeSource::inference;
            for (const auto& jp : rec.at("phrases")) {
                const std::string phrase = jp.get<std::string>();
                const auto words = decompose_phrase(phrase, stopwords);
                if (words.empty() && !phrase.empty())
                    report.warn(line_no, "phrase reduced to nothing: \"" + phrase + "\"");
                for (const auto& w : words) attrs.add(w);
            }
        } catch (const std::exception& e) {
            report.error(line_no, e.what());
        }
    }
    return result;
}

}  // namespace storylens
