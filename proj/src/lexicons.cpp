#include "storylens/lexicons.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "storylens/rng.hpp"

namespace storylens {

namespace {

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool has_inner_space(std::string_view s) {
    return s.find(' ') != std::string_view::npos || s.find('\t') != std::string_view::npos;
}

}  // namespace

std::string_view to_string(Dimension d) {
    switch (d) {
        case Dimension::valence: return "valence";
        case Dimension::arousal: return "arousal";
        case Dimension::dominance: return "dominance";
        case Dimension::power: return "power";
        case Dimension::appearance: return "appearance";
        case Dimension::intellect: return "intellect";
    }
    return "valence";
}

std::optional<Dimension> dimension_from_string(std::string_view s) {
    if (s == "valence") return Dimension::valence;
    if (s == "arousal") return Dimension::arousal;
    if (s == "dominance") return Dimension::dominance;
    if (s == "power") return Dimension::power;
    if (s == "appearance") return Dimension::appearance;
    if (s == "intellect") return Dimension::intellect;
    return std::nullopt;
}

bool is_bipolar(Dimension d) {
    return d == Dimension::valence || d == Dimension::arousal || d == Dimension::dominance ||
           d == Dimension::power;
}

std::optional<double> ScoredLexicon::score(std::string_view term) const {
    auto it = entries.find(std::string(term));
    if (it == entries.end()) return std::nullopt;
    return it->second;
}

const ScoredLexicon& VadLexicons::get(Dimension d) const {
    switch (d) {
        case Dimension::valence: return valence;
        case Dimension::arousal: return arousal;
        case Dimension::dominance: return dominance;
        default: throw std::invalid_argument("no scored lexicon for dimension");
    }
}

std::optional<double> BipolarCategoryLexicon::score(std::string_view term) const {
    const std::string t(term);
    if (high_terms.count(t)) return 1.0;
    if (low_terms.count(t)) return 0.0;
    return std::nullopt;
}

VadLexicons load_scored_lexicon(const std::string& path, Report& report) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open lexicon file: " + path);

    VadLexicons out;
    out.valence.dimension = Dimension::valence;
    out.arousal.dimension = Dimension::arousal;
    out.dominance.dimension = Dimension::dominance;

    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
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
        if (!header_seen) {
            header_seen = true;
            if (!cols.empty() && lowercase(cols[0]) == "term") continue;  // header row
            // fall through: headerless file, treat as data
        }
        if (cols.size() != 4) {
            report.error(line_no, "expected 4 tab-separated columns, got " +
                                      std::to_string(cols.size()));
            continue;
        }
        const std::string term = lowercase(cols[0]);
        if (term.empty()) {
            report.error(line_no, "empty term");
            continue;
        }
        if (has_inner_space(term)) {
            report.warn(line_no, "multi-word term dropped: \"" + term + "\"");
            continue;
        }
        double v[3];
        bool ok = true;
        for (int k = 0; k < 3 && ok; ++k) {
            try {
                std::size_t used = 0;
                v[k] = std::stod(cols[k + 1], &used);
                if (used != cols[k + 1].size()) throw std::invalid_argument("trailing junk");
            } catch (const std::exception&) {
                report.error(line_no, "non-numeric score: \"" + cols[k + 1] + "\"");
                ok = false;
                break;
            }
            if (v[k] < 0.0 || v[k] > 1.0) {
                report.error(line_no, "score out of [0,1]: " + cols[k + 1]);
                ok = false;
            }
        }
        if (!ok) continue;
        out.valence.entries[term] = v[0];
        out.arousal.entries[term] = v[1];
        out.dominance.entries[term] = v[2];
    }
    return out;
}

ConceptList load_concept_list(const std::string& path, Report& report) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open concept list: " + path);
    ConceptList out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ss(line.substr(1));
            std::string tag;
            ss >> tag;
            if (tag == "concept") {
                std::string name;
                ss >> name;
                if (!name.empty()) out.concept_name = name;
            }
            continue;
        }
        const std::string term = lowercase(line);
        if (has_inner_space(term)) {
            report.warn(line_no, "multi-word term dropped: \"" + term + "\"");
            continue;
        }
        out.terms.insert(term);
    }
    if (out.concept_name.empty())
        throw std::runtime_error(path + ": missing \"#concept <name>\" header");
    return out;
}

double nearest_rank_percentile(const std::vector<double>& sorted_scores, double pct) {
    if (sorted_scores.empty()) throw std::invalid_argument("empty score multiset");
    const double n = static_cast<double>(sorted_scores.size());
    std::size_t rank = static_cast<std::size_t>(std::ceil(pct / 100.0 * n));
    if (rank < 1) rank = 1;
    if (rank > sorted_scores.size()) rank = sorted_scores.size();
    return sorted_scores[rank - 1];
}

PoleSplit percentile_split(const ScoredLexicon& lex, double low_pct, double high_pct) {
    if (lex.entries.empty()) throw std::invalid_argument("percentile_split: empty lexicon");
    if (!(0.0 <= low_pct && low_pct < high_pct && high_pct <= 100.0))
        throw std::invalid_argument("percentile_split: need 0 <= low < high <= 100");

    std::vector<double> scores;
    scores.reserve(lex.entries.size());
    for (const auto& [term, s] : lex.entries) scores.push_back(s);
    std::sort(scores.begin(), scores.end());

    PoleSplit split;
    split.low_pct = low_pct;
    split.high_pct = high_pct;
    const double low_value = nearest_rank_percentile(scores, low_pct);
    const double high_value = nearest_rank_percentile(scores, high_pct);
    for (const auto& [term, s] : lex.entries) {
        if (s < low_value) split.low_set.insert(term);
        if (s > high_value) split.high_set.insert(term);
    }
    return split;
}

std::set<std::string> terms_above_percentile(const ScoredLexicon& lex, double pct) {
    if (lex.entries.empty()) throw std::invalid_argument("terms_above_percentile: empty lexicon");
    std::vector<double> scores;
    scores.reserve(lex.entries.size());
    for (const auto& [term, s] : lex.entries) scores.push_back(s);
    std::sort(scores.begin(), scores.end());
    const double threshold = nearest_rank_percentile(scores, pct);
    std::set<std::string> out;
    for (const auto& [term, s] : lex.entries)
        if (s > threshold) out.insert(term);
    return out;
}

TrainTestSplit split_train_test(const ScoredLexicon& lex, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0))
        throw std::invalid_argument("split_train_test: ratio must be in (0,1)");

    std::vector<std::string> terms;
    terms.reserve(lex.entries.size());
    for (const auto& [term, s] : lex.entries) terms.push_back(term);
    // entries is an ordered map, so the pre-shuffle order is already
    // deterministic across platforms
    DetRng rng(seed);
    rng.shuffle(terms);

    const std::size_t n_train =
        static_cast<std::size_t>(std::llround(ratio * static_cast<double>(terms.size())));

    TrainTestSplit split;
    split.train.dimension = lex.dimension;
    split.test.dimension = lex.dimension;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        auto& dst = (i < n_train) ? split.train : split.test;
        dst.entries[terms[i]] = lex.entries.at(terms[i]);
    }
    return split;
}

}  // namespace storylens
