#include "storylens/corpus.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace storylens {

namespace {

using nlohmann::json;

bool is_ascii_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

constexpr std::string_view kNewlineMarker = "<newline>";

}  // namespace

std::string Report::summary() const {
    std::ostringstream os;
    os << errors.size() << " error(s), " << warnings.size() << " warning(s)";
    return os.str();
}

std::string_view to_string(WriterGroup g) {
    return g == WriterGroup::human ? "human" : "machine";
}

std::optional<WriterGroup> writer_group_from_string(std::string_view s) {
    if (s == "human") return WriterGroup::human;
    if (s == "machine") return WriterGroup::machine;
    return std::nullopt;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i >= n) break;
        std::size_t j = i;
        while (j < n && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        std::string_view chunk = text.substr(i, j - i);
        i = j;
        if (chunk == kNewlineMarker) {
            tokens.emplace_back(chunk);
            continue;
        }
        // peel leading punctuation
        std::size_t b = 0, e = chunk.size();
        while (b < e && is_ascii_punct(chunk[b])) tokens.emplace_back(1, chunk[b++]);
        // find trailing punctuation, emitted after the core
        std::size_t t = e;
        while (t > b && is_ascii_punct(chunk[t - 1])) --t;
        if (t > b) tokens.emplace_back(chunk.substr(b, t - b));
        for (std::size_t p = t; p < e; ++p) tokens.emplace_back(1, chunk[p]);
    }
    return tokens;
}

void Corpus::add_prompt(Prompt p) {
    if (prompt_index_.count(p.id) > 0)
        throw std::runtime_error("duplicate prompt id: " + p.id);
    prompt_index_[p.id] = prompts_.size();
    prompts_.push_back(std::move(p));
}

void Corpus::add_story(Story s) {
    if (prompt_index_.count(s.prompt_id) == 0)
        throw std::runtime_error("story " + s.id + " references unknown prompt " + s.prompt_id);
    if (story_index_.count(s.id) > 0)
        throw std::runtime_error("duplicate story id: " + s.id);
    story_index_[s.id] = stories_.size();
    prompt_stories_[s.prompt_id].push_back(stories_.size());
    stories_.push_back(std::move(s));
}

const Prompt* Corpus::find_prompt(std::string_view id) const {
    auto it = prompt_index_.find(std::string(id));
    return it == prompt_index_.end() ? nullptr : &prompts_[it->second];
}

const Story* Corpus::find_story(std::string_view id) const {
    auto it = story_index_.find(std::string(id));
    return it == story_index_.end() ? nullptr : &stories_[it->second];
}

const std::vector<std::size_t>& Corpus::stories_of_prompt(std::string_view prompt_id) const {
    static const std::vector<std::size_t> kEmpty;
    auto it = prompt_stories_.find(std::string(prompt_id));
    return it == prompt_stories_.end() ? kEmpty : it->second;
}

namespace {

std::string trimmed(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace

Corpus load_corpus(const std::string& path, ParseMode mode, Report& report,
                   std::optional<WriterGroup> default_writer) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus file: " + path);

    Corpus corpus;
    struct PendingStory {
        Story story;
        std::size_t line;
    };
    std::vector<PendingStory> pending;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trimmed(line).empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            if (mode == ParseMode::strict)
                throw std::runtime_error("line " + std::to_string(line_no) +
                                         ": malformed JSON: " + e.what());
            report.error(line_no, std::string("malformed JSON: ") + e.what());
            continue;
        }
        try {
            const std::string kind = rec.at("kind").get<std::string>();
            if (kind == "prompt") {
                Prompt p;
                p.id = rec.at("id").get<std::string>();
                p.text = rec.at("text").get<std::string>();
                if (trimmed(p.text).empty())
                    throw std::runtime_error("prompt text empty after trimming");
                corpus.add_prompt(std::move(p));
            } else if (kind == "story") {
                Story s;
                s.id = rec.at("id").get<std::string>();
                s.prompt_id = rec.at("prompt_id").get<std::string>();
                if (rec.contains("writer")) {
                    auto g = writer_group_from_string(rec.at("writer").get<std::string>());
                    if (!g) throw std::runtime_error("unknown writer group");
                    s.writer = *g;
                } else if (default_writer) {
                    s.writer = *default_writer;
                } else {
                    throw std::runtime_error("story record lacks \"writer\"");
                }
                s.text = rec.at("text").get<std::string>();
                s.tokens = tokenize(s.text);
                pending.push_back({std::move(s), line_no});
            } else if (kind == "meta") {
                // schema marker line, nothing to load
            } else {
                throw std::runtime_error("unknown record kind: " + kind);
            }
        } catch (const std::exception& e) {
            if (mode == ParseMode::strict)
                throw std::runtime_error("line " + std::to_string(line_no) + ": " + e.what());
            report.error(line_no, e.what());
        }
    }

    // Stories may precede their prompt in the file; link after the full pass.
    // A dangling prompt reference is fatal in both modes.
    for (auto& ps : pending) {
        if (!corpus.has_prompt(ps.story.prompt_id))
            throw std::runtime_error("line " + std::to_string(ps.line) + ": story " +
                                     ps.story.id + " references unknown prompt_id " +
                                     ps.story.prompt_id);
        corpus.add_story(std::move(ps.story));
    }
    return corpus;
}

namespace {

GroupStatsRow stats_for_group(const Corpus& corpus, WriterGroup group) {
    GroupStatsRow row;
    std::size_t total_tokens = 0;
    std::vector<double> per_prompt_counts;
    for (const auto& prompt : corpus.prompts()) {
        std::size_t count = 0;
        for (std::size_t idx : corpus.stories_of_prompt(prompt.id))
            if (corpus.stories()[idx].writer == group) ++count;
        if (count > 0) {
            per_prompt_counts.push_back(static_cast<double>(count));
            row.n_stories += count;
        }
    }
    row.n_prompts = per_prompt_counts.size();
    for (const auto& story : corpus.stories())
        if (story.writer == group) total_tokens += story.tokens.size();

    if (!per_prompt_counts.empty()) {
        double sum = 0.0;
        for (double c : per_prompt_counts) sum += c;
        row.stories_per_prompt_mean = sum / static_cast<double>(per_prompt_counts.size());
        double ss = 0.0;
        for (double c : per_prompt_counts) {
            const double d = c - row.stories_per_prompt_mean;
            ss += d * d;
        }
        row.stories_per_prompt_std =
            std::sqrt(ss / static_cast<double>(per_prompt_counts.size()));
    }
    if (row.n_stories > 0)
        row.tokens_per_story_mean =
            static_cast<double>(total_tokens) / static_cast<double>(row.n_stories);
    return row;
}

}  // namespace

CorpusStats corpus_stats(const Corpus& corpus) {
    CorpusStats stats;
    stats.human = stats_for_group(corpus, WriterGroup::human);
    stats.machine = stats_for_group(corpus, WriterGroup::machine);
    return stats;
}

WpConvertResult convert_writingprompts(const std::string& source_path,
                                       const std::string& target_path,
                                       const std::string& out_path, WriterGroup writer,
                                       Report& report) {
    std::ifstream src(source_path);
    if (!src) throw std::runtime_error("cannot open prompt file: " + source_path);
    std::ifstream tgt(target_path);
    if (!tgt) throw std::runtime_error("cannot open story file: " + target_path);
    std::ofstream out(out_path, std::ios::app);
    if (!out) throw std::runtime_error("cannot open output file: " + out_path);

    WpConvertResult result;
    std::unordered_map<std::string, std::string> prompt_id_by_text;
    std::string prompt_line, story_line;
    std::size_t line_no = 0;
    while (std::getline(src, prompt_line)) {
        ++line_no;
        if (!std::getline(tgt, story_line)) {
            report.error(line_no, "story file ended before prompt file");
            break;
        }
        const std::string prompt_text = trimmed(prompt_line);
        if (prompt_text.empty()) {
            report.warn(line_no, "empty prompt line skipped");
            continue;
        }
        auto it = prompt_id_by_text.find(prompt_text);
        std::string prompt_id;
        if (it == prompt_id_by_text.end()) {
            prompt_id = "wp-p" + std::to_string(++result.n_prompts);
            prompt_id_by_text.emplace(prompt_text, prompt_id);
            json rec{{"kind", "prompt"}, {"id", prompt_id}, {"text", prompt_text}};
            out << rec.dump() << "\n";
        } else {
            prompt_id = it->second;
        }
        ++result.n_stories;
        json rec{{"kind", "story"},
                 {"id", "wp-s" + std::to_string(result.n_stories)},
                 {"prompt_id", prompt_id},
                 {"writer", std::string(to_string(writer))},
                 {"text", story_line}};
        out << rec.dump() << "\n";
    }
    if (std::getline(tgt, story_line))
        report.warn(line_no, "prompt file ended before story file; extra stories ignored");
    return result;
}

}  // namespace storylens
