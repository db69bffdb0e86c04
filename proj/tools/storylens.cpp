// storylens — corpus analytics for narrative point-of-view and protagonist
// portrayal. Stages communicate through files in the work directory so any
// stage can be rerun in isolation; see README.md for the full walkthrough.

#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "storylens/analysis.hpp"
#include "storylens/attributes.hpp"
#include "storylens/config.hpp"
#include "storylens/corpus.hpp"
#include "storylens/csv.hpp"
#include "storylens/embeddings.hpp"
#include "storylens/evaluation.hpp"
#include "storylens/genclient.hpp"
#include "storylens/lexicons.hpp"
#include "storylens/pov.hpp"
#include "storylens/rng.hpp"
#include "storylens/scoring.hpp"
#include "storylens/stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace storylens;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Context {
    Config config;
    fs::path work_dir;
    std::string command_line;
};

[[noreturn]] void missing_artifact(const fs::path& path, const std::string& producer) {
    throw std::runtime_error("missing artifact " + path.string() + "; run the `" + producer +
                             "` stage first");
}

void require_artifact(const fs::path& path, const std::string& producer) {
    if (!fs::exists(path)) missing_artifact(path, producer);
}

// Run metadata lives next to each artifact so the artifacts themselves stay
// byte-reproducible.
void write_sidecar(const Context& ctx, const fs::path& artifact) {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
    json meta{{"tool", "storylens"},
              {"version", kVersion},
              {"written_at", stamp},
              {"command", ctx.command_line}};
    std::ofstream out(artifact.string() + ".meta.json");
    out << meta.dump(2) << "\n";
}

void print_report(const Report& report, const std::string& stage) {
    for (const auto& d : report.errors)
        std::cerr << stage << ": error" << (d.line ? " (line " + std::to_string(d.line) + ")" : "")
                  << ": " << d.message << "\n";
    for (const auto& d : report.warnings)
        std::cerr << stage << ": warning"
                  << (d.line ? " (line " + std::to_string(d.line) + ")" : "") << ": " << d.message
                  << "\n";
}

std::uint64_t stage_seed(const Context& ctx, std::string_view salt) {
    const auto root = static_cast<std::uint64_t>(ctx.config.get_int("seeds.root", 20240101));
    return derive_seed(root, salt);
}

fs::path work_path(const Context& ctx, const char* name) { return ctx.work_dir / name; }

Corpus load_work_corpus(const Context& ctx) {
    const fs::path path = work_path(ctx, "corpus.jsonl");
    require_artifact(path, "ingest");
    Report report;
    Corpus corpus = load_corpus(path.string(), ParseMode::lenient, report);
    print_report(report, "corpus");
    return corpus;
}

std::set<std::string> stopword_set(const Context& ctx) {
    const std::string path = ctx.config.get_string("paths.stopwords");
    if (path.empty()) return builtin_stopwords();
    return load_stopwords(path);
}

// --- ingest -------------------------------------------------------------------

int cmd_ingest(Context& ctx, const std::vector<std::string>& corpus_files,
               const std::string& wp_source, const std::string& wp_target,
               const std::string& wp_writer, bool strict) {
    fs::create_directories(ctx.work_dir);
    const fs::path out_path = work_path(ctx, "corpus.jsonl");
    const fs::path tmp_path = work_path(ctx, "corpus.jsonl.tmp");

    {
        std::ofstream out(tmp_path);
        out << json{{"kind", "meta"}, {"schema", "storylens.corpus.v1"}}.dump() << "\n";
    }

    Report convert_report;
    if (!wp_source.empty() || !wp_target.empty()) {
        if (wp_source.empty() || wp_target.empty())
            throw std::runtime_error("--wp-source and --wp-target must be given together");
        const auto writer = writer_group_from_string(wp_writer);
        if (!writer) throw std::runtime_error("--wp-writer must be human or machine");
        const auto converted = convert_writingprompts(wp_source, wp_target, tmp_path.string(),
                                                      *writer, convert_report);
        std::cerr << "ingest: converted " << converted.n_prompts << " prompt(s), "
                  << converted.n_stories << " story(ies) from WritingPrompts files\n";
    }
    for (const auto& file : corpus_files) {
        std::ifstream in(file);
        if (!in) throw std::runtime_error("cannot open corpus file: " + file);
        std::ofstream out(tmp_path, std::ios::app);
        std::string line;
        while (std::getline(in, line)) {
            if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
            out << line << "\n";
        }
    }
    print_report(convert_report, "ingest");

    // validate and normalize: prompts first, then stories, canonical JSON
    Report report;
    const auto mode = strict ? ParseMode::strict : ParseMode::lenient;
    Corpus corpus = load_corpus(tmp_path.string(), mode, report);
    print_report(report, "ingest");

    std::ofstream out(out_path);
    out << json{{"kind", "meta"}, {"schema", "storylens.corpus.v1"}}.dump() << "\n";
    for (const auto& p : corpus.prompts())
        out << json{{"kind", "prompt"}, {"id", p.id}, {"text", p.text}}.dump() << "\n";
    for (const auto& s : corpus.stories())
        out << json{{"kind", "story"},
                    {"id", s.id},
                    {"prompt_id", s.prompt_id},
                    {"writer", std::string(to_string(s.writer))},
                    {"text", s.text}}
                   .dump()
            << "\n";
    out.close();
    fs::remove(tmp_path);
    write_sidecar(ctx, out_path);

    std::cout << "ingested " << corpus.prompts().size() << " prompt(s), "
              << corpus.stories().size() << " story(ies) -> " << out_path.string() << "\n";
    if (!report.errors.empty())
        std::cout << "rejected " << report.errors.size() << " malformed line(s)\n";
    return 0;
}

// --- stats --------------------------------------------------------------------

json group_stats_json(const GroupStatsRow& row) {
    return json{{"n_prompts", row.n_prompts},
                {"n_stories", row.n_stories},
                {"stories_per_prompt_mean", row.stories_per_prompt_mean},
                {"stories_per_prompt_std", row.stories_per_prompt_std},
                {"tokens_per_story_mean", row.tokens_per_story_mean}};
}

int cmd_stats(Context& ctx) {
    const Corpus corpus = load_work_corpus(ctx);
    const CorpusStats stats = corpus_stats(corpus);
    json out{{"schema_version", 1},
             {"human", group_stats_json(stats.human)},
             {"machine", group_stats_json(stats.machine)}};
    const fs::path path = work_path(ctx, "corpus_stats.json");
    std::ofstream f(path);
    f << out.dump(2) << "\n";
    write_sidecar(ctx, path);
    std::cout << out.dump(2) << "\n";
    return 0;
}

// --- generate -------------------------------------------------------------------

int cmd_generate(Context& ctx, std::size_t limit_prompts) {
    const Corpus corpus = load_work_corpus(ctx);

    GenerationConfig gen;
    gen.endpoint_url = ctx.config.get_string("generation.endpoint");
    gen.model_name = ctx.config.get_string("generation.model", "gpt-3.5-turbo");
    gen.temperature = ctx.config.get_double("generation.temperature", 0.95);
    gen.n_per_prompt =
        static_cast<std::size_t>(ctx.config.get_int("generation.n_per_prompt", 2));
    gen.max_attempts = static_cast<std::size_t>(ctx.config.get_int("generation.max_attempts", 5));
    gen.backoff_ms = static_cast<std::size_t>(ctx.config.get_int("generation.backoff_ms", 250));
    gen.concurrency = static_cast<std::size_t>(ctx.config.get_int("generation.concurrency", 4));
    gen.api_key_env = ctx.config.get_string("generation.api_key_env", "STORYLENS_API_KEY");
    const std::string policy = ctx.config.get_string("generation.role_policy", "alternate");
    if (policy == "author")
        gen.role_policy = RolePolicy::author_only;
    else if (policy == "redditor")
        gen.role_policy = RolePolicy::redditor_only;
    else if (policy == "alternate")
        gen.role_policy = RolePolicy::alternate;
    else
        throw std::runtime_error("generation.role_policy must be author|redditor|alternate");
    const std::string tmpl = ctx.config.get_string("generation.user_template");
    if (!tmpl.empty()) gen.user_template = tmpl;

    Corpus subset;
    const Corpus* target = &corpus;
    if (limit_prompts > 0 && limit_prompts < corpus.prompts().size()) {
        for (std::size_t i = 0; i < limit_prompts; ++i) subset.add_prompt(corpus.prompts()[i]);
        target = &subset;
    }

    Report report;
    const auto outcome =
        collect_stories(*target, gen, work_path(ctx, "corpus.jsonl").string(), report);
    print_report(report, "generate");
    std::cout << "generate: issued " << outcome.n_requested << " request(s), wrote "
              << outcome.n_written << ", skipped " << outcome.n_skipped_existing
              << " already present, " << outcome.n_failed << " failed\n";
    return outcome.n_failed == 0 ? 0 : 1;
}

// --- pov ------------------------------------------------------------------------

json mention_json(const Mention& m) {
    const char* kind = m.kind == MentionKind::pronominal ? "pronominal"
                       : m.kind == MentionKind::named    ? "named"
                                                         : "nominal";
    return json{{"start", m.start}, {"end", m.end}, {"text", m.text}, {"kind", kind}};
}

int cmd_pov(Context& ctx, std::string clusters_path) {
    const Corpus corpus = load_work_corpus(ctx);
    const PronounTable table = PronounTable::standard();
    const auto stopwords = stopword_set(ctx);

    if (clusters_path.empty()) clusters_path = ctx.config.get_string("paths.clusters");

    std::unordered_map<std::string, std::vector<EntityCluster>> clusters_by_story;
    const bool external = !clusters_path.empty();
    if (external) {
        Report report;
        clusters_by_story = load_clusters(clusters_path, corpus, report);
        print_report(report, "pov");
    }

    const fs::path pov_path = work_path(ctx, "pov.csv");
    const fs::path prompt_path = work_path(ctx, "prompt_pov.csv");
    const fs::path protagonist_path = work_path(ctx, "protagonists.jsonl");
    std::ofstream pov_csv(pov_path);
    std::ofstream prompt_csv(prompt_path);
    std::ofstream protagonists(protagonist_path);
    protagonists << json{{"kind", "meta"}, {"schema", "storylens.protagonists.v1"}}.dump()
                 << "\n";

    pov_csv << "story_id,prompt_id,writer,pov,n_clusters,protagonist_cluster,n_pronominal,"
               "n_first,n_second,n_third_male,n_third_female,n_uncategorized\n";
    std::size_t n_unannotated = 0;
    for (const auto& story : corpus.stories()) {
        std::vector<EntityCluster> clusters;
        if (external) {
            auto it = clusters_by_story.find(story.id);
            if (it != clusters_by_story.end())
                clusters = it->second;
            else
                ++n_unannotated;  // flagged: no annotation, classified Other
        } else {
            clusters = resolve_clusters_heuristic(story, table, stopwords);
        }
        const auto protagonist = select_protagonist(clusters, table);
        const PovLabel label = classify_pov(protagonist);

        auto count = [&](PronounCategory c) -> std::size_t {
            if (!protagonist) return 0;
            auto it = protagonist->pronoun_counts.find(c);
            return it == protagonist->pronoun_counts.end() ? 0 : it->second;
        };
        std::size_t n_pronominal = 0;
        if (protagonist)
            for (const auto& [cat, n] : protagonist->pronoun_counts) n_pronominal += n;

        pov_csv << csv_escape(story.id) << ',' << csv_escape(story.prompt_id) << ','
                << to_string(story.writer) << ',' << to_string(label) << ',' << clusters.size()
                << ',' << (protagonist ? csv_escape(protagonist->cluster.id) : std::string())
                << ',' << n_pronominal << ',' << count(PronounCategory::first) << ','
                << count(PronounCategory::second) << ',' << count(PronounCategory::third_male)
                << ',' << count(PronounCategory::third_female) << ','
                << count(PronounCategory::uncategorized) << "\n";

        if (protagonist) {
            json mentions = json::array();
            for (const auto& m : protagonist->cluster.mentions)
                mentions.push_back(mention_json(m));
            protagonists << json{{"kind", "protagonist"},
                                 {"story_id", story.id},
                                 {"cluster_id", protagonist->cluster.id},
                                 {"mentions", std::move(mentions)}}
                                .dump()
                         << "\n";
        }
    }

    prompt_csv << "prompt_id,pov\n";
    for (const auto& prompt : corpus.prompts())
        prompt_csv << csv_escape(prompt.id) << ',' << to_string(classify_prompt_pov(prompt, table))
                   << "\n";

    pov_csv.close();
    prompt_csv.close();
    protagonists.close();
    write_sidecar(ctx, pov_path);
    write_sidecar(ctx, prompt_path);
    write_sidecar(ctx, protagonist_path);
    std::cout << "pov: labeled " << corpus.stories().size() << " story(ies) via "
              << (external ? "cluster annotations" : "the heuristic resolver");
    if (n_unannotated > 0) std::cout << "; " << n_unannotated << " without annotations -> Other";
    std::cout << "\n";
    return 0;
}

// --- attrs ------------------------------------------------------------------------

std::unordered_map<std::string, Protagonist> load_protagonists(const Context& ctx) {
    const fs::path path = work_path(ctx, "protagonists.jsonl");
    require_artifact(path, "pov");
    std::ifstream in(path);
    std::unordered_map<std::string, Protagonist> result;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        const json rec = json::parse(line);
        if (rec.value("kind", "") != "protagonist") continue;
        Protagonist p;
        p.cluster.id = rec.at("cluster_id").get<std::string>();
        for (const auto& jm : rec.at("mentions")) {
            Mention m;
            m.start = jm.at("start").get<std::size_t>();
            m.end = jm.at("end").get<std::size_t>();
            m.text = jm.at("text").get<std::string>();
            const std::string kind = jm.at("kind").get<std::string>();
            m.kind = kind == "pronominal" ? MentionKind::pronominal
                     : kind == "named"    ? MentionKind::named
                                          : MentionKind::nominal;
            p.cluster.mentions.push_back(std::move(m));
        }
        result.emplace(rec.at("story_id").get<std::string>(), std::move(p));
    }
    return result;
}

void write_attribute_line(std::ofstream& out, const AttributeSet& attrs) {
    json tokens = json::array();
    for (const auto& [surface, weight] : attrs.tokens)  // std::map: sorted, deterministic
        tokens.push_back(json::array({surface, weight}));
    out << json{{"kind", "attributes"},
                {"story_id", attrs.story_id},
                {"source", std::string(to_string(attrs.source))},
                {"tokens", std::move(tokens)}}
               .dump()
        << "\n";
}

int cmd_attrs(Context& ctx, std::string conllu_path, std::string inferences_path) {
    const Corpus corpus = load_work_corpus(ctx);
    if (conllu_path.empty()) conllu_path = ctx.config.get_string("paths.conllu");
    if (inferences_path.empty()) inferences_path = ctx.config.get_string("paths.inferences");
    if (conllu_path.empty() && inferences_path.empty())
        throw std::runtime_error(
            "attrs: provide --conllu and/or --inferences (or paths.conllu / paths.inferences)");

    const fs::path out_path = work_path(ctx, "attributes.jsonl");
    std::ofstream out(out_path);
    out << json{{"kind", "meta"}, {"schema", "storylens.attributes.v1"}}.dump() << "\n";

    std::size_t n_sets = 0;
    if (!conllu_path.empty()) {
        const auto protagonists = load_protagonists(ctx);
        Report report;
        const auto sentences = load_conllu(conllu_path, report);
        for (const auto& story : corpus.stories()) {
            const auto it = protagonists.find(story.id);
            if (it == protagonists.end()) continue;  // no protagonist, story is Other
            const auto attrs = extract_dependency_attributes(story, it->second, sentences, report);
            write_attribute_line(out, attrs);
            ++n_sets;
        }
        print_report(report, "attrs");
    }
    if (!inferences_path.empty()) {
        Report report;
        const auto stopwords = stopword_set(ctx);
        auto by_story = load_inference_attributes(inferences_path, corpus, stopwords, report);
        for (const auto& story : corpus.stories()) {  // corpus order for determinism
            const auto it = by_story.find(story.id);
            if (it == by_story.end()) continue;
            write_attribute_line(out, it->second);
            ++n_sets;
        }
        print_report(report, "attrs");
    }
    out.close();
    write_sidecar(ctx, out_path);
    std::cout << "attrs: wrote " << n_sets << " attribute set(s) -> " << out_path.string() << "\n";
    return 0;
}

// --- score ------------------------------------------------------------------------

std::vector<AttributeSet> load_attribute_sets(const Context& ctx) {
    const fs::path path = work_path(ctx, "attributes.jsonl");
    require_artifact(path, "attrs");
    std::ifstream in(path);
    std::vector<AttributeSet> sets;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        const json rec = json::parse(line);
        if (rec.value("kind", "") != "attributes") continue;
        AttributeSet attrs;
        attrs.story_id = rec.at("story_id").get<std::string>();
        const auto source = attribute_source_from_string(rec.at("source").get<std::string>());
        if (!source) throw std::runtime_error("attributes.jsonl: unknown source");
        attrs.source = *source;
        for (const auto& jt : rec.at("tokens"))
            attrs.add(jt.at(0).get<std::string>(), jt.at(1).get<std::size_t>());
        sets.push_back(std::move(attrs));
    }
    return sets;
}

std::unordered_map<std::string, PovLabel> load_pov_labels(const Context& ctx) {
    const fs::path path = work_path(ctx, "pov.csv");
    require_artifact(path, "pov");
    std::ifstream in(path);
    std::unordered_map<std::string, PovLabel> result;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (header) {
            header = false;
            continue;
        }
        if (line.empty()) continue;
        const auto fields = csv_parse_line(line);
        if (fields.size() < 4) continue;
        const auto label = pov_label_from_string(fields[3]);
        if (label) result[fields[0]] = *label;
    }
    return result;
}

struct LexiconBundle {
    std::optional<VadLexicons> vad;
    std::optional<BipolarCategoryLexicon> power;
    std::optional<CategoryLexicon> appearance;
    std::optional<CategoryLexicon> intellect;
};

LexiconBundle load_lexicon_bundle(const Context& ctx, Report& report) {
    LexiconBundle bundle;
    const std::string vad_path = ctx.config.get_string("paths.vad_lexicon");
    if (!vad_path.empty()) bundle.vad = load_scored_lexicon(vad_path, report);

    const std::string weak = ctx.config.get_string("paths.power_weak");
    const std::string powerful = ctx.config.get_string("paths.power_powerful");
    if (!weak.empty() && !powerful.empty()) {
        BipolarCategoryLexicon power;
        power.dimension = Dimension::power;
        power.low_terms = load_concept_list(weak, report).terms;
        power.high_terms = load_concept_list(powerful, report).terms;
        // the two concept lists may share noise terms; drop the overlap
        for (auto it = power.low_terms.begin(); it != power.low_terms.end();) {
            if (power.high_terms.count(*it)) {
                report.warn(0, "power term in both poles dropped: " + *it);
                power.high_terms.erase(*it);
                it = power.low_terms.erase(it);
            } else {
                ++it;
            }
        }
        bundle.power = std::move(power);
    }

    const std::string beautiful = ctx.config.get_string("paths.appearance_beautiful");
    const std::string sexual = ctx.config.get_string("paths.appearance_sexual");
    if (!beautiful.empty() && !sexual.empty()) {
        CategoryLexicon appearance;
        appearance.dimension = Dimension::appearance;
        for (const auto* path : {&beautiful, &sexual}) {
            const auto list = load_concept_list(*path, report);
            for (const auto& t : list.terms) {
                appearance.terms.insert(t);
                appearance.provenance.emplace(t, list.concept_name);
            }
        }
        bundle.appearance = std::move(appearance);
    }

    const std::string intellect = ctx.config.get_string("paths.intellect");
    if (!intellect.empty()) {
        CategoryLexicon lex;
        lex.dimension = Dimension::intellect;
        lex.terms = load_concept_list(intellect, report).terms;
        bundle.intellect = std::move(lex);
    }
    return bundle;
}

int cmd_score(Context& ctx, const std::string& dimensions_flag, const std::string& methods_flag,
              bool type_level_flag) {
    const Corpus corpus = load_work_corpus(ctx);
    const auto pov_labels = load_pov_labels(ctx);
    const auto attribute_sets = load_attribute_sets(ctx);

    Report report;
    const LexiconBundle lexicons = load_lexicon_bundle(ctx, report);

    auto parse_list = [](const std::string& flag) {
        std::vector<std::string> items;
        std::istringstream ss(flag);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) items.push_back(item);
        return items;
    };
    std::set<Dimension> wanted_dims;
    if (dimensions_flag.empty() || dimensions_flag == "all") {
        for (auto d : {Dimension::valence, Dimension::arousal, Dimension::dominance,
                       Dimension::power, Dimension::appearance, Dimension::intellect})
            wanted_dims.insert(d);
    } else {
        for (const auto& name : parse_list(dimensions_flag)) {
            const auto d = dimension_from_string(name);
            if (!d) throw std::runtime_error("unknown dimension: " + name);
            wanted_dims.insert(*d);
        }
    }
    std::set<ScoreMethod> wanted_methods;
    if (methods_flag.empty() || methods_flag == "all") {
        wanted_methods = {ScoreMethod::lex_avg, ScoreMethod::emb_sim, ScoreMethod::axis_emb};
    } else {
        for (const auto& name : parse_list(methods_flag)) {
            const auto m = score_method_from_string(name);
            if (!m) throw std::runtime_error("unknown method: " + name);
            wanted_methods.insert(*m);
        }
    }

    // embeddings, restricted to the vocabulary the scorers can touch
    std::optional<EmbeddingStore> store;
    const std::string emb_path = ctx.config.get_string("paths.embeddings");
    const bool need_embeddings = wanted_methods.count(ScoreMethod::emb_sim) > 0 ||
                                 wanted_methods.count(ScoreMethod::axis_emb) > 0;
    if (!emb_path.empty() && need_embeddings) {
        std::set<std::string> vocab;
        for (const auto& attrs : attribute_sets)
            for (const auto& [token, w] : attrs.tokens) vocab.insert(token);
        if (lexicons.vad)
            for (const auto& [t, s] : lexicons.vad->valence.entries) vocab.insert(t);
        if (lexicons.power) {
            vocab.insert(lexicons.power->low_terms.begin(), lexicons.power->low_terms.end());
            vocab.insert(lexicons.power->high_terms.begin(), lexicons.power->high_terms.end());
        }
        if (lexicons.appearance)
            vocab.insert(lexicons.appearance->terms.begin(), lexicons.appearance->terms.end());
        if (lexicons.intellect)
            vocab.insert(lexicons.intellect->terms.begin(), lexicons.intellect->terms.end());
        store = load_embeddings(emb_path, report, &vocab);
    }

    const double low_pct = ctx.config.get_double("scoring.percentile_low", 25.0);
    const double high_pct = ctx.config.get_double("scoring.percentile_high", 75.0);
    const bool type_level = type_level_flag || ctx.config.get_bool("scoring.type_level", false);

    // build every scorer that has its inputs available
    std::vector<DimensionScorer> scorers;
    auto want = [&](Dimension d, ScoreMethod m) {
        return wanted_dims.count(d) > 0 && wanted_methods.count(m) > 0;
    };
    for (auto d : {Dimension::valence, Dimension::arousal, Dimension::dominance}) {
        if (!lexicons.vad) continue;
        const ScoredLexicon& lex = lexicons.vad->get(d);
        if (want(d, ScoreMethod::lex_avg)) scorers.push_back(DimensionScorer::make_lex_avg(lex));
        if (store && want(d, ScoreMethod::emb_sim))
            scorers.push_back(DimensionScorer::make_emb_sim(lex, *store, high_pct));
        if (store && want(d, ScoreMethod::axis_emb))
            scorers.push_back(DimensionScorer::make_axis_emb(lex, *store, low_pct, high_pct));
    }
    if (lexicons.power) {
        if (want(Dimension::power, ScoreMethod::lex_avg))
            scorers.push_back(DimensionScorer::make_lex_avg(*lexicons.power));
        if (store && want(Dimension::power, ScoreMethod::emb_sim))
            scorers.push_back(DimensionScorer::make_emb_sim(*lexicons.power, *store));
        if (store && want(Dimension::power, ScoreMethod::axis_emb))
            scorers.push_back(DimensionScorer::make_axis_emb(*lexicons.power, *store));
    }
    for (const auto* unipolar : {&lexicons.appearance, &lexicons.intellect}) {
        if (!unipolar->has_value()) continue;
        const CategoryLexicon& lex = unipolar->value();
        if (want(lex.dimension, ScoreMethod::lex_avg))
            scorers.push_back(DimensionScorer::make_lex_avg(lex));
        if (store && want(lex.dimension, ScoreMethod::emb_sim))
            scorers.push_back(DimensionScorer::make_emb_sim(lex, *store));
        // axis_emb is undefined for unipolar dimensions
    }
    if (scorers.empty()) throw std::runtime_error("score: no scorer configurable; check paths");

    std::vector<StoryScore> scores;
    scores.reserve(attribute_sets.size() * scorers.size());
    for (const auto& attrs : attribute_sets)
        for (const auto& scorer : scorers) scores.push_back(score_story(attrs, scorer, type_level));

    zscore(scores, report);
    print_report(report, "score");

    const fs::path out_path = work_path(ctx, "scores.csv");
    std::ofstream out(out_path);
    out << "story_id,prompt_id,writer,pov,dimension,method,source,raw,z,n_scored_tokens\n";
    for (const auto& s : scores) {
        const Story* story = corpus.find_story(s.story_id);
        const auto pov_it = pov_labels.find(s.story_id);
        out << csv_escape(s.story_id) << ','
            << (story ? csv_escape(story->prompt_id) : std::string()) << ','
            << (story ? to_string(story->writer) : std::string_view()) << ','
            << (pov_it != pov_labels.end() ? to_string(pov_it->second) : std::string_view()) << ','
            << to_string(s.dimension) << ',' << to_string(s.method) << ',' << to_string(s.source)
            << ',' << fmt_double(s.raw) << ',' << fmt_double(s.z) << ',' << s.n_scored_tokens
            << "\n";
    }
    out.close();
    write_sidecar(ctx, out_path);
    std::cout << "score: wrote " << scores.size() << " row(s) over " << scorers.size()
              << " scorer(s) -> " << out_path.string() << "\n";
    return 0;
}

// --- evaluate ---------------------------------------------------------------------

int cmd_evaluate(Context& ctx, const std::string& dimension_flag, const std::string& method_flag,
                 const std::string& out_flag) {
    const std::string vad_path = ctx.config.get_string("paths.vad_lexicon");
    if (vad_path.empty()) throw std::runtime_error("evaluate: paths.vad_lexicon not configured");
    const std::string emb_path = ctx.config.get_string("paths.embeddings");
    if (emb_path.empty()) throw std::runtime_error("evaluate: paths.embeddings not configured");

    Report report;
    const VadLexicons vad = load_scored_lexicon(vad_path, report);
    std::set<std::string> vocab;
    for (const auto& [t, s] : vad.valence.entries) vocab.insert(t);
    const EmbeddingStore store = load_embeddings(emb_path, report, &vocab);
    print_report(report, "evaluate");

    std::vector<Dimension> dims;
    if (dimension_flag.empty() || dimension_flag == "all") {
        dims = {Dimension::valence, Dimension::arousal, Dimension::dominance};
    } else {
        const auto d = dimension_from_string(dimension_flag);
        if (!d ||
            !(*d == Dimension::valence || *d == Dimension::arousal || *d == Dimension::dominance))
            throw std::runtime_error("evaluate: dimension must be valence|arousal|dominance");
        dims = {*d};
    }
    std::vector<ScoreMethod> methods;
    if (method_flag.empty() || method_flag == "all") {
        methods = {ScoreMethod::emb_sim, ScoreMethod::axis_emb};
    } else {
        const auto m = score_method_from_string(method_flag);
        if (!m || *m == ScoreMethod::lex_avg)
            throw std::runtime_error("evaluate: method must be emb_sim|axis_emb");
        methods = {*m};
    }

    const double ratio = ctx.config.get_double("split.ratio", 0.8);
    const double low_pct = ctx.config.get_double("scoring.percentile_low", 25.0);
    const double high_pct = ctx.config.get_double("scoring.percentile_high", 75.0);
    const std::uint64_t seed = stage_seed(ctx, "split");

    json reports = json::array();
    for (const auto d : dims) {
        for (const auto m : methods) {
            const auto r = evaluate_scorer(vad.get(d), m, store, ratio, seed, low_pct, high_pct);
            reports.push_back(json{{"dimension", std::string(to_string(r.dimension))},
                                   {"method", std::string(to_string(r.method))},
                                   {"spearman", r.spearman},
                                   {"n_test", r.n_test},
                                   {"coverage", r.coverage},
                                   {"ratio", r.ratio},
                                   {"seed", r.seed}});
        }
    }
    const json out =
        reports.size() == 1 ? reports[0] : json{{"schema_version", 1}, {"results", reports}};

    const std::string rendered = out.dump(2);
    std::cout << rendered << "\n";
    if (!out_flag.empty()) {
        std::ofstream f(out_flag);
        f << rendered << "\n";
        write_sidecar(ctx, out_flag);
    }
    return 0;
}

// --- analyze ----------------------------------------------------------------------

struct ScoreRow {
    StoryScore score;
    std::string prompt_id;
    WriterGroup writer = WriterGroup::human;
    std::optional<PovLabel> pov;
};

std::vector<ScoreRow> load_score_rows(const Context& ctx) {
    const fs::path path = work_path(ctx, "scores.csv");
    require_artifact(path, "score");
    std::ifstream in(path);
    std::vector<ScoreRow> rows;
    std::string line;
    bool header = true;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (header) {
            header = false;
            continue;
        }
        if (line.empty()) continue;
        const auto f = csv_parse_line(line);
        if (f.size() != 10)
            throw std::runtime_error("scores.csv line " + std::to_string(line_no) +
                                     ": expected 10 fields");
        ScoreRow row;
        row.score.story_id = f[0];
        row.prompt_id = f[1];
        const auto writer = writer_group_from_string(f[2]);
        if (!writer)
            throw std::runtime_error("scores.csv line " + std::to_string(line_no) +
                                     ": bad writer field");
        row.writer = *writer;
        row.pov = pov_label_from_string(f[3]);
        const auto dim = dimension_from_string(f[4]);
        const auto method = score_method_from_string(f[5]);
        const auto source = attribute_source_from_string(f[6]);
        if (!dim || !method || !source)
            throw std::runtime_error("scores.csv line " + std::to_string(line_no) +
                                     ": bad dimension/method/source");
        row.score.dimension = *dim;
        row.score.method = *method;
        row.score.source = *source;
        if (!f[7].empty()) row.score.raw = std::stod(f[7]);
        if (!f[8].empty()) row.score.z = std::stod(f[8]);
        row.score.n_scored_tokens = static_cast<std::size_t>(std::stoull(f[9]));
        rows.push_back(std::move(row));
    }
    return rows;
}

int cmd_analyze_groups(Context& ctx) {
    const auto rows = load_score_rows(ctx);

    std::vector<StoryScore> scores;
    std::unordered_map<std::string, WriterGroup> writer_of;
    std::unordered_map<std::string, PovLabel> pov_of;
    for (const auto& r : rows) {
        scores.push_back(r.score);
        writer_of.emplace(r.score.story_id, r.writer);
        if (r.pov) pov_of.emplace(r.score.story_id, *r.pov);
    }
    const auto groups = group_aggregate(scores, writer_of, pov_of);

    const fs::path stats_path = work_path(ctx, "group_stats.csv");
    {
        std::ofstream out(stats_path);
        out << "writer,pov,dimension,method,source,mean,std,n\n";
        for (const auto& g : groups)
            out << to_string(g.writer) << ',' << to_string(g.pov) << ',' << to_string(g.dimension)
                << ',' << to_string(g.method) << ',' << to_string(g.source) << ','
                << fmt_double(g.mean) << ',' << fmt_double(g.std_dev) << ',' << g.n << "\n";
    }
    write_sidecar(ctx, stats_path);

    // significance: human vs machine inside each (pov, dimension, method,
    // source) cell, and TP-M vs TP-F inside each writer group
    using CellKey = std::tuple<Dimension, ScoreMethod, AttributeSource, PovLabel, WriterGroup>;
    std::map<CellKey, std::vector<double>> cells;
    for (const auto& r : rows) {
        if (!r.score.z || !r.pov) continue;
        cells[{r.score.dimension, r.score.method, r.score.source, *r.pov, r.writer}].push_back(
            *r.score.z);
    }
    const fs::path sig_path = work_path(ctx, "significance.csv");
    std::ofstream sig(sig_path);
    sig << "comparison,context,dimension,method,source,n_a,n_b,mean_a,mean_b,direction,"
           "welch_t,welch_p,mwu_u,mwu_p\n";
    auto emit = [&](const char* comparison, const std::string& context, Dimension d, ScoreMethod m,
                    AttributeSource s, const std::vector<double>& a,
                    const std::vector<double>& b) {
        if (a.size() < 2 || b.size() < 2) return;
        const auto r = significance_test(a, b);
        sig << comparison << ',' << csv_escape(context) << ',' << to_string(d) << ','
            << to_string(m) << ',' << to_string(s) << ',' << r.n_a << ',' << r.n_b << ','
            << fmt_double(r.mean_a) << ',' << fmt_double(r.mean_b) << ','
            << to_string(r.direction) << ',' << (r.welch ? fmt_double(r.welch->t) : std::string())
            << ',' << (r.welch ? fmt_double(r.welch->p) : std::string()) << ','
            << (r.mwu ? fmt_double(r.mwu->u) : std::string()) << ','
            << (r.mwu ? fmt_double(r.mwu->p) : std::string()) << "\n";
    };
    for (const auto d : {Dimension::valence, Dimension::arousal, Dimension::dominance,
                         Dimension::power, Dimension::appearance, Dimension::intellect}) {
        for (const auto m : {ScoreMethod::lex_avg, ScoreMethod::emb_sim, ScoreMethod::axis_emb}) {
            for (const auto s : {AttributeSource::dependency, AttributeSource::inference}) {
                for (const auto pov : {PovLabel::FP, PovLabel::SP, PovLabel::TP_M, PovLabel::TP_F,
                                       PovLabel::Other}) {
                    auto a = cells.find({d, m, s, pov, WriterGroup::human});
                    auto b = cells.find({d, m, s, pov, WriterGroup::machine});
                    if (a == cells.end() || b == cells.end()) continue;
                    emit("human_vs_machine", std::string("pov=") + std::string(to_string(pov)), d,
                         m, s, a->second, b->second);
                }
                for (const auto writer : {WriterGroup::human, WriterGroup::machine}) {
                    auto a = cells.find({d, m, s, PovLabel::TP_M, writer});
                    auto b = cells.find({d, m, s, PovLabel::TP_F, writer});
                    if (a == cells.end() || b == cells.end()) continue;
                    emit("tpm_vs_tpf", std::string("writer=") + std::string(to_string(writer)), d,
                         m, s, a->second, b->second);
                }
            }
        }
    }
    sig.close();
    write_sidecar(ctx, sig_path);
    std::cout << "analyze-groups: " << groups.size() << " group cell(s) -> " << stats_path.string()
              << "\n";
    return 0;
}

int cmd_analyze_prompts(Context& ctx, const std::string& method_flag,
                        const std::string& source_flag) {
    const Corpus corpus = load_work_corpus(ctx);
    const auto rows = load_score_rows(ctx);

    const auto source = attribute_source_from_string(
        source_flag.empty() ? ctx.config.get_string("analysis.source", "inference") : source_flag);
    if (!source) throw std::runtime_error("analyze-prompts: bad source");

    PromptDiffParams params;
    params.k = static_cast<std::size_t>(ctx.config.get_int("analysis.k", 2));
    params.runs = static_cast<std::size_t>(ctx.config.get_int("analysis.runs", 5));
    params.seed = stage_seed(ctx, "prompt_diff");
    const auto n_bins = static_cast<std::size_t>(ctx.config.get_int("analysis.bins", 30));

    const fs::path diffs_path = work_path(ctx, "prompt_diffs.csv");
    const fs::path summary_path = work_path(ctx, "diff_summary.json");
    const fs::path hist_path = work_path(ctx, "diff_histogram.csv");
    std::ofstream diffs_csv(diffs_path);
    std::ofstream hist_csv(hist_path);
    diffs_csv << "prompt_id,dimension,method,source,comparison,diff\n";
    hist_csv << "dimension,method,source,comparison,bin_left,bin_right,count\n";
    json summaries = json::array();

    for (const auto d : {Dimension::valence, Dimension::arousal, Dimension::dominance,
                         Dimension::power, Dimension::appearance, Dimension::intellect}) {
        // method defaults to the paper pairing: axis for bipolar dimensions,
        // similarity for unipolar ones
        ScoreMethod method;
        if (!method_flag.empty() && method_flag != "auto") {
            const auto m = score_method_from_string(method_flag);
            if (!m) throw std::runtime_error("analyze-prompts: bad method");
            method = *m;
        } else {
            method = is_bipolar(d) ? ScoreMethod::axis_emb : ScoreMethod::emb_sim;
        }

        std::unordered_map<std::string, double> story_scores;
        for (const auto& r : rows)
            if (r.score.dimension == d && r.score.method == method && r.score.source == *source &&
                r.score.z)
                story_scores.emplace(r.score.story_id, *r.score.z);
        if (story_scores.empty()) continue;

        for (const auto comparison :
             {DiffComparison::human_vs_machine, DiffComparison::human_control}) {
            const auto outcome = prompt_level_diff(corpus, story_scores, d, comparison, params);
            if (outcome.diffs.empty()) continue;
            for (const auto& diff : outcome.diffs)
                diffs_csv << csv_escape(diff.prompt_id) << ',' << to_string(d) << ','
                          << to_string(method) << ',' << to_string(*source) << ','
                          << to_string(comparison) << ',' << fmt_double(diff.diff) << "\n";
            const auto summary = summarize_diffs(outcome.diffs, n_bins);
            summaries.push_back(json{{"dimension", std::string(to_string(d))},
                                     {"method", std::string(to_string(method))},
                                     {"source", std::string(to_string(*source))},
                                     {"comparison", std::string(to_string(comparison))},
                                     {"n", summary.n},
                                     {"n_skipped_prompts", outcome.n_skipped},
                                     {"mean", summary.mean},
                                     {"median", summary.median},
                                     {"std", summary.std_dev}});
            for (const auto& bin : summary.histogram)
                hist_csv << to_string(d) << ',' << to_string(method) << ',' << to_string(*source)
                         << ',' << to_string(comparison) << ',' << fmt_double(bin.left) << ','
                         << fmt_double(bin.right) << ',' << bin.count << "\n";
        }
    }
    diffs_csv.close();
    hist_csv.close();
    {
        std::ofstream out(summary_path);
        out << json{{"schema_version", 1},
                    {"sign_convention", "human_minus_machine"},
                    {"summaries", summaries}}
                   .dump(2)
            << "\n";
    }
    write_sidecar(ctx, diffs_path);
    write_sidecar(ctx, summary_path);
    write_sidecar(ctx, hist_path);
    std::cout << "analyze-prompts: " << summaries.size() << " summary cell(s) -> "
              << summary_path.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"storylens: narrative point-of-view and protagonist portrayal analytics"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string config_path;
    std::string work_dir_flag;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "TOML-style key/value config file");
    app.add_option("--work-dir", work_dir_flag, "stage artifact directory (default: work)");
    app.add_option("--set", overrides, "override a config key, e.g. --set seeds.root=7");

    auto* ingest = app.add_subcommand("ingest", "validate corpus JSONL into the work directory");
    std::vector<std::string> corpus_files;
    std::string wp_source, wp_target, wp_writer = "human";
    bool strict = false;
    ingest->add_option("--corpus", corpus_files, "corpus JSONL file (repeatable)");
    ingest->add_option("--wp-source", wp_source, "WritingPrompts .wp_source file");
    ingest->add_option("--wp-target", wp_target, "WritingPrompts .wp_target file");
    ingest->add_option("--wp-writer", wp_writer, "writer group for converted stories");
    ingest->add_flag("--strict", strict, "fail on the first malformed line");

    auto* stats_cmd = app.add_subcommand("stats", "per-writer-group corpus statistics");

    auto* generate = app.add_subcommand("generate", "collect machine stories from an endpoint");
    std::size_t limit_prompts = 0;
    generate->add_option("--limit-prompts", limit_prompts, "only the first N prompts");

    auto* pov_cmd = app.add_subcommand("pov", "protagonist selection and PoV classification");
    std::string clusters_flag;
    pov_cmd->add_option("--clusters", clusters_flag,
                        "cluster annotation JSONL (default: heuristic resolver)");

    auto* attrs_cmd = app.add_subcommand("attrs", "protagonist attribute extraction");
    std::string conllu_flag, inferences_flag;
    attrs_cmd->add_option("--conllu", conllu_flag, "dependency annotations (CoNLL-U)");
    attrs_cmd->add_option("--inferences", inferences_flag, "inference phrases JSONL");

    auto* score_cmd = app.add_subcommand("score", "dimension scores for every story");
    std::string dimensions_flag, methods_flag;
    bool type_level = false;
    score_cmd->add_option("--dimensions", dimensions_flag, "comma list or 'all'");
    score_cmd->add_option("--methods", methods_flag, "comma list or 'all'");
    score_cmd->add_flag("--type-level", type_level, "collapse duplicate attribute tokens");

    auto* evaluate_cmd =
        app.add_subcommand("evaluate", "score a method against held-out lexicon truth");
    std::string eval_dimension, eval_method, eval_out;
    evaluate_cmd->add_option("--dimension", eval_dimension, "valence|arousal|dominance|all");
    evaluate_cmd->add_option("--method", eval_method, "emb_sim|axis_emb|all");
    evaluate_cmd->add_option("--out", eval_out, "also write the JSON report here");

    auto* groups_cmd =
        app.add_subcommand("analyze-groups", "per (writer, pov) aggregates and significance");

    auto* prompts_cmd =
        app.add_subcommand("analyze-prompts", "prompt-conditioned human/machine differences");
    std::string pd_method, pd_source;
    prompts_cmd->add_option("--method", pd_method, "auto|lex_avg|emb_sim|axis_emb");
    prompts_cmd->add_option("--source", pd_source, "dependency|inference");

    CLI11_PARSE(app, argc, argv);

    try {
        Context ctx;
        if (!config_path.empty()) ctx.config = Config::parse_file(config_path);
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("--set expects key=value, got: " + kv);
            ctx.config.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        ctx.work_dir = work_dir_flag.empty()
                           ? fs::path(ctx.config.get_string("paths.work_dir", "work"))
                           : fs::path(work_dir_flag);
        {
            std::ostringstream cmd;
            for (int i = 0; i < argc; ++i) cmd << (i ? " " : "") << argv[i];
            ctx.command_line = cmd.str();
        }

        if (*ingest) return cmd_ingest(ctx, corpus_files, wp_source, wp_target, wp_writer, strict);
        if (*stats_cmd) return cmd_stats(ctx);
        if (*generate) return cmd_generate(ctx, limit_prompts);
        if (*pov_cmd) return cmd_pov(ctx, clusters_flag);
        if (*attrs_cmd) return cmd_attrs(ctx, conllu_flag, inferences_flag);
        if (*score_cmd) return cmd_score(ctx, dimensions_flag, methods_flag, type_level);
        if (*evaluate_cmd) return cmd_evaluate(ctx, eval_dimension, eval_method, eval_out);
        if (*groups_cmd) return cmd_analyze_groups(ctx);
        if (*prompts_cmd) return cmd_analyze_prompts(ctx, pd_method, pd_source);
    } catch (const std::exception& e) {
        std::cerr << "storylens: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
