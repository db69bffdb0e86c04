#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "storylens/corpus.hpp"
#include "storylens/report.hpp"

namespace storylens {

enum class SystemRole { author, redditor };

std::string_view to_string(SystemRole r);
std::optional<SystemRole> system_role_from_string(std::string_view s);
std::string_view system_role_text(SystemRole r);

enum class RolePolicy { author_only, redditor_only, alternate };

struct GenerationConfig {
    RolePolicy role_policy = RolePolicy::alternate;
    std::string user_template = "Write a 500 word story for the following prompt: {prompt}";
    double temperature = 0.95;
    std::size_t n_per_prompt = 2;
    std::string model_name = "gpt-3.5-turbo";
    std::string endpoint_url;                       // scheme://host[:port]/path
    std::string api_key_env = "STORYLENS_API_KEY";  // credential comes from the environment
    std::size_t max_attempts = 5;
    std::size_t backoff_ms = 250;  // doubles per retry
    std::size_t concurrency = 4;

    void validate() const;  // throws std::invalid_argument on bad settings
    SystemRole role_for_index(std::size_t index) const;
};

// Chat-completions payload with a fixed key order so that identical
// (prompt, config) pairs serialize byte-identically.
std::string build_request(const Prompt& prompt, const GenerationConfig& config, SystemRole role);

struct CollectOutcome {
    std::size_t n_requested = 0;  // HTTP requests actually issued
    std::size_t n_written = 0;
    std::size_t n_skipped_existing = 0;
    std::size_t n_failed = 0;
};

// Issues one request per missing (prompt, role, index) triple and appends the
// responses to `output_path` as machine story records with generation
// metadata. Already-present triples are skipped, which makes interrupted runs
// resumable. Retries use exponential backoff; a 429 honours Retry-After.
// The credential is read from the environment and never logged or persisted.
CollectOutcome collect_stories(const Corpus& corpus, const GenerationConfig& config,
                               const std::string& output_path, Report& report);

}  // namespace storylens
