#include "storylens/genclient.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace storylens {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr std::string_view kAuthorText = "You are an award winning creative short story writer.";
constexpr std::string_view kRedditorText =
    "You're writing a Reddit story and you want other reddit users to like and upvote your "
    "story.";
constexpr std::string_view kPlaceholder = "{prompt}";

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct ParsedUrl {
    std::string base;  // scheme://host[:port]
    std::string path;  // /v1/chat/completions
};

ParsedUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw std::invalid_argument("endpoint URL needs a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

std::string_view to_string(SystemRole r) {
    return r == SystemRole::author ? "author" : "redditor";
}

std::optional<SystemRole> system_role_from_string(std::string_view s) {
    if (s == "author") return SystemRole::author;
    if (s == "redditor") return SystemRole::redditor;
    return std::nullopt;
}

std::string_view system_role_text(SystemRole r) {
    return r == SystemRole::author ? kAuthorText : kRedditorText;
}

void GenerationConfig::validate() const {
    if (!(temperature > 0.0 && temperature <= 2.0))
        throw std::invalid_argument("temperature must be in (0, 2]");
    if (n_per_prompt < 1) throw std::invalid_argument("n_per_prompt must be >= 1");
    const auto first = user_template.find(kPlaceholder);
    if (first == std::string::npos)
        throw std::invalid_argument("user_template must contain the {prompt} placeholder");
    if (user_template.find(kPlaceholder, first + 1) != std::string::npos)
        throw std::invalid_argument("user_template must contain exactly one {prompt} placeholder");
}

SystemRole GenerationConfig::role_for_index(std::size_t index) const {
    switch (role_policy) {
        case RolePolicy::author_only: return SystemRole::author;
        case RolePolicy::redditor_only: return SystemRole::redditor;
        case RolePolicy::alternate: return index % 2 == 0 ? SystemRole::author : SystemRole::redditor;
    }
    return SystemRole::author;
}

std::string build_request(const Prompt& prompt, const GenerationConfig& config, SystemRole role) {
    config.validate();
    std::string user = config.user_template;
    user.replace(user.find(kPlaceholder), kPlaceholder.size(), prompt.text);

    // fixed key order so identical inputs serialize byte-identically
    ordered_json payload;
    payload["model"] = config.model_name;
    payload["messages"] = ordered_json::array();
    {
        ordered_json sys;
        sys["role"] = "system";
        sys["content"] = std::string(system_role_text(role));
        ordered_json usr;
        usr["role"] = "user";
        usr["content"] = user;
        payload["messages"].push_back(std::move(sys));
        payload["messages"].push_back(std::move(usr));
    }
    payload["temperature"] = config.temperature;
    payload["n"] = 1;
    return payload.dump();
}

namespace {

struct Job {
    const Prompt* prompt;
    SystemRole role;
    std::size_t index;
};

std::string job_story_id(const Job& job) {
    return job.prompt->id + "#" + std::string(to_string(job.role)) + "#" +
           std::to_string(job.index);
}

}  // namespace

CollectOutcome collect_stories(const Corpus& corpus, const GenerationConfig& config,
                               const std::string& output_path, Report& report) {
    config.validate();
    if (config.endpoint_url.empty())
        throw std::invalid_argument("collect_stories: endpoint_url not configured");

    // already-generated (prompt, role, index) triples are skipped on rerun
    std::set<std::string> done;
    {
        std::ifstream existing(output_path);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(existing, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
            try {
                const json rec = json::parse(line);
                if (rec.value("kind", "") != "story" || !rec.contains("gen")) continue;
                const auto& gen = rec.at("gen");
                done.insert(rec.at("prompt_id").get<std::string>() + "#" +
                            gen.at("role").get<std::string>() + "#" +
                            std::to_string(gen.at("index").get<std::size_t>()));
            } catch (const std::exception& e) {
                report.warn(line_no, std::string("unreadable record in output: ") + e.what());
            }
        }
    }

    CollectOutcome outcome;
    std::vector<Job> jobs;
    for (const auto& prompt : corpus.prompts()) {
        for (std::size_t index = 0; index < config.n_per_prompt; ++index) {
            Job job{&prompt, config.role_for_index(index), index};
            if (done.count(job_story_id(job)) > 0) {
                ++outcome.n_skipped_existing;
                continue;
            }
            jobs.push_back(job);
        }
    }
    if (jobs.empty()) return outcome;

    const char* key = std::getenv(config.api_key_env.c_str());
    const ParsedUrl url = split_url(config.endpoint_url);

    std::ofstream out(output_path, std::ios::app);
    if (!out) throw std::runtime_error("cannot open output file: " + output_path);

    std::mutex io_mutex;  // guards `out`, `report`, and the counters
    std::atomic<std::size_t> next_job{0};

    auto worker = [&] {
        httplib::Client client(url.base);
        client.set_connection_timeout(30);
        client.set_read_timeout(120);
        httplib::Headers headers;
        if (key != nullptr && key[0] != '\0')
            headers.emplace("Authorization", std::string("Bearer ") + key);

        for (;;) {
            const std::size_t i = next_job.fetch_add(1);
            if (i >= jobs.size()) return;
            const Job& job = jobs[i];
            const std::string body = build_request(*job.prompt, config, job.role);
            {
                std::lock_guard<std::mutex> lock(io_mutex);
                ++outcome.n_requested;
            }

            std::string content;
            bool got = false;
            std::size_t wait_ms = config.backoff_ms;
            for (std::size_t attempt = 1; attempt <= config.max_attempts; ++attempt) {
                auto res = client.Post(url.path, headers, body, "application/json");
                if (res && res->status == 200) {
                    try {
                        const json parsed = json::parse(res->body);
                        content = parsed.at("choices").at(0).at("message").at("content")
                                      .get<std::string>();
                        got = true;
                    } catch (const std::exception& e) {
                        std::lock_guard<std::mutex> lock(io_mutex);
                        report.error(0, job_story_id(job) +
                                            ": malformed response body: " + e.what());
                    }
                    break;  // malformed bodies are recorded, not retried
                }
                if (attempt == config.max_attempts) break;
                std::size_t sleep_ms = wait_ms;
                if (res && res->status == 429) {
                    if (res->has_header("Retry-After")) {
                        try {
                            sleep_ms = static_cast<std::size_t>(
                                           std::stoul(res->get_header_value("Retry-After"))) *
                                       1000;
                        } catch (const std::exception&) {
                        }
                    }
                    std::lock_guard<std::mutex> lock(io_mutex);
                    report.warn(0, job_story_id(job) + ": rate limited, waiting " +
                                       std::to_string(sleep_ms) + "ms");
                } else {
                    std::lock_guard<std::mutex> lock(io_mutex);
                    report.warn(0, job_story_id(job) + ": attempt " + std::to_string(attempt) +
                                       " failed" +
                                       (res ? " with status " + std::to_string(res->status)
                                            : " (no response)"));
                }
                std::this_thread::sleep_for(std::chrono::milliseconds(sleep_ms));
                wait_ms *= 2;
            }

            std::lock_guard<std::mutex> lock(io_mutex);
            if (!got) {
                ++outcome.n_failed;
                continue;
            }
            json rec;
            rec["kind"] = "story";
            rec["id"] = job_story_id(job);
            rec["prompt_id"] = job.prompt->id;
            rec["writer"] = "machine";
            rec["text"] = content;
            rec["gen"] = json{{"role", std::string(to_string(job.role))},
                              {"temperature", config.temperature},
                              {"model", config.model_name},
                              {"index", job.index},
                              {"timestamp", utc_timestamp()}};
            out << rec.dump() << "\n";
            out.flush();
            ++outcome.n_written;
        }
    };

    const std::size_t n_threads = std::max<std::size_t>(1, config.concurrency);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(n_threads, jobs.size()); ++t)
        pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return outcome;
}

}  // namespace storylens
