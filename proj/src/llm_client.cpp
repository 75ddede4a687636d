#include "georef/llm_client.hpp"

#include "georef/parallel.hpp"
#include "georef/text.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <thread>

namespace georef {

using Json = nlohmann::ordered_json;

void BackendConfig::validate() const {
    auto bad = [](const std::string& m) { throw LlmError(LlmError::Kind::BadConfig, m); };
    if (base_url.empty()) bad("base_url is empty");
    if (model_name.empty()) bad("model_name is empty");
    if (!(timeout_seconds > 0.0)) bad("timeout must be > 0");
    if (max_retries < 0) bad("max_retries must be >= 0");
    if (!(temperature >= 0.0)) bad("temperature must be >= 0");
    if (max_output_tokens <= 0) bad("max_output_tokens must be > 0");
    if (!(rate_limit >= 0.0)) bad("rate_limit must be >= 0");
    if (!(backoff_base_seconds >= 0.0)) bad("backoff base must be >= 0");
}

std::string_view to_string(LlmError::Kind kind) noexcept {
    switch (kind) {
        case LlmError::Kind::Timeout: return "timeout";
        case LlmError::Kind::RateLimited: return "rate_limited";
        case LlmError::Kind::AuthFailure: return "auth_failure";
        case LlmError::Kind::MalformedResponse: return "malformed_response";
        case LlmError::Kind::Unreachable: return "unreachable";
        case LlmError::Kind::ServerError: return "server_error";
        case LlmError::Kind::BadConfig: return "bad_config";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// HTTP backend

namespace {

std::chrono::milliseconds to_ms(double seconds) {
    return std::chrono::milliseconds(static_cast<std::int64_t>(std::ceil(seconds * 1000.0)));
}

double jitter_factor() {
    thread_local std::mt19937 gen{std::random_device{}()};
    return 1.0 + std::uniform_real_distribution<double>(0.0, 0.25)(gen);
}

std::string extract_content(const std::string& body) {
    auto j = Json::parse(body, nullptr, false);
    if (j.is_discarded()) throw LlmError(LlmError::Kind::MalformedResponse, "response body is not JSON");
    try {
        const auto& content = j.at("choices").at(0).at("message").at("content");
        if (!content.is_string()) throw LlmError(LlmError::Kind::MalformedResponse, "message content is not a string");
        return content.get<std::string>();
    } catch (const Json::exception& e) {
        throw LlmError(LlmError::Kind::MalformedResponse, std::string("unexpected response shape: ") + e.what());
    }
}

}  // namespace

HttpChatBackend::HttpChatBackend(BackendConfig config, Sleeper sleeper)
    : config_((config.validate(), std::move(config))),
      endpoint_(config_.base_url, to_ms(config_.timeout_seconds)),
      limiter_(config_.rate_limit),
      sleep_(std::move(sleeper)) {
    if (!sleep_) {
        sleep_ = [](std::chrono::duration<double> d) { std::this_thread::sleep_for(d); };
    }
    if (!config_.api_key_env.empty()) {
        if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) api_key_ = key;
    }
}

Completion HttpChatBackend::complete(const std::string& prompt) {
    using Kind = LlmError::Kind;
    if (!config_.api_key_env.empty() && !api_key_) {
        throw LlmError(Kind::AuthFailure, "environment variable " + config_.api_key_env + " is not set");
    }

    Json body;
    body["model"] = config_.model_name;
    body["messages"] = Json::array({Json{{"role", "user"}, {"content", prompt}}});
    body["temperature"] = config_.temperature;
    body["max_tokens"] = config_.max_output_tokens;
    const std::string payload = body.dump(-1, ' ', false, Json::error_handler_t::replace);

    http::Headers headers;
    if (api_key_) headers.emplace_back("Authorization", "Bearer " + *api_key_);

    const auto start = std::chrono::steady_clock::now();
    const int max_attempts = config_.max_retries + 1;
    Kind last_kind = Kind::Unreachable;
    std::string last_message;

    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        if (attempt > 1) {
            const double wait = config_.backoff_base_seconds * std::pow(2.0, attempt - 2) * jitter_factor();
            sleep_(std::chrono::duration<double>(wait));
        }
        limiter_.acquire();
        const auto result = endpoint_.post_json("/v1/chat/completions", payload, headers);

        if (!result.response) {
            last_kind = result.failure == http::Failure::Timeout ? Kind::Timeout : Kind::Unreachable;
            last_message = result.message;
            continue;
        }
        const int status = result.response->status;
        if (status == 401 || status == 403) {
            throw LlmError(Kind::AuthFailure, "HTTP " + std::to_string(status), attempt);
        }
        if (status == 429) {
            last_kind = Kind::RateLimited;
            last_message = "HTTP 429";
            continue;
        }
        if (status >= 500) {
            last_kind = Kind::ServerError;
            last_message = "HTTP " + std::to_string(status);
            continue;
        }
        if (status != 200) {
            throw LlmError(Kind::MalformedResponse, "HTTP " + std::to_string(status), attempt);
        }
        try {
            Completion c;
            c.text = extract_content(result.response->body);
            c.attempts = attempt;
            c.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start)
                               .count();
            return c;
        } catch (const LlmError& e) {
            throw LlmError(e.kind(), e.what(), attempt);
        }
    }
    throw LlmError(last_kind,
                   "giving up after " + std::to_string(max_attempts) + " attempts: " + last_message, max_attempts);
}

Completion complete(const std::string& prompt, const BackendConfig& config) {
    HttpChatBackend backend(config);
    return backend.complete(prompt);
}

// ---------------------------------------------------------------------------
// Mock backend

MockChatBackend::MockChatBackend(std::string model, std::string default_response)
    : model_(std::move(model)), default_response_(std::move(default_response)) {}

void MockChatBackend::add(std::string prompt, std::string response) {
    canned_[std::move(prompt)] = std::move(response);
}

void MockChatBackend::fail(std::string prompt, LlmError::Kind kind) {
    failures_[std::move(prompt)] = kind;
}

void MockChatBackend::load_jsonl(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        auto j = Json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("prompt") || !j.contains("response")) {
            throw std::runtime_error("mock responses line " + std::to_string(line_no) +
                                     ": expected {\"prompt\", \"response\"}");
        }
        add(j["prompt"].get<std::string>(), j["response"].get<std::string>());
    }
}

Completion MockChatBackend::complete(const std::string& prompt) {
    ++calls_;
    const auto now = ++in_flight_;
    auto peak = peak_.load();
    while (now > peak && !peak_.compare_exchange_weak(peak, now)) {
    }
    struct Leave {
        std::atomic<std::size_t>& n;
        ~Leave() { --n; }
    } leave{in_flight_};

    if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
    if (auto f = failures_.find(prompt); f != failures_.end()) {
        throw LlmError(f->second, "scripted failure", 1);
    }
    Completion c;
    auto it = canned_.find(prompt);
    c.text = it != canned_.end() ? it->second : default_response_;
    c.attempts = 1;
    c.latency_ms = delay_.count();
    return c;
}

// ---------------------------------------------------------------------------
// Response cache

ResponseCache::ResponseCache(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_, std::ios::binary);
    if (!in) return;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        auto j = Json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw std::runtime_error("response cache " + path_ + " line " + std::to_string(line_no) + " is not JSON");
        }
        Entry e;
        e.response = j.at("response").get<std::string>();
        e.attempts = j.value("attempts", 1);
        e.latency_ms = j.value("latency_ms", std::int64_t{0});
        entries_[j.at("key").get<std::string>()] = std::move(e);
    }
}

std::string ResponseCache::key(const std::string& model, PromptPattern pattern, const std::string& prompt_hash) {
    return model + '\t' + std::string(pattern_name(pattern)) + '\t' + prompt_hash;
}

std::optional<ResponseCache::Entry> ResponseCache::lookup(const std::string& model, PromptPattern pattern,
                                                          const std::string& prompt) const {
    const auto k = key(model, pattern, text::sha256_hex(prompt));
    std::lock_guard lock(mutex_);
    if (auto it = entries_.find(k); it != entries_.end()) return it->second;
    return std::nullopt;
}

void ResponseCache::store(const std::string& model, PromptPattern pattern, const std::string& prompt,
                          const Entry& entry) {
    const auto hash = text::sha256_hex(prompt);
    const auto k = key(model, pattern, hash);
    Json j;
    j["key"] = k;
    j["model"] = model;
    j["pattern"] = pattern_name(pattern);
    j["prompt_sha256"] = hash;
    j["response"] = entry.response;
    j["attempts"] = entry.attempts;
    j["latency_ms"] = entry.latency_ms;
    const auto line = j.dump(-1, ' ', false, Json::error_handler_t::strict);

    std::lock_guard lock(mutex_);
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw std::runtime_error("cannot append to response cache " + path_);
    out << line << '\n';
    out.flush();
    entries_[k] = entry;
}

std::size_t ResponseCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

// ---------------------------------------------------------------------------
// Batch prediction

std::vector<Prediction> batch_predict(const std::vector<OccurrenceRecord>& records, PromptPattern pattern,
                                      ChatBackend& backend, const BatchOptions& options) {
    if (options.parallelism < 1) throw LlmError(LlmError::Kind::BadConfig, "parallelism must be >= 1");

    const std::string model = backend.model_name();
    std::vector<Prediction> out(records.size());
    std::vector<std::string> prompts(records.size());
    std::vector<std::size_t> pending;

    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        prompts[i] = render_prompt(pattern, r, options.region_labels.label_for(r)).text;
        auto& p = out[i];
        p.record_id = r.id;
        p.method = Method{Method::Kind::Llm, pattern, model};
        std::optional<ResponseCache::Entry> hit;
        if (options.cache) hit = options.cache->lookup(model, pattern, prompts[i]);
        if (hit) {
            p.parsed = parse_coordinates(hit->response);
            p.attempts = hit->attempts;
            p.latency_ms = hit->latency_ms;
        } else {
            pending.push_back(i);
        }
    }

    auto run_one = [&](std::size_t i, bool probe) {
        auto& p = out[i];
        try {
            const auto c = backend.complete(prompts[i]);
            if (options.cache) options.cache->store(model, pattern, prompts[i], {c.text, c.attempts, c.latency_ms});
            p.parsed = parse_coordinates(c.text);
            p.attempts = c.attempts;
            p.latency_ms = c.latency_ms;
        } catch (const LlmError& e) {
            if (e.kind() == LlmError::Kind::AuthFailure) throw;
            if (probe && e.kind() == LlmError::Kind::Unreachable) throw;
            p.error = std::string(to_string(e.kind()));
            p.attempts = std::max(e.attempts(), 1);
            p.parsed = ParsedCoordinates{};
            p.parsed.failure = ParseFailure::NoCoordinates;
        }
    };

    if (!pending.empty()) {
        run_one(pending.front(), true);
        parallel_for(pending.size() - 1, options.parallelism,
                     [&](std::size_t k) { run_one(pending[k + 1], false); });
    }

    if (options.prediction_log) write_prediction_log(*options.prediction_log, out);
    return out;
}

}  // namespace georef
