#pragma once

#include "georef/dataset.hpp"
#include "georef/http.hpp"
#include "georef/prediction.hpp"
#include "georef/prompt.hpp"

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace georef {

struct BackendConfig {
    std::string base_url;
    std::string model_name;
    std::string api_key_env;  // name of the variable holding the bearer token; empty for none
    double temperature = 0.0;
    int max_output_tokens = 256;
    double timeout_seconds = 60.0;
    int max_retries = 3;
    double rate_limit = 0.0;  // requests per second, 0 = unlimited
    double backoff_base_seconds = 1.0;

    /// Throws LlmError(BadConfig) when an invariant is violated.
    void validate() const;
};

class LlmError : public std::runtime_error {
public:
    enum class Kind { Timeout, RateLimited, AuthFailure, MalformedResponse, Unreachable, ServerError, BadConfig };

    LlmError(Kind kind, std::string message, int attempts = 0)
        : std::runtime_error(std::move(message)), kind_(kind), attempts_(attempts) {}

    Kind kind() const noexcept { return kind_; }
    int attempts() const noexcept { return attempts_; }

private:
    Kind kind_;
    int attempts_;
};

std::string_view to_string(LlmError::Kind kind) noexcept;

struct Completion {
    std::string text;
    int attempts = 1;
    std::int64_t latency_ms = 0;
};

/// Anything that answers a single-turn chat prompt.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;

    /// Throws LlmError.
    virtual Completion complete(const std::string& prompt) = 0;
    virtual std::string model_name() const = 0;
};

/**
 * @brief OpenAI-style chat-completions client.
 *
 * POSTs {model, messages, temperature, max_tokens} to
 * <base_url>/v1/chat/completions and returns choices[0].message.content.
 * HTTP 429, 5xx and transport failures are retried with exponential
 * backoff (base, factor 2, up to 25% jitter); 401/403 are not.
 */
class HttpChatBackend : public ChatBackend {
public:
    using Sleeper = std::function<void(std::chrono::duration<double>)>;

    explicit HttpChatBackend(BackendConfig config, Sleeper sleeper = {});

    Completion complete(const std::string& prompt) override;
    std::string model_name() const override { return config_.model_name; }

private:
    BackendConfig config_;
    http::Endpoint endpoint_;
    http::RateLimiter limiter_;
    Sleeper sleep_;
    std::optional<std::string> api_key_;
};

/// complete() against a one-off HttpChatBackend.
Completion complete(const std::string& prompt, const BackendConfig& config);

/**
 * Deterministic in-process backend: exact prompt -> canned response, with
 * a default for unknown prompts. Counts calls and the peak number of
 * concurrent calls.
 */
class MockChatBackend : public ChatBackend {
public:
    explicit MockChatBackend(std::string model = "mock",
                             std::string default_response = "I cannot determine coordinates for this locality.");

    void add(std::string prompt, std::string response);
    /// Every call for this prompt throws LlmError(kind).
    void fail(std::string prompt, LlmError::Kind kind);
    /// Each call sleeps this long (and reports it as latency).
    void set_delay(std::chrono::milliseconds delay) { delay_ = delay; }

    /// Loads {"prompt": ..., "response": ...} lines.
    void load_jsonl(std::istream& in);

    Completion complete(const std::string& prompt) override;
    std::string model_name() const override { return model_; }

    std::size_t calls() const noexcept { return calls_.load(); }
    std::size_t peak_in_flight() const noexcept { return peak_.load(); }

private:
    std::string model_;
    std::string default_response_;
    std::unordered_map<std::string, std::string> canned_;
    std::unordered_map<std::string, LlmError::Kind> failures_;
    std::chrono::milliseconds delay_{0};
    std::atomic<std::size_t> calls_{0};
    std::atomic<std::size_t> in_flight_{0};
    std::atomic<std::size_t> peak_{0};
};

/**
 * Append-only JSON-lines response cache keyed by
 * (model, pattern, sha256(prompt)). Safe for concurrent use.
 */
class ResponseCache {
public:
    struct Entry {
        std::string response;
        int attempts = 1;
        std::int64_t latency_ms = 0;
    };

    /// Loads existing entries; the file is created on first store.
    explicit ResponseCache(std::string path);

    std::optional<Entry> lookup(const std::string& model, PromptPattern pattern, const std::string& prompt) const;
    void store(const std::string& model, PromptPattern pattern, const std::string& prompt, const Entry& entry);

    std::size_t size() const;

private:
    static std::string key(const std::string& model, PromptPattern pattern, const std::string& prompt_hash);

    std::string path_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, Entry> entries_;
};

struct BatchOptions {
    std::size_t parallelism = 4;
    ResponseCache* cache = nullptr;     // optional
    std::ostream* prediction_log = nullptr;  // optional; written in input order
    RegionLabelMap region_labels;
};

/**
 * One Prediction per record, in input order. Request failures and
 * unparseable responses become failure-valued predictions. Throws
 * LlmError(AuthFailure) on any auth failure, and LlmError(Unreachable)
 * when the first network request cannot reach the endpoint.
 */
std::vector<Prediction> batch_predict(const std::vector<OccurrenceRecord>& records, PromptPattern pattern,
                                      ChatBackend& backend, const BatchOptions& options);

}  // namespace georef
