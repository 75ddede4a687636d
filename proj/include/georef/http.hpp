#pragma once

#include <chrono>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace georef::http {

using Headers = std::vector<std::pair<std::string, std::string>>;
using Params = std::vector<std::pair<std::string, std::string>>;

struct Response {
    int status = 0;
    std::string body;
};

enum class Failure { None, Timeout, Unreachable, Other };

/// Transport outcome: a response of any HTTP status, or a transport failure.
struct Result {
    std::optional<Response> response;
    Failure failure = Failure::None;
    std::string message;
};

/**
 * One HTTP(S) service rooted at a base URL, e.g.
 * "https://api.example.com/prefix". Each request opens its own
 * connection, so an Endpoint may be shared across threads.
 */
class Endpoint {
public:
    Endpoint(const std::string& base_url, std::chrono::milliseconds timeout);

    Result post_json(const std::string& path, const std::string& body, const Headers& headers = {}) const;
    Result get(const std::string& path, const Params& params, const Headers& headers = {}) const;

    const std::string& origin() const noexcept { return origin_; }

private:
    std::string origin_;       // scheme://host[:port]
    std::string path_prefix_;  // without trailing slash
    std::chrono::milliseconds timeout_;
};

/// Spaces request starts at least 1/rate seconds apart. rate <= 0 disables it.
class RateLimiter {
public:
    explicit RateLimiter(double requests_per_second);

    void acquire();

private:
    std::mutex mutex_;
    std::chrono::steady_clock::duration interval_{};
    std::chrono::steady_clock::time_point next_{};
};

}  // namespace georef::http
