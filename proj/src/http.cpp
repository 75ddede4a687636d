#include "georef/http.hpp"

#include <httplib.h>

#include <stdexcept>
#include <thread>

namespace georef::http {

namespace {

Result from_httplib(const httplib::Result& res) {
    Result out;
    if (res) {
        out.response = Response{res->status, res->body};
        return out;
    }
    const auto err = res.error();
    out.message = httplib::to_string(err);
    switch (err) {
        case httplib::Error::Read:
        case httplib::Error::Write:
        case httplib::Error::ConnectionTimeout:
            out.failure = Failure::Timeout;
            break;
        case httplib::Error::Connection:
        case httplib::Error::SSLConnection:
        case httplib::Error::ProxyConnection:
            out.failure = Failure::Unreachable;
            break;
        default:
            out.failure = Failure::Other;
    }
    return out;
}

httplib::Headers to_headers(const Headers& headers) {
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    return h;
}

}  // namespace

Endpoint::Endpoint(const std::string& base_url, std::chrono::milliseconds timeout) : timeout_(timeout) {
    auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) {
        throw std::invalid_argument("base URL needs a scheme: " + base_url);
    }
    auto path_start = base_url.find('/', scheme_end + 3);
    origin_ = base_url.substr(0, path_start);
    if (path_start != std::string::npos) {
        path_prefix_ = base_url.substr(path_start);
        while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    }
}

Result Endpoint::post_json(const std::string& path, const std::string& body, const Headers& headers) const {
    httplib::Client client(origin_);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);
    return from_httplib(client.Post(path_prefix_ + path, to_headers(headers), body, "application/json"));
}

Result Endpoint::get(const std::string& path, const Params& params, const Headers& headers) const {
    httplib::Client client(origin_);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    httplib::Params p;
    for (const auto& [k, v] : params) p.emplace(k, v);
    return from_httplib(client.Get(path_prefix_ + path, p, to_headers(headers)));
}

RateLimiter::RateLimiter(double requests_per_second) {
    if (requests_per_second > 0.0) {
        interval_ = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
            std::chrono::duration<double>(1.0 / requests_per_second));
    }
}

void RateLimiter::acquire() {
    if (interval_ == std::chrono::steady_clock::duration::zero()) return;
    std::chrono::steady_clock::time_point slot;
    {
        std::lock_guard lock(mutex_);
        auto now = std::chrono::steady_clock::now();
        slot = std::max(now, next_);
        next_ = slot + interval_;
    }
    std::this_thread::sleep_until(slot);
}

}  // namespace georef::http
