#pragma once

#include "georef/geo.hpp"
#include "georef/http.hpp"

#include <chrono>
#include <cstddef>
#include <istream>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace georef {

class GazetteerError : public std::runtime_error {
public:
    enum class Kind { NerBackendUnavailable, GazetteerUnavailable, QuotaExceeded, BadFile };

    GazetteerError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// A place name found in a locality string; [begin, end) are byte offsets.
struct PlaceEntity {
    std::string text;
    std::size_t begin = 0;
    std::size_t end = 0;
};

class PlaceNameExtractor {
public:
    virtual ~PlaceNameExtractor() = default;

    /// Entities in order of appearance.
    virtual std::vector<PlaceEntity> extract(std::string_view locality) const = 0;
};

/**
 * Longest-match dictionary tagger. Matches are case-insensitive, must sit
 * on word boundaries and never overlap; at each position the longest
 * dictionary entry wins, so "New Plymouth" beats "Plymouth".
 */
class DictionaryMatcher : public PlaceNameExtractor {
public:
    explicit DictionaryMatcher(const std::vector<std::string>& names);

    std::vector<PlaceEntity> extract(std::string_view locality) const override;

private:
    // folded first word -> folded full names, longest first
    std::unordered_map<std::string, std::vector<std::string>> by_first_word_;
};

/**
 * Remote NER service. POSTs {"text": locality} to the URL and expects
 * {"entities": [{"start": s, "end": e}, ...]} with byte offsets.
 */
class RemoteNer : public PlaceNameExtractor {
public:
    RemoteNer(const std::string& url, std::chrono::milliseconds timeout);

    std::vector<PlaceEntity> extract(std::string_view locality) const override;

private:
    http::Endpoint endpoint_;
    std::string path_;
};

enum class GazetteerSource { GeoNamesWeb, NominatimWeb, LocalFile };

std::string_view to_string(GazetteerSource source) noexcept;

struct GazetteerCandidate {
    std::string name;
    GeoPoint point;
    GazetteerSource source;
    int rank = 0;  // provider order, 0 = best
};

class Gazetteer {
public:
    virtual ~Gazetteer() = default;

    /// Up to max_rows candidates in provider order; empty for unknown names.
    /// An empty state means no admin-region filter.
    virtual std::vector<GazetteerCandidate> lookup(std::string_view name, std::string_view state,
                                                   std::string_view country_code, int max_rows) = 0;

    virtual GazetteerSource source() const noexcept = 0;
};

/**
 * In-memory gazetteer read from CSV with header
 * name,lat,lon,country_code,admin1,feature_class. Lookups match the
 * case-folded name exactly, then country, then admin1 (case-insensitive)
 * when a state is given. Rank follows file order.
 */
class LocalGazetteer : public Gazetteer {
public:
    struct Entry {
        std::string name;
        GeoPoint point;
        std::string country_code;
        std::string admin1;
        std::string feature_class;
    };

    static LocalGazetteer from_csv(std::istream& in);
    static LocalGazetteer from_file(const std::string& path);

    std::vector<GazetteerCandidate> lookup(std::string_view name, std::string_view state,
                                           std::string_view country_code, int max_rows) override;
    GazetteerSource source() const noexcept override { return GazetteerSource::LocalFile; }

    /// Distinct names, for building a DictionaryMatcher.
    std::vector<std::string> names() const;
    std::size_t size() const noexcept { return entries_.size(); }

private:
    std::vector<Entry> entries_;
    std::unordered_map<std::string, std::vector<std::size_t>> index_;
};

/// GeoNames searchJSON. The account name is read from an environment variable.
class GeoNamesWeb : public Gazetteer {
public:
    GeoNamesWeb(const std::string& base_url, const std::string& username_env, std::chrono::milliseconds timeout,
                double requests_per_second = 0.0);

    std::vector<GazetteerCandidate> lookup(std::string_view name, std::string_view state,
                                           std::string_view country_code, int max_rows) override;
    GazetteerSource source() const noexcept override { return GazetteerSource::GeoNamesWeb; }

private:
    http::Endpoint endpoint_;
    std::string username_;
    http::RateLimiter limiter_;
};

/// Nominatim /search. Sends the mandatory User-Agent and keeps to 1 request/s.
class NominatimWeb : public Gazetteer {
public:
    NominatimWeb(const std::string& base_url, std::string user_agent, std::chrono::milliseconds timeout,
                 double requests_per_second = 1.0);

    std::vector<GazetteerCandidate> lookup(std::string_view name, std::string_view state,
                                           std::string_view country_code, int max_rows) override;
    GazetteerSource source() const noexcept override { return GazetteerSource::NominatimWeb; }

private:
    http::Endpoint endpoint_;
    std::string user_agent_;
    http::RateLimiter limiter_;
};

/**
 * Decorator that persists lookups as JSON lines keyed by
 * (source, name, country, state). Safe for concurrent use.
 */
class CachingGazetteer : public Gazetteer {
public:
    CachingGazetteer(Gazetteer& inner, std::string path);

    std::vector<GazetteerCandidate> lookup(std::string_view name, std::string_view state,
                                           std::string_view country_code, int max_rows) override;
    GazetteerSource source() const noexcept override { return inner_.source(); }

    std::size_t inner_calls() const;

private:
    std::string key(std::string_view name, std::string_view state, std::string_view country_code,
                    int max_rows) const;

    Gazetteer& inner_;
    std::string path_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, std::vector<GazetteerCandidate>> entries_;
    std::size_t inner_calls_ = 0;
};

}  // namespace georef
