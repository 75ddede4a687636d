#include "georef/gazetteer.hpp"

#include "georef/text.hpp"
#include "table_reader.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

namespace georef {

using Json = nlohmann::json;

std::string_view to_string(GazetteerSource source) noexcept {
    switch (source) {
        case GazetteerSource::GeoNamesWeb: return "geonames";
        case GazetteerSource::NominatimWeb: return "nominatim";
        case GazetteerSource::LocalFile: return "local";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Place-name extraction

namespace {

std::string first_word(std::string_view folded) {
    std::size_t end = 0;
    while (end < folded.size() && text::is_word_byte(static_cast<unsigned char>(folded[end]))) ++end;
    return std::string(folded.substr(0, end));
}

bool boundary_before(std::string_view s, std::size_t pos) {
    return pos == 0 || !text::is_word_byte(static_cast<unsigned char>(s[pos - 1]));
}

bool boundary_after(std::string_view s, std::size_t pos) {
    return pos >= s.size() || !text::is_word_byte(static_cast<unsigned char>(s[pos]));
}

}  // namespace

DictionaryMatcher::DictionaryMatcher(const std::vector<std::string>& names) {
    std::set<std::string> seen;
    for (const auto& n : names) {
        auto folded = text::case_fold(text::collapse_whitespace(n));
        if (folded.empty() || !seen.insert(folded).second) continue;
        auto head = first_word(folded);
        if (head.empty()) continue;
        by_first_word_[head].push_back(std::move(folded));
    }
    for (auto& [_, list] : by_first_word_) {
        std::stable_sort(list.begin(), list.end(),
                         [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
    }
}

std::vector<PlaceEntity> DictionaryMatcher::extract(std::string_view locality) const {
    std::vector<PlaceEntity> out;
    const std::string folded = text::case_fold(locality);
    std::size_t pos = 0;
    while (pos < folded.size()) {
        const auto c = static_cast<unsigned char>(folded[pos]);
        if (!text::is_word_byte(c) || !boundary_before(folded, pos)) {
            ++pos;
            continue;
        }
        const auto head = first_word(std::string_view(folded).substr(pos));
        std::size_t matched = 0;
        if (auto it = by_first_word_.find(head); it != by_first_word_.end()) {
            for (const auto& name : it->second) {
                if (folded.compare(pos, name.size(), name) == 0 && boundary_after(folded, pos + name.size())) {
                    matched = name.size();
                    break;
                }
            }
        }
        if (matched > 0) {
            out.push_back({std::string(locality.substr(pos, matched)), pos, pos + matched});
            pos += matched;
        } else {
            pos += std::max<std::size_t>(head.size(), 1);
        }
    }
    return out;
}

namespace {

std::pair<std::string, std::string> split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw std::invalid_argument("URL needs a scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

RemoteNer::RemoteNer(const std::string& url, std::chrono::milliseconds timeout)
    : endpoint_(split_url(url).first, timeout), path_(split_url(url).second) {}

std::vector<PlaceEntity> RemoteNer::extract(std::string_view locality) const {
    using Kind = GazetteerError::Kind;
    const auto result = endpoint_.post_json(path_, Json{{"text", std::string(locality)}}.dump());
    if (!result.response) throw GazetteerError(Kind::NerBackendUnavailable, "NER endpoint: " + result.message);
    if (result.response->status != 200) {
        throw GazetteerError(Kind::NerBackendUnavailable,
                             "NER endpoint returned HTTP " + std::to_string(result.response->status));
    }
    auto j = Json::parse(result.response->body, nullptr, false);
    if (j.is_discarded() || !j.contains("entities") || !j["entities"].is_array()) {
        throw GazetteerError(Kind::NerBackendUnavailable, "NER endpoint returned an unexpected body");
    }
    std::vector<PlaceEntity> out;
    for (const auto& e : j["entities"]) {
        if (!e.contains("start") || !e.contains("end")) {
            throw GazetteerError(Kind::NerBackendUnavailable, "NER entity without start/end");
        }
        const auto begin = e["start"].get<std::size_t>();
        const auto end = e["end"].get<std::size_t>();
        if (begin >= end || end > locality.size()) {
            throw GazetteerError(Kind::NerBackendUnavailable, "NER entity span out of bounds");
        }
        out.push_back({std::string(locality.substr(begin, end - begin)), begin, end});
    }
    std::sort(out.begin(), out.end(), [](const PlaceEntity& a, const PlaceEntity& b) { return a.begin < b.begin; });
    return out;
}

// ---------------------------------------------------------------------------
// Local gazetteer

namespace {

double parse_coord(const std::string& s, std::size_t line) {
    auto t = text::trim(s);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
        throw GazetteerError(GazetteerError::Kind::BadFile,
                             "gazetteer line " + std::to_string(line) + ": bad number '" + s + "'");
    }
    return v;
}

std::string upper_ascii(std::string_view s) {
    std::string out(s);
    for (auto& c : out) {
        if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    }
    return out;
}

}  // namespace

LocalGazetteer LocalGazetteer::from_csv(std::istream& in) {
    using Kind = GazetteerError::Kind;
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (data.rfind("\xEF\xBB\xBF", 0) == 0) data.erase(0, 3);
    detail::TableReader reader(std::move(data), ',');

    auto header = reader.next();
    const std::vector<std::string> expected{"name", "lat", "lon", "country_code", "admin1", "feature_class"};
    if (!header) throw GazetteerError(Kind::BadFile, "gazetteer file is empty");
    std::vector<std::string> got;
    for (const auto& f : header->fields) got.emplace_back(text::trim(f));
    if (got != expected) {
        throw GazetteerError(Kind::BadFile, "gazetteer header must be name,lat,lon,country_code,admin1,feature_class");
    }

    LocalGazetteer g;
    while (auto row = reader.next()) {
        if (row->fields.size() != expected.size()) {
            throw GazetteerError(Kind::BadFile, "gazetteer line " + std::to_string(row->line) + ": expected 6 fields");
        }
        const auto& f = row->fields;
        const double lat = parse_coord(f[1], row->line);
        const double lon = parse_coord(f[2], row->line);
        GeoPoint p = [&] {
            try {
                return validate_point(lat, lon);
            } catch (const GeoError& e) {
                throw GazetteerError(Kind::BadFile, "gazetteer line " + std::to_string(row->line) + ": " + e.what());
            }
        }();
        std::string name = text::collapse_whitespace(f[0]);
        if (name.empty()) {
            throw GazetteerError(Kind::BadFile, "gazetteer line " + std::to_string(row->line) + ": empty name");
        }
        g.index_[text::case_fold(name)].push_back(g.entries_.size());
        g.entries_.push_back(Entry{std::move(name), p, upper_ascii(text::trim(f[3])),
                                   std::string(text::trim(f[4])), std::string(text::trim(f[5]))});
    }
    return g;
}

LocalGazetteer LocalGazetteer::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw GazetteerError(GazetteerError::Kind::GazetteerUnavailable, "cannot open gazetteer " + path);
    return from_csv(in);
}

std::vector<GazetteerCandidate> LocalGazetteer::lookup(std::string_view name, std::string_view state,
                                                       std::string_view country_code, int max_rows) {
    std::vector<GazetteerCandidate> out;
    auto it = index_.find(text::case_fold(text::collapse_whitespace(name)));
    if (it == index_.end()) return out;
    const auto cc = upper_ascii(text::trim(country_code));
    const auto st = text::case_fold(text::trim(state));
    for (std::size_t idx : it->second) {
        if (static_cast<int>(out.size()) >= max_rows) break;
        const auto& e = entries_[idx];
        if (!cc.empty() && e.country_code != cc) continue;
        if (!st.empty() && text::case_fold(e.admin1) != st) continue;
        out.push_back({e.name, e.point, GazetteerSource::LocalFile, static_cast<int>(out.size())});
    }
    return out;
}

std::vector<std::string> LocalGazetteer::names() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.name);
    return out;
}

// ---------------------------------------------------------------------------
// Web gazetteers

namespace {

double json_number(const Json& v) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        double d = 0.0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), d);
        if (ec == std::errc() && ptr == s.data() + s.size()) return d;
    }
    throw std::invalid_argument("not a coordinate");
}

void check_transport(const http::Result& r, const char* who) {
    using Kind = GazetteerError::Kind;
    if (!r.response) throw GazetteerError(Kind::GazetteerUnavailable, std::string(who) + ": " + r.message);
    const int status = r.response->status;
    if (status == 429) throw GazetteerError(Kind::QuotaExceeded, std::string(who) + ": HTTP 429");
    if (status != 200) {
        throw GazetteerError(Kind::GazetteerUnavailable, std::string(who) + ": HTTP " + std::to_string(status));
    }
}

Json parse_body(const http::Result& r, const char* who) {
    auto j = Json::parse(r.response->body, nullptr, false);
    if (j.is_discarded()) {
        throw GazetteerError(GazetteerError::Kind::GazetteerUnavailable, std::string(who) + ": body is not JSON");
    }
    return j;
}

}  // namespace

GeoNamesWeb::GeoNamesWeb(const std::string& base_url, const std::string& username_env,
                         std::chrono::milliseconds timeout, double requests_per_second)
    : endpoint_(base_url, timeout), limiter_(requests_per_second) {
    if (const char* u = std::getenv(username_env.c_str()); u && *u) username_ = u;
    if (username_.empty()) {
        throw GazetteerError(GazetteerError::Kind::GazetteerUnavailable,
                             "GeoNames account: environment variable " + username_env + " is not set");
    }
}

std::vector<GazetteerCandidate> GeoNamesWeb::lookup(std::string_view name, std::string_view state,
                                                    std::string_view country_code, int max_rows) {
    http::Params params{{"q", std::string(name)}, {"maxRows", std::to_string(max_rows)}, {"username", username_}};
    if (!country_code.empty()) params.emplace_back("country", std::string(country_code));
    if (!state.empty()) params.emplace_back("adminName1", std::string(state));
    limiter_.acquire();
    const auto r = endpoint_.get("/searchJSON", params);
    check_transport(r, "GeoNames");
    const auto j = parse_body(r, "GeoNames");
    if (j.contains("status")) {
        // GeoNames reports errors in-band; 18/19/20 are the daily/hourly/weekly credit limits.
        const int code = j["status"].value("value", 0);
        const auto msg = j["status"].value("message", std::string("error"));
        if (code == 18 || code == 19 || code == 20) {
            throw GazetteerError(GazetteerError::Kind::QuotaExceeded, "GeoNames: " + msg);
        }
        throw GazetteerError(GazetteerError::Kind::GazetteerUnavailable, "GeoNames: " + msg);
    }
    std::vector<GazetteerCandidate> out;
    if (!j.contains("geonames") || !j["geonames"].is_array()) return out;
    for (const auto& g : j["geonames"]) {
        if (static_cast<int>(out.size()) >= max_rows) break;
        try {
            auto p = validate_point(json_number(g.at("lat")), json_number(g.at("lng")));
            out.push_back({g.value("name", std::string(name)), p, GazetteerSource::GeoNamesWeb,
                           static_cast<int>(out.size())});
        } catch (const std::exception&) {
            continue;  // skip rows without usable coordinates
        }
    }
    return out;
}

NominatimWeb::NominatimWeb(const std::string& base_url, std::string user_agent, std::chrono::milliseconds timeout,
                           double requests_per_second)
    : endpoint_(base_url, timeout),
      user_agent_(std::move(user_agent)),
      limiter_(std::min(requests_per_second > 0.0 ? requests_per_second : 1.0, 1.0)) {
    if (user_agent_.empty()) {
        throw GazetteerError(GazetteerError::Kind::GazetteerUnavailable, "Nominatim requires a User-Agent");
    }
}

std::vector<GazetteerCandidate> NominatimWeb::lookup(std::string_view name, std::string_view /*state*/,
                                                     std::string_view country_code, int max_rows) {
    http::Params params{{"q", std::string(name)}, {"format", "jsonv2"}, {"limit", std::to_string(max_rows)}};
    if (!country_code.empty()) {
        std::string cc(country_code);
        for (auto& c : cc) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        params.emplace_back("countrycodes", cc);
    }
    limiter_.acquire();
    const auto r = endpoint_.get("/search", params, {{"User-Agent", user_agent_}});
    check_transport(r, "Nominatim");
    const auto j = parse_body(r, "Nominatim");
    std::vector<GazetteerCandidate> out;
    if (!j.is_array()) return out;
    for (const auto& item : j) {
        if (static_cast<int>(out.size()) >= max_rows) break;
        try {
            auto p = validate_point(json_number(item.at("lat")), json_number(item.at("lon")));
            out.push_back({item.value("name", std::string(name)), p, GazetteerSource::NominatimWeb,
                           static_cast<int>(out.size())});
        } catch (const std::exception&) {
            continue;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Lookup cache

CachingGazetteer::CachingGazetteer(Gazetteer& inner, std::string path) : inner_(inner), path_(std::move(path)) {
    std::ifstream in(path_, std::ios::binary);
    if (!in) return;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        auto j = Json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("key") || !j.contains("candidates")) {
            throw GazetteerError(GazetteerError::Kind::BadFile,
                                 "gazetteer cache " + path_ + " line " + std::to_string(line_no) + " is malformed");
        }
        std::vector<GazetteerCandidate> cands;
        for (const auto& c : j["candidates"]) {
            cands.push_back({c.at("name").get<std::string>(),
                             validate_point(c.at("lat").get<double>(), c.at("lon").get<double>()), inner_.source(),
                             c.at("rank").get<int>()});
        }
        entries_[j["key"].get<std::string>()] = std::move(cands);
    }
}

std::string CachingGazetteer::key(std::string_view name, std::string_view state, std::string_view country_code,
                                  int max_rows) const {
    std::ostringstream k;
    k << to_string(inner_.source()) << '\t' << text::case_fold(name) << '\t' << country_code << '\t'
      << text::case_fold(state) << '\t' << max_rows;
    return k.str();
}

std::vector<GazetteerCandidate> CachingGazetteer::lookup(std::string_view name, std::string_view state,
                                                         std::string_view country_code, int max_rows) {
    const auto k = key(name, state, country_code, max_rows);
    {
        std::lock_guard lock(mutex_);
        if (auto it = entries_.find(k); it != entries_.end()) return it->second;
    }
    auto cands = inner_.lookup(name, state, country_code, max_rows);

    Json j;
    j["key"] = k;
    j["candidates"] = Json::array();
    for (const auto& c : cands) {
        j["candidates"].push_back({{"name", c.name}, {"lat", c.point.lat()}, {"lon", c.point.lon()}, {"rank", c.rank}});
    }
    std::lock_guard lock(mutex_);
    ++inner_calls_;
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw GazetteerError(GazetteerError::Kind::BadFile, "cannot append to gazetteer cache " + path_);
    out << j.dump(-1, ' ', false, Json::error_handler_t::replace) << '\n';
    entries_[k] = cands;
    return cands;
}

std::size_t CachingGazetteer::inner_calls() const {
    std::lock_guard lock(mutex_);
    return inner_calls_;
}

}  // namespace georef
