#include "georef/prompt.hpp"

#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

namespace georef {

std::string_view to_string(ParseFailure failure) noexcept {
    switch (failure) {
        case ParseFailure::None: return "ok";
        case ParseFailure::NoCoordinates: return "no_coordinates";
        case ParseFailure::OutOfRange: return "out_of_range";
        case ParseFailure::Ambiguous: return "ambiguous";
    }
    return "unknown";
}

namespace {

enum class Tok { Number, CoordLabel, LatLabel, LonLabel, Comma, LParen, RParen, Other };

struct Token {
    Tok kind;
    double value = 0.0;  // signed as written
    bool has_decimal = false;
    bool dms = false;
    char hemisphere = '\0';
};

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

bool starts_with(std::string_view s, std::size_t i, std::string_view prefix) {
    return s.substr(i, prefix.size()) == prefix;
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
    }
    return out;
}

class Scanner {
public:
    explicit Scanner(std::string_view s) : s_(s) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (i_ < s_.size()) {
            char c = s_[i_];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                ++i_;
            } else if (number_starts_here()) {
                out.push_back(number());
            } else if (is_alpha(c)) {
                out.push_back(word());
            } else if (c == ',') {
                out.push_back({Tok::Comma});
                ++i_;
            } else if (c == '(' || c == '[') {
                out.push_back({Tok::LParen});
                ++i_;
            } else if (c == ')' || c == ']') {
                out.push_back({Tok::RParen});
                ++i_;
            } else if (c == ':' || c == '=') {
                ++i_;
            } else {
                out.push_back({Tok::Other});
                skip_code_point();
            }
        }
        return out;
    }

private:
    bool number_starts_here() const {
        std::size_t j = i_;
        if (s_[j] == '-' || s_[j] == '+') {
            ++j;
        } else if (starts_with(s_, j, "\xE2\x88\x92")) {  // U+2212 minus sign
            j += 3;
        }
        if (j >= s_.size() || !is_digit(s_[j])) return false;
        // "km2", "A1": digits glued to a word are not coordinates
        if (i_ > 0 && (is_alpha(s_[i_ - 1]) || is_digit(s_[i_ - 1]) || s_[i_ - 1] == '.')) return false;
        return true;
    }

    Token number() {
        Token t{Tok::Number};
        bool negative = false;
        if (s_[i_] == '-') {
            negative = true;
            ++i_;
        } else if (s_[i_] == '+') {
            ++i_;
        } else if (starts_with(s_, i_, "\xE2\x88\x92")) {
            negative = true;
            i_ += 3;
        }
        std::size_t start = i_;
        while (i_ < s_.size() && is_digit(s_[i_])) ++i_;
        if (i_ + 1 < s_.size() && s_[i_] == '.' && is_digit(s_[i_ + 1])) {
            t.has_decimal = true;
            ++i_;
            while (i_ < s_.size() && is_digit(s_[i_])) ++i_;
        }
        std::string digits(s_.substr(start, i_ - start));
        t.value = std::strtod(digits.c_str(), nullptr);
        if (negative) t.value = -t.value;

        std::size_t save = i_;
        skip_spaces();
        bool degree = skip_degree_mark();
        if (!degree) i_ = save;
        if (looks_like_minutes(degree)) {
            t.dms = true;
        }
        save = i_;
        skip_spaces();
        if (i_ < s_.size() && (s_[i_] == 'N' || s_[i_] == 'S' || s_[i_] == 'E' || s_[i_] == 'W') &&
            (i_ + 1 >= s_.size() || !is_alpha(s_[i_ + 1]))) {
            t.hemisphere = s_[i_];
            ++i_;
        } else {
            i_ = save;
        }
        return t;
    }

    bool skip_degree_mark() {
        for (std::string_view mark : {"\xC2\xB0", "\xC2\xBA", "\xCB\x9A"}) {
            if (starts_with(s_, i_, mark)) {
                i_ += mark.size();
                return true;
            }
        }
        for (std::string_view word : {"degrees", "degree", "deg"}) {
            if (lower(s_.substr(i_, word.size())) == word &&
                (i_ + word.size() >= s_.size() || !is_alpha(s_[i_ + word.size()]))) {
                i_ += word.size();
                return true;
            }
        }
        return false;
    }

    bool minute_mark_at(std::size_t j) const {
        return j < s_.size() && (s_[j] == '\'' || starts_with(s_, j, "\xE2\x80\xB2"));
    }

    // Consumes "<min>'<sec>\"" after a degree value. A bare apostrophe right
    // after the number (41') also marks minutes.
    bool looks_like_minutes(bool after_degree) {
        if (!after_degree) return minute_mark_at(i_) && (i_ + 1 >= s_.size() || s_[i_ + 1] != 's');
        std::size_t j = i_;
        while (j < s_.size() && s_[j] == ' ') ++j;
        std::size_t digits_start = j;
        while (j < s_.size() && (is_digit(s_[j]) || s_[j] == '.')) ++j;
        if (j == digits_start || !minute_mark_at(j)) return false;
        j += s_[j] == '\'' ? 1 : 3;
        while (j < s_.size() && s_[j] == ' ') ++j;
        std::size_t sec_start = j;
        while (j < s_.size() && (is_digit(s_[j]) || s_[j] == '.')) ++j;
        if (j > sec_start) {
            if (j < s_.size() && s_[j] == '"') {
                ++j;
            } else if (starts_with(s_, j, "\xE2\x80\xB3")) {
                j += 3;
            } else if (j + 1 < s_.size() && s_[j] == '\'' && s_[j + 1] == '\'') {
                j += 2;
            }
        }
        i_ = j;
        return true;
    }

    Token word() {
        std::size_t start = i_;
        while (i_ < s_.size() && is_alpha(s_[i_])) ++i_;
        auto w = lower(s_.substr(start, i_ - start));
        if (w == "coordinates" || w == "coordinate" || w == "coords" || w == "coord") return {Tok::CoordLabel};
        if (w == "latitude" || w == "lat") return {Tok::LatLabel};
        if (w == "longitude" || w == "long" || w == "lon" || w == "lng") return {Tok::LonLabel};
        return {Tok::Other};
    }

    void skip_spaces() {
        while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t')) ++i_;
    }

    void skip_code_point() {
        auto c = static_cast<unsigned char>(s_[i_]);
        std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 1;
        i_ += len;
    }

    std::string_view s_;
    std::size_t i_ = 0;
};

struct RawPair {
    Token first;
    Token second;
};

enum class Resolve { Ok, Ambiguous };

struct Resolved {
    Resolve status;
    double lat = 0.0;
    double lon = 0.0;
};

bool is_ns(char h) { return h == 'N' || h == 'S'; }
bool is_ew(char h) { return h == 'E' || h == 'W'; }

// Applies hemisphere letters. The pair is (lat, lon) unless the letters say otherwise.
Resolved resolve(const Token& a, const Token& b) {
    Token lat = a;
    Token lon = b;
    if (is_ew(a.hemisphere) || is_ns(b.hemisphere)) {
        if (is_ns(a.hemisphere) || is_ew(b.hemisphere)) return {Resolve::Ambiguous};
        std::swap(lat, lon);
    }
    auto apply = [](const Token& t, double& out) {
        if (t.hemisphere == '\0') {
            out = t.value;
            return true;
        }
        if (t.value < 0.0) return false;  // "-41 S" is contradictory
        out = (t.hemisphere == 'S' || t.hemisphere == 'W') ? -t.value : t.value;
        return true;
    };
    Resolved r{Resolve::Ok};
    if (!apply(lat, r.lat) || !apply(lon, r.lon)) return {Resolve::Ambiguous};
    return r;
}

bool usable(const Token& t) { return t.kind == Tok::Number && !t.dms; }

ParsedCoordinates finish(std::string_view raw, const Resolved& r) {
    ParsedCoordinates out;
    out.raw = std::string(raw);
    if (r.status == Resolve::Ambiguous) {
        out.failure = ParseFailure::Ambiguous;
        return out;
    }
    try {
        out.point = validate_point(r.lat, r.lon);
        out.failure = ParseFailure::None;
    } catch (const GeoError&) {
        out.failure = ParseFailure::OutOfRange;
    }
    return out;
}

ParsedCoordinates failure(std::string_view raw, ParseFailure f) {
    ParsedCoordinates out;
    out.raw = std::string(raw);
    out.failure = f;
    return out;
}

std::vector<RawPair> labelled_coordinate_pairs(const std::vector<Token>& t) {
    std::vector<RawPair> pairs;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i].kind != Tok::CoordLabel) continue;
        std::size_t j = i + 1;
        if (j < t.size() && t[j].kind == Tok::LParen) ++j;
        if (j + 2 < t.size() && usable(t[j]) && t[j + 1].kind == Tok::Comma && usable(t[j + 2])) {
            pairs.push_back({t[j], t[j + 2]});
        }
    }
    return pairs;
}

struct LabelledValues {
    std::vector<RawPair> pairs;  // always (lat, lon)
    bool unpaired = false;
};

LabelledValues lat_lon_label_pairs(const std::vector<Token>& t) {
    LabelledValues out;
    struct Entry {
        bool is_lat;
        Token value;
    };
    std::vector<Entry> entries;
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        if ((t[i].kind == Tok::LatLabel || t[i].kind == Tok::LonLabel) && usable(t[i + 1])) {
            entries.push_back({t[i].kind == Tok::LatLabel, t[i + 1]});
        }
    }
    std::optional<Entry> pending;
    for (const auto& e : entries) {
        if (pending && pending->is_lat != e.is_lat) {
            const Entry& lat = pending->is_lat ? *pending : e;
            const Entry& lon = pending->is_lat ? e : *pending;
            out.pairs.push_back({lat.value, lon.value});
            pending.reset();
        } else {
            if (pending) out.unpaired = true;
            pending = e;
        }
    }
    if (pending) out.unpaired = true;
    return out;
}

std::vector<RawPair> bare_pairs(const std::vector<Token>& t) {
    std::vector<RawPair> pairs;
    auto decimal = [](const Token& x) { return usable(x) && x.has_decimal; };
    for (std::size_t i = 0; i < t.size();) {
        if (i + 2 < t.size() && decimal(t[i]) && t[i + 1].kind == Tok::Comma && decimal(t[i + 2])) {
            pairs.push_back({t[i], t[i + 2]});
            i += 3;
        } else if (i + 3 < t.size() && t[i].kind == Tok::LParen && decimal(t[i + 1]) && decimal(t[i + 2]) &&
                   t[i + 3].kind == Tok::RParen) {
            pairs.push_back({t[i + 1], t[i + 2]});
            i += 4;
        } else {
            ++i;
        }
    }
    return pairs;
}

}  // namespace

ParsedCoordinates parse_coordinates(std::string_view response) {
    const auto tokens = Scanner(response).run();

    if (auto pairs = labelled_coordinate_pairs(tokens); !pairs.empty()) {
        return finish(response, resolve(pairs.back().first, pairs.back().second));
    }

    auto labelled = lat_lon_label_pairs(tokens);
    if (!labelled.pairs.empty()) {
        const auto& p = labelled.pairs.back();
        // a hemisphere letter on the wrong axis contradicts the label
        if (is_ew(p.first.hemisphere) || is_ns(p.second.hemisphere)) {
            return failure(response, ParseFailure::Ambiguous);
        }
        return finish(response, resolve(p.first, p.second));
    }

    auto bare = bare_pairs(tokens);
    std::optional<Resolved> fallback;
    bool saw_ambiguous = false;
    for (auto it = bare.rbegin(); it != bare.rend(); ++it) {
        auto r = resolve(it->first, it->second);
        if (r.status == Resolve::Ambiguous) {
            saw_ambiguous = true;
            continue;
        }
        if (std::abs(r.lat) <= 90.0 && std::abs(r.lon) <= 180.0) return finish(response, r);
        if (!fallback) fallback = r;
    }
    if (fallback) return finish(response, *fallback);
    if (saw_ambiguous || labelled.unpaired) return failure(response, ParseFailure::Ambiguous);
    return failure(response, ParseFailure::NoCoordinates);
}

}  // namespace georef
