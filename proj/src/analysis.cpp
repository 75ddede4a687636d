#include "georef/analysis.hpp"

#include "georef/assets.hpp"
#include "georef/text.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace georef {

// ---------------------------------------------------------------------------
// Lexicon

namespace {

std::string normalize_term(std::string_view s) { return text::case_fold(text::collapse_whitespace(s)); }

void sort_longest_first(std::vector<std::string>& v) {
    std::stable_sort(v.begin(), v.end(), [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
}

}  // namespace

IndicatorLexicon IndicatorLexicon::parse(std::istream& in) {
    IndicatorLexicon lex;
    std::map<std::string, std::pair<std::vector<std::string>*, std::vector<std::string>*>> sections{
        {"distance_units", {&lex.distance_units, nullptr}},
        {"proximity", {&lex.proximity, nullptr}},
        {"directional", {&lex.directional, &lex.directional_patterns}},
        {"topological", {&lex.topological, &lex.topological_patterns}},
    };
    std::map<std::string, std::string> owner;  // normalised term -> section
    std::pair<std::vector<std::string>*, std::vector<std::string>*> current{nullptr, nullptr};
    std::string section;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto t = text::trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto where = " (line " + std::to_string(line_no) + ")";
        if (t.front() == '[') {
            if (t.back() != ']') throw LexiconError("malformed section header" + where);
            section = std::string(t.substr(1, t.size() - 2));
            auto it = sections.find(section);
            if (it == sections.end()) throw LexiconError("unknown lexicon section [" + section + "]" + where);
            current = it->second;
            continue;
        }
        if (!current.first) throw LexiconError("term outside a section" + where);
        if (t.rfind("re:", 0) == 0) {
            if (!current.second) throw LexiconError("patterns are not allowed in [" + section + "]" + where);
            std::string pattern(t.substr(3));
            try {
                std::regex check(pattern, std::regex::ECMAScript);
            } catch (const std::regex_error& e) {
                throw LexiconError("bad pattern '" + pattern + "'" + where + ": " + e.what());
            }
            const auto key = "re:" + pattern;
            if (auto [it, fresh] = owner.emplace(key, section); !fresh && it->second != section) {
                throw LexiconError("'" + key + "' appears in both [" + it->second + "] and [" + section + "]");
            }
            current.second->push_back(std::move(pattern));
            continue;
        }
        auto term = normalize_term(t);
        auto [it, fresh] = owner.emplace(term, section);
        if (!fresh) {
            if (it->second != section) {
                throw LexiconError("'" + term + "' appears in both [" + it->second + "] and [" + section + "]");
            }
            continue;
        }
        current.first->push_back(std::move(term));
    }
    for (auto* v : {&lex.distance_units, &lex.proximity, &lex.directional, &lex.topological}) sort_longest_first(*v);
    if (lex.distance_units.empty()) throw LexiconError("lexicon has no distance units");
    return lex;
}

IndicatorLexicon IndicatorLexicon::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LexiconError("cannot open lexicon " + path);
    return parse(in);
}

const IndicatorLexicon& IndicatorLexicon::builtin() {
    static const IndicatorLexicon lex = [] {
        auto data = embedded_asset("lexicon/spatial_indicators.txt");
        if (!data) throw LexiconError("built-in lexicon is missing");
        std::istringstream in{std::string(*data)};
        return parse(in);
    }();
    return lex;
}

// ---------------------------------------------------------------------------
// Matching helpers

namespace {

std::string regex_escape(std::string_view s) {
    static const std::string special = R"(\^$.|?*+()[]{}/-)";
    std::string out;
    for (char c : s) {
        if (special.find(c) != std::string::npos) out += '\\';
        if (c == ' ') {
            out += "\\s+";
            continue;
        }
        out += c;
    }
    return out;
}

std::string alternation(std::vector<std::string> terms) {
    sort_longest_first(terms);
    std::string out = "(?:";
    for (std::size_t i = 0; i < terms.size(); ++i) out += (i ? "|" : "") + regex_escape(terms[i]);
    return out + ")";
}

bool word_at(std::string_view s, std::size_t pos) {
    return pos < s.size() && text::is_word_byte(static_cast<unsigned char>(s[pos]));
}

bool boundary_ok(std::string_view s, std::size_t begin, std::size_t end) {
    return (begin == 0 || !word_at(s, begin - 1)) && !word_at(s, end);
}

/// Whether the text before `pos` ends with an elevation or depth label.
bool after_elevation_label(std::string_view folded, std::size_t pos) {
    auto before = text::trim(folded.substr(0, pos));
    while (!before.empty() && (before.back() == ':' || before.back() == '.' || before.back() == ' ')) {
        before.remove_suffix(1);
    }
    for (std::string_view label : {"alt", "elev", "elevation", "altitude", "altitud", "depth", "profundidad"}) {
        if (before.size() >= label.size() && before.substr(before.size() - label.size()) == label &&
            (before.size() == label.size() || !word_at(before, before.size() - label.size() - 1))) {
            return true;
        }
    }
    return false;
}

struct Candidate {
    std::size_t begin;
    std::size_t end;
    int category;
};

void find_literals(std::string_view folded, const std::vector<std::string>& terms, int category,
                   std::vector<Candidate>& out) {
    for (const auto& term : terms) {
        std::size_t pos = 0;
        while ((pos = folded.find(term, pos)) != std::string_view::npos) {
            if (boundary_ok(folded, pos, pos + term.size())) out.push_back({pos, pos + term.size(), category});
            ++pos;
        }
    }
}

void find_patterns(const std::string& folded, const std::vector<std::string>& patterns, int category,
                   std::vector<Candidate>& out) {
    for (const auto& p : patterns) {
        const std::regex re(p, std::regex::ECMAScript);
        for (auto it = std::sregex_iterator(folded.begin(), folded.end(), re); it != std::sregex_iterator(); ++it) {
            const auto b = static_cast<std::size_t>(it->position(0));
            const auto e = b + static_cast<std::size_t>(it->length(0));
            if (e > b && boundary_ok(folded, b, e)) out.push_back({b, e, category});
        }
    }
}

bool overlaps(const Candidate& c, const std::vector<std::pair<std::size_t, std::size_t>>& taken) {
    return std::any_of(taken.begin(), taken.end(), [&](const auto& t) { return c.begin < t.second && t.first < c.end; });
}

}  // namespace

DistanceMatcher::DistanceMatcher(const IndicatorLexicon& lexicon) {
    auto directions = lexicon.directional;
    for (const char* abbr : {"n", "s", "e", "w", "ne", "nw", "se", "sw", "nne", "ene", "ese", "sse", "ssw", "wsw",
                             "wnw", "nnw"}) {
        directions.emplace_back(abbr);
    }
    const std::string number = R"(\d+(?:[.,]\d+)?(?:/\d+)?)";
    const std::string qualifier =
        R"((?:(?:c\.|ca\.?|circa|about|approx\.?|approximately|aprox\.?|aproximadamente|around|some|~)\s*)*)";
    const std::string quantity = qualifier + number + R"((?:\s*(?:-|–|to|a|y|and)\s*)" + number + R"()?\s*)" +
                                 alternation(lexicon.distance_units) + R"(\b\.?)";
    const std::string direction =
        R"(\s*)" + alternation(directions) + R"(\b\.?(?:\s+(?:of|de|del)\b)?)";
    pattern_ = std::regex("(" + quantity + ")(" + direction + ")?", std::regex::ECMAScript);
}

std::vector<DistanceMatcher::Match> DistanceMatcher::find(std::string_view locality) const {
    const std::string folded = text::case_fold(locality);
    std::vector<Match> out;
    std::size_t pos = 0;
    while (pos < folded.size()) {
        std::smatch m;
        const auto flags = pos == 0 ? std::regex_constants::match_default : std::regex_constants::match_prev_avail;
        if (!std::regex_search(folded.cbegin() + static_cast<std::ptrdiff_t>(pos), folded.cend(), m, pattern_, flags)) {
            break;
        }
        const auto begin = pos + static_cast<std::size_t>(m.position(0));
        const auto qty_end = begin + static_cast<std::size_t>(m.length(1));
        const auto end = begin + static_cast<std::size_t>(m.length(0));
        if ((begin > 0 && (word_at(folded, begin - 1) || folded[begin - 1] == '.')) ||
            after_elevation_label(folded, begin)) {
            pos = begin + 1;
            continue;
        }
        Match match;
        match.whole = {begin, end, std::string(locality.substr(begin, end - begin))};
        match.quantity = {begin, qty_end, std::string(locality.substr(begin, qty_end - begin))};
        out.push_back(std::move(match));
        pos = end;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Classification

IndicatorCounts classify_spatial_indicators(std::string_view locality, const IndicatorLexicon& lexicon) {
    enum Category { kDistance, kDirectional, kTopological };
    IndicatorCounts counts;
    const std::string folded = text::case_fold(locality);

    std::vector<std::pair<std::size_t, std::size_t>> taken;
    for (const auto& m : DistanceMatcher(lexicon).find(locality)) {
        taken.emplace_back(m.whole.begin, m.whole.end);
        ++counts.distance;
    }

    std::vector<Candidate> cands;
    find_literals(folded, lexicon.proximity, kDistance, cands);
    find_literals(folded, lexicon.directional, kDirectional, cands);
    find_patterns(folded, lexicon.directional_patterns, kDirectional, cands);
    find_literals(folded, lexicon.topological, kTopological, cands);
    find_patterns(folded, lexicon.topological_patterns, kTopological, cands);
    std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        const auto la = a.end - a.begin, lb = b.end - b.begin;
        return la != lb ? la > lb : a.begin < b.begin;
    });
    for (const auto& c : cands) {
        if (overlaps(c, taken)) continue;
        taken.emplace_back(c.begin, c.end);
        switch (c.category) {
            case kDistance: ++counts.distance; break;
            case kDirectional: ++counts.directional; break;
            default: ++counts.topological; break;
        }
    }
    return counts;
}

// ---------------------------------------------------------------------------
// Distance removal

namespace {

std::string tidy(std::string s) {
    // drop brackets left empty by the removal
    for (bool changed = true; changed;) {
        changed = false;
        for (auto [open, close] : {std::pair{'(', ')'}, std::pair{'[', ']'}}) {
            for (std::size_t i = 0; i < s.size(); ++i) {
                if (s[i] != open) continue;
                std::size_t j = i + 1;
                while (j < s.size() && s[j] == ' ') ++j;
                if (j < s.size() && s[j] == close) {
                    s.erase(i, j - i + 1);
                    changed = true;
                    break;
                }
            }
        }
    }
    s = text::collapse_whitespace(s);
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (c == ' ' && i + 1 < s.size() && std::string_view(",;:)]").find(s[i + 1]) != std::string_view::npos) {
            continue;
        }
        if (c == ' ' && !out.empty() && (out.back() == '(' || out.back() == '[')) continue;
        out += c;
    }
    // a removal at the very start can leave a dangling separator
    while (!out.empty() && (out.front() == ',' || out.front() == ';')) out.erase(0, 1);
    return std::string(text::trim(out));
}

}  // namespace

StripResult strip_distance_values(std::string_view locality, const IndicatorLexicon& lexicon) {
    const DistanceMatcher matcher(lexicon);
    StripResult result;
    result.text = std::string(locality);
    // clean-up can in principle bring a number next to a unit, so repeat until stable
    for (int pass = 0; pass < 8; ++pass) {
        const auto matches = matcher.find(result.text);
        if (matches.empty()) break;
        std::string next;
        std::size_t cursor = 0;
        for (const auto& m : matches) {
            next.append(result.text, cursor, m.quantity.begin - cursor);
            next += ' ';
            cursor = m.quantity.end;
            if (pass == 0) result.removed.push_back(m.quantity);
        }
        next.append(result.text, cursor, std::string::npos);
        result.text = tidy(std::move(next));
    }
    return result;
}

std::size_t count_place_names(std::string_view locality, const PlaceNameExtractor& ner) {
    if (text::trim(locality).empty()) return 0;
    return ner.extract(locality).size();
}

AnalysisRow analyze_record(const OccurrenceRecord& record, const PlaceNameExtractor& ner,
                           const IndicatorLexicon& lexicon) {
    AnalysisRow row;
    row.id = record.id;
    row.length_chars = text::scalar_count(record.locality);
    row.counts = classify_spatial_indicators(record.locality, lexicon);
    row.counts.place_names = count_place_names(record.locality, ner);
    return row;
}

void write_analysis_csv(std::ostream& out, const std::vector<AnalysisRow>& rows) {
    out << "id,length_chars,n_place_names,n_directional,n_distance,n_topological\n";
    for (const auto& r : rows) {
        std::string id = r.id;
        if (id.find_first_of(",\"\n") != std::string::npos) {
            std::string q = "\"";
            for (char c : id) {
                if (c == '"') q += '"';
                q += c;
            }
            id = q + '"';
        }
        out << id << ',' << r.length_chars << ',' << r.counts.place_names << ',' << r.counts.directional << ','
            << r.counts.distance << ',' << r.counts.topological << '\n';
    }
}

}  // namespace georef
