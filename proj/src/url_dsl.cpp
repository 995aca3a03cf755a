#include "webjoin/url_dsl.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <stdexcept>

namespace webjoin::url_dsl {

namespace {

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }
bool is_lower(char c) { return std::islower(static_cast<unsigned char>(c)) != 0; }

bool in_class(TokenClass cls, char c) {
    switch (cls) {
        case TokenClass::Caps: return is_upper(c);
        case TokenClass::Lowercase: return is_lower(c);
        case TokenClass::Digits: return is_digit(c);
        case TokenClass::Alphabets: return is_alpha(c);
        case TokenClass::AlphaNum: return is_alpha(c) || is_digit(c);
        case TokenClass::ProperCase: return false;  // handled separately
    }
    return false;
}

}  // namespace

std::string to_case(const std::string& s, CaseMode mode) {
    std::string out = s;
    switch (mode) {
        case CaseMode::Iden:
            break;
        case CaseMode::Lower:
            for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            break;
        case CaseMode::Upper:
            for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            break;
        case CaseMode::Prop: {
            bool run_start = true;
            for (char& c : out) {
                if (is_alpha(c)) {
                    c = static_cast<char>(run_start ? std::toupper(static_cast<unsigned char>(c))
                                                    : std::tolower(static_cast<unsigned char>(c)));
                    run_start = false;
                } else {
                    run_start = true;
                }
            }
            break;
        }
    }
    return out;
}

std::vector<std::pair<int, int>> token_matches(const Token& token, const std::string& s) {
    std::vector<std::pair<int, int>> out;
    int n = static_cast<int>(s.size());
    if (token.is_literal) {
        if (token.literal.empty()) return out;
        size_t pos = 0;
        while ((pos = s.find(token.literal, pos)) != std::string::npos) {
            out.emplace_back(static_cast<int>(pos), static_cast<int>(pos + token.literal.size()));
            pos += token.literal.size();
        }
        return out;
    }
    if (token.cls == TokenClass::ProperCase) {
        // An uppercase letter followed by one or more lowercase letters.
        int i = 0;
        while (i < n) {
            if (is_upper(s[static_cast<size_t>(i)]) && i + 1 < n &&
                is_lower(s[static_cast<size_t>(i + 1)])) {
                int j = i + 1;
                while (j < n && is_lower(s[static_cast<size_t>(j)])) ++j;
                out.emplace_back(i, j);
                i = j;
            } else {
                ++i;
            }
        }
        return out;
    }
    int i = 0;
    while (i < n) {
        if (in_class(token.cls, s[static_cast<size_t>(i)])) {
            int j = i;
            while (j < n && in_class(token.cls, s[static_cast<size_t>(j)])) ++j;
            out.emplace_back(i, j);
            i = j;
        } else {
            ++i;
        }
    }
    return out;
}

std::optional<int> eval_position(const Position& pos, const std::string& s) {
    int len = static_cast<int>(s.size());
    if (pos.is_const) {
        int idx = pos.k >= 0 ? pos.k : len + pos.k + 1;
        if (idx < 0 || idx > len) return std::nullopt;
        return idx;
    }
    if (pos.k == 0) return std::nullopt;
    auto matches = token_matches(pos.token, s);
    int n = static_cast<int>(matches.size());
    int idx = pos.k > 0 ? pos.k - 1 : n + pos.k;
    if (idx < 0 || idx >= n) return std::nullopt;
    return pos.dir == Dir::Start ? matches[static_cast<size_t>(idx)].first
                                 : matches[static_cast<size_t>(idx)].second;
}

namespace {

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
    if (from.empty()) return s;
    std::string out;
    size_t pos = 0;
    while (true) {
        size_t hit = s.find(from, pos);
        if (hit == std::string::npos) {
            out.append(s, pos, std::string::npos);
            return out;
        }
        out.append(s, pos, hit - pos);
        out += to;
        pos = hit + from.size();
    }
}

std::optional<std::string> eval_span(int col, const Position& pl, const Position& pr,
                                     CaseMode mode, const InputRow& row) {
    if (col < 0 || static_cast<size_t>(col) >= row.size()) return std::nullopt;
    const std::string& cell = row[static_cast<size_t>(col)];
    auto a = eval_position(pl, cell);
    auto b = eval_position(pr, cell);
    if (!a || !b || *a > *b) return std::nullopt;
    return to_case(cell.substr(static_cast<size_t>(*a), static_cast<size_t>(*b - *a)), mode);
}

}  // namespace

std::optional<AtomValue> eval_atomic(const AtomicExpr& expr, const InputRow& row) {
    return std::visit(
        [&](const auto& e) -> std::optional<AtomValue> {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, ConstStrExpr>) {
                return AtomValue{false, e.value};
            } else if constexpr (std::is_same_v<T, AnyStrExpr>) {
                return AtomValue{true, {}};
            } else if constexpr (std::is_same_v<T, SubStrExpr>) {
                auto s = eval_span(e.col, e.left, e.right, e.mode, row);
                if (!s) return std::nullopt;
                return AtomValue{false, std::move(*s)};
            } else {
                auto s = eval_span(e.col, e.left, e.right, e.mode, row);
                if (!s) return std::nullopt;
                return AtomValue{false, replace_all(std::move(*s), e.from, e.to)};
            }
        },
        expr);
}

bool UrlPattern::has_gap() const {
    return std::any_of(segments.begin(), segments.end(),
                       [](const Segment& s) { return s.gap; });
}

void UrlPattern::append_literal(const std::string& s) {
    if (s.empty()) return;
    if (!segments.empty() && !segments.back().gap) segments.back().literal += s;
    else segments.push_back(Segment{false, s});
}

void UrlPattern::append_gap() { segments.push_back(Segment{true, {}}); }

std::optional<UrlPattern> eval_predicate(const Predicate& pred, const InputRow& row) {
    UrlPattern pat;
    for (const auto& atom : pred.atoms) {
        auto v = eval_atomic(atom, row);
        if (!v) return std::nullopt;
        if (v->gap) pat.append_gap();
        else pat.append_literal(v->literal);
    }
    return pat;
}

namespace {

// Backtracking wildcard match over the segments. In prefix mode the pattern
// may stop before the end of s; otherwise it must consume s entirely.
bool match_from(const std::vector<UrlPattern::Segment>& segs, size_t si,
                const std::string& s, size_t pos, bool prefix) {
    if (si == segs.size()) return prefix || pos == s.size();
    const auto& seg = segs[si];
    if (!seg.gap) {
        if (s.compare(pos, seg.literal.size(), seg.literal) != 0) return false;
        return match_from(segs, si + 1, s, pos + seg.literal.size(), prefix);
    }
    for (size_t next = pos + 1; next <= s.size(); ++next)
        if (match_from(segs, si + 1, s, next, prefix)) return true;
    return false;
}

}  // namespace

bool pattern_matches(const UrlPattern& pattern, const std::string& s) {
    return match_from(pattern.segments, 0, s, 0, false);
}

bool pattern_matches_prefix(const UrlPattern& pattern, const std::string& s) {
    return match_from(pattern.segments, 0, s, 0, true);
}

std::optional<std::string> run_filter(const UrlProgram& prog, const InputRow& row,
                                      const std::vector<std::string>& candidates) {
    auto pattern = eval_predicate(prog.pred, row);
    if (!pattern) return std::nullopt;
    for (const auto& c : candidates)
        if (pattern_matches(*pattern, c)) return c;
    return std::nullopt;
}

// --- Canonical rendering ---------------------------------------------------

namespace {

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

const char* case_name(CaseMode m) {
    switch (m) {
        case CaseMode::Lower: return "lower";
        case CaseMode::Upper: return "upper";
        case CaseMode::Prop: return "prop";
        case CaseMode::Iden: return "iden";
    }
    return "?";
}

const char* class_name(TokenClass c) {
    switch (c) {
        case TokenClass::Caps: return "CAPS";
        case TokenClass::ProperCase: return "ProperCase";
        case TokenClass::Lowercase: return "lowercase";
        case TokenClass::Digits: return "Digits";
        case TokenClass::Alphabets: return "Alphabets";
        case TokenClass::AlphaNum: return "AlphaNum";
    }
    return "?";
}

}  // namespace

std::string render(const Token& t) {
    return t.is_literal ? quote(t.literal) : class_name(t.cls);
}

std::string render(const Position& p) {
    if (p.is_const) return "ConstPos(" + std::to_string(p.k) + ")";
    return "(" + render(p.token) + ", " + std::to_string(p.k) + ", " +
           (p.dir == Dir::Start ? "Start" : "End") + ")";
}

std::string render(const AtomicExpr& e) {
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, ConstStrExpr>) {
                return "ConstStr(" + quote(x.value) + ")";
            } else if constexpr (std::is_same_v<T, AnyStrExpr>) {
                return "AnyStr";
            } else if constexpr (std::is_same_v<T, SubStrExpr>) {
                return "SubStr(" + std::to_string(x.col) + ", " + render(x.left) + ", " +
                       render(x.right) + ", " + case_name(x.mode) + ")";
            } else {
                return "Replace(" + std::to_string(x.col) + ", " + render(x.left) + ", " +
                       render(x.right) + ", " + case_name(x.mode) + ", " + quote(x.from) +
                       ", " + quote(x.to) + ")";
            }
        },
        e);
}

std::string render(const Predicate& p) {
    std::string out = "Concat(";
    for (size_t i = 0; i < p.atoms.size(); ++i) {
        if (i) out += ", ";
        out += render(p.atoms[i]);
    }
    return out + ")";
}

std::string render(const UrlProgram& p) { return "Filter(" + render(p.pred) + ")"; }

// --- Parsing ---------------------------------------------------------------

namespace {

struct TextCursor {
    const std::string& s;
    size_t pos = 0;

    void ws() { while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos; }

    bool try_eat(const std::string& tok) {
        ws();
        if (s.compare(pos, tok.size(), tok) == 0) { pos += tok.size(); return true; }
        return false;
    }

    void eat(const std::string& tok) {
        if (!try_eat(tok))
            throw std::runtime_error("expected '" + tok + "' at offset " + std::to_string(pos) +
                                     " in program text");
    }

    bool peek_is(char c) {
        ws();
        return pos < s.size() && s[pos] == c;
    }

    std::string string_lit() {
        eat("\"");
        std::string out;
        while (pos < s.size() && s[pos] != '"') {
            char c = s[pos++];
            if (c == '\\' && pos < s.size()) c = s[pos++];
            out += c;
        }
        eat("\"");
        return out;
    }

    int integer() {
        ws();
        size_t start = pos;
        if (pos < s.size() && (s[pos] == '-' || s[pos] == '+')) ++pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (start == pos) throw std::runtime_error("expected an integer at offset " + std::to_string(start));
        return std::stoi(s.substr(start, pos - start));
    }

    std::string ident() {
        ws();
        size_t start = pos;
        while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
        if (start == pos) throw std::runtime_error("expected an identifier at offset " + std::to_string(start));
        return s.substr(start, pos - start);
    }
};

CaseMode parse_case(const std::string& name) {
    if (name == "lower") return CaseMode::Lower;
    if (name == "upper") return CaseMode::Upper;
    if (name == "prop") return CaseMode::Prop;
    if (name == "iden") return CaseMode::Iden;
    throw std::runtime_error("unknown case mode '" + name + "'");
}

std::optional<TokenClass> parse_class(const std::string& name) {
    if (name == "CAPS") return TokenClass::Caps;
    if (name == "ProperCase") return TokenClass::ProperCase;
    if (name == "lowercase") return TokenClass::Lowercase;
    if (name == "Digits") return TokenClass::Digits;
    if (name == "Alphabets") return TokenClass::Alphabets;
    if (name == "AlphaNum") return TokenClass::AlphaNum;
    return std::nullopt;
}

Position parse_position(TextCursor& c) {
    c.ws();
    if (c.try_eat("ConstPos")) {
        c.eat("(");
        int k = c.integer();
        c.eat(")");
        return Position::constant(k);
    }
    c.eat("(");
    Token tok;
    if (c.peek_is('"')) {
        tok = Token::lit(c.string_lit());
    } else {
        auto cls = parse_class(c.ident());
        if (!cls) throw std::runtime_error("unknown token class in position");
        tok = Token::of(*cls);
    }
    c.eat(",");
    int k = c.integer();
    c.eat(",");
    std::string d = c.ident();
    c.eat(")");
    if (d != "Start" && d != "End") throw std::runtime_error("direction must be Start or End");
    return Position::of(std::move(tok), k, d == "Start" ? Dir::Start : Dir::End);
}

AtomicExpr parse_atom(TextCursor& c) {
    c.ws();
    if (c.try_eat("ConstStr")) {
        c.eat("(");
        std::string v = c.string_lit();
        c.eat(")");
        return ConstStrExpr{std::move(v)};
    }
    if (c.try_eat("AnyStr")) return AnyStrExpr{};
    if (c.try_eat("SubStr")) {
        c.eat("(");
        SubStrExpr e;
        e.col = c.integer();
        c.eat(",");
        e.left = parse_position(c);
        c.eat(",");
        e.right = parse_position(c);
        c.eat(",");
        e.mode = parse_case(c.ident());
        c.eat(")");
        return e;
    }
    if (c.try_eat("Replace")) {
        c.eat("(");
        ReplaceExpr e;
        e.col = c.integer();
        c.eat(",");
        e.left = parse_position(c);
        c.eat(",");
        e.right = parse_position(c);
        c.eat(",");
        e.mode = parse_case(c.ident());
        c.eat(",");
        e.from = c.string_lit();
        c.eat(",");
        e.to = c.string_lit();
        c.eat(")");
        return e;
    }
    throw std::runtime_error("expected an atomic expression at offset " + std::to_string(c.pos));
}

Predicate parse_predicate_at(TextCursor& c) {
    Predicate p;
    c.eat("Concat");
    c.eat("(");
    while (true) {
        p.atoms.push_back(parse_atom(c));
        if (!c.try_eat(",")) break;
    }
    c.eat(")");
    return p;
}

}  // namespace

Predicate parse_predicate(const std::string& text) {
    TextCursor c{text};
    Predicate p = parse_predicate_at(c);
    c.ws();
    if (c.pos != text.size()) throw std::runtime_error("trailing characters after predicate");
    return p;
}

UrlProgram parse_url_program(const std::string& text) {
    TextCursor c{text};
    c.eat("Filter");
    c.eat("(");
    UrlProgram p{parse_predicate_at(c)};
    c.eat(")");
    c.ws();
    if (c.pos != text.size()) throw std::runtime_error("trailing characters after program");
    return p;
}

namespace {

void mix(size_t& h, size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); }

size_t hash_position(const Position& p) {
    size_t h = p.is_const ? 1 : 2;
    mix(h, static_cast<size_t>(p.k));
    if (!p.is_const) {
        mix(h, p.token.is_literal ? std::hash<std::string>{}(p.token.literal)
                                  : static_cast<size_t>(p.token.cls) + 101);
        mix(h, static_cast<size_t>(p.dir));
    }
    return h;
}

}  // namespace

size_t hash_value(const AtomicExpr& e) {
    return std::visit(
        [](const auto& x) -> size_t {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, ConstStrExpr>) {
                size_t h = 11;
                mix(h, std::hash<std::string>{}(x.value));
                return h;
            } else if constexpr (std::is_same_v<T, AnyStrExpr>) {
                return 13;
            } else if constexpr (std::is_same_v<T, SubStrExpr>) {
                size_t h = 17;
                mix(h, static_cast<size_t>(x.col));
                mix(h, hash_position(x.left));
                mix(h, hash_position(x.right));
                mix(h, static_cast<size_t>(x.mode));
                return h;
            } else {
                size_t h = 19;
                mix(h, static_cast<size_t>(x.col));
                mix(h, hash_position(x.left));
                mix(h, hash_position(x.right));
                mix(h, static_cast<size_t>(x.mode));
                mix(h, std::hash<std::string>{}(x.from));
                mix(h, std::hash<std::string>{}(x.to));
                return h;
            }
        },
        e);
}

}  // namespace webjoin::url_dsl
