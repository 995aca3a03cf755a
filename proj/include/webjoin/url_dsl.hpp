#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace webjoin::url_dsl {

/// Case transform applied to extracted substrings. `prop` capitalizes the
/// first letter of each maximal alphabetic run and lowercases the rest.
enum class CaseMode : uint8_t { Lower, Upper, Prop, Iden };

enum class TokenClass : uint8_t { Caps, ProperCase, Lowercase, Digits, Alphabets, AlphaNum };

enum class Dir : uint8_t { Start, End };

/// A regex token: either a literal string or a character-class run.
struct Token {
    bool is_literal = false;
    std::string literal;      // non-empty when is_literal
    TokenClass cls = TokenClass::Caps;

    static Token lit(std::string s) { return Token{true, std::move(s), TokenClass::Caps}; }
    static Token of(TokenClass c) { return Token{false, {}, c}; }

    bool operator==(const Token&) const = default;
    auto operator<=>(const Token&) const = default;
};

/// Gap index into a string. ConstPos with k >= 0 is the index itself; k < 0
/// counts from the end with len(s)+k+1 so ConstPos(-1) is end-of-string.
/// A token position resolves the k-th match (negative k from the end) and
/// takes its start or end.
struct Position {
    bool is_const = true;
    int k = 0;
    Token token;              // token position only
    Dir dir = Dir::Start;

    static Position constant(int k) { return Position{true, k, {}, Dir::Start}; }
    static Position of(Token t, int k, Dir d) { return Position{false, k, std::move(t), d}; }

    bool operator==(const Position&) const = default;
    auto operator<=>(const Position&) const = default;
};

struct ConstStrExpr {
    std::string value;  // non-empty
    bool operator==(const ConstStrExpr&) const = default;
    auto operator<=>(const ConstStrExpr&) const = default;
};

struct SubStrExpr {
    int col = 0;
    Position left, right;
    CaseMode mode = CaseMode::Iden;
    bool operator==(const SubStrExpr&) const = default;
    auto operator<=>(const SubStrExpr&) const = default;
};

struct ReplaceExpr {
    int col = 0;
    Position left, right;
    CaseMode mode = CaseMode::Iden;
    std::string from, to;  // from != to, drawn from the delimiter set
    bool operator==(const ReplaceExpr&) const = default;
    auto operator<=>(const ReplaceExpr&) const = default;
};

struct AnyStrExpr {
    bool operator==(const AnyStrExpr&) const = default;
    auto operator<=>(const AnyStrExpr&) const = default;
};

using AtomicExpr = std::variant<ConstStrExpr, SubStrExpr, ReplaceExpr, AnyStrExpr>;

/// Concat of atomic expressions.
struct Predicate {
    std::vector<AtomicExpr> atoms;  // non-empty
    bool operator==(const Predicate&) const = default;
};

/// Top-level Filter program: evaluates the predicate to a pattern and picks
/// the first matching candidate URL.
struct UrlProgram {
    Predicate pred;
    bool operator==(const UrlProgram&) const = default;
};

/// Evaluated form of a predicate: literal segments interleaved with gaps,
/// where a gap matches any non-empty string. Adjacent literals are merged.
struct UrlPattern {
    struct Segment {
        bool gap = false;
        std::string literal;  // non-empty when !gap
        bool operator==(const Segment&) const = default;
    };
    std::vector<Segment> segments;

    bool has_gap() const;
    void append_literal(const std::string& s);
    void append_gap();
    bool operator==(const UrlPattern&) const = default;
};

using InputRow = std::vector<std::string>;

std::string to_case(const std::string& s, CaseMode mode);

/// Maximal non-overlapping matches of a class token, or left-to-right
/// non-overlapping occurrences of a literal. 0-based, end exclusive.
std::vector<std::pair<int, int>> token_matches(const Token& token, const std::string& s);

/// Resolves a position to a gap index in [0, len(s)], or nullopt when the
/// index is out of range or the token has too few matches.
std::optional<int> eval_position(const Position& pos, const std::string& s);

/// Atomic evaluation result: a literal, a gap, or failure (nullopt).
struct AtomValue {
    bool gap = false;
    std::string literal;
};
std::optional<AtomValue> eval_atomic(const AtomicExpr& expr, const InputRow& row);

std::optional<UrlPattern> eval_predicate(const Predicate& pred, const InputRow& row);

/// Anchored match over the whole string; every gap consumes at least one
/// character.
bool pattern_matches(const UrlPattern& pattern, const std::string& s);

/// True when the pattern can consume a (possibly complete) prefix of s.
bool pattern_matches_prefix(const UrlPattern& pattern, const std::string& s);

/// First candidate matching the evaluated pattern, rank order preserved.
std::optional<std::string> run_filter(const UrlProgram& prog, const InputRow& row,
                                      const std::vector<std::string>& candidates);

// Canonical textual rendering, stable across releases. Examples:
//   Filter(Concat(ConstStr("x"), SubStr(0, ConstPos(0), ConstPos(-1), lower)))
//   Replace(0, (",", -2, End), (",", -1, Start), iden, " ", "_")
std::string render(const Token& t);
std::string render(const Position& p);
std::string render(const AtomicExpr& e);
std::string render(const Predicate& p);
std::string render(const UrlProgram& p);

/// Parses the canonical rendering back (used by the CLI `apply` command and
/// golden tests). Throws std::runtime_error on malformed input.
UrlProgram parse_url_program(const std::string& text);
Predicate parse_predicate(const std::string& text);

size_t hash_value(const AtomicExpr& e);

struct AtomicExprHash {
    size_t operator()(const AtomicExpr& e) const { return hash_value(e); }
};

}  // namespace webjoin::url_dsl
