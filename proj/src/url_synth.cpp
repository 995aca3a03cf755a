#include "webjoin/url_synth.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <map>
#include <memory>
#include <unordered_map>
#include <unordered_set>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace webjoin::url_synth {

using url_dsl::AnyStrExpr;
using url_dsl::AtomicExprHash;
using url_dsl::CaseMode;
using url_dsl::ConstStrExpr;
using url_dsl::Dir;
using url_dsl::Position;
using url_dsl::ReplaceExpr;
using url_dsl::SubStrExpr;
using url_dsl::Token;
using url_dsl::TokenClass;
using url_dsl::to_case;
using url_dsl::UrlPattern;

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

// A gap position is a word boundary when it does not split two adjacent
// word characters. Out-of-range neighbors count as non-word.
bool word_boundary(const std::string& o, int g) {
    int len = static_cast<int>(o.size());
    if (g <= 0 || g >= len) return true;
    return !(is_word_char(o[static_cast<size_t>(g - 1)]) &&
             is_word_char(o[static_cast<size_t>(g)]));
}

bool interior_all_word(const std::string& o, int k, int l) {
    for (int i = k; i < l; ++i)
        if (!is_word_char(o[static_cast<size_t>(i)])) return false;
    return true;
}

bool interior_no_word(const std::string& o, int k, int l) {
    for (int i = k; i < l; ++i)
        if (is_word_char(o[static_cast<size_t>(i)])) return false;
    return true;
}

bool interior_no_alpha(const std::string& o, int k, int l) {
    for (int i = k; i < l; ++i)
        if (is_alpha(o[static_cast<size_t>(i)])) return false;
    return true;
}

}  // namespace

bool only_words(int k, int l, const std::string& o) {
    if (!word_boundary(o, k) || !word_boundary(o, l)) return false;
    return interior_all_word(o, k, l) || interior_no_word(o, k, l);
}

bool multiple_words(int k, int l, const std::string& o) {
    return word_boundary(o, k) && word_boundary(o, l);
}

bool inside_words(int k, int l, const std::string& o) {
    return interior_all_word(o, k, l);
}

bool letter_free_run(int k, int l, const std::string& o) {
    return word_boundary(o, k) && word_boundary(o, l) && interior_no_alpha(o, k, l);
}

bool gate_allows(Gate g, int k, int l, const std::string& o) {
    switch (g) {
        case Gate::OnlyWords: return only_words(k, l, o);
        case Gate::MultiWords: return multiple_words(k, l, o);
        case Gate::InsideOrMulti: return inside_words(k, l, o) || multiple_words(k, l, o);
        case Gate::LetterFreeRun: return letter_free_run(k, l, o);
        case Gate::Always: return true;
        case Gate::Never: return false;
    }
    return false;
}

std::array<LayerGates, 4> layer_schedule() {
    return {LayerGates{Gate::OnlyWords, Gate::OnlyWords, Gate::LetterFreeRun},
            LayerGates{Gate::MultiWords, Gate::OnlyWords, Gate::LetterFreeRun},
            LayerGates{Gate::InsideOrMulti, Gate::OnlyWords, Gate::LetterFreeRun},
            LayerGates{Gate::Always, Gate::Always, Gate::Always}};
}

// --- Dag basics ------------------------------------------------------------

bool Dag::has_path() const {
    if (vertex_count == 0) return false;
    std::vector<char> reach(static_cast<size_t>(vertex_count), 0);
    reach[0] = 1;
    for (const auto& e : edges)  // edges sorted by `from`; from < to
        if (reach[static_cast<size_t>(e.from)]) reach[static_cast<size_t>(e.to)] = 1;
    return reach[static_cast<size_t>(vertex_count - 1)] != 0;
}

size_t Dag::atom_count() const {
    size_t n = 0;
    for (const auto& e : edges) n += e.atoms.size();
    return n;
}

// --- Generation ------------------------------------------------------------

namespace {

struct TokenVocab {
    std::vector<Token> tokens;
    // matches[cell][token] in left-to-right order
    std::vector<std::vector<std::vector<std::pair<int, int>>>> matches;

    TokenVocab(const InputRow& row, const SynthConfig& cfg) {
        tokens = {Token::of(TokenClass::Caps),      Token::of(TokenClass::ProperCase),
                  Token::of(TokenClass::Lowercase), Token::of(TokenClass::Digits),
                  Token::of(TokenClass::Alphabets), Token::of(TokenClass::AlphaNum)};
        for (const auto& d : cfg.token_literals) tokens.push_back(Token::lit(d));
        matches.resize(row.size());
        for (size_t c = 0; c < row.size(); ++c) {
            matches[c].reserve(tokens.size());
            for (const auto& t : tokens) matches[c].push_back(url_dsl::token_matches(t, row[c]));
        }
    }

    // Positions resolving to gap index `idx` of cell `c` (both ConstPos
    // forms plus every token-anchored form within the occurrence cap).
    std::vector<Position> positions_at(size_t c, int cell_len, int idx,
                                       const SynthConfig& cfg) const {
        std::vector<Position> out;
        out.push_back(Position::constant(idx));
        out.push_back(Position::constant(idx - cell_len - 1));
        for (size_t t = 0; t < tokens.size(); ++t) {
            const auto& ms = matches[c][t];
            int n = static_cast<int>(ms.size());
            for (int j = 0; j < n; ++j) {
                int pos_k = j + 1, neg_k = j - n;
                if (ms[static_cast<size_t>(j)].first == idx) {
                    if (pos_k <= cfg.max_token_occurrence)
                        out.push_back(Position::of(tokens[t], pos_k, Dir::Start));
                    if (-neg_k <= cfg.max_token_occurrence)
                        out.push_back(Position::of(tokens[t], neg_k, Dir::Start));
                }
                if (ms[static_cast<size_t>(j)].second == idx) {
                    if (pos_k <= cfg.max_token_occurrence)
                        out.push_back(Position::of(tokens[t], pos_k, Dir::End));
                    if (-neg_k <= cfg.max_token_occurrence)
                        out.push_back(Position::of(tokens[t], neg_k, Dir::End));
                }
            }
        }
        return out;
    }
};

using AtomSet = std::unordered_set<AtomicExpr, AtomicExprHash>;

const std::array<CaseMode, 4> kAllCases = {CaseMode::Lower, CaseMode::Upper,
                                           CaseMode::Prop, CaseMode::Iden};

// Emits every SubStr-shaped expression over spans of `row` whose case
// transform equals `target`; `wrap` turns the span parameters into the
// concrete atom (SubStr or Replace) before the set insert.
template <typename Wrap>
void for_each_span(const InputRow& row, const TokenVocab& vocab, const std::string& target,
                   const SynthConfig& cfg, Wrap&& wrap) {
    if (target.empty()) return;
    size_t tl = target.size();
    for (size_t c = 0; c < row.size(); ++c) {
        const std::string& cell = row[c];
        if (cell.size() < tl) continue;
        int cell_len = static_cast<int>(cell.size());
        for (CaseMode mode : kAllCases) {
            for (size_t a = 0; a + tl <= cell.size(); ++a) {
                if (to_case(cell.substr(a, tl), mode) != target) continue;
                auto lefts = vocab.positions_at(c, cell_len, static_cast<int>(a), cfg);
                auto rights = vocab.positions_at(c, cell_len, static_cast<int>(a + tl), cfg);
                for (const auto& pl : lefts)
                    for (const auto& pr : rights)
                        wrap(static_cast<int>(c), pl, pr, mode);
            }
        }
    }
}

void gen_substr_into(int k, int l, const InputRow& row, const std::string& o,
                     const TokenVocab& vocab, const SynthConfig& cfg, AtomSet& out) {
    std::string target = o.substr(static_cast<size_t>(k), static_cast<size_t>(l - k));
    for_each_span(row, vocab, target, cfg, [&](int col, const Position& pl, const Position& pr, CaseMode m) {
        out.insert(SubStrExpr{col, pl, pr, m});
    });
}

void gen_replace_into(int k, int l, const InputRow& row, const std::string& o,
                      const TokenVocab& vocab, const SynthConfig& cfg, AtomSet& out) {
    std::string target = o.substr(static_cast<size_t>(k), static_cast<size_t>(l - k));
    InputRow dummy;
    for (const auto& s1 : cfg.replace_delims) {
        for (const auto& s2 : cfg.replace_delims) {
            if (s1 == s2) continue;
            // Invert the replacement, then confirm by forward evaluation:
            // inversion is not bijective when s1 already occurs in the span.
            std::string pre = target;
            if (target.find(s2) != std::string::npos) {
                std::string inv;
                size_t pos = 0;
                while (true) {
                    size_t hit = target.find(s2, pos);
                    if (hit == std::string::npos) { inv.append(target, pos, std::string::npos); break; }
                    inv.append(target, pos, hit - pos);
                    inv += s1;
                    pos = hit + s2.size();
                }
                pre = std::move(inv);
            }
            for_each_span(row, vocab, pre, cfg,
                          [&](int col, const Position& pl, const Position& pr, CaseMode m) {
                              ReplaceExpr e{col, pl, pr, m, s1, s2};
                              auto v = url_dsl::eval_atomic(AtomicExpr{e}, row);
                              if (v && !v->gap && v->literal == target) out.insert(std::move(e));
                          });
        }
    }
}

std::vector<AtomicExpr> sorted_atoms(AtomSet&& set) {
    std::vector<AtomicExpr> v(std::make_move_iterator(set.begin()),
                              std::make_move_iterator(set.end()));
    std::sort(v.begin(), v.end());
    return v;
}

std::vector<AtomicExpr> edge_atoms(int k, int l, const InputRow& row, const std::string& o,
                                   const TokenVocab& vocab, const LayerGates& gates,
                                   const SynthConfig& cfg) {
    AtomSet set;
    if (gate_allows(gates.substr, k, l, o)) {
        gen_substr_into(k, l, row, o, vocab, cfg, set);
        gen_replace_into(k, l, row, o, vocab, cfg, set);
    }
    if (gate_allows(gates.konst, k, l, o))
        set.insert(ConstStrExpr{o.substr(static_cast<size_t>(k), static_cast<size_t>(l - k))});
    if (cfg.allow_anystr && gate_allows(gates.any, k, l, o)) set.insert(AnyStrExpr{});
    return sorted_atoms(std::move(set));
}

Dag assemble(int n, std::vector<std::pair<std::pair<int, int>, std::vector<AtomicExpr>>>&& raw) {
    Dag d;
    d.vertex_count = n;
    for (auto& [key, atoms] : raw)
        if (!atoms.empty())
            d.edges.push_back(
                Dag::Edge{key.first, key.second, key.second - key.first, std::move(atoms)});
    return d;
}

}  // namespace

std::vector<AtomicExpr> gen_substr(int k, int l, const InputRow& row, const std::string& o,
                                   const SynthConfig& cfg) {
    TokenVocab vocab(row, cfg);
    AtomSet set;
    gen_substr_into(k, l, row, o, vocab, cfg, set);
    return sorted_atoms(std::move(set));
}

std::vector<AtomicExpr> gen_replace(int k, int l, const InputRow& row, const std::string& o,
                                    const SynthConfig& cfg) {
    TokenVocab vocab(row, cfg);
    AtomSet set;
    gen_replace_into(k, l, row, o, vocab, cfg, set);
    return sorted_atoms(std::move(set));
}

Dag gen_dag_serial(const InputRow& row, const std::string& o, const LayerGates& gates,
                   const SynthConfig& cfg) {
    int len = static_cast<int>(o.size());
    TokenVocab vocab(row, cfg);
    std::vector<std::pair<std::pair<int, int>, std::vector<AtomicExpr>>> raw;
    for (int k = 0; k < len; ++k)
        for (int l = k + 1; l <= len; ++l)
            raw.emplace_back(std::make_pair(k, l), edge_atoms(k, l, row, o, vocab, gates, cfg));
    return assemble(len + 1, std::move(raw));
}

Dag gen_dag(const InputRow& row, const std::string& o, const LayerGates& gates,
            const SynthConfig& cfg) {
    if (cfg.exec == ExecMode::Serial) return gen_dag_serial(row, o, gates, cfg);
    int len = static_cast<int>(o.size());
    TokenVocab vocab(row, cfg);
    std::vector<std::pair<int, int>> keys;
    keys.reserve(static_cast<size_t>(len) * (static_cast<size_t>(len) + 1) / 2);
    for (int k = 0; k < len; ++k)
        for (int l = k + 1; l <= len; ++l) keys.emplace_back(k, l);
    std::vector<std::vector<AtomicExpr>> slots(keys.size());
#pragma omp parallel for schedule(dynamic, 8)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(keys.size()); ++i) {
        auto [k, l] = keys[static_cast<size_t>(i)];
        slots[static_cast<size_t>(i)] = edge_atoms(k, l, row, o, vocab, gates, cfg);
    }
    std::vector<std::pair<std::pair<int, int>, std::vector<AtomicExpr>>> raw;
    raw.reserve(keys.size());
    for (size_t i = 0; i < keys.size(); ++i) raw.emplace_back(keys[i], std::move(slots[i]));
    return assemble(len + 1, std::move(raw));
}

// --- Intersection ----------------------------------------------------------

Dag intersect(const Dag& a, const Dag& b) {
    // Group edges by source vertex.
    std::vector<std::vector<const Dag::Edge*>> from_a(static_cast<size_t>(a.vertex_count));
    std::vector<std::vector<const Dag::Edge*>> from_b(static_cast<size_t>(b.vertex_count));
    for (const auto& e : a.edges) from_a[static_cast<size_t>(e.from)].push_back(&e);
    for (const auto& e : b.edges) from_b[static_cast<size_t>(e.from)].push_back(&e);

    auto key = [&](int va, int vb) {
        return static_cast<std::int64_t>(va) * b.vertex_count + vb;
    };

    std::unordered_set<std::int64_t> forward;
    forward.insert(key(0, 0));
    struct RawEdge {
        std::int64_t from, to;
        int span;
        std::vector<AtomicExpr> atoms;
    };
    std::vector<RawEdge> raw;

    // Pairs are processed in ascending lexicographic order, which is a
    // topological order of the product (edges strictly increase both
    // coordinates).
    for (int va = 0; va < a.vertex_count; ++va) {
        for (int vb = 0; vb < b.vertex_count; ++vb) {
            if (!forward.count(key(va, vb))) continue;
            for (const Dag::Edge* ea : from_a[static_cast<size_t>(va)]) {
                AtomSet set_a(ea->atoms.begin(), ea->atoms.end());
                for (const Dag::Edge* eb : from_b[static_cast<size_t>(vb)]) {
                    std::vector<AtomicExpr> both;
                    for (const auto& atom : eb->atoms)
                        if (set_a.count(atom)) both.push_back(atom);
                    if (both.empty()) continue;
                    forward.insert(key(ea->to, eb->to));
                    raw.push_back(
                        RawEdge{key(va, vb), key(ea->to, eb->to), ea->span, std::move(both)});
                }
            }
        }
    }

    // Backward prune to pairs that reach the product target.
    std::int64_t target = key(a.vertex_count - 1, b.vertex_count - 1);
    std::unordered_set<std::int64_t> keep;
    if (forward.count(target) || target == key(0, 0)) keep.insert(target);
    for (size_t i = raw.size(); i-- > 0;)
        if (keep.count(raw[i].to)) keep.insert(raw[i].from);
    keep.insert(key(0, 0));

    std::vector<std::int64_t> alive;
    for (std::int64_t k : forward)
        if (keep.count(k)) alive.push_back(k);
    if (!forward.count(target)) alive.push_back(target);
    std::sort(alive.begin(), alive.end());
    alive.erase(std::unique(alive.begin(), alive.end()), alive.end());

    std::unordered_map<std::int64_t, int> renum;
    for (size_t i = 0; i < alive.size(); ++i) renum[alive[i]] = static_cast<int>(i);

    Dag out;
    out.vertex_count = static_cast<int>(alive.size());
    for (auto& e : raw) {
        auto fi = renum.find(e.from);
        auto ti = renum.find(e.to);
        if (fi == renum.end() || ti == renum.end()) continue;
        out.edges.push_back(Dag::Edge{fi->second, ti->second, e.span, std::move(e.atoms)});
    }
    std::sort(out.edges.begin(), out.edges.end(), [](const Dag::Edge& x, const Dag::Edge& y) {
        return std::tie(x.from, x.to) < std::tie(y.from, y.to);
    });
    return out;
}

// --- Ranking and search ----------------------------------------------------

namespace {

int atom_kind_order(const AtomicExpr& e) {
    if (std::holds_alternative<SubStrExpr>(e)) return 0;
    if (std::holds_alternative<ReplaceExpr>(e)) return 1;
    if (std::holds_alternative<ConstStrExpr>(e)) return 2;
    return 3;  // AnyStr
}

// SubStr = Replace > ConstStr > AnyStr. Single-character extractions carry
// no more evidence than the constant they equal, so they score like one.
int atom_rank(const AtomicExpr& e, int span) {
    if (std::holds_alternative<SubStrExpr>(e) || std::holds_alternative<ReplaceExpr>(e))
        return span >= 2 ? 3 : 2;
    if (std::holds_alternative<ConstStrExpr>(e)) return 2;
    return 1;  // AnyStr
}

struct RankedAtom {
    const AtomicExpr* atom;
    int rank;
    int kind;
    std::string text;
};

std::vector<RankedAtom> ranked_atoms(const std::vector<AtomicExpr>& atoms, int span) {
    std::vector<RankedAtom> out;
    out.reserve(atoms.size());
    for (const auto& a : atoms)
        out.push_back(RankedAtom{&a, atom_rank(a, span), atom_kind_order(a), url_dsl::render(a)});
    std::sort(out.begin(), out.end(), [](const RankedAtom& x, const RankedAtom& y) {
        if (x.rank != y.rank) return x.rank > y.rank;
        if (x.kind != y.kind) return x.kind < y.kind;
        return x.text < y.text;
    });
    return out;
}

}  // namespace

int substr_atom_count(const Predicate& pred) {
    int n = 0;
    for (const auto& a : pred.atoms)
        if (std::holds_alternative<SubStrExpr>(a) || std::holds_alternative<ReplaceExpr>(a)) ++n;
    return n;
}

std::optional<Predicate> best_program(const Dag& dag) {
    if (dag.vertex_count == 0) return std::nullopt;
    struct Best {
        bool set = false;
        int score = 0;
        int atoms = 0;
        std::string text;
        std::vector<AtomicExpr> chain;
    };
    std::vector<Best> best(static_cast<size_t>(dag.vertex_count));
    best[0].set = true;
    for (const auto& e : dag.edges) {
        const Best& src = best[static_cast<size_t>(e.from)];
        if (!src.set) continue;
        auto ranked = ranked_atoms(e.atoms, e.span);
        if (ranked.empty()) continue;
        // Edge-best atom suffices: score and count contributions are equal
        // for atoms of the same rank, leaving only the text tie-break.
        const RankedAtom& f = ranked.front();
        Best cand;
        cand.set = true;
        cand.score = src.score + f.rank * e.span;
        cand.atoms = src.atoms + 1;
        cand.text = src.text.empty() ? f.text : src.text + ", " + f.text;
        cand.chain = src.chain;
        cand.chain.push_back(*f.atom);
        Best& dst = best[static_cast<size_t>(e.to)];
        if (!dst.set || cand.score > dst.score ||
            (cand.score == dst.score && (cand.atoms < dst.atoms ||
                                         (cand.atoms == dst.atoms && cand.text < dst.text)))) {
            dst = std::move(cand);
        }
    }
    const Best& t = best[static_cast<size_t>(dag.vertex_count - 1)];
    if (!t.set || dag.vertex_count == 1) return std::nullopt;
    return Predicate{t.chain};
}

namespace {

using PosSet = std::vector<int>;  // sorted unique gap positions

struct AtomChain {
    std::shared_ptr<const AtomChain> prev;
    AtomicExpr atom;
};

struct PrefixProg {
    std::shared_ptr<const AtomChain> chain;
    int score = 0;
    int atoms = 0;
    bool has_anystr = false;
    std::string text;
    std::vector<PosSet> ex_pos;                // per example
    std::vector<std::vector<PosSet>> un_pos;   // per unseen, per candidate
};

std::vector<AtomicExpr> chain_atoms(const std::shared_ptr<const AtomChain>& chain) {
    std::vector<AtomicExpr> out;
    for (const AtomChain* c = chain.get(); c; c = c->prev.get()) out.push_back(c->atom);
    std::reverse(out.begin(), out.end());
    return out;
}

PosSet advance_literal(const PosSet& in, const std::string& s, const std::string& lit) {
    PosSet out;
    for (int p : in)
        if (s.compare(static_cast<size_t>(p), lit.size(), lit) == 0)
            out.push_back(p + static_cast<int>(lit.size()));
    return out;
}

PosSet advance_gap(const PosSet& in, const std::string& s) {
    PosSet out;
    if (in.empty()) return out;
    for (int q = in.front() + 1; q <= static_cast<int>(s.size()); ++q) out.push_back(q);
    return out;
}

bool same_state(const PrefixProg& a, const PrefixProg& b) {
    return a.ex_pos == b.ex_pos && a.un_pos == b.un_pos;
}

bool better_ranked(const PrefixProg& a, const PrefixProg& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.atoms != b.atoms) return a.atoms < b.atoms;
    return a.text < b.text;
}

}  // namespace

std::optional<UrlProgram> search_best_prog(const Dag& dag,
                                           const std::vector<UrlExample>& examples,
                                           const std::vector<UnseenInput>& unseen,
                                           const SynthConfig& cfg) {
    if (dag.vertex_count < 2 || examples.empty()) return std::nullopt;
    int target = dag.vertex_count - 1;

    // Unseen inputs without oracle output cannot constrain the search.
    std::vector<const UnseenInput*> tests;
    if (cfg.output_constrained)
        for (const auto& u : unseen)
            if (!u.candidates.empty()) tests.push_back(&u);

    std::vector<std::vector<const Dag::Edge*>> out_edges(static_cast<size_t>(dag.vertex_count));
    for (const auto& e : dag.edges) out_edges[static_cast<size_t>(e.from)].push_back(&e);

    std::vector<std::vector<PrefixProg>> prefixes(static_cast<size_t>(dag.vertex_count));
    PrefixProg root;
    for (const auto& ex : examples) {
        (void)ex;
        root.ex_pos.push_back(PosSet{0});
    }
    for (const auto* u : tests) root.un_pos.emplace_back(u->candidates.size(), PosSet{0});
    prefixes[0].push_back(std::move(root));

    auto add_prefix = [&](std::vector<PrefixProg>& list, PrefixProg&& p) {
        for (auto& q : list) {
            if (same_state(q, p)) {
                if (better_ranked(p, q)) q = std::move(p);
                return;
            }
        }
        list.push_back(std::move(p));
        std::sort(list.begin(), list.end(), better_ranked);
        if (static_cast<int>(list.size()) > cfg.kappa) list.resize(static_cast<size_t>(cfg.kappa));
    };

    auto full_checks_pass = [&](const PrefixProg& p) {
        // Anchored at the end of every example URL.
        for (size_t k = 0; k < examples.size(); ++k) {
            int len = static_cast<int>(examples[k].url.size());
            if (!std::binary_search(p.ex_pos[k].begin(), p.ex_pos[k].end(), len)) return false;
        }
        auto atoms = chain_atoms(p.chain);
        Predicate pred{atoms};
        for (const auto& ex : examples) {
            auto pattern = url_dsl::eval_predicate(pred, ex.row);
            if (!pattern) return false;
            if (ex.candidates.empty()) {
                // Direct construction: the pattern must denote exactly the URL.
                if (pattern->has_gap()) return false;
                if (!url_dsl::pattern_matches(*pattern, ex.url)) return false;
            } else {
                int hits = 0;
                bool target_hit = false;
                for (const auto& c : ex.candidates) {
                    if (url_dsl::pattern_matches(*pattern, c)) {
                        ++hits;
                        if (c == ex.url) target_hit = true;
                    }
                }
                if (hits != 1 || !target_hit) return false;  // output uniqueness
            }
        }
        for (size_t ui = 0; ui < tests.size(); ++ui) {
            bool any = false;
            for (size_t ci = 0; ci < tests[ui]->candidates.size() && !any; ++ci) {
                int len = static_cast<int>(tests[ui]->candidates[ci].size());
                any = std::binary_search(p.un_pos[ui][ci].begin(), p.un_pos[ui][ci].end(), len);
            }
            if (!any) return false;
        }
        return true;
    };

    for (int v = 0; v < dag.vertex_count; ++v) {
        if (prefixes[static_cast<size_t>(v)].empty()) continue;
        for (const Dag::Edge* e : out_edges[static_cast<size_t>(v)]) {
            auto ranked = ranked_atoms(e->atoms, e->span);
            // Snapshot: additions go to e->to, never back to v.
            const auto& plist = prefixes[static_cast<size_t>(v)];
            for (const auto& prefix : plist) {
                for (const auto& ra : ranked) {
                    bool is_any = std::holds_alternative<AnyStrExpr>(*ra.atom);
                    PrefixProg ext;
                    ext.score = prefix.score + ra.rank * e->span;
                    ext.atoms = prefix.atoms + 1;
                    ext.has_anystr = prefix.has_anystr || is_any;
                    ext.text = prefix.text.empty() ? ra.text : prefix.text + ", " + ra.text;
                    ext.ex_pos.reserve(examples.size());

                    bool consistent = true;
                    for (size_t k = 0; k < examples.size() && consistent; ++k) {
                        const auto& url = examples[k].url;
                        PosSet np;
                        if (is_any) {
                            np = advance_gap(prefix.ex_pos[k], url);
                        } else {
                            auto val = url_dsl::eval_atomic(*ra.atom, examples[k].row);
                            if (!val || val->gap) { consistent = false; break; }
                            np = advance_literal(prefix.ex_pos[k], url, val->literal);
                        }
                        if (np.empty()) { consistent = false; break; }
                        ext.ex_pos.push_back(std::move(np));
                    }
                    if (!consistent) continue;

                    bool generalizes = true;
                    ext.un_pos.reserve(tests.size());
                    for (size_t ui = 0; ui < tests.size(); ++ui) {
                        const auto& cands = tests[ui]->candidates;
                        std::vector<PosSet> per_cand(cands.size());
                        bool row_eval_ok = true;
                        std::optional<url_dsl::AtomValue> val;
                        if (!is_any) {
                            val = url_dsl::eval_atomic(*ra.atom, tests[ui]->row);
                            if (!val || val->gap) row_eval_ok = false;
                        }
                        bool any_alive = false;
                        if (row_eval_ok) {
                            for (size_t ci = 0; ci < cands.size(); ++ci) {
                                per_cand[ci] = is_any
                                                   ? advance_gap(prefix.un_pos[ui][ci], cands[ci])
                                                   : advance_literal(prefix.un_pos[ui][ci],
                                                                     cands[ci], val->literal);
                                any_alive = any_alive || !per_cand[ci].empty();
                            }
                        }
                        if (!any_alive) { generalizes = false; break; }
                        ext.un_pos.push_back(std::move(per_cand));
                    }
                    if (!generalizes) continue;

                    ext.chain = std::make_shared<AtomChain>(AtomChain{prefix.chain, *ra.atom});
                    if (e->to == target && !full_checks_pass(ext)) continue;
                    add_prefix(prefixes[static_cast<size_t>(e->to)], std::move(ext));
                    if (!is_any) break;  // best consistent atom taken for this prefix
                }
                if (!prefix.has_anystr) break;  // identical patterns below; next edge
            }
        }
    }

    auto& final = prefixes[static_cast<size_t>(target)];
    if (final.empty()) return std::nullopt;
    return UrlProgram{Predicate{chain_atoms(final.front().chain)}};
}

// --- Layered learning ------------------------------------------------------

LearnResult learn_url(const std::vector<UrlExample>& examples,
                      const std::vector<UnseenInput>& unseen, const SynthConfig& cfg,
                      const std::vector<int>& layers) {
    using clock = std::chrono::steady_clock;
    auto ms_since = [](clock::time_point t0) {
        return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    };

    LearnResult result;
    auto start = clock::now();
    auto schedule = layer_schedule();
    for (int layer : layers) {
        if (layer < 1 || layer > 4 || examples.empty()) continue;
        const LayerGates& gates = schedule[static_cast<size_t>(layer - 1)];
        LayerStats stat;
        stat.layer = layer;

        auto t0 = clock::now();
        Dag dag = gen_dag(examples[0].row, examples[0].url, gates, cfg);
        stat.gen_ms = ms_since(t0);

        t0 = clock::now();
        bool dead = false;
        for (size_t k = 1; k < examples.size(); ++k) {
            Dag next = gen_dag(examples[k].row, examples[k].url, gates, cfg);
            dag = intersect(dag, next);
            if (!dag.has_path()) { dead = true; break; }
        }
        stat.intersect_ms = ms_since(t0);
        stat.dag_edges = dag.edge_count();
        stat.dag_atoms = dag.atom_count();

        if (!dead && dag.has_path()) {
            t0 = clock::now();
            auto prog = search_best_prog(dag, examples, unseen, cfg);
            stat.search_ms = ms_since(t0);
            if (prog) {
                stat.solved = true;
                result.stats.push_back(stat);
                result.program = std::move(prog);
                result.layer = layer;
                result.total_ms = ms_since(start);
                return result;
            }
        }
        result.stats.push_back(stat);
    }
    result.total_ms = ms_since(start);
    return result;
}

}  // namespace webjoin::url_synth
