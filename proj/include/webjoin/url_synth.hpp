#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "webjoin/url_dsl.hpp"

namespace webjoin::url_synth {

using url_dsl::AtomicExpr;
using url_dsl::InputRow;
using url_dsl::Predicate;
using url_dsl::UrlProgram;

enum class ExecMode { Serial, Parallel };

/// Tuning knobs for DAG generation and search. Delimiter sets and the
/// per-token occurrence cap bound the position enumeration.
struct SynthConfig {
    int kappa = 10;                 // prefix programs kept per DAG vertex
    int max_token_occurrence = 4;   // |k| cap for token positions
    std::vector<std::string> token_literals = {" ", ",", "-", "_", "/",
                                               ".", ":", "#", "+", "&", "="};
    std::vector<std::string> replace_delims = {" ", "-", "_", "#", "+"};
    bool allow_anystr = true;       // master switch over the AnyStr gate
    bool output_constrained = true; // uniqueness + generalization pruning
    ExecMode exec = ExecMode::Parallel;
};

/// Edge gates of the layered search. Words are maximal alphanumeric runs.
/// OnlyWords admits spans that are a single whole word or a pure separator
/// run; MultiWords admits any span whose boundaries do not split a word;
/// InsideWords admits spans lying entirely inside word characters;
/// LetterFreeRun admits word-respecting spans without letters (digit runs
/// and separators) and gates AnyStr below the final layer.
enum class Gate { OnlyWords, MultiWords, InsideOrMulti, LetterFreeRun, Always, Never };

bool only_words(int k, int l, const std::string& o);
bool multiple_words(int k, int l, const std::string& o);
bool inside_words(int k, int l, const std::string& o);
bool letter_free_run(int k, int l, const std::string& o);
bool gate_allows(Gate g, int k, int l, const std::string& o);

struct LayerGates {
    Gate substr = Gate::Always;   // SubStr / Replace admission
    Gate konst = Gate::Always;    // ConstStr admission
    Gate any = Gate::Always;      // AnyStr admission
};

/// The four-layer schedule over (substr, const, any) gates:
/// (oW, oW, A1), (mW, oW, A1), (iW|mW, oW, A1), (T, T, T) where A1 is the
/// letter-free-run gate.
std::array<LayerGates, 4> layer_schedule();

/// Version-space DAG over output positions. Vertices 0..n-1 with source 0
/// and target n-1; each edge carries the set of atomic expressions that
/// spell the corresponding output span on every underlying example.
struct Dag {
    struct Edge {
        int from = 0, to = 0;
        int span = 0;  // covered length in first-example output coordinates
        std::vector<AtomicExpr> atoms;  // canonically sorted, deduplicated
    };

    int vertex_count = 0;
    std::vector<Edge> edges;  // sorted by (from, to)

    bool has_path() const;
    size_t edge_count() const { return edges.size(); }
    size_t atom_count() const;
};

/// All SubStr expressions whose evaluation on `row` equals o[k..l).
std::vector<AtomicExpr> gen_substr(int k, int l, const InputRow& row,
                                   const std::string& o, const SynthConfig& cfg);

/// All Replace expressions (delimiter pairs from the config) whose forward
/// evaluation on `row` equals o[k..l).
std::vector<AtomicExpr> gen_replace(int k, int l, const InputRow& row,
                                    const std::string& o, const SynthConfig& cfg);

Dag gen_dag(const InputRow& row, const std::string& o, const LayerGates& gates,
            const SynthConfig& cfg);

/// Serial reference for gen_dag; the parallel kernel must agree with it
/// exactly (checked by tests and the kernel benchmark).
Dag gen_dag_serial(const InputRow& row, const std::string& o, const LayerGates& gates,
                   const SynthConfig& cfg);

/// Product construction; atom sets intersect under structural equality.
/// The result is pruned to vertices on some source-to-target ray and
/// renumbered topologically. May have no source-to-target path.
Dag intersect(const Dag& a, const Dag& b);

struct UrlExample {
    InputRow row;
    std::string url;
    std::vector<std::string> candidates;  // oracle list for this row; may be empty
};

struct UnseenInput {
    InputRow row;
    std::vector<std::string> candidates;  // may be empty (skipped by generalization)
};

/// Top-ranked program of a DAG under the prefix ranking alone (no output
/// constraints); nullopt when the DAG has no source-to-target path.
/// Prefix rank: sum over atoms of rank(atom) * span(edge), with
/// SubStr = Replace > ConstStr > AnyStr; ties break to fewer atoms, then
/// canonical text. Span weighting keeps whole-token substrings ahead of
/// char-by-char compositions of equal kind.
std::optional<Predicate> best_program(const Dag& dag);

/// Number of SubStr/Replace atoms in a predicate (extraction ranking key).
int substr_atom_count(const Predicate& pred);

/// Modified shortest-path search keeping at most kappa ranked prefix
/// programs per vertex; a prefix is extended only if it stays consistent
/// with every example and, when output-constrained, keeps at least one
/// candidate alive for every unseen input with a non-empty oracle list.
std::optional<UrlProgram> search_best_prog(const Dag& dag,
                                           const std::vector<UrlExample>& examples,
                                           const std::vector<UnseenInput>& unseen,
                                           const SynthConfig& cfg);

struct LayerStats {
    int layer = 0;  // 1-based
    size_t dag_edges = 0;
    size_t dag_atoms = 0;
    double gen_ms = 0, intersect_ms = 0, search_ms = 0;
    bool solved = false;
};

struct LearnResult {
    std::optional<UrlProgram> program;
    int layer = 0;  // layer that solved, 0 if none
    std::vector<LayerStats> stats;
    double total_ms = 0;
};

/// Layered search over the configured layer list (1-based indices into the
/// schedule), returning the first layer's consistent best program.
LearnResult learn_url(const std::vector<UrlExample>& examples,
                      const std::vector<UnseenInput>& unseen, const SynthConfig& cfg,
                      const std::vector<int>& layers = {1, 2, 3, 4});

}  // namespace webjoin::url_synth
