#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "webjoin/extract_dsl.hpp"
#include "webjoin/url_synth.hpp"

namespace webjoin::extract_synth {

using dom::Axis;
using dom::DomTree;
using extract_dsl::CountPred;
using extract_dsl::ExtractProgram;
using extract_dsl::PosPred;
using url_dsl::InputRow;
using url_synth::Dag;

struct ExtractExample {
    InputRow row;
    std::shared_ptr<const DomTree> tree;
    int target = -1;
};

/// An unseen page paired with its input row; used as a generalization test
/// document during the predicate search.
struct TestDoc {
    InputRow row;
    std::shared_ptr<const DomTree> tree;
};

struct ExtractConfig {
    int radius = 5;
    bool attr_anystr = false;         // AnyStr inside attribute-value DAGs
    size_t oversize_attr = dom::kOversizeAttrLen;
    url_synth::SynthConfig synth;
    // Ranking keys combine into one score; defaults keep the comparison
    // lexicographic: substr count, then no-Right-hop, then hop distance.
    int weight_substr = 1 << 16;
    int weight_right = 1 << 8;
    int weight_dist = 1;
};

/// Attribute predicate whose value is still a version space (all string
/// expressions reproducing the observed attribute value on the example row).
struct DagAttrPred {
    std::string name;
    Dag dag;
};

struct Anchor {
    int id = -1;
    std::string tag;
    std::vector<DagAttrPred> attrs;
    std::vector<CountPred> counts;
    int dom_node = -1;
};

struct Hop {
    int from = -1, to = -1;
    Axis axis = Axis::Child;
    int dist = 1;
};

/// Target-centered recentering of the document: anchors carry node
/// predicates, hops carry axis plus exact distance. Tree-shaped, so every
/// anchor names exactly one grammar path from the target.
struct PredicatesGraph {
    std::vector<Anchor> anchors;
    std::vector<Hop> hops;
    int target = 0;
    int radius = 5;
};

PredicatesGraph build_predicates_graph(const ExtractExample& ex, const ExtractConfig& cfg);
/// Serial reference for the parallel attribute-DAG construction.
PredicatesGraph build_predicates_graph_serial(const ExtractExample& ex, const ExtractConfig& cfg);

/// A path in the predicates graph, target first (the target anchor itself
/// is not a step). Steps hold the anchors' predicate material.
struct GraphPath {
    struct Step {
        std::string tag;
        Axis axis = Axis::Child;
        PosPred pos;
        std::vector<DagAttrPred> attrs;
        std::vector<CountPred> counts;
    };
    std::vector<Step> steps;  // non-empty, grammar-shaped
};

/// One entry of the ranked candidate stream: either a node predicate of the
/// target anchor or a graph path standing for its maximal path predicate.
using Candidate = std::variant<DagAttrPred, CountPred, GraphPath>;

/// All grammar-valid paths of the graph plus the target's own node
/// predicates, ordered by the output-constrained ranking scheme.
std::vector<Candidate> enumerate_candidates(const PredicatesGraph& g, const ExtractConfig& cfg);
std::vector<GraphPath> enumerate_paths(const PredicatesGraph& g);

/// Anchor-wise intersection of two skeleton-equal paths; nullopt when the
/// skeletons differ. Attribute predicates survive only when the intersected
/// DAG still has a source-to-target path; count predicates only when equal;
/// position predicates relax to `<= max` on mismatch.
std::optional<GraphPath> intersect_path(const GraphPath& p, const GraphPath& q);

/// Refines a path against one further example: kept as-is when its maximal
/// predicate already holds at the example target, otherwise intersected
/// with every skeleton-equal path of that example's graph.
std::vector<GraphPath> refine_path(const GraphPath& p, const PredicatesGraph& example_graph,
                                   const ExtractExample& ex, const ExtractConfig& cfg);

extract_dsl::ExtractPred materialize(const Candidate& cand);

struct ExtractLearnResult {
    std::optional<ExtractProgram> program;
    double t_pred_ms = 0;       // predicates-graph construction
    double t_intersect_ms = 0;  // lazy refinement / path intersection
    double t_search_ms = 0;     // ranking, TestNAdd, uniqueness checks
    double total_ms = 0;
};

/// Output-constrained predicate search: iterates ranked candidates, lazily
/// refines against the remaining examples, and accumulates predicates that
/// keep at least one tag-matching node alive on every test document until
/// the program selects exactly the target on every example.
ExtractLearnResult search_best_prog(const PredicatesGraph& g,
                                    const std::vector<ExtractExample>& examples,
                                    const std::vector<TestDoc>& unseen,
                                    const ExtractConfig& cfg);

/// Convenience wrapper: builds the first example's graph and searches.
ExtractLearnResult learn_extract(const std::vector<ExtractExample>& examples,
                                 const std::vector<TestDoc>& unseen, const ExtractConfig& cfg);

/// Post-extraction string transformation (extracted value appended as an
/// extra input column; AnyStr disabled, no oracle).
url_synth::LearnResult learn_post_transform(
    const std::vector<std::pair<InputRow, std::string>>& examples,
    const url_synth::SynthConfig& cfg);

}  // namespace webjoin::extract_synth
