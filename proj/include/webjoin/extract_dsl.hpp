#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "webjoin/dom.hpp"
#include "webjoin/url_dsl.hpp"

namespace webjoin::extract_dsl {

using dom::Axis;
using dom::DomTree;
using url_dsl::InputRow;

/// Attribute equality against an input-dependent string expression. With a
/// gap-bearing value the comparison is an anchored pattern match.
struct AttrPred {
    std::string name;
    url_dsl::Predicate value;
    bool operator==(const AttrPred&) const = default;
};

struct CountPred {
    Axis axis = Axis::Child;
    int count = 0;
    bool operator==(const CountPred&) const = default;
};

/// Distance constraint on a path step; `None` places no bound.
struct PosPred {
    enum class Kind { None, Eq, Leq };
    Kind kind = Kind::None;
    int k = 0;  // >= 1 when kind != None
    bool operator==(const PosPred&) const = default;
};

using NodePred = std::variant<AttrPred, CountPred>;

struct PathNode {
    std::string tag;
    Axis axis = Axis::Child;
    PosPred pos;
    std::vector<NodePred> preds;
    bool operator==(const PathNode&) const = default;
};

/// Path shape: optional Ancestor step (which must be followed by a sibling
/// step), optional Left/Right step, then Child steps only.
struct PathPred {
    std::vector<PathNode> nodes;  // non-empty
    bool operator==(const PathPred&) const = default;
};

bool is_valid_path(const PathPred& path);

using ExtractPred = std::variant<AttrPred, CountPred, PathPred>;

struct ExtractProgram {
    std::string tag;
    std::vector<ExtractPred> preds;
    bool operator==(const ExtractProgram&) const = default;
};

bool eval_node_pred(const NodePred& pred, const InputRow& row, const DomTree& tree, int node);

/// Stepwise path evaluation from a start set; returns the surviving node
/// set in document order.
std::vector<int> eval_path(const PathPred& path, const InputRow& row, const DomTree& tree,
                           const std::vector<int>& start);

/// All nodes with the program's tag satisfying every predicate, in document
/// order.
std::vector<int> eval_program(const ExtractProgram& prog, const InputRow& row,
                              const DomTree& tree);

// Canonical rendering, e.g.
//   (td, [(td, Left, [pos == 1])/(text, Child, [attr("text") == Concat(...)])])
std::string render(const PosPred& p);
std::string render(const NodePred& p);
std::string render(const ExtractPred& p);
std::string render(const ExtractProgram& p);

/// Parses the canonical rendering (CLI `apply`, golden tests).
ExtractProgram parse_extract_program(const std::string& text);

}  // namespace webjoin::extract_dsl
