#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace webjoin::dom {

/// Navigation directions shared by the DOM helpers and the extraction DSL.
enum class Axis { Child, Ancestor, Left, Right };

const char* axis_name(Axis a);
std::optional<Axis> axis_from_name(const std::string& name);

/// Thrown by the JSON / HTML ingestion paths. `where` names the offending
/// node or carries a line:column position.
struct ParseError : std::runtime_error {
    ParseError(const std::string& where, const std::string& what)
        : std::runtime_error(where + ": " + what) {}
};

/// One node of a parsed page. Text is reified as a child node with tag
/// "text" and a single attribute "text" holding the content, so DSL paths
/// can treat text like any other attribute lookup.
struct DomNode {
    int id = -1;
    std::string tag;
    std::vector<std::pair<std::string, std::string>> attrs;  // insertion order
    int parent = -1;  // -1 for the root
    std::vector<int> children;

    bool is_text() const { return tag == "text"; }
    const std::string* attr(const std::string& name) const;
};

class DomTree {
public:
    DomTree() = default;
    DomTree(std::vector<DomNode> nodes, int root);

    int root() const { return root_; }
    size_t size() const { return nodes_.size(); }
    const DomNode& node(int id) const { return nodes_.at(static_cast<size_t>(id)); }
    const std::vector<DomNode>& nodes() const { return nodes_; }

    /// Neighbors along `axis`, nearest first. The k-th entry sits at hop
    /// distance k (1-based). Child returns document order; Ancestor walks to
    /// the root; Left/Right walk outward from the node's sibling position.
    std::vector<int> neighbors(int id, Axis axis) const;

    /// Text content of a node: the "text" attribute for text nodes, the
    /// concatenation of descendant text nodes (document order) otherwise.
    std::string value_of(int id) const;

private:
    void validate() const;

    std::vector<DomNode> nodes_;
    int root_ = -1;
};

/// Parses the recursive JSON form: {"tag": ..., "attrs": {...}, "children": [...]}.
/// Node ids are assigned densely in document (pre)order. Rejects unknown
/// fields and text nodes that carry children.
DomTree parse_dom_json(const std::string& bytes);

/// Parses a minimal HTML subset: tags, double-quoted attributes, text and
/// comments. Void elements self-close; whitespace-only text runs are
/// dropped. Unbalanced non-void tags raise ParseError with line/column.
DomTree parse_html_min(const std::string& bytes);

/// Inverse of parse_dom_json (attribute order preserved).
std::string serialize_dom_json(const DomTree& tree, bool pretty = false);

/// Attribute values longer than this are kept in the tree but skipped when
/// building attribute predicates downstream.
inline constexpr size_t kOversizeAttrLen = 200;

}  // namespace webjoin::dom
