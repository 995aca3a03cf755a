#include "webjoin/dom.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <unordered_set>

#include "json.hpp"

namespace webjoin::dom {

const char* axis_name(Axis a) {
    switch (a) {
        case Axis::Child: return "Child";
        case Axis::Ancestor: return "Ancestor";
        case Axis::Left: return "Left";
        case Axis::Right: return "Right";
    }
    return "?";
}

std::optional<Axis> axis_from_name(const std::string& name) {
    if (name == "Child") return Axis::Child;
    if (name == "Ancestor") return Axis::Ancestor;
    if (name == "Left") return Axis::Left;
    if (name == "Right") return Axis::Right;
    return std::nullopt;
}

const std::string* DomNode::attr(const std::string& name) const {
    for (const auto& [k, v] : attrs)
        if (k == name) return &v;
    return nullptr;
}

DomTree::DomTree(std::vector<DomNode> nodes, int root)
    : nodes_(std::move(nodes)), root_(root) {
    validate();
}

void DomTree::validate() const {
    if (root_ < 0 || static_cast<size_t>(root_) >= nodes_.size())
        throw ParseError("tree", "root id does not resolve");
    if (nodes_[static_cast<size_t>(root_)].parent != -1)
        throw ParseError("node #" + std::to_string(root_), "root has a parent");
    size_t with_parent = 0;
    for (const auto& n : nodes_) {
        if (n.id < 0 || static_cast<size_t>(n.id) >= nodes_.size() ||
            &nodes_[static_cast<size_t>(n.id)] != &n)
            throw ParseError("node #" + std::to_string(n.id), "id out of order");
        if (n.parent != -1) {
            ++with_parent;
            if (n.parent < 0 || static_cast<size_t>(n.parent) >= nodes_.size())
                throw ParseError("node #" + std::to_string(n.id), "dangling parent id");
            const auto& pc = nodes_[static_cast<size_t>(n.parent)].children;
            if (std::count(pc.begin(), pc.end(), n.id) != 1)
                throw ParseError("node #" + std::to_string(n.id),
                                 "not listed exactly once in parent's children");
        }
        if (n.is_text() && !n.children.empty())
            throw ParseError("node #" + std::to_string(n.id), "text node with children");
        for (int c : n.children) {
            if (c < 0 || static_cast<size_t>(c) >= nodes_.size())
                throw ParseError("node #" + std::to_string(n.id), "dangling child id");
            if (nodes_[static_cast<size_t>(c)].parent != n.id)
                throw ParseError("node #" + std::to_string(c), "parent/child mismatch");
        }
    }
    if (with_parent + 1 != nodes_.size())
        throw ParseError("tree", "more than one parentless node");
}

std::vector<int> DomTree::neighbors(int id, Axis axis) const {
    const DomNode& n = node(id);
    std::vector<int> out;
    switch (axis) {
        case Axis::Child:
            out = n.children;
            break;
        case Axis::Ancestor:
            for (int p = n.parent; p != -1; p = node(p).parent) out.push_back(p);
            break;
        case Axis::Left:
        case Axis::Right: {
            if (n.parent == -1) break;
            const auto& sibs = node(n.parent).children;
            auto it = std::find(sibs.begin(), sibs.end(), id);
            size_t pos = static_cast<size_t>(it - sibs.begin());
            if (axis == Axis::Left) {
                for (size_t i = pos; i-- > 0;) out.push_back(sibs[i]);
            } else {
                for (size_t i = pos + 1; i < sibs.size(); ++i) out.push_back(sibs[i]);
            }
            break;
        }
    }
    return out;
}

std::string DomTree::value_of(int id) const {
    const DomNode& n = node(id);
    if (n.is_text()) {
        const std::string* t = n.attr("text");
        return t ? *t : std::string();
    }
    std::string out;
    for (int c : n.children) out += value_of(c);
    return out;
}

// --- JSON ingestion ------------------------------------------------------

namespace {

using json = nlohmann::ordered_json;

void build_from_json(const json& j, int parent, std::vector<DomNode>& nodes) {
    int id = static_cast<int>(nodes.size());
    std::string where = "node #" + std::to_string(id);
    if (!j.is_object()) throw ParseError(where, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() != "tag" && it.key() != "attrs" && it.key() != "children")
            throw ParseError(where, "unknown field '" + it.key() + "'");
    }
    if (!j.contains("tag") || !j["tag"].is_string())
        throw ParseError(where, "missing or non-string 'tag'");

    DomNode n;
    n.id = id;
    n.parent = parent;
    n.tag = j["tag"].get<std::string>();
    std::transform(n.tag.begin(), n.tag.end(), n.tag.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    where = "node #" + std::to_string(id) + " (tag '" + n.tag + "')";

    if (j.contains("attrs")) {
        if (!j["attrs"].is_object()) throw ParseError(where, "'attrs' must be an object");
        for (auto it = j["attrs"].begin(); it != j["attrs"].end(); ++it) {
            if (!it.value().is_string())
                throw ParseError(where, "attribute '" + it.key() + "' must be a string");
            n.attrs.emplace_back(it.key(), it.value().get<std::string>());
        }
    }
    nodes.push_back(std::move(n));

    if (j.contains("children")) {
        if (!j["children"].is_array()) throw ParseError(where, "'children' must be an array");
        for (const auto& cj : j["children"]) {
            if (nodes[static_cast<size_t>(id)].is_text())
                throw ParseError(where, "text node with children");
            int cid = static_cast<int>(nodes.size());
            nodes[static_cast<size_t>(id)].children.push_back(cid);
            build_from_json(cj, id, nodes);
        }
    }
    if (nodes[static_cast<size_t>(id)].is_text() &&
        !nodes[static_cast<size_t>(id)].attr("text"))
        throw ParseError(where, "text node without a 'text' attribute");
}

}  // namespace

DomTree parse_dom_json(const std::string& bytes) {
    json j;
    try {
        j = json::parse(bytes);
    } catch (const json::parse_error& e) {
        throw ParseError("input", e.what());
    }
    std::vector<DomNode> nodes;
    build_from_json(j, -1, nodes);
    return DomTree(std::move(nodes), 0);
}

std::string serialize_dom_json(const DomTree& tree, bool pretty) {
    std::function<json(int)> conv = [&](int id) {
        const DomNode& n = tree.node(id);
        json j;
        j["tag"] = n.tag;
        json attrs = json::object();
        for (const auto& [k, v] : n.attrs) attrs[k] = v;
        j["attrs"] = std::move(attrs);
        json ch = json::array();
        for (int c : n.children) ch.push_back(conv(c));
        j["children"] = std::move(ch);
        return j;
    };
    return pretty ? conv(tree.root()).dump(2) : conv(tree.root()).dump();
}

// --- Minimal HTML ingestion ----------------------------------------------

namespace {

const std::unordered_set<std::string>& void_elements() {
    static const std::unordered_set<std::string> v = {
        "area", "base", "br",    "col",  "embed",  "hr",  "img", "input",
        "link", "meta", "param", "source", "track", "wbr"};
    return v;
}

bool all_space(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c); });
}

struct HtmlScanner {
    const std::string& src;
    size_t pos = 0;
    int line = 1, col = 1;

    explicit HtmlScanner(const std::string& s) : src(s) {}

    bool eof() const { return pos >= src.size(); }
    char peek() const { return src[pos]; }

    char advance() {
        char c = src[pos++];
        if (c == '\n') { ++line; col = 1; } else { ++col; }
        return c;
    }

    std::string at() const {
        return "line " + std::to_string(line) + ", col " + std::to_string(col);
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(at(), msg); }

    void skip_ws() {
        while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) advance();
    }

    std::string read_name() {
        std::string s;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) ||
                          peek() == '-' || peek() == '_'))
            s += static_cast<char>(std::tolower(static_cast<unsigned char>(advance())));
        if (s.empty()) fail("expected a name");
        return s;
    }
};

}  // namespace

DomTree parse_html_min(const std::string& bytes) {
    HtmlScanner sc(bytes);
    std::vector<DomNode> nodes;
    std::vector<int> stack;  // open element ids

    auto add_node = [&](DomNode n) {
        n.id = static_cast<int>(nodes.size());
        n.parent = stack.empty() ? -1 : stack.back();
        if (n.parent != -1) nodes[static_cast<size_t>(n.parent)].children.push_back(n.id);
        else if (!nodes.empty())
            sc.fail("multiple root elements");
        nodes.push_back(std::move(n));
        return nodes.back().id;
    };

    while (!sc.eof()) {
        if (sc.peek() == '<') {
            std::string open_at = sc.at();
            sc.advance();
            if (!sc.eof() && sc.peek() == '!') {  // comment or doctype
                if (bytes.compare(sc.pos, 3, "!--") == 0) {
                    size_t end = bytes.find("-->", sc.pos + 3);
                    if (end == std::string::npos) sc.fail("unterminated comment");
                    while (sc.pos < end + 3) sc.advance();
                } else {
                    while (!sc.eof() && sc.peek() != '>') sc.advance();
                    if (sc.eof()) sc.fail("unterminated declaration");
                    sc.advance();
                }
                continue;
            }
            if (!sc.eof() && sc.peek() == '/') {  // closing tag
                sc.advance();
                std::string name = sc.read_name();
                sc.skip_ws();
                if (sc.eof() || sc.advance() != '>') sc.fail("expected '>'");
                if (stack.empty())
                    throw ParseError(open_at, "closing tag </" + name + "> with no open element");
                const std::string& top = nodes[static_cast<size_t>(stack.back())].tag;
                if (top != name)
                    throw ParseError(open_at, "closing tag </" + name +
                                                  "> does not match open <" + top + ">");
                stack.pop_back();
                continue;
            }
            // opening tag
            DomNode n;
            n.tag = sc.read_name();
            bool self_closed = false;
            while (true) {
                sc.skip_ws();
                if (sc.eof()) sc.fail("unterminated tag <" + n.tag + ">");
                if (sc.peek() == '>') { sc.advance(); break; }
                if (sc.peek() == '/') {
                    sc.advance();
                    if (sc.eof() || sc.advance() != '>') sc.fail("expected '/>'");
                    self_closed = true;
                    break;
                }
                std::string aname = sc.read_name();
                std::string aval;
                sc.skip_ws();
                if (!sc.eof() && sc.peek() == '=') {
                    sc.advance();
                    sc.skip_ws();
                    if (sc.eof() || sc.advance() != '"') sc.fail("attribute value must be double-quoted");
                    while (!sc.eof() && sc.peek() != '"') aval += sc.advance();
                    if (sc.eof()) sc.fail("unterminated attribute value");
                    sc.advance();
                }
                n.attrs.emplace_back(std::move(aname), std::move(aval));
            }
            bool is_void = void_elements().count(n.tag) > 0;
            int id = add_node(std::move(n));
            if (!self_closed && !is_void) stack.push_back(id);
        } else {
            std::string text;
            while (!sc.eof() && sc.peek() != '<') text += sc.advance();
            if (all_space(text)) continue;
            if (stack.empty()) sc.fail("text outside the root element");
            DomNode t;
            t.tag = "text";
            t.attrs.emplace_back("text", std::move(text));
            add_node(std::move(t));
        }
    }
    if (!stack.empty()) {
        const std::string& top = nodes[static_cast<size_t>(stack.back())].tag;
        sc.fail("unclosed element <" + top + ">");
    }
    if (nodes.empty()) throw ParseError("input", "no root element");
    return DomTree(std::move(nodes), 0);
}

}  // namespace webjoin::dom
