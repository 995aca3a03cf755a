#include "webjoin/extract_dsl.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <stdexcept>

namespace webjoin::extract_dsl {

bool is_valid_path(const PathPred& path) {
    if (path.nodes.empty()) return false;
    size_t i = 0;
    if (path.nodes[i].axis == Axis::Ancestor) {
        // An ancestor step must be followed by a sibling step.
        if (path.nodes.size() < 2) return false;
        ++i;
        if (path.nodes[i].axis != Axis::Left && path.nodes[i].axis != Axis::Right) return false;
        ++i;
    } else if (path.nodes[i].axis == Axis::Left || path.nodes[i].axis == Axis::Right) {
        ++i;
    }
    for (; i < path.nodes.size(); ++i)
        if (path.nodes[i].axis != Axis::Child) return false;
    return true;
}

bool eval_node_pred(const NodePred& pred, const InputRow& row, const DomTree& tree, int node) {
    if (const auto* a = std::get_if<AttrPred>(&pred)) {
        const std::string* value = tree.node(node).attr(a->name);
        if (!value) return false;
        auto pattern = url_dsl::eval_predicate(a->value, row);
        if (!pattern) return false;
        return url_dsl::pattern_matches(*pattern, *value);
    }
    const auto& c = std::get<CountPred>(pred);
    return static_cast<int>(tree.neighbors(node, c.axis).size()) == c.count;
}

std::vector<int> eval_path(const PathPred& path, const InputRow& row, const DomTree& tree,
                           const std::vector<int>& start) {
    std::vector<int> current = start;
    for (const auto& step : path.nodes) {
        std::set<int> next;
        for (int n : current) {
            auto neigh = tree.neighbors(n, step.axis);
            size_t lo = 0, hi = neigh.size();
            if (step.pos.kind == PosPred::Kind::Eq) {
                if (step.pos.k < 1 || static_cast<size_t>(step.pos.k) > neigh.size()) continue;
                lo = static_cast<size_t>(step.pos.k - 1);
                hi = lo + 1;
            } else if (step.pos.kind == PosPred::Kind::Leq) {
                hi = std::min(hi, static_cast<size_t>(std::max(step.pos.k, 0)));
            }
            for (size_t i = lo; i < hi; ++i) {
                int m = neigh[i];
                if (tree.node(m).tag != step.tag) continue;
                bool ok = true;
                for (const auto& p : step.preds)
                    if (!eval_node_pred(p, row, tree, m)) { ok = false; break; }
                if (ok) next.insert(m);
            }
        }
        current.assign(next.begin(), next.end());
        if (current.empty()) break;
    }
    return current;
}

std::vector<int> eval_program(const ExtractProgram& prog, const InputRow& row,
                              const DomTree& tree) {
    std::vector<int> out;
    for (const auto& n : tree.nodes()) {
        if (n.tag != prog.tag) continue;
        bool ok = true;
        for (const auto& pred : prog.preds) {
            bool holds;
            if (const auto* path = std::get_if<PathPred>(&pred)) {
                holds = !eval_path(*path, row, tree, {n.id}).empty();
            } else if (const auto* a = std::get_if<AttrPred>(&pred)) {
                holds = eval_node_pred(NodePred{*a}, row, tree, n.id);
            } else {
                holds = eval_node_pred(NodePred{std::get<CountPred>(pred)}, row, tree, n.id);
            }
            if (!holds) { ok = false; break; }
        }
        if (ok) out.push_back(n.id);
    }
    return out;
}

// --- Rendering ---------------------------------------------------------------

std::string render(const PosPred& p) {
    switch (p.kind) {
        case PosPred::Kind::None: return "";
        case PosPred::Kind::Eq: return "[pos == " + std::to_string(p.k) + "]";
        case PosPred::Kind::Leq: return "[pos <= " + std::to_string(p.k) + "]";
    }
    return "";
}

namespace {

std::string render_node(const PathNode& n) {
    std::string out = "(" + n.tag + ", " + dom::axis_name(n.axis);
    if (n.pos.kind != PosPred::Kind::None) out += ", " + render(n.pos);
    for (const auto& p : n.preds) out += ", " + render(p);
    return out + ")";
}

}  // namespace

std::string render(const NodePred& p) {
    if (const auto* a = std::get_if<AttrPred>(&p))
        return "[attr(\"" + a->name + "\") == " + url_dsl::render(a->value) + "]";
    const auto& c = std::get<CountPred>(p);
    return "[count(" + std::string(dom::axis_name(c.axis)) + ") == " + std::to_string(c.count) + "]";
}

std::string render(const ExtractPred& p) {
    if (const auto* path = std::get_if<PathPred>(&p)) {
        std::string out = "[";
        for (size_t i = 0; i < path->nodes.size(); ++i) {
            if (i) out += "/";
            out += render_node(path->nodes[i]);
        }
        return out + "]";
    }
    if (const auto* a = std::get_if<AttrPred>(&p)) return render(NodePred{*a});
    return render(NodePred{std::get<CountPred>(p)});
}

std::string render(const ExtractProgram& p) {
    std::string out = "(" + p.tag + ", [";
    for (size_t i = 0; i < p.preds.size(); ++i) {
        if (i) out += ", ";
        out += render(p.preds[i]);
    }
    return out + "])";
}

// --- Parsing -----------------------------------------------------------------

namespace {

struct Cursor {
    const std::string& s;
    size_t pos = 0;

    void ws() { while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos; }

    bool try_eat(const std::string& t) {
        ws();
        if (s.compare(pos, t.size(), t) == 0) { pos += t.size(); return true; }
        return false;
    }

    void eat(const std::string& t) {
        if (!try_eat(t))
            throw std::runtime_error("expected '" + t + "' at offset " + std::to_string(pos));
    }

    bool peek(const std::string& t) {
        ws();
        return s.compare(pos, t.size(), t) == 0;
    }

    std::string ident() {
        ws();
        size_t start = pos;
        while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_' ||
                                  s[pos] == '-'))
            ++pos;
        if (start == pos) throw std::runtime_error("expected a name at offset " + std::to_string(start));
        return s.substr(start, pos - start);
    }

    int integer() {
        ws();
        size_t start = pos;
        if (pos < s.size() && s[pos] == '-') ++pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (start == pos) throw std::runtime_error("expected an integer at offset " + std::to_string(start));
        return std::stoi(s.substr(start, pos - start));
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

    // Balanced slice up to the matching close of an already-consumed open.
    std::string until_balanced(char open, char close) {
        int depth = 1;
        size_t start = pos;
        bool in_str = false;
        while (pos < s.size()) {
            char c = s[pos];
            if (in_str) {
                if (c == '\\') ++pos;
                else if (c == '"') in_str = false;
            } else if (c == '"') {
                in_str = true;
            } else if (c == open) {
                ++depth;
            } else if (c == close) {
                if (--depth == 0) break;
            }
            ++pos;
        }
        if (depth != 0) throw std::runtime_error("unbalanced brackets in program text");
        return s.substr(start, pos - start);
    }
};

Axis parse_axis(const std::string& name) {
    auto a = dom::axis_from_name(name);
    if (!a) throw std::runtime_error("unknown axis '" + name + "'");
    return *a;
}

NodePred parse_node_pred(Cursor& c) {
    c.eat("[");
    if (c.try_eat("attr")) {
        c.eat("(");
        std::string name = c.string_lit();
        c.eat(")");
        c.eat("==");
        std::string phi = c.until_balanced('[', ']');
        c.eat("]");
        return AttrPred{std::move(name), url_dsl::parse_predicate(phi)};
    }
    c.eat("count");
    c.eat("(");
    Axis axis = parse_axis(c.ident());
    c.eat(")");
    c.eat("==");
    int k = c.integer();
    c.eat("]");
    return CountPred{axis, k};
}

PathNode parse_path_node(Cursor& c) {
    PathNode n;
    c.eat("(");
    n.tag = c.ident();
    c.eat(",");
    n.axis = parse_axis(c.ident());
    while (c.try_eat(",")) {
        if (c.peek("[pos")) {
            c.eat("[pos");
            if (c.try_eat("==")) n.pos = PosPred{PosPred::Kind::Eq, c.integer()};
            else { c.eat("<="); n.pos = PosPred{PosPred::Kind::Leq, c.integer()}; }
            c.eat("]");
        } else {
            n.preds.push_back(parse_node_pred(c));
        }
    }
    c.eat(")");
    return n;
}

ExtractPred parse_pred(Cursor& c) {
    if (c.peek("[attr") || c.peek("[count")) {
        NodePred np = parse_node_pred(c);
        if (auto* a = std::get_if<AttrPred>(&np)) return ExtractPred{std::move(*a)};
        return ExtractPred{std::get<CountPred>(np)};
    }
    c.eat("[");
    PathPred path;
    path.nodes.push_back(parse_path_node(c));
    while (c.try_eat("/")) path.nodes.push_back(parse_path_node(c));
    c.eat("]");
    if (!is_valid_path(path)) throw std::runtime_error("path violates the grammar");
    return ExtractPred{std::move(path)};
}

}  // namespace

ExtractProgram parse_extract_program(const std::string& text) {
    Cursor c{text};
    ExtractProgram p;
    c.eat("(");
    p.tag = c.ident();
    c.eat(",");
    c.eat("[");
    c.ws();
    if (!c.peek("]")) {
        p.preds.push_back(parse_pred(c));
        while (c.try_eat(",")) p.preds.push_back(parse_pred(c));
    }
    c.eat("]");
    c.eat(")");
    c.ws();
    if (c.pos != text.size()) throw std::runtime_error("trailing characters after program");
    return p;
}

}  // namespace webjoin::extract_dsl
