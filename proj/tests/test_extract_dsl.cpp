#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "webjoin/extract_dsl.hpp"

using namespace webjoin;
using namespace webjoin::extract_dsl;
using dom::Axis;
using url_dsl::CaseMode;
using url_dsl::ConstStrExpr;
using url_dsl::Position;
using url_dsl::SubStrExpr;

namespace {

// html/div/table with a header row and a data row holding the date and the
// rate; the extraction target is the rate text under the second data td.
const char* kTableDoc = R"(<html><div><table>
<tr><td>Date</td><td>Rate</td></tr>
<tr><td>10-16-2016</td><td>1.1105</td></tr>
</table></div></html>)";

url_dsl::Predicate const_phi(const std::string& s) {
    return url_dsl::Predicate{{ConstStrExpr{s}}};
}

int find_text(const dom::DomTree& tree, const std::string& value) {
    for (const auto& n : tree.nodes())
        if (n.is_text() && *n.attr("text") == value) return n.id;
    return -1;
}

}  // namespace

TEST_CASE("eval_node_pred: attr and count") {
    auto tree = dom::parse_html_min(kTableDoc);
    int date_text = find_text(tree, "10-16-2016");
    REQUIRE(date_text != -1);
    CHECK(eval_node_pred(NodePred{AttrPred{"text", const_phi("10-16-2016")}}, {"r"}, tree, date_text));
    CHECK(eval_node_pred(NodePred{CountPred{Axis::Child, 0}}, {"r"}, tree, date_text));
    CHECK(!eval_node_pred(NodePred{AttrPred{"missing", const_phi("x")}}, {"r"}, tree, date_text));
    // Gap-bearing value: anchored pattern match.
    url_dsl::Predicate gap{{ConstStrExpr{"10-"}, url_dsl::AnyStrExpr{}}};
    CHECK(eval_node_pred(NodePred{AttrPred{"text", gap}}, {"r"}, tree, date_text));
}

TEST_CASE("eval_path: left sibling at distance 1") {
    auto tree = dom::parse_html_min(kTableDoc);
    int rate_text = find_text(tree, "1.1105");
    int rate_td = tree.node(rate_text).parent;
    PathPred left1{{PathNode{"td", Axis::Left, PosPred{PosPred::Kind::Eq, 1}, {}}}};
    auto hit = eval_path(left1, {"r"}, tree, {rate_td});
    REQUIRE(hit.size() == 1);
    CHECK(tree.value_of(hit[0]) == "10-16-2016");

    // Unbounded position from the last sibling of three returns both left
    // siblings that pass the tag filter.
    auto header = dom::parse_html_min("<tr><td>a</td><td>b</td><td>c</td></tr>");
    int last_td = header.node(header.root()).children.back();
    PathPred all_left{{PathNode{"td", Axis::Left, PosPred{}, {}}}};
    CHECK(eval_path(all_left, {"r"}, header, {last_td}).size() == 2);

    PathPred wrong_tag{{PathNode{"div", Axis::Left, PosPred{}, {}}}};
    CHECK(eval_path(wrong_tag, {"r"}, header, {last_td}).empty());
}

TEST_CASE("eval_program: the currency program selects the date-matched cell") {
    auto tree = dom::parse_html_min(kTableDoc);
    // (td, [(td, Left, [pos == 1])/(text, Child, [attr("text") == <date>])])
    ExtractProgram prog;
    prog.tag = "td";
    PathPred path{{PathNode{"td", Axis::Left, PosPred{PosPred::Kind::Eq, 1}, {}},
                   PathNode{"text", Axis::Child, PosPred{PosPred::Kind::Eq, 1},
                            {AttrPred{"text", const_phi("10-16-2016")}}}}};
    prog.preds.push_back(path);
    auto hits = eval_program(prog, {"10/16/16"}, tree);
    REQUIRE(hits.size() == 1);
    CHECK(tree.value_of(hits[0]) == "1.1105");

    // (html, {}) selects the root.
    ExtractProgram root{"html", {}};
    auto all = eval_program(root, {"r"}, tree);
    REQUIRE(all.size() == 1);
    CHECK(all[0] == tree.root());

    // A failing attribute pattern empties the result.
    ExtractProgram none{"td", {AttrPred{"text", url_dsl::Predicate{{SubStrExpr{
                                   3, Position::constant(0), Position::constant(-1),
                                   CaseMode::Iden}}}}}};
    CHECK(eval_program(none, {"r"}, tree).empty());
}

TEST_CASE("path grammar validation") {
    PathNode anc{"td", Axis::Ancestor, PosPred{PosPred::Kind::Eq, 1}, {}};
    PathNode left{"td", Axis::Left, PosPred{PosPred::Kind::Eq, 1}, {}};
    PathNode child{"text", Axis::Child, PosPred{}, {}};
    CHECK(is_valid_path(PathPred{{child}}));
    CHECK(is_valid_path(PathPred{{left, child, child}}));
    CHECK(is_valid_path(PathPred{{anc, left, child}}));
    CHECK(!is_valid_path(PathPred{{anc}}));              // ancestor needs a sibling
    CHECK(!is_valid_path(PathPred{{anc, child}}));       // ancestor then child
    CHECK(!is_valid_path(PathPred{{child, left}}));      // sibling after child
    CHECK(!is_valid_path(PathPred{{left, anc, child}})); // ancestor not first
}

namespace {

// Independent oracle: per-node re-evaluation of all predicates with a
// naive recursive path walk.
bool naive_holds(const ExtractPred& pred, const url_dsl::InputRow& row, const dom::DomTree& tree,
                 int node);

std::vector<int> naive_walk(const std::vector<PathNode>& nodes, size_t i,
                            const url_dsl::InputRow& row, const dom::DomTree& tree, int from) {
    if (i == nodes.size()) return {from};
    const PathNode& step = nodes[i];
    std::vector<int> out;
    auto neigh = tree.neighbors(from, step.axis);
    for (size_t d = 0; d < neigh.size(); ++d) {
        if (step.pos.kind == PosPred::Kind::Eq && static_cast<int>(d) + 1 != step.pos.k) continue;
        if (step.pos.kind == PosPred::Kind::Leq && static_cast<int>(d) + 1 > step.pos.k) continue;
        int m = neigh[d];
        if (tree.node(m).tag != step.tag) continue;
        bool ok = true;
        for (const auto& p : step.preds)
            if (!eval_node_pred(p, row, tree, m)) { ok = false; break; }
        if (!ok) continue;
        for (int r : naive_walk(nodes, i + 1, row, tree, m)) out.push_back(r);
    }
    return out;
}

bool naive_holds(const ExtractPred& pred, const url_dsl::InputRow& row, const dom::DomTree& tree,
                 int node) {
    if (const auto* path = std::get_if<PathPred>(&pred))
        return !naive_walk(path->nodes, 0, row, tree, node).empty();
    if (const auto* a = std::get_if<AttrPred>(&pred))
        return eval_node_pred(NodePred{*a}, row, tree, node);
    return eval_node_pred(NodePred{std::get<CountPred>(pred)}, row, tree, node);
}

dom::DomTree random_tree(std::mt19937& rng) {
    std::string html = "<html>";
    int elems = std::uniform_int_distribution<int>(1, 6)(rng);
    const char* tags[] = {"div", "td", "span"};
    for (int i = 0; i < elems; ++i) {
        const char* tag = tags[std::uniform_int_distribution<int>(0, 2)(rng)];
        html += "<" + std::string(tag) + ">";
        int texts = std::uniform_int_distribution<int>(0, 2)(rng);
        for (int t = 0; t < texts; ++t)
            html += "<b>v" + std::to_string(std::uniform_int_distribution<int>(0, 4)(rng)) + "</b>";
        html += "</" + std::string(tag) + ">";
    }
    html += "</html>";
    return dom::parse_html_min(html);
}

ExtractProgram random_program(std::mt19937& rng, const dom::DomTree& tree) {
    const char* tags[] = {"div", "td", "span", "b", "text", "html"};
    ExtractProgram prog;
    prog.tag = tags[std::uniform_int_distribution<int>(0, 5)(rng)];
    int npreds = std::uniform_int_distribution<int>(0, 2)(rng);
    for (int i = 0; i < npreds; ++i) {
        switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
            case 0:
                prog.preds.push_back(AttrPred{
                    "text", const_phi("v" + std::to_string(
                                          std::uniform_int_distribution<int>(0, 4)(rng)))});
                break;
            case 1:
                prog.preds.push_back(CountPred{Axis::Child,
                                               std::uniform_int_distribution<int>(0, 3)(rng)});
                break;
            default: {
                PathPred path;
                Axis first[] = {Axis::Left, Axis::Right, Axis::Child};
                Axis ax = first[std::uniform_int_distribution<int>(0, 2)(rng)];
                PosPred pos;
                int kind = std::uniform_int_distribution<int>(0, 2)(rng);
                if (kind == 1) pos = PosPred{PosPred::Kind::Eq,
                                             std::uniform_int_distribution<int>(1, 3)(rng)};
                if (kind == 2) pos = PosPred{PosPred::Kind::Leq,
                                             std::uniform_int_distribution<int>(1, 3)(rng)};
                path.nodes.push_back(PathNode{tags[std::uniform_int_distribution<int>(0, 4)(rng)],
                                              ax, pos, {}});
                if (std::uniform_int_distribution<int>(0, 1)(rng))
                    path.nodes.push_back(PathNode{"text", Axis::Child, PosPred{}, {}});
                prog.preds.push_back(std::move(path));
                (void)tree;
                break;
            }
        }
    }
    return prog;
}

}  // namespace

TEST_CASE("property: eval_program equals the per-node oracle") {
    std::mt19937 rng(77);
    for (int iter = 0; iter < 200; ++iter) {
        auto tree = random_tree(rng);
        auto prog = random_program(rng, tree);
        url_dsl::InputRow row = {"v1"};
        auto fast = eval_program(prog, row, tree);
        std::vector<int> slow;
        for (const auto& n : tree.nodes()) {
            if (n.tag != prog.tag) continue;
            bool ok = true;
            for (const auto& p : prog.preds)
                if (!naive_holds(p, row, tree, n.id)) { ok = false; break; }
            if (ok) slow.push_back(n.id);
        }
        CHECK(fast == slow);
    }
}

TEST_CASE("property: adding a predicate never enlarges the result") {
    std::mt19937 rng(78);
    for (int iter = 0; iter < 200; ++iter) {
        auto tree = random_tree(rng);
        auto prog = random_program(rng, tree);
        url_dsl::InputRow row = {"v2"};
        auto base = eval_program(prog, row, tree);
        auto bigger = prog;
        bigger.preds.push_back(CountPred{Axis::Ancestor,
                                         std::uniform_int_distribution<int>(0, 3)(rng)});
        auto narrowed = eval_program(bigger, row, tree);
        CHECK(narrowed.size() <= base.size());
        for (int id : narrowed) CHECK(std::count(base.begin(), base.end(), id) == 1);
    }
}

TEST_CASE("property: relaxing pos == k to <= k never shrinks eval_path") {
    std::mt19937 rng(79);
    for (int iter = 0; iter < 200; ++iter) {
        auto tree = random_tree(rng);
        url_dsl::InputRow row = {"v0"};
        int k = std::uniform_int_distribution<int>(1, 3)(rng);
        Axis ax = (iter % 2) ? Axis::Left : Axis::Child;
        const char* tag = (iter % 3) ? "b" : "td";
        PathPred eq{{PathNode{tag, ax, PosPred{PosPred::Kind::Eq, k}, {}}}};
        PathPred leq{{PathNode{tag, ax, PosPred{PosPred::Kind::Leq, k}, {}}}};
        std::vector<int> start;
        for (const auto& n : tree.nodes()) start.push_back(n.id);
        auto a = eval_path(eq, row, tree, start);
        auto b = eval_path(leq, row, tree, start);
        for (int id : a) CHECK(std::count(b.begin(), b.end(), id) == 1);
    }
}

TEST_CASE("render and parse round trip") {
    ExtractProgram prog;
    prog.tag = "td";
    prog.preds.push_back(AttrPred{"class", const_phi("rate")});
    prog.preds.push_back(CountPred{Axis::Child, 1});
    PathPred path{{PathNode{"td", Axis::Left, PosPred{PosPred::Kind::Eq, 1}, {}},
                   PathNode{"text", Axis::Child, PosPred{PosPred::Kind::Leq, 2},
                            {AttrPred{"text", const_phi("10-16-2016")},
                             CountPred{Axis::Right, 0}}}}};
    prog.preds.push_back(path);
    std::string text = render(prog);
    CHECK(text ==
          "(td, [[attr(\"class\") == Concat(ConstStr(\"rate\"))], [count(Child) == 1], "
          "[(td, Left, [pos == 1])/(text, Child, [pos <= 2], "
          "[attr(\"text\") == Concat(ConstStr(\"10-16-2016\"))], [count(Right) == 0])]])");
    CHECK(parse_extract_program(text) == prog);
    CHECK(render(parse_extract_program(text)) == text);
}
