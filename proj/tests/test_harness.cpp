#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "webjoin/harness.hpp"

using namespace webjoin;
using namespace webjoin::harness;
using url_dsl::InputRow;

namespace {

std::filesystem::path corpus_dir() {
    // Tests run from the build tree; the corpus sits next to the sources.
    for (auto p : {std::filesystem::path("../benchmarks"), std::filesystem::path("../../benchmarks"),
                   std::filesystem::path("benchmarks")}) {
        if (std::filesystem::exists(p / "currency.bench.json"))
            return std::filesystem::canonical(p);
    }
    return std::filesystem::path(WEBJOIN_CORPUS);
}

RunConfig serial_config() {
    RunConfig cfg;
    cfg.synth.exec = url_synth::ExecMode::Serial;
    cfg.extract.synth.exec = url_synth::ExecMode::Serial;
    return cfg;
}

}  // namespace

TEST_CASE("load_spec: validation failures") {
    namespace fs = std::filesystem;
    auto dir = fs::temp_directory_path() / "webjoin_spec_test";
    fs::create_directories(dir);
    auto write = [&](const std::string& name, const std::string& body) {
        std::ofstream(dir / name) << body;
        return dir / name;
    };
    CHECK_THROWS_AS(load_spec(write("a.bench.json", "{")), SpecError);
    CHECK_THROWS_AS(load_spec(write("b.bench.json", R"({"name":"x"})")), SpecError);
    // url_task must cover every row.
    CHECK_THROWS_AS(load_spec(write("c.bench.json",
        R"({"name":"x","rows":[["a"],["b"]],"url_task":{"examples":{"0":"u"}}})")), SpecError);
    // extract_task page file must exist.
    CHECK_THROWS_AS(load_spec(write("d.bench.json",
        R"({"name":"x","rows":[["a"]],"extract_task":{"pages":{"0":"missing.html"},"example_targets":{"0":0}}})")),
        SpecError);
    fs::remove_all(dir);
}

TEST_CASE("load_spec and pages from the bundled corpus") {
    auto spec = load_spec(corpus_dir() / "currency.bench.json");
    CHECK(spec.name == "currency");
    CHECK(spec.rows.size() == 6);
    REQUIRE(spec.url_task.has_value());
    CHECK(spec.url_task->truth(0) ==
          "http://www.investing.com/currencies/eur-usd-historical-data");
    CHECK(spec.url_task->candidates_for(0).size() == 3);
    REQUIRE(spec.extract_task.has_value());
    auto page = load_page(spec.dir / spec.extract_task->pages.at(0));
    CHECK(page->value_of(spec.extract_task->example_targets.at(0)) == "1.1105");
}

TEST_CASE("apply_url: candidates vs direct construction") {
    url_dsl::UrlProgram gapless{url_dsl::Predicate{{url_dsl::ConstStrExpr{"u"}}}};
    CHECK(apply_url(gapless, {"r"}, {}) == "u");
    url_dsl::UrlProgram gappy{url_dsl::Predicate{{url_dsl::AnyStrExpr{}}}};
    CHECK(apply_url(gappy, {"r"}, {}) == std::nullopt);  // no oracle, no gaps
    CHECK(apply_url(gappy, {"r"}, {"xy"}) == "xy");
}

TEST_CASE("brute_force_url_oracle: spec examples") {
    UrlOracleBounds bounds;
    bounds.allow_anystr = false;  // consistency would otherwise always hold via a gap
    bounds.max_atoms = 1;         // membership checks; wider bounds explode combinatorially

    auto all = brute_force_url_oracle({"ab"}, "ab", bounds);
    bool has_const = false, has_identity = false;
    for (const auto& p : all) {
        if (p.atoms.size() == 1) {
            if (p.atoms[0] == url_dsl::AtomicExpr{url_dsl::ConstStrExpr{"ab"}}) has_const = true;
            if (p.atoms[0] ==
                url_dsl::AtomicExpr{url_dsl::SubStrExpr{0, url_dsl::Position::constant(0),
                                                        url_dsl::Position::constant(-1),
                                                        url_dsl::CaseMode::Iden}})
                has_identity = true;
        }
    }
    CHECK(has_const);
    CHECK(has_identity);

    // "ba" from "ab" with a single atom: only the constant remains.
    UrlOracleBounds one = bounds;
    one.max_atoms = 1;
    auto ba = brute_force_url_oracle({"ab"}, "ba", one);
    CHECK(!ba.empty());
    for (const auto& p : ba) {
        REQUIRE(p.atoms.size() == 1);
        CHECK(std::holds_alternative<url_dsl::ConstStrExpr>(p.atoms[0]));
    }

    // No constants, no sources: empty.
    UrlOracleBounds none = bounds;
    none.allow_const = false;
    CHECK(brute_force_url_oracle({"x"}, "yz", none).empty());
    CHECK(!brute_force_url_consistent_exists({"x"}, "yz", none));

    // Bounds violations refuse instead of blowing up.
    CHECK_THROWS_AS(brute_force_url_oracle({"x"}, "aaaaaaaaaaaaaaaa", bounds),
                    std::invalid_argument);
}

TEST_CASE("brute_force_extract_oracle: spec examples") {
    ExtractOracleBounds bounds;

    // Two-node tree with a unique text node: (text, {}) is in the set.
    auto tiny = std::make_shared<dom::DomTree>(dom::parse_dom_json(
        R"({"tag":"div","attrs":{},"children":[{"tag":"text","attrs":{"text":"hi"},"children":[]}]})"));
    auto progs = brute_force_extract_oracle({{"r"}, tiny, 1}, bounds);
    bool has_empty = false;
    for (const auto& p : progs)
        if (p.tag == "text" && p.preds.empty()) has_empty = true;
    CHECK(has_empty);

    // Mini table: the enumeration contains the left-sibling date program
    // shape, cross-checked with eval_program.
    auto table = std::make_shared<dom::DomTree>(dom::parse_html_min(
        "<html><tr><td>10-16-2016</td><td>1.1105</td></tr></html>"));
    int rate_td = -1;
    for (const auto& n : table->nodes())
        if (n.tag == "td" && !table->neighbors(n.id, dom::Axis::Left).empty()) rate_td = n.id;
    REQUIRE(rate_td != -1);
    auto table_progs = brute_force_extract_oracle({{"10/16/16"}, table, rate_td}, bounds);
    bool has_currency_shape = false;
    for (const auto& p : table_progs) {
        if (p.tag != "td" || p.preds.size() != 1) continue;
        const auto* path = std::get_if<extract_dsl::PathPred>(&p.preds[0]);
        if (!path || path->nodes.size() != 2) continue;
        if (path->nodes[0].axis == dom::Axis::Left && path->nodes[1].axis == dom::Axis::Child &&
            !path->nodes[1].preds.empty()) {
            has_currency_shape = true;
            auto hits = extract_dsl::eval_program(p, {"10/16/16"}, *table);
            REQUIRE(hits.size() == 1);
            CHECK(hits[0] == rate_td);
        }
    }
    CHECK(has_currency_shape);

    // Twin subtrees with length-1 paths only: nothing separates the targets.
    auto twin = std::make_shared<dom::DomTree>(dom::parse_html_min(
        "<html><div><td>x</td></div><div><td>x</td></div></html>"));
    int first_td = -1;
    for (const auto& n : twin->nodes())
        if (n.tag == "td") { first_td = n.id; break; }
    ExtractOracleBounds short_paths = bounds;
    short_paths.max_path_len = 1;
    CHECK(brute_force_extract_oracle({{"r"}, twin, first_td}, short_paths).empty());

    // Oversize tree refuses.
    ExtractOracleBounds small = bounds;
    small.max_tree_nodes = 2;
    CHECK_THROWS_AS(brute_force_extract_oracle({{"r"}, table, rate_td}, small),
                    std::invalid_argument);
}

TEST_CASE("run_benchmark: currency solves with one example per phase") {
    auto spec = load_spec(corpus_dir() / "currency.bench.json");
    auto reports = run_benchmark(spec, serial_config());
    REQUIRE(reports.size() == 2);
    CHECK(reports[0].phase == "url");
    CHECK(reports[0].success);
    CHECK(reports[0].examples_used == 1);
    CHECK(reports[0].layer == 1);
    CHECK(reports[1].phase == "extract");
    CHECK(reports[1].success);
    CHECK(reports[1].examples_used == 1);
    // Program renderings are parseable.
    CHECK_NOTHROW(url_dsl::parse_url_program(reports[0].program));
    CHECK_NOTHROW(extract_dsl::parse_extract_program(reports[1].program));
}

TEST_CASE("run_benchmark: inconsistent expectations end in a failure report") {
    namespace fs = std::filesystem;
    auto dir = fs::temp_directory_path() / "webjoin_badspec";
    fs::create_directories(dir);
    std::ofstream(dir / "bad.bench.json") <<
        R"({"name":"bad","rows":[["a"],["a"]],
            "url_task":{"examples":{"0":"http://x/a"},"expected":{"1":"http://x/zz"}}})";
    auto spec = load_spec(dir / "bad.bench.json");
    auto reports = run_benchmark(spec, serial_config());
    REQUIRE(reports.size() == 1);
    CHECK(!reports[0].success);
    CHECK(reports[0].examples_used == 2);  // exhausted every row
    fs::remove_all(dir);
}

TEST_CASE("report_json: stable schema") {
    RunReport r;
    r.benchmark = "demo";
    r.phase = "url";
    r.success = true;
    r.examples_used = 1;
    r.layer = 2;
    r.program = "Filter(Concat(ConstStr(\"u\")))";
    std::string json = report_json({r});
    const char* golden = R"json({
  "schema": "webjoin-report/1",
  "benchmarks": [
    {
      "name": "demo",
      "phases": [
        {
          "phase": "url",
          "success": true,
          "examples_used": 1,
          "layer": 2,
          "program": "Filter(Concat(ConstStr(\"u\")))",
          "times_ms": {
            "total": 0.0,
            "t_pred": 0.0,
            "t_intersect": 0.0,
            "t_search": 0.0
          }
        }
      ]
    }
  ]
})json";
    CHECK(json == golden);
}

TEST_CASE("report determinism given fixed config and spec") {
    auto spec = load_spec(corpus_dir() / "stock.bench.json");
    auto a = run_benchmark(spec, serial_config());
    auto b = run_benchmark(spec, serial_config());
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].program == b[i].program);
        CHECK(a[i].examples_used == b[i].examples_used);
        CHECK(a[i].success == b[i].success);
    }
}
