// Compares the OpenMP kernels against their serial references: per-edge
// atomic-expression enumeration (gen_dag) and per-attribute DAG
// construction inside the predicates graph.

#include <benchmark/benchmark.h>

#include <memory>
#include <sstream>

#include "webjoin/extract_synth.hpp"
#include "webjoin/url_synth.hpp"

using namespace webjoin;
using url_synth::ExecMode;

namespace {

const url_dsl::InputRow kRow = {"EUR", "USD", "03, November, 16", "742 17th Street NE,Seattle,WA"};
const std::string kUrl =
    "https://www.investing.com/currencies/eur-usd-historical-data?from=2016-11-03&l/Seattle+WA";

url_synth::SynthConfig synth_cfg(ExecMode mode) {
    url_synth::SynthConfig cfg;
    cfg.exec = mode;
    return cfg;
}

std::shared_ptr<const dom::DomTree> big_page() {
    std::ostringstream html;
    html << "<html><div><table>";
    html << "<tr><td>Date</td><td>Rate</td><td>Open</td></tr>";
    for (int i = 0; i < 18; ++i) {
        html << "<tr><td>November " << (i % 28 + 1) << ", 2016</td><td>1.1" << 100 + i
             << "</td><td>1.0" << 900 + i << "</td></tr>";
    }
    html << "</table></div></html>";
    return std::make_shared<dom::DomTree>(dom::parse_html_min(html.str()));
}

void bm_gen_dag(benchmark::State& state, ExecMode mode) {
    auto cfg = synth_cfg(mode);
    auto gates = url_synth::layer_schedule()[3];  // full layer, densest DAG
    for (auto _ : state) {
        auto dag = url_synth::gen_dag(kRow, kUrl, gates, cfg);
        benchmark::DoNotOptimize(dag.atom_count());
    }
}

void bm_pred_graph(benchmark::State& state, ExecMode mode) {
    auto page = big_page();
    int target = -1;
    for (const auto& n : page->nodes())
        if (n.is_text() && *n.attr("text") == "1.1105") target = n.id;
    extract_synth::ExtractConfig cfg;
    cfg.synth.exec = mode;
    extract_synth::ExtractExample ex{kRow, page, target};
    for (auto _ : state) {
        auto graph = mode == ExecMode::Serial
                         ? extract_synth::build_predicates_graph_serial(ex, cfg)
                         : extract_synth::build_predicates_graph(ex, cfg);
        benchmark::DoNotOptimize(graph.anchors.size());
    }
}

}  // namespace

BENCHMARK_CAPTURE(bm_gen_dag, serial, ExecMode::Serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_gen_dag, openmp, ExecMode::Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_pred_graph, serial, ExecMode::Serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_pred_graph, openmp, ExecMode::Parallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
