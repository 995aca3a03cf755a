#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "webjoin/harness.hpp"

using namespace webjoin;

namespace {

constexpr int kOk = 0;
constexpr int kLearnFailure = 1;
constexpr int kSpecError = 2;

std::vector<int> parse_layers(const std::string& digits) {
    std::vector<int> out;
    for (char c : digits) {
        if (c < '1' || c > '4') throw CLI::ValidationError("--layers expects digits 1-4");
        out.push_back(c - '0');
    }
    return out;
}

harness::BenchmarkSpec load_or_exit(const std::string& path) {
    try {
        return harness::load_spec(path);
    } catch (const std::exception& e) {
        std::cerr << "spec error: " << e.what() << "\n";
        std::exit(kSpecError);
    }
}

int learn_url_cmd(const std::string& spec_path, int kappa, const std::string& layers,
                  bool no_ranking, bool no_anystr) {
    auto spec = load_or_exit(spec_path);
    if (!spec.url_task) {
        std::cerr << "spec error: " << spec.name << " has no url_task\n";
        return kSpecError;
    }
    harness::RunConfig cfg;
    cfg.synth.kappa = kappa;
    cfg.synth.output_constrained = !no_ranking;
    cfg.synth.allow_anystr = !no_anystr;
    cfg.layers = parse_layers(layers);
    auto reports = harness::run_benchmark(
        harness::BenchmarkSpec{spec.name, spec.rows, spec.url_task, {}, {}, spec.dir}, cfg);
    const auto& r = reports.at(0);
    std::cout << harness::report_json(reports) << "\n";
    return r.success ? kOk : kLearnFailure;
}

int learn_extract_cmd(const std::string& spec_path, int radius) {
    auto spec = load_or_exit(spec_path);
    if (!spec.extract_task) {
        std::cerr << "spec error: " << spec.name << " has no extract_task\n";
        return kSpecError;
    }
    harness::RunConfig cfg;
    cfg.extract.radius = radius;
    harness::BenchmarkSpec only{spec.name, spec.rows, {}, spec.extract_task, spec.post_transform,
                                spec.dir};
    std::vector<harness::RunReport> reports;
    try {
        reports = harness::run_benchmark(only, cfg);
    } catch (const std::exception& e) {
        std::cerr << "spec error: " << e.what() << "\n";
        return kSpecError;
    }
    std::cout << harness::report_json(reports) << "\n";
    for (const auto& r : reports)
        if (!r.success) return kLearnFailure;
    return kOk;
}

int run_bench_cmd(const std::string& dir, int jobs, const std::string& report_path) {
    std::vector<harness::RunReport> reports;
    try {
        reports = harness::run_directory(dir, harness::RunConfig{}, jobs);
    } catch (const std::exception& e) {
        std::cerr << "spec error: " << e.what() << "\n";
        return kSpecError;
    }
    std::string json = harness::report_json(reports);
    if (!report_path.empty()) {
        std::ofstream out(report_path);
        out << json << "\n";
    } else {
        std::cout << json << "\n";
    }
    for (const auto& r : reports) {
        std::cerr << r.benchmark << "/" << r.phase << ": " << (r.success ? "ok" : "FAILED")
                  << " (" << r.examples_used << " example"
                  << (r.examples_used == 1 ? "" : "s") << ", " << r.total_ms << " ms)\n";
    }
    for (const auto& r : reports)
        if (!r.success) return kLearnFailure;
    return kOk;
}

int apply_cmd(const std::string& program_path, const std::string& spec_path) {
    std::ifstream in(program_path);
    if (!in) {
        std::cerr << "spec error: cannot open program file " << program_path << "\n";
        return kSpecError;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();

    auto spec = load_or_exit(spec_path);
    bool all_ok = true;
    if (text.rfind("Filter(", 0) == 0) {
        url_dsl::UrlProgram prog;
        try {
            prog = url_dsl::parse_url_program(text);
        } catch (const std::exception& e) {
            std::cerr << "spec error: bad program: " << e.what() << "\n";
            return kSpecError;
        }
        for (size_t r = 0; r < spec.rows.size(); ++r) {
            std::vector<std::string> cands;
            if (spec.url_task) cands = spec.url_task->candidates_for(static_cast<int>(r));
            auto got = harness::apply_url(prog, spec.rows[r], cands);
            std::cout << r << "\t" << (got ? *got : "<none>") << "\n";
            all_ok = all_ok && got.has_value();
        }
    } else {
        extract_dsl::ExtractProgram prog;
        try {
            prog = extract_dsl::parse_extract_program(text);
        } catch (const std::exception& e) {
            std::cerr << "spec error: bad program: " << e.what() << "\n";
            return kSpecError;
        }
        if (!spec.extract_task) {
            std::cerr << "spec error: extract program but no extract_task in spec\n";
            return kSpecError;
        }
        for (size_t r = 0; r < spec.rows.size(); ++r) {
            auto page = harness::load_page(spec.dir /
                                           spec.extract_task->pages.at(static_cast<int>(r)));
            auto hits = extract_dsl::eval_program(prog, spec.rows[r], *page);
            if (hits.empty()) {
                std::cout << r << "\t<none>\n";
                all_ok = false;
            } else {
                std::cout << r << "\t" << page->value_of(hits.front()) << "\n";
            }
        }
    }
    return all_ok ? kOk : kLearnFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Learns URL-generation and web-data-extraction programs from examples"};
    app.require_subcommand(1);

    std::string spec_path, layers = "1234", dir, report_path, program_path;
    int kappa = 10, radius = 5, jobs = 1;
    bool no_ranking = false, no_anystr = false;

    auto* lu = app.add_subcommand("learn-url", "Learn a URL program from a benchmark spec");
    lu->add_option("--spec", spec_path, "benchmark spec (*.bench.json)")->required();
    lu->add_option("--kappa", kappa, "prefix programs kept per DAG vertex");
    lu->add_option("--layers", layers, "layer schedule, e.g. 1234 or 4");
    lu->add_flag("--no-ranking", no_ranking, "disable output-constrained ranking");
    lu->add_flag("--no-anystr", no_anystr, "disable AnyStr (plain string transformations)");

    auto* le = app.add_subcommand("learn-extract", "Learn an extraction program from a spec");
    le->add_option("--spec", spec_path, "benchmark spec (*.bench.json)")->required();
    le->add_option("--radius", radius, "predicates-graph radius");

    auto* rb = app.add_subcommand("run-bench", "Run every *.bench.json under a directory");
    rb->add_option("--dir", dir, "benchmark directory")->required();
    rb->add_option("--jobs", jobs, "parallel benchmark workers");
    rb->add_option("--report", report_path, "write the JSON report here");

    auto* ap = app.add_subcommand("apply", "Apply a rendered program to a spec's rows");
    ap->add_option("--program", program_path, "file holding a canonical program rendering")
        ->required();
    ap->add_option("--spec", spec_path, "benchmark spec (*.bench.json)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (lu->parsed()) return learn_url_cmd(spec_path, kappa, layers, no_ranking, no_anystr);
        if (le->parsed()) return learn_extract_cmd(spec_path, radius);
        if (rb->parsed()) return run_bench_cmd(dir, jobs, report_path);
        if (ap->parsed()) return apply_cmd(program_path, spec_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kSpecError;
    }
    return kOk;
}
