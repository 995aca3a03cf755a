#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "webjoin/extract_synth.hpp"
#include "webjoin/url_synth.hpp"

namespace webjoin::harness {

using url_dsl::InputRow;

/// URL phase of a benchmark. `examples` holds the initial example rows;
/// `expected` covers every other row; `candidates` is the file-backed
/// oracle list per row (absent or empty list = direct URL construction).
struct UrlTask {
    std::map<int, std::string> examples;
    std::map<int, std::string> expected;
    std::map<int, std::vector<std::string>> candidates;

    std::optional<std::string> truth(int row) const;
    std::vector<std::string> candidates_for(int row) const;
};

/// Extraction phase. `example_targets` labels the target node for every
/// row (targets are needed when a row gets promoted to an example);
/// rows without an `expected_values` entry are the initial examples.
struct ExtractTask {
    std::map<int, std::string> pages;  // row -> page file, relative to the spec
    std::map<int, int> example_targets;
    std::map<int, std::string> expected_values;
};

struct PostTransformTask {
    std::map<int, std::string> examples;
    std::map<int, std::string> expected;

    std::optional<std::string> truth(int row) const;
};

struct BenchmarkSpec {
    std::string name;
    std::vector<InputRow> rows;
    std::optional<UrlTask> url_task;
    std::optional<ExtractTask> extract_task;
    std::optional<PostTransformTask> post_transform;
    std::filesystem::path dir;  // page paths resolve against this
};

/// Loads a `*.bench.json` file; throws SpecError on malformed input.
struct SpecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
BenchmarkSpec load_spec(const std::filesystem::path& file);

/// Loads a page snapshot (.html via the minimal parser, .json/.dom.json via
/// the JSON reader).
std::shared_ptr<const dom::DomTree> load_page(const std::filesystem::path& file);

struct RunConfig {
    url_synth::SynthConfig synth;
    extract_synth::ExtractConfig extract;
    std::vector<int> layers = {1, 2, 3, 4};
};

struct RunReport {
    std::string benchmark;
    std::string phase;  // "url" | "extract" | "post"
    int examples_used = 0;
    bool success = false;
    std::string program;  // canonical rendering, empty when learning failed
    int layer = 0;        // url/post phases: layer that solved
    double total_ms = 0, t_pred_ms = 0, t_intersect_ms = 0, t_search_ms = 0;
};

/// Runs every phase present in the spec with the incremental protocol:
/// start from the designated examples, learn, apply to all rows, promote
/// the first mismatching row, and stop once everything matches or every
/// row has become an example. Reports the final iteration.
std::vector<RunReport> run_benchmark(const BenchmarkSpec& spec, const RunConfig& cfg);

/// Direct application helper: first matching candidate, or the evaluated
/// literal when the row has no oracle list and the pattern is gap-free.
std::optional<std::string> apply_url(const url_dsl::UrlProgram& prog, const InputRow& row,
                                     const std::vector<std::string>& candidates);

std::string report_json(const std::vector<RunReport>& reports);

/// Runs all `*.bench.json` specs under `dir` (optionally in parallel).
std::vector<RunReport> run_directory(const std::filesystem::path& dir, const RunConfig& cfg,
                                     int jobs = 1);

// --- Brute-force oracles (independent of the synthesis path) ---------------

struct UrlOracleBounds {
    size_t max_output_len = 10;
    int max_atoms = 3;
    int max_token_occurrence = 2;
    bool allow_const = true;
    bool allow_anystr = true;
    bool allow_replace = true;
    size_t max_results = 200000;
};

/// Exhaustive enumeration of bounded predicates consistent with (row, o):
/// every segmentation of o into at most max_atoms parts, every atomic
/// expression reproducing each part under direct evaluation. Throws
/// std::invalid_argument when the bounds are exceeded.
std::vector<url_dsl::Predicate> brute_force_url_oracle(const InputRow& row, const std::string& o,
                                                       const UrlOracleBounds& bounds);

/// Cheap satisfiability probe over the same enumeration (no cartesian
/// expansion); used by the completeness suites.
bool brute_force_url_consistent_exists(const InputRow& row, const std::string& o,
                                       const UrlOracleBounds& bounds);

struct ExtractOracleBounds {
    size_t max_tree_nodes = 15;
    int max_path_len = 3;
    int max_pos = 3;
    size_t max_results = 100000;
};

/// Bounded enumeration of extraction programs whose evaluation is exactly
/// the example target. Programs carry up to two node predicates or a single
/// path predicate (optionally one attribute predicate on its last node).
std::vector<extract_dsl::ExtractProgram> brute_force_extract_oracle(
    const extract_synth::ExtractExample& ex, const ExtractOracleBounds& bounds);

}  // namespace webjoin::harness
