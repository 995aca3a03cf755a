#include "webjoin/harness.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <future>
#include <set>
#include <sstream>

#include "json.hpp"

namespace webjoin::harness {

using json = nlohmann::ordered_json;
using extract_synth::ExtractExample;
using extract_synth::TestDoc;
using url_synth::UnseenInput;
using url_synth::UrlExample;

std::optional<std::string> UrlTask::truth(int row) const {
    if (auto it = examples.find(row); it != examples.end()) return it->second;
    if (auto it = expected.find(row); it != expected.end()) return it->second;
    return std::nullopt;
}

std::vector<std::string> UrlTask::candidates_for(int row) const {
    if (auto it = candidates.find(row); it != candidates.end()) return it->second;
    return {};
}

std::optional<std::string> PostTransformTask::truth(int row) const {
    if (auto it = examples.find(row); it != examples.end()) return it->second;
    if (auto it = expected.find(row); it != expected.end()) return it->second;
    return std::nullopt;
}

// --- Spec loading ------------------------------------------------------------

namespace {

std::string slurp(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw SpecError("cannot open " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<int, std::string> string_map(const json& j, const std::string& what) {
    std::map<int, std::string> out;
    if (!j.is_object()) throw SpecError(what + " must be an object keyed by row index");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!it.value().is_string()) throw SpecError(what + "[" + it.key() + "] must be a string");
        out[std::stoi(it.key())] = it.value().get<std::string>();
    }
    return out;
}

std::map<int, int> int_map(const json& j, const std::string& what) {
    std::map<int, int> out;
    if (!j.is_object()) throw SpecError(what + " must be an object keyed by row index");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!it.value().is_number_integer())
            throw SpecError(what + "[" + it.key() + "] must be an integer");
        out[std::stoi(it.key())] = it.value().get<int>();
    }
    return out;
}

}  // namespace

BenchmarkSpec load_spec(const std::filesystem::path& file) {
    json j;
    try {
        j = json::parse(slurp(file));
    } catch (const json::parse_error& e) {
        throw SpecError(file.string() + ": " + e.what());
    }
    BenchmarkSpec spec;
    spec.dir = file.parent_path();
    if (!j.contains("name") || !j["name"].is_string())
        throw SpecError(file.string() + ": missing benchmark name");
    spec.name = j["name"].get<std::string>();
    if (!j.contains("rows") || !j["rows"].is_array() || j["rows"].empty())
        throw SpecError(spec.name + ": missing input rows");
    for (const auto& row : j["rows"]) {
        InputRow cells;
        for (const auto& c : row) {
            if (!c.is_string()) throw SpecError(spec.name + ": row cells must be strings");
            cells.push_back(c.get<std::string>());
        }
        if (cells.empty()) throw SpecError(spec.name + ": empty input row");
        spec.rows.push_back(std::move(cells));
    }
    int nrows = static_cast<int>(spec.rows.size());
    auto check_row = [&](int r, const std::string& what) {
        if (r < 0 || r >= nrows)
            throw SpecError(spec.name + ": " + what + " references row " + std::to_string(r));
    };

    if (j.contains("url_task")) {
        const auto& t = j["url_task"];
        UrlTask task;
        task.examples = string_map(t.at("examples"), spec.name + ".url_task.examples");
        if (t.contains("expected"))
            task.expected = string_map(t["expected"], spec.name + ".url_task.expected");
        if (t.contains("candidates")) {
            for (auto it = t["candidates"].begin(); it != t["candidates"].end(); ++it) {
                std::vector<std::string> list;
                for (const auto& c : it.value()) list.push_back(c.get<std::string>());
                task.candidates[std::stoi(it.key())] = std::move(list);
            }
        }
        if (task.examples.empty()) throw SpecError(spec.name + ": url_task without examples");
        for (const auto& [r, _] : task.examples) check_row(r, "url_task.examples");
        for (const auto& [r, _] : task.expected) check_row(r, "url_task.expected");
        for (int r = 0; r < nrows; ++r)
            if (!task.truth(r))
                throw SpecError(spec.name + ": url_task misses a URL for row " + std::to_string(r));
        spec.url_task = std::move(task);
    }

    if (j.contains("extract_task")) {
        const auto& t = j["extract_task"];
        ExtractTask task;
        task.pages = string_map(t.at("pages"), spec.name + ".extract_task.pages");
        task.example_targets = int_map(t.at("example_targets"), spec.name + ".extract_task.example_targets");
        if (t.contains("expected_values"))
            task.expected_values = string_map(t["expected_values"], spec.name + ".extract_task.expected_values");
        for (int r = 0; r < nrows; ++r) {
            if (!task.pages.count(r))
                throw SpecError(spec.name + ": extract_task misses a page for row " + std::to_string(r));
            if (!task.example_targets.count(r))
                throw SpecError(spec.name + ": extract_task misses a target for row " + std::to_string(r));
            if (!std::filesystem::exists(spec.dir / task.pages[r]))
                throw SpecError(spec.name + ": page file not found: " + task.pages[r]);
        }
        spec.extract_task = std::move(task);
    }

    if (j.contains("post_transform")) {
        const auto& t = j["post_transform"];
        PostTransformTask task;
        task.examples = string_map(t.at("examples"), spec.name + ".post_transform.examples");
        if (t.contains("expected"))
            task.expected = string_map(t["expected"], spec.name + ".post_transform.expected");
        if (!spec.extract_task)
            throw SpecError(spec.name + ": post_transform requires extract_task");
        for (int r = 0; r < nrows; ++r)
            if (!task.truth(r))
                throw SpecError(spec.name + ": post_transform misses row " + std::to_string(r));
        spec.post_transform = std::move(task);
    }
    return spec;
}

std::shared_ptr<const dom::DomTree> load_page(const std::filesystem::path& file) {
    std::string bytes = slurp(file);
    auto ext = file.extension().string();
    if (ext == ".html" || ext == ".htm")
        return std::make_shared<dom::DomTree>(dom::parse_html_min(bytes));
    return std::make_shared<dom::DomTree>(dom::parse_dom_json(bytes));
}

// --- Phase runners -----------------------------------------------------------

std::optional<std::string> apply_url(const url_dsl::UrlProgram& prog, const InputRow& row,
                                     const std::vector<std::string>& candidates) {
    if (!candidates.empty()) return url_dsl::run_filter(prog, row, candidates);
    auto pattern = url_dsl::eval_predicate(prog.pred, row);
    if (!pattern || pattern->has_gap()) return std::nullopt;
    std::string out;
    for (const auto& seg : pattern->segments) out += seg.literal;
    return out;
}

namespace {

RunReport run_url_phase(const BenchmarkSpec& spec, const RunConfig& cfg) {
    const UrlTask& task = *spec.url_task;
    RunReport report;
    report.benchmark = spec.name;
    report.phase = "url";

    int nrows = static_cast<int>(spec.rows.size());
    std::set<int> example_rows;
    example_rows.insert(task.examples.begin()->first);

    while (true) {
        std::vector<UrlExample> examples;
        std::vector<UnseenInput> unseen;
        for (int r = 0; r < nrows; ++r) {
            if (example_rows.count(r))
                examples.push_back(UrlExample{spec.rows[static_cast<size_t>(r)], *task.truth(r),
                                              task.candidates_for(r)});
            else
                unseen.push_back(UnseenInput{spec.rows[static_cast<size_t>(r)],
                                             task.candidates_for(r)});
        }
        auto res = url_synth::learn_url(examples, unseen, cfg.synth, cfg.layers);

        report.examples_used = static_cast<int>(example_rows.size());
        report.layer = res.layer;
        report.total_ms = res.total_ms;
        report.t_pred_ms = report.t_intersect_ms = report.t_search_ms = 0;
        for (const auto& s : res.stats) {
            report.t_pred_ms += s.gen_ms;
            report.t_intersect_ms += s.intersect_ms;
            report.t_search_ms += s.search_ms;
        }
        report.program = res.program ? url_dsl::render(*res.program) : "";

        int first_mismatch = -1;
        if (res.program) {
            for (int r = 0; r < nrows; ++r) {
                auto got = apply_url(*res.program, spec.rows[static_cast<size_t>(r)],
                                     task.candidates_for(r));
                if (!got || *got != *task.truth(r)) { first_mismatch = r; break; }
            }
            if (first_mismatch == -1) {
                report.success = true;
                return report;
            }
        }
        // Promote the first mismatching row (or the first non-example row
        // when learning failed or the mismatch is already an example).
        int promote = -1;
        if (first_mismatch != -1 && !example_rows.count(first_mismatch)) promote = first_mismatch;
        else
            for (int r = 0; r < nrows && promote == -1; ++r)
                if (!example_rows.count(r)) promote = r;
        if (promote == -1) {
            report.success = false;
            return report;
        }
        example_rows.insert(promote);
    }
}

struct PageCache {
    const BenchmarkSpec& spec;
    std::map<int, std::shared_ptr<const dom::DomTree>> pages;

    std::shared_ptr<const dom::DomTree> page(int row) {
        auto it = pages.find(row);
        if (it != pages.end()) return it->second;
        auto tree = load_page(spec.dir / spec.extract_task->pages.at(row));
        int target = spec.extract_task->example_targets.at(row);
        if (target < 0 || static_cast<size_t>(target) >= tree->size())
            throw SpecError(spec.name + ": target id out of range for row " + std::to_string(row));
        pages[row] = tree;
        return tree;
    }
};

std::string extract_truth(const BenchmarkSpec& spec, PageCache& cache, int row) {
    const ExtractTask& task = *spec.extract_task;
    if (auto it = task.expected_values.find(row); it != task.expected_values.end())
        return it->second;
    return cache.page(row)->value_of(task.example_targets.at(row));
}

RunReport run_extract_phase(const BenchmarkSpec& spec, const RunConfig& cfg, PageCache& cache) {
    const ExtractTask& task = *spec.extract_task;
    RunReport report;
    report.benchmark = spec.name;
    report.phase = "extract";

    int nrows = static_cast<int>(spec.rows.size());
    std::set<int> example_rows;
    for (int r = 0; r < nrows; ++r)
        if (!task.expected_values.count(r)) example_rows.insert(r);
    if (example_rows.empty()) example_rows.insert(0);

    while (true) {
        std::vector<ExtractExample> examples;
        std::vector<TestDoc> unseen;
        for (int r = 0; r < nrows; ++r) {
            if (example_rows.count(r))
                examples.push_back(ExtractExample{spec.rows[static_cast<size_t>(r)], cache.page(r),
                                                  task.example_targets.at(r)});
            else
                unseen.push_back(TestDoc{spec.rows[static_cast<size_t>(r)], cache.page(r)});
        }
        auto res = extract_synth::learn_extract(examples, unseen, cfg.extract);

        report.examples_used = static_cast<int>(example_rows.size());
        report.total_ms = res.total_ms;
        report.t_pred_ms = res.t_pred_ms;
        report.t_intersect_ms = res.t_intersect_ms;
        report.t_search_ms = res.t_search_ms;
        report.program = res.program ? extract_dsl::render(*res.program) : "";

        int first_mismatch = -1;
        if (res.program) {
            for (int r = 0; r < nrows; ++r) {
                auto hits = extract_dsl::eval_program(*res.program,
                                                      spec.rows[static_cast<size_t>(r)],
                                                      *cache.page(r));
                std::optional<std::string> got;
                if (!hits.empty()) got = cache.page(r)->value_of(hits.front());
                if (!got || *got != extract_truth(spec, cache, r)) { first_mismatch = r; break; }
            }
            if (first_mismatch == -1) {
                report.success = true;
                return report;
            }
        }
        int promote = -1;
        if (first_mismatch != -1 && !example_rows.count(first_mismatch)) promote = first_mismatch;
        else
            for (int r = 0; r < nrows && promote == -1; ++r)
                if (!example_rows.count(r)) promote = r;
        if (promote == -1) {
            report.success = false;
            return report;
        }
        example_rows.insert(promote);
    }
}

RunReport run_post_phase(const BenchmarkSpec& spec, const RunConfig& cfg, PageCache& cache) {
    const PostTransformTask& task = *spec.post_transform;
    RunReport report;
    report.benchmark = spec.name;
    report.phase = "post";

    int nrows = static_cast<int>(spec.rows.size());
    auto extended_row = [&](int r) {
        InputRow row = spec.rows[static_cast<size_t>(r)];
        row.push_back(cache.page(r)->value_of(spec.extract_task->example_targets.at(r)));
        return row;
    };

    std::set<int> example_rows;
    for (const auto& [r, _] : task.examples) { example_rows.insert(r); break; }
    if (example_rows.empty()) example_rows.insert(0);

    while (true) {
        std::vector<std::pair<InputRow, std::string>> examples;
        for (int r : example_rows) examples.emplace_back(extended_row(r), *task.truth(r));
        auto res = extract_synth::learn_post_transform(examples, cfg.synth);

        report.examples_used = static_cast<int>(example_rows.size());
        report.layer = res.layer;
        report.total_ms = res.total_ms;
        report.t_pred_ms = report.t_intersect_ms = report.t_search_ms = 0;
        for (const auto& s : res.stats) {
            report.t_pred_ms += s.gen_ms;
            report.t_intersect_ms += s.intersect_ms;
            report.t_search_ms += s.search_ms;
        }
        report.program = res.program ? url_dsl::render(*res.program) : "";

        int first_mismatch = -1;
        if (res.program) {
            for (int r = 0; r < nrows; ++r) {
                auto got = apply_url(*res.program, extended_row(r), {});
                if (!got || *got != *task.truth(r)) { first_mismatch = r; break; }
            }
            if (first_mismatch == -1) {
                report.success = true;
                return report;
            }
        }
        int promote = -1;
        if (first_mismatch != -1 && !example_rows.count(first_mismatch)) promote = first_mismatch;
        else
            for (int r = 0; r < nrows && promote == -1; ++r)
                if (!example_rows.count(r)) promote = r;
        if (promote == -1) {
            report.success = false;
            return report;
        }
        example_rows.insert(promote);
    }
}

}  // namespace

std::vector<RunReport> run_benchmark(const BenchmarkSpec& spec, const RunConfig& cfg) {
    std::vector<RunReport> reports;
    if (spec.url_task) reports.push_back(run_url_phase(spec, cfg));
    if (spec.extract_task) {
        PageCache cache{spec, {}};
        reports.push_back(run_extract_phase(spec, cfg, cache));
        if (spec.post_transform) reports.push_back(run_post_phase(spec, cfg, cache));
    }
    return reports;
}

std::string report_json(const std::vector<RunReport>& reports) {
    json out;
    out["schema"] = "webjoin-report/1";
    json benches = json::array();
    // Group phases by benchmark, preserving order.
    std::vector<std::string> order;
    std::map<std::string, json> grouped;
    for (const auto& r : reports) {
        if (!grouped.count(r.benchmark)) {
            order.push_back(r.benchmark);
            grouped[r.benchmark] = json{{"name", r.benchmark}, {"phases", json::array()}};
        }
        json phase;
        phase["phase"] = r.phase;
        phase["success"] = r.success;
        phase["examples_used"] = r.examples_used;
        phase["layer"] = r.layer;
        phase["program"] = r.program;
        phase["times_ms"] = json{{"total", r.total_ms},
                                 {"t_pred", r.t_pred_ms},
                                 {"t_intersect", r.t_intersect_ms},
                                 {"t_search", r.t_search_ms}};
        grouped[r.benchmark]["phases"].push_back(std::move(phase));
    }
    for (const auto& name : order) benches.push_back(grouped[name]);
    out["benchmarks"] = std::move(benches);
    return out.dump(2);
}

std::vector<RunReport> run_directory(const std::filesystem::path& dir, const RunConfig& cfg,
                                     int jobs) {
    std::vector<std::filesystem::path> specs;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        auto name = entry.path().filename().string();
        if (name.size() > 11 && name.substr(name.size() - 11) == ".bench.json")
            specs.push_back(entry.path());
    }
    std::sort(specs.begin(), specs.end());

    std::vector<std::vector<RunReport>> partial(specs.size());
    if (jobs <= 1) {
        for (size_t i = 0; i < specs.size(); ++i)
            partial[i] = run_benchmark(load_spec(specs[i]), cfg);
    } else {
        std::vector<std::future<std::vector<RunReport>>> futures;
        futures.reserve(specs.size());
        for (const auto& path : specs)
            futures.push_back(std::async(std::launch::async, [path, &cfg]() {
                return run_benchmark(load_spec(path), cfg);
            }));
        for (size_t i = 0; i < futures.size(); ++i) partial[i] = futures[i].get();
    }
    std::vector<RunReport> out;
    for (auto& p : partial) out.insert(out.end(), p.begin(), p.end());
    return out;
}

// --- Brute-force oracles -------------------------------------------------------

namespace {

using url_dsl::AtomicExpr;
using url_dsl::Position;
using url_dsl::Token;

std::vector<Position> all_positions(const std::string& cell, int max_k) {
    std::vector<Position> out;
    int len = static_cast<int>(cell.size());
    for (int k = -len - 1; k <= len; ++k) out.push_back(Position::constant(k));
    std::vector<Token> vocab = {Token::of(url_dsl::TokenClass::Caps),
                                Token::of(url_dsl::TokenClass::ProperCase),
                                Token::of(url_dsl::TokenClass::Lowercase),
                                Token::of(url_dsl::TokenClass::Digits),
                                Token::of(url_dsl::TokenClass::Alphabets),
                                Token::of(url_dsl::TokenClass::AlphaNum)};
    for (const char* d : {" ", ",", "-", "_", "/", ".", ":", "#", "+", "&", "="})
        vocab.push_back(Token::lit(d));
    for (const auto& t : vocab) {
        for (int k = 1; k <= max_k; ++k) {
            out.push_back(Position::of(t, k, url_dsl::Dir::Start));
            out.push_back(Position::of(t, k, url_dsl::Dir::End));
            out.push_back(Position::of(t, -k, url_dsl::Dir::Start));
            out.push_back(Position::of(t, -k, url_dsl::Dir::End));
        }
    }
    return out;
}

// Atoms reproducing `part` on `row`, by direct evaluation of every bounded
// parameter combination.
std::vector<AtomicExpr> atoms_for_part(const InputRow& row, const std::string& part,
                                       const UrlOracleBounds& bounds) {
    std::vector<AtomicExpr> out;
    if (bounds.allow_const) out.push_back(url_dsl::ConstStrExpr{part});
    if (bounds.allow_anystr) out.push_back(url_dsl::AnyStrExpr{});
    const std::array<url_dsl::CaseMode, 4> cases = {url_dsl::CaseMode::Lower, url_dsl::CaseMode::Upper,
                                                    url_dsl::CaseMode::Prop, url_dsl::CaseMode::Iden};
    const std::vector<std::string> delims = {" ", "-", "_", "#", "+"};
    for (size_t col = 0; col < row.size(); ++col) {
        auto positions = all_positions(row[col], bounds.max_token_occurrence);
        for (const auto& pl : positions) {
            for (const auto& pr : positions) {
                for (auto mode : cases) {
                    url_dsl::SubStrExpr sub{static_cast<int>(col), pl, pr, mode};
                    auto v = url_dsl::eval_atomic(AtomicExpr{sub}, row);
                    if (v && !v->gap && v->literal == part) out.push_back(sub);
                    if (!bounds.allow_replace) continue;
                    for (const auto& s1 : delims) {
                        for (const auto& s2 : delims) {
                            if (s1 == s2) continue;
                            url_dsl::ReplaceExpr rep{static_cast<int>(col), pl, pr, mode, s1, s2};
                            auto rv = url_dsl::eval_atomic(AtomicExpr{rep}, row);
                            if (rv && !rv->gap && rv->literal == part) out.push_back(rep);
                        }
                    }
                }
            }
        }
    }
    return out;
}

// Splits of o into 1..max_atoms non-empty parts, invoking `fn` per split.
template <typename Fn>
void for_each_split(const std::string& o, int max_atoms, Fn&& fn) {
    std::vector<std::string> parts;
    std::function<void(size_t)> rec = [&](size_t from) {
        if (from == o.size()) {
            if (!parts.empty()) fn(parts);
            return;
        }
        if (static_cast<int>(parts.size()) == max_atoms) return;
        for (size_t to = from + 1; to <= o.size(); ++to) {
            parts.push_back(o.substr(from, to - from));
            rec(to);
            parts.pop_back();
        }
    };
    rec(0);
}

}  // namespace

std::vector<url_dsl::Predicate> brute_force_url_oracle(const InputRow& row, const std::string& o,
                                                       const UrlOracleBounds& bounds) {
    if (o.size() > bounds.max_output_len)
        throw std::invalid_argument("brute_force_url_oracle: output exceeds bounds");
    std::vector<url_dsl::Predicate> results;
    for_each_split(o, bounds.max_atoms, [&](const std::vector<std::string>& parts) {
        std::vector<std::vector<AtomicExpr>> options;
        for (const auto& part : parts) {
            options.push_back(atoms_for_part(row, part, bounds));
            if (options.back().empty()) return;
        }
        std::vector<size_t> idx(options.size(), 0);
        while (true) {
            url_dsl::Predicate pred;
            for (size_t i = 0; i < options.size(); ++i) pred.atoms.push_back(options[i][idx[i]]);
            results.push_back(std::move(pred));
            if (results.size() > bounds.max_results)
                throw std::invalid_argument("brute_force_url_oracle: result cap exceeded");
            size_t i = 0;
            for (; i < idx.size(); ++i) {
                if (++idx[i] < options[i].size()) break;
                idx[i] = 0;
            }
            if (i == idx.size()) break;
        }
    });
    return results;
}

bool brute_force_url_consistent_exists(const InputRow& row, const std::string& o,
                                       const UrlOracleBounds& bounds) {
    if (o.size() > bounds.max_output_len)
        throw std::invalid_argument("brute_force_url_consistent_exists: output exceeds bounds");
    bool found = false;
    for_each_split(o, bounds.max_atoms, [&](const std::vector<std::string>& parts) {
        if (found) return;
        for (const auto& part : parts)
            if (atoms_for_part(row, part, bounds).empty()) return;
        found = true;
    });
    return found;
}

namespace {

using extract_dsl::AttrPred;
using extract_dsl::CountPred;
using extract_dsl::ExtractPred;
using extract_dsl::ExtractProgram;
using extract_dsl::PathNode;
using extract_dsl::PathPred;
using extract_dsl::PosPred;

std::vector<url_dsl::Predicate> attr_value_exprs(const InputRow& row, const std::string& value) {
    std::vector<url_dsl::Predicate> out;
    out.push_back(url_dsl::Predicate{{url_dsl::ConstStrExpr{value}}});
    for (size_t col = 0; col < row.size(); ++col) {
        for (auto mode : {url_dsl::CaseMode::Iden, url_dsl::CaseMode::Lower, url_dsl::CaseMode::Upper,
                          url_dsl::CaseMode::Prop}) {
            if (url_dsl::to_case(row[col], mode) == value)
                out.push_back(url_dsl::Predicate{{url_dsl::SubStrExpr{
                    static_cast<int>(col), Position::constant(0), Position::constant(-1), mode}}});
        }
    }
    return out;
}

}  // namespace

std::vector<ExtractProgram> brute_force_extract_oracle(const extract_synth::ExtractExample& ex,
                                                       const ExtractOracleBounds& bounds) {
    const dom::DomTree& tree = *ex.tree;
    if (tree.size() > bounds.max_tree_nodes)
        throw std::invalid_argument("brute_force_extract_oracle: tree exceeds bounds");

    std::set<std::string> tags;
    std::set<std::pair<std::string, std::string>> attr_pairs;
    std::set<int> counts_seen{0};
    for (const auto& n : tree.nodes()) {
        tags.insert(n.tag);
        for (const auto& [k, v] : n.attrs) attr_pairs.insert({k, v});
        for (auto axis : {dom::Axis::Child, dom::Axis::Ancestor, dom::Axis::Left, dom::Axis::Right})
            counts_seen.insert(static_cast<int>(tree.neighbors(n.id, axis).size()));
    }

    // Node predicate pool.
    std::vector<ExtractPred> node_preds;
    for (const auto& [name, value] : attr_pairs)
        for (const auto& phi : attr_value_exprs(ex.row, value))
            node_preds.push_back(AttrPred{name, phi});
    for (auto axis : {dom::Axis::Child, dom::Axis::Ancestor, dom::Axis::Left, dom::Axis::Right})
        for (int c : counts_seen) node_preds.push_back(CountPred{axis, c});

    // Path predicate pool: grammar-shaped axis sequences over observed tags,
    // with exact or absent positions and at most one attribute predicate on
    // the last node.
    std::vector<std::vector<dom::Axis>> shapes;
    for (int len = 1; len <= bounds.max_path_len; ++len) {
        std::vector<std::vector<dom::Axis>> partial{{}};
        for (int i = 0; i < len; ++i) {
            std::vector<std::vector<dom::Axis>> next;
            for (const auto& p : partial) {
                for (auto axis : {dom::Axis::Child, dom::Axis::Ancestor, dom::Axis::Left, dom::Axis::Right}) {
                    std::vector<dom::Axis> q = p;
                    q.push_back(axis);
                    next.push_back(std::move(q));
                }
            }
            partial = std::move(next);
        }
        for (auto& p : partial) shapes.push_back(std::move(p));
    }
    auto shape_valid = [](const std::vector<dom::Axis>& shape) {
        PathPred probe;
        for (auto a : shape) probe.nodes.push_back(PathNode{"x", a, {}, {}});
        return extract_dsl::is_valid_path(probe);
    };

    std::vector<ExtractPred> path_preds;
    std::vector<std::string> tag_list(tags.begin(), tags.end());
    std::vector<PosPred> pos_opts;
    pos_opts.push_back(PosPred{});
    for (int k = 1; k <= bounds.max_pos; ++k) pos_opts.push_back(PosPred{PosPred::Kind::Eq, k});

    for (const auto& shape : shapes) {
        if (!shape_valid(shape)) continue;
        // Enumerate tag and position assignments per step.
        size_t n = shape.size();
        std::vector<size_t> tag_idx(n, 0), pos_idx(n, 0);
        while (true) {
            PathPred path;
            for (size_t i = 0; i < n; ++i)
                path.nodes.push_back(PathNode{tag_list[tag_idx[i]], shape[i], pos_opts[pos_idx[i]], {}});
            path_preds.push_back(path);
            // One attribute predicate on the last node.
            for (const auto& [name, value] : attr_pairs) {
                for (const auto& phi : attr_value_exprs(ex.row, value)) {
                    PathPred withp = path;
                    withp.nodes.back().preds.push_back(AttrPred{name, phi});
                    path_preds.push_back(std::move(withp));
                }
            }
            if (path_preds.size() > bounds.max_results)
                throw std::invalid_argument("brute_force_extract_oracle: result cap exceeded");
            size_t i = 0;
            for (; i < n; ++i) {
                if (++pos_idx[i] < pos_opts.size()) break;
                pos_idx[i] = 0;
            }
            if (i < n) continue;
            for (i = 0; i < n; ++i) {
                if (++tag_idx[i] < tag_list.size()) break;
                tag_idx[i] = 0;
            }
            if (i == n) break;
        }
    }

    const std::string& target_tag = tree.node(ex.target).tag;
    auto is_exact = [&](const ExtractProgram& prog) {
        auto hits = extract_dsl::eval_program(prog, ex.row, tree);
        return hits.size() == 1 && hits[0] == ex.target;
    };

    std::vector<ExtractProgram> results;
    ExtractProgram empty{target_tag, {}};
    if (is_exact(empty)) results.push_back(empty);
    for (const auto& p : node_preds) {
        ExtractProgram prog{target_tag, {p}};
        if (is_exact(prog)) results.push_back(std::move(prog));
    }
    for (const auto& p : path_preds) {
        ExtractProgram prog{target_tag, {p}};
        if (is_exact(prog)) results.push_back(std::move(prog));
    }
    for (size_t i = 0; i < node_preds.size(); ++i) {
        for (size_t j = i + 1; j < node_preds.size(); ++j) {
            ExtractProgram prog{target_tag, {node_preds[i], node_preds[j]}};
            if (is_exact(prog)) results.push_back(std::move(prog));
        }
    }
    return results;
}

}  // namespace webjoin::harness
