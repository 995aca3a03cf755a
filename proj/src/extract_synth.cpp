#include "webjoin/extract_synth.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <tuple>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace webjoin::extract_synth {

using extract_dsl::AttrPred;
using extract_dsl::ExtractPred;
using extract_dsl::NodePred;
using extract_dsl::PathNode;
using extract_dsl::PathPred;
using url_synth::LayerGates;

namespace {

LayerGates attr_gates(const ExtractConfig& cfg) {
    LayerGates g{url_synth::Gate::Always, url_synth::Gate::Always,
                 cfg.attr_anystr ? url_synth::Gate::Always : url_synth::Gate::Never};
    return g;
}

constexpr std::array<Axis, 4> kAxes = {Axis::Left, Axis::Right, Axis::Child, Axis::Ancestor};

// Anchors and hops are laid down in a deterministic serial pass; attribute
// DAG construction is the expensive part and is deferred to `jobs`.
struct GraphBuilder {
    const ExtractExample& ex;
    const ExtractConfig& cfg;
    PredicatesGraph graph;

    struct DagJob {
        size_t anchor;
        size_t attr;
        const std::string* value;
    };
    std::vector<DagJob> jobs;

    int make_anchor(int dom_node) {
        const auto& n = ex.tree->node(dom_node);
        Anchor a;
        a.id = static_cast<int>(graph.anchors.size());
        a.tag = n.tag;
        a.dom_node = dom_node;
        for (const auto& [name, value] : n.attrs) {
            if (value.size() > cfg.oversize_attr) continue;
            jobs.push_back(DagJob{static_cast<size_t>(a.id), a.attrs.size(), &value});
            a.attrs.push_back(DagAttrPred{name, Dag{}});
        }
        for (Axis axis : kAxes)
            a.counts.push_back(CountPred{
                axis, static_cast<int>(ex.tree->neighbors(dom_node, axis).size())});
        graph.anchors.push_back(std::move(a));
        return graph.anchors.back().id;
    }

    void hop(int from, int to, Axis axis, int dist) {
        graph.hops.push_back(Hop{from, to, axis, dist});
    }

    void learn_children(int anchor, int dom_node, int budget) {
        auto children = ex.tree->neighbors(dom_node, Axis::Child);
        for (size_t i = 0; i < children.size(); ++i) {
            int dist = static_cast<int>(i) + 1;
            if (dist > budget) break;
            int a = make_anchor(children[i]);
            hop(anchor, a, Axis::Child, dist);
            learn_children(a, children[i], budget - dist);
        }
    }

    void learn_siblings(int anchor, int dom_node, int budget) {
        for (Axis axis : {Axis::Left, Axis::Right}) {
            auto sibs = ex.tree->neighbors(dom_node, axis);
            for (size_t i = 0; i < sibs.size(); ++i) {
                int dist = static_cast<int>(i) + 1;
                if (dist > budget) break;
                int a = make_anchor(sibs[i]);
                hop(anchor, a, axis, dist);
                learn_children(a, sibs[i], budget - dist);
            }
        }
    }

    void learn_ancestors(int anchor, int dom_node, int budget) {
        auto ancs = ex.tree->neighbors(dom_node, Axis::Ancestor);
        for (size_t i = 0; i < ancs.size(); ++i) {
            int dist = static_cast<int>(i) + 1;
            if (dist > budget) break;
            int a = make_anchor(ancs[i]);
            hop(anchor, a, Axis::Ancestor, dist);
            learn_siblings(a, ancs[i], budget - dist);
        }
    }

    void run(bool parallel) {
        graph.radius = cfg.radius;
        graph.target = make_anchor(ex.target);
        learn_children(graph.target, ex.target, cfg.radius);
        learn_siblings(graph.target, ex.target, cfg.radius);
        learn_ancestors(graph.target, ex.target, cfg.radius);

        LayerGates gates = attr_gates(cfg);
        url_synth::SynthConfig synth = cfg.synth;
        synth.exec = url_synth::ExecMode::Serial;  // parallelism lives at the job level
        if (parallel) {
#pragma omp parallel for schedule(dynamic, 1)
            for (std::int64_t i = 0; i < static_cast<std::int64_t>(jobs.size()); ++i) {
                const DagJob& j = jobs[static_cast<size_t>(i)];
                graph.anchors[j.anchor].attrs[j.attr].dag =
                    url_synth::gen_dag_serial(ex.row, *j.value, gates, synth);
            }
        } else {
            for (const DagJob& j : jobs)
                graph.anchors[j.anchor].attrs[j.attr].dag =
                    url_synth::gen_dag_serial(ex.row, *j.value, gates, synth);
        }
    }
};

}  // namespace

PredicatesGraph build_predicates_graph(const ExtractExample& ex, const ExtractConfig& cfg) {
    GraphBuilder b{ex, cfg, {}, {}};
    b.run(cfg.synth.exec == url_synth::ExecMode::Parallel);
    return std::move(b.graph);
}

PredicatesGraph build_predicates_graph_serial(const ExtractExample& ex,
                                              const ExtractConfig& cfg) {
    GraphBuilder b{ex, cfg, {}, {}};
    b.run(false);
    return std::move(b.graph);
}

// --- Path enumeration --------------------------------------------------------

std::vector<GraphPath> enumerate_paths(const PredicatesGraph& g) {
    std::vector<std::vector<const Hop*>> out_hops(g.anchors.size());
    for (const auto& h : g.hops) out_hops[static_cast<size_t>(h.from)].push_back(&h);

    std::vector<GraphPath> paths;
    GraphPath current;
    std::function<void(int)> dfs = [&](int anchor) {
        for (const Hop* h : out_hops[static_cast<size_t>(anchor)]) {
            const Anchor& a = g.anchors[static_cast<size_t>(h->to)];
            current.steps.push_back(GraphPath::Step{
                a.tag, h->axis, PosPred{PosPred::Kind::Eq, h->dist}, a.attrs, a.counts});
            // A lone Ancestor step is not a grammar path; its extensions are.
            if (h->axis != Axis::Ancestor) paths.push_back(current);
            dfs(h->to);
            current.steps.pop_back();
        }
    };
    dfs(g.target);
    return paths;
}

// --- Materialization and ranking ----------------------------------------------

namespace {

std::optional<url_dsl::Predicate> dag_best(const Dag& dag) { return url_synth::best_program(dag); }

std::vector<NodePred> materialize_node_preds(const std::vector<DagAttrPred>& attrs,
                                             const std::vector<CountPred>& counts) {
    std::vector<NodePred> out;
    for (const auto& a : attrs) {
        auto best = dag_best(a.dag);
        if (best) out.push_back(AttrPred{a.name, *best});
    }
    for (const auto& c : counts) out.push_back(c);
    return out;
}

int max_substr_count(const std::vector<DagAttrPred>& attrs) {
    int best = 0;
    for (const auto& a : attrs) {
        auto prog = dag_best(a.dag);
        if (prog) best = std::max(best, url_synth::substr_atom_count(*prog));
    }
    return best;
}

struct RankedCandidate {
    Candidate cand;
    long score = 0;
    std::string text;
};

long rank_score(const Candidate& cand, const ExtractConfig& cfg) {
    int substr = 0, right = 0, dist = 0;
    if (const auto* attr = std::get_if<DagAttrPred>(&cand)) {
        auto prog = dag_best(attr->dag);
        substr = prog ? url_synth::substr_atom_count(*prog) : 0;
    } else if (std::holds_alternative<CountPred>(cand)) {
        substr = 0;
    } else {
        const auto& path = std::get<GraphPath>(cand);
        for (const auto& s : path.steps) {
            substr = std::max(substr, max_substr_count(s.attrs));
            if (s.axis == Axis::Right) right = 1;
            dist += s.pos.k;
        }
    }
    return static_cast<long>(substr) * cfg.weight_substr -
           static_cast<long>(right) * cfg.weight_right - static_cast<long>(dist) * cfg.weight_dist;
}

}  // namespace

extract_dsl::ExtractPred materialize(const Candidate& cand) {
    if (const auto* attr = std::get_if<DagAttrPred>(&cand)) {
        auto best = dag_best(attr->dag);
        return AttrPred{attr->name, best ? *best : url_dsl::Predicate{{url_dsl::ConstStrExpr{"\x01"}}}};
    }
    if (const auto* count = std::get_if<CountPred>(&cand)) return *count;
    const auto& path = std::get<GraphPath>(cand);
    PathPred out;
    for (const auto& s : path.steps)
        out.nodes.push_back(PathNode{s.tag, s.axis, s.pos,
                                     materialize_node_preds(s.attrs, s.counts)});
    return out;
}

std::vector<Candidate> enumerate_candidates(const PredicatesGraph& g, const ExtractConfig& cfg) {
    std::vector<RankedCandidate> ranked;
    const Anchor& target = g.anchors[static_cast<size_t>(g.target)];
    for (const auto& a : target.attrs) ranked.push_back(RankedCandidate{Candidate{a}, 0, {}});
    for (const auto& c : target.counts) ranked.push_back(RankedCandidate{Candidate{c}, 0, {}});
    for (auto& p : enumerate_paths(g)) ranked.push_back(RankedCandidate{Candidate{std::move(p)}, 0, {}});
    for (auto& rc : ranked) {
        rc.score = rank_score(rc.cand, cfg);
        rc.text = extract_dsl::render(materialize(rc.cand));
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.text < b.text;
    });
    std::vector<Candidate> out;
    out.reserve(ranked.size());
    for (auto& rc : ranked) out.push_back(std::move(rc.cand));
    return out;
}

// --- Intersection and refinement ------------------------------------------------

namespace {

PosPred intersect_pos(const PosPred& a, const PosPred& b) {
    if (a.kind == PosPred::Kind::Eq && b.kind == PosPred::Kind::Eq && a.k == b.k) return a;
    return PosPred{PosPred::Kind::Leq, std::max(a.k, b.k)};
}

bool same_skeleton(const GraphPath& p, const GraphPath& q) {
    if (p.steps.size() != q.steps.size()) return false;
    for (size_t i = 0; i < p.steps.size(); ++i)
        if (p.steps[i].tag != q.steps[i].tag || p.steps[i].axis != q.steps[i].axis) return false;
    return true;
}

std::string skeleton_key(const GraphPath& p) {
    std::string key;
    for (const auto& s : p.steps) {
        key += s.tag;
        key += '\x1f';
        key += dom::axis_name(s.axis);
        key += '\x1e';
    }
    return key;
}

}  // namespace

std::optional<GraphPath> intersect_path(const GraphPath& p, const GraphPath& q) {
    if (!same_skeleton(p, q)) return std::nullopt;
    GraphPath out;
    out.steps.reserve(p.steps.size());
    for (size_t i = 0; i < p.steps.size(); ++i) {
        const auto& sp = p.steps[i];
        const auto& sq = q.steps[i];
        GraphPath::Step step;
        step.tag = sp.tag;
        step.axis = sp.axis;
        step.pos = intersect_pos(sp.pos, sq.pos);
        for (const auto& ap : sp.attrs) {
            for (const auto& aq : sq.attrs) {
                if (ap.name != aq.name) continue;
                Dag merged = url_synth::intersect(ap.dag, aq.dag);
                if (merged.has_path()) step.attrs.push_back(DagAttrPred{ap.name, std::move(merged)});
                break;
            }
        }
        for (const auto& cp : sp.counts)
            for (const auto& cq : sq.counts)
                if (cp.axis == cq.axis && cp.count == cq.count) step.counts.push_back(cp);
        out.steps.push_back(std::move(step));
    }
    return out;
}

std::vector<GraphPath> refine_path(const GraphPath& p, const PredicatesGraph& example_graph,
                                   const ExtractExample& ex, const ExtractConfig& cfg) {
    (void)cfg;
    // The maximal path predicate already satisfied: nothing to refine.
    auto maximal = std::get<PathPred>(materialize(Candidate{p}));
    if (!extract_dsl::eval_path(maximal, ex.row, *ex.tree, {ex.target}).empty()) return {p};

    std::vector<GraphPath> out;
    for (auto& q : enumerate_paths(example_graph)) {
        if (!same_skeleton(p, q)) continue;
        auto merged = intersect_path(p, q);
        if (merged) out.push_back(std::move(*merged));
    }
    return out;
}

// --- Search ------------------------------------------------------------------

namespace {

struct RefineContext {
    const std::vector<ExtractExample>& examples;
    const ExtractConfig& cfg;
    std::vector<std::optional<PredicatesGraph>> graphs;  // index 1..m-1, lazy
    std::map<std::pair<size_t, std::string>, std::vector<GraphPath>> path_cache;

    explicit RefineContext(const std::vector<ExtractExample>& ex, const ExtractConfig& c)
        : examples(ex), cfg(c), graphs(ex.size()) {}

    const PredicatesGraph& graph_for(size_t k) {
        if (!graphs[k]) graphs[k] = build_predicates_graph(examples[k], cfg);
        return *graphs[k];
    }

    // Refines a path candidate against all examples beyond the first,
    // caching per (example, skeleton).
    std::vector<GraphPath> refine_all(const GraphPath& p) {
        std::vector<GraphPath> acc{p};
        for (size_t k = 1; k < examples.size() && !acc.empty(); ++k) {
            std::vector<GraphPath> next;
            for (const auto& cur : acc) {
                auto key = std::make_pair(k, skeleton_key(cur));
                auto maximal = std::get<PathPred>(materialize(Candidate{cur}));
                if (!extract_dsl::eval_path(maximal, examples[k].row, *examples[k].tree,
                                            {examples[k].target})
                         .empty()) {
                    next.push_back(cur);
                    continue;
                }
                auto it = path_cache.find(key);
                if (it == path_cache.end()) {
                    std::vector<GraphPath> same;
                    for (auto& q : enumerate_paths(graph_for(k)))
                        if (same_skeleton(cur, q)) same.push_back(std::move(q));
                    it = path_cache.emplace(key, std::move(same)).first;
                }
                for (const auto& q : it->second) {
                    auto merged = intersect_path(cur, q);
                    if (merged) next.push_back(std::move(*merged));
                }
            }
            acc = std::move(next);
        }
        return acc;
    }

    // Node-predicate candidates of the target anchor refine by direct
    // check-or-intersect against each further example's target anchor.
    std::vector<Candidate> refine_target_attr(const DagAttrPred& attr) {
        DagAttrPred cur = attr;
        for (size_t k = 1; k < examples.size(); ++k) {
            auto best = dag_best(cur.dag);
            if (best) {
                AttrPred concrete{cur.name, *best};
                if (extract_dsl::eval_node_pred(NodePred{concrete}, examples[k].row,
                                                *examples[k].tree, examples[k].target))
                    continue;
            }
            const Anchor& target = graph_for(k).anchors[static_cast<size_t>(graph_for(k).target)];
            const DagAttrPred* other = nullptr;
            for (const auto& a : target.attrs)
                if (a.name == cur.name) { other = &a; break; }
            if (!other) return {};
            Dag merged = url_synth::intersect(cur.dag, other->dag);
            if (!merged.has_path()) return {};
            cur.dag = std::move(merged);
        }
        return {Candidate{std::move(cur)}};
    }

    std::vector<Candidate> refine_target_count(const CountPred& count) {
        for (size_t k = 1; k < examples.size(); ++k) {
            int c = static_cast<int>(
                examples[k].tree->neighbors(examples[k].target, count.axis).size());
            if (c != count.count) return {};
        }
        return {Candidate{count}};
    }
};

}  // namespace

ExtractLearnResult search_best_prog(const PredicatesGraph& g,
                                    const std::vector<ExtractExample>& examples,
                                    const std::vector<TestDoc>& unseen,
                                    const ExtractConfig& cfg) {
    using clock = std::chrono::steady_clock;
    auto ms_since = [](clock::time_point t0) {
        return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    };
    auto start = clock::now();

    ExtractLearnResult result;
    if (examples.empty()) return result;

    ExtractProgram prog;
    prog.tag = examples[0].tree->node(examples[0].target).tag;

    auto unique_on_examples = [&]() {
        for (const auto& ex : examples) {
            auto hits = extract_dsl::eval_program(prog, ex.row, *ex.tree);
            if (hits.size() != 1 || hits[0] != ex.target) return false;
        }
        return true;
    };
    auto alive_on_tests = [&]() {
        for (const auto& doc : unseen)
            if (extract_dsl::eval_program(prog, doc.row, *doc.tree).empty()) return false;
        return true;
    };

    if (unique_on_examples()) {
        result.program = prog;
        result.total_ms = result.t_search_ms = ms_since(start);
        return result;
    }

    RefineContext ctx(examples, cfg);
    auto candidates = enumerate_candidates(g, cfg);

    for (const auto& cand : candidates) {
        auto t_refine = clock::now();
        std::vector<Candidate> refined;
        if (const auto* attr = std::get_if<DagAttrPred>(&cand)) {
            refined = ctx.refine_target_attr(*attr);
        } else if (const auto* count = std::get_if<CountPred>(&cand)) {
            refined = ctx.refine_target_count(*count);
        } else {
            for (auto& p : ctx.refine_all(std::get<GraphPath>(cand)))
                refined.push_back(Candidate{std::move(p)});
        }
        result.t_intersect_ms += ms_since(t_refine);

        for (const auto& r : refined) {
            ExtractPred pred = materialize(r);
            prog.preds.push_back(pred);
            if (!alive_on_tests()) {
                prog.preds.pop_back();
                continue;
            }
            if (unique_on_examples()) {
                result.program = prog;
                result.total_ms = ms_since(start);
                result.t_search_ms = result.total_ms - result.t_intersect_ms;
                return result;
            }
        }
    }
    result.total_ms = ms_since(start);
    result.t_search_ms = result.total_ms - result.t_intersect_ms;
    return result;
}

ExtractLearnResult learn_extract(const std::vector<ExtractExample>& examples,
                                 const std::vector<TestDoc>& unseen, const ExtractConfig& cfg) {
    using clock = std::chrono::steady_clock;
    auto t0 = clock::now();
    if (examples.empty()) return {};
    PredicatesGraph g = build_predicates_graph(examples[0], cfg);
    double pred_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();

    ExtractLearnResult r = search_best_prog(g, examples, unseen, cfg);
    r.t_pred_ms = pred_ms;
    r.total_ms += pred_ms;
    return r;
}

url_synth::LearnResult learn_post_transform(
    const std::vector<std::pair<InputRow, std::string>>& examples,
    const url_synth::SynthConfig& cfg) {
    url_synth::SynthConfig c = cfg;
    c.allow_anystr = false;
    std::vector<url_synth::UrlExample> ex;
    ex.reserve(examples.size());
    for (const auto& [row, desired] : examples)
        ex.push_back(url_synth::UrlExample{row, desired, {}});
    return url_synth::learn_url(ex, {}, c);
}

}  // namespace webjoin::extract_synth
