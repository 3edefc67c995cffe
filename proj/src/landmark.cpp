#include "landmark.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_set>

namespace landmarks {

using util::Bitset;

const char *order_label(OrderKind k) {
    switch (k) {
    case OrderKind::Natural:
        return "n";
    case OrderKind::Necessary:
        return "nec";
    case OrderKind::GreedyNecessary:
        return "gn";
    case OrderKind::Reasonable:
        return "r";
    }
    return "?";
}

int LandmarkGraph::index_of(AtomId atom) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].atom == atom)
            return static_cast<int>(i);
    return -1;
}

bool LandmarkGraph::has_edge(int from, int to) const {
    for (const auto &e : edges)
        if (e.from == from && e.to == to)
            return true;
    return false;
}

std::optional<OrderKind> LandmarkGraph::edge_kind(int from, int to) const {
    for (const auto &e : edges)
        if (e.from == from && e.to == to)
            return e.kind;
    return std::nullopt;
}

std::vector<int> LandmarkGraph::predecessors(int node) const {
    std::vector<int> out;
    for (const auto &e : edges)
        if (e.to == node)
            out.push_back(e.from);
    return out;
}

std::vector<int> LandmarkGraph::successors(int node) const {
    std::vector<int> out;
    for (const auto &e : edges)
        if (e.from == node)
            out.push_back(e.to);
    return out;
}

namespace {

bool goal_reachable(const Grounding &g, const Bitset &facts) {
    for (AtomId a : g.goal_atoms())
        if (!facts.test(static_cast<std::size_t>(a)))
            return false;
    return true;
}

// relaxed fixpoint with every achiever of `excluded` removed
Bitset reachable_without(const Grounding &g, AtomId excluded) {
    Bitset from = g.initial_state().atoms;
    return g.relaxed_reachable(from, [&](ActionId a) {
        for (AtomId f : g.actions()[a].add)
            if (f == excluded)
                return false;
        return true;
    });
}

std::vector<ActionId> first_achievers(const Grounding &g, AtomId lm, const Bitset &restricted) {
    std::vector<ActionId> out;
    for (ActionId a : g.achievers(lm)) {
        bool ok = true;
        for (AtomId p : g.actions()[a].pre)
            if (!restricted.test(static_cast<std::size_t>(p))) {
                ok = false;
                break;
            }
        if (ok)
            out.push_back(a);
    }
    return out;
}

void add_or_upgrade_edge(LandmarkGraph &graph, int from, int to, OrderKind kind) {
    if (from == to)
        return;
    for (auto &e : graph.edges)
        if (e.from == from && e.to == to) {
            // gn > nec > n; reasonable never downgrades a proven order
            auto rank = [](OrderKind k) {
                switch (k) {
                case OrderKind::GreedyNecessary:
                    return 3;
                case OrderKind::Necessary:
                    return 2;
                case OrderKind::Natural:
                    return 1;
                case OrderKind::Reasonable:
                    return 0;
                }
                return 0;
            };
            if (rank(kind) > rank(e.kind))
                e.kind = kind;
            return;
        }
    graph.edges.push_back({from, to, kind});
}

bool path_exists(const LandmarkGraph &graph, int from, int to) {
    if (from == to)
        return true;
    std::vector<char> seen(graph.nodes.size(), 0);
    std::deque<int> queue{from};
    seen[from] = 1;
    while (!queue.empty()) {
        int cur = queue.front();
        queue.pop_front();
        for (const auto &e : graph.edges)
            if (e.from == cur && !seen[e.to]) {
                if (e.to == to)
                    return true;
                seen[e.to] = 1;
                queue.push_back(e.to);
            }
    }
    return false;
}

std::vector<AtomId> kahn_order(const Grounding &g, const LandmarkGraph &graph,
                               const std::vector<int> &keep) {
    std::vector<char> kept(graph.nodes.size(), 0);
    for (int i : keep)
        kept[i] = 1;
    std::map<std::string, int> ready; // printed atom -> node, lexicographic ties
    std::vector<int> indegree(graph.nodes.size(), 0);
    for (const auto &e : graph.edges)
        if (kept[e.from] && kept[e.to])
            ++indegree[e.to];
    for (int i : keep)
        if (indegree[i] == 0)
            ready.emplace(g.atom_str(graph.nodes[i].atom), i);

    std::vector<AtomId> order;
    std::size_t emitted = 0;
    while (!ready.empty()) {
        int node = ready.begin()->second;
        ready.erase(ready.begin());
        order.push_back(graph.nodes[node].atom);
        ++emitted;
        for (const auto &e : graph.edges)
            if (e.from == node && kept[e.to] && --indegree[e.to] == 0)
                ready.emplace(g.atom_str(graph.nodes[e.to].atom), e.to);
    }
    if (emitted != keep.size())
        throw std::logic_error("cycle detected in landmark graph ordering");
    return order;
}

} // namespace

LandmarkGraph extract_landmarks(const Grounding &g) {
    const Bitset init = g.initial_state().atoms;
    Bitset full = g.relaxed_reachable(init);
    if (!goal_reachable(g, full))
        throw UnreachableGoal("goal is unreachable under delete relaxation");

    // candidate nodes
    std::set<AtomId> node_atoms;
    for (AtomId a : g.init_atoms())
        node_atoms.insert(a);
    for (AtomId a : g.goal_atoms())
        node_atoms.insert(a);

    std::map<AtomId, Bitset> restricted; // per non-s0 landmark
    for (AtomId f = 0; f < g.num_atoms(); ++f) {
        if (init.test(static_cast<std::size_t>(f)) || !full.test(static_cast<std::size_t>(f)))
            continue;
        Bitset r = reachable_without(g, f);
        if (!goal_reachable(g, r)) {
            node_atoms.insert(f);
            restricted.emplace(f, std::move(r));
        }
    }
    // goal atoms outside s0 always pass the removal test; cache their
    // restricted fixpoints for the edge computations below
    for (AtomId a : g.goal_atoms())
        if (!init.test(static_cast<std::size_t>(a)) && !restricted.count(a))
            restricted.emplace(a, reachable_without(g, a));

    LandmarkGraph graph;
    for (AtomId a : node_atoms)
        graph.nodes.push_back({a, init.test(static_cast<std::size_t>(a)),
                               std::find(g.goal_atoms().begin(), g.goal_atoms().end(), a) !=
                                   g.goal_atoms().end()});
    std::sort(graph.nodes.begin(), graph.nodes.end(),
              [&](const LandmarkGraph::Node &x, const LandmarkGraph::Node &y) {
                  return g.atom_str(x.atom) < g.atom_str(y.atom);
              });

    // greedy-necessary edges from shared first-achiever preconditions
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
        const auto &node = graph.nodes[i];
        if (node.initial)
            continue;
        const Bitset &r = restricted.at(node.atom);
        std::vector<ActionId> fa = first_achievers(g, node.atom, r);
        if (fa.empty())
            continue;
        std::vector<AtomId> shared = g.actions()[fa[0]].pre;
        for (std::size_t k = 1; k < fa.size() && !shared.empty(); ++k) {
            const auto &pre = g.actions()[fa[k]].pre;
            std::vector<AtomId> next;
            std::set_intersection(shared.begin(), shared.end(), pre.begin(), pre.end(),
                                  std::back_inserter(next));
            shared = std::move(next);
        }
        for (AtomId p : shared) {
            int from = graph.index_of(p);
            if (from >= 0)
                add_or_upgrade_edge(graph, from, static_cast<int>(i), OrderKind::GreedyNecessary);
        }
    }

    // natural edges: l precedes l' whenever l' is unreachable without l
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
        if (graph.nodes[i].initial)
            continue;
        const Bitset &r = restricted.at(graph.nodes[i].atom);
        for (std::size_t j = 0; j < graph.nodes.size(); ++j) {
            if (i == j || graph.nodes[j].initial)
                continue;
            if (!r.test(static_cast<std::size_t>(graph.nodes[j].atom)))
                add_or_upgrade_edge(graph, static_cast<int>(i), static_cast<int>(j),
                                    OrderKind::Natural);
        }
    }
    return graph;
}

LandmarkGraph add_reasonable_orders(const Grounding &g, LandmarkGraph graph) {
    const Bitset init = g.initial_state().atoms;
    PairMutex mutex(g);

    std::map<AtomId, Bitset> restricted;
    auto restricted_of = [&](AtomId a) -> const Bitset & {
        auto it = restricted.find(a);
        if (it == restricted.end())
            it = restricted.emplace(a, reachable_without(g, a)).first;
        return it->second;
    };

    auto gn_parents = [&](int node) {
        std::vector<int> out;
        for (const auto &e : graph.edges)
            if (e.to == node && e.kind == OrderKind::GreedyNecessary)
                out.push_back(e.from);
        return out;
    };
    auto gn_children = [&](int node) {
        std::vector<int> out;
        for (const auto &e : graph.edges)
            if (e.from == node && e.kind == OrderKind::GreedyNecessary)
                out.push_back(e.to);
        return out;
    };

    const int n = static_cast<int>(graph.nodes.size());
    for (int i = 0; i < n; ++i) {
        if (graph.nodes[i].initial)
            continue; // ordering an s0-true landmark earlier is vacuous
        for (int j = 0; j < n; ++j) {
            if (i == j)
                continue;
            // targets are pending landmarks or goals that may need re-achieving
            if (graph.nodes[j].initial && !graph.nodes[j].goal)
                continue;
            if (graph.has_edge(i, j) || graph.has_edge(j, i))
                continue;

            // l_j needed at or after l_i: l_j is a goal, or both are
            // gn-required one step before a common landmark
            bool needed_after = graph.nodes[j].goal;
            if (!needed_after) {
                auto ci = gn_children(i);
                auto cj = gn_children(j);
                for (int x : ci)
                    for (int y : cj)
                        if (x == y)
                            needed_after = true;
            }
            if (!needed_after)
                continue;

            // achieving l_i clobbers l_j?
            AtomId li = graph.nodes[i].atom, lj = graph.nodes[j].atom;
            bool interferes = false;
            std::vector<ActionId> fa = first_achievers(g, li, restricted_of(li));
            if (!fa.empty()) {
                interferes = true;
                for (ActionId a : fa) {
                    const auto &del = g.actions()[a].del;
                    if (std::find(del.begin(), del.end(), lj) == del.end()) {
                        interferes = false;
                        break;
                    }
                }
            }
            if (!interferes)
                for (int p : gn_parents(i))
                    if (mutex.mutex(graph.nodes[p].atom, lj)) {
                        interferes = true;
                        break;
                    }
            if (!interferes)
                continue;

            if (path_exists(graph, j, i)) {
                ++graph.dropped_reasonable; // would close a cycle
                continue;
            }
            add_or_upgrade_edge(graph, i, j, OrderKind::Reasonable);
        }
    }
    return graph;
}

std::vector<AtomId> topo_sequence(const Grounding &g, const LandmarkGraph &graph) {
    std::vector<int> keep;
    for (std::size_t i = 0; i < graph.nodes.size(); ++i)
        if (!graph.nodes[i].initial)
            keep.push_back(static_cast<int>(i));
    return kahn_order(g, graph, keep);
}

std::vector<AtomId> topo_goal_order(const Grounding &g, const LandmarkGraph &graph) {
    std::vector<int> all(graph.nodes.size());
    for (std::size_t i = 0; i < graph.nodes.size(); ++i)
        all[i] = static_cast<int>(i);
    std::vector<AtomId> order = kahn_order(g, graph, all);
    std::vector<AtomId> goals;
    for (AtomId a : order)
        if (std::find(g.goal_atoms().begin(), g.goal_atoms().end(), a) != g.goal_atoms().end())
            goals.push_back(a);
    return goals;
}

OracleVerdict brute_force_landmark_oracle(const Grounding &g, AtomId candidate,
                                          int plan_length_bound, std::size_t max_states) {
    const ground::State s0 = g.initial_state();
    if (candidate >= 0 && s0.contains(candidate))
        return OracleVerdict::Landmark; // true at time 0 of every plan

    const Bitset goal = g.goal_bits();
    auto is_goal = [&](const ground::State &s) { return goal.subset_of(s.atoms); };

    // breadth-first reachability, optionally refusing states where the
    // candidate holds; returns the depth of the shallowest goal state, or -1
    auto bfs = [&](bool avoid_candidate) -> long {
        std::unordered_set<ground::State, ground::StateHash> seen;
        std::deque<std::pair<ground::State, long>> queue;
        if (avoid_candidate && s0.contains(candidate))
            return -1;
        if (is_goal(s0))
            return 0;
        seen.insert(s0);
        queue.emplace_back(s0, 0);
        while (!queue.empty()) {
            auto [s, depth] = queue.front();
            queue.pop_front();
            if (plan_length_bound > 0 && depth >= plan_length_bound)
                continue;
            for (const auto &a : g.actions()) {
                bool ok = true;
                for (AtomId p : a.pre)
                    if (!s.contains(p)) {
                        ok = false;
                        break;
                    }
                if (!ok)
                    continue;
                ground::State succ = s;
                for (AtomId d : a.del)
                    succ.atoms.reset(static_cast<std::size_t>(d));
                for (AtomId x : a.add)
                    succ.atoms.set(static_cast<std::size_t>(x));
                if (avoid_candidate && succ.contains(candidate))
                    continue;
                if (seen.count(succ))
                    continue;
                if (is_goal(succ))
                    return depth + 1;
                if (seen.size() >= max_states)
                    throw std::runtime_error("landmark oracle exceeded its state budget");
                seen.insert(succ);
                queue.emplace_back(succ, depth + 1);
            }
        }
        return -1;
    };

    long avoid = bfs(true);
    if (avoid >= 0)
        return OracleVerdict::NotLandmark; // witness plan never touches the candidate
    long any = bfs(false);
    if (any < 0)
        return OracleVerdict::Inconclusive; // no solution within the bound
    return OracleVerdict::Landmark;
}

std::size_t count_reachable_states(const Grounding &g, std::size_t cap) {
    std::unordered_set<ground::State, ground::StateHash> seen;
    std::deque<ground::State> queue;
    seen.insert(g.initial_state());
    queue.push_back(g.initial_state());
    while (!queue.empty() && seen.size() <= cap) {
        ground::State s = queue.front();
        queue.pop_front();
        for (const auto &a : g.actions()) {
            bool ok = true;
            for (AtomId p : a.pre)
                if (!s.contains(p)) {
                    ok = false;
                    break;
                }
            if (!ok)
                continue;
            ground::State succ = s;
            for (AtomId d : a.del)
                succ.atoms.reset(static_cast<std::size_t>(d));
            for (AtomId x : a.add)
                succ.atoms.set(static_cast<std::size_t>(x));
            if (seen.insert(succ).second)
                queue.push_back(succ);
        }
    }
    return seen.size();
}

PairMutex::PairMutex(const Grounding &g) : n_(g.num_atoms()), pairs_(n_ * n_) {
    auto set_pair = [&](AtomId a, AtomId b) {
        pairs_.set(static_cast<std::size_t>(a) * n_ + b);
        pairs_.set(static_cast<std::size_t>(b) * n_ + a);
    };
    const Bitset init = g.initial_state().atoms;
    std::vector<AtomId> init_atoms = init.to_vector();
    for (AtomId a : init_atoms)
        for (AtomId b : init_atoms)
            set_pair(a, b);

    // facts-of-size-<=2 reachability fixpoint
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto &act : g.actions()) {
            // action applicable in the pair relaxation: every pair of its
            // preconditions must be co-reachable
            bool ok = true;
            for (std::size_t x = 0; x < act.pre.size() && ok; ++x)
                for (std::size_t y = x; y < act.pre.size() && ok; ++y)
                    if (!reachable(act.pre[x], act.pre[y]))
                        ok = false;
            if (!ok)
                continue;
            for (AtomId f1 : act.add) {
                // pairs among the action's own effects
                for (AtomId f2 : act.add)
                    if (!reachable(f1, f2)) {
                        set_pair(f1, f2);
                        changed = true;
                    }
                // pairs with surviving context facts q: q must be co-reachable
                // with every precondition and not deleted
                for (AtomId q = 0; q < static_cast<AtomId>(n_); ++q) {
                    if (reachable(f1, q))
                        continue;
                    if (std::find(act.del.begin(), act.del.end(), q) != act.del.end())
                        continue;
                    bool ctx = true;
                    for (AtomId p : act.pre)
                        if (!reachable(p, q)) {
                            ctx = false;
                            break;
                        }
                    if (!ctx || !reachable(q, q))
                        continue;
                    set_pair(f1, q);
                    changed = true;
                }
            }
        }
    }
}

bool PairMutex::mutex(AtomId a, AtomId b) const {
    return !reachable(a, b);
}

std::string to_dot(const Grounding &g, const LandmarkGraph &graph) {
    std::ostringstream os;
    os << "digraph landmarks {\n";
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
        const auto &n = graph.nodes[i];
        os << "  n" << i << " [label=\"" << g.atom_str(n.atom) << "\"";
        if (n.initial)
            os << ", style=dashed";
        else if (n.goal)
            os << ", style=filled";
        os << "];\n";
    }
    for (const auto &e : graph.edges)
        os << "  n" << e.from << " -> n" << e.to << " [label=\"" << order_label(e.kind)
           << "\"];\n";
    os << "}\n";
    return os.str();
}

std::string to_json(const Grounding &g, const LandmarkGraph &graph) {
    std::ostringstream os;
    os << "{\n  \"nodes\": [";
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
        const auto &n = graph.nodes[i];
        os << (i ? ",\n    " : "\n    ") << "{\"atom\": \"" << g.atom_str(n.atom)
           << "\", \"initial\": " << (n.initial ? "true" : "false")
           << ", \"goal\": " << (n.goal ? "true" : "false") << "}";
    }
    os << "\n  ],\n  \"edges\": [";
    for (std::size_t i = 0; i < graph.edges.size(); ++i) {
        const auto &e = graph.edges[i];
        os << (i ? ",\n    " : "\n    ") << "{\"from\": " << e.from << ", \"to\": " << e.to
           << ", \"kind\": \"" << order_label(e.kind) << "\"}";
    }
    os << "\n  ]\n}\n";
    return os.str();
}

} // namespace landmarks
