#include "search.hpp"

#include <algorithm>
#include <queue>
#include <unordered_map>

namespace search {

using ground::ActionId;
using ground::AtomId;
using ground::Grounding;
using ground::State;

namespace {

// Bellman-Ford style relaxed cost fixpoint shared by h-add/h-max.
std::vector<double> fact_costs(const Grounding &g, const State &s, bool additive) {
    std::vector<double> cost(g.num_atoms(), kInfinity);
    s.atoms.for_each([&](std::size_t i) { cost[i] = 0.0; });
    const auto &actions = g.actions();
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto &a : actions) {
            double acc = 0.0;
            bool reachable = true;
            for (AtomId p : a.pre) {
                if (cost[p] == kInfinity) {
                    reachable = false;
                    break;
                }
                acc = additive ? acc + cost[p] : std::max(acc, cost[p]);
            }
            if (!reachable)
                continue;
            double via = acc + 1.0;
            for (AtomId f : a.add)
                if (via < cost[f]) {
                    cost[f] = via;
                    changed = true;
                }
        }
    }
    return cost;
}

double combine(const std::vector<double> &cost, const std::vector<AtomId> &goal, bool additive) {
    double out = 0.0;
    for (AtomId a : goal) {
        if (cost[a] == kInfinity)
            return kInfinity;
        out = additive ? out + cost[a] : std::max(out, cost[a]);
    }
    return out;
}

struct Node {
    State state;
    int parent;
    ActionId via;
};

struct OpenEntry {
    double key1;
    double key2;
    long seq; // FIFO among equal keys
    int node;

    bool operator>(const OpenEntry &o) const {
        if (key1 != o.key1)
            return key1 > o.key1;
        if (key2 != o.key2)
            return key2 > o.key2;
        return seq > o.seq;
    }
};

bool satisfied(const State &s, const std::vector<AtomId> &goal) {
    for (AtomId a : goal)
        if (!s.contains(a))
            return false;
    return true;
}

} // namespace

double h_add(const Grounding &g, const State &s, const std::vector<AtomId> &goal) {
    return combine(fact_costs(g, s, true), goal, true);
}

double h_max(const Grounding &g, const State &s, const std::vector<AtomId> &goal) {
    return combine(fact_costs(g, s, false), goal, false);
}

SearchResult classical_plan(const Grounding &g, const State &start,
                            const std::vector<AtomId> &goal, const SearchConfig &cfg) {
    SearchResult result;
    if (satisfied(start, goal)) {
        result.status = SearchStatus::Solved;
        return result;
    }

    const bool astar = cfg.strategy == Strategy::AStar;
    auto evaluate = [&](const State &s) {
        return cfg.heuristic == Heuristic::HAdd ? h_add(g, s, goal) : h_max(g, s, goal);
    };

    std::vector<Node> nodes;
    std::unordered_map<State, double, ground::StateHash> best_g;
    std::priority_queue<OpenEntry, std::vector<OpenEntry>, std::greater<OpenEntry>> open;
    long seq = 0;

    double h0 = evaluate(start);
    if (h0 == kInfinity) {
        result.status = SearchStatus::Unsolvable;
        return result;
    }
    nodes.push_back({start, -1, -1});
    best_g[start] = 0.0;
    open.push({astar ? h0 : h0, astar ? h0 : 0.0, seq++, 0});

    std::unordered_map<State, char, ground::StateHash> closed;
    std::vector<double> gval = {0.0};

    while (!open.empty()) {
        OpenEntry top = open.top();
        open.pop();
        const State s = nodes[top.node].state;
        if (closed.count(s))
            continue;
        closed.emplace(s, 1);

        if (++result.expansions > cfg.max_expansions) {
            result.status = SearchStatus::BudgetExceeded;
            return result;
        }

        for (const auto &a : g.actions()) {
            bool applicable = true;
            for (AtomId p : a.pre)
                if (!s.contains(p)) {
                    applicable = false;
                    break;
                }
            if (!applicable)
                continue;
            State succ = s;
            for (AtomId d : a.del)
                succ.atoms.reset(static_cast<std::size_t>(d));
            for (AtomId x : a.add)
                succ.atoms.set(static_cast<std::size_t>(x));

            double gs = gval[top.node] + 1.0;
            auto it = best_g.find(succ);
            if (it != best_g.end() && (!astar || it->second <= gs))
                continue;
            if (closed.count(succ))
                continue;

            if (satisfied(succ, goal)) {
                // reconstruct
                result.plan.push_back(a.id);
                int cur = top.node;
                while (cur > 0) {
                    result.plan.push_back(nodes[cur].via);
                    cur = nodes[cur].parent;
                }
                std::reverse(result.plan.begin(), result.plan.end());
                result.status = SearchStatus::Solved;
                return result;
            }

            double h = evaluate(succ);
            if (h == kInfinity)
                continue;
            best_g[succ] = gs;
            nodes.push_back({succ, top.node, a.id});
            gval.push_back(gs);
            int idx = static_cast<int>(nodes.size() - 1);
            if (astar)
                open.push({gs + h, h, seq++, idx});
            else
                open.push({h, 0.0, seq++, idx});
        }
    }
    result.status = SearchStatus::Unsolvable;
    return result;
}

} // namespace search
