#ifndef HTNLEARN_LANDMARK_HPP
#define HTNLEARN_LANDMARK_HPP

#include "grounding.hpp"

#include <optional>
#include <string>
#include <vector>

namespace landmarks {

using ground::ActionId;
using ground::AtomId;
using ground::Grounding;

class UnreachableGoal : public std::runtime_error {
public:
    explicit UnreachableGoal(const std::string &what) : std::runtime_error(what) {}
};

enum class OrderKind { Natural, Necessary, GreedyNecessary, Reasonable };

const char *order_label(OrderKind k); // "n", "nec", "gn", "r"

struct LandmarkGraph {
    struct Node {
        AtomId atom;
        bool initial; // true in s0
        bool goal;
    };
    struct Edge {
        int from, to; // node indices
        OrderKind kind;
    };

    std::vector<Node> nodes; // sorted by printed atom for determinism
    std::vector<Edge> edges;

    int index_of(AtomId atom) const;
    bool has_edge(int from, int to) const;
    std::optional<OrderKind> edge_kind(int from, int to) const;
    std::vector<int> predecessors(int node) const;
    std::vector<int> successors(int node) const;

    int dropped_reasonable = 0; // candidates discarded to keep the graph acyclic
};

// Single-atom landmark extraction. Every goal atom and every atom of s0 is a
// node; a fact f outside s0 is accepted when removing all of its achievers
// makes the delete-relaxed problem unsolvable. Greedy-necessary edges come
// from shared first-achiever preconditions, natural edges from relaxed
// reachability without the source landmark.
LandmarkGraph extract_landmarks(const Grounding &g);

// Interference-based approximation of reasonable orders; candidates that
// would close a cycle are dropped and counted.
LandmarkGraph add_reasonable_orders(const Grounding &g, LandmarkGraph graph);

// Total order extending the graph's partial order, after pruning nodes that
// are true in s0. Ties pick the lexicographically smallest printed atom.
std::vector<AtomId> topo_sequence(const Grounding &g, const LandmarkGraph &graph);

// Goal atoms in dependency order over the full (unpruned) graph; used to
// serialize the root tasks of an equivalent hierarchical problem.
std::vector<AtomId> topo_goal_order(const Grounding &g, const LandmarkGraph &graph);

enum class OracleVerdict { Landmark, NotLandmark, Inconclusive };

// Exhaustive real-space check: the candidate is a landmark within the bound
// iff no solution of length <= bound avoids it in every visited state (and at
// least one solution exists within the bound). bound 0 means unbounded, which
// is exact on finite state spaces.
OracleVerdict brute_force_landmark_oracle(const Grounding &g, AtomId candidate,
                                          int plan_length_bound,
                                          std::size_t max_states = 2'000'000);

// Number of states reachable from s0, capped at `cap`.
std::size_t count_reachable_states(const Grounding &g, std::size_t cap);

// Pairwise fact reachability under delete relaxation (h^2 style); a pair that
// is never co-reachable is a sound mutex.
class PairMutex {
public:
    explicit PairMutex(const Grounding &g);
    bool mutex(AtomId a, AtomId b) const;

private:
    bool reachable(AtomId a, AtomId b) const {
        return pairs_.test(static_cast<std::size_t>(a) * n_ + static_cast<std::size_t>(b));
    }
    std::size_t n_;
    util::Bitset pairs_;
};

std::string to_dot(const Grounding &g, const LandmarkGraph &graph);
std::string to_json(const Grounding &g, const LandmarkGraph &graph);

} // namespace landmarks

#endif
