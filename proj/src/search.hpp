#ifndef HTNLEARN_SEARCH_HPP
#define HTNLEARN_SEARCH_HPP

#include "grounding.hpp"

#include <limits>
#include <vector>

namespace search {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Strategy { GreedyBestFirst, AStar };
enum class Heuristic { HAdd, HMax };

struct SearchConfig {
    Strategy strategy = Strategy::GreedyBestFirst;
    Heuristic heuristic = Heuristic::HAdd;
    long max_expansions = 1'000'000;
};

enum class SearchStatus { Solved, Unsolvable, BudgetExceeded };

struct SearchResult {
    SearchStatus status = SearchStatus::Unsolvable;
    std::vector<ground::ActionId> plan;
    long expansions = 0;

    bool solved() const { return status == SearchStatus::Solved; }
};

// Additive delete-relaxation cost of reaching every goal atom from s;
// infinity when some goal atom is relaxed-unreachable.
double h_add(const ground::Grounding &g, const ground::State &s,
             const std::vector<ground::AtomId> &goal);
double h_max(const ground::Grounding &g, const ground::State &s,
             const std::vector<ground::AtomId> &goal);

SearchResult classical_plan(const ground::Grounding &g, const ground::State &start,
                            const std::vector<ground::AtomId> &goal,
                            const SearchConfig &cfg = {});

} // namespace search

#endif
