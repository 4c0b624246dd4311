#pragma once

#include <span>
#include <vector>

namespace peermax {

struct BidOutcome {
    std::vector<double> alloc;
    std::vector<double> pay;
};

/// Second-price auction: lowest-index maximal bidder gets the item and pays
/// the maximum of the others' bids; everyone else pays 0.
BidOutcome spa_outcome(std::span<const double> bids);

/// Multi-unit VCG over X_{m,d}: greedy fill by descending bid (ties: lower
/// index first) is the welfare argmax; payment is the externality
/// p_i = (others' optimum with i removed) - (others' welfare under the chosen
/// allocation). Reduces to spa_outcome when m=1 and d=1^n.
BidOutcome vcg_outcome(std::span<const double> bids, double m, std::span<const double> demands);

/// Welfare of the greedy (optimal) allocation over X_{m,d}.
double optimal_welfare(std::span<const double> bids, double m, std::span<const double> demands);

/// Greedy optimum over all buyers except `excluded`, with the same supply.
double others_optimal_welfare(std::span<const double> bids, double m,
                              std::span<const double> demands, std::size_t excluded);

}  // namespace peermax
