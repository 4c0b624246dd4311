#include "peermax/outcomes.hpp"

#include <algorithm>
#include <numeric>

#include "peermax/errors.hpp"

namespace peermax {

BidOutcome spa_outcome(std::span<const double> bids) {
    const std::size_t n = bids.size();
    if (n < 2) throw ParameterError("spa_outcome needs at least 2 bids");
    std::size_t winner = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (bids[i] > bids[winner]) winner = i;
    double second = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (i != winner) second = std::max(second, bids[i]);
    BidOutcome out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    out.alloc[winner] = 1.0;
    out.pay[winner] = second;
    return out;
}

namespace {

// Priority order: descending bid, lower index first on ties.
void priority_order(std::span<const double> bids, std::vector<std::size_t>& order) {
    order.resize(bids.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return bids[a] > bids[b]; });
}

double greedy_fill(std::span<const double> bids, double m, std::span<const double> demands,
                   std::size_t skip, std::vector<double>* alloc) {
    std::vector<std::size_t> order;
    priority_order(bids, order);
    double remaining = m;
    double welfare = 0.0;
    for (std::size_t i : order) {
        if (i == skip || remaining <= 0.0) continue;
        const double z = std::min(demands[i], remaining);
        remaining -= z;
        welfare += z * bids[i];
        if (alloc) (*alloc)[i] = z;
    }
    return welfare;
}

constexpr std::size_t kNoSkip = static_cast<std::size_t>(-1);

}  // namespace

double optimal_welfare(std::span<const double> bids, double m, std::span<const double> demands) {
    return greedy_fill(bids, m, demands, kNoSkip, nullptr);
}

double others_optimal_welfare(std::span<const double> bids, double m,
                              std::span<const double> demands, std::size_t excluded) {
    return greedy_fill(bids, m, demands, excluded, nullptr);
}

BidOutcome vcg_outcome(std::span<const double> bids, double m, std::span<const double> demands) {
    const std::size_t n = bids.size();
    if (n < 2) throw ParameterError("vcg_outcome needs at least 2 bids");
    if (demands.size() != n) throw ValidationError("vcg_outcome demands/bids size mismatch");
    if (!(m > 0.0)) throw ValidationError("vcg_outcome supply must be > 0");

    BidOutcome out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    const double welfare = greedy_fill(bids, m, demands, kNoSkip, &out.alloc);
    for (std::size_t i = 0; i < n; ++i) {
        if (out.alloc[i] <= 0.0) continue;  // no allocation, no externality
        const double others_chosen = welfare - out.alloc[i] * bids[i];
        out.pay[i] = greedy_fill(bids, m, demands, i, nullptr) - others_chosen;
        if (out.pay[i] < 0.0 && out.pay[i] > -1e-12) out.pay[i] = 0.0;
    }
    return out;
}

}  // namespace peermax
