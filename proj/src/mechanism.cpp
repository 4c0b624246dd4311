#include "peermax/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "peermax/errors.hpp"

namespace peermax {

AlphaGrid alpha_support(int k, int n) {
    if (k < 1) throw ParameterError("alpha_support needs K >= 1");
    if (n < 2) throw ParameterError("alpha_support needs n >= 2");
    int l = 0;
    while ((std::int64_t{1} << l) < 4 * std::int64_t{n}) ++l;  // L = ceil(log2(4n))
    AlphaGrid g;
    g.k = k;
    g.l = l;
    g.high_atom = std::ldexp(1.0, k + 1);
    g.grid.push_back(0.0);
    for (int e = -l; e <= k; ++e) g.grid.push_back(std::ldexp(1.0, e));
    return g;
}

double rev_at_alpha(const PerBuyerStats& stats, double alpha) {
    if (!(alpha >= 0.0)) throw DomainError("rev_at_alpha needs alpha >= 0");
    double rev = 0.0;
    for (std::size_t i = 0; i < stats.w.size(); ++i) {
        const double charge = stats.s[i] + alpha * stats.r[i];
        if (stats.w[i] >= charge - kParticipationTol) rev += charge;
    }
    return rev;
}

namespace {

PerBuyerStats model_stats(const Instance& instance, BaseModel model, std::size_t cap) {
    return model == BaseModel::SingleItemSpa ? single_item_stats(instance)
                                             : stats_exact(instance, model, cap);
}

PeerRevenue peer_revenue_from_stats(PerBuyerStats stats, int k, std::size_t n) {
    PeerRevenue out;
    out.grid = alpha_support(k, static_cast<int>(n));
    for (double alpha : out.grid.grid)
        out.per_alpha.emplace_back(alpha, rev_at_alpha(stats, alpha));
    out.rev_high = rev_at_alpha(stats, out.grid.high_atom);
    double grid_sum = 0.0;
    for (const auto& [alpha, rev] : out.per_alpha) grid_sum += rev;
    out.revenue = 0.5 * out.rev_high +
                  grid_sum / (2.0 * static_cast<double>(out.grid.grid.size()));
    out.stats = std::move(stats);
    return out;
}

std::vector<double> iid_thresholds(const Instance& instance, const PerBuyerStats& stats) {
    const std::size_t n = instance.n();
    std::vector<double> tau(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t ip = i == 0 ? 1 : 0;  // smallest index != i
        if (instance.buyers[i] == instance.buyers[ip]) {
            tau[i] = stats.w[i] - stats.s[i];  // same profile, same utility
            continue;
        }
        Instance swapped = instance;
        swapped.buyers[i] = instance.buyers[ip];
        const PerBuyerStats st = single_item_stats(swapped);
        tau[i] = st.w[i] - st.s[i];
    }
    return tau;
}

struct WeightedThresholds {
    double weight;
    std::vector<double> thresholds;
};

std::vector<WeightedThresholds> mechanism_components(const MechanismConfig& config,
                                                     const Instance& reported,
                                                     const PerBuyerStats& stats) {
    const std::size_t n = reported.n();
    std::vector<WeightedThresholds> parts;
    switch (config.type) {
        case MechanismConfig::Type::Tam: {
            if (config.thresholds.size() != n)
                throw ValidationError("tam thresholds length must equal buyer count");
            parts.push_back({1.0, config.thresholds});
            break;
        }
        case MechanismConfig::Type::PeerMax:
        case MechanismConfig::Type::PeerWelfare: {
            const AlphaGrid grid = alpha_support(config.k, static_cast<int>(n));
            const double unit = 1.0 / (2.0 * static_cast<double>(grid.grid.size()));
            auto tau_at = [&](double alpha) {
                std::vector<double> tau(n);
                for (std::size_t i = 0; i < n; ++i) tau[i] = alpha * stats.r[i];
                return tau;
            };
            for (double alpha : grid.grid) parts.push_back({unit, tau_at(alpha)});
            parts.push_back({0.5, tau_at(grid.high_atom)});
            break;
        }
        case MechanismConfig::Type::IidTam:
            parts.push_back({1.0, iid_thresholds(reported, stats)});
            break;
    }
    return parts;
}

}  // namespace

TamReport tam_evaluate(BaseModel base, const Instance& reported, std::vector<double> thresholds,
                       const std::optional<std::vector<Distribution>>& true_profile,
                       std::size_t cap) {
    const std::size_t n = reported.n();
    if (thresholds.size() != n)
        throw ValidationError("tam_evaluate thresholds length must equal buyer count");
    const PerBuyerStats stats = model_stats(reported, base, cap);

    TamReport rep;
    rep.thresholds = std::move(thresholds);
    rep.u_base.resize(n);
    rep.participates.resize(n);
    rep.p.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        rep.u_base[i] = stats.w[i] - stats.s[i];
        rep.participates[i] = rep.u_base[i] >= rep.thresholds[i] - kParticipationTol;
        if (rep.participates[i]) rep.p[i] = stats.s[i] + rep.thresholds[i];
        rep.revenue += rep.p[i];
    }
    if (true_profile) {
        if (true_profile->size() != n)
            throw ValidationError("true profile length must equal buyer count");
        std::vector<double> util(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (!rep.participates[i]) continue;
            util[i] = coupled_allocation_value(base, reported, i, (*true_profile)[i], cap) -
                      stats.s[i] - rep.thresholds[i];
        }
        rep.true_utility = std::move(util);
    }
    return rep;
}

PeerRevenue peer_max_revenue(const Instance& instance, int k, std::size_t cap) {
    (void)cap;  // closed-form stats need no enumeration
    return peer_revenue_from_stats(single_item_stats(instance), k, instance.n());
}

PeerRevenue peer_welfare_revenue(const Instance& instance, int k, std::size_t cap) {
    return peer_revenue_from_stats(stats_exact(instance, BaseModel::MultiUnitVcg, cap), k,
                                   instance.n());
}

IidTamResult iid_tam_revenue(const Instance& instance, std::size_t cap) {
    (void)cap;
    IidTamResult out;
    out.stats = single_item_stats(instance);
    out.thresholds = iid_thresholds(instance, out.stats);
    const std::size_t n = instance.n();
    out.participates.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = out.stats.w[i] - out.stats.s[i];
        out.participates[i] = u >= out.thresholds[i] - kParticipationTol;
        if (out.participates[i]) out.revenue += out.stats.s[i] + out.thresholds[i];
    }
    return out;
}

BaseModel mechanism_model(const MechanismConfig& config) {
    switch (config.type) {
        case MechanismConfig::Type::Tam: return config.base;
        case MechanismConfig::Type::PeerWelfare: return BaseModel::MultiUnitVcg;
        case MechanismConfig::Type::PeerMax:
        case MechanismConfig::Type::IidTam: return BaseModel::SingleItemSpa;
    }
    return BaseModel::SingleItemSpa;
}

double mechanism_revenue(const MechanismConfig& config, const Instance& instance,
                         std::size_t cap) {
    const BaseModel model = mechanism_model(config);
    const PerBuyerStats stats = model_stats(instance, model, cap);
    double revenue = 0.0;
    for (const WeightedThresholds& part : mechanism_components(config, instance, stats)) {
        double rev = 0.0;
        for (std::size_t i = 0; i < stats.w.size(); ++i)
            if (stats.w[i] - stats.s[i] >= part.thresholds[i] - kParticipationTol)
                rev += stats.s[i] + part.thresholds[i];
        revenue += part.weight * rev;
    }
    return revenue;
}

double participation_weight(const MechanismConfig& config, const Instance& reported,
                            std::size_t i, std::size_t cap) {
    const BaseModel model = mechanism_model(config);
    const PerBuyerStats stats = model_stats(reported, model, cap);
    const double u_base = stats.w[i] - stats.s[i];
    double weight = 0.0;
    for (const WeightedThresholds& part : mechanism_components(config, reported, stats))
        if (u_base >= part.thresholds[i] - kParticipationTol) weight += part.weight;
    return weight;
}

double mechanism_exante_utility(const MechanismConfig& config, const Instance& reported,
                                std::size_t i, const Distribution& true_dist, std::size_t cap) {
    const BaseModel model = mechanism_model(config);
    const PerBuyerStats stats = model_stats(reported, model, cap);
    const double alloc_value = coupled_allocation_value(model, reported, i, true_dist, cap);
    const double u_base = stats.w[i] - stats.s[i];
    double utility = 0.0;
    for (const WeightedThresholds& part : mechanism_components(config, reported, stats)) {
        if (u_base >= part.thresholds[i] - kParticipationTol)
            utility += part.weight * (alloc_value - stats.s[i] - part.thresholds[i]);
    }
    return utility;
}

InducedBidTable induce_bid_mechanism(const MechanismConfig& config, const Distribution& base,
                                     std::vector<double> factors, int n, std::size_t cap) {
    if (n < 2) throw ValidationError("induce_bid_mechanism needs n >= 2");
    if (factors.empty()) throw ValidationError("factor grid must be non-empty");
    if (mechanism_model(config) != BaseModel::SingleItemSpa)
        throw ValidationError("induce_bid_mechanism supports single-item mechanisms only");
    for (double a : factors)
        if (!(a >= 0.0)) throw ValidationError("factors must be >= 0");

    InducedBidTable table;
    table.factors = std::move(factors);
    table.n = n;
    table.feasibility_bound = base.mean();

    const std::size_t nf = table.factors.size();
    std::size_t profiles = 1;
    for (int j = 0; j < n; ++j) {
        if (profiles > cap / nf)
            throw CapacityError("factor profile table exceeds cap " + std::to_string(cap));
        profiles *= nf;
    }

    const std::size_t un = static_cast<std::size_t>(n);
    std::vector<std::size_t> digits(un, 0);
    table.alloc.assign(profiles, std::vector<double>(un, 0.0));
    table.pay.assign(profiles, std::vector<double>(un, 0.0));

    for (std::size_t p = 0; p < profiles; ++p) {
        std::vector<Distribution> buyers;
        buyers.reserve(un);
        for (std::size_t j = 0; j < un; ++j)
            buyers.push_back(base.scaled(table.factors[digits[j]]));
        const Instance scaled = Instance::single_item(std::move(buyers));
        const PerBuyerStats stats = single_item_stats(scaled);
        const auto parts = mechanism_components(config, scaled, stats);
        for (std::size_t i = 0; i < un; ++i) {
            const double coupled =
                coupled_allocation_value(BaseModel::SingleItemSpa, scaled, i, base, cap);
            const double u_base = stats.w[i] - stats.s[i];
            double x = 0.0, pay = 0.0;
            for (const WeightedThresholds& part : parts) {
                if (u_base >= part.thresholds[i] - kParticipationTol) {
                    x += part.weight * coupled;
                    pay += part.weight * (stats.s[i] + part.thresholds[i]);
                }
            }
            table.alloc[p][i] = x;
            table.pay[p][i] = pay;
        }
        for (std::size_t j = un; j-- > 0;) {
            if (++digits[j] < nf) break;
            digits[j] = 0;
        }
    }

    // Audit the tabulated mechanism: IC across own-factor deviations, IR at
    // the truthful rows, and the single-item feasibility bound on x~.
    table.min_ir_utility = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> radix(un, 1);
    for (std::size_t j = un; j-- > 1;) radix[j - 1] = radix[j] * nf;
    for (std::size_t p = 0; p < profiles; ++p) {
        for (std::size_t i = 0; i < un; ++i) {
            const std::size_t truth_digit = (p / radix[i]) % nf;
            const double a = table.factors[truth_digit];
            const double u_truth = a * table.alloc[p][i] - table.pay[p][i];
            table.min_ir_utility = std::min(table.min_ir_utility, u_truth);
            if (u_truth < -1e-9) ++table.ir_violations;
            ++table.feas_checks;
            const double excess = table.alloc[p][i] - table.feasibility_bound;
            table.max_feas_excess = std::max(table.max_feas_excess, excess);
            if (excess > 1e-9) ++table.feas_violations;
            for (std::size_t dev = 0; dev < nf; ++dev) {
                if (dev == truth_digit) continue;
                const std::size_t pdev = p - truth_digit * radix[i] + dev * radix[i];
                const double u_dev = a * table.alloc[pdev][i] - table.pay[pdev][i];
                ++table.ic_checks;
                const double regret = u_dev - u_truth;
                table.max_ic_regret = std::max(table.max_ic_regret, regret);
                if (regret > 1e-9) ++table.ic_violations;
            }
        }
    }
    return table;
}

}  // namespace peermax
