#pragma once

#include <cstdint>
#include <vector>

#include "peermax/rng.hpp"

namespace peermax {

struct Atom {
    double value = 0.0;
    double prob = 0.0;

    bool operator==(const Atom&) const = default;
};

/// A buyer's value law. Quantile convention is v(q) = F^-1(1-q): high values
/// sit at low quantiles, and v(q) with q ~ U[0,1] reproduces F.
class Distribution {
public:
    enum class Kind { Discrete, Degenerate, TruncatedEqualRevenue };

    /// Atoms are deduplicated and sorted by descending value; probabilities
    /// must sum to 1 within 1e-12 and all values must be >= 0.
    static Distribution discrete(std::vector<Atom> atoms);
    static Distribution degenerate(double value);
    /// Quantile v(q) = scale / max(q, 1/h); atom of mass 1/h at scale*h.
    static Distribution truncated_er(double scale, double h);

    Kind kind() const { return kind_; }
    bool is_discrete() const { return kind_ != Kind::TruncatedEqualRevenue; }

    /// Discrete support, descending values (Degenerate yields one atom).
    const std::vector<Atom>& atoms() const;
    double degenerate_value() const;
    double er_scale() const { return scale_; }
    double er_h() const { return h_; }

    double quantile(double q) const;
    double cdf(double v) const;  // P[X <= v]
    double mean() const;
    Distribution scaled(double a) const;
    double sample(RngStream& stream) const { return quantile(stream.next_double()); }

    /// Upper-tail cumulative probabilities Q_k = P[X >= value_k], ending at 1.
    /// These are the quantile breakpoints used by coupling and sampling.
    std::vector<double> tail_breakpoints() const;

    bool operator==(const Distribution&) const = default;

private:
    Distribution() = default;

    Kind kind_ = Kind::Degenerate;
    std::vector<Atom> atoms_;      // Discrete / Degenerate
    double scale_ = 0.0, h_ = 1.0; // TruncatedEqualRevenue
};

struct Instance {
    std::vector<Distribution> buyers;
    double m = 1.0;
    std::vector<double> demands;

    /// n >= 2, m > 0, all demands > 0; single-item means m=1 and d=1^n.
    static Instance make(std::vector<Distribution> buyers, double m, std::vector<double> demands);
    static Instance single_item(std::vector<Distribution> buyers);

    std::size_t n() const { return buyers.size(); }
    bool is_single_item() const;
    bool all_discrete() const;
};

/// Exact law of max_i X_i for independent discrete draws, via CDF products
/// over the merged support.
Distribution max_distribution(const std::vector<Distribution>& dists);

struct TruncatedErIid {
    Instance instance;
    double spa_closed_form;   // scale*h*(1-(1-1/h)^n), also the optimal-auction revenue
    double mean_per_buyer;    // scale*(1+ln h), a WEL lower bound
};
TruncatedErIid make_truncated_er_iid(int n, double h, double scale);

enum class HardKind { General, Regular };

/// Metadata of the randomized hard family: member j (1-based) has weight
/// delta*2^j; general members are {1/(2^j eps) w.p. eps; 0 otherwise},
/// regular members are TruncatedER{1/2^j, 1/eps}.
struct HardFamily {
    HardKind kind = HardKind::General;
    int n = 0;
    int levels = 0;   // L
    double eps = 0.0;
    double delta = 0.0;
    std::vector<Distribution> members;
    std::vector<double> weights;
};

struct HardInstance {
    Instance instance;
    HardFamily family;
};

/// Buyers drawn i.i.d. from the hard family. Requires n >= 16 so L >= 1.
HardInstance make_hard_instance(HardKind kind, int n, RngStream& stream);

/// Sweep fodder: each buyer gets k atoms with values uniform in [0, vmax]
/// and a random probability vector; deterministic under the stream's seed.
Instance random_discrete_instance(int n, int k, double vmax, RngStream& stream);

}  // namespace peermax
