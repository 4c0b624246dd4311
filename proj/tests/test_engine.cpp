#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "peermax/engine.hpp"
#include "peermax/errors.hpp"

using namespace peermax;

namespace {

Instance i1() {
    return Instance::single_item({Distribution::discrete({{3, 0.5}, {1, 0.5}}),
                                  Distribution::degenerate(2.0)});
}

void check_accounting(const PerBuyerStats& st, double tol) {
    const std::size_t n = st.w.size();
    double wel = 0.0, rev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        wel += st.w[i];
        rev += st.s[i];
        CHECK(st.s[i] <= st.w[i] + tol);
        double others = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) others += st.w[j];
        CHECK(std::abs(st.r[i] - (st.s[i] + others)) <= tol);
        // SPA <= r_i <= WEL <= r_i + w_i <= 2 WEL
        CHECK(st.base_rev <= st.r[i] + tol);
        CHECK(st.r[i] <= st.wel + tol);
        CHECK(st.wel <= st.r[i] + st.w[i] + tol);
        CHECK(st.r[i] + st.w[i] <= 2.0 * st.wel + tol);
    }
    CHECK(st.wel == doctest::Approx(wel).epsilon(1e-12));
    CHECK(st.base_rev == doctest::Approx(rev).epsilon(1e-12));
}

}  // namespace

TEST_CASE("stats_exact on the I1 fixture") {
    const PerBuyerStats st = stats_exact(i1(), BaseModel::SingleItemSpa);
    CHECK(st.w[0] == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(st.w[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(st.s[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(st.s[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(st.r[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(st.r[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(st.wel == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(st.base_rev == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("stats_exact tie-break gives the item to the lowest index") {
    const double c = 3.25;
    const Instance inst = Instance::single_item(
        {Distribution::degenerate(c), Distribution::degenerate(c)});
    const PerBuyerStats st = stats_exact(inst, BaseModel::SingleItemSpa);
    CHECK(st.w[0] == c);
    CHECK(st.w[1] == 0.0);
    CHECK(st.s[0] == c);
    CHECK(st.s[1] == 0.0);
    CHECK(st.r[0] == c);
    CHECK(st.r[1] == c);
    CHECK(st.wel == c);
}

TEST_CASE("stats_exact multi-unit fixture") {
    const Instance inst = Instance::make({Distribution::degenerate(5.0),
                                          Distribution::degenerate(3.0),
                                          Distribution::degenerate(2.0)},
                                         2.0, {1.0, 1.0, 1.0});
    const PerBuyerStats st = stats_exact(inst, BaseModel::MultiUnitVcg);
    CHECK(st.w == std::vector<double>{5.0, 3.0, 0.0});
    CHECK(st.s == std::vector<double>{2.0, 2.0, 0.0});
    CHECK(st.r == std::vector<double>{5.0, 7.0, 8.0});
    CHECK(st.wel == 8.0);
    CHECK(st.base_rev == 4.0);
    check_accounting(st, 1e-9);
}

TEST_CASE("stats_exact rejects oversized or non-discrete input") {
    RngStream stream(1);
    const Instance big = random_discrete_instance(4, 6, 10.0, stream);
    CHECK_THROWS_AS(stats_exact(big, BaseModel::SingleItemSpa, /*cap=*/1000), CapacityError);
    const Instance er = make_truncated_er_iid(2, 4.0, 1.0).instance;
    CHECK_THROWS_AS(stats_exact(er, BaseModel::SingleItemSpa), RepresentationError);
}

TEST_CASE("accounting identity and the benchmark chain hold on random instances") {
    RngStream stream(17);
    for (int rep = 0; rep < 60; ++rep) {
        Instance inst = random_discrete_instance(
            2 + static_cast<int>(stream.next_below(3)),
            1 + static_cast<int>(stream.next_below(3)), 10.0, stream);
        check_accounting(stats_exact(inst, BaseModel::SingleItemSpa), 1e-9);
        inst.m = 1.0 + static_cast<double>(stream.next_below(3));
        for (double& d : inst.demands) d = 1.0 + static_cast<double>(stream.next_below(2));
        check_accounting(stats_exact(inst, BaseModel::MultiUnitVcg), 1e-9);
    }
}

TEST_CASE("closed-form single-item stats equal the enumeration oracle") {
    RngStream stream(23);
    for (int rep = 0; rep < 40; ++rep) {
        const Instance inst = random_discrete_instance(
            2 + static_cast<int>(stream.next_below(4)),
            1 + static_cast<int>(stream.next_below(4)), 10.0, stream);
        const PerBuyerStats oracle = stats_exact(inst, BaseModel::SingleItemSpa);
        const PerBuyerStats fast = single_item_stats(inst);
        for (std::size_t i = 0; i < inst.n(); ++i) {
            CHECK(fast.w[i] == doctest::Approx(oracle.w[i]).epsilon(1e-12));
            CHECK(fast.s[i] == doctest::Approx(oracle.s[i]).epsilon(1e-12));
            CHECK(fast.r[i] == doctest::Approx(oracle.r[i]).epsilon(1e-12));
        }
        CHECK(fast.wel == doctest::Approx(oracle.wel).epsilon(1e-12));
        CHECK(fast.base_rev == doctest::Approx(oracle.base_rev).epsilon(1e-12));
    }
}

TEST_CASE("closed-form stats survive heavy cross-buyer ties") {
    // Integer-valued atoms force equal values across buyers, exercising the
    // strict-below / at-most split in the winner products.
    RngStream stream(97);
    for (int rep = 0; rep < 60; ++rep) {
        const int n = 2 + static_cast<int>(stream.next_below(3));
        std::vector<Distribution> buyers;
        for (int i = 0; i < n; ++i) {
            const int k = 1 + static_cast<int>(stream.next_below(3));
            std::vector<Atom> atoms;
            for (int a = 0; a < k; ++a)
                atoms.push_back({std::floor(stream.next_double() * 4.0), 1.0});
            for (Atom& atom : atoms) atom.prob = 1.0 / static_cast<double>(atoms.size());
            buyers.push_back(Distribution::discrete(std::move(atoms)));
        }
        const Instance inst = Instance::single_item(std::move(buyers));
        const PerBuyerStats oracle = stats_exact(inst, BaseModel::SingleItemSpa);
        const PerBuyerStats fast = single_item_stats(inst);
        for (std::size_t i = 0; i < inst.n(); ++i) {
            CHECK(std::abs(fast.w[i] - oracle.w[i]) <= 1e-12);
            CHECK(std::abs(fast.s[i] - oracle.s[i]) <= 1e-12);
            CHECK(std::abs(fast.r[i] - oracle.r[i]) <= 1e-12);
        }
        CHECK(std::abs(fast.wel - oracle.wel) <= 1e-12);
    }
}

TEST_CASE("ex-ante utility in the multi-unit model matches the stats") {
    const Instance inst = Instance::make({Distribution::degenerate(5.0),
                                          Distribution::degenerate(3.0),
                                          Distribution::degenerate(2.0)},
                                         2.0, {1.0, 1.0, 1.0});
    const PerBuyerStats st = stats_exact(inst, BaseModel::MultiUnitVcg);
    for (std::size_t i = 0; i < inst.n(); ++i)
        CHECK(exante_utility_exact(BaseModel::MultiUnitVcg, inst, i, inst.buyers[i]) ==
              doctest::Approx(st.w[i] - st.s[i]).epsilon(1e-12));
}

TEST_CASE("wel equals the mean of the max distribution") {
    RngStream stream(29);
    for (int rep = 0; rep < 30; ++rep) {
        const Instance inst = random_discrete_instance(
            2 + static_cast<int>(stream.next_below(3)), 3, 10.0, stream);
        const PerBuyerStats st = stats_exact(inst, BaseModel::SingleItemSpa);
        CHECK(st.wel ==
              doctest::Approx(max_distribution(inst.buyers).mean()).epsilon(1e-9));
    }
}

TEST_CASE("serial and parallel kernels are bit-identical") {
    RngStream stream(31);
    const Instance inst = random_discrete_instance(4, 5, 10.0, stream);
    const PerBuyerStats par = stats_exact(inst, BaseModel::SingleItemSpa, kDefaultCap,
                                          ExecMode::Parallel);
    const PerBuyerStats ser = stats_exact(inst, BaseModel::SingleItemSpa, kDefaultCap,
                                          ExecMode::Serial);
    CHECK(par.w == ser.w);
    CHECK(par.s == ser.s);
    CHECK(par.r == ser.r);
    CHECK(par.wel == ser.wel);
    CHECK(par.base_rev == ser.base_rev);

    RngStream mc1(77), mc2(77);
    const PerBuyerStats mpar = stats_mc(inst, BaseModel::SingleItemSpa, 50'000, mc1,
                                        ExecMode::Parallel);
    const PerBuyerStats mser = stats_mc(inst, BaseModel::SingleItemSpa, 50'000, mc2,
                                        ExecMode::Serial);
    CHECK(mpar.w == mser.w);
    CHECK(mpar.s == mser.s);
    CHECK(mpar.r == mser.r);
    CHECK(mpar.stderrs->w == mser.stderrs->w);
}

TEST_CASE("stats_mc agrees with the exact engine within 4 standard errors") {
    const Instance inst = i1();
    const PerBuyerStats exact = stats_exact(inst, BaseModel::SingleItemSpa);
    RngStream stream(41);
    const PerBuyerStats mc = stats_mc(inst, BaseModel::SingleItemSpa, 1'000'000, stream);
    REQUIRE(mc.stderrs.has_value());
    for (std::size_t i = 0; i < inst.n(); ++i) {
        CHECK(std::abs(mc.w[i] - exact.w[i]) <= 4.0 * mc.stderrs->w[i] + 1e-12);
        CHECK(std::abs(mc.s[i] - exact.s[i]) <= 4.0 * mc.stderrs->s[i] + 1e-12);
        CHECK(std::abs(mc.r[i] - exact.r[i]) <= 4.0 * mc.stderrs->r[i] + 1e-12);
    }
    CHECK(std::abs(mc.wel - exact.wel) <= 4.0 * mc.stderrs->wel);
    CHECK(std::abs(mc.base_rev - exact.base_rev) <= 4.0 * mc.stderrs->base_rev);
}

TEST_CASE("stats_mc keeps the accounting identity within combined errors") {
    const Instance inst = i1();
    RngStream stream(49);
    const PerBuyerStats mc = stats_mc(inst, BaseModel::SingleItemSpa, 200'000, stream);
    for (std::size_t i = 0; i < inst.n(); ++i) {
        double others = 0.0, var = mc.stderrs->r[i] * mc.stderrs->r[i] +
                                    mc.stderrs->s[i] * mc.stderrs->s[i];
        for (std::size_t j = 0; j < inst.n(); ++j) {
            if (j == i) continue;
            others += mc.w[j];
            var += mc.stderrs->w[j] * mc.stderrs->w[j];
        }
        CHECK(std::abs(mc.r[i] - (mc.s[i] + others)) <= 4.0 * std::sqrt(var) + 1e-12);
    }
}

TEST_CASE("stats_mc reproduces the truncated-er closed form") {
    const TruncatedErIid gen = make_truncated_er_iid(2, 4.0, 1.0);
    RngStream stream(43);
    const PerBuyerStats mc = stats_mc(gen.instance, BaseModel::SingleItemSpa, 1'000'000, stream);
    CHECK(std::abs(mc.base_rev - gen.spa_closed_form) <= 4.0 * mc.stderrs->base_rev);
}

TEST_CASE("stats_mc with a single sample stays finite") {
    RngStream stream(47);
    const PerBuyerStats mc = stats_mc(i1(), BaseModel::SingleItemSpa, 1, stream);
    REQUIRE(mc.stderrs.has_value());
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(std::isfinite(mc.w[i]));
        CHECK(std::isfinite(mc.stderrs->w[i]));
    }
    CHECK(mc.wel >= 0.0);
    RngStream s2(48);
    CHECK_THROWS_AS(stats_mc(i1(), BaseModel::SingleItemSpa, 0, s2), DomainError);
}

TEST_CASE("monte carlo error shrinks like one over root samples") {
    const Instance inst = i1();
    const PerBuyerStats exact = stats_exact(inst, BaseModel::SingleItemSpa);
    auto max_err = [&](std::int64_t samples) {
        RngStream stream(53);
        const PerBuyerStats mc = stats_mc(inst, BaseModel::SingleItemSpa, samples, stream);
        double err = std::abs(mc.wel - exact.wel);
        for (std::size_t i = 0; i < inst.n(); ++i) {
            err = std::max(err, std::abs(mc.w[i] - exact.w[i]));
            err = std::max(err, std::abs(mc.s[i] - exact.s[i]));
            err = std::max(err, std::abs(mc.r[i] - exact.r[i]));
        }
        return err;
    };
    const double e3 = max_err(1'000);
    const double e4 = max_err(10'000);
    const double e5 = max_err(100'000);
    const double e6 = max_err(1'000'000);
    // Least-squares slope of log error against log samples, expected -1/2.
    const double xs[4] = {3, 4, 5, 6};
    const double ys[4] = {std::log10(e3), std::log10(e4), std::log10(e5), std::log10(e6)};
    double xbar = 0, ybar = 0;
    for (int v = 0; v < 4; ++v) {
        xbar += xs[v] / 4;
        ybar += ys[v] / 4;
    }
    double num = 0, den = 0;
    for (int v = 0; v < 4; ++v) {
        num += (xs[v] - xbar) * (ys[v] - ybar);
        den += (xs[v] - xbar) * (xs[v] - xbar);
    }
    CHECK(num / den < -0.25);
    CHECK(e6 < e3);
}

TEST_CASE("quantile coupling merges breakpoints") {
    const Distribution f = Distribution::discrete({{3, 0.5}, {1, 0.5}});
    const auto c1 = quantile_coupling(f, Distribution::degenerate(2.0));
    REQUIRE(c1.size() == 2);
    CHECK(c1[0].measure == doctest::Approx(0.5));
    CHECK(c1[0].true_value == 3.0);
    CHECK(c1[0].bid_value == 2.0);
    CHECK(c1[1].true_value == 1.0);
    CHECK(c1[1].bid_value == 2.0);

    const auto c2 = quantile_coupling(f, f);
    for (const CouplingCell& cell : c2) CHECK(cell.true_value == cell.bid_value);

    const auto c3 = quantile_coupling(f, Distribution::discrete({{4, 0.25}, {0, 0.75}}));
    REQUIRE(c3.size() == 3);
    CHECK(c3[0].measure == doctest::Approx(0.25));
    CHECK(c3[0].true_value == 3.0);
    CHECK(c3[0].bid_value == 4.0);
    CHECK(c3[1].measure == doctest::Approx(0.25));
    CHECK(c3[1].true_value == 3.0);
    CHECK(c3[1].bid_value == 0.0);
    CHECK(c3[2].measure == doctest::Approx(0.5));
    CHECK(c3[2].true_value == 1.0);
    CHECK(c3[2].bid_value == 0.0);

    double total = 0.0;
    for (const CouplingCell& cell : c3) total += cell.measure;
    CHECK(std::abs(total - 1.0) <= 1e-12);
}

TEST_CASE("ex-ante utility under truthful and zero reports") {
    const Instance inst = i1();
    const double u0 = exante_utility_exact(BaseModel::SingleItemSpa, inst, 0, inst.buyers[0]);
    CHECK(u0 == doctest::Approx(0.5).epsilon(1e-12));

    const PerBuyerStats st = stats_exact(inst, BaseModel::SingleItemSpa);
    for (std::size_t i = 0; i < inst.n(); ++i)
        CHECK(exante_utility_exact(BaseModel::SingleItemSpa, inst, i, inst.buyers[i]) ==
              doctest::Approx(st.w[i] - st.s[i]).epsilon(1e-12));

    Instance zero_report = inst;
    const Distribution truth = inst.buyers[0];
    zero_report.buyers[0] = Distribution::degenerate(0.0);
    CHECK(exante_utility_exact(BaseModel::SingleItemSpa, zero_report, 0, truth) == 0.0);
}

TEST_CASE("vcg allocations stay feasible on every enumerated profile") {
    RngStream stream(59);
    for (int rep = 0; rep < 10; ++rep) {
        Instance inst = random_discrete_instance(3, 2, 10.0, stream);
        inst.m = 1.0 + static_cast<double>(stream.next_below(3));
        for (double& d : inst.demands) d = 1.0 + static_cast<double>(stream.next_below(2));
        // Walk the full joint support.
        std::vector<std::size_t> digits(inst.n(), 0);
        bool done = false;
        while (!done) {
            std::vector<double> bids(inst.n());
            for (std::size_t i = 0; i < inst.n(); ++i)
                bids[i] = inst.buyers[i].atoms()[digits[i]].value;
            const BidOutcome out = vcg_outcome(bids, inst.m, inst.demands);
            double total = 0.0;
            for (std::size_t i = 0; i < inst.n(); ++i) {
                CHECK(out.alloc[i] >= 0.0);
                CHECK(out.alloc[i] <= inst.demands[i]);
                CHECK(out.pay[i] >= 0.0);
                total += out.alloc[i];
            }
            CHECK(total <= inst.m + 1e-12);
            done = true;
            for (std::size_t i = inst.n(); i-- > 0;) {
                if (++digits[i] < inst.buyers[i].atoms().size()) {
                    done = false;
                    break;
                }
                digits[i] = 0;
            }
        }
    }
}
