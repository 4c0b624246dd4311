// Acceptance suite: one line per criterion, nonzero exit iff any fail.
// The CLI path for the determinism criterion comes from argv[1] or the
// PEERMAX_CLI environment variable.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "peermax/json_io.hpp"
#include "peermax/verify.hpp"

using namespace peermax;

namespace {

int g_failures = 0;

void criterion(int number, const std::string& label, const std::function<bool(std::string&)>& fn) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
        ok = fn(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %2d: %s (%.2fs)%s%s\n", ok ? "PASS" : "FAIL", number,
                label.c_str(), secs, detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

Distribution random_distribution(RngStream& stream, int max_atoms, double vmax) {
    const int k = 1 + static_cast<int>(stream.next_below(static_cast<std::uint64_t>(max_atoms)));
    std::vector<Atom> atoms;
    double total = 0.0;
    for (int a = 0; a < k; ++a) {
        atoms.push_back({vmax * stream.next_double(), 1e-3 + stream.next_double()});
        total += atoms.back().prob;
    }
    for (Atom& a : atoms) a.prob /= total;
    return Distribution::discrete(std::move(atoms));
}

std::string g_cli;

int run_cli(const std::string& args) {
    const std::string command = g_cli + " " + args + " > acc_stdout.txt 2> acc_stderr.txt";
    return WEXITSTATUS(std::system(command.c_str()));
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

bool criterion_iid_full_extraction(std::string& detail) {
    RngStream stream(1001);
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const int n = 2 + static_cast<int>(stream.next_below(3));
        const Distribution f = random_distribution(stream, 4, 10.0);
        const Instance inst = Instance::single_item(
            std::vector<Distribution>(static_cast<std::size_t>(n), f));
        const IidTamResult res = iid_tam_revenue(inst);
        worst = std::max(worst, std::abs(res.revenue - res.stats.wel));
    }
    detail = "max |revenue - WEL| = " + std::to_string(worst);
    return worst <= 1e-9;
}

bool criterion_accounting(std::string& detail) {
    RngStream stream(1002);
    double worst = 0.0;
    auto check_stats = [&](const PerBuyerStats& st) {
        const std::size_t n = st.w.size();
        for (std::size_t i = 0; i < n; ++i) {
            double others = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) others += st.w[j];
            worst = std::max(worst, std::abs(st.r[i] - (st.s[i] + others)));
            worst = std::max(worst, std::max(0.0, st.s[i] - st.w[i]));
            worst = std::max(worst, std::max(0.0, st.base_rev - st.r[i]));
            worst = std::max(worst, std::max(0.0, st.r[i] - st.wel));
            worst = std::max(worst, std::max(0.0, st.wel - (st.r[i] + st.w[i])));
            worst = std::max(worst, std::max(0.0, (st.r[i] + st.w[i]) - 2.0 * st.wel));
        }
    };
    for (int rep = 0; rep < 1000; ++rep) {
        const int n = 2 + static_cast<int>(stream.next_below(4));
        const int k = 1 + static_cast<int>(stream.next_below(4));
        Instance inst = random_discrete_instance(n, k, 10.0, stream);
        check_stats(stats_exact(inst, BaseModel::SingleItemSpa));
        inst.m = 1.0 + static_cast<double>(stream.next_below(3));
        for (double& d : inst.demands) d = 1.0 + static_cast<double>(stream.next_below(2));
        check_stats(stats_exact(inst, BaseModel::MultiUnitVcg));
    }
    detail = "max identity/chain violation = " + std::to_string(worst);
    return worst <= 1e-9;
}

bool criterion_peer_max_bound(std::string& detail) {
    int violations = 0;
    for (int k = 1; k <= 3; ++k) {
        SweepConfig config;
        config.count = 334;
        config.n_min = 2;
        config.n_max = 5;
        config.k_min = 1;
        config.k_max = 3;
        config.big_k = k;
        config.seed = 2000 + static_cast<std::uint64_t>(k);
        violations += sweep(config).summary.violations;
    }
    const Instance i1 = Instance::single_item(
        {Distribution::discrete({{3, 0.5}, {1, 0.5}}), Distribution::degenerate(2.0)});
    const PeerRevenue pm = peer_max_revenue(i1, 1);
    const double bound = either_or_bound(pm.stats.wel, pm.stats.base_rev, 1, 2);
    const bool fixture_ok = pm.revenue == 0.5 && bound == 2.5 / 48.0;
    detail = "violations = " + std::to_string(violations) +
             ", I1 revenue = " + std::to_string(pm.revenue);
    return violations == 0 && fixture_ok;
}

bool criterion_peer_welfare_bound(std::string& detail) {
    int violations = 0;
    for (int k = 1; k <= 2; ++k) {
        SweepConfig config;
        config.count = 250;
        config.n_min = 2;
        config.n_max = 4;
        config.k_min = 1;
        config.k_max = 3;
        config.big_k = k;
        config.seed = 3000 + static_cast<std::uint64_t>(k);
        config.model = BaseModel::MultiUnitVcg;
        config.m_max = 3;
        config.d_max = 2;
        violations += sweep(config).summary.violations;
    }
    detail = "violations = " + std::to_string(violations);
    return violations == 0;
}

bool criterion_ic_audits(std::string& detail) {
    const std::vector<Distribution> degenerates{
        Distribution::degenerate(0.0), Distribution::degenerate(1.0),
        Distribution::degenerate(2.0), Distribution::degenerate(3.5)};
    const std::vector<Distribution> mixed{
        Distribution::discrete({{4, 0.5}, {1, 0.5}}),
        Distribution::discrete({{3, 0.25}, {2, 0.75}}),
        Distribution::degenerate(2.0),
        Distribution::discrete({{5, 0.25}, {1, 0.5}, {0, 0.25}})};

    MechanismConfig tam;
    tam.type = MechanismConfig::Type::Tam;
    MechanismConfig pm;
    pm.type = MechanismConfig::Type::PeerMax;
    pm.k = 1;
    MechanismConfig pw;
    pw.type = MechanismConfig::Type::PeerWelfare;
    pw.k = 1;
    MechanismConfig iid;
    iid.type = MechanismConfig::Type::IidTam;

    double max_regret = 0.0;
    for (int n : {2, 3}) {
        const std::vector<double> unit(static_cast<std::size_t>(n), 1.0);
        std::vector<double> capped(static_cast<std::size_t>(n), 2.0);
        tam.thresholds.assign(static_cast<std::size_t>(n), 0.25);
        for (const auto& cls : {degenerates, mixed}) {
            max_regret = std::max(max_regret, ic_audit(tam, cls, n).max_regret);
            max_regret = std::max(max_regret, ic_audit(pm, cls, n).max_regret);
            max_regret = std::max(max_regret, ic_audit(iid, cls, n).max_regret);
            max_regret = std::max(max_regret,
                                  ic_audit(pw, cls, n, /*m=*/2.0, capped).max_regret);
        }
    }
    detail = "max regret = " + std::to_string(max_regret);
    return max_regret <= 1e-9;
}

bool criterion_truncated_er_closed_forms(std::string& detail) {
    const TruncatedErIid gen = make_truncated_er_iid(2, 4.0, 1.0);
    RngStream stream(1006);
    const PerBuyerStats mc = stats_mc(gen.instance, BaseModel::SingleItemSpa, 1'000'000, stream);
    const double spa_err = std::abs(mc.base_rev - gen.spa_closed_form);
    const bool spa_ok = spa_err <= 4.0 * mc.stderrs->base_rev;

    RngStream mean_stream(1007);
    double sum = 0.0, sumsq = 0.0;
    const int samples = 1'000'000;
    for (int s = 0; s < samples; ++s) {
        const double v = gen.instance.buyers[0].sample(mean_stream);
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / samples;
    const double se =
        std::sqrt((sumsq - samples * mean * mean) / (samples - 1.0) / samples);
    const bool mean_ok = std::abs(mean - gen.mean_per_buyer) <= 4.0 * se;
    detail = "spa err = " + std::to_string(spa_err) +
             ", mean err = " + std::to_string(std::abs(mean - gen.mean_per_buyer));
    return spa_ok && mean_ok;
}

bool criterion_upper_bound_machinery(std::string& detail) {
    RngStream family_stream(1008);
    for (int n : {16, 64, 256, 1024}) {
        const HardInstance hard = make_hard_instance(HardKind::General, n, family_stream);
        if (!posted_price_cap(hard.family).ok) {
            detail = "posted price cap failed at n=" + std::to_string(n);
            return false;
        }
    }
    for (int n : {64, 256}) {
        RngStream stream(1100 + static_cast<std::uint64_t>(n));
        const ConcentrationResult res = concentration_audit(n, 2000, stream);
        if (!(res.lcb99 > 0.5)) {
            detail = "concentration lcb99 = " + std::to_string(res.lcb99) + " at n=" +
                     std::to_string(n);
            return false;
        }
    }
    MechanismConfig pm;
    pm.type = MechanismConfig::Type::PeerMax;
    pm.k = 1;
    RngStream audit_stream(1009);
    const UpperBoundResult audit = upper_bound_audit(pm, 64, 300, audit_stream);
    detail = "mean revenue = " + std::to_string(audit.mean_rev) + " vs ceiling " +
             std::to_string(audit.ceiling);
    return audit.ok;
}

bool criterion_arrangement(std::string& detail) {
    RngStream stream(1010);
    MechanismConfig pm;
    pm.type = MechanismConfig::Type::PeerMax;
    pm.k = 1;
    MechanismConfig pw;
    pw.type = MechanismConfig::Type::PeerWelfare;
    pw.k = 1;
    auto three_cell = [&]() {
        std::vector<Atom> atoms;
        for (int c = 0; c < 3; ++c)
            atoms.push_back({std::floor(stream.next_double() * 12.0), 1.0 / 3.0});
        return Distribution::discrete(std::move(atoms));
    };
    for (int rep = 0; rep < 50; ++rep) {
        const Instance spa_inst = Instance::single_item({three_cell(), three_cell()});
        const Distribution report = three_cell();
        if (!arrangement_audit(pm, spa_inst, 0, 3, report)) {
            detail = "spa-based identity suboptimal at rep " + std::to_string(rep);
            return false;
        }
        Instance vcg_inst = spa_inst;
        vcg_inst.m = 2.0;
        vcg_inst.demands = {2.0, 1.0};
        if (!arrangement_audit(pw, vcg_inst, 0, 3, report)) {
            detail = "vcg-based identity suboptimal at rep " + std::to_string(rep);
            return false;
        }
    }
    return true;
}

bool criterion_induced_tables(std::string& detail) {
    MechanismConfig pm;
    pm.type = MechanismConfig::Type::PeerMax;
    pm.k = 1;
    std::uint64_t ic = 0, feas = 0, ir = 0;
    for (const Distribution& base :
         {Distribution::degenerate(1.0), Distribution::discrete({{2, 0.5}, {1, 0.5}})}) {
        for (const std::vector<double>& factors :
             {std::vector<double>{0.0, 1.0, 2.0, 4.0}, std::vector<double>{1.0, 1.5, 3.0}}) {
            const InducedBidTable table = induce_bid_mechanism(pm, base, factors, 2);
            ic += table.ic_violations;
            feas += table.feas_violations;
            ir += table.ir_violations;
        }
    }
    detail = "ic/feas/ir violations = " + std::to_string(ic) + "/" + std::to_string(feas) + "/" +
             std::to_string(ir);
    return ic == 0 && feas == 0 && ir == 0;
}

bool criterion_cli_determinism(std::string& detail) {
    if (g_cli.empty()) {
        detail = "cli path missing (pass it as argv[1] or set PEERMAX_CLI)";
        return false;
    }
    std::ofstream("acc_i1.json")
        << R"({"m":1,"demands":[1,1],"buyers":[{"kind":"discrete","support":)"
        << R"([{"value":3,"prob":0.5},{"value":1,"prob":0.5}]},{"kind":"degenerate","value":2}]})";
    if (run_cli("stats --instance acc_i1.json --engine mc --samples 50000 --seed 77 "
                "--out acc_a.json") != 0)
        return false;
    if (run_cli("stats --instance acc_i1.json --engine mc --samples 50000 --seed 77 "
                "--out acc_b.json") != 0)
        return false;
    if (slurp("acc_a.json") != slurp("acc_b.json") || slurp("acc_a.json").empty()) {
        detail = "mc stats reports differ";
        return false;
    }
    if (run_cli("sweep --count 60 --seed 11 --output csv --out acc_s1.csv") != 0) return false;
    if (run_cli("sweep --count 60 --seed 11 --output csv --out acc_s2.csv") != 0) return false;
    if (slurp("acc_s1.csv") != slurp("acc_s2.csv") || slurp("acc_s1.csv").empty()) {
        detail = "sweep reports differ";
        return false;
    }
    if (run_cli("reproduce upper --n 64 --trials 50 --seed 3 --out acc_u1.json") != 0)
        return false;
    if (run_cli("reproduce upper --n 64 --trials 50 --seed 3 --out acc_u2.json") != 0)
        return false;
    if (slurp("acc_u1.json") != slurp("acc_u2.json")) {
        detail = "reproduce-upper reports differ";
        return false;
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) g_cli = argv[1];
    if (g_cli.empty())
        if (const char* env = std::getenv("PEERMAX_CLI")) g_cli = env;

    criterion(1, "iid TAM extracts the full welfare on 100 random iid instances",
              criterion_iid_full_extraction);
    criterion(2, "accounting identity and benchmark chain on 1000 instances, both models",
              criterion_accounting);
    criterion(3, "Peer-Max either-or guarantee sweep (1000+ instances, K in 1..3) plus fixture",
              criterion_peer_max_bound);
    criterion(4, "Peer-Welfare guarantee sweep (500 multi-unit instances, K in 1..2)",
              criterion_peer_welfare_bound);
    criterion(5, "no profitable deviation across TAM/Peer-Max/Peer-Welfare/iid-TAM",
              criterion_ic_audits);
    criterion(6, "truncated equal-revenue closed forms vs 1e6-sample Monte Carlo",
              criterion_truncated_er_closed_forms);
    criterion(7, "posted-price cap, concentration event, and revenue ceiling",
              criterion_upper_bound_machinery);
    criterion(8, "identity arrangement optimal on 50 random three-cell grids",
              criterion_arrangement);
    criterion(9, "induced bid mechanism has IC/IR/feasible tables",
              criterion_induced_tables);
    criterion(10, "CLI reports are byte-identical under fixed seeds",
              criterion_cli_determinism);

    std::printf("%d/10 criteria passed\n", 10 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
