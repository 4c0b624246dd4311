#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "peermax/errors.hpp"
#include "peermax/json_io.hpp"
#include "peermax/verify.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr double kAuditTol = 1e-9;

using peermax::Json;

enum ExitCode { kOk = 0, kUsage = 1, kValidation = 2, kCapacity = 3, kAuditFailure = 4 };

struct CommonOpts {
    std::string instance_path;
    std::string inline_json;
    std::uint64_t seed = 0;
    std::size_t cap = peermax::kDefaultCap;
    std::string output = "json";
    std::string out_path;
};

std::size_t default_cap_from_env() {
    if (const char* env = std::getenv("PEERMAX_CAP")) {
        const long long v = std::atoll(env);
        if (v >= 1) return static_cast<std::size_t>(v);
    }
    return peermax::kDefaultCap;
}

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_instance = true) {
    if (with_instance) {
        cmd->add_option("--instance", opts.instance_path, "path to an instance JSON file");
        cmd->add_option("--inline", opts.inline_json, "instance JSON given directly");
    }
    cmd->add_option("--seed", opts.seed, "rng seed (reports echo it)");
    cmd->add_option("--cap", opts.cap, "joint-support enumeration cap")
        ->default_val(default_cap_from_env());
    cmd->add_option("--output", opts.output, "report format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--out", opts.out_path, "write the report to this file instead of stdout");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw peermax::ValidationError("cannot open instance file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

peermax::Instance load_instance(const CommonOpts& opts) {
    if (opts.instance_path.empty() == opts.inline_json.empty())
        throw peermax::ValidationError("provide exactly one of --instance or --inline");
    const std::string text =
        opts.instance_path.empty() ? opts.inline_json : read_file(opts.instance_path);
    return peermax::parse_instance(peermax::parse_json_text(text));
}

Json report_meta(const std::string& command, const CommonOpts& opts) {
    return Json{{"version", kVersion},
                {"command", command},
                {"seed", opts.seed},
                {"cap", opts.cap}};
}

void emit(const std::string& text, const CommonOpts& opts) {
    if (opts.out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(opts.out_path, std::ios::binary);
    if (!out) throw peermax::ValidationError("cannot open output file: " + opts.out_path);
    out << text;
}

void emit_json(Json report, const CommonOpts& opts) {
    emit(report.dump(2) + "\n", opts);
}

std::string csv_stats(const peermax::PerBuyerStats& st) {
    auto fmt = [](double x) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", x);
        return std::string(buf);
    };
    std::string out = "buyer,w,s,r\n";
    for (std::size_t i = 0; i < st.w.size(); ++i)
        out += std::to_string(i) + "," + fmt(st.w[i]) + "," + fmt(st.s[i]) + "," + fmt(st.r[i]) +
               "\n";
    return out;
}

int cmd_stats(const CommonOpts& opts, const std::string& engine, const std::string& model_name,
              std::int64_t samples) {
    const peermax::Instance instance = load_instance(opts);
    peermax::BaseModel model = peermax::BaseModel::MultiUnitVcg;
    if (model_name == "spa" || (model_name == "auto" && instance.is_single_item()))
        model = peermax::BaseModel::SingleItemSpa;

    peermax::PerBuyerStats stats;
    if (engine == "exact") {
        stats = peermax::stats_exact(instance, model, opts.cap);
    } else {
        peermax::RngStream stream(opts.seed);
        stats = peermax::stats_mc(instance, model, samples, stream);
    }
    if (opts.output == "csv") {
        emit(csv_stats(stats), opts);
        return kOk;
    }
    Json report = report_meta("stats", opts);
    report["config"] = Json{{"engine", engine},
                            {"model", model == peermax::BaseModel::SingleItemSpa ? "spa" : "vcg"},
                            {"samples", engine == "mc" ? samples : 0}};
    report["instance_hash"] = peermax::instance_hash(instance);
    report["result"] = peermax::stats_to_json(stats);
    emit_json(std::move(report), opts);
    return kOk;
}

int cmd_run_peer(const CommonOpts& opts, int k, bool welfare) {
    const peermax::Instance instance = load_instance(opts);
    const peermax::PeerRevenue pr = welfare
                                        ? peermax::peer_welfare_revenue(instance, k, opts.cap)
                                        : peermax::peer_max_revenue(instance, k, opts.cap);
    const double bound = peermax::either_or_bound(pr.stats.wel, pr.stats.base_rev, k,
                                                  static_cast<int>(instance.n()));
    const bool satisfied = pr.revenue - bound >= -kAuditTol;
    if (opts.output == "csv") {
        emit(peermax::per_alpha_csv(pr), opts);
        return satisfied ? kOk : kAuditFailure;
    }
    Json report = report_meta(welfare ? "run-pw" : "run-pm", opts);
    report["config"] = Json{{"k", k}};
    report["instance_hash"] = peermax::instance_hash(instance);
    Json result = peermax::peer_revenue_to_json(pr);
    result["bound"] = bound;
    result["margin"] = pr.revenue - bound;
    result["satisfied"] = satisfied;
    report["result"] = std::move(result);
    emit_json(std::move(report), opts);
    return satisfied ? kOk : kAuditFailure;
}

int cmd_run_iid(const CommonOpts& opts) {
    const peermax::Instance instance = load_instance(opts);
    const peermax::IidTamResult res = peermax::iid_tam_revenue(instance, opts.cap);
    bool identical = true;
    for (const peermax::Distribution& f : instance.buyers)
        identical = identical && f == instance.buyers.front();
    const bool extraction_ok = std::abs(res.revenue - res.stats.wel) <= kAuditTol;

    Json report = report_meta("run-iid", opts);
    report["instance_hash"] = peermax::instance_hash(instance);
    Json result = peermax::iid_result_to_json(res);
    result["identical_buyers"] = identical;
    if (identical) result["full_extraction"] = extraction_ok;
    report["result"] = std::move(result);
    emit_json(std::move(report), opts);
    return (!identical || extraction_ok) ? kOk : kAuditFailure;
}

int cmd_ic_audit(const CommonOpts& opts, const std::string& mech_json,
                 const std::string& class_json, int n, double m, std::vector<double> demands) {
    const peermax::MechanismConfig config =
        peermax::parse_mechanism(peermax::parse_json_text(mech_json));
    const Json cls_doc = peermax::parse_json_text(class_json);
    if (!cls_doc.is_array())
        throw peermax::ValidationError("--class: expected a JSON array of distributions");
    std::vector<peermax::Distribution> cls;
    std::size_t idx = 0;
    for (const Json& d : cls_doc)
        cls.push_back(peermax::parse_distribution(d, "class[" + std::to_string(idx++) + "]"));

    const peermax::IcAuditResult res =
        peermax::ic_audit(config, cls, n, m, std::move(demands), opts.cap);
    const bool ok = res.max_regret <= kAuditTol;

    Json report = report_meta("ic-audit", opts);
    report["config"] = Json{{"mech", peermax::mechanism_to_json(config)}, {"n", n}, {"m", m}};
    Json result = peermax::ic_audit_to_json(res);
    result["ok"] = ok;
    report["result"] = std::move(result);
    emit_json(std::move(report), opts);
    return ok ? kOk : kAuditFailure;
}

int cmd_sweep(const CommonOpts& opts, peermax::SweepConfig config) {
    config.seed = opts.seed;
    config.cap = opts.cap;
    const peermax::SweepResult result = peermax::sweep(config);
    if (opts.output == "csv") {
        emit(peermax::sweep_to_csv(result), opts);
    } else {
        Json report = report_meta("sweep", opts);
        report["config"] = Json{{"count", config.count},
                                {"n_min", config.n_min},
                                {"n_max", config.n_max},
                                {"k_min", config.k_min},
                                {"k_max", config.k_max},
                                {"K", config.big_k},
                                {"model",
                                 config.model == peermax::BaseModel::SingleItemSpa ? "spa"
                                                                                   : "vcg"}};
        report["result"] = peermax::sweep_to_json(result);
        emit_json(std::move(report), opts);
    }
    return result.summary.violations == 0 ? kOk : kAuditFailure;
}

int cmd_reproduce_iid(const CommonOpts& opts, int n, const std::string& dist_json) {
    const peermax::Distribution dist =
        peermax::parse_distribution(peermax::parse_json_text(dist_json), "dist");
    const peermax::Instance instance = peermax::Instance::single_item(
        std::vector<peermax::Distribution>(static_cast<std::size_t>(n), dist));
    const peermax::IidTamResult res = peermax::iid_tam_revenue(instance, opts.cap);
    const bool ok = std::abs(res.revenue - res.stats.wel) <= kAuditTol;

    Json report = report_meta("reproduce-iid", opts);
    report["config"] = Json{{"n", n}, {"dist", peermax::distribution_to_json(dist)}};
    report["instance_hash"] = peermax::instance_hash(instance);
    report["result"] = Json{{"revenue", res.revenue}, {"wel", res.stats.wel}, {"ok", ok}};
    emit_json(std::move(report), opts);
    return ok ? kOk : kAuditFailure;
}

int cmd_reproduce_lower(const CommonOpts& opts, peermax::SweepConfig config) {
    config.seed = opts.seed;
    config.cap = opts.cap;
    const peermax::SweepResult result = peermax::sweep(config);
    Json report = report_meta("reproduce-lower", opts);
    report["config"] = Json{{"count", config.count}, {"K", config.big_k},
                            {"n_min", config.n_min}, {"n_max", config.n_max}};
    report["result"] = Json{{"violations", result.summary.violations},
                            {"min_margin", result.summary.min_margin},
                            {"ok", result.summary.violations == 0}};
    emit_json(std::move(report), opts);
    return result.summary.violations == 0 ? kOk : kAuditFailure;
}

int cmd_reproduce_upper(const CommonOpts& opts, int n, int trials, int k) {
    peermax::RngStream family_stream(opts.seed);
    const peermax::HardInstance hard =
        peermax::make_hard_instance(peermax::HardKind::General, n, family_stream);
    const peermax::PostedPriceCap cap_check = peermax::posted_price_cap(hard.family);

    peermax::MechanismConfig pm;
    pm.type = peermax::MechanismConfig::Type::PeerMax;
    pm.k = k;
    peermax::RngStream audit_stream(opts.seed);
    const peermax::UpperBoundResult audit =
        peermax::upper_bound_audit(pm, n, trials, audit_stream, opts.cap);

    const bool ok = cap_check.ok && audit.ok;
    Json report = report_meta("reproduce-upper", opts);
    report["config"] = Json{{"n", n}, {"trials", trials}, {"K", k}};
    report["result"] = Json{{"posted_price", peermax::posted_price_to_json(cap_check)},
                            {"upper_bound", peermax::upper_bound_to_json(audit)},
                            {"ok", ok}};
    emit_json(std::move(report), opts);
    return ok ? kOk : kAuditFailure;
}

int cmd_reproduce_concentration(const CommonOpts& opts, int n, int trials) {
    peermax::RngStream stream(opts.seed);
    const peermax::ConcentrationResult res = peermax::concentration_audit(n, trials, stream);
    const bool ok = res.lcb99 > 0.5;
    Json report = report_meta("reproduce-concentration", opts);
    report["config"] = Json{{"n", n}, {"trials", trials}};
    Json result = peermax::concentration_to_json(res);
    result["ok"] = ok;
    report["result"] = std::move(result);
    emit_json(std::move(report), opts);
    return ok ? kOk : kAuditFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulation and verification of distribution-reporting auction mechanisms"};
    app.require_subcommand(1);

    // stats
    CommonOpts stats_opts;
    std::string stats_engine = "exact", stats_model = "auto";
    std::int64_t stats_samples = 100'000;
    CLI::App* stats_cmd = app.add_subcommand("stats", "per-buyer w/s/r and benchmarks");
    add_common(stats_cmd, stats_opts);
    stats_cmd->add_option("--engine", stats_engine)->check(CLI::IsMember({"exact", "mc"}));
    stats_cmd->add_option("--model", stats_model)->check(CLI::IsMember({"auto", "spa", "vcg"}));
    stats_cmd->add_option("--samples", stats_samples);

    // run-pm / run-pw
    CommonOpts pm_opts, pw_opts;
    int pm_k = 1, pw_k = 1;
    CLI::App* pm_cmd = app.add_subcommand("run-pm", "Peer-Max revenue and guarantee check");
    add_common(pm_cmd, pm_opts);
    pm_cmd->add_option("--k", pm_k, "guarantee parameter K")->check(CLI::PositiveNumber);
    CLI::App* pw_cmd = app.add_subcommand("run-pw", "Peer-Welfare revenue and guarantee check");
    add_common(pw_cmd, pw_opts);
    pw_cmd->add_option("--k", pw_k, "guarantee parameter K")->check(CLI::PositiveNumber);

    // run-iid
    CommonOpts iid_opts;
    CLI::App* iid_cmd = app.add_subcommand("run-iid", "full-extraction TAM for iid buyers");
    add_common(iid_cmd, iid_opts);

    // ic-audit
    CommonOpts ic_opts;
    std::string ic_mech, ic_class;
    int ic_n = 2;
    double ic_m = 1.0;
    std::vector<double> ic_demands;
    CLI::App* ic_cmd = app.add_subcommand("ic-audit", "exhaustive deviation search");
    add_common(ic_cmd, ic_opts, /*with_instance=*/false);
    ic_cmd->add_option("--mech", ic_mech, "mechanism config JSON")->required();
    ic_cmd->add_option("--class", ic_class, "JSON array of class distributions")->required();
    ic_cmd->add_option("--n", ic_n)->check(CLI::Range(2, 6));
    ic_cmd->add_option("--m", ic_m);
    ic_cmd->add_option("--demands", ic_demands);

    // sweep
    CommonOpts sweep_opts;
    peermax::SweepConfig sweep_config;
    sweep_config.count = 100;
    std::string sweep_model = "spa";
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "random-instance guarantee sweep");
    add_common(sweep_cmd, sweep_opts, /*with_instance=*/false);
    sweep_cmd->add_option("--count", sweep_config.count);
    sweep_cmd->add_option("--n-min", sweep_config.n_min);
    sweep_cmd->add_option("--n-max", sweep_config.n_max);
    sweep_cmd->add_option("--k-min", sweep_config.k_min);
    sweep_cmd->add_option("--k-max", sweep_config.k_max);
    sweep_cmd->add_option("--K", sweep_config.big_k);
    sweep_cmd->add_option("--vmax", sweep_config.vmax);
    sweep_cmd->add_option("--m-max", sweep_config.m_max);
    sweep_cmd->add_option("--d-max", sweep_config.d_max);
    sweep_cmd->add_option("--model", sweep_model)->check(CLI::IsMember({"spa", "vcg"}));

    // reproduce
    CLI::App* repro = app.add_subcommand("reproduce", "named guarantee and hard-family audits");
    repro->require_subcommand(1);

    CommonOpts riid_opts;
    int riid_n = 2;
    std::string riid_dist;
    CLI::App* riid = repro->add_subcommand("iid", "full extraction on an iid instance");
    add_common(riid, riid_opts, /*with_instance=*/false);
    riid->add_option("--n", riid_n)->check(CLI::Range(2, 64));
    riid->add_option("--dist", riid_dist, "distribution JSON shared by all buyers")->required();

    CommonOpts rlow_opts;
    peermax::SweepConfig rlow_config;
    rlow_config.count = 1000;
    CLI::App* rlow = repro->add_subcommand("lower", "guarantee sweep, single-item");
    add_common(rlow, rlow_opts, /*with_instance=*/false);
    rlow->add_option("--count", rlow_config.count);
    rlow->add_option("--n-min", rlow_config.n_min);
    rlow->add_option("--n-max", rlow_config.n_max);
    rlow->add_option("--K", rlow_config.big_k);

    CommonOpts rup_opts;
    int rup_n = 64, rup_trials = 300, rup_k = 1;
    CLI::App* rup = repro->add_subcommand("upper", "posted-price cap and revenue ceiling");
    add_common(rup, rup_opts, /*with_instance=*/false);
    rup->add_option("--n", rup_n);
    rup->add_option("--trials", rup_trials);
    rup->add_option("--K", rup_k);

    CommonOpts rcon_opts;
    int rcon_n = 64, rcon_trials = 2000;
    CLI::App* rcon = repro->add_subcommand("concentration", "mean-sum concentration event");
    add_common(rcon, rcon_opts, /*with_instance=*/false);
    rcon->add_option("--n", rcon_n);
    rcon->add_option("--trials", rcon_trials);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (stats_cmd->parsed()) return cmd_stats(stats_opts, stats_engine, stats_model,
                                                  stats_samples);
        if (pm_cmd->parsed()) return cmd_run_peer(pm_opts, pm_k, /*welfare=*/false);
        if (pw_cmd->parsed()) return cmd_run_peer(pw_opts, pw_k, /*welfare=*/true);
        if (iid_cmd->parsed()) return cmd_run_iid(iid_opts);
        if (ic_cmd->parsed())
            return cmd_ic_audit(ic_opts, ic_mech, ic_class, ic_n, ic_m, ic_demands);
        if (sweep_cmd->parsed()) {
            sweep_config.model = sweep_model == "vcg" ? peermax::BaseModel::MultiUnitVcg
                                                      : peermax::BaseModel::SingleItemSpa;
            return cmd_sweep(sweep_opts, sweep_config);
        }
        if (riid->parsed()) return cmd_reproduce_iid(riid_opts, riid_n, riid_dist);
        if (rlow->parsed()) return cmd_reproduce_lower(rlow_opts, rlow_config);
        if (rup->parsed()) return cmd_reproduce_upper(rup_opts, rup_n, rup_trials, rup_k);
        if (rcon->parsed()) return cmd_reproduce_concentration(rcon_opts, rcon_n, rcon_trials);
        std::cerr << "no subcommand selected\n";
        return kUsage;
    } catch (const peermax::CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << "\n";
        return kCapacity;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
    }
}
