#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "covbond/scenario.hpp"

using namespace covbond;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitModel = 2;  // infeasible targets, bad model inputs
constexpr int kExitIo = 3;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config parse error in " + path + ": " + e.what());
    }
    return j;
}

void write_output(const std::optional<std::string>& path, const std::string& text) {
    if (!path) {
        std::cout << text;
        return;
    }
    std::ofstream out(*path, std::ios::binary);
    if (!out) throw IoError("cannot open output file: " + *path);
    out << text;
    out.flush();
    if (!out.good()) throw IoError("failed writing output file: " + *path);
}

std::string companion_path(const std::string& path) {
    const auto dot = path.find_last_of('.');
    const auto slash = path.find_last_of("/\\");
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return path + "_full";
    return path.substr(0, dot) + "_full" + path.substr(dot);
}

std::string fmtg(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.15g", v);
    return buf;
}

// ---- fit ------------------------------------------------------------------

struct FitArgs {
    std::string family;
    std::optional<double> alpha, q, t, pd, lgd, el, d;
    std::optional<double> mean, var, gen_mean, gen_var, gen_q, gen_es;
    std::optional<std::string> out;
};

json fit_quantile_es(const FitArgs& a) {
    double alpha;
    if (a.alpha && a.pd && *a.alpha != *a.pd)
        throw std::invalid_argument("fit: --alpha and --pd disagree");
    if (a.alpha)
        alpha = *a.alpha;
    else if (a.pd)
        alpha = *a.pd;
    else
        throw std::invalid_argument("fit: need --alpha or --pd");

    if (a.q && a.d && *a.q != *a.d) throw std::invalid_argument("fit: --q and --d disagree");
    if (!a.q && !a.d) throw std::invalid_argument("fit: need --q or --d");
    const double q = a.q ? *a.q : *a.d;

    double t;
    if (a.t) {
        t = *a.t;
    } else {
        double el;
        if (a.el)
            el = *a.el;
        else if (a.lgd)
            el = alpha * *a.lgd;
        else
            throw std::invalid_argument("fit: need --t, --el or --lgd");
        t = q * (alpha - el) / alpha;
    }
    const QuantileESTarget target{alpha, q, t};

    json out{{"mode", "quantile_es"},
             {"family", a.family},
             {"target", {{"alpha", alpha}, {"q", q}, {"t", t}}}};
    if (a.family == "lognormal") {
        const auto p = fit_lognormal_quantile_es(target);
        out["params"] = {{"m", p.m}, {"s", p.s}};
        out["residuals"] = {{"quantile", lognormal_quantile(p, alpha) - q},
                            {"es", lognormal_es(p, alpha) - t}};
        out["s_lower_bound"] = lognormal_s_lower_bound(target);
    } else if (a.family == "normal") {
        const auto p = fit_normal_quantile_es(target);
        out["params"] = {{"m", p.m}, {"s", p.s}};
        out["residuals"] = {{"quantile", normal_quantile(p, alpha) - q},
                            {"es", normal_es(p, alpha) - t}};
    } else if (a.family == "locscale") {
        if (!a.gen_q || !a.gen_es)
            throw std::invalid_argument("fit: locscale needs --gen-q and --gen-es");
        const auto p = fit_locscale_quantile_es(target, *a.gen_q, *a.gen_es);
        out["params"] = {{"m", p.m}, {"s", p.s}};
        out["residuals"] = {{"quantile", p.m + p.s * *a.gen_q - q},
                            {"es", p.m + p.s * *a.gen_es - t}};
    } else {
        throw std::invalid_argument("fit: family '" + a.family +
                                    "' has no quantile/ES fit (use --mean/--var)");
    }
    return out;
}

json fit_mean_variance(const FitArgs& a) {
    const MeanVarTarget target{*a.mean, *a.var};
    json out{{"mode", "mean_variance"},
             {"family", a.family},
             {"target", {{"mean", target.mean}, {"variance", target.variance}}}};
    if (a.family == "lognormal") {
        const auto p = mv_fit_lognormal(target);
        const double mean = std::exp(p.m + 0.5 * p.s * p.s);
        const double var = std::expm1(p.s * p.s) * std::exp(2.0 * p.m + p.s * p.s);
        out["params"] = {{"m", p.m}, {"s", p.s}};
        out["residuals"] = {{"mean", mean - target.mean}, {"variance", var - target.variance}};
    } else if (a.family == "normal") {
        const auto p = mv_fit_locscale(target, 0.0, 1.0);
        out["params"] = {{"m", p.m}, {"s", p.s}};
        out["residuals"] = {{"mean", 0.0}, {"variance", 0.0}};
    } else if (a.family == "locscale") {
        if (!a.gen_mean || !a.gen_var)
            throw std::invalid_argument("fit: locscale needs --gen-mean and --gen-var");
        const auto p = mv_fit_locscale(target, *a.gen_mean, *a.gen_var);
        out["params"] = {{"m", p.m}, {"s", p.s}};
        out["residuals"] = {{"mean", p.m + p.s * *a.gen_mean - target.mean},
                            {"variance", p.s * p.s * *a.gen_var - target.variance}};
    } else if (a.family == "vasicek") {
        const auto p = mv_fit_vasicek(target);
        const double mn = p.m / std::sqrt(1.0 + p.s * p.s);
        const double r = p.s * p.s / (1.0 + p.s * p.s);
        out["params"] = {{"m", p.m}, {"s", p.s}};
        out["residuals"] = {
            {"mean", norm_cdf(mn) - target.mean},
            {"variance",
             bivariate_norm_cdf(mn, mn, r) - norm_cdf(mn) * norm_cdf(mn) - target.variance}};
    } else if (a.family == "beta") {
        const auto p = mv_fit_beta(target);
        const double ab = p.a + p.b;
        out["params"] = {{"a", p.a}, {"b", p.b}};
        out["residuals"] = {{"mean", p.a / ab - target.mean},
                            {"variance", p.a * p.b / (ab * ab * (ab + 1.0)) - target.variance}};
    } else {
        throw std::invalid_argument("fit: unknown family '" + a.family + "'");
    }
    return out;
}

int run_fit(const FitArgs& a) {
    const bool mv = a.mean.has_value() || a.var.has_value();
    if (mv && !(a.mean && a.var)) throw std::invalid_argument("fit: need both --mean and --var");
    const json out = mv ? fit_mean_variance(a) : fit_quantile_es(a);
    write_output(a.out, out.dump(2) + "\n");
    return kExitOk;
}

// ---- el / mc / calibrate ----------------------------------------------------

ScenarioConfig config_from_file(const std::string& path, const std::optional<double>& rho,
                                const std::optional<std::string>& model) {
    json j = load_json(path);
    if (rho) j["rho"] = *rho;
    if (model) j["model"] = *model;
    return parse_scenario_config(j);
}

json outcome_header(const ScenarioOutcome& o) {
    return json{{"axis", o.axis}, {"value", o.axis_value}, {"params", o.params}};
}

int run_el(const std::string& config_path, const std::optional<double>& rho,
           const std::optional<std::string>& model, const std::string& format,
           const std::optional<std::string>& out_path) {
    const auto cfg = config_from_file(config_path, rho, model);
    const auto outcomes = run_expected_losses(cfg);
    if (format == "csv") {
        std::string csv = "axis,axis_value,quantity,fraction,percent\n";
        for (const auto& o : outcomes) {
            const json rep = loss_report_json(o.report);
            for (const auto& [key, val] : rep.items()) {
                if (!val.is_object()) continue;
                csv += o.axis + "," + fmtg(o.axis_value) + "," + key + "," +
                       fmtg(val.at("fraction").get<double>()) + "," +
                       fmtg(val.at("percent").get<double>()) + "\n";
            }
        }
        write_output(out_path, csv);
        return kExitOk;
    }
    json out{{"model", to_string(cfg.model)}};
    json list = json::array();
    for (const auto& o : outcomes) {
        json item = outcome_header(o);
        item["report"] = loss_report_json(o.report);
        list.push_back(std::move(item));
    }
    if (list.size() == 1)
        out.merge_patch(list.front());
    else
        out["scenarios"] = std::move(list);
    write_output(out_path, out.dump(2) + "\n");
    return kExitOk;
}

int run_mc(const std::string& config_path, const std::optional<double>& rho,
           const std::optional<std::string>& model, std::uint64_t samples, std::uint64_t seed,
           std::uint64_t chunk, const std::optional<std::string>& out_path) {
    const auto cfg = config_from_file(config_path, rho, model);
    const auto outcomes = run_expected_losses(cfg);
    const McConfig mc_cfg{samples, seed, chunk};
    json out{{"model", to_string(cfg.model)},
             {"n_samples", samples},
             {"seed", seed}};
    json list = json::array();
    bool all_pass = true;
    for (const auto& o : outcomes) {
        const McLossReport mc = o.two_asset ? mc_loss_report(*o.two_asset, cfg.debt, mc_cfg)
                                            : mc_one_asset(*o.one_asset, cfg.debt, mc_cfg);
        json item = outcome_header(o);
        item["comparison"] = mc_comparison_json(mc, o.report);
        if (item["comparison"].at("verdict") != "PASS") all_pass = false;
        list.push_back(std::move(item));
    }
    out["verdict"] = all_pass ? "PASS" : "FAIL";
    if (list.size() == 1)
        out.merge_patch(list.front());
    else
        out["scenarios"] = std::move(list);
    write_output(out_path, out.dump(2) + "\n");
    return kExitOk;
}

int run_calibrate(const std::string& config_path, const std::optional<double>& rho,
                  const std::optional<std::string>& model,
                  const std::optional<std::string>& out_path) {
    const auto cfg = config_from_file(config_path, rho, model);
    write_output(out_path, calibrate_json(cfg).dump(2) + "\n");
    return kExitOk;
}

// ---- region / table ---------------------------------------------------------

int run_region(const std::string& config_path, const RegionSpec& spec,
               const std::optional<std::string>& out_path) {
    const json j = load_json(config_path);
    if (!j.contains("debt")) throw std::invalid_argument("region: config needs 'debt'");
    DebtStructure debt;
    debt.c = j.at("debt").value("c", 0.0);
    debt.s = j.at("debt").value("s", 0.0);
    debt.u = j.at("debt").value("u", 0.0);
    debt.v = j.at("debt").value("v", 0.0);
    std::vector<RiskInputs> sets;
    if (j.contains("cover_sets")) {
        for (const auto& cs : j.at("cover_sets"))
            sets.push_back(risk_from_pd_lgd(cs.at("pd").get<double>(), cs.at("lgd").get<double>()));
    } else if (j.contains("cover")) {
        sets.push_back(risk_from_pd_lgd(j.at("cover").at("pd").get<double>(),
                                        j.at("cover").at("lgd").get<double>()));
    } else {
        throw std::invalid_argument("region: config needs 'cover' or 'cover_sets'");
    }
    write_output(out_path, region_csv(debt, sets, spec));
    return kExitOk;
}

int run_table(int id, const std::optional<std::string>& out_path) {
    const TableData t = make_table(id);
    write_output(out_path, render_table_csv(t, false));
    if (out_path) write_output(companion_path(*out_path), render_table_csv(t, true));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structural one-period loss models for covered bonds"};
    app.require_subcommand(1);

    // fit
    FitArgs fit_args;
    auto* fit = app.add_subcommand("fit", "Fit a two-parameter family to quantile/ES, PD/LGD "
                                          "or mean/variance targets");
    fit->add_option("--family", fit_args.family, "normal|lognormal|vasicek|beta|locscale")
        ->required();
    auto opt = [&](const char* name, std::optional<double>& slot, const char* help) {
        fit->add_option(name, slot, help);
    };
    opt("--alpha", fit_args.alpha, "confidence level");
    opt("--q", fit_args.q, "alpha-quantile target");
    opt("--t", fit_args.t, "expected shortfall target");
    opt("--pd", fit_args.pd, "probability of default (same as alpha)");
    opt("--lgd", fit_args.lgd, "loss given default");
    opt("--el", fit_args.el, "expected loss (= pd * lgd)");
    opt("--d", fit_args.d, "default threshold (same as q)");
    opt("--mean", fit_args.mean, "target mean");
    opt("--var", fit_args.var, "target variance");
    opt("--gen-mean", fit_args.gen_mean, "generator mean (locscale)");
    opt("--gen-var", fit_args.gen_var, "generator variance (locscale)");
    opt("--gen-q", fit_args.gen_q, "generator alpha-quantile (locscale)");
    opt("--gen-es", fit_args.gen_es, "generator expected shortfall (locscale)");
    fit->add_option("--out", fit_args.out, "output path (default stdout)");

    // shared scenario flags
    std::string config_path;
    std::optional<double> rho_override;
    std::optional<std::string> model_override;
    std::optional<std::string> out_path;
    std::string format = "json";

    auto add_scenario_flags = [&](CLI::App* cmd, bool with_format) {
        cmd->add_option("--config", config_path, "scenario config (JSON)")->required();
        cmd->add_option("--rho", rho_override, "override the correlation");
        cmd->add_option("--model", model_override, "override the model");
        cmd->add_option("--out", out_path, "output path (default stdout)");
        if (with_format) cmd->add_option("--format", format, "json|csv");
    };

    auto* calibrate = app.add_subcommand("calibrate", "Calibrate a model and report parameters "
                                                      "plus residual diagnostics");
    add_scenario_flags(calibrate, false);

    auto* el = app.add_subcommand("el", "Expected losses of the configured scenario(s)");
    add_scenario_flags(el, true);

    std::uint64_t samples = 10'000'000;
    std::uint64_t seed = 0;
    std::uint64_t chunk = 1'000'000;
    auto* mc = app.add_subcommand("mc", "Monte-Carlo validation against the closed forms");
    add_scenario_flags(mc, false);
    mc->add_option("--samples", samples, "number of samples");
    mc->add_option("--seed", seed, "random seed");
    mc->add_option("--chunk", chunk, "samples per substream chunk");

    RegionSpec region_spec;
    auto* region = app.add_subcommand("region", "Feasible issuer (PD, LGD) grid for the "
                                                "comonotonic calibration");
    region->add_option("--config", config_path, "config with debt and cover_sets")->required();
    region->add_option("--pd-min", region_spec.pd_min, "grid lower PD");
    region->add_option("--pd-max", region_spec.pd_max, "grid upper PD");
    region->add_option("--pd-steps", region_spec.pd_steps, "grid points along PD");
    region->add_option("--lgd-min", region_spec.lgd_min, "grid lower LGD");
    region->add_option("--lgd-max", region_spec.lgd_max, "grid upper LGD");
    region->add_option("--lgd-steps", region_spec.lgd_steps, "grid points along LGD");
    region->add_option("--out", out_path, "output path (default stdout)");

    int table_id = 0;
    auto* table = app.add_subcommand("table", "Reference scenario tables (CSV)");
    table->add_option("id", table_id, "table number (1, 2 or 3)")->required();
    table->add_option("--out", out_path, "output path; a *_full companion file holds "
                                         "full-precision values");

    CLI11_PARSE(app, argc, argv);

    try {
        if (fit->parsed()) return run_fit(fit_args);
        if (calibrate->parsed())
            return run_calibrate(config_path, rho_override, model_override, out_path);
        if (el->parsed()) {
            if (format != "json" && format != "csv")
                throw std::invalid_argument("el: --format must be json or csv");
            return run_el(config_path, rho_override, model_override, format, out_path);
        }
        if (mc->parsed())
            return run_mc(config_path, rho_override, model_override, samples, seed, chunk,
                          out_path);
        if (region->parsed()) return run_region(config_path, region_spec, out_path);
        if (table->parsed()) return run_table(table_id, out_path);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitModel;
    }
    return kExitOk;
}
