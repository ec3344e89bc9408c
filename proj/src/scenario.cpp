#include "covbond/scenario.hpp"

#include <cstdio>

namespace covbond {

using nlohmann::json;

namespace {

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), format, v);
    return buf;
}

json units(double fraction) {
    return json{{"fraction", fraction}, {"percent", 100.0 * fraction}};
}

RiskInputs parse_risk(const json& j, const std::string& name) {
    const bool has_pd = j.contains("pd"), has_lgd = j.contains("lgd"), has_el = j.contains("el");
    RiskInputs r;
    if (has_pd && has_lgd) {
        r = risk_from_pd_lgd(j.at("pd").get<double>(), j.at("lgd").get<double>());
        if (has_el) {
            const double el = j.at("el").get<double>();
            if (std::fabs(el - r.el()) > 1e-12 * std::max(1.0, std::fabs(el)))
                throw std::invalid_argument(name + ": el must equal pd * lgd");
        }
    } else if (has_pd && has_el) {
        r = risk_from_pd_el(j.at("pd").get<double>(), j.at("el").get<double>());
    } else if (has_lgd && has_el) {
        r = risk_from_el_lgd(j.at("el").get<double>(), j.at("lgd").get<double>());
    } else {
        throw std::invalid_argument(name + ": needs two of pd, lgd, el");
    }
    r.validate();
    return r;
}

}  // namespace

ModelKind model_kind_from_string(const std::string& name) {
    if (name == "two_assets_margins") return ModelKind::TwoAssetsMargins;
    if (name == "two_assets_issuer") return ModelKind::TwoAssetsIssuer;
    if (name == "one_asset_adjusted") return ModelKind::OneAssetAdjusted;
    if (name == "normal_toy") return ModelKind::NormalToy;
    throw std::invalid_argument("unknown model '" + name +
                                "' (expected two_assets_margins, two_assets_issuer, "
                                "one_asset_adjusted or normal_toy)");
}

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::TwoAssetsMargins: return "two_assets_margins";
        case ModelKind::TwoAssetsIssuer: return "two_assets_issuer";
        case ModelKind::OneAssetAdjusted: return "one_asset_adjusted";
        case ModelKind::NormalToy: return "normal_toy";
    }
    return "?";
}

ScenarioConfig parse_scenario_config(const json& j) {
    ScenarioConfig cfg;
    if (j.contains("model")) cfg.model = model_kind_from_string(j.at("model").get<std::string>());
    if (!j.contains("debt")) throw std::invalid_argument("config: missing 'debt'");
    const json& d = j.at("debt");
    cfg.debt.c = d.value("c", 0.0);
    cfg.debt.s = d.value("s", 0.0);
    cfg.debt.u = d.value("u", 0.0);
    cfg.debt.v = d.value("v", 0.0);
    cfg.debt.validate();

    if (j.contains("cover")) {
        const json& c = j.at("cover");
        if (c.contains("el") && !c.contains("pd") && !c.contains("lgd")) {
            cfg.cover_el = c.at("el").get<double>();
        } else {
            cfg.cover = parse_risk(c, "cover");
            cfg.cover_el = cfg.cover->el();
        }
    }
    if (j.contains("other")) cfg.other = parse_risk(j.at("other"), "other");
    if (j.contains("issuer")) cfg.issuer = parse_risk(j.at("issuer"), "issuer");

    if (j.contains("rho")) {
        const json& r = j.at("rho");
        cfg.rho_values.clear();
        if (r.is_array())
            for (const auto& v : r) cfg.rho_values.push_back(v.get<double>());
        else
            cfg.rho_values.push_back(r.get<double>());
        if (cfg.rho_values.empty()) throw std::invalid_argument("config: empty rho grid");
    }
    for (double r : cfg.rho_values)
        if (!(r >= 0.0 && r <= 1.0))
            throw std::invalid_argument("config: rho values must lie in [0, 1]");

    if (j.contains("sweep")) {
        SweepSpec sweep;
        sweep.axis = j.at("sweep").at("axis").get<std::string>();
        for (const auto& v : j.at("sweep").at("values")) sweep.values.push_back(v.get<double>());
        if (sweep.axis != "rho" && sweep.axis != "c" && sweep.axis != "lgd_cover")
            throw std::invalid_argument("config: sweep axis must be rho, c or lgd_cover");
        if (sweep.values.empty()) throw std::invalid_argument("config: empty sweep values");
        cfg.sweep = std::move(sweep);
    }
    return cfg;
}

namespace {

struct ScenarioInputs {
    DebtStructure debt;
    std::optional<RiskInputs> cover;
    std::optional<double> cover_el;
    double rho;
};

ScenarioInputs apply_axis(const ScenarioConfig& cfg, const std::string& axis, double value) {
    ScenarioInputs in{cfg.debt, cfg.cover, cfg.cover_el, cfg.rho_values.front()};
    if (axis == "rho") {
        in.rho = value;
    } else if (axis == "c") {
        const double senior_total = cfg.debt.c + cfg.debt.s;
        if (!(value >= 0.0 && value <= senior_total))
            throw std::invalid_argument("sweep: c must lie in [0, c + s]");
        in.debt.c = value;
        in.debt.s = senior_total - value;
    } else if (axis == "lgd_cover") {
        if (!cfg.cover_el)
            throw std::invalid_argument("sweep over lgd_cover requires a cover expected loss");
        in.cover = risk_from_el_lgd(*cfg.cover_el, value);
        in.cover->validate();
    }
    return in;
}

ScenarioOutcome run_one(const ScenarioConfig& cfg, const ScenarioInputs& in,
                        const Tolerance& tol) {
    ScenarioOutcome out;
    switch (cfg.model) {
        case ModelKind::TwoAssetsMargins: {
            if (!in.cover || !cfg.other)
                throw std::invalid_argument("two_assets_margins requires cover and other inputs");
            const TwoAssetParams p = margins_calibrate(in.debt, *in.cover, *cfg.other, in.rho, tol);
            out.two_asset = p;
            out.params = {{"mu", p.mu}, {"sigma", p.sigma}, {"nu", p.nu},
                          {"tau", p.tau}, {"rho", p.rho}};
            out.report = expected_losses(p, in.debt, tol);
            break;
        }
        case ModelKind::TwoAssetsIssuer: {
            if (!in.cover || !cfg.issuer)
                throw std::invalid_argument("two_assets_issuer requires cover and issuer inputs");
            const LocScaleParams pool =
                calibrate_cover_pool(in.debt.c, in.debt.v, *in.cover, tol);
            const double d = in.debt.total();
            const LocScaleParams rest =
                in.rho >= kComonotonicRho
                    ? calibrate_issuer_comonotonic(pool.m, pool.s, d, *cfg.issuer, tol)
                    : calibrate_issuer_copula(pool.m, pool.s, in.rho, d, *cfg.issuer, tol);
            const TwoAssetParams p{pool.m, pool.s, rest.m, rest.s, in.rho};
            out.two_asset = p;
            out.params = {{"mu", p.mu}, {"sigma", p.sigma}, {"nu", p.nu},
                          {"tau", p.tau}, {"rho", p.rho}};
            out.report = expected_losses(p, in.debt, tol);
            break;
        }
        case ModelKind::OneAssetAdjusted: {
            if (!cfg.issuer)
                throw std::invalid_argument("one_asset_adjusted requires issuer inputs");
            const LocScaleParams fit = calibrate_issuer_one(in.debt, *cfg.issuer, tol);
            OneAssetParams p{fit.m, fit.s, 0.0};
            out.params = {{"kappa", p.kappa}, {"psi", p.psi}};
            if (in.debt.c > 0.0) {
                if (!in.cover_el)
                    throw std::invalid_argument(
                        "one_asset_adjusted requires the cover expected loss");
                const AdjustmentResult adj =
                    adjust_encumbrance(p.kappa, p.psi, in.debt.c, in.debt.v, *in.cover_el, tol);
                p.epsilon = adj.epsilon;
                out.params["theta"] = adj.theta;
                out.params["epsilon_raw"] = adj.epsilon_raw;
                out.params["capped"] = adj.capped;
                out.params["min_matchable_el"] =
                    min_matchable_el(p.kappa, p.psi, in.debt.c, in.debt.v);
            }
            out.params["epsilon"] = p.epsilon;
            out.one_asset = p;
            out.report = expected_losses_one(p, in.debt, tol);
            break;
        }
        case ModelKind::NormalToy:
            throw std::invalid_argument(
                "expected losses are not defined for the normal toy model; use 'calibrate'");
    }
    return out;
}

}  // namespace

std::vector<ScenarioOutcome> run_expected_losses(const ScenarioConfig& cfg, const Tolerance& tol) {
    std::string axis = "rho";
    std::vector<double> values = cfg.rho_values;
    if (cfg.sweep) {
        axis = cfg.sweep->axis;
        values = cfg.sweep->values;
        if (axis == "rho" && cfg.rho_values.size() > 1)
            throw std::invalid_argument("config: give the rho grid either via rho or via sweep");
    }
    std::vector<ScenarioOutcome> outcomes;
    outcomes.reserve(values.size());
    for (double v : values) {
        ScenarioOutcome out = run_one(cfg, apply_axis(cfg, axis, v), tol);
        out.axis = axis;
        out.axis_value = v;
        outcomes.push_back(std::move(out));
    }
    return outcomes;
}

nlohmann::json calibrate_json(const ScenarioConfig& cfg, const Tolerance& tol) {
    if (cfg.model == ModelKind::NormalToy) {
        if (!cfg.cover || !cfg.issuer)
            throw std::invalid_argument("normal_toy requires cover and issuer inputs");
        const NormalToyParams p =
            calibrate_normal_toy(cfg.debt.c, cfg.debt.v, *cfg.cover, cfg.debt.total(),
                                 *cfg.issuer, cfg.rho_values.front());
        // round trip through the normal closed forms
        const LocScaleParams total{p.mu + p.nu, p.psi};
        const double q_res = normal_quantile(total, cfg.issuer->pd) - cfg.debt.total();
        const double t_res = normal_es(total, cfg.issuer->pd) -
                             cfg.debt.total() * (1.0 - cfg.issuer->lgd);
        return {{"model", "normal_toy"},
                {"params",
                 {{"mu", p.mu}, {"sigma", p.sigma}, {"nu", p.nu}, {"tau", p.tau}, {"psi", p.psi}}},
                {"nu_nonpositive", p.nu_nonpositive},
                {"residuals", {{"issuer_quantile", q_res}, {"issuer_es", t_res}}}};
    }
    const auto outcomes = run_expected_losses(cfg, tol);
    json out;
    out["model"] = to_string(cfg.model);
    json list = json::array();
    for (const auto& o : outcomes) {
        json item{{"axis", o.axis}, {"value", o.axis_value}, {"params", o.params}};
        item["implied"] = {{"issuer_pd", units(o.report.issuer_pd())},
                           {"el_portfolio", units(o.report.el_portfolio)}};
        list.push_back(std::move(item));
    }
    if (list.size() == 1)
        out.merge_patch(list.front());
    else
        out["scenarios"] = std::move(list);
    return out;
}

json loss_report_json(const LossReport& rep) {
    json j{{"p_event1", units(rep.p_event1)},
           {"p_event2", units(rep.p_event2)},
           {"p_event3", units(rep.p_event3)},
           {"issuer_pd", units(rep.issuer_pd())},
           {"el_senior", units(rep.el_senior)},
           {"el_junior", units(rep.el_junior)},
           {"el_portfolio", units(rep.el_portfolio)}};
    j["el_covered"] = rep.el_covered ? units(*rep.el_covered) : json(nullptr);
    return j;
}

namespace {

json mc_quantity(double closed, const McEstimate& est) {
    const double diff = std::fabs(closed - est.mean);
    return {{"closed_form", units(closed)},
            {"mc_mean", units(est.mean)},
            {"std_error", est.std_error},
            {"abs_diff", diff},
            {"within_3se", diff <= 3.0 * est.std_error}};
}

}  // namespace

json mc_comparison_json(const McLossReport& mc, const LossReport& closed) {
    json j{{"p_event1", mc_quantity(closed.p_event1, mc.p_event1)},
           {"p_event2", mc_quantity(closed.p_event2, mc.p_event2)},
           {"p_event3", mc_quantity(closed.p_event3, mc.p_event3)},
           {"el_senior", mc_quantity(closed.el_senior, mc.el_senior)},
           {"el_junior", mc_quantity(closed.el_junior, mc.el_junior)},
           {"el_portfolio", mc_quantity(closed.el_portfolio, mc.el_portfolio)}};
    if (closed.el_covered && mc.el_covered)
        j["el_covered"] = mc_quantity(*closed.el_covered, *mc.el_covered);
    else
        j["el_covered"] = nullptr;
    bool pass = true;
    for (const auto& [key, val] : j.items())
        if (val.is_object() && !val.at("within_3se").get<bool>()) pass = false;
    j["n_samples"] = mc.el_senior.n;
    j["verdict"] = pass ? "PASS" : "FAIL";
    return j;
}

TableData make_table1(const Tolerance& tol) {
    const DebtStructure debt{0.3, 0.6, 0.1, 0.2};
    const RiskInputs pool{0.01, 0.45};
    const std::vector<double> rhos{0.0, 0.3, 0.6, 0.9, 1.0};
    TableData t;
    t.header_rows = {{"correlation_rho_percent"}};
    t.row_labels = {"covered_bonds_el", "senior_unsecured_el", "junior_el", "all_el"};
    t.body_percent.assign(4, {});
    for (double rho : rhos) {
        t.header_rows[0].push_back(fmt("%.1f", 100.0 * rho));
        const LossReport rep = expected_losses(margins_calibrate(debt, pool, pool, rho, tol),
                                               debt, tol);
        t.body_percent[0].push_back(100.0 * *rep.el_covered);
        t.body_percent[1].push_back(100.0 * rep.el_senior);
        t.body_percent[2].push_back(100.0 * rep.el_junior);
        t.body_percent[3].push_back(100.0 * rep.el_portfolio);
    }
    return t;
}

TableData make_table2(const Tolerance& tol) {
    const RiskInputs issuer{0.01, 0.45};
    const double el_cover = 0.0045;
    TableData t;
    t.header_rows = {{"covered_bonds_exposure_percent"}};
    t.row_labels = {"adjusted_encumbrance_ratio", "covered_bonds_el", "senior_unsecured_el",
                    "junior_el"};
    t.body_percent.assign(4, {});
    for (int i = 0; i <= 8; ++i) {
        const double c = 0.1 * i;
        const DebtStructure debt{c, 0.9 - c, 0.1, 0.2};
        t.header_rows[0].push_back(fmt("%.1f", 100.0 * c));
        const LocScaleParams fit = calibrate_issuer_one(debt, issuer, tol);
        OneAssetParams p{fit.m, fit.s, 0.0};
        if (c > 0.0)
            p.epsilon = adjust_encumbrance(p.kappa, p.psi, c, debt.v, el_cover, tol).epsilon;
        const LossReport rep = expected_losses_one(p, debt, tol);
        t.body_percent[0].push_back(100.0 * p.epsilon);
        t.body_percent[1].push_back(rep.el_covered ? std::optional<double>(100.0 * *rep.el_covered)
                                                   : std::nullopt);
        t.body_percent[2].push_back(100.0 * rep.el_senior);
        t.body_percent[3].push_back(100.0 * rep.el_junior);
    }
    return t;
}

TableData make_table3(const Tolerance& tol) {
    const DebtStructure debt{0.3, 0.6, 0.1, 0.2};
    const RiskInputs other{0.01, 0.45};
    const double el_cover = 0.003;
    const std::vector<double> lgds{0.30, 0.45, 0.60};
    TableData t;
    t.header_rows = {{"lgd_cover_percent"}, {"model"}};
    t.row_labels = {"p_cover", "p_issuer", "el_issuer", "covered_bonds_el",
                    "senior_unsecured_el", "junior_el"};
    t.body_percent.assign(6, {});
    for (double lgd : lgds) {
        const RiskInputs cover = risk_from_el_lgd(el_cover, lgd);
        const TwoAssetParams two = margins_calibrate(debt, cover, other, 1.0, tol);
        const LossReport rep2 = expected_losses(two, debt, tol);
        const double p_issuer = rep2.issuer_pd();
        const double el_issuer = rep2.el_portfolio;
        const RiskInputs issuer = risk_from_pd_el(p_issuer, el_issuer);
        const LocScaleParams fit = calibrate_issuer_one(debt, issuer, tol);
        OneAssetParams one{fit.m, fit.s,
                           adjust_encumbrance(fit.m, fit.s, debt.c, debt.v, el_cover, tol).epsilon};
        const LossReport rep1 = expected_losses_one(one, debt, tol);
        for (int col = 0; col < 2; ++col) {
            t.header_rows[0].push_back(fmt("%.0f", 100.0 * lgd));
            t.header_rows[1].push_back(col == 0 ? "2_assets" : "1_asset");
            const LossReport& rep = col == 0 ? rep2 : rep1;
            t.body_percent[0].push_back(100.0 * cover.pd);
            t.body_percent[1].push_back(100.0 * p_issuer);
            t.body_percent[2].push_back(100.0 * el_issuer);
            t.body_percent[3].push_back(100.0 * *rep.el_covered);
            t.body_percent[4].push_back(100.0 * rep.el_senior);
            t.body_percent[5].push_back(100.0 * rep.el_junior);
        }
    }
    return t;
}

TableData make_table(int id, const Tolerance& tol) {
    switch (id) {
        case 1: return make_table1(tol);
        case 2: return make_table2(tol);
        case 3: return make_table3(tol);
        default: throw std::invalid_argument("table id must be 1, 2 or 3");
    }
}

std::string render_table_csv(const TableData& table, bool full_precision) {
    std::string out;
    for (const auto& hr : table.header_rows) {
        for (std::size_t i = 0; i < hr.size(); ++i) {
            if (i) out += ',';
            out += hr[i];
        }
        out += '\n';
    }
    for (std::size_t r = 0; r < table.row_labels.size(); ++r) {
        out += table.row_labels[r];
        for (const auto& cell : table.body_percent[r]) {
            out += ',';
            if (!cell)
                out += "NA";
            else
                out += full_precision ? fmt("%.15g", *cell) : fmt("%.3f", *cell);
        }
        out += '\n';
    }
    return out;
}

std::string region_csv(const DebtStructure& debt, const std::vector<RiskInputs>& cover_sets,
                       const RegionSpec& spec) {
    if (cover_sets.empty()) throw std::invalid_argument("region_csv: needs cover parameter sets");
    if (!(spec.pd_steps >= 2 && spec.lgd_steps >= 2))
        throw std::invalid_argument("region_csv: grid needs at least 2 steps per axis");
    debt.validate();

    struct SetCtx {
        LocScaleParams pool;
        double pd_upper;
    };
    std::vector<SetCtx> ctx;
    for (const auto& cover : cover_sets) {
        const LocScaleParams pool = calibrate_cover_pool(debt.c, debt.v, cover);
        ctx.push_back({pool, feasibility_bounds(pool.m, pool.s, debt.total(), 0.5).pd_upper});
    }

    std::vector<std::size_t> order(ctx.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<std::string> names(ctx.size());
    if (ctx.size() == 2) {
        // smaller attainable PD range first
        if (ctx[1].pd_upper < ctx[0].pd_upper) std::swap(order[0], order[1]);
        names = {"feasible_small_set", "feasible_large_set"};
    } else {
        for (std::size_t i = 0; i < names.size(); ++i)
            names[i] = "feasible_set" + std::to_string(i + 1);
    }

    std::string out = "pd,lgd";
    for (const auto& n : names) out += "," + n;
    out += '\n';
    for (int i = 0; i < spec.pd_steps; ++i) {
        const double pd =
            spec.pd_min + (spec.pd_max - spec.pd_min) * i / double(spec.pd_steps - 1);
        for (int k = 0; k < spec.lgd_steps; ++k) {
            const double lgd =
                spec.lgd_min + (spec.lgd_max - spec.lgd_min) * k / double(spec.lgd_steps - 1);
            out += fmt("%.10g", pd);
            out += ',';
            out += fmt("%.10g", lgd);
            for (std::size_t oi : order) {
                const FeasibilityBounds fb =
                    feasibility_bounds(ctx[oi].pool.m, ctx[oi].pool.s, debt.total(), pd);
                out += fb.contains(lgd) ? ",1" : ",0";
            }
            out += '\n';
        }
    }
    return out;
}

}  // namespace covbond
