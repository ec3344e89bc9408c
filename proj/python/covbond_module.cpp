#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "covbond/scenario.hpp"

namespace py = pybind11;
using namespace covbond;

namespace {

std::string fmt_params(const char* name, std::initializer_list<std::pair<const char*, double>> kv) {
    std::string s = name;
    s += "(";
    bool first = true;
    for (const auto& [k, v] : kv) {
        if (!first) s += ", ";
        first = false;
        s += std::string(k) + "=" + std::to_string(v);
    }
    return s + ")";
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Structural one-period loss models for covered bonds";

    py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_ValueError);
    py::register_exception<NotEquivalentError>(m, "NotEquivalentError", PyExc_ValueError);
    py::register_exception<NoBracketError>(m, "NoBracketError", PyExc_RuntimeError);
    py::register_exception<NoConvergenceError>(m, "NoConvergenceError", PyExc_RuntimeError);

    // numerics
    m.def("norm_pdf", &norm_pdf, py::arg("x"));
    m.def("norm_cdf", &norm_cdf, py::arg("x"));
    m.def("norm_logcdf", &norm_logcdf, py::arg("x"));
    m.def("norm_inv_cdf", &norm_inv_cdf, py::arg("p"));
    m.def("bivariate_norm_cdf", &bivariate_norm_cdf, py::arg("a"), py::arg("b"), py::arg("r"));
    m.def(
        "solve_threshold_x",
        [](double a, double mu, double sigma, double nu, double tau) {
            return solve_threshold_x(a, mu, sigma, nu, tau);
        },
        py::arg("a"), py::arg("mu"), py::arg("sigma"), py::arg("nu"), py::arg("tau"));
    m.def(
        "gaussian_weighted_integral",
        [](const std::function<double(double)>& g, double lower, double upper) {
            return gaussian_weighted_integral(g, Interval{lower, upper});
        },
        py::arg("g"), py::arg("lower") = -std::numeric_limits<double>::infinity(),
        py::arg("upper") = std::numeric_limits<double>::infinity());

    // distribution fitting
    py::class_<QuantileESTarget>(m, "QuantileESTarget")
        .def(py::init<double, double, double>(), py::arg("alpha"), py::arg("q"), py::arg("t"))
        .def_readwrite("alpha", &QuantileESTarget::alpha)
        .def_readwrite("q", &QuantileESTarget::q)
        .def_readwrite("t", &QuantileESTarget::t);

    py::class_<LocScaleParams>(m, "LocScaleParams")
        .def(py::init<double, double>(), py::arg("m"), py::arg("s"))
        .def_readwrite("m", &LocScaleParams::m)
        .def_readwrite("s", &LocScaleParams::s)
        .def("__repr__", [](const LocScaleParams& p) {
            return fmt_params("LocScaleParams", {{"m", p.m}, {"s", p.s}});
        });

    py::class_<MeanVarTarget>(m, "MeanVarTarget")
        .def(py::init<double, double>(), py::arg("mean"), py::arg("variance"))
        .def_readwrite("mean", &MeanVarTarget::mean)
        .def_readwrite("variance", &MeanVarTarget::variance);

    py::class_<BetaParams>(m, "BetaParams")
        .def_readwrite("a", &BetaParams::a)
        .def_readwrite("b", &BetaParams::b)
        .def("__repr__",
             [](const BetaParams& p) { return fmt_params("BetaParams", {{"a", p.a}, {"b", p.b}}); });

    py::class_<VasicekParams>(m, "VasicekParams")
        .def_readwrite("m", &VasicekParams::m)
        .def_readwrite("s", &VasicekParams::s)
        .def("__repr__", [](const VasicekParams& p) {
            return fmt_params("VasicekParams", {{"m", p.m}, {"s", p.s}});
        });

    m.def("target_from_pd_lgd", &target_from_pd_lgd, py::arg("pd"), py::arg("lgd"),
          py::arg("threshold"));
    m.def("fit_locscale_quantile_es", &fit_locscale_quantile_es, py::arg("target"),
          py::arg("gen_quantile"), py::arg("gen_es"));
    m.def("fit_normal_quantile_es", &fit_normal_quantile_es, py::arg("target"));
    m.def("normal_quantile", &normal_quantile, py::arg("params"), py::arg("alpha"));
    m.def("normal_es", &normal_es, py::arg("params"), py::arg("alpha"));
    m.def("lognormal_quantile", &lognormal_quantile, py::arg("params"), py::arg("alpha"));
    m.def("lognormal_es", &lognormal_es, py::arg("params"), py::arg("alpha"));
    m.def(
        "fit_lognormal_quantile_es",
        [](const QuantileESTarget& t) { return fit_lognormal_quantile_es(t); }, py::arg("target"));
    m.def("lognormal_s_lower_bound", &lognormal_s_lower_bound, py::arg("target"));
    m.def("mv_fit_locscale", &mv_fit_locscale, py::arg("target"), py::arg("gen_mean"),
          py::arg("gen_var"));
    m.def("mv_fit_lognormal", &mv_fit_lognormal, py::arg("target"));
    m.def(
        "mv_fit_vasicek", [](const MeanVarTarget& t) { return mv_fit_vasicek(t); },
        py::arg("target"));
    m.def("mv_fit_beta", &mv_fit_beta, py::arg("target"));

    // model types
    py::class_<DebtStructure>(m, "DebtStructure")
        .def(py::init<double, double, double, double>(), py::arg("c"), py::arg("s"), py::arg("u"),
             py::arg("v") = 0.0)
        .def_readwrite("c", &DebtStructure::c)
        .def_readwrite("s", &DebtStructure::s)
        .def_readwrite("u", &DebtStructure::u)
        .def_readwrite("v", &DebtStructure::v)
        .def("total", &DebtStructure::total)
        .def("__repr__", [](const DebtStructure& d) {
            return fmt_params("DebtStructure", {{"c", d.c}, {"s", d.s}, {"u", d.u}, {"v", d.v}});
        });

    py::class_<RiskInputs>(m, "RiskInputs")
        .def(py::init<double, double>(), py::arg("pd"), py::arg("lgd"))
        .def_readwrite("pd", &RiskInputs::pd)
        .def_readwrite("lgd", &RiskInputs::lgd)
        .def("el", &RiskInputs::el)
        .def("__repr__", [](const RiskInputs& r) {
            return fmt_params("RiskInputs", {{"pd", r.pd}, {"lgd", r.lgd}});
        });
    m.def("risk_from_el_lgd", &risk_from_el_lgd, py::arg("el"), py::arg("lgd"));
    m.def("risk_from_pd_el", &risk_from_pd_el, py::arg("pd"), py::arg("el"));

    py::class_<TwoAssetParams>(m, "TwoAssetParams")
        .def(py::init<double, double, double, double, double>(), py::arg("mu"), py::arg("sigma"),
             py::arg("nu"), py::arg("tau"), py::arg("rho"))
        .def_readwrite("mu", &TwoAssetParams::mu)
        .def_readwrite("sigma", &TwoAssetParams::sigma)
        .def_readwrite("nu", &TwoAssetParams::nu)
        .def_readwrite("tau", &TwoAssetParams::tau)
        .def_readwrite("rho", &TwoAssetParams::rho)
        .def("__repr__", [](const TwoAssetParams& p) {
            return fmt_params("TwoAssetParams", {{"mu", p.mu},
                                                 {"sigma", p.sigma},
                                                 {"nu", p.nu},
                                                 {"tau", p.tau},
                                                 {"rho", p.rho}});
        });

    py::class_<OneAssetParams>(m, "OneAssetParams")
        .def(py::init<double, double, double>(), py::arg("kappa"), py::arg("psi"),
             py::arg("epsilon"))
        .def_readwrite("kappa", &OneAssetParams::kappa)
        .def_readwrite("psi", &OneAssetParams::psi)
        .def_readwrite("epsilon", &OneAssetParams::epsilon)
        .def("__repr__", [](const OneAssetParams& p) {
            return fmt_params("OneAssetParams",
                              {{"kappa", p.kappa}, {"psi", p.psi}, {"epsilon", p.epsilon}});
        });

    py::class_<WaterfallLosses>(m, "WaterfallLosses")
        .def_readonly("covered", &WaterfallLosses::covered)
        .def_readonly("senior", &WaterfallLosses::senior)
        .def_readonly("junior", &WaterfallLosses::junior)
        .def("__repr__", [](const WaterfallLosses& w) {
            return fmt_params("WaterfallLosses",
                              {{"covered", w.covered}, {"senior", w.senior}, {"junior", w.junior}});
        });

    py::class_<EventProbs>(m, "EventProbs")
        .def_readonly("event1", &EventProbs::event1)
        .def_readonly("event2", &EventProbs::event2)
        .def_readonly("event3", &EventProbs::event3);

    py::class_<LossReport>(m, "LossReport")
        .def_readonly("p_event1", &LossReport::p_event1)
        .def_readonly("p_event2", &LossReport::p_event2)
        .def_readonly("p_event3", &LossReport::p_event3)
        .def_readonly("el_covered", &LossReport::el_covered)
        .def_readonly("el_senior", &LossReport::el_senior)
        .def_readonly("el_junior", &LossReport::el_junior)
        .def_readonly("el_portfolio", &LossReport::el_portfolio)
        .def("issuer_pd", &LossReport::issuer_pd);

    py::class_<FeasibilityBounds>(m, "FeasibilityBounds")
        .def_readonly("pd", &FeasibilityBounds::pd)
        .def_readonly("pd_upper", &FeasibilityBounds::pd_upper)
        .def_readonly("lgd_lower", &FeasibilityBounds::lgd_lower)
        .def_readonly("lgd_upper", &FeasibilityBounds::lgd_upper)
        .def("pd_feasible", &FeasibilityBounds::pd_feasible)
        .def("contains", &FeasibilityBounds::contains, py::arg("lgd"));

    // two-asset model
    m.def("waterfall_losses", &waterfall_losses, py::arg("x"), py::arg("y"), py::arg("debt"));
    m.def(
        "loss_event_probs",
        [](const TwoAssetParams& p, const DebtStructure& d) { return loss_event_probs(p, d); },
        py::arg("params"), py::arg("debt"));
    m.def(
        "expected_losses",
        [](const TwoAssetParams& p, const DebtStructure& d) { return expected_losses(p, d); },
        py::arg("params"), py::arg("debt"));
    m.def(
        "calibrate_cover_pool",
        [](double c, double v, const RiskInputs& r) { return calibrate_cover_pool(c, v, r); },
        py::arg("covered_face"), py::arg("oc_level"), py::arg("cover"));
    m.def("feasibility_bounds", &feasibility_bounds, py::arg("mu"), py::arg("sigma"),
          py::arg("d_issuer"), py::arg("p_issuer"));
    m.def(
        "calibrate_issuer_comonotonic",
        [](double mu, double sigma, double d, const RiskInputs& r) {
            return calibrate_issuer_comonotonic(mu, sigma, d, r);
        },
        py::arg("mu"), py::arg("sigma"), py::arg("d_issuer"), py::arg("issuer"));
    m.def(
        "calibrate_issuer_copula",
        [](double mu, double sigma, double rho, double d, const RiskInputs& r) {
            return calibrate_issuer_copula(mu, sigma, rho, d, r);
        },
        py::arg("mu"), py::arg("sigma"), py::arg("rho"), py::arg("d_issuer"), py::arg("issuer"));
    m.def(
        "margins_calibrate",
        [](const DebtStructure& d, const RiskInputs& cover, const RiskInputs& other, double rho) {
            return margins_calibrate(d, cover, other, rho);
        },
        py::arg("debt"), py::arg("cover"), py::arg("other"), py::arg("rho"));

    py::class_<NormalToyParams>(m, "NormalToyParams")
        .def_readonly("mu", &NormalToyParams::mu)
        .def_readonly("sigma", &NormalToyParams::sigma)
        .def_readonly("nu", &NormalToyParams::nu)
        .def_readonly("tau", &NormalToyParams::tau)
        .def_readonly("psi", &NormalToyParams::psi)
        .def_readonly("nu_nonpositive", &NormalToyParams::nu_nonpositive);
    m.def("calibrate_normal_toy", &calibrate_normal_toy, py::arg("covered_face"),
          py::arg("oc_level"), py::arg("cover"), py::arg("d_issuer"), py::arg("issuer"),
          py::arg("rho"));

    // one-asset model
    py::class_<AdjustmentResult>(m, "AdjustmentResult")
        .def_readonly("theta", &AdjustmentResult::theta)
        .def_readonly("epsilon_raw", &AdjustmentResult::epsilon_raw)
        .def_readonly("epsilon", &AdjustmentResult::epsilon)
        .def_readonly("capped", &AdjustmentResult::capped);

    m.def(
        "calibrate_issuer_one",
        [](const DebtStructure& d, const RiskInputs& r) { return calibrate_issuer_one(d, r); },
        py::arg("debt"), py::arg("issuer"));
    m.def(
        "adjust_encumbrance",
        [](double kappa, double psi, double c, double v, double el) {
            return adjust_encumbrance(kappa, psi, c, v, el);
        },
        py::arg("kappa"), py::arg("psi"), py::arg("covered_face"), py::arg("oc_level"),
        py::arg("el_cover"));
    m.def("min_matchable_el", &min_matchable_el, py::arg("kappa"), py::arg("psi"),
          py::arg("covered_face"), py::arg("oc_level"));
    m.def(
        "expected_losses_one",
        [](const OneAssetParams& p, const DebtStructure& d) { return expected_losses_one(p, d); },
        py::arg("params"), py::arg("debt"));
    m.def("two_asset_to_one_asset", &two_asset_to_one_asset, py::arg("params"));
    m.def("encumbrance_from_balance", &encumbrance_from_balance, py::arg("covered_face"),
          py::arg("oc_level"), py::arg("a0"));

    // Monte Carlo
    py::class_<McConfig>(m, "McConfig")
        .def(py::init<std::uint64_t, std::uint64_t, std::uint64_t>(), py::arg("n_samples"),
             py::arg("seed") = 0, py::arg("chunk") = 1'000'000)
        .def_readwrite("n_samples", &McConfig::n_samples)
        .def_readwrite("seed", &McConfig::seed)
        .def_readwrite("chunk", &McConfig::chunk);

    py::class_<McEstimate>(m, "McEstimate")
        .def_readonly("mean", &McEstimate::mean)
        .def_readonly("std_error", &McEstimate::std_error)
        .def_readonly("n", &McEstimate::n)
        .def("__repr__", [](const McEstimate& e) {
            return fmt_params("McEstimate", {{"mean", e.mean}, {"std_error", e.std_error}});
        });

    py::class_<McLossReport>(m, "McLossReport")
        .def_readonly("p_event1", &McLossReport::p_event1)
        .def_readonly("p_event2", &McLossReport::p_event2)
        .def_readonly("p_event3", &McLossReport::p_event3)
        .def_readonly("el_covered", &McLossReport::el_covered)
        .def_readonly("el_senior", &McLossReport::el_senior)
        .def_readonly("el_junior", &McLossReport::el_junior)
        .def_readonly("el_portfolio", &McLossReport::el_portfolio)
        .def("means", &McLossReport::means);

    m.def("mc_loss_report", &mc_loss_report, py::arg("params"), py::arg("debt"), py::arg("cfg"));
    m.def("mc_one_asset", &mc_one_asset, py::arg("params"), py::arg("debt"), py::arg("cfg"));

    // scenario tables and region grid
    m.def(
        "table_csv",
        [](int id, bool full_precision) { return render_table_csv(make_table(id), full_precision); },
        py::arg("id"), py::arg("full_precision") = false);
    m.def(
        "region_grid_csv",
        [](const DebtStructure& debt, const std::vector<RiskInputs>& cover_sets, double pd_min,
           double pd_max, int pd_steps, double lgd_min, double lgd_max, int lgd_steps) {
            return region_csv(debt, cover_sets,
                              RegionSpec{pd_min, pd_max, pd_steps, lgd_min, lgd_max, lgd_steps});
        },
        py::arg("debt"), py::arg("cover_sets"), py::arg("pd_min") = 1e-4,
        py::arg("pd_max") = 0.02, py::arg("pd_steps") = 50, py::arg("lgd_min") = 0.01,
        py::arg("lgd_max") = 0.99, py::arg("lgd_steps") = 50);
    m.def(
        "run_scenarios_json",
        [](const std::string& config) {
            const auto cfg = parse_scenario_config(nlohmann::json::parse(config));
            const auto outcomes = run_expected_losses(cfg);
            nlohmann::json out = nlohmann::json::array();
            for (const auto& o : outcomes) {
                out.push_back({{"axis", o.axis},
                               {"value", o.axis_value},
                               {"params", o.params},
                               {"report", loss_report_json(o.report)}});
            }
            return out.dump();
        },
        py::arg("config_json"),
        "Run the scenarios described by a JSON config string; returns a JSON string");
}
