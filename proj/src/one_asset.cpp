#include "covbond/one_asset.hpp"

namespace covbond {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

template <class G>
double phi_int(G&& g, double lo, double hi, const Tolerance& tol) {
    if (!(lo < hi)) return 0.0;
    return gaussian_weighted_integral(g, Interval{lo, hi}, tol);
}

// Expected shortfall of e^{theta + psi xi} below the threshold (1+v) c:
// f(theta) = (1+v)c Phi(d) - e^{theta + psi^2/2} Phi(d - psi), d = (log((1+v)c) - theta)/psi.
double shortfall_below(double theta, double psi, double threshold) {
    const double d = (std::log(threshold) - theta) / psi;
    return threshold * norm_cdf(d) -
           std::exp(theta + 0.5 * psi * psi + norm_logcdf(d - psi));
}

}  // namespace

LocScaleParams calibrate_issuer_one(const DebtStructure& debt, const RiskInputs& issuer,
                                    const Tolerance& tol) {
    debt.validate();
    issuer.validate();
    return fit_lognormal_quantile_es(
        target_from_pd_lgd(issuer.pd, issuer.lgd, debt.total()), tol);
}

AdjustmentResult adjust_encumbrance(double kappa, double psi, double covered_face, double oc_level,
                                    double el_cover, const Tolerance& tol) {
    if (!(psi > 0.0)) throw std::invalid_argument("adjust_encumbrance: psi must be positive");
    if (!(covered_face > 0.0))
        throw std::invalid_argument("adjust_encumbrance: covered face value must be positive");
    if (!(el_cover > 0.0 && el_cover < 1.0))
        throw std::invalid_argument("adjust_encumbrance: el_cover must lie in (0, 1)");
    const double threshold = (1.0 + oc_level) * covered_face;
    const double target = threshold * el_cover;
    auto f = [&](double theta) { return shortfall_below(theta, psi, threshold) - target; };
    // f decreases from threshold (theta -> -inf) to 0 (theta -> +inf).
    double hi = std::log(threshold) + 40.0 * psi;
    double step = 1.0;
    double lo = hi - step;
    int guard = 0;
    while (f(lo) < 0.0) {
        step *= 2.0;
        lo = hi - step;
        if (++guard > 120) throw NoConvergenceError("adjust_encumbrance: bracket search failed");
    }
    Tolerance root_tol{1e-16, 4e-16, tol.max_iter};
    double theta = bracketed_root(f, lo, hi, root_tol);
    // Newton polish on the monotone shortfall keeps the residual near machine level.
    for (int i = 0; i < 4 && std::fabs(f(theta)) > 1e-12 * threshold; ++i) {
        const double d = (std::log(threshold) - theta) / psi;
        const double deriv = -std::exp(theta + 0.5 * psi * psi + norm_logcdf(d - psi));
        if (!(deriv < 0.0)) break;
        theta -= f(theta) / deriv;
    }
    const double raw = std::exp(theta - kappa);
    return {theta, raw, std::min(1.0, raw), raw > 1.0};
}

double min_matchable_el(double kappa, double psi, double covered_face, double oc_level) {
    if (!(psi > 0.0)) throw std::invalid_argument("min_matchable_el: psi must be positive");
    if (!(covered_face > 0.0))
        throw std::invalid_argument("min_matchable_el: covered face value must be positive");
    const double threshold = (1.0 + oc_level) * covered_face;
    return shortfall_below(kappa, psi, threshold) / threshold;
}

LossReport expected_losses_one(const OneAssetParams& params, const DebtStructure& debt,
                               const Tolerance& tol) {
    params.validate();
    debt.validate();
    const double c = debt.c, s = debt.s, u = debt.u;
    const double total = debt.total();
    const double kappa = params.kappa, psi = params.psi, eps = params.epsilon;
    if (c > 0.0 && !(eps > 0.0))
        throw std::invalid_argument(
            "expected_losses_one: epsilon must be positive when covered bonds are present");

    auto xq = [&](double w) { return w > 0.0 ? (std::log(w) - kappa) / psi : kNegInf; };
    // log(c / epsilon): the asset level at which the cover pool covers the bonds
    const double log_ce = c > 0.0 ? std::log(c) - std::log(eps) : kNegInf;
    const double x_ce = c > 0.0 ? (log_ce - kappa) / psi : kNegInf;
    const double x_cs = xq(c + s);
    const double x_total = xq(total);
    const double x_ev3 = std::min(x_ce, x_cs);  // upper limit of the shortfall event
    const double x_ev2_hi = std::max(x_ce, x_cs);

    auto ea = [&](double x) { return std::exp(kappa + psi * x); };
    // E[A 1_{xi < x}] in exp-of-log form
    auto trunc_mean_a = [&](double x) {
        return std::exp(kappa + 0.5 * psi * psi + norm_logcdf(x - psi));
    };

    LossReport rep;
    rep.p_event1 = norm_cdf(x_total) - norm_cdf(x_cs);
    rep.p_event2 = norm_cdf(x_ev2_hi) - norm_cdf(x_ce);
    rep.p_event3 = norm_cdf(x_ev3);

    if (c > 0.0) {
        double el;
        if (eps == 1.0) {
            // residual pool is empty; the loss ratio collapses to c - A
            el = phi_int([&](double x) { return c - ea(x); }, kNegInf, x_ev3, tol);
        } else {
            el = phi_int(
                [&](double x) {
                    const double a = ea(x);
                    return (c - eps * a) * (c + s - a) / (c + s - eps * a);
                },
                kNegInf, x_ev3, tol);
        }
        rep.el_covered = el / c;
    }

    if (s > 0.0) {
        double frac;
        if (eps == 1.0) {
            frac = rep.p_event3;
        } else {
            frac = phi_int(
                [&](double x) {
                    const double a = ea(x);
                    return (c + s - a) / (c + s - eps * a);
                },
                kNegInf, x_ev3, tol);
        }
        const double t_a = trunc_mean_a(x_ev2_hi) - trunc_mean_a(x_ce);
        rep.el_senior = (s * frac + (c + s) * rep.p_event2 - t_a) / s;
    }

    if (u > 0.0) {
        const double t_a = trunc_mean_a(x_total) - trunc_mean_a(x_cs);
        rep.el_junior = (u * norm_cdf(x_cs) + total * rep.p_event1 - t_a) / u;
    } else {
        rep.el_junior = norm_cdf(x_cs);
    }

    rep.el_portfolio =
        ((c > 0.0 ? c * *rep.el_covered : 0.0) + s * rep.el_senior + u * rep.el_junior) / total;
    return rep;
}

OneAssetParams two_asset_to_one_asset(const TwoAssetParams& params) {
    params.validate();
    if (!(std::fabs(params.rho - 1.0) <= 1e-12))
        throw NotEquivalentError("two_asset_to_one_asset: requires rho = 1");
    if (!(std::fabs(params.sigma - params.tau) <= 1e-12))
        throw NotEquivalentError("two_asset_to_one_asset: requires sigma = tau");
    // kappa = log(e^mu + e^nu), epsilon = e^mu / (e^mu + e^nu), evaluated stably
    const double hi = std::max(params.mu, params.nu);
    const double kappa = hi + std::log(std::exp(params.mu - hi) + std::exp(params.nu - hi));
    const double epsilon = 1.0 / (1.0 + std::exp(params.nu - params.mu));
    return {kappa, params.sigma, epsilon};
}

double encumbrance_from_balance(double covered_face, double oc_level, double a0) {
    if (!(a0 > 0.0))
        throw std::invalid_argument("encumbrance_from_balance: a0 must be positive");
    if (!(covered_face >= 0.0 && oc_level >= 0.0))
        throw std::invalid_argument("encumbrance_from_balance: invalid inputs");
    const double eps = (1.0 + oc_level) * covered_face / a0;
    if (!(eps < 1.0))
        throw std::invalid_argument(
            "encumbrance_from_balance: (1+v) c must be below the total asset value a0");
    return eps;
}

}  // namespace covbond
