#include "covbond/two_asset.hpp"

namespace covbond {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(w - e^l) for l < log(w), stable when e^l is close to w.
double log_diff(double log_w, double l) {
    return log_w + std::log(-std::expm1(l - log_w));
}

// Integral of phi * g over (lo, hi); empty or tail-only intervals give 0.
template <class G>
double phi_int(G&& g, double lo, double hi, const Tolerance& tol) {
    if (!(lo < hi)) return 0.0;
    return gaussian_weighted_integral(g, Interval{lo, hi}, tol);
}

// E[e^{loc + s xi} 1_{xi < x}] = e^{loc + s^2/2} Phi(x - s), in exp-of-log form
// so that large loc or s cannot overflow the intermediate product.
double truncated_exp_mean(double loc, double s, double x) {
    return std::exp(loc + 0.5 * s * s + norm_logcdf(x - s));
}

// Conditional machinery of the normal copula: given xi = x, log Y is normal
// with mean nu + tau rho x and standard deviation tau sqrt(1 - rho^2), and
// symmetrically for log X given eta = x.
struct CopulaCtx {
    double mu, sigma, nu, tau, rho;
    double cs_y;  // tau sqrt(1-rho^2)
    double cs_x;  // sigma sqrt(1-rho^2)

    explicit CopulaCtx(const TwoAssetParams& p)
        : mu(p.mu), sigma(p.sigma), nu(p.nu), tau(p.tau), rho(p.rho),
          cs_y(p.tau * std::sqrt((1.0 - p.rho) * (1.0 + p.rho))),
          cs_x(p.sigma * std::sqrt((1.0 - p.rho) * (1.0 + p.rho))) {}

    // P[Y < w - X | xi = x]
    double y_below(double log_w, double x) const {
        const double lx = mu + sigma * x;
        if (!(lx < log_w)) return 0.0;
        return norm_cdf((log_diff(log_w, lx) - (nu + tau * rho * x)) / cs_y);
    }
    // Phi(arg - cs_y), the shifted factor of E[Y 1_{Y < w - X} | xi = x]
    double y_below_shifted(double log_w, double x) const {
        const double lx = mu + sigma * x;
        if (!(lx < log_w)) return 0.0;
        return norm_cdf((log_diff(log_w, lx) - (nu + tau * rho * x)) / cs_y - cs_y);
    }
    // P[X < w - Y | eta = x]
    double x_below(double log_w, double x) const {
        const double ly = nu + tau * x;
        if (!(ly < log_w)) return 0.0;
        return norm_cdf((log_diff(log_w, ly) - (mu + sigma * rho * x)) / cs_x);
    }
    // P[X < c | eta = x] with c passed as log(c) (-inf allowed)
    double x_below_const(double log_c, double x) const {
        return norm_cdf((log_c - (mu + sigma * rho * x)) / cs_x);
    }
};

LossReport expected_losses_copula(const TwoAssetParams& p, const DebtStructure& debt,
                                  const Tolerance& tol) {
    const CopulaCtx ctx(p);
    const double c = debt.c, s = debt.s, u = debt.u;
    const double total = debt.total();
    const double log_c = c > 0.0 ? std::log(c) : kNegInf;
    const double log_cs = c + s > 0.0 ? std::log(c + s) : kNegInf;
    const double log_t = std::log(total);
    const double x_c = c > 0.0 ? (log_c - p.mu) / p.sigma : kNegInf;
    const double x_cs = c + s > 0.0 ? (log_cs - p.mu) / p.sigma : kNegInf;
    const double x_t = (log_t - p.mu) / p.sigma;
    const double y_s = s > 0.0 ? (std::log(s) - p.nu) / p.tau : kNegInf;
    const double y_cs = c + s > 0.0 ? (log_cs - p.nu) / p.tau : kNegInf;
    const double y_t = (log_t - p.nu) / p.tau;

    auto ex = [&](double x) { return std::exp(p.mu + p.sigma * x); };
    auto ey = [&](double x) { return std::exp(p.nu + p.tau * x); };

    const double p3 =
        phi_int([&](double x) { return ctx.y_below(log_cs, x); }, kNegInf, x_c, tol);
    const double p2 = phi_int([&](double x) { return ctx.y_below(log_cs, x); }, x_c, x_cs, tol);
    const double p_below_total =
        phi_int([&](double x) { return ctx.y_below(log_t, x); }, kNegInf, x_t, tol);
    const double p1 = std::max(p_below_total - p2 - p3, 0.0);

    LossReport rep;
    rep.p_event1 = p1;
    rep.p_event2 = p2;
    rep.p_event3 = p3;

    // E[Y 1_{Y < w - X}] carries the conditional lognormal mean factor.
    const double y_mean_factor = std::exp(p.nu + 0.5 * ctx.cs_y * ctx.cs_y);

    if (c > 0.0) {
        const double t1 = phi_int(
            [&](double x) { return (c - ex(x)) * ctx.y_below(log_cs, x); }, kNegInf, x_c, tol);
        const double t2 =
            y_mean_factor *
            phi_int(
                [&](double x) {
                    const double e = ex(x);
                    return (c - e) * std::exp(p.tau * p.rho * x) / (c + s - e) *
                           ctx.y_below_shifted(log_cs, x);
                },
                kNegInf, x_c, tol);
        rep.el_covered = (t1 - t2) / c;
    }

    if (s > 0.0) {
        const double t4 = phi_int([&](double x) { return ex(x) * ctx.y_below(log_cs, x); }, x_c,
                                  x_cs, tol);
        const double t5 = phi_int(
            [&](double x) {
                return ey(x) * (ctx.x_below(log_cs, x) - ctx.x_below_const(log_c, x));
            },
            kNegInf, y_s, tol);
        const double t6 =
            s * y_mean_factor *
            phi_int(
                [&](double x) {
                    return std::exp(p.tau * p.rho * x) / (c + s - ex(x)) *
                           ctx.y_below_shifted(log_cs, x);
                },
                kNegInf, x_c, tol);
        rep.el_senior = ((c + s) * p2 - t4 - t5 + s * p3 - t6) / s;
    }

    if (u > 0.0) {
        const double t9 =
            phi_int([&](double x) { return ex(x) * ctx.y_below(log_cs, x); }, kNegInf, x_cs, tol);
        const double t10 =
            phi_int([&](double x) { return ex(x) * ctx.y_below(log_t, x); }, kNegInf, x_t, tol);
        const double t11 =
            phi_int([&](double x) { return ey(x) * ctx.x_below(log_cs, x); }, kNegInf, y_cs, tol);
        const double t12 =
            phi_int([&](double x) { return ey(x) * ctx.x_below(log_t, x); }, kNegInf, y_t, tol);
        rep.el_junior = (u * (p2 + p3) + total * p1 + t9 - t10 + t11 - t12) / u;
    } else {
        rep.el_junior = p2 + p3;
    }

    rep.el_portfolio =
        ((c > 0.0 ? c * *rep.el_covered : 0.0) + s * rep.el_senior + u * rep.el_junior) / total;
    return rep;
}

LossReport expected_losses_comonotonic(const TwoAssetParams& p, const DebtStructure& debt,
                                       const Tolerance& tol) {
    const double c = debt.c, s = debt.s, u = debt.u;
    const double total = debt.total();
    const double x_c = c > 0.0 ? (std::log(c) - p.mu) / p.sigma : kNegInf;
    const double x_total = solve_threshold_x(total, p.mu, p.sigma, p.nu, p.tau, tol);
    const double x_cs =
        c + s > 0.0 ? solve_threshold_x(c + s, p.mu, p.sigma, p.nu, p.tau, tol) : kNegInf;

    auto ex = [&](double x) { return std::exp(p.mu + p.sigma * x); };
    auto ey = [&](double x) { return std::exp(p.nu + p.tau * x); };

    LossReport rep;
    rep.p_event1 = norm_cdf(x_total) - norm_cdf(x_cs);
    rep.p_event2 = std::max(norm_cdf(x_cs) - norm_cdf(x_c), 0.0);
    rep.p_event3 = norm_cdf(std::min(x_cs, x_c));

    const double up3 = std::min(x_c, x_cs);

    if (c > 0.0) {
        const double el = phi_int(
            [&](double x) {
                const double e = ex(x);
                return (c - e) * (c + s - e - ey(x)) / (c + s - e);
            },
            kNegInf, up3, tol);
        rep.el_covered = el / c;
    }

    if (s > 0.0) {
        const double t_frac =
            phi_int([&](double x) { return ey(x) / (c + s - ex(x)); }, kNegInf, up3, tol);
        const double t_x = std::max(truncated_exp_mean(p.mu, p.sigma, x_cs) -
                                        truncated_exp_mean(p.mu, p.sigma, x_c),
                                    0.0);
        const double t_y = std::max(truncated_exp_mean(p.nu, p.tau, x_cs) -
                                        truncated_exp_mean(p.nu, p.tau, x_c),
                                    0.0);
        rep.el_senior =
            (s * rep.p_event3 - s * t_frac + (c + s) * rep.p_event2 - t_x - t_y) / s;
    }

    if (u > 0.0) {
        const double t_x = truncated_exp_mean(p.mu, p.sigma, x_total) -
                           truncated_exp_mean(p.mu, p.sigma, x_cs);
        const double t_y = truncated_exp_mean(p.nu, p.tau, x_total) -
                           truncated_exp_mean(p.nu, p.tau, x_cs);
        rep.el_junior = (u * norm_cdf(x_cs) + total * rep.p_event1 - t_x - t_y) / u;
    } else {
        rep.el_junior = norm_cdf(x_cs);
    }

    rep.el_portfolio =
        ((c > 0.0 ? c * *rep.el_covered : 0.0) + s * rep.el_senior + u * rep.el_junior) / total;
    return rep;
}

}  // namespace

WaterfallLosses waterfall_losses(double x, double y, const DebtStructure& debt) {
    if (!(x >= 0.0 && y >= 0.0))
        throw std::invalid_argument("waterfall_losses: asset values must be nonnegative");
    debt.validate();
    const double c = debt.c, s = debt.s, u = debt.u;
    const double z = x + y;
    if (z >= c + s + u) return {0.0, 0.0, 0.0};
    if (z >= c + s) return {0.0, 0.0, 1.0 - (z - (c + s)) / u};
    if (x >= c) return {0.0, 1.0 - (z - c) / s, 1.0};
    return {(c - x) * (s + c - z) / ((s + c - x) * c), (s + c - z) / (s + c - x), 1.0};
}

EventProbs loss_event_probs(const TwoAssetParams& params, const DebtStructure& debt,
                            const Tolerance& tol) {
    const LossReport rep = expected_losses(params, debt, tol);
    return {rep.p_event1, rep.p_event2, rep.p_event3};
}

LossReport expected_losses(const TwoAssetParams& params, const DebtStructure& debt,
                           const Tolerance& tol) {
    params.validate();
    debt.validate();
    if (params.rho >= kComonotonicRho) return expected_losses_comonotonic(params, debt, tol);
    return expected_losses_copula(params, debt, tol);
}

LocScaleParams calibrate_cover_pool(double covered_face, double oc_level, const RiskInputs& cover,
                                    const Tolerance& tol) {
    if (!(covered_face > 0.0))
        throw std::invalid_argument("calibrate_cover_pool: covered face value must be positive");
    if (!(oc_level >= 0.0))
        throw std::invalid_argument("calibrate_cover_pool: oc level must be nonnegative");
    cover.validate();
    const double threshold = (1.0 + oc_level) * covered_face;
    return fit_lognormal_quantile_es(target_from_pd_lgd(cover.pd, cover.lgd, threshold), tol);
}

FeasibilityBounds feasibility_bounds(double mu, double sigma, double d_issuer, double p_issuer) {
    if (!(sigma > 0.0)) throw std::invalid_argument("feasibility_bounds: sigma must be positive");
    if (!(d_issuer > 0.0))
        throw std::invalid_argument("feasibility_bounds: total debt must be positive");
    if (!(p_issuer > 0.0 && p_issuer < 1.0))
        throw std::invalid_argument("feasibility_bounds: p_issuer must lie in (0,1)");
    FeasibilityBounds fb;
    fb.pd = p_issuer;
    fb.pd_upper = norm_cdf((std::log(d_issuer) - mu) / sigma);
    if (p_issuer < fb.pd_upper) {
        const double x_d = norm_inv_cdf(p_issuer);
        const double quantile_x = std::exp(mu + sigma * x_d);
        const double tail_mean_x =
            std::exp(mu + 0.5 * sigma * sigma + norm_logcdf(x_d - sigma));  // E[X 1_{X<q_p(X)}]
        fb.lgd_lower = (p_issuer * quantile_x - tail_mean_x) / (p_issuer * d_issuer);
        fb.lgd_upper = 1.0 - tail_mean_x / (p_issuer * d_issuer);
    } else {
        fb.lgd_lower = std::numeric_limits<double>::quiet_NaN();
        fb.lgd_upper = std::numeric_limits<double>::quiet_NaN();
    }
    return fb;
}

LocScaleParams calibrate_issuer_comonotonic(double mu, double sigma, double d_issuer,
                                            const RiskInputs& issuer, const Tolerance& tol) {
    issuer.validate();
    const FeasibilityBounds fb = feasibility_bounds(mu, sigma, d_issuer, issuer.pd);
    if (!fb.pd_feasible())
        throw InfeasibleError(
            "calibrate_issuer_comonotonic: issuer PD violates p_issuer < Phi((log D - mu)/sigma) "
            "(pd_upper = " +
            std::to_string(fb.pd_upper) + ")");
    if (!(issuer.lgd > fb.lgd_lower))
        throw InfeasibleError(
            "calibrate_issuer_comonotonic: issuer LGD violates the lower bound of the LGD "
            "restriction (lgd_lower = " +
            std::to_string(fb.lgd_lower) + ")");
    if (!(issuer.lgd < fb.lgd_upper))
        throw InfeasibleError(
            "calibrate_issuer_comonotonic: issuer LGD violates the upper bound of the LGD "
            "restriction (lgd_upper = " +
            std::to_string(fb.lgd_upper) + ")");

    const double x_d = norm_inv_cdf(issuer.pd);
    // log(D - e^{mu + sigma x(D)}); x(D) = Phi^{-1}(p) pins the first equation.
    const double log_rest = log_diff(std::log(d_issuer), mu + sigma * x_d);
    const double rhs = d_issuer * issuer.pd * (1.0 - issuer.lgd) -
                       std::exp(mu + 0.5 * sigma * sigma + norm_logcdf(x_d - sigma));
    const double log_rhs = std::log(rhs);
    // g(tau) = (D - e^{mu+sigma x(D)}) e^{tau^2/2 - tau x(D)} Phi(x(D) - tau),
    // strictly decreasing from (D - e^{mu+sigma x(D)}) p to 0.
    auto fn = [&](double t) {
        return log_rest + 0.5 * t * t - t * x_d + norm_logcdf(x_d - t) - log_rhs;
    };
    double t_hi = 1.0;
    int guard = 0;
    while (fn(t_hi) > 0.0) {
        t_hi *= 2.0;
        if (++guard > 60)
            throw NoConvergenceError("calibrate_issuer_comonotonic: bracket search failed");
    }
    Tolerance root_tol{1e-15, 1e-15, tol.max_iter};
    const double tau = bracketed_root(fn, 1e-14, t_hi, root_tol);
    return {log_rest - tau * x_d, tau};
}

namespace {

// (2optim1): issuer PD under rho < 1 as a single integral.
double issuer_pd_copula(const TwoAssetParams& p, double d, const Tolerance& tol) {
    const CopulaCtx ctx(p);
    const double log_d = std::log(d);
    const double x_d = (log_d - p.mu) / p.sigma;
    return phi_int([&](double x) { return ctx.y_below(log_d, x); }, kNegInf, x_d, tol);
}

// (2optim2) right side: E[(X + Y) 1_{X+Y < D}].
double issuer_tail_mean_copula(const TwoAssetParams& p, double d, const Tolerance& tol) {
    const CopulaCtx ctx(p);
    const double log_d = std::log(d);
    const double x_d = (log_d - p.mu) / p.sigma;
    const double part_x = phi_int(
        [&](double x) { return std::exp(p.mu + p.sigma * x) * ctx.y_below(log_d, x); }, kNegInf,
        x_d, tol);
    const double part_y =
        std::exp(p.nu + 0.5 * ctx.cs_y * ctx.cs_y) *
        phi_int(
            [&](double x) {
                return std::exp(p.tau * p.rho * x) * ctx.y_below_shifted(log_d, x);
            },
            kNegInf, x_d, tol);
    return part_x + part_y;
}

}  // namespace

LocScaleParams calibrate_issuer_copula(double mu, double sigma, double rho, double d_issuer,
                                       const RiskInputs& issuer, const Tolerance& tol) {
    issuer.validate();
    if (!(rho >= 0.0 && rho <= 1.0))
        throw std::invalid_argument("calibrate_issuer_copula: rho must lie in [0, 1]");
    if (rho >= kComonotonicRho)
        return calibrate_issuer_comonotonic(mu, sigma, d_issuer, issuer, tol);

    const double p_target = issuer.pd;
    const double e_target = d_issuer * issuer.pd * (1.0 - issuer.lgd);

    // Seed: comonotonic solution when feasible, otherwise the normal-toy
    // moments mapped back to a lognormal, otherwise a plain single-asset fit.
    LocScaleParams guess{0.0, 0.0};
    bool seeded = false;
    try {
        guess = calibrate_issuer_comonotonic(mu, sigma, d_issuer, issuer, tol);
        seeded = true;
    } catch (const InfeasibleError&) {
    }
    if (!seeded) {
        const double mean_x = std::exp(mu + 0.5 * sigma * sigma);
        const double sd_x = mean_x * std::sqrt(std::expm1(sigma * sigma));
        const double b = norm_inv_cdf(issuer.pd);
        const double psi =
            d_issuer * issuer.el() / (issuer.pd * b + norm_pdf(b));
        const double disc = psi * psi - (1.0 - rho * rho) * sd_x * sd_x;
        if (disc > 0.0) {
            const double tau_n = std::sqrt(disc) - sd_x * rho;
            const double nu_n = d_issuer - mean_x - psi * b;
            if (tau_n > 0.0 && nu_n > 0.0) {
                guess = mv_fit_lognormal({nu_n, tau_n * tau_n});
                seeded = true;
            }
        }
    }
    if (!seeded)
        guess = fit_lognormal_quantile_es(
            target_from_pd_lgd(issuer.pd, issuer.lgd, d_issuer), tol);

    auto residuals = [&](double nu_, double log_tau) {
        TwoAssetParams prm{mu, sigma, nu_, std::exp(log_tau), rho};
        const double r1 = issuer_pd_copula(prm, d_issuer, tol) / p_target - 1.0;
        const double r2 = issuer_tail_mean_copula(prm, d_issuer, tol) / e_target - 1.0;
        return std::pair<double, double>{r1, r2};
    };

    double nu_ = guess.m;
    double lt = std::log(guess.s);
    auto [r1, r2] = residuals(nu_, lt);
    double best_norm = std::max(std::fabs(r1), std::fabs(r2));
    double best_nu = nu_, best_lt = lt;
    constexpr double kResTol = 1e-8;

    for (int iter = 0; iter < 80 && best_norm >= kResTol; ++iter) {
        const double h = 1e-6;
        auto [r1n, r2n] = residuals(nu_ + h, lt);
        auto [r1t, r2t] = residuals(nu_, lt + h);
        const double j11 = (r1n - r1) / h, j12 = (r1t - r1) / h;
        const double j21 = (r2n - r2) / h, j22 = (r2t - r2) / h;
        const double det = j11 * j22 - j12 * j21;
        if (!(std::fabs(det) > 1e-300))
            throw NoConvergenceError(
                "calibrate_issuer_copula: singular Jacobian; best residuals (pd, el) = (" +
                std::to_string(r1) + ", " + std::to_string(r2) + ")");
        const double dnu = -(j22 * r1 - j12 * r2) / det;
        const double dlt = -(-j21 * r1 + j11 * r2) / det;

        // Damp: halve the step until the residual norm improves.
        double lambda = 1.0;
        bool accepted = false;
        const double cur_norm = std::max(std::fabs(r1), std::fabs(r2));
        for (int k = 0; k < 10; ++k, lambda *= 0.5) {
            const double nu_try = nu_ + lambda * dnu;
            const double lt_try = std::clamp(lt + lambda * dlt, -40.0, 10.0);
            double t1, t2;
            try {
                std::tie(t1, t2) = residuals(nu_try, lt_try);
            } catch (const std::exception&) {
                continue;
            }
            if (std::max(std::fabs(t1), std::fabs(t2)) < cur_norm) {
                nu_ = nu_try;
                lt = lt_try;
                r1 = t1;
                r2 = t2;
                accepted = true;
                break;
            }
        }
        if (!accepted)
            throw NoConvergenceError(
                "calibrate_issuer_copula: no descent step; best max residual = " +
                std::to_string(best_norm));
        if (std::max(std::fabs(r1), std::fabs(r2)) < best_norm) {
            best_norm = std::max(std::fabs(r1), std::fabs(r2));
            best_nu = nu_;
            best_lt = lt;
        }
    }
    if (best_norm >= kResTol)
        throw NoConvergenceError(
            "calibrate_issuer_copula: residuals did not reach 1e-8; best max residual = " +
            std::to_string(best_norm));
    return {best_nu, std::exp(best_lt)};
}

TwoAssetParams margins_calibrate(const DebtStructure& debt, const RiskInputs& cover,
                                 const RiskInputs& other, double rho, const Tolerance& tol) {
    debt.validate();
    if (!(rho >= 0.0 && rho <= 1.0))
        throw std::invalid_argument("margins_calibrate: rho must lie in [0, 1]");
    const LocScaleParams pool = calibrate_cover_pool(debt.c, debt.v, cover, tol);
    const double threshold = debt.s + debt.u - debt.v * debt.c;
    if (!(threshold > 0.0))
        throw std::invalid_argument("margins_calibrate: requires S + U > v C");
    other.validate();
    const LocScaleParams rest =
        fit_lognormal_quantile_es(target_from_pd_lgd(other.pd, other.lgd, threshold), tol);
    return {pool.m, pool.s, rest.m, rest.s, rho};
}

NormalToyParams calibrate_normal_toy(double covered_face, double oc_level, const RiskInputs& cover,
                                     double d_issuer, const RiskInputs& issuer, double rho) {
    if (!(covered_face > 0.0))
        throw std::invalid_argument("calibrate_normal_toy: covered face value must be positive");
    if (!(d_issuer > 0.0))
        throw std::invalid_argument("calibrate_normal_toy: total debt must be positive");
    if (!(rho >= 0.0 && rho <= 1.0))
        throw std::invalid_argument("calibrate_normal_toy: rho must lie in [0, 1]");
    cover.validate();
    issuer.validate();
    const double a = norm_inv_cdf(cover.pd);
    const double sigma =
        (1.0 + oc_level) * covered_face * cover.el() / (cover.pd * a + norm_pdf(a));
    const double mu = (1.0 + oc_level) * covered_face - sigma * a;
    const double b = norm_inv_cdf(issuer.pd);
    const double psi = d_issuer * issuer.el() / (issuer.pd * b + norm_pdf(b));
    if (!(psi > sigma))
        throw InfeasibleError(
            "calibrate_normal_toy: psi <= sigma (issuer asset volatility below the cover pool's); "
            "psi = " +
            std::to_string(psi) + ", sigma = " + std::to_string(sigma));
    const double tau = std::sqrt(psi * psi - (1.0 - rho * rho) * sigma * sigma) - sigma * rho;
    const double nu = d_issuer - mu - psi * b;
    return {mu, sigma, nu, tau, psi, nu <= 0.0};
}

}  // namespace covbond
