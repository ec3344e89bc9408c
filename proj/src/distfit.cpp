#include "covbond/distfit.hpp"

namespace covbond {

namespace {

void check_alpha(double alpha, const char* where) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument(std::string(where) + ": alpha must lie in (0, 1)");
}

void check_unit_interval_moments(const MeanVarTarget& t, const char* where) {
    if (!(t.mean > 0.0 && t.mean < 1.0))
        throw InfeasibleError(std::string(where) + ": mean must lie in (0, 1)");
    if (!(t.variance > 0.0 && t.variance < t.mean * (1.0 - t.mean)))
        throw InfeasibleError(std::string(where) +
                              ": variance must lie in (0, mean*(1-mean)) for a law on [0, 1]");
}

}  // namespace

QuantileESTarget target_from_pd_lgd(double pd, double lgd, double threshold) {
    if (!(pd > 0.0 && pd < 1.0)) throw std::invalid_argument("target_from_pd_lgd: pd in (0,1)");
    if (!(lgd > 0.0 && lgd < 1.0)) throw std::invalid_argument("target_from_pd_lgd: lgd in (0,1)");
    const double el = pd * lgd;
    return {pd, threshold, threshold * (pd - el) / pd};
}

LocScaleParams fit_locscale_quantile_es(const QuantileESTarget& target, double gen_quantile,
                                        double gen_es) {
    check_alpha(target.alpha, "fit_locscale_quantile_es");
    if (!(target.t < target.q))
        throw std::invalid_argument("fit_locscale_quantile_es: requires t < q");
    if (!(gen_es < gen_quantile))
        throw std::invalid_argument(
            "fit_locscale_quantile_es: degenerate generator, requires ES_alpha(X) < q_alpha(X)");
    const double s = (target.q - target.t) / (gen_quantile - gen_es);
    const double m = target.q - s * gen_quantile;
    return {m, s};
}

LocScaleParams fit_normal_quantile_es(const QuantileESTarget& target) {
    check_alpha(target.alpha, "fit_normal_quantile_es");
    const double a = norm_inv_cdf(target.alpha);
    return fit_locscale_quantile_es(target, a, -norm_pdf(a) / target.alpha);
}

double normal_quantile(const LocScaleParams& p, double alpha) {
    check_alpha(alpha, "normal_quantile");
    return p.m + p.s * norm_inv_cdf(alpha);
}

double normal_es(const LocScaleParams& p, double alpha) {
    check_alpha(alpha, "normal_es");
    return p.m - p.s * norm_pdf(norm_inv_cdf(alpha)) / alpha;
}

double lognormal_quantile(const LocScaleParams& p, double alpha) {
    check_alpha(alpha, "lognormal_quantile");
    return std::exp(p.m + p.s * norm_inv_cdf(alpha));
}

double lognormal_es(const LocScaleParams& p, double alpha) {
    check_alpha(alpha, "lognormal_es");
    // exp-of-log form: stays finite even when e^{m + s^2/2} alone would overflow
    return std::exp(p.m + 0.5 * p.s * p.s + norm_logcdf(norm_inv_cdf(alpha) - p.s) -
                    std::log(alpha));
}

LocScaleParams fit_lognormal_quantile_es(const QuantileESTarget& target, const Tolerance& tol) {
    check_alpha(target.alpha, "fit_lognormal_quantile_es");
    if (!(target.t > 0.0))
        throw std::invalid_argument("fit_lognormal_quantile_es: requires t > 0");
    if (!(target.t < target.q))
        throw std::invalid_argument("fit_lognormal_quantile_es: requires t < q");
    const double a = norm_inv_cdf(target.alpha);
    const double b = target.alpha * target.t / target.q;
    const double log_b = std::log(b);
    // Zero of f(s) = Phi(a-s) - b exp(a s - s^2/2), searched in log form so the
    // bracket endpoints survive the far tail without underflow.
    auto g = [&](double s) { return norm_logcdf(a - s) - log_b - a * s + 0.5 * s * s; };
    const double s_hi = norm_pdf(a) / b + a;  // location of the minimum of f
    const double s_lo = 1e-12;
    Tolerance root_tol{1e-15, 1e-15, tol.max_iter};
    const double s = bracketed_root(g, s_lo, s_hi, root_tol);
    return {std::log(target.q) - s * a, s};
}

double lognormal_s_lower_bound(const QuantileESTarget& target) {
    check_alpha(target.alpha, "lognormal_s_lower_bound");
    if (!(target.t > 0.0 && target.t < target.q))
        throw std::invalid_argument("lognormal_s_lower_bound: requires 0 < t < q");
    const double a = norm_inv_cdf(target.alpha);
    double bound = 0.0;
    if (target.t < 0.5 * target.q) bound = std::max(bound, -a);
    const double disc = a * a - 2.0 * std::log(target.q / target.t);
    if (disc >= 0.0) bound = std::max(bound, a + std::sqrt(disc));
    return bound;
}

LocScaleParams mv_fit_locscale(const MeanVarTarget& target, double gen_mean, double gen_var) {
    if (!(gen_var > 0.0))
        throw std::invalid_argument("mv_fit_locscale: generator variance must be positive");
    if (!(target.variance > 0.0))
        throw std::invalid_argument("mv_fit_locscale: target variance must be positive");
    const double s = std::sqrt(target.variance / gen_var);
    return {target.mean - s * gen_mean, s};
}

LocScaleParams mv_fit_lognormal(const MeanVarTarget& target) {
    if (!(target.mean > 0.0))
        throw std::invalid_argument("mv_fit_lognormal: mean must be positive");
    if (!(target.variance > 0.0))
        throw std::invalid_argument("mv_fit_lognormal: variance must be positive");
    const double s2 = std::log1p(target.variance / (target.mean * target.mean));
    // m = log(mean) - s^2/2 so that e^{m + s^2/2} reproduces the mean exactly.
    return {std::log(target.mean) - 0.5 * s2, std::sqrt(s2)};
}

VasicekParams mv_fit_vasicek(const MeanVarTarget& target, const Tolerance& tol) {
    check_unit_interval_moments(target, "mv_fit_vasicek");
    // Moments of Y = Phi(m + sX) depend on the normalized location
    // mn = m / sqrt(1 + s^2): E[Y] = Phi(mn), E[Y^2] = Phi2(mn, mn; s^2/(1+s^2)).
    const double mn = norm_inv_cdf(target.mean);
    const double rhs = target.mean * target.mean + target.variance;
    auto f = [&](double r) { return bivariate_norm_cdf(mn, mn, r) - rhs; };
    // Phi2(mn, mn; r) increases from Phi(mn)^2 at r=0 to Phi(mn) at r=1.
    Tolerance root_tol{1e-14, 1e-14, tol.max_iter};
    const double r = bracketed_root(f, 1e-14, 1.0 - 1e-10, root_tol);
    return {mn / std::sqrt(1.0 - r), std::sqrt(r / (1.0 - r))};
}

BetaParams mv_fit_beta(const MeanVarTarget& target) {
    check_unit_interval_moments(target, "mv_fit_beta");
    const double factor = target.mean * (1.0 - target.mean) / target.variance - 1.0;
    return {target.mean * factor, (1.0 - target.mean) * factor};
}

}  // namespace covbond
