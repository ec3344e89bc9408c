#pragma once

#include "covbond/numerics.hpp"

namespace covbond {

/// Thrown when a fitting or calibration target lies outside the feasible set.
/// The message names the violated constraint.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Target pair for quantile / expected-shortfall matching: the alpha-quantile q
/// and the expected shortfall t = ES_alpha, with t < q. In PD/LGD terms q is
/// the default threshold and t the threshold times the recovery rate.
struct QuantileESTarget {
    double alpha;
    double q;
    double t;
};

/// Location / scale pair (m, s), s > 0. Also used for the lognormal family
/// exp(m + s X) with X standard normal.
struct LocScaleParams {
    double m;
    double s;
};

/// Target mean and variance for moment matching.
struct MeanVarTarget {
    double mean;
    double variance;
};

struct BetaParams {
    double a;
    double b;
};

/// Parameters of the law Phi(m + s X), X standard normal.
struct VasicekParams {
    double m;
    double s;
};

/// Map (PD, LGD, threshold D) to the equivalent quantile/ES target:
/// q = D and t = D (PD - EL) / PD with EL = PD * LGD.
QuantileESTarget target_from_pd_lgd(double pd, double lgd, double threshold);

/// Solve m + s q_alpha(X) = q, m + s ES_alpha(X) = t for a generating variable
/// with the given quantile and expected shortfall.
LocScaleParams fit_locscale_quantile_es(const QuantileESTarget& target, double gen_quantile,
                                        double gen_es);

/// Closed-form fit for the normal family (standard normal generator).
LocScaleParams fit_normal_quantile_es(const QuantileESTarget& target);

double normal_quantile(const LocScaleParams& p, double alpha);
double normal_es(const LocScaleParams& p, double alpha);

/// alpha-quantile of exp(m + s X): e^{m + s Phi^{-1}(alpha)}.
double lognormal_quantile(const LocScaleParams& p, double alpha);

/// ES_alpha of exp(m + s X): alpha^{-1} e^{m + s^2/2} Phi(Phi^{-1}(alpha) - s).
double lognormal_es(const LocScaleParams& p, double alpha);

/// Fit the lognormal family to (alpha, q, t) with 0 < t < q. The scale s is the
/// unique zero of f(s) = Phi(a - s) - b e^{a s - s^2/2} with a = Phi^{-1}(alpha)
/// and b = alpha t / q; it lies in (0, phi(a)/b + a). m = log q - s a.
LocScaleParams fit_lognormal_quantile_es(const QuantileESTarget& target,
                                         const Tolerance& tol = {});

/// Greatest applicable a-priori lower bound on the fitted lognormal scale
/// (0 when no bound applies): -Phi^{-1}(alpha) when t < q/2 (threshold below
/// the mode), and Phi^{-1}(alpha) + sqrt(Phi^{-1}(alpha)^2 - 2 log(q/t)) when
/// the discriminant is nonnegative.
double lognormal_s_lower_bound(const QuantileESTarget& target);

/// Mean/variance matching within a location-scale family with generating
/// moments (gen_mean, gen_var).
LocScaleParams mv_fit_locscale(const MeanVarTarget& target, double gen_mean, double gen_var);

/// Mean/variance matching for the lognormal family:
/// s = sqrt(log(var/mean^2 + 1)), m = log(mean) - s^2/2.
LocScaleParams mv_fit_lognormal(const MeanVarTarget& target);

/// Mean/variance matching for Y = Phi(m + s X). The moments are driven by the
/// normalized location mn = m/sqrt(1+s^2) and r = s^2/(1+s^2):
/// E[Y] = Phi(mn), var[Y] = Phi2(mn, mn; r) - Phi(mn)^2. Solves for the unique
/// r in (0,1), then s = sqrt(r/(1-r)) and m = mn sqrt(1+s^2).
VasicekParams mv_fit_vasicek(const MeanVarTarget& target, const Tolerance& tol = {});

/// Closed-form Beta moment matching.
BetaParams mv_fit_beta(const MeanVarTarget& target);

}  // namespace covbond
