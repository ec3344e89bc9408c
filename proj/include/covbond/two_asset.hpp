#pragma once

#include "covbond/distfit.hpp"
#include "covbond/model_types.hpp"
#include "covbond/numerics.hpp"

namespace covbond {

/// Thrown by two_asset_to_one_asset when the parameters do not describe a
/// comonotonic pair with equal scales.
class NotEquivalentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Correlations at least this close to 1 are routed to the comonotonic
/// closed/semi-closed forms (the rho < 1 integrands blow up as 1/sqrt(1-rho^2)).
inline constexpr double kComonotonicRho = 1.0 - 1e-9;

struct EventProbs {
    double event1;
    double event2;
    double event3;
};

/// Loss rates of the three creditor classes for realised asset values (x, y):
/// junior absorbs first, residual cover pool proceeds go to senior unsecured,
/// and covered bonds fall back on the pool plus a pari passu deficiency claim.
WaterfallLosses waterfall_losses(double x, double y, const DebtStructure& debt);

EventProbs loss_event_probs(const TwoAssetParams& params, const DebtStructure& debt,
                            const Tolerance& tol = {});

LossReport expected_losses(const TwoAssetParams& params, const DebtStructure& debt,
                           const Tolerance& tol = {});

/// Fit (mu, sigma) of the cover pool so that the pool value falls below
/// (1+v) c with probability cover.pd and the expected shortfall matches the
/// pool expected loss cover.el().
LocScaleParams calibrate_cover_pool(double covered_face, double oc_level,
                                    const RiskInputs& cover, const Tolerance& tol = {});

/// Feasible issuer (PD, LGD) region of the comonotonic calibration for a fixed
/// cover pool (mu, sigma) and total debt d_issuer.
FeasibilityBounds feasibility_bounds(double mu, double sigma, double d_issuer, double p_issuer);

/// Solve the comonotonic issuer equations for (nu, tau). Throws
/// InfeasibleError, naming the violated bound, when the target lies outside
/// feasibility_bounds.
LocScaleParams calibrate_issuer_comonotonic(double mu, double sigma, double d_issuer,
                                            const RiskInputs& issuer, const Tolerance& tol = {});

/// Solve the rho < 1 issuer equations (two coupled integral equations) for
/// (nu, tau) by a damped Newton iteration on (nu, log tau). Relative residuals
/// of both equations are driven below 1e-8; throws NoConvergenceError with the
/// best residuals otherwise. rho >= 1 - 1e-9 falls through to the comonotonic
/// solver.
LocScaleParams calibrate_issuer_copula(double mu, double sigma, double rho, double d_issuer,
                                       const RiskInputs& issuer, const Tolerance& tol = {});

/// Margins calibration: cover pool fitted to (cover.pd, cover.el) at threshold
/// (1+v) c, remaining assets to (other.pd, other.el) at threshold s + u - v c.
TwoAssetParams margins_calibrate(const DebtStructure& debt, const RiskInputs& cover,
                                 const RiskInputs& other, double rho, const Tolerance& tol = {});

/// Jointly normal (not lognormal) toy calibration; closed form.
/// psi is the implied standard deviation of the issuer's total asset value and
/// the model exists iff psi > sigma.
struct NormalToyParams {
    double mu;
    double sigma;
    double nu;
    double tau;
    double psi;
    bool nu_nonpositive;  // nu <= 0 is solvable but economically dubious
};

NormalToyParams calibrate_normal_toy(double covered_face, double oc_level, const RiskInputs& cover,
                                     double d_issuer, const RiskInputs& issuer, double rho);

}  // namespace covbond
