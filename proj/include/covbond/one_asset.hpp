#pragma once

#include "covbond/distfit.hpp"
#include "covbond/model_types.hpp"
#include "covbond/two_asset.hpp"

namespace covbond {

/// Result of solving the encumbrance adjustment: theta = kappa + log(epsilon)
/// matches the cover pool expected loss; epsilon_raw = e^{theta - kappa} may
/// exceed 1, in which case epsilon is capped at 1.
struct AdjustmentResult {
    double theta;
    double epsilon_raw;
    double epsilon;
    bool capped;
};

/// Fit (kappa, psi) of the total asset value to the issuer PD and expected
/// loss at threshold c + s + u. Identical to the lognormal quantile/ES fit.
LocScaleParams calibrate_issuer_one(const DebtStructure& debt, const RiskInputs& issuer,
                                    const Tolerance& tol = {});

/// Solve f(theta) = (1+v) c el_cover for the unique theta, where f is the
/// expected shortfall of e^{theta + psi xi} below (1+v) c. f is strictly
/// decreasing with limits (1+v) c and 0.
AdjustmentResult adjust_encumbrance(double kappa, double psi, double covered_face, double oc_level,
                                    double el_cover, const Tolerance& tol = {});

/// Smallest cover pool expected loss the adjustment can match (at epsilon = 1).
double min_matchable_el(double kappa, double psi, double covered_face, double oc_level);

/// Expected losses of the one-asset model with cover pool epsilon A and
/// remaining assets (1 - epsilon) A.
LossReport expected_losses_one(const OneAssetParams& params, const DebtStructure& debt,
                               const Tolerance& tol = {});

/// Bridge from a comonotonic two-asset model with equal scales:
/// psi = sigma, kappa = log(e^mu + e^nu), epsilon = e^mu / (e^mu + e^nu).
/// Throws NotEquivalentError unless rho = 1 and sigma = tau (within 1e-12).
OneAssetParams two_asset_to_one_asset(const TwoAssetParams& params);

/// Encumbrance ratio from today's balance sheet: (1+v) c / a0.
double encumbrance_from_balance(double covered_face, double oc_level, double a0);

}  // namespace covbond
