#pragma once

#include <optional>
#include <stdexcept>

namespace covbond {

/// Debt stack of the bond issuer: face values of covered bonds (c), senior
/// unsecured (s) and junior unsecured (u) debt, plus the over-collateralisation
/// level v of the cover pool (v = 0.2 means collateral worth 120% of c).
struct DebtStructure {
    double c = 0.0;
    double s = 0.0;
    double u = 0.0;
    double v = 0.0;

    double total() const { return c + s + u; }

    void validate() const {
        if (c < 0.0 || s < 0.0 || u < 0.0 || v < 0.0)
            throw std::invalid_argument("DebtStructure: face values and v must be nonnegative");
        if (!(total() > 0.0)) throw std::invalid_argument("DebtStructure: total debt must be positive");
    }
};

/// Probability of loss and loss-given-default of a pool or issuer;
/// expected loss is pd * lgd.
struct RiskInputs {
    double pd = 0.0;
    double lgd = 0.0;

    double el() const { return pd * lgd; }

    void validate() const {
        if (!(pd > 0.0 && pd < 1.0)) throw std::invalid_argument("RiskInputs: pd must lie in (0,1)");
        if (!(lgd > 0.0 && lgd < 1.0))
            throw std::invalid_argument("RiskInputs: lgd must lie in (0,1)");
    }
};

inline RiskInputs risk_from_pd_lgd(double pd, double lgd) { return {pd, lgd}; }
inline RiskInputs risk_from_el_lgd(double el, double lgd) { return {el / lgd, lgd}; }
inline RiskInputs risk_from_pd_el(double pd, double el) { return {pd, el / pd}; }

/// Bivariate lognormal asset model: cover pool X = exp(mu + sigma xi), other
/// assets Y = exp(nu + tau eta), (xi, eta) standard normal with correlation rho.
struct TwoAssetParams {
    double mu;
    double sigma;
    double nu;
    double tau;
    double rho;

    void validate() const {
        if (!(sigma > 0.0 && tau > 0.0))
            throw std::invalid_argument("TwoAssetParams: sigma and tau must be positive");
        if (!(rho >= 0.0 && rho <= 1.0))
            throw std::invalid_argument("TwoAssetParams: rho must lie in [0, 1]");
    }
};

/// Single lognormal asset model A = exp(kappa + psi xi) with an encumbrance
/// ratio epsilon: the cover pool is epsilon A, the remaining assets (1-epsilon) A.
struct OneAssetParams {
    double kappa;
    double psi;
    double epsilon;

    void validate() const {
        if (!(psi > 0.0)) throw std::invalid_argument("OneAssetParams: psi must be positive");
        if (!(epsilon >= 0.0 && epsilon <= 1.0))
            throw std::invalid_argument("OneAssetParams: epsilon must lie in [0, 1]");
    }
};

/// Loss-event probabilities and expected loss rates per unit of exposure.
/// el_covered is absent when there are no covered bonds (c = 0).
struct LossReport {
    double p_event1 = 0.0;  // issuer defaults, assets cover all senior debt
    double p_event2 = 0.0;  // assets short of senior debt, cover pool sufficient
    double p_event3 = 0.0;  // assets short of senior debt, cover pool insufficient
    std::optional<double> el_covered;
    double el_senior = 0.0;
    double el_junior = 0.0;
    double el_portfolio = 0.0;

    double issuer_pd() const { return p_event1 + p_event2 + p_event3; }
};

/// Loss rates of one realised scenario (x, y) of cover pool and other assets.
struct WaterfallLosses {
    double covered;
    double senior;
    double junior;
};

/// Existence region of the comonotonic issuer calibration: the issuer PD must
/// stay below pd_upper and, given that, the LGD inside (lgd_lower, lgd_upper).
struct FeasibilityBounds {
    double pd;  // issuer PD the LGD interval refers to
    double pd_upper;
    double lgd_lower;
    double lgd_upper;

    bool pd_feasible() const { return pd > 0.0 && pd < pd_upper; }
    bool contains(double lgd) const {
        return pd_feasible() && lgd > lgd_lower && lgd < lgd_upper;
    }
};

}  // namespace covbond
