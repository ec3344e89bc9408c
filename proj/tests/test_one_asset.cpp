#include <doctest.h>

#include <cmath>

#include "covbond/one_asset.hpp"

using namespace covbond;

namespace {

constexpr double kTablePP = 2e-5;  // +-0.002 percentage points, as fraction

const RiskInputs kIssuer{0.01, 0.45};

// closed-form shortfall below (1+v)c, written out independently of the solver
double shortfall_oracle(double theta, double psi, double threshold) {
    const double d = (std::log(threshold) - theta) / psi;
    return threshold * norm_cdf(d) - std::exp(theta + 0.5 * psi * psi) * norm_cdf(d - psi);
}

}  // namespace

TEST_CASE("calibrate_issuer_one threshold identity and scaling") {
    const DebtStructure debt{0.3, 0.6, 0.1, 0.2};
    const auto p = calibrate_issuer_one(debt, kIssuer);
    CHECK(std::exp(p.m + p.s * norm_inv_cdf(0.01)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lognormal_es(p, 0.01) == doctest::Approx(1.0 * (1.0 - 0.45)).epsilon(1e-10));

    // scaling all debt by lambda shifts kappa by log(lambda)
    const DebtStructure scaled{0.6, 1.2, 0.2, 0.2};
    const auto ps = calibrate_issuer_one(scaled, kIssuer);
    CHECK(ps.m == doctest::Approx(p.m + std::log(2.0)).epsilon(1e-10));
    CHECK(ps.s == doctest::Approx(p.s).epsilon(1e-10));

    // identical to the plain lognormal fit at q = c+s+u
    const auto direct = fit_lognormal_quantile_es(target_from_pd_lgd(0.01, 0.45, 1.0));
    CHECK(p.m == doctest::Approx(direct.m).epsilon(1e-14));
    CHECK(p.s == doctest::Approx(direct.s).epsilon(1e-14));
}

TEST_CASE("adjust_encumbrance homogeneous case gives (1+v)c / total") {
    const DebtStructure debt{0.3, 0.6, 0.1, 0.2};
    const auto fit = calibrate_issuer_one(debt, kIssuer);
    const auto adj = adjust_encumbrance(fit.m, fit.s, debt.c, debt.v, kIssuer.el());
    CHECK(adj.epsilon == doctest::Approx(0.36).epsilon(1e-12));
    CHECK_FALSE(adj.capped);
    // solver residual against the independent closed form
    CHECK(std::fabs(shortfall_oracle(adj.theta, fit.s, 0.36) - 0.36 * kIssuer.el()) <
          1e-12 * 0.36);
}

TEST_CASE("adjust_encumbrance is monotone in the target and caps at 1") {
    const DebtStructure debt{0.3, 0.6, 0.1, 0.2};
    const auto fit = calibrate_issuer_one(debt, kIssuer);
    // a safer cover pool target needs a larger encumbered share
    double prev = std::numeric_limits<double>::infinity();
    for (double el : {0.001, 0.0045, 0.02, 0.1}) {
        const auto adj = adjust_encumbrance(fit.m, fit.s, debt.c, debt.v, el);
        CHECK(adj.epsilon_raw < prev);
        prev = adj.epsilon_raw;
    }

    // a much safer cover pool than the issuer forces the cap
    const auto risky_fit = calibrate_issuer_one(debt, RiskInputs{0.05, 0.9});
    const auto capped = adjust_encumbrance(risky_fit.m, risky_fit.s, debt.c, debt.v, 0.0005);
    CHECK(capped.capped);
    CHECK(capped.epsilon == 1.0);
    CHECK(capped.epsilon_raw > 1.0);
}

TEST_CASE("min_matchable_el is the epsilon = 1 fixed point") {
    const DebtStructure debt{0.3, 0.6, 0.1, 0.2};
    const auto fit = calibrate_issuer_one(debt, RiskInputs{0.05, 0.9});
    const double el_min = min_matchable_el(fit.m, fit.s, debt.c, debt.v);
    CHECK(el_min > 0.0);
    const auto at = adjust_encumbrance(fit.m, fit.s, debt.c, debt.v, el_min);
    CHECK(at.epsilon_raw == doctest::Approx(1.0).epsilon(1e-9));
    const auto below = adjust_encumbrance(fit.m, fit.s, debt.c, debt.v, el_min * (1.0 - 1e-6));
    CHECK(below.capped);

    // degenerate volatility with (1+v)c below e^kappa: nothing to match
    CHECK(min_matchable_el(std::log(1.0), 1e-8, 0.3, 0.2) < 1e-12);

    // increasing psi increases the floor (threshold near the money)
    double prev = 0.0;
    for (double psi : {0.5, 1.0, 2.0, 3.0}) {
        const double m = min_matchable_el(0.0, psi, debt.c, debt.v);
        CHECK(m > prev);
        prev = m;
    }
}

TEST_CASE("expected_losses_one reproduces the encumbrance study") {
    const double el_cover = 0.0045;
    auto run = [&](double c) {
        const DebtStructure debt{c, 0.9 - c, 0.1, 0.2};
        const auto fit = calibrate_issuer_one(debt, kIssuer);
        OneAssetParams p{fit.m, fit.s, 0.0};
        if (c > 0.0)
            p.epsilon = adjust_encumbrance(fit.m, fit.s, c, debt.v, el_cover).epsilon;
        return expected_losses_one(p, debt);
    };

    const auto at03 = run(0.3);
    CHECK(std::fabs(*at03.el_covered - 0.00257) < kTablePP);
    CHECK(std::fabs(at03.el_senior - 0.00465) < kTablePP);
    CHECK(std::fabs(at03.el_junior - 0.00943) < kTablePP);

    const auto at0 = run(0.0);
    CHECK_FALSE(at0.el_covered.has_value());
    CHECK(std::fabs(at0.el_senior - 0.00395) < kTablePP);
    CHECK(std::fabs(at0.el_junior - 0.00943) < kTablePP);

    const auto at08 = run(0.8);
    CHECK(std::fabs(at08.el_senior - 0.00777) < kTablePP);

    // junior EL does not depend on the covered/senior split
    // and the portfolio EL stays at the issuer EL
    double prev_cov = 0.0, prev_sen = 0.0;
    for (double c : {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8}) {
        const auto rep = run(c);
        CHECK(std::fabs(rep.el_junior - at0.el_junior) < 1e-10);
        CHECK(rep.el_portfolio == doctest::Approx(kIssuer.el()).epsilon(1e-8));
        CHECK(rep.el_senior >= prev_sen);
        prev_sen = rep.el_senior;
        if (rep.el_covered) {
            CHECK(*rep.el_covered >= prev_cov);
            prev_cov = *rep.el_covered;
        }
    }
}

TEST_CASE("expected_losses_one with full encumbrance") {
    const DebtStructure debt{0.3, 0.6, 0.1, 0.2};
    const auto fit = calibrate_issuer_one(debt, kIssuer);
    const OneAssetParams p{fit.m, fit.s, 1.0};
    const auto rep = expected_losses_one(p, debt);
    // with epsilon = 1 the cover claim threshold c/eps equals c
    CHECK(rep.p_event3 == doctest::Approx(norm_cdf((std::log(0.3) - fit.m) / fit.s)).epsilon(1e-12));
    CHECK(*rep.el_covered <= rep.el_senior);
    CHECK(rep.el_senior <= rep.el_junior);
    CHECK(rep.el_portfolio == doctest::Approx(kIssuer.el()).epsilon(1e-8));
}

TEST_CASE("two_asset_to_one_asset bridge") {
    CHECK(two_asset_to_one_asset({0.2, 0.7, 0.2, 0.7, 1.0}).epsilon ==
          doctest::Approx(0.5).epsilon(1e-14));

    CHECK_THROWS_AS((void)two_asset_to_one_asset({0.2, 0.7, 0.2, 0.8, 1.0}), NotEquivalentError);
    CHECK_THROWS_AS((void)two_asset_to_one_asset({0.2, 0.7, 0.2, 0.7, 0.9}), NotEquivalentError);

    // homogeneous margins-calibrated comonotonic model maps to epsilon = 36%
    const DebtStructure debt{0.3, 0.6, 0.1, 0.2};
    const RiskInputs pool{0.01, 0.45};
    const auto two = margins_calibrate(debt, pool, pool, 1.0);
    const auto one = two_asset_to_one_asset(two);
    CHECK(one.epsilon == doctest::Approx(0.36).epsilon(1e-10));
    CHECK(one.psi == doctest::Approx(two.sigma).epsilon(1e-14));

    const auto rep2 = expected_losses(two, debt);
    const auto rep1 = expected_losses_one(one, debt);
    CHECK(*rep1.el_covered == doctest::Approx(*rep2.el_covered).epsilon(1e-9));
    CHECK(rep1.el_senior == doctest::Approx(rep2.el_senior).epsilon(1e-9));
    CHECK(rep1.el_junior == doctest::Approx(rep2.el_junior).epsilon(1e-9));
}

TEST_CASE("encumbrance_from_balance") {
    CHECK(encumbrance_from_balance(0.3, 0.2, 1.2) == doctest::Approx(0.30).epsilon(1e-14));
    CHECK(encumbrance_from_balance(0.3, 0.2, 1.0) == doctest::Approx(0.36).epsilon(1e-14));
    CHECK_THROWS_AS((void)encumbrance_from_balance(0.9, 0.2, 1.0), std::invalid_argument);
    CHECK_THROWS_AS((void)encumbrance_from_balance(0.3, 0.2, 0.0), std::invalid_argument);
}
