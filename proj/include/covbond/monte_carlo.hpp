#pragma once

#include <cstdint>

#include "covbond/model_types.hpp"
#include "covbond/numerics.hpp"

namespace covbond {

/// Monte-Carlo run configuration. Sampling is chunked; every chunk draws from
/// its own substream derived from (seed, chunk index), so results are
/// bit-identical regardless of how chunks are scheduled.
struct McConfig {
    std::uint64_t n_samples = 10'000'000;
    std::uint64_t seed = 0;
    std::uint64_t chunk = 1'000'000;
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t n = 0;
};

/// Sample estimates of the loss-event probabilities and expected loss rates,
/// each with its standard error. el_covered is absent when c = 0.
struct McLossReport {
    McEstimate p_event1;
    McEstimate p_event2;
    McEstimate p_event3;
    std::optional<McEstimate> el_covered;
    McEstimate el_senior;
    McEstimate el_junior;
    McEstimate el_portfolio;

    /// Point estimates as a LossReport.
    LossReport means() const;
};

/// Simulate the bivariate lognormal model and push every draw through the
/// loss waterfall. Estimates are plain sample means of exact per-draw losses.
McLossReport mc_loss_report(const TwoAssetParams& params, const DebtStructure& debt,
                            const McConfig& cfg);

/// Same for the one-asset model with cover pool epsilon A.
McLossReport mc_one_asset(const OneAssetParams& params, const DebtStructure& debt,
                          const McConfig& cfg);

}  // namespace covbond
