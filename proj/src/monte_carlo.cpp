#include "covbond/monte_carlo.hpp"

#include <array>
#include <cmath>

#include "covbond/two_asset.hpp"

namespace covbond {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// xoshiro256++, seeded per chunk through splitmix64 so that substreams are
// independent of thread scheduling.
struct Xoshiro256pp {
    std::array<std::uint64_t, 4> s;

    Xoshiro256pp(std::uint64_t seed, std::uint64_t chunk_index) {
        std::uint64_t sm = seed + (chunk_index + 1) * 0x9E3779B97F4A7C15ull;
        for (auto& w : s) w = splitmix64(sm);
    }

    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
        const std::uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return result;
    }

    // uniform on the open interval (0, 1)
    double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

    double normal() { return norm_inv_cdf(uniform()); }
};

constexpr int kQuantities = 7;  // i1, i2, i3, l_c, l_s, l_u, l_portfolio

struct Accum {
    double sum[kQuantities] = {};
    double sumsq[kQuantities] = {};

    void add(const double (&v)[kQuantities]) {
        for (int i = 0; i < kQuantities; ++i) {
            sum[i] += v[i];
            sumsq[i] += v[i] * v[i];
        }
    }
    void merge(const Accum& o) {
        for (int i = 0; i < kQuantities; ++i) {
            sum[i] += o.sum[i];
            sumsq[i] += o.sumsq[i];
        }
    }
};

McEstimate finalize(const Accum& acc, int idx, std::uint64_t n) {
    const double nn = static_cast<double>(n);
    const double mean = acc.sum[idx] / nn;
    double var = 0.0;
    if (n > 1) var = std::max(0.0, (acc.sumsq[idx] - acc.sum[idx] * acc.sum[idx] / nn) / (nn - 1.0));
    return {mean, std::sqrt(var / nn), n};
}

template <class DrawFn>
McLossReport run_mc(const DebtStructure& debt, const McConfig& cfg, DrawFn&& draw) {
    debt.validate();
    if (cfg.n_samples == 0) throw std::invalid_argument("McConfig: n_samples must be positive");
    const std::uint64_t chunk = std::max<std::uint64_t>(1, cfg.chunk);
    const double total = debt.total();

    Accum global;
    std::uint64_t done = 0;
    for (std::uint64_t ci = 0; done < cfg.n_samples; ++ci) {
        const std::uint64_t m = std::min<std::uint64_t>(chunk, cfg.n_samples - done);
        Xoshiro256pp rng(cfg.seed, ci);
        Accum acc;
        for (std::uint64_t i = 0; i < m; ++i) {
            const auto [x, y] = draw(rng);
            const WaterfallLosses wl = waterfall_losses(x, y, debt);
            const double z = x + y;
            double v[kQuantities] = {};
            if (z < total) {
                if (z >= debt.c + debt.s) {
                    v[0] = 1.0;
                } else if (x >= debt.c) {
                    v[1] = 1.0;
                } else {
                    v[2] = 1.0;
                }
            }
            v[3] = wl.covered;
            v[4] = wl.senior;
            v[5] = wl.junior;
            v[6] = (debt.c * wl.covered + debt.s * wl.senior + debt.u * wl.junior) / total;
            acc.add(v);
        }
        global.merge(acc);
        done += m;
    }

    McLossReport rep;
    rep.p_event1 = finalize(global, 0, cfg.n_samples);
    rep.p_event2 = finalize(global, 1, cfg.n_samples);
    rep.p_event3 = finalize(global, 2, cfg.n_samples);
    if (debt.c > 0.0) rep.el_covered = finalize(global, 3, cfg.n_samples);
    rep.el_senior = finalize(global, 4, cfg.n_samples);
    rep.el_junior = finalize(global, 5, cfg.n_samples);
    rep.el_portfolio = finalize(global, 6, cfg.n_samples);
    return rep;
}

}  // namespace

LossReport McLossReport::means() const {
    LossReport rep;
    rep.p_event1 = p_event1.mean;
    rep.p_event2 = p_event2.mean;
    rep.p_event3 = p_event3.mean;
    if (el_covered) rep.el_covered = el_covered->mean;
    rep.el_senior = el_senior.mean;
    rep.el_junior = el_junior.mean;
    rep.el_portfolio = el_portfolio.mean;
    return rep;
}

McLossReport mc_loss_report(const TwoAssetParams& params, const DebtStructure& debt,
                            const McConfig& cfg) {
    params.validate();
    if (params.rho >= kComonotonicRho) {
        // comonotonic draws share a single normal
        return run_mc(debt, cfg, [&](Xoshiro256pp& rng) {
            const double z = rng.normal();
            return std::pair<double, double>{std::exp(params.mu + params.sigma * z),
                                             std::exp(params.nu + params.tau * z)};
        });
    }
    const double rho_c = std::sqrt((1.0 - params.rho) * (1.0 + params.rho));
    return run_mc(debt, cfg, [&](Xoshiro256pp& rng) {
        const double z1 = rng.normal();
        const double z2 = rng.normal();
        const double eta = params.rho * z1 + rho_c * z2;
        return std::pair<double, double>{std::exp(params.mu + params.sigma * z1),
                                         std::exp(params.nu + params.tau * eta)};
    });
}

McLossReport mc_one_asset(const OneAssetParams& params, const DebtStructure& debt,
                          const McConfig& cfg) {
    params.validate();
    return run_mc(debt, cfg, [&](Xoshiro256pp& rng) {
        const double a = std::exp(params.kappa + params.psi * rng.normal());
        return std::pair<double, double>{params.epsilon * a, (1.0 - params.epsilon) * a};
    });
}

}  // namespace covbond
