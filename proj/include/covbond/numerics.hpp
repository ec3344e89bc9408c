#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace covbond {

/// Thrown when a root finder is called without a sign change on the bracket.
class NoBracketError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when an iterative scheme exhausts its iteration budget.
class NoConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Accuracy request shared by root finders and quadrature.
/// abs_tol + rel_tol must be positive.
struct Tolerance {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    int max_iter = 200;

    void validate() const {
        if (!(abs_tol >= 0.0 && rel_tol >= 0.0 && abs_tol + rel_tol > 0.0))
            throw std::invalid_argument("Tolerance: requires abs_tol + rel_tol > 0");
        if (max_iter < 1) throw std::invalid_argument("Tolerance: requires max_iter >= 1");
    }
};

/// Integration interval; lower/upper may be -/+infinity.
struct Interval {
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
};

/// Standard normal density.
inline double norm_pdf(double x) {
    constexpr double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

/// Standard normal distribution function, accurate over the full double range.
inline double norm_cdf(double x) {
    constexpr double inv_sqrt_2 = 0.7071067811865475244;
    return 0.5 * std::erfc(-x * inv_sqrt_2);
}

double norm_logcdf(double x);
double norm_inv_cdf(double p);
double bivariate_norm_cdf(double a, double b, double r);

/// Unique x with a = e^{mu + sigma x} + e^{nu + tau x}; the right-hand side is
/// strictly increasing and onto (0, inf).
double solve_threshold_x(double a, double mu, double sigma, double nu, double tau,
                         const Tolerance& tol = {});

/// Brent's method on [lo, hi]; f(lo) and f(hi) must differ in sign
/// (or one of them be zero).
template <class F>
double bracketed_root(F&& f, double lo, double hi, const Tolerance& tol = {}) {
    tol.validate();
    if (!(lo < hi)) throw std::invalid_argument("bracketed_root: requires lo < hi");
    double a = lo, b = hi;
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0))
        throw NoBracketError("bracketed_root: f(lo) and f(hi) have the same sign");

    double c = a, fc = fa;
    double d = b - a, e = d;
    for (int iter = 0; iter < tol.max_iter; ++iter) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if (std::fabs(fc) < std::fabs(fb)) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        const double xtol = 2.0 * std::numeric_limits<double>::epsilon() * std::fabs(b) +
                            0.5 * (tol.abs_tol + tol.rel_tol * std::fabs(b));
        const double xm = 0.5 * (c - b);
        if (std::fabs(xm) <= xtol || fb == 0.0) return b;
        if (std::fabs(e) >= xtol && std::fabs(fa) > std::fabs(fb)) {
            // inverse quadratic interpolation, falling back to secant
            double p, q;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                const double qq = fa / fc;
                const double r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::fabs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::fabs(xtol * q), std::fabs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::fabs(d) > xtol) ? d : (xm > 0.0 ? xtol : -xtol);
        fb = f(b);
    }
    throw NoConvergenceError("bracketed_root: no convergence within max_iter");
}

namespace detail {

// Gauss-Kronrod 7/15 pair on [-1,1] (QUADPACK dqk15 constants).
inline constexpr double kGk15Nodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
inline constexpr double kGk15WeightsK[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double kGk15WeightsG[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct QuadSegment {
    double a, b, value, error;
};

template <class H>
QuadSegment gk15(H&& h, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = h(center);
    double resk = kGk15WeightsK[7] * fc;
    double resg = kGk15WeightsG[3] * fc;
    double resabs = std::fabs(resk);
    double fv[7][2];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kGk15Nodes[j];
        fv[j][0] = h(center - dx);
        fv[j][1] = h(center + dx);
        const double fsum = fv[j][0] + fv[j][1];
        resk += kGk15WeightsK[j] * fsum;
        if (j % 2 == 1) resg += kGk15WeightsG[j / 2] * fsum;
        resabs += kGk15WeightsK[j] * (std::fabs(fv[j][0]) + std::fabs(fv[j][1]));
    }
    const double mean = 0.5 * resk;
    double resasc = kGk15WeightsK[7] * std::fabs(fc - mean);
    for (int j = 0; j < 7; ++j)
        resasc += kGk15WeightsK[j] * (std::fabs(fv[j][0] - mean) + std::fabs(fv[j][1] - mean));
    resasc *= std::fabs(half);
    resabs *= std::fabs(half);
    double err = std::fabs((resk - resg) * half);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    const double eps50 = 50.0 * std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / eps50)
        err = std::max(err, eps50 * resabs);
    return {a, b, resk * half, err};
}

}  // namespace detail

/// Integral of phi(x) * g(x) over the interval. Infinite limits are truncated
/// at |x| = 8.5 (normal mass beyond is < 1e-17), then the bounded image under
/// u = Phi(x) is integrated with globally adaptive Gauss-Kronrod 7/15.
/// Endpoints are never evaluated, so integrands may be singular there.
template <class G>
double gaussian_weighted_integral(G&& g, const Interval& iv, const Tolerance& tol = {}) {
    tol.validate();
    if (!(iv.lower < iv.upper))
        throw std::invalid_argument("gaussian_weighted_integral: requires lower < upper");
    constexpr double cutoff = 8.5;
    const double lo = std::max(iv.lower, -cutoff);
    const double hi = std::min(iv.upper, cutoff);
    if (!(lo < hi)) return 0.0;  // interval lies entirely in a negligible tail

    const double u0 = norm_cdf(lo);
    const double u1 = norm_cdf(hi);
    auto h = [&g](double u) { return g(norm_inv_cdf(u)); };

    std::vector<detail::QuadSegment> segs;
    segs.reserve(64);
    segs.push_back(detail::gk15(h, u0, u1));
    for (int iter = 0; iter < tol.max_iter; ++iter) {
        double total = 0.0, err = 0.0;
        for (const auto& s : segs) {
            total += s.value;
            err += s.error;
        }
        if (err <= std::max(tol.abs_tol, tol.rel_tol * std::fabs(total))) return total;
        std::size_t worst = 0;
        for (std::size_t i = 1; i < segs.size(); ++i)
            if (segs[i].error > segs[worst].error) worst = i;
        const detail::QuadSegment s = segs[worst];
        const double mid = 0.5 * (s.a + s.b);
        if (!(s.a < mid && mid < s.b))
            throw NoConvergenceError("gaussian_weighted_integral: refinement stalled");
        segs[worst] = detail::gk15(h, s.a, mid);
        segs.push_back(detail::gk15(h, mid, s.b));
    }
    throw NoConvergenceError("gaussian_weighted_integral: no convergence within max_iter");
}

}  // namespace covbond
