#include "covbond/numerics.hpp"

namespace covbond {

namespace {

constexpr double kSqrt2Pi = 2.5066282746310005024;

// Acklam's rational approximation for the normal quantile, max relative
// error ~1.15e-9 before refinement.
double inv_cdf_acklam(double p) {
    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

}  // namespace

double norm_inv_cdf(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("norm_inv_cdf: p must lie strictly in (0, 1)");
    double x = inv_cdf_acklam(p);
    // One Halley step brings the result to full double precision.
    const double e = norm_cdf(x) - p;
    const double u = e * kSqrt2Pi * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

double norm_logcdf(double x) {
    if (x > -37.0) return std::log(norm_cdf(x));
    // Asymptotic expansion of Mills' ratio for the far left tail.
    const double z = -x;
    const double zi = 1.0 / (z * z);
    const double series = 1.0 + zi * (-1.0 + zi * (3.0 + zi * (-15.0 + zi * 105.0)));
    return -0.5 * z * z - std::log(z * kSqrt2Pi) + std::log(series);
}

namespace {

// Gauss-Legendre half-rules used by the Genz bivariate normal algorithm.
constexpr double kBvnX[3][10] = {
    {-0.9324695142031521, -0.6612093864662645, -0.2386191860831969, 0, 0, 0, 0, 0, 0, 0},
    {-0.9815606342467192, -0.9041172563704749, -0.7699026741943047, -0.5873179542866175,
     -0.3678314989981802, -0.1252334085114689, 0, 0, 0, 0},
    {-0.9931285991850949, -0.9639719272779138, -0.9122344282513259, -0.8391169718222188,
     -0.7463319064601508, -0.6360536807265150, -0.5108670019508271, -0.3737060887154196,
     -0.2277858511416451, -0.0765265211334973}};
constexpr double kBvnW[3][10] = {
    {0.1713244923791704, 0.3607615730481386, 0.4679139345726910, 0, 0, 0, 0, 0, 0, 0},
    {0.04717533638651183, 0.1069393259953184, 0.1600783285433462, 0.2031674267230659,
     0.2334925365383548, 0.2491470458134028, 0, 0, 0, 0},
    {0.01761400713915212, 0.04060142980038694, 0.06267204833410906, 0.08327674157670475,
     0.1019301198172404, 0.1181945319615184, 0.1316886384491766, 0.1420961093183821,
     0.1491729864726037, 0.1527533871307259}};

// P[X > dh, Y > dk] for standard bivariate normal with correlation r.
// Genz (2004) hybrid of Drezner-Wesolowsky and a tail transformation;
// absolute accuracy is of the order 5e-16.
double bvnu(double dh, double dk, double r) {
    const double twopi = 6.283185307179586477;
    int ng, lg;
    if (std::fabs(r) < 0.3) {
        ng = 0;
        lg = 3;
    } else if (std::fabs(r) < 0.75) {
        ng = 1;
        lg = 6;
    } else {
        ng = 2;
        lg = 10;
    }
    double h = dh;
    double k = dk;
    double hk = h * k;
    double bvn = 0.0;
    if (std::fabs(r) < 0.925) {
        if (std::fabs(r) > 0.0) {
            const double hs = 0.5 * (h * h + k * k);
            const double asr = std::asin(r);
            for (int i = 0; i < lg; ++i) {
                for (int is = -1; is <= 1; is += 2) {
                    const double sn = std::sin(0.5 * asr * (is * kBvnX[ng][i] + 1.0));
                    bvn += kBvnW[ng][i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
                }
            }
            bvn *= asr / (2.0 * twopi);
        }
        bvn += norm_cdf(-h) * norm_cdf(-k);
    } else {
        if (r < 0.0) {
            k = -k;
            hk = -hk;
        }
        if (std::fabs(r) < 1.0) {
            const double as = (1.0 - r) * (1.0 + r);
            double a = std::sqrt(as);
            const double bs = (h - k) * (h - k);
            const double c = (4.0 - hk) / 8.0;
            const double d = (12.0 - hk) / 16.0;
            double asr = -0.5 * (bs / as + hk);
            if (asr > -100.0)
                bvn = a * std::exp(asr) *
                      (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
            if (-hk < 100.0) {
                const double b = std::sqrt(bs);
                bvn -= std::exp(-0.5 * hk) * kSqrt2Pi * norm_cdf(-b / a) * b *
                       (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
            }
            a *= 0.5;
            for (int i = 0; i < lg; ++i) {
                for (int is = -1; is <= 1; is += 2) {
                    const double x = a * (is * kBvnX[ng][i] + 1.0);
                    const double xs = x * x;
                    const double rs = std::sqrt(1.0 - xs);
                    asr = -0.5 * (bs / xs + hk);
                    if (asr > -100.0) {
                        bvn += a * kBvnW[ng][i] * std::exp(asr) *
                               (std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs -
                                (1.0 + c * xs * (1.0 + d * xs)));
                    }
                }
            }
            bvn = -bvn / twopi;
        }
        if (r > 0.0) {
            bvn += norm_cdf(-std::max(h, k));
        } else {
            bvn = -bvn;
            if (k > h) bvn += norm_cdf(k) - norm_cdf(h);
        }
    }
    return std::min(1.0, std::max(0.0, bvn));
}

}  // namespace

double bivariate_norm_cdf(double a, double b, double r) {
    if (!(std::fabs(r) <= 1.0))
        throw std::domain_error("bivariate_norm_cdf: correlation must lie in [-1, 1]");
    if (std::isinf(a) || std::isinf(b)) {
        if (a < 0.0 || b < 0.0) return 0.0;
        if (std::isinf(a) && a > 0.0) return std::isinf(b) ? (b > 0.0 ? 1.0 : 0.0) : norm_cdf(b);
        return norm_cdf(a);
    }
    return bvnu(-a, -b, r);
}

double solve_threshold_x(double a, double mu, double sigma, double nu, double tau,
                         const Tolerance& tol) {
    if (!(a > 0.0)) throw std::invalid_argument("solve_threshold_x: requires a > 0");
    if (!(sigma > 0.0 && tau > 0.0))
        throw std::invalid_argument("solve_threshold_x: requires sigma, tau > 0");
    const double log_a = std::log(a);
    auto f = [&](double x) { return std::exp(mu + sigma * x) + std::exp(nu + tau * x) - a; };
    // At the solution both exponentials are below a, so this is an upper bracket.
    const double hi = std::min((log_a - mu) / sigma, (log_a - nu) / tau);
    double step = 1.0;
    double lo = hi - step;
    int guard = 0;
    while (f(lo) > 0.0) {
        step *= 2.0;
        lo = hi - step;
        if (++guard > 120) throw NoConvergenceError("solve_threshold_x: bracket search failed");
    }
    Tolerance root_tol{1e-15, 1e-15, tol.max_iter};
    double x = bracketed_root(f, lo, hi, root_tol);
    // Newton polish until the residual satisfies |f(x)| <= abs_tol * a.
    for (int i = 0; i < 4 && std::fabs(f(x)) > tol.abs_tol * a; ++i) {
        const double d = sigma * std::exp(mu + sigma * x) + tau * std::exp(nu + tau * x);
        x -= f(x) / d;
    }
    if (!(std::fabs(f(x)) <= tol.abs_tol * a))
        throw NoConvergenceError("solve_threshold_x: residual above tolerance");
    return x;
}

}  // namespace covbond
