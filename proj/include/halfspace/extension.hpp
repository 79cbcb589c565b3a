#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "halfspace/core.hpp"
#include "halfspace/kernels.hpp"
#include "halfspace/quadrature.hpp"
#include "halfspace/weight.hpp"

namespace halfspace {

/// |f(y)| <= bound * (1 + |y|)^{-rate} on the boundary hyperplane.
struct DecayCertificate {
    double bound = 0.0;
    double rate = 0.0;
};

/// Boundary data with a machine-checkable decay certificate. M is the
/// boundary dimension (1 under n=2, 2 under n=3).
template <int M>
class BoundaryFunction {
  public:
    enum class Shape { gaussian, bump, constant, sampled };

    static BoundaryFunction gaussian(double amplitude, double width, const Point<M>& center) {
        if (!(width > 0.0)) throw validation_error("gaussian width must be positive");
        BoundaryFunction f;
        f.shape_ = Shape::gaussian;
        f.amplitude_ = amplitude;
        f.width_ = width;
        f.center_ = center;
        f.certificate_ = f.scan_certificate(8.0);
        return f;
    }

    /// exp(1 - 1/(1 - r^2)) profile, identically zero outside |y-c| = radius.
    static BoundaryFunction bump(double amplitude, double radius, const Point<M>& center) {
        if (!(radius > 0.0)) throw validation_error("bump radius must be positive");
        BoundaryFunction f;
        f.shape_ = Shape::bump;
        f.amplitude_ = amplitude;
        f.width_ = radius;
        f.center_ = center;
        f.certificate_ = {std::abs(amplitude) * std::pow(1.0 + norm(center) + radius, 8.0), 8.0};
        return f;
    }

    static BoundaryFunction constant(double value) {
        BoundaryFunction f;
        f.shape_ = Shape::constant;
        f.amplitude_ = value;
        f.certificate_ = {std::abs(value), 0.0};
        return f;
    }

    /// Piecewise-(bi)linear values on a uniform lattice over [lo, hi]^M,
    /// zero outside. `dims` are node counts per axis, vertical-last ordering
    /// like the grid fields.
    static BoundaryFunction sampled(const Point<M>& lo, const Point<M>& hi,
                                    std::array<int, M> dims, std::vector<double> values) {
        std::size_t count = 1;
        for (int i = 0; i < M; ++i) {
            if (dims[i] < 2) throw validation_error("sampled data needs >= 2 nodes per axis");
            if (!(hi[i] > lo[i])) throw validation_error("sampled extent must be nonempty");
            count *= static_cast<std::size_t>(dims[i]);
        }
        if (values.size() != count) throw validation_error("sampled value count does not match dims");
        BoundaryFunction f;
        f.shape_ = Shape::sampled;
        f.lo_ = lo;
        f.hi_ = hi;
        f.dims_ = dims;
        f.values_ = std::move(values);
        double b = 0.0;
        for (double v : f.values_) b = std::max(b, std::abs(v));
        f.certificate_ = {b * std::pow(1.0 + f.support_radius(), 8.0), 8.0};
        return f;
    }

    double operator()(const Point<M>& y) const {
        switch (shape_) {
            case Shape::constant:
                return amplitude_;
            case Shape::gaussian: {
                const double r2 = dist2(y, center_);
                return amplitude_ * std::exp(-r2 / (width_ * width_));
            }
            case Shape::bump: {
                const double r2 = dist2(y, center_) / (width_ * width_);
                if (r2 >= 1.0) return 0.0;
                return amplitude_ * std::exp(1.0 - 1.0 / (1.0 - r2));
            }
            case Shape::sampled:
                return sample_linear(y);
        }
        return 0.0;
    }

    DecayCertificate certificate() const { return certificate_; }

    double support_radius() const {
        switch (shape_) {
            case Shape::bump:
                return norm(center_) + width_;
            case Shape::sampled: {
                double r = 0.0;
                for (int i = 0; i < M; ++i) r += std::max(lo_[i] * lo_[i], hi_[i] * hi_[i]);
                return std::sqrt(r);
            }
            default:
                return std::numeric_limits<double>::infinity();
        }
    }

    Shape shape() const { return shape_; }
    double amplitude() const { return amplitude_; }
    double width() const { return width_; }
    const Point<M>& center() const { return center_; }

  private:
    Shape shape_ = Shape::constant;
    double amplitude_ = 0.0;
    double width_ = 1.0;
    Point<M> center_{};
    Point<M> lo_{}, hi_{};
    std::array<int, M> dims_{};
    std::vector<double> values_;
    DecayCertificate certificate_;

    /// Upper bound for |f|(1+|y|)^q by a radial scan: |f(y)| depends on
    /// |y - c| only and |y - c| >= | |y| - |c| |.
    DecayCertificate scan_certificate(double q) const {
        const double c = norm(center_);
        double best = 0.0;
        const double rmax = c + width_ * (q + 40.0);
        for (int i = 0; i <= 4000; ++i) {
            const double r = rmax * i / 4000.0;
            const double d = std::max(0.0, r - c) / width_;
            best = std::max(best, std::abs(amplitude_) * std::exp(-d * d) * std::pow(1.0 + r, q));
        }
        return {best * 1.001, q};
    }

    double sample_linear(const Point<M>& y) const {
        std::array<int, M> cell;
        std::array<double, M> frac;
        for (int i = 0; i < M; ++i) {
            const double step = (hi_[i] - lo_[i]) / (dims_[i] - 1);
            const double s = (y[i] - lo_[i]) / step;
            if (s < 0.0 || s > dims_[i] - 1) return 0.0;
            int c = std::min(dims_[i] - 2, static_cast<int>(std::floor(s)));
            cell[i] = c;
            frac[i] = s - c;
        }
        double acc = 0.0;
        for (int m = 0; m < (1 << M); ++m) {
            double w = 1.0;
            std::size_t lin = 0;
            for (int i = 0; i < M; ++i) {
                const int bit = (m >> i) & 1;
                w *= bit ? frac[i] : 1.0 - frac[i];
                lin = lin * dims_[i] + static_cast<std::size_t>(cell[i] + bit);
            }
            acc += w * values_[lin];
        }
        return acc;
    }
};

/// Fractional order s in (0, 1) stored together with the matching weight
/// exponent a = 1 - 2s, consistency enforced at construction.
struct FracOrder {
    double s = 0.5;
    double a = 0.0;

    static FracOrder from_s(double s) {
        if (!(s > 0.0 && s < 1.0)) throw validation_error("fractional order must lie in (0, 1)");
        return {s, 1.0 - 2.0 * s};
    }
    static FracOrder from_a(double a) {
        if (!(a > -1.0 && a < 1.0)) throw validation_error("flux-limit weight exponent must lie in (-1, 1)");
        return {0.5 * (1.0 - a), a};
    }
};

struct ExtendOptions {
    double abs_tol = 1e-8;      // per-point quadrature target
    double tail_target = 1e-10; // admissible truncation remainder
    int threads = 1;
};

namespace ext_detail {

// Kernel family t^sigma (rho^2 + t^2)^{-power/2} covering both extensions:
// dirichlet: sigma = 1-a, power = n-a (normalized afterwards)
// neumann:   sigma = 0,   power = n-2+a   (alpha = 2-a)
struct RadialKernel {
    double sigma;
    double power;
    int n;
};

/// Truncation radius around the origin from the decay certificate; the
/// integration window around x' then adds |x'|.
inline double truncation_radius(const RadialKernel& k, const DecayCertificate& cert,
                                double rho0, double t, double normalization, double target) {
    const double q = cert.rate;
    const double drop = q + 1.0 - (k.n - k.power);  // integrand decays like r^{-1-drop}
    if (!(drop > 0.0))
        throw validation_error("decay certificate insufficient for the kernel tail");
    const double sphere = (k.n == 2) ? 2.0 : 2.0 * pi;
    double r = std::max(4.0, 2.0 * rho0 + 2.0);
    for (int i = 0; i < 256; ++i) {
        const double tail = cert.bound * sphere * std::pow(t, k.sigma) *
                            std::pow(2.0, k.power) * std::pow(r, -drop) / drop / normalization;
        if (tail < target) return r;
        r *= 2.0;
    }
    throw validation_error("decay certificate insufficient: tail does not reach the target");
}

template <int M>
inline double integrate_point(const RadialKernel& k, const BoundaryFunction<M>& f,
                              const Point<M>& xprime, double t, double radius, double abs_tol) {
    const double theta_split = std::atan2(std::min(10.0 * t, radius), t);
    double total = 0.0;

    if constexpr (M == 1) {
        // Inner window: y = x' + t tan(theta) removes the near-singularity.
        auto polar = [&](double theta) {
            const double sec = 1.0 / std::cos(theta);
            return f({xprime[0] + t * std::tan(theta)}) * std::pow(t, k.sigma + 1.0 - k.power) *
                   std::pow(sec, 2.0 - k.power);
        };
        total += integrate(polar, -theta_split, theta_split, 0.5 * abs_tol).value;

        const double r_in = t * std::tan(theta_split);
        if (radius > r_in * (1.0 + 1e-12)) {
            // log-radius substitution: kernel tails decay only like a power
            // of r, so the window may span many decades
            auto outer = [&](double v) {
                const double r = r_in * std::exp(v);
                const double kv = std::pow(t, k.sigma) * std::pow(r * r + t * t, -0.5 * k.power);
                return kv * (f({xprime[0] + r}) + f({xprime[0] - r})) * r;
            };
            total += integrate(outer, 0.0, std::log(radius / r_in), 0.5 * abs_tol).value;
        }
    } else {
        const double inner_tol = abs_tol / 64.0;
        auto ring_average = [&](double r) {  // ∫_0^{2pi} f(x' + r e_phi) dphi
            auto ring = [&](double phi) {
                return f({xprime[0] + r * std::cos(phi), xprime[1] + r * std::sin(phi)});
            };
            return integrate(ring, 0.0, 2.0 * pi, inner_tol).value;
        };
        auto polar = [&](double theta) {
            const double sec = 1.0 / std::cos(theta);
            const double r = t * std::tan(theta);
            return ring_average(r) * std::pow(t, k.sigma + 2.0 - k.power) * std::tan(theta) *
                   std::pow(sec, 2.0 - k.power);
        };
        total += integrate(polar, 0.0, theta_split, 0.25 * abs_tol).value;

        const double r_in = t * std::tan(theta_split);
        if (radius > r_in * (1.0 + 1e-12)) {
            auto outer = [&](double v) {
                const double r = r_in * std::exp(v);
                return ring_average(r) * r * r * std::pow(t, k.sigma) *
                       std::pow(r * r + t * t, -0.5 * k.power);
            };
            total += integrate(outer, 0.0, std::log(radius / r_in), 0.25 * abs_tol).value;
        }
    }
    return total;
}

template <int N>
inline std::vector<double> extend_impl(const RadialKernel& k, const BoundaryFunction<N - 1>& f,
                                       std::span<const Point<N>> pts, double normalization,
                                       const ExtendOptions& opt) {
    for (const Point<N>& p : pts)  // validate before any worker thread starts
        if (!(p[N - 1] > 0.0)) throw domain_error("extension points need x_n > 0");
    std::vector<double> out(pts.size(), 0.0);
    parallel_for(pts.size(), opt.threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const Point<N>& p = pts[i];
            const double t = p[N - 1];
            Point<N - 1> xp;
            for (int d = 0; d < N - 1; ++d) xp[d] = p[d];

            double radius;
            const double support = f.support_radius();
            if (std::isfinite(support)) {
                radius = support + norm(xp) + 1.0;
            } else {
                radius = truncation_radius(k, f.certificate(), norm(xp), t, normalization,
                                           opt.tail_target) + norm(xp);
            }
            out[i] = integrate_point<N - 1>(k, f, xp, t, radius, opt.abs_tol * normalization) /
                     normalization;
        }
    });
    return out;
}

}  // namespace ext_detail

/// Boundary-value extension: convolution with the mass-one Poisson-type
/// kernel, so constants extend to themselves and traces are attained with
/// constant 1.
template <int N>
inline std::vector<double> extend_dirichlet(const BoundaryFunction<N - 1>& f, WeightExponent a,
                                            std::span<const Point<N>> pts,
                                            const ExtendOptions& opt = {}) {
    if (!(a.a < 1.0)) throw validation_error("boundary-value extension requires a < 1");
    const double mass = kernel_normalization(KernelSpec::poisson_type(a.a, N), 1e-12);
    const ext_detail::RadialKernel k{1.0 - a.a, static_cast<double>(N) - a.a, N};
    return ext_detail::extend_impl<N>(k, f, pts, mass, opt);
}

/// Boundary-flux extension: convolution with the Riesz-type kernel of order
/// alpha = 2-a, left unnormalized (no canonical constant).
template <int N>
inline std::vector<double> extend_neumann(const BoundaryFunction<N - 1>& f, WeightExponent a,
                                          std::span<const Point<N>> pts,
                                          const ExtendOptions& opt = {}) {
    const double alpha = 2.0 - a.a;
    KernelSpec::riesz_type(alpha, N).validate_for_extension();
    if (!(f.certificate().rate > alpha))
        throw validation_error("boundary-flux extension needs decay rate q > alpha");
    const ext_detail::RadialKernel k{0.0, static_cast<double>(N) - alpha, N};
    return ext_detail::extend_impl<N>(k, f, pts, 1.0, opt);
}

struct FracLapResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool low_confidence = false;
};

struct FracLapOptions {
    double base_step = 0.05;
    double quad_tol = 1e-10;
    int threads = 1;
};

/// Fractional Laplacian of boundary data as the weighted flux limit of its
/// extension: -lim_{t->0} t^a d_n u(x', t). Uses one-sided weighted quotients
/// at t, t/2, t/4 and Richardson stages with the expansion exponents
/// (1+a, 2); flags the result when the extrapolation corrections fail to
/// contract.
template <int M>
inline FracLapResult fractional_laplacian(const BoundaryFunction<M>& f, FracOrder order,
                                          const Point<M>& xprime, const FracLapOptions& opt = {}) {
    const WeightExponent a(order.a);
    const double h = opt.base_step;
    std::array<Point<M + 1>, 3> pts;
    for (int l = 0; l < 3; ++l) {
        for (int d = 0; d < M; ++d) pts[l][d] = xprime[d];
        pts[l][M] = h / (1 << l);
    }
    ExtendOptions eo;
    eo.abs_tol = opt.quad_tol;
    eo.threads = opt.threads;
    const std::vector<double> u = extend_dirichlet<M + 1>(f, a, pts, eo);
    const double u0 = f(xprime);  // boundary values attained under mass-one normalization

    // The one-sided quotient recovers the t^{1-a} coefficient of the
    // boundary expansion; the weighted flux limit is (1-a) times it.
    double phi[3];
    for (int l = 0; l < 3; ++l) {
        const double t = h / (1 << l);
        phi[l] = (1.0 - a.a) * std::pow(t, a.a - 1.0) * (u[l] - u0);
    }
    const double p1 = 1.0 + a.a;
    const double w1 = std::pow(2.0, p1);
    const double g1 = (w1 * phi[1] - phi[0]) / (w1 - 1.0);
    const double g2 = (w1 * phi[2] - phi[1]) / (w1 - 1.0);
    const double limit = (4.0 * g2 - g1) / 3.0;

    // Under mass-one kernel scaling the flux limit is -d_s (-Lap)^s f with
    // d_s = 2^{1-2s} Gamma(1-s)/Gamma(s) (from the Fourier symbol
    // r^s K_s(r)/(2^{s-1} Gamma(s)) of the normalized kernel); d_{1/2} = 1.
    const double d_s = std::pow(2.0, 1.0 - 2.0 * order.s) * std::tgamma(1.0 - order.s) /
                       std::tgamma(order.s);

    FracLapResult out;
    out.value = -limit / d_s;
    const double c1 = std::abs(g2 - g1);
    const double c0 = std::abs(phi[2] - phi[1]);
    out.error_estimate = (std::abs(limit - g2) + 16.0 * opt.quad_tol) / d_s;
    out.low_confidence = c1 > c0 + 16.0 * opt.quad_tol;
    return out;
}

/// Independent spectral route for Gaussian data on the 1-dimensional
/// boundary: (A w / sqrt(pi)) ∫_0^∞ xi^{2s} e^{-w^2 xi^2/4} cos(xi (x-c)) dxi.
inline double fourier_oracle(const BoundaryFunction<1>& f, FracOrder order, double xprime,
                             double abs_tol = 1e-10) {
    if (f.shape() != BoundaryFunction<1>::Shape::gaussian)
        throw validation_error("the spectral oracle supports gaussian data only");
    const double w = f.width();
    const double shift = xprime - f.center()[0];
    auto integrand = [&](double xi) {
        return std::pow(xi, 2.0 * order.s) * std::exp(-0.25 * w * w * xi * xi) *
               std::cos(xi * shift);
    };
    const double cutoff = 14.0 / w;  // e^{-49} tail, below any tolerance used here
    const QuadResult q = integrate(integrand, 0.0, cutoff, abs_tol);
    return f.amplitude() * w / std::sqrt(pi) * q.value;
}

}  // namespace halfspace
