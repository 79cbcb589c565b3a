#pragma once

#include <cmath>
#include <span>
#include <string>

#include "halfspace/core.hpp"
#include "halfspace/quadrature.hpp"
#include "halfspace/weight.hpp"

namespace halfspace {

// All kernels on the upper half space used here are radial in the tangential
// variable:
//
//   poisson (P_a)      x_n^{1-a} / (|x'|^2 + x_n^2)^{(n-a)/2}
//   riesz (E_alpha)    1 / (|x'|^2 + x_n^2)^{(n-alpha)/2}
//   power_weight       x_n^beta / (|x'|^2 + x_n^2)^{(n-alpha)/2}   (E_{alpha,beta})
//   gamma_dirichlet    x_n^{1-a} / |x|^{n-a}
//   gamma_neumann      1 / |x|^{n-2+a}
//
// gamma_dirichlet and poisson share a formula; they are kept distinct because
// their parameter gates differ (the Poisson kernel is the one we normalize).

enum class KernelKind { poisson, riesz, power_weight, gamma_dirichlet, gamma_neumann };

struct KernelSpec {
    KernelKind kind = KernelKind::poisson;
    int n = 2;  // ambient dimension, 2 or 3 at this API
    double a = 0.0;
    double alpha = 0.0;
    double beta = 0.0;

    static KernelSpec poisson_type(double a, int n) { return checked({KernelKind::poisson, n, a, 0, 0}); }
    static KernelSpec riesz_type(double alpha, int n) { return checked({KernelKind::riesz, n, 0, alpha, 0}); }
    static KernelSpec power_weight_type(double alpha, double beta, int n) {
        return checked({KernelKind::power_weight, n, 0, alpha, beta});
    }
    static KernelSpec gamma_dirichlet_type(double a, int n) {
        return checked({KernelKind::gamma_dirichlet, n, a, 0, 0});
    }
    static KernelSpec gamma_neumann_type(double a, int n) {
        return checked({KernelKind::gamma_neumann, n, a, 0, 0});
    }

    /// Formula-level validity: enough to evaluate pointwise.
    void validate_pointwise() const {
        if (n != 2 && n != 3) throw validation_error("kernel dimension restricted to n in {2,3}");
        if (!std::isfinite(a) || !std::isfinite(alpha) || !std::isfinite(beta))
            throw validation_error("kernel parameters must be finite");
        switch (kind) {
            case KernelKind::poisson:
                if (!(a < 1.0)) throw validation_error("poisson kernel requires a < 1");
                break;
            case KernelKind::riesz:
                if (!(alpha > 0.0 && alpha < n))
                    throw validation_error("riesz kernel requires alpha in (0, n) pointwise");
                break;
            case KernelKind::power_weight:
                if (!(beta >= 0.0)) throw validation_error("power-weight kernel requires beta >= 0");
                if (!(alpha + beta > 0.0 && alpha + beta < n - beta))
                    throw validation_error("power-weight kernel requires 0 < alpha+beta < n-beta");
                break;
            case KernelKind::gamma_dirichlet:
            case KernelKind::gamma_neumann:
                break;
        }
    }

    /// Stricter gate for use under an integral against boundary data.
    void validate_for_extension() const {
        validate_pointwise();
        if (kind == KernelKind::riesz && !(alpha > 1.0 && alpha < n))
            throw validation_error("riesz extension requires alpha in (1, n)");
    }

  private:
    static KernelSpec checked(KernelSpec s) {
        if (s.n != 2 && s.n != 3) throw validation_error("kernel dimension restricted to n in {2,3}");
        return s;
    }
};

/// Kernel value at tangential radius rho = |x'| and height xn > 0.
inline double eval_kernel_radial(const KernelSpec& spec, double rho, double xn) {
    if (!(xn > 0.0)) throw domain_error("kernel evaluation requires x_n > 0");
    if (!(rho >= 0.0)) throw domain_error("tangential radius must be nonnegative");
    spec.validate_pointwise();
    const double q2 = rho * rho + xn * xn;
    switch (spec.kind) {
        case KernelKind::poisson:
        case KernelKind::gamma_dirichlet:
            return std::pow(xn, 1.0 - spec.a) * std::pow(q2, -0.5 * (spec.n - spec.a));
        case KernelKind::riesz:
            return std::pow(q2, -0.5 * (spec.n - spec.alpha));
        case KernelKind::power_weight:
            return std::pow(xn, spec.beta) * std::pow(q2, -0.5 * (spec.n - spec.alpha));
        case KernelKind::gamma_neumann:
            return std::pow(q2, -0.5 * (spec.n - 2.0 + spec.a));
    }
    throw validation_error("unknown kernel kind");
}

template <int N>
inline double eval_kernel(const KernelSpec& spec, const Point<N - 1>& xprime, double xn) {
    if (spec.n != N) throw validation_error("kernel dimension does not match the point dimension");
    return eval_kernel_radial(spec, norm<N - 1>(xprime), xn);
}

/// Mass of the kernel over the boundary hyperplane at height 1, computed by
/// adaptive quadrature after r = z/(1-z) removes the infinite domain. Only the
/// Poisson kernel with a < 1 is normalizable; everything else is rejected so a
/// divergent integral can never leak out as a large float.
inline double kernel_normalization(const KernelSpec& spec, double abs_tol = 1e-11) {
    if (spec.kind != KernelKind::poisson)
        throw validation_error("kernel is not normalizable: only the poisson kernel carries a finite boundary mass here");
    if (!(spec.a < 1.0))
        throw validation_error("kernel is not normalizable: poisson normalization diverges for a >= 1");
    const int d = spec.n - 1;                       // boundary dimension
    const double sphere = (d == 1) ? 2.0 : 2.0 * pi;  // |S^{d-1}|
    // r = tan(theta) folds the line into a finite interval; psi = pi/2 - theta
    // and w = psi^{1-a} absorb the integrable endpoint factor psi^{-a} coming
    // from the r^{a-2} tail, leaving a smooth integrand:
    //   N = sphere/(1-a) * ∫_0^{(pi/2)^{1-a}} cos^{d-1}(psi) (sin(psi)/psi)^{-a} dw
    const double om = 1.0 - spec.a;
    auto mapped = [&](double w) {
        const double psi = std::pow(w, 1.0 / om);
        const double sinc = psi < 1e-8 ? 1.0 : std::sin(psi) / psi;
        return std::pow(std::cos(psi), d - 1) * std::pow(sinc, -spec.a);
    };
    const QuadResult q = integrate(mapped, 0.0, std::pow(0.5 * pi, om), abs_tol * om / sphere);
    return sphere / om * q.value;
}

/// Same mass through the Gamma-function identity
///   pi^{(n-1)/2} * Gamma((1-a)/2) / Gamma((n-a)/2).
/// Kept public as the second route of the normalization cross-check.
inline double kernel_normalization_closed_form(const KernelSpec& spec) {
    if (spec.kind != KernelKind::poisson || !(spec.a < 1.0))
        throw validation_error("closed-form normalization applies to the poisson kernel with a < 1");
    return std::pow(pi, 0.5 * (spec.n - 1)) * std::tgamma(0.5 * (1.0 - spec.a)) /
           std::tgamma(0.5 * (spec.n - spec.a));
}

/// Max |x_n^b E_{a,1-a-b}(x) - Gamma_d(x)| over the samples (rho, xn).
/// Identically zero up to rounding whenever the power-weight parameters are in
/// range; the deviation is returned so tests can pin the rounding level.
inline double weight_shift_identity_deviation(WeightExponent a, double b, int n,
                                              std::span<const std::array<double, 2>> samples) {
    const KernelSpec shifted = KernelSpec::power_weight_type(a.a, 1.0 - a.a - b, n);
    shifted.validate_pointwise();  // throws on an out-of-range (a, b) pair
    const KernelSpec gamma_d = KernelSpec::gamma_dirichlet_type(a.a, n);
    double worst = 0.0;
    for (const auto& s : samples) {
        const double rho = s[0], xn = s[1];
        const double lhs = std::pow(xn, b) * eval_kernel_radial(shifted, rho, xn);
        const double rhs = eval_kernel_radial(gamma_d, rho, xn);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

}  // namespace halfspace
