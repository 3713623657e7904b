#pragma once

// Independent quadrature oracles used only by tests. These never call the
// library's evaluators: adaptive Simpson in 1-D, adaptive polar rules in 2-D.

#include <cmath>
#include <functional>
#include <numbers>

namespace oracles {

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole, double tol,
                                   int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-12, int depth = 40) {
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth);
}

// C(s) = int_R (1 - cos z) |z|^{-1-s} dz, so that (-d^2)^{s/2} cos(0) = C(s)
inline double fraclap_symbol(double s) {
    auto g = [&](double z) { return (1.0 - std::cos(z)) * std::pow(z, -1.0 - s); };
    // [0, eps] analytically ~ z^2/2: int = eps^{2-s}/(2(2-s))
    double eps = 1e-4, big = 1e7;
    double head = std::pow(eps, 2.0 - s) / (2.0 * (2.0 - s));
    double body = adaptive_simpson(g, eps, 100.0, 1e-13) +
                  adaptive_simpson(g, 100.0, big, 1e-13);
    double tail = std::pow(big, -s) / s;  // (1 - cos) averages to 1
    return 2.0 * (head + body + tail);
}

// h_L for mu == 1 in n = 2: ( 1/2 int_0^{2pi} |cos t|^s dt )^{1/s}
inline double hl_ball_2d(double s) {
    auto g = [&](double t) { return std::pow(std::abs(std::cos(t)), s); };
    double integral = adaptive_simpson(g, 0.0, 2.0 * std::numbers::pi, 1e-13);
    return std::pow(0.5 * integral, 1.0 / s);
}

// pv int_{R^2} (u(x) - u(x+y)) mu(theta(y)) |y|^{-2-s} dy for analytic u, by
// adaptive polar quadrature: fine angular trapezoid, adaptive radial Simpson
// on the antipodally paired integrand.
inline double polar_pv_2d(const std::function<double(double, double)>& u,
                          const std::function<double(double)>& mu_angle, double s, double x0,
                          double x1, int n_angles = 720, double r_lo = 1e-6, double r_hi = 1e4) {
    double ux = u(x0, x1);
    double acc = 0.0;
    for (int k = 0; k < n_angles / 2; ++k) {
        double t = 2.0 * std::numbers::pi * k / n_angles;
        double c = std::cos(t), sn = std::sin(t);
        auto g = [&](double rho) {
            return (2.0 * ux - u(x0 + rho * c, x1 + rho * sn) - u(x0 - rho * c, x1 - rho * sn)) *
                   std::pow(rho, -1.0 - s);
        };
        // near-origin piece: paired integrand ~ rho^2, integrate analytically
        // from the quadratic fit at r_lo
        double head = g(r_lo) * r_lo / (2.0 - s);
        double body = adaptive_simpson(g, r_lo, 1.0, 1e-10) +
                      adaptive_simpson(g, 1.0, 100.0, 1e-10) +
                      adaptive_simpson(g, 100.0, r_hi, 1e-10);
        double tail = (2.0 * ux - u(x0 + r_hi * c, x1 + r_hi * sn) - u(x0 - r_hi * c, x1 - r_hi * sn)) *
                      std::pow(r_hi, -s) / s;
        acc += (mu_angle(t) * 2.0 * std::numbers::pi / n_angles) * (head + body + tail);
    }
    return acc;
}

}  // namespace oracles
