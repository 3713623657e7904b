#include "nlac/operator.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nlac {

namespace {

constexpr double kGLNode4[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                0.8611363115940526};
constexpr double kGLWeight4[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                  0.3478548451374538};

// integral of g(rho) rho^{-1-s} over [a,b] by 4-point Gauss-Legendre
template <typename G>
double gl_radial(const G& g, double s, double a, double b) {
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (int i = 0; i < 4; ++i) {
        double rho = mid + half * kGLNode4[i];
        acc += kGLWeight4[i] * g(rho) * std::pow(rho, -1.0 - s);
    }
    return acc * half;
}

// geometric sweep of gl_radial from a to b
template <typename G>
double radial_sweep(const G& g, double s, double a, double b, double growth) {
    double acc = 0.0, lo = a;
    while (lo < b) {
        double hi = std::min(lo * growth, b);
        acc += gl_radial(g, s, lo, hi);
        lo = hi;
    }
    return acc;
}

void check_curvature(double second_diff, const QuadratureSpec& q) {
    if (!(std::abs(second_diff) <= q.curvature_bound))
        throw std::runtime_error(
            "near-field second difference exceeds stability bound (grid too coarse)");
}

// second-difference Hessian of a Field at x with step d (values, not /d^2)
struct Hessian2 {
    double dxx, dyy, dxy;
};
Hessian2 second_differences(const Field& u, const Vec& x, double d) {
    double c = u.eval(x);
    double xp = u.eval({x[0] + d, x[1], 0.0}), xm = u.eval({x[0] - d, x[1], 0.0});
    double yp = u.eval({x[0], x[1] + d, 0.0}), ym = u.eval({x[0], x[1] - d, 0.0});
    double pp = u.eval({x[0] + d, x[1] + d, 0.0}), mm = u.eval({x[0] - d, x[1] - d, 0.0});
    double pm = u.eval({x[0] + d, x[1] - d, 0.0}), mp = u.eval({x[0] - d, x[1] + d, 0.0});
    Hessian2 h;
    h.dxx = (xp - 2.0 * c + xm) / (d * d);
    h.dyy = (yp - 2.0 * c + ym) / (d * d);
    h.dxy = (pp + mm - pm - mp) / (4.0 * d * d);
    return h;
}

// near-field Taylor term: -1/2 sum_ij D2u_ij int_{|y|<r0} y_i y_j K(y) dy
double near_field_term(const Field& u, const SpectralMeasure& mu, double s, const Vec& x,
                       const QuadratureSpec& q) {
    double d = 0.5 * q.r0;
    Hessian2 h = second_differences(u, x, d);
    check_curvature(h.dxx * d * d, q);
    check_curvature(h.dyy * d * d, q);
    double mxx = 0.0, myy = 0.0, mxy = 0.0;
    for (std::size_t k = 0; k < mu.grid.size(); ++k) {
        double wk = mu.grid.weights[k] * mu.density[k];
        const Vec& t = mu.grid.dirs[k];
        mxx += wk * t[0] * t[0];
        myy += wk * t[1] * t[1];
        mxy += wk * t[0] * t[1];
    }
    double radial = std::pow(q.r0, 2.0 - s) / (2.0 - s);
    return -0.5 * radial * (h.dxx * mxx + h.dyy * myy + 2.0 * h.dxy * mxy);
}

// layer-cake accounting of a single difference u(x) - v, via indicator signs
inline double layercake_difference(double ux, double v) {
    double pos = ux >= v ? ux - v : 0.0;  // measure of [v, ux]
    double neg = v >= ux ? v - ux : 0.0;  // measure of [ux, v]
    return pos - neg;
}

template <typename PairIntegrand>
double angular_pv_sum(const SpectralMeasure& mu, double s, const QuadratureSpec& q,
                      const PairIntegrand& paired) {
    // paired(k, rho) = 2u(x) - u(x + rho theta_k) - u(x - rho theta_k)
    double acc = 0.0;
    std::vector<bool> done(mu.grid.size(), false);
    for (std::size_t k = 0; k < mu.grid.size(); ++k) {
        if (done[k]) continue;
        done[k] = done[mu.grid.antipode(k)] = true;
        double wk = mu.grid.weights[k] * mu.density[k];
        auto g = [&](double rho) { return paired(k, rho); };
        double mid = radial_sweep(g, s, q.r0, q.r_max, q.growth);
        double far = radial_sweep(g, s, q.r_max, q.r_max * q.far_reach, q.far_growth);
        double r_big = q.r_max * q.far_reach;
        double tail = paired(k, r_big) * std::pow(r_big, -s) / s;
        acc += wk * (mid + far + tail);
    }
    return acc;
}

}  // namespace

QuadratureSpec QuadratureSpec::for_grid(double h_grid, double box_half_width) {
    QuadratureSpec q;
    q.r0 = 2.0 * h_grid;
    q.r_max = 64.0 * box_half_width;
    return q;
}

void QuadratureSpec::validate(double h_grid) const {
    if (r0 < h_grid) throw std::invalid_argument("QuadratureSpec: r0 must be >= h_grid");
    if (r_max < 10.0 * r0) throw std::invalid_argument("QuadratureSpec: r_max must be >= 10 r0");
}

double eval_L(const Field& u, const SpectralMeasure& mu, double s, const Vec& x,
              const QuadratureSpec& q) {
    double ux = u.eval(x);
    double near = near_field_term(u, mu, s, x, q);
    double rest = angular_pv_sum(mu, s, q, [&](std::size_t k, double rho) {
        const Vec& t = mu.grid.dirs[k];
        return 2.0 * ux - u.eval(x + rho * t) - u.eval(x - rho * t);
    });
    return near + rest;
}

double eval_L_layercake(const Field& u, const SpectralMeasure& mu, double s, const Vec& x,
                        const QuadratureSpec& q, int theta_levels) {
    if (theta_levels < 32)
        throw std::invalid_argument("eval_L_layercake: theta_levels must be >= 32");
    double ux = u.eval(x);
    double near = near_field_term(u, mu, s, x, q);
    double rest = angular_pv_sum(mu, s, q, [&](std::size_t k, double rho) {
        const Vec& t = mu.grid.dirs[k];
        return layercake_difference(ux, u.eval(x + rho * t)) +
               layercake_difference(ux, u.eval(x - rho * t));
    });
    return near + rest;
}

double eval_L_diff(const Field& v, const Field& w, const SpectralMeasure& mu, double s,
                   const Vec& x, const QuadratureSpec& q) {
    if (std::abs(v.eval(x) - w.eval(x)) > 1e-10)
        throw std::invalid_argument("eval_L_diff requires v(x) = w(x)");
    // Lv(x) - Lw(x) = int (w(x+y) - v(x+y)) K(y) dy, g := w - v vanishes at x
    auto g_at = [&](const Vec& p) {
        return layercake_difference(w.eval(p), v.eval(p));  // (w-v)_+ - (v-w)_+
    };
    // near field: +1/2 sum_ij D2g_ij M_ij  (g(x)=0, gradient term is odd)
    double d = 0.5 * q.r0;
    auto gf = AnalyticField([&](Vec p) { return g_at(p); }, d);
    double near = -near_field_term(gf, mu, s, x, q);
    double rest = angular_pv_sum(mu, s, q, [&](std::size_t k, double rho) {
        const Vec& t = mu.grid.dirs[k];
        return g_at(x + rho * t) + g_at(x - rho * t);
    });
    return near + rest;
}

double eval_1d_fraclap(const Func1D& psi, double s, double z, const QuadratureSpec& q) {
    double pz = psi(z);
    double d = 0.5 * q.r0;
    double second = psi(z + d) - 2.0 * pz + psi(z - d);
    check_curvature(second, q);
    double near = -(second / (d * d)) * std::pow(q.r0, 2.0 - s) / (2.0 - s);
    auto g = [&](double rho) { return 2.0 * pz - psi(z + rho) - psi(z - rho); };
    // sweep to r_max with the subinterval width capped, so integrands
    // oscillating on an O(1) scale stay resolved, then geometrically out to
    // far_reach * r_max (set far_reach = 1 for purely oscillatory tails)
    double r_big = q.r_max * q.far_reach;
    double a10 = std::max(r_big / 10.0, q.r0);
    double acc = 0.0, last = 0.0;
    double lo = q.r0;
    while (lo < r_big) {
        double hi = lo < q.r_max ? std::min({lo * q.growth, lo + 0.5, q.r_max})
                                 : std::min(lo * q.far_growth, r_big);
        if (lo < a10) hi = std::min(hi, a10);
        double piece = gl_radial(g, s, lo, hi);
        acc += piece;
        if (lo >= a10) last += piece;
        lo = hi;
    }
    // tail: extend the kernel-weighted mean of the paired difference over the
    // last decade (exact once the profile has settled by r_big/10, and robust
    // to bounded oscillation)
    double wlast = (std::pow(a10, -s) - std::pow(r_big, -s)) / s;
    double gbar = wlast > 0.0 ? last / wlast : g(r_big);
    double tail = gbar * std::pow(r_big, -s) / s;
    return near + acc + tail;
}

std::pair<double, double> directional_consistency_check(const SpectralMeasure& mu, double s,
                                                        const Func1D& psi, const Vec& omega,
                                                        const Vec& x, const QuadratureSpec& q,
                                                        double h_override) {
    double h = h_override > 0.0 ? h_override : support_function_hL(mu, s, omega);
    AnalyticField bar([&](Vec p) { return psi(dot(omega, p) / h); }, 0.5 * q.r0);
    double lhs = eval_L(bar, mu, s, x, q);
    QuadratureSpec q1 = q;
    q1.r0 = q.r0 / h;  // same physical cutoff in the 1-D variable
    q1.r_max = q.r_max / h;
    double rhs = eval_1d_fraclap(psi, s, dot(omega, x) / h, q1);
    return {lhs, rhs};
}

double eval_Lbar(const LbarFunction& hfun, const SpectralMeasure& mu, double s, const Vec& xprime,
                 const QuadratureSpec& q) {
    if (hfun.growth_exponent >= 1.0 + s)
        throw std::invalid_argument("eval_Lbar: declared growth is not integrable against the kernel");
    int np = hfun.dim_prime;
    if (np != 1 && np != 2) throw std::invalid_argument("eval_Lbar: dim_prime must be 1 or 2");
    double hx = hfun.f(xprime);

    // angular grid on the equator of S^{n-1}; pairing cancels the gradient term
    std::size_t m = np == 1 ? 2 : 128;
    std::vector<Vec> dirs(m);
    double wtot = np == 1 ? 2.0 : 2.0 * std::numbers::pi;
    double w = wtot / static_cast<double>(m);
    for (std::size_t k = 0; k < m; ++k) {
        double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m);
        dirs[k] = np == 1 ? Vec{k == 0 ? 1.0 : -1.0, 0.0, 0.0} : Vec{std::cos(a), std::sin(a), 0.0};
    }

    // near field: -1/2 sum_ij D2h_ij int_{|Y|<r0} Y_i Y_j K(Y,0) dY; the
    // angular moment contracts against directional second differences
    double d = std::max(hfun.grad_step, 0.5 * q.r0);
    double near = 0.0;
    {
        double radial = std::pow(q.r0, 1.0 - s) / (1.0 - s);
        double acc = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            double second =
                (hfun.f(xprime + d * dirs[k]) - 2.0 * hx + hfun.f(xprime - d * dirs[k])) / (d * d);
            acc += w * mu.at(dirs[k]) * second;
        }
        near = -0.5 * radial * acc;
    }

    // mid + far: paired antipodal rays kill the gradient term; the radial
    // integral sees rho^{np-1} rho^{-(np+1+s)} = rho^{-2-s} in both dimensions
    double acc = 0.0;
    double seff = 1.0 + s;
    std::size_t pairs = np == 1 ? 1 : m / 2;
    for (std::size_t k = 0; k < pairs; ++k) {
        double muk = mu.at(dirs[k]);  // even measure: same at the antipode
        auto g = [&](double rho) {
            return 2.0 * hx - hfun.f(xprime + rho * dirs[k]) - hfun.f(xprime - rho * dirs[k]);
        };
        double mid = radial_sweep(g, seff, q.r0, q.r_max, q.growth);
        double far = radial_sweep(g, seff, q.r_max, q.r_max * q.far_reach, q.far_growth);
        // tail: the gradient term cancels in the pair, and the paired excess
        // h(x+y) + h(x-y) - 2h(x) is extended by the declared growth law
        double r_big = q.r_max * q.far_reach;
        double excess =
            hfun.f(xprime + r_big * dirs[k]) + hfun.f(xprime - r_big * dirs[k]) - 2.0 * hx;
        double tail = -excess * std::pow(r_big, -seff) / (seff - hfun.growth_exponent);
        acc += w * muk * (mid + far + tail);
    }
    return near + acc;
}

}  // namespace nlac
