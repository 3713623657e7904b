#pragma once

#include <functional>
#include <utility>

#include "nlac/field.hpp"
#include "nlac/geometry.hpp"

namespace nlac {

// Quadrature controls for principal-value evaluation of L.
struct QuadratureSpec {
    double r0 = 0.0;          // inner cutoff (Taylor-corrected near field)
    double r_max = 0.0;       // switch from mid-field to sparse far-field sampling
    double growth = 1.06;     // radial annulus growth factor in the mid field
    double far_growth = 1.35; // annulus growth beyond r_max
    double far_reach = 1e4;   // sampled far field extends to far_reach * r_max
    double curvature_bound = 25.0;  // signal if |second difference| exceeds this
    int gauss_order = 4;

    static QuadratureSpec for_grid(double h_grid, double box_half_width);
    void validate(double h_grid) const;
};

// Lu(x) = pv int (u(x) - u(x+y)) mu(y/|y|) |y|^{-n-s} dy
double eval_L(const Field& u, const SpectralMeasure& mu, double s, const Vec& x,
              const QuadratureSpec& q);

// same value through the layer-cake double integral (Lemma-style indicator
// accounting, theta-integral telescoped per y)
double eval_L_layercake(const Field& u, const SpectralMeasure& mu, double s, const Vec& x,
                        const QuadratureSpec& q, int theta_levels = 32);

// Lv(x) - Lw(x) for v(x) = w(x), via the difference representation
double eval_L_diff(const Field& v, const Field& w, const SpectralMeasure& mu, double s,
                   const Vec& x, const QuadratureSpec& q);

// 1-D fractional Laplacian (unnormalized)
double eval_1d_fraclap(const Func1D& psi, double s, double z, const QuadratureSpec& q);

// (L of planar extension psi(omega.x / h_L), 1-D fractional laplacian of psi)
std::pair<double, double> directional_consistency_check(const SpectralMeasure& mu, double s,
                                                        const Func1D& psi, const Vec& omega,
                                                        const Vec& x, const QuadratureSpec& q,
                                                        double h_override = 0.0);

// (n-1)-dimensional tabulated/callback function with declared growth at infinity
struct LbarFunction {
    int dim_prime = 1;  // 1 for n=2, 2 for n=3
    std::function<double(Vec)> f;
    double growth_exponent = 0.0;  // |f| <= C (1+|x'|)^growth_exponent
    double grad_step = 1e-4;       // centered-difference step for the gradient
};

// Lbar h(x') = int ( h(x') + grad h(x').(y'-x') - h(y') ) K(x'-y',0) dy'
double eval_Lbar(const LbarFunction& hfun, const SpectralMeasure& mu, double s, const Vec& xprime,
                 const QuadratureSpec& q);

}  // namespace nlac
