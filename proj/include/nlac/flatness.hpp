#pragma once

#include <string>
#include <vector>

#include "nlac/field.hpp"
#include "nlac/geometry.hpp"
#include "nlac/operator.hpp"

namespace nlac {

// best slab trapping the transition set {-1+kappa <= u <= 1-kappa} in a ball
struct SlabFit {
    Vec omega = {0.0, 1.0, 0.0};  // oriented so u increases along omega
    double a = 0.0;               // slab half-width / radius
    double slab_lo = 0.0;         // projection bounds of the transition set
    double slab_hi = 0.0;
    bool minus_inclusion = false;  // {omega.(x-c) <= slab_lo} subset {u <= -1+kappa}
    bool plus_inclusion = false;   // {omega.(x-c) >= slab_hi} subset {u >= 1-kappa}
};

SlabFit measure_flatness(const GridFunction& u, double kappa, const Vec& center, double radius);

struct ScaleEntry {
    int j = 0;
    double radius = 0.0;
    SlabFit fit;
    bool valid = false;
    std::string error;
};

struct FlatnessReport {
    double alpha0 = 0.1;
    int m0 = 0;
    double a = 0.0;  // flatness at the smallest measured scale
    int j_a = 0;
    int k_a = 0;
    std::vector<ScaleEntry> scales;   // ascending j
    std::vector<double> ratios;       // ratios[k] = a(scale k+1) / a(scale k)
    std::vector<bool> ratio_pass;     // ratio <= 2^{-alpha0}
    int mesoscale_index = -1;         // largest failing ratio index, -1 if none

    void validate() const;
};

FlatnessReport dyadic_flatness_scan(const GridFunction& u, double kappa, const Vec& center,
                                    int j_min, int j_max, double alpha0, int m0 = 5);

struct RealignReport {
    Vec omega0 = {0.0, 1.0, 0.0};
    std::vector<double> widths;  // slab half-widths re-expressed along omega0, / radius
    std::vector<double> drifts;  // |omega_{j+1} - omega_j|
    double drift_c = 0.0;        // fitted C in |omega_{j+1}-omega_j| <= C a 2^{j alpha0}
    bool geometric_bound_ok = false;  // |omega_j - omega_0| <= C a 2^{j alpha0}
};

RealignReport realign_directions(const FlatnessReport& report);

struct SlidingReport {
    Vec e = {0.0, 1.0, 0.0};
    std::vector<double> shifts;
    std::vector<double> minima;  // min over the box of u - u^t
    bool trapping_ok = false;    // {u <= 1-kappa} subset {u^t <= -1+kappa} at largest t
    bool monotone = false;
    double tolerance = 1e-5;
};

// e = (e', eps_tilt)/sqrt(1+eps_tilt^2); u^t(x) = u(x - e t)
SlidingReport sliding_test(const GridFunction& u, const Vec& e_prime, double eps_tilt,
                           const std::vector<double>& t_schedule, double kappa = 0.8,
                           double tolerance = 1e-5);

struct GraphReport {
    std::vector<double> xs;      // columns inside the window
    std::vector<double> g;       // mid-level {u = 0} heights
    std::vector<double> g_norm;  // g / a_norm
    double c0 = 0.0, c1 = 0.0;   // best affine fit of g_norm
    double sup_affine_dist = 0.0;
    std::vector<double> lbar;    // eval_Lbar of the extraction at interior columns
    double lbar_max = 0.0;
};

GraphReport graph_extraction_and_lbar_check(const GridFunction& u, double kappa, double a_norm,
                                            double window, const SpectralMeasure& mu, double s,
                                            const QuadratureSpec& q);

}  // namespace nlac
