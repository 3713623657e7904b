#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "nlac/geometry.hpp"

namespace nlac {

// curved-graph set Gamma_b = {x_n >= b xi(x')} with xi(r) = (1+r^2)^{(1+alpha)/2} - 1
struct GraphSet {
    double b = 0.0;
    double alpha = 0.25;
    int dim = 2;

    double xi(double r) const;
    double xi_prime(double r) const;
    double xi_second(double r) const;
    bool inside(const Vec& x) const;  // x[dim-1] >= b xi(|x'|)
    void validate() const;
};

// anisotropic signed distance to the boundary of Gamma_b, positive inside,
// measured by the gauge of the body table. Evaluations are cached; the cache
// is a concurrent map with idempotent inserts.
struct SignedDistanceField {
    GraphSet gamma;
    ConvexBodyTable body;

    mutable std::map<std::pair<std::uint64_t, std::uint64_t>, double> cache;
    mutable std::mutex cache_mutex;
    mutable std::atomic<long> nonconverged{0};  // minimizer hit the window edge

    SignedDistanceField() = default;
    SignedDistanceField(GraphSet g, ConvexBodyTable t) : gamma(std::move(g)), body(std::move(t)) {}
    SignedDistanceField(const SignedDistanceField&) = delete;
    SignedDistanceField& operator=(const SignedDistanceField&) = delete;

    void validate() const;
};

double signed_distance(const SignedDistanceField& field, const Vec& x);

// max over pairs of |d(p) - d(q)| / ||p - q||_C
double lipschitz_audit(const SignedDistanceField& field,
                       const std::vector<std::pair<Vec, Vec>>& pairs);

struct LevelSetGraph {
    std::vector<double> yprime;
    std::vector<double> G;
    std::vector<double> dG;   // centered first differences
    std::vector<double> d2G;  // centered second differences
    double max_abs_dG = 0.0;
    double max_abs_d2G = 0.0;
};

// solves d(y', y_n) = t by bisection in y_n for y' on a uniform grid in
// [-window, window]
LevelSetGraph level_set_graph(const SignedDistanceField& field, double t, double window,
                              std::size_t samples = 65);

struct TouchReport {
    bool pass = true;
    Vec zbar{};               // touching point on {d = 0}
    double min_d_ball = 0.0;  // min of d over the boundary of C_{R-t}(z0)
    double touch_value = 0.0;  // d at the rescaled touching point
    std::string detail;
};

// Verifies the touching-sphere geometry: C_{R-t}(z0) stays in {d > t} and the
// rescaled touching point lies on {d = t}.
TouchReport touching_sphere_check(const SignedDistanceField& field, const Vec& z0, double R,
                                  double t, double tol = 1e-5);

}  // namespace nlac
