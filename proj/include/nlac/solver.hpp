#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "nlac/field.hpp"
#include "nlac/geometry.hpp"
#include "nlac/profile.hpp"

namespace nlac {

// Discrete L on the lattice of a GridFunction: cell-averaged kernel weights
// applied by circular FFT convolution over a padded array whose exterior ring
// is frozen at the closure rule, plus an analytic tail beyond the padding
// radius and a Taylor correction for the singular cell.
class LatticeOperator {
public:
    LatticeOperator(const GridFunction& proto, const SpectralMeasure& mu, double s);
    ~LatticeOperator();
    LatticeOperator(const LatticeOperator&) = delete;
    LatticeOperator& operator=(const LatticeOperator&) = delete;

    // Lu at every lattice node; u must share proto's box
    void apply(const GridFunction& u, std::vector<double>& out) const;
    // Dirichlet part of the energy whose gradient is apply(); additive
    // constants from frozen exterior data are dropped
    double dirichlet_energy(const GridFunction& u) const;
    // explicit stability bound: worst-case row sum of the update map
    double diag_weight() const { return w_abs_ + w_tail_; }

private:
    void load_interior(const GridFunction& u) const;
    void convolve() const;

    std::size_t nx_, ny_, kx_;   // grid size, pad reach in cells
    std::size_t px_, py_;        // padded FFT size
    double h_;
    double w_sum_ = 0.0;         // sum of kernel weights inside the cut radius
    double w_abs_ = 0.0;         // sum of |weights|, for the stability bound
    double w_tail_ = 0.0;        // kernel mass beyond the cut radius
    std::vector<double> gtail_;  // closure integral beyond the cut radius, per node
    std::vector<double> wmask_;  // kernel mass landing in the interior, per node
    std::vector<double> conv_ext_;  // convolution of the frozen exterior part
    double ext_energy_ref_ = 0.0;

    mutable std::vector<double> pad_;   // padded real workspace
    mutable std::vector<double> conv_;  // full convolution at interior nodes
    std::vector<std::complex<double>> kernel_hat_;
    mutable std::vector<std::complex<double>> spec_;
    void* plan_fwd_ = nullptr;
    void* plan_bwd_ = nullptr;
};

struct SolveConfig {
    Vec center = {0.0, 0.0, 0.0};
    Vec half_widths = {1.0, 1.0, 0.0};
    double h_grid = 0.05;
    double eps = 0.05;
    double s = 0.5;
    const SpectralMeasure* mu = nullptr;
    FarFieldRule exterior = FarConstant{1.0};
    Nonlinearity f;
    double tau_safety = 0.9;  // tau * stability bound
    int max_iters = 20000;
    double tol = 1e-4;
    bool monotone_projection = false;  // isotonic projection along +y each step
    int energy_every = 1;

    void validate() const;
};

struct SolveDiagnostics {
    int iterations = 0;
    double tau = 0.0;
    double final_residual = 0.0;
    bool diverged = false;
    std::vector<double> residual_history;
    std::vector<double> energy_history;  // recorded every energy_every iterations
};

// damped descent u <- clamp(u - tau (Lu - eps^{-s} f(u))) from the closure
// rule as initial guess; throws on divergence with diag holding the state
GridFunction solve_box(const SolveConfig& cfg, SolveDiagnostics& diag);

// per-node Lu - eps^{-s} f(u) as a GridFunction (constant-zero closure)
GridFunction residual_map(const GridFunction& u, const SolveConfig& cfg);

struct DecayFit {
    double gamma = 0.0;
    double log_c = 0.0;
    double r2 = 0.0;
    int used = 0;
    int skipped_outside = 0;    // ball not inside {u >= 1-kappa}
    int skipped_degenerate = 0; // 1-u vanishes, log-degenerate
    std::vector<double> eps_over_R;
    std::vector<double> one_minus_u;
};

// least-squares fit of log(1-u(center)) against log(eps/R) over verified balls
DecayFit decay_audit(const GridFunction& u, double eps, double kappa,
                     const std::vector<std::pair<Vec, double>>& balls);

}  // namespace nlac
