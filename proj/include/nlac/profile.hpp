#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "nlac/field.hpp"

namespace nlac {

// bistable nonlinearity with wells at -1 and +1
struct Nonlinearity {
    std::function<double(double)> f;
    std::function<double(double)> fprime;
    double kappa = 0.3;    // well neighbourhood half-width used by c_kappa
    double c_kappa = 0.1;  // f' < -c_kappa on [-1,-1+kappa] u [1-kappa,1]
    // double-well potential W with W' = -f and W(1) = 0; tabulated from f when absent
    std::function<double(double)> potential;
    void validate() const;
};

Nonlinearity cubic_double_well();  // f(u) = u - u^3

struct TailFit {
    double gamma = 0.0;
    double c_minus = 0.0;
    double c_plus = 0.0;
    double r2 = 0.0;
};

// monotone heteroclinic profile of the 1-D problem: L phi = f(phi), phi(0) = 0
struct LayerProfile {
    double s = 0.5;
    double x_min = 0.0;
    double spacing = 0.0;
    std::vector<double> phi;

    double c_minus = 0.0, c_plus = 0.0, gamma_fit = 0.0, fit_r2 = 0.0;
    double l_kappa = 0.0;
    double residual = 0.0;          // max |L phi - f(phi)| over the inner half
    double tail_truncation = 0.0;   // estimated error of the +-1 exterior closure
    std::size_t iterations = 0;

    double x_max() const { return x_min + spacing * static_cast<double>(phi.size() - 1); }
    // the profile as a function on R with +-1 exterior closure (the object the
    // solver actually discretizes)
    Tabulated1D interpolant() const;
};

LayerProfile solve_layer(const Nonlinearity& f, double s, double X_max, std::size_t N,
                         double tol = 2e-5, std::size_t max_iter = 100000);

// least-squares fit of log(1 -+ phi) vs log|x| over |x| in [X/10, X/2]
TailFit fit_tail(const LayerProfile& profile);

// t -> phi0(t / eps), tails extended by the fitted algebraic law
Tabulated1D rescale_profile(const LayerProfile& profile, double eps);

}  // namespace nlac
