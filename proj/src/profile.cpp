#include "nlac/profile.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

namespace nlac {

namespace {

constexpr double kGl8X[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                             0.9602898564975363};
constexpr double kGl8W[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                             0.1012285362903763};

// Catmull-Rom basis polynomials on [0,1], coefficients of 1, t, t^2, t^3 for
// the stencil offsets m = -1, 0, 1, 2
constexpr double kCr[4][4] = {
    {0.0, -0.5, 1.0, -0.5},
    {1.0, 0.0, -2.5, 1.5},
    {0.0, 0.5, 2.0, -1.5},
    {0.0, 0.0, -0.5, 0.5},
};

double cell_weight(int m, long k, double s) {
    const double* a = kCr[m + 1];
    if (k == 0) {
        // exact monomial moments; the constant term only appears for m = 0,
        // which multiplies a vanishing difference and is never requested here
        return a[1] / (1.0 - s) + a[2] / (2.0 - s) + a[3] / (3.0 - s);
    }
    double acc = 0.0;
    for (int i = 0; i < 4; ++i)
        for (double sg : {1.0, -1.0}) {
            double t = 0.5 + sg * 0.5 * kGl8X[i];
            double b = a[0] + t * (a[1] + t * (a[2] + t * a[3]));
            acc += 0.5 * kGl8W[i] * b * std::pow(static_cast<double>(k) + t, -1.0 - s);
        }
    return acc;
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// discrete nonlocal operator matching the +-1-closed Catmull-Rom interpolant
// of the node values: symmetric Toeplitz kernel applied by FFT, plus the
// analytic constant tail beyond K cells
struct ToeplitzL {
    long n = 0;
    double h = 0.0, s = 0.0;
    long off = 0;  // kernel half-width
    double c_sum = 0.0, abs_sum = 0.0, tail_w = 0.0;
    std::size_t fft_n = 0;
    double* buf = nullptr;
    fftw_complex* freq = nullptr;
    fftw_complex* ker_hat = nullptr;
    fftw_plan fwd{}, bwd{};

    ToeplitzL(long n_, double h_, double s_) : n(n_), h(h_), s(s_) {
        long cells = n + 1;  // cells per side; interpolant is constant beyond them
        off = cells + 1;     // largest stencil offset is cells - 1 + 2
        std::vector<double> right(off + 2, 0.0);  // coefficient at offset d >= -1, index d + 1
        double hs = std::pow(h, -s);
        for (long k = 0; k < cells; ++k)
            for (int m = -1; m <= 2; ++m) {
                if (k + m == 0) continue;  // multiplies u_i - u_i
                if (k == 0 && m == 0) continue;
                right[k + m + 1] += hs * cell_weight(m, k, s);
            }
        std::vector<double> ker(2 * off + 1, 0.0);
        for (long d = 1; d <= off; ++d) {
            double cd = right[d + 1] + (d == 1 ? right[0] : 0.0);
            ker[off + d] = cd;
            ker[off - d] = cd;
            c_sum += 2.0 * cd;
            abs_sum += 2.0 * std::abs(cd);
        }
        tail_w = std::pow(static_cast<double>(cells) * h, -s) / s;

        fft_n = next_pow2(static_cast<std::size_t>(n + 4 * off) + 1);
        buf = fftw_alloc_real(fft_n);
        freq = fftw_alloc_complex(fft_n / 2 + 1);
        ker_hat = fftw_alloc_complex(fft_n / 2 + 1);
        fwd = fftw_plan_dft_r2c_1d(static_cast<int>(fft_n), buf, freq, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_c2r_1d(static_cast<int>(fft_n), freq, buf, FFTW_ESTIMATE);
        std::memset(buf, 0, sizeof(double) * fft_n);
        std::copy(ker.begin(), ker.end(), buf);
        fftw_execute(fwd);
        std::memcpy(ker_hat, freq, sizeof(fftw_complex) * (fft_n / 2 + 1));
    }
    ToeplitzL(const ToeplitzL&) = delete;
    ToeplitzL& operator=(const ToeplitzL&) = delete;
    ~ToeplitzL() {
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
        fftw_free(buf);
        fftw_free(freq);
        fftw_free(ker_hat);
    }

    void apply(const std::vector<double>& u, std::vector<double>& out) const {
        std::memset(buf, 0, sizeof(double) * fft_n);
        for (long j = 0; j < off; ++j) buf[j] = -1.0;
        for (long j = 0; j < n; ++j) buf[off + j] = u[static_cast<std::size_t>(j)];
        for (long j = 0; j < off; ++j) buf[off + n + j] = 1.0;
        fftw_execute(fwd);
        double scale = 1.0 / static_cast<double>(fft_n);
        for (std::size_t j = 0; j <= fft_n / 2; ++j) {
            double re = freq[j][0] * ker_hat[j][0] - freq[j][1] * ker_hat[j][1];
            double im = freq[j][0] * ker_hat[j][1] + freq[j][1] * ker_hat[j][0];
            freq[j][0] = re * scale;
            freq[j][1] = im * scale;
        }
        fftw_execute(bwd);
        out.resize(static_cast<std::size_t>(n));
        for (long i = 0; i < n; ++i) {
            double ui = u[static_cast<std::size_t>(i)];
            out[static_cast<std::size_t>(i)] =
                c_sum * ui - buf[i + 2 * off] + 2.0 * ui * tail_w;
        }
    }
};

double interp_root(const Tabulated1D& g, double lo, double hi) {
    double flo = g(lo);
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = g(mid);
        if (fm == 0.0 || hi - lo < 1e-14) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// abscissa where the profile crosses `level`, by bisection on the interpolant
double crossing(const Tabulated1D& g, double level, double lo, double hi) {
    double flo = g(lo) - level;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = g(mid) - level;
        if (fm == 0.0 || hi - lo < 1e-13) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

TailFit fit_tail_no_gate(const LayerProfile& profile);

}  // namespace

void Nonlinearity::validate() const {
    if (!f || !fprime) throw std::invalid_argument("Nonlinearity: missing evaluators");
    if (kappa <= 0.0 || kappa >= 1.0) throw std::invalid_argument("Nonlinearity: kappa not in (0,1)");
    if (c_kappa <= 0.0) throw std::invalid_argument("Nonlinearity: c_kappa must be positive");
    if (std::abs(f(-1.0)) > 1e-12 || std::abs(f(1.0)) > 1e-12)
        throw std::invalid_argument("Nonlinearity: f must vanish at -1 and 1");
    for (int i = 0; i <= 32; ++i) {
        double t = static_cast<double>(i) / 32.0 * kappa;
        if (fprime(1.0 - t) >= -c_kappa || fprime(-1.0 + t) >= -c_kappa)
            throw std::invalid_argument("Nonlinearity: f' not below -c_kappa near the wells");
    }
}

Nonlinearity cubic_double_well() {
    Nonlinearity f;
    f.f = [](double u) { return u - u * u * u; };
    f.fprime = [](double u) { return 1.0 - 3.0 * u * u; };
    f.kappa = 0.3;
    f.c_kappa = 0.1;
    f.potential = [](double u) {
        double w = 1.0 - u * u;
        return 0.25 * w * w;
    };
    return f;
}

Tabulated1D LayerProfile::interpolant() const {
    // two +-1 nodes appended on each side make the tabulated function agree
    // exactly with the ghost-node closure the solver discretizes
    std::vector<double> v;
    v.reserve(phi.size() + 4);
    v.push_back(-1.0);
    v.push_back(-1.0);
    v.insert(v.end(), phi.begin(), phi.end());
    v.push_back(1.0);
    v.push_back(1.0);
    return Tabulated1D(x_min - 2.0 * spacing, spacing, std::move(v), ConstantTails{-1.0, 1.0});
}

LayerProfile solve_layer(const Nonlinearity& f, double s, double X_max, std::size_t N,
                         double tol, std::size_t max_iter) {
    f.validate();
    if (s <= 0.0 || s >= 1.0) throw std::invalid_argument("solve_layer: s not in (0,1)");
    if (N < 512) throw std::invalid_argument("solve_layer: need N >= 512");
    if (X_max <= 1.0) throw std::invalid_argument("solve_layer: X_max too small");

    long n = static_cast<long>(N);
    double h = 2.0 * X_max / static_cast<double>(n - 1);
    ToeplitzL L(n, h, s);

    double max_fp = 0.0;
    for (int i = 0; i <= 400; ++i)
        max_fp = std::max(max_fp, std::abs(f.fprime(-1.0 + i / 200.0)));
    double tau = 0.9 / (L.abs_sum + 2.0 * L.tail_w + max_fp);

    std::vector<double> u(N), lu;
    for (long i = 0; i < n; ++i)
        u[static_cast<std::size_t>(i)] = std::tanh(-X_max + h * static_cast<double>(i));

    long inner_lo = n / 4, inner_hi = n - 1 - n / 4;
    double res = 0.0;
    std::size_t iter = 0;
    for (; iter < max_iter; ++iter) {
        L.apply(u, lu);
        res = 0.0;
        for (long i = inner_lo; i <= inner_hi; ++i)
            res = std::max(res, std::abs(lu[static_cast<std::size_t>(i)] -
                                         f.f(u[static_cast<std::size_t>(i)])));
        if (res < tol) break;
        for (long i = 0; i < n; ++i) {
            auto j = static_cast<std::size_t>(i);
            u[j] = std::clamp(u[j] - tau * (lu[j] - f.f(u[j])), -1.0, 1.0);
        }
    }
    if (res >= tol)
        throw std::runtime_error("solve_layer: no convergence after " + std::to_string(iter) +
                                 " iterations (residual " + std::to_string(res) + ")");

    LayerProfile p;
    p.s = s;
    p.x_min = -X_max;
    p.spacing = h;
    p.phi = u;
    p.iterations = iter;

    // translate so the profile vanishes at the origin
    Tabulated1D g0 = p.interpolant();
    long iz = 0;
    for (long i = 0; i + 1 < n; ++i)
        if (u[static_cast<std::size_t>(i)] <= 0.0 && u[static_cast<std::size_t>(i + 1)] > 0.0)
            iz = i;
    double xa = -X_max + h * static_cast<double>(iz);
    double shift = interp_root(g0, xa, xa + h);
    for (long i = 0; i < n; ++i)
        p.phi[static_cast<std::size_t>(i)] =
            std::clamp(g0(-X_max + h * static_cast<double>(i) + shift), -1.0, 1.0);

    for (long i = 0; i + 1 < n; ++i)
        if (p.phi[static_cast<std::size_t>(i)] >= p.phi[static_cast<std::size_t>(i + 1)])
            throw std::runtime_error("solve_layer: profile lost monotonicity");

    L.apply(p.phi, lu);
    p.residual = 0.0;
    for (long i = inner_lo; i <= inner_hi; ++i)
        p.residual = std::max(p.residual, std::abs(lu[static_cast<std::size_t>(i)] -
                                                   f.f(p.phi[static_cast<std::size_t>(i)])));
    p.iterations = iter;

    TailFit fit = fit_tail_no_gate(p);
    p.gamma_fit = fit.gamma;
    p.c_minus = fit.c_minus;
    p.c_plus = fit.c_plus;
    p.fit_r2 = fit.r2;
    // forcing the closure to +-1 beyond the box perturbs L phi inside the
    // inner half by about the fitted tail mass past X_max
    p.tail_truncation = (p.c_plus + p.c_minus) * std::pow(0.5 * X_max, -fit.gamma - s) / (2.0 * s);

    Tabulated1D g = p.interpolant();
    double d = crossing(g, 1.0 - f.kappa, 0.0, X_max);
    double dm = crossing(g, -(1.0 - f.kappa), -X_max, 0.0);
    p.l_kappa = 0.5 * (d - dm);
    return p;
}

TailFit fit_tail(const LayerProfile& profile) {
    TailFit fit = fit_tail_no_gate(profile);
    if (fit.r2 < 0.95)
        throw std::runtime_error("fit_tail: tail not resolved (R^2 = " + std::to_string(fit.r2) +
                                 ")");
    return fit;
}

namespace {

TailFit fit_tail_no_gate(const LayerProfile& profile) {
    // outermost decade that the +-1 closure does not contaminate: the last
    // octave of the box is truncation-dominated and excluded
    double X = std::max(std::abs(profile.x_min), std::abs(profile.x_max()));
    double lo = X / 20.0, hi = X / 2.0;
    long n = static_cast<long>(profile.phi.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    long cnt = 0;
    std::vector<std::pair<double, double>> pts;
    for (long i = 0; i < n; ++i) {
        double x = profile.x_min + profile.spacing * static_cast<double>(i);
        double ax = std::abs(x);
        if (ax < lo || ax > hi) continue;
        double v = x > 0.0 ? 1.0 - profile.phi[static_cast<std::size_t>(i)]
                           : 1.0 + profile.phi[static_cast<std::size_t>(i)];
        if (v <= 0.0) continue;
        double lx = std::log(ax), ly = std::log(v);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        syy += ly * ly;
        ++cnt;
        pts.emplace_back(x, v);
    }
    if (cnt < 8) throw std::runtime_error("fit_tail: too few tail samples");
    double m = static_cast<double>(cnt);
    double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    double icept = (sy - slope * sx) / m;
    double r2num = (m * sxy - sx * sy) * (m * sxy - sx * sy);
    double r2den = (m * sxx - sx * sx) * (m * syy - sy * sy);
    TailFit fit;
    fit.gamma = -slope;
    fit.r2 = r2den > 0.0 ? r2num / r2den : 0.0;
    // per-side amplitudes at the shared exponent
    double ap = 0, am = 0;
    long np = 0, nm = 0;
    for (auto& [x, v] : pts) {
        double c = v * std::pow(std::abs(x), fit.gamma);
        if (x > 0.0) {
            ap += c;
            ++np;
        } else {
            am += c;
            ++nm;
        }
    }
    fit.c_plus = np > 0 ? ap / static_cast<double>(np) : std::exp(icept);
    fit.c_minus = nm > 0 ? am / static_cast<double>(nm) : std::exp(icept);
    return fit;
}

}  // namespace

Tabulated1D rescale_profile(const LayerProfile& profile, double eps) {
    if (eps <= 0.0) throw std::invalid_argument("rescale_profile: epsilon must be positive");
    double scale = std::pow(eps, profile.gamma_fit);
    return Tabulated1D(profile.x_min * eps, profile.spacing * eps, profile.phi,
                       AlgebraicTails{profile.c_minus * scale, profile.c_plus * scale,
                                      profile.gamma_fit});
}

}  // namespace nlac
