#include "nlac/solver.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <thread>

namespace nlac {

namespace {

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

unsigned worker_count() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* cap = std::getenv("NLAC_THREADS")) {
        long v = std::strtol(cap, nullptr, 10);
        if (v >= 1 && v < static_cast<long>(n)) n = static_cast<unsigned>(v);
    }
    return n;
}

// deterministic static partition over [0, count)
template <typename F>
void parallel_rows(std::size_t count, F&& body) {
    unsigned nw = worker_count();
    if (nw <= 1 || count < 2 * nw) {
        for (std::size_t r = 0; r < count; ++r) body(r);
        return;
    }
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < nw; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t r = w; r < count; r += nw) body(r);
        });
    for (auto& t : pool) t.join();
}

}  // namespace

LatticeOperator::LatticeOperator(const GridFunction& proto, const SpectralMeasure& mu, double s) {
    if (s <= 0.0 || s >= 1.0) throw std::invalid_argument("LatticeOperator: s must be in (0,1)");
    mu.validate();
    if (std::holds_alternative<FarPeriodic>(proto.far_field()))
        throw std::invalid_argument("LatticeOperator: periodic closure is not a total datum");
    nx_ = proto.nx();
    ny_ = proto.ny();
    h_ = proto.spacing();
    // pad reach covers the box diameter so everything beyond the cut radius
    // lies outside the box and is governed by the closure rule alone
    kx_ = static_cast<std::size_t>(
              std::ceil(std::sqrt(static_cast<double>(nx_ * nx_ + ny_ * ny_)))) +
          5;
    px_ = next_pow2(nx_ + 2 * kx_);
    py_ = next_pow2(ny_ + 2 * kx_);
    const double r_cut = static_cast<double>(kx_ - 3) * h_;

    pad_.assign(px_ * py_, 0.0);
    conv_.assign(px_ * py_, 0.0);
    spec_.assign(py_ * (px_ / 2 + 1), {0.0, 0.0});
    kernel_hat_.assign(py_ * (px_ / 2 + 1), {0.0, 0.0});

    plan_fwd_ = fftw_plan_dft_r2c_2d(static_cast<int>(py_), static_cast<int>(px_), pad_.data(),
                                     reinterpret_cast<fftw_complex*>(spec_.data()), FFTW_ESTIMATE);
    plan_bwd_ = fftw_plan_dft_c2r_2d(static_cast<int>(py_), static_cast<int>(px_),
                                     reinterpret_cast<fftw_complex*>(spec_.data()), conv_.data(),
                                     FFTW_ESTIMATE);

    // Kernel weights against the bicubic (Catmull-Rom) basis: each mid-field
    // cell scatters int_cell mu(y^) |y|^{-2-s} dy onto the 4x4 stencil of the
    // interpolant, so the lattice operator is the PV integral of the grid's
    // own interpolant up to subcell quadrature.
    const long K = static_cast<long>(kx_) - 3;
    const long W = 2 * (K + 2) + 1;
    std::vector<double> wgt(static_cast<std::size_t>(W * W), 0.0);
    auto wat = [&](long jx, long jy) -> double& {
        return wgt[static_cast<std::size_t>((jy + K + 2) * W + (jx + K + 2))];
    };
    auto cr4 = [](double t, double* w) {
        w[0] = ((-0.5 * t + 1.0) * t - 0.5) * t;
        w[1] = (1.5 * t - 2.5) * t * t + 1.0;
        w[2] = ((-1.5 * t + 2.0) * t + 0.5) * t;
        w[3] = (0.5 * t - 0.5) * t * t;
    };
    for (long cy = -K; cy < K; ++cy) {
        for (long cx = -K; cx < K; ++cx) {
            if (cx >= -1 && cx <= 0 && cy >= -1 && cy <= 0) continue;  // singular block
            double dx = static_cast<double>(cx) + 0.5, dy = static_cast<double>(cy) + 0.5;
            double dist = std::sqrt(dx * dx + dy * dy);
            if (dist * h_ > r_cut) continue;
            int m = std::min(32, std::max(1, static_cast<int>(std::ceil(24.0 / dist))));
            double cell_w = h_ * h_ / static_cast<double>(m * m);
            for (int a = 0; a < m; ++a) {
                double tx = (a + 0.5) / m;
                double y1 = h_ * (static_cast<double>(cx) + tx);
                double bx[4];
                cr4(tx, bx);
                for (int b = 0; b < m; ++b) {
                    double ty = (b + 0.5) / m;
                    double y2 = h_ * (static_cast<double>(cy) + ty);
                    double by[4];
                    cr4(ty, by);
                    double r2 = y1 * y1 + y2 * y2;
                    double r = std::sqrt(r2);
                    double k = cell_w * mu.at({y1 / r, y2 / r, 0.0}) * std::pow(r, -2.0 - s);
                    for (int ai = 0; ai < 4; ++ai)
                        for (int bi = 0; bi < 4; ++bi)
                            wat(cx - 1 + ai, cy - 1 + bi) += k * bx[ai] * by[bi];
                }
            }
        }
    }

    // singular block [-h,h]^2: Taylor correction -1/2 y^T D^2u y folded into
    // the nearest-neighbour weights via centered second differences
    {
        double m11 = 0.0, m22 = 0.0, m12 = 0.0;
        const int n = 256;
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b) {
                double y1 = h_ * (2.0 * (a + 0.5) / n - 1.0);
                double y2 = h_ * (2.0 * (b + 0.5) / n - 1.0);
                double r2 = y1 * y1 + y2 * y2;
                double r = std::sqrt(r2);
                double k = mu.at({y1 / r, y2 / r, 0.0}) * std::pow(r, -s) / r2;
                m11 += y1 * y1 * k;
                m22 += y2 * y2 * k;
                m12 += y1 * y2 * k;
            }
        }
        double cell = 4.0 * h_ * h_ / static_cast<double>(n * n);
        m11 *= cell;
        m22 *= cell;
        m12 *= cell;
        double h2 = h_ * h_;
        wat(1, 0) += 0.5 * m11 / h2;
        wat(-1, 0) += 0.5 * m11 / h2;
        wat(0, 1) += 0.5 * m22 / h2;
        wat(0, -1) += 0.5 * m22 / h2;
        wat(1, 1) += 0.25 * m12 / h2;
        wat(-1, -1) += 0.25 * m12 / h2;
        wat(1, -1) -= 0.25 * m12 / h2;
        wat(-1, 1) -= 0.25 * m12 / h2;
    }

    w_sum_ = 0.0;
    w_abs_ = 0.0;
    for (long jy = -(K + 2); jy <= K + 2; ++jy) {
        for (long jx = -(K + 2); jx <= K + 2; ++jx) {
            double w = wat(jx, jy);
            // basis mass scattered onto the center node cancels against the
            // u(x) term of the integrand, so offset zero drops out entirely
            if ((jx == 0 && jy == 0) || w == 0.0) continue;
            std::size_t ix = static_cast<std::size_t>((jx + static_cast<long>(px_)) %
                                                      static_cast<long>(px_));
            std::size_t iy = static_cast<std::size_t>((jy + static_cast<long>(py_)) %
                                                      static_cast<long>(py_));
            pad_[iy * px_ + ix] += w;
            w_sum_ += w;
            w_abs_ += std::abs(w);
        }
    }

    fftw_execute(static_cast<fftw_plan>(plan_fwd_));
    double scale = 1.0 / static_cast<double>(px_ * py_);
    for (std::size_t k = 0; k < kernel_hat_.size(); ++k) kernel_hat_[k] = spec_[k] * scale;

    // angular mass and pointwise closure integral beyond the cut radius
    double mu_mass = 0.0;
    for (std::size_t k = 0; k < mu.grid.size(); ++k)
        mu_mass += mu.grid.weights[k] * mu.density[k];
    w_tail_ = mu_mass * std::pow(r_cut, -s) / s;

    const FarFieldRule& rule = proto.far_field();
    gtail_.assign(nx_ * ny_, 0.0);
    const double growth = 1.3, reach = 1e4;
    parallel_rows(ny_, [&](std::size_t j) {
        for (std::size_t i = 0; i < nx_; ++i) {
            Vec x = proto.node(i, j);
            double g = 0.0;
            for (std::size_t k = 0; k < mu.grid.size(); ++k) {
                const Vec& th = mu.grid.dirs[k];
                double wk = mu.grid.weights[k] * mu.density[k];
                double ra = r_cut, acc = 0.0;
                while (ra < r_cut * reach) {
                    double rb = ra * growth;
                    double rm = std::sqrt(ra * rb);
                    acc += (std::pow(ra, -s) - std::pow(rb, -s)) / s *
                           eval_far_field(rule, x + rm * th);
                    ra = rb;
                }
                acc += std::pow(ra, -s) / s * eval_far_field(rule, x + 2.0 * ra * th);
                g += wk * acc;
            }
            gtail_[j * nx_ + i] = g;
        }
    });

    // freeze the exterior ring of the padded array at the closure rule
    const long ox = static_cast<long>(kx_);
    for (std::size_t py = 0; py < py_; ++py) {
        for (std::size_t px = 0; px < px_; ++px) {
            long gx = static_cast<long>(px) - ox;
            long gy = static_cast<long>(py) - ox;
            bool interior = gx >= 0 && gx < static_cast<long>(nx_) && gy >= 0 &&
                            gy < static_cast<long>(ny_);
            Vec pos = {proto.center()[0] - proto.half_widths()[0] + h_ * static_cast<double>(gx),
                       proto.center()[1] - proto.half_widths()[1] + h_ * static_cast<double>(gy),
                       0.0};
            pad_[py * px_ + px] = interior ? 0.0 : eval_far_field(rule, pos);
        }
    }

    // convolution of the frozen exterior part alone (interior still zero)
    convolve();
    conv_ext_.assign(nx_ * ny_, 0.0);
    for (std::size_t j = 0; j < ny_; ++j)
        for (std::size_t i = 0; i < nx_; ++i)
            conv_ext_[j * nx_ + i] = conv_[(j + kx_) * px_ + (i + kx_)];
}

LatticeOperator::~LatticeOperator() {
    fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
}

void LatticeOperator::load_interior(const GridFunction& u) const {
    if (u.nx() != nx_ || u.ny() != ny_)
        throw std::invalid_argument("LatticeOperator: grid does not match the operator's box");
    for (std::size_t j = 0; j < ny_; ++j)
        for (std::size_t i = 0; i < nx_; ++i) pad_[(j + kx_) * px_ + (i + kx_)] = u.at(i, j);
}

void LatticeOperator::convolve() const {
    fftw_execute(static_cast<fftw_plan>(plan_fwd_));
    for (std::size_t k = 0; k < kernel_hat_.size(); ++k) spec_[k] *= kernel_hat_[k];
    fftw_execute(static_cast<fftw_plan>(plan_bwd_));
}

void LatticeOperator::apply(const GridFunction& u, std::vector<double>& out) const {
    load_interior(u);
    convolve();
    out.resize(nx_ * ny_);
    double diag = w_sum_ + w_tail_;
    for (std::size_t j = 0; j < ny_; ++j)
        for (std::size_t i = 0; i < nx_; ++i)
            out[j * nx_ + i] =
                diag * u.at(i, j) - conv_[(j + kx_) * px_ + (i + kx_)] - gtail_[j * nx_ + i];
}

double LatticeOperator::dirichlet_energy(const GridFunction& u) const {
    load_interior(u);
    convolve();
    // gradient of this sum w.r.t. u is exactly apply(); additive constants
    // from exterior-exterior pairs are dropped
    double e = 0.0;
    for (std::size_t j = 0; j < ny_; ++j) {
        for (std::size_t i = 0; i < nx_; ++i) {
            double ui = u.at(i, j);
            double cv = conv_[(j + kx_) * px_ + (i + kx_)];
            e += ui * (0.5 * (w_sum_ + w_tail_) * ui - 0.5 * (cv + conv_ext_[j * nx_ + i]) -
                       gtail_[j * nx_ + i]);
        }
    }
    return e * h_ * h_;
}

void SolveConfig::validate() const {
    if (mu == nullptr) throw std::invalid_argument("SolveConfig: measure is required");
    mu->validate();
    if (s <= 0.0 || s >= 1.0) throw std::invalid_argument("SolveConfig: s must be in (0,1)");
    if (eps <= 0.0) throw std::invalid_argument("SolveConfig: eps must be positive");
    if (h_grid <= 0.0) throw std::invalid_argument("SolveConfig: h_grid must be positive");
    if (half_widths[0] <= 0.0 || half_widths[1] <= 0.0)
        throw std::invalid_argument("SolveConfig: box half-widths must be positive");
    if (tau_safety <= 0.0 || tau_safety > 0.9)
        throw std::invalid_argument("SolveConfig: tau * stability bound must stay <= 0.9");
    if (max_iters < 1 || tol <= 0.0 || energy_every < 1)
        throw std::invalid_argument("SolveConfig: bad iteration controls");
    f.validate();
    if (std::holds_alternative<FarPeriodic>(exterior))
        throw std::invalid_argument("SolveConfig: exterior datum must be total");
}

namespace {

// pool-adjacent-violators projection onto non-decreasing sequences
void pava_nondecreasing(double* v, std::size_t n, std::size_t stride) {
    std::vector<double> mean(n), weight(n);
    std::vector<std::size_t> count(n);
    std::size_t blocks = 0;
    for (std::size_t k = 0; k < n; ++k) {
        mean[blocks] = v[k * stride];
        weight[blocks] = 1.0;
        count[blocks] = 1;
        ++blocks;
        while (blocks > 1 && mean[blocks - 2] > mean[blocks - 1]) {
            double wsum = weight[blocks - 2] + weight[blocks - 1];
            mean[blocks - 2] =
                (mean[blocks - 2] * weight[blocks - 2] + mean[blocks - 1] * weight[blocks - 1]) /
                wsum;
            weight[blocks - 2] = wsum;
            count[blocks - 2] += count[blocks - 1];
            --blocks;
        }
    }
    std::size_t k = 0;
    for (std::size_t b = 0; b < blocks; ++b)
        for (std::size_t c = 0; c < count[b]; ++c, ++k) v[k * stride] = mean[b];
}

std::function<double(double)> make_potential(const Nonlinearity& f) {
    if (f.potential) return f.potential;
    // W(u) = int_u^1 f, accumulated on a fine grid with 2-point Gauss cells
    const int n = 2048;
    const double h = 2.0 / n;
    const double g = 0.5 / std::sqrt(3.0);
    std::vector<double> w(n + 1);
    w[n] = 0.0;
    for (int k = n - 1; k >= 0; --k) {
        double xm = -1.0 + h * (k + 0.5);
        w[k] = w[k + 1] + 0.5 * h * (f.f(xm - g * h) + f.f(xm + g * h));
    }
    auto tab = std::make_shared<Tabulated1D>(-1.0, h, std::move(w),
                                             ConstantTails{0.0, 0.0});
    return [tab](double u) { return (*tab)(u); };
}

}  // namespace

GridFunction solve_box(const SolveConfig& cfg, SolveDiagnostics& diag) {
    cfg.validate();
    diag = SolveDiagnostics{};

    GridFunction u(cfg.center, cfg.half_widths, cfg.h_grid, cfg.exterior);
    u.fill_from_far_field();
    LatticeOperator op(u, *cfg.mu, cfg.s);

    const double c = std::pow(cfg.eps, -cfg.s);
    double max_fp = 0.0;
    for (int k = 0; k <= 200; ++k)
        max_fp = std::max(max_fp, std::abs(cfg.f.fprime(-1.0 + 0.01 * k)));
    const double tau = cfg.tau_safety / (op.diag_weight() + c * max_fp);
    diag.tau = tau;

    auto potential = make_potential(cfg.f);
    const double lim = 1.0 - 1e-12;
    std::vector<double> lu;
    double min_res = std::numeric_limits<double>::infinity();

    for (int it = 0; it < cfg.max_iters; ++it) {
        op.apply(u, lu);
        double res = 0.0;
        for (std::size_t k = 0; k < lu.size(); ++k) {
            lu[k] -= c * cfg.f.f(u.values()[k]);
            res = std::max(res, std::abs(lu[k]));
        }
        diag.residual_history.push_back(res);
        diag.final_residual = res;
        diag.iterations = it;
        if (it % cfg.energy_every == 0) {
            double e = op.dirichlet_energy(u);
            for (double v : u.values()) e += c * potential(v) * cfg.h_grid * cfg.h_grid;
            diag.energy_history.push_back(e);
        }
        if (res < cfg.tol) return u;
        min_res = std::min(min_res, res);
        if (it > 10 && res > 10.0 * min_res) {
            diag.diverged = true;
            throw std::runtime_error("solve_box: residual grew 10x from its minimum at iteration " +
                                     std::to_string(it) + "; history kept in diagnostics");
        }
        for (std::size_t k = 0; k < lu.size(); ++k)
            u.values()[k] = std::clamp(u.values()[k] - tau * lu[k], -lim, lim);
        if (cfg.monotone_projection)
            for (std::size_t i = 0; i < u.nx(); ++i)
                pava_nondecreasing(u.values().data() + i, u.ny(), u.nx());
        diag.iterations = it + 1;
    }
    return u;
}

GridFunction residual_map(const GridFunction& u, const SolveConfig& cfg) {
    LatticeOperator op(u, *cfg.mu, cfg.s);
    std::vector<double> lu;
    op.apply(u, lu);
    const double c = std::pow(cfg.eps, -cfg.s);
    GridFunction r(u.center(), u.half_widths(), u.spacing(), FarConstant{0.0});
    for (std::size_t k = 0; k < lu.size(); ++k)
        r.values()[k] = lu[k] - c * cfg.f.f(u.values()[k]);
    return r;
}

DecayFit decay_audit(const GridFunction& u, double eps, double kappa,
                     const std::vector<std::pair<Vec, double>>& balls) {
    if (eps <= 0.0 || kappa <= 0.0 || kappa >= 1.0)
        throw std::invalid_argument("decay_audit: need eps > 0 and kappa in (0,1)");
    DecayFit fit;
    for (const auto& [center, R] : balls) {
        if (R <= 0.0) throw std::invalid_argument("decay_audit: ball radius must be positive");
        bool ok = true;
        for (int a = 0; a < 16 && ok; ++a) {
            double th = 2.0 * M_PI * a / 16.0;
            for (int b = 1; b <= 8 && ok; ++b) {
                Vec p = center + (R * b / 8.0) * Vec{std::cos(th), std::sin(th), 0.0};
                if (u.eval(p) < 1.0 - kappa) ok = false;
            }
        }
        if (!ok || u.eval(center) < 1.0 - kappa) {
            ++fit.skipped_outside;
            continue;
        }
        double d = 1.0 - u.eval(center);
        if (d <= 1e-15) {
            ++fit.skipped_degenerate;
            continue;
        }
        fit.eps_over_R.push_back(eps / R);
        fit.one_minus_u.push_back(d);
    }
    fit.used = static_cast<int>(fit.eps_over_R.size());
    if (fit.used < 2) throw std::invalid_argument("decay_audit: fewer than two admissible balls");
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (int k = 0; k < fit.used; ++k) {
        double x = std::log(fit.eps_over_R[k]), y = std::log(fit.one_minus_u[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    double n = fit.used;
    fit.gamma = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.log_c = (sy - fit.gamma * sx) / n;
    double denom = (n * sxx - sx * sx) * (n * syy - sy * sy);
    fit.r2 = denom > 0.0 ? (n * sxy - sx * sy) * (n * sxy - sx * sy) / denom : 1.0;
    return fit;
}

}  // namespace nlac
