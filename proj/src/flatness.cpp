#include "nlac/flatness.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <thread>

namespace nlac {

namespace {

struct TransitionSet {
    std::vector<double> px, py;  // coordinates relative to the ball center
    std::vector<double> uval;    // u at every ball node, parallel arrays below
    std::vector<double> bx, by;
};

TransitionSet collect(const GridFunction& u, double kappa, const Vec& center, double radius) {
    if (kappa <= 0.0 || kappa >= 1.0)
        throw std::invalid_argument("measure_flatness: kappa must be in (0,1)");
    if (radius <= 0.0) throw std::invalid_argument("measure_flatness: radius must be positive");
    TransitionSet t;
    double r2 = radius * radius;
    for (std::size_t j = 0; j < u.ny(); ++j) {
        for (std::size_t i = 0; i < u.nx(); ++i) {
            Vec p = u.node(i, j);
            double dx = p[0] - center[0], dy = p[1] - center[1];
            if (dx * dx + dy * dy > r2) continue;
            double v = u.at(i, j);
            t.bx.push_back(dx);
            t.by.push_back(dy);
            t.uval.push_back(v);
            if (v >= -1.0 + kappa && v <= 1.0 - kappa) {
                t.px.push_back(dx);
                t.py.push_back(dy);
            }
        }
    }
    if (t.px.empty())
        throw std::invalid_argument("measure_flatness: empty transition set in the ball");
    return t;
}

double slab_half_width(const TransitionSet& t, double theta) {
    double c = std::cos(theta), s = std::sin(theta);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t k = 0; k < t.px.size(); ++k) {
        double pr = c * t.px[k] + s * t.py[k];
        lo = std::min(lo, pr);
        hi = std::max(hi, pr);
    }
    return 0.5 * (hi - lo);
}

}  // namespace

SlabFit measure_flatness(const GridFunction& u, double kappa, const Vec& center, double radius) {
    TransitionSet t = collect(u, kappa, center, radius);

    // 2-degree grid then golden-section refinement over the half-circle
    const double step = M_PI / 90.0;
    double best = 0.0, best_w = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 90; ++k) {
        double w = slab_half_width(t, k * step);
        if (w < best_w) {
            best_w = w;
            best = k * step;
        }
    }
    double a = best - step, b = best + step;
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
    double f1 = slab_half_width(t, x1), f2 = slab_half_width(t, x2);
    while (b - a > 1e-7) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = slab_half_width(t, x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = slab_half_width(t, x2);
        }
    }
    double theta = 0.5 * (a + b);
    if (slab_half_width(t, best) < slab_half_width(t, theta)) theta = best;

    SlabFit fit;
    Vec omega = {std::cos(theta), std::sin(theta), 0.0};
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t k = 0; k < t.px.size(); ++k) {
        double pr = omega[0] * t.px[k] + omega[1] * t.py[k];
        lo = std::min(lo, pr);
        hi = std::max(hi, pr);
    }
    // orient omega along the increase of u
    double corr = 0.0;
    for (std::size_t k = 0; k < t.bx.size(); ++k)
        corr += t.uval[k] * (omega[0] * t.bx[k] + omega[1] * t.by[k]);
    if (corr < 0.0) {
        omega = {-omega[0], -omega[1], 0.0};
        double tmp = lo;
        lo = -hi;
        hi = -tmp;
    }
    fit.omega = omega;
    fit.slab_lo = lo;
    fit.slab_hi = hi;
    fit.a = 0.5 * (hi - lo) / radius;

    // trapping inclusions: past the slab the phase must be settled
    bool minus_ok = true, plus_ok = true;
    for (std::size_t k = 0; k < t.bx.size(); ++k) {
        double pr = omega[0] * t.bx[k] + omega[1] * t.by[k];
        if (pr < lo - 1e-12 && t.uval[k] > -1.0 + kappa) minus_ok = false;
        if (pr > hi + 1e-12 && t.uval[k] < 1.0 - kappa) plus_ok = false;
    }
    fit.minus_inclusion = minus_ok;
    fit.plus_inclusion = plus_ok;
    return fit;
}

void FlatnessReport::validate() const {
    if (alpha0 <= 0.0) throw std::invalid_argument("FlatnessReport: alpha0 must be positive");
    for (const auto& e : scales) {
        if (!e.valid) continue;
        if (e.fit.a < 0.0) throw std::invalid_argument("FlatnessReport: negative flatness");
        if (std::abs(norm(e.fit.omega) - 1.0) > 1e-9)
            throw std::invalid_argument("FlatnessReport: omega not unit");
    }
    if (a > 0.0) {
        int expect = std::max(0, static_cast<int>(std::floor(std::log2(1.0 / a) / alpha0)));
        if (expect != j_a) throw std::invalid_argument("FlatnessReport: j_a inconsistent");
    }
}

FlatnessReport dyadic_flatness_scan(const GridFunction& u, double kappa, const Vec& center,
                                    int j_min, int j_max, double alpha0, int m0) {
    if (j_max < j_min) throw std::invalid_argument("dyadic_flatness_scan: empty scale range");
    if (alpha0 <= 0.0) throw std::invalid_argument("dyadic_flatness_scan: alpha0 must be positive");
    FlatnessReport rep;
    rep.alpha0 = alpha0;
    rep.m0 = m0;
    rep.scales.resize(static_cast<std::size_t>(j_max - j_min + 1));

    std::vector<std::thread> pool;
    for (int j = j_min; j <= j_max; ++j) {
        pool.emplace_back([&, j] {
            ScaleEntry& e = rep.scales[static_cast<std::size_t>(j - j_min)];
            e.j = j;
            e.radius = std::ldexp(1.0, j);
            try {
                e.fit = measure_flatness(u, kappa, center, e.radius);
                e.valid = true;
            } catch (const std::exception& ex) {
                e.error = ex.what();  // partial scans are reported, not fatal
            }
        });
    }
    for (auto& t : pool) t.join();

    const ScaleEntry* first = nullptr;
    for (const auto& e : rep.scales)
        if (e.valid) {
            first = &e;
            break;
        }
    if (first == nullptr) throw std::invalid_argument("dyadic_flatness_scan: no scale measurable");
    rep.a = first->fit.a;
    rep.j_a = rep.a > 0.0 && rep.a < 1.0
                  ? static_cast<int>(std::floor(std::log2(1.0 / rep.a) / alpha0))
                  : 0;
    double k_real = std::log2(1.0 / std::max(rep.a, 1e-300)) / alpha0 - m0;
    rep.k_a = std::max(0, static_cast<int>(std::floor(k_real)));

    double bar = std::pow(2.0, -alpha0);
    for (std::size_t k = 0; k + 1 < rep.scales.size(); ++k) {
        const auto& small = rep.scales[k];
        const auto& large = rep.scales[k + 1];
        if (!small.valid || !large.valid) continue;
        double ratio = large.fit.a / small.fit.a;
        rep.ratios.push_back(ratio);
        rep.ratio_pass.push_back(ratio <= bar);
        if (ratio > bar) rep.mesoscale_index = static_cast<int>(rep.ratios.size()) - 1;
    }
    return rep;
}

RealignReport realign_directions(const FlatnessReport& report) {
    RealignReport out;
    std::vector<const ScaleEntry*> valid;
    for (const auto& e : report.scales)
        if (e.valid) valid.push_back(&e);
    if (valid.empty()) return out;

    out.omega0 = valid.front()->fit.omega;
    double a = std::max(report.a, 1e-300);
    double c_step = 0.0, c_geo = 0.0;
    for (std::size_t k = 0; k < valid.size(); ++k) {
        Vec w = valid[k]->fit.omega;
        if (dot(w, out.omega0) < 0.0) w = {-w[0], -w[1], -w[2]};
        double drift0 = norm(w - out.omega0);
        out.widths.push_back(valid[k]->fit.a + drift0);
        c_geo = std::max(c_geo, drift0 / (a * std::pow(2.0, valid[k]->j * report.alpha0)));
        if (k + 1 < valid.size()) {
            Vec wn = valid[k + 1]->fit.omega;
            if (dot(wn, out.omega0) < 0.0) wn = {-wn[0], -wn[1], -wn[2]};
            double d = norm(wn - w);
            out.drifts.push_back(d);
            c_step = std::max(c_step, d / (a * std::pow(2.0, valid[k]->j * report.alpha0)));
        }
    }
    out.drift_c = std::max(c_step, c_geo);
    // summing the per-step geometric series must dominate the direct drift
    double series = c_step / (std::pow(2.0, report.alpha0) - 1.0) + 1e-12;
    out.geometric_bound_ok = c_geo <= std::max(series, c_step + 1e-12);
    return out;
}

SlidingReport sliding_test(const GridFunction& u, const Vec& e_prime, double eps_tilt,
                           const std::vector<double>& t_schedule, double kappa,
                           double tolerance) {
    if (std::abs(norm(e_prime) - 1.0) > 1e-9 || std::abs(e_prime[1]) > 1e-12)
        throw std::invalid_argument("sliding_test: e' must be a horizontal unit direction");
    if (t_schedule.empty()) throw std::invalid_argument("sliding_test: empty shift schedule");
    for (std::size_t k = 0; k < t_schedule.size(); ++k) {
        if (t_schedule[k] < 0.0 || (k > 0 && t_schedule[k] >= t_schedule[k - 1]))
            throw std::invalid_argument("sliding_test: shifts must decrease strictly toward 0");
    }

    SlidingReport rep;
    rep.tolerance = tolerance;
    double root = std::sqrt(1.0 + eps_tilt * eps_tilt);
    rep.e = {e_prime[0] / root, eps_tilt / root, 0.0};
    rep.shifts = t_schedule;

    for (double t : t_schedule) {
        double mn = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < u.ny(); ++j)
            for (std::size_t i = 0; i < u.nx(); ++i) {
                Vec x = u.node(i, j);
                mn = std::min(mn, u.at(i, j) - u.eval(x - t * rep.e));
            }
        rep.minima.push_back(mn);
    }

    double t0 = t_schedule.front();
    rep.trapping_ok = true;
    for (std::size_t j = 0; j < u.ny() && rep.trapping_ok; ++j)
        for (std::size_t i = 0; i < u.nx(); ++i)
            if (u.at(i, j) <= 1.0 - kappa &&
                u.eval(u.node(i, j) - t0 * rep.e) > -1.0 + kappa) {
                rep.trapping_ok = false;
                break;
            }

    rep.monotone = std::all_of(rep.minima.begin(), rep.minima.end(),
                               [&](double m) { return m >= -tolerance; });
    return rep;
}

GraphReport graph_extraction_and_lbar_check(const GridFunction& u, double kappa, double a_norm,
                                            double window, const SpectralMeasure& mu, double s,
                                            const QuadratureSpec& q) {
    if (a_norm <= 0.0) throw std::invalid_argument("graph extraction: a_norm must be positive");
    GraphReport rep;
    double h = u.spacing();
    for (std::size_t i = 0; i < u.nx(); ++i) {
        double x = u.node(i, 0)[0];
        if (std::abs(x - u.center()[0]) > window) continue;
        // the transition band must be one contiguous monotone crossing
        long cross = -1;
        int band_runs = 0;
        bool in_band = false;
        for (std::size_t j = 0; j + 1 < u.ny(); ++j) {
            double v = u.at(i, j);
            bool banded = v >= -1.0 + kappa && v <= 1.0 - kappa;
            if (banded && !in_band) ++band_runs;
            in_band = banded;
            if (u.at(i, j) <= 0.0 && u.at(i, j + 1) > 0.0) {
                if (cross >= 0)
                    throw std::invalid_argument("graph extraction: non-graphical transition set");
                cross = static_cast<long>(j);
            }
            if (u.at(i, j) > 0.0 && u.at(i, j + 1) <= 0.0)
                throw std::invalid_argument("graph extraction: non-graphical transition set");
        }
        if (cross < 0 || band_runs > 1)
            throw std::invalid_argument("graph extraction: non-graphical transition set");
        double ya = u.node(i, static_cast<std::size_t>(cross))[1], yb = ya + h;
        for (int it = 0; it < 50; ++it) {
            double ym = 0.5 * (ya + yb);
            (u.eval({x, ym, 0.0}) <= 0.0 ? ya : yb) = ym;
        }
        rep.xs.push_back(x);
        rep.g.push_back(0.5 * (ya + yb));
        rep.g_norm.push_back(0.5 * (ya + yb) / a_norm);
    }
    if (rep.xs.size() < 4)
        throw std::invalid_argument("graph extraction: window holds fewer than 4 columns");

    double n = static_cast<double>(rep.xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < rep.xs.size(); ++k) {
        sx += rep.xs[k];
        sy += rep.g_norm[k];
        sxx += rep.xs[k] * rep.xs[k];
        sxy += rep.xs[k] * rep.g_norm[k];
    }
    rep.c1 = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    rep.c0 = (sy - rep.c1 * sx) / n;
    for (std::size_t k = 0; k < rep.xs.size(); ++k)
        rep.sup_affine_dist =
            std::max(rep.sup_affine_dist, std::abs(rep.g_norm[k] - rep.c0 - rep.c1 * rep.xs[k]));

    // smoothed extraction: interpolated inside the window, affine beyond
    auto tab = std::make_shared<Tabulated1D>(rep.xs.front(), h, rep.g_norm,
                                             ConstantTails{rep.g_norm.front(), rep.g_norm.back()});
    double x_lo = rep.xs.front() + h, x_hi = rep.xs.back() - h;
    double c0 = rep.c0, c1 = rep.c1;
    LbarFunction hf;
    hf.dim_prime = 1;
    hf.growth_exponent = 1.0;
    hf.grad_step = h;
    hf.f = [tab, x_lo, x_hi, c0, c1](Vec p) {
        if (p[0] < x_lo || p[0] > x_hi) return c0 + c1 * p[0];
        return (*tab)(p[0]);
    };
    for (std::size_t k = 0; k < rep.xs.size(); ++k) {
        if (std::abs(rep.xs[k] - u.center()[0]) > 0.5 * window) continue;
        if (k % std::max<std::size_t>(1, rep.xs.size() / 16) != 0) continue;
        double v = eval_Lbar(hf, mu, s, {rep.xs[k], 0.0, 0.0}, q);
        rep.lbar.push_back(v);
        rep.lbar_max = std::max(rep.lbar_max, std::abs(v));
    }
    return rep;
}

}  // namespace nlac
