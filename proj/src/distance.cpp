#include "nlac/distance.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

namespace nlac {

namespace {

void require(bool c, const char* msg) {
    if (!c) throw std::invalid_argument(msg);
}

// golden-section minimization; f assumed unimodal on [a,b] near its minimum
template <class F>
double golden_min(F&& f, double a, double b, double tol) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    // keep the stopping width representable: far from the origin an absolute
    // tolerance can drop below the spacing of doubles and never be reached
    tol = std::max(tol, 8.0 * std::numeric_limits<double>::epsilon() *
                            (std::abs(a) + std::abs(b) + 1.0));
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

std::uint64_t bits(double x) {
    std::uint64_t u;
    std::memcpy(&u, &x, sizeof(u));
    return u;
}

}  // namespace

double GraphSet::xi(double r) const { return std::pow(1.0 + r * r, 0.5 * (1.0 + alpha)) - 1.0; }

double GraphSet::xi_prime(double r) const {
    return (1.0 + alpha) * r * std::pow(1.0 + r * r, 0.5 * (alpha - 1.0));
}

double GraphSet::xi_second(double r) const {
    double p = 0.5 * (1.0 + alpha);
    return 2.0 * p * std::pow(1.0 + r * r, p - 1.0) +
           4.0 * p * (p - 1.0) * r * r * std::pow(1.0 + r * r, p - 2.0);
}

bool GraphSet::inside(const Vec& x) const { return x[1] >= b * xi(x[0]); }

void GraphSet::validate() const {
    require(b >= 0.0, "GraphSet: amplitude b must be >= 0");
    require(alpha > 0.0 && alpha < 1.0, "GraphSet: exponent alpha must be in (0,1)");
    require(dim == 2, "GraphSet: only n = 2 graphs are supported");
    require(xi(0.0) == 0.0, "GraphSet: xi(0) != 0");
    for (int k = -40; k <= 40; ++k) {
        double r = 0.25 * k;
        // midpoint convexity
        require(xi(r + 0.125) <= 0.5 * (xi(r) + xi(r + 0.25)) + 1e-12, "GraphSet: xi not convex");
        // |D2 xi| <= (1+alpha)(1+r^2)^{(alpha-1)/2}
        double bound = (1.0 + alpha) * std::pow(1.0 + r * r, 0.5 * (alpha - 1.0));
        require(std::abs(xi_second(r)) <= bound + 1e-12, "GraphSet: second-derivative bound fails");
    }
}

void SignedDistanceField::validate() const {
    gamma.validate();
    body.validate();
}

double signed_distance(const SignedDistanceField& field, const Vec& x) {
    auto key = std::make_pair(bits(x[0]), bits(x[1]));
    {
        std::lock_guard<std::mutex> lk(field.cache_mutex);
        auto it = field.cache.find(key);
        if (it != field.cache.end()) return it->second;
    }

    const GraphSet& g = field.gamma;
    auto gauge_to = [&](double zp) {
        Vec z = {zp, g.b * g.xi(zp), 0.0};
        return norm_C(field.body, x - z);
    };
    // the projection is euclidean-close to x' within a gauge-equivalence factor
    double vertical = std::abs(x[1] - g.b * g.xi(x[0]));
    double window = 1.0 + 2.0 * vertical * field.body.rho_prime / field.body.rho;
    double lo = x[0] - window, hi = x[0] + window;
    // multi-start: 9 bracket searches over the window, each with a coarse scan
    // before golden-section refinement (the polytope gauge makes the objective
    // piecewise smooth, so a single descent per bracket can stall on a kink)
    double best = std::numeric_limits<double>::infinity(), zbest = lo;
    for (int k = 0; k < 9; ++k) {
        double a = lo + (hi - lo) * k / 9.0;
        double b = lo + (hi - lo) * (k + 1) / 9.0;
        const int nscan = 24;
        int ibest = 0;
        double vbest = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= nscan; ++i) {
            double v = gauge_to(a + (b - a) * i / nscan);
            if (v < vbest) {
                vbest = v;
                ibest = i;
            }
        }
        double cell = (b - a) / nscan;
        double za = a + cell * std::max(0, ibest - 1), zb = a + cell * std::min(nscan, ibest + 1);
        double z = golden_min(gauge_to, za, zb, 1e-12 * (1.0 + window));
        double v = gauge_to(z);
        if (v < best) {
            best = v;
            zbest = z;
        }
    }
    if (zbest - lo < 2.0 * (hi - lo) / 9.0 * 1e-6 || hi - zbest < 2.0 * (hi - lo) / 9.0 * 1e-6)
        field.nonconverged.fetch_add(1, std::memory_order_relaxed);

    double d = g.inside(x) ? best : -best;
    {
        std::lock_guard<std::mutex> lk(field.cache_mutex);
        field.cache.emplace(key, d);
    }
    return d;
}

double lipschitz_audit(const SignedDistanceField& field,
                       const std::vector<std::pair<Vec, Vec>>& pairs) {
    double worst = 0.0;
    for (const auto& [p, q] : pairs) {
        double den = norm_C(field.body, p - q);
        if (den == 0.0) continue;
        worst = std::max(worst, std::abs(signed_distance(field, p) - signed_distance(field, q)) / den);
    }
    return worst;
}

LevelSetGraph level_set_graph(const SignedDistanceField& field, double t, double window,
                              std::size_t samples) {
    require(window > 0.0 && samples >= 5, "level_set_graph: bad window or sample count");
    LevelSetGraph out;
    out.yprime.resize(samples);
    out.G.resize(samples);
    double step = 2.0 * window / static_cast<double>(samples - 1);
    double tol = 1e-10 * window;
    for (std::size_t i = 0; i < samples; ++i) {
        double yp = -window + step * static_cast<double>(i);
        out.yprime[i] = yp;
        double base = field.gamma.b * field.gamma.xi(yp);
        double span = (std::abs(t) + 1.0) * field.body.rho_prime * 2.0 + 1.0;
        double lo = base - span, hi = base + span;
        auto d_at = [&](double yn) { return signed_distance(field, {yp, yn, 0.0}); };
        int widen = 0;
        while (!(d_at(lo) < t && d_at(hi) > t)) {
            lo -= span;
            hi += span;
            span *= 2.0;
            if (++widen > 8)
                throw std::runtime_error("level_set_graph: bisection bracket failed (level set exits window)");
        }
        while (hi - lo > tol) {
            double mid = 0.5 * (lo + hi);
            (d_at(mid) < t ? lo : hi) = mid;
        }
        out.G[i] = 0.5 * (lo + hi);
    }
    out.dG.assign(samples, 0.0);
    out.d2G.assign(samples, 0.0);
    for (std::size_t i = 1; i + 1 < samples; ++i) {
        out.dG[i] = (out.G[i + 1] - out.G[i - 1]) / (2.0 * step);
        out.d2G[i] = (out.G[i + 1] - 2.0 * out.G[i] + out.G[i - 1]) / (step * step);
        out.max_abs_dG = std::max(out.max_abs_dG, std::abs(out.dG[i]));
        out.max_abs_d2G = std::max(out.max_abs_d2G, std::abs(out.d2G[i]));
    }
    return out;
}

TouchReport touching_sphere_check(const SignedDistanceField& field, const Vec& z0, double R,
                                  double t, double tol) {
    require(R > 0.0 && t < R, "touching_sphere_check: need 0 < R and t < R");
    TouchReport rep;

    // boundary point of the gauge ball C_r(z0) in direction angle a
    auto ball_pt = [&](double r, double a) {
        Vec u = {std::cos(a), std::sin(a), 0.0};
        return z0 + (r / norm_C(field.body, u)) * u;
    };
    auto min_on_ball = [&](double r, double* arg_angle) {
        auto f = [&](double a) { return signed_distance(field, ball_pt(r, a)); };
        double best = std::numeric_limits<double>::infinity(), abest = 0.0;
        int m = 720;
        for (int k = 0; k < m; ++k) {
            double a = 2.0 * std::numbers::pi * k / m;
            double v = f(a);
            if (v < best) {
                best = v;
                abest = a;
            }
        }
        double half = 2.0 * std::numbers::pi / m;
        double a = golden_min(f, abest - half, abest + half, 1e-12);
        double v = f(a);
        if (v < best) {
            best = v;
            abest = a;
        }
        if (arg_angle) *arg_angle = abest;
        return best;
    };

    // precondition: C_R(z0) inside {d > 0}, touching {d = 0}
    double touch_angle = 0.0;
    double m0 = min_on_ball(R, &touch_angle);
    if (std::abs(m0) > tol) {
        rep.pass = false;
        rep.detail = "C_R(z0) does not touch {d = 0} (min d on its boundary is " +
                     std::to_string(m0) + ")";
        return rep;
    }
    rep.zbar = ball_pt(R, touch_angle);

    // (i) the shrunk ball stays in {d > t}
    rep.min_d_ball = min_on_ball(R - t, nullptr);
    if (rep.min_d_ball < t - tol) {
        rep.pass = false;
        rep.detail = "min of d over C_{R-t}(z0) fell below t";
    }

    // (ii) the rescaled touching point lies on {d = t}
    Vec p = z0 + ((R - t) / R) * (rep.zbar - z0);
    rep.touch_value = signed_distance(field, p);
    if (std::abs(rep.touch_value - t) > tol) {
        rep.pass = false;
        rep.detail += std::string(rep.detail.empty() ? "" : "; ") +
                      "rescaled touching point misses the level t";
    }
    return rep;
}

}  // namespace nlac
