#include "nlac/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace nlac {

namespace {
constexpr double kPi = std::numbers::pi;

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

bool finite(const Vec& p) {
    return std::isfinite(p[0]) && std::isfinite(p[1]) && std::isfinite(p[2]);
}
}  // namespace

double norm(const Vec& a) { return std::sqrt(norm2(a)); }

Vec normalized(const Vec& a) {
    double n = norm(a);
    if (n == 0.0) throw std::invalid_argument("cannot normalize zero vector");
    return {a[0] / n, a[1] / n, a[2] / n};
}

std::size_t SphereGrid::antipode(std::size_t k) const {
    std::size_t m = dirs.size();
    if (dim == 2) return (k + m / 2) % m;
    // n=3 grid stores pairs contiguously: (p, -p)
    return k ^ 1u;
}

SphereGrid make_sphere_grid(int dim, std::size_t count) {
    require(dim == 2 || dim == 3, "dimension must be 2 or 3");
    require(count >= 8, "sphere grid needs at least 8 directions");
    SphereGrid g;
    g.dim = dim;
    if (dim == 2) {
        if (count % 4 != 0) count += 4 - count % 4;  // keep +/-e1, +/-e2 on the grid
        g.dirs.resize(count);
        g.weights.assign(count, 2.0 * kPi / static_cast<double>(count));
        // second half by exact negation so antipodal symmetry is bit-exact
        for (std::size_t k = 0; k < count / 2; ++k) {
            double t = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(count);
            g.dirs[k] = {std::cos(t), std::sin(t), 0.0};
            g.dirs[k + count / 2] = {-g.dirs[k][0], -g.dirs[k][1], 0.0};
        }
    } else {
        // Fibonacci lattice on the upper hemisphere, mirrored for evenness
        std::size_t half = (count + 1) / 2;
        g.dirs.reserve(2 * half);
        const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
        for (std::size_t k = 0; k < half; ++k) {
            double z = (static_cast<double>(k) + 0.5) / static_cast<double>(half);  // (0,1]
            double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            double phi = 2.0 * kPi * static_cast<double>(k) / golden;
            Vec p = {r * std::cos(phi), r * std::sin(phi), z};
            g.dirs.push_back(p);
            g.dirs.push_back({-p[0], -p[1], -p[2]});
        }
        g.weights.assign(g.dirs.size(), 4.0 * kPi / static_cast<double>(g.dirs.size()));
    }
    return g;
}

double SpectralMeasure::at(const Vec& direction) const {
    Vec d = normalized(direction);
    double best = -2.0;
    std::size_t arg = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        double c = dot(d, grid.dirs[k]);
        if (c > best) {
            best = c;
            arg = k;
        }
    }
    return density[arg];
}

void SpectralMeasure::validate() const {
    require(dim == grid.dim, "measure/grid dimension mismatch");
    require(density.size() == grid.size(), "density size mismatch");
    require(lambda > 0.0 && Lambda >= lambda, "ellipticity bounds must satisfy 0 < lambda <= Lambda");
    for (std::size_t k = 0; k < grid.size(); ++k) {
        require(std::abs(norm(grid.dirs[k]) - 1.0) < 1e-12, "direction not unit");
        require(density[k] >= lambda - 1e-12 && density[k] <= Lambda + 1e-12,
                "density outside [lambda, Lambda]");
        std::size_t a = grid.antipode(k);
        require(norm(grid.dirs[k] + grid.dirs[a]) < 1e-12, "antipodal direction missing");
        require(std::abs(density[k] - density[a]) < 1e-12, "density not even");
    }
}

SpectralMeasure constant_measure(int dim, std::size_t count, double value) {
    SpectralMeasure mu;
    mu.dim = dim;
    mu.grid = make_sphere_grid(dim, count);
    mu.density.assign(mu.grid.size(), value);
    mu.lambda = mu.Lambda = value;
    mu.validate();
    return mu;
}

void ConvexBodyK::validate() const {
    require(dim == grid.dim, "body/grid dimension mismatch");
    require(radial.size() == grid.size(), "radial size mismatch");
    for (std::size_t k = 0; k < grid.size(); ++k) {
        require(radial[k] > 0.0, "radial function must be positive");
        require(radial[k] <= 1.0 + 1e-12, "K must be contained in the unit ball");
        require(std::abs(radial[k] - radial[grid.antipode(k)]) < 1e-12, "K not even");
    }
    // sampled convexity: the boundary polygon r(theta) e(theta) must turn
    // consistently (equivalent to midpoint convexity of the gauge on the grid)
    if (dim == 2) {
        std::size_t m = grid.size();
        for (std::size_t k = 0; k < m; ++k) {
            Vec a = radial[k] * grid.dirs[k];
            Vec b = radial[(k + 1) % m] * grid.dirs[(k + 1) % m];
            Vec c = radial[(k + 2) % m] * grid.dirs[(k + 2) % m];
            double cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
            require(cross > -1e-12, "radial function induces a non-convex gauge");
        }
    }
}

ConvexBodyK ball_body(int dim, std::size_t count, double radius) {
    require(radius > 0.0 && radius <= 1.0, "ball radius must be in (0,1]");
    ConvexBodyK body;
    body.dim = dim;
    body.grid = make_sphere_grid(dim, count);
    body.radial.assign(body.grid.size(), radius);
    body.r_touch = radius;
    body.validate();
    return body;
}

ConvexBodyK ellipse_body(int dim, std::size_t count, double ax, double ay, double az) {
    require(ax > 0.0 && ay > 0.0 && az > 0.0, "semi-axes must be positive");
    require(ax <= 1.0 && ay <= 1.0 && az <= 1.0, "H1 requires K inside the unit ball");
    ConvexBodyK body;
    body.dim = dim;
    body.grid = make_sphere_grid(dim, count);
    body.radial.resize(body.grid.size());
    for (std::size_t k = 0; k < body.grid.size(); ++k) {
        const Vec& t = body.grid.dirs[k];
        double q = t[0] * t[0] / (ax * ax) + t[1] * t[1] / (ay * ay);
        if (dim == 3) q += t[2] * t[2] / (az * az);
        body.radial[k] = 1.0 / std::sqrt(q);
    }
    body.r_touch = std::min({ax, ay, dim == 3 ? az : ax});
    // curvature-limited inner touching radius: b^2/a for the tightest pairing
    double mx = std::max({ax, ay, dim == 3 ? az : ay});
    double mn = body.r_touch;
    body.r_touch = mn * mn / mx;
    body.validate();
    return body;
}

double norm_K(const ConvexBodyK& body, const Vec& p) {
    if (!finite(p)) throw std::invalid_argument("norm_K: non-finite point");
    double n = norm(p);
    if (n == 0.0) return 0.0;
    Vec d = {p[0] / n, p[1] / n, p[2] / n};
    // nearest-neighbor radial extension
    double best = -2.0;
    std::size_t arg = 0;
    for (std::size_t k = 0; k < body.grid.size(); ++k) {
        double c = dot(d, body.grid.dirs[k]);
        if (c > best) {
            best = c;
            arg = k;
        }
    }
    return n / body.radial[arg];
}

SpectralMeasure spectral_measure_from_body(const ConvexBodyK& body, double s) {
    require(s > 0.0 && s < 1.0, "order s must be in (0,1)");
    for (double r : body.radial) require(r > 0.0, "body radial function must be positive");
    SpectralMeasure mu;
    mu.dim = body.dim;
    mu.grid = body.grid;
    mu.density.resize(body.radial.size());
    double np_s = static_cast<double>(body.dim) + s;
    for (std::size_t k = 0; k < body.radial.size(); ++k)
        mu.density[k] = std::pow(body.radial[k], np_s);  // ||theta||_K^{-(n+s)} = r(theta)^{n+s}
    mu.lambda = *std::min_element(mu.density.begin(), mu.density.end());
    mu.Lambda = *std::max_element(mu.density.begin(), mu.density.end());
    mu.validate();
    return mu;
}

namespace {

constexpr double kGl8X[4] = {0.1834346424956498, 0.5255324099163290,
                             0.7966664774136267, 0.9602898564975363};
constexpr double kGl8W[4] = {0.3626837833783620, 0.3137066458778873,
                             0.2223810344533745, 0.1012285362903763};

// integral of sin(dist(t))^s * mu(t) over [p,q], where dist(t) is the distance
// of t to the kink set {t0 + j*pi} and [p,q] lies on one side of a kink.
// The substitution w = dist^{1+s} absorbs the |t-t0|^s singularity exactly.
template <class MuFn>
double kink_piece(double p, double q, double t0, double s, MuFn&& mudens) {
    double up = std::abs(std::remainder(p - t0, kPi));
    double uq = std::abs(std::remainder(q - t0, kPi));
    bool fwd = up <= uq;  // dist increasing with t?
    double u1 = fwd ? up : uq, u2 = fwd ? uq : up;
    double w1 = std::pow(u1, 1.0 + s), w2 = std::pow(u2, 1.0 + s);
    double c = 0.5 * (w1 + w2), hw = 0.5 * (w2 - w1);
    if (hw <= 0.0) return 0.0;
    double acc = 0.0;
    for (int i = 0; i < 4; ++i) {
        for (double sg : {1.0, -1.0}) {
            double w = c + sg * hw * kGl8X[i];
            double u = std::pow(w, 1.0 / (1.0 + s));
            double t = fwd ? p + (u - u1) : q - (u - u1);
            acc += kGl8W[i] * std::pow(std::sin(u) / u, s) * mudens(t);
        }
    }
    return hw * acc / (1.0 + s);
}

}  // namespace

double support_function_hL(const SpectralMeasure& mu, double s, const Vec& omega) {
    require(s > 0.0 && s < 1.0, "order s must be in (0,1)");
    require(std::abs(norm(omega) - 1.0) < 1e-9, "omega must be a unit vector");
    double acc = 0.0;
    if (mu.dim == 2) {
        // |omega . theta(t)|^s has kinks where theta is orthogonal to omega; the
        // plain direction-grid sum converges only like da^{1+s} there.  Integrate
        // cell by cell instead (Gauss-Legendre away from the kinks, a singular
        // substitution inside a window around them), with the density
        // interpolated by a Catmull-Rom cubic through its samples.
        Vec om = omega;
        if (om[1] < 0.0 || (om[1] == 0.0 && om[0] < 0.0)) om = -1.0 * om;  // h is even
        const std::size_t m = mu.grid.size();
        const double da = 2.0 * kPi / static_cast<double>(m);
        const double phi = std::atan2(om[1], om[0]);
        const double t0 = phi + 0.5 * kPi;  // kinks at t0 + j*pi
        const double window = 0.5;
        const long lm = static_cast<long>(m);
        auto mudens = [&](double t) {
            double x = t / da;
            double fl = std::floor(x);
            long i = static_cast<long>(fl);
            double tt = x - fl;
            auto at = [&](long j) { return mu.density[static_cast<std::size_t>(((j % lm) + lm) % lm)]; };
            double p0 = at(i - 1), p1 = at(i), p2 = at(i + 1), p3 = at(i + 2);
            return 0.5 * ((-tt * tt * tt + 2 * tt * tt - tt) * p0 +
                          (3 * tt * tt * tt - 5 * tt * tt + 2) * p1 +
                          (-3 * tt * tt * tt + 4 * tt * tt + tt) * p2 +
                          (tt * tt * tt - tt * tt) * p3);
        };
        for (std::size_t k = 0; k < m; ++k) {
            double tk = da * static_cast<double>(k);
            double u = std::abs(std::remainder(tk - t0, kPi));
            double a = tk - 0.5 * da, b = tk + 0.5 * da;
            if (u > window) {
                double c = 0.5 * (a + b), hw = 0.5 * (b - a);
                for (int i = 0; i < 4; ++i) {
                    for (double sg : {1.0, -1.0}) {
                        double t = c + sg * hw * kGl8X[i];
                        acc += hw * kGl8W[i] * std::pow(std::abs(std::cos(t - phi)), s) * mudens(t);
                    }
                }
            } else {
                double tkink = t0 + kPi * std::round((tk - t0) / kPi);
                if (tkink > a && tkink < b) {
                    acc += kink_piece(a, tkink, t0, s, mudens);
                    acc += kink_piece(tkink, b, t0, s, mudens);
                } else {
                    acc += kink_piece(a, b, t0, s, mudens);
                }
            }
        }
    } else {
        for (std::size_t k = 0; k < mu.grid.size(); ++k)
            acc += mu.grid.weights[k] * mu.density[k] *
                   std::pow(std::abs(dot(omega, mu.grid.dirs[k])), s);
    }
    acc *= 0.5;
    if (!(acc > 0.0)) throw std::runtime_error("degenerate spectral measure: h_L integral <= 0");
    return std::pow(acc, 1.0 / s);
}

void ConvexBodyTable::validate() const {
    require(dim == grid.dim, "table/grid dimension mismatch");
    require(h.size() == grid.size(), "support values size mismatch");
    for (std::size_t k = 0; k < grid.size(); ++k) {
        require(h[k] > 0.0, "support values must be positive");
        require(std::abs(h[k] - h[grid.antipode(k)]) < 1e-10, "support function not even");
        require(h[k] >= rho - 1e-12 && h[k] <= rho_prime + 1e-12, "rho bounds violated");
    }
    // midpoint convexity of the 1-homogeneous extension along the angle grid (n=2)
    if (dim == 2) {
        std::size_t m = grid.size();
        for (std::size_t k = 0; k < m; ++k) {
            Vec mid = 0.5 * (grid.dirs[k] + grid.dirs[(k + 2) % m]);
            double lhs = norm(mid) * h[(k + 1) % m];
            double rhs = 0.5 * (h[k] + h[(k + 2) % m]);
            require(lhs <= rhs + 1e-6, "support table fails midpoint convexity (under-resolved)");
        }
    }
}

double ConvexBodyTable::support(const Vec& y) const {
    if (dim == 2 && !vertices.empty()) {
        double best = -std::numeric_limits<double>::infinity();
        for (const Vec& v : vertices) best = std::max(best, dot(v, y));
        return best;
    }
    // fallback: 1-homogeneous nearest-neighbor extension of h
    double n = norm(y);
    if (n == 0.0) return 0.0;
    Vec d = {y[0] / n, y[1] / n, y[2] / n};
    double best = -2.0;
    std::size_t arg = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        double c = dot(d, grid.dirs[k]);
        if (c > best) {
            best = c;
            arg = k;
        }
    }
    return n * h[arg];
}

ConvexBodyTable build_body_table(const SpectralMeasure& mu, double s, std::size_t resolution) {
    require(resolution >= 16, "resolution must be at least 16 per angular dimension");
    ConvexBodyTable t;
    t.dim = mu.dim;
    t.grid = make_sphere_grid(mu.dim, mu.dim == 2 ? resolution : resolution * resolution / 2);
    t.h.resize(t.grid.size());
    for (std::size_t k = 0; k < t.grid.size(); ++k)
        t.h[k] = support_function_hL(mu, s, t.grid.dirs[k]);
    t.rho = *std::min_element(t.h.begin(), t.h.end());
    t.rho_prime = *std::max_element(t.h.begin(), t.h.end());
    if (t.dim == 2) {
        // boundary parametrization x(a) = h e(a) + h' e'(a); curvature radius = h + h''
        std::size_t m = t.grid.size();
        double da = 2.0 * kPi / static_cast<double>(m);
        t.curv_stencil_width = da;
        double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            double hpp = (t.h[(k + 1) % m] - 2.0 * t.h[k] + t.h[(k + m - 1) % m]) / (da * da);
            double R = t.h[k] + hpp;
            rmin = std::min(rmin, R);
            rmax = std::max(rmax, R);
        }
        t.curv_radius_min = rmin;
        t.curv_radius_max = rmax;
        // vertices: intersection of consecutive supporting halfplanes
        t.vertices.resize(m);
        for (std::size_t k = 0; k < m; ++k) {
            const Vec& n1 = t.grid.dirs[k];
            const Vec& n2 = t.grid.dirs[(k + 1) % m];
            double det = n1[0] * n2[1] - n1[1] * n2[0];
            t.vertices[k] = {(t.h[k] * n2[1] - t.h[(k + 1) % m] * n1[1]) / det,
                             (t.h[(k + 1) % m] * n1[0] - t.h[k] * n2[0]) / det, 0.0};
        }
    }
    t.validate();
    return t;
}

double norm_C(const ConvexBodyTable& table, const Vec& p) {
    if (!finite(p)) throw std::invalid_argument("norm_C: non-finite point");
    double best = 0.0;
    for (std::size_t k = 0; k < table.grid.size(); ++k)
        best = std::max(best, dot(p, table.grid.dirs[k]) / table.h[k]);
    return best;
}

bool cauchy_schwarz_check(const ConvexBodyTable& table, const Vec& x, const Vec& y, double tol) {
    return dot(x, y) <= table.support(y) * norm_C(table, x) + tol;
}

void save_measure_csv(const SpectralMeasure& mu, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out.precision(17);
    out << (mu.dim == 2 ? "theta_x,theta_y,value\n" : "theta_x,theta_y,theta_z,value\n");
    for (std::size_t k = 0; k < mu.grid.size(); ++k) {
        const Vec& d = mu.grid.dirs[k];
        out << d[0] << ',' << d[1];
        if (mu.dim == 3) out << ',' << d[2];
        out << ',' << mu.density[k] << '\n';
    }
}

void save_table_csv(const ConvexBodyTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out.precision(17);
    out << (table.dim == 2 ? "theta_x,theta_y,value\n" : "theta_x,theta_y,theta_z,value\n");
    for (std::size_t k = 0; k < table.grid.size(); ++k) {
        const Vec& d = table.grid.dirs[k];
        out << d[0] << ',' << d[1];
        if (table.dim == 3) out << ',' << d[2];
        out << ',' << table.h[k] << '\n';
    }
}

ConvexBodyTable load_table_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    std::getline(in, line);  // header
    bool three = line.find("theta_z") != std::string::npos;
    ConvexBodyTable t;
    t.dim = three ? 3 : 2;
    t.grid.dim = t.dim;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string cell;
        Vec d = {0, 0, 0};
        std::getline(ss, cell, ',');
        d[0] = std::stod(cell);
        std::getline(ss, cell, ',');
        d[1] = std::stod(cell);
        if (three) {
            std::getline(ss, cell, ',');
            d[2] = std::stod(cell);
        }
        std::getline(ss, cell, ',');
        t.grid.dirs.push_back(d);
        t.h.push_back(std::stod(cell));
    }
    std::size_t m = t.grid.size();
    double total = t.dim == 2 ? 2.0 * kPi : 4.0 * kPi;
    t.grid.weights.assign(m, total / static_cast<double>(m));
    t.rho = *std::min_element(t.h.begin(), t.h.end());
    t.rho_prime = *std::max_element(t.h.begin(), t.h.end());
    if (t.dim == 2) {
        t.vertices.resize(m);
        for (std::size_t k = 0; k < m; ++k) {
            const Vec& n1 = t.grid.dirs[k];
            const Vec& n2 = t.grid.dirs[(k + 1) % m];
            double det = n1[0] * n2[1] - n1[1] * n2[0];
            t.vertices[k] = {(t.h[k] * n2[1] - t.h[(k + 1) % m] * n1[1]) / det,
                             (t.h[(k + 1) % m] * n1[0] - t.h[k] * n2[0]) / det, 0.0};
        }
    }
    t.validate();
    return t;
}

}  // namespace nlac
