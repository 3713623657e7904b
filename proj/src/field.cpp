#include "nlac/field.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace nlac {

namespace {
// Catmull-Rom basis on [0,1] for nodes p0..p3
inline double catmull_rom(double p0, double p1, double p2, double p3, double t) {
    double t2 = t * t, t3 = t2 * t;
    return 0.5 * ((-t3 + 2.0 * t2 - t) * p0 + (3.0 * t3 - 5.0 * t2 + 2.0) * p1 +
                  (-3.0 * t3 + 4.0 * t2 + t) * p2 + (t3 - t2) * p3);
}
}  // namespace

Tabulated1D::Tabulated1D(double x_min, double spacing, std::vector<double> values, TailRule tails)
    : x_min_(x_min), spacing_(spacing), values_(std::move(values)), tails_(std::move(tails)) {
    if (spacing_ <= 0.0) throw std::invalid_argument("Tabulated1D: spacing must be positive");
    if (values_.size() < 4) throw std::invalid_argument("Tabulated1D: need at least 4 nodes");
}

double Tabulated1D::tail_value(double z) const {
    if (const auto* c = std::get_if<ConstantTails>(&tails_))
        return z < x_min_ ? c->left : c->right;
    const auto& a = std::get<AlgebraicTails>(tails_);
    double az = std::abs(z);
    if (z < x_min_) return -1.0 + a.c_minus * std::pow(az, -a.gamma);
    return 1.0 - a.c_plus * std::pow(az, -a.gamma);
}

double Tabulated1D::operator()(double z) const {
    double xmax = x_max();
    if (z < x_min_ || z > xmax) return tail_value(z);
    double t = (z - x_min_) / spacing_;
    auto n = static_cast<long>(values_.size());
    long i = static_cast<long>(std::floor(t));
    if (i >= n - 1) i = n - 2;
    double frac = t - static_cast<double>(i);
    auto fetch = [&](long k) -> double {
        if (k < 0) return tail_value(x_min_ + spacing_ * static_cast<double>(k));
        if (k >= n) return tail_value(x_min_ + spacing_ * static_cast<double>(k));
        return values_[static_cast<std::size_t>(k)];
    };
    return catmull_rom(fetch(i - 1), fetch(i), fetch(i + 1), fetch(i + 2), frac);
}

double eval_far_field(const FarFieldRule& rule, const Vec& x) {
    return std::visit(
        [&](const auto& r) -> double {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, FarConstant>) {
                return r.value;
            } else if constexpr (std::is_same_v<T, FarOneDProfile>) {
                return (*r.profile)((dot(r.omega, x) - r.shift) / r.eps);
            } else if constexpr (std::is_same_v<T, FarSlabSign>) {
                return dot(r.omega, x) >= r.offset ? 1.0 : -1.0;
            } else if constexpr (std::is_same_v<T, FarPeriodic>) {
                throw std::logic_error("periodic closure handled by GridFunction");
            } else {
                static_assert(std::is_same_v<T, FarGraphProfile>);
                double rr = x[0] * x[0];
                double xi = std::pow(1.0 + rr, 0.5 * (1.0 + r.alpha)) - 1.0;
                return (*r.profile)((x[1] - r.amplitude * xi) / r.eps);
            }
        },
        rule);
}

GridFunction::GridFunction(Vec center, Vec half_widths, double spacing, FarFieldRule far_field)
    : center_(center), half_(half_widths), spacing_(spacing), far_(std::move(far_field)) {
    if (spacing <= 0.0) throw std::invalid_argument("GridFunction: spacing must be positive");
    nx_ = static_cast<std::size_t>(std::floor(2.0 * half_[0] / spacing + 0.5)) + 1;
    ny_ = static_cast<std::size_t>(std::floor(2.0 * half_[1] / spacing + 0.5)) + 1;
    if (nx_ < 4 || ny_ < 4) throw std::invalid_argument("GridFunction: box too small for spacing");
    // snap half-widths to the lattice
    half_[0] = 0.5 * spacing * static_cast<double>(nx_ - 1);
    half_[1] = 0.5 * spacing * static_cast<double>(ny_ - 1);
    values_.assign(nx_ * ny_, 0.0);
}

Vec GridFunction::node(std::size_t i, std::size_t j) const {
    return {center_[0] - half_[0] + spacing_ * static_cast<double>(i),
            center_[1] - half_[1] + spacing_ * static_cast<double>(j), 0.0};
}

bool GridFunction::inside_box(const Vec& x) const {
    return std::abs(x[0] - center_[0]) <= half_[0] + 1e-12 * spacing_ &&
           std::abs(x[1] - center_[1]) <= half_[1] + 1e-12 * spacing_;
}

void GridFunction::fill_from_far_field() {
    if (std::holds_alternative<FarPeriodic>(far_))
        throw std::invalid_argument("cannot initialize lattice from a periodic closure");
    for (std::size_t j = 0; j < ny_; ++j)
        for (std::size_t i = 0; i < nx_; ++i) at(i, j) = eval_far_field(far_, node(i, j));
}

void GridFunction::fill(const std::function<double(Vec)>& f) {
    for (std::size_t j = 0; j < ny_; ++j)
        for (std::size_t i = 0; i < nx_; ++i) at(i, j) = f(node(i, j));
}

double GridFunction::eval(const Vec& x) const {
    if (!inside_box(x)) {
        if (std::holds_alternative<FarPeriodic>(far_)) {
            double px = 2.0 * half_[0], py = 2.0 * half_[1];
            Vec w = x;
            w[0] = center_[0] + std::remainder(w[0] - center_[0], px);
            w[1] = center_[1] + std::remainder(w[1] - center_[1], py);
            return eval(w);
        }
        return eval_far_field(far_, x);
    }
    double tx = (x[0] - center_[0] + half_[0]) / spacing_;
    double ty = (x[1] - center_[1] + half_[1]) / spacing_;
    auto clamp_cell = [](double t, std::size_t n) -> long {
        long i = static_cast<long>(std::floor(t));
        if (i < 0) i = 0;
        if (i > static_cast<long>(n) - 2) i = static_cast<long>(n) - 2;
        return i;
    };
    long i = clamp_cell(tx, nx_), j = clamp_cell(ty, ny_);
    double fx = tx - static_cast<double>(i), fy = ty - static_cast<double>(j);
    // one-sided stencil shift at the edges
    auto clamp_idx = [](long k, std::size_t n) -> std::size_t {
        if (k < 0) return 0;
        if (k >= static_cast<long>(n)) return n - 1;
        return static_cast<std::size_t>(k);
    };
    double col[4];
    for (int dj = -1; dj <= 2; ++dj) {
        std::size_t jj = clamp_idx(j + dj, ny_);
        double p0 = at(clamp_idx(i - 1, nx_), jj);
        double p1 = at(clamp_idx(i, nx_), jj);
        double p2 = at(clamp_idx(i + 1, nx_), jj);
        double p3 = at(clamp_idx(i + 2, nx_), jj);
        col[dj + 1] = catmull_rom(p0, p1, p2, p3, fx);
    }
    return catmull_rom(col[0], col[1], col[2], col[3], fy);
}

void GridFunction::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out.precision(17);
    out << "x,y,u\n";
    for (std::size_t j = 0; j < ny_; ++j)
        for (std::size_t i = 0; i < nx_; ++i) {
            Vec p = node(i, j);
            out << p[0] << ',' << p[1] << ',' << at(i, j) << '\n';
        }
}

}  // namespace nlac
