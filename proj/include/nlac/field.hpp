#pragma once

#include <functional>
#include <memory>
#include <variant>
#include <vector>

#include "nlac/geometry.hpp"

namespace nlac {

// Bounded function of one variable, evaluable on all of R.
class Func1D {
public:
    virtual ~Func1D() = default;
    virtual double operator()(double z) const = 0;
};

class Analytic1D final : public Func1D {
public:
    explicit Analytic1D(std::function<double(double)> f) : f_(std::move(f)) {}
    double operator()(double z) const override { return f_(z); }

private:
    std::function<double(double)> f_;
};

// Tail closure for tabulated 1-D functions.
struct ConstantTails {
    double left = -1.0;
    double right = 1.0;
};
struct AlgebraicTails {
    // left: -1 + c_minus |z|^{-gamma},  right: 1 - c_plus z^{-gamma}
    double c_minus = 1.0;
    double c_plus = 1.0;
    double gamma = 0.5;
};
using TailRule = std::variant<ConstantTails, AlgebraicTails>;

// Uniform tabulation with Catmull-Rom interpolation and a tail rule outside.
class Tabulated1D final : public Func1D {
public:
    Tabulated1D(double x_min, double spacing, std::vector<double> values, TailRule tails);

    double operator()(double z) const override;

    double x_min() const { return x_min_; }
    double x_max() const { return x_min_ + spacing_ * static_cast<double>(values_.size() - 1); }
    double spacing() const { return spacing_; }
    const std::vector<double>& values() const { return values_; }
    const TailRule& tails() const { return tails_; }

private:
    double tail_value(double z) const;
    double x_min_;
    double spacing_;
    std::vector<double> values_;
    TailRule tails_;
};

// Function on R^n (n = 2), evaluable everywhere.
class Field {
public:
    virtual ~Field() = default;
    virtual double eval(const Vec& x) const = 0;
    // natural stencil step for finite differences at x
    virtual double stencil_step() const = 0;
};

class AnalyticField final : public Field {
public:
    AnalyticField(std::function<double(Vec)> f, double step) : f_(std::move(f)), step_(step) {}
    double eval(const Vec& x) const override { return f_(x); }
    double stencil_step() const override { return step_; }

private:
    std::function<double(Vec)> f_;
    double step_;
};

// planar extension psi(omega.x / h)
class PlanarField final : public Field {
public:
    PlanarField(std::shared_ptr<const Func1D> psi, Vec omega, double h, double step)
        : psi_(std::move(psi)), omega_(omega), h_(h), step_(step) {}
    double eval(const Vec& x) const override { return (*psi_)(dot(omega_, x) / h_); }
    double stencil_step() const override { return step_; }

private:
    std::shared_ptr<const Func1D> psi_;
    Vec omega_;
    double h_;
    double step_;
};

// --- far-field closure rules for grid functions -------------------------

struct FarConstant {
    double value = 0.0;
};
struct FarOneDProfile {
    std::shared_ptr<const Func1D> profile;  // already in outer variables if eps=1
    Vec omega = {0.0, 1.0, 0.0};
    double shift = 0.0;
    double eps = 1.0;
};
struct FarSlabSign {
    Vec omega = {0.0, 1.0, 0.0};
    double offset = 0.0;
};
struct FarPeriodic {};
// u = profile((x_n - amplitude * xi(x')) / eps) along a curved convex graph,
// xi(x') = (1+|x'|^2)^{(1+alpha)/2} - 1
struct FarGraphProfile {
    std::shared_ptr<const Func1D> profile;
    double amplitude = 0.0;
    double alpha = 0.25;
    double eps = 1.0;
};
using FarFieldRule = std::variant<FarConstant, FarOneDProfile, FarSlabSign, FarPeriodic,
                                  FarGraphProfile>;

double eval_far_field(const FarFieldRule& rule, const Vec& x);

// Values of u on a uniform 2-D box lattice plus a far-field closure.
class GridFunction final : public Field {
public:
    GridFunction(Vec center, Vec half_widths, double spacing, FarFieldRule far_field);

    // bicubic inside the box, closure rule outside
    double eval(const Vec& x) const override;
    double stencil_step() const override { return spacing_; }

    std::size_t nx() const { return nx_; }
    std::size_t ny() const { return ny_; }
    double spacing() const { return spacing_; }
    Vec center() const { return center_; }
    Vec half_widths() const { return half_; }
    Vec node(std::size_t i, std::size_t j) const;
    double& at(std::size_t i, std::size_t j) { return values_[j * nx_ + i]; }
    double at(std::size_t i, std::size_t j) const { return values_[j * nx_ + i]; }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }
    const FarFieldRule& far_field() const { return far_; }
    void set_far_field(FarFieldRule rule) { far_ = std::move(rule); }

    bool inside_box(const Vec& x) const;
    // fill lattice values by sampling the closure rule
    void fill_from_far_field();
    void fill(const std::function<double(Vec)>& f);

    void save_csv(const std::string& path) const;

private:
    Vec center_;
    Vec half_;
    double spacing_;
    std::size_t nx_, ny_;
    std::vector<double> values_;
    FarFieldRule far_;
};

}  // namespace nlac
