#pragma once

#include <memory>
#include <vector>

#include "nlac/distance.hpp"
#include "nlac/field.hpp"
#include "nlac/operator.hpp"
#include "nlac/profile.hpp"

namespace nlac {

// deformed barrier phi^b(x) = phi_0(d_b(x) / eps)
class BarrierField final : public Field {
public:
    BarrierField(const LayerProfile& profile, double eps, const SignedDistanceField& dist);

    double eval(const Vec& x) const override { return (*phi_)(signed_distance(dist_, x)); }
    double stencil_step() const override { return 0.05 * eps_; }

    double eps() const { return eps_; }
    const Tabulated1D& profile() const { return *phi_; }  // already rescaled by eps
    const SignedDistanceField& distance() const { return dist_; }

private:
    std::shared_ptr<const Tabulated1D> phi_;
    double eps_;
    const SignedDistanceField& dist_;
};

struct BarrierResiduals {
    std::vector<double> values;  // L phi^b - eps^{-s} f(phi^b), per point
    double min_res = 0.0;
    double max_res = 0.0;
};

BarrierResiduals barrier_residual(const BarrierField& bf, const SpectralMeasure& mu, double s,
                                  const Nonlinearity& f, const std::vector<Vec>& points,
                                  const QuadratureSpec& q);

// L phi^b(z) - L phi~(z) for the tangent planar profile phi~ at z; nonnegative
// since d_b lies below its tangent plane
double tangent_profile_diff(const BarrierField& bf, const SpectralMeasure& mu, double s,
                            const Vec& z, const QuadratureSpec& q);

}  // namespace nlac
