#include "nlac/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nlac {

BarrierField::BarrierField(const LayerProfile& profile, double eps, const SignedDistanceField& dist)
    : phi_(std::make_shared<Tabulated1D>(rescale_profile(profile, eps))), eps_(eps), dist_(dist) {
    if (eps <= 0.0) throw std::invalid_argument("BarrierField: eps must be positive");
}

BarrierResiduals barrier_residual(const BarrierField& bf, const SpectralMeasure& mu, double s,
                                  const Nonlinearity& f, const std::vector<Vec>& points,
                                  const QuadratureSpec& q) {
    if (points.empty()) throw std::invalid_argument("barrier_residual: no evaluation points");
    BarrierResiduals out;
    double scale = std::pow(bf.eps(), -s);
    for (const Vec& x : points) {
        double r = eval_L(bf, mu, s, x, q) - scale * f.f(bf.eval(x));
        out.values.push_back(r);
    }
    out.min_res = *std::min_element(out.values.begin(), out.values.end());
    out.max_res = *std::max_element(out.values.begin(), out.values.end());
    return out;
}

double tangent_profile_diff(const BarrierField& bf, const SpectralMeasure& mu, double s,
                            const Vec& z, const QuadratureSpec& q) {
    const SignedDistanceField& d = bf.distance();
    double t0 = signed_distance(d, z);

    double fd = 1e-5;
    Vec grad = {0.0, 0.0, 0.0};
    for (int i = 0; i < d.gamma.dim; ++i) {
        Vec hp = z, hm = z;
        hp[i] += fd;
        hm[i] -= fd;
        grad[i] = (signed_distance(d, hp) - signed_distance(d, hm)) / (2.0 * fd);
    }
    if (norm(grad) == 0.0)
        throw std::runtime_error("tangent_profile_diff: vanishing distance gradient");
    Vec omega = normalized(grad);
    double h = support_function_hL(mu, s, omega);

    std::shared_ptr<const Tabulated1D> phi = std::make_shared<Tabulated1D>(bf.profile());
    AnalyticField tangent(
        [phi, omega, h, z, t0](Vec x) { return (*phi)(dot(omega, x - z) / h + t0); },
        bf.stencil_step());
    return eval_L_diff(bf, tangent, mu, s, z, q);
}

}  // namespace nlac
