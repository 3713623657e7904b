#include <cmath>
#include <random>
#include <thread>

#include "doctest.h"
#include "nlac/distance.hpp"
#include "nlac/geometry.hpp"

using namespace nlac;

namespace {

ConvexBodyTable ball_table(double s = 0.5) {
    auto mu = constant_measure(2, 512);
    return build_body_table(mu, s, 256);
}

ConvexBodyTable ellipse_table(double s = 0.5) {
    auto ell = ellipse_body(2, 512, 1.0, 0.6);
    auto mu = spectral_measure_from_body(ell, s);
    return build_body_table(mu, s, 256);
}

double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    auto n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double lx = std::log(xs[i]), ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("halfspace distance is x_n / h_L(e_n)") {
    SignedDistanceField f({0.0, 0.125, 2}, ball_table());
    double h = f.body.h[f.body.grid.size() / 4];  // e_2 on the table grid
    for (double y : {0.9, 0.1, -0.4, -2.0}) {
        for (double x0 : {0.0, 1.3, -0.7}) {
            CHECK(signed_distance(f, {x0, y, 0.0}) == doctest::Approx(y / h).epsilon(1e-9));
        }
    }
}

TEST_CASE("origin lies on every boundary") {
    for (double b : {0.0, 0.1, 0.3}) {
        SignedDistanceField f({b, 0.125, 2}, ball_table());
        CHECK(std::abs(signed_distance(f, {0.0, 0.0, 0.0})) < 1e-9);
    }
}

TEST_CASE("curved distance matches the dense projection oracle") {
    SignedDistanceField f({0.1, 0.125, 2}, ball_table());
    Vec x = {0.0, 1.0, 0.0};
    double best = 1e300;
    for (double zp = -50.0; zp <= 50.0; zp += 1e-4) {
        Vec z = {zp, f.gamma.b * f.gamma.xi(zp), 0.0};
        best = std::min(best, norm_C(f.body, x - z));
    }
    CHECK(signed_distance(f, x) == doctest::Approx(best).epsilon(1e-7));
}

TEST_CASE("lipschitz audit") {
    SignedDistanceField f({0.1, 0.125, 2}, ellipse_table());
    // degenerate pair
    CHECK(lipschitz_audit(f, {{Vec{0.4, 0.2, 0.0}, Vec{0.4, 0.2, 0.0}}}) == 0.0);

    // halfspace along the normal: distance is exactly affine
    SignedDistanceField flat({0.0, 0.125, 2}, ball_table());
    std::vector<std::pair<Vec, Vec>> vertical = {{Vec{0.0, 1.0, 0.0}, Vec{0.0, -0.5, 0.0}},
                                                 {Vec{2.0, 0.3, 0.0}, Vec{2.0, 3.0, 0.0}}};
    CHECK(lipschitz_audit(flat, vertical) == doctest::Approx(1.0).epsilon(1e-8));

    std::mt19937 rng(17);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    std::vector<std::pair<Vec, Vec>> pairs;
    for (int k = 0; k < 1000; ++k)
        pairs.push_back({Vec{U(rng), U(rng), 0.0}, Vec{U(rng), U(rng), 0.0}});
    double ratio = lipschitz_audit(f, pairs);
    CHECK(ratio <= 1.0 + 1e-6);
    CHECK(ratio > 0.5);  // the bound is near-attained somewhere
}

TEST_CASE("concavity along sampled segments") {
    SignedDistanceField f({0.15, 0.2, 2}, ellipse_table());
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> U(-2.5, 2.5), L(0.05, 0.95);
    for (int k = 0; k < 1000; ++k) {
        Vec x = {U(rng), U(rng), 0.0}, y = {U(rng), U(rng), 0.0};
        double lam = L(rng);
        double mid = signed_distance(f, lam * x + (1.0 - lam) * y);
        CHECK(mid >= lam * signed_distance(f, x) + (1.0 - lam) * signed_distance(f, y) - 1e-8);
    }
}

TEST_CASE("tangent plane bounds the distance from above") {
    SignedDistanceField f({0.12, 0.15, 2}, ball_table());
    std::mt19937 rng(29);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    for (double zp : {-1.5, -0.3, 0.8}) {
        Vec z = {zp, f.gamma.b * f.gamma.xi(zp), 0.0};
        Vec nrm = {-f.gamma.b * f.gamma.xi_prime(zp), 1.0, 0.0};
        nrm = (1.0 / norm(nrm)) * nrm;
        double hsup = f.body.support(nrm);
        for (int k = 0; k < 50; ++k) {
            Vec x = {U(rng), U(rng), 0.0};
            CHECK(signed_distance(f, x) <= dot(nrm, x - z) / hsup + 1e-8);
        }
    }
}

TEST_CASE("level set graphs") {
    // flat: G is the constant t * h_L(e_n)
    SignedDistanceField flat({0.0, 0.125, 2}, ball_table());
    double h = flat.body.h[flat.body.grid.size() / 4];
    auto g0 = level_set_graph(flat, 0.35, 1.0, 17);
    for (double v : g0.G) CHECK(v == doctest::Approx(0.35 * h).epsilon(1e-8));

    // zero level set is the graph b*xi itself
    SignedDistanceField f({0.2, 0.125, 2}, ball_table());
    auto gz = level_set_graph(f, 0.0, 1.0, 17);
    CHECK(std::abs(gz.G[8]) < 1e-8);
    for (std::size_t i = 0; i < gz.yprime.size(); ++i) {
        CHECK(gz.G[i] == doctest::Approx(f.gamma.b * f.gamma.xi(gz.yprime[i])).epsilon(1e-7));
        // growth bound |G(y') - G(0)| <= C b (1+|y'|)^{1+alpha}
        CHECK(std::abs(gz.G[i] - gz.G[8]) <=
              2.0 * f.gamma.b * std::pow(1.0 + std::abs(gz.yprime[i]), 1.0 + f.gamma.alpha));
    }
}

TEST_CASE("level set curvature is linear in b") {
    std::vector<double> bs = {0.01, 0.02, 0.04, 0.08}, curvs;
    for (double b : bs) {
        SignedDistanceField f({b, 0.125, 2}, ball_table());
        curvs.push_back(level_set_graph(f, 0.25, 1.0, 33).max_abs_d2G);
    }
    double slope = loglog_slope(bs, curvs);
    CHECK(slope == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("touching spheres: halfspace") {
    SignedDistanceField f({0.0, 0.125, 2}, ball_table());
    double h = f.body.h[f.body.grid.size() / 4];
    double R = 2.0;
    Vec z0 = {0.0, R * h, 0.0};  // d(z0) = R exactly
    for (double t : {0.0, 0.5, -1.0}) {
        auto rep = touching_sphere_check(f, z0, R, t, 1e-7);
        CHECK(rep.pass);
        if (t == 0.0) {
            // the table gauge has a flat bottom facet, so the touching point is
            // only determined up to the facet width
            CHECK(norm(rep.zbar - Vec{0.0, 0.0, 0.0}) < 0.2);
            CHECK(std::abs(rep.touch_value) < 1e-9);
        }
    }
}

TEST_CASE("touching spheres: curved boundary, ball and ellipse bodies") {
    for (bool use_ellipse : {false, true}) {
        SignedDistanceField f({0.1, 0.125, 2}, use_ellipse ? ellipse_table() : ball_table());
        double R = 5.0;
        // place z0 on the axis at exact distance R by bisection
        double lo = 0.0, hi = 100.0;
        while (hi - lo > 1e-12) {
            double mid = 0.5 * (lo + hi);
            (signed_distance(f, {0.0, mid, 0.0}) < R ? lo : hi) = mid;
        }
        Vec z0 = {0.0, 0.5 * (lo + hi), 0.0};
        for (double t : {-1.0, 0.3}) {
            auto rep = touching_sphere_check(f, z0, R, t, 1e-5);
            CHECK(rep.pass);
            INFO(rep.detail);
        }
    }
}

TEST_CASE("distance cache is consistent under concurrent evaluation") {
    SignedDistanceField f({0.1, 0.125, 2}, ball_table());
    std::vector<Vec> pts;
    for (int k = 0; k < 40; ++k) pts.push_back({0.07 * k - 1.4, 0.11 * k - 2.0, 0.0});
    std::vector<double> serial;
    for (const Vec& p : pts) serial.push_back(signed_distance(f, p));

    SignedDistanceField g({0.1, 0.125, 2}, ball_table());
    std::vector<std::thread> workers;
    std::vector<std::vector<double>> results(4, std::vector<double>(pts.size()));
    for (int w = 0; w < 4; ++w)
        workers.emplace_back([&, w] {
            for (std::size_t i = 0; i < pts.size(); ++i) results[w][i] = signed_distance(g, pts[i]);
        });
    for (auto& th : workers) th.join();
    for (int w = 0; w < 4; ++w)
        for (std::size_t i = 0; i < pts.size(); ++i) CHECK(results[w][i] == serial[i]);
}

TEST_CASE("graph set validation") {
    GraphSet ok{0.1, 0.125, 2};
    ok.validate();
    CHECK_THROWS(GraphSet{-0.1, 0.125, 2}.validate());
    CHECK_THROWS(GraphSet{0.1, 1.5, 2}.validate());
}
