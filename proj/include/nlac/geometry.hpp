#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace nlac {

// Points live in R^2 or R^3; unused components are zero.
using Vec = std::array<double, 3>;

inline double dot(const Vec& a, const Vec& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline double norm2(const Vec& a) { return dot(a, a); }
double norm(const Vec& a);
Vec normalized(const Vec& a);
inline Vec operator+(const Vec& a, const Vec& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec operator-(const Vec& a, const Vec& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec operator*(double t, const Vec& a) { return {t * a[0], t * a[1], t * a[2]}; }

// Quasi-uniform quadrature grid on S^{n-1}: uniform angles for n=2,
// antipodally symmetrized Fibonacci lattice for n=3. Each direction k
// has weight w_k and an antipodal partner at index antipode(k).
struct SphereGrid {
    int dim = 2;
    std::vector<Vec> dirs;
    std::vector<double> weights;  // sum to surface measure of S^{n-1}

    std::size_t size() const { return dirs.size(); }
    std::size_t antipode(std::size_t k) const;
};

SphereGrid make_sphere_grid(int dim, std::size_t count);

// Sampled even density mu on the unit sphere with ellipticity bounds.
struct SpectralMeasure {
    int dim = 2;
    SphereGrid grid;
    std::vector<double> density;
    double lambda = 0.0;
    double Lambda = 0.0;

    // nearest-neighbor extension of mu to an arbitrary direction
    double at(const Vec& direction) const;
    void validate() const;  // throws std::invalid_argument on violation
};

SpectralMeasure constant_measure(int dim, std::size_t count, double value = 1.0);

// Convex set K given by a radial function over sphere directions.
struct ConvexBodyK {
    int dim = 2;
    SphereGrid grid;
    std::vector<double> radial;  // r(theta) in (0, 1]
    double r_touch = 0.0;        // inner touching-ball radius

    void validate() const;
};

ConvexBodyK ball_body(int dim, std::size_t count, double radius = 1.0);
// axis-aligned ellipse/ellipsoid, semi-axes ax >= components of the gauge
ConvexBodyK ellipse_body(int dim, std::size_t count, double ax, double ay, double az = 1.0);

// gauge inf{ t>0 : p/t not in K }; 0 at the origin
double norm_K(const ConvexBodyK& body, const Vec& p);

SpectralMeasure spectral_measure_from_body(const ConvexBodyK& body, double s);

// h_L(omega) = ( 1/2 \int_{S^{n-1}} |omega.theta|^s mu dtheta )^{1/s}
double support_function_hL(const SpectralMeasure& mu, double s, const Vec& omega);

// Tabulated support function of the convex body C_L, with curvature metadata.
struct ConvexBodyTable {
    int dim = 2;
    SphereGrid grid;
    std::vector<double> h;
    double rho = 0.0;        // min h: B_rho contained in C
    double rho_prime = 0.0;  // max h: C contained in B_rho'
    double curv_radius_min = 0.0;  // second-difference estimates (n=2)
    double curv_radius_max = 0.0;
    double curv_stencil_width = 0.0;

    // vertices of the polytope cut out by the tabulated halfplanes (n=2)
    std::vector<Vec> vertices;

    void validate() const;
    // support value of the tabulated polytope in an arbitrary direction
    double support(const Vec& y) const;
};

ConvexBodyTable build_body_table(const SpectralMeasure& mu, double s, std::size_t resolution);

// gauge of C from the support representation: max_k p.omega_k / h_k
double norm_C(const ConvexBodyTable& table, const Vec& p);

// x.y <= h_L(y) ||x||_C within tol (property-test predicate)
bool cauchy_schwarz_check(const ConvexBodyTable& table, const Vec& x, const Vec& y,
                          double tol = 1e-9);

void save_measure_csv(const SpectralMeasure& mu, const std::string& path);
void save_table_csv(const ConvexBodyTable& table, const std::string& path);
ConvexBodyTable load_table_csv(const std::string& path);

}  // namespace nlac
