#include "nlac/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "nlac/barrier.hpp"
#include "nlac/flatness.hpp"
#include "nlac/solver.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace nlac {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    std::size_t b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::uint64_t fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("missing input file: " + path);
    std::uint64_t h = 1469598103934665603ull;
    char c;
    while (in.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

void atomic_write(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + tmp.string());
        out << content;
    }
    fs::rename(tmp, path);
}

// typed access to the flat key=value config
struct Params {
    const Config& cfg;

    bool has(const std::string& k) const { return cfg.count(k) > 0; }
    std::string str(const std::string& k, const std::string& def) const {
        auto it = cfg.find(k);
        return it == cfg.end() ? def : it->second;
    }
    std::string req(const std::string& k) const {
        auto it = cfg.find(k);
        if (it == cfg.end()) throw ConfigError("missing required key: " + k);
        return it->second;
    }
    double num(const std::string& k, double def) const {
        return has(k) ? parse_num(k, cfg.at(k)) : def;
    }
    long integer(const std::string& k, long def) const {
        double v = num(k, static_cast<double>(def));
        if (v != std::floor(v)) throw ConfigError("key " + k + " must be an integer");
        return static_cast<long>(v);
    }
    bool boolean(const std::string& k, bool def) const {
        std::string v = str(k, def ? "true" : "false");
        if (v == "true" || v == "1") return true;
        if (v == "false" || v == "0") return false;
        throw ConfigError("key " + k + " must be true or false");
    }
    std::vector<double> list(const std::string& k) const {
        std::vector<double> out;
        std::stringstream ss(req(k));
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(parse_num(k, trim(item)));
        if (out.empty()) throw ConfigError("key " + k + " holds an empty list");
        return out;
    }

    static double parse_num(const std::string& k, const std::string& v) {
        std::size_t used = 0;
        double x = 0.0;
        try {
            x = std::stod(v, &used);
        } catch (const std::exception&) {
            throw ConfigError("key " + k + " is not a number: " + v);
        }
        if (used != v.size()) throw ConfigError("key " + k + " is not a number: " + v);
        return x;
    }
};

SpectralMeasure make_measure(const Params& p) {
    std::string kernel = p.str("kernel", "const");
    std::size_t dirs = static_cast<std::size_t>(p.integer("dirs", 32));
    if (kernel == "const") return constant_measure(2, dirs);
    if (kernel == "ellipse")
        return spectral_measure_from_body(
            ellipse_body(2, dirs, p.num("ax", 1.5), p.num("ay", 1.0)), p.num("s", 0.5));
    throw ConfigError("unknown kernel: " + kernel);
}

LayerProfile make_profile(const Params& p) {
    double s = p.num("s", 0.5);
    if (s <= 0.0 || s >= 1.0) throw ConfigError("key s must lie in (0,1)");
    return solve_layer(cubic_double_well(), s, p.num("profile_domain", 400.0),
                       static_cast<std::size_t>(p.integer("profile_nodes", 4097)));
}

// grid holding the configured exterior datum: planar / curved-graph / constant
GridFunction make_datum_grid(const Params& p, const SpectralMeasure& mu,
                             const LayerProfile& lp) {
    double eps = p.num("eps", 0.05);
    double s = p.num("s", 0.5);
    Vec center = {p.num("center_x", 0.0), p.num("center_y", 0.0), 0.0};
    Vec half = {p.num("half_width", 4.0), p.num("half_width", 4.0), 0.0};
    double h = p.num("h_grid", 0.05);
    auto phi = std::make_shared<Tabulated1D>(rescale_profile(lp, 1.0));

    FarFieldRule rule;
    std::string kind = p.str("exterior", "planar");
    if (kind == "planar") {
        double th = p.num("omega_deg", 90.0) * M_PI / 180.0;
        Vec omega = {std::cos(th), std::sin(th), 0.0};
        rule = FarOneDProfile{phi, omega, p.num("shift", 0.0),
                              eps * support_function_hL(mu, s, omega)};
    } else if (kind == "graph") {
        rule = FarGraphProfile{phi, p.num("amplitude", 0.05), p.num("alpha", 0.25),
                               eps * support_function_hL(mu, s, {0.0, 1.0, 0.0})};
    } else if (kind == "const") {
        rule = FarConstant{p.num("value", 1.0)};
    } else {
        throw ConfigError("unknown exterior: " + kind);
    }
    GridFunction u(center, half, h, rule);
    u.fill_from_far_field();
    return u;
}

SolveConfig make_solve_config(const Params& p, const SpectralMeasure& mu,
                              const FarFieldRule& exterior) {
    SolveConfig cfg;
    cfg.center = {p.num("center_x", 0.0), p.num("center_y", 0.0), 0.0};
    cfg.half_widths = {p.num("half_width", 4.0), p.num("half_width", 4.0), 0.0};
    cfg.h_grid = p.num("h_grid", 0.05);
    cfg.eps = p.num("eps", 0.05);
    cfg.s = p.num("s", 0.5);
    cfg.mu = &mu;
    cfg.exterior = exterior;
    cfg.f = cubic_double_well();
    cfg.tol = p.num("tol", 1e-4);
    cfg.max_iters = static_cast<std::size_t>(p.integer("max_iters", 20000));
    cfg.monotone_projection = p.boolean("monotone", false);
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

// field the geometric experiments analyze: the datum itself or a solve on it
GridFunction make_field(const Params& p, const SpectralMeasure& mu, const LayerProfile& lp,
                        json& results) {
    GridFunction datum = make_datum_grid(p, mu, lp);
    if (p.str("field", "datum") == "datum") return datum;
    SolveConfig cfg = make_solve_config(p, mu, datum.far_field());
    SolveDiagnostics diag;
    GridFunction u = solve_box(cfg, diag);
    results["solve_iterations"] = diag.iterations;
    results["solve_final_residual"] = diag.final_residual;
    return u;
}

void save_grid_atomic(const GridFunction& u, const fs::path& path) {
    fs::path tmp = path;
    tmp += ".tmp";
    u.save_csv(tmp.string());
    fs::rename(tmp, path);
}

// ---- experiment kinds ---------------------------------------------------

void run_geometry(const Params& p, const fs::path& out, json& manifest) {
    SpectralMeasure mu = make_measure(p);
    mu.validate();
    double s = p.num("s", 0.5);
    ConvexBodyTable table;
    if (p.has("body_table")) {
        table = load_table_csv(p.req("body_table"));
    } else {
        table = build_body_table(mu, s, static_cast<std::size_t>(p.integer("resolution", 64)));
    }
    table.validate();

    {
        fs::path tmp = out / "measure.csv.tmp";
        save_measure_csv(mu, tmp.string());
        fs::rename(tmp, out / "measure.csv");
        tmp = out / "body_table.csv.tmp";
        save_table_csv(table, tmp.string());
        fs::rename(tmp, out / "body_table.csv");
    }
    std::string csv = "theta,hL\n";
    for (std::size_t k = 0; k < mu.grid.size(); ++k) {
        double th = std::atan2(mu.grid.dirs[k][1], mu.grid.dirs[k][0]);
        csv += fmt17(th) + "," + fmt17(support_function_hL(mu, s, mu.grid.dirs[k])) + "\n";
    }
    atomic_write(out / "hl.csv", csv);
    manifest["outputs"] = {"measure.csv", "body_table.csv", "hl.csv"};
    manifest["results"] = {{"rho", table.rho}, {"rho_prime", table.rho_prime}};
}

void run_profile(const Params& p, const fs::path& out, json& manifest) {
    LayerProfile lp = make_profile(p);
    std::string csv = "x,phi\n";
    for (std::size_t k = 0; k < lp.phi.size(); ++k)
        csv += fmt17(lp.x_min + lp.spacing * static_cast<double>(k)) + "," + fmt17(lp.phi[k]) +
               "\n";
    atomic_write(out / "profile.csv", csv);
    manifest["outputs"] = {"profile.csv"};
    manifest["results"] = {{"residual", lp.residual},      {"gamma_fit", lp.gamma_fit},
                           {"fit_r2", lp.fit_r2},          {"l_kappa", lp.l_kappa},
                           {"iterations", lp.iterations},  {"tail_truncation", lp.tail_truncation}};
}

void run_barrier(const Params& p, const fs::path& out, json& manifest) {
    double s = p.num("s", 0.5);
    double eps = p.num("eps", 0.05);
    SpectralMeasure mu = make_measure(p);
    ConvexBodyTable table =
        p.has("body_table")
            ? load_table_csv(p.req("body_table"))
            : build_body_table(mu, s, static_cast<std::size_t>(p.integer("resolution", 64)));
    LayerProfile lp = make_profile(p);

    QuadratureSpec q;
    q.r0 = p.num("quad_r0", 0.02 * eps);
    q.r_max = p.num("quad_r_max", 50.0);
    q.growth = p.num("quad_growth", 1.12);
    q.far_reach = 1e3;

    long npts = p.integer("points", 3);
    std::string csv = "b,min_res,max_res\n";
    for (double b : p.list("b_values")) {
        SignedDistanceField dist({b, p.num("alpha", 0.25), 2}, table);
        BarrierField bf(lp, eps, dist);
        std::vector<Vec> pts;
        for (long k = 0; k < npts; ++k) {
            double x1 = npts == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(k) /
                                                     static_cast<double>(npts - 1);
            pts.push_back({x1, dist.gamma.b * dist.gamma.xi(std::abs(x1)), 0.0});
        }
        BarrierResiduals rr = barrier_residual(bf, mu, s, cubic_double_well(), pts, q);
        csv += fmt17(b) + "," + fmt17(rr.min_res) + "," + fmt17(rr.max_res) + "\n";
    }
    atomic_write(out / "barrier.csv", csv);
    manifest["outputs"] = {"barrier.csv"};
}

void run_solve(const Params& p, const fs::path& out, json& manifest) {
    SpectralMeasure mu = make_measure(p);
    LayerProfile lp = make_profile(p);
    GridFunction datum = make_datum_grid(p, mu, lp);
    SolveConfig cfg = make_solve_config(p, mu, datum.far_field());
    SolveDiagnostics diag;
    GridFunction u = solve_box(cfg, diag);

    save_grid_atomic(u, out / "u.csv");
    std::string csv = "iter,residual\n";
    for (std::size_t k = 0; k < diag.residual_history.size(); ++k)
        csv += std::to_string(k) + "," + fmt17(diag.residual_history[k]) + "\n";
    atomic_write(out / "residuals.csv", csv);
    manifest["outputs"] = {"u.csv", "residuals.csv"};
    manifest["results"] = {{"iterations", diag.iterations},
                           {"tau", diag.tau},
                           {"final_residual", diag.final_residual},
                           {"diverged", diag.diverged}};
}

void run_flatness(const Params& p, const fs::path& out, json& manifest) {
    SpectralMeasure mu = make_measure(p);
    LayerProfile lp = make_profile(p);
    json results;
    GridFunction u = make_field(p, mu, lp, results);
    double scan_x = p.num("scan_x", 0.0);
    double scan_y;
    if (p.str("scan_y", "auto") == "auto") {
        // center the scan on the interface: the mid-level node of the column
        // nearest scan_x
        std::size_t col = 0;
        for (std::size_t i = 1; i < u.nx(); ++i)
            if (std::abs(u.node(i, 0)[0] - scan_x) < std::abs(u.node(col, 0)[0] - scan_x))
                col = i;
        std::size_t row = 0;
        for (std::size_t j = 1; j < u.ny(); ++j)
            if (std::abs(u.at(col, j)) < std::abs(u.at(col, row))) row = j;
        scan_y = u.node(col, row)[1];
    } else {
        scan_y = p.num("scan_y", 0.0);
    }
    results["scan_center_y"] = scan_y;
    FlatnessReport rep = dyadic_flatness_scan(
        u, p.num("kappa", 0.8), {scan_x, scan_y, 0.0},
        static_cast<int>(p.integer("j_min", 0)), static_cast<int>(p.integer("j_max", 2)),
        p.num("alpha0", 0.1), static_cast<int>(p.integer("m0", 5)));
    rep.validate();
    RealignReport re = realign_directions(rep);

    std::string csv = "j,radius,valid,a,omega_x,omega_y,slab_lo,slab_hi,error\n";
    for (const auto& e : rep.scales)
        csv += std::to_string(e.j) + "," + fmt17(e.radius) + "," + (e.valid ? "1" : "0") + "," +
               fmt17(e.fit.a) + "," + fmt17(e.fit.omega[0]) + "," + fmt17(e.fit.omega[1]) + "," +
               fmt17(e.fit.slab_lo) + "," + fmt17(e.fit.slab_hi) + "," + e.error + "\n";
    atomic_write(out / "flatness.csv", csv);
    std::string rcsv = "k,ratio,pass\n";
    for (std::size_t k = 0; k < rep.ratios.size(); ++k)
        rcsv += std::to_string(k) + "," + fmt17(rep.ratios[k]) + "," +
                (rep.ratio_pass[k] ? "1" : "0") + "\n";
    atomic_write(out / "ratios.csv", rcsv);
    manifest["outputs"] = {"flatness.csv", "ratios.csv"};
    results["a"] = rep.a;
    results["j_a"] = rep.j_a;
    results["k_a"] = rep.k_a;
    results["mesoscale_index"] = rep.mesoscale_index;
    results["drift_c"] = re.drift_c;
    results["geometric_bound_ok"] = re.geometric_bound_ok;
    manifest["results"] = results;
}

void run_sliding(const Params& p, const fs::path& out, json& manifest) {
    SpectralMeasure mu = make_measure(p);
    LayerProfile lp = make_profile(p);
    json results;
    GridFunction u = make_field(p, mu, lp, results);
    SlidingReport rep = sliding_test(u, {1.0, 0.0, 0.0}, p.num("eps_tilt", 0.2),
                                     Params{p.cfg}.list("shifts"), p.num("kappa", 0.8),
                                     p.num("tolerance", 1e-5));
    std::string csv = "t,min\n";
    for (std::size_t k = 0; k < rep.shifts.size(); ++k)
        csv += fmt17(rep.shifts[k]) + "," + fmt17(rep.minima[k]) + "\n";
    atomic_write(out / "sliding.csv", csv);
    manifest["outputs"] = {"sliding.csv"};
    results["monotone"] = rep.monotone;
    results["trapping_ok"] = rep.trapping_ok;
    manifest["results"] = results;
}

void run_decay(const Params& p, const fs::path& out, json& manifest) {
    SpectralMeasure mu = make_measure(p);
    LayerProfile lp = make_profile(p);
    GridFunction u = make_datum_grid(p, mu, lp);
    double factor = p.num("center_factor", 30.0);
    std::vector<std::pair<Vec, double>> balls;
    for (double r : p.list("radii")) balls.push_back({{0.0, factor * r, 0.0}, r});
    DecayFit fit = decay_audit(u, p.num("eps", 0.05), p.num("kappa", 0.3), balls);

    std::string csv = "eps_over_R,one_minus_u\n";
    for (std::size_t k = 0; k < fit.eps_over_R.size(); ++k)
        csv += fmt17(fit.eps_over_R[k]) + "," + fmt17(fit.one_minus_u[k]) + "\n";
    atomic_write(out / "decay.csv", csv);
    manifest["outputs"] = {"decay.csv"};
    manifest["results"] = {{"gamma", fit.gamma},
                           {"log_c", fit.log_c},
                           {"r2", fit.r2},
                           {"used", fit.used},
                           {"skipped_outside", fit.skipped_outside},
                           {"skipped_degenerate", fit.skipped_degenerate}};
}

void run_lbar(const Params& p, const fs::path& out, json& manifest) {
    SpectralMeasure mu = make_measure(p);
    LayerProfile lp = make_profile(p);
    GridFunction u = make_datum_grid(p, mu, lp);
    QuadratureSpec q;
    q.r0 = p.num("quad_r0", 0.02);
    q.r_max = p.num("quad_r_max", 50.0);
    q.far_reach = 1e3;
    GraphReport rep = graph_extraction_and_lbar_check(
        u, p.num("kappa", 0.8), p.num("a_norm", 1.0), p.num("window", 2.0), mu,
        p.num("s", 0.5), q);
    std::string csv = "x,g,g_norm\n";
    for (std::size_t k = 0; k < rep.xs.size(); ++k)
        csv += fmt17(rep.xs[k]) + "," + fmt17(rep.g[k]) + "," + fmt17(rep.g_norm[k]) + "\n";
    atomic_write(out / "graph.csv", csv);
    manifest["outputs"] = {"graph.csv"};
    manifest["results"] = {{"c0", rep.c0},
                           {"c1", rep.c1},
                           {"sup_affine_dist", rep.sup_affine_dist},
                           {"lbar_max", rep.lbar_max}};
}

}  // namespace

Config parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("missing input file: " + path);
    Config cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line.substr(0, line.find('#')));
        if (t.empty()) continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(t.substr(0, eq));
        if (key.empty() || cfg.count(key))
            throw ConfigError(path + ":" + std::to_string(lineno) + ": bad or duplicate key");
        cfg[key] = trim(t.substr(eq + 1));
    }
    return cfg;
}

int run_experiment(const std::string& kind, const std::string& path, std::ostream& log) {
    auto start = std::chrono::steady_clock::now();
    json manifest;
    fs::path outdir;
    try {
        Config cfg = parse_config(path);
        Params p{cfg};
        if (p.str("kind", kind) != kind)
            throw ConfigError("config kind '" + p.str("kind", "") + "' does not match subcommand");
        outdir = p.req("out");
        std::error_code ec;
        fs::create_directories(outdir, ec);
        if (ec) throw ConfigError("cannot create output directory: " + outdir.string());

        manifest["kind"] = kind;
        manifest["version"] = kVersion;
        manifest["seed"] = p.integer("seed", 0);
        manifest["config_path"] = path;
        manifest["parameters"] = cfg;
        json inputs;
        char hex[20];
        std::snprintf(hex, sizeof hex, "%016llx",
                      static_cast<unsigned long long>(fnv1a_file(path)));
        inputs[path] = hex;
        if (p.has("body_table")) {
            std::snprintf(hex, sizeof hex, "%016llx",
                          static_cast<unsigned long long>(fnv1a_file(p.req("body_table"))));
            inputs[p.req("body_table")] = hex;
        }
        manifest["inputs"] = inputs;

        if (kind == "geometry") run_geometry(p, outdir, manifest);
        else if (kind == "profile") run_profile(p, outdir, manifest);
        else if (kind == "barrier") run_barrier(p, outdir, manifest);
        else if (kind == "solve") run_solve(p, outdir, manifest);
        else if (kind == "flatness") run_flatness(p, outdir, manifest);
        else if (kind == "sliding") run_sliding(p, outdir, manifest);
        else if (kind == "decay") run_decay(p, outdir, manifest);
        else if (kind == "lbar") run_lbar(p, outdir, manifest);
        else throw ConfigError("unknown experiment kind: " + kind);
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        log << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    }

    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest["wall_time_seconds"] = wall;
    atomic_write(outdir / "manifest.json", manifest.dump(2) + "\n");
    log << "wrote " << (outdir / "manifest.json").string() << "\n";
    return 0;
}

int verify_suite(std::uint64_t seed, std::ostream& out) {
    struct Check {
        std::string name;
        std::function<void()> fn;  // throws with a reason on failure
    };
    auto expect = [](bool ok, const std::string& why) {
        if (!ok) throw std::runtime_error(why);
    };

    SpectralMeasure mu = constant_measure(2, 32);
    ConvexBodyTable table = build_body_table(mu, 0.5, 64);
    LayerProfile lp = solve_layer(cubic_double_well(), 0.5, 100.0, 1025);
    auto phi_eff = std::make_shared<Tabulated1D>(
        rescale_profile(lp, 0.05 * support_function_hL(mu, 0.5, {0.0, 1.0, 0.0})));

    QuadratureSpec q;
    q.r0 = 0.01;
    q.r_max = 50.0;
    q.far_reach = 1e3;

    std::vector<Check> checks;
    checks.push_back({"spectral measure validity", [&] { mu.validate(); }});
    checks.push_back({"support function evenness", [&] {
        for (int k = 0; k < 8; ++k) {
            double th = 0.3 + k * 0.39;
            Vec w = {std::cos(th), std::sin(th), 0.0};
            double a = support_function_hL(mu, 0.5, w);
            double b = support_function_hL(mu, 0.5, {-w[0], -w[1], 0.0});
            expect(std::abs(a - b) <= 1e-12 * a, "h_L not even at theta=" + fmt17(th));
        }
    }});
    checks.push_back({"body table convexity and evenness", [&] { table.validate(); }});
    checks.push_back({"corrupted body table rejected (negative control)", [&] {
        ConvexBodyTable bad = table;
        bad.h[1] *= 1.17;  // breaks evenness
        try {
            bad.validate();
        } catch (const std::invalid_argument&) {
            return;
        }
        throw std::runtime_error("evenness violation was not detected");
    }});
    checks.push_back({"operator two-path agreement on a bump", [&] {
        AnalyticField bump([](Vec x) { return std::exp(-norm2(x)); }, 1e-3);
        for (double x1 : {0.0, 0.4, 1.1}) {
            double a = eval_L(bump, mu, 0.5, {x1, 0.2, 0.0}, q);
            double b = eval_L_layercake(bump, mu, 0.5, {x1, 0.2, 0.0}, q);
            expect(std::abs(a - b) <= 1e-8 * std::max(1.0, std::abs(a)),
                   "paths differ by " + fmt17(a - b) + " at x=" + fmt17(x1));
        }
    }});
    checks.push_back({"planar reduction at scale h_L", [&] {
        SpectralMeasure fine = constant_measure(2, 512);
        auto psi = std::make_shared<Analytic1D>([](double z) { return std::tanh(z); });
        auto [a, b] = directional_consistency_check(fine, 0.5, *psi, {0.6, 0.8, 0.0},
                                                    {0.1, -0.2, 0.0}, q);
        expect(std::abs(a - b) <= 2e-3 * std::abs(b),
               "sides differ: " + fmt17(a) + " vs " + fmt17(b));
    }});
    checks.push_back({"signed distance vanishes on the graph", [&] {
        SignedDistanceField dist({0.05, 0.25, 2}, table);
        for (double x1 : {-1.0, 0.0, 1.0}) {
            double d = signed_distance(dist, {x1, 0.05 * dist.gamma.xi(std::abs(x1)), 0.0});
            expect(std::abs(d) <= 1e-5, "d=" + fmt17(d) + " at x=" + fmt17(x1));
        }
    }});
    checks.push_back({"layer profile centered, monotone, algebraic tail", [&] {
        Tabulated1D phi = lp.interpolant();
        expect(std::abs(phi(0.0)) <= 1e-6, "phi(0)=" + fmt17(phi(0.0)));
        for (std::size_t k = 1; k < lp.phi.size(); ++k)
            expect(lp.phi[k] >= lp.phi[k - 1], "profile not monotone");
        expect(std::abs(lp.gamma_fit - 0.5) <= 0.15, "tail exponent " + fmt17(lp.gamma_fit));
    }});
    checks.push_back({"planar flatness halves across dyadic scales", [&] {
        GridFunction u({0.0, 0.0, 0.0}, {9.0, 9.0, 0.0}, 0.25,
                       FarOneDProfile{phi_eff, {0.0, 1.0, 0.0}, 0.0, 1.0});
        u.fill_from_far_field();
        FlatnessReport rep = dyadic_flatness_scan(u, 0.8, {0.0, 0.0, 0.0}, 2, 3, 0.1);
        expect(rep.ratios.size() == 1, "expected a single scale pair");
        expect(std::abs(rep.ratios[0] - 0.5) <= 0.1, "ratio " + fmt17(rep.ratios[0]));
    }});
    checks.push_back({"sliding a planar interface is monotone", [&] {
        GridFunction u({0.0, 0.0, 0.0}, {4.0, 4.0, 0.0}, 0.25,
                       FarOneDProfile{phi_eff, {0.0, 1.0, 0.0}, 0.0, 1.0});
        u.fill_from_far_field();
        SlidingReport rep = sliding_test(u, {1.0, 0.0, 0.0}, 0.2, {40.0, 20.0}, 0.8, 1e-9);
        expect(rep.monotone, "translate comparison went negative");
    }});
    checks.push_back({"Lbar annihilates affine graphs", [&] {
        LbarFunction affine{1, [](Vec p) { return 0.7 * p[0] - 0.2; }, 1.0, 1e-4};
        double v = eval_Lbar(affine, mu, 0.5, {0.3, 0.0, 0.0}, q);
        expect(std::abs(v) <= 1e-9, "Lbar(affine)=" + fmt17(v));
    }});
    checks.push_back({"operator linearity under random combinations", [&] {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> coef(-2.0, 2.0);
        for (int trial = 0; trial < 3; ++trial) {
            double a = coef(rng), b = coef(rng);
            AnalyticField f([](Vec x) { return std::exp(-norm2(x)); }, 1e-3);
            AnalyticField g([](Vec x) { return std::cos(x[0]) * std::exp(-norm2(x)); }, 1e-3);
            AnalyticField h([&](Vec x) { return a * f.eval(x) + b * g.eval(x); }, 1e-3);
            Vec x = {0.3, -0.1, 0.0};
            double lhs = eval_L(h, mu, 0.5, x, q);
            double rhs = a * eval_L(f, mu, 0.5, x, q) + b * eval_L(g, mu, 0.5, x, q);
            expect(std::abs(lhs - rhs) <= 1e-8 * std::max(1.0, std::abs(rhs)),
                   "linearity broke by " + fmt17(lhs - rhs));
        }
    }});

    int failed = 0;
    for (const auto& c : checks) {
        try {
            c.fn();
            out << "ok   " << c.name << "\n";
        } catch (const std::exception& e) {
            ++failed;
            out << "FAIL " << c.name << ": " << e.what() << "\n";
        }
    }
    out << "verify: " << (checks.size() - failed) << "/" << checks.size() << " checks passed\n";
    return failed == 0 ? 0 : kExitAcceptance;
}

}  // namespace nlac
