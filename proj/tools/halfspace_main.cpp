// Command-line front end: every subcommand reads a JSON config, writes
// machine-readable outputs atomically under --out, and prints a one-line
// summary. Exit codes: 0 ok, 1 config/validation error, 2 numerical failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "halfspace/halfspace.hpp"

using nlohmann::json;
using namespace halfspace;

namespace {

struct RunContext {
    std::filesystem::path out_dir = ".";
    std::uint64_t seed = 0;
    int threads = 1;
};

// ---------------------------------------------------------------------------
// Config plumbing: strict schemas, unknown keys rejected.
// ---------------------------------------------------------------------------

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open config file: " + path);
    json cfg;
    try {
        in >> cfg;
    } catch (const json::exception& e) {
        throw validation_error(std::string("config is not valid JSON: ") + e.what());
    }
    if (!cfg.is_object()) throw validation_error("config root must be a JSON object");
    return cfg;
}

void check_keys(const json& obj, const std::string& ctx, const std::set<std::string>& required,
                const std::set<std::string>& optional = {}) {
    for (const auto& item : obj.items()) {
        if (!required.count(item.key()) && !optional.count(item.key()))
            throw validation_error("unknown key '" + item.key() + "' in " + ctx);
    }
    for (const auto& key : required)
        if (!obj.contains(key)) throw validation_error("missing key '" + key + "' in " + ctx);
}

double as_double(const json& obj, const std::string& key) {
    if (!obj.at(key).is_number()) throw validation_error("key '" + key + "' must be a number");
    return obj.at(key).get<double>();
}

int as_int(const json& obj, const std::string& key) {
    if (!obj.at(key).is_number_integer())
        throw validation_error("key '" + key + "' must be an integer");
    return obj.at(key).get<int>();
}

std::string as_string(const json& obj, const std::string& key) {
    if (!obj.at(key).is_string()) throw validation_error("key '" + key + "' must be a string");
    return obj.at(key).get<std::string>();
}

std::vector<double> as_vector(const json& obj, const std::string& key, std::size_t size = 0) {
    if (!obj.at(key).is_array()) throw validation_error("key '" + key + "' must be an array");
    std::vector<double> v;
    for (const auto& x : obj.at(key)) {
        if (!x.is_number()) throw validation_error("array '" + key + "' must hold numbers");
        v.push_back(x.get<double>());
    }
    if (size && v.size() != size)
        throw validation_error("array '" + key + "' must have " + std::to_string(size) + " entries");
    return v;
}

json metadata(const RunContext& ctx, double a, int n, const json& grid = nullptr) {
    json m{{"a", a},
           {"n", n},
           {"normalization", normalization_convention},
           {"version", version},
           {"seed", ctx.seed},
           {"threads", ctx.threads}};
    if (!grid.is_null()) m["grid"] = grid;
    return m;
}

void emit(const RunContext& ctx, const std::string& name, const json& doc) {
    atomic_write(ctx.out_dir / name, doc.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Shared spec parsers.
// ---------------------------------------------------------------------------

KernelSpec parse_kernel(const json& k, int n) {
    check_keys(k, "kernel", {"type"}, {"a", "alpha", "beta"});
    const std::string type = as_string(k, "type");
    if (type == "poisson") return KernelSpec::poisson_type(as_double(k, "a"), n);
    if (type == "riesz") return KernelSpec::riesz_type(as_double(k, "alpha"), n);
    if (type == "power_weight")
        return KernelSpec::power_weight_type(as_double(k, "alpha"), as_double(k, "beta"), n);
    if (type == "gamma_d") return KernelSpec::gamma_dirichlet_type(as_double(k, "a"), n);
    if (type == "gamma_n") return KernelSpec::gamma_neumann_type(as_double(k, "a"), n);
    throw validation_error("unknown kernel type '" + type + "'");
}

json kernel_to_json(const KernelSpec& s) {
    switch (s.kind) {
        case KernelKind::poisson: return {{"type", "poisson"}, {"a", s.a}, {"n", s.n}};
        case KernelKind::riesz: return {{"type", "riesz"}, {"alpha", s.alpha}, {"n", s.n}};
        case KernelKind::power_weight:
            return {{"type", "power_weight"}, {"alpha", s.alpha}, {"beta", s.beta}, {"n", s.n}};
        case KernelKind::gamma_dirichlet: return {{"type", "gamma_d"}, {"a", s.a}, {"n", s.n}};
        case KernelKind::gamma_neumann: return {{"type", "gamma_n"}, {"a", s.a}, {"n", s.n}};
    }
    return {};
}

/// Deterministic smooth field from the seed: a short random trigonometric sum.
template <int N>
ScalarFn<N> random_smooth_field(double amplitude, double box_scale, std::uint64_t seed) {
    struct Term {
        double weight;
        std::array<double, N> freq, phase;
    };
    std::mt19937_64 rng(seed ^ 0xa5a5a5a55a5a5a5aULL);
    std::vector<Term> terms(4);
    for (auto& t : terms) {
        t.weight = uniform(rng, -1.0, 1.0);
        for (std::size_t i = 0; i < N; ++i) {
            t.freq[i] = uniform(rng, 0.5, 2.5) * pi / box_scale;
            t.phase[i] = uniform(rng, 0.0, 2.0 * pi);
        }
    }
    return [terms, amplitude](const Point<N>& p) {
        double acc = 0.0;
        for (const auto& t : terms) {
            double prod = t.weight;
            for (std::size_t i = 0; i < N; ++i) prod *= std::cos(t.freq[i] * p[i] + t.phase[i]);
            acc += prod;
        }
        return amplitude * acc;
    };
}

template <int N>
ScalarFn<N> parse_field_spec(const json& fs, WeightExponent a, double box_scale,
                             std::uint64_t seed) {
    check_keys(fs, "field spec", {"type"}, {"value", "c_star", "c2", "amplitude", "width", "center"});
    const std::string type = as_string(fs, "type");
    if (type == "constant") {
        const double v = as_double(fs, "value");
        return [v](const Point<N>&) { return v; };
    }
    if (type == "family")
        return classified_profile<N>(a, as_double(fs, "c_star"), as_double(fs, "c2"));
    if (type == "tangential_coordinate")
        return [](const Point<N>& p) { return p[0]; };
    if (type == "random_smooth")
        return random_smooth_field<N>(as_double(fs, "amplitude"), box_scale, seed);
    if (type == "gaussian") {
        const double amp = as_double(fs, "amplitude");
        const double width = as_double(fs, "width");
        const auto c = as_vector(fs, "center", N - 1);
        return [amp, width, c](const Point<N>& p) {
            double r2 = 0.0;
            for (std::size_t i = 0; i + 1 < N; ++i) r2 += (p[i] - c[i]) * (p[i] - c[i]);
            return amp * std::exp(-r2 / (width * width));
        };
    }
    throw validation_error("unknown field spec type '" + type + "'");
}

template <int M>
BoundaryFunction<M> parse_boundary_function(const json& fs) {
    check_keys(fs, "boundary function", {"type"},
               {"value", "amplitude", "width", "radius", "center"});
    const std::string type = as_string(fs, "type");
    if (type == "constant") return BoundaryFunction<M>::constant(as_double(fs, "value"));
    Point<M> center{};
    if (fs.contains("center")) {
        const auto c = as_vector(fs, "center", M);
        for (int i = 0; i < M; ++i) center[i] = c[i];
    }
    if (type == "gaussian")
        return BoundaryFunction<M>::gaussian(as_double(fs, "amplitude"), as_double(fs, "width"),
                                             center);
    if (type == "bump")
        return BoundaryFunction<M>::bump(as_double(fs, "amplitude"), as_double(fs, "radius"),
                                         center);
    throw validation_error("unknown boundary function type '" + type + "'");
}

// ---------------------------------------------------------------------------
// kernel eval / kernel norm
// ---------------------------------------------------------------------------

int run_kernel_eval(const RunContext& ctx, const json& cfg) {
    check_keys(cfg, "kernel eval config", {"kernel", "n", "point"});
    const int n = as_int(cfg, "n");
    const KernelSpec spec = parse_kernel(cfg.at("kernel"), n);
    const auto pt = as_vector(cfg, "point", static_cast<std::size_t>(n));
    double rho = 0.0;
    for (int i = 0; i + 1 < n; ++i) rho += pt[i] * pt[i];
    const double value = eval_kernel_radial(spec, std::sqrt(rho), pt[n - 1]);

    json doc{{"spec", kernel_to_json(spec)}, {"point", pt}, {"value", value},
             {"meta", metadata(ctx, spec.a, n)}};
    emit(ctx, "kernel_eval.json", doc);
    std::cout << "kernel eval: value = " << format_full(value) << "\n";
    return 0;
}

int run_kernel_norm(const RunContext& ctx, const json& cfg) {
    check_keys(cfg, "kernel norm config", {"kernel", "n"});
    const int n = as_int(cfg, "n");
    const KernelSpec spec = parse_kernel(cfg.at("kernel"), n);
    const double value = kernel_normalization(spec);
    const double closed = kernel_normalization_closed_form(spec);

    json doc{{"spec", kernel_to_json(spec)},
             {"value", value},
             {"closed_form", closed},
             {"meta", metadata(ctx, spec.a, n)}};
    emit(ctx, "kernel_norm.json", doc);
    std::cout << "kernel norm: quadrature = " << format_full(value)
              << ", closed form = " << format_full(closed) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// verify-invariance
// ---------------------------------------------------------------------------

template <int N>
struct NamedFn {
    std::string name;
    ScalarFn<N> fn;
};

template <int N>
std::vector<NamedFn<N>> invariance_test_functions() {
    std::vector<NamedFn<N>> fns;
    fns.push_back({"sin_exp_quadratic", [](const Point<N>& y) {
                       return std::sin(y[0]) * std::exp(y[N - 1]) + y[N - 1] * y[N - 1];
                   }});
    fns.push_back({"cos_mixed", [](const Point<N>& y) {
                       double tang = y[0];
                       if constexpr (N == 3) tang += 0.5 * y[1];
                       return std::cos(tang) + y[0] * y[N - 1];
                   }});
    fns.push_back({"gaussian_tilt", [](const Point<N>& y) {
                       return std::exp(-0.25 * norm2(y)) * (1.0 + y[N - 1]);
                   }});
    return fns;
}

template <int N>
std::vector<Point<N>> invariance_probe_box() {
    // Fixed probe region away from boundary and from the battery's centers.
    std::vector<Point<N>> probes;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            if constexpr (N == 2) {
                probes.push_back({0.45 + 0.3 * i, 0.8 + 0.3 * j});
            } else {
                for (int k = 0; k < 3; ++k)
                    probes.push_back({0.45 + 0.3 * i, -0.2 + 0.3 * k, 0.8 + 0.3 * j});
            }
        }
    return probes;
}

template <int N>
json invariance_battery_for(double a_value, const MoebiusMap<N>& map,
                            const std::vector<double>& steps, double& worst_rate) {
    const WeightExponent a(a_value);
    const auto probes = invariance_probe_box<N>();
    json cases = json::array();
    for (const auto& nf : invariance_test_functions<N>()) {
        const InvarianceRateReport rep = invariance_rate<N>(nf.fn, map, a, probes, steps);
        if (!rep.below_floor) worst_rate = std::min(worst_rate, rep.rate);
        json c{{"n", N},
               {"a", a_value},
               {"function", nf.name},
               {"map", {{"center", map.center}, {"radius", map.radius}}},
               {"h", rep.steps},
               {"residual_linf", rep.linf},
               {"rate", rep.below_floor ? json("exact") : json(rep.rate)}};
        cases.push_back(c);
    }
    return cases;
}

int run_verify_invariance(const RunContext& ctx, const std::optional<json>& cfg_opt) {
    std::vector<double> steps{1.0 / 32, 1.0 / 64, 1.0 / 128};
    double worst = std::numeric_limits<double>::infinity();
    json cases = json::array();

    if (cfg_opt) {
        const json& cfg = *cfg_opt;
        check_keys(cfg, "verify-invariance config", {"n", "a"}, {"center", "radius", "h_levels"});
        const int n = as_int(cfg, "n");
        const double a = as_double(cfg, "a");
        const double radius = cfg.contains("radius") ? as_double(cfg, "radius") : 1.0;
        if (cfg.contains("h_levels")) steps = as_vector(cfg, "h_levels");
        if (n == 2) {
            Point<2> c{-0.4, 0.0};
            if (cfg.contains("center")) {
                const auto cc = as_vector(cfg, "center", 2);
                c = {cc[0], cc[1]};
            }
            for (const auto& part : invariance_battery_for<2>(a, MoebiusMap<2>(c, radius), steps, worst))
                cases.push_back(part);
        } else if (n == 3) {
            Point<3> c{-0.4, 0.2, 0.0};
            if (cfg.contains("center")) {
                const auto cc = as_vector(cfg, "center", 3);
                c = {cc[0], cc[1], cc[2]};
            }
            for (const auto& part : invariance_battery_for<3>(a, MoebiusMap<3>(c, radius), steps, worst))
                cases.push_back(part);
        } else {
            throw validation_error("n must be 2 or 3");
        }
    } else {
        for (double a : {-0.5, 0.0, 0.5}) {
            for (const auto& part :
                 invariance_battery_for<2>(a, MoebiusMap<2>({-0.4, 0.0}, 1.0), steps, worst))
                cases.push_back(part);
        }
        for (double a : {-0.5, 0.0, 0.5, -1.0}) {  // includes the special exponent 2-n at n=3
            for (const auto& part :
                 invariance_battery_for<3>(a, MoebiusMap<3>({-0.4, 0.2, 0.0}, 1.0), steps, worst))
                cases.push_back(part);
        }
    }

    json doc{{"cases", cases},
             {"worst_rate", worst},
             {"meta", metadata(ctx, 0.0, 0)}};
    emit(ctx, "verify_invariance.json", doc);
    std::cout << "verify-invariance: " << cases.size() << " cases, worst rate " << worst << "\n";
    return worst >= 1.8 ? 0 : 2;
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

template <int N>
int run_solve_dim(const RunContext& ctx, const json& cfg) {
    const double L = as_double(cfg, "L"), H = as_double(cfg, "H");
    const auto nodes = as_vector(cfg, "nodes", 2);
    const HalfSpaceGrid<N> grid(L, H, static_cast<int>(nodes[0]), static_cast<int>(nodes[1]));
    const WeightExponent a(as_double(cfg, "a"));

    const std::string bc = as_string(cfg, "bc");
    const json& data = cfg.at("data");
    check_keys(data, "data", {"bottom", "far"});
    const ScalarFn<N> bottom = parse_field_spec<N>(data.at("bottom"), a, L, ctx.seed);
    const ScalarFn<N> far = parse_field_spec<N>(data.at("far"), a, L, ctx.seed + 1);

    BoundaryDatum<N> datum = [&] {
        if (bc == "dirichlet") return BoundaryDatum<N>::dirichlet(bottom, far);
        if (bc == "weighted_neumann") return BoundaryDatum<N>::weighted_neumann(bottom, far);
        throw validation_error("bc must be 'dirichlet' or 'weighted_neumann'");
    }();

    SolveConfig sc;
    sc.threads = ctx.threads;
    if (cfg.contains("tolerance")) sc.tolerance = as_double(cfg, "tolerance");
    if (!(sc.tolerance > 0.0)) throw validation_error("tolerance must be positive");
    if (cfg.contains("max_iterations")) sc.max_iterations = as_int(cfg, "max_iterations");
    if (cfg.contains("preconditioner")) {
        const std::string p = as_string(cfg, "preconditioner");
        if (p == "none")
            sc.preconditioner = SolveConfig::Preconditioner::none;
        else if (p == "diagonal")
            sc.preconditioner = SolveConfig::Preconditioner::diagonal;
        else
            throw validation_error("preconditioner must be 'none' or 'diagonal'");
    }

    auto [field, rep] = solve<N>(grid, a, datum, sc);
    const MaxPrincipleResult mp = max_principle_check<N>(field, datum, sc.tolerance);
    const FamilyFit fit = fit_family(field);

    write_field_csv<N>(ctx.out_dir / "solve_field.csv", field);
    json gridj{{"L", L}, {"H", H}, {"m_t", grid.tangential_nodes}, {"m_v", grid.vertical_nodes},
               {"h", grid.spacing}};
    json doc{{"iterations", rep.iterations},
             {"converged", rep.converged},
             {"residual_l2", rep.residual_l2_rel},
             {"residual_linf", rep.residual_linf},
             {"max_principle_ok", mp.ok},
             {"max_principle_violation", mp.worst_violation},
             {"c_star", fit.c_star},
             {"c2", fit.c2},
             {"fit_residual", fit.residual},
             {"fit_degenerate", fit.degenerate},
             {"warnings", rep.warnings},
             {"meta", metadata(ctx, a.a, N, gridj)}};
    emit(ctx, "solve_report.json", doc);
    std::cout << "solve: " << rep.iterations << " iterations, residual " << rep.residual_l2_rel
              << ", fit (c*=" << fit.c_star << ", c2=" << fit.c2 << ")\n";
    return 0;
}

int run_solve(const RunContext& ctx, const json& cfg) {
    check_keys(cfg, "solve config", {"n", "L", "H", "nodes", "a", "bc", "data"},
               {"tolerance", "max_iterations", "preconditioner"});
    const int n = as_int(cfg, "n");
    if (n == 2) return run_solve_dim<2>(ctx, cfg);
    if (n == 3) return run_solve_dim<3>(ctx, cfg);
    throw validation_error("n must be 2 or 3");
}

// ---------------------------------------------------------------------------
// extend / fraclap
// ---------------------------------------------------------------------------

template <int N>
int run_extend_dim(const RunContext& ctx, const json& cfg) {
    const WeightExponent a(as_double(cfg, "a"));
    const std::string kind = as_string(cfg, "kind");
    const BoundaryFunction<N - 1> f = parse_boundary_function<N - 1>(cfg.at("f"));

    std::vector<Point<N>> pts;
    for (const auto& row : cfg.at("points")) {
        if (!row.is_array() || row.size() != N)
            throw validation_error("each point needs n coordinates");
        Point<N> p{};
        for (int i = 0; i < N; ++i) p[i] = row[i].get<double>();
        pts.push_back(p);
    }

    ExtendOptions opt;
    opt.threads = ctx.threads;
    if (cfg.contains("tolerance")) opt.abs_tol = as_double(cfg, "tolerance");

    std::vector<double> values;
    if (kind == "dirichlet")
        values = extend_dirichlet<N>(f, a, pts, opt);
    else if (kind == "neumann")
        values = extend_neumann<N>(f, a, pts, opt);
    else
        throw validation_error("kind must be 'dirichlet' or 'neumann'");

    json rows = json::array();
    for (std::size_t i = 0; i < pts.size(); ++i)
        rows.push_back({{"point", pts[i]}, {"value", values[i]}, {"error_estimate", opt.abs_tol}});
    json doc{{"results", rows}, {"kind", kind}, {"meta", metadata(ctx, a.a, N)}};
    emit(ctx, "extend.json", doc);
    std::cout << "extend " << kind << ": " << pts.size() << " points evaluated\n";
    return 0;
}

int run_extend(const RunContext& ctx, const json& cfg) {
    check_keys(cfg, "extend config", {"kind", "n", "a", "f", "points"}, {"tolerance"});
    const int n = as_int(cfg, "n");
    if (n == 2) return run_extend_dim<2>(ctx, cfg);
    if (n == 3) return run_extend_dim<3>(ctx, cfg);
    throw validation_error("n must be 2 or 3");
}

int run_fraclap(const RunContext& ctx, const json& cfg) {
    check_keys(cfg, "fraclap config", {"s", "f", "xprime"}, {"base_step", "tolerance"});
    const FracOrder order = FracOrder::from_s(as_double(cfg, "s"));
    const BoundaryFunction<1> f = parse_boundary_function<1>(cfg.at("f"));
    const auto xs = as_vector(cfg, "xprime");

    FracLapOptions opt;
    opt.threads = ctx.threads;
    if (cfg.contains("base_step")) opt.base_step = as_double(cfg, "base_step");
    if (cfg.contains("tolerance")) opt.quad_tol = as_double(cfg, "tolerance");

    bool any_low_confidence = false;
    json rows = json::array();
    for (double x : xs) {
        const FracLapResult r = fractional_laplacian<1>(f, order, {x}, opt);
        any_low_confidence = any_low_confidence || r.low_confidence;
        json row{{"xprime", x},
                 {"value", r.value},
                 {"error_estimate", r.error_estimate},
                 {"low_confidence", r.low_confidence}};
        if (f.shape() == BoundaryFunction<1>::Shape::gaussian)
            row["spectral_oracle"] = fourier_oracle(f, order, x);
        rows.push_back(row);
    }
    json doc{{"results", rows}, {"s", order.s}, {"meta", metadata(ctx, order.a, 2)}};
    emit(ctx, "fraclap.json", doc);
    std::cout << "fraclap: " << xs.size() << " points, s = " << order.s
              << (any_low_confidence ? " (low-confidence extrapolation)" : "") << "\n";
    return any_low_confidence ? 2 : 0;
}

// ---------------------------------------------------------------------------
// moving-sphere / classify
// ---------------------------------------------------------------------------

template <int N>
json scan_to_json(const ScanReport<N>& rep) {
    json per_map = json::array();
    for (const auto& m : rep.per_map)
        per_map.push_back({{"center", m.map.center},
                           {"radius", m.map.radius},
                           {"min_w", m.min_w},
                           {"argmin", m.argmin}});
    json violations = json::array();
    for (const auto& v : rep.violations)
        violations.push_back({{"map_index", v.map_index}, {"point", v.point}, {"w", v.w}});
    return {{"global_min", rep.global_min},
            {"threshold", rep.threshold},
            {"per_map", per_map},
            {"violations", violations}};
}

template <int N>
int run_moving_sphere_dim(const RunContext& ctx, const json& cfg) {
    const WeightExponent a(as_double(cfg, "a"));

    const json& uspec = cfg.at("u");
    check_keys(uspec, "u", {"type"}, {"c_star", "c2", "path"});
    const std::string utype = as_string(uspec, "type");
    ScalarFn<N> u;
    std::optional<ScalarField<N>> field;
    if (utype == "family") {
        u = classified_profile<N>(a, as_double(uspec, "c_star"), as_double(uspec, "c2"));
    } else if (utype == "comparison_family") {
        u = comparison_family<N>(a);
    } else if (utype == "field_csv") {
        field = read_field_csv<N>(as_string(uspec, "path"), a);
        u = [&f = *field](const Point<N>& p) { return interpolate(f, p); };
    } else {
        throw validation_error("u type must be family, comparison_family, or field_csv");
    }

    std::size_t map_count = 50, probe_count = 1000;
    double lambda_min = 0.1, lambda_max = 1.0, center_halfwidth = 2.0;
    double box_halfwidth = 4.0, box_height = 4.0;
    if (cfg.contains("maps")) {
        const json& m = cfg.at("maps");
        check_keys(m, "maps", {}, {"count", "lambda_min", "lambda_max", "center_halfwidth"});
        if (m.contains("count")) map_count = static_cast<std::size_t>(as_int(m, "count"));
        if (m.contains("lambda_min")) lambda_min = as_double(m, "lambda_min");
        if (m.contains("lambda_max")) lambda_max = as_double(m, "lambda_max");
        if (m.contains("center_halfwidth")) center_halfwidth = as_double(m, "center_halfwidth");
    }
    if (cfg.contains("probes")) {
        const json& p = cfg.at("probes");
        check_keys(p, "probes", {}, {"count", "halfwidth", "height"});
        if (p.contains("count")) probe_count = static_cast<std::size_t>(as_int(p, "count"));
        if (p.contains("halfwidth")) box_halfwidth = as_double(p, "halfwidth");
        if (p.contains("height")) box_height = as_double(p, "height");
    }
    if (field) {  // keep everything inside the loaded grid
        box_halfwidth = field->grid.half_width;
        box_height = field->grid.height;
        center_halfwidth = 0.5 * box_halfwidth;
        lambda_max = std::min(lambda_max, 0.5 * box_halfwidth);
    }

    std::mt19937_64 rng(ctx.seed ^ 0x5bd1e995ULL);
    std::vector<MoebiusMap<N>> maps;
    while (maps.size() < map_count) {
        Point<N> c{};
        for (int i = 0; i + 1 < N; ++i) c[i] = uniform(rng, -center_halfwidth, center_halfwidth);
        const double lam = log_uniform(rng, lambda_min, lambda_max);
        if (field && std::abs(c[0]) + lam >= box_halfwidth) continue;
        maps.emplace_back(c, lam);
    }

    std::vector<Point<N>> probes;
    std::uint64_t h_index = 0;
    const unsigned bases[3] = {2, 3, 5};
    while (probes.size() < probe_count && h_index < 2000000) {
        Point<N> y{};
        for (int i = 0; i + 1 < N; ++i)
            y[i] = -box_halfwidth + 2.0 * box_halfwidth * halton(h_index, bases[i]);
        y[N - 1] = box_height * halton(h_index, bases[N - 1]);
        ++h_index;
        if (!(y[N - 1] > 1e-6)) continue;
        bool outside_all = true;
        for (const auto& m : maps) outside_all = outside_all && dist(y, m.center) > 1.01 * m.radius;
        if (outside_all) probes.push_back(y);
    }
    if (probes.size() < probe_count)
        throw numeric_error("could not place the requested probe count outside all spheres");

    const ScanReport<N> rep = moving_sphere_scan<N>(u, a, maps, probes, -1e-12, ctx.threads);
    json doc{{"scan", scan_to_json<N>(rep)},
             {"u", uspec},
             {"meta", metadata(ctx, a.a, N)}};
    emit(ctx, "moving_sphere.json", doc);
    std::cout << "moving-sphere: " << maps.size() << " maps x " << probes.size()
              << " probes, global min " << rep.global_min << "\n";
    return rep.global_min >= rep.threshold ? 0 : 2;
}

int run_moving_sphere(const RunContext& ctx, const json& cfg) {
    check_keys(cfg, "moving-sphere config", {"n", "a", "u"}, {"maps", "probes"});
    const int n = as_int(cfg, "n");
    if (n == 2) return run_moving_sphere_dim<2>(ctx, cfg);
    if (n == 3) return run_moving_sphere_dim<3>(ctx, cfg);
    throw validation_error("n must be 2 or 3");
}

template <int N>
int run_classify_dim(const RunContext& ctx, const json& cfg) {
    const double L = as_double(cfg, "L"), H = as_double(cfg, "H");
    const auto nodes = as_vector(cfg, "nodes", 2);
    const HalfSpaceGrid<N> grid(L, H, static_cast<int>(nodes[0]), static_cast<int>(nodes[1]));
    const WeightExponent a(as_double(cfg, "a"));
    const std::string scen = as_string(cfg, "scenario");
    const Scenario scenario = [&] {
        if (scen == "dirichlet") return Scenario::dirichlet;
        if (scen == "neumann") return Scenario::neumann;
        throw validation_error("scenario must be 'dirichlet' or 'neumann'");
    }();

    SolveConfig sc;
    sc.threads = ctx.threads;
    if (cfg.contains("tolerance")) sc.tolerance = as_double(cfg, "tolerance");

    std::size_t scan_maps = 12, scan_probes = 256;
    if (cfg.contains("scan")) {
        const json& s = cfg.at("scan");
        check_keys(s, "scan", {}, {"maps", "probes"});
        if (s.contains("maps")) scan_maps = static_cast<std::size_t>(as_int(s, "maps"));
        if (s.contains("probes")) scan_probes = static_cast<std::size_t>(as_int(s, "probes"));
    }

    const UniquenessReport<N> rep =
        uniqueness_experiment<N>(scenario, a, grid, sc, as_double(cfg, "c_star"),
                                 as_double(cfg, "c2"), ctx.seed, scan_maps, scan_probes);

    write_field_csv<N>(ctx.out_dir / "classify_field.csv", rep.field);
    json gridj{{"L", L}, {"H", H}, {"m_t", grid.tangential_nodes}, {"m_v", grid.vertical_nodes},
               {"h", grid.spacing}};
    json doc{{"fit",
              {{"c_star", rep.fit.c_star},
               {"c2", rep.fit.c2},
               {"residual", rep.fit.residual},
               {"degenerate", rep.fit.degenerate}}},
             {"tangential_variation", rep.variation},
             {"scan", scan_to_json<N>(rep.scan)},
             {"solve",
              {{"iterations", rep.solve.iterations},
               {"residual_l2", rep.solve.residual_l2_rel},
               {"warnings", rep.solve.warnings}}},
             {"meta", metadata(ctx, a.a, N, gridj)}};
    emit(ctx, "classify_report.json", doc);
    std::cout << "classify: fit (c*=" << rep.fit.c_star << ", c2=" << rep.fit.c2 << "), variation "
              << rep.variation << ", scan min " << rep.scan.global_min << "\n";
    return 0;
}

int run_classify(const RunContext& ctx, const json& cfg) {
    check_keys(cfg, "classify config",
               {"scenario", "n", "L", "H", "nodes", "a", "c_star", "c2"},
               {"tolerance", "scan"});
    const int n = as_int(cfg, "n");
    if (n == 2) return run_classify_dim<2>(ctx, cfg);
    if (n == 3) return run_classify_dim<3>(ctx, cfg);
    throw validation_error("n must be 2 or 3");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical toolkit for the weighted half-space operator div(x_n^a grad u)"};
    app.require_subcommand(1);
    app.fallthrough();  // --config/--out/--seed/--threads are valid after any subcommand

    std::string config_path, out_dir = ".";
    std::uint64_t seed = 0;
    int threads = 0;
    app.add_option("--config", config_path, "JSON config file")->group("io");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "RNG seed for sampled batteries");
    app.add_option("--threads", threads, "worker threads (default: HALFSPACE_THREADS or 1)");

    auto* kernel = app.add_subcommand("kernel", "evaluate kernels and their normalizations");
    auto* kernel_eval = kernel->add_subcommand("eval", "pointwise kernel value");
    auto* kernel_norm = kernel->add_subcommand("norm", "boundary mass of the kernel");
    auto* verify = app.add_subcommand("verify-invariance",
                                      "convergence certificate for the transform identity");
    auto* solve_cmd = app.add_subcommand("solve", "solve the discrete boundary-value problem");
    auto* extend_cmd = app.add_subcommand("extend", "evaluate the boundary-data extensions");
    auto* fraclap_cmd = app.add_subcommand("fraclap", "fractional Laplacian via the flux limit");
    auto* ms_cmd = app.add_subcommand("moving-sphere", "sphere-comparison scan");
    auto* classify_cmd = app.add_subcommand("classify", "uniqueness experiment on a solved field");

    CLI11_PARSE(app, argc, argv);

    RunContext ctx;
    ctx.out_dir = out_dir;
    ctx.seed = seed;
    if (threads > 0) {
        ctx.threads = threads;
    } else if (const char* env = std::getenv("HALFSPACE_THREADS")) {
        ctx.threads = std::max(1, std::atoi(env));
    }

    auto fail = [](int code, const char* type, const std::string& msg) {
        std::cerr << json{{"error", {{"type", type}, {"message", msg}}}}.dump() << "\n";
        return code;
    };

    try {
        auto need_config = [&]() {
            if (config_path.empty()) throw validation_error("this subcommand requires --config");
            return load_config(config_path);
        };
        if (kernel_eval->parsed()) return run_kernel_eval(ctx, need_config());
        if (kernel_norm->parsed()) return run_kernel_norm(ctx, need_config());
        if (kernel->parsed()) throw validation_error("kernel needs a sub-subcommand: eval or norm");
        if (verify->parsed()) {
            std::optional<json> cfg;
            if (!config_path.empty()) cfg = load_config(config_path);
            return run_verify_invariance(ctx, cfg);
        }
        if (solve_cmd->parsed()) return run_solve(ctx, need_config());
        if (extend_cmd->parsed()) return run_extend(ctx, need_config());
        if (fraclap_cmd->parsed()) return run_fraclap(ctx, need_config());
        if (ms_cmd->parsed()) return run_moving_sphere(ctx, need_config());
        if (classify_cmd->parsed()) return run_classify(ctx, need_config());
    } catch (const solver_failure& e) {
        return fail(2, "non_convergence", e.what());
    } catch (const numeric_error& e) {
        return fail(2, "numeric", e.what());
    } catch (const validation_error& e) {
        return fail(1, "validation", e.what());
    } catch (const precondition_error& e) {
        return fail(1, "precondition", e.what());
    } catch (const domain_error& e) {
        return fail(1, "domain", e.what());
    } catch (const singularity_error& e) {
        return fail(1, "singularity", e.what());
    } catch (const std::exception& e) {
        return fail(1, "error", e.what());
    }
    return 0;
}
