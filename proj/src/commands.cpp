#include "mpdarcy/commands.hpp"

#include "mpdarcy/darcy.hpp"
#include "mpdarcy/error.hpp"
#include "mpdarcy/io.hpp"
#include "mpdarcy/resolved.hpp"
#include "mpdarcy/unfolding.hpp"
#include "mpdarcy/version.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <future>
#include <numbers>
#include <ostream>
#include <random>

namespace mpdarcy {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json matrix_json(const Eigen::Matrix2d& m)
{
    return json::array({m(0, 0), m(0, 1), m(1, 0), m(1, 1)});
}

Eigen::Matrix2d matrix_from(const json& j, const std::string& name)
{
    if (!j.is_array() || j.size() != 4)
        throw Error(ErrorCode::io, "permeability matrix " + name + " must hold 4 numbers");
    Eigen::Matrix2d m;
    m << j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>();
    return m;
}

json stats_json(const SolveStats& s)
{
    return {{"iterations", s.iterations},
            {"relative_residual", s.relative_residual},
            {"divergence_residual", s.divergence_residual},
            {"converged", s.converged},
            {"wall_seconds", s.wall_seconds}};
}

class Report {
public:
    Report(std::string command, const RunConfig& cfg) : out_dir_(cfg.out_dir)
    {
        j_["command"] = std::move(command);
        j_["version"] = version;
        j_["config"] = to_json(cfg);
        j_["checks"] = json::array();
        j_["manifest"] = json::array();
        j_["stages"] = json::object();
    }

    json& operator[](const char* key) { return j_[key]; }

    void check(const std::string& name, bool pass, double value, double limit, bool asserted = true)
    {
        j_["checks"].push_back(
            {{"name", name}, {"pass", pass}, {"value", value}, {"limit", limit}, {"asserted", asserted}});
        if (asserted && !pass)
            ok_ = false;
    }

    void file(const std::string& path)
    {
        j_["manifest"].push_back(
            {{"path", fs::relative(path, out_dir_).generic_string()}, {"fnv1a64", file_hash(path)}});
    }

    json finish(const std::string& name, std::chrono::steady_clock::time_point t0)
    {
        j_["ok"] = ok_;
        j_["wall_seconds"] = seconds_since(t0);
        write_text_file((fs::path(out_dir_) / (name + "_report.json")).string(), j_.dump(2) + "\n");
        return j_;
    }

    bool ok() const { return ok_; }

private:
    std::string out_dir_;
    json j_;
    bool ok_ = true;
};

void ensure_dir(const std::string& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw Error(ErrorCode::io, "cannot create output directory " + dir + ": " + ec.message());
}

std::string out_path(const RunConfig& cfg, const std::string& name)
{
    return (fs::path(cfg.out_dir) / name).string();
}

struct CellStage {
    CellGeometry geometry;
    std::vector<MicropolarCellSolution> solutions;
    PermeabilitySet perm;
};

// Geometry and solutions are kept together so the solutions' pointers stay valid.
std::unique_ptr<CellStage> run_cell_stage(const RunConfig& cfg, Report& rep)
{
    const auto t0 = std::chrono::steady_clock::now();
    auto st = std::make_unique<CellStage>();
    st->geometry = build_cell_geometry(cfg.obstacle, cfg.n);
    st->solutions = solve_all_cell_problems(st->geometry, cfg.params, cfg.solver);
    st->perm = compute_permeabilities(st->solutions);

    json solves = json::array();
    for (const auto& s : st->solutions) {
        json e = stats_json(s.stats);
        e["i"] = s.i;
        e["k"] = s.k;
        solves.push_back(e);
    }
    const auto& r = st->perm.residuals;
    const double tol = cfg.solver.tol;
    rep.check("K1 symmetric", r.k1_symmetry <= 1e-8, r.k1_symmetry, 1e-8);
    rep.check("L2 symmetric", r.l2_symmetry <= 1e-8, r.l2_symmetry, 1e-8);
    rep.check("K1 positive definite", r.k1_min_eigenvalue > 0.0, r.k1_min_eigenvalue, 0.0);
    rep.check("i=3 solutions vanish", r.trivial_norm <= 10.0 * tol, r.trivial_norm, 10.0 * tol);
    rep.check("cell divergence", r.max_divergence <= tol, r.max_divergence, tol);
    if (cfg.params.N2 == 0.0) {
        rep.check("K2 vanishes at N2=0", st->perm.K2.norm() <= 10.0 * tol, st->perm.K2.norm(), 10.0 * tol);
        rep.check("L1 vanishes at N2=0", st->perm.L1.norm() <= 10.0 * tol, st->perm.L1.norm(), 10.0 * tol);
    }
    rep["stages"]["cell"] = {{"porosity", st->geometry.porosity},
                             {"unknowns", 2 * st->geometry.grid.num_active_faces() + st->geometry.grid.num_fluid_cells()},
                             {"solves", solves},
                             {"wall_seconds", seconds_since(t0)}};
    rep["permeability"] = permeability_to_json(st->perm);
    return st;
}

MacroSolution run_darcy_stage(const RunConfig& cfg, const PermeabilitySet& perm, Report& rep)
{
    const auto t0 = std::chrono::steady_clock::now();
    MacroProblem mp;
    mp.grid = cfg.macro;
    mp.f_prime = cfg.f.resolve(mp.grid);
    mp.g_prime = cfg.g.resolve(mp.grid);
    mp.perm = perm;
    MacroSolution sol = solve_darcy(mp);

    const double tol = 1e-10;
    rep.check("Darcy flux residual", sol.flux.relative_residual <= tol, sol.flux.relative_residual, tol);
    rep.check("Darcy global mass balance", sol.flux.global_balance <= 1e-12, sol.flux.global_balance, 1e-12);
    rep.check("mean-zero pressure", std::abs(sol.p.mean()) <= 1e-13, std::abs(sol.p.mean()), 1e-13);
    rep["stages"]["darcy"] = {{"grid", cfg.macro.cells},
                              {"iterations", sol.flux.iterations},
                              {"relative_residual", sol.flux.relative_residual},
                              {"max_cell_flux", sol.flux.max_cell_flux},
                              {"boundary_flux", sol.flux.boundary_flux},
                              {"global_balance", sol.flux.global_balance},
                              {"max_abs_U", sol.U.cwiseAbs().maxCoeff()},
                              {"max_abs_W", sol.W.cwiseAbs().maxCoeff()},
                              {"wall_seconds", seconds_since(t0)}};
    if (cfg.write_csv) {
        const auto p = out_path(cfg, "macro.csv");
        write_macro_csv(p, sol);
        rep.file(p);
    }
    if (cfg.write_vtk) {
        const auto p = out_path(cfg, "macro.vtk");
        write_macro_vtk(p, sol);
        rep.file(p);
    }
    if (cfg.plot) {
        const auto p = out_path(cfg, "macro.svg");
        write_macro_plot(p, sol);
        rep.file(p);
    }
    return sol;
}

void check_fingerprint(const RunConfig& cfg, const PermeabilitySet& perm, const std::string& path)
{
    const std::string expected = permeability_fingerprint(cfg.obstacle, cfg.n, cfg.params);
    if (perm.fingerprint() != expected)
        throw Error(ErrorCode::config, "permeability file " + path + " has fingerprint " + perm.fingerprint() +
                                           " but the configuration requires " + expected);
}

std::vector<double> unfolding_field(const ThinDomainGeometry& g, bool random)
{
    std::vector<double> v(static_cast<std::size_t>(g.num_interior_cells()), 0.0);
    std::mt19937_64 rng(20240917);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    constexpr double pi = std::numbers::pi;
    for (int k = 0; k < g.interior[2]; ++k)
        for (int j = 0; j < g.interior[1]; ++j)
            for (int i = 0; i < g.interior[0]; ++i) {
                const double r = uni(rng);
                if (!g.interior_fluid(i, j, k))
                    continue;
                const double x = (i + 0.5) * g.spacing[0];
                const double y = (j + 0.5) * g.spacing[1];
                const double z = (k + 0.5) * g.spacing[2] / g.h;
                v[static_cast<std::size_t>(g.interior_linear(i, j, k))] =
                    random ? r : std::sin(2.0 * pi * x) * std::cos(3.0 * pi * y) * (1.0 + z * z);
            }
    return v;
}

void run_unfolding_checks(const RunConfig& cfg, Report& rep)
{
    const auto t0 = std::chrono::steady_clock::now();
    const ThinDomainGeometry g =
        build_thin_domain(cfg.macro.extent, cfg.unfold_eps, cfg.unfold_h, cfg.obstacle, cfg.unfold_m);
    json fields = json::array();
    for (bool random : {false, true}) {
        const std::string tag = random ? "random" : "smooth";
        const UnfoldingCheck c = check_unfolding_identities(g, unfolding_field(g, random));
        rep.check("unfolding norm identity (" + tag + ")", c.norm_identity <= 1e-13, c.norm_identity, 1e-13);
        rep.check("unfolding horizontal derivative identity (" + tag + ")", c.horizontal_identity <= 1e-13,
                  c.horizontal_identity, 1e-13);
        rep.check("unfolding vertical derivative identity (" + tag + ")", c.vertical_identity <= 1e-13,
                  c.vertical_identity, 1e-13);
        rep.check("fold(unfold) bitwise identity (" + tag + ")", c.fold_roundtrip, c.fold_roundtrip ? 0.0 : 1.0, 0.0);
    }
    rep["stages"]["unfolding"] = {{"eps", cfg.unfold_eps},
                                  {"h", cfg.unfold_h},
                                  {"m", cfg.unfold_m},
                                  {"slab_cells", g.interior},
                                  {"blocks", g.blocks},
                                  {"wall_seconds", seconds_since(t0)}};
}

void run_resolved_sweep(const RunConfig& cfg, Report& rep)
{
    if (cfg.eps.empty())
        throw Error(ErrorCode::config, "validation.eps: full validation needs at least one eps");
    const auto t0 = std::chrono::steady_clock::now();
    auto cell = run_cell_stage(cfg, rep);
    MacroProblem mp;
    mp.grid = cfg.macro;
    mp.f_prime = cfg.f.resolve(mp.grid);
    mp.g_prime = cfg.g.resolve(mp.grid);
    mp.perm = cell->perm;
    const MacroSolution macro = solve_darcy(mp);

    std::vector<ThinDomainGeometry> geoms;
    geoms.reserve(cfg.eps.size());
    for (double e : cfg.eps)
        geoms.push_back(build_thin_domain(cfg.macro.extent, e, cfg.h_for(e), cfg.obstacle, cfg.m));
    std::vector<std::future<ResolvedRun>> jobs;
    for (const auto& g : geoms)
        jobs.push_back(std::async(std::launch::async,
                                  [&cfg, &g, &mp] { return solve_resolved(g, cfg.params, mp.f_prime, mp.g_prime, cfg.solver); }));
    std::vector<ResolvedRun> runs;
    for (auto& j : jobs)
        runs.push_back(j.get());

    json rows = json::array();
    std::vector<std::pair<double, double>> discrepancy;
    for (const auto& r : runs) {
        const double e = r.geometry->eps;
        const DarcyComparison cmp = compare_with_darcy(r, macro);
        discrepancy.emplace_back(e, cmp.velocity_difference);
        const std::string tag = "eps=" + std::to_string(e);
        rep.check("energy identity " + tag, r.energy_residual <= 1e-8, r.energy_residual, 1e-8);
        rep.check("resolved divergence " + tag, r.divergence <= cfg.solver.tol, r.divergence, cfg.solver.tol);
        rows.push_back({{"eps", e},
                        {"h", r.geometry->h},
                        {"slab_cells", r.geometry->interior},
                        {"obstacle_copies", r.geometry->obstacle_copies.size()},
                        {"norms", {{"u", r.norms.u}, {"Du", r.norms.Du}, {"w", r.norms.w}, {"Dw", r.norms.Dw}}},
                        {"stats", stats_json(r.stats)},
                        {"darcy_comparison",
                         {{"velocity_difference", cmp.velocity_difference},
                          {"resolved_velocity_norm", cmp.resolved_velocity_norm},
                          {"macro_velocity_norm", cmp.macro_velocity_norm},
                          {"rotation_difference", cmp.rotation_difference},
                          {"resolved_rotation_norm", cmp.resolved_rotation_norm},
                          {"macro_rotation_norm", cmp.macro_rotation_norm}}}});
    }
    json stage = {{"runs", rows}};

    const ScalingReport sr = scaling_report(runs);
    const auto csv = out_path(cfg, "scaling.csv");
    write_scaling_csv(csv, sr);
    rep.file(csv);
    const char* names[4] = {"u", "Du", "w", "Dw"};
    json slopes = json::object();
    for (std::size_t q = 0; q < 4; ++q) {
        slopes[names[q]] = {{"slope", sr.slopes[q]},
                            {"theory", sr.theory[q]},
                            {"pass", sr.pass[q]},
                            {"in_band", sr.in_band[q]},
                            {"ratio_spread", sr.ratio_spread[q]}};
        rep.check(std::string("scaling slope |") + names[q] + "|", sr.pass[q], sr.slopes[q],
                  sr.theory[q] - ScalingReport::slope_tolerance, false);
    }
    rep.check("normalized |u| ratio within factor 2", sr.ratio_spread[0] <= 2.0, sr.ratio_spread[0], 2.0);
    rep.check("normalized |w| ratio within factor 2", sr.ratio_spread[2] <= 2.0, sr.ratio_spread[2], 2.0);
    std::sort(discrepancy.begin(), discrepancy.end(), [](auto& a, auto& b) { return a.first > b.first; });
    bool decreasing = true;
    for (std::size_t i = 1; i < discrepancy.size(); ++i)
        decreasing = decreasing && discrepancy[i].second < discrepancy[i - 1].second;
    rep.check("resolved-vs-Darcy discrepancy decreases with eps", decreasing,
              discrepancy.back().second, discrepancy.front().second);
    stage["scaling"] = {{"h_slope", sr.h_slope}, {"slopes", slopes}, {"bounded", sr.bounded}};
    stage["wall_seconds"] = seconds_since(t0);
    rep["stages"]["resolved"] = stage;
}

}  // namespace

json permeability_to_json(const PermeabilitySet& p)
{
    const auto& r = p.residuals;
    return {{"format", "mpdarcy-permeability"},
            {"version", 1},
            {"fingerprint", p.fingerprint()},
            {"geometry_fingerprint", p.geometry_fingerprint()},
            {"params", {{"N2", p.params.N2}, {"Rc", p.params.Rc}}},
            {"geometry",
             {{"kind", std::string(to_string(p.obstacle.kind))},
              {"center", p.obstacle.center},
              {"size", p.obstacle.size},
              {"axis", p.obstacle.axis},
              {"n", p.n}}},
            {"matrices", {{"K1", matrix_json(p.K1)}, {"K2", matrix_json(p.K2)}, {"L1", matrix_json(p.L1)}, {"L2", matrix_json(p.L2)}}},
            {"tol", p.tol},
            {"residuals",
             {{"K1_symmetry", r.k1_symmetry},
              {"L2_symmetry", r.l2_symmetry},
              {"K2_symmetry", r.k2_symmetry},
              {"K2_minus_L1T", r.k2_l1_transpose},
              {"K1_min_eigenvalue", r.k1_min_eigenvalue},
              {"i3_norm", r.trivial_norm},
              {"max_divergence", r.max_divergence}}}};
}

PermeabilitySet permeability_from_json(const json& j)
{
    try {
        PermeabilitySet p;
        if (j.at("format").get<std::string>() != "mpdarcy-permeability")
            throw Error(ErrorCode::io, "not a permeability file");
        p.params.N2 = j.at("params").at("N2").get<double>();
        p.params.Rc = j.at("params").at("Rc").get<double>();
        const json& g = j.at("geometry");
        p.obstacle.kind = parse_obstacle_kind(g.at("kind").get<std::string>());
        p.obstacle.center = g.at("center").get<Vec3>();
        p.obstacle.size = g.at("size").get<Vec3>();
        p.obstacle.axis = g.at("axis").get<int>();
        p.n = g.at("n").get<int>();
        const json& m = j.at("matrices");
        p.K1 = matrix_from(m.at("K1"), "K1");
        p.K2 = matrix_from(m.at("K2"), "K2");
        p.L1 = matrix_from(m.at("L1"), "L1");
        p.L2 = matrix_from(m.at("L2"), "L2");
        p.tol = j.at("tol").get<double>();
        const json& r = j.at("residuals");
        p.residuals.k1_symmetry = r.at("K1_symmetry").get<double>();
        p.residuals.l2_symmetry = r.at("L2_symmetry").get<double>();
        p.residuals.k2_symmetry = r.at("K2_symmetry").get<double>();
        p.residuals.k2_l1_transpose = r.at("K2_minus_L1T").get<double>();
        p.residuals.k1_min_eigenvalue = r.at("K1_min_eigenvalue").get<double>();
        p.residuals.trivial_norm = r.at("i3_norm").get<double>();
        p.residuals.max_divergence = r.at("max_divergence").get<double>();
        if (j.at("fingerprint").get<std::string>() != p.fingerprint())
            throw Error(ErrorCode::io, "stored fingerprint does not match its geometry and parameters");
        return p;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::io, std::string("malformed permeability file: ") + e.what());
    }
}

void write_permeability_file(const std::string& path, const PermeabilitySet& p)
{
    write_text_file(path, permeability_to_json(p).dump(2) + "\n");
}

PermeabilitySet read_permeability_file(const std::string& path)
{
    if (!fs::exists(path))
        throw Error(ErrorCode::io, "permeability file not found: " + path);
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::io, "permeability file " + path + " is not valid JSON: " + e.what());
    }
    try {
        return permeability_from_json(j);
    } catch (const Error& e) {
        throw Error(e.code(), "permeability file " + path + ": " + e.what());
    }
}

json cmd_cell(const RunConfig& cfg)
{
    const auto t0 = std::chrono::steady_clock::now();
    ensure_dir(cfg.out_dir);
    Report rep("cell", cfg);
    auto st = run_cell_stage(cfg, rep);
    const auto p = out_path(cfg, "permeability.json");
    write_permeability_file(p, st->perm);
    rep.file(p);
    return rep.finish("cell", t0);
}

json cmd_darcy(const RunConfig& cfg, const std::string& perm_path)
{
    const auto t0 = std::chrono::steady_clock::now();
    const std::string path = perm_path.empty() ? out_path(cfg, "permeability.json") : perm_path;
    const PermeabilitySet perm = read_permeability_file(path);
    check_fingerprint(cfg, perm, path);
    ensure_dir(cfg.out_dir);
    Report rep("darcy", cfg);
    rep["permeability"] = permeability_to_json(perm);
    rep["permeability_file"] = {{"path", path}, {"fnv1a64", file_hash(path)}};
    run_darcy_stage(cfg, perm, rep);
    return rep.finish("darcy", t0);
}

json cmd_pipeline(const RunConfig& cfg)
{
    const auto t0 = std::chrono::steady_clock::now();
    ensure_dir(cfg.out_dir);
    Report rep("pipeline", cfg);
    auto st = run_cell_stage(cfg, rep);
    const auto path = out_path(cfg, "permeability.json");
    write_permeability_file(path, st->perm);
    rep.file(path);
    // The macro stage consumes the file, exactly as a separate darcy run would.
    const PermeabilitySet perm = read_permeability_file(path);
    check_fingerprint(cfg, perm, path);
    run_darcy_stage(cfg, perm, rep);
    return rep.finish("pipeline", t0);
}

json cmd_validate(const RunConfig& cfg, bool full)
{
    const auto t0 = std::chrono::steady_clock::now();
    if (full && cfg.eps.empty())
        throw Error(ErrorCode::config, "validation.eps: full validation needs at least one eps");
    ensure_dir(cfg.out_dir);
    Report rep("validate", cfg);
    rep["mode"] = full ? "full" : "unfolding";
    run_unfolding_checks(cfg, rep);
    if (full)
        run_resolved_sweep(cfg, rep);
    return rep.finish("validate", t0);
}

int run_command(const std::string& name, const CommandOptions& opts, std::ostream& out, std::ostream& err)
{
    try {
        RunConfig cfg = opts.config_path.empty() ? parse_config(json::object()) : load_config(opts.config_path);
        if (!opts.out_dir.empty())
            cfg.out_dir = opts.out_dir;
        if (opts.format) {
            if (*opts.format == "csv")
                cfg.write_csv = true, cfg.write_vtk = false;
            else if (*opts.format == "vtk")
                cfg.write_csv = false, cfg.write_vtk = true;
            else if (*opts.format == "both")
                cfg.write_csv = cfg.write_vtk = true;
            else
                throw Error(ErrorCode::config, "--format must be csv, vtk or both");
        }
        if (opts.plot)
            cfg.plot = true;

        json rep;
        if (name == "cell")
            rep = cmd_cell(cfg);
        else if (name == "darcy")
            rep = cmd_darcy(cfg, opts.perm_path);
        else if (name == "pipeline")
            rep = cmd_pipeline(cfg);
        else if (name == "validate")
            rep = cmd_validate(cfg, opts.full);
        else
            throw Error(ErrorCode::config, "unknown command '" + name + "'");

        for (const auto& c : rep["checks"])
            out << (c["pass"].get<bool>() ? "PASS " : "FAIL ") << c["name"].get<std::string>() << "  ("
                << c["value"].dump() << " vs " << c["limit"].dump()
                << (c["asserted"].get<bool>() ? "" : ", reported only") << ")\n";
        out << name << ": " << (rep["ok"].get<bool>() ? "ok" : "FAILED") << ", report in "
            << (fs::path(cfg.out_dir) / (name + "_report.json")).string() << "\n";
        return rep["ok"].get<bool>() ? 0 : 1;
    } catch (const Error& e) {
        err << "error[" << to_string(e.code()) << "]: " << e.what() << "\n";
        return is_numerical(e.code()) ? 1 : 2;
    } catch (const std::exception& e) {
        err << "error[Internal]: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace mpdarcy
