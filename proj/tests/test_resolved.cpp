#include "mpdarcy/cell.hpp"
#include "mpdarcy/io.hpp"
#include "mpdarcy/resolved.hpp"
#include "support.hpp"

#include <json.hpp>

#include <cmath>

using namespace mpdarcy;

namespace {

const ObstacleSpec sphere = ObstacleSpec::sphere({0.0, 0.0, 0.0}, 0.25);
const PhysicalParams params{0.5, 1.0};

struct Quarter {
    ThinDomainGeometry geom = build_thin_domain({1.0, 1.0}, 0.25, 0.5, sphere, 8);
    ResolvedRun run = solve_resolved(geom, params, ForceField::solenoidal_sine(), ForceField::zero(), SolverOptions{});
};

const Quarter& quarter()
{
    static const Quarter q;
    return q;
}

MacroSolution macro_for(const ForceField& f, const PermeabilitySet& perm)
{
    MacroProblem mp;
    mp.grid.cells = {64, 64};
    mp.f_prime = f;
    mp.g_prime = ForceField::zero();
    mp.perm = perm;
    return solve_darcy(mp);
}

const PermeabilitySet& coarse_perm()
{
    static const PermeabilitySet p = compute_permeabilities(build_cell_geometry(sphere, 8), params, SolverOptions{});
    return p;
}

}  // namespace

TEST_CASE("zero forcing gives the zero solution")
{
    const ThinDomainGeometry g = build_thin_domain({1.0, 1.0}, 0.25, 0.5, sphere, 4);
    const ResolvedRun r = solve_resolved(g, params, ForceField::zero(), ForceField::zero(), SolverOptions{});
    CHECK(r.norms.u == 0.0);
    CHECK(r.norms.Du == 0.0);
    CHECK(r.norms.w == 0.0);
    CHECK(r.norms.Dw == 0.0);
    CHECK(r.R_M == doctest::Approx(0.0625));
}

TEST_CASE("resolved run invariants")
{
    const ResolvedRun& r = quarter().run;
    CHECK(r.stats.converged);
    CHECK(r.divergence <= 1e-10);
    CHECK(r.energy_residual <= 1e-8);
    CHECK(r.u.size() == quarter().geom.grid.num_active_faces());
    const ScalingRow row = make_scaling_row(0.25, 0.5, r.norms);
    for (double v : row.ratios) {
        CHECK(std::isfinite(v));
        CHECK(v > 0.0);
    }
}

TEST_CASE("baseline constants match the golden file")
{
    const auto j = nlohmann::json::parse(read_text_file(std::string(MPDARCY_GOLDEN_DIR) + "/resolved_baseline.json"));
    const Quarter& q = quarter();
    REQUIRE(j["eps"].get<double>() == q.geom.eps);
    REQUIRE(j["h"].get<double>() == q.geom.h);
    REQUIRE(j["m"].get<int>() == q.geom.cells_per_period);
    REQUIRE(j["f"].get<std::string>() == q.run.f_prime.describe());
    const double rel = j["relative_tolerance"].get<double>();
    const ScalingRow row = make_scaling_row(q.geom.eps, q.geom.h, q.run.norms);
    const double norms[4] = {q.run.norms.u, q.run.norms.Du, q.run.norms.w, q.run.norms.Dw};
    const char* keys[4] = {"u", "Du", "w", "Dw"};
    for (int i = 0; i < 4; ++i) {
        CHECK(norms[i] == doctest::Approx(j["norms"][keys[i]].get<double>()).epsilon(rel));
        CHECK(row.ratios[static_cast<std::size_t>(i)] == doctest::Approx(j["ratios"][keys[i]].get<double>()).epsilon(rel));
    }
}

TEST_CASE("synthetic power law recovers the theoretical slopes")
{
    std::vector<ScalingRow> rows;
    for (double e : {0.25, 0.125, 0.0625}) {
        const double h = std::sqrt(e), s = std::sqrt(h);
        rows.push_back(make_scaling_row(e, h, ResolvedNorms{3.0 * e * e * s, 2.0 * e * s, 0.5 * e * s, 7.0 * s}));
    }
    const ScalingReport rep = scaling_report(rows);
    CHECK(rep.h_slope == doctest::Approx(0.5).epsilon(1e-12));
    const double theory[4] = {2.25, 1.25, 1.25, 0.25};
    for (std::size_t q = 0; q < 4; ++q) {
        CHECK(rep.theory[q] == doctest::Approx(theory[q]).epsilon(1e-12));
        CHECK(rep.slopes[q] == doctest::Approx(theory[q]).epsilon(1e-12));
        CHECK(rep.pass[q]);
        CHECK(rep.in_band[q]);
        CHECK(rep.ratio_spread[q] == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(rep.bounded);
    CHECK(rep.rows.front().eps == 0.25);
}

TEST_CASE("scaling report flags slow decay")
{
    std::vector<ScalingRow> rows;
    for (double e : {0.25, 0.125}) {
        const double h = std::sqrt(e);
        rows.push_back(make_scaling_row(e, h, ResolvedNorms{e, e, e, 1.0}));
    }
    const ScalingReport rep = scaling_report(rows);
    CHECK_FALSE(rep.pass[0]);
    CHECK_FALSE(rep.bounded);
}

TEST_CASE("scaling report needs two distinct eps")
{
    const ScalingRow r = make_scaling_row(0.25, 0.5, ResolvedNorms{1.0, 1.0, 1.0, 1.0});
    CHECK_ERROR(scaling_report(std::vector<ScalingRow>{r, r}), insufficient_runs);
    CHECK_ERROR(scaling_report(std::vector<ScalingRow>{r}), insufficient_runs);
    CHECK_ERROR(scaling_report(std::vector<ResolvedRun>{quarter().run}), insufficient_runs);
}

TEST_CASE("scaling CSV export")
{
    std::vector<ScalingRow> rows{make_scaling_row(0.25, 0.5, ResolvedNorms{1, 2, 3, 4}),
                                 make_scaling_row(0.125, 0.35, ResolvedNorms{0.5, 1, 1.5, 3})};
    write_scaling_csv("resolved_test_scaling.csv", scaling_report(rows));
    const std::string text = read_text_file("resolved_test_scaling.csv");
    CHECK(text.rfind("eps,h,norm_u,norm_Du,norm_w,norm_Dw,ratio_u,ratio_Du,ratio_w,ratio_Dw\n", 0) == 0);
}

TEST_CASE("resolved runs reject sampled forces")
{
    const ThinDomainGeometry g = build_thin_domain({1.0, 1.0}, 0.25, 0.5, sphere, 4);
    const ForceField s = ForceField::samples({2, 2}, {{1, 0}, {1, 0}, {1, 0}, {1, 0}});
    CHECK_ERROR(solve_resolved(g, params, s, ForceField::zero(), SolverOptions{}), precondition);
    CHECK_ERROR(solve_resolved(g, PhysicalParams{1.5, 1.0}, ForceField::zero(), ForceField::zero(), SolverOptions{}),
                precondition);
}

TEST_CASE("comparison with the Darcy prediction")
{
    const Quarter& q = quarter();
    const MacroSolution macro = macro_for(ForceField::solenoidal_sine(), coarse_perm());
    const DarcyComparison c = compare_with_darcy(q.run, macro);
    CHECK(c.blocks == 16);
    CHECK(c.macro_velocity_norm > 0.0);
    CHECK(c.resolved_velocity_norm > 0.0);
    CHECK(std::isfinite(c.velocity_difference));
    CHECK(std::isfinite(c.rotation_difference));
    CHECK(c.velocity_difference < 1.0);
}

TEST_CASE("conservative force: both average velocities are small")
{
    const ThinDomainGeometry g = build_thin_domain({1.0, 1.0}, 0.25, 0.5, sphere, 8);
    const ResolvedRun r = solve_resolved(g, params, ForceField::constant({1.0, 0.0}), ForceField::zero(), SolverOptions{});
    const MacroSolution macro = macro_for(ForceField::constant({1.0, 0.0}), coarse_perm());
    const DarcyComparison c = compare_with_darcy(r, macro);
    CHECK(c.macro_velocity_norm <= 1e-9);
    CHECK(c.resolved_velocity_norm <= 1e-6);
    CHECK(r.norms.u <= 1e-6 * quarter().run.norms.u + 1e-12);
}

TEST_CASE("comparison guards")
{
    const Quarter& q = quarter();
    PermeabilitySet other = coarse_perm();
    other.params.N2 = 0.25;
    CHECK_ERROR(compare_with_darcy(q.run, macro_for(ForceField::solenoidal_sine(), other)), incompatible_inputs);
    CHECK_ERROR(compare_with_darcy(q.run, macro_for(ForceField::solenoidal_sine(2.0), coarse_perm())),
                incompatible_inputs);
    PermeabilitySet moved = coarse_perm();
    moved.obstacle = ObstacleSpec::sphere({0.0, 0.0, 0.0}, 0.2);
    CHECK_ERROR(compare_with_darcy(q.run, macro_for(ForceField::solenoidal_sine(), moved)), incompatible_inputs);
    MacroProblem mp;
    mp.grid.cells = {4, 4};
    mp.grid.extent = {1.0, 1.0};
    mp.f_prime = ForceField::solenoidal_sine();
    mp.g_prime = ForceField::zero();
    mp.perm = coarse_perm();
    MacroSolution coarse_grid = solve_darcy(mp);
    CHECK_NOTHROW(compare_with_darcy(q.run, coarse_grid));
    mp.grid.extent = {2.0, 1.0};
    CHECK_ERROR(compare_with_darcy(q.run, solve_darcy(mp)), incompatible_inputs);
}

TEST_CASE("eps sweep: normalized ratios stay bounded and the Darcy discrepancy shrinks")
{
    const Quarter& q = quarter();
    const ThinDomainGeometry g8 = build_thin_domain({1.0, 1.0}, 0.125, std::sqrt(0.125), sphere, 8);
    const ResolvedRun& r4 = q.run;
    const ResolvedRun r8 = solve_resolved(g8, params, ForceField::solenoidal_sine(), ForceField::zero(), SolverOptions{});
    CHECK(r8.energy_residual <= 1e-8);
    const ScalingReport rep = scaling_report(std::vector<ResolvedRun>{r4, r8});
    CHECK(rep.bounded);
    CHECK(rep.ratio_spread[0] <= 2.0);
    CHECK(rep.ratio_spread[2] <= 2.0);
    const PermeabilitySet perm = compute_permeabilities(build_cell_geometry(sphere, 16), params, SolverOptions{});
    const MacroSolution macro = macro_for(ForceField::solenoidal_sine(), perm);
    const double d4 = compare_with_darcy(r4, macro).velocity_difference;
    const double d8 = compare_with_darcy(r8, macro).velocity_difference;
    CHECK(d8 < d4);
}
