#include "mpdarcy/cell.hpp"
#include "mpdarcy/darcy.hpp"
#include "mpdarcy/io.hpp"
#include "support.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace mpdarcy;

namespace {

PermeabilitySet synthetic_perm()
{
    PermeabilitySet p;
    p.K1 << 0.08, 0.012, 0.012, 0.05;
    p.K2 << 0.01, -0.004, 0.002, 0.003;
    p.L1 << 0.002, 0.001, -0.003, 0.004;
    p.L2 << 0.09, 0.0, 0.0, 0.07;
    return p;
}

PermeabilitySet isotropic_perm(double kappa)
{
    PermeabilitySet p;
    p.K1 = kappa * Eigen::Matrix2d::Identity();
    p.L2 = Eigen::Matrix2d::Identity();
    return p;
}

MacroSolution solve_on(int n, const ForceField& f, const ForceField& g, const PermeabilitySet& perm)
{
    MacroProblem mp;
    mp.grid.cells = {n, n};
    mp.f_prime = f;
    mp.g_prime = g;
    mp.perm = perm;
    return solve_darcy(mp);
}

// Relative L2 error of the cell pressures against block averages of a finer solution.
double pressure_error(const MacroSolution& coarse, const MacroSolution& fine)
{
    const int r = fine.grid.cells[0] / coarse.grid.cells[0];
    double e = 0.0, nrm = 0.0;
    for (int j = 0; j < coarse.grid.cells[1]; ++j)
        for (int i = 0; i < coarse.grid.cells[0]; ++i) {
            double a = 0.0;
            for (int b = 0; b < r; ++b)
                for (int d = 0; d < r; ++d)
                    a += fine.p[fine.grid.index(i * r + d, j * r + b)];
            a /= r * r;
            e += std::pow(coarse.p[coarse.grid.index(i, j)] - a, 2);
            nrm += a * a;
        }
    return std::sqrt(e / nrm);
}

struct CellFixture {
    CellGeometry geom = build_cell_geometry(ObstacleSpec::sphere({0.0, 0.0, 0.0}, 0.25), 8);
    PhysicalParams params{0.5, 1.0};
    std::vector<MicropolarCellSolution> sols = solve_all_cell_problems(geom, params, SolverOptions{});
    PermeabilitySet perm = compute_permeabilities(sols);
};

const CellFixture& cells()
{
    static const CellFixture f;
    return f;
}

}  // namespace

TEST_CASE("conservative forces are absorbed by the pressure")
{
    const double tol = 1e-10;
    for (int n : {64, 128}) {
        const MacroSolution c = solve_on(n, ForceField::constant({1.0, 0.5}), ForceField::zero(), synthetic_perm());
        CHECK(c.U.cwiseAbs().maxCoeff() <= 10.0 * tol);
        double pm = 0.0;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const Vec2 z = c.grid.center(i, j);
                pm += z[0] + 0.5 * z[1];
            }
        pm /= n * n;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const Vec2 z = c.grid.center(i, j);
                CHECK(c.p[c.grid.index(i, j)] == doctest::Approx(z[0] + 0.5 * z[1] - pm).epsilon(1e-12).scale(1.0));
            }

        const MacroSolution q = solve_on(n, ForceField::gradient_cosine(1.0), ForceField::zero(), synthetic_perm());
        CHECK(q.U.cwiseAbs().maxCoeff() <= 10.0 * tol);
        CHECK(q.W.cwiseAbs().maxCoeff() <= 10.0 * tol);
        double err = 0.0;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const Vec2 z = q.grid.center(i, j);
                const double exact = std::cos(std::numbers::pi * z[0]) * std::cos(std::numbers::pi * z[1]);
                err = std::max(err, std::abs(q.p[q.grid.index(i, j)] - exact));
            }
        CHECK(err <= 1e-12);
    }
}

TEST_CASE("Neumann pressure converges at second order")
{
    const PermeabilitySet id = isotropic_perm(1.0);
    const MacroSolution s64 = solve_on(64, ForceField::solenoidal_sine(), ForceField::zero(), id);
    const MacroSolution s128 = solve_on(128, ForceField::solenoidal_sine(), ForceField::zero(), id);
    const MacroSolution s512 = solve_on(512, ForceField::solenoidal_sine(), ForceField::zero(), id);
    const double order = std::log2(pressure_error(s64, s512) / pressure_error(s128, s512));
    CHECK(order >= 1.8);
    CHECK(s512.flux.converged);
    CHECK(s512.flux.relative_residual <= 1e-10);
}

TEST_CASE("pressure gauge: adding a gradient changes only the pressure")
{
    const PermeabilitySet perm = synthetic_perm();
    const ForceField f = ForceField::solenoidal_sine(0.8);
    const ForceField g = ForceField::solenoidal_sine(0.3);
    const MacroSolution a = solve_on(64, f, g, perm);
    const MacroSolution b = solve_on(64, f.plus_gradient(ForceField::gradient_cosine(0.7)), g, perm);
    const MacroSolution c = solve_on(64, f.plus_gradient(ForceField::constant({-2.0, 1.0})), g, perm);
    const double scale = a.U.norm();
    CHECK((a.U - b.U).norm() <= 10.0 * 1e-10 * scale);
    CHECK((a.U - c.U).norm() <= 10.0 * 1e-10 * scale);
    CHECK((a.W - b.W).norm() <= 10.0 * 1e-10 * a.W.norm());
    CHECK((a.p - b.p).norm() > 1e-3);
}

TEST_CASE("isotropic Darcy law is rotation equivariant")
{
    const int n = 32;
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<Vec2> f(n * n), fr(n * n);
    for (auto& v : f)
        v = {uni(rng), uni(rng)};
    // Quarter turn of the square: cell (i, j) moves to (n-1-j, i), vectors turn by 90 degrees.
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const Vec2 v = f[static_cast<std::size_t>(i + n * j)];
            fr[static_cast<std::size_t>((n - 1 - j) + n * i)] = {-v[1], v[0]};
        }
    const PermeabilitySet perm = isotropic_perm(0.07);
    const MacroSolution a = solve_on(n, ForceField::samples({n, n}, f), ForceField::zero(), perm);
    const MacroSolution b = solve_on(n, ForceField::samples({n, n}, fr), ForceField::zero(), perm);
    double diff = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const int src = a.grid.index(i, j), dst = b.grid.index(n - 1 - j, i);
            diff = std::max(diff, std::abs(b.U(dst, 0) + a.U(src, 1)));
            diff = std::max(diff, std::abs(b.U(dst, 1) - a.U(src, 0)));
            diff = std::max(diff, std::abs(b.p[dst] - a.p[src]));
        }
    CHECK(diff <= 1e-8 * a.U.cwiseAbs().maxCoeff());
}

TEST_CASE("mass balance, mean-zero pressure and constitutive laws")
{
    const PermeabilitySet perm = synthetic_perm();
    const MacroSolution s = solve_on(64, ForceField::solenoidal_sine(), ForceField::solenoidal_sine(0.5), perm);
    CHECK(s.flux.converged);
    CHECK(s.flux.global_balance <= 1e-12);
    CHECK(s.flux.boundary_flux == 0.0);
    CHECK(s.flux.relative_residual <= 1e-10);
    CHECK(s.flux.max_cell_flux <= 1e-8);
    CHECK(std::abs(s.p.mean()) <= 1e-13);
    for (int c = 0; c < s.grid.size(); ++c) {
        const Eigen::Vector2d d = s.drive.row(c).transpose(), g = s.g.row(c).transpose();
        const Eigen::Vector2d U = perm.K1 * d + perm.K2 * g, W = perm.L1 * d + perm.L2 * g;
        CHECK((s.U.row(c).transpose() - U).norm() <= 1e-14);
        CHECK((s.W.row(c).transpose() - W).norm() <= 1e-14);
    }
    CHECK(s.U.cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("Darcy preconditions")
{
    PermeabilitySet bad = synthetic_perm();
    bad.K1 << 1.0, 0.0, 0.0, -0.1;
    CHECK_ERROR(solve_on(16, ForceField::solenoidal_sine(), ForceField::zero(), bad), not_positive_definite);
    bad.K1 << 1.0, 0.5, 0.0, 1.0;
    CHECK_ERROR(solve_on(16, ForceField::solenoidal_sine(), ForceField::zero(), bad), not_positive_definite);
    CHECK_ERROR(solve_on(3, ForceField::solenoidal_sine(), ForceField::zero(), synthetic_perm()), precondition);
}

TEST_CASE("macro grid cell location")
{
    MacroGrid g;
    g.cells = {4, 8};
    CHECK(g.locate({0.3, 0.3}) == std::array<int, 2>{1, 2});
    CHECK(g.locate({1.0, 1.0}) == std::array<int, 2>{3, 7});
    CHECK(g.locate({-0.1, 0.0}) == std::array<int, 2>{0, 0});
}

TEST_CASE("two-scale reconstruction averages to the macro fields")
{
    const auto& cf = cells();
    PermeabilitySet perm = cf.perm;
    const MacroSolution m = solve_on(16, ForceField::solenoidal_sine(), ForceField::solenoidal_sine(0.4), perm);
    const TwoScaleEvaluator ev(cf.sols, m);
    const double tol = 1e-10;
    for (int j = 0; j < 16; ++j)
        for (int i = 0; i < 16; ++i) {
            const auto f = ev.fields_at(i, j);
            const int c = m.grid.index(i, j);
            const double scale = m.U.row(c).norm() + 1e-300;
            for (int a = 0; a < 2; ++a) {
                CHECK(std::abs(integrate_component(cf.geom.grid, f.u, a) - m.U(c, a)) <= 1e-10 * scale);
                CHECK(std::abs(integrate_component(cf.geom.grid, f.w, a) - m.W(c, a)) <=
                      1e-10 * (m.W.row(c).norm() + 1e-300));
            }
            CHECK(std::abs(integrate_component(cf.geom.grid, f.u, 2)) <= 10.0 * tol);
        }
    const auto p = ev.evaluate({0.5, 0.5}, {0.0, 0.0, 0.0});
    CHECK(p.u == Vec3{0.0, 0.0, 0.0});
    CHECK(p.pi == 0.0);
    const auto q = ev.evaluate({0.5, 0.5}, {0.4, 0.4, 0.4});
    CHECK(std::abs(q.u[0]) > 0.0);
}

TEST_CASE("zero forcing reconstructs zero fields")
{
    const auto& cf = cells();
    const MacroSolution m = solve_on(8, ForceField::zero(), ForceField::zero(), cf.perm);
    CHECK(m.U.norm() == 0.0);
    const TwoScaleEvaluator ev(cf.sols, m);
    for (int j = 0; j < 8; ++j)
        for (int i = 0; i < 8; ++i) {
            const auto f = ev.fields_at(i, j);
            CHECK(f.u.norm() + f.w.norm() + f.pi.norm() == 0.0);
        }
}

TEST_CASE("two-scale evaluator rejects foreign cell solutions")
{
    const auto& cf = cells();
    const MacroSolution m = solve_on(8, ForceField::solenoidal_sine(), ForceField::zero(), synthetic_perm());
    CHECK_ERROR(TwoScaleEvaluator(cf.sols, m), inconsistent_inputs);
    const MacroSolution ok = solve_on(8, ForceField::solenoidal_sine(), ForceField::zero(), cf.perm);
    std::vector<MicropolarCellSolution> partial(cf.sols.begin(), cf.sols.begin() + 2);
    CHECK_ERROR(TwoScaleEvaluator(partial, ok), inconsistent_inputs);
    const TwoScaleEvaluator ev(cf.sols, ok);
    CHECK_ERROR(ev.fields_at(8, 0), precondition);
}

TEST_CASE("macro exports")
{
    const MacroSolution s = solve_on(8, ForceField::solenoidal_sine(), ForceField::zero(), synthetic_perm());
    write_macro_csv("darcy_test.csv", s);
    std::istringstream in(read_text_file("darcy_test.csv"));
    std::string line;
    std::getline(in, line);
    CHECK(line == "z1,z2,p,U1,U2,W1,W2");
    int rows = 0;
    while (std::getline(in, line))
        ++rows;
    CHECK(rows == 64);
    write_macro_vtk("darcy_test.vtk", s);
    CHECK(read_text_file("darcy_test.vtk").find("STRUCTURED_POINTS") != std::string::npos);
    write_macro_plot("darcy_test.svg", s);
    CHECK(read_text_file("darcy_test.svg").find("<svg") != std::string::npos);
}

TEST_CASE("force fields")
{
    const Vec2 ext{2.0, 1.0};
    const ForceField c = ForceField::constant({1.0, -1.0});
    CHECK(c.has_potential());
    CHECK(c.value({0.3, 0.2}, ext) == Vec2{1.0, -1.0});
    CHECK(c.sampled_part({0.3, 0.2}, ext) == Vec2{0.0, 0.0});
    const ForceField s = ForceField::solenoidal_sine(2.0);
    CHECK_FALSE(s.has_potential());
    CHECK(s.value({0.0, 0.5}, ext)[0] == doctest::Approx(2.0));
    const ForceField sum = s.plus_gradient(ForceField::gradient_cosine(1.0));
    CHECK(sum.has_potential());
    CHECK(sum.describe() == "solenoidal_sine(2)+gradient_cosine(1)");
    CHECK_ERROR(s.plus_gradient(s), config);
    CHECK_ERROR(c.plus_gradient(c), config);
    CHECK(ForceField::zero().is_zero());
    CHECK(ForceField::constant({0.0, 0.0}).is_zero());
    CHECK_FALSE(sum.is_zero());
    CHECK(parse_force_preset("gradient_cosine") == ForcePreset::gradient_cosine);
    CHECK_ERROR(parse_force_preset("swirl"), config);
}

TEST_CASE("force samples from CSV")
{
    {
        std::ofstream out("force_test.csv");
        out << "z1,z2,f1,f2\n";
        for (int j = 0; j < 4; ++j)
            for (int i = 0; i < 4; ++i)
                out << (i + 0.5) / 4 << "," << (j + 0.5) / 4 << "," << i << "," << -j << "\n";
    }
    const ForceField f = ForceField::from_csv("force_test.csv", {1.0, 1.0}, {4, 4});
    CHECK(f.preset() == ForcePreset::samples);
    CHECK(f.value({0.6, 0.9}, {1.0, 1.0}) == Vec2{2.0, -3.0});
    {
        std::ofstream out("force_short.csv");
        out << "z1,z2,f1,f2\n0.125,0.125,1,1\n";
    }
    CHECK_ERROR(ForceField::from_csv("force_short.csv", {1.0, 1.0}, {4, 4}), config);
    {
        std::ofstream out("force_off.csv");
        out << "z1,z2,f1,f2\n0.2,0.125,1,1\n";
    }
    CHECK_ERROR(ForceField::from_csv("force_off.csv", {1.0, 1.0}, {4, 4}), config);
}
