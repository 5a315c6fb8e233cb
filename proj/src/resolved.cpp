#include "mpdarcy/resolved.hpp"

#include "mpdarcy/error.hpp"
#include "mpdarcy/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace mpdarcy {

ResolvedRun solve_resolved(const ThinDomainGeometry& geom, const PhysicalParams& params, const ForceField& f_prime,
                           const ForceField& g_prime, const SolverOptions& options)
{
    params.validate();
    if (f_prime.preset() == ForcePreset::samples || g_prime.preset() == ForcePreset::samples)
        throw Error(ErrorCode::precondition, "resolved runs need analytic force presets");
    ResolvedRun run;
    run.geometry = &geom;
    run.params = params;
    run.R_M = geom.eps * geom.eps * params.Rc;
    run.f_prime = f_prime;
    run.g_prime = g_prime;

    const PhysicalParams physical{params.N2, run.R_M};
    const MicropolarSystem system = MicropolarSystem::assemble(geom, physical, options.preconditioner);
    const Vec2 extent{geom.omega_extent[0], geom.omega_extent[1]};
    const double eps = geom.eps;
    const Vector fu = sample_faces(geom.grid, ThinDomainGeometry::origin, [&](const Vec3& x) {
        const Vec2 v = f_prime.value({x[0], x[1]}, extent);
        return Vec3{v[0], v[1], 0.0};
    });
    const Vector fw = sample_faces(geom.grid, ThinDomainGeometry::origin, [&](const Vec3& x) {
        const Vec2 v = g_prime.value({x[0], x[1]}, extent);
        return Vec3{eps * v[0], eps * v[1], 0.0};
    });

    SaddleSolution s = solve(system, fu, fw, options);
    if (!s.stats.converged)
        throw Error(ErrorCode::no_convergence,
                    "resolved solve at eps=" + std::to_string(eps) + " did not converge: relative residual " +
                        std::to_string(s.stats.relative_residual));
    const auto& ops = system.ops();
    run.energy_residual = fu.norm() + fw.norm() > 0.0 ? energy_identity_residual(system, fu, fw, s) : 0.0;
    run.divergence = s.stats.divergence_residual;
    run.norms.u = std::sqrt(ops.volume * s.u.squaredNorm());
    run.norms.w = std::sqrt(ops.volume * s.w.squaredNorm());
    run.norms.Du = std::sqrt(std::max(0.0, ops.inner(ops.A * s.u, s.u)));
    run.norms.Dw = std::sqrt(std::max(0.0, ops.inner(ops.A * s.w, s.w)));
    run.u = std::move(s.u);
    run.w = std::move(s.w);
    run.p = std::move(s.pi);
    run.stats = s.stats;
    return run;
}

ScalingRow make_scaling_row(double eps, double h, const ResolvedNorms& norms)
{
    ScalingRow r;
    r.eps = eps;
    r.h = h;
    r.norms = norms;
    const double sh = std::sqrt(h);
    r.ratios = {norms.u / (eps * eps * sh), norms.Du / (eps * sh), norms.w / (eps * sh), norms.Dw / sh};
    return r;
}

ScalingReport scaling_report(std::vector<ScalingRow> rows)
{
    std::sort(rows.begin(), rows.end(), [](const ScalingRow& a, const ScalingRow& b) { return a.eps > b.eps; });
    int distinct = rows.empty() ? 0 : 1;
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].eps != rows[i - 1].eps)
            ++distinct;
    if (distinct < 2)
        throw Error(ErrorCode::insufficient_runs, "scaling report needs runs at two or more distinct eps");

    // Least-squares slope of log y against log eps.
    auto fit = [&](auto&& y) {
        double mx = 0.0, my = 0.0;
        const double n = static_cast<double>(rows.size());
        for (const auto& r : rows) {
            mx += std::log(r.eps) / n;
            my += std::log(y(r)) / n;
        }
        double sxy = 0.0, sxx = 0.0;
        for (const auto& r : rows) {
            const double dx = std::log(r.eps) - mx;
            sxy += dx * (std::log(y(r)) - my);
            sxx += dx * dx;
        }
        return sxy / sxx;
    };

    ScalingReport rep;
    rep.h_slope = fit([](const ScalingRow& r) { return r.h; });
    const double base[4] = {2.0, 1.0, 1.0, 0.0};
    for (int q = 0; q < 4; ++q) {
        const auto idx = static_cast<std::size_t>(q);
        rep.slopes[idx] = fit([q](const ScalingRow& r) {
            const double v[4] = {r.norms.u, r.norms.Du, r.norms.w, r.norms.Dw};
            return v[q];
        });
        rep.theory[idx] = base[q] + 0.5 * rep.h_slope;
        rep.pass[idx] = rep.slopes[idx] >= rep.theory[idx] - ScalingReport::slope_tolerance;
        rep.in_band[idx] = std::abs(rep.slopes[idx] - rep.theory[idx]) <= ScalingReport::slope_tolerance;
        double lo = rows.front().ratios[idx], hi = lo;
        for (const auto& r : rows) {
            lo = std::min(lo, r.ratios[idx]);
            hi = std::max(hi, r.ratios[idx]);
        }
        rep.ratio_spread[idx] = lo > 0.0 ? hi / lo : INFINITY;
    }
    rep.bounded = rep.ratio_spread[0] <= ScalingReport::ratio_band && rep.ratio_spread[2] <= ScalingReport::ratio_band;
    rep.rows = std::move(rows);
    return rep;
}

ScalingReport scaling_report(const std::vector<ResolvedRun>& runs)
{
    std::vector<ScalingRow> rows;
    for (const auto& r : runs) {
        if (r.geometry == nullptr)
            throw Error(ErrorCode::precondition, "resolved run without geometry");
        rows.push_back(make_scaling_row(r.geometry->eps, r.geometry->h, r.norms));
    }
    for (std::size_t i = 1; i < runs.size(); ++i)
        if (!(runs[i].params == runs[0].params))
            throw Error(ErrorCode::incompatible_inputs, "scaling runs use different physical parameters");
    return scaling_report(std::move(rows));
}

void write_scaling_csv(const std::string& path, const ScalingReport& report)
{
    std::string out = "eps,h,norm_u,norm_Du,norm_w,norm_Dw,ratio_u,ratio_Du,ratio_w,ratio_Dw\n";
    char buf[512];
    for (const auto& r : report.rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.eps, r.h,
                      r.norms.u, r.norms.Du, r.norms.w, r.norms.Dw, r.ratios[0], r.ratios[1], r.ratios[2],
                      r.ratios[3]);
        out += buf;
    }
    const char* names[4] = {"u", "Du", "w", "Dw"};
    for (int q = 0; q < 4; ++q) {
        const auto i = static_cast<std::size_t>(q);
        std::snprintf(buf, sizeof buf, "# slope_%s,%.17g,theory,%.17g,%s\n", names[q], report.slopes[i],
                      report.theory[i], report.pass[i] ? "PASS" : "FAIL");
        out += buf;
    }
    write_text_file(path, out);
}

DarcyComparison compare_with_darcy(const ResolvedRun& run, const MacroSolution& macro)
{
    if (run.geometry == nullptr)
        throw Error(ErrorCode::incompatible_inputs, "resolved run without geometry");
    const ThinDomainGeometry& geom = *run.geometry;
    if (!(run.params == macro.params))
        throw Error(ErrorCode::incompatible_inputs, "resolved run and macro solution use different N2 or Rc");
    if (run.f_prime.describe() != macro.f_description || run.g_prime.describe() != macro.g_description)
        throw Error(ErrorCode::incompatible_inputs, "resolved run and macro solution use different forces");
    if (!(geom.obstacle == macro.obstacle))
        throw Error(ErrorCode::incompatible_inputs, "resolved run and macro solution use different obstacles");
    if (std::abs(geom.omega_extent[0] - macro.grid.extent[0]) > 1e-12 ||
        std::abs(geom.omega_extent[1] - macro.grid.extent[1]) > 1e-12)
        throw Error(ErrorCode::incompatible_inputs, "resolved run and macro solution use different omega");

    const MacGrid& grid = geom.grid;
    const int m = geom.cells_per_period;
    const int b0 = geom.blocks[0];
    const int b1 = geom.blocks[1];
    const int nb = b0 * b1;
    std::vector<std::array<double, 4>> res(static_cast<std::size_t>(nb), {0.0, 0.0, 0.0, 0.0});
    const auto& n = geom.interior;
    for (int k = 0; k < n[2]; ++k)
        for (int j = 0; j < n[1]; ++j)
            for (int i = 0; i < n[0]; ++i) {
                const int cell = geom.padded_cell(i, j, k);
                auto& acc = res[static_cast<std::size_t>(i / m + b0 * (j / m))];
                for (int a = 0; a < 2; ++a) {
                    const int lo = grid.face_dof(a, cell);
                    const int hi = grid.face_dof(a, grid.shifted(cell, a, 1));
                    acc[static_cast<std::size_t>(a)] +=
                        0.5 * ((lo < 0 ? 0.0 : run.u[lo]) + (hi < 0 ? 0.0 : run.u[hi]));
                    acc[static_cast<std::size_t>(2 + a)] +=
                        0.5 * ((lo < 0 ? 0.0 : run.w[lo]) + (hi < 0 ? 0.0 : run.w[hi]));
                }
            }
    const double eps = geom.eps;
    const double cells_per_column = static_cast<double>(m) * m * n[2];
    for (auto& acc : res) {
        acc[0] /= cells_per_column * eps * eps;
        acc[1] /= cells_per_column * eps * eps;
        acc[2] /= cells_per_column * eps;
        acc[3] /= cells_per_column * eps;
    }

    std::vector<std::array<double, 4>> mac(static_cast<std::size_t>(nb), {0.0, 0.0, 0.0, 0.0});
    std::vector<int> count(static_cast<std::size_t>(nb), 0);
    const MacroGrid& g = macro.grid;
    for (int i2 = 0; i2 < g.cells[1]; ++i2)
        for (int i1 = 0; i1 < g.cells[0]; ++i1) {
            const Vec2 z = g.center(i1, i2);
            const int k0 = std::clamp(static_cast<int>(std::floor(z[0] / eps)), 0, b0 - 1);
            const int k1 = std::clamp(static_cast<int>(std::floor(z[1] / eps)), 0, b1 - 1);
            const auto b = static_cast<std::size_t>(k0 + b0 * k1);
            const int c = g.index(i1, i2);
            mac[b][0] += macro.U(c, 0);
            mac[b][1] += macro.U(c, 1);
            mac[b][2] += macro.W(c, 0);
            mac[b][3] += macro.W(c, 1);
            ++count[b];
        }
    for (std::size_t b = 0; b < mac.size(); ++b) {
        if (count[b] == 0)
            throw Error(ErrorCode::incompatible_inputs, "macro grid is coarser than the eps lattice");
        for (double& v : mac[b])
            v /= count[b];
    }

    DarcyComparison cmp;
    cmp.blocks = nb;
    double du = 0.0, ru = 0.0, mu = 0.0, dw = 0.0, rw = 0.0, mw = 0.0;
    for (std::size_t b = 0; b < res.size(); ++b) {
        for (int a = 0; a < 2; ++a) {
            const auto ia = static_cast<std::size_t>(a);
            du += std::pow(res[b][ia] - mac[b][ia], 2);
            ru += res[b][ia] * res[b][ia];
            mu += mac[b][ia] * mac[b][ia];
            dw += std::pow(res[b][2 + ia] - mac[b][2 + ia], 2);
            rw += res[b][2 + ia] * res[b][2 + ia];
            mw += mac[b][2 + ia] * mac[b][2 + ia];
        }
    }
    cmp.resolved_velocity_norm = std::sqrt(ru / nb);
    cmp.macro_velocity_norm = std::sqrt(mu / nb);
    // Relative to the macro field unless it vanishes (absorbed or decoupled case).
    const double floor2 = 1e-24 * nb;
    cmp.velocity_difference = mu > floor2 ? std::sqrt(du / mu) : std::sqrt(du / nb);
    cmp.resolved_rotation_norm = std::sqrt(rw / nb);
    cmp.macro_rotation_norm = std::sqrt(mw / nb);
    cmp.rotation_difference = mw > floor2 ? std::sqrt(dw / mw) : std::sqrt(dw / nb);
    return cmp;
}

}  // namespace mpdarcy
