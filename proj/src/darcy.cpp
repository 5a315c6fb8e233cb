#include "mpdarcy/darcy.hpp"

#include "mpdarcy/error.hpp"
#include "mpdarcy/io.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace mpdarcy {

namespace {

std::string g17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct PcgResult {
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

// Jacobi-preconditioned CG for the singular Neumann matrix; every residual
// and search direction is kept mean-zero.
PcgResult pcg_mean_zero(const SparseMatrix& S, const Vector& b, Vector& x, double tol, int max_iter)
{
    PcgResult res;
    x.setZero(b.size());
    Vector r = b;
    r.array() -= r.mean();
    const double bnorm = r.norm();
    if (bnorm == 0.0) {
        res.converged = true;
        return res;
    }
    const Vector inv_diag = S.diagonal().cwiseInverse();
    Vector z = inv_diag.cwiseProduct(r);
    z.array() -= z.mean();
    Vector d = z;
    Vector q(b.size());
    double rz = r.dot(z);
    for (int it = 1; it <= max_iter; ++it) {
        q.noalias() = S * d;
        const double alpha = rz / d.dot(q);
        x += alpha * d;
        r -= alpha * q;
        r.array() -= r.mean();
        res.iterations = it;
        res.relative_residual = r.norm() / bnorm;
        if (res.relative_residual <= tol) {
            res.converged = true;
            break;
        }
        z = inv_diag.cwiseProduct(r);
        z.array() -= z.mean();
        const double rz_new = r.dot(z);
        d = z + (rz_new / rz) * d;
        rz = rz_new;
    }
    x.array() -= x.mean();
    return res;
}

// Centered differences in the interior, one-sided on the boundary layer.
Eigen::MatrixX2d center_gradient(const MacroGrid& g, const Vector& p)
{
    Eigen::MatrixX2d grad(g.size(), 2);
    const int n1 = g.cells[0];
    const int n2 = g.cells[1];
    for (int i2 = 0; i2 < n2; ++i2)
        for (int i1 = 0; i1 < n1; ++i1) {
            const int c = g.index(i1, i2);
            const int w = g.index(std::max(i1 - 1, 0), i2);
            const int e = g.index(std::min(i1 + 1, n1 - 1), i2);
            const int s = g.index(i1, std::max(i2 - 1, 0));
            const int n = g.index(i1, std::min(i2 + 1, n2 - 1));
            const int sx = std::min(i1 + 1, n1 - 1) - std::max(i1 - 1, 0);
            const int sy = std::min(i2 + 1, n2 - 1) - std::max(i2 - 1, 0);
            grad(c, 0) = (p[e] - p[w]) / (sx * g.dx());
            grad(c, 1) = (p[n] - p[s]) / (sy * g.dy());
        }
    return grad;
}

void check_spd(const Eigen::Matrix2d& K)
{
    const double scale = K.norm();
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw Error(ErrorCode::not_positive_definite, "K1 is zero or not finite");
    if ((K - K.transpose()).norm() > 1e-8 * scale)
        throw Error(ErrorCode::not_positive_definite, "K1 is not symmetric");
    const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(0.5 * (K + K.transpose())).eigenvalues()[0];
    if (!(lmin > 0.0))
        throw Error(ErrorCode::not_positive_definite,
                    "K1 is not positive definite: smallest eigenvalue " + g17(lmin));
}

}  // namespace

std::array<int, 2> MacroGrid::locate(const Vec2& z) const
{
    return {std::clamp(static_cast<int>(std::floor(z[0] / dx())), 0, cells[0] - 1),
            std::clamp(static_cast<int>(std::floor(z[1] / dy())), 0, cells[1] - 1)};
}

MacroSolution solve_darcy(const MacroProblem& problem, double tol)
{
    const MacroGrid& g = problem.grid;
    if (g.cells[0] < 4 || g.cells[1] < 4)
        throw Error(ErrorCode::precondition, "macro grid needs at least 4 cells per axis");
    if (!(g.extent[0] > 0.0 && g.extent[1] > 0.0))
        throw Error(ErrorCode::precondition, "macro domain extents must be positive");
    if (!(tol > 0.0 && tol < 1.0))
        throw Error(ErrorCode::precondition, "Darcy tolerance must lie in (0, 1)");
    const auto& perm = problem.perm;
    check_spd(perm.K1);

    const int n1 = g.cells[0];
    const int n2 = g.cells[1];
    const int nc = g.size();
    const double dx = g.dx();
    const double dy = g.dy();
    const double k11 = perm.K1(0, 0);
    const double k22 = perm.K1(1, 1);
    const double k12 = 0.5 * (perm.K1(0, 1) + perm.K1(1, 0));

    Eigen::MatrixX2d fs(nc, 2), gg(nc, 2);
    Vector q(nc);
    for (int i2 = 0; i2 < n2; ++i2)
        for (int i1 = 0; i1 < n1; ++i1) {
            const int c = g.index(i1, i2);
            const Vec2 z = g.center(i1, i2);
            const Vec2 a = problem.f_prime.sampled_part(z, g.extent);
            const Vec2 b = problem.g_prime.value(z, g.extent);
            fs.row(c) << a[0], a[1];
            gg.row(c) << b[0], b[1];
            q[c] = problem.f_prime.potential(z, g.extent);
            if (!std::isfinite(a[0] + a[1] + b[0] + b[1] + q[c]))
                throw Error(ErrorCode::precondition, "force field is not finite");
        }
    const Eigen::MatrixX2d kg = gg * perm.K2.transpose();

    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(nc) * (k12 != 0.0 ? 24 : 8));
    Vector b = Vector::Zero(nc);

    auto face = [&](int lo, int hi, double coef, double flux, double length) {
        t.emplace_back(lo, lo, coef);
        t.emplace_back(hi, hi, coef);
        t.emplace_back(lo, hi, -coef);
        t.emplace_back(hi, lo, -coef);
        b[hi] += flux * length;
        b[lo] -= flux * length;
    };
    for (int i2 = 0; i2 < n2; ++i2)
        for (int i1 = 1; i1 < n1; ++i1) {
            const int lo = g.index(i1 - 1, i2);
            const int hi = g.index(i1, i2);
            const double f1 = 0.5 * (fs(lo, 0) + fs(hi, 0));
            const double q1 = 0.5 * (kg(lo, 0) + kg(hi, 0));
            face(lo, hi, k11 * dy / dx, k11 * f1 + q1, dy);
        }
    for (int i2 = 1; i2 < n2; ++i2)
        for (int i1 = 0; i1 < n1; ++i1) {
            const int lo = g.index(i1, i2 - 1);
            const int hi = g.index(i1, i2);
            const double f2 = 0.5 * (fs(lo, 1) + fs(hi, 1));
            const double q2 = 0.5 * (kg(lo, 1) + kg(hi, 1));
            face(lo, hi, k22 * dx / dy, k22 * f2 + q2, dx);
        }
    if (k12 != 0.0) {
        for (int i2 = 1; i2 < n2; ++i2)
            for (int i1 = 1; i1 < n1; ++i1) {
                const int cells[4] = {g.index(i1 - 1, i2 - 1), g.index(i1, i2 - 1), g.index(i1 - 1, i2),
                                      g.index(i1, i2)};
                const double cx[4] = {-0.5 / dx, 0.5 / dx, -0.5 / dx, 0.5 / dx};
                const double cy[4] = {-0.5 / dy, -0.5 / dy, 0.5 / dy, 0.5 / dy};
                const double w = k12 * dx * dy;
                double fv1 = 0.0, fv2 = 0.0;
                for (int a = 0; a < 4; ++a) {
                    fv1 += 0.25 * fs(cells[a], 0);
                    fv2 += 0.25 * fs(cells[a], 1);
                }
                for (int a = 0; a < 4; ++a) {
                    for (int c = 0; c < 4; ++c)
                        t.emplace_back(cells[a], cells[c], w * (cy[a] * cx[c] + cx[a] * cy[c]));
                    b[cells[a]] += w * (fv2 * cx[a] + fv1 * cy[a]);
                }
            }
    }
    SparseMatrix S(nc, nc);
    S.setFromTriplets(t.begin(), t.end());
    S.makeCompressed();

    MacroSolution sol;
    sol.grid = g;
    sol.params = perm.params;
    sol.perm_fingerprint = perm.fingerprint();
    sol.obstacle = perm.obstacle;
    sol.f_description = problem.f_prime.describe();
    sol.g_description = problem.g_prime.describe();
    Vector phat;
    const PcgResult pr = pcg_mean_zero(S, b, phat, tol, std::max(1000, 20 * nc));
    if (!pr.converged)
        throw Error(ErrorCode::no_convergence, "Darcy pressure solve did not converge: relative residual " +
                                                   g17(pr.relative_residual) + " after " +
                                                   std::to_string(pr.iterations) + " iterations");

    const Vector r = b - S * phat;
    auto& fr = sol.flux;
    fr.iterations = pr.iterations;
    fr.converged = pr.converged;
    fr.relative_residual = b.norm() > 0.0 ? r.norm() / b.norm() : r.norm();
    const double bmax = b.cwiseAbs().maxCoeff();
    fr.max_cell_flux = bmax > 0.0 ? r.cwiseAbs().maxCoeff() / bmax : r.cwiseAbs().maxCoeff();
    fr.global_balance = std::abs(r.sum());
    fr.boundary_flux = 0.0;  // the scheme has no boundary face terms

    // grad q cancels between f' and grad p, so the drive needs only the
    // sampled part.
    sol.drive = fs - center_gradient(g, phat);
    sol.g = gg;
    sol.p = phat + q;
    sol.p.array() -= sol.p.mean();
    sol.U = sol.drive * perm.K1.transpose() + gg * perm.K2.transpose();
    sol.W = sol.drive * perm.L1.transpose() + gg * perm.L2.transpose();
    return sol;
}

TwoScaleEvaluator::TwoScaleEvaluator(const std::vector<MicropolarCellSolution>& cells, const MacroSolution& macro)
    : macro_(&macro)
{
    for (const auto& s : cells) {
        if (s.geometry == nullptr)
            throw Error(ErrorCode::inconsistent_inputs, "cell solution without geometry");
        if (geom_ == nullptr)
            geom_ = s.geometry;
        if (!s.geometry->grid.same_layout(geom_->grid))
            throw Error(ErrorCode::inconsistent_inputs, "cell solutions belong to different geometries");
        if (permeability_fingerprint(s.geometry->obstacle, s.geometry->n, s.params) != macro.perm_fingerprint)
            throw Error(ErrorCode::inconsistent_inputs,
                        "cell solutions do not match the permeability set of the macro solution");
        if (s.i >= 1 && s.i <= 2 && s.k >= 1 && s.k <= 2)
            table_[s.i - 1][s.k - 1] = &s;
    }
    for (auto& row : table_)
        for (auto* p : row)
            if (p == nullptr)
                throw Error(ErrorCode::inconsistent_inputs, "cell solutions for i, k in {1, 2} are incomplete");
}

TwoScaleEvaluator::CellFields TwoScaleEvaluator::fields_at(int i1, int i2) const
{
    const MacroGrid& g = macro_->grid;
    if (i1 < 0 || i2 < 0 || i1 >= g.cells[0] || i2 >= g.cells[1])
        throw Error(ErrorCode::precondition, "macro cell index out of range");
    const int c = g.index(i1, i2);
    CellFields out;
    const auto& s11 = *table_[0][0];
    out.u = Vector::Zero(s11.u.values.size());
    out.w = Vector::Zero(s11.w.values.size());
    out.pi = Vector::Zero(s11.pi.values.size());
    for (int j = 0; j < 2; ++j) {
        const double d = macro_->drive(c, j);
        const double gj = macro_->g(c, j);
        const auto& a = *table_[j][0];
        const auto& b = *table_[j][1];
        out.u += d * a.u.values + gj * b.u.values;
        out.w += d * a.w.values + gj * b.w.values;
        out.pi += d * a.pi.values + gj * b.pi.values;
    }
    return out;
}

TwoScaleEvaluator::CellFields TwoScaleEvaluator::fields(const Vec2& z) const
{
    const auto ij = macro_->grid.locate(z);
    return fields_at(ij[0], ij[1]);
}

TwoScaleEvaluator::PointValue TwoScaleEvaluator::evaluate(const Vec2& z, const Vec3& y) const
{
    const MacGrid& grid = geom_->grid;
    const int n = geom_->n;
    int idx[3];
    for (int a = 0; a < 3; ++a)
        idx[a] = std::clamp(static_cast<int>(std::floor((y[static_cast<std::size_t>(a)] + 0.5) * n)), 0, n - 1);
    const int cell = grid.linear(idx[0], idx[1], idx[2]);
    PointValue v;
    if (!grid.is_fluid(cell))
        return v;
    const CellFields f = fields(z);
    for (int a = 0; a < 3; ++a) {
        const int lo = grid.face_dof(a, cell);
        const int hi = grid.face_dof(a, grid.shifted(cell, a, 1));
        v.u[static_cast<std::size_t>(a)] = 0.5 * ((lo < 0 ? 0.0 : f.u[lo]) + (hi < 0 ? 0.0 : f.u[hi]));
        v.w[static_cast<std::size_t>(a)] = 0.5 * ((lo < 0 ? 0.0 : f.w[lo]) + (hi < 0 ? 0.0 : f.w[hi]));
    }
    v.pi = f.pi[grid.cell_dof(cell)];
    return v;
}

void write_macro_csv(const std::string& path, const MacroSolution& sol)
{
    std::string out = "z1,z2,p,U1,U2,W1,W2\n";
    char buf[256];
    const MacroGrid& g = sol.grid;
    for (int i2 = 0; i2 < g.cells[1]; ++i2)
        for (int i1 = 0; i1 < g.cells[0]; ++i1) {
            const int c = g.index(i1, i2);
            const Vec2 z = g.center(i1, i2);
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", z[0], z[1], sol.p[c],
                          sol.U(c, 0), sol.U(c, 1), sol.W(c, 0), sol.W(c, 1));
            out += buf;
        }
    write_text_file(path, out);
}

void write_macro_vtk(const std::string& path, const MacroSolution& sol)
{
    const MacroGrid& g = sol.grid;
    const auto nc = static_cast<std::size_t>(g.size());
    VtkCellArray p{"pressure", 1, std::vector<double>(sol.p.data(), sol.p.data() + sol.p.size())};
    VtkCellArray u{"U", 3, std::vector<double>(3 * nc, 0.0)};
    VtkCellArray w{"W", 3, std::vector<double>(3 * nc, 0.0)};
    for (std::size_t c = 0; c < nc; ++c) {
        const auto i = static_cast<Eigen::Index>(c);
        u.values[3 * c] = sol.U(i, 0);
        u.values[3 * c + 1] = sol.U(i, 1);
        w.values[3 * c] = sol.W(i, 0);
        w.values[3 * c + 1] = sol.W(i, 1);
    }
    write_vtk_structured_points(path, "macro Darcy solution", {g.cells[0], g.cells[1], 1}, {0.0, 0.0, 0.0},
                                {g.dx(), g.dy(), 1.0}, {p, u, w});
}

void write_macro_plot(const std::string& path, const MacroSolution& sol, int quiver_cells)
{
    const MacroGrid& g = sol.grid;
    const double width = 600.0;
    const double height = width * g.extent[1] / g.extent[0];
    const double sx = width / g.extent[0];
    const double sy = height / g.extent[1];
    std::ostringstream svg;
    svg.setf(std::ios::fixed);
    svg.precision(3);
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width + 20 << "\" height=\"" << height + 50
        << "\">\n<g transform=\"translate(10,10)\">\n";

    const double pmin = sol.p.size() ? sol.p.minCoeff() : 0.0;
    const double pmax = sol.p.size() ? sol.p.maxCoeff() : 0.0;
    const double prange = pmax - pmin > 0.0 ? pmax - pmin : 1.0;
    for (int i2 = 0; i2 < g.cells[1]; ++i2)
        for (int i1 = 0; i1 < g.cells[0]; ++i1) {
            const double t = (sol.p[g.index(i1, i2)] - pmin) / prange;
            const int r = static_cast<int>(std::lround(255.0 * t));
            const int b = 255 - r;
            const int gr = static_cast<int>(std::lround(255.0 * (1.0 - std::abs(2.0 * t - 1.0)) * 0.8));
            svg << "<rect x=\"" << i1 * g.dx() * sx << "\" y=\"" << height - (i2 + 1) * g.dy() * sy
                << "\" width=\"" << g.dx() * sx + 0.5 << "\" height=\"" << g.dy() * sy + 0.5 << "\" fill=\"rgb("
                << r << ',' << gr << ',' << b << ")\"/>\n";
        }

    const int qa = std::max(1, std::min(quiver_cells, g.cells[0]));
    const int qb = std::max(1, std::min(quiver_cells, g.cells[1]));
    std::vector<Vec2> arrows(static_cast<std::size_t>(qa * qb), Vec2{0.0, 0.0});
    std::vector<int> counts(arrows.size(), 0);
    for (int i2 = 0; i2 < g.cells[1]; ++i2)
        for (int i1 = 0; i1 < g.cells[0]; ++i1) {
            const auto k = static_cast<std::size_t>(i1 * qa / g.cells[0] + qa * (i2 * qb / g.cells[1]));
            arrows[k][0] += sol.U(g.index(i1, i2), 0);
            arrows[k][1] += sol.U(g.index(i1, i2), 1);
            ++counts[k];
        }
    double umax = 0.0;
    for (std::size_t k = 0; k < arrows.size(); ++k) {
        arrows[k][0] /= counts[k];
        arrows[k][1] /= counts[k];
        umax = std::max(umax, std::hypot(arrows[k][0], arrows[k][1]));
    }
    const double cell_px = std::min(width / qa, height / qb);
    if (umax > 1e-12) {
        const double scale = 0.9 * cell_px / umax;
        for (int b2 = 0; b2 < qb; ++b2)
            for (int b1 = 0; b1 < qa; ++b1) {
                const auto& a = arrows[static_cast<std::size_t>(b1 + qa * b2)];
                const double x0 = (b1 + 0.5) * width / qa;
                const double y0 = height - (b2 + 0.5) * height / qb;
                const double x1 = x0 + scale * a[0];
                const double y1 = y0 - scale * a[1];
                svg << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y1
                    << "\" stroke=\"black\" stroke-width=\"1.2\"/>\n"
                    << "<circle cx=\"" << x1 << "\" cy=\"" << y1 << "\" r=\"1.5\" fill=\"black\"/>\n";
            }
    }
    char caption[160];
    std::snprintf(caption, sizeof caption, "p in [%.4g, %.4g], max |U'| = %.3g", pmin, pmax, umax);
    svg << "</g>\n<text x=\"10\" y=\"" << height + 35 << "\" font-family=\"monospace\" font-size=\"13\">" << caption
        << "</text>\n</svg>\n";
    write_text_file(path, svg.str());
}

}  // namespace mpdarcy
