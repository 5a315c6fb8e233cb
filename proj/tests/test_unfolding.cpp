#include "mpdarcy/unfolding.hpp"
#include "support.hpp"

#include <cmath>
#include <cstring>

using namespace mpdarcy;

namespace {

const ObstacleSpec sphere = ObstacleSpec::sphere({0.0, 0.0, 0.0}, 0.25);

std::vector<double> random_field(const ThinDomainGeometry& g, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<double> v(static_cast<std::size_t>(g.num_interior_cells()));
    for (int k = 0; k < g.interior[2]; ++k)
        for (int j = 0; j < g.interior[1]; ++j)
            for (int i = 0; i < g.interior[0]; ++i) {
                const double r = uni(rng);
                v[static_cast<std::size_t>(g.interior_linear(i, j, k))] = g.interior_fluid(i, j, k) ? r : 0.0;
            }
    return v;
}

}  // namespace

TEST_CASE("kappa locates lattice blocks of the dilated slab")
{
    const double eps = 0.25, h = 0.5;
    CHECK(kappa({0.3, 0.6, 0.1}, eps, h) == Index3{1, 2, 0});
    CHECK(kappa({0.3 + eps, 0.6, 0.1}, eps, h) == Index3{2, 2, 0});
    CHECK(kappa({0.3, 0.6, 0.1 + eps / h}, eps, h) == Index3{1, 2, 1});
    // Centre of slab cell (i, j, k) on an m = 8 grid.
    const int m = 8;
    for (int i : {0, 5, 13, 31}) {
        const double x = (i + 0.5) * eps / m;
        CHECK(kappa({x, x, x / h}, eps, h) == Index3{i / m, i / m, i / m});
    }
    CHECK_ERROR(kappa({0.25, 0.3, 0.1}, eps, h), on_cell_boundary);
    CHECK_ERROR(kappa({0.3, 0.3, 0.5}, eps, h), on_cell_boundary);
    CHECK_ERROR(kappa({0.3, 0.3, 0.3}, 0.0, h), precondition);
}

TEST_CASE("constant field unfolds to the same constant in every block")
{
    const ThinDomainGeometry g = build_thin_domain({1.0, 1.0}, 0.25, 0.5, sphere, 8);
    const std::vector<double> c(static_cast<std::size_t>(g.num_interior_cells()), 2.5);
    const UnfoldedField u = unfold(g, c);
    CHECK(u.num_blocks() == 4 * 4 * 2);
    CHECK(u.values.size() == static_cast<std::size_t>(u.num_blocks()) * 512);
    for (double v : u.values)
        CHECK(v == 2.5);
}

TEST_CASE("unfolding is a measure preserving reindexing")
{
    const ThinDomainGeometry g = build_thin_domain({1.0, 1.0}, 0.25, 0.5, sphere, 8);
    const std::vector<double> v = random_field(g, 41);
    const UnfoldedField u = unfold(g, v);
    // Independent quadrature of both sides.
    double slab = 0.0;
    for (double x : v)
        slab += x * x * g.spacing[0] * g.spacing[1] * g.spacing[2] / g.h;
    double cells = 0.0;
    const double w = std::pow(g.eps, 3) / g.h / 512.0;
    for (double x : u.values)
        cells += x * x * w;
    CHECK(std::abs(std::sqrt(slab) - std::sqrt(cells)) <= 1e-13 * std::sqrt(slab));
    CHECK(std::abs(slab_norm(g, v) - std::sqrt(slab)) <= 1e-13 * std::sqrt(slab));
    CHECK(std::abs(unfolded_norm(u) - std::sqrt(cells)) <= 1e-13 * std::sqrt(cells));

    // Block k, local cell l holds the slab value at m k + l.
    const int b = u.block_linear(2, 1, 1);
    CHECK(u.at(b, u.local_linear(3, 4, 5)) ==
          v[static_cast<std::size_t>(g.interior_linear(2 * 8 + 3, 1 * 8 + 4, 1 * 8 + 5))]);
}

TEST_CASE("derivative scaling identities")
{
    const ThinDomainGeometry g = build_thin_domain({1.0, 1.0}, 0.25, 0.5, sphere, 8);
    for (unsigned seed : {1u, 2u, 3u}) {
        const std::vector<double> v = random_field(g, seed);
        const UnfoldedField u = unfold(g, v);
        for (int a = 0; a < 2; ++a) {
            const double lhs = unfolded_derivative_norm(u, a), rhs = g.eps * slab_derivative_norm(g, v, a);
            CHECK(std::abs(lhs - rhs) <= 1e-13 * rhs);
        }
        const double lhs = unfolded_derivative_norm(u, 2), rhs = g.eps / g.h * slab_derivative_norm(g, v, 2);
        CHECK(std::abs(lhs - rhs) <= 1e-13 * rhs);
        const UnfoldingCheck c = check_unfolding_identities(g, v);
        CHECK(c.norm_identity <= 1e-13);
        CHECK(c.horizontal_identity <= 1e-13);
        CHECK(c.vertical_identity <= 1e-13);
        CHECK(c.fold_roundtrip);
    }
}

TEST_CASE("fold inverts unfold bitwise")
{
    const ThinDomainGeometry g = build_thin_domain({1.0, 1.0}, 0.25, 0.5, sphere, 8);
    const std::vector<double> v = random_field(g, 99);
    const std::vector<double> back = fold(g, unfold(g, v));
    REQUIRE(back.size() == v.size());
    CHECK(std::memcmp(back.data(), v.data(), v.size() * sizeof(double)) == 0);
}

TEST_CASE("a partial top block is extended by zero")
{
    const ThinDomainGeometry g = build_thin_domain({1.0, 1.0}, 0.25, 0.375, sphere, 8);
    REQUIRE(g.interior[2] == 12);
    REQUIRE(g.blocks[2] == 2);
    const std::vector<double> c(static_cast<std::size_t>(g.num_interior_cells()), 1.0);
    const UnfoldedField u = unfold(g, c);
    const int top = u.block_linear(0, 0, 1);
    CHECK(u.at(top, u.local_linear(0, 0, 3)) == 1.0);
    CHECK(u.at(top, u.local_linear(0, 0, 4)) == 0.0);
    CHECK(u.at(top, u.local_linear(7, 7, 7)) == 0.0);
    const UnfoldingCheck k = check_unfolding_identities(g, random_field(g, 5));
    CHECK(k.norm_identity <= 1e-13);
    CHECK(k.fold_roundtrip);
}

TEST_CASE("unfolding needs an aligned grid")
{
    const ThinDomainGeometry g = build_thin_domain({1.0, 1.0}, 0.125, std::sqrt(0.125), sphere, 8);
    const std::vector<double> v(static_cast<std::size_t>(g.num_interior_cells()), 1.0);
    CHECK_ERROR(unfold(g, v), incompatible_tiling);
    const ThinDomainGeometry ok = build_thin_domain({1.0, 1.0}, 0.25, 0.5, sphere, 8);
    CHECK_ERROR(unfold(ok, std::vector<double>(7, 0.0)), inconsistent_inputs);
}

TEST_CASE("slab cell values average faces")
{
    const ThinDomainGeometry g = build_thin_domain({1.0, 1.0}, 0.25, 0.5, sphere, 4);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(g.grid.num_active_faces());
    const std::vector<double> c = slab_cell_values(g, ones, 0);
    REQUIRE(c.size() == static_cast<std::size_t>(g.num_interior_cells()));
    // Wall cells see one active x-face, interior fluid cells two.
    CHECK(c[static_cast<std::size_t>(g.interior_linear(0, 0, 0))] == 0.5);
    CHECK(c[static_cast<std::size_t>(g.interior_linear(1, 0, 0))] == 1.0);
}
