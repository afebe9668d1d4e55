#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "eddy/modal.hpp"
#include "eddy/reduction.hpp"
#include "eddy/transient.hpp"
#include "test_support.hpp"

using namespace eddy;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ReducedModel tube_model(std::size_t na, std::size_t nc, double resistivity = 1.09e-6) {
  TubeGeometry g;
  g.n_axial = na;
  g.n_circumferential = nc;
  g.resistivity = resistivity;
  const auto net = generate_tube_grid(g);
  const auto basis = build_current_basis(net);
  return project_model(assemble_branch_matrices(net), basis, electrode_incidence(basis, net));
}

/// Largest |off-diagonal| / smallest |diagonal| of VᵀAV.
double offdiag_ratio(const ModalBasis& mb, const SymMatrix& a) {
  const std::size_t n = mb.size();
  const Matrix av = multiply(a.to_dense(), mb.vectors);
  const Matrix g = multiply_transposed(mb.vectors, av);
  double off = 0.0, diag = INFINITY;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i == j)
        diag = std::min(diag, std::abs(g(i, i)));
      else
        off = std::max(off, std::abs(g(i, j)));
  return off / diag;
}

Vector unit_column(const Matrix& v, std::size_t k) {
  Vector c = v.column(k);
  const double n = norm2(c);
  for (auto& x : c) x /= n;
  return c;
}

}  // namespace

TEST_CASE("identity pencil") {
  const auto mb = generalized_eig(SymMatrix::identity(4), SymMatrix::identity(4));
  for (double t : mb.tau) CHECK_THAT(t, WithinAbs(1.0, 1e-15));
  const Matrix vtv = multiply_transposed(mb.vectors, mb.vectors);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK_THAT(vtv(i, j), WithinAbs(i == j ? 1.0 : 0.0, 1e-15));
}

TEST_CASE("diagonal pencil") {
  const auto mb = generalized_eig(SymMatrix::diagonal(Vector{2, 1}), SymMatrix::identity(2));
  CHECK_THAT(mb.tau[0], WithinRel(2.0, 1e-15));
  CHECK_THAT(mb.tau[1], WithinRel(1.0, 1e-15));
}

TEST_CASE("seeded SPD pencil: residual and both orthogonalities") {
  std::mt19937_64 rng(10);
  const auto l = test::random_spd(10, rng);
  const auto r = test::random_spd(10, rng);
  const auto mb = generalized_eig(l, r);
  const Matrix lv = multiply(l.to_dense(), mb.vectors);
  const Matrix rv = multiply(r.to_dense(), mb.vectors);
  double res = 0.0;
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t k = 0; k < 10; ++k) res += std::pow(lv(i, k) - rv(i, k) * mb.tau[k], 2);
  CHECK(std::sqrt(res) <= 1e-9 * frobenius_norm(l));
  CHECK(offdiag_ratio(mb, l) < 1e-10);
  CHECK(offdiag_ratio(mb, r) < 1e-10);
  for (std::size_t n = 0; n < 10; ++n) {
    CHECK_THAT(mb.resistance[n], WithinRel(1.0, 1e-12));
    CHECK_THAT(mb.inductance[n] / mb.resistance[n], WithinRel(mb.tau[n], 1e-12));
    if (n > 0) CHECK(mb.tau[n - 1] >= mb.tau[n]);
    // Sign convention: the largest-magnitude entry is positive.
    double best = 0.0;
    for (std::size_t i = 0; i < 10; ++i)
      if (std::abs(mb.vectors(i, n)) > std::abs(best)) best = mb.vectors(i, n);
    CHECK(best > 0.0);
  }
}

TEST_CASE("either matrix indefinite is rejected") {
  SymMatrix bad(2);
  bad.lower(0, 0) = 1;
  bad.lower(1, 0) = 2;
  bad.lower(1, 1) = 1;
  CHECK_THROWS_AS(generalized_eig(bad, SymMatrix::identity(2)), NotPositiveDefinite);
  CHECK_THROWS_AS(generalized_eig(SymMatrix::identity(2), bad), NotPositiveDefinite);
}

TEST_CASE("modal coordinates round trip") {
  std::mt19937_64 rng(21);
  const auto l = test::random_spd(9, rng);
  const auto r = test::random_spd(9, rng);
  const auto mb = generalized_eig(l, r);

  for (double v : to_modal(mb, Vector(9, 0.0))) CHECK(v == 0.0);

  const Vector a1 = to_modal(mb, mb.vectors.column(0));
  for (std::size_t n = 0; n < 9; ++n) CHECK_THAT(a1[n], WithinAbs(n == 0 ? 1.0 : 0.0, 1e-12));

  const Vector x = test::random_vector(9, rng);
  const Vector back = from_modal(mb, to_modal(mb, x));
  CHECK(test::max_abs_diff(back, x) < 1e-10 * norm2(x));
  CHECK_THROWS_AS(to_modal(mb, Vector(3)), DimensionMismatch);
}

TEST_CASE("modal forcing") {
  SECTION("zero drive") {
    ReducedModel rm;
    rm.resistance = SymMatrix::identity(2);
    rm.inductance = SymMatrix::identity(2);
    rm.drive_resistance = Matrix(2, 1, 0.3);
    rm.drive_inductance = Matrix(2, 1, 0.2);
    rm.coil_mutual = Matrix(2, 0);
    const auto mb = generalized_eig(rm.inductance, rm.resistance);
    for (double f : modal_forcing(mb, rm, Vector{0.0}, Vector{0.0}, {}, 1e-3, 1.0)) CHECK(f == 0.0);
  }
  SECTION("scalar case") {
    ReducedModel rm;
    rm.resistance = SymMatrix::identity(1);
    rm.inductance = SymMatrix::identity(1);
    rm.drive_resistance = Matrix(1, 1, 0.0);
    rm.drive_inductance = Matrix(1, 1, 1.0);
    rm.coil_mutual = Matrix(1, 0);
    const auto mb = generalized_eig(rm.inductance, rm.resistance);
    REQUIRE(mb.vectors(0, 0) == 1.0);
    const auto f = modal_forcing(mb, rm, Vector{0.0}, Vector{1.0}, {}, 0.1, 1.0);
    CHECK(f[0] == -1.0);
  }
  SECTION("equals Vᵀ of the TD1 drive terms") {
    const auto rm = tube_model(3, 6);
    const auto mb = generalized_eig(rm.inductance, rm.resistance);
    std::mt19937_64 rng(8);
    const Vector id = test::random_vector(3, rng), did = test::random_vector(3, rng);
    const double dt = 1e-4, theta = 0.6;
    const Vector f = modal_forcing(mb, rm, id, did, {}, dt, theta);

    Vector rhs(rm.n_internal(), 0.0);
    DriveTerms(rm.drive_resistance, rm.drive_inductance, rm.coil_mutual, dt, theta).apply(rhs, id, did, {});
    const Vector proj = multiply_transposed(mb.vectors, rhs);
    CHECK(test::max_abs_diff(f, proj) <= 1e-12 * norm2(proj));

    const Td2Stepper td2(mb, rm, dt, theta);
    const Vector g = td2.forcing(id, did, {});
    CHECK(test::max_abs_diff(f, g) <= 1e-12 * norm2(proj));
  }
}

TEST_CASE("tube modes: orthogonality, positivity and resistivity rescaling") {
  const auto rm = tube_model(4, 8);
  const auto mb = generalized_eig(rm.inductance, rm.resistance);
  CHECK(offdiag_ratio(mb, rm.inductance) < 1e-10);
  CHECK(offdiag_ratio(mb, rm.resistance) < 1e-10);
  for (std::size_t n = 0; n < mb.size(); ++n) {
    CHECK(mb.tau[n] > 0.0);
    if (n > 0) CHECK(mb.tau[n - 1] >= mb.tau[n]);
  }
  CHECK_THAT(dominant_time_constant(rm.inductance, rm.resistance), WithinRel(mb.tau[0], 1e-8));

  // Doubling is an exact rescaling: same columns up to sign and normalization.
  {
    const auto scaled = tube_model(4, 8, 1.09e-6 * 2.0);
    const auto ms = generalized_eig(scaled.inductance, scaled.resistance);
    for (std::size_t n = 0; n < mb.size(); ++n) {
      CHECK_THAT(ms.tau[n], WithinRel(mb.tau[n] / 2.0, 1e-12));
      CHECK(test::max_abs_diff(unit_column(mb.vectors, n), unit_column(ms.vectors, n)) < 1e-12);
    }
  }
  // A general factor may rotate vectors inside degenerate eigenspaces, so
  // compare spans of equal-τ clusters.
  {
    const double k = 3.0;
    const auto scaled = tube_model(4, 8, 1.09e-6 * k);
    const auto ms = generalized_eig(scaled.inductance, scaled.resistance);
    for (std::size_t n = 0; n < mb.size(); ++n) {
      CHECK_THAT(ms.tau[n], WithinRel(mb.tau[n] / k, 1e-12));
      const Vector b = ms.vectors.column(n);
      const Vector rb = multiply(rm.resistance, b);
      Vector rest = b;
      for (std::size_t m = 0; m < mb.size(); ++m) {
        if (std::abs(mb.tau[m] - mb.tau[n]) > 1e-9 * mb.tau[n]) continue;
        const Vector v = mb.vectors.column(m);
        const double c = dot(v, rb);
        for (std::size_t i = 0; i < b.size(); ++i) rest[i] -= c * v[i];
      }
      CHECK(norm2(rest) < 1e-8 * norm2(b));
    }
  }
}

TEST_CASE("time constants decrease when resistivities increase elementwise") {
  TubeGeometry g;
  g.n_axial = 3;
  g.n_circumferential = 6;
  const auto net = generate_tube_grid(g);
  const auto basis = build_current_basis(net);
  const auto e = electrode_incidence(basis, net);
  const auto base = assemble_branch_matrices(net);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  for (int trial = 0; trial < 5; ++trial) {
    BranchMatrices lo = base, hi = base;
    for (std::size_t b = 0; b < base.resistance.size(); ++b) {
      lo.resistance[b] *= u(rng);
      hi.resistance[b] = lo.resistance[b] * (0.5 + u(rng));  // factor in [1, 2.5)
    }
    const auto a = project_model(lo, basis, e);
    const auto b = project_model(hi, basis, e);
    const auto ma = generalized_eig(a.inductance, a.resistance);
    const auto mbb = generalized_eig(b.inductance, b.resistance);
    for (std::size_t n = 0; n < ma.size(); ++n) CHECK(ma.tau[n] >= mbb.tau[n] * (1.0 - 1e-12));
  }
}
