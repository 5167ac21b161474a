#include <cmath>
#include <random>

#include "ale2fluid/sparse.hpp"
#include "doctest.h"

using namespace ale2fluid;

namespace {

CsrMatrix random_spd(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> d;
  std::vector<std::vector<double>> g(n, std::vector<double>(n));
  for (auto& row : g) {
    for (double& x : row) x = d(rng);
  }
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = i == j ? 1.0 : 0.0;
      for (int k = 0; k < n; ++k) s += g[k][i] * g[k][j];
      t.push_back({i, j, s});
    }
  }
  return CsrMatrix::from_triplets(n, n, t);
}

CsrMatrix random_dominant(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> col(0, n - 1);
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i) {
    double off = 0.0;
    for (int k = 0; k < 6; ++k) {
      const int j = col(rng);
      if (j == i) continue;
      const double v = u(rng);
      off += std::abs(v);
      t.push_back({i, j, v});
    }
    t.push_back({i, i, off + 1.0 + std::abs(u(rng))});
  }
  return CsrMatrix::from_triplets(n, n, t);
}

double relative_residual(const CsrMatrix& a, const std::vector<double>& x, const std::vector<double>& b) {
  auto r = a.multiply(x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return norm2(r) / (a.frobenius_norm() * norm2(x) + norm2(b));
}

}  // namespace

TEST_CASE("triplets are merged into sorted unique rows") {
  const CsrMatrix m = CsrMatrix::from_triplets(3, 3, {{2, 1, 1.0}, {0, 2, 2.0}, {2, 1, 3.0}, {0, 0, 1.0}});
  m.check();
  CHECK(m.nnz() == 3);
  CHECK(m.at(2, 1) == 4.0);
  CHECK(m.at(1, 1) == 0.0);
  const CsrMatrix d = CsrMatrix::from_triplets(3, 3, {{0, 2, 2.0}}, true);
  d.check();
  CHECK(d.nnz() == 4);
  CHECK(d.asymmetry() == doctest::Approx(1.0));
}

TEST_CASE("direct solve of small systems") {
  const std::vector<double> b{3.0, -1.0, 7.0};
  CHECK(solve_direct(CsrMatrix::identity(3), b) == b);
  const CsrMatrix a = CsrMatrix::from_triplets(2, 2, {{0, 0, 2.0}, {1, 1, 4.0}});
  const auto x = solve_direct(a, {2.0, 8.0});
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(2.0));
}

TEST_CASE("direct solve of a random SPD system meets the residual bound") {
  const CsrMatrix a = random_spd(50, 11);
  std::vector<double> b(50);
  for (int i = 0; i < 50; ++i) b[i] = std::sin(i + 1.0);
  const auto x = solve_direct(a, b);
  CHECK(relative_residual(a, x, b) <= 1e-10);
}

TEST_CASE("singular matrix names a row") {
  const CsrMatrix a = CsrMatrix::from_triplets(3, 3, {{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 0.0}});
  try {
    solve_direct(a, {1.0, 1.0, 1.0});
    FAIL("expected singular pivot");
  } catch (const SingularMatrixError& e) {
    CHECK(e.row() == 2);
  }
}

TEST_CASE("gmres on the identity takes one iteration") {
  const std::vector<double> b{1.0, 2.0, -3.0, 0.5};
  const auto r = solve_gmres_ilu(CsrMatrix::identity(4), b, std::vector<double>(4, 0.0));
  CHECK(r.iterations == 1);
  for (int i = 0; i < 4; ++i) CHECK(r.x[i] == doctest::Approx(b[i]));
}

TEST_CASE("gmres with ILU(0) on a diagonally dominant system") {
  const CsrMatrix a = random_dominant(100, 5);
  std::vector<double> b(100);
  for (int i = 0; i < 100; ++i) b[i] = std::cos(0.3 * i);
  const auto r = solve_gmres_ilu(a, b, std::vector<double>(100, 0.0), {1e-10, 500, 50});
  auto res = a.multiply(r.x);
  for (int i = 0; i < 100; ++i) res[i] -= b[i];
  CHECK(norm2(res) / norm2(b) <= 1e-10);
  CHECK(r.residual <= 1e-10);

  const auto exact = solve_direct(a, b);
  const auto again = solve_gmres_ilu(a, b, exact, {1e-10, 500, 50});
  CHECK(again.iterations == 0);
}

TEST_CASE("gmres reports non-convergence with its iteration count") {
  const CsrMatrix a = random_dominant(60, 9);
  std::vector<double> b(60, 1.0);
  try {
    solve_gmres_ilu(a, b, {}, {1e-14, 1, 50});
    FAIL("expected non-convergence");
  } catch (const ConvergenceError& e) {
    CHECK(e.iterations() == 1);
    CHECK(e.residual() > 1e-14);
  }
}
