#include "ale2fluid/sparse.hpp"

#include <Eigen/Sparse>
#include <Eigen/UmfPackSupport>
#include <algorithm>
#include <cmath>
#include <limits>

namespace ale2fluid {

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

CsrMatrix CsrMatrix::from_triplets(int rows, int cols, std::vector<Triplet> entries,
                                   bool with_diagonal) {
  if (with_diagonal) {
    for (int i = 0; i < std::min(rows, cols); ++i) entries.push_back({i, i, 0.0});
  }
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  CsrMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.row_ptr.assign(rows + 1, 0);
  int last_row = -1;
  int last_col = -1;
  for (const Triplet& t : entries) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      throw std::out_of_range("triplet outside matrix dimensions");
    }
    if (t.row == last_row && t.col == last_col) {
      m.values.back() += t.value;
      continue;
    }
    m.col_idx.push_back(t.col);
    m.values.push_back(t.value);
    ++m.row_ptr[t.row + 1];
    last_row = t.row;
    last_col = t.col;
  }
  for (int i = 0; i < rows; ++i) m.row_ptr[i + 1] += m.row_ptr[i];
  return m;
}

CsrMatrix CsrMatrix::identity(int n) {
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return from_triplets(n, n, std::move(t));
}

double CsrMatrix::at(int i, int j) const {
  const auto b = col_idx.begin() + row_ptr[i];
  const auto e = col_idx.begin() + row_ptr[i + 1];
  const auto it = std::lower_bound(b, e, j);
  return (it != e && *it == j) ? values[it - col_idx.begin()] : 0.0;
}

std::vector<double> CsrMatrix::multiply(const std::vector<double>& x) const {
  std::vector<double> y(rows, 0.0);
  for (int i = 0; i < rows; ++i) {
    double s = 0.0;
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += values[k] * x[col_idx[k]];
    y[i] = s;
  }
  return y;
}

CsrMatrix CsrMatrix::transpose() const {
  std::vector<Triplet> t;
  t.reserve(values.size());
  for (int i = 0; i < rows; ++i) {
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) t.push_back({col_idx[k], i, values[k]});
  }
  return from_triplets(cols, rows, std::move(t));
}

double CsrMatrix::frobenius_norm() const { return norm2(values); }

double CsrMatrix::asymmetry() const {
  double amax = 0.0;
  double dmax = 0.0;
  for (int i = 0; i < rows; ++i) {
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      amax = std::max(amax, std::abs(values[k]));
      dmax = std::max(dmax, std::abs(values[k] - at(col_idx[k], i)));
    }
  }
  return amax > 0.0 ? dmax / amax : 0.0;
}

void CsrMatrix::check() const {
  if (static_cast<int>(row_ptr.size()) != rows + 1 || row_ptr.front() != 0 ||
      row_ptr.back() != nnz() || col_idx.size() != values.size()) {
    throw std::logic_error("inconsistent CSR dimensions");
  }
  for (int i = 0; i < rows; ++i) {
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      if (col_idx[k] < 0 || col_idx[k] >= cols) throw std::logic_error("column index out of range");
      if (k > row_ptr[i] && col_idx[k] <= col_idx[k - 1]) {
        throw std::logic_error("column indices not sorted and unique in row " + std::to_string(i));
      }
    }
  }
}

SingularMatrixError::SingularMatrixError(int row, const std::string& what)
    : LinearSolverError(what), row_(row) {}

ConvergenceError::ConvergenceError(int iterations, double residual, const std::string& what)
    : LinearSolverError(what + " after " + std::to_string(iterations) +
                        " iterations, relative residual " + std::to_string(residual)),
      iterations_(iterations),
      residual_(residual) {}

struct DirectSolver::Impl {
  using Matrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
  Matrix a;
  Eigen::UmfPackLU<Matrix> lu;
};

DirectSolver::DirectSolver() : impl_(std::make_unique<Impl>()) {}
DirectSolver::~DirectSolver() = default;
DirectSolver::DirectSolver(DirectSolver&&) noexcept = default;
DirectSolver& DirectSolver::operator=(DirectSolver&&) noexcept = default;

namespace {

// Row of the original matrix whose pivot is the smallest in magnitude.
template <class Lu>
int weakest_pivot_row(const Lu& lu) {
  const auto& u = lu.matrixU();
  const auto& p = lu.permutationP();
  int k_min = 0;
  double d_min = std::numeric_limits<double>::infinity();
  for (int k = 0; k < u.rows(); ++k) {
    const double d = std::abs(u.coeff(k, k));
    if (d < d_min) {
      d_min = d;
      k_min = k;
    }
  }
  return k_min < p.size() ? p[k_min] : k_min;
}

}  // namespace

void DirectSolver::factorize(const CsrMatrix& a) {
  if (a.rows != a.cols) throw LinearSolverError("direct solve needs a square matrix");
  Eigen::Map<const Eigen::SparseMatrix<double, Eigen::RowMajor, int>> view(
      a.rows, a.cols, a.nnz(), a.row_ptr.data(), a.col_idx.data(), a.values.data());
  impl_->a = view;
  impl_->a.makeCompressed();
  impl_->lu.compute(impl_->a);
  if (impl_->lu.info() != Eigen::Success || impl_->lu.umfpackFactorizeReturncode() != 0) {
    const int row = impl_->lu.info() == Eigen::Success || impl_->lu.umfpackFactorizeReturncode() == 1
                        ? weakest_pivot_row(impl_->lu)
                        : -1;
    throw SingularMatrixError(row, "singular pivot in direct solve at row " + std::to_string(row));
  }
}

std::vector<double> DirectSolver::solve(const std::vector<double>& b) const {
  if (static_cast<int>(b.size()) != impl_->a.rows()) throw LinearSolverError("rhs size mismatch");
  Eigen::Map<const Eigen::VectorXd> bv(b.data(), static_cast<Eigen::Index>(b.size()));
  Eigen::VectorXd x = impl_->lu.solve(bv);
  if (impl_->lu.info() != Eigen::Success || !x.allFinite()) {
    throw LinearSolverError("direct solve failed");
  }
  return {x.data(), x.data() + x.size()};
}

std::vector<double> solve_direct(const CsrMatrix& a, const std::vector<double>& b) {
  DirectSolver s;
  s.factorize(a);
  return s.solve(b);
}

Ilu0::Ilu0(const CsrMatrix& a) : lu_(a), diag_(a.rows, -1) {
  const int n = a.rows;
  for (int i = 0; i < n; ++i) {
    for (int k = lu_.row_ptr[i]; k < lu_.row_ptr[i + 1]; ++k) {
      if (lu_.col_idx[k] == i) diag_[i] = k;
    }
    if (diag_[i] < 0) throw SingularMatrixError(i, "ILU(0): no diagonal entry in row " + std::to_string(i));
  }
  std::vector<int> pos(n, -1);
  for (int i = 0; i < n; ++i) {
    for (int k = lu_.row_ptr[i]; k < lu_.row_ptr[i + 1]; ++k) pos[lu_.col_idx[k]] = k;
    for (int k = lu_.row_ptr[i]; k < diag_[i]; ++k) {
      const int j = lu_.col_idx[k];
      const double piv = lu_.values[diag_[j]];
      lu_.values[k] /= piv;
      const double lij = lu_.values[k];
      for (int m = diag_[j] + 1; m < lu_.row_ptr[j + 1]; ++m) {
        const int p = pos[lu_.col_idx[m]];
        if (p >= 0) lu_.values[p] -= lij * lu_.values[m];
      }
    }
    for (int k = lu_.row_ptr[i]; k < lu_.row_ptr[i + 1]; ++k) pos[lu_.col_idx[k]] = -1;
    if (lu_.values[diag_[i]] == 0.0 || !std::isfinite(lu_.values[diag_[i]])) {
      throw SingularMatrixError(i, "ILU(0): zero pivot in row " + std::to_string(i));
    }
  }
}

void Ilu0::apply(const std::vector<double>& r, std::vector<double>& z) const {
  const int n = lu_.rows;
  z.resize(n);
  for (int i = 0; i < n; ++i) {
    double s = r[i];
    for (int k = lu_.row_ptr[i]; k < diag_[i]; ++k) s -= lu_.values[k] * z[lu_.col_idx[k]];
    z[i] = s;
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = z[i];
    for (int k = diag_[i] + 1; k < lu_.row_ptr[i + 1]; ++k) s -= lu_.values[k] * z[lu_.col_idx[k]];
    z[i] = s / lu_.values[diag_[i]];
  }
}

GmresResult solve_gmres_ilu(const CsrMatrix& a, const std::vector<double>& b,
                            const std::vector<double>& x0, const GmresOptions& options) {
  if (!(options.tol > 0.0)) throw std::invalid_argument("GMRES tolerance must be positive");
  const int n = a.rows;
  if (a.cols != n || static_cast<int>(b.size()) != n) throw LinearSolverError("GMRES size mismatch");
  GmresResult res;
  res.x = x0.empty() ? std::vector<double>(n, 0.0) : x0;
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    std::fill(res.x.begin(), res.x.end(), 0.0);
    return res;
  }
  const Ilu0 ilu(a);
  const int m = std::max(1, options.restart);

  auto residual = [&](std::vector<double>& r) {
    r = a.multiply(res.x);
    for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
    return norm2(r);
  };

  std::vector<double> r;
  double beta = residual(r);
  res.residual = beta / bnorm;
  std::vector<std::vector<double>> v(m + 1, std::vector<double>(n));
  std::vector<std::vector<double>> h(m + 1, std::vector<double>(m, 0.0));
  std::vector<double> cs(m), sn(m), g(m + 1), z(n), w;

  while (res.residual > options.tol) {
    if (res.iterations >= options.max_iter) {
      throw ConvergenceError(res.iterations, res.residual, "GMRES did not converge");
    }
    for (int i = 0; i < n; ++i) v[0][i] = r[i] / beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;
    int k = 0;
    for (; k < m && res.iterations < options.max_iter; ++k) {
      ++res.iterations;
      ilu.apply(v[k], z);
      w = a.multiply(z);
      for (int j = 0; j <= k; ++j) {
        double d = 0.0;
        for (int i = 0; i < n; ++i) d += w[i] * v[j][i];
        h[j][k] = d;
        for (int i = 0; i < n; ++i) w[i] -= d * v[j][i];
      }
      h[k + 1][k] = norm2(w);
      if (h[k + 1][k] > 0.0) {
        for (int i = 0; i < n; ++i) v[k + 1][i] = w[i] / h[k + 1][k];
      }
      for (int j = 0; j < k; ++j) {
        const double t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
        h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
        h[j][k] = t;
      }
      const double rr = std::hypot(h[k][k], h[k + 1][k]);
      if (rr == 0.0) throw ConvergenceError(res.iterations, res.residual, "GMRES breakdown");
      cs[k] = h[k][k] / rr;
      sn[k] = h[k + 1][k] / rr;
      h[k][k] = rr;
      h[k + 1][k] = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      res.residual = std::abs(g[k + 1]) / bnorm;
      if (res.residual <= options.tol) {
        ++k;
        break;
      }
    }
    // back substitution, then x += M^{-1} V y
    std::vector<double> y(k);
    for (int j = k - 1; j >= 0; --j) {
      double s = g[j];
      for (int l = j + 1; l < k; ++l) s -= h[j][l] * y[l];
      y[j] = s / h[j][j];
    }
    std::vector<double> u(n, 0.0);
    for (int j = 0; j < k; ++j) {
      for (int i = 0; i < n; ++i) u[i] += y[j] * v[j][i];
    }
    ilu.apply(u, z);
    for (int i = 0; i < n; ++i) res.x[i] += z[i];
    beta = residual(r);
    res.residual = beta / bnorm;
    if (!std::isfinite(res.residual)) {
      throw ConvergenceError(res.iterations, res.residual, "GMRES diverged");
    }
  }
  return res;
}

}  // namespace ale2fluid
