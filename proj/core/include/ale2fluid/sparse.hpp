#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace ale2fluid {

struct Triplet {
  int row;
  int col;
  double value;
};

/// Compressed row storage with sorted, unique column indices per row.
struct CsrMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<int> row_ptr{0};
  std::vector<int> col_idx;
  std::vector<double> values;

  /// Duplicates are summed. With `with_diagonal` every diagonal entry is
  /// stored, even when zero, so incomplete factorizations have a slot for it.
  static CsrMatrix from_triplets(int rows, int cols, std::vector<Triplet> entries,
                                 bool with_diagonal = false);
  static CsrMatrix identity(int n);

  int nnz() const { return static_cast<int>(values.size()); }
  double at(int i, int j) const;
  std::vector<double> multiply(const std::vector<double>& x) const;
  CsrMatrix transpose() const;
  double frobenius_norm() const;
  /// max |a_ij - a_ji| / max |a_ij|.
  double asymmetry() const;
  void check() const;
};

class LinearSolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularMatrixError : public LinearSolverError {
 public:
  SingularMatrixError(int row, const std::string& what);
  int row() const { return row_; }

 private:
  int row_;
};

class ConvergenceError : public LinearSolverError {
 public:
  ConvergenceError(int iterations, double residual, const std::string& what);
  int iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  int iterations_;
  double residual_;
};

/// Sparse LU (UMFPACK). Reusable for several right-hand sides.
class DirectSolver {
 public:
  DirectSolver();
  ~DirectSolver();
  DirectSolver(DirectSolver&&) noexcept;
  DirectSolver& operator=(DirectSolver&&) noexcept;

  void factorize(const CsrMatrix& a);
  std::vector<double> solve(const std::vector<double>& b) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::vector<double> solve_direct(const CsrMatrix& a, const std::vector<double>& b);

struct GmresOptions {
  double tol = 1e-10;
  int max_iter = 2000;
  int restart = 50;
};

struct GmresResult {
  std::vector<double> x;
  int iterations = 0;
  double residual = 0.0;  // relative, ||b - Ax|| / ||b||
};

/// Zero-fill incomplete LU on the pattern of the matrix.
class Ilu0 {
 public:
  explicit Ilu0(const CsrMatrix& a);
  void apply(const std::vector<double>& r, std::vector<double>& z) const;

 private:
  CsrMatrix lu_;
  std::vector<int> diag_;
};

/// Restarted GMRES, right-preconditioned by ILU(0).
GmresResult solve_gmres_ilu(const CsrMatrix& a, const std::vector<double>& b,
                            const std::vector<double>& x0, const GmresOptions& options = {});

double norm2(const std::vector<double>& v);

}  // namespace ale2fluid
