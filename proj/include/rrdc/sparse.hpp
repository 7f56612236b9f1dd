#pragma once

#include <memory>
#include <stdexcept>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace rrdc {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Raised when a Cholesky pivot is not positive.
class NotSpdError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Vector spmv(const SparseMatrix& a, const Vector& x);

/// Entrywise A(i,j) == A(j,i); no tolerance.
bool is_exactly_symmetric(const SparseMatrix& a);

/// Sparse LL^T with an approximate-minimum-degree ordering: P A P^T = L L^T.
class CholeskyFactor {
 public:
  explicit CholeskyFactor(const SparseMatrix& a);
  ~CholeskyFactor();
  CholeskyFactor(CholeskyFactor&&) noexcept;
  CholeskyFactor& operator=(CholeskyFactor&&) noexcept;

  Vector solve(const Vector& rhs) const;
  Index dim() const;

  SparseMatrix lower() const;
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> permutation() const;
  /// P^{-1} L L^T P^{-T}, for verification.
  SparseMatrix reconstruct() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

CholeskyFactor factorize(const SparseMatrix& a);
Vector solve(const CholeskyFactor& factor, const Vector& rhs);

/// Solver for the time-independent step operators. Picks a sparse Cholesky for
/// exactly symmetric input, a sparse LU otherwise, and Jacobi-preconditioned CG
/// for symmetric systems above `kIterativeThreshold` unknowns.
class StepSolver {
 public:
  enum class Kind { Cholesky, LU, Iterative };

  static constexpr Index kIterativeThreshold = 2'000'000;

  explicit StepSolver(const SparseMatrix& a);
  StepSolver(const SparseMatrix& a, Kind kind);
  ~StepSolver();
  StepSolver(StepSolver&&) noexcept;
  StepSolver& operator=(StepSolver&&) noexcept;

  Vector solve(const Vector& rhs) const;
  Kind kind() const { return kind_; }
  Index dim() const { return dim_; }

 private:
  struct Impl;
  Kind kind_;
  Index dim_;
  std::unique_ptr<Impl> impl_;
};

/// Number of sparse factorizations (Cholesky, LU, or iterative setup) performed
/// by this process. Monotone.
long factorization_count();

}  // namespace rrdc
