#include "rrdc/sparse.hpp"

#include <atomic>
#include <mutex>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace rrdc {

namespace {
std::atomic<long> g_factorizations{0};
}

long factorization_count() { return g_factorizations.load(); }

Vector spmv(const SparseMatrix& a, const Vector& x) {
  if (a.cols() != x.size()) throw std::invalid_argument("spmv: dimension mismatch");
  return a * x;
}

bool is_exactly_symmetric(const SparseMatrix& a) {
  if (a.rows() != a.cols()) return false;
  const SparseMatrix at = a.transpose();
  for (Index k = 0; k < a.outerSize(); ++k) {
    SparseMatrix::InnerIterator it(a, k), jt(at, k);
    for (; it && jt; ++it, ++jt) {
      if (it.index() != jt.index() || it.value() != jt.value()) return false;
    }
    if (it || jt) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

struct CholeskyFactor::Impl {
  Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> llt;
};

CholeskyFactor::CholeskyFactor(const SparseMatrix& a) : impl_(std::make_unique<Impl>()) {
  if (a.rows() != a.cols()) throw std::invalid_argument("factorize: matrix is not square");
  impl_->llt.compute(a);
  ++g_factorizations;
  if (impl_->llt.info() != Eigen::Success) {
    throw NotSpdError("factorize: non-positive pivot, matrix is not symmetric positive definite");
  }
}

CholeskyFactor::~CholeskyFactor() = default;
CholeskyFactor::CholeskyFactor(CholeskyFactor&&) noexcept = default;
CholeskyFactor& CholeskyFactor::operator=(CholeskyFactor&&) noexcept = default;

Index CholeskyFactor::dim() const { return impl_->llt.rows(); }

Vector CholeskyFactor::solve(const Vector& rhs) const {
  if (rhs.size() != dim()) throw std::invalid_argument("solve: dimension mismatch");
  return impl_->llt.solve(rhs);
}

SparseMatrix CholeskyFactor::lower() const { return impl_->llt.matrixL(); }

Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> CholeskyFactor::permutation() const {
  return impl_->llt.permutationP();
}

SparseMatrix CholeskyFactor::reconstruct() const {
  const SparseMatrix l = lower();
  const SparseMatrix llt = l * l.transpose();
  const auto p = permutation();
  const SparseMatrix left = p.transpose() * llt;
  SparseMatrix out = left * p;
  return out;
}

CholeskyFactor factorize(const SparseMatrix& a) { return CholeskyFactor(a); }

Vector solve(const CholeskyFactor& factor, const Vector& rhs) { return factor.solve(rhs); }

// ---------------------------------------------------------------------------

struct StepSolver::Impl {
  std::unique_ptr<CholeskyFactor> chol;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
  SparseMatrix matrix;  // kept for the CG operator
  std::mutex cg_mutex;
};

namespace {
StepSolver::Kind choose_kind(const SparseMatrix& a) {
  if (!is_exactly_symmetric(a)) return StepSolver::Kind::LU;
  return a.rows() > StepSolver::kIterativeThreshold ? StepSolver::Kind::Iterative : StepSolver::Kind::Cholesky;
}
}  // namespace

StepSolver::StepSolver(const SparseMatrix& a) : StepSolver(a, choose_kind(a)) {}

StepSolver::StepSolver(const SparseMatrix& a, Kind kind) : kind_(kind), dim_(a.rows()), impl_(std::make_unique<Impl>()) {
  if (a.rows() != a.cols()) throw std::invalid_argument("StepSolver: matrix is not square");
  switch (kind_) {
    case Kind::Cholesky:
      impl_->chol = std::make_unique<CholeskyFactor>(a);
      break;
    case Kind::LU:
      impl_->lu.analyzePattern(a);
      impl_->lu.factorize(a);
      ++g_factorizations;
      if (impl_->lu.info() != Eigen::Success) {
        throw SolverError("StepSolver: sparse LU failed: " + impl_->lu.lastErrorMessage());
      }
      break;
    case Kind::Iterative:
      impl_->matrix = a;
      impl_->cg.setTolerance(1e-12);
      impl_->cg.setMaxIterations(10 * a.rows());
      impl_->cg.compute(impl_->matrix);
      ++g_factorizations;
      break;
  }
}

StepSolver::~StepSolver() = default;
StepSolver::StepSolver(StepSolver&&) noexcept = default;
StepSolver& StepSolver::operator=(StepSolver&&) noexcept = default;

Vector StepSolver::solve(const Vector& rhs) const {
  if (rhs.size() != dim_) throw std::invalid_argument("StepSolver::solve: dimension mismatch");
  switch (kind_) {
    case Kind::Cholesky:
      return impl_->chol->solve(rhs);
    case Kind::LU: {
      Vector x = impl_->lu.solve(rhs);
      return x;
    }
    case Kind::Iterative: {
      std::lock_guard lock(impl_->cg_mutex);
      Vector x = impl_->cg.solve(rhs);
      if (impl_->cg.info() != Eigen::Success) {
        throw SolverError("StepSolver: conjugate gradient did not converge");
      }
      return x;
    }
  }
  return {};
}

}  // namespace rrdc
