#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "helmmg/assembly.hpp"
#include "helmmg/lfa.hpp"

namespace helmmg {

/// Jacobi: u <- u + w D^-1 (f - A u). SOR: forward sweep in unknown order.
Vector smooth(const SparseMatrix& A, Vector u, const Vector& f, const SmootherSpec& spec,
              int steps);

/// Sparse LU of the coarsest operator, factorized once.
class CoarseSolver {
 public:
  explicit CoarseSolver(const SparseMatrix& A);
  ~CoarseSolver();
  CoarseSolver(const CoarseSolver&) = delete;
  CoarseSolver& operator=(const CoarseSolver&) = delete;

  Vector solve(const Vector& rhs) const;
  std::int64_t size() const { return n_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::int64_t n_;
};

std::shared_ptr<const CoarseSolver> coarse_factorize(const SparseMatrix& A);
Vector coarse_solve(const CoarseSolver& fact, const Vector& rhs);

struct Level {
  GridSpec grid;
  SparseMatrix A;
  SmootherSpec smoother;
};

/// Levels run finest first; transfers[l] connects level l and l + 1.
struct MultigridHierarchy {
  std::vector<Level> levels;
  std::vector<Transfer> transfers;
  std::shared_ptr<const CoarseSolver> coarse;

  int n_levels() const { return static_cast<int>(levels.size()); }
};

enum class Discretization { finite_difference, finite_element_pml };

struct HierarchyConfig {
  Discretization discretization = Discretization::finite_difference;
  Scheme fine = Scheme::fd5;
  Scheme coarse = Scheme::opt2d;
  int levels = 2;
  double alpha = 0.0;
  std::optional<SmootherSpec> smoother;  // per-pair default when empty
  double sigma_over_omega = 2.0;         // PML strength
};

/// Builds the operators of every level. Optimized coarse levels use the table
/// for their spacing ratio to the finest grid; Galerkin levels are R A P of
/// the level above.
MultigridHierarchy build_hierarchy(const HierarchyConfig& cfg, const GridSpec& grid,
                                   const Medium& medium);

/// Two-grid cycle on levels 0 and 1 with a direct solve on level 1.
Vector tg_cycle(const MultigridHierarchy& hier, const Vector& u0, const Vector& f);
/// V-cycle over all levels, direct solve on the last.
Vector v_cycle(const MultigridHierarchy& hier, const Vector& u0, const Vector& f);

struct SolveReport {
  int iterations = 0;
  std::vector<double> residuals;  // relative, one per iteration, starting at 1
  bool converged = false;
  double true_residual = 0.0;  // ||f - A u|| / ||f|| of the returned u
  double seconds = 0.0;
  Vector solution;
};

using Preconditioner = std::function<Vector(const Vector&)>;

/// Full GMRES with right preconditioning and zero initial guess.
SolveReport gmres_solve(const SparseMatrix& A, const Preconditioner& M, const Vector& f,
                        double tol = 1e-6, int maxit = 100);

/// One V-cycle with zero initial guess as a preconditioner.
Preconditioner cycle_preconditioner(const MultigridHierarchy& hier);

}  // namespace helmmg
