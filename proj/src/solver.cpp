#include "helmmg/solver.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include <Eigen/UmfPackSupport>

#include "helmmg/coefficients.hpp"

namespace helmmg {

namespace {

using ColMatrix = Eigen::SparseMatrix<cplx, Eigen::ColMajor, int>;

Vector inverse_diagonal(const SparseMatrix& A) {
  Vector d = A.diagonal();
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d[i] == cplx(0.0)) {
      std::ostringstream msg;
      msg << "zero diagonal entry in row " << i;
      throw Error(ErrorCode::singular, msg.str());
    }
    d[i] = 1.0 / d[i];
  }
  return d;
}

void sor_sweep(const SparseMatrix& A, Vector& u, const Vector& f, double w) {
  const auto* outer = A.outerIndexPtr();
  const auto* inner = A.innerIndexPtr();
  const auto* val = A.valuePtr();
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    cplx s = f[i], diag = 0.0;
    for (int p = outer[i]; p < outer[i + 1]; ++p) {
      if (inner[p] == i) diag = val[p];
      else s -= val[p] * u[inner[p]];
    }
    if (diag == cplx(0.0)) {
      std::ostringstream msg;
      msg << "zero diagonal entry in row " << i;
      throw Error(ErrorCode::singular, msg.str());
    }
    u[i] = (1.0 - w) * u[i] + w * s / diag;
  }
}

Vector cycle(const MultigridHierarchy& hier, int l, Vector u, const Vector& f) {
  const Level& lev = hier.levels[l];
  const auto& sm = lev.smoother;
  u = smooth(lev.A, std::move(u), f, sm, sm.nu1);
  const Vector r = f - lev.A * u;
  const Vector rc = hier.transfers[l].restrict(r);
  Vector ec;
  if (l + 2 == hier.n_levels()) ec = hier.coarse->solve(rc);
  else ec = cycle(hier, l + 1, Vector::Zero(rc.size()), rc);
  u += hier.transfers[l].prolong(ec);
  return smooth(lev.A, std::move(u), f, sm, sm.nu2);
}

double restrict_scale_for(const HierarchyConfig& cfg, int dim) {
  if (cfg.discretization == Discretization::finite_element_pml || is_fe_scaled(cfg.fine)) return 1.0;
  return 1.0 / (1 << dim);
}

}  // namespace

Vector smooth(const SparseMatrix& A, Vector u, const Vector& f, const SmootherSpec& spec,
              int steps) {
  if (A.rows() != u.size() || A.rows() != f.size())
    throw Error(ErrorCode::invalid_argument, "smoother operands differ in size");
  if (steps <= 0) return u;
  if (spec.kind == SmootherKind::jacobi) {
    const Vector dinv = inverse_diagonal(A);
    for (int s = 0; s < steps; ++s) {
      Vector r = f - A * u;
      u += spec.omega * dinv.cwiseProduct(r);
    }
  } else {
    for (int s = 0; s < steps; ++s) sor_sweep(A, u, f, spec.omega);
  }
  return u;
}

struct CoarseSolver::Impl {
  ColMatrix A;
  Eigen::UmfPackLU<ColMatrix> lu;
};

CoarseSolver::CoarseSolver(const SparseMatrix& A) : impl_(std::make_unique<Impl>()), n_(A.rows()) {
  if (A.rows() != A.cols()) throw Error(ErrorCode::invalid_argument, "coarse operator is not square");
  impl_->A = A;
  impl_->A.makeCompressed();
  impl_->lu.compute(impl_->A);
  if (impl_->lu.info() != Eigen::Success)
    throw Error(ErrorCode::resonance,
                "coarse operator is singular; increase alpha or change Gc");
}

CoarseSolver::~CoarseSolver() = default;

Vector CoarseSolver::solve(const Vector& rhs) const {
  if (rhs.size() != n_) throw Error(ErrorCode::invalid_argument, "coarse right-hand side has the wrong size");
  Vector x = impl_->lu.solve(rhs);
  if (impl_->lu.info() != Eigen::Success) throw Error(ErrorCode::singular, "coarse solve failed");
  return x;
}

std::shared_ptr<const CoarseSolver> coarse_factorize(const SparseMatrix& A) {
  return std::make_shared<const CoarseSolver>(A);
}

Vector coarse_solve(const CoarseSolver& fact, const Vector& rhs) { return fact.solve(rhs); }

MultigridHierarchy build_hierarchy(const HierarchyConfig& cfg, const GridSpec& grid,
                                   const Medium& medium) {
  if (cfg.levels < 2) throw Error(ErrorCode::invalid_argument, "a hierarchy needs at least two levels");
  const bool fe = cfg.discretization == Discretization::finite_element_pml;
  if (fe && (cfg.fine != Scheme::fe || (cfg.coarse != Scheme::fe && cfg.coarse != Scheme::opt_fe)))
    throw Error(ErrorCode::invalid_argument, "PML finite elements use fe on the fine level and fe or optfe coarse");
  if (!fe && (is_fe_scaled(cfg.fine) || is_fe_scaled(cfg.coarse)))
    throw Error(ErrorCode::invalid_argument, "finite element schemes need the PML finite element discretization");
  if (cfg.fine == Scheme::galerkin || is_optimized(cfg.fine))
    throw Error(ErrorCode::invalid_argument, "fine scheme must be fd5, jss, fd7 or fe");
  if (dimension_of(cfg.fine) != grid.dim || dimension_of(cfg.coarse) != grid.dim)
    throw Error(ErrorCode::invalid_argument, "scheme and grid dimension differ");

  MultigridHierarchy h;
  const SmootherSpec sm = cfg.smoother.value_or(default_smoother(cfg.fine, cfg.coarse));
  const double rscale = restrict_scale_for(cfg, grid.dim);
  const PmlProfile profile = PmlProfile::of(grid, cfg.sigma_over_omega);

  GridSpec g = grid;
  Medium m = medium;
  for (int l = 0; l < cfg.levels; ++l) {
    Level lev;
    lev.smoother = sm;
    if (l > 0) {
      GridSpec gc = coarsen(g);
      h.transfers.emplace_back(g, gc, rscale);
      m = inject_medium(m, gc);
      g = std::move(gc);
    }
    lev.grid = g;
    const double ratio = 1.0 / (1 << l);
    SchemeSpec scheme{l == 0 ? cfg.fine : cfg.coarse, nullptr};
    if (is_optimized(scheme.kind)) scheme.table = lookup_table(family_of(scheme.kind), ratio);
    if (fe) {
      lev.A = assemble_fe_pml(g, m, profile, cfg.alpha, scheme);
    } else if (scheme.kind == Scheme::galerkin) {
      const Transfer& t = h.transfers.back();
      lev.A = assemble_galerkin_coarse(h.levels.back().A, t.restriction_matrix(), t.prolongation_matrix());
    } else {
      lev.A = assemble_fd(scheme, g, m, cfg.alpha);
    }
    h.levels.push_back(std::move(lev));
  }
  h.coarse = coarse_factorize(h.levels.back().A);
  return h;
}

Vector tg_cycle(const MultigridHierarchy& hier, const Vector& u0, const Vector& f) {
  if (hier.n_levels() != 2) throw Error(ErrorCode::invalid_argument, "two-grid cycle needs exactly two levels");
  return cycle(hier, 0, u0, f);
}

Vector v_cycle(const MultigridHierarchy& hier, const Vector& u0, const Vector& f) {
  if (hier.n_levels() < 2) throw Error(ErrorCode::invalid_argument, "V-cycle needs at least two levels");
  return cycle(hier, 0, u0, f);
}

Preconditioner cycle_preconditioner(const MultigridHierarchy& hier) {
  return [&hier](const Vector& r) { return v_cycle(hier, Vector::Zero(r.size()), r); };
}

SolveReport gmres_solve(const SparseMatrix& A, const Preconditioner& M, const Vector& f,
                        double tol, int maxit) {
  const auto t0 = std::chrono::steady_clock::now();
  SolveReport rep;
  const double fnorm = f.norm();
  rep.residuals.push_back(1.0);
  if (fnorm == 0.0) {
    rep.converged = true;
    rep.solution = Vector::Zero(f.size());
    return rep;
  }
  std::vector<Vector> V;
  V.push_back(f / fnorm);
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(maxit + 1, maxit);
  std::vector<cplx> cs, sn;
  Eigen::VectorXcd g = Eigen::VectorXcd::Zero(maxit + 1);
  g[0] = fnorm;

  auto solution_from = [&](int m) {
    Eigen::VectorXcd y = H.topLeftCorner(m, m).triangularView<Eigen::Upper>().solve(g.head(m));
    Vector z = Vector::Zero(f.size());
    for (int i = 0; i < m; ++i) z += y[i] * V[i];
    return M(z);
  };

  for (int j = 0; j < maxit; ++j) {
    Vector w = A * M(V[j]);
    for (int i = 0; i <= j; ++i) {
      H(i, j) = V[i].dot(w);
      w -= H(i, j) * V[i];
    }
    const double hn = w.norm();
    H(j + 1, j) = hn;
    for (int i = 0; i < j; ++i) {
      const cplx a = H(i, j), b = H(i + 1, j);
      H(i, j) = std::conj(cs[i]) * a + std::conj(sn[i]) * b;
      H(i + 1, j) = -sn[i] * a + cs[i] * b;
    }
    const cplx a = H(j, j);
    const double b = hn;
    const double r = std::hypot(std::abs(a), b);
    cplx c = 1.0, s = 0.0;
    if (r > 0.0) {
      c = a / r;
      s = cplx(b / r);
    }
    cs.push_back(c);
    sn.push_back(s);
    H(j, j) = std::conj(c) * a + std::conj(s) * b;
    H(j + 1, j) = 0.0;
    g[j + 1] = -s * g[j];
    g[j] = std::conj(c) * g[j];
    const double est = std::abs(g[j + 1]) / fnorm;
    rep.residuals.push_back(est);
    rep.iterations = j + 1;
    const bool breakdown = hn <= 1e-14 * fnorm;
    if (est <= tol || breakdown || j + 1 == maxit) {
      rep.solution = solution_from(j + 1);
      rep.true_residual = (f - A * rep.solution).norm() / fnorm;
      if (rep.true_residual <= tol) {
        rep.converged = true;
        break;
      }
      if (breakdown) break;
    }
    if (j + 1 < maxit) V.push_back(w / hn);
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace helmmg
