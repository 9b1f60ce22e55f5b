#include "helmmg/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

namespace helmmg {

namespace {

struct Sample {
  Direction dir;
  double sqrt_weight;
  double k;
  int node;
  double t;  // interpolation weight of node + 1
  double xi_fine;
};

Stencil coarse_stencil(TableFamily family, const double* x, const GridScale& s) {
  switch (family) {
    case TableFamily::opt_fd5: return stencil_opt2d(CoeffSet2D::from_free(x[0], x[1], x[2]), s);
    case TableFamily::opt_fe: return stencil_opt_fe(CoeffSet2D::from_free(x[0], x[1], x[2]), s);
    case TableFamily::opt_fd7:
      return stencil_opt3d(CoeffSet3D::from_free(x[0], x[1], x[2], x[3], x[4]), s);
  }
  throw Error(ErrorCode::invalid_argument, "unknown table family");
}

double ray_value(const Stencil& st, double h, const Direction& dir, double xi,
                 double* dxi) {
  double v = 0.0, d = 0.0;
  for (const auto& e : st.entries) {
    double m = 0.0;
    for (int i = 0; i < dir.dim; ++i) m += e.offset[i] * dir.u[i];
    const double ph = h * xi * m;
    v += e.weight.real() * std::cos(ph);
    d -= e.weight.real() * h * m * std::sin(ph);
  }
  if (dxi) *dxi = d;
  return v;
}

class Problem {
 public:
  Problem(const FitConfig& cfg, double P) : cfg_(cfg), P_(P) {
    nfree_ = dimension_of(cfg.family) == 2 ? 3 : 5;
    const int nc = cfg.n_controls;
    const auto angles = angle_grid(cfg.n_angles);
    std::vector<Direction> dirs;
    std::vector<double> weights;
    for (double t : angles) {
      if (nfree_ == 3) {
        dirs.push_back(Direction::planar(t));
        weights.push_back(1.0);
      } else {
        for (double f : angles) {
          dirs.push_back(Direction::spherical(t, f));
          weights.push_back(std::cos(t));
        }
      }
    }
    const SchemeSpec fine{fine_scheme_of(cfg.family), nullptr};
    for (double p : p_grid(P, cfg.samples_in_p())) {
      const double k = 2.0 * std::numbers::pi * p;
      int node = 0;
      double t = 0.0;
      if (nc > 1) {
        const double s = std::clamp(p / P * (nc - 1), 0.0, double(nc - 1));
        node = std::min(static_cast<int>(std::floor(s)), nc - 2);
        t = s - node;
      }
      const Stencil fs = stencil_of(fine, {cfg.ratio, k, 0.0});
      for (std::size_t d = 0; d < dirs.size(); ++d) {
        const double xf = phase_root(fs, cfg.ratio, dirs[d]).xi;
        samples_.push_back({dirs[d], std::sqrt(weights[d]), k, node, t, xf});
      }
    }
  }

  int n_params() const { return cfg_.n_controls * nfree_; }
  int n_residuals() const { return static_cast<int>(samples_.size()); }

  /// Residuals and, if J is given, their Jacobian at the flattened controls.
  void evaluate(const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* J) const {
    r.resize(n_residuals());
    if (J) J->setZero(n_residuals(), n_params());
    std::vector<double> c(nfree_), cp(nfree_);
    for (int s = 0; s < n_residuals(); ++s) {
      const Sample& q = samples_[s];
      const int n1 = std::min(q.node + 1, cfg_.n_controls - 1);
      for (int j = 0; j < nfree_; ++j)
        c[j] = (1.0 - q.t) * x[q.node * nfree_ + j] + q.t * x[n1 * nfree_ + j];
      const GridScale gs{1.0, q.k, 0.0};
      const Stencil st = coarse_stencil(cfg_.family, c.data(), gs);
      double xc = 0.0;
      try {
        xc = phase_root(st, 1.0, q.dir).xi;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::no_propagating_root) throw;
        r[s] = std::sqrt(kFitPenalty);
        continue;
      }
      r[s] = q.sqrt_weight * (xc - q.xi_fine) / q.xi_fine;
      if (!J) continue;
      double dsig_dxi = 0.0;
      const double base = ray_value(st, 1.0, q.dir, xc, &dsig_dxi);
      if (dsig_dxi == 0.0) continue;
      for (int j = 0; j < nfree_; ++j) {
        // The symbol is affine in each free coefficient.
        cp = c;
        cp[j] += 1.0;
        const Stencil sj = coarse_stencil(cfg_.family, cp.data(), gs);
        const double dsig = ray_value(sj, 1.0, q.dir, xc, nullptr) - base;
        const double dr = -q.sqrt_weight * dsig / dsig_dxi / q.xi_fine;
        (*J)(s, q.node * nfree_ + j) += (1.0 - q.t) * dr;
        (*J)(s, n1 * nfree_ + j) += q.t * dr;
      }
    }
  }

  double objective(const Eigen::VectorXd& x) const {
    Eigen::VectorXd r;
    evaluate(x, r, nullptr);
    return r.squaredNorm();
  }

  int nfree() const { return nfree_; }

 private:
  const FitConfig& cfg_;
  double P_;
  int nfree_;
  std::vector<Sample> samples_;
};

Eigen::VectorXd flatten(const std::vector<std::vector<double>>& controls, int nfree) {
  Eigen::VectorXd x(controls.size() * nfree);
  for (std::size_t k = 0; k < controls.size(); ++k) {
    if (static_cast<int>(controls[k].size()) != nfree)
      throw Error(ErrorCode::invalid_argument, "control row has wrong number of values");
    for (int j = 0; j < nfree; ++j) x[k * nfree + j] = controls[k][j];
  }
  return x;
}

std::vector<std::vector<double>> unflatten(const Eigen::VectorXd& x, int nfree) {
  std::vector<std::vector<double>> c(x.size() / nfree, std::vector<double>(nfree));
  for (std::size_t k = 0; k < c.size(); ++k)
    for (int j = 0; j < nfree; ++j) c[k][j] = x[k * nfree + j];
  return c;
}

// Controls of a table at P_old resampled onto the nodes for P_new; the last
// segment is extended linearly past P_old.
std::vector<std::vector<double>> resample(const std::vector<std::vector<double>>& c,
                                          double P_old, double P_new) {
  const int n = static_cast<int>(c.size());
  if (n == 1) return c;
  std::vector<std::vector<double>> out(n, std::vector<double>(c[0].size()));
  for (int k = 0; k < n; ++k) {
    const double s = P_new * k / (n - 1) / P_old * (n - 1);
    const int i = std::min(static_cast<int>(std::floor(s)), n - 2);
    const double t = s - i;
    for (std::size_t j = 0; j < c[0].size(); ++j)
      out[k][j] = (1.0 - t) * c[i][j] + t * c[i + 1][j];
  }
  return out;
}

struct StageResult {
  Eigen::VectorXd x;
  double objective;
  int iterations;
  bool converged;
};

StageResult levenberg_marquardt(const Problem& prob, Eigen::VectorXd x, const FitConfig& cfg) {
  Eigen::VectorXd r, r_new;
  Eigen::MatrixXd J;
  prob.evaluate(x, r, &J);
  double f = r.squaredNorm();
  double lambda = 1e-3;
  int it = 0;
  bool converged = false;
  while (it < cfg.max_iterations) {
    ++it;
    const Eigen::MatrixXd A = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    if (g.lpNorm<Eigen::Infinity>() < 1e-15) {
      converged = true;
      break;
    }
    bool accepted = false;
    while (lambda < 1e12) {
      Eigen::MatrixXd M = A;
      for (int i = 0; i < M.rows(); ++i) M(i, i) += lambda * std::max(A(i, i), 1e-12);
      const Eigen::VectorXd step = M.ldlt().solve(-g);
      const Eigen::VectorXd x_new = x + step;
      prob.evaluate(x_new, r_new, nullptr);
      const double f_new = r_new.squaredNorm();
      if (std::isfinite(f_new) && f_new < f) {
        const double decrease = (f - f_new) / std::max(f, 1e-300);
        x = x_new;
        f = f_new;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (decrease < cfg.tolerance || step.norm() < 1e-12 * (1.0 + x.norm())) converged = true;
        break;
      }
      lambda *= 4.0;
    }
    if (!accepted) {
      converged = true;  // no descent direction left at working precision
      break;
    }
    if (converged) break;
    prob.evaluate(x, r, &J);
  }
  return {x, f, it, converged};
}

}  // namespace

Scheme fine_scheme_of(TableFamily family) {
  switch (family) {
    case TableFamily::opt_fd5: return Scheme::fd5;
    case TableFamily::opt_fe: return Scheme::fe;
    case TableFamily::opt_fd7: return Scheme::fd7;
  }
  throw Error(ErrorCode::invalid_argument, "unknown table family");
}

Scheme coarse_scheme_of(TableFamily family) {
  switch (family) {
    case TableFamily::opt_fd5: return Scheme::opt2d;
    case TableFamily::opt_fe: return Scheme::opt_fe;
    case TableFamily::opt_fd7: return Scheme::opt3d;
  }
  throw Error(ErrorCode::invalid_argument, "unknown table family");
}

std::vector<double> default_start(TableFamily family) {
  if (dimension_of(family) == 3) return {1.0, 0.0, 1.0, 0.0, 0.0};
  const auto j = CoeffSet2D::jss();
  return {j.a1, j.b1, j.b2};
}

double fit_objective(const std::vector<std::vector<double>>& controls, const FitConfig& cfg) {
  if (static_cast<int>(controls.size()) != cfg.n_controls)
    throw Error(ErrorCode::invalid_argument, "control count differs from n_controls");
  const Problem prob(cfg, cfg.P);
  return prob.objective(flatten(controls, prob.nfree()));
}

FitResult fit_coefficients(const FitConfig& cfg) {
  if (cfg.n_controls < 1 || cfg.P <= 0.0 || cfg.ratio <= 0.0 || cfg.ratio > 1.0)
    throw Error(ErrorCode::invalid_argument, "fit needs n_controls >= 1, P > 0, 0 < ratio <= 1");
  const int nfree = dimension_of(cfg.family) == 2 ? 3 : 5;
  const std::vector<std::vector<double>> flat_start(cfg.n_controls, default_start(cfg.family));

  FitResult res;
  int total_iters = 0;
  bool converged = true;
  std::vector<std::vector<double>> current;
  const Problem final_problem(cfg, cfg.P);

  if (cfg.start) {
    current = *cfg.start;
    res.start_objective = final_problem.objective(flatten(current, nfree));
  } else {
    res.start_objective = final_problem.objective(flatten(flat_start, nfree));
    current = flat_start;
    double P_prev = 0.0;
    for (double Ps : cfg.continuation) {
      if (Ps <= P_prev || Ps >= cfg.P) continue;
      if (P_prev > 0.0) current = resample(current, P_prev, Ps);
      const Problem stage(cfg, Ps);
      const auto sr = levenberg_marquardt(stage, flatten(current, nfree), cfg);
      current = unflatten(sr.x, nfree);
      total_iters += sr.iterations;
      P_prev = Ps;
    }
    if (P_prev > 0.0) current = resample(current, P_prev, cfg.P);
    if (final_problem.objective(flatten(current, nfree)) > res.start_objective)
      current = flat_start;
  }

  const auto sr = levenberg_marquardt(final_problem, flatten(current, nfree), cfg);
  total_iters += sr.iterations;
  converged = converged && sr.converged;
  res.table = std::make_shared<const CoefficientTable>(cfg.family, cfg.ratio, cfg.P,
                                                       unflatten(sr.x, nfree));
  res.objective = sr.objective;
  res.iterations = total_iters;
  res.converged = converged;
  return res;
}

}  // namespace helmmg
