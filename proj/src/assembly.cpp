#include "helmmg/assembly.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "helmmg/coefficients.hpp"

namespace helmmg {

namespace {

using Triplet = Eigen::Triplet<cplx, int>;

Axis uniform_axis(int cells, int layer, double h, double origin) {
  Axis a;
  a.x.resize(cells + 1);
  for (int i = 0; i <= cells; ++i) a.x[i] = origin + i * h;
  a.pml_lo = a.pml_hi = layer;
  return a;
}

Axis coarsen_axis(const Axis& f) {
  const int m = f.n_cells();
  const int interior = f.interior_cells();
  if (interior < 2 || interior % 2 != 0) {
    std::ostringstream msg;
    msg << "axis with " << interior << " layer-free cells cannot be coarsened";
    throw Error(ErrorCode::invalid_argument, msg.str());
  }
  Axis c;
  c.pml_lo = f.pml_lo;
  c.pml_hi = f.pml_hi;
  for (int i = 0; i <= m; ++i) {
    if (i <= f.pml_lo || i >= m - f.pml_hi || (i - f.pml_lo) % 2 == 0) {
      c.x.push_back(f.x[i]);
      c.fine_index.push_back(i);
    }
  }
  if (c.n_unknowns() < 1)
    throw Error(ErrorCode::invalid_argument, "grid too small to coarsen");
  return c;
}

double min_interior_width(const Axis& a) {
  double w = std::numeric_limits<double>::infinity();
  for (int i = a.pml_lo; i < a.n_cells() - a.pml_hi; ++i) w = std::min(w, a.x[i + 1] - a.x[i]);
  return w;
}

// Moving average over 2r + 1 samples along one axis, window clipped at ends.
void box_filter_axis(std::vector<double>& v, const std::array<int, 3>& n, int axis, int r) {
  std::array<std::int64_t, 3> stride{1, n[0], static_cast<std::int64_t>(n[0]) * n[1]};
  const int len = n[axis];
  std::vector<double> line(len), prefix(len + 1);
  std::array<int, 3> other = n;
  other[axis] = 1;
  for (int c = 0; c < other[2]; ++c)
    for (int b = 0; b < other[1]; ++b)
      for (int a = 0; a < other[0]; ++a) {
        const std::int64_t base = a * stride[0] + b * stride[1] + c * stride[2];
        prefix[0] = 0.0;
        for (int i = 0; i < len; ++i) prefix[i + 1] = prefix[i] + v[base + i * stride[axis]];
        for (int i = 0; i < len; ++i) {
          const int lo = std::max(0, i - r), hi = std::min(len - 1, i + r);
          line[i] = (prefix[hi + 1] - prefix[lo]) / (hi - lo + 1);
        }
        for (int i = 0; i < len; ++i) v[base + i * stride[axis]] = line[i];
      }
}

std::array<int, 3> node_shape(const GridSpec& g) {
  std::array<int, 3> n{1, 1, 1};
  for (int a = 0; a < g.dim; ++a) n[a] = g.axes[a].n_nodes();
  return n;
}

void scale_to_gc(Medium& m, double Gc, double h) {
  const double kmax = 2.0 * std::numbers::pi / (Gc * h);
  const double s = kmax / m.max();
  for (double& v : m.k) v *= s;
}

}  // namespace

GridSpec GridSpec::unit(int dim, int n) {
  if (dim < 2 || dim > 3) throw Error(ErrorCode::invalid_argument, "grid dimension must be 2 or 3");
  if (n < 1) throw Error(ErrorCode::invalid_argument, "grid needs at least one unknown per axis");
  GridSpec g;
  g.dim = dim;
  for (int a = 0; a < dim; ++a) g.axes[a] = uniform_axis(n + 1, 0, 1.0 / (n + 1), 0.0);
  return g;
}

GridSpec GridSpec::pml_square(int cells, int layer) {
  if (cells < 2 || layer < 0)
    throw Error(ErrorCode::invalid_argument, "PML grid needs cells >= 2 and layer >= 0");
  GridSpec g;
  g.dim = 2;
  const double h = 1.0 / cells;
  for (int a = 0; a < 2; ++a) g.axes[a] = uniform_axis(cells + 2 * layer, layer, h, -layer * h);
  return g;
}

std::int64_t GridSpec::n_unknowns() const {
  std::int64_t n = 1;
  for (int a = 0; a < dim; ++a) n *= axes[a].n_unknowns();
  return n;
}

std::array<int, 3> GridSpec::shape() const {
  std::array<int, 3> s{1, 1, 1};
  for (int a = 0; a < dim; ++a) s[a] = axes[a].n_unknowns();
  return s;
}

bool GridSpec::has_pml() const {
  for (int a = 0; a < dim; ++a)
    if (axes[a].pml_lo > 0 || axes[a].pml_hi > 0) return true;
  return false;
}

bool GridSpec::uniform() const {
  const double h = axes[0].x[1] - axes[0].x[0];
  for (int a = 0; a < dim; ++a)
    for (int i = 0; i < axes[a].n_cells(); ++i)
      if (std::abs(axes[a].x[i + 1] - axes[a].x[i] - h) > 1e-12 * h) return false;
  return true;
}

double GridSpec::spacing() const {
  if (!uniform()) throw Error(ErrorCode::invalid_argument, "grid spacing is not uniform");
  return axes[0].x[1] - axes[0].x[0];
}

std::int64_t GridSpec::index(int i, int j, int l) const {
  const auto s = shape();
  return i + static_cast<std::int64_t>(s[0]) * (j + static_cast<std::int64_t>(s[1]) * l);
}

GridSpec coarsen_grid_pml(const GridSpec& grid) {
  GridSpec c;
  c.dim = grid.dim;
  for (int a = 0; a < grid.dim; ++a) c.axes[a] = coarsen_axis(grid.axes[a]);
  return c;
}

GridSpec coarsen(const GridSpec& grid) { return coarsen_grid_pml(grid); }

double Medium::min() const { return *std::min_element(k.begin(), k.end()); }
double Medium::max() const { return *std::max_element(k.begin(), k.end()); }

Medium make_medium(const MediumParams& params, const GridSpec& grid) {
  if (params.Gc <= 0.0) throw Error(ErrorCode::invalid_argument, "Gc must be positive");
  const double h = params.h_gc > 0.0 ? params.h_gc : 2.0 * min_interior_width(grid.axes[0]);
  Medium m;
  m.kind = params.kind;
  m.nodes = node_shape(grid);
  const std::int64_t total = static_cast<std::int64_t>(m.nodes[0]) * m.nodes[1] * m.nodes[2];
  const double kmax = 2.0 * std::numbers::pi / (params.Gc * h);
  switch (params.kind) {
    case Medium::Kind::constant:
      m.k.assign(total, kmax);
      break;
    case Medium::Kind::random: {
      if (params.contrast < 0.0 || params.contrast >= 1.0)
        throw Error(ErrorCode::invalid_argument, "random medium contrast must lie in [0, 1)");
      std::mt19937_64 rng(params.seed);
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      std::vector<double> noise(total);
      for (double& v : noise) v = u(rng);
      for (int a = 0; a < grid.dim; ++a) box_filter_axis(noise, m.nodes, a, params.smoothing_radius);
      double amp = 0.0;
      for (double v : noise) amp = std::max(amp, std::abs(v));
      if (amp == 0.0) amp = 1.0;
      m.k.resize(total);
      double cmin = std::numeric_limits<double>::infinity();
      for (std::int64_t i = 0; i < total; ++i) {
        const double c = 1.0 + params.contrast * noise[i] / amp;
        m.k[i] = 1.0 / c;
        cmin = std::min(cmin, c);
      }
      for (double& v : m.k) v *= kmax * cmin;
      break;
    }
    case Medium::Kind::file: {
      Medium f = read_medium(params.path);
      if (f.nodes != m.nodes) {
        std::ostringstream msg;
        msg << "medium file has " << f.nodes[0] << "x" << f.nodes[1] << "x" << f.nodes[2]
            << " nodes, grid needs " << m.nodes[0] << "x" << m.nodes[1] << "x" << m.nodes[2];
        throw Error(ErrorCode::invalid_argument, msg.str());
      }
      m.k = std::move(f.k);
      if (params.normalize_file) scale_to_gc(m, params.Gc, h);
      break;
    }
  }
  if (m.min() <= 0.0 || !std::isfinite(m.max()))
    throw Error(ErrorCode::invalid_argument, "medium wavenumber must be positive and finite");
  return m;
}

Medium inject_medium(const Medium& fine_medium, const GridSpec& coarse) {
  Medium m;
  m.kind = fine_medium.kind;
  m.nodes = node_shape(coarse);
  m.k.resize(static_cast<std::int64_t>(m.nodes[0]) * m.nodes[1] * m.nodes[2]);
  std::array<std::vector<int>, 3> idx;
  for (int a = 0; a < 3; ++a) {
    if (a < coarse.dim) {
      idx[a] = coarse.axes[a].fine_index;
      if (static_cast<int>(idx[a].size()) != m.nodes[a])
        throw Error(ErrorCode::invalid_argument, "coarse grid carries no fine node map");
    } else {
      idx[a] = {0};
    }
  }
  std::int64_t n = 0;
  for (int l = 0; l < m.nodes[2]; ++l)
    for (int j = 0; j < m.nodes[1]; ++j)
      for (int i = 0; i < m.nodes[0]; ++i) m.k[n++] = fine_medium.at(idx[0][i], idx[1][j], idx[2][l]);
  return m;
}

Medium read_medium(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open medium file " + path.string());
  std::string line, key;
  std::getline(in, line);
  if (line.rfind("helmmg-medium 1", 0) != 0)
    throw Error(ErrorCode::io, "not a medium file: " + path.string());
  Medium m;
  m.kind = Medium::Kind::file;
  bool speed = false, have_dims = false;
  double omega = 1.0;
  std::string mode;
  while (mode.empty() && std::getline(in, line)) {
    std::istringstream ls(line);
    ls >> key;
    if (key == "dims") {
      int d = 0;
      m.nodes = {1, 1, 1};
      while (d < 3 && ls >> m.nodes[d]) ++d;
      if (d < 2) throw Error(ErrorCode::io, "medium file needs at least two dims");
      have_dims = true;
    } else if (key == "quantity") {
      std::string q;
      ls >> q;
      if (q != "wavenumber" && q != "speed" && q != "field")
        throw Error(ErrorCode::io, "medium quantity must be wavenumber, speed or field");
      speed = q == "speed";
    } else if (key == "omega") {
      ls >> omega;
    } else if (key == "binary" || key == "csv") {
      mode = key;
    } else if (!key.empty() && key[0] != '#') {
      throw Error(ErrorCode::io, "unknown medium header line: " + line);
    }
  }
  if (!have_dims || mode.empty()) throw Error(ErrorCode::io, "incomplete medium header");
  const std::int64_t total = static_cast<std::int64_t>(m.nodes[0]) * m.nodes[1] * m.nodes[2];
  m.k.resize(total);
  if (mode == "binary") {
    static_assert(std::endian::native == std::endian::little);
    in.read(reinterpret_cast<char*>(m.k.data()), total * static_cast<std::streamsize>(sizeof(double)));
    if (in.gcount() != total * static_cast<std::streamsize>(sizeof(double)))
      throw Error(ErrorCode::io, "medium file is truncated");
  } else {
    std::string tok;
    std::int64_t n = 0;
    while (n < total && in >> tok) {
      std::replace(tok.begin(), tok.end(), ',', ' ');
      std::istringstream ts(tok);
      double v;
      while (ts >> v && n < total) m.k[n++] = v;
    }
    if (n != total) throw Error(ErrorCode::io, "medium file has too few values");
  }
  if (speed)
    for (double& v : m.k) {
      if (v <= 0.0) throw Error(ErrorCode::invalid_argument, "nonpositive speed in medium file");
      v = omega / v;
    }
  return m;
}

void write_medium(const std::filesystem::path& path, const Medium& m, bool binary,
                  std::string_view quantity) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write medium file " + path.string());
  out << "helmmg-medium 1\ndims " << m.nodes[0] << ' ' << m.nodes[1];
  if (m.nodes[2] > 1) out << ' ' << m.nodes[2];
  out << "\nquantity " << quantity << "\n";
  if (binary) {
    out << "binary\n";
    out.write(reinterpret_cast<const char*>(m.k.data()),
              static_cast<std::streamsize>(m.k.size() * sizeof(double)));
  } else {
    out << "csv\n";
    out.precision(17);
    for (int r = 0; r < m.nodes[1] * m.nodes[2]; ++r) {
      for (int i = 0; i < m.nodes[0]; ++i)
        out << (i ? "," : "") << m.k[static_cast<std::int64_t>(r) * m.nodes[0] + i];
      out << '\n';
    }
  }
  if (!out) throw Error(ErrorCode::io, "failed writing medium file " + path.string());
}

SparseMatrix assemble_fd(const SchemeSpec& scheme, const GridSpec& grid,
                         const Medium& medium, double alpha) {
  if (dimension_of(scheme.kind) != grid.dim)
    throw Error(ErrorCode::invalid_argument, "scheme and grid dimension differ");
  if (grid.has_pml()) throw Error(ErrorCode::invalid_argument, "finite differences need a grid without PML");
  if (scheme.kind == Scheme::galerkin)
    throw Error(ErrorCode::invalid_argument, "Galerkin operators come from assemble_galerkin_coarse");
  const double h = grid.spacing();
  const auto s = grid.shape();
  const std::int64_t n = grid.n_unknowns();
  if (n > std::numeric_limits<int>::max()) throw Error(ErrorCode::invalid_argument, "grid too large");

  std::vector<Triplet> trips;
  trips.reserve(n * (grid.dim == 2 ? 9 : 27));
  Stencil st;
  double k_last = -1.0;
  for (int l = 0; l < s[2]; ++l)
    for (int j = 0; j < s[1]; ++j)
      for (int i = 0; i < s[0]; ++i) {
        const double k = medium.at(i + 1, j + 1, grid.dim == 3 ? l + 1 : 0);
        if (k != k_last) {
          try {
            st = stencil_of(scheme, {h, k, alpha});
          } catch (const Error& e) {
            std::ostringstream msg;
            msg << e.what() << " at node (" << i << ", " << j;
            if (grid.dim == 3) msg << ", " << l;
            msg << ")";
            throw Error(e.code(), msg.str());
          }
          k_last = k;
        }
        const int row = static_cast<int>(grid.index(i, j, l));
        for (const auto& e : st.entries) {
          const int a = i + e.offset[0], b = j + e.offset[1], c = l + e.offset[2];
          if (a < 0 || a >= s[0] || b < 0 || b >= s[1] || c < 0 || c >= s[2]) continue;
          trips.emplace_back(row, static_cast<int>(grid.index(a, b, c)), e.weight);
        }
      }
  SparseMatrix A(n, n);
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

SparseMatrix assemble_galerkin_coarse(const SparseMatrix& fine, const SparseMatrix& R,
                                      const SparseMatrix& P) {
  if (R.cols() != fine.rows() || P.rows() != fine.cols() || R.rows() != P.cols())
    throw Error(ErrorCode::invalid_argument, "transfer shapes do not match the fine operator");
  SparseMatrix LP = fine * P;
  SparseMatrix A = R * LP;
  A.prune(cplx(0.0), 0.0);
  return A;
}

PmlProfile PmlProfile::of(const GridSpec& grid, double sigma_over_omega) {
  PmlProfile p;
  p.sigma_over_omega = sigma_over_omega;
  for (int a = 0; a < grid.dim; ++a) {
    const Axis& ax = grid.axes[a];
    p.interior_lo[a] = ax.interior_lo();
    p.interior_hi[a] = ax.interior_hi();
    p.width[a] = std::max(ax.interior_lo() - ax.x.front(), ax.x.back() - ax.interior_hi());
  }
  return p;
}

cplx pml_alpha(const PmlProfile& profile, int axis, double x) {
  const double w = profile.width[axis];
  double d = 0.0;
  if (x < profile.interior_lo[axis]) d = profile.interior_lo[axis] - x;
  else if (x > profile.interior_hi[axis]) d = x - profile.interior_hi[axis];
  if (d == 0.0 || w <= 0.0) return 1.0;
  const double t = std::min(d / w, 1.0);
  return 1.0 / cplx(1.0, profile.sigma_over_omega * t * t);
}

SparseMatrix assemble_fe_pml(const GridSpec& grid, const Medium& medium,
                             const PmlProfile& profile, double alpha,
                             const SchemeSpec& coarse_opt) {
  if (grid.dim != 2) throw Error(ErrorCode::invalid_argument, "PML finite elements are 2-D only");
  if (coarse_opt.kind != Scheme::fe && coarse_opt.kind != Scheme::opt_fe)
    throw Error(ErrorCode::invalid_argument, "finite element rows take fe or optfe stencils");
  const Axis& X = grid.axes[0];
  const Axis& Y = grid.axes[1];
  const int mx = X.n_cells(), my = Y.n_cells();
  const int nx = X.n_unknowns();
  const std::int64_t n = grid.n_unknowns();
  const cplx damp = cplx(1.0, alpha) * cplx(1.0, alpha);

  // Rows of nodes surrounded by four equal square layer-free cells may take
  // the optimized stencil.
  std::vector<char> opt_row(n, 0);
  const bool optimized = coarse_opt.kind == Scheme::opt_fe;
  if (optimized) {
    for (int j = 1; j < my; ++j)
      for (int i = 1; i < mx; ++i) {
        if (i - 1 < X.pml_lo || i + 1 > mx - X.pml_hi || j - 1 < Y.pml_lo || j + 1 > my - Y.pml_hi)
          continue;
        const double hx0 = X.x[i] - X.x[i - 1], hx1 = X.x[i + 1] - X.x[i];
        const double hy0 = Y.x[j] - Y.x[j - 1], hy1 = Y.x[j + 1] - Y.x[j];
        const double h = hx0;
        const double tol = 1e-12 * h;
        if (std::abs(hx1 - h) > tol || std::abs(hy0 - h) > tol || std::abs(hy1 - h) > tol) continue;
        opt_row[(i - 1) + static_cast<std::int64_t>(nx) * (j - 1)] = 1;
      }
  }

  std::vector<Triplet> trips;
  trips.reserve(n * 9);
  const double g = 1.0 / std::sqrt(3.0);
  for (int cj = 0; cj < my; ++cj)
    for (int ci = 0; ci < mx; ++ci) {
      const double x0 = X.x[ci], x1 = X.x[ci + 1], y0 = Y.x[cj], y1 = Y.x[cj + 1];
      const double hx = x1 - x0, hy = y1 - y0;
      if (hx <= 0.0 || hy <= 0.0) throw Error(ErrorCode::invalid_argument, "degenerate finite element cell");
      const double kc[4] = {medium.at(ci, cj), medium.at(ci + 1, cj), medium.at(ci, cj + 1),
                            medium.at(ci + 1, cj + 1)};
      cplx Ke[4][4] = {};
      for (double gx : {-g, g})
        for (double gy : {-g, g}) {
          const double s = 0.5 * (1.0 + gx), t = 0.5 * (1.0 + gy);
          const double phi[4] = {(1 - s) * (1 - t), s * (1 - t), (1 - s) * t, s * t};
          const double dx[4] = {-(1 - t) / hx, (1 - t) / hx, -t / hx, t / hx};
          const double dy[4] = {-(1 - s) / hy, -s / hy, (1 - s) / hy, s / hy};
          double k = 0.0;
          for (int a = 0; a < 4; ++a) k += phi[a] * kc[a];
          const cplx a1 = pml_alpha(profile, 0, x0 + s * hx);
          const cplx a2 = pml_alpha(profile, 1, y0 + t * hy);
          const cplx cx = a1 / a2, cy = a2 / a1, cm = damp * k * k / (a1 * a2);
          const double w = 0.25 * hx * hy;
          for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
              Ke[a][b] += w * (cx * dx[a] * dx[b] + cy * dy[a] * dy[b] - cm * phi[a] * phi[b]);
        }
      const int ni[4] = {ci, ci + 1, ci, ci + 1};
      const int nj[4] = {cj, cj, cj + 1, cj + 1};
      for (int a = 0; a < 4; ++a) {
        if (ni[a] == 0 || ni[a] == mx || nj[a] == 0 || nj[a] == my) continue;
        const std::int64_t row = (ni[a] - 1) + static_cast<std::int64_t>(nx) * (nj[a] - 1);
        if (opt_row[row]) continue;
        for (int b = 0; b < 4; ++b) {
          if (ni[b] == 0 || ni[b] == mx || nj[b] == 0 || nj[b] == my) continue;
          const std::int64_t col = (ni[b] - 1) + static_cast<std::int64_t>(nx) * (nj[b] - 1);
          trips.emplace_back(static_cast<int>(row), static_cast<int>(col), Ke[a][b]);
        }
      }
    }

  if (optimized) {
    Stencil st;
    double k_last = -1.0;
    for (std::int64_t row = 0; row < n; ++row) {
      if (!opt_row[row]) continue;
      const int i = static_cast<int>(row % nx) + 1, j = static_cast<int>(row / nx) + 1;
      const double k = medium.at(i, j);
      if (k != k_last) {
        const double h = X.x[i + 1] - X.x[i];
        try {
          st = stencil_of(coarse_opt, {h, k, alpha});
        } catch (const Error& e) {
          std::ostringstream msg;
          msg << e.what() << " at node (" << i - 1 << ", " << j - 1 << ")";
          throw Error(e.code(), msg.str());
        }
        k_last = k;
      }
      for (const auto& e : st.entries) {
        const int a = i + e.offset[0], b = j + e.offset[1];
        if (a == 0 || a == mx || b == 0 || b == my) continue;
        const std::int64_t col = (a - 1) + static_cast<std::int64_t>(nx) * (b - 1);
        trips.emplace_back(static_cast<int>(row), static_cast<int>(col), e.weight);
      }
    }
  }
  SparseMatrix A(n, n);
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

Vector point_source_rhs(const GridSpec& grid, std::array<double, 3> location) {
  std::array<int, 3> idx{0, 0, 0};
  for (int a = 0; a < grid.dim; ++a) {
    const Axis& ax = grid.axes[a];
    const double x = location[a];
    if (x < ax.interior_lo() || x > ax.interior_hi()) {
      std::ostringstream msg;
      msg << "source coordinate " << x << " on axis " << a << " lies outside the interior ["
          << ax.interior_lo() << ", " << ax.interior_hi() << "]";
      throw Error(ErrorCode::invalid_argument, msg.str());
    }
    int best = 1;
    for (int i = 1; i <= ax.n_unknowns(); ++i)
      if (std::abs(ax.x[i] - x) < std::abs(ax.x[best] - x)) best = i;
    idx[a] = best - 1;
  }
  Vector f = Vector::Zero(grid.n_unknowns());
  f[grid.index(idx[0], idx[1], idx[2])] = 1.0;
  return f;
}

Transfer::Transfer(const GridSpec& fine, const GridSpec& coarse, double restrict_scale)
    : dim_(fine.dim), scale_(restrict_scale) {
  if (fine.dim != coarse.dim) throw Error(ErrorCode::invalid_argument, "grid dimensions differ");
  for (int a = 0; a < dim_; ++a) {
    const Axis& F = fine.axes[a];
    const Axis& C = coarse.axes[a];
    if (static_cast<int>(C.fine_index.size()) != C.n_nodes() || C.fine_index.back() != F.n_cells())
      throw Error(ErrorCode::invalid_argument, "coarse grid does not nest in the fine grid");
    nf_[a] = F.n_unknowns();
    nc_[a] = C.n_unknowns();
    std::vector<int> coarse_of(F.n_nodes(), -1);
    for (int c = 0; c < C.n_nodes(); ++c) coarse_of[C.fine_index[c]] = c;
    legs_[a].assign(nf_[a], {});
    int left = 0;
    for (int f = 1; f < F.n_cells(); ++f) {
      auto& l = legs_[a][f - 1];
      if (coarse_of[f] >= 0) {
        left = coarse_of[f];
        l.push_back({left - 1, 1.0});
        continue;
      }
      const int right = left + 1;
      const double xa = C.x[left], xb = C.x[right], x = F.x[f];
      const double wl = (xb - x) / (xb - xa);
      if (left > 0) l.push_back({left - 1, wl});
      if (right < C.n_cells()) l.push_back({right - 1, 1.0 - wl});
    }
  }
}

Vector Transfer::apply_axis(const Vector& v, int axis, bool transpose,
                            const std::array<int, 3>& shape_in) const {
  std::array<int, 3> shape_out = shape_in;
  shape_out[axis] = transpose ? nc_[axis] : nf_[axis];
  const std::int64_t out_size = static_cast<std::int64_t>(shape_out[0]) * shape_out[1] * shape_out[2];
  Vector out = Vector::Zero(out_size);
  const std::int64_t si = axis == 0 ? 1 : (axis == 1 ? shape_in[0] : std::int64_t(shape_in[0]) * shape_in[1]);
  const std::int64_t so = axis == 0 ? 1 : (axis == 1 ? shape_out[0] : std::int64_t(shape_out[0]) * shape_out[1]);
  std::array<int, 3> other = shape_in;
  other[axis] = 1;
  const auto& legs = legs_[axis];
  for (int c = 0; c < other[2]; ++c)
    for (int b = 0; b < other[1]; ++b)
      for (int a = 0; a < other[0]; ++a) {
        const std::array<int, 3> pos{a, b, c};
        std::int64_t bi = 0, bo = 0;
        {
          std::int64_t mi = 1, mo = 1;
          for (int d = 0; d < 3; ++d) {
            bi += pos[d] * mi;
            bo += pos[d] * mo;
            mi *= shape_in[d];
            mo *= shape_out[d];
          }
        }
        for (int f = 0; f < nf_[axis]; ++f)
          for (const auto& leg : legs[f]) {
            if (transpose) out[bo + leg.coarse * so] += leg.weight * v[bi + f * si];
            else out[bo + f * so] += leg.weight * v[bi + leg.coarse * si];
          }
      }
  return out;
}

Vector Transfer::prolong(const Vector& coarse) const {
  if (coarse.size() != static_cast<std::int64_t>(nc_[0]) * nc_[1] * nc_[2])
    throw Error(ErrorCode::invalid_argument, "coarse vector has the wrong size");
  Vector v = coarse;
  std::array<int, 3> shape = nc_;
  for (int a = 0; a < dim_; ++a) {
    v = apply_axis(v, a, false, shape);
    shape[a] = nf_[a];
  }
  return v;
}

Vector Transfer::restrict(const Vector& fine) const {
  if (fine.size() != static_cast<std::int64_t>(nf_[0]) * nf_[1] * nf_[2])
    throw Error(ErrorCode::invalid_argument, "fine vector has the wrong size");
  Vector v = fine;
  std::array<int, 3> shape = nf_;
  for (int a = 0; a < dim_; ++a) {
    v = apply_axis(v, a, true, shape);
    shape[a] = nc_[a];
  }
  return scale_ * v;
}

SparseMatrix Transfer::prolongation_matrix() const {
  std::vector<Triplet> trips;
  const std::int64_t nf = static_cast<std::int64_t>(nf_[0]) * nf_[1] * nf_[2];
  trips.reserve(nf * (dim_ == 2 ? 4 : 8));
  const std::vector<Leg> unit{{0, 1.0}};
  for (int l = 0; l < nf_[2]; ++l)
    for (int j = 0; j < nf_[1]; ++j)
      for (int i = 0; i < nf_[0]; ++i) {
        const int row = static_cast<int>(i + static_cast<std::int64_t>(nf_[0]) * (j + static_cast<std::int64_t>(nf_[1]) * l));
        const auto& lz = dim_ == 3 ? legs_[2][l] : unit;
        for (const auto& a : legs_[0][i])
          for (const auto& b : legs_[1][j])
            for (const auto& c : lz) {
              const std::int64_t col = a.coarse + static_cast<std::int64_t>(nc_[0]) * (b.coarse + static_cast<std::int64_t>(nc_[1]) * c.coarse);
              trips.emplace_back(row, static_cast<int>(col), a.weight * b.weight * c.weight);
            }
      }
  SparseMatrix P(nf, static_cast<std::int64_t>(nc_[0]) * nc_[1] * nc_[2]);
  P.setFromTriplets(trips.begin(), trips.end());
  return P;
}

SparseMatrix Transfer::restriction_matrix() const {
  SparseMatrix R = SparseMatrix(prolongation_matrix().transpose()) * cplx(scale_);
  return R;
}

}  // namespace helmmg
