#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Sparse>

#include "helmmg/symbols.hpp"

namespace helmmg {

using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor, int>;
using Vector = Eigen::VectorXcd;

/// Node coordinates along one axis, both Dirichlet boundary nodes included.
/// The PML widths count cells at each end that belong to absorbing layers.
struct Axis {
  std::vector<double> x;
  int pml_lo = 0;
  int pml_hi = 0;
  /// Index of each node in the next finer axis; empty on the finest grid.
  std::vector<int> fine_index;

  int n_nodes() const { return static_cast<int>(x.size()); }
  int n_unknowns() const { return n_nodes() - 2; }
  int n_cells() const { return n_nodes() - 1; }
  int interior_cells() const { return n_cells() - pml_lo - pml_hi; }
  /// Start and end coordinates of the layer-free part.
  double interior_lo() const { return x[pml_lo]; }
  double interior_hi() const { return x[n_cells() - pml_hi]; }
};

/// Tensor grid of unknowns with Dirichlet boundaries. Unknowns are numbered
/// with x1 fastest.
struct GridSpec {
  int dim = 2;
  std::array<Axis, 3> axes;

  /// n unknowns per axis on [0, 1]^dim, spacing 1 / (n + 1).
  static GridSpec unit(int dim, int n);
  /// [0, 1]^2 with `cells` cells per axis inside and `layer` cells of the
  /// same size in a layer beyond each side.
  static GridSpec pml_square(int cells, int layer);

  std::int64_t n_unknowns() const;
  std::array<int, 3> shape() const;  // unknowns per axis (1 for unused axes)
  bool has_pml() const;
  bool uniform() const;
  /// Spacing of a uniform grid; throws if the grid is not uniform.
  double spacing() const;
  std::int64_t index(int i, int j, int l = 0) const;
};

/// Halves the layer-free part of every axis. Layers keep their cells, so no
/// coarsening happens normal to a boundary inside a layer.
GridSpec coarsen_grid_pml(const GridSpec& grid);
GridSpec coarsen(const GridSpec& grid);

/// Wavenumber samples on all grid nodes, boundaries included, x1 fastest.
struct Medium {
  enum class Kind { constant, random, file };
  Kind kind = Kind::constant;
  std::array<int, 3> nodes{1, 1, 1};
  std::vector<double> k;

  double at(int i, int j, int l = 0) const {
    return k[i + static_cast<std::int64_t>(nodes[0]) * (j + static_cast<std::int64_t>(nodes[1]) * l)];
  }
  double min() const;
  double max() const;
};

struct MediumParams {
  Medium::Kind kind = Medium::Kind::constant;
  double Gc = 4.0;  // points per wavelength on the grid of spacing h_gc
  double h_gc = 0.0;  // 0 selects twice the finest layer-free spacing
  std::uint64_t seed = 1;
  double contrast = 0.25;  // relative speed variation of the random medium
  int smoothing_radius = 5;
  std::filesystem::path path;
  bool normalize_file = true;  // rescale a file medium to the configured Gc
};

Medium make_medium(const MediumParams& params, const GridSpec& grid);
/// Values at the nodes of `coarse`, which must be nodes of `fine`.
Medium inject_medium(const Medium& fine_medium, const GridSpec& coarse);

/// Medium files: text header lines "helmmg-medium 1", "dims n1 n2 [n3]",
/// "quantity wavenumber|speed|field", optional "omega w", then "binary"
/// followed by n1*n2*n3 little-endian float64 values in x1-fastest order, or
/// "csv" followed by comma or whitespace separated values. "field" marks
/// solution dumps, read back unchanged.
Medium read_medium(const std::filesystem::path& path);
void write_medium(const std::filesystem::path& path, const Medium& m, bool binary = true,
                  std::string_view quantity = "wavenumber");

/// Constant coefficient finite differences: every row is the scheme's stencil
/// with k frozen at the node; legs to boundary nodes are dropped.
SparseMatrix assemble_fd(const SchemeSpec& scheme, const GridSpec& grid,
                         const Medium& medium, double alpha);

SparseMatrix assemble_galerkin_coarse(const SparseMatrix& fine, const SparseMatrix& R,
                                      const SparseMatrix& P);

/// PML stretching with sigma_j / omega = s_max (d / width)^2 at depth d into
/// a layer of the given width.
struct PmlProfile {
  std::array<double, 3> interior_lo{0.0, 0.0, 0.0};
  std::array<double, 3> interior_hi{1.0, 1.0, 1.0};
  std::array<double, 3> width{0.0, 0.0, 0.0};
  double sigma_over_omega = 2.0;

  static PmlProfile of(const GridSpec& grid, double sigma_over_omega = 2.0);
};

/// 1 / (1 + i sigma_j(x) / omega).
cplx pml_alpha(const PmlProfile& profile, int axis, double x);

/// Bilinear elements on the tensor grid with stretching factors alpha_j, in
/// integrated scaling. When `coarse_opt` is optimized (opt_fe), rows of nodes
/// whose neighbourhood is four equal square layer-free cells use its stencil.
SparseMatrix assemble_fe_pml(const GridSpec& grid, const Medium& medium,
                             const PmlProfile& profile, double alpha = 0.0,
                             const SchemeSpec& coarse_opt = {Scheme::fe, nullptr});

/// Unit impulse at the unknown nearest to `location`.
Vector point_source_rhs(const GridSpec& grid, std::array<double, 3> location);

/// Bilinear (trilinear) interpolation between nested grids, applied axis by
/// axis without forming the matrix. Restriction is scale * P^T.
class Transfer {
 public:
  Transfer(const GridSpec& fine, const GridSpec& coarse, double restrict_scale);

  Vector prolong(const Vector& coarse) const;
  Vector restrict(const Vector& fine) const;
  SparseMatrix prolongation_matrix() const;
  SparseMatrix restriction_matrix() const;
  double restrict_scale() const { return scale_; }

 private:
  struct Leg {
    int coarse;
    double weight;
  };
  // Per axis, per fine unknown: the coarse unknowns it interpolates from.
  std::array<std::vector<std::vector<Leg>>, 3> legs_;
  std::array<int, 3> nf_{1, 1, 1};
  std::array<int, 3> nc_{1, 1, 1};
  int dim_;
  double scale_;

  Vector apply_axis(const Vector& v, int axis, bool transpose,
                    const std::array<int, 3>& shape_in) const;
};

}  // namespace helmmg
