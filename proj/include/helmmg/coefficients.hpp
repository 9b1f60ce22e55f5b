#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string_view>
#include <vector>

#include "helmmg/symbols.hpp"

namespace helmmg {

/// Which fine-scale operator an optimized coarse family was fitted against.
enum class TableFamily { opt_fd5, opt_fe, opt_fd7 };

std::string_view to_string(TableFamily f);
TableFamily family_of(Scheme coarse);
int dimension_of(TableFamily f);

/// Control values of the free coefficients on the equidistant p-grid
/// p_k = k P / (n_C - 1), k = 0..n_C-1, for one coarsening ratio h_f/h.
///
/// 2-D rows hold (a1, b1, b2); 3-D rows hold (a1, a2, b1, b2, b3). The
/// dependent coefficients follow from the sum constraints. Immutable.
class CoefficientTable {
 public:
  CoefficientTable(TableFamily family, double ratio, double P,
                   std::vector<std::vector<double>> controls);

  TableFamily family() const { return family_; }
  int dim() const { return dimension_of(family_); }
  double ratio() const { return ratio_; }
  double P() const { return P_; }
  int n_controls() const { return static_cast<int>(controls_.size()); }
  int n_free() const { return dim() == 2 ? 3 : 5; }
  double node(int k) const;
  const std::vector<std::vector<double>>& controls() const { return controls_; }

  /// Piecewise-linear free coefficients at p. Throws out_of_range for
  /// p > P (beyond 1e-9 slack) or p < 0.
  std::vector<double> free_at(double p) const;
  CoeffSet2D coeffs2d(double p) const;
  CoeffSet3D coeffs3d(double p) const;

  void write_csv(std::ostream& os) const;
  void write_csv(const std::filesystem::path& path) const;
  static CoefficientTable read_csv(std::istream& is, TableFamily family,
                                   double ratio);
  static CoefficientTable read_csv(const std::filesystem::path& path,
                                   TableFamily family, double ratio);

 private:
  TableFamily family_;
  double ratio_;
  double P_;
  std::vector<std::vector<double>> controls_;
};

CoeffSet2D interpolate_coeffs_2d(const CoefficientTable& table, double p);
CoeffSet3D interpolate_coeffs_3d(const CoefficientTable& table, double p);

/// Shipped tables for ratios 1/2, 1/4 and 1/8 (P = 0.4, n_C = 11).
std::shared_ptr<const CoefficientTable> builtin_table(TableFamily family,
                                                      double ratio);

/// Built-in table unless an override has been registered for the pair.
std::shared_ptr<const CoefficientTable> lookup_table(TableFamily family,
                                                     double ratio);
void register_table(std::shared_ptr<const CoefficientTable> table);
void clear_registered_tables();

}  // namespace helmmg
