#include "helmmg/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>

namespace helmmg {

namespace {

// Shipped control values, p_k = 0.00, 0.04, ..., 0.40.
constexpr double kFd5Eighth[11][3] = {
    {0.76738, 0.60579, 0.42216},
    {0.83462, 0.61172, 0.44778},
    {0.82739, 0.60701, 0.45371},
    {0.81649, 0.60264, 0.45711},
    {0.80142, 0.59934, 0.45584},
    {0.78410, 0.59769, 0.44867},
    {0.76246, 0.59063, 0.44922},
    {0.73555, 0.57859, 0.45631},
    {0.70230, 0.56192, 0.46838},
    {0.66179, 0.54059, 0.48470},
    {0.61221, 0.51377, 0.50533},
};
constexpr double kFd5Quarter[11][3] = {
    {0.77051, 0.61120, 0.42389},
    {0.84224, 0.61607, 0.45470},
    {0.83470, 0.61024, 0.46291},
    {0.82285, 0.60580, 0.46643},
    {0.80744, 0.60510, 0.45995},
    {0.78861, 0.60230, 0.45500},
    {0.76533, 0.59494, 0.45598},
    {0.73659, 0.58273, 0.46306},
    {0.70107, 0.56562, 0.47540},
    {0.65752, 0.54327, 0.49266},
    {0.60360, 0.51457, 0.51511},
};
constexpr double kFd5Half[11][3] = {
    {0.77363, 0.61953, 0.45295},
    {0.87242, 0.63691, 0.47535},
    {0.86400, 0.62988, 0.48633},
    {0.84984, 0.62610, 0.48880},
    {0.83017, 0.62289, 0.48759},
    {0.80852, 0.62596, 0.47106},
    {0.78215, 0.62213, 0.46478},
    {0.74857, 0.61036, 0.47016},
    {0.70553, 0.59107, 0.48468},
    {0.65062, 0.56369, 0.50746},
    {0.57676, 0.52412, 0.54163},
};
constexpr double kFeEighth[11][3] = {
    {0.76647, 0.60220, 0.42163},
    {0.82947, 0.60801, 0.44478},
    {0.82251, 0.60347, 0.45037},
    {0.81202, 0.59934, 0.45331},
    {0.79758, 0.59608, 0.45200},
    {0.78078, 0.59376, 0.44622},
    {0.75974, 0.58635, 0.44763},
    {0.73368, 0.57436, 0.45485},
    {0.70164, 0.55808, 0.46659},
    {0.66281, 0.53747, 0.48218},
    {0.61563, 0.51184, 0.50162},
};
constexpr double kFeQuarter[11][3] = {
    {0.76485, 0.59678, 0.42071},
    {0.82174, 0.60243, 0.44031},
    {0.81512, 0.59641, 0.44891},
    {0.80514, 0.59341, 0.44959},
    {0.79216, 0.59235, 0.44396},
    {0.77726, 0.59178, 0.43482},
    {0.75885, 0.58563, 0.43396},
    {0.73543, 0.57397, 0.44094},
    {0.70647, 0.55817, 0.45237},
    {0.67130, 0.53836, 0.46744},
    {0.62872, 0.51411, 0.48582},
};
constexpr double kFeHalf[11][3] = {
    {0.75687, 0.57482, 0.41653},
    {0.79073, 0.57900, 0.42466},
    {0.78598, 0.57656, 0.42640},
    {0.77849, 0.57352, 0.42749},
    {0.76950, 0.57382, 0.41975},
    {0.75789, 0.56950, 0.41903},
    {0.74319, 0.56157, 0.42314},
    {0.72495, 0.55058, 0.43081},
    {0.70275, 0.53691, 0.44096},
    {0.67663, 0.52099, 0.45245},
    {0.64587, 0.50233, 0.46570},
};
constexpr double kFd7Eighth[11][5] = {
    {0.75517, 0.16259, 0.54098, 0.34422, 0.19711},
    {0.75549, 0.15831, 0.54028, 0.34418, 0.19734},
    {0.74355, 0.17283, 0.54382, 0.33897, 0.19206},
    {0.70967, 0.22754, 0.54297, 0.33616, 0.19223},
    {0.69268, 0.24313, 0.54196, 0.32594, 0.20400},
    {0.67765, 0.24848, 0.53589, 0.32075, 0.21686},
    {0.65980, 0.25228, 0.52300, 0.32683, 0.22317},
    {0.63470, 0.26238, 0.50163, 0.34886, 0.21766},
    {0.60630, 0.26831, 0.48133, 0.35550, 0.23347},
    {0.58183, 0.26501, 0.46889, 0.33974, 0.26288},
    {0.55400, 0.25602, 0.45013, 0.32489, 0.29949},
};
constexpr double kFd7Quarter[11][5] = {
    {0.75957, 0.16479, 0.54568, 0.34705, 0.19853},
    {0.76194, 0.16118, 0.54572, 0.34714, 0.19860},
    {0.75567, 0.16304, 0.54554, 0.34545, 0.19740},
    {0.71958, 0.22112, 0.54645, 0.33962, 0.19835},
    {0.70279, 0.23466, 0.54490, 0.33257, 0.20536},
    {0.68712, 0.23951, 0.53872, 0.33008, 0.21307},
    {0.66708, 0.24579, 0.52468, 0.34092, 0.21302},
    {0.64032, 0.25652, 0.50408, 0.36041, 0.20978},
    {0.60968, 0.26327, 0.48374, 0.36555, 0.22774},
    {0.58186, 0.26184, 0.47007, 0.35072, 0.25739},
    {0.55039, 0.25231, 0.45013, 0.33345, 0.29951},
};
constexpr double kFd7Half[11][5] = {
    {0.77998, 0.17505, 0.56428, 0.35970, 0.20490},
    {0.78635, 0.17442, 0.56571, 0.36071, 0.20541},
    {0.78273, 0.16881, 0.56298, 0.36150, 0.20719},
    {0.76438, 0.18678, 0.56540, 0.35620, 0.20287},
    {0.74684, 0.19603, 0.56370, 0.35299, 0.20299},
    {0.72755, 0.20131, 0.55813, 0.35277, 0.20452},
    {0.70298, 0.20847, 0.54673, 0.35830, 0.20693},
    {0.66863, 0.22424, 0.52423, 0.38368, 0.19633},
    {0.62734, 0.23845, 0.49946, 0.39740, 0.20725},
    {0.58198, 0.25329, 0.47567, 0.40216, 0.22132},
    {0.53417, 0.23589, 0.45011, 0.36784, 0.29962},
};

template <std::size_t N>
std::shared_ptr<const CoefficientTable> make_table(TableFamily family,
                                                   double ratio,
                                                   const double (&rows)[11][N]) {
  std::vector<std::vector<double>> controls;
  for (const auto& r : rows) controls.emplace_back(std::begin(r), std::end(r));
  return std::make_shared<const CoefficientTable>(family, ratio, 0.4,
                                                  std::move(controls));
}

int ratio_index(double ratio) {
  for (int i = 0; i < 3; ++i) {
    if (std::abs(ratio - std::ldexp(1.0, -(i + 1))) < 1e-12) return i;
  }
  return -1;
}

struct Registry {
  std::mutex mutex;
  std::map<std::pair<int, int>, std::shared_ptr<const CoefficientTable>> tables;
};

Registry& registry() {
  static Registry r;
  return r;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell.erase(0, cell.find_first_not_of(" \t\r"));
    cell.erase(cell.find_last_not_of(" \t\r") + 1);
    out.push_back(cell);
  }
  return out;
}

}  // namespace

std::string_view to_string(TableFamily f) {
  switch (f) {
    case TableFamily::opt_fd5: return "opt_fd5";
    case TableFamily::opt_fe: return "opt_fe";
    case TableFamily::opt_fd7: return "opt_fd7";
  }
  return "?";
}

TableFamily family_of(Scheme coarse) {
  switch (coarse) {
    case Scheme::opt2d: return TableFamily::opt_fd5;
    case Scheme::opt_fe: return TableFamily::opt_fe;
    case Scheme::opt3d: return TableFamily::opt_fd7;
    default: break;
  }
  throw Error(ErrorCode::invalid_argument,
              "scheme " + std::string(to_string(coarse)) +
                  " has no coefficient table");
}

int dimension_of(TableFamily f) { return f == TableFamily::opt_fd7 ? 3 : 2; }

CoefficientTable::CoefficientTable(TableFamily family, double ratio, double P,
                                   std::vector<std::vector<double>> controls)
    : family_(family), ratio_(ratio), P_(P), controls_(std::move(controls)) {
  if (controls_.empty())
    throw Error(ErrorCode::invalid_argument, "coefficient table has no rows");
  if (P_ < 0.0 || (controls_.size() > 1 && P_ <= 0.0))
    throw Error(ErrorCode::invalid_argument, "coefficient table needs P > 0");
  for (const auto& row : controls_) {
    if (static_cast<int>(row.size()) != n_free())
      throw Error(ErrorCode::invalid_argument,
                  "coefficient table row has wrong number of values");
  }
}

double CoefficientTable::node(int k) const {
  if (n_controls() == 1) return 0.0;
  return P_ * k / (n_controls() - 1);
}

std::vector<double> CoefficientTable::free_at(double p) const {
  // Float noise at the upper end is clamped; anything further out means the
  // coarse grid is too coarse for this table.
  if (p < 0.0 || p > P_ + 1e-9) {
    std::ostringstream msg;
    msg << "p = " << p << " outside coefficient table range [0, " << P_
        << "] (ratio " << ratio_ << ")";
    throw Error(ErrorCode::out_of_range, msg.str());
  }
  const int n = n_controls();
  if (n == 1) return controls_.front();
  p = std::min(p, P_);
  const double s = p / P_ * (n - 1);
  const int k = std::min(static_cast<int>(std::floor(s)), n - 2);
  const double t = s - k;
  std::vector<double> out(controls_[k].size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = t == 0.0 ? controls_[k][j]
                      : (1.0 - t) * controls_[k][j] + t * controls_[k + 1][j];
  }
  return out;
}

CoeffSet2D CoefficientTable::coeffs2d(double p) const {
  if (dim() != 2)
    throw Error(ErrorCode::invalid_argument, "3-D table queried as 2-D");
  const auto f = free_at(p);
  return CoeffSet2D::from_free(f[0], f[1], f[2]);
}

CoeffSet3D CoefficientTable::coeffs3d(double p) const {
  if (dim() != 3)
    throw Error(ErrorCode::invalid_argument, "2-D table queried as 3-D");
  const auto f = free_at(p);
  return CoeffSet3D::from_free(f[0], f[1], f[2], f[3], f[4]);
}

void CoefficientTable::write_csv(std::ostream& os) const {
  os << "# family=" << to_string(family_) << " ratio=" << ratio_ << "\n";
  os << (dim() == 2 ? "p,a1,b1,b2" : "p,a1,a2,b1,b2,b3") << "\n";
  os << std::fixed << std::setprecision(8);
  for (int k = 0; k < n_controls(); ++k) {
    os << node(k);
    for (double v : controls_[k]) os << "," << v;
    os << "\n";
  }
}

void CoefficientTable::write_csv(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::io, "cannot write " + path.string());
  write_csv(os);
}

CoefficientTable CoefficientTable::read_csv(std::istream& is,
                                            TableFamily family, double ratio) {
  const std::string expected =
      dimension_of(family) == 2 ? "p,a1,b1,b2" : "p,a1,a2,b1,b2,b3";
  std::string line;
  bool header = false;
  std::vector<double> ps;
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != expected)
        throw Error(ErrorCode::io, "coefficient CSV header must be '" +
                                       expected + "', got '" + line + "'");
      header = true;
      continue;
    }
    const auto cells = split_csv(line);
    std::vector<double> row;
    try {
      for (const auto& c : cells) row.push_back(std::stod(c));
    } catch (const std::exception&) {
      throw Error(ErrorCode::io, "malformed coefficient CSV row: " + line);
    }
    if (row.size() != static_cast<std::size_t>(dimension_of(family) == 2 ? 4 : 6))
      throw Error(ErrorCode::io, "wrong column count in coefficient CSV row");
    ps.push_back(row.front());
    rows.emplace_back(row.begin() + 1, row.end());
  }
  if (!header || rows.empty())
    throw Error(ErrorCode::io, "coefficient CSV has no data");
  const double P = ps.back();
  for (std::size_t k = 0; k < ps.size(); ++k) {
    const double expect = rows.size() == 1 ? 0.0 : P * k / (rows.size() - 1);
    if (std::abs(ps[k] - expect) > 1e-6)
      throw Error(ErrorCode::io, "coefficient CSV p column is not equidistant from 0");
  }
  return CoefficientTable(family, ratio, P, std::move(rows));
}

CoefficientTable CoefficientTable::read_csv(const std::filesystem::path& path,
                                            TableFamily family, double ratio) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::io, "cannot read " + path.string());
  return read_csv(is, family, ratio);
}

CoeffSet2D interpolate_coeffs_2d(const CoefficientTable& table, double p) {
  return table.coeffs2d(p);
}

CoeffSet3D interpolate_coeffs_3d(const CoefficientTable& table, double p) {
  return table.coeffs3d(p);
}

std::shared_ptr<const CoefficientTable> builtin_table(TableFamily family,
                                                      double ratio) {
  static const std::shared_ptr<const CoefficientTable> tables[3][3] = {
      {make_table(TableFamily::opt_fd5, 0.5, kFd5Half),
       make_table(TableFamily::opt_fd5, 0.25, kFd5Quarter),
       make_table(TableFamily::opt_fd5, 0.125, kFd5Eighth)},
      {make_table(TableFamily::opt_fe, 0.5, kFeHalf),
       make_table(TableFamily::opt_fe, 0.25, kFeQuarter),
       make_table(TableFamily::opt_fe, 0.125, kFeEighth)},
      {make_table(TableFamily::opt_fd7, 0.5, kFd7Half),
       make_table(TableFamily::opt_fd7, 0.25, kFd7Quarter),
       make_table(TableFamily::opt_fd7, 0.125, kFd7Eighth)},
  };
  const int r = ratio_index(ratio);
  if (r < 0) {
    std::ostringstream msg;
    msg << "no built-in " << to_string(family) << " table for ratio " << ratio;
    throw Error(ErrorCode::out_of_range, msg.str());
  }
  return tables[static_cast<int>(family)][r];
}

std::shared_ptr<const CoefficientTable> lookup_table(TableFamily family,
                                                     double ratio) {
  {
    auto& reg = registry();
    std::lock_guard lock(reg.mutex);
    const auto key = std::make_pair(static_cast<int>(family),
                                    static_cast<int>(std::lround(-std::log2(ratio))));
    if (auto it = reg.tables.find(key); it != reg.tables.end()) return it->second;
  }
  return builtin_table(family, ratio);
}

void register_table(std::shared_ptr<const CoefficientTable> table) {
  auto& reg = registry();
  std::lock_guard lock(reg.mutex);
  const auto key =
      std::make_pair(static_cast<int>(table->family()),
                     static_cast<int>(std::lround(-std::log2(table->ratio()))));
  reg.tables[key] = std::move(table);
}

void clear_registered_tables() {
  auto& reg = registry();
  std::lock_guard lock(reg.mutex);
  reg.tables.clear();
}

}  // namespace helmmg
