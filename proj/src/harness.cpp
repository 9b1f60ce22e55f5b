#include "helmmg/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>

#include "helmmg/dispersion.hpp"
#include "helmmg/error.hpp"

namespace helmmg {

namespace pt = boost::property_tree;
namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

template <class T>
std::string join(const std::vector<T>& v, const char* sep = ", ") {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    if constexpr (std::is_integral_v<T>) out += std::to_string(v[i]);
    else out += short_num(v[i]);
  }
  return out;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  boost::split(parts, s, boost::is_any_of(", "), boost::token_compress_on);
  parts.erase(std::remove_if(parts.begin(), parts.end(), [](const std::string& p) { return p.empty(); }),
              parts.end());
  return parts;
}

double to_double(const std::string& key, const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::invalid_argument, key + ": not a number: '" + s + "'");
  }
}

std::vector<double> doubles(const pt::ptree& t, const std::string& key) {
  std::vector<double> out;
  for (const auto& p : split_list(t.get<std::string>(key))) out.push_back(to_double(key, p));
  if (out.empty()) throw Error(ErrorCode::invalid_argument, key + ": empty list");
  return out;
}

double real(const pt::ptree& t, const std::string& key) {
  return to_double(key, boost::trim_copy(t.get<std::string>(key)));
}

long long integer(const pt::ptree& t, const std::string& key) {
  const double v = real(t, key);
  if (v != std::floor(v)) throw Error(ErrorCode::invalid_argument, key + ": not an integer");
  return static_cast<long long>(v);
}

std::string text(const pt::ptree& t, const std::string& key) {
  return boost::trim_copy(t.get<std::string>(key));
}

bool boolean(const pt::ptree& t, const std::string& key) {
  const std::string v = boost::to_lower_copy(text(t, key));
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorCode::invalid_argument, key + ": expected true or false");
}

std::string_view to_string(Discretization d) {
  return d == Discretization::finite_difference ? "fd" : "fe-pml";
}

std::string_view to_string(Medium::Kind k) {
  switch (k) {
    case Medium::Kind::constant: return "constant";
    case Medium::Kind::random: return "random";
    case Medium::Kind::file: return "file";
  }
  return "constant";
}

std::string smoother_label(const SmootherSpec& s) {
  std::string kind = s.kind == SmootherKind::jacobi ? "J" : (s.omega == 1.0 ? "GS" : "SOR");
  if (kind != "GS") kind += short_num(s.omega);
  return kind + "-" + std::to_string(s.nu1) + "-" + std::to_string(s.nu2);
}

std::string pair_label(const ExperimentConfig& cfg) {
  return std::string(to_string(cfg.fine)) + "-" + std::string(to_string(cfg.coarse));
}

SchemeSpec scheme_spec(Scheme s, double ratio) {
  if (!is_optimized(s)) return {s, nullptr};
  return {s, lookup_table(family_of(s), ratio)};
}

void register_override(const ExperimentConfig& cfg, double ratio) {
  if (cfg.table_override.empty()) return;
  const TableFamily fam = family_of(cfg.coarse);
  register_table(std::make_shared<CoefficientTable>(
      CoefficientTable::read_csv(cfg.table_override, fam, ratio)));
}

std::ofstream open_output(const fs::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::io, "cannot write " + path.string());
  return os;
}

// Runs f(0..n-1) on up to `workers` threads; the first exception wins.
template <class F>
void parallel_for(int n, int workers, F&& f) {
  workers = std::clamp(workers, 1, std::max(n, 1));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i; (i = next.fetch_add(1)) < n;) {
        try {
          f(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::dispersion_curves: return "dispersion-curves";
    case ExperimentKind::fit: return "fit";
    case ExperimentKind::lfa_table: return "lfa-table";
    case ExperimentKind::solve_table: return "solve-table";
    case ExperimentKind::single_solve: return "single-solve";
  }
  return "lfa-table";
}

ExperimentKind parse_experiment(std::string_view s) {
  for (auto k : {ExperimentKind::dispersion_curves, ExperimentKind::fit, ExperimentKind::lfa_table,
                 ExperimentKind::solve_table, ExperimentKind::single_solve})
    if (to_string(k) == s) return k;
  throw Error(ErrorCode::invalid_argument, "unknown experiment kind '" + std::string(s) + "'");
}

namespace {

struct DefaultKey {
  std::string path;
  std::string value;
  const char* doc;
};

std::vector<DefaultKey> default_keys() {
  const ExperimentConfig d;
  auto str = [](auto v) { return std::to_string(v); };
  return {
      {"experiment.kind", std::string(to_string(d.kind)), "dispersion-curves, fit, lfa-table, solve-table or single-solve"},
      {"experiment.name", "", "output file prefix; empty uses the kind"},
      {"experiment.output_dir", d.output_dir.string(), "directory for CSV outputs"},
      {"experiment.workers", str(d.workers), "table cells run concurrently"},
      {"schemes.fine", std::string(to_string(d.fine)), "fd5, gal, jss, fe, fd7, opt, optfe or opt3d"},
      {"schemes.coarse", std::string(to_string(d.coarse)), "coarse operator; gal is the R A P product"},
      {"schemes.table", "", "coefficient CSV replacing the built-in table of the coarse family"},
      {"grid.Gc", join(d.Gc), "points per wavelength on the coarsest grid, list"},
      {"grid.alpha", join(d.alpha), "damping of ((1 + i alpha) k)^2, list"},
      {"grid.levels", join(d.levels), "multigrid levels, list"},
      {"grid.discretization", std::string(to_string(d.discretization)), "fd, or fe-pml for bilinear elements with absorbing layers"},
      {"grid.coarse_size", str(d.coarse_size), "coarsest grid: unknowns per axis (fd) or layer-free cells per axis (fe-pml)"},
      {"grid.max_unknowns", str(d.max_unknowns), "largest fine grid a solve may build"},
      {"smoother.kind", "default", "default (per scheme pair), jacobi, sor or gs"},
      {"smoother.omega", "0.8", "relaxation factor"},
      {"smoother.nu1", str(2), "pre-smoothing steps"},
      {"smoother.nu2", str(2), "post-smoothing steps"},
      {"dispersion.ratio", short_num(d.ratio), "fine spacing over coarse spacing"},
      {"dispersion.angles", join(d.angles_deg), "propagation angles in degrees"},
      {"dispersion.inv_G_max", short_num(d.inv_G_max), "largest 1/G on the curves, capped at the table P"},
      {"dispersion.points", str(d.curve_points), "samples per curve"},
      {"lfa.n_radii", str(d.n_radii), "radial samples of the frequency grid"},
      {"lfa.n_angles", str(d.n_angles), "angular samples of the frequency grid"},
      {"solve.tol", short_num(d.tol), "relative residual tolerance of GMRES"},
      {"solve.maxit", str(d.maxit), "GMRES iteration limit"},
      {"solve.source", "auto", "point source coordinates, or auto for (0.5, 0.5, 0.5) with fd and (0.3, 0.3) with fe-pml"},
      {"solve.write_solution", d.write_solution ? "true" : "false", "also dump the solution in the medium file format"},
      {"pml.layer", str(d.pml_layer), "cells per side in each absorbing layer"},
      {"pml.strength", short_num(d.pml_strength), "sigma / omega at the outer edge of a layer"},
      {"medium.kind", std::string(to_string(d.medium.kind)), "constant, random or file"},
      {"medium.seed", str(d.medium.seed), "random medium seed"},
      {"medium.contrast", short_num(d.medium.contrast), "relative speed variation of the random medium"},
      {"medium.smoothing_radius", str(d.medium.smoothing_radius), "box filter radius of the random medium, in nodes"},
      {"medium.path", "", "medium file for kind = file"},
      {"medium.normalize", d.medium.normalize_file ? "true" : "false", "rescale a file medium so its largest k matches Gc"},
      {"fit.ratio", short_num(d.fit.ratio), "fine spacing over coarse spacing"},
      {"fit.P", short_num(d.fit.P), "largest fitted p = kh / 2 pi"},
      {"fit.n_controls", str(d.fit.n_controls), "control values on [0, P]"},
      {"fit.n_angles", str(d.fit.n_angles), "propagation angles on [0, pi/2)"},
      {"fit.n_p", str(d.fit.n_p), "p samples; 0 uses 8 n_controls"},
      {"fit.max_iterations", str(d.fit.max_iterations), "iterations per continuation stage"},
      {"fit.tolerance", short_num(d.fit.tolerance), "relative objective decrease that ends a stage"},
      {"fit.continuation", join(d.fit.continuation), "P values fitted first, or none"},
  };
}

}  // namespace

pt::ptree default_tree() {
  pt::ptree t;
  for (const auto& k : default_keys()) t.put(k.path, k.value);
  return t;
}

ExperimentConfig config_from_tree(const pt::ptree& in) {
  pt::ptree t = default_tree();
  for (const auto& [section, body] : in) {
    if (!t.get_child_optional(section))
      throw Error(ErrorCode::invalid_argument, "unknown config section [" + section + "]");
    for (const auto& [key, value] : body) {
      const std::string path = section + "." + key;
      if (!t.get_optional<std::string>(path))
        throw Error(ErrorCode::invalid_argument, "unknown config key " + path);
      t.put(path, value.data());
    }
  }

  ExperimentConfig c;
  c.kind = parse_experiment(text(t, "experiment.kind"));
  c.name = text(t, "experiment.name");
  c.output_dir = text(t, "experiment.output_dir");
  c.workers = static_cast<int>(integer(t, "experiment.workers"));

  c.fine = parse_scheme(text(t, "schemes.fine"));
  c.coarse = parse_scheme(text(t, "schemes.coarse"));
  c.table_override = text(t, "schemes.table");

  c.Gc = doubles(t, "grid.Gc");
  c.alpha = doubles(t, "grid.alpha");
  c.levels.clear();
  for (double v : doubles(t, "grid.levels")) {
    if (v != std::floor(v) || v < 2)
      throw Error(ErrorCode::invalid_argument, "grid.levels: entries must be integers >= 2");
    c.levels.push_back(static_cast<int>(v));
  }
  const std::string disc = text(t, "grid.discretization");
  if (disc == "fd") c.discretization = Discretization::finite_difference;
  else if (disc == "fe-pml") c.discretization = Discretization::finite_element_pml;
  else throw Error(ErrorCode::invalid_argument, "grid.discretization: expected fd or fe-pml");
  c.coarse_size = static_cast<int>(integer(t, "grid.coarse_size"));
  c.max_unknowns = integer(t, "grid.max_unknowns");

  const std::string sk = text(t, "smoother.kind");
  if (sk != "default") {
    SmootherSpec s;
    if (sk == "jacobi") s.kind = SmootherKind::jacobi;
    else if (sk == "sor" || sk == "gs") s.kind = SmootherKind::sor;
    else throw Error(ErrorCode::invalid_argument, "smoother.kind: expected default, jacobi, sor or gs");
    s.omega = sk == "gs" ? 1.0 : real(t, "smoother.omega");
    s.nu1 = static_cast<int>(integer(t, "smoother.nu1"));
    s.nu2 = static_cast<int>(integer(t, "smoother.nu2"));
    if (s.nu1 < 0 || s.nu2 < 0 || s.nu1 + s.nu2 == 0)
      throw Error(ErrorCode::invalid_argument, "smoother: nu1, nu2 must be >= 0 and not both 0");
    c.smoother = s;
  }

  c.ratio = real(t, "dispersion.ratio");
  c.angles_deg = doubles(t, "dispersion.angles");
  c.inv_G_max = real(t, "dispersion.inv_G_max");
  c.curve_points = static_cast<int>(integer(t, "dispersion.points"));

  c.n_radii = static_cast<int>(integer(t, "lfa.n_radii"));
  c.n_angles = static_cast<int>(integer(t, "lfa.n_angles"));

  c.tol = real(t, "solve.tol");
  c.maxit = static_cast<int>(integer(t, "solve.maxit"));
  const std::string src = text(t, "solve.source");
  if (src == "auto") {
    c.source = c.discretization == Discretization::finite_element_pml
                   ? std::array<double, 3>{0.3, 0.3, 0.0}
                   : std::array<double, 3>{0.5, 0.5, 0.5};
  } else {
    const auto v = doubles(t, "solve.source");
    if (v.size() < 2 || v.size() > 3)
      throw Error(ErrorCode::invalid_argument, "solve.source: expected auto or 2 to 3 coordinates");
    c.source = {v[0], v[1], v.size() == 3 ? v[2] : 0.5};
  }
  c.write_solution = boolean(t, "solve.write_solution");

  c.pml_layer = static_cast<int>(integer(t, "pml.layer"));
  c.pml_strength = real(t, "pml.strength");

  const std::string mk = text(t, "medium.kind");
  if (mk == "constant") c.medium.kind = Medium::Kind::constant;
  else if (mk == "random") c.medium.kind = Medium::Kind::random;
  else if (mk == "file") c.medium.kind = Medium::Kind::file;
  else throw Error(ErrorCode::invalid_argument, "medium.kind: expected constant, random or file");
  c.medium.seed = static_cast<std::uint64_t>(integer(t, "medium.seed"));
  c.medium.contrast = real(t, "medium.contrast");
  c.medium.smoothing_radius = static_cast<int>(integer(t, "medium.smoothing_radius"));
  c.medium.path = text(t, "medium.path");
  c.medium.normalize_file = boolean(t, "medium.normalize");

  c.fit.ratio = real(t, "fit.ratio");
  c.fit.P = real(t, "fit.P");
  c.fit.n_controls = static_cast<int>(integer(t, "fit.n_controls"));
  c.fit.n_angles = static_cast<int>(integer(t, "fit.n_angles"));
  c.fit.n_p = static_cast<int>(integer(t, "fit.n_p"));
  c.fit.max_iterations = static_cast<int>(integer(t, "fit.max_iterations"));
  c.fit.tolerance = real(t, "fit.tolerance");
  const std::string cont = text(t, "fit.continuation");
  c.fit.continuation.clear();
  if (cont != "none" && !cont.empty()) c.fit.continuation = doubles(t, "fit.continuation");

  if (c.tol <= 0.0 || c.maxit < 1) throw Error(ErrorCode::invalid_argument, "solve: tol > 0 and maxit >= 1 required");
  if (c.coarse_size < 1) throw Error(ErrorCode::invalid_argument, "grid.coarse_size must be positive");
  if (c.pml_layer < 0 || c.pml_strength < 0.0)
    throw Error(ErrorCode::invalid_argument, "pml: layer and strength must be non-negative");
  if (c.curve_points < 1 || c.inv_G_max <= 0.0)
    throw Error(ErrorCode::invalid_argument, "dispersion: points >= 1 and inv_G_max > 0 required");
  for (double g : c.Gc)
    if (!(g > 2.0)) throw Error(ErrorCode::invalid_argument, "grid.Gc: entries must exceed 2");
  for (double a : c.alpha)
    if (a < 0.0) throw Error(ErrorCode::invalid_argument, "grid.alpha: entries must be >= 0");
  return c;
}

ExperimentConfig load_config(const fs::path& path, const std::vector<std::string>& overrides) {
  pt::ptree t;
  if (!path.empty()) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorCode::io, "cannot read config " + path.string());
    try {
      pt::read_ini(is, t);
    } catch (const pt::ini_parser_error& e) {
      throw Error(ErrorCode::invalid_argument, "config " + path.string() + ": " + e.message());
    }
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    const auto dot = o.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
      throw Error(ErrorCode::invalid_argument, "override '" + o + "' is not section.key=value");
    t.put(boost::trim_copy(o.substr(0, eq)), boost::trim_copy(o.substr(eq + 1)));
  }
  return config_from_tree(t);
}

std::string defaults_ini() {
  std::ostringstream os;
  std::string section;
  for (const auto& k : default_keys()) {
    const auto dot = k.path.find('.');
    if (k.path.substr(0, dot) != section) {
      section = k.path.substr(0, dot);
      os << (os.tellp() > 0 ? "\n" : "") << "[" << section << "]\n";
    }
    os << "; " << k.doc << "\n" << k.path.substr(dot + 1) << " = " << k.value << "\n";
  }
  return os.str();
}

std::string TableArtifact::cell(std::size_t r, std::size_t c, int maxit) const {
  if (flagged[r][c]) return integer_cells ? ">" + std::to_string(maxit) : ">1";
  if (integer_cells) return std::to_string(static_cast<long long>(values[r][c]));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", values[r][c]);
  return buf;
}

std::string artifact_name(const ExperimentConfig& cfg, const std::string& params) {
  std::string name = cfg.name.empty() ? std::string(to_string(cfg.kind)) : cfg.name;
  name += "_" + pair_label(cfg);
  if (!params.empty()) name += "_" + params;
  return name + ".csv";
}

fs::path emit_plotdata(const TableArtifact& t, const ExperimentConfig& cfg, const std::string& params) {
  const fs::path path = cfg.output_dir / artifact_name(cfg, params);
  auto os = open_output(path);
  os << t.row_name;
  for (const auto& c : t.col_labels) os << "," << c;
  os << "\n";
  for (std::size_t r = 0; r < t.row_labels.size(); ++r) {
    os << t.row_labels[r];
    for (std::size_t c = 0; c < t.col_labels.size(); ++c) os << "," << t.cell(r, c, cfg.maxit);
    os << "\n";
  }
  if (!os) throw Error(ErrorCode::io, "write failed: " + path.string());
  return path;
}

std::vector<fs::path> run_dispersion_curves(const ExperimentConfig& cfg) {
  register_override(cfg, cfg.ratio);
  const SchemeSpec fine = scheme_spec(cfg.fine, 1.0);
  const SchemeSpec coarse = scheme_spec(cfg.coarse, cfg.ratio);
  const int dim = dimension_of(cfg.coarse);
  if (dimension_of(cfg.fine) != dim)
    throw Error(ErrorCode::invalid_argument, "fine and coarse schemes differ in dimension");
  const double pmax = coarse.table ? std::min(cfg.inv_G_max, coarse.table->P()) : cfg.inv_G_max;
  const std::string params = "r" + short_num(cfg.ratio);
  std::vector<fs::path> out;

  const fs::path curves = cfg.output_dir / artifact_name(cfg, params);
  {
    auto os = open_output(curves);
    os << "angle_deg,inv_G,fine_speed,coarse_speed,difference\n";
    for (double deg : cfg.angles_deg) {
      const double th = deg * std::numbers::pi / 180.0;
      const Direction dir = dim == 2 ? Direction::planar(th) : Direction::spherical(0.0, th);
      for (int j = 1; j <= cfg.curve_points; ++j) {
        const double p = pmax * j / cfg.curve_points;
        const double k = 2.0 * std::numbers::pi * p;
        double vf = NAN, vc = NAN;
        try {
          vf = 1.0 / phase_slowness(fine, GridScale{cfg.ratio, k, 0.0}, dir);
        } catch (const Error&) {
        }
        try {
          vc = 1.0 / phase_slowness(coarse, GridScale{1.0, k, 0.0}, dir);
        } catch (const Error&) {
        }
        os << num(deg) << "," << num(p) << "," << num(vf) << "," << num(vc) << "," << num(vc - vf) << "\n";
      }
    }
    if (!os) throw Error(ErrorCode::io, "write failed: " + curves.string());
  }
  out.push_back(curves);

  const fs::path errs = cfg.output_dir / artifact_name(cfg, params + "_maxerror");
  {
    const std::vector<double> angles = angle_grid(18);
    auto os = open_output(errs);
    os << "p,max_relative_error\n";
    // Samples past the last propagating root of either scheme are written as nan.
    for (int j = 1; j <= cfg.curve_points; ++j) {
      const double p = pmax * j / cfg.curve_points;
      double e = NAN;
      try {
        e = error_curve(coarse, fine, cfg.ratio, {p}, angles).max_error.front();
      } catch (const Error& err) {
        if (err.code() != ErrorCode::no_propagating_root) throw;
      }
      os << num(p) << "," << num(e) << "\n";
    }
    if (!os) throw Error(ErrorCode::io, "write failed: " + errs.string());
  }
  out.push_back(errs);
  return out;
}

std::vector<fs::path> run_fit(const ExperimentConfig& cfg, FitResult* result) {
  FitConfig fc = cfg.fit;
  fc.family = family_of(cfg.coarse);
  if (cfg.fine != fine_scheme_of(fc.family))
    throw Error(ErrorCode::invalid_argument, "fit: family " + std::string(to_string(fc.family)) +
                                                 " is fitted against " +
                                                 std::string(to_string(fine_scheme_of(fc.family))));
  const FitResult r = fit_coefficients(fc);
  const std::string params = "r" + short_num(fc.ratio) + "_P" + short_num(fc.P) + "_nC" +
                             std::to_string(fc.n_controls);
  std::vector<fs::path> out;

  const fs::path table = cfg.output_dir / artifact_name(cfg, params);
  {
    auto os = open_output(table);
    r.table->write_csv(os);
    if (!os) throw Error(ErrorCode::io, "write failed: " + table.string());
  }
  out.push_back(table);

  const fs::path errs = cfg.output_dir / artifact_name(cfg, params + "_maxerror");
  {
    const SchemeSpec coarse{cfg.coarse, r.table};
    const SchemeSpec fine{cfg.fine, nullptr};
    const ErrorCurve ec = error_curve(coarse, fine, fc.ratio, p_grid(fc.P, fc.samples_in_p()),
                                      angle_grid(fc.n_angles));
    auto os = open_output(errs);
    os << "p,max_relative_error\n";
    for (std::size_t i = 0; i < ec.p.size(); ++i) os << num(ec.p[i]) << "," << num(ec.max_error[i]) << "\n";
    if (!os) throw Error(ErrorCode::io, "write failed: " + errs.string());
  }
  out.push_back(errs);
  if (result) *result = r;
  return out;
}

TableArtifact run_lfa_table(const ExperimentConfig& cfg) {
  register_override(cfg, 0.5);
  TableArtifact t;
  t.title = "two-grid convergence factors " + pair_label(cfg);
  t.row_name = "Gc";
  for (double g : cfg.Gc) t.row_labels.push_back(short_num(g));
  for (double a : cfg.alpha) t.col_labels.push_back("alpha=" + short_num(a));
  const std::size_t nr = cfg.Gc.size(), nc = cfg.alpha.size();
  t.values.assign(nr, std::vector<double>(nc, 0.0));
  t.flagged.assign(nr, std::vector<bool>(nc, false));
  std::vector<char> flags(nr * nc, 0);

  LfaSetup base;
  base.fine = scheme_spec(cfg.fine, 1.0);
  base.coarse = cfg.coarse == Scheme::galerkin ? SchemeSpec{Scheme::galerkin, nullptr}
                                               : scheme_spec(cfg.coarse, 0.5);
  base.smoother = cfg.smoother.value_or(default_smoother(cfg.fine, cfg.coarse));
  base.n_radii = cfg.n_radii;
  base.n_angles = cfg.n_angles;
  parallel_for(static_cast<int>(nr * nc), cfg.workers, [&](int i) {
    LfaSetup s = base;
    s.Gc = cfg.Gc[i / nc];
    s.alpha = cfg.alpha[i % nc];
    const LfaResult r = convergence_factor(s);
    t.values[i / nc][i % nc] = r.rho;
    flags[i] = r.divergent ? 1 : 0;
  });
  for (std::size_t i = 0; i < nr * nc; ++i) t.flagged[i / nc][i % nc] = flags[i] != 0;
  return t;
}

GridSpec solve_grid(const ExperimentConfig& cfg, int levels) {
  const int dim = dimension_of(cfg.fine);
  const long long factor = 1LL << (levels - 1);
  GridSpec g;
  if (cfg.discretization == Discretization::finite_difference) {
    const long long n = (cfg.coarse_size + 1LL) * factor - 1;
    long long total = 1;
    for (int d = 0; d < dim; ++d) total *= n;
    if (total > cfg.max_unknowns)
      throw Error(ErrorCode::out_of_range, std::to_string(total) + " unknowns exceed grid.max_unknowns = " +
                                               std::to_string(cfg.max_unknowns));
    g = GridSpec::unit(dim, static_cast<int>(n));
  } else {
    if (dim != 2) throw Error(ErrorCode::invalid_argument, "the PML discretization is 2-D");
    const long long cells = cfg.coarse_size * factor;
    const long long n = cells + 2LL * cfg.pml_layer - 1;
    if (n * n > cfg.max_unknowns)
      throw Error(ErrorCode::out_of_range, std::to_string(n * n) + " unknowns exceed grid.max_unknowns = " +
                                               std::to_string(cfg.max_unknowns));
    g = GridSpec::pml_square(static_cast<int>(cells), cfg.pml_layer);
  }
  return g;
}

SolveReport run_single_solve(const ExperimentConfig& cfg, const SolveCase& c) {
  const GridSpec grid = solve_grid(cfg, c.levels);
  const int cells = grid.axes[0].interior_cells();
  MediumParams mp = cfg.medium;
  mp.Gc = c.Gc;
  mp.h_gc = static_cast<double>(1LL << (c.levels - 1)) / cells;
  const Medium medium = make_medium(mp, grid);

  HierarchyConfig hc;
  hc.discretization = cfg.discretization;
  hc.fine = cfg.fine;
  hc.coarse = cfg.coarse;
  hc.levels = c.levels;
  hc.alpha = c.alpha;
  hc.smoother = cfg.smoother;
  hc.sigma_over_omega = cfg.pml_strength;
  const MultigridHierarchy hier = build_hierarchy(hc, grid, medium);
  const Vector f = point_source_rhs(grid, cfg.source);
  return gmres_solve(hier.levels[0].A, cycle_preconditioner(hier), f, cfg.tol, cfg.maxit);
}

TableArtifact run_solve_table(const ExperimentConfig& cfg) {
  if (!cfg.table_override.empty())
    for (int l : cfg.levels)
      for (int j = 1; j < l; ++j) register_override(cfg, std::ldexp(1.0, -j));
  TableArtifact t;
  t.title = "iteration counts " + pair_label(cfg);
  t.row_name = "Gc";
  t.integer_cells = true;
  std::vector<SolveCase> cols;
  for (double a : cfg.alpha)
    for (int l : cfg.levels) {
      cols.push_back({0.0, a, l});
      t.col_labels.push_back("alpha=" + short_num(a) + " nlevels=" + std::to_string(l));
    }
  for (double g : cfg.Gc) t.row_labels.push_back(short_num(g));
  const std::size_t nr = cfg.Gc.size(), nc = cols.size();
  t.values.assign(nr, std::vector<double>(nc, 0.0));
  t.flagged.assign(nr, std::vector<bool>(nc, false));
  std::vector<char> flags(nr * nc, 0);
  parallel_for(static_cast<int>(nr * nc), cfg.workers, [&](int i) {
    SolveCase c = cols[i % nc];
    c.Gc = cfg.Gc[i / nc];
    const SolveReport r = run_single_solve(cfg, c);
    t.values[i / nc][i % nc] = r.iterations;
    flags[i] = r.converged ? 0 : 1;
  });
  for (std::size_t i = 0; i < nr * nc; ++i) t.flagged[i / nc][i % nc] = flags[i] != 0;
  return t;
}

std::vector<fs::path> emit_solve_report(const ExperimentConfig& cfg, const SolveCase& c,
                                        const SolveReport& r) {
  const std::string params = std::string(to_string(cfg.discretization)) + "_G" + short_num(c.Gc) +
                             "_a" + short_num(c.alpha) + "_L" + std::to_string(c.levels);
  std::vector<fs::path> out;
  const fs::path hist = cfg.output_dir / artifact_name(cfg, params);
  {
    auto os = open_output(hist);
    os << "iteration,residual\n";
    for (std::size_t i = 0; i < r.residuals.size(); ++i) os << i << "," << num(r.residuals[i]) << "\n";
    if (!os) throw Error(ErrorCode::io, "write failed: " + hist.string());
  }
  out.push_back(hist);
  if (cfg.write_solution) {
    const GridSpec grid = solve_grid(cfg, c.levels);
    Medium re, im;
    re.kind = im.kind = Medium::Kind::file;
    for (int d = 0; d < 3; ++d) re.nodes[d] = im.nodes[d] = d < grid.dim ? grid.axes[d].n_nodes() : 1;
    const std::size_t total = static_cast<std::size_t>(re.nodes[0]) * re.nodes[1] * re.nodes[2];
    re.k.assign(total, 0.0);
    im.k.assign(total, 0.0);
    const auto sh = grid.shape();
    for (int l = 0; l < sh[2]; ++l)
      for (int j = 0; j < sh[1]; ++j)
        for (int i = 0; i < sh[0]; ++i) {
          const cplx v = r.solution[grid.index(i, j, l)];
          const int li = grid.dim == 3 ? l + 1 : 0;
          const std::size_t node =
              (i + 1) + static_cast<std::size_t>(re.nodes[0]) * ((j + 1) + static_cast<std::size_t>(re.nodes[1]) * li);
          re.k[node] = v.real();
          im.k[node] = v.imag();
        }
    const std::string stem = artifact_name(cfg, params + "_solution");
    const fs::path pre = cfg.output_dir / (stem.substr(0, stem.size() - 4) + "_re.bin");
    const fs::path pim = cfg.output_dir / (stem.substr(0, stem.size() - 4) + "_im.bin");
    write_medium(pre, re, true, "field");
    write_medium(pim, im, true, "field");
    out.push_back(pre);
    out.push_back(pim);
  }
  return out;
}

std::string table_params(const ExperimentConfig& cfg) {
  if (cfg.kind == ExperimentKind::lfa_table)
    return smoother_label(cfg.smoother.value_or(default_smoother(cfg.fine, cfg.coarse)));
  std::string p = std::string(to_string(cfg.discretization)) + "_n" + std::to_string(cfg.coarse_size) +
                  "_" + std::string(to_string(cfg.medium.kind));
  if (cfg.smoother) p += "_" + smoother_label(*cfg.smoother);
  return p;
}

std::vector<fs::path> run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::dispersion_curves: return run_dispersion_curves(cfg);
    case ExperimentKind::fit: return run_fit(cfg);
    case ExperimentKind::lfa_table: return {emit_plotdata(run_lfa_table(cfg), cfg, table_params(cfg))};
    case ExperimentKind::solve_table: return {emit_plotdata(run_solve_table(cfg), cfg, table_params(cfg))};
    case ExperimentKind::single_solve: {
      const SolveCase c{cfg.Gc.front(), cfg.alpha.front(), cfg.levels.front()};
      return emit_solve_report(cfg, c, run_single_solve(cfg, c));
    }
  }
  return {};
}

}  // namespace helmmg
