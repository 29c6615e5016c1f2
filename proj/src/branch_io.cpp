#include "babenko/branch_io.hpp"

#include "babenko/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

namespace babenko {

using json = nlohmann::ordered_json;

namespace {

json num(double x) {
  if (!std::isfinite(x)) return nullptr;
  return round15(x);
}

double num_or(const json& j, double missing) {
  if (j.is_null()) return missing;
  if (!j.is_number()) throw FormatError("expected a number, got " + j.dump());
  return j.get<double>();
}

json vec(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

Vector vec_from(const json& j) {
  if (!j.is_array()) throw FormatError("expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = num_or(j[i], 0.0);
  return v;
}

const json& field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw FormatError(std::string("missing field '") + key + "'");
  return *it;
}

json solution_json(const WaveSolution& s) {
  return json{{"mu", num(s.mu)}, {"amplitude", num(s.amplitude)}, {"coeffs", vec(s.coeffs.coeffs())}};
}

// The stored amplitude is kept rather than recomputed so that rewriting the
// file reproduces it exactly.
WaveSolution solution_from(const json& j, double r, const SpectralGrid& grid) {
  WaveSolution s;
  s.mu = num_or(field(j, "mu"), 0.0);
  s.r = r;
  s.coeffs = CosineSeries(vec_from(field(j, "coeffs")));
  if (s.coeffs.size() != grid.size())
    throw FormatError("solution has " + std::to_string(s.coeffs.size()) + " coefficients, expected " +
                      std::to_string(grid.size()));
  s.values = grid.to_values(s.coeffs);
  s.amplitude = num_or(field(j, "amplitude"), 0.0);
  return s;
}

json point_json(const BifurcationPoint& p) {
  json j{{"kind", p.kind == BifurcationKind::primary ? "primary" : "secondary"},
         {"mu_star", num(p.mu_star)},
         {"mode", p.mode},
         {"symmetry_class", p.symmetry_class},
         {"kernel_residual", num(p.kernel_residual)},
         {"null_direction", vec(p.null_direction.coeffs())}};
  if (p.host)
    j["host"] = json{{"index", p.host->index}, {"solution", solution_json(p.host->solution)}};
  else
    j["host"] = nullptr;
  return j;
}

BifurcationPoint point_from(const json& j, double r, const SpectralGrid& grid) {
  BifurcationPoint p;
  const std::string kind = field(j, "kind").get<std::string>();
  if (kind == "primary") p.kind = BifurcationKind::primary;
  else if (kind == "secondary") p.kind = BifurcationKind::secondary;
  else throw FormatError("unknown bifurcation kind '" + kind + "'");
  p.mu_star = num_or(field(j, "mu_star"), 0.0);
  p.mode = field(j, "mode").get<int>();
  p.symmetry_class = field(j, "symmetry_class").get<int>();
  p.kernel_residual = num_or(field(j, "kernel_residual"), std::numeric_limits<double>::quiet_NaN());
  p.null_direction = CosineSeries(vec_from(field(j, "null_direction")));
  const json& host = field(j, "host");
  if (!host.is_null())
    p.host = HostReference{field(host, "index").get<int>(), solution_from(field(host, "solution"), r, grid)};
  return p;
}

json config_json(const ContinuationConfig& c) {
  return json{{"newton_tol", num(c.newton_tol)},
              {"max_newton_iters", c.max_newton_iters},
              {"initial_step", num(c.initial_step)},
              {"max_step", num(c.max_step)},
              {"min_step", num(c.min_step)},
              {"step_shrink", num(c.step_shrink)},
              {"step_grow", num(c.step_grow)},
              {"fast_iterations", c.fast_iterations},
              {"max_points", c.max_points},
              {"max_amplitude", num(c.max_amplitude)},
              {"crest_angle_window_deg", num(c.crest_angle_window_deg)}};
}

ContinuationConfig config_from(const json& j) {
  ContinuationConfig c;
  c.newton_tol = num_or(field(j, "newton_tol"), c.newton_tol);
  c.max_newton_iters = field(j, "max_newton_iters").get<int>();
  c.initial_step = num_or(field(j, "initial_step"), c.initial_step);
  c.max_step = num_or(field(j, "max_step"), c.max_step);
  c.min_step = num_or(field(j, "min_step"), c.min_step);
  c.step_shrink = num_or(field(j, "step_shrink"), c.step_shrink);
  c.step_grow = num_or(field(j, "step_grow"), c.step_grow);
  c.fast_iterations = field(j, "fast_iterations").get<int>();
  c.max_points = field(j, "max_points").get<int>();
  c.max_amplitude = num_or(field(j, "max_amplitude"), std::numeric_limits<double>::infinity());
  c.crest_angle_window_deg = num_or(field(j, "crest_angle_window_deg"), c.crest_angle_window_deg);
  return c;
}

}  // namespace

double round15(double x) {
  if (!std::isfinite(x)) return x;
  if (x == 0.0) return 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return std::strtod(buf, nullptr);
}

std::string format15(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

std::string branch_to_json(const Branch& b) {
  json header{{"r", num(b.params.r())},
              {"N", b.N},
              {"mode", b.origin.mode},
              {"dealias", b.dealias},
              {"config", config_json(b.config)},
              {"origin", point_json(b.origin)}};
  json records = json::array();
  for (std::size_t i = 0; i < b.points.size(); ++i) {
    const WaveSolution& s = b.points[i];
    records.push_back(json{{"theta", num(i < b.theta.size() ? b.theta[i] : 0.0)},
                           {"mu", num(s.mu)},
                           {"amplitude", num(s.amplitude)},
                           {"coeffs", vec(s.coeffs.coeffs())}});
  }
  json events = json::array();
  for (const BranchEvent& e : b.events) {
    json ev{{"index", e.index}, {"kind", to_string(e.kind)}, {"mu", num(e.mu)},
            {"amplitude", num(e.amplitude)}, {"note", e.note}};
    ev["point"] = e.point ? point_json(*e.point) : json(nullptr);
    events.push_back(std::move(ev));
  }
  json root{{"format", kBranchFormat},
            {"version", kBranchFormatVersion},
            {"header", std::move(header)},
            {"records", std::move(records)},
            {"events", std::move(events)}};
  return root.dump(1) + "\n";
}

Branch branch_from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("malformed branch file: ") + e.what());
  }
  try {
    if (!root.is_object() || root.value("format", std::string()) != kBranchFormat)
      throw FormatError("not a branch file");
    const json& version = field(root, "version");
    if (!version.is_number_integer() || version.get<int>() != kBranchFormatVersion)
      throw FormatError("unsupported branch file version " + version.dump() + " (expected " +
                        std::to_string(kBranchFormatVersion) + ")");
    const json& header = field(root, "header");
    Branch b;
    b.params = OperatorParams(num_or(field(header, "r"), 0.0));
    b.N = field(header, "N").get<int>();
    if (b.N < 2) throw FormatError("grid size must be at least 2");
    b.dealias = field(header, "dealias").get<bool>();
    b.config = config_from(field(header, "config"));
    const SpectralGrid grid(b.N);
    const double r = b.params.r();
    b.origin = point_from(field(header, "origin"), r, grid);
    if (field(header, "mode").get<int>() != b.origin.mode) throw FormatError("header mode disagrees with origin");

    for (const json& rec : field(root, "records")) {
      const double theta = num_or(field(rec, "theta"), 0.0);
      if (!b.theta.empty() && theta < b.theta.back()) throw FormatError("records are not ordered by theta");
      b.points.push_back(solution_from(rec, r, grid));
      b.theta.push_back(theta);
    }
    for (const json& ev : field(root, "events")) {
      BranchEvent e;
      e.index = field(ev, "index").get<int>();
      if (e.index < 0 || e.index >= static_cast<int>(std::max<std::size_t>(b.points.size(), 1)))
        throw FormatError("event index " + std::to_string(e.index) + " out of range");
      try {
        e.kind = event_kind_from_string(field(ev, "kind").get<std::string>());
      } catch (const std::invalid_argument& err) {
        throw FormatError(err.what());
      }
      e.mu = num_or(field(ev, "mu"), 0.0);
      e.amplitude = num_or(field(ev, "amplitude"), 0.0);
      e.note = field(ev, "note").get<std::string>();
      const json& p = field(ev, "point");
      if (!p.is_null()) e.point = point_from(p, r, grid);
      b.events.push_back(std::move(e));
    }
    return b;
  } catch (const json::exception& e) {
    throw FormatError(std::string("invalid branch file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid branch file: ") + e.what());
  }
}

void write_branch(const Branch& branch, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << branch_to_json(branch);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Branch read_branch(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return branch_from_json(ss.str());
}

void write_branch_csv(const Branch& b, std::ostream& out) {
  out << "index,theta,mu,amplitude,crest";
  for (int k = 0; k < b.N; ++k) out << ",b" << k;
  out << "\n";
  for (std::size_t i = 0; i < b.points.size(); ++i) {
    const WaveSolution& s = b.points[i];
    out << i << ',' << format15(i < b.theta.size() ? b.theta[i] : 0.0) << ',' << format15(s.mu) << ','
        << format15(s.amplitude) << ',' << format15(s.crest_value());
    for (int k = 0; k < s.size(); ++k) out << ',' << format15(s.coeffs[k]);
    out << "\n";
  }
}

void write_bifdiag_csv(const std::vector<std::pair<std::string, Branch>>& branches, std::ostream& out) {
  out << "series,mu,norm_inf\n";
  if (branches.empty()) return;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& [name, b] : branches) {
    for (const WaveSolution& s : b.points) {
      out << name << ',' << format15(s.mu) << ',' << format15(s.amplitude) << "\n";
      lo = std::min(lo, s.mu);
      hi = std::max(hi, s.mu);
    }
  }
  if (lo <= hi) {
    out << "bound," << format15(lo) << ',' << format15(0.5 * lo) << "\n";
    out << "bound," << format15(hi) << ',' << format15(0.5 * hi) << "\n";
  }
}

}  // namespace babenko
