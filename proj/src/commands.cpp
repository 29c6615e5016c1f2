#include "babenko/cli.hpp"

#include "babenko/bifurcation.hpp"
#include "babenko/branch_io.hpp"
#include "babenko/errors.hpp"
#include "babenko/reconstruct.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

namespace babenko {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

json num(double x) {
  if (!std::isfinite(x)) return nullptr;
  return round15(x);
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot open " + path.string() + " for writing");
  return f;
}

Branch load(const fs::path& path) {
  if (!fs::exists(path)) throw UsageError("no such file: " + path.string());
  return read_branch(path);
}

fs::path resolve_dir(const fs::path& out) { return out.empty() ? default_output_dir() : out; }

// One line per notable event plus the endpoint with its crest angle.
void print_summary(const Branch& b, std::ostream& log) {
  if (b.origin.kind == BifurcationKind::secondary)
    log << "branch born at mu=" << format15(b.origin.mu_star) << " (kernel mode " << b.origin.mode << ", class "
        << b.origin.symmetry_class << ")";
  else
    log << "branch C" << b.origin.mode;
  log << "  r=" << format15(b.params.r()) << "  N=" << b.N << (b.dealias ? "  dealiased" : "") << "  points="
      << b.points.size() << "\n";
  for (std::size_t i = 0; i < b.events.size(); ++i) {
    const BranchEvent& e = b.events[i];
    log << "  event " << i << ": " << to_string(e.kind) << "  mu=" << format15(e.mu)
        << "  amplitude=" << format15(e.amplitude);
    if (e.point) log << "  class=" << e.point->symmetry_class << "  mode=" << e.point->mode;
    if (!e.note.empty()) log << "  (" << e.note << ")";
    log << "\n";
  }
  if (b.points.empty()) return;
  const WaveSolution& last = b.points.back();
  log << "  endpoint: mu=" << format15(last.mu) << "  amplitude=" << format15(last.amplitude);
  if (last.amplitude > 0.0) {
    const ReconstructedDomain dom = reconstruct(last, 256);
    const ProfileSummary s = summarize(dom, last);
    log << "  crest=" << format15(s.crest) << "  crest angle=" << format15(s.angle.degrees)
        << (s.angle.confident ? "" : " (low confidence)");
  }
  log << "\n";
}

void write_output(const Branch& b, const fs::path& path, const std::string& format) {
  if (format == "csv") {
    std::ofstream f = open_out(path);
    write_branch_csv(b, f);
  } else {
    write_branch(b, path);
  }
}

void write_curve(const fs::path& path, const char* header, const std::vector<CurveSample>& pts) {
  std::ofstream f = open_out(path);
  f << header << "\n";
  for (const CurveSample& p : pts) f << format15(p.param) << ',' << format15(p.x) << ',' << format15(p.y) << "\n";
}

json extrema_json(const std::vector<Extremum>& v) {
  json a = json::array();
  for (const Extremum& e : v) a.push_back(json{{"t", num(e.t)}, {"x", num(e.x)}, {"y", num(e.y)}});
  return a;
}

void apply_step_flags(ContinuationConfig& c, double step, double max_step) {
  if (step > 0.0) {
    c.initial_step = step;
    if (c.max_step < step) c.max_step = step;
    if (c.min_step >= step) c.min_step = step * 1e-4;
  }
  if (max_step > 0.0) c.max_step = max_step;
}

}  // namespace

fs::path default_output_dir() {
  if (const char* env = std::getenv("BABENKO_OUTPUT_DIR"); env && *env) return fs::path(env);
  return fs::current_path();
}

void RunConfig::validate() const {
  if (r.empty()) throw UsageError("at least one depth parameter r is required");
  for (double x : r)
    if (!(x >= 0.0 && x < 1.0)) throw UsageError("r must lie in [0, 1), got " + format15(x));
  if (modes.empty()) throw UsageError("at least one mode is required");
  for (int n : modes)
    if (n < 1) throw UsageError("mode must be >= 1");
  if (N < 8) throw UsageError("N must be at least 8");
  for (int n : modes)
    if (n >= N / 2) throw UsageError("mode " + std::to_string(n) + " is not resolved with N = " + std::to_string(N));
  if (format != "json" && format != "csv") throw UsageError("format must be json or csv");
  if (jobs < 1) throw UsageError("jobs must be >= 1");
  try {
    continuation.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

std::string trace_file_name(int mode, double r, int N, const std::string& format) {
  return "C" + std::to_string(mode) + "_r" + format15(r) + "_N" + std::to_string(N) + "." + format;
}

std::vector<fs::path> cmd_trace(const RunConfig& config, std::ostream& log) {
  config.validate();
  struct Job {
    double r = 0.0;
    int mode = 1;
    fs::path path;
    Branch branch;
    std::vector<std::string> warnings;
    std::exception_ptr error;
  };
  std::vector<Job> jobs;
  const fs::path dir = resolve_dir(config.out);
  for (double r : config.r)
    for (int n : config.modes) {
      Job& job = jobs.emplace_back();
      job.r = r;
      job.mode = n;
      job.path = dir / trace_file_name(n, r, config.N, config.format);
    }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      Job& job = jobs[i];
      try {
        job.branch = trace_branch(job.mode, OperatorParams(job.r), config.continuation, config.N, config.dealias);
        if (config.detect_secondary) job.warnings = annotate_secondary(job.branch);
      } catch (...) {
        job.error = std::current_exception();
      }
    }
  };
  const int threads = std::min<int>(config.jobs, static_cast<int>(jobs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<fs::path> written;
  for (Job& job : jobs) {
    if (job.error) std::rethrow_exception(job.error);
    write_output(job.branch, job.path, config.format);
    print_summary(job.branch, log);
    for (const auto& w : job.warnings) log << "  warning: " << w << "\n";
    log << "  wrote " << job.path.string() << "\n";
    written.push_back(job.path);
  }
  return written;
}

fs::path cmd_switch(const fs::path& branch_file, int event_index, int sign, const ContinuationConfig& config,
                    const fs::path& out, std::ostream& log) {
  if (sign != 1 && sign != -1) throw UsageError("sign must be +1 or -1");
  const Branch host = load(branch_file);
  if (event_index < 0 || event_index >= static_cast<int>(host.events.size()))
    throw UsageError("event index " + std::to_string(event_index) + " out of range (file has " +
                     std::to_string(host.events.size()) + " events)");
  const BranchEvent& e = host.events[static_cast<std::size_t>(event_index)];
  if (e.kind != EventKind::secondary_bifurcation || !e.point)
    throw UsageError("event " + std::to_string(event_index) + " is a " + to_string(e.kind) +
                     ", not a secondary bifurcation");
  try {
    config.validate();
  } catch (const std::invalid_argument& err) {
    throw UsageError(err.what());
  }
  SwitchOptions opt;
  opt.sign = sign;
  opt.dealias = host.dealias;
  Branch b = switch_branch(*e.point, config, opt);
  fs::path path = out;
  if (path.empty())
    path = branch_file.parent_path() /
           (branch_file.stem().string() + "_switch" + std::to_string(event_index) + (sign > 0 ? "p" : "m") + ".json");
  write_branch(b, path);
  print_summary(b, log);
  log << "  attached to host point " << (e.point->host ? e.point->host->index : -1) << " at mu=" << format15(e.mu)
      << "\n  wrote " << path.string() << "\n";
  return path;
}

int select_point(const Branch& b, const std::string& sel) {
  if (b.points.empty()) throw UsageError("branch has no points");
  const int n = static_cast<int>(b.points.size());
  if (sel == "first") return 0;
  if (sel == "last") return n - 1;
  if (sel.rfind("mu:", 0) == 0) {
    double mu = 0.0;
    try {
      std::size_t used = 0;
      mu = std::stod(sel.substr(3), &used);
      if (used != sel.size() - 3) throw std::invalid_argument(sel);
    } catch (const std::exception&) {
      throw UsageError("bad point selector '" + sel + "'");
    }
    int best = 0;
    for (int i = 1; i < n; ++i)
      if (std::abs(b.points[i].mu - mu) < std::abs(b.points[best].mu - mu)) best = i;
    return best;
  }
  int idx = 0;
  try {
    std::size_t used = 0;
    idx = std::stoi(sel, &used);
    if (used != sel.size()) throw std::invalid_argument(sel);
  } catch (const std::exception&) {
    throw UsageError("bad point selector '" + sel + "' (use first, last, an index or mu:<value>)");
  }
  if (idx < 0) idx += n;
  if (idx < 0 || idx >= n) throw UsageError("point index " + sel + " out of range (branch has " + std::to_string(n) + " points)");
  return idx;
}

fs::path cmd_reconstruct(const fs::path& branch_file, const std::string& selector, int samples,
                         const fs::path& out_dir, std::ostream& log) {
  if (samples < 16) throw UsageError("samples must be at least 16");
  const Branch b = load(branch_file);
  const int idx = select_point(b, selector);
  const WaveSolution& sol = b.points[static_cast<std::size_t>(idx)];
  const ReconstructedDomain dom = reconstruct(sol, samples);
  const ProfileSummary s = summarize(dom, sol);

  const fs::path dir = resolve_dir(out_dir);
  const std::string stem = branch_file.stem().string() + "_p" + std::to_string(idx);
  write_curve(dir / (stem + "_surface.csv"), "t,x,y", dom.surface);
  if (dom.finite_depth()) {
    write_curve(dir / (stem + "_bottom.csv"), "t,x,y", dom.bottom);
    write_curve(dir / (stem + "_side.csv"), "u,x,y", dom.side);
  }
  bool eta_ok = true;
  try {
    const auto eta = surface_elevation(dom, samples);
    std::ofstream f = open_out(dir / (stem + "_eta.csv"));
    f << "x,eta\n";
    for (const auto& [x, y] : eta) f << format15(x) << ',' << format15(y) << "\n";
  } catch (const InvertibilityFailed& e) {
    eta_ok = false;
    log << "warning: " << e.what() << "\n";
  }

  const CorrespondenceReport& c = dom.checks;
  json report{{"branch", branch_file.filename().string()},
              {"point", idx},
              {"r", num(dom.r)},
              {"mu", num(dom.mu)},
              {"N", sol.size()},
              {"B", num(dom.B)},
              {"h", num(dom.h)},
              {"crest", num(s.crest)},
              {"trough", num(s.trough)},
              {"crest_to_trough", num(s.crest_to_trough)},
              {"norm_inf", num(s.norm_inf)},
              {"crest_angle_deg", num(s.angle.degrees)},
              {"crest_angle_confident", s.angle.confident},
              {"crests", extrema_json(s.crests)},
              {"troughs", extrema_json(s.troughs)},
              {"tail_ratio", num(dom.tail_ratio)},
              {"eta_available", eta_ok},
              {"correspondence",
               json{{"bottom_monotone", c.bottom_monotone},
                    {"bottom_worst", num(c.bottom_worst)},
                    {"side_monotone", c.side_monotone},
                    {"side_worst", num(c.side_worst)},
                    {"surface_monotone", c.surface_monotone},
                    {"surface_worst", num(c.surface_worst)},
                    {"self_intersection", c.self_intersection},
                    {"sample_count", c.sample_count}}}};
  const fs::path path = dir / (stem + "_report.json");
  std::ofstream f = open_out(path);
  f << report.dump(1) << "\n";

  log << "point " << idx << ": mu=" << format15(dom.mu) << "  h=" << format15(dom.h) << "  crest=" << format15(s.crest)
      << "  trough=" << format15(s.trough) << "  crest angle=" << format15(s.angle.degrees)
      << "  correspondence " << (c.all_monotone() && !c.self_intersection ? "ok" : "VIOLATED") << "\n";
  log << "wrote " << path.string() << "\n";
  return path;
}

void cmd_bifdiag(const std::vector<fs::path>& files, std::ostream& out) {
  std::vector<std::pair<std::string, Branch>> series;
  for (const fs::path& p : files) series.emplace_back(p.stem().string(), load(p));
  write_bifdiag_csv(series, out);
}

void cmd_spectrum(double r, int n_max, std::ostream& out) {
  if (!(r >= 0.0 && r < 1.0)) throw UsageError("r must lie in [0, 1)");
  if (n_max < 1) throw UsageError("nmax must be >= 1");
  out << "n,mu_n,beta_n\n";
  for (int n = 1; n <= n_max; ++n)
    out << n << ',' << format15(bifurcation_mu(n, r)) << ',' << format15(multiplier_beta(n, r)) << "\n";
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Steady periodic water waves: branch tracing, bifurcations, reconstruction", "babenko"};
  app.require_subcommand(1);

  RunConfig rc;
  double tol = rc.continuation.newton_tol, step = 0.0, max_step = 0.0;
  double max_amp = rc.continuation.max_amplitude;
  std::string out_path;

  auto add_numerics = [&](CLI::App* sub) {
    sub->add_option("--tol", tol, "Newton residual tolerance (max-norm)");
    sub->add_option("--step", step, "initial amplitude step");
    sub->add_option("--max-step", max_step, "largest amplitude step");
    sub->add_option("--max-amplitude", max_amp, "stop tracing beyond this amplitude");
  };

  CLI::App* trace = app.add_subcommand("trace", "trace primary branches C_n");
  trace->add_option("--r", rc.r, "depth parameter(s) in [0,1)")->delimiter(',');
  trace->add_option("--mode", rc.modes, "mode number(s) n")->delimiter(',');
  trace->add_option("--N", rc.N, "number of cosine modes");
  trace->add_flag("--dealias", rc.dealias, "de-aliased products (2N-point grid)");
  trace->add_option("--out", out_path, "output directory");
  trace->add_option("--format", rc.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  trace->add_option("--jobs", rc.jobs, "parallel traces");
  bool no_detect = false;
  trace->add_flag("--no-detect", no_detect, "skip secondary-bifurcation detection");
  add_numerics(trace);

  CLI::App* sw = app.add_subcommand("switch", "follow the branch through a secondary bifurcation");
  std::string sw_file;
  int sw_event = -1, sw_sign = 1;
  sw->add_option("branch", sw_file, "host branch file")->required();
  sw->add_option("--event", sw_event, "index into the event list")->required();
  sw->add_option("--sign", sw_sign, "side of the kernel direction tried first (+1 or -1)");
  sw->add_option("--out", out_path, "output file");
  add_numerics(sw);

  CLI::App* rec = app.add_subcommand("reconstruct", "physical domain and profile of one branch point");
  std::string rec_file, selector = "last";
  int samples = 512;
  rec->add_option("branch", rec_file, "branch file")->required();
  rec->add_option("--point", selector, "first, last, index or mu:<value>");
  rec->add_option("--samples", samples, "samples per curve");
  rec->add_option("--out", out_path, "output directory");

  CLI::App* bif = app.add_subcommand("bifdiag", "(mu, max|v|) series for a set of branch files");
  std::vector<std::string> bif_files;
  bif->add_option("branches", bif_files, "branch files");
  bif->add_option("--out", out_path, "CSV file (default stdout)");

  CLI::App* spectrum = app.add_subcommand("spectrum", "table of mu_n");
  double spectrum_r = 0.0;
  int nmax = 10;
  spectrum->add_option("--r", spectrum_r, "depth parameter in [0,1)");
  spectrum->add_option("--nmax", nmax, "largest n");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    rc.continuation.newton_tol = tol;
    rc.continuation.max_amplitude = max_amp;
    apply_step_flags(rc.continuation, step, max_step);
    if (*trace) {
      rc.out = out_path;
      rc.detect_secondary = !no_detect;
      cmd_trace(rc, out);
    } else if (*sw) {
      cmd_switch(sw_file, sw_event, sw_sign, rc.continuation, out_path, out);
    } else if (*rec) {
      cmd_reconstruct(rec_file, selector, samples, out_path, out);
    } else if (*bif) {
      std::vector<fs::path> files(bif_files.begin(), bif_files.end());
      if (out_path.empty()) {
        cmd_bifdiag(files, out);
      } else {
        std::ofstream f = open_out(out_path);
        cmd_bifdiag(files, f);
      }
    } else if (*spectrum) {
      cmd_spectrum(spectrum_r, nmax, out);
    }
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace babenko
