#pragma once

// Command-line driver: trace, switch, reconstruct, bifdiag, spectrum.
// Exit status 0 on success, 1 for usage and input errors, 2 for numerical
// failures.

#include "babenko/continuation.hpp"

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace babenko {

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum ExitStatus { kExitOk = 0, kExitUsage = 1, kExitNumerical = 2 };

/// Default output directory: $BABENKO_OUTPUT_DIR, else the working directory.
std::filesystem::path default_output_dir();

struct RunConfig {
  std::vector<double> r{0.0};
  std::vector<int> modes{1};
  int N = 512;
  bool dealias = false;
  ContinuationConfig continuation;
  std::filesystem::path out;  // directory; empty means default_output_dir()
  std::string format = "json";
  int jobs = 1;
  bool detect_secondary = true;

  void validate() const;
};

/// File name of a primary trace, e.g. C3_r0.8_N1024.json.
std::string trace_file_name(int mode, double r, int N, const std::string& format);

/// Trace every (r, mode) pair, writing one file each. Returns the paths.
std::vector<std::filesystem::path> cmd_trace(const RunConfig& config, std::ostream& log);

/// Follow the branch through secondary event number event_index of the file.
std::filesystem::path cmd_switch(const std::filesystem::path& branch_file, int event_index, int sign,
                                 const ContinuationConfig& config, const std::filesystem::path& out,
                                 std::ostream& log);

/// first, last, a point index, or mu:<value> (nearest point in mu).
int select_point(const Branch& branch, const std::string& selector);

/// Surface, bottom, side and eta CSVs plus a JSON report; returns the report path.
std::filesystem::path cmd_reconstruct(const std::filesystem::path& branch_file, const std::string& selector,
                                      int samples, const std::filesystem::path& out_dir, std::ostream& log);

void cmd_bifdiag(const std::vector<std::filesystem::path>& files, std::ostream& out);

void cmd_spectrum(double r, int n_max, std::ostream& out);

/// Parse argv and dispatch; never throws.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace babenko
