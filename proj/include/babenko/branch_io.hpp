#pragma once

// Branch persistence (versioned JSON) and plot-data export (CSV).
//
// Every floating-point number is written with 15 significant digits, so a
// file read back and written again is byte-identical.

#include "babenko/continuation.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace babenko {

inline constexpr const char* kBranchFormat = "babenko-branch";
inline constexpr int kBranchFormatVersion = 1;

/// x rounded to 15 significant digits.
double round15(double x);
/// 15-significant-digit text for CSV and console output.
std::string format15(double x);

std::string branch_to_json(const Branch& branch);
Branch branch_from_json(const std::string& text);

void write_branch(const Branch& branch, const std::filesystem::path& path);
Branch read_branch(const std::filesystem::path& path);

/// One row per point: index, theta, mu, amplitude, crest, b_0..b_{N-1}.
void write_branch_csv(const Branch& branch, std::ostream& out);

/// Columns series,mu,norm_inf; one series per named branch plus the bound
/// line norm = mu/2 over the combined mu range. No branches: header only.
void write_bifdiag_csv(const std::vector<std::pair<std::string, Branch>>& branches, std::ostream& out);

}  // namespace babenko
