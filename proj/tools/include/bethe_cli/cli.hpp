#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bethe/graph.hpp"
#include "bethe/learnability.hpp"

namespace bethe::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitInput = 2,
  kExitNumerical = 3,
  kExitNonConvergence = 4,
  kExitIo = 5,
};

/// Ternary outcome of one bound in a scan row.
enum class Flag { yes, no, skipped };

const char* to_string(Flag f) noexcept;

struct ScanRow {
  double mu_v = 0.0;
  double mu_e = 0.0;
  Flag lemma3 = Flag::skipped;
  Flag lemma2 = Flag::skipped;
  Flag lemma1 = Flag::skipped;
  Flag inner = Flag::skipped;
  Flag empirical_match = Flag::skipped;
  Status verdict = Status::Undetermined;
  /// Moment-matching residual of the empirical stage, when it ran.
  std::optional<double> residual;
};

inline constexpr const char* kScanHeader =
    "mu_v,mu_e,lemma3,lemma2,lemma1,inner,empirical_match,verdict,residual";

struct ScanOptions {
  double resolution = 0.01;
  /// `classify.empirical` enables the learning stage on undecided points.
  ClassifyOptions classify;
  /// Run lemma 1 on every point rather than only where the closed-form
  /// bounds are silent.
  bool exhaustive = false;
  /// 0 picks std::thread::hardware_concurrency().
  int threads = 0;
};

ScanRow make_scan_row(double mu_v, double mu_e, const Verdict& v);

/// Classifies every strictly interior point (k/n, m/n) of the homogeneous
/// polytope, row-major in (mu_v, mu_e). Rows come back in grid order
/// regardless of the worker count.
std::vector<ScanRow> scan_homogeneous(const Graph& g, const ScanOptions& opts);

using Metadata = std::vector<std::pair<std::string, std::string>>;

void write_scan_csv(std::ostream& out, std::span<const ScanRow> rows, const Metadata& meta);
/// Parses rows written by write_scan_csv; `#` lines are skipped.
std::vector<ScanRow> read_scan_csv(std::istream& in);

/// Entry point of the `bethe` tool; returns the process exit code.
int run(int argc, const char* const* argv);

}  // namespace bethe::cli
