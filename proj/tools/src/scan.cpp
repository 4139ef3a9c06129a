#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>

#include <fmt/format.h>

#include "bethe/error.hpp"
#include "bethe/model.hpp"
#include "bethe_cli/cli.hpp"

namespace bethe::cli {

namespace {

Flag flag_of(bool b) { return b ? Flag::yes : Flag::no; }

Flag parse_flag(const std::string& s, int line) {
  if (s == "yes") return Flag::yes;
  if (s == "no") return Flag::no;
  if (s == "skipped") return Flag::skipped;
  throw ParseError("scan csv: bad flag '" + s + "'", line);
}

Status parse_status(const std::string& s, int line) {
  for (Status st : {Status::UnlearnableLemma3, Status::UnlearnableLemma2, Status::UnlearnableLemma1,
                    Status::LearnableInnerBound, Status::EmpiricalMatch, Status::EmpiricalNoMatch,
                    Status::Undetermined}) {
    if (s == to_string(st)) return st;
  }
  throw ParseError("scan csv: bad verdict '" + s + "'", line);
}

struct GridCell {
  int k;
  int m;
};

std::vector<GridCell> interior_cells(int n) {
  std::vector<GridCell> cells;
  for (int k = 1; k < n; ++k) {
    for (int m = std::max(0, 2 * k - n) + 1; m < k; ++m) cells.push_back({k, m});
  }
  return cells;
}

}  // namespace

const char* to_string(Flag f) noexcept {
  switch (f) {
    case Flag::yes: return "yes";
    case Flag::no: return "no";
    case Flag::skipped: return "skipped";
  }
  return "?";
}

ScanRow make_scan_row(double mu_v, double mu_e, const Verdict& v) {
  ScanRow r;
  r.mu_v = mu_v;
  r.mu_e = mu_e;
  const Evidence& ev = v.evidence;
  if (ev.lemma3) r.lemma3 = flag_of(ev.lemma3->unlearnable);
  if (ev.lemma2) r.lemma2 = flag_of(ev.lemma2->unlearnable);
  if (ev.lemma1) r.lemma1 = flag_of(ev.lemma1->unlearnable);
  if (ev.inner) r.inner = flag_of(ev.inner->learnable_certificate);
  if (ev.empirical) {
    r.empirical_match = flag_of(!ev.empirical->failed && ev.empirical->match.matched);
    if (!ev.empirical->failed) r.residual = ev.empirical->match.residual;
  }
  r.verdict = v.status;
  return r;
}

std::vector<ScanRow> scan_homogeneous(const Graph& g, const ScanOptions& opts) {
  double steps = 1.0 / opts.resolution;
  int n = static_cast<int>(std::lround(steps));
  if (!(opts.resolution > 0.0 && opts.resolution <= 0.05) || std::abs(steps - n) > 1e-9) {
    throw InputError(fmt::format("scan: resolution must lie in (0, 0.05] and divide 1, got {}", opts.resolution));
  }
  if (g.num_edges() == 0) throw InputError("scan: graph has no edges");

  const std::vector<GridCell> cells = interior_cells(n);
  std::vector<ScanRow> rows(cells.size());

  ClassifyOptions copts = opts.classify;
  copts.exhaustive = opts.exhaustive;

  auto work = [&](std::size_t idx) {
    double mu_v = static_cast<double>(cells[idx].k) / n;
    double mu_e = static_cast<double>(cells[idx].m) / n;
    MinimalMarginals mu = homogeneous_marginals(g, mu_v, mu_e);
    Verdict v = classify(mu, g, copts);
    // Closed-form bounds are reported on every point.
    if (!v.evidence.lemma2) v.evidence.lemma2 = lemma2_test(mu, g, copts.eig_tol);
    if (!v.evidence.inner) v.evidence.inner = inner_bound_unique(canonical_parameters(mu, g), g);
    rows[idx] = make_scan_row(mu_v, mu_e, v);
  };

  int threads = opts.threads > 0 ? opts.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, static_cast<int>(std::max<std::size_t>(cells.size(), 1)));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (;;) {
      std::size_t idx = next.fetch_add(1);
      if (idx >= cells.size()) return;
      try {
        work(idx);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next.store(cells.size());
        return;
      }
    }
  };

  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

void write_scan_csv(std::ostream& out, std::span<const ScanRow> rows, const Metadata& meta) {
  for (const auto& [key, value] : meta) out << "# " << key << '=' << value << '\n';
  out << kScanHeader << '\n';
  for (const ScanRow& r : rows) {
    out << fmt::format("{},{},{},{},{},{},{},{},", r.mu_v, r.mu_e, to_string(r.lemma3), to_string(r.lemma2),
                       to_string(r.lemma1), to_string(r.inner), to_string(r.empirical_match),
                       to_string(r.verdict));
    if (r.residual) out << fmt::format("{}", *r.residual);
    out << '\n';
  }
}

std::vector<ScanRow> read_scan_csv(std::istream& in) {
  std::vector<ScanRow> rows;
  std::string line;
  int lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != kScanHeader) throw ParseError("scan csv: unexpected header '" + line + "'", lineno);
      header = true;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (line.back() == ',') f.emplace_back();
    if (f.size() != 9) throw ParseError("scan csv: expected 9 fields", lineno);
    ScanRow r;
    try {
      r.mu_v = std::stod(f[0]);
      r.mu_e = std::stod(f[1]);
      if (!f[8].empty()) r.residual = std::stod(f[8]);
    } catch (const std::logic_error&) {
      throw ParseError("scan csv: bad number", lineno);
    }
    r.lemma3 = parse_flag(f[2], lineno);
    r.lemma2 = parse_flag(f[3], lineno);
    r.lemma1 = parse_flag(f[4], lineno);
    r.inner = parse_flag(f[5], lineno);
    r.empirical_match = parse_flag(f[6], lineno);
    r.verdict = parse_status(f[7], lineno);
    rows.push_back(r);
  }
  if (!header) throw ParseError("scan csv: missing header", lineno);
  return rows;
}

}  // namespace bethe::cli
