#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "llab/config.hpp"

namespace llab {

// Writes to <path>.tmp then renames over <path>.
void write_atomic(const std::string& path, const std::string& content);

// CSV text: a "# config_hash=..." line, the header, then rows with round-trip precision.
std::string csv_text(const std::string& hash, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);

// Binary dump: "LLABMAT1", u64 config-hash value, i64 rows, i64 cols (all little-endian),
// then column-major entries as interleaved (re, im) doubles.
std::string matrix_dump(const CMat& m, const std::string& hash);
CMat read_matrix_dump(const std::string& bytes, std::string* hash = nullptr);

// Combines two reports; refuses when their config hashes differ.
json merge_reports(const json& a, const json& b);
// Report without its timing block, for comparisons.
json strip_timing(const json& report);

// Runs fn(i) for i in [0, n) on up to `threads` workers; rethrows the first failure by index.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

// LLAB_THREADS overrides the requested count.
int resolve_threads(int requested);

struct SuiteResult {
  std::string module;
  std::string name;
  bool pass = false;
  double value = 0.0;
  double tol = 0.0;
  std::string detail;
};

std::vector<SuiteResult> run_invariant_suites(const Model& m, std::uint64_t seed);
json to_json(const SuiteResult& s);

struct RunContext {
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct RunOutcome {
  json report;
  int exit_code = 0;
  std::vector<std::string> files;
};

enum ExitCode { kExitOk = 0, kExitNumerical = 2, kExitConfig = 3 };

const std::vector<std::string>& subcommands();

// Executes one subcommand and writes its artifacts into ctx.out_dir.
RunOutcome run_subcommand(const std::string& sub, const RunConfig& cfg, const RunContext& ctx);

int cli_main(int argc, char** argv);

}  // namespace llab
