#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "macpo/priority/fmax_oracle.hpp"

namespace macpo {

struct SuiteResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
  double seconds = 0.0;
};

struct VerifyReport {
  std::vector<SuiteResult> suites;
  bool passed() const;
};

struct VerifyOptions {
  /// Comma-separated substrings; empty selects everything.
  std::string filter;
  /// Multi-hour training suites only run when set or named by the filter.
  bool include_long = false;
  /// Scratch space for suites that write files; a temp dir when empty.
  std::string work_dir;
  /// Replaces joint_prob_term inside the fmax suite (mutation testing).
  JointProbFn joint_prob;
  std::ostream* log = nullptr;
};

struct Suite {
  std::string name;
  std::string description;
  int criterion = 0;  // acceptance criterion number, 0 for invariant suites
  bool long_running = false;
  std::function<SuiteResult(const VerifyOptions&)> run;
};

const std::vector<Suite>& verify_suites();
const Suite& find_suite(const std::string& name);
bool suite_selected(const Suite& s, const VerifyOptions& opt);

/// Runs each selected suite in isolation; a suite that throws fails.
VerifyReport run_verify(const VerifyOptions& opt);
SuiteResult run_suite(const Suite& s, const VerifyOptions& opt);
void print_suite_line(std::ostream& out, const SuiteResult& r, int criterion = 0);

}  // namespace macpo
