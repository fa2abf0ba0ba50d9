// One PASS/FAIL line per acceptance criterion. Exit status is nonzero if any
// selected criterion fails.
//
//   acceptance                 all ten criteria (8 and 9 train for hours)
//   acceptance --only 1,2,10   a subset
//   acceptance --work DIR      keep training output in DIR

#include <CLI11.hpp>
#include <iostream>
#include <set>
#include <sstream>

#include "macpo/harness/verify.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string only;
  std::string work;
  app.add_option("--only", only, "Comma-separated criterion numbers");
  app.add_option("--work", work, "Scratch directory for training runs");
  CLI11_PARSE(app, argc, argv);

  std::set<int> wanted;
  std::stringstream ss(only);
  for (std::string tok; std::getline(ss, tok, ',');)
    if (!tok.empty()) wanted.insert(std::stoi(tok));

  macpo::VerifyOptions opt;
  opt.include_long = true;
  opt.work_dir = work;
  opt.log = &std::cerr;

  bool all = true;
  for (int c = 1; c <= 10; ++c) {
    if (!wanted.empty() && !wanted.count(c)) continue;
    for (const auto& s : macpo::verify_suites()) {
      if (s.criterion != c) continue;
      const auto r = macpo::run_suite(s, opt);
      macpo::print_suite_line(std::cout, r, c);
      std::cout.flush();
      all = all && r.passed;
    }
  }
  return all ? 0 : 1;
}
