#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "macpo/config.hpp"
#include "macpo/harness/runner.hpp"

namespace macpo {

struct CompareRow {
  Scheme scheme = Scheme::uniform;
  std::vector<double> finals;  // one per seed, in seed order
  double mean = 0.0;
  double stddev = 0.0;         // sample standard deviation, 0 for one seed
};

struct CompareResult {
  std::vector<CompareRow> rows;
  std::vector<std::vector<TrainResult>> runs;  // [scheme][seed]
};

/// Trains every (scheme, seed) cell. Throws std::invalid_argument on an
/// empty scheme or seed list. With out_dir set, each cell writes to
/// out_dir/<scheme>_seed<k>/ and each scheme gets a curve CSV
/// out_dir/curve_<scheme>.csv with one reward column per seed.
CompareResult run_compare(const RunConfig& base, const std::vector<Scheme>& schemes,
                          const std::vector<std::uint64_t>& seeds, const TrainOptions& opt = {});

void print_compare_table(std::ostream& out, const CompareResult& res);

}  // namespace macpo
