#include "macpo/harness/compare.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace macpo {

CompareResult run_compare(const RunConfig& base, const std::vector<Scheme>& schemes,
                          const std::vector<std::uint64_t>& seeds, const TrainOptions& opt) {
  if (schemes.empty()) throw std::invalid_argument("compare: scheme list is empty");
  if (seeds.empty()) throw std::invalid_argument("compare: seed list is empty");
  CompareResult res;
  for (Scheme scheme : schemes) {
    CompareRow row;
    row.scheme = scheme;
    std::vector<TrainResult> runs;
    for (std::uint64_t seed : seeds) {
      RunConfig cfg = base;
      cfg.scheme = scheme;
      cfg.seed = seed;
      TrainOptions cell = opt;
      if (!opt.out_dir.empty()) cell.out_dir = opt.out_dir + "/" + to_string(scheme) + "_seed" + std::to_string(seed);
      runs.push_back(run_training(cfg, cell));
      row.finals.push_back(runs.back().final_reward);
    }
    double sum = 0.0;
    for (double f : row.finals) sum += f;
    row.mean = sum / static_cast<double>(row.finals.size());
    if (row.finals.size() > 1) {
      double sq = 0.0;
      for (double f : row.finals) sq += (f - row.mean) * (f - row.mean);
      row.stddev = std::sqrt(sq / static_cast<double>(row.finals.size() - 1));
    }
    if (!opt.out_dir.empty()) {
      std::filesystem::create_directories(opt.out_dir);
      std::ofstream curve(opt.out_dir + "/curve_" + to_string(scheme) + ".csv");
      curve << "env_steps";
      for (std::uint64_t seed : seeds) curve << ",seed" << seed;
      curve << '\n';
      std::size_t points = runs.front().rows.size();
      for (const auto& r : runs) points = std::min(points, r.rows.size());
      for (std::size_t i = 0; i < points; ++i) {
        curve << runs.front().rows[i].env_steps;
        for (const auto& r : runs) curve << ',' << r.rows[i].mean_episode_reward;
        curve << '\n';
      }
    }
    res.rows.push_back(std::move(row));
    res.runs.push_back(std::move(runs));
  }
  return res;
}

void print_compare_table(std::ostream& out, const CompareResult& res) {
  out << std::left << std::setw(14) << "scheme" << std::setw(12) << "mean" << std::setw(12) << "std"
      << "finals\n";
  for (const auto& row : res.rows) {
    out << std::setw(14) << to_string(row.scheme) << std::setw(12) << std::fixed << std::setprecision(3) << row.mean
        << std::setw(12) << row.stddev;
    for (std::size_t i = 0; i < row.finals.size(); ++i) out << (i ? " " : "") << row.finals[i];
    out << '\n';
  }
  out.unsetf(std::ios::floatfield);
}

}  // namespace macpo
