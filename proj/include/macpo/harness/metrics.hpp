#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace macpo {

/// One row per evaluation point. Column order is the CSV schema.
struct MetricsRow {
  long env_steps = 0;
  long episodes = 0;
  long train_steps = 0;
  double mean_episode_reward = 0.0;  // over the eval episodes at this point
  double loss = 0.0;                 // mean over train steps since the last row
  double mean_raw_weight = 0.0;
  double max_raw_weight = 0.0;
  double weight_entropy = 0.0;
  double epsilon = 0.0;
  double wall_seconds = 0.0;
};

const std::vector<std::string>& metrics_columns();
std::string format_metrics_row(const MetricsRow& row);
/// Throws std::invalid_argument on a malformed or nonfinite line.
MetricsRow parse_metrics_row(const std::string& line);

/// Writes "# mode=... seed=..." then the header, then flushes every row.
class MetricsWriter {
 public:
  MetricsWriter(const std::string& path, const std::string& comment);
  void write(const MetricsRow& row);

 private:
  std::ofstream out_;
  long last_env_steps_ = -1;
};

/// Reads every data row of a metrics CSV, skipping comments and the header.
std::vector<MetricsRow> read_metrics(const std::string& path);

}  // namespace macpo
