#include "macpo/harness/metrics.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace macpo {

namespace {

std::string fmt(double x) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, r.ptr};
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size() || !std::isfinite(v))
    throw std::invalid_argument("metrics: bad numeric field '" + s + "'");
  return v;
}

}  // namespace

const std::vector<std::string>& metrics_columns() {
  static const std::vector<std::string> cols = {"env_steps",       "episodes",       "train_steps",
                                                "mean_episode_reward", "loss",     "mean_raw_weight",
                                                "max_raw_weight",  "weight_entropy", "epsilon",
                                                "wall_seconds"};
  return cols;
}

std::string format_metrics_row(const MetricsRow& r) {
  std::ostringstream o;
  o << r.env_steps << ',' << r.episodes << ',' << r.train_steps << ',' << fmt(r.mean_episode_reward) << ','
    << fmt(r.loss) << ',' << fmt(r.mean_raw_weight) << ',' << fmt(r.max_raw_weight) << ',' << fmt(r.weight_entropy)
    << ',' << fmt(r.epsilon) << ',' << fmt(r.wall_seconds);
  return o.str();
}

MetricsRow parse_metrics_row(const std::string& line) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) f.push_back(cell);
  if (f.size() != metrics_columns().size())
    throw std::invalid_argument("metrics: expected " + std::to_string(metrics_columns().size()) + " fields");
  MetricsRow r;
  r.env_steps = static_cast<long>(parse_double(f[0]));
  r.episodes = static_cast<long>(parse_double(f[1]));
  r.train_steps = static_cast<long>(parse_double(f[2]));
  r.mean_episode_reward = parse_double(f[3]);
  r.loss = parse_double(f[4]);
  r.mean_raw_weight = parse_double(f[5]);
  r.max_raw_weight = parse_double(f[6]);
  r.weight_entropy = parse_double(f[7]);
  r.epsilon = parse_double(f[8]);
  r.wall_seconds = parse_double(f[9]);
  return r;
}

MetricsWriter::MetricsWriter(const std::string& path, const std::string& comment) : out_(path) {
  if (!out_) throw std::runtime_error("cannot open metrics file " + path);
  out_ << "# " << comment << '\n';
  const auto& cols = metrics_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out_ << (i ? "," : "") << cols[i];
  out_ << '\n';
  out_.flush();
}

void MetricsWriter::write(const MetricsRow& row) {
  if (row.env_steps < last_env_steps_) throw std::logic_error("metrics: env_steps went backwards");
  last_env_steps_ = row.env_steps;
  out_ << format_metrics_row(row) << '\n';
  out_.flush();
}

std::vector<MetricsRow> read_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open metrics file " + path);
  std::vector<MetricsRow> rows;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    rows.push_back(parse_metrics_row(line));
  }
  return rows;
}

}  // namespace macpo
