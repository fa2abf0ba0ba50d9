#include "macpo/harness/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "macpo/harness/compare.hpp"
#include "macpo/harness/presets.hpp"
#include "macpo/harness/runner.hpp"
#include "macpo/harness/verify.hpp"
#include "macpo/nn/checkpoint.hpp"

namespace macpo::cli {

namespace {

struct ConfigArgs {
  std::string config_path;
  std::string preset_name;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void add_config_flags(CLI::App* cmd, ConfigArgs& a) {
  cmd->add_option("--config", a.config_path, "Run configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--preset", a.preset_name, "Built-in configuration")
      ->check(CLI::IsMember(preset_names()));
  cmd->add_option("--set", a.overrides, "Override one key, section.key=value (repeatable)");
  cmd->add_option_function<std::uint64_t>(
      "--seed",
      [&a](std::uint64_t s) {
        a.seed = s;
        a.seed_set = true;
      },
      "Run seed");
}

RunConfig build_config(const ConfigArgs& a) {
  RunConfig cfg;
  if (!a.config_path.empty() && !a.preset_name.empty())
    throw ConfigError("--config and --preset are mutually exclusive");
  if (!a.config_path.empty())
    cfg = load_config(a.config_path);
  else if (!a.preset_name.empty())
    cfg = preset(a.preset_name);
  else
    cfg = scaled_config(0.0);
  for (const auto& o : a.overrides) apply_override(cfg, o);
  if (a.seed_set) cfg.seed = a.seed;
  cfg.validate();
  return cfg;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-agent prioritized replay lab"};
  app.require_subcommand(1);

  ConfigArgs train_args;
  std::string train_out;
  bool train_det = false, train_render = false, train_quiet = false;
  auto* train = app.add_subcommand("train", "Train one configuration");
  add_config_flags(train, train_args);
  train->add_option("--out", train_out, "Output directory");
  train->add_flag("--deterministic", train_det, "Serial kernels, reproducible CSV (wall time recorded as 0)");
  train->add_flag("--render", train_render, "Write ASCII frames of the first eval episode to render.txt");
  train->add_flag("--quiet", train_quiet, "No progress lines");

  std::string ckpt_path;
  int eval_episodes = 32;
  std::uint64_t eval_seed = 1;
  bool eval_render = false;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint greedily");
  eval->add_option("--checkpoint", ckpt_path, "Checkpoint file")->required();
  eval->add_option("--episodes", eval_episodes, "Number of episodes")->check(CLI::PositiveNumber);
  eval->add_option("--seed", eval_seed, "Evaluation seed");
  eval->add_flag("--render", eval_render, "Print ASCII frames of the first episode");

  std::string filter, verify_out;
  bool verify_long = false, verify_list = false;
  auto* verify = app.add_subcommand("verify", "Run verification suites");
  verify->add_option("--filter", filter, "Comma-separated suite name substrings");
  verify->add_flag("--long", verify_long, "Include multi-hour training suites");
  verify->add_flag("--list", verify_list, "List suites and exit");
  verify->add_option("--out", verify_out, "Scratch directory");

  ConfigArgs cmp_args;
  std::string schemes_arg = "macpo,uniform", seeds_arg = "1,2,3", cmp_out;
  bool cmp_det = false;
  auto* compare = app.add_subcommand("compare", "Train schemes x seeds and tabulate final rewards");
  add_config_flags(compare, cmp_args);
  compare->add_option("--schemes", schemes_arg, "Comma-separated scheme names");
  compare->add_option("--seeds", seeds_arg, "Comma-separated seeds");
  compare->add_option("--out", cmp_out, "Output directory");
  compare->add_flag("--deterministic", cmp_det, "Serial kernels, reproducible CSVs");

  ConfigArgs show_args;
  auto* show = app.add_subcommand("config", "Print the canonical form of a configuration");
  add_config_flags(show, show_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (*train) {
      const RunConfig cfg = build_config(train_args);
      TrainOptions opt;
      opt.out_dir = train_out.empty() ? "runs/" + to_string(cfg.scheme) + "_seed" + std::to_string(cfg.seed) : train_out;
      opt.deterministic = train_det;
      opt.render = train_render;
      if (!train_quiet) opt.log = &out;
      const TrainResult r = run_training(cfg, opt);
      out << "done env_steps=" << r.env_steps << " episodes=" << r.episodes << " train_steps=" << r.train_steps
          << " final_reward=" << r.final_reward << " metrics=" << opt.out_dir << "/metrics.csv\n";
      return 0;
    }
    if (*show) {
      out << serialize_config(build_config(show_args));
      return 0;
    }
    if (*eval) {
      if (!std::filesystem::exists(ckpt_path)) {
        err << "error: checkpoint not found: " << ckpt_path << '\n';
        return 1;
      }
      RunConfig cfg;
      const Learner learner = learner_from_checkpoint(nn::load_checkpoint(ckpt_path), &cfg);
      const EvalResult r = evaluate_policy(cfg.env, learner.agent(), eval_episodes, stream_rng(eval_seed, Stream::final_eval),
                                           false, eval_render ? &out : nullptr);
      out << "# epsilon=0 episodes=" << eval_episodes << " seed=" << eval_seed << '\n';
      for (std::size_t i = 0; i < r.rewards.size(); ++i) out << "episode " << i << ' ' << r.rewards[i] << '\n';
      out << "mean_reward " << r.mean_reward << '\n';
      return 0;
    }
    if (*verify) {
      VerifyOptions opt;
      opt.filter = filter;
      opt.include_long = verify_long;
      opt.work_dir = verify_out;
      if (verify_list) {
        for (const auto& s : verify_suites())
          out << s.name << (s.long_running ? " [long]" : "") << "  " << s.description << '\n';
        return 0;
      }
      bool all = true;
      std::size_t ran = 0;
      for (const auto& s : verify_suites()) {
        if (!suite_selected(s, opt)) continue;
        const SuiteResult r = run_suite(s, opt);
        print_suite_line(out, r);
        all = all && r.passed;
        ++ran;
      }
      if (ran == 0) {
        err << "error: no suite matches filter '" << filter << "'\n";
        return 2;
      }
      out << (all ? "ALL PASS" : "FAIL") << " (" << ran << " suites)\n";
      return all ? 0 : 1;
    }
    if (*compare) {
      const RunConfig cfg = build_config(cmp_args);
      std::vector<Scheme> schemes;
      for (const auto& s : split_list(schemes_arg)) schemes.push_back(scheme_from_string(s));
      std::vector<std::uint64_t> seeds;
      for (const auto& s : split_list(seeds_arg)) seeds.push_back(std::stoull(s));
      if (schemes.empty() || seeds.empty()) {
        err << "error: compare needs at least one scheme and one seed\n";
        return 2;
      }
      TrainOptions opt;
      opt.out_dir = cmp_out;
      opt.deterministic = cmp_det;
      const CompareResult r = run_compare(cfg, schemes, seeds, opt);
      print_compare_table(out, r);
      return 0;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"macpo"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace macpo::cli
