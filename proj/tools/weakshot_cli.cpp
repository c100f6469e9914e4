#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "weakshot/config.hpp"
#include "weakshot/studies.hpp"

namespace {

struct Flags {
  std::string config_path;
  std::string out_dir;
  std::string data_file;
  std::uint64_t seed = 1;
  double noise_ratio = 0.3;
  bool no_weights = false;
  bool no_reg = false;
  bool no_adversarial = false;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config_path, "config file (flat key = value lines)");
  sub->add_option("--seed", f.seed, "master seed; studies then run this seed only");
  sub->add_option("--out", f.out_dir, "output directory");
  sub->add_option("--noise-ratio", f.noise_ratio, "fraction of noisy novel training samples");
  sub->add_flag("--no-weights", f.no_weights, "disable sample weighting");
  sub->add_flag("--no-reg", f.no_reg, "disable graph regularization");
  sub->add_flag("--no-adversarial", f.no_adversarial, "disable adversarial alignment");
}

weakshot::ExperimentConfig resolve_config(const CLI::App* sub, const Flags& f) {
  weakshot::ExperimentConfig cfg;
  if (!f.config_path.empty())
    cfg = weakshot::ExperimentConfig::from_config(weakshot::Config::parse_file(f.config_path));
  // flags override file values
  if (sub->count("--seed")) {
    cfg.train.seed = f.seed;
    cfg.seeds = {f.seed};
  }
  if (sub->count("--out")) cfg.out_dir = f.out_dir;
  if (sub->count("--noise-ratio")) cfg.noise.ratio = f.noise_ratio;
  if (f.no_weights) cfg.train.use_weights = false;
  if (f.no_reg) cfg.train.use_reg = false;
  if (f.no_adversarial) cfg.train.use_adversarial = false;
  if (!f.data_file.empty()) cfg.data_file = f.data_file;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weak-shot classification via pairwise similarity transfer"};
  app.require_subcommand(1);
  Flags f;

  CLI::App* gen = app.add_subcommand("gen-data", "generate a synthetic dataset file");
  add_common(gen, f);
  gen->add_option("--data", f.data_file, "dataset file to write (default <out>/dataset.txt)");

  CLI::App* run = app.add_subcommand("run", "one full pipeline: SimNet, weights, classifier");
  add_common(run, f);
  run->add_option("--data", f.data_file, "pre-generated dataset file to load");

  CLI::App* ablation = app.add_subcommand("ablation", "toggle combinations over all seeds");
  add_common(ablation, f);

  CLI::App* transfer =
      app.add_subcommand("transfer-study", "similarity sources and types, pairs and accuracy");
  add_common(transfer, f);

  CLI::App* scale = app.add_subcommand("scale-study", "base training set scale sweep");
  add_common(scale, f);

  CLI::App* noise = app.add_subcommand("noise-study", "noise ratio sweep, plain CE vs full");
  add_common(noise, f);

  CLI::App* report = app.add_subcommand("report", "consolidate a finished run directory");
  std::string report_dir;
  report->add_option("--out", report_dir, "run directory to report on")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (report->parsed()) return weakshot::cmd_report(report_dir);
    const CLI::App* active = app.get_subcommands().front();
    const weakshot::ExperimentConfig cfg = resolve_config(active, f);
    if (gen->parsed()) return weakshot::cmd_gen_data(cfg);
    if (run->parsed()) return weakshot::cmd_run(cfg);
    if (ablation->parsed()) return weakshot::cmd_ablation(cfg);
    if (transfer->parsed()) return weakshot::cmd_transfer_study(cfg);
    if (scale->parsed()) return weakshot::cmd_scale_study(cfg);
    if (noise->parsed()) return weakshot::cmd_noise_study(cfg);
    std::cerr << "error: no subcommand" << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
}
