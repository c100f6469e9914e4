#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "weakshot/csv.hpp"

namespace fs = std::filesystem;

namespace {

const char* kTinyConfig =
    "data.base_categories = 3\n"
    "data.novel_categories = 2\n"
    "data.dim = 8\n"
    "data.base_train_per_category = 12\n"
    "data.novel_train_per_category = 16\n"
    "data.test_per_category = 8\n"
    "data.superclusters = 2\n"
    "data.intra_std = 0.4\n"
    "data.inter_std = 1\n"
    "data.supercluster_std = 2\n"
    "noise.ratio = 0.25\n"
    "seed = 1\n"
    "seeds = 1\n"
    "train.sim_cm = 3\n"
    "train.sim_batch = 9\n"
    "train.sim_epochs = 4\n"
    "train.sim_pretrain_epochs = 2\n"
    "train.sim_embed_dim = 8\n"
    "train.sim_relation_dim = 12\n"
    "train.disc_hidden = 8\n"
    "train.cls_lr = 0.02\n"
    "train.cls_batch = 16\n"
    "train.cls_epochs = 6\n"
    "train.cls_embed_dim = 16\n"
    "train.eval_batches = 5\n"
    "study.noise_ratios = 0.1, 0.3\n"
    "study.scale_categories = 2, 3\n"
    "study.scale_images = 6, 12\n";

struct Workspace {
  fs::path root;
  Workspace() {
    root = fs::temp_directory_path() / ("wk_cli_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~Workspace() { fs::remove_all(root); }

  std::string path(const std::string& name) const { return (root / name).string(); }

  std::string write_text(const std::string& name, const std::string& text) const {
    const std::string p = path(name);
    std::ofstream f(p);
    f << text;
    return p;
  }

  std::string write_config(const std::string& extra = "") const {
    return write_text("exp.cfg", std::string(kTinyConfig) + extra);
  }
};

int run_cli(const std::string& args) {
  const std::string cmd = std::string(WEAKSHOT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return rc == -1 ? -1 : WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("gen-data writes a byte-stable dataset") {
  Workspace ws;
  const std::string cfg = ws.write_config();
  REQUIRE(run_cli("gen-data --config " + cfg + " --out " + ws.path("a")) == 0);
  REQUIRE(run_cli("gen-data --config " + cfg + " --out " + ws.path("b")) == 0);

  const std::string a = slurp(ws.path("a") + "/dataset.txt");
  const std::string b = slurp(ws.path("b") + "/dataset.txt");
  REQUIRE_FALSE(a.empty());
  CHECK(a == b);

  REQUIRE(run_cli("gen-data --config " + cfg + " --out " + ws.path("c") + " --seed 2") == 0);
  CHECK(slurp(ws.path("c") + "/dataset.txt") != a);
}

TEST_CASE("run emits a reproducible experiment directory") {
  Workspace ws;
  const std::string cfg = ws.write_config();
  REQUIRE(run_cli("run --config " + cfg + " --out " + ws.path("r1")) == 0);

  for (const char* name : {"config.txt", "dataset.txt", "sim_log.csv", "cls_log.csv",
                           "weights.csv", "metrics.csv", "simnet.ckpt", "classifier.ckpt"})
    CHECK(fs::exists(ws.path("r1") + "/" + std::string(name)));

  const auto metrics = weakshot::read_csv(ws.path("r1") + "/metrics.csv");
  REQUIRE(metrics.size() == 2);
  CHECK(metrics[0].size() == metrics[1].size());
  CHECK(metrics[0][0] == "variant");
  CHECK(metrics[1][0] == "run");

  // Rerunning from the emitted config reproduces every metric; only the
  // trailing config hash may differ, since it covers the output directory.
  REQUIRE(run_cli("run --config " + ws.path("r1") + "/config.txt --out " + ws.path("r2")) == 0);
  const auto again = weakshot::read_csv(ws.path("r2") + "/metrics.csv");
  REQUIRE(again.size() == 2);
  REQUIRE(again[1].size() == metrics[1].size());
  for (std::size_t c = 0; c + 1 < metrics[1].size(); ++c) CHECK(again[1][c] == metrics[1][c]);
}

TEST_CASE("run accepts a pre-generated dataset") {
  Workspace ws;
  const std::string cfg = ws.write_config();
  REQUIRE(run_cli("gen-data --config " + cfg + " --out " + ws.path("data")) == 0);
  REQUIRE(run_cli("run --config " + cfg + " --data " + ws.path("data") + "/dataset.txt --out " +
                  ws.path("r")) == 0);
  CHECK(slurp(ws.path("r") + "/dataset.txt") == slurp(ws.path("data") + "/dataset.txt"));
}

TEST_CASE("report consolidates a run directory") {
  Workspace ws;
  const std::string cfg = ws.write_config();
  REQUIRE(run_cli("run --config " + cfg + " --out " + ws.path("r")) == 0);
  REQUIRE(run_cli("report --out " + ws.path("r")) == 0);

  for (const char* name : {"weight_diagnostics.csv", "learning_curves.svg", "loss_curves.svg",
                           "sim_curves.svg", "report_index.csv"})
    CHECK(fs::exists(ws.path("r") + "/" + std::string(name)));

  const auto diag = weakshot::read_csv(ws.path("r") + "/weight_diagnostics.csv");
  REQUIRE(diag.size() == 3);  // header + one row per novel category
  CHECK(diag[0][0] == "category");
}

TEST_CASE("failures exit nonzero") {
  Workspace ws;
  CHECK(run_cli("report --out " + ws.path("missing")) == 1);

  const std::string bad = ws.write_config("train.sim_epochz = 3\n");
  CHECK(run_cli("run --config " + bad + " --out " + ws.path("r")) == 1);

  std::string broken = kTinyConfig;
  broken.replace(broken.find("data.intra_std = 0.4"), 20, "data.intra_std = 2.0");
  const std::string invalid = ws.write_text("broken.cfg", broken);
  CHECK(run_cli("gen-data --config " + invalid + " --out " + ws.path("g")) == 1);

  CHECK(run_cli("definitely-not-a-subcommand") != 0);
  CHECK(run_cli("run --config " + ws.path("nope.cfg") + " --out " + ws.path("r2")) == 1);
}

TEST_CASE("ablation covers every toggle combination") {
  Workspace ws;
  const std::string cfg = ws.write_config();
  REQUIRE(run_cli("ablation --config " + cfg + " --out " + ws.path("abl")) == 0);

  const auto rows = weakshot::read_csv(ws.path("abl") + "/ablation.csv");
  REQUIRE(rows.size() == 8);  // header + 7 variants on the single seed
  const auto summary = weakshot::read_csv(ws.path("abl") + "/ablation_summary.csv");
  REQUIRE(summary.size() == 8);
  CHECK(summary[1][0] == "Cls");
  CHECK(summary[7][0] == "Ad+W+R");
}
