// drnet command line: dataset generation, training, evaluation, gradient
// checking and full reproduction of the relation-learning studies.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "drnet/errors.hpp"
#include "drnet/experiments.hpp"
#include "drnet/gradcheck.hpp"
#include "drnet/network.hpp"
#include "json.hpp"

namespace {

// Exit codes: 0 success, 2 usage/domain error, 3 I/O error,
// 4 numeric divergence or partial experiment failure.
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

std::string default_out_dir() {
  if (const char* env = std::getenv("DRNET_OUT_DIR")) return env;
  return "results";
}

nlohmann::json train_config_to_json(const drnet::TrainConfig& cfg) {
  return {{"epochs", cfg.epochs},
          {"batch_size", cfg.batch_size},
          {"alpha", cfg.adam.alpha},
          {"beta1", cfg.adam.beta1},
          {"beta2", cfg.adam.beta2},
          {"epsilon", cfg.adam.epsilon},
          {"seed", cfg.seed},
          {"shuffle", cfg.shuffle}};
}

struct TrainFlags {
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  bool full_batch = false;
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  bool no_shuffle = false;

  drnet::TrainConfig to_config() const {
    drnet::TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.batch_size = full_batch ? 0 : batch_size;
    cfg.adam = {alpha, beta1, beta2, epsilon};
    cfg.seed = seed;
    cfg.shuffle = !no_shuffle;
    return cfg;
  }
};

void add_train_flags(CLI::App* cmd, TrainFlags& flags) {
  cmd->add_option("--epochs", flags.epochs, "Training epochs");
  cmd->add_option("--batch", flags.batch_size, "Mini-batch size");
  cmd->add_flag("--full-batch", flags.full_batch, "One batch per epoch");
  cmd->add_option("--lr", flags.alpha, "Adam learning rate");
  cmd->add_option("--beta1", flags.beta1, "Adam beta1");
  cmd->add_option("--beta2", flags.beta2, "Adam beta2");
  cmd->add_option("--adam-eps", flags.epsilon, "Adam epsilon");
  cmd->add_option("--seed", flags.seed, "Seed for init and shuffling");
  cmd->add_flag("--no-shuffle", flags.no_shuffle, "Disable per-epoch shuffling");
}

int cmd_gen_data(const std::string& task_name_arg, std::size_t n, std::size_t size,
                 std::uint64_t seed, const std::string& out_path) {
  const drnet::TaskKind task = drnet::task_from_name(task_name_arg);
  drnet::Rng rng(seed);
  drnet::Dataset ds = task == drnet::TaskKind::kEquality && size == 0
                          ? drnet::generate_equality_dataset(n, rng)
                          : drnet::generate_task_dataset(task, n, size == 0 ? 64 : size, rng);
  drnet::write_dataset_file(ds, out_path);
  nlohmann::json summary{{"task", drnet::task_name(ds.task)},
                         {"n", ds.n},
                         {"seed", ds.seed},
                         {"pairs", ds.pairs.size()},
                         {"positives", ds.count(drnet::Label::kPositive)},
                         {"negatives", ds.count(drnet::Label::kNegative)},
                         {"path", out_path}};
  std::cout << summary.dump() << "\n";
  return 0;
}

int cmd_train(const std::string& data_path, const std::string& arch,
              const TrainFlags& flags, double train_fraction,
              const std::string& model_out) {
  const drnet::Dataset full = drnet::read_dataset_file(data_path);
  const drnet::TrainConfig cfg = flags.to_config();

  drnet::Rng split_rng(drnet::mix_seed(cfg.seed, 0xDA7A));
  auto [train_ds, test_ds] = drnet::stratified_split(full, train_fraction, split_rng);

  drnet::NetworkSpec spec;
  spec.fusion = drnet::fusion_from_name(arch);
  spec.n = full.n;
  drnet::Rng init_rng(cfg.seed);
  drnet::Network net(spec, init_rng);

  drnet::RunResult result = drnet::train(net, train_ds, cfg, &test_ds);

  nlohmann::json metrics{{"arch", arch},
                         {"task", drnet::task_name(full.task)},
                         {"n", full.n},
                         {"train_pairs", train_ds.pairs.size()},
                         {"test_pairs", test_ds.pairs.size()},
                         {"diverged", result.diverged},
                         {"config", train_config_to_json(cfg)}};
  if (result.diverged) {
    metrics["note"] = result.note;
  } else {
    metrics["train_accuracy"] = result.train_accuracy;
    metrics["test_accuracy"] = result.test_accuracy;
    if (!result.epoch_losses.empty()) metrics["final_loss"] = result.epoch_losses.back();
  }
  std::cout << metrics.dump() << "\n";

  if (!model_out.empty()) {
    drnet::ModelMeta meta;
    meta.seed = cfg.seed;
    meta.init_scheme = net.init_scheme();
    meta.config_json = train_config_to_json(cfg).dump();
    drnet::save_model(net, meta, model_out);
  }
  return result.diverged ? kExitNumeric : 0;
}

int cmd_eval(const std::string& model_path, const std::string& data_path) {
  auto [net, meta] = drnet::load_model(model_path);
  drnet::Dataset ds = drnet::read_dataset_file(data_path);
  const double acc = drnet::evaluate(net, ds);
  nlohmann::json metrics{{"model", model_path},
                         {"data", data_path},
                         {"pairs", ds.pairs.size()},
                         {"accuracy", acc}};
  std::cout << metrics.dump() << "\n";
  return 0;
}

int cmd_gradcheck(const std::string& arch, std::size_t n, std::uint64_t seed,
                  double epsilon) {
  drnet::NetworkSpec spec;
  spec.fusion = drnet::fusion_from_name(arch);
  spec.n = n;
  drnet::Rng rng(seed);
  drnet::Network net(spec, rng);

  // An unequal pair exercises both DR subgradient branches.
  drnet::Rng data_rng(drnet::mix_seed(seed, 0x6C));
  drnet::Dataset ds = drnet::generate_equality_dataset(n, data_rng);
  drnet::BinaryPair sample;
  for (const auto& p : ds.pairs)
    if (p.label == drnet::Label::kNegative) {
      sample = p;
      break;
    }

  const auto result = drnet::gradient_check(net, sample, epsilon);
  const bool pass = result.max_rel_error < 1e-4;
  nlohmann::json report{{"arch", arch},
                        {"n", n},
                        {"epsilon", epsilon},
                        {"max_rel_error", result.max_rel_error},
                        {"params_checked", result.params_checked},
                        {"params_skipped", result.params_skipped},
                        {"pass", pass}};
  std::cout << report.dump() << "\n";
  std::cerr << (pass ? "PASS" : "FAIL") << ": max relative error "
            << result.max_rel_error << " vs threshold 1e-4\n";
  return pass ? 0 : kExitNumeric;
}

void apply_plan_file(drnet::ExperimentPlan& plan, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw drnet::IoError("cannot open plan file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw drnet::ArgumentError("plan parse: " + std::string(e.what()));
  }
  if (doc.contains("dims")) plan.dims = doc["dims"].get<std::vector<std::size_t>>();
  if (doc.contains("fractions"))
    plan.fractions = doc["fractions"].get<std::vector<double>>();
  if (doc.contains("tasks")) {
    plan.tasks.clear();
    for (const auto& name : doc["tasks"])
      plan.tasks.push_back(drnet::task_from_name(name.get<std::string>()));
  }
  if (doc.contains("task_dataset_size"))
    plan.task_dataset_size = doc["task_dataset_size"].get<std::size_t>();
  if (doc.contains("reps")) plan.reps = doc["reps"].get<std::size_t>();
  if (doc.contains("base_seed")) plan.base_seed = doc["base_seed"].get<std::uint64_t>();
  if (doc.contains("train")) {
    const auto& t = doc["train"];
    if (t.contains("epochs")) plan.train.epochs = t["epochs"].get<std::size_t>();
    if (t.contains("batch_size"))
      plan.train.batch_size = t["batch_size"].get<std::size_t>();
    if (t.contains("alpha")) plan.train.adam.alpha = t["alpha"].get<double>();
    if (t.contains("beta1")) plan.train.adam.beta1 = t["beta1"].get<double>();
    if (t.contains("beta2")) plan.train.adam.beta2 = t["beta2"].get<double>();
    if (t.contains("epsilon")) plan.train.adam.epsilon = t["epsilon"].get<double>();
    if (t.contains("shuffle")) plan.train.shuffle = t["shuffle"].get<bool>();
  }
}

struct ReproduceFlags {
  std::string study;
  std::size_t reps = 10;
  std::uint64_t base_seed = 42;
  std::string out_dir;
  std::size_t workers = 1;
  std::string plan_file;
  bool pretty = false;
  // train overrides; negative/zero sentinel = keep default
  double lr = -1.0;
  long long batch = -1;
  long long epochs = -1;
};

int write_study(drnet::Study study, const ReproduceFlags& flags,
                const std::string& name) {
  drnet::ExperimentPlan plan = drnet::default_plan(study);
  if (!flags.plan_file.empty()) apply_plan_file(plan, flags.plan_file);
  plan.reps = flags.reps;
  plan.base_seed = flags.base_seed;
  plan.workers = flags.workers;
  if (flags.lr > 0) plan.train.adam.alpha = flags.lr;
  if (flags.batch >= 0) plan.train.batch_size = static_cast<std::size_t>(flags.batch);
  if (flags.epochs >= 0) plan.train.epochs = static_cast<std::size_t>(flags.epochs);

  std::vector<drnet::CellSummary> grid;
  if (name == "table2") {
    // Both halves of the combined table: coverage variants, then extra tasks.
    plan.study = drnet::Study::kCoverage;
    grid = drnet::run_coverage_study(plan);
    plan.study = drnet::Study::kOtherTasks;
    auto tail = drnet::run_other_tasks(plan);
    grid.insert(grid.end(), tail.begin(), tail.end());
    plan.study = drnet::Study::kOtherTasks;  // provenance carries the last stage
  } else {
    grid = drnet::run_study(plan);
  }

  std::filesystem::create_directories(flags.out_dir);
  const std::string csv_path = flags.out_dir + "/" + name + ".csv";
  const std::string json_path = flags.out_dir + "/" + name + ".json";
  {
    std::ofstream csv(csv_path);
    if (!csv) throw drnet::IoError("cannot open for writing: " + csv_path);
    csv << drnet::results_to_csv(grid, plan);
  }
  {
    std::ofstream js(json_path);
    if (!js) throw drnet::IoError("cannot open for writing: " + json_path);
    js << drnet::results_to_json(grid, plan) << "\n";
  }

  auto& table_out = flags.pretty ? std::cout : std::cerr;
  table_out << "== " << name << " ==\n" << drnet::render_table(grid);

  std::size_t complete_cells = 0;
  for (const auto& cell : grid)
    if (cell.completed > 0) ++complete_cells;
  nlohmann::json line{{"study", name},
                      {"cells", grid.size()},
                      {"complete_cells", complete_cells},
                      {"csv", csv_path},
                      {"json", json_path}};
  std::cout << line.dump() << "\n";

  // Exit 0 when at least 90% of the cells completed.
  return 10 * complete_cells >= 9 * grid.size() ? 0 : kExitNumeric;
}

int cmd_reproduce(const ReproduceFlags& flags) {
  struct Entry {
    std::string name;
    drnet::Study study;
  };
  std::vector<Entry> entries;
  if (flags.study == "table1") {
    entries.push_back({"table1", drnet::Study::kDimSweep});
  } else if (flags.study == "fig2") {
    entries.push_back({"fig2", drnet::Study::kDataSizeSweep});
  } else if (flags.study == "coverage") {
    entries.push_back({"coverage", drnet::Study::kCoverage});
  } else if (flags.study == "table2") {
    entries.push_back({"table2", drnet::Study::kOtherTasks});
  } else if (flags.study == "all") {
    entries.push_back({"table1", drnet::Study::kDimSweep});
    entries.push_back({"fig2", drnet::Study::kDataSizeSweep});
    entries.push_back({"table2", drnet::Study::kOtherTasks});
    entries.push_back({"coverage", drnet::Study::kCoverage});
  } else {
    throw drnet::ArgumentError("unknown study '" + flags.study +
                               "' (expected table1, fig2, coverage, table2 or all)");
  }

  int status = 0;
  for (const auto& entry : entries)
    status = std::max(status, write_study(entry.study, flags, entry.name));
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Binary-relation learning with differential rectifier units"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate a labelled pair dataset");
  std::string gen_task = "equality";
  std::size_t gen_n = 10;
  std::size_t gen_size = 0;
  std::uint64_t gen_seed = 1;
  std::string gen_out = "dataset.txt";
  gen->add_option("--task", gen_task,
                  "equality | numeric_ge | digit_sum_ge3 | digit_reversal");
  gen->add_option("--n", gen_n, "Vector dimensionality")->check(CLI::Range(2, 1000));
  gen->add_option("--size", gen_size,
                  "Total pairs (even); 0 = natural size for the task");
  gen->add_option("--seed", gen_seed, "Generation seed");
  gen->add_option("--out", gen_out, "Output path");

  // train
  auto* tr = app.add_subcommand("train", "Train one architecture on a dataset file");
  std::string tr_data;
  std::string tr_arch = "mid";
  std::string tr_model_out;
  double tr_fraction = 0.75;
  TrainFlags tr_flags;
  tr->add_option("--data", tr_data, "Dataset file (unsplit)")->required();
  tr->add_option("--arch", tr_arch, "plain | early | mid");
  tr->add_option("--train-frac", tr_fraction, "Stratified train fraction");
  tr->add_option("--model-out", tr_model_out, "Write trained model JSON here");
  add_train_flags(tr, tr_flags);

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a saved model on a dataset file");
  std::string ev_model, ev_data;
  ev->add_option("--model", ev_model, "Model JSON path")->required();
  ev->add_option("--data", ev_data, "Dataset file")->required();

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck",
                                "Compare backprop against finite differences");
  std::string gc_arch = "mid";
  std::size_t gc_n = 10;
  std::uint64_t gc_seed = 0;
  double gc_eps = 1e-5;
  gc->add_option("--arch", gc_arch, "plain | early | mid");
  gc->add_option("--n", gc_n, "Vector dimensionality")->check(CLI::Range(2, 1000));
  gc->add_option("--seed", gc_seed, "Init seed");
  gc->add_option("--epsilon", gc_eps, "Finite-difference step")
      ->check(CLI::Range(1e-7, 1e-3));

  // reproduce
  auto* rp = app.add_subcommand("reproduce", "Run a full study and emit CSV/JSON");
  ReproduceFlags rp_flags;
  rp_flags.out_dir = default_out_dir();
  rp->add_option("study", rp_flags.study, "table1 | fig2 | coverage | table2 | all")
      ->required();
  rp->add_option("--reps", rp_flags.reps, "Simulations per configuration");
  rp->add_option("--seed", rp_flags.base_seed, "Base seed");
  rp->add_option("--out-dir", rp_flags.out_dir,
                 "Output directory (default $DRNET_OUT_DIR or ./results)");
  rp->add_option("--workers", rp_flags.workers, "Parallel worker threads");
  rp->add_option("--plan", rp_flags.plan_file, "JSON plan file with overrides");
  rp->add_flag("--pretty", rp_flags.pretty, "Print tables to stdout");
  rp->add_option("--lr", rp_flags.lr, "Override learning rate");
  rp->add_option("--batch", rp_flags.batch, "Override batch size (0 = full batch)");
  rp->add_option("--epochs", rp_flags.epochs, "Override epoch count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exit 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(gen_task, gen_n, gen_size, gen_seed, gen_out);
    if (tr->parsed()) return cmd_train(tr_data, tr_arch, tr_flags, tr_fraction, tr_model_out);
    if (ev->parsed()) return cmd_eval(ev_model, ev_data);
    if (gc->parsed()) return cmd_gradcheck(gc_arch, gc_n, gc_seed, gc_eps);
    if (rp->parsed()) return cmd_reproduce(rp_flags);
  } catch (const drnet::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const drnet::DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
