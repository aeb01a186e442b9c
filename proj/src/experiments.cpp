#include "drnet/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "drnet/errors.hpp"
#include "json.hpp"

namespace drnet {

namespace {

constexpr Fusion kArchitectures[] = {Fusion::kPlain, Fusion::kEarlyFusion,
                                     Fusion::kMidFusion};

std::string format_fraction(double f) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", f);
  return buf;
}

std::string format_accuracy(double a) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", a);
  return buf;
}

void run_jobs(std::size_t job_count, std::size_t workers,
              const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || job_count <= 1) {
    for (std::size_t i = 0; i < job_count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const std::size_t thread_count = std::min(workers, job_count);
  pool.reserve(thread_count);
  for (std::size_t t = 0; t < thread_count; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < job_count; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

// One (setting, seed) slot holding the three per-architecture results.
struct RunSlot {
  std::uint64_t run_seed = 0;
  RunResult results[3];
  bool failed = false;
  std::string error;
};

RunResult train_architecture(Fusion fusion, std::size_t n, const Dataset& train_ds,
                             const Dataset& test_ds, const TrainConfig& base,
                             std::uint64_t net_seed) {
  NetworkSpec spec;
  spec.fusion = fusion;
  spec.n = n;
  Rng init_rng(net_seed);
  Network net(spec, init_rng);
  TrainConfig cfg = base;
  cfg.seed = net_seed;
  return train(net, train_ds, cfg, &test_ds);
}

void train_all_architectures(RunSlot& slot, std::size_t n, const Dataset& train_ds,
                             const Dataset& test_ds, const TrainConfig& base) {
  for (std::size_t a = 0; a < 3; ++a) {
    const std::uint64_t net_seed = mix_seed(slot.run_seed, 10 + a);
    slot.results[a] =
        train_architecture(kArchitectures[a], n, train_ds, test_ds, base, net_seed);
  }
}

std::vector<CellSummary> aggregate(Study study, const std::vector<std::string>& settings,
                                   const std::vector<std::vector<RunSlot>>& slots) {
  std::vector<CellSummary> grid;
  for (std::size_t s = 0; s < settings.size(); ++s) {
    for (std::size_t a = 0; a < 3; ++a) {
      CellSummary cell;
      cell.study = study;
      cell.setting = settings[s];
      cell.architecture = kArchitectures[a];
      double sum = 0.0;
      double lo = 1.0, hi = 0.0;
      std::size_t diverged = 0, failed = 0;
      for (const auto& slot : slots[s]) {
        SeedOutcome outcome;
        outcome.run_seed = slot.run_seed;
        if (slot.failed) {
          outcome.result.diverged = true;
          outcome.result.note = slot.error;
          ++failed;
        } else {
          outcome.result = slot.results[a];
        }
        if (!outcome.result.diverged) {
          const double acc = outcome.result.test_accuracy;
          sum += acc;
          lo = std::min(lo, acc);
          hi = std::max(hi, acc);
          ++cell.completed;
        } else if (!slot.failed) {
          ++diverged;
        }
        cell.runs.push_back(std::move(outcome));
      }
      if (cell.completed > 0) {
        cell.mean_accuracy = sum / static_cast<double>(cell.completed);
        cell.min_accuracy = lo;
        cell.max_accuracy = hi;
      } else {
        cell.mean_accuracy = cell.min_accuracy = cell.max_accuracy =
            std::numeric_limits<double>::quiet_NaN();
      }
      if (failed > 0)
        cell.note = std::to_string(failed) + " runs failed: " + slots[s].front().error;
      else if (diverged > 0)
        cell.note = std::to_string(diverged) + " runs diverged, excluded from mean";
      if (cell.completed == 0 && cell.note.empty()) cell.note = "no completed runs";
      grid.push_back(std::move(cell));
    }
  }
  return grid;
}

}  // namespace

std::string study_name(Study study) {
  switch (study) {
    case Study::kDimSweep: return "dim_sweep";
    case Study::kDataSizeSweep: return "datasize_sweep";
    case Study::kCoverage: return "coverage";
    case Study::kOtherTasks: return "other_tasks";
  }
  throw ArgumentError("study_name: unknown study");
}

TrainConfig equality_train_defaults() {
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.batch_size = 0;  // full batch
  cfg.adam.alpha = 1.0;
  cfg.adam.epsilon = 1.0;
  cfg.shuffle = true;
  return cfg;
}

TrainConfig task_train_defaults() {
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.batch_size = 1;
  cfg.adam.alpha = 0.03;
  cfg.shuffle = true;
  return cfg;
}

ExperimentPlan default_plan(Study study) {
  ExperimentPlan plan;
  plan.study = study;
  plan.train =
      study == Study::kOtherTasks ? task_train_defaults() : equality_train_defaults();
  return plan;
}

std::vector<CellSummary> run_dim_sweep(const ExperimentPlan& plan) {
  if (plan.dims.empty()) throw ArgumentError("run_dim_sweep: no dimensions given");
  if (plan.reps == 0) throw ArgumentError("run_dim_sweep: reps must be >= 1");

  std::vector<std::string> settings;
  for (std::size_t n : plan.dims) settings.push_back("n=" + std::to_string(n));

  std::vector<std::vector<RunSlot>> slots(plan.dims.size(),
                                          std::vector<RunSlot>(plan.reps));
  run_jobs(plan.dims.size() * plan.reps, plan.workers, [&](std::size_t job) {
    const std::size_t s = job / plan.reps;
    const std::size_t rep = job % plan.reps;
    RunSlot& slot = slots[s][rep];
    slot.run_seed = plan.base_seed + job;
    try {
      Rng data_rng(slot.run_seed);
      Dataset full = generate_equality_dataset(plan.dims[s], data_rng);
      auto [train_ds, test_ds] = stratified_split(full, 0.75, data_rng);
      train_all_architectures(slot, plan.dims[s], train_ds, test_ds, plan.train);
    } catch (const std::exception& e) {
      slot.failed = true;
      slot.error = e.what();
    }
  });
  return aggregate(Study::kDimSweep, settings, slots);
}

std::vector<CellSummary> run_datasize_sweep(const ExperimentPlan& plan) {
  if (plan.fractions.empty()) throw ArgumentError("run_datasize_sweep: no fractions");
  if (plan.reps == 0) throw ArgumentError("run_datasize_sweep: reps must be >= 1");
  for (double f : plan.fractions)
    if (!(f > 0.0 && f <= 0.75))
      throw ArgumentError("run_datasize_sweep: fractions must lie in (0, 0.75]");

  std::vector<std::string> settings;
  for (double f : plan.fractions) settings.push_back("fraction=" + format_fraction(f));

  // One dataset and split per seed, shared by every fraction and architecture;
  // only the training subset varies.
  std::vector<std::vector<RunSlot>> slots(plan.fractions.size(),
                                          std::vector<RunSlot>(plan.reps));
  run_jobs(plan.reps, plan.workers, [&](std::size_t rep) {
    const std::uint64_t run_seed = plan.base_seed + rep;
    try {
      Rng data_rng(run_seed);
      Dataset full = generate_equality_dataset(plan.datasize_n, data_rng);
      auto [train_ds, test_ds] = stratified_split(full, 0.75, data_rng);
      for (std::size_t s = 0; s < plan.fractions.size(); ++s) {
        RunSlot& slot = slots[s][rep];
        slot.run_seed = run_seed;
        Rng sub_rng(mix_seed(run_seed, 100 + s));
        Dataset subset =
            subsample_train(train_ds, plan.fractions[s], full.pairs.size(), sub_rng);
        for (std::size_t a = 0; a < 3; ++a) {
          const std::uint64_t net_seed = mix_seed(run_seed, 1000 + s * 8 + a);
          slot.results[a] = train_architecture(kArchitectures[a], plan.datasize_n,
                                               subset, test_ds, plan.train, net_seed);
        }
      }
    } catch (const std::exception& e) {
      for (std::size_t s = 0; s < plan.fractions.size(); ++s) {
        slots[s][rep].run_seed = run_seed;
        slots[s][rep].failed = true;
        slots[s][rep].error = e.what();
      }
    }
  });
  return aggregate(Study::kDataSizeSweep, settings, slots);
}

std::vector<CellSummary> run_coverage_study(const ExperimentPlan& plan) {
  if (plan.reps == 0) throw ArgumentError("run_coverage_study: reps must be >= 1");
  const std::size_t n = 10;
  const std::vector<std::string> settings = {"variant=a", "variant=b"};
  const CoverageVariant variants[] = {CoverageVariant::kAnyPosition,
                                      CoverageVariant::kBothPositions};

  std::vector<std::vector<RunSlot>> slots(settings.size(),
                                          std::vector<RunSlot>(plan.reps));
  run_jobs(settings.size() * plan.reps, plan.workers, [&](std::size_t job) {
    const std::size_t s = job / plan.reps;
    const std::size_t rep = job % plan.reps;
    RunSlot& slot = slots[s][rep];
    slot.run_seed = plan.base_seed + job;
    try {
      Rng data_rng(slot.run_seed);
      auto [train_ds, test_ds] = build_coverage_dataset(variants[s], n, data_rng);
      train_all_architectures(slot, n, train_ds, test_ds, plan.train);
    } catch (const std::exception& e) {
      slot.failed = true;
      slot.error = e.what();
    }
  });
  return aggregate(Study::kCoverage, settings, slots);
}

std::vector<CellSummary> run_other_tasks(const ExperimentPlan& plan) {
  if (plan.tasks.empty()) throw ArgumentError("run_other_tasks: no tasks given");
  if (plan.reps == 0) throw ArgumentError("run_other_tasks: reps must be >= 1");
  const std::size_t n = 3;

  std::vector<std::string> settings;
  for (TaskKind t : plan.tasks) settings.push_back("task=" + task_name(t));

  std::vector<std::vector<RunSlot>> slots(plan.tasks.size(),
                                          std::vector<RunSlot>(plan.reps));
  run_jobs(plan.tasks.size() * plan.reps, plan.workers, [&](std::size_t job) {
    const std::size_t s = job / plan.reps;
    const std::size_t rep = job % plan.reps;
    RunSlot& slot = slots[s][rep];
    slot.run_seed = plan.base_seed + job;
    try {
      Rng data_rng(slot.run_seed);
      Dataset full =
          generate_task_dataset(plan.tasks[s], n, plan.task_dataset_size, data_rng);
      auto [train_ds, test_ds] = stratified_split(full, 0.75, data_rng);
      train_all_architectures(slot, n, train_ds, test_ds, plan.train);
    } catch (const std::exception& e) {
      slot.failed = true;
      slot.error = e.what();
    }
  });
  return aggregate(Study::kOtherTasks, settings, slots);
}

std::vector<CellSummary> run_study(const ExperimentPlan& plan) {
  switch (plan.study) {
    case Study::kDimSweep: return run_dim_sweep(plan);
    case Study::kDataSizeSweep: return run_datasize_sweep(plan);
    case Study::kCoverage: return run_coverage_study(plan);
    case Study::kOtherTasks: return run_other_tasks(plan);
  }
  throw ArgumentError("run_study: unknown study");
}

std::string plan_config_json(const ExperimentPlan& plan) {
  nlohmann::json cfg;
  cfg["study"] = study_name(plan.study);
  switch (plan.study) {
    case Study::kDimSweep:
      cfg["dims"] = plan.dims;
      break;
    case Study::kDataSizeSweep:
      cfg["fractions"] = plan.fractions;
      cfg["n"] = plan.datasize_n;
      break;
    case Study::kCoverage:
      cfg["variants"] = {"a", "b"};
      break;
    case Study::kOtherTasks: {
      std::vector<std::string> names;
      for (TaskKind t : plan.tasks) names.push_back(task_name(t));
      cfg["tasks"] = names;
      cfg["task_dataset_size"] = plan.task_dataset_size;
      break;
    }
  }
  cfg["reps"] = plan.reps;
  cfg["base_seed"] = plan.base_seed;
  cfg["train"] = {{"epochs", plan.train.epochs},
                  {"batch_size", plan.train.batch_size},
                  {"alpha", plan.train.adam.alpha},
                  {"beta1", plan.train.adam.beta1},
                  {"beta2", plan.train.adam.beta2},
                  {"epsilon", plan.train.adam.epsilon},
                  {"shuffle", plan.train.shuffle}};
  return cfg.dump();  // nlohmann objects iterate in sorted key order
}

std::string plan_config_hash(const ExperimentPlan& plan) {
  const std::string canonical = plan_config_json(plan);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::string results_to_csv(const std::vector<CellSummary>& grid,
                           const ExperimentPlan& plan) {
  std::ostringstream out;
  out << "# config=" << plan_config_json(plan) << "\n";
  out << "study,setting,architecture,seed_count,mean_acc,min_acc,max_acc,epochs,"
         "config_hash,note\n";
  const std::string hash = plan_config_hash(plan);
  for (const auto& cell : grid) {
    out << study_name(cell.study) << "," << cell.setting << ","
        << fusion_name(cell.architecture) << "," << cell.completed << ",";
    if (cell.completed > 0) {
      out << format_accuracy(cell.mean_accuracy) << ","
          << format_accuracy(cell.min_accuracy) << ","
          << format_accuracy(cell.max_accuracy) << ",";
    } else {
      out << ",,,";
    }
    out << plan.train.epochs << "," << hash << "," << cell.note << "\n";
  }
  return out.str();
}

std::string results_to_json(const std::vector<CellSummary>& grid,
                            const ExperimentPlan& plan) {
  nlohmann::json doc;
  doc["config"] = nlohmann::json::parse(plan_config_json(plan));
  doc["config_hash"] = plan_config_hash(plan);
  auto rows = nlohmann::json::array();
  for (const auto& cell : grid) {
    nlohmann::json row;
    row["study"] = study_name(cell.study);
    row["setting"] = cell.setting;
    row["architecture"] = fusion_name(cell.architecture);
    row["seed_count"] = cell.completed;
    if (cell.completed > 0) {
      row["mean_acc"] = cell.mean_accuracy;
      row["min_acc"] = cell.min_accuracy;
      row["max_acc"] = cell.max_accuracy;
    } else {
      row["mean_acc"] = nullptr;
      row["min_acc"] = nullptr;
      row["max_acc"] = nullptr;
    }
    row["epochs"] = plan.train.epochs;
    if (!cell.note.empty()) row["note"] = cell.note;
    auto runs = nlohmann::json::array();
    for (const auto& outcome : cell.runs) {
      nlohmann::json r;
      r["run_seed"] = outcome.run_seed;
      r["net_seed"] = outcome.result.seed;
      r["diverged"] = outcome.result.diverged;
      if (!outcome.result.diverged) {
        r["train_acc"] = outcome.result.train_accuracy;
        r["test_acc"] = outcome.result.test_accuracy;
        if (!outcome.result.epoch_losses.empty())
          r["final_loss"] = outcome.result.epoch_losses.back();
      }
      if (!outcome.result.note.empty()) r["note"] = outcome.result.note;
      r["duration_seconds"] = outcome.result.duration_seconds;
      r["init_scheme"] = outcome.result.init_scheme;
      runs.push_back(std::move(r));
    }
    row["runs"] = std::move(runs);
    rows.push_back(std::move(row));
  }
  doc["rows"] = std::move(rows);
  return doc.dump(2);
}

std::string render_table(const std::vector<CellSummary>& grid) {
  // Settings as rows, the three architectures as columns.
  std::vector<std::string> settings;
  std::map<std::string, std::map<std::string, std::string>> cells;
  for (const auto& cell : grid) {
    if (cells.find(cell.setting) == cells.end()) settings.push_back(cell.setting);
    char buf[32];
    if (cell.completed > 0)
      std::snprintf(buf, sizeof(buf), "%5.1f%%", 100.0 * cell.mean_accuracy);
    else
      std::snprintf(buf, sizeof(buf), "   n/a");
    cells[cell.setting][fusion_name(cell.architecture)] = buf;
  }

  std::size_t width = 14;
  for (const auto& s : settings) width = std::max(width, s.size() + 2);

  std::ostringstream out;
  out << std::string(width, ' ') << " | Plain FFNN | Early Fusion | Mid Fusion\n";
  out << std::string(width, '-') << "-+------------+--------------+-----------\n";
  for (const auto& s : settings) {
    out << s << std::string(width - s.size(), ' ') << " |     " << cells[s]["plain"]
        << " |       " << cells[s]["early"] << " |     " << cells[s]["mid"] << "\n";
  }
  return out.str();
}

}  // namespace drnet
