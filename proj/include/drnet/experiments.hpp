#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "drnet/dataset.hpp"
#include "drnet/network.hpp"

namespace drnet {

enum class Study { kDimSweep, kDataSizeSweep, kCoverage, kOtherTasks };

std::string study_name(Study study);

/// One experiment grid: settings × three architectures × `reps` seeds.
/// Within one (setting, seed) all three architectures train on the identical
/// split, so comparisons are head-to-head.
struct ExperimentPlan {
  Study study = Study::kDimSweep;
  std::vector<std::size_t> dims = {2, 3, 5, 10, 30, 100};
  std::vector<double> fractions = {0.01, 0.02, 0.05, 0.10, 0.20, 0.30, 0.40, 0.50};
  std::vector<TaskKind> tasks = {TaskKind::kNumericGe, TaskKind::kDigitSumGe3,
                                 TaskKind::kDigitReversal};
  std::size_t datasize_n = 10;        // dimensionality of the data-size sweep
  std::size_t task_dataset_size = 64;  // balanced size for the extra tasks (n=3)
  std::size_t reps = 10;
  std::uint64_t base_seed = 42;
  TrainConfig train;
  std::size_t workers = 1;
};

/// Calibrated training defaults for the equality-based studies (dimension
/// sweep, data-size sweep, coverage): 20 epochs of full-batch Adam with a
/// large epsilon, i.e. few but strong magnitude-driven steps. This is the
/// regime in which the plain FFNN keeps failing to generalise equality while
/// the DR architectures succeed.
TrainConfig equality_train_defaults();

/// Calibrated training defaults for the extra classification tasks, which
/// need many more steps than 20 full-batch updates provide: per-sample
/// updates at a moderate learning rate.
TrainConfig task_train_defaults();

/// Plan with the study set and the calibrated training defaults applied.
ExperimentPlan default_plan(Study study);

struct SeedOutcome {
  std::uint64_t run_seed = 0;  // base_seed + run index (dataset stream)
  RunResult result;
};

struct CellSummary {
  Study study = Study::kDimSweep;
  std::string setting;       // "n=10", "fraction=0.1", "variant=a", "task=numeric_ge"
  Fusion architecture = Fusion::kPlain;
  std::vector<SeedOutcome> runs;
  std::size_t completed = 0;  // runs that did not diverge
  double mean_accuracy = 0.0;
  double min_accuracy = 0.0;
  double max_accuracy = 0.0;
  std::string note;
};

std::vector<CellSummary> run_dim_sweep(const ExperimentPlan& plan);
std::vector<CellSummary> run_datasize_sweep(const ExperimentPlan& plan);
std::vector<CellSummary> run_coverage_study(const ExperimentPlan& plan);
std::vector<CellSummary> run_other_tasks(const ExperimentPlan& plan);
std::vector<CellSummary> run_study(const ExperimentPlan& plan);

/// Canonical (sorted-key) JSON of everything that determines the results.
std::string plan_config_json(const ExperimentPlan& plan);
/// FNV-1a of the canonical config, as 16 hex digits.
std::string plan_config_hash(const ExperimentPlan& plan);

/// CSV: one `# config=` provenance line, a header, then one row per cell.
/// Cells whose every seed failed emit empty accuracies and a note.
std::string results_to_csv(const std::vector<CellSummary>& grid,
                           const ExperimentPlan& plan);
/// Mirrors the CSV rows and adds per-seed detail.
std::string results_to_json(const std::vector<CellSummary>& grid,
                            const ExperimentPlan& plan);
/// Human-readable accuracy table (architectures as columns/rows as in the
/// result tables this harness reproduces).
std::string render_table(const std::vector<CellSummary>& grid);

}  // namespace drnet
