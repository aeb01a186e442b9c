// Acceptance suite: drives the full reproduction studies and checks each
// gate at its stated tolerance, printing one PASS/FAIL line per criterion.
//
// Usage: drnet_acceptance [path-to-drnet-cli]
// The CLI path is needed for the determinism and budget criteria (9, 10).

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "drnet/dataset.hpp"
#include "drnet/errors.hpp"
#include "drnet/experiments.hpp"
#include "drnet/gradcheck.hpp"
#include "drnet/network.hpp"

namespace fs = std::filesystem;
using namespace drnet;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& description,
            const std::string& detail) {
  std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion,
              description.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const auto start = clock::now();
  return std::chrono::duration<double>(clock::now() - start).count();
}

// Grid lookup keyed by (setting, architecture).
struct GridIndex {
  std::map<std::pair<std::string, std::string>, const CellSummary*> cells;

  explicit GridIndex(const std::vector<CellSummary>& grid) {
    for (const auto& cell : grid)
      cells[{cell.setting, fusion_name(cell.architecture)}] = &cell;
  }
  const CellSummary& at(const std::string& setting, const std::string& arch) const {
    auto it = cells.find({setting, arch});
    if (it == cells.end()) throw std::runtime_error("missing cell " + setting);
    return *it->second;
  }
};

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", 100.0 * v);
  return buf;
}

int run_command(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Independent labelling rule used only by criterion 8; works on the numeric
// value of the bit strings instead of the vectors.
Label reference_label(TaskKind task, const BinaryPair& p) {
  const std::string a = bits_to_string(p.vec1);
  const std::string b = bits_to_string(p.vec2);
  bool positive = false;
  switch (task) {
    case TaskKind::kEquality: positive = a == b; break;
    case TaskKind::kNumericGe:
      positive = std::stoll(a, nullptr, 2) >= std::stoll(b, nullptr, 2);
      break;
    case TaskKind::kDigitSumGe3:
      positive = std::count(a.begin(), a.end(), '1') +
                     std::count(b.begin(), b.end(), '1') >= 3;
      break;
    case TaskKind::kDigitReversal:
      positive = std::string(a.rbegin(), a.rend()) == b;
      break;
  }
  return positive ? Label::kPositive : Label::kNegative;
}

void check_sanity_floor(const std::vector<CellSummary>& grid, bool& ok,
                        std::string& detail) {
  for (const auto& cell : grid) {
    if (cell.completed == 0) continue;
    if (cell.mean_accuracy < 0.40) {
      ok = false;
      detail = cell.setting + "/" + fusion_name(cell.architecture) + " mean " +
               pct(cell.mean_accuracy) + " below the 40% floor";
      return;
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  const fs::path work_dir = fs::temp_directory_path() / "drnet_acceptance";
  fs::remove_all(work_dir);
  fs::create_directories(work_dir);

  std::printf("== acceptance suite ==\n");

  // ---- dimensionality sweep (criteria 1-3) -------------------------------
  const double t_table1 = now_seconds();
  ExperimentPlan dim_plan = default_plan(Study::kDimSweep);
  auto dim_grid = run_dim_sweep(dim_plan);
  const double table1_seconds = now_seconds() - t_table1;
  GridIndex dims(dim_grid);

  {
    bool pass = true;
    std::string detail;
    for (std::size_t n : dim_plan.dims) {
      const auto& cell = dims.at("n=" + std::to_string(n), "mid");
      if (cell.completed < dim_plan.reps || cell.mean_accuracy < 0.99 ||
          cell.min_accuracy < 0.95) {
        pass = false;
        detail += " n=" + std::to_string(n) + " mean=" + pct(cell.mean_accuracy) +
                  " min=" + pct(cell.min_accuracy);
      }
    }
    if (pass) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "all 6 cells mean>=99%%, min>=95%%; %.0fs",
                    table1_seconds);
      detail = buf;
    }
    report(1, pass && table1_seconds < 600.0,
           "Mid Fusion solves equality at every dimensionality", detail);
  }

  {
    bool pass = true;
    std::string detail;
    for (std::size_t n : {2, 3, 5, 10}) {
      const auto& cell = dims.at("n=" + std::to_string(n), "plain");
      if (cell.mean_accuracy > 0.85) {
        pass = false;
        detail += " n=" + std::to_string(n) + " mean=" + pct(cell.mean_accuracy);
      }
    }
    const auto& n100 = dims.at("n=100", "plain");
    if (n100.mean_accuracy > 0.95) {
      pass = false;
      detail += " n=100 mean=" + pct(n100.mean_accuracy);
    }
    if (pass)
      detail = "plain means: n=2 " + pct(dims.at("n=2", "plain").mean_accuracy) +
               ", n=10 " + pct(dims.at("n=10", "plain").mean_accuracy) + ", n=100 " +
               pct(n100.mean_accuracy);
    report(2, pass, "plain FFNN fails to generalise equality", detail);
  }

  {
    int violations = 0;
    std::string detail;
    for (std::size_t n : dim_plan.dims) {
      const std::string setting = "n=" + std::to_string(n);
      const double plain = dims.at(setting, "plain").mean_accuracy;
      const double early = dims.at(setting, "early").mean_accuracy;
      const double mid = dims.at(setting, "mid").mean_accuracy;
      if (mid < early) {
        ++violations;
        detail += " " + setting + ": mid<early";
      }
      if (early < plain) {
        ++violations;
        detail += " " + setting + ": early<plain";
      }
    }
    if (detail.empty()) detail = "ordering holds in all 6 settings";
    report(3, violations <= 1, "mean(mid) >= mean(early) >= mean(plain)", detail);
  }

  // ---- training data size sweep (criterion 4) ----------------------------
  ExperimentPlan size_plan = default_plan(Study::kDataSizeSweep);
  auto size_grid = run_datasize_sweep(size_plan);
  GridIndex sizes(size_grid);

  {
    bool pass = true;
    std::string detail;
    for (double f : size_plan.fractions) {
      char setting[32];
      std::snprintf(setting, sizeof(setting), "fraction=%g", f);
      const auto& mid = sizes.at(setting, "mid");
      const auto& plain = sizes.at(setting, "plain");
      if (f >= 0.10 && mid.mean_accuracy < 0.99) {
        pass = false;
        detail += std::string(" mid@") + setting + "=" + pct(mid.mean_accuracy);
      }
      if (plain.mean_accuracy > 0.75) {
        pass = false;
        detail += std::string(" plain@") + setting + "=" + pct(plain.mean_accuracy);
      }
    }
    if (pass)
      detail = "mid 100% from 10% of the data; plain peaks at " +
               pct(std::max_element(size_grid.begin(), size_grid.end(),
                                    [](const CellSummary& a, const CellSummary& b) {
                                      const bool pa = a.architecture == Fusion::kPlain;
                                      const bool pb = b.architecture == Fusion::kPlain;
                                      if (pa != pb) return !pa;
                                      return a.mean_accuracy < b.mean_accuracy;
                                    })
                       ->mean_accuracy);
    report(4, pass, "data-size threshold at n=10", detail);
  }

  // ---- vector coverage (criterion 5) --------------------------------------
  ExperimentPlan cov_plan = default_plan(Study::kCoverage);
  auto cov_grid = run_coverage_study(cov_plan);
  GridIndex cov(cov_grid);

  {
    bool pass = true;
    std::string detail;
    for (const char* variant : {"variant=a", "variant=b"}) {
      const auto& mid = cov.at(variant, "mid");
      const auto& plain = cov.at(variant, "plain");
      if (mid.mean_accuracy < 0.99) {
        pass = false;
        detail += std::string(" mid@") + variant + "=" + pct(mid.mean_accuracy);
      }
      if (plain.mean_accuracy > 0.70) {
        pass = false;
        detail += std::string(" plain@") + variant + "=" + pct(plain.mean_accuracy);
      }
    }
    if (pass)
      detail = "mid " + pct(cov.at("variant=a", "mid").mean_accuracy) + "/" +
               pct(cov.at("variant=b", "mid").mean_accuracy) + ", plain " +
               pct(cov.at("variant=a", "plain").mean_accuracy) + "/" +
               pct(cov.at("variant=b", "plain").mean_accuracy);
    report(5, pass, "vector coverage does not rescue the plain FFNN", detail);
  }

  // ---- other classification tasks (criterion 6) ---------------------------
  ExperimentPlan task_plan = default_plan(Study::kOtherTasks);
  auto task_grid = run_other_tasks(task_plan);
  GridIndex tasks(task_grid);

  {
    bool pass = true;
    std::string detail;
    for (const char* task : {"task=numeric_ge", "task=digit_sum_ge3"}) {
      const auto& mid = tasks.at(task, "mid");
      if (mid.mean_accuracy < 0.99) {
        pass = false;
        detail += std::string(" mid@") + task + "=" + pct(mid.mean_accuracy);
      }
    }
    const double rev_plain = tasks.at("task=digit_reversal", "plain").mean_accuracy;
    const double rev_early = tasks.at("task=digit_reversal", "early").mean_accuracy;
    const double rev_mid = tasks.at("task=digit_reversal", "mid").mean_accuracy;
    for (double v : {rev_plain, rev_early, rev_mid}) {
      if (v < 0.45 || v > 0.80) {
        pass = false;
        detail += " reversal out of [45%,80%]: " + pct(v);
      }
    }
    if (rev_mid < rev_plain) {
      pass = false;
      detail += " reversal mid " + pct(rev_mid) + " < plain " + pct(rev_plain);
    }
    if (pass)
      detail = "numeric_ge/digit_sum mid at 100%; reversal plain/early/mid " +
               pct(rev_plain) + "/" + pct(rev_early) + "/" + pct(rev_mid);
    report(6, pass, "DR units help (or at least never hurt) other tasks", detail);
  }

  // ---- gradient correctness (criterion 7) ---------------------------------
  {
    const double t0 = now_seconds();
    bool pass = true;
    double worst = 0.0;
    for (Fusion fusion : {Fusion::kPlain, Fusion::kEarlyFusion, Fusion::kMidFusion}) {
      for (std::size_t n : {2, 10}) {
        NetworkSpec spec;
        spec.fusion = fusion;
        spec.n = n;
        Rng init(1000 + n);
        Network net(spec, init);
        Rng data_rng(n);
        Dataset ds = generate_equality_dataset(n, data_rng);
        int checked = 0;
        for (const auto& sample : ds.pairs) {
          if (checked >= 4) break;  // two per class
          if ((checked < 2) != (sample.label == Label::kPositive)) continue;
          auto result = gradient_check(net, sample, 1e-5);
          worst = std::max(worst, result.max_rel_error);
          if (result.max_rel_error >= 1e-4) pass = false;
          ++checked;
        }
      }
    }
    const double elapsed = now_seconds() - t0;
    char detail[96];
    std::snprintf(detail, sizeof(detail), "max relative error %.2e, %.1fs", worst,
                  elapsed);
    report(7, pass && elapsed < 60.0,
           "analytic gradients match central finite differences", detail);
  }

  // ---- dataset oracle equivalence and leakage (criterion 8) ---------------
  {
    bool pass = true;
    std::string detail;
    std::size_t labels_checked = 0;

    std::uint64_t seed = 9000;
    while (labels_checked < 100000 && pass) {
      for (TaskKind task : {TaskKind::kEquality, TaskKind::kNumericGe,
                            TaskKind::kDigitSumGe3, TaskKind::kDigitReversal}) {
        Rng rng(seed++);
        Dataset ds = task == TaskKind::kEquality
                         ? generate_equality_dataset(10, rng)
                         : generate_task_dataset(task, 3, 64, rng);
        for (const auto& p : ds.pairs) {
          if (p.label != reference_label(task, p) ||
              p.label != oracle_label(task, p.vec1, p.vec2)) {
            pass = false;
            detail = "label mismatch in " + task_name(task);
            break;
          }
          ++labels_checked;
        }
        if (!pass) break;
      }
    }

    std::size_t splits_checked = 0;
    for (std::uint64_t s = 0; s < 50 && pass; ++s) {
      Rng rng(5000 + s);
      Dataset ds = s % 2 == 0
                       ? generate_equality_dataset(8, rng)
                       : generate_task_dataset(TaskKind::kDigitReversal, 3, 64, rng);
      auto [train_ds, test_ds] = stratified_split(ds, 0.75, rng);
      std::unordered_set<std::string> train_keys;
      for (const auto& p : train_ds.pairs) train_keys.insert(pair_key(p));
      for (const auto& p : test_ds.pairs) {
        if (train_keys.contains(pair_key(p))) {
          pass = false;
          detail = "train/test leakage at split seed " + std::to_string(5000 + s);
          break;
        }
      }
      ++splits_checked;
    }

    if (pass)
      detail = std::to_string(labels_checked) + " labels re-verified, " +
               std::to_string(splits_checked) + " splits leak-free";
    report(8, pass, "generated labels match an independent oracle", detail);
  }

  // ---- CLI determinism (criterion 9) ---------------------------------------
  {
    bool pass = false;
    std::string detail = "CLI path not provided";
    if (!cli.empty()) {
      const fs::path dir_a = work_dir / "det_a";
      const fs::path dir_b = work_dir / "det_b";
      const std::string base = cli + " reproduce table1 --seed 42 --out-dir ";
      const int rc_a = run_command(base + dir_a.string() + " >/dev/null 2>&1");
      const int rc_b = run_command(base + dir_b.string() + " >/dev/null 2>&1");
      if (rc_a != 0 || rc_b != 0) {
        detail = "reproduce exited with " + std::to_string(rc_a) + "/" +
                 std::to_string(rc_b);
      } else {
        const std::string csv_a = slurp(dir_a / "table1.csv");
        const std::string csv_b = slurp(dir_b / "table1.csv");
        pass = !csv_a.empty() && csv_a == csv_b;
        detail = pass ? "two runs, byte-identical table1.csv"
                      : "CSV outputs differ between runs";
      }
    }
    report(9, pass, "`reproduce table1 --seed 42` is byte-deterministic", detail);
  }

  // ---- full reproduction budget (criterion 10) -----------------------------
  {
    bool pass = false;
    std::string detail = "CLI path not provided";
    if (!cli.empty()) {
      const double t0 = now_seconds();
      const fs::path dir = work_dir / "all";
      const int rc = run_command(cli + " reproduce all --seed 42 --out-dir " +
                                 dir.string() + " >/dev/null 2>&1");
      const double elapsed = now_seconds() - t0;
      char buf[96];
      std::snprintf(buf, sizeof(buf), "exit %d, %.0fs of the 1800s budget", rc, elapsed);
      detail = buf;
      pass = rc == 0 && elapsed <= 1800.0 && fs::exists(dir / "table1.csv") &&
             fs::exists(dir / "fig2.csv") && fs::exists(dir / "table2.csv") &&
             fs::exists(dir / "coverage.csv");
    }
    report(10, pass, "`reproduce all` fits the desk-scale budget", detail);
  }

  // Supplementary invariant: no architecture below the 40% sanity floor.
  {
    bool ok = true;
    std::string detail = "all cells above the 40% floor";
    check_sanity_floor(dim_grid, ok, detail);
    check_sanity_floor(size_grid, ok, detail);
    check_sanity_floor(cov_grid, ok, detail);
    check_sanity_floor(task_grid, ok, detail);
    std::printf("[%s] invariant   : sanity floor (%s)\n", ok ? "PASS" : "FAIL",
                detail.c_str());
    if (!ok) ++g_failures;
  }

  std::printf("== %d criterion failure(s) ==\n", g_failures);
  return g_failures;
}
