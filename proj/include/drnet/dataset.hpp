#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "drnet/rng.hpp"

namespace drnet {

enum class Label : int { kNegative = 0, kPositive = 1 };

enum class TaskKind { kEquality, kNumericGe, kDigitSumGe3, kDigitReversal };

enum class SplitTag { kUnsplit, kTrain, kTest };

enum class CoverageVariant { kAnyPosition, kBothPositions };  // columns a and b

/// A pair of equally long binary vectors with a relation label.
struct BinaryPair {
  std::vector<std::uint8_t> vec1;
  std::vector<std::uint8_t> vec2;
  Label label = Label::kNegative;

  bool operator==(const BinaryPair& other) const = default;
};

struct Dataset {
  TaskKind task = TaskKind::kEquality;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  SplitTag split = SplitTag::kUnsplit;
  std::vector<BinaryPair> pairs;

  std::size_t count(Label label) const;
};

std::string task_name(TaskKind task);
TaskKind task_from_name(const std::string& name);

std::string bits_to_string(const std::vector<std::uint8_t>& v);
std::vector<std::uint8_t> string_to_bits(const std::string& s);

/// "vec1bits vec2bits" — exact (vec1, vec2) identity used for dedup/leakage.
std::string pair_key(const BinaryPair& p);

/// Ground-truth labelling rule for each task. Bit 0 is the most significant
/// bit for the numeric comparison. Throws ShapeError on length mismatch.
Label oracle_label(TaskKind task, const std::vector<std::uint8_t>& vec1,
                   const std::vector<std::uint8_t>& vec2);

/// Equality dataset: all 2^n equal pairs for n < 10 (1000 random distinct
/// vectors otherwise) plus the same number of distinct random unequal pairs.
Dataset generate_equality_dataset(std::size_t n, Rng& rng);

/// Balanced dataset of `size` pairs for any task. Classes are sampled without
/// replacement while the distinct class population lasts; once exhausted the
/// population is recycled as evenly as possible. Throws CapacityError if
/// `size` exceeds the distinct pair population.
Dataset generate_task_dataset(TaskKind task, std::size_t n, std::size_t size, Rng& rng);

/// Stratified split preserving the class ratio. Duplicate pairs always land
/// on the same side, so train and test never share an exact (vec1, vec2)
/// identity; counts are exact whenever the dataset is duplicate-free.
std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double train_fraction,
                                             Rng& rng);

/// Class-balanced random subset of `train` with
/// round(fraction_of_total × total_size) pairs.
Dataset subsample_train(const Dataset& train, double fraction_of_total,
                        std::size_t total_size, Rng& rng);

/// Equality split whose training set is guaranteed to contain every vector
/// occurring in the test set inside unequal (negative) training pairs —
/// anywhere for variant a, at both pair positions for variant b. Class
/// balance and the train/test sizes of the plain 75:25 split are preserved.
std::pair<Dataset, Dataset> build_coverage_dataset(CoverageVariant variant,
                                                   std::size_t n, Rng& rng);

/// Line-oriented text format: header `task=<name> n=<int> seed=<int>`,
/// then one `\<bits\> \<bits\> \<0|1\>` line per pair.
void write_dataset(const Dataset& ds, std::ostream& out);
void write_dataset_file(const Dataset& ds, const std::string& path);
Dataset read_dataset(std::istream& in);
Dataset read_dataset_file(const std::string& path);

}  // namespace drnet
