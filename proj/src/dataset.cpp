#include "drnet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "drnet/errors.hpp"

namespace drnet {

namespace {

std::vector<std::uint8_t> random_vector(std::size_t n, Rng& rng) {
  std::vector<std::uint8_t> v(n);
  for (auto& bit : v) bit = static_cast<std::uint8_t>(rng.bit());
  return v;
}

std::vector<std::uint8_t> reversed(const std::vector<std::uint8_t>& v) {
  return {v.rbegin(), v.rend()};
}

std::vector<std::uint8_t> vector_from_index(std::size_t n, std::uint64_t index) {
  std::vector<std::uint8_t> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = static_cast<std::uint8_t>((index >> (n - 1 - i)) & 1);  // bit 0 = MSB
  return v;
}

// Distinct pair population of n-bit vector pairs, saturating at 2^62.
std::uint64_t pair_population(std::size_t n) {
  if (2 * n >= 62) return 1ULL << 62;
  return 1ULL << (2 * n);
}

}  // namespace

std::size_t Dataset::count(Label label) const {
  return static_cast<std::size_t>(
      std::count_if(pairs.begin(), pairs.end(),
                    [label](const BinaryPair& p) { return p.label == label; }));
}

std::string task_name(TaskKind task) {
  switch (task) {
    case TaskKind::kEquality: return "equality";
    case TaskKind::kNumericGe: return "numeric_ge";
    case TaskKind::kDigitSumGe3: return "digit_sum_ge3";
    case TaskKind::kDigitReversal: return "digit_reversal";
  }
  throw ArgumentError("task_name: unknown task");
}

TaskKind task_from_name(const std::string& name) {
  if (name == "equality") return TaskKind::kEquality;
  if (name == "numeric_ge") return TaskKind::kNumericGe;
  if (name == "digit_sum_ge3") return TaskKind::kDigitSumGe3;
  if (name == "digit_reversal") return TaskKind::kDigitReversal;
  throw ArgumentError("unknown task name: " + name);
}

std::string bits_to_string(const std::vector<std::uint8_t>& v) {
  std::string s(v.size(), '0');
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i]) s[i] = '1';
  return s;
}

std::vector<std::uint8_t> string_to_bits(const std::string& s) {
  std::vector<std::uint8_t> v(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '0' && s[i] != '1')
      throw ArgumentError("string_to_bits: invalid character in '" + s + "'");
    v[i] = s[i] == '1' ? 1 : 0;
  }
  return v;
}

std::string pair_key(const BinaryPair& p) {
  return bits_to_string(p.vec1) + " " + bits_to_string(p.vec2);
}

Label oracle_label(TaskKind task, const std::vector<std::uint8_t>& vec1,
                   const std::vector<std::uint8_t>& vec2) {
  if (vec1.size() != vec2.size())
    throw ShapeError("oracle_label: vector lengths differ");
  switch (task) {
    case TaskKind::kEquality:
      return vec1 == vec2 ? Label::kPositive : Label::kNegative;
    case TaskKind::kNumericGe:
      // Index 0 is the most significant bit; ties are positive.
      for (std::size_t i = 0; i < vec1.size(); ++i) {
        if (vec1[i] != vec2[i])
          return vec1[i] > vec2[i] ? Label::kPositive : Label::kNegative;
      }
      return Label::kPositive;
    case TaskKind::kDigitSumGe3: {
      // Digit sum over all 2n input bits.
      int total = std::accumulate(vec1.begin(), vec1.end(), 0) +
                  std::accumulate(vec2.begin(), vec2.end(), 0);
      return total >= 3 ? Label::kPositive : Label::kNegative;
    }
    case TaskKind::kDigitReversal:
      return vec2 == reversed(vec1) ? Label::kPositive : Label::kNegative;
  }
  throw ArgumentError("oracle_label: unknown task");
}

Dataset generate_equality_dataset(std::size_t n, Rng& rng) {
  if (n < 2) throw ArgumentError("generate_equality_dataset: n must be >= 2");

  Dataset ds;
  ds.task = TaskKind::kEquality;
  ds.n = n;
  ds.seed = rng.seed();

  if (n < 10) {
    const std::uint64_t total = 1ULL << n;
    for (std::uint64_t i = 0; i < total; ++i) {
      auto v = vector_from_index(n, i);
      ds.pairs.push_back({v, v, Label::kPositive});
    }
  } else {
    std::unordered_set<std::string> seen;
    while (seen.size() < 1000) {
      auto v = random_vector(n, rng);
      if (seen.insert(bits_to_string(v)).second)
        ds.pairs.push_back({v, v, Label::kPositive});
    }
  }

  const std::size_t negatives = ds.pairs.size();
  std::unordered_set<std::string> seen_pairs;
  std::size_t produced = 0;
  while (produced < negatives) {
    BinaryPair p{random_vector(n, rng), random_vector(n, rng), Label::kNegative};
    if (p.vec1 == p.vec2) continue;
    if (!seen_pairs.insert(pair_key(p)).second) continue;
    ds.pairs.push_back(std::move(p));
    ++produced;
  }
  return ds;
}

namespace {

// Samples `count` class members, rejecting against `wanted`. Falls back to
// enumerating the class when rejection stalls (small n); once the distinct
// population is exhausted it is recycled as evenly as possible.
std::vector<BinaryPair> sample_class(TaskKind task, std::size_t n, std::size_t count,
                                     Label wanted, Rng& rng) {
  std::vector<BinaryPair> out;
  std::unordered_set<std::string> seen;
  const std::size_t attempt_budget = 500 + 64 * count;
  std::size_t attempts = 0;

  auto propose = [&]() -> BinaryPair {
    if (wanted == Label::kPositive) {
      // Positives with a direct construction where one exists.
      if (task == TaskKind::kEquality) {
        auto v = random_vector(n, rng);
        return {v, v, Label::kPositive};
      }
      if (task == TaskKind::kDigitReversal) {
        auto v = random_vector(n, rng);
        auto r = reversed(v);
        return {v, r, Label::kPositive};
      }
    }
    return {random_vector(n, rng), random_vector(n, rng), wanted};
  };

  while (out.size() < count && attempts < attempt_budget) {
    ++attempts;
    BinaryPair p = propose();
    if (oracle_label(task, p.vec1, p.vec2) != wanted) continue;
    if (!seen.insert(pair_key(p)).second) continue;
    out.push_back(std::move(p));
  }
  if (out.size() == count) return out;

  // Rejection stalled: enumerate the class exhaustively.
  if (2 * n > 22)
    throw CapacityError("generate_task_dataset: class too sparse to sample for " +
                        task_name(task));
  std::vector<BinaryPair> population;
  const std::uint64_t vectors = 1ULL << n;
  for (std::uint64_t i = 0; i < vectors; ++i) {
    auto v1 = vector_from_index(n, i);
    for (std::uint64_t j = 0; j < vectors; ++j) {
      auto v2 = vector_from_index(n, j);
      if (oracle_label(task, v1, v2) == wanted)
        population.push_back({v1, v2, wanted});
    }
  }
  if (population.empty())
    throw CapacityError("generate_task_dataset: empty class for " + task_name(task));
  rng.shuffle(population);
  out.clear();
  for (std::size_t i = 0; i < count; ++i) out.push_back(population[i % population.size()]);
  return out;
}

}  // namespace

Dataset generate_task_dataset(TaskKind task, std::size_t n, std::size_t size, Rng& rng) {
  if (n < 2) throw ArgumentError("generate_task_dataset: n must be >= 2");
  if (size < 2 || size % 2 != 0)
    throw ArgumentError("generate_task_dataset: size must be even and >= 2");
  if (size > pair_population(n))
    throw CapacityError("generate_task_dataset: size " + std::to_string(size) +
                        " exceeds distinct pair population");

  Dataset ds;
  ds.task = task;
  ds.n = n;
  ds.seed = rng.seed();

  auto positives = sample_class(task, n, size / 2, Label::kPositive, rng);
  auto negatives = sample_class(task, n, size / 2, Label::kNegative, rng);
  ds.pairs.reserve(size);
  for (auto& p : positives) ds.pairs.push_back(std::move(p));
  for (auto& p : negatives) ds.pairs.push_back(std::move(p));
  return ds;
}

namespace {

struct PairGroup {
  BinaryPair pair;
  std::size_t multiplicity = 0;
};

// Greedy first-fit assignment of whole duplicate groups to the train side.
// Exact when every multiplicity is 1.
void split_class(const std::vector<const BinaryPair*>& members, double train_fraction,
                 Rng& rng, std::vector<BinaryPair>& train_out,
                 std::vector<BinaryPair>& test_out) {
  std::vector<PairGroup> groups;
  std::unordered_map<std::string, std::size_t> index_of;
  for (const BinaryPair* p : members) {
    auto key = pair_key(*p);
    auto it = index_of.find(key);
    if (it == index_of.end()) {
      index_of.emplace(key, groups.size());
      groups.push_back({*p, 1});
    } else {
      ++groups[it->second].multiplicity;
    }
  }
  rng.shuffle(groups);

  const std::size_t class_count = members.size();
  const std::size_t target =
      static_cast<std::size_t>(train_fraction * static_cast<double>(class_count));
  std::size_t taken = 0;
  std::vector<bool> to_train(groups.size(), false);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (taken + groups[g].multiplicity <= target) {
      to_train[g] = true;
      taken += groups[g].multiplicity;
    }
  }
  if (taken == class_count)
    throw ArgumentError("stratified_split: a class would receive zero test items");

  for (std::size_t g = 0; g < groups.size(); ++g) {
    auto& sink = to_train[g] ? train_out : test_out;
    for (std::size_t i = 0; i < groups[g].multiplicity; ++i) sink.push_back(groups[g].pair);
  }
}

}  // namespace

std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double train_fraction,
                                             Rng& rng) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ArgumentError("stratified_split: train_fraction must be in (0, 1)");
  if (ds.pairs.empty()) throw ArgumentError("stratified_split: empty dataset");

  std::vector<const BinaryPair*> positives, negatives;
  for (const auto& p : ds.pairs)
    (p.label == Label::kPositive ? positives : negatives).push_back(&p);
  if (positives.empty() || negatives.empty())
    throw ArgumentError("stratified_split: a class is empty");

  Dataset train{ds.task, ds.n, ds.seed, SplitTag::kTrain, {}};
  Dataset test{ds.task, ds.n, ds.seed, SplitTag::kTest, {}};
  split_class(positives, train_fraction, rng, train.pairs, test.pairs);
  split_class(negatives, train_fraction, rng, train.pairs, test.pairs);
  return {std::move(train), std::move(test)};
}

Dataset subsample_train(const Dataset& train, double fraction_of_total,
                        std::size_t total_size, Rng& rng) {
  const auto target = static_cast<std::size_t>(
      std::llround(fraction_of_total * static_cast<double>(total_size)));
  if (target < 2)
    throw ArgumentError("subsample_train: requested subset smaller than 2 pairs");
  if (target > train.pairs.size())
    throw ArgumentError("subsample_train: requested " + std::to_string(target) +
                        " pairs from a training set of " +
                        std::to_string(train.pairs.size()));

  const std::size_t want_pos = target / 2 + target % 2;
  const std::size_t want_neg = target / 2;

  std::vector<std::size_t> pos_idx, neg_idx;
  for (std::size_t i = 0; i < train.pairs.size(); ++i)
    (train.pairs[i].label == Label::kPositive ? pos_idx : neg_idx).push_back(i);
  if (want_pos > pos_idx.size() || want_neg > neg_idx.size())
    throw ArgumentError("subsample_train: class too small for a balanced subset");

  rng.shuffle(pos_idx);
  rng.shuffle(neg_idx);
  Dataset out{train.task, train.n, train.seed, SplitTag::kTrain, {}};
  out.pairs.reserve(target);
  for (std::size_t i = 0; i < want_pos; ++i) out.pairs.push_back(train.pairs[pos_idx[i]]);
  for (std::size_t i = 0; i < want_neg; ++i) out.pairs.push_back(train.pairs[neg_idx[i]]);
  return out;
}

namespace {

// All distinct vectors appearing anywhere in `ds`, in first-occurrence order.
std::vector<std::vector<std::uint8_t>> distinct_vectors(const Dataset& ds) {
  std::vector<std::vector<std::uint8_t>> out;
  std::unordered_set<std::string> seen;
  for (const auto& p : ds.pairs) {
    if (seen.insert(bits_to_string(p.vec1)).second) out.push_back(p.vec1);
    if (seen.insert(bits_to_string(p.vec2)).second) out.push_back(p.vec2);
  }
  return out;
}

}  // namespace

std::pair<Dataset, Dataset> build_coverage_dataset(CoverageVariant variant,
                                                   std::size_t n, Rng& rng) {
  Dataset full = generate_equality_dataset(n, rng);
  auto [train, test] = stratified_split(full, 0.75, rng);

  auto test_vectors = distinct_vectors(test);
  std::unordered_set<std::string> test_keys;
  for (const auto& p : test.pairs) test_keys.insert(pair_key(p));

  std::vector<BinaryPair> original_negatives;
  std::vector<BinaryPair> positives;
  for (auto& p : train.pairs)
    (p.label == Label::kNegative ? original_negatives : positives).push_back(std::move(p));
  const std::size_t negative_quota = original_negatives.size();

  // The coverage pairs are rebuilt from the test vectors themselves: variant a
  // pairs consecutive test vectors, variant b uses a cyclic shift so every
  // test vector occupies position 1 once and position 2 once. Rebuilding (as
  // opposed to adding pairs) keeps the class balance and the split sizes
  // intact, which matters at n=10 where nearly every vector already carries an
  // equal pair.
  std::unordered_set<std::string> used;
  std::vector<BinaryPair> coverage_pairs;
  const int max_attempts = 200;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    used.clear();
    coverage_pairs.clear();
    rng.shuffle(test_vectors);
    bool ok = true;
    if (variant == CoverageVariant::kBothPositions) {
      const std::size_t m = test_vectors.size();
      for (std::size_t i = 0; i < m && ok; ++i) {
        BinaryPair p{test_vectors[i], test_vectors[(i + 1) % m], Label::kNegative};
        if (p.vec1 == p.vec2 || test_keys.contains(pair_key(p)) ||
            !used.insert(pair_key(p)).second)
          ok = false;
        else
          coverage_pairs.push_back(std::move(p));
      }
    } else {
      for (std::size_t i = 0; i + 1 < test_vectors.size() && ok; i += 2) {
        BinaryPair p{test_vectors[i], test_vectors[i + 1], Label::kNegative};
        if (test_keys.contains(pair_key(p)) || !used.insert(pair_key(p)).second)
          ok = false;
        else
          coverage_pairs.push_back(std::move(p));
      }
      if (ok && test_vectors.size() % 2 == 1) {
        // Odd vector out: pair it with a random distinct partner.
        const auto& v = test_vectors.back();
        bool placed = false;
        for (int tries = 0; tries < 1000 && !placed; ++tries) {
          BinaryPair p{v, random_vector(n, rng), Label::kNegative};
          if (p.vec1 == p.vec2 || test_keys.contains(pair_key(p)) ||
              used.contains(pair_key(p)))
            continue;
          used.insert(pair_key(p));
          coverage_pairs.push_back(std::move(p));
          placed = true;
        }
        ok = placed;
      }
    }
    if (ok && coverage_pairs.size() <= negative_quota) break;
    if (attempt == max_attempts - 1)
      throw CapacityError("build_coverage_dataset: could not construct coverage pairs");
  }

  // Fill the remaining negative quota with the original unequal pairs.
  std::vector<BinaryPair> negatives = coverage_pairs;
  rng.shuffle(original_negatives);
  for (auto& p : original_negatives) {
    if (negatives.size() == negative_quota) break;
    if (used.contains(pair_key(p))) continue;
    used.insert(pair_key(p));
    negatives.push_back(std::move(p));
  }
  while (negatives.size() < negative_quota) {
    BinaryPair p{random_vector(n, rng), random_vector(n, rng), Label::kNegative};
    if (p.vec1 == p.vec2 || test_keys.contains(pair_key(p)) || used.contains(pair_key(p)))
      continue;
    used.insert(pair_key(p));
    negatives.push_back(std::move(p));
  }

  Dataset covered{train.task, train.n, train.seed, SplitTag::kTrain, {}};
  covered.pairs.reserve(positives.size() + negatives.size());
  for (auto& p : positives) covered.pairs.push_back(std::move(p));
  for (auto& p : negatives) covered.pairs.push_back(std::move(p));
  return {std::move(covered), std::move(test)};
}

void write_dataset(const Dataset& ds, std::ostream& out) {
  out << "task=" << task_name(ds.task) << " n=" << ds.n << " seed=" << ds.seed << "\n";
  for (const auto& p : ds.pairs) {
    out << bits_to_string(p.vec1) << " " << bits_to_string(p.vec2) << " "
        << static_cast<int>(p.label) << "\n";
  }
}

void write_dataset_file(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  write_dataset(ds, out);
  if (!out.good()) throw IoError("write failed: " + path);
}

Dataset read_dataset(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw ArgumentError("dataset parse: missing header");

  Dataset ds;
  std::istringstream hs(header);
  std::string field;
  bool have_task = false, have_n = false, have_seed = false;
  while (hs >> field) {
    auto eq = field.find('=');
    if (eq == std::string::npos)
      throw ArgumentError("dataset parse: malformed header field '" + field + "'");
    const std::string key = field.substr(0, eq);
    const std::string value = field.substr(eq + 1);
    try {
      if (key == "task") {
        ds.task = task_from_name(value);
        have_task = true;
      } else if (key == "n") {
        ds.n = std::stoul(value);
        have_n = true;
      } else if (key == "seed") {
        ds.seed = std::stoull(value);
        have_seed = true;
      } else {
        throw ArgumentError("dataset parse: unknown header key '" + key + "'");
      }
    } catch (const std::logic_error&) {
      throw ArgumentError("dataset parse: bad header value '" + field + "'");
    }
  }
  if (!have_task || !have_n || !have_seed)
    throw ArgumentError("dataset parse: header must define task, n and seed");

  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string b1, b2, lab;
    if (!(ls >> b1 >> b2 >> lab) || (lab != "0" && lab != "1"))
      throw ArgumentError("dataset parse: malformed line " + std::to_string(line_no));
    BinaryPair p;
    p.vec1 = string_to_bits(b1);
    p.vec2 = string_to_bits(b2);
    p.label = lab == "1" ? Label::kPositive : Label::kNegative;
    if (p.vec1.size() != ds.n || p.vec2.size() != ds.n)
      throw ArgumentError("dataset parse: vector length mismatch on line " +
                          std::to_string(line_no));
    ds.pairs.push_back(std::move(p));
  }
  return ds;
}

Dataset read_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file: " + path);
  return read_dataset(in);
}

}  // namespace drnet
