#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mpl/core.hpp"
#include "mpl/json_io.hpp"
#include "mpl/parser.hpp"

namespace mpl {

// Micro-averaged counts. P, R and F1 are 0 when their denominators are 0.
struct ScoreReport {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  static ScoreReport from_counts(std::size_t tp, std::size_t fp, std::size_t fn);
  bool operator==(const ScoreReport&) const = default;
};

// One prediction set per dialect, indexed by index_of(Dialect).
using DialectSets = std::array<AnnotationSet, kDialectCount>;

// Unordered dialect pairs in the fixed order (PY,CPP), (PY,JAVA), (CPP,JAVA).
inline constexpr std::array<std::pair<Dialect, Dialect>, 3> kDialectPairs = {
    std::pair{Dialect::PY, Dialect::CPP}, std::pair{Dialect::PY, Dialect::JAVA},
    std::pair{Dialect::CPP, Dialect::JAVA}};

struct EnsembleReport {
  AnnotationSet voted;
  AnnotationSet unioned;
  AnnotationSet intersected;
  std::array<double, 3> pair_jaccard{};  // in kDialectPairs order
  double mean_jaccard = 1.0;
};

// Annotations present in at least `threshold` of the sets. The default
// threshold is a strict majority, floor(k/2)+1. Throws mpl::Error when the
// list is empty or the threshold is outside [1, k].
AnnotationSet vote(std::span<const AnnotationSet> sets,
                   std::optional<std::size_t> threshold = std::nullopt);
AnnotationSet union_agg(std::span<const AnnotationSet> sets);
AnnotationSet intersect_agg(std::span<const AnnotationSet> sets);

std::size_t intersection_size(const AnnotationSet& a, const AnnotationSet& b);

// |a ∩ b| / |a ∪ b|, 1.0 when both are empty.
double jaccard(const AnnotationSet& a, const AnnotationSet& b);

EnsembleReport ensemble(const DialectSets& sets);

enum class JaccardMode { Macro, Micro };

struct JaccardSummary {
  std::array<double, 3> pairs{};  // in kDialectPairs order
  double mean = 1.0;
};

// Macro: per-instance mean of the three pair values, averaged over instances
// (pairs[] holds per-pair instance means). Micro: per pair, pooled |∩| over
// pooled |∪|, then the mean of the three pairs. An empty corpus gives 1.0.
JaccardSummary dataset_jaccard(std::span<const DialectSets> preds,
                               JaccardMode mode = JaccardMode::Macro);

// Groups prediction sets by instance id; every instance needs exactly one set
// per dialect. Throws mpl::Error otherwise.
std::vector<DialectSets> group_by_instance(std::span<const PredictionSet> preds,
                                           std::vector<std::string>* ids = nullptr);
double dataset_jaccard(std::span<const PredictionSet> preds, JaccardMode mode = JaccardMode::Macro);

// Throws mpl::Error when the sizes differ or the annotation kinds present
// cannot all belong to one task kind.
ScoreReport micro_f1(std::span<const AnnotationSet> preds, std::span<const AnnotationSet> golds);

std::vector<AnnotationSet> vote_each(std::span<const DialectSets> preds,
                                     std::optional<std::size_t> threshold = std::nullopt);
std::vector<AnnotationSet> union_each(std::span<const DialectSets> preds);
std::vector<AnnotationSet> intersect_each(std::span<const DialectSets> preds);
std::vector<AnnotationSet> dialect_column(std::span<const DialectSets> preds, Dialect d);

// tp counts a gold item found by any dialect; fp counts the majority vote's
// false positives.
ScoreReport oracle_recall(std::span<const DialectSets> preds, std::span<const AnnotationSet> golds);

// F1(union) - F1(vote), in F1 points (x100).
double union_voting_gap(std::span<const DialectSets> preds, std::span<const AnnotationSet> golds);

json score_to_json(const ScoreReport& s);

// Serial reference implementations of the OpenMP kernels above. Same
// contracts; kept for testing and benchmarking.
namespace serial {

ScoreReport micro_f1(std::span<const AnnotationSet> preds, std::span<const AnnotationSet> golds);
JaccardSummary dataset_jaccard(std::span<const DialectSets> preds,
                               JaccardMode mode = JaccardMode::Macro);
std::vector<AnnotationSet> vote_each(std::span<const DialectSets> preds,
                                     std::optional<std::size_t> threshold = std::nullopt);
std::vector<AnnotationSet> union_each(std::span<const DialectSets> preds);
std::vector<AnnotationSet> intersect_each(std::span<const DialectSets> preds);

}  // namespace serial

namespace detail {
// Bit i set when variant alternative i occurs.
unsigned kind_mask(const AnnotationSet& s);
// Throws if no single task kind admits every alternative in `mask`.
void check_kind_mask(unsigned mask);
}  // namespace detail

}  // namespace mpl
