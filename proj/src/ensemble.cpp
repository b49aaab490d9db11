#include "mpl/ensemble.hpp"

#include <algorithm>
#include <map>

namespace mpl {

ScoreReport ScoreReport::from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  ScoreReport r{tp, fp, fn, 0.0, 0.0, 0.0};
  if (tp + fp > 0) r.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) r.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (r.precision + r.recall > 0) {
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  }
  return r;
}

AnnotationSet vote(std::span<const AnnotationSet> sets, std::optional<std::size_t> threshold) {
  const std::size_t k = sets.size();
  if (k == 0) throw Error("vote over zero prediction sets");
  const std::size_t t = threshold.value_or(k / 2 + 1);
  if (t < 1 || t > k) {
    throw Error("vote threshold " + std::to_string(t) + " outside [1, " + std::to_string(k) + "]");
  }
  std::map<Annotation, std::size_t> counts;
  for (const auto& s : sets) {
    for (const auto& a : s) ++counts[a];
  }
  AnnotationSet out;
  for (const auto& [a, n] : counts) {
    if (n >= t) out.insert(out.end(), a);
  }
  return out;
}

AnnotationSet union_agg(std::span<const AnnotationSet> sets) {
  if (sets.empty()) throw Error("union over zero prediction sets");
  AnnotationSet out;
  for (const auto& s : sets) out.insert(s.begin(), s.end());
  return out;
}

AnnotationSet intersect_agg(std::span<const AnnotationSet> sets) {
  if (sets.empty()) throw Error("intersection over zero prediction sets");
  AnnotationSet out = sets.front();
  for (std::size_t i = 1; i < sets.size() && !out.empty(); ++i) {
    AnnotationSet next;
    std::set_intersection(out.begin(), out.end(), sets[i].begin(), sets[i].end(),
                          std::inserter(next, next.end()));
    out = std::move(next);
  }
  return out;
}

std::size_t intersection_size(const AnnotationSet& a, const AnnotationSet& b) {
  std::size_t n = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

double jaccard(const AnnotationSet& a, const AnnotationSet& b) {
  const std::size_t inter = intersection_size(a, b);
  const std::size_t uni = a.size() + b.size() - inter;
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

EnsembleReport ensemble(const DialectSets& sets) {
  EnsembleReport r;
  r.voted = vote(sets);
  r.unioned = union_agg(sets);
  r.intersected = intersect_agg(sets);
  double sum = 0.0;
  for (std::size_t p = 0; p < kDialectPairs.size(); ++p) {
    const auto [x, y] = kDialectPairs[p];
    r.pair_jaccard[p] = jaccard(sets[index_of(x)], sets[index_of(y)]);
    sum += r.pair_jaccard[p];
  }
  r.mean_jaccard = sum / 3.0;
  return r;
}

namespace detail {

unsigned kind_mask(const AnnotationSet& s) {
  unsigned mask = 0;
  for (const auto& a : s) mask |= 1u << a.index();
  return mask;
}

void check_kind_mask(unsigned mask) {
  for (TaskKind k : {TaskKind::NER, TaskKind::RE, TaskKind::EE, TaskKind::EAE}) {
    unsigned allowed = 0;
    const Annotation samples[] = {Entity{}, Relation{}, EventTrigger{}, EventArgument{}};
    for (const auto& a : samples) {
      if (admits(k, a)) allowed |= 1u << a.index();
    }
    if ((mask & ~allowed) == 0) return;
  }
  throw Error("annotations from mismatched task kinds cannot be scored together");
}

}  // namespace detail

// ---- OpenMP kernels -------------------------------------------------------

ScoreReport micro_f1(std::span<const AnnotationSet> preds, std::span<const AnnotationSet> golds) {
  if (preds.size() != golds.size()) {
    throw Error("micro_f1: " + std::to_string(preds.size()) + " predictions for " +
                std::to_string(golds.size()) + " gold instances");
  }
  const long long n = static_cast<long long>(preds.size());
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  unsigned mask = 0;
#pragma omp parallel for schedule(static) reduction(+ : tp, fp, fn) reduction(| : mask)
  for (long long i = 0; i < n; ++i) {
    const auto& p = preds[static_cast<std::size_t>(i)];
    const auto& g = golds[static_cast<std::size_t>(i)];
    const std::size_t hit = intersection_size(p, g);
    tp += hit;
    fp += p.size() - hit;
    fn += g.size() - hit;
    mask |= detail::kind_mask(p) | detail::kind_mask(g);
  }
  detail::check_kind_mask(mask);
  return ScoreReport::from_counts(tp, fp, fn);
}

JaccardSummary dataset_jaccard(std::span<const DialectSets> preds, JaccardMode mode) {
  JaccardSummary out;
  const long long n = static_cast<long long>(preds.size());
  if (n == 0) {
    out.pairs = {1.0, 1.0, 1.0};
    return out;
  }

  if (mode == JaccardMode::Micro) {
    std::array<std::size_t, 3> inter{};
    std::array<std::size_t, 3> uni{};
    for (std::size_t p = 0; p < 3; ++p) {
      const auto x = index_of(kDialectPairs[p].first);
      const auto y = index_of(kDialectPairs[p].second);
      std::size_t in = 0;
      std::size_t un = 0;
#pragma omp parallel for schedule(static) reduction(+ : in, un)
      for (long long i = 0; i < n; ++i) {
        const auto& sets = preds[static_cast<std::size_t>(i)];
        const std::size_t k = intersection_size(sets[x], sets[y]);
        in += k;
        un += sets[x].size() + sets[y].size() - k;
      }
      inter[p] = in;
      uni[p] = un;
    }
    double sum = 0.0;
    for (std::size_t p = 0; p < 3; ++p) {
      out.pairs[p] = uni[p] == 0 ? 1.0 : static_cast<double>(inter[p]) / static_cast<double>(uni[p]);
      sum += out.pairs[p];
    }
    out.mean = sum / 3.0;
    return out;
  }

  // Parallel map into per-instance slots, then an ordered reduction so the
  // result is bit-identical to the serial path.
  std::vector<std::array<double, 3>> per(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i) {
    const auto& sets = preds[static_cast<std::size_t>(i)];
    auto& slot = per[static_cast<std::size_t>(i)];
    for (std::size_t p = 0; p < 3; ++p) {
      slot[p] = jaccard(sets[index_of(kDialectPairs[p].first)],
                        sets[index_of(kDialectPairs[p].second)]);
    }
  }
  std::array<double, 3> pair_sum{};
  double mean_sum = 0.0;
  for (const auto& slot : per) {
    for (std::size_t p = 0; p < 3; ++p) pair_sum[p] += slot[p];
    mean_sum += (slot[0] + slot[1] + slot[2]) / 3.0;
  }
  for (std::size_t p = 0; p < 3; ++p) out.pairs[p] = pair_sum[p] / static_cast<double>(n);
  out.mean = mean_sum / static_cast<double>(n);
  return out;
}

namespace {

template <typename Fn>
std::vector<AnnotationSet> map_instances(std::span<const DialectSets> preds, Fn&& fn) {
  const long long n = static_cast<long long>(preds.size());
  std::vector<AnnotationSet> out(preds.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (long long i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = fn(preds[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace

std::vector<AnnotationSet> vote_each(std::span<const DialectSets> preds,
                                     std::optional<std::size_t> threshold) {
  if (threshold && (*threshold < 1 || *threshold > kDialectCount)) {
    throw Error("vote threshold " + std::to_string(*threshold) + " outside [1, 3]");
  }
  return map_instances(preds, [&](const DialectSets& s) { return vote(s, threshold); });
}

std::vector<AnnotationSet> union_each(std::span<const DialectSets> preds) {
  return map_instances(preds, [](const DialectSets& s) { return union_agg(s); });
}

std::vector<AnnotationSet> intersect_each(std::span<const DialectSets> preds) {
  return map_instances(preds, [](const DialectSets& s) { return intersect_agg(s); });
}

// ---------------------------------------------------------------------------

std::vector<AnnotationSet> dialect_column(std::span<const DialectSets> preds, Dialect d) {
  std::vector<AnnotationSet> out;
  out.reserve(preds.size());
  for (const auto& s : preds) out.push_back(s[index_of(d)]);
  return out;
}

std::vector<DialectSets> group_by_instance(std::span<const PredictionSet> preds,
                                           std::vector<std::string>* ids) {
  std::map<std::string, std::pair<DialectSets, std::array<bool, kDialectCount>>> grouped;
  std::vector<std::string> order;
  for (const auto& p : preds) {
    auto [it, inserted] = grouped.try_emplace(p.instance_id);
    if (inserted) order.push_back(p.instance_id);
    auto& [sets, seen] = it->second;
    const auto d = index_of(p.dialect);
    if (seen[d]) {
      throw Error("instance '" + p.instance_id + "' has two " +
                  std::string(to_string(p.dialect)) + " predictions");
    }
    seen[d] = true;
    sets[d] = p.annotations;
  }
  std::vector<DialectSets> out;
  out.reserve(order.size());
  for (const auto& id : order) {
    auto& [sets, seen] = grouped.at(id);
    for (Dialect d : kAllDialects) {
      if (!seen[index_of(d)]) {
        throw Error("instance '" + id + "' is missing its " + std::string(to_string(d)) +
                    " prediction");
      }
    }
    out.push_back(std::move(sets));
  }
  if (ids) *ids = std::move(order);
  return out;
}

double dataset_jaccard(std::span<const PredictionSet> preds, JaccardMode mode) {
  const auto grouped = group_by_instance(preds);
  return dataset_jaccard(std::span<const DialectSets>(grouped), mode).mean;
}

ScoreReport oracle_recall(std::span<const DialectSets> preds, std::span<const AnnotationSet> golds) {
  if (preds.size() != golds.size()) throw Error("oracle_recall: prediction/gold count mismatch");
  const auto unioned = union_each(preds);
  const auto voted = vote_each(preds);
  const auto by_union = micro_f1(unioned, golds);
  const auto by_vote = micro_f1(voted, golds);
  return ScoreReport::from_counts(by_union.tp, by_vote.fp, by_union.fn);
}

double union_voting_gap(std::span<const DialectSets> preds, std::span<const AnnotationSet> golds) {
  const auto u = micro_f1(union_each(preds), golds);
  const auto v = micro_f1(vote_each(preds), golds);
  return 100.0 * (u.f1 - v.f1);
}

json score_to_json(const ScoreReport& s) {
  return {{"tp", s.tp}, {"fp", s.fp}, {"fn", s.fn},
          {"p", s.precision}, {"r", s.recall}, {"f1", s.f1}};
}

}  // namespace mpl
