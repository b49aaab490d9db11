#include "mpl/ensemble.hpp"

namespace mpl::serial {

ScoreReport micro_f1(std::span<const AnnotationSet> preds, std::span<const AnnotationSet> golds) {
  if (preds.size() != golds.size()) throw Error("micro_f1: prediction/gold count mismatch");
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  unsigned mask = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const std::size_t hit = intersection_size(preds[i], golds[i]);
    tp += hit;
    fp += preds[i].size() - hit;
    fn += golds[i].size() - hit;
    mask |= detail::kind_mask(preds[i]) | detail::kind_mask(golds[i]);
  }
  detail::check_kind_mask(mask);
  return ScoreReport::from_counts(tp, fp, fn);
}

JaccardSummary dataset_jaccard(std::span<const DialectSets> preds, JaccardMode mode) {
  JaccardSummary out;
  if (preds.empty()) {
    out.pairs = {1.0, 1.0, 1.0};
    return out;
  }
  const double n = static_cast<double>(preds.size());
  if (mode == JaccardMode::Micro) {
    double sum = 0.0;
    for (std::size_t p = 0; p < 3; ++p) {
      const auto x = index_of(kDialectPairs[p].first);
      const auto y = index_of(kDialectPairs[p].second);
      std::size_t in = 0;
      std::size_t un = 0;
      for (const auto& sets : preds) {
        const std::size_t k = intersection_size(sets[x], sets[y]);
        in += k;
        un += sets[x].size() + sets[y].size() - k;
      }
      out.pairs[p] = un == 0 ? 1.0 : static_cast<double>(in) / static_cast<double>(un);
      sum += out.pairs[p];
    }
    out.mean = sum / 3.0;
    return out;
  }

  std::array<double, 3> pair_sum{};
  double mean_sum = 0.0;
  for (const auto& sets : preds) {
    std::array<double, 3> v{};
    for (std::size_t p = 0; p < 3; ++p) {
      v[p] = jaccard(sets[index_of(kDialectPairs[p].first)], sets[index_of(kDialectPairs[p].second)]);
      pair_sum[p] += v[p];
    }
    mean_sum += (v[0] + v[1] + v[2]) / 3.0;
  }
  for (std::size_t p = 0; p < 3; ++p) out.pairs[p] = pair_sum[p] / n;
  out.mean = mean_sum / n;
  return out;
}

std::vector<AnnotationSet> vote_each(std::span<const DialectSets> preds,
                                     std::optional<std::size_t> threshold) {
  std::vector<AnnotationSet> out;
  out.reserve(preds.size());
  for (const auto& s : preds) out.push_back(vote(s, threshold));
  return out;
}

std::vector<AnnotationSet> union_each(std::span<const DialectSets> preds) {
  std::vector<AnnotationSet> out;
  out.reserve(preds.size());
  for (const auto& s : preds) out.push_back(union_agg(s));
  return out;
}

std::vector<AnnotationSet> intersect_each(std::span<const DialectSets> preds) {
  std::vector<AnnotationSet> out;
  out.reserve(preds.size());
  for (const auto& s : preds) out.push_back(intersect_agg(s));
  return out;
}

}  // namespace mpl::serial
