#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mpl/core.hpp"

namespace mpl {

// Deterministic stand-in for a fine-tuned model.
//
// For (instance, dialect) the generator is Rng(stream_seed) with
//   stream_seed = splitmix64(splitmix64(seed + offset[dialect]) ^ fnv1a64(id)).
// Draws, in order:
//   1. one unit() per gold term in render order; the term is dropped when
//      the draw is < drop_rate;
//   2. one unit(); when < spurious_rate a fabricated annotation is appended
//      (unless already kept): label = labels[below(L)], then per task kind
//      NER  Entity(span, label)
//      RE   Relation(span, label, span)      head drawn before tail
//      EE   Trigger(span, label)
//      EAE  Argument(label, roles[below(R)], span)   skipped if no roles
//      where span = words[start .. start+len), start = below(W),
//      len = 1 + below(min(2, W - start)), words = text split on spaces.
// The kept terms and the fabricated one are rendered with render_collection.
struct MockModelConfig {
  double drop_rate = 0.0;
  double spurious_rate = 0.0;
  std::array<std::uint64_t, kDialectCount> dialect_seed_offsets{0, 7919, 104729};
  std::uint64_t seed = 0;

  void validate() const;
};

std::uint64_t mock_stream_seed(const MockModelConfig& cfg, std::string_view instance_id,
                               Dialect dialect);

std::string complete_mock(const TaskInstance& inst, const LabelSchema& schema, Dialect dialect,
                          const MockModelConfig& cfg);

struct MockJob {
  const TaskInstance* instance = nullptr;
  Dialect dialect = Dialect::PY;
};

// Parallel over jobs; output is in job order.
std::vector<std::string> complete_mock_batch(std::span<const MockJob> jobs,
                                             const LabelSchema& schema,
                                             const MockModelConfig& cfg);

}  // namespace mpl
