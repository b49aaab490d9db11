#include "mpl/mock_model.hpp"

#include <algorithm>
#include <optional>

#include "mpl/prompt.hpp"
#include "mpl/random.hpp"

namespace mpl {

namespace {

std::vector<std::string_view> split_words(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(' ', start), text.size());
    if (end > start) words.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return words;
}

std::string random_span(const std::vector<std::string_view>& words, Rng& rng) {
  const std::uint64_t w = words.size();
  const std::uint64_t start = rng.below(w);
  const std::uint64_t len = 1 + rng.below(std::min<std::uint64_t>(2, w - start));
  std::string out;
  for (std::uint64_t i = start; i < start + len; ++i) {
    if (i > start) out += ' ';
    out += words[i];
  }
  return out;
}

std::optional<Annotation> fabricate(const LabelSchema& schema, const std::string& text, Rng& rng) {
  const auto words = split_words(text);
  if (words.empty()) return std::nullopt;
  const auto& label = schema.labels()[rng.below(schema.labels().size())];
  switch (schema.task()) {
    case TaskKind::NER: return make_entity(random_span(words, rng), label.name);
    case TaskKind::RE: {
      auto head = random_span(words, rng);
      auto tail = random_span(words, rng);
      return make_relation(head, label.name, tail);
    }
    case TaskKind::EE: return make_trigger(random_span(words, rng), label.name);
    case TaskKind::EAE: {
      if (label.roles.empty()) return std::nullopt;
      const auto& role = label.roles[rng.below(label.roles.size())];
      return make_argument(label.name, role.name, random_span(words, rng));
    }
  }
  return std::nullopt;
}

}  // namespace

void MockModelConfig::validate() const {
  if (drop_rate < 0 || drop_rate > 1) throw Error("drop_rate must be in [0, 1]");
  if (spurious_rate < 0 || spurious_rate > 1) throw Error("spurious_rate must be in [0, 1]");
}

std::uint64_t mock_stream_seed(const MockModelConfig& cfg, std::string_view instance_id,
                               Dialect dialect) {
  return splitmix64(splitmix64(cfg.seed + cfg.dialect_seed_offsets[index_of(dialect)]) ^
                    fnv1a64(instance_id));
}

std::string complete_mock(const TaskInstance& inst, const LabelSchema& schema, Dialect dialect,
                          const MockModelConfig& cfg) {
  cfg.validate();
  Rng rng(mock_stream_seed(cfg, inst.id, dialect));
  std::vector<Annotation> kept;
  for (auto& term : ordered_gold(inst, schema)) {
    if (rng.unit() >= cfg.drop_rate) kept.push_back(std::move(term));
  }
  if (rng.unit() < cfg.spurious_rate) {
    const std::string text = normalize_surface(inst.text);
    if (auto extra = fabricate(schema, text, rng)) {
      if (std::find(kept.begin(), kept.end(), *extra) == kept.end()) kept.push_back(std::move(*extra));
    }
  }
  return render_collection(kept, dialect);
}

std::vector<std::string> complete_mock_batch(std::span<const MockJob> jobs,
                                             const LabelSchema& schema,
                                             const MockModelConfig& cfg) {
  cfg.validate();
  std::vector<std::string> out(jobs.size());
  const long long n = static_cast<long long>(jobs.size());
#pragma omp parallel for schedule(dynamic, 32)
  for (long long i = 0; i < n; ++i) {
    const auto& job = jobs[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = complete_mock(*job.instance, schema, job.dialect, cfg);
  }
  return out;
}

}  // namespace mpl
