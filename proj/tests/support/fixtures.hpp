#pragma once

// Synthetic corpora for tests and benchmarks. Everything is derived from a
// std::mt19937_64 seed so runs are reproducible.

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "mpl/core.hpp"

namespace mpl::testing {

inline LabelSchema ner_schema() {
  return LabelSchema(TaskKind::NER, "Named_Entity_Recognition",
                     "Extract named entities of the listed types from the input text.",
                     {{"PERSON", "PERSON", "a named individual", {}},
                      {"ORG", "ORG", "a company, agency or institution", {}}});
}

inline TaskInstance obama_instance() {
  return TaskInstance{"ex-1", "Obama visited Google",
                      {make_entity("Obama", "PERSON"), make_entity("Google", "ORG")}};
}

class FixtureGenerator {
 public:
  explicit FixtureGenerator(std::uint64_t seed) : rng_(seed) {}

  std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  bool coin(double p) { return std::uniform_real_distribution<double>(0, 1)(rng_) < p; }

  LabelSchema schema(TaskKind kind, std::size_t min_labels = 2, std::size_t max_labels = 5) {
    static const char* kNames[] = {"PERSON", "ORG",    "LOC",    "GPE",   "FAC",   "VEH",
                                   "WEA",    "ATTACK", "MEET",   "DIE",   "ELECT", "WORK_FOR",
                                   "PART",   "NEAR",   "MEMBER", "OWNER", "TRAVEL"};
    static const char* kRoles[] = {"Agent", "Victim", "Place", "Time", "Instrument", "Target"};
    const std::size_t n = min_labels + below(max_labels - min_labels + 1);
    std::vector<std::string> names(std::begin(kNames), std::end(kNames));
    std::shuffle(names.begin(), names.end(), rng_);
    std::vector<LabelDescriptor> labels;
    for (std::size_t i = 0; i < n; ++i) {
      LabelDescriptor d{names[i], names[i], "description of " + names[i] + " " + words(1 + below(6)), {}};
      if (kind == TaskKind::EE || kind == TaskKind::EAE) {
        std::vector<std::string> roles(std::begin(kRoles), std::end(kRoles));
        std::shuffle(roles.begin(), roles.end(), rng_);
        const std::size_t r = 1 + below(3);
        for (std::size_t j = 0; j < r; ++j) d.roles.push_back({roles[j], "the " + roles[j]});
      }
      labels.push_back(std::move(d));
    }
    return LabelSchema(kind, default_task_name(kind), "Definition for " + default_task_name(kind) + ".",
                       std::move(labels));
  }

  std::string words(std::size_t n) {
    static const char* kWords[] = {"Obama",  "visited", "Google", "in",       "New",    "York",
                                   "the",    "army",    "said",   "Zürich",   "\"quoted\"", "back\\slash",
                                   "O'Neil", "met",     "with",   "Merkel",   "at",     "noon",
                                   "bank",   "fired",   "two",    "rockets",  "on",     "Monday",
                                   "Acme",   "Corp.",   "U.S.",   "Navy",     "ship",   "a\ttab"};
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
      if (i > 0) out += ' ';
      out += kWords[below(std::size(kWords))];
    }
    return out;
  }

  TaskInstance instance(const LabelSchema& schema, std::string id, std::size_t max_gold = 6) {
    TaskInstance inst;
    inst.id = std::move(id);
    const std::size_t n_words = 4 + below(14);
    inst.text = words(n_words);
    if (coin(0.1)) inst.text += "\nsecond line";
    const std::string text = normalize_surface(inst.text);
    std::vector<std::string> tokens;
    {
      std::size_t start = 0;
      while (start <= text.size()) {
        auto end = std::min(text.find(' ', start), text.size());
        if (end > start) tokens.push_back(text.substr(start, end - start));
        start = end + 1;
      }
    }
    auto span = [&] {
      const std::size_t s = below(tokens.size());
      const std::size_t len = 1 + below(std::min<std::size_t>(3, tokens.size() - s));
      std::string out;
      for (std::size_t i = s; i < s + len; ++i) {
        if (i > s) out += ' ';
        out += tokens[i];
      }
      return out;
    };
    const std::size_t n_gold = below(max_gold + 1);
    for (std::size_t i = 0; i < n_gold; ++i) {
      const auto& label = schema.labels()[below(schema.labels().size())];
      switch (schema.task()) {
        case TaskKind::NER: inst.gold.insert(make_entity(span(), label.name)); break;
        case TaskKind::RE: inst.gold.insert(make_relation(span(), label.name, span())); break;
        case TaskKind::EE:
          if (coin(0.5)) {
            inst.gold.insert(make_trigger(span(), label.name));
            break;
          }
          [[fallthrough]];
        case TaskKind::EAE: {
          const auto& role = label.roles[below(label.roles.size())];
          inst.gold.insert(make_argument(label.name, role.name, span()));
          break;
        }
      }
    }
    return inst;
  }

  Dataset dataset(TaskKind kind, std::size_t n, const std::string& prefix = "inst") {
    Dataset ds{schema(kind), {}};
    for (std::size_t i = 0; i < n; ++i) {
      ds.instances.push_back(instance(ds.schema, prefix + "-" + std::to_string(i)));
    }
    return ds;
  }

  // A random annotation set over a small universe, so sets overlap often.
  AnnotationSet random_set(std::size_t max_items, std::size_t universe = 12) {
    AnnotationSet s;
    const std::size_t n = below(max_items + 1);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t u = below(universe);
      s.insert(make_entity("e" + std::to_string(u / 3), u % 3 == 0 ? "PERSON" : (u % 3 == 1 ? "ORG" : "LOC")));
    }
    return s;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace mpl::testing
