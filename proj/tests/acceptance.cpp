// Acceptance checks, one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "mpl/dataset_io.hpp"
#include "mpl/ensemble.hpp"
#include "mpl/json_io.hpp"
#include "mpl/mock_model.hpp"
#include "mpl/parser.hpp"
#include "mpl/prompt.hpp"
#include "support/fixtures.hpp"

using namespace mpl;
namespace fs = std::filesystem;

namespace {

constexpr TaskKind kKinds[] = {TaskKind::NER, TaskKind::RE, TaskKind::EE, TaskKind::EAE};

struct Failure {
  std::string what;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Failure{what};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- oracles --------------------------------------------------------------

// Flat tuple for an annotation; equality of tuples is the matching rule.
using Key = std::tuple<int, std::string, std::string, std::string, std::string>;

Key key_of(const Annotation& a) {
  struct {
    Key operator()(const Entity& e) const { return {0, e.label, e.surface, "", ""}; }
    Key operator()(const Relation& r) const { return {1, r.label, r.head, r.tail, ""}; }
    Key operator()(const EventTrigger& t) const { return {2, t.event_type, t.surface, "", ""}; }
    Key operator()(const EventArgument& g) const { return {3, g.event_type, g.surface, g.role, ""}; }
  } v;
  return std::visit(v, a);
}

std::vector<Key> keys_of(const AnnotationSet& s) {
  std::vector<Key> out;
  for (const auto& a : s) out.push_back(key_of(a));
  std::sort(out.begin(), out.end());
  return out;
}

bool contains_key(const std::vector<Key>& v, const Key& k) {
  for (const auto& x : v)
    if (x == k) return true;
  return false;
}

// Brute-force micro counts by linear tuple search.
ScoreReport oracle_f1(const std::vector<AnnotationSet>& preds, const std::vector<AnnotationSet>& golds) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto p = keys_of(preds[i]);
    const auto g = keys_of(golds[i]);
    for (const auto& k : p) (contains_key(g, k) ? tp : fp)++;
    for (const auto& k : g)
      if (!contains_key(p, k)) ++fn;
  }
  ScoreReport r{tp, fp, fn, 0, 0, 0};
  if (tp + fp) r.precision = double(tp) / double(tp + fp);
  if (tp + fn) r.recall = double(tp) / double(tp + fn);
  if (r.precision + r.recall > 0) r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

// Membership counting over three sets.
std::map<Key, int> membership(const DialectSets& sets) {
  std::map<Key, int> counts;
  for (const auto& s : sets)
    for (const auto& a : s) ++counts[key_of(a)];
  return counts;
}

std::vector<Key> keys_with(const std::map<Key, int>& counts, int min_count) {
  std::vector<Key> out;
  for (const auto& [k, c] : counts)
    if (c >= min_count) out.push_back(k);
  return out;
}

// ---- independent noise replay for the mock model --------------------------

std::uint64_t replay_splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t replay_fnv(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
  return h;
}

struct ReplayRng {
  std::mt19937_64 eng;
  double unit() { return double(eng() >> 11) / 9007199254740992.0; }
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = (~n + 1) % n;
    for (;;) {
      const auto r = eng();
      if (r >= limit) return r % n;
    }
  }
};

AnnotationSet replay_mock(const TaskInstance& inst, const LabelSchema& schema, std::uint64_t seed,
                          std::uint64_t offset, double drop, double spurious) {
  ReplayRng rng{std::mt19937_64(replay_splitmix(replay_splitmix(seed + offset) ^ replay_fnv(inst.id)))};
  AnnotationSet out;
  for (const auto& a : ordered_gold(inst, schema))
    if (rng.unit() >= drop) out.insert(a);
  if (rng.unit() < spurious) {
    std::vector<std::string> words;
    std::istringstream in(normalize_surface(inst.text));
    for (std::string w; std::getline(in, w, ' ');)
      if (!w.empty()) words.push_back(w);
    if (words.empty()) return out;
    auto span = [&] {
      const auto start = rng.below(words.size());
      const auto len = 1 + rng.below(std::min<std::uint64_t>(2, words.size() - start));
      std::string s = words[start];
      for (std::uint64_t k = 1; k < len; ++k) s += " " + words[start + k];
      return s;
    };
    const auto& label = schema.labels()[rng.below(schema.labels().size())];
    switch (schema.task()) {
      case TaskKind::NER: out.insert(make_entity(span(), label.name)); break;
      case TaskKind::RE: {
        const auto head = span();
        out.insert(make_relation(head, label.name, span()));
        break;
      }
      case TaskKind::EE: out.insert(make_trigger(span(), label.name)); break;
      case TaskKind::EAE:
        if (!label.roles.empty()) {
          const auto& role = label.roles[rng.below(label.roles.size())];
          out.insert(make_argument(label.name, role.name, span()));
        }
        break;
    }
  }
  return out;
}

// ---- criteria -------------------------------------------------------------

std::string criterion_roundtrip() {
  const auto t0 = std::chrono::steady_clock::now();
  testing::FixtureGenerator gen(101);
  std::size_t cases = 0, instances = 0;
  for (TaskKind k : kKinds) {
    for (int block = 0; block < 10; ++block) {
      const auto ds = gen.dataset(k, 25, std::string(to_string(k)) + "-" + std::to_string(block));
      instances += ds.instances.size();
      for (const auto& inst : ds.instances) {
        for (Dialect d : kAllDialects) {
          const auto gold = render_gold_output(inst, ds.schema, d);
          for (PromptStyle st : {PromptStyle::FUNCTION, PromptStyle::CLASS, PromptStyle::FUNCTION_NO_VIRTUAL_RUN}) {
            const auto prompt = compile_prompt(inst, ds.schema, d, st);
            const std::string full = prompt.text + gold.text;
            const auto parsed = parse_completion(full.substr(prompt.text.size()), d, ds.schema, inst.id);
            require(parsed.diagnostics.empty() && !parsed.truncated && parsed.annotations == inst.gold,
                    "round trip failed for " + inst.id + " " + std::string(to_string(d)) + " " +
                        std::string(to_string(st)));
            require(utf8_length(prompt.text) == prompt.boundary, "boundary mismatch for " + inst.id);
            ++cases;
          }
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  require(secs < 5.0, "took " + std::to_string(secs) + " s");
  return std::to_string(cases) + " cases over " + std::to_string(instances) + " instances in " +
         std::to_string(secs).substr(0, 5) + " s";
}

std::string criterion_ensemble_oracle() {
  testing::FixtureGenerator gen(202);
  for (int trial = 0; trial < 1000; ++trial) {
    DialectSets sets{gen.random_set(10), gen.random_set(10), gen.random_set(10)};
    const auto counts = membership(sets);
    const auto r = ensemble(sets);
    require(keys_of(r.voted) == keys_with(counts, 2), "vote differs in trial " + std::to_string(trial));
    require(keys_of(r.unioned) == keys_with(counts, 1), "union differs in trial " + std::to_string(trial));
    require(keys_of(r.intersected) == keys_with(counts, 3), "intersect differs in trial " + std::to_string(trial));
    require(std::includes(r.voted.begin(), r.voted.end(), r.intersected.begin(), r.intersected.end()) &&
                std::includes(r.unioned.begin(), r.unioned.end(), r.voted.begin(), r.voted.end()),
            "containment broken in trial " + std::to_string(trial));
  }
  return "1000 trials";
}

std::string criterion_jaccard() {
  const auto a = make_entity("a", "X"), b = make_entity("b", "X"), c = make_entity("c", "X");
  require(jaccard({a, b}, {a, b}) == 1.0, "identity");
  require(jaccard({a, b}, {b, c}) == 1.0 / 3.0, "{a,b} vs {b,c}");
  require(jaccard({}, {}) == 1.0, "both empty");
  testing::FixtureGenerator gen(303);
  std::vector<DialectSets> same;
  for (int i = 0; i < 200; ++i) {
    const auto s = gen.random_set(8);
    same.push_back({s, s, s});
  }
  require(dataset_jaccard(same).mean == 1.0, "identical corpus (macro)");
  require(dataset_jaccard(same, JaccardMode::Micro).mean == 1.0, "identical corpus (micro)");
  return "identity 1, 1/3, empty 1, identical corpus 1";
}

std::string criterion_micro_f1() {
  testing::FixtureGenerator gen(404);
  std::vector<AnnotationSet> preds, golds;
  for (int i = 0; i < 500; ++i) {
    preds.push_back(gen.random_set(10));
    golds.push_back(gen.random_set(10));
  }
  const auto lib = micro_f1(preds, golds);
  const auto ref = oracle_f1(preds, golds);
  require(lib == ref, "library and oracle disagree");
  require(serial::micro_f1(preds, golds) == ref, "serial kernel disagrees");
  const auto a = make_entity("a", "X"), b = make_entity("b", "X"), c = make_entity("c", "X");
  const AnnotationSet pred{a, b}, gold{a, c};
  require(micro_f1(std::span(&pred, 1), std::span(&gold, 1)).f1 == 0.5, "hand case");
  return "500 instances, tp=" + std::to_string(ref.tp) + " fp=" + std::to_string(ref.fp) +
         " fn=" + std::to_string(ref.fn) + "; hand case 0.5";
}

std::vector<DialectSets> mock_predictions(const Dataset& ds, const MockModelConfig& cfg) {
  std::vector<MockJob> jobs;
  for (const auto& inst : ds.instances)
    for (Dialect d : kAllDialects) jobs.push_back({&inst, d});
  const auto texts = complete_mock_batch(jobs, ds.schema, cfg);
  std::vector<DialectSets> out(ds.instances.size());
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const auto p = parse_completion(texts[j], jobs[j].dialect, ds.schema, jobs[j].instance->id);
    require(p.diagnostics.empty(), "mock output did not parse cleanly for " + p.instance_id);
    out[j / kDialectCount][index_of(jobs[j].dialect)] = p.annotations;
  }
  return out;
}

std::string criterion_mock_end_to_end() {
  const auto t0 = std::chrono::steady_clock::now();
  testing::FixtureGenerator gen(505);
  std::ostringstream detail;
  for (TaskKind k : kKinds) {
    const auto ds = gen.dataset(k, 1000);
    std::vector<AnnotationSet> golds;
    for (const auto& inst : ds.instances) golds.push_back(inst.gold);
    const std::string kind(to_string(k));

    MockModelConfig clean;
    clean.seed = 1;
    const auto perfect = mock_predictions(ds, clean);
    for (Dialect d : kAllDialects)
      require(micro_f1(dialect_column(perfect, d), golds).f1 == 1.0, kind + " noiseless dialect F1 < 1");
    require(micro_f1(vote_each(perfect), golds).f1 == 1.0, kind + " noiseless vote F1 < 1");
    require(micro_f1(union_each(perfect), golds).f1 == 1.0, kind + " noiseless union F1 < 1");
    require(micro_f1(intersect_each(perfect), golds).f1 == 1.0, kind + " noiseless intersect F1 < 1");
    require(oracle_recall(perfect, golds).f1 == 1.0, kind + " noiseless oracle-recall F1 < 1");

    MockModelConfig noisy{0.3, 0.1, {0, 7919, 104729}, 2024};
    const auto preds = mock_predictions(ds, noisy);
    for (Dialect d : kAllDialects) {
      std::vector<AnnotationSet> replayed;
      for (const auto& inst : ds.instances) {
        replayed.push_back(replay_mock(inst, ds.schema, noisy.seed, noisy.dialect_seed_offsets[index_of(d)],
                                       noisy.drop_rate, noisy.spurious_rate));
      }
      const auto lib = micro_f1(dialect_column(preds, d), golds);
      require(lib == oracle_f1(replayed, golds),
              kind + " " + std::string(to_string(d)) + " F1 differs from the replay");
    }
    const double rv = micro_f1(vote_each(preds), golds).recall;
    const double ru = micro_f1(union_each(preds), golds).recall;
    const double ri = micro_f1(intersect_each(preds), golds).recall;
    require(ru >= rv && rv >= ri, kind + " recall ordering broken");
    const double jm = dataset_jaccard(preds).mean;
    require(jm > 0.5 && jm < 1.0, kind + " mean Jaccard " + std::to_string(jm) + " outside (0.5, 1)");
    detail << kind << " J=" << std::to_string(jm).substr(0, 5) << " ";
  }
  const double secs = seconds_since(t0);
  require(secs < 30.0, "took " + std::to_string(secs) + " s");
  detail << "in " << std::to_string(secs).substr(0, 5) << " s";
  return detail.str();
}

std::string criterion_prompt_length() {
  testing::FixtureGenerator gen(606);
  std::size_t n = 0;
  double function_total = 0, class_total = 0;
  for (TaskKind k : kKinds) {
    for (int block = 0; block < 25; ++block) {
      const auto ds = gen.dataset(k, 10);
      require(ds.schema.labels().size() >= 2, "schema with fewer than 2 labels");
      for (const auto& inst : ds.instances) {
        for (Dialect d : kAllDialects) {
          const auto f = utf8_length(compile_prompt(inst, ds.schema, d, PromptStyle::FUNCTION).text);
          const auto c = utf8_length(compile_prompt(inst, ds.schema, d, PromptStyle::CLASS).text);
          require(f < c, "FUNCTION not shorter for " + inst.id);
          function_total += double(f);
          class_total += double(c);
          ++n;
        }
      }
    }
  }
  const double reduction = 1.0 - function_total / class_total;
  require(reduction >= 0.10, "average reduction " + std::to_string(reduction));
  return std::to_string(n) + " prompts, average reduction " + std::to_string(100 * reduction).substr(0, 4) + "%";
}

std::string criterion_histogram() {
  testing::FixtureGenerator gen(707);
  std::vector<CodePrompt> prompts;
  for (TaskKind k : kKinds) {
    const auto ds = gen.dataset(k, 100);
    for (const auto& inst : ds.instances)
      for (Dialect d : kAllDialects)
        for (PromptStyle st : {PromptStyle::FUNCTION, PromptStyle::CLASS})
          prompts.push_back(compile_prompt(inst, ds.schema, d, st));
  }
  const auto h = length_stats(prompts, LengthUnit::Chars);
  require(h.bucket_width == 100 && !h.buckets.empty(), "bucket width");
  double sum = 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < h.buckets.size(); ++i) {
    const auto& b = h.buckets[i];
    require(b.lo % 100 == 0 && b.hi == b.lo + 100, "bucket is not a 100-wide interval");
    if (i > 0) require(b.lo == h.buckets[i - 1].hi, "buckets not contiguous");
    sum += b.proportion;
    count += b.count;
  }
  for (const auto& p : prompts) {
    const auto len = utf8_length(p.text);
    const auto it = std::find_if(h.buckets.begin(), h.buckets.end(),
                                 [&](const LengthBucket& b) { return b.lo <= len && len < b.hi; });
    require(it != h.buckets.end(), "length outside every bucket");
  }
  require(count == prompts.size() && h.total == prompts.size(), "counts do not add up");
  require(std::abs(sum - 1.0) <= 1e-9, "proportions sum to " + std::to_string(sum));
  return std::to_string(h.buckets.size()) + " buckets over " + std::to_string(prompts.size()) + " prompts";
}

std::string criterion_statement() {
  std::cout << "    Headline model results (fine-tuned 8B-parameter models: average F1 77.6; voting 77.6 vs\n"
               "    union 79.5; pairwise Jaccard 0.88-0.99) need fine-tuned multi-billion-parameter models\n"
               "    and licensed corpora. They are not reproduced here. Those values only bound the\n"
               "    plausible output range of the metrics; acceptance rests on criteria 1-7.\n";
  return "statement printed";
}

std::string criterion_determinism() {
  const fs::path dir = fs::temp_directory_path() / ("mpl_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  testing::FixtureGenerator gen(909);
  const auto ds = gen.dataset(TaskKind::RE, 300);
  const std::vector<Dialect> dialects(std::begin(kAllDialects), std::end(kAllDialects));

  for (int run = 0; run < 2; ++run) {
    export_sft(ds.instances, ds.schema, dialects, PromptStyle::FUNCTION, 17, dir / ("sft" + std::to_string(run) + ".jsonl"));
    std::vector<MockJob> jobs;
    for (const auto& inst : ds.instances)
      for (Dialect d : kAllDialects) jobs.push_back({&inst, d});
    const auto texts = complete_mock_batch(jobs, ds.schema, MockModelConfig{0.3, 0.1, {0, 7919, 104729}, 17});
    std::vector<json> rows;
    for (std::size_t j = 0; j < jobs.size(); ++j)
      rows.push_back({{"id", jobs[j].instance->id}, {"completion", texts[j]}});
    write_file_atomic(dir / ("mock" + std::to_string(run) + ".jsonl"), to_jsonl(rows));
  }
  const bool sft_same = read_file(dir / "sft0.jsonl") == read_file(dir / "sft1.jsonl") &&
                        read_file(manifest_path(dir / "sft0.jsonl")) == read_file(manifest_path(dir / "sft1.jsonl"));
  const bool mock_same = read_file(dir / "mock0.jsonl") == read_file(dir / "mock1.jsonl");
  export_sft(ds.instances, ds.schema, dialects, PromptStyle::FUNCTION, 18, dir / "sft_other.jsonl");
  const bool seed_matters = read_file(dir / "sft0.jsonl") != read_file(dir / "sft_other.jsonl");
  fs::remove_all(dir);
  require(sft_same, "export-sft output differs between runs");
  require(mock_same, "mock output differs between runs");
  require(seed_matters, "export-sft ignores the seed");
  return "export-sft and mock byte-identical across runs";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<std::string()>>> criteria = {
      {"round-trip law", criterion_roundtrip},
      {"ensemble oracle equivalence", criterion_ensemble_oracle},
      {"jaccard correctness", criterion_jaccard},
      {"micro-F1 oracle equivalence", criterion_micro_f1},
      {"mock end-to-end", criterion_mock_end_to_end},
      {"prompt-length direction", criterion_prompt_length},
      {"histogram format", criterion_histogram},
      {"non-reproducibility statement", criterion_statement},
      {"determinism", criterion_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::string status = "PASS", detail;
    try {
      detail = criteria[i].second();
    } catch (const Failure& f) {
      status = "FAIL";
      detail = f.what;
    } catch (const std::exception& e) {
      status = "FAIL";
      detail = std::string("exception: ") + e.what();
    }
    if (status == "FAIL") ++failed;
    std::cout << status << "  " << (i + 1) << ". " << criteria[i].first << ": " << detail << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed;
}
