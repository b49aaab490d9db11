// Serial reference vs OpenMP kernels on a synthetic corpus.
//
//   mpl_bench [instances] [repeats]
//
// Thread count follows OMP_NUM_THREADS.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mpl/ensemble.hpp"
#include "mpl/mock_model.hpp"

using namespace mpl;

namespace {

double best_ms(int repeats, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    best = std::min(best, ms);
  }
  return best;
}

AnnotationSet random_set(std::mt19937_64& rng, std::size_t max_items, std::size_t universe) {
  AnnotationSet s;
  const std::size_t n = rng() % (max_items + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t u = rng() % universe;
    s.insert(make_entity("token " + std::to_string(u / 4), "L" + std::to_string(u % 4)));
  }
  return s;
}

bool all_match = true;

// Times both sides before comparing results.
void row(const char* name, int repeats, const std::function<void()>& serial_fn,
         const std::function<void()>& parallel_fn, const std::function<bool()>& same_fn) {
  const double serial = best_ms(repeats, serial_fn);
  const double parallel = best_ms(repeats, parallel_fn);
  const bool same = same_fn();
  all_match = all_match && same;
  std::printf("%-18s %10.2f %10.2f %8.2fx  %s\n", name, serial, parallel, serial / parallel,
              same ? "match" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 200000;
  const int repeats = argc > 2 ? std::atoi(argv[2]) : 5;

  std::mt19937_64 rng(7);
  std::vector<DialectSets> preds(n);
  std::vector<AnnotationSet> golds(n);
  for (std::size_t i = 0; i < n; ++i) {
    golds[i] = random_set(rng, 8, 40);
    for (auto& s : preds[i]) s = random_set(rng, 8, 40);
  }
  const auto py = dialect_column(preds, Dialect::PY);

  std::printf("%zu instances, %d threads, best of %d\n", n, omp_get_max_threads(), repeats);
  std::printf("%-18s %10s %10s %9s\n", "kernel", "serial ms", "omp ms", "speedup");

  ScoreReport f1_s, f1_p;
  row("micro_f1", repeats, [&] { f1_s = serial::micro_f1(py, golds); }, [&] { f1_p = micro_f1(py, golds); },
      [&] { return f1_s == f1_p; });

  JaccardSummary j_s, j_p;
  auto same_jaccard = [&] { return j_s.mean == j_p.mean && j_s.pairs == j_p.pairs; };
  row("jaccard (macro)", repeats, [&] { j_s = serial::dataset_jaccard(preds); },
      [&] { j_p = dataset_jaccard(preds); }, same_jaccard);
  row("jaccard (micro)", repeats, [&] { j_s = serial::dataset_jaccard(preds, JaccardMode::Micro); },
      [&] { j_p = dataset_jaccard(preds, JaccardMode::Micro); }, same_jaccard);

  std::vector<AnnotationSet> v_s, v_p;
  auto same_sets = [&] { return v_s == v_p; };
  row("vote_each", repeats, [&] { v_s = serial::vote_each(preds); }, [&] { v_p = vote_each(preds); }, same_sets);
  row("union_each", repeats, [&] { v_s = serial::union_each(preds); }, [&] { v_p = union_each(preds); }, same_sets);

  // Mock inference: a plain loop over complete_mock vs the OpenMP batch.
  std::vector<TaskInstance> instances(std::min<std::size_t>(n, 50000));
  for (std::size_t i = 0; i < instances.size(); ++i) {
    instances[i].id = "bench-" + std::to_string(i);
    for (const auto& a : golds[i]) instances[i].text += std::get<Entity>(a).surface + " ";
    instances[i].gold = golds[i];
  }
  const LabelSchema schema(TaskKind::NER, default_task_name(TaskKind::NER), "Extract entities.",
                           {{"L0", "L0", "", {}}, {"L1", "L1", "", {}}, {"L2", "L2", "", {}}, {"L3", "L3", "", {}}});
  std::vector<MockJob> jobs;
  for (const auto& inst : instances)
    for (Dialect d : kAllDialects) jobs.push_back({&inst, d});
  const MockModelConfig cfg{0.3, 0.1, {0, 7919, 104729}, 1};
  std::vector<std::string> m_s(jobs.size()), m_p;
  row(
      "mock inference", repeats,
      [&] {
        for (std::size_t j = 0; j < jobs.size(); ++j)
          m_s[j] = complete_mock(*jobs[j].instance, schema, jobs[j].dialect, cfg);
      },
      [&] { m_p = complete_mock_batch(jobs, schema, cfg); }, [&] { return m_s == m_p; });
  return all_match ? 0 : 1;
}
