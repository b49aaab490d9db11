// mpl: compile prompts, run inference, parse, score and export SFT data.
//
// Exit codes: 0 success, 2 user or validation error, 3 transport error.

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mpl/core.hpp"
#include "mpl/dataset_io.hpp"
#include "mpl/ensemble.hpp"
#include "mpl/gateway.hpp"
#include "mpl/json_io.hpp"
#include "mpl/mock_model.hpp"
#include "mpl/parser.hpp"
#include "mpl/prompt.hpp"

#ifndef MPL_VERSION
#define MPL_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace mpl;

namespace {

constexpr int kExitUser = 2;
constexpr int kExitTransport = 3;

// Thrown after per-instance messages have already been printed.
struct ValidationFailed {
  std::size_t count;
};

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Sidecar written next to every output file: <out>.run.json
class RunManifest {
 public:
  RunManifest(std::string command, std::string config) : command_(std::move(command)), config_(std::move(config)), started_(utc_now()) {}

  void input(const fs::path& p) { inputs_.push_back(p); }
  void output(const fs::path& p) { outputs_.push_back(p); }
  void seed(std::uint64_t s) { seed_ = s; }

  void write(const fs::path& primary_output) const {
    json j;
    j["command"] = command_;
    j["version"] = MPL_VERSION;
    j["config"] = config_;
    j["config_sha256"] = sha256_hex(config_);
    j["seed"] = seed_ ? json(*seed_) : json(nullptr);
    auto files = [](const std::vector<fs::path>& paths) {
      json arr = json::array();
      for (const auto& p : paths) arr.push_back({{"path", p.string()}, {"sha256", sha256_hex(read_file(p))}});
      return arr;
    };
    j["inputs"] = files(inputs_);
    j["outputs"] = files(outputs_);
    j["started_at"] = started_;
    j["finished_at"] = utc_now();
    write_file_atomic(primary_output.string() + ".run.json", j.dump(2) + "\n");
  }

 private:
  std::string command_;
  std::string config_;
  std::string started_;
  std::optional<std::uint64_t> seed_;
  std::vector<fs::path> inputs_;
  std::vector<fs::path> outputs_;
};

Dataset load_any(const fs::path& path, const std::string& format) {
  std::string fmt = format;
  if (fmt == "auto") {
    const auto ext = path.extension().string();
    fmt = (ext == ".conll" || ext == ".bio" || ext == ".iob") ? "conll" : "json";
  }
  if (fmt == "conll") {
    auto corpus = read_conll_bio(path);
    for (const auto& w : corpus.warnings) std::cerr << "warning: " << w << "\n";
    return Dataset{corpus.schema(), std::move(corpus.instances)};
  }
  return load_dataset(path);
}

void validate_all(const Dataset& ds) {
  std::size_t n = 0;
  for (const auto& inst : ds.instances) {
    for (const auto& v : validate_instance(inst, ds.schema)) {
      std::cerr << "instance " << v.instance_id << ": " << v.message << "\n";
      ++n;
    }
  }
  if (n > 0) throw ValidationFailed{n};
}

std::vector<Dialect> parse_dialects(const std::vector<std::string>& names) {
  std::vector<Dialect> out;
  for (const auto& n : names) {
    const Dialect d = parse_dialect(n);
    if (std::find(out.begin(), out.end(), d) != out.end()) throw Error("dialect listed twice: " + n);
    out.push_back(d);
  }
  if (out.empty()) throw Error("no dialects given");
  return out;
}

std::map<std::string, const TaskInstance*> index_instances(const Dataset& ds) {
  std::map<std::string, const TaskInstance*> by_id;
  for (const auto& inst : ds.instances) {
    if (!by_id.emplace(inst.id, &inst).second) throw Error("duplicate instance id '" + inst.id + "'");
  }
  return by_id;
}

void print_length_summary(std::span<const CodePrompt> prompts, std::size_t bucket_width) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> per_style;  // total chars, count
  for (const auto& p : prompts) {
    auto& acc = per_style[std::string(to_string(p.style))];
    acc.first += prompt_length(p, LengthUnit::Chars);
    ++acc.second;
  }
  for (const auto& [style, acc] : per_style) {
    std::cout << "average prompt length (" << style << "): " << std::fixed << std::setprecision(1)
              << static_cast<double>(acc.first) / static_cast<double>(acc.second) << " chars over "
              << acc.second << " prompts\n";
  }
  std::cout << histogram_table(length_stats(prompts, LengthUnit::Chars, bucket_width));
}

// ---- subcommands ----------------------------------------------------------

struct CompileArgs {
  fs::path dataset, out;
  std::string format = "auto";
  std::vector<std::string> dialects{"py", "cpp", "java"};
  std::string style = "function";
  std::size_t bucket_width = 100;
};

void cmd_compile(const CompileArgs& a, RunManifest& m) {
  const Dataset ds = load_any(a.dataset, a.format);
  m.input(a.dataset);
  validate_all(ds);
  const auto dialects = parse_dialects(a.dialects);
  const PromptStyle style = parse_prompt_style(a.style);
  std::vector<json> rows;
  std::vector<CodePrompt> prompts;
  for (const auto& inst : ds.instances) {
    for (Dialect d : dialects) {
      auto p = compile_prompt(inst, ds.schema, d, style);
      rows.push_back(prompt_record(p, render_gold_output(inst, ds.schema, d)));
      prompts.push_back(std::move(p));
    }
  }
  write_file_atomic(a.out, to_jsonl(rows));
  m.output(a.out);
  std::cout << "wrote " << rows.size() << " prompts to " << a.out.string() << "\n";
  if (!prompts.empty()) print_length_summary(prompts, a.bucket_width);
}

struct InferArgs {
  fs::path prompts, out, dataset;
  std::string format = "auto";
  bool mock = false;
  double drop = 0.0, spurious = 0.0;
  std::optional<std::uint64_t> seed;
  GatewayConfig gateway;
};

void cmd_infer(const InferArgs& a, RunManifest& m) {
  std::vector<CodePrompt> prompts;
  for (const auto& row : read_jsonl(a.prompts)) prompts.push_back(prompt_from_record(row));
  m.input(a.prompts);

  std::vector<std::string> completions;
  if (a.mock) {
    if (a.dataset.empty()) throw Error("--mock needs --dataset to know the gold annotations");
    if (!a.seed) throw Error("--mock needs --seed");
    const Dataset ds = load_any(a.dataset, a.format);
    m.input(a.dataset);
    m.seed(*a.seed);
    const auto by_id = index_instances(ds);
    std::vector<MockJob> jobs;
    for (const auto& p : prompts) {
      const auto it = by_id.find(p.instance_id);
      if (it == by_id.end()) throw Error("instance " + p.instance_id + ": not in dataset " + a.dataset.string());
      jobs.push_back({it->second, p.dialect});
    }
    MockModelConfig cfg;
    cfg.drop_rate = a.drop;
    cfg.spurious_rate = a.spurious;
    cfg.seed = *a.seed;
    completions = complete_mock_batch(jobs, ds.schema, cfg);
  } else {
    completions = complete_remote_batch(prompts, a.gateway);
  }

  std::vector<json> rows;
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    rows.push_back({{"id", prompts[i].instance_id},
                    {"dialect", std::string(to_string(prompts[i].dialect))},
                    {"style", std::string(to_string(prompts[i].style))},
                    {"completion", completions[i]}});
  }
  write_file_atomic(a.out, to_jsonl(rows));
  m.output(a.out);
  std::cout << "wrote " << rows.size() << " completions to " << a.out.string() << "\n";
}

struct ParseArgs {
  fs::path completions, dataset, out;
  std::string format = "auto";
};

void cmd_parse(const ParseArgs& a, RunManifest& m) {
  const Dataset ds = load_any(a.dataset, a.format);
  m.input(a.completions);
  m.input(a.dataset);
  std::vector<json> rows;
  std::size_t with_diag = 0, truncated = 0;
  for (const auto& row : read_jsonl(a.completions)) {
    const auto pred = parse_completion(row.at("completion").get<std::string>(),
                                       parse_dialect(row.at("dialect").get<std::string>()), ds.schema,
                                       row.at("id").get<std::string>());
    if (!pred.diagnostics.empty()) ++with_diag;
    if (pred.truncated) ++truncated;
    rows.push_back(prediction_record(pred));
  }
  write_file_atomic(a.out, to_jsonl(rows));
  m.output(a.out);
  std::cout << "parsed " << rows.size() << " completions (" << with_diag << " with diagnostics, " << truncated
            << " truncated)\n";
}

struct ScoreArgs {
  fs::path predictions, dataset, out;
  std::string format = "auto";
  std::string ensemble = "all";
  std::string jaccard = "macro";
};

json score_json(const Dataset& ds, std::span<const PredictionSet> preds, const std::string& ensemble_mode,
                JaccardMode jmode) {
  std::vector<std::string> ids;
  const auto grouped = group_by_instance(preds, &ids);
  const auto by_id = index_instances(ds);
  std::vector<AnnotationSet> golds;
  for (const auto& id : ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw Error("instance " + id + ": predicted but not in dataset");
    golds.push_back(it->second->gold);
  }
  if (ids.size() != ds.instances.size()) {
    for (const auto& inst : ds.instances) {
      if (std::find(ids.begin(), ids.end(), inst.id) == ids.end())
        throw Error("instance " + inst.id + ": no predictions");
    }
  }

  json j;
  j["task"] = std::string(to_string(ds.schema.task()));
  j["n_instances"] = ids.size();
  json per = json::object();
  for (Dialect d : kAllDialects) per[std::string(to_string(d))] = score_to_json(micro_f1(dialect_column(grouped, d), golds));
  j["per_dialect"] = per;
  const bool all = ensemble_mode == "all";
  if (all || ensemble_mode == "vote") j["voting"] = score_to_json(micro_f1(vote_each(grouped), golds));
  if (all || ensemble_mode == "union") j["union"] = score_to_json(micro_f1(union_each(grouped), golds));
  if (all) j["intersect"] = score_to_json(micro_f1(intersect_each(grouped), golds));
  if (all || ensemble_mode == "oracle-recall") j["oracle_recall"] = score_to_json(oracle_recall(grouped, golds));
  const auto jac = dataset_jaccard(grouped, jmode);
  json pairs = json::object();
  for (std::size_t i = 0; i < kDialectPairs.size(); ++i) {
    pairs[std::string(to_string(kDialectPairs[i].first)) + "-" + std::string(to_string(kDialectPairs[i].second))] =
        jac.pairs[i];
  }
  j["jaccard"] = {{"mode", jmode == JaccardMode::Macro ? "macro" : "micro"}, {"pairs", pairs}, {"mean", jac.mean}};
  if (all) j["union_voting_gap"] = union_voting_gap(grouped, golds);
  return j;
}

void print_score(const json& j) {
  auto line = [](const std::string& name, const json& s) {
    std::cout << std::left << std::setw(14) << name << std::right << std::fixed << std::setprecision(4)
              << " P " << s["p"].get<double>() << "  R " << s["r"].get<double>() << "  F1 "
              << s["f1"].get<double>() << "\n";
  };
  for (const auto& [d, s] : j["per_dialect"].items()) line(d, s);
  for (const char* k : {"voting", "union", "intersect", "oracle_recall"}) {
    if (j.contains(k)) line(k, j[k]);
  }
  std::cout << "jaccard mean  " << std::setprecision(4) << j["jaccard"]["mean"].get<double>() << "\n";
}

void cmd_score(const ScoreArgs& a, RunManifest& m) {
  const Dataset ds = load_any(a.dataset, a.format);
  m.input(a.predictions);
  m.input(a.dataset);
  std::vector<PredictionSet> preds;
  for (const auto& row : read_jsonl(a.predictions)) preds.push_back(prediction_from_record(row));
  const JaccardMode jmode = a.jaccard == "micro" ? JaccardMode::Micro : JaccardMode::Macro;
  const json j = score_json(ds, preds, a.ensemble, jmode);
  print_score(j);
  if (!a.out.empty()) {
    write_file_atomic(a.out, j.dump(2) + "\n");
    m.output(a.out);
  }
}

struct StatsArgs {
  fs::path prompts, out, token_counts;
  std::string unit = "chars";
  std::size_t bucket_width = 100;
};

void cmd_stats(const StatsArgs& a, RunManifest& m) {
  std::vector<CodePrompt> prompts;
  for (const auto& row : read_jsonl(a.prompts)) prompts.push_back(prompt_from_record(row));
  m.input(a.prompts);
  std::optional<TokenCounts> counts;
  if (!a.token_counts.empty()) {
    counts = read_token_counts(a.token_counts);
    m.input(a.token_counts);
  }
  const auto h = length_stats(prompts, parse_length_unit(a.unit), a.bucket_width, counts ? &*counts : nullptr);
  std::cout << histogram_table(h);
  if (!a.out.empty()) {
    write_file_atomic(a.out, histogram_to_json(h).dump(2) + "\n");
    m.output(a.out);
  }
}

struct ExportArgs {
  fs::path dataset, out;
  std::string format = "auto";
  std::vector<std::string> dialects{"py", "cpp", "java"};
  std::string style = "function";
  std::uint64_t seed = 0;
};

void cmd_export_sft(const ExportArgs& a, RunManifest& m) {
  const Dataset ds = load_any(a.dataset, a.format);
  m.input(a.dataset);
  m.seed(a.seed);
  validate_all(ds);
  const auto dialects = parse_dialects(a.dialects);
  const auto manifest = export_sft(ds.instances, ds.schema, dialects, parse_prompt_style(a.style), a.seed, a.out);
  m.output(a.out);
  m.output(manifest_path(a.out));
  std::cout << "wrote " << manifest.total << " records to " << a.out.string() << " (sha256 " << manifest.sha256
            << ")\n";
}

void add_format(CLI::App* sub, std::string& format) {
  sub->add_option("--format", format, "Dataset format")->check(CLI::IsMember({"auto", "json", "conll"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-dialect code-style prompting for information extraction"};
  app.set_version_flag("--version", MPL_VERSION);
  app.set_config("--config", "", "Read options from a key=value config file");
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  CompileArgs compile;
  auto* c = app.add_subcommand("compile", "Compile a dataset into code-style prompts and gold completions");
  c->add_option("--dataset", compile.dataset, "Dataset (JSON or CoNLL BIO)")->required()->check(CLI::ExistingFile);
  c->add_option("--out", compile.out, "Prompt JSONL output")->required();
  c->add_option("--dialects", compile.dialects, "Comma-separated dialects")->delimiter(',');
  c->add_option("--style", compile.style, "function, function_no_virtual_run or class");
  c->add_option("--bucket-width", compile.bucket_width, "Histogram bucket width")->check(CLI::PositiveNumber);
  add_format(c, compile.format);

  InferArgs infer;
  auto* i = app.add_subcommand("infer", "Run completions for compiled prompts");
  i->add_option("--prompts", infer.prompts, "Prompt JSONL")->required()->check(CLI::ExistingFile);
  i->add_option("--out", infer.out, "Completion JSONL output")->required();
  i->add_flag("--mock", infer.mock, "Use the deterministic mock model (takes precedence over --endpoint)");
  i->add_option("--dataset", infer.dataset, "Dataset with gold annotations (mock only)")->check(CLI::ExistingFile);
  i->add_option("--drop", infer.drop, "Mock: probability of dropping a gold term")->check(CLI::Range(0.0, 1.0));
  i->add_option("--spurious", infer.spurious, "Mock: probability of one fabricated term")->check(CLI::Range(0.0, 1.0));
  i->add_option("--seed", infer.seed, "Mock: seed");
  i->add_option("--endpoint", infer.gateway.endpoint, "Chat-completions base URL");
  i->add_option("--model", infer.gateway.model, "Model name sent to the endpoint");
  i->add_option("--max-tokens", infer.gateway.max_tokens);
  i->add_option("--temperature", infer.gateway.temperature);
  i->add_option("--timeout", infer.gateway.timeout_seconds, "Per-request timeout in seconds");
  i->add_option("--max-concurrent", infer.gateway.max_concurrent);
  i->add_option("--max-attempts", infer.gateway.max_attempts);
  i->add_option("--backoff", infer.gateway.backoff_base_seconds, "Backoff base in seconds");
  add_format(i, infer.format);

  ParseArgs parse;
  auto* p = app.add_subcommand("parse", "Parse completions into prediction sets");
  p->add_option("--completions", parse.completions, "Completion JSONL")->required()->check(CLI::ExistingFile);
  p->add_option("--dataset", parse.dataset, "Dataset (for the label schema)")->required()->check(CLI::ExistingFile);
  p->add_option("--out", parse.out, "Prediction JSONL output")->required();
  add_format(p, parse.format);

  ScoreArgs score;
  auto* s = app.add_subcommand("score", "Score predictions per dialect and as an ensemble");
  s->add_option("--predictions", score.predictions, "Prediction JSONL")->required()->check(CLI::ExistingFile);
  s->add_option("--dataset", score.dataset, "Gold dataset")->required()->check(CLI::ExistingFile);
  s->add_option("--out", score.out, "Score JSON output");
  s->add_option("--ensemble", score.ensemble, "Ensemble modes to report")
      ->check(CLI::IsMember({"all", "vote", "union", "oracle-recall", "none"}));
  s->add_option("--jaccard", score.jaccard, "Jaccard averaging")->check(CLI::IsMember({"macro", "micro"}));
  add_format(s, score.format);

  StatsArgs stats;
  auto* st = app.add_subcommand("stats", "Prompt length histogram");
  st->add_option("--prompts", stats.prompts, "Prompt JSONL")->required()->check(CLI::ExistingFile);
  st->add_option("--unit", stats.unit, "chars or ws_tokens (ignored with --token-counts)");
  st->add_option("--token-counts", stats.token_counts, "TSV of id<TAB>count")->check(CLI::ExistingFile);
  st->add_option("--bucket-width", stats.bucket_width)->check(CLI::PositiveNumber);
  st->add_option("--out", stats.out, "Histogram JSON output");

  ExportArgs sft;
  auto* e = app.add_subcommand("export-sft", "Write a shuffled fine-tuning JSONL with loss boundaries");
  e->add_option("--dataset", sft.dataset, "Dataset (JSON or CoNLL BIO)")->required()->check(CLI::ExistingFile);
  e->add_option("--out", sft.out, "SFT JSONL output")->required();
  e->add_option("--dialects", sft.dialects, "Comma-separated dialects")->delimiter(',');
  e->add_option("--style", sft.style);
  e->add_option("--seed", sft.seed, "Shuffle seed")->required();
  add_format(e, sft.format);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kExitUser;
  }

  auto* sub = app.get_subcommands().front();
  // Prefixed with the subcommand so `mpl --config <file> <subcommand>` replays the run.
  std::string config;
  {
    std::istringstream lines(sub->config_to_str(true, false));
    for (std::string line; std::getline(lines, line);) config += sub->get_name() + "." + line + "\n";
  }
  RunManifest manifest(sub->get_name(), config);
  try {
    fs::path out;
    if (sub == c) cmd_compile(compile, manifest), out = compile.out;
    else if (sub == i) cmd_infer(infer, manifest), out = infer.out;
    else if (sub == p) cmd_parse(parse, manifest), out = parse.out;
    else if (sub == s) cmd_score(score, manifest), out = score.out;
    else if (sub == st) cmd_stats(stats, manifest), out = stats.out;
    else if (sub == e) cmd_export_sft(sft, manifest), out = sft.out;
    if (!out.empty()) manifest.write(out);
  } catch (const ValidationFailed& v) {
    std::cerr << "error: " << v.count << " validation error(s)\n";
    return kExitUser;
  } catch (const TransportError& err) {
    std::cerr << "transport error: " << err.what() << "\n";
    return kExitTransport;
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitUser;
  } catch (const json::exception& err) {
    std::cerr << "error: malformed JSON: " << err.what() << "\n";
    return kExitUser;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitUser;
  }
  return 0;
}
