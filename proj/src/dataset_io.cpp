#include "mpl/dataset_io.hpp"

#include <cstdio>
#include <sstream>

#include "mpl/random.hpp"

namespace mpl {

namespace {

std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace

// ---- CoNLL BIO ------------------------------------------------------------

LabelSchema ConllCorpus::schema() const {
  if (labels.empty()) throw Error("CoNLL corpus has no entity labels");
  return LabelSchema(TaskKind::NER, default_task_name(TaskKind::NER), "", labels);
}

ConllCorpus parse_conll_bio(std::string_view contents, std::string_view source) {
  ConllCorpus corpus;
  std::vector<std::string> tokens;
  std::vector<std::pair<std::string, std::string>> entities;  // surface, raw label
  std::string run_label;
  std::string run_surface;

  auto close_run = [&] {
    if (!run_label.empty()) entities.emplace_back(run_surface, run_label);
    run_label.clear();
    run_surface.clear();
  };

  auto add_label = [&](const std::string& raw) {
    const auto name = canonical_label(raw);
    for (const auto& l : corpus.labels) {
      if (l.name == name) return;
    }
    corpus.labels.push_back(LabelDescriptor{name, raw, "", {}});
  };

  auto flush = [&] {
    close_run();
    if (tokens.empty()) return;
    TaskInstance inst;
    inst.id = "sent-" + std::to_string(corpus.instances.size() + 1);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i > 0) inst.text += ' ';
      inst.text += tokens[i];
    }
    for (const auto& [surface, label] : entities) {
      inst.gold.insert(make_entity(surface, canonical_label(label)));
    }
    corpus.instances.push_back(std::move(inst));
    tokens.clear();
    entities.clear();
  };

  std::istringstream in{std::string(contents)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto cols = split_ws(line);
    if (cols.empty()) {
      flush();
      continue;
    }
    if (cols.front() == "-DOCSTART-") {
      flush();
      continue;
    }
    auto where = [&] { return std::string(source) + ":" + std::to_string(lineno) + ": "; };
    if (cols.size() < 2) throw Error(where() + "expected a token and a tag, got '" + line + "'");

    const std::string& token = cols.front();
    const std::string& tag = cols.back();
    if (tag == "O") {
      close_run();
    } else if (tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-') {
      const std::string type = tag.substr(2);
      if (tag[0] == 'I' && run_label == type) {
        run_surface += ' ';
        run_surface += token;
      } else {
        if (tag[0] == 'I') {
          corpus.warnings.push_back(where() + "I-" + type +
                                    " does not continue an entity; treated as B-" + type);
        }
        close_run();
        run_label = type;
        run_surface = token;
        add_label(type);
      }
    } else {
      throw Error(where() + "malformed BIO tag '" + tag + "'");
    }
    tokens.push_back(token);
  }
  flush();
  return corpus;
}

ConllCorpus read_conll_bio(const std::filesystem::path& path) {
  return parse_conll_bio(read_file(path), path.string());
}

// ---- SFT export -----------------------------------------------------------

json sft_record_to_json(const SftRecord& r) {
  return {{"id", r.id},
          {"dialect", std::string(to_string(r.dialect))},
          {"style", std::string(to_string(r.style))},
          {"input", r.input},
          {"output", r.output},
          {"boundary", r.boundary}};
}

SftRecord sft_record_from_json(const json& j) {
  return SftRecord{j.at("id").get<std::string>(),
                   parse_dialect(j.at("dialect").get<std::string>()),
                   parse_prompt_style(j.at("style").get<std::string>()),
                   j.at("input").get<std::string>(),
                   j.at("output").get<std::string>(),
                   j.at("boundary").get<std::size_t>()};
}

json manifest_to_json(const SftManifest& m) {
  return {{"seed", m.seed}, {"total", m.total}, {"per_dialect", m.per_dialect}, {"sha256", m.sha256}};
}

std::vector<SftRecord> build_sft_records(std::span<const TaskInstance> instances,
                                         const LabelSchema& schema,
                                         std::span<const Dialect> dialects, PromptStyle style) {
  const long long n = static_cast<long long>(instances.size());
  const std::size_t k = dialects.size();
  std::vector<SftRecord> records(instances.size() * k);
  std::string error;
#pragma omp parallel for schedule(dynamic, 16)
  for (long long i = 0; i < n; ++i) {
    const auto& inst = instances[static_cast<std::size_t>(i)];
    for (std::size_t d = 0; d < k; ++d) {
      try {
        const auto prompt = compile_prompt(inst, schema, dialects[d], style);
        auto gold = render_gold_output(inst, schema, dialects[d]);
        records[static_cast<std::size_t>(i) * k + d] =
            SftRecord{inst.id, dialects[d], style, prompt.text, std::move(gold.text), prompt.boundary};
      } catch (const std::exception& e) {
#pragma omp critical(mpl_sft_error)
        if (error.empty()) error = e.what();
      }
    }
  }
  if (!error.empty()) throw Error(error);
  return records;
}

std::filesystem::path manifest_path(const std::filesystem::path& path) {
  auto out = path;
  out += ".manifest.json";
  return out;
}

SftManifest export_sft(std::span<const TaskInstance> instances, const LabelSchema& schema,
                       std::span<const Dialect> dialects, PromptStyle style, std::uint64_t seed,
                       const std::filesystem::path& path) {
  auto records = build_sft_records(instances, schema, dialects, style);
  Rng rng(seed);
  shuffle(records, rng);

  SftManifest m;
  m.seed = seed;
  m.total = records.size();
  for (Dialect d : dialects) m.per_dialect[std::string(to_string(d))] = 0;
  std::string body;
  for (const auto& r : records) {
    ++m.per_dialect[std::string(to_string(r.dialect))];
    body += sft_record_to_json(r).dump();
    body += '\n';
  }
  m.sha256 = sha256_hex(body);
  try {
    write_file_atomic(path, body);
    write_file_atomic(manifest_path(path), manifest_to_json(m).dump(2) + "\n");
  } catch (const Error& e) {
    throw Error("export_sft: " + std::string(e.what()));
  }
  return m;
}

// ---- Length statistics ----------------------------------------------------

LengthHistogram histogram_from_lengths(std::span<const std::size_t> lengths,
                                       std::size_t bucket_width) {
  if (bucket_width == 0) throw Error("bucket width must be positive");
  LengthHistogram h;
  h.bucket_width = bucket_width;
  h.total = lengths.size();
  if (lengths.empty()) return h;

  std::size_t lo_bucket = lengths.front() / bucket_width;
  std::size_t hi_bucket = lo_bucket;
  double sum = 0.0;
  for (auto len : lengths) {
    lo_bucket = std::min(lo_bucket, len / bucket_width);
    hi_bucket = std::max(hi_bucket, len / bucket_width);
    sum += static_cast<double>(len);
  }
  h.average = sum / static_cast<double>(lengths.size());
  h.buckets.resize(hi_bucket - lo_bucket + 1);
  for (std::size_t b = 0; b < h.buckets.size(); ++b) {
    h.buckets[b].lo = (lo_bucket + b) * bucket_width;
    h.buckets[b].hi = h.buckets[b].lo + bucket_width;
  }
  for (auto len : lengths) ++h.buckets[len / bucket_width - lo_bucket].count;
  for (auto& b : h.buckets) {
    b.proportion = static_cast<double>(b.count) / static_cast<double>(lengths.size());
  }
  return h;
}

std::optional<std::size_t> lookup_token_count(const TokenCounts& counts, const CodePrompt& p) {
  const std::string key = p.instance_id + ":" + std::string(to_string(p.dialect)) + ":" +
                          std::string(to_string(p.style));
  if (auto it = counts.find(key); it != counts.end()) return it->second;
  if (auto it = counts.find(p.instance_id); it != counts.end()) return it->second;
  return std::nullopt;
}

LengthHistogram length_stats(std::span<const CodePrompt> prompts, LengthUnit unit,
                             std::size_t bucket_width, const TokenCounts* token_counts) {
  std::vector<std::size_t> lengths(prompts.size());
  if (token_counts != nullptr) {
    for (std::size_t i = 0; i < prompts.size(); ++i) {
      const auto n = lookup_token_count(*token_counts, prompts[i]);
      if (!n) throw Error("token counts have no entry for id '" + prompts[i].instance_id + "'");
      lengths[i] = *n;
    }
  } else {
    const long long n = static_cast<long long>(prompts.size());
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) {
      lengths[static_cast<std::size_t>(i)] = prompt_length(prompts[static_cast<std::size_t>(i)], unit);
    }
  }
  return histogram_from_lengths(lengths, bucket_width);
}

TokenCounts parse_token_counts(std::string_view contents, std::string_view source) {
  TokenCounts out;
  std::istringstream in{std::string(contents)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (normalize_surface(line).empty()) continue;
    const auto tab = line.rfind('\t');
    auto where = [&] { return std::string(source) + ":" + std::to_string(lineno) + ": "; };
    if (tab == std::string::npos) throw Error(where() + "expected 'id<TAB>count'");
    const std::string id = line.substr(0, tab);
    const std::string count = normalize_surface(line.substr(tab + 1));
    std::size_t used = 0;
    unsigned long long value = 0;
    try {
      value = std::stoull(count, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != count.size()) throw Error(where() + "bad count '" + count + "'");
    out[id] = static_cast<std::size_t>(value);
  }
  return out;
}

TokenCounts read_token_counts(const std::filesystem::path& path) {
  return parse_token_counts(read_file(path), path.string());
}

json histogram_to_json(const LengthHistogram& h) {
  json buckets = json::array();
  for (const auto& b : h.buckets) {
    buckets.push_back({{"lo", b.lo}, {"hi", b.hi}, {"count", b.count}, {"proportion", b.proportion}});
  }
  return {{"bucket_width", h.bucket_width},
          {"total", h.total},
          {"average", h.average},
          {"buckets", buckets}};
}

std::string histogram_table(const LengthHistogram& h) {
  std::string out = "Length Interval      Count   Proportion\n";
  char line[96];
  for (const auto& b : h.buckets) {
    const std::string range = std::to_string(b.lo) + "-" + std::to_string(b.hi);
    std::snprintf(line, sizeof line, "%-18s %7zu   %9.2f%%\n", range.c_str(), b.count,
                  100.0 * b.proportion);
    out += line;
  }
  std::snprintf(line, sizeof line, "total %zu, average %.2f\n", h.total, h.average);
  out += line;
  return out;
}

}  // namespace mpl
