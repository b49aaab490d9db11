#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mpl/core.hpp"
#include "mpl/json_io.hpp"
#include "mpl/prompt.hpp"

namespace mpl {

// ---- CoNLL BIO ------------------------------------------------------------

struct ConllCorpus {
  std::vector<LabelDescriptor> labels;  // first-seen order, empty descriptions
  std::vector<TaskInstance> instances;  // one per sentence, ids "sent-<n>"
  std::vector<std::string> warnings;

  // NER schema over the collected labels. Throws if no labels were seen.
  LabelSchema schema() const;
};

// Token-per-line, tag in the last whitespace-separated column, blank lines
// between sentences, -DOCSTART- lines ignored. Tokens are joined by single
// spaces. An I- tag that does not continue a run of the same type starts a
// new entity and adds a warning. Throws mpl::Error("<source>:<line>: ...")
// on malformed lines.
ConllCorpus parse_conll_bio(std::string_view contents, std::string_view source = "<input>");
ConllCorpus read_conll_bio(const std::filesystem::path& path);

// ---- SFT export -----------------------------------------------------------

struct SftRecord {
  std::string id;
  Dialect dialect = Dialect::PY;
  PromptStyle style = PromptStyle::FUNCTION;
  std::string input;
  std::string output;
  std::size_t boundary = 0;
};

json sft_record_to_json(const SftRecord& r);
SftRecord sft_record_from_json(const json& j);

struct SftManifest {
  std::uint64_t seed = 0;
  std::size_t total = 0;
  std::map<std::string, std::size_t> per_dialect;
  std::string sha256;
};

json manifest_to_json(const SftManifest& m);

// instance-major, dialect-minor; no shuffling.
std::vector<SftRecord> build_sft_records(std::span<const TaskInstance> instances,
                                         const LabelSchema& schema,
                                         std::span<const Dialect> dialects, PromptStyle style);

// Builds the records, shuffles them with Rng(seed) and writes JSONL to `path`
// and the manifest to manifest_path(path).
SftManifest export_sft(std::span<const TaskInstance> instances, const LabelSchema& schema,
                       std::span<const Dialect> dialects, PromptStyle style, std::uint64_t seed,
                       const std::filesystem::path& path);

std::filesystem::path manifest_path(const std::filesystem::path& path);

// ---- Length statistics ----------------------------------------------------

struct LengthBucket {
  std::size_t lo = 0;  // [lo, hi)
  std::size_t hi = 0;
  std::size_t count = 0;
  double proportion = 0.0;
};

struct LengthHistogram {
  std::size_t bucket_width = 100;
  std::vector<LengthBucket> buckets;  // contiguous, min bucket to max bucket
  std::size_t total = 0;
  double average = 0.0;
};

LengthHistogram histogram_from_lengths(std::span<const std::size_t> lengths,
                                       std::size_t bucket_width = 100);

using TokenCounts = std::map<std::string, std::size_t>;

// Key for externally supplied counts: "<id>:<DIALECT>:<STYLE>", falling back
// to the bare id.
std::optional<std::size_t> lookup_token_count(const TokenCounts& counts, const CodePrompt& p);

// When `token_counts` is given it replaces the computed unit and must cover
// every prompt; otherwise mpl::Error names the first missing id.
LengthHistogram length_stats(std::span<const CodePrompt> prompts, LengthUnit unit,
                             std::size_t bucket_width = 100,
                             const TokenCounts* token_counts = nullptr);

// TSV "id<TAB>count" per line.
TokenCounts read_token_counts(const std::filesystem::path& path);
TokenCounts parse_token_counts(std::string_view contents, std::string_view source = "<input>");

json histogram_to_json(const LengthHistogram& h);
std::string histogram_table(const LengthHistogram& h);

}  // namespace mpl
