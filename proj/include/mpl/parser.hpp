#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "mpl/core.hpp"
#include "mpl/json_io.hpp"

namespace mpl {

struct Diagnostic {
  std::size_t begin = 0;  // byte offsets into the completion, half-open
  std::size_t end = 0;
  std::string message;
};

struct PredictionSet {
  std::string instance_id;
  Dialect dialect = Dialect::PY;
  AnnotationSet annotations;
  std::vector<Diagnostic> diagnostics;
  bool truncated = false;
};

// Extracts the first collection literal of the dialect's output grammar from
// `text`. Never throws on malformed input: terms that do not parse, do not fit
// the schema's task kind, or name unknown labels/roles are skipped and
// reported as diagnostics. Parsing resumes at the next top-level comma or
// closing delimiter.
PredictionSet parse_completion(std::string_view text, Dialect dialect, const LabelSchema& schema,
                               std::string instance_id = {});

// parse(render_gold_output(inst)) == inst.gold
bool roundtrip_check(const TaskInstance& inst, const LabelSchema& schema, Dialect dialect);

// Prediction export row: {id, dialect, annotations, diagnostics, truncated}.
json prediction_record(const PredictionSet& p);
PredictionSet prediction_from_record(const json& row);

}  // namespace mpl
