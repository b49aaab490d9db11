#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mpl/core.hpp"
#include "mpl/json_io.hpp"

namespace mpl {

// A rendered prompt. `text` ends with the dialect's result-assignment prefix
// (e.g. "EntityList = "); `boundary` is its length in Unicode scalars, which
// is where the completion and the training loss region begin.
struct CodePrompt {
  Dialect dialect = Dialect::PY;
  PromptStyle style = PromptStyle::FUNCTION;
  std::string text;
  std::size_t boundary = 0;
  std::string instance_id;
};

struct GoldCompletion {
  Dialect dialect = Dialect::PY;
  std::string text;
  AnnotationSet annotations;
};

// "EntityList", "RelationList", "EventList", "ArgumentList".
std::string_view result_name(TaskKind task);
// Element type named in CPP/JAVA declarations and CLASS base classes.
std::string_view element_type(TaskKind task);
// Text the prompt ends with: "EntityList = ", "std::vector<Entity> EntityList = ", ...
std::string result_prefix(TaskKind task, Dialect dialect);

// Backslash-escapes '"' and '\' and turns newline, CR and tab into escapes.
std::string escape_string_literal(std::string_view s);

// Throws mpl::Error naming the instance when it fails validation.
CodePrompt compile_prompt(const TaskInstance& inst, const LabelSchema& schema, Dialect dialect,
                          PromptStyle style);

// Gold annotations ordered by label definition order, then by first
// occurrence of the surface in the text.
std::vector<Annotation> ordered_gold(const TaskInstance& inst, const LabelSchema& schema);

// One constructor term, e.g. `Entity("Obama", "PERSON")` or, for JAVA,
// `new Entity("Obama", "PERSON")`.
std::string render_term(const Annotation& a, Dialect dialect);
// A complete collection literal holding `terms` in the given order.
std::string render_collection(std::span<const Annotation> terms, Dialect dialect);

GoldCompletion render_gold_output(const TaskInstance& inst, const LabelSchema& schema,
                                  Dialect dialect);

enum class LengthUnit { Chars, WsTokens };

LengthUnit parse_length_unit(std::string_view s);
std::string_view to_string(LengthUnit u);

std::size_t utf8_length(std::string_view s);
std::size_t ws_token_count(std::string_view s);
std::size_t prompt_length(const CodePrompt& p, LengthUnit unit);

// Compiled prompt export row: {id, dialect, style, prompt, boundary, gold_completion}.
json prompt_record(const CodePrompt& p, const GoldCompletion& gold);
CodePrompt prompt_from_record(const json& row);

}  // namespace mpl
