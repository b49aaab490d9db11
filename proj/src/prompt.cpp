#include "mpl/prompt.hpp"

#include <algorithm>
#include <tuple>

namespace mpl {

namespace {

constexpr std::string_view kIndent = "    ";

// Constructor parameters of the CLASS-style base class.
std::vector<std::string> base_fields(TaskKind task) {
  switch (task) {
    case TaskKind::NER: return {"name"};
    case TaskKind::RE: return {"head", "tail"};
    case TaskKind::EE:
    case TaskKind::EAE: return {"trigger"};
  }
  return {"name"};
}

std::string describe_label(const LabelDescriptor& l) {
  auto desc = normalize_surface(l.description);
  if (desc.empty()) desc = normalize_surface(l.display_name);
  return desc;
}

// "- NAME: description" plus one indented line per role.
std::vector<std::string> label_lines(const LabelDescriptor& l) {
  std::vector<std::string> lines{"- " + l.name + ": " + describe_label(l)};
  for (const auto& r : l.roles) {
    lines.push_back(std::string(kIndent) + "* " + r.name + ": " + normalize_surface(r.description));
  }
  return lines;
}

// Appends a documentation block body: section headers at `indent`, entries
// one level deeper.
void append_section(std::string& out, std::string_view indent, std::string_view header,
                    const std::vector<std::string>& entries) {
  out += indent;
  out += header;
  out += '\n';
  for (const auto& e : entries) {
    out += indent;
    out += kIndent;
    out += e;
    out += '\n';
  }
}

std::vector<std::string> definition_lines(const LabelSchema& schema) {
  auto def = normalize_surface(schema.task_definition());
  if (def.empty()) return {};
  return {def};
}

std::vector<std::string> all_label_lines(const LabelSchema& schema) {
  std::vector<std::string> out;
  for (const auto& l : schema.labels()) {
    auto lines = label_lines(l);
    out.insert(out.end(), lines.begin(), lines.end());
  }
  return out;
}

std::string_view doc_open(Dialect d) {
  switch (d) {
    case Dialect::PY: return "\"\"\"";
    case Dialect::CPP: return "/*";
    case Dialect::JAVA: return "/**";
  }
  return "\"\"\"";
}

std::string_view doc_close(Dialect d) {
  switch (d) {
    case Dialect::PY: return "\"\"\"";
    case Dialect::CPP:
    case Dialect::JAVA: return "*/";
  }
  return "\"\"\"";
}

std::string collection_type(TaskKind task, Dialect d) {
  const std::string elem(element_type(task));
  switch (d) {
    case Dialect::PY: return "list";
    case Dialect::CPP: return "std::vector<" + elem + ">";
    case Dialect::JAVA: return "List<" + elem + ">";
  }
  return "list";
}

std::string string_type(Dialect d) {
  switch (d) {
    case Dialect::PY: return "str";
    case Dialect::CPP: return "std::string";
    case Dialect::JAVA: return "String";
  }
  return "str";
}

std::string preamble(Dialect d) {
  switch (d) {
    case Dialect::PY: return "";
    case Dialect::CPP: return "#include <string>\n#include <vector>\n\n";
    case Dialect::JAVA: return "import java.util.*;\n\n";
  }
  return "";
}

std::string string_literal(std::string_view s) { return "\"" + escape_string_literal(s) + "\""; }

// Input assignment, optional call, dangling result prefix. PY runs at top
// level; CPP and JAVA inside main.
std::string virtual_run(const TaskInstance& inst, const LabelSchema& schema, Dialect d,
                        bool with_call) {
  const std::string text_literal = string_literal(inst.text);
  const std::string call = schema.task_name() + "(InputText)";
  const std::string prefix = result_prefix(schema.task(), d);
  std::string out;
  switch (d) {
    case Dialect::PY:
      out += "InputText = " + text_literal + "\n";
      if (with_call) out += call + "\n";
      out += prefix;
      break;
    case Dialect::CPP:
      out += "int main() {\n";
      out += std::string(kIndent) + "std::string InputText = " + text_literal + ";\n";
      if (with_call) out += std::string(kIndent) + call + ";\n";
      out += std::string(kIndent) + prefix;
      break;
    case Dialect::JAVA:
      out += "public static void main(String[] args) {\n";
      out += std::string(kIndent) + "String InputText = " + text_literal + ";\n";
      if (with_call) out += std::string(kIndent) + call + ";\n";
      out += std::string(kIndent) + prefix;
      break;
  }
  return out;
}

std::string function_prompt(const TaskInstance& inst, const LabelSchema& schema, Dialect d,
                            bool with_call) {
  const std::string name = schema.task_name();
  const std::string result(result_name(schema.task()));
  const std::string coll = collection_type(schema.task(), d);
  const std::string in(kIndent);

  std::string out = preamble(d);
  switch (d) {
    case Dialect::PY: out += "def " + name + "(InputText):\n"; break;
    case Dialect::CPP: out += coll + " " + name + "(std::string InputText) {\n"; break;
    case Dialect::JAVA: out += "public static " + coll + " " + name + "(String InputText) {\n"; break;
  }
  out += in + std::string(doc_open(d)) + "\n";
  append_section(out, in, "Task Definition:", definition_lines(schema));
  append_section(out, in, "Label Set:", all_label_lines(schema));
  out += in + std::string(doc_close(d)) + "\n";
  switch (d) {
    case Dialect::PY:
      out += in + result + " = []\n";
      out += in + "return " + result + "\n\n\n";
      break;
    case Dialect::CPP:
      out += in + coll + " " + result + ";\n";
      out += in + "return " + result + ";\n}\n\n";
      break;
    case Dialect::JAVA:
      out += in + coll + " " + result + " = new ArrayList<>();\n";
      out += in + "return " + result + ";\n}\n\n";
      break;
  }
  out += virtual_run(inst, schema, d, with_call);
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

std::string class_prompt(const TaskInstance& inst, const LabelSchema& schema, Dialect d) {
  const std::string base(element_type(schema.task()));
  const auto fields = base_fields(schema.task());
  const std::string in(kIndent);
  const std::string in2 = in + in;
  const std::string str = string_type(d);

  auto params = [&](const std::vector<std::string>& names) {
    std::vector<std::string> out;
    for (const auto& n : names) out.push_back(d == Dialect::PY ? n : str + " " + n);
    return join(out, ", ");
  };

  std::string out = preamble(d);

  // Base class.
  switch (d) {
    case Dialect::PY: out += "class " + base + ":\n"; break;
    case Dialect::CPP:
    case Dialect::JAVA: out += "class " + base + " {\n"; break;
  }
  out += in + std::string(doc_open(d)) + "\n";
  append_section(out, in, "Task Definition:", definition_lines(schema));
  out += in + std::string(doc_close(d)) + "\n";
  switch (d) {
    case Dialect::PY:
      out += in + "def __init__(self, " + params(fields) + "):\n";
      for (const auto& f : fields) out += in2 + "self." + f + " = " + f + "\n";
      out += "\n\n";
      break;
    case Dialect::CPP:
      out += "public:\n";
      for (const auto& f : fields) out += in + str + " " + f + ";\n";
      out += in + base + "(" + params(fields) + ") {\n";
      for (const auto& f : fields) out += in2 + "this->" + f + " = " + f + ";\n";
      out += in + "}\n};\n\n";
      break;
    case Dialect::JAVA:
      for (const auto& f : fields) out += in + str + " " + f + ";\n";
      out += in + base + "(" + params(fields) + ") {\n";
      for (const auto& f : fields) out += in2 + "this." + f + " = " + f + ";\n";
      out += in + "}\n}\n\n";
      break;
  }

  // One subclass per label, description repeated in its own doc block.
  for (const auto& label : schema.labels()) {
    std::vector<std::string> roles;
    for (const auto& r : label.roles) roles.push_back(r.name);
    std::vector<std::string> ctor = fields;
    ctor.insert(ctor.end(), roles.begin(), roles.end());

    switch (d) {
      case Dialect::PY: out += "class " + label.name + "(" + base + "):\n"; break;
      case Dialect::CPP: out += "class " + label.name + " : public " + base + " {\n"; break;
      case Dialect::JAVA: out += "class " + label.name + " extends " + base + " {\n"; break;
    }
    out += in + std::string(doc_open(d)) + "\n";
    append_section(out, in, "Label Set:", label_lines(label));
    out += in + std::string(doc_close(d)) + "\n";
    switch (d) {
      case Dialect::PY:
        out += in + "def __init__(self, " + params(ctor) + "):\n";
        out += in2 + "super().__init__(" + join(fields, ", ") + ")\n";
        for (const auto& r : roles) out += in2 + "self." + r + " = " + r + "\n";
        out += "\n\n";
        break;
      case Dialect::CPP:
        out += "public:\n";
        for (const auto& r : roles) out += in + str + " " + r + ";\n";
        out += in + label.name + "(" + params(ctor) + ") : " + base + "(" + join(fields, ", ") +
               ") {\n";
        for (const auto& r : roles) out += in2 + "this->" + r + " = " + r + ";\n";
        out += in + "}\n};\n\n";
        break;
      case Dialect::JAVA:
        for (const auto& r : roles) out += in + str + " " + r + ";\n";
        out += in + label.name + "(" + params(ctor) + ") {\n";
        out += in2 + "super(" + join(fields, ", ") + ");\n";
        for (const auto& r : roles) out += in2 + "this." + r + " = " + r + ";\n";
        out += in + "}\n}\n\n";
        break;
    }
  }

  out += virtual_run(inst, schema, d, /*with_call=*/false);
  return out;
}

int variant_rank(const Annotation& a) { return static_cast<int>(a.index()); }

std::size_t role_rank(const Annotation& a, const LabelSchema& schema) {
  const auto* arg = std::get_if<EventArgument>(&a);
  if (arg == nullptr) return 0;
  const auto* label = schema.find_label(arg->event_type);
  if (label == nullptr) return 0;
  return label->role_index(arg->role).value_or(label->roles.size());
}

}  // namespace

std::string_view result_name(TaskKind task) {
  switch (task) {
    case TaskKind::NER: return "EntityList";
    case TaskKind::RE: return "RelationList";
    case TaskKind::EE: return "EventList";
    case TaskKind::EAE: return "ArgumentList";
  }
  return "EntityList";
}

std::string_view element_type(TaskKind task) {
  switch (task) {
    case TaskKind::NER: return "Entity";
    case TaskKind::RE: return "Relation";
    case TaskKind::EE:
    case TaskKind::EAE: return "Event";
  }
  return "Entity";
}

std::string result_prefix(TaskKind task, Dialect dialect) {
  const std::string name(result_name(task));
  if (dialect == Dialect::PY) return name + " = ";
  return collection_type(task, dialect) + " " + name + " = ";
}

std::string escape_string_literal(std::string_view s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

CodePrompt compile_prompt(const TaskInstance& inst, const LabelSchema& schema, Dialect dialect,
                          PromptStyle style) {
  const auto violations = validate_instance(inst, schema);
  if (!violations.empty()) {
    throw Error("instance '" + inst.id + "' is invalid: " + violations.front().message);
  }
  CodePrompt p;
  p.dialect = dialect;
  p.style = style;
  p.instance_id = inst.id;
  switch (style) {
    case PromptStyle::FUNCTION: p.text = function_prompt(inst, schema, dialect, true); break;
    case PromptStyle::FUNCTION_NO_VIRTUAL_RUN:
      p.text = function_prompt(inst, schema, dialect, false);
      break;
    case PromptStyle::CLASS: p.text = class_prompt(inst, schema, dialect); break;
  }
  p.boundary = utf8_length(p.text);
  return p;
}

std::vector<Annotation> ordered_gold(const TaskInstance& inst, const LabelSchema& schema) {
  const std::string text = normalize_surface(inst.text);
  using Key = std::tuple<std::size_t, int, std::size_t, std::size_t, std::size_t>;
  std::vector<std::pair<Key, Annotation>> keyed;
  keyed.reserve(inst.gold.size());
  for (const auto& a : inst.gold) {
    const auto surfaces = surfaces_of(a);
    const std::size_t first = text.find(surfaces.front());
    const std::size_t second = surfaces.size() > 1 ? text.find(surfaces[1]) : 0;
    Key key{schema.label_index(label_of(a)).value_or(schema.labels().size()), variant_rank(a),
            role_rank(a, schema), first, second};
    keyed.emplace_back(key, a);
  }
  // Remaining ties fall back to structural order, which std::set already gave us.
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<Annotation> out;
  out.reserve(keyed.size());
  for (auto& [key, a] : keyed) out.push_back(std::move(a));
  return out;
}

std::string render_term(const Annotation& a, Dialect dialect) {
  std::string out = dialect == Dialect::JAVA ? "new " : "";
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Entity>) {
          out += "Entity(" + string_literal(v.surface) + ", " + string_literal(v.label) + ")";
        } else if constexpr (std::is_same_v<T, Relation>) {
          out += "Relation(" + string_literal(v.head) + ", " + string_literal(v.label) + ", " + string_literal(v.tail) + ")";
        } else if constexpr (std::is_same_v<T, EventTrigger>) {
          out += "Trigger(" + string_literal(v.surface) + ", " + string_literal(v.event_type) + ")";
        } else {
          out += "Argument(" + string_literal(v.event_type) + ", " + string_literal(v.role) + ", " +
                 string_literal(v.surface) + ")";
        }
      },
      a);
  return out;
}

std::string render_collection(std::span<const Annotation> terms, Dialect dialect) {
  std::string out;
  switch (dialect) {
    case Dialect::PY: out = "["; break;
    case Dialect::CPP: out = "{"; break;
    case Dialect::JAVA: out = "List.of("; break;
  }
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i > 0) out += ", ";
    out += render_term(terms[i], dialect);
  }
  switch (dialect) {
    case Dialect::PY: out += "]"; break;
    case Dialect::CPP: out += "}"; break;
    case Dialect::JAVA: out += ")"; break;
  }
  return out;
}

GoldCompletion render_gold_output(const TaskInstance& inst, const LabelSchema& schema,
                                  Dialect dialect) {
  const auto terms = ordered_gold(inst, schema);
  return GoldCompletion{dialect, render_collection(terms, dialect), inst.gold};
}

LengthUnit parse_length_unit(std::string_view s) {
  if (s == "chars") return LengthUnit::Chars;
  if (s == "ws_tokens" || s == "ws-tokens") return LengthUnit::WsTokens;
  throw Error("unknown length unit '" + std::string(s) + "'");
}

std::string_view to_string(LengthUnit u) {
  return u == LengthUnit::Chars ? "chars" : "ws_tokens";
}

std::size_t utf8_length(std::string_view s) {
  return static_cast<std::size_t>(std::count_if(
      s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

std::size_t ws_token_count(std::string_view s) {
  std::size_t count = 0;
  bool in_token = false;
  for (char c : s) {
    const bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    if (!space && !in_token) ++count;
    in_token = !space;
  }
  return count;
}

std::size_t prompt_length(const CodePrompt& p, LengthUnit unit) {
  return unit == LengthUnit::Chars ? utf8_length(p.text) : ws_token_count(p.text);
}

json prompt_record(const CodePrompt& p, const GoldCompletion& gold) {
  return {{"id", p.instance_id},
          {"dialect", std::string(to_string(p.dialect))},
          {"style", std::string(to_string(p.style))},
          {"prompt", p.text},
          {"boundary", p.boundary},
          {"gold_completion", gold.text}};
}

CodePrompt prompt_from_record(const json& row) {
  CodePrompt p;
  p.instance_id = row.at("id").get<std::string>();
  p.dialect = parse_dialect(row.at("dialect").get<std::string>());
  p.style = parse_prompt_style(row.at("style").get<std::string>());
  p.text = row.at("prompt").get<std::string>();
  p.boundary = row.contains("boundary") ? row.at("boundary").get<std::size_t>() : utf8_length(p.text);
  return p;
}

}  // namespace mpl
