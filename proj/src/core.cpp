#include "mpl/core.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <unordered_set>

namespace mpl {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string identifier_safe(std::string_view s, bool upper) {
  std::string out;
  out.reserve(s.size() + 2);
  for (unsigned char c : normalize_surface(s)) {
    if (std::isalnum(c)) {
      out.push_back(upper ? static_cast<char>(std::toupper(c)) : static_cast<char>(c));
    } else {
      out.push_back('_');
    }
  }
  if (!out.empty() && std::isdigit(static_cast<unsigned char>(out.front()))) out.insert(0, "L_");
  return out;
}

}  // namespace

std::string_view to_string(TaskKind k) {
  switch (k) {
    case TaskKind::NER: return "NER";
    case TaskKind::RE: return "RE";
    case TaskKind::EAE: return "EAE";
    case TaskKind::EE: return "EE";
  }
  return "NER";
}

std::string_view to_string(Dialect d) {
  switch (d) {
    case Dialect::PY: return "PY";
    case Dialect::CPP: return "CPP";
    case Dialect::JAVA: return "JAVA";
  }
  return "PY";
}

std::string_view to_string(PromptStyle s) {
  switch (s) {
    case PromptStyle::FUNCTION: return "FUNCTION";
    case PromptStyle::FUNCTION_NO_VIRTUAL_RUN: return "FUNCTION_NO_VIRTUAL_RUN";
    case PromptStyle::CLASS: return "CLASS";
  }
  return "FUNCTION";
}

TaskKind parse_task_kind(std::string_view s) {
  const auto l = lower(s);
  if (l == "ner") return TaskKind::NER;
  if (l == "re") return TaskKind::RE;
  if (l == "eae") return TaskKind::EAE;
  if (l == "ee") return TaskKind::EE;
  throw Error("unknown task kind '" + std::string(s) + "'");
}

Dialect parse_dialect(std::string_view s) {
  const auto l = lower(s);
  if (l == "py" || l == "python") return Dialect::PY;
  if (l == "cpp" || l == "c++") return Dialect::CPP;
  if (l == "java") return Dialect::JAVA;
  throw Error("unknown dialect '" + std::string(s) + "'");
}

PromptStyle parse_prompt_style(std::string_view s) {
  const auto l = lower(s);
  if (l == "function") return PromptStyle::FUNCTION;
  if (l == "function_no_virtual_run" || l == "function-no-virtual-run") {
    return PromptStyle::FUNCTION_NO_VIRTUAL_RUN;
  }
  if (l == "class") return PromptStyle::CLASS;
  throw Error("unknown prompt style '" + std::string(s) + "'");
}

std::string normalize_surface(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::string canonical_label(std::string_view s) { return identifier_safe(s, true); }
std::string canonical_role(std::string_view s) { return identifier_safe(s, false); }

std::optional<std::size_t> LabelDescriptor::role_index(std::string_view role) const {
  for (std::size_t i = 0; i < roles.size(); ++i) {
    if (roles[i].name == role) return i;
  }
  return std::nullopt;
}

std::string default_task_name(TaskKind k) {
  switch (k) {
    case TaskKind::NER: return "Named_Entity_Recognition";
    case TaskKind::RE: return "Relation_Extraction";
    case TaskKind::EAE: return "Event_Argument_Extraction";
    case TaskKind::EE: return "Event_Extraction";
  }
  return "Named_Entity_Recognition";
}

LabelSchema::LabelSchema(TaskKind task, std::string task_name, std::string task_definition,
                         std::vector<LabelDescriptor> labels)
    : task_(task),
      task_name_(std::move(task_name)),
      task_definition_(std::move(task_definition)),
      labels_(std::move(labels)) {
  static const std::regex kIdent("[A-Za-z][A-Za-z0-9_]*");
  if (!std::regex_match(task_name_, kIdent)) {
    throw Error("task_name '" + task_name_ + "' is not an identifier");
  }
  if (labels_.empty()) throw Error("label schema has no labels");

  std::unordered_set<std::string> seen;
  for (auto& label : labels_) {
    if (label.display_name.empty()) label.display_name = label.name;
    label.name = canonical_label(label.name);
    if (label.name.empty()) throw Error("empty label name");
    if (!seen.insert(label.name).second) throw Error("duplicate label '" + label.name + "'");
    const bool events = task_ == TaskKind::EE || task_ == TaskKind::EAE;
    if (!events && !label.roles.empty()) {
      throw Error("label '" + label.name + "' has roles but task is " + std::string(to_string(task_)));
    }
    std::unordered_set<std::string> seen_roles;
    for (auto& role : label.roles) {
      role.name = canonical_role(role.name);
      if (role.name.empty()) throw Error("empty role name in label '" + label.name + "'");
      if (!seen_roles.insert(role.name).second) {
        throw Error("duplicate role '" + role.name + "' in label '" + label.name + "'");
      }
    }
  }
}

std::optional<std::size_t> LabelSchema::label_index(std::string_view name) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i].name == name) return i;
  }
  return std::nullopt;
}

const LabelDescriptor* LabelSchema::find_label(std::string_view name) const {
  const auto idx = label_index(name);
  return idx ? &labels_[*idx] : nullptr;
}

Annotation make_entity(std::string_view surface, std::string_view label) {
  return Entity{normalize_surface(surface), std::string(label)};
}

Annotation make_relation(std::string_view head, std::string_view label, std::string_view tail) {
  return Relation{normalize_surface(head), std::string(label), normalize_surface(tail)};
}

Annotation make_trigger(std::string_view surface, std::string_view event_type) {
  return EventTrigger{normalize_surface(surface), std::string(event_type)};
}

Annotation make_argument(std::string_view event_type, std::string_view role,
                         std::string_view surface) {
  return EventArgument{std::string(event_type), std::string(role), normalize_surface(surface)};
}

bool admits(TaskKind task, const Annotation& a) {
  switch (task) {
    case TaskKind::NER: return std::holds_alternative<Entity>(a);
    case TaskKind::RE: return std::holds_alternative<Relation>(a);
    case TaskKind::EE:
      return std::holds_alternative<EventTrigger>(a) || std::holds_alternative<EventArgument>(a);
    case TaskKind::EAE: return std::holds_alternative<EventArgument>(a);
  }
  return false;
}

const std::string& label_of(const Annotation& a) {
  return std::visit(
      [](const auto& v) -> const std::string& {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, EventTrigger> || std::is_same_v<T, EventArgument>) {
          return v.event_type;
        } else {
          return v.label;
        }
      },
      a);
}

std::vector<std::string_view> surfaces_of(const Annotation& a) {
  return std::visit(
      [](const auto& v) -> std::vector<std::string_view> {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Relation>) {
          return {v.head, v.tail};
        } else {
          return {v.surface};
        }
      },
      a);
}

std::string describe(const Annotation& a) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Entity>) {
          return "Entity(\"" + v.surface + "\", " + v.label + ")";
        } else if constexpr (std::is_same_v<T, Relation>) {
          return "Relation(\"" + v.head + "\", " + v.label + ", \"" + v.tail + "\")";
        } else if constexpr (std::is_same_v<T, EventTrigger>) {
          return "Trigger(\"" + v.surface + "\", " + v.event_type + ")";
        } else {
          return "Argument(" + v.event_type + ", " + v.role + ", \"" + v.surface + "\")";
        }
      },
      a);
}

std::vector<Violation> validate_instance(const TaskInstance& inst, const LabelSchema& schema) {
  std::vector<Violation> out;
  auto report = [&](std::string msg) { out.push_back({inst.id, std::move(msg)}); };

  if (inst.id.empty()) report("empty instance id");
  const std::string text = normalize_surface(inst.text);
  if (text.empty()) report("empty text");

  for (const auto& a : inst.gold) {
    if (!admits(schema.task(), a)) {
      report(describe(a) + ": annotation kind not allowed for task " +
             std::string(to_string(schema.task())));
      continue;
    }
    const auto* label = schema.find_label(label_of(a));
    if (label == nullptr) {
      report(describe(a) + ": unknown label '" + label_of(a) + "'");
    } else if (const auto* arg = std::get_if<EventArgument>(&a)) {
      if (!label->role_index(arg->role)) {
        report(describe(a) + ": unknown role '" + arg->role + "' for event type '" + label->name +
               "'");
      }
    }
    for (auto surface : surfaces_of(a)) {
      if (surface.empty()) {
        report(describe(a) + ": empty surface");
      } else if (text.find(surface) == std::string::npos) {
        report(describe(a) + ": surface-not-found '" + std::string(surface) + "'");
      }
    }
  }
  return out;
}

}  // namespace mpl
