#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace mpl {

struct Error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class TaskKind { NER, RE, EAE, EE };
enum class Dialect { PY, CPP, JAVA };
enum class PromptStyle { FUNCTION, FUNCTION_NO_VIRTUAL_RUN, CLASS };

inline constexpr Dialect kAllDialects[] = {Dialect::PY, Dialect::CPP, Dialect::JAVA};
inline constexpr std::size_t kDialectCount = 3;

std::string_view to_string(TaskKind k);
std::string_view to_string(Dialect d);
std::string_view to_string(PromptStyle s);

// Parsing is case-insensitive ("py", "Java", "function", "ner").
TaskKind parse_task_kind(std::string_view s);
Dialect parse_dialect(std::string_view s);
PromptStyle parse_prompt_style(std::string_view s);

inline std::size_t index_of(Dialect d) { return static_cast<std::size_t>(d); }

// Collapses whitespace runs to a single space and trims both ends. Case is kept.
std::string normalize_surface(std::string_view s);

// Identifier-safe label form: non-alphanumerics become '_', letters are
// uppercased, a leading digit gets an "L_" prefix.
std::string canonical_label(std::string_view s);
// Same as canonical_label but keeps case; used for role names.
std::string canonical_role(std::string_view s);

struct RoleDescriptor {
  std::string name;
  std::string description;
};

struct LabelDescriptor {
  std::string name;          // canonical identifier
  std::string display_name;  // as given in the source data
  std::string description;
  std::vector<RoleDescriptor> roles;  // EE / EAE only

  std::optional<std::size_t> role_index(std::string_view role) const;
};

class LabelSchema {
 public:
  LabelSchema() = default;
  // Canonicalizes label and role names; throws mpl::Error on any invariant
  // violation (empty label set, duplicate names, bad task_name, roles on
  // NER/RE labels).
  LabelSchema(TaskKind task, std::string task_name, std::string task_definition,
              std::vector<LabelDescriptor> labels);

  TaskKind task() const { return task_; }
  const std::string& task_name() const { return task_name_; }
  const std::string& task_definition() const { return task_definition_; }
  const std::vector<LabelDescriptor>& labels() const { return labels_; }

  std::optional<std::size_t> label_index(std::string_view name) const;
  const LabelDescriptor* find_label(std::string_view name) const;

 private:
  TaskKind task_ = TaskKind::NER;
  std::string task_name_;
  std::string task_definition_;
  std::vector<LabelDescriptor> labels_;
};

std::string default_task_name(TaskKind k);

// Annotation variants. Construct via the make_* helpers so surfaces are
// normalized; equality and ordering are structural.
struct Entity {
  std::string surface;
  std::string label;
  auto operator<=>(const Entity&) const = default;
};

struct Relation {
  std::string head;
  std::string label;
  std::string tail;
  auto operator<=>(const Relation&) const = default;
};

struct EventTrigger {
  std::string surface;
  std::string event_type;
  auto operator<=>(const EventTrigger&) const = default;
};

struct EventArgument {
  std::string event_type;
  std::string role;
  std::string surface;
  auto operator<=>(const EventArgument&) const = default;
};

using Annotation = std::variant<Entity, Relation, EventTrigger, EventArgument>;
using AnnotationSet = std::set<Annotation>;

Annotation make_entity(std::string_view surface, std::string_view label);
Annotation make_relation(std::string_view head, std::string_view label, std::string_view tail);
Annotation make_trigger(std::string_view surface, std::string_view event_type);
Annotation make_argument(std::string_view event_type, std::string_view role,
                         std::string_view surface);

// Which variants a task kind admits. EE admits triggers and arguments, EAE
// arguments only.
bool admits(TaskKind task, const Annotation& a);

// The label (or event type) an annotation is filed under.
const std::string& label_of(const Annotation& a);

// Surfaces in order of appearance in the constructor term.
std::vector<std::string_view> surfaces_of(const Annotation& a);

std::string describe(const Annotation& a);

struct TaskInstance {
  std::string id;
  std::string text;
  AnnotationSet gold;
};

struct Violation {
  std::string instance_id;
  std::string message;
};

// Empty iff every gold annotation is admitted by the task kind, names known
// labels/roles, and has surfaces occurring in the (normalized) text.
std::vector<Violation> validate_instance(const TaskInstance& inst, const LabelSchema& schema);

struct Dataset {
  LabelSchema schema;
  std::vector<TaskInstance> instances;
};

}  // namespace mpl
