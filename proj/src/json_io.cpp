#include "mpl/json_io.hpp"

#include <fstream>
#include <sstream>

#include <openssl/evp.h>

namespace mpl {

namespace {

const std::string& field(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw Error(std::string("missing string field '") + key + "' in " + j.dump());
  }
  return j.at(key).get_ref<const std::string&>();
}

std::string optional_field(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return {};
  return j.at(key).get<std::string>();
}

}  // namespace

json annotation_to_json(const Annotation& a) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Entity>) {
          return {{"kind", "entity"}, {"surface", v.surface}, {"label", v.label}};
        } else if constexpr (std::is_same_v<T, Relation>) {
          return {{"kind", "relation"}, {"head", v.head}, {"label", v.label}, {"tail", v.tail}};
        } else if constexpr (std::is_same_v<T, EventTrigger>) {
          return {{"kind", "trigger"}, {"surface", v.surface}, {"event_type", v.event_type}};
        } else {
          return {{"kind", "argument"},
                  {"event_type", v.event_type},
                  {"role", v.role},
                  {"surface", v.surface}};
        }
      },
      a);
}

Annotation annotation_from_json(const json& j) {
  const auto& kind = field(j, "kind");
  if (kind == "entity") {
    return make_entity(field(j, "surface"), canonical_label(field(j, "label")));
  }
  if (kind == "relation") {
    return make_relation(field(j, "head"), canonical_label(field(j, "label")), field(j, "tail"));
  }
  if (kind == "trigger") {
    return make_trigger(field(j, "surface"), canonical_label(field(j, "event_type")));
  }
  if (kind == "argument") {
    return make_argument(canonical_label(field(j, "event_type")), canonical_role(field(j, "role")),
                         field(j, "surface"));
  }
  throw Error("unknown annotation kind '" + kind + "'");
}

json annotations_to_json(const AnnotationSet& set) {
  json arr = json::array();
  for (const auto& a : set) arr.push_back(annotation_to_json(a));
  return arr;
}

json schema_to_json(const LabelSchema& schema) {
  json labels = json::array();
  for (const auto& l : schema.labels()) {
    json roles = json::array();
    for (const auto& r : l.roles) roles.push_back({{"name", r.name}, {"description", r.description}});
    json obj = {{"name", l.name}, {"description", l.description}, {"roles", roles}};
    if (l.display_name != l.name) obj["display_name"] = l.display_name;
    labels.push_back(std::move(obj));
  }
  return {{"task", std::string(to_string(schema.task()))},
          {"task_name", schema.task_name()},
          {"task_definition", schema.task_definition()},
          {"labels", labels}};
}

LabelSchema schema_from_json(const json& j) {
  const TaskKind task = parse_task_kind(field(j, "task"));
  std::string task_name = j.contains("task_name") ? field(j, "task_name") : default_task_name(task);
  std::vector<LabelDescriptor> labels;
  if (!j.contains("labels") || !j.at("labels").is_array()) throw Error("schema has no label array");
  for (const auto& l : j.at("labels")) {
    LabelDescriptor d;
    d.name = field(l, "name");
    d.display_name = l.contains("display_name") ? field(l, "display_name") : d.name;
    d.description = optional_field(l, "description");
    if (l.contains("roles")) {
      for (const auto& r : l.at("roles")) {
        d.roles.push_back({field(r, "name"), optional_field(r, "description")});
      }
    }
    labels.push_back(std::move(d));
  }
  return LabelSchema(task, std::move(task_name), optional_field(j, "task_definition"),
                     std::move(labels));
}

json dataset_to_json(const Dataset& ds) {
  json instances = json::array();
  for (const auto& inst : ds.instances) {
    instances.push_back(
        {{"id", inst.id}, {"text", inst.text}, {"gold", annotations_to_json(inst.gold)}});
  }
  return {{"schema", schema_to_json(ds.schema)}, {"instances", instances}};
}

Dataset dataset_from_json(const json& j) {
  if (!j.contains("schema")) throw Error("dataset has no 'schema'");
  Dataset ds{schema_from_json(j.at("schema")), {}};
  if (!j.contains("instances")) return ds;
  for (const auto& i : j.at("instances")) {
    TaskInstance inst{field(i, "id"), field(i, "text"), {}};
    if (i.contains("gold")) {
      for (const auto& a : i.at("gold")) inst.gold.insert(annotation_from_json(a));
    }
    ds.instances.push_back(std::move(inst));
  }
  return ds;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Dataset load_dataset(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
  try {
    return dataset_from_json(j);
  } catch (const std::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  write_file_atomic(path, dataset_to_json(ds).dump(2) + "\n");
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<json> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (normalize_surface(line).empty()) continue;
    try {
      rows.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

std::string to_jsonl(const std::vector<json>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 failed");
  }
  static const char* kHex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

}  // namespace mpl
