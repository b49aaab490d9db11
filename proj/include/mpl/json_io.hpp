#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mpl/core.hpp"

namespace mpl {

using json = nlohmann::json;

// Annotation objects are tagged by "kind": entity | relation | trigger | argument.
// Label and role names are canonicalized on the way in.
json annotation_to_json(const Annotation& a);
Annotation annotation_from_json(const json& j);

json annotations_to_json(const AnnotationSet& set);

json schema_to_json(const LabelSchema& schema);
LabelSchema schema_from_json(const json& j);

json dataset_to_json(const Dataset& ds);
Dataset dataset_from_json(const json& j);

Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const Dataset& ds, const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::vector<json> read_jsonl(const std::filesystem::path& path);
std::string to_jsonl(const std::vector<json>& rows);

std::string sha256_hex(std::string_view data);

}  // namespace mpl
