#include "blockweave/library.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>

#include <json.hpp>

#include "blockweave/error.hpp"
#include "fs_util.hpp"

namespace bw {

Library::Library(ProtocolRegistry registry) : registry_(std::move(registry)) {}

Library::Library(std::filesystem::path dir, ProtocolRegistry registry)
    : registry_(std::move(registry)), dir_(std::move(dir)) {
  namespace fs = std::filesystem;
  fs::create_directories(*dir_);
  std::vector<fs::path> entries;
  for (const auto& entry : fs::directory_iterator(*dir_)) {
    if (entry.is_directory() && fs::exists(entry.path() / "block.json")) entries.push_back(entry.path());
  }
  std::sort(entries.begin(), entries.end());
  for (const auto& path : entries) {
    try {
      auto files = read_bundle(path);
      auto result = validate_bundle(files.bundle, registry_);
      if (result.definition) {
        blocks_[result.definition->block_id] = std::move(result.definition);
      } else {
        load_warnings_.push_back(path.filename().string() + ": stored block no longer validates");
      }
    } catch (const Error& e) {
      load_warnings_.push_back(path.filename().string() + ": " + e.what());
    }
  }
}

ImportReport Library::import_bundle(const BundleFiles& files, bool overwrite) {
  auto result = validate_bundle(files.bundle, registry_);
  if (!result.definition) return std::move(result.report);

  std::unique_lock lock(mu_);
  const auto& id = result.definition->block_id;
  if (!overwrite && blocks_.count(id)) {
    result.report.diagnostics.push_back({Severity::Error, DiagnosticKind::DuplicateBlock, subject::block(id),
                                         "block '" + id + "' already exists (use overwrite to replace it)"});
    sort_diagnostics(result.report.diagnostics);
    result.report.accepted = false;
    return std::move(result.report);
  }
  if (dir_) persist(*result.definition, files.image_bytes);
  blocks_[id] = std::move(result.definition);
  return std::move(result.report);
}

ImportReport Library::import_path(const std::filesystem::path& bundle_path, bool overwrite) {
  return import_bundle(read_bundle(bundle_path), overwrite);
}

void Library::persist(const BlockDefinition& def, const std::optional<std::string>& image_bytes) const {
  namespace fs = std::filesystem;
  const fs::path block_dir = *dir_ / def.block_id;
  fs::create_directories(block_dir);
  BlockBundle stored = def.bundle;
  if (stored.image) stored.image = fs::path(*stored.image).filename().string();
  if (stored.image && image_bytes) write_file_atomic(block_dir / *stored.image, *image_bytes);
  if (stored.image && !image_bytes) stored.image.reset();
  write_file_atomic(block_dir / "block.json", render_bundle_json(stored));
}

std::shared_ptr<const BlockDefinition> Library::find(std::string_view block_id) const {
  std::shared_lock lock(mu_);
  const auto it = blocks_.find(block_id);
  return it == blocks_.end() ? nullptr : it->second;
}

std::shared_ptr<const BlockDefinition> Library::get(std::string_view block_id) const {
  auto def = find(block_id);
  if (!def) throw Error(ErrorCode::NotFound, "unknown block '" + std::string(block_id) + "'");
  return def;
}

std::map<BlockClass, std::vector<std::shared_ptr<const BlockDefinition>>> Library::list() const {
  std::shared_lock lock(mu_);
  std::map<BlockClass, std::vector<std::shared_ptr<const BlockDefinition>>> groups;
  for (const auto& [id, def] : blocks_) groups[def->classification].push_back(def);
  return groups;
}

void Library::remove(std::string_view block_id) {
  std::unique_lock lock(mu_);
  const auto it = blocks_.find(block_id);
  if (it == blocks_.end()) throw Error(ErrorCode::NotFound, "unknown block '" + std::string(block_id) + "'");
  blocks_.erase(it);
  if (dir_) std::filesystem::remove_all(*dir_ / std::string(block_id));
}

std::size_t Library::size() const {
  std::shared_lock lock(mu_);
  return blocks_.size();
}

std::string render_catalog_json(const Library& library) {
  nlohmann::json groups = nlohmann::json::object();
  for (const auto& [cls, defs] : library.list()) {
    auto& arr = groups[std::string(to_string(cls))];
    arr = nlohmann::json::array();
    for (const auto& def : defs) {
      arr.push_back({{"id", def->block_id}, {"name", def->display_name}});
    }
  }
  return groups.dump(2) + "\n";
}

}  // namespace bw
