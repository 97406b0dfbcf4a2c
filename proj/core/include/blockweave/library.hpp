#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "blockweave/block.hpp"
#include "blockweave/registry.hpp"

namespace bw {

// Catalog of validated blocks. Optionally backed by a directory holding one
// sub-directory per block (`<id>/block.json` plus the image, if any).
// Single writer, many readers: imports serialize, lookups run concurrently.
class Library {
 public:
  explicit Library(ProtocolRegistry registry = ProtocolRegistry::builtins());
  // Loads every stored block under `dir`, creating the directory if needed.
  explicit Library(std::filesystem::path dir, ProtocolRegistry registry = ProtocolRegistry::builtins());

  Library(const Library&) = delete;
  Library& operator=(const Library&) = delete;

  ImportReport import_bundle(const BundleFiles& files, bool overwrite = false);
  ImportReport import_path(const std::filesystem::path& bundle_path, bool overwrite = false);

  // Throws bw::Error(NotFound).
  std::shared_ptr<const BlockDefinition> get(std::string_view block_id) const;
  std::shared_ptr<const BlockDefinition> find(std::string_view block_id) const;
  std::map<BlockClass, std::vector<std::shared_ptr<const BlockDefinition>>> list() const;
  void remove(std::string_view block_id);
  std::size_t size() const;

  const ProtocolRegistry& registry() const { return registry_; }
  const std::optional<std::filesystem::path>& dir() const { return dir_; }
  // Blocks under dir() that failed re-validation at load time.
  const std::vector<std::string>& load_warnings() const { return load_warnings_; }

 private:
  void persist(const BlockDefinition& def, const std::optional<std::string>& image_bytes) const;

  ProtocolRegistry registry_;
  std::optional<std::filesystem::path> dir_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<const BlockDefinition>, std::less<>> blocks_;
  std::vector<std::string> load_warnings_;
};

std::string render_catalog_json(const Library& library);

}  // namespace bw
