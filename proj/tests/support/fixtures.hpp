#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "blockweave/design.hpp"
#include "blockweave/engine.hpp"
#include "blockweave/library.hpp"

namespace bw::testing {

std::filesystem::path fixtures_dir();
std::filesystem::path block_dir(const std::string& block_id);
std::filesystem::path design_path(const std::string& name);

// In-memory library holding every fixture block.
std::unique_ptr<Library> fixture_library();

Design fixture_design(const std::string& name);
// Engine with the fixture design replayed onto it.
std::unique_ptr<Engine> fixture_engine(const Library& library, const std::string& name);

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& p);

}  // namespace bw::testing
