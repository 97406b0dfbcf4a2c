#include "fixtures.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unistd.h>

namespace bw::testing {

namespace fs = std::filesystem;

fs::path fixtures_dir() { return BW_FIXTURES_DIR; }
fs::path block_dir(const std::string& block_id) { return fixtures_dir() / "blocks" / block_id; }
fs::path design_path(const std::string& name) { return fixtures_dir() / "designs" / (name + ".design.json"); }

std::unique_ptr<Library> fixture_library() {
  auto lib = std::make_unique<Library>();
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(fixtures_dir() / "blocks")) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  for (const auto& d : dirs) {
    const auto report = lib->import_path(d);
    if (!report.accepted) throw std::runtime_error("fixture block rejected: " + d.string());
  }
  return lib;
}

Design fixture_design(const std::string& name) { return parse_design(read_file(design_path(name))); }

std::unique_ptr<Engine> fixture_engine(const Library& library, const std::string& name) {
  const Design file = fixture_design(name);
  Design shell;
  shell.id = file.id;
  shell.name = file.name;
  auto engine = std::make_unique<Engine>(library, shell);
  const auto report = load_design(*engine, file);
  if (!report.rejected.empty()) throw std::runtime_error("fixture design has rejected edges: " + name);
  return engine;
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("bw-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace bw::testing
