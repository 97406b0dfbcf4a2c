#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "blockweave/design.hpp"
#include "blockweave/diagnostic.hpp"
#include "blockweave/library.hpp"
#include "blockweave/pipeline.hpp"
#include "blockweave/registry.hpp"

namespace bw {

class Engine;

struct OpResult {
  long revision = 0;
  bool applied = false;
  std::vector<Diagnostic> added;
  std::vector<Diagnostic> retracted;
  std::string instance_id;           // add_instance only
  std::optional<std::string> error;  // reason for a rejected op
};

// Transport-independent design sessions. With a data directory every design
// keeps `designs/<id>/meta.json`, an append-only `oplog.jsonl` and a
// `design.json` snapshot; blocks live under `library/`. Sessions are replayed
// from their op logs on construction.
class DesignService {
 public:
  explicit DesignService(std::optional<std::filesystem::path> data_dir = std::nullopt,
                         ProtocolRegistry registry = ProtocolRegistry::builtins());
  ~DesignService();

  DesignService(const DesignService&) = delete;
  DesignService& operator=(const DesignService&) = delete;

  Library& library() { return *library_; }
  const Library& library() const { return *library_; }

  std::string create_design(std::string name);
  void delete_design(std::string_view id);
  std::vector<std::string> design_ids() const;

  // Throws bw::Error(NotFound) for unknown designs and (StaleRevision) when
  // `expected_revision` is given and differs from the current revision.
  OpResult apply(std::string_view id, Op op, std::optional<long> expected_revision = std::nullopt);

  long revision(std::string_view id) const;
  Design design(std::string_view id) const;
  // check_design at compose stage: what `bw check` reports for the same file.
  std::vector<Diagnostic> diagnostics(std::string_view id) const;
  // {"id","name","revision","design","diagnostics","errored_edges"}
  std::string state_json(std::string_view id) const;
  ComposeArtifacts compose(std::string_view id) const;

 private:
  struct Session;

  std::shared_ptr<Session> session(std::string_view id) const;
  std::filesystem::path design_dir(std::string_view id) const;
  void replay(const std::filesystem::path& dir);

  std::optional<std::filesystem::path> data_dir_;
  std::unique_ptr<Library> library_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<Session>, std::less<>> sessions_;
};

}  // namespace bw
