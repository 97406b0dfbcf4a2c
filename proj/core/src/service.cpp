#include "blockweave/service.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "blockweave/engine.hpp"
#include "blockweave/error.hpp"
#include "fs_util.hpp"

namespace bw {

using nlohmann::json;
namespace fs = std::filesystem;

struct DesignService::Session {
  std::mutex mu;
  std::unique_ptr<Engine> engine;
  long revision = 0;
};

DesignService::DesignService(std::optional<fs::path> data_dir, ProtocolRegistry registry)
    : data_dir_(std::move(data_dir)) {
  if (!data_dir_) {
    library_ = std::make_unique<Library>(std::move(registry));
    return;
  }
  library_ = std::make_unique<Library>(*data_dir_ / "library", std::move(registry));
  const fs::path designs = *data_dir_ / "designs";
  fs::create_directories(designs);
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(designs)) {
    if (entry.is_directory()) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) replay(dir);
}

DesignService::~DesignService() = default;

fs::path DesignService::design_dir(std::string_view id) const { return *data_dir_ / "designs" / std::string(id); }

void DesignService::replay(const fs::path& dir) {
  if (!fs::exists(dir / "meta.json")) return;
  const json meta = json::parse(read_text_file(dir / "meta.json"));
  Design shell;
  shell.id = meta.at("id").get<std::string>();
  shell.name = meta.at("name").get<std::string>();

  auto s = std::make_shared<Session>();
  s->engine = std::make_unique<Engine>(*library_, std::move(shell));
  if (fs::exists(dir / "oplog.jsonl")) {
    std::ifstream in(dir / "oplog.jsonl", std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      Op op;
      try {
        op = parse_op(line);
      } catch (const Error&) {
        // A torn final line from an interrupted append; everything before it
        // was acknowledged.
        if (in.peek() == std::char_traits<char>::eof()) break;
        throw;
      }
      s->engine->apply(op);
      ++s->revision;
    }
  }
  std::unique_lock lock(mu_);
  sessions_[s->engine->design().id] = std::move(s);
}

std::shared_ptr<DesignService::Session> DesignService::session(std::string_view id) const {
  std::shared_lock lock(mu_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::NotFound, "no design '" + std::string(id) + "'");
  return it->second;
}

std::string DesignService::create_design(std::string name) {
  std::unique_lock lock(mu_);
  Design shell = new_design(name);
  while (sessions_.count(shell.id)) shell = new_design(name);
  const std::string id = shell.id;
  if (data_dir_) {
    const fs::path dir = design_dir(id);
    fs::create_directories(dir);
    write_file_atomic(dir / "meta.json", json{{"id", id}, {"name", shell.name}}.dump(2) + "\n");
    write_file_atomic(dir / "oplog.jsonl", "");
  }
  auto s = std::make_shared<Session>();
  s->engine = std::make_unique<Engine>(*library_, std::move(shell));
  sessions_[id] = std::move(s);
  return id;
}

void DesignService::delete_design(std::string_view id) {
  std::unique_lock lock(mu_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::NotFound, "no design '" + std::string(id) + "'");
  {
    std::lock_guard session_lock(it->second->mu);
    if (data_dir_) fs::remove_all(design_dir(id));
  }
  sessions_.erase(it);
}

std::vector<std::string> DesignService::design_ids() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, _] : sessions_) out.push_back(id);
  return out;
}

OpResult DesignService::apply(std::string_view id, Op op, std::optional<long> expected_revision) {
  const auto s = session(id);
  std::lock_guard lock(s->mu);
  if (expected_revision && *expected_revision != s->revision) {
    throw Error(ErrorCode::StaleRevision, "expected revision " + std::to_string(*expected_revision) +
                                              " but design is at " + std::to_string(s->revision));
  }
  OpResult result;
  result.revision = s->revision;
  OpOutcome outcome;
  try {
    outcome = s->engine->apply(op);
  } catch (const Error& e) {
    result.applied = false;
    result.error = std::string(to_string(e.code())) + ": " + e.what();
    return result;
  }
  result.added = std::move(outcome.added);
  result.retracted = std::move(outcome.retracted);
  result.instance_id = outcome.instance_id;
  if (!outcome.applied) {
    result.applied = false;
    return result;
  }
  result.applied = true;
  result.revision = ++s->revision;
  if (data_dir_) {
    const fs::path dir = design_dir(id);
    {
      std::ofstream log(dir / "oplog.jsonl", std::ios::binary | std::ios::app);
      log << render_op(op) << '\n';
      log.flush();
      if (!log) throw Error(ErrorCode::Io, "cannot append to op log of '" + std::string(id) + "'");
    }
    write_file_atomic(dir / "design.json", render_design(s->engine->design()));
  }
  return result;
}

long DesignService::revision(std::string_view id) const {
  const auto s = session(id);
  std::lock_guard lock(s->mu);
  return s->revision;
}

Design DesignService::design(std::string_view id) const {
  const auto s = session(id);
  std::lock_guard lock(s->mu);
  return s->engine->design();
}

std::vector<Diagnostic> DesignService::diagnostics(std::string_view id) const {
  const auto s = session(id);
  std::lock_guard lock(s->mu);
  return check_design(s->engine->design(), *library_, CheckStage::Compose);
}

std::string DesignService::state_json(std::string_view id) const {
  const auto s = session(id);
  std::lock_guard lock(s->mu);
  const Design& d = s->engine->design();
  json errored = json::array();
  for (const auto& e : d.edges) {
    if (s->engine->edge_errored(e)) errored.push_back({e.a.instance, e.a.port, e.b.instance, e.b.port});
  }
  json doc = {{"id", d.id},
              {"name", d.name},
              {"revision", s->revision},
              {"design", json::parse(render_design(d))},
              {"diagnostics", json::parse(render_diagnostics_json(check_design(d, *library_, CheckStage::Compose)))},
              {"errored_edges", errored}};
  return doc.dump(2) + "\n";
}

ComposeArtifacts DesignService::compose(std::string_view id) const {
  const Design d = design(id);
  return compose_design(d, *library_);
}

}  // namespace bw
