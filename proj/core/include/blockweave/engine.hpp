#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "blockweave/annotation.hpp"
#include "blockweave/block.hpp"
#include "blockweave/board.hpp"
#include "blockweave/checks.hpp"
#include "blockweave/design.hpp"
#include "blockweave/diagnostic.hpp"

namespace bw {

class Library;

enum class CheckStage {
  Edit,     // checks that run as the design is edited
  Compose,  // Edit plus the required-interface check
};

// Batch recomputation of every check family. Output is sorted.
std::vector<Diagnostic> check_design(const Design& design, const Library& library,
                                     CheckStage stage = CheckStage::Compose);

VoltageRange effective_vout(const Design& design, const Library& library, std::string_view mat_iid);

// All bus components of a design, ordered by anchor port.
std::vector<BusComponent> bus_components(const Design& design, const Library& library);

struct OpOutcome {
  bool applied = true;
  std::vector<Diagnostic> added;      // sorted
  std::vector<Diagnostic> retracted;  // sorted
  std::string instance_id;            // set by add_instance
};

// Live design model. Each mutation rechecks only what it touched (the moved
// subtree, the affected bus components, the affected placements) and
// returns the change in the live diagnostic set. Structural violations throw
// bw::Error and leave the design untouched.
//
// Mutations must be externally serialized; const members may run
// concurrently between mutations.
class Engine {
 public:
  // `shell` supplies id, name and board; it must have no instances.
  Engine(const Library& library, Design shell);
  explicit Engine(const Library& library, std::string name = {});

  const Design& design() const { return design_; }
  const Library& library() const { return *library_; }

  OpOutcome add_instance(std::string_view block_id, std::optional<std::string> mat_parent,
                         std::optional<std::string> instance_id = std::nullopt,
                         std::optional<int> supply_mv = std::nullopt);
  OpOutcome reparent(std::string_view iid, std::string_view new_mat);
  OpOutcome remove_instance(std::string_view iid);
  OpOutcome connect(const PortKey& a, const PortKey& b);
  OpOutcome disconnect(const PortKey& a, const PortKey& b);
  OpOutcome set_supply(std::string_view iid, std::optional<int> supply_mv);
  OpOutcome place(std::string_view iid, const Placement& placement);
  OpOutcome set_board(const BoardSpec& board);

  // Dispatches one op. An AddInstanceOp without an id gets the generated id
  // written back so that logs replay deterministically.
  OpOutcome apply(Op& op);

  std::vector<Diagnostic> live_diagnostics() const;
  VoltageRange effective_vout(std::string_view mat_iid) const;
  // True when the edge's bus component carries an Error diagnostic.
  bool edge_errored(const Edge& edge) const;
  std::shared_ptr<const BlockDefinition> definition(std::string_view iid) const;

 private:
  struct BusEntry {
    std::vector<PortKey> members;
    std::vector<Diagnostic> diagnostics;
  };

  const BlockInstance& require(std::string_view iid) const;
  const ProtocolPort& require_port(const PortKey& key) const;
  std::string generate_id(std::string_view block_id) const;
  std::vector<std::string> subtree(std::string_view root) const;

  void recheck_voltage(const std::string& iid);
  void recheck_buses(const std::vector<PortKey>& seeds);
  void recheck_placement(const std::string& iid);
  void recheck_boundaries();
  void drop_instance_diagnostics(const std::string& iid);
  OpOutcome finish();

  const Library* library_;
  Design design_;
  std::map<std::string, std::shared_ptr<const BlockDefinition>, std::less<>> defs_;
  std::map<PortKey, std::set<PortKey>> adjacency_;

  // Live diagnostics grouped by the unit that produced them.
  std::map<std::string, Diagnostic, std::less<>> voltage_;             // by instance
  std::map<PortKey, BusEntry> bus_;                                    // by bus anchor
  std::map<PortKey, PortKey> port_anchor_;                             // port -> its bus anchor
  std::map<std::string, Diagnostic, std::less<>> boundary_;            // by instance
  std::map<std::pair<std::string, std::string>, Diagnostic> overlap_;  // by ordered instance pair

  // Diagnostics removed and produced by the mutation in progress.
  std::vector<Diagnostic> before_;
  std::vector<Diagnostic> after_;
};

struct LoadReport {
  std::vector<Diagnostic> rejected;  // ops refused during replay (e.g. ProtocolMismatch edges)
};

// Replays a parsed design file onto an empty engine: instances parent-first,
// then supplies, board, placements and edges. Throws bw::Error for dangling
// references or structural violations.
LoadReport load_design(Engine& engine, const Design& file);

}  // namespace bw
