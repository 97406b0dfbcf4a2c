#include "blockweave/engine.hpp"

#include <algorithm>
#include <deque>
#include <functional>

#include "blockweave/error.hpp"
#include "blockweave/library.hpp"

namespace bw {

namespace {

using DefLookup = std::function<std::shared_ptr<const BlockDefinition>(std::string_view iid)>;
using Adjacency = std::map<PortKey, std::set<PortKey>>;

VoltageRange vout_of(const BlockDefinition& def, const BlockInstance& inst) {
  if (!def.is_mat() || !def.power_out) {
    throw Error(ErrorCode::StructureError, "instance '" + inst.id + "' is not a mat block");
  }
  if (def.classification == BlockClass::Power && inst.supply_mv) return VoltageRange::fixed(*inst.supply_mv);
  return *def.power_out;
}

std::optional<Diagnostic> voltage_for(const Design& design, const DefLookup& lookup, const BlockInstance& inst) {
  if (!inst.mat_parent) return std::nullopt;
  const auto def = lookup(inst.id);
  if (!def || !def->power_in) return std::nullopt;
  const BlockInstance* parent = design.find(*inst.mat_parent);
  if (!parent) return std::nullopt;
  const auto pdef = lookup(parent->id);
  if (!pdef || !pdef->is_mat()) return std::nullopt;
  return voltage_check(*def->power_in, vout_of(*pdef, *parent), subject::instance(inst.id));
}

// Collects the edge-connected component containing `seed`.
BusComponent collect_component(const PortKey& seed, const Adjacency& adj, const DefLookup& lookup,
                               std::set<PortKey>& visited) {
  BusComponent comp;
  std::deque<PortKey> queue{seed};
  visited.insert(seed);
  std::set<PortKey> members;
  while (!queue.empty()) {
    PortKey k = std::move(queue.front());
    queue.pop_front();
    members.insert(k);
    const auto it = adj.find(k);
    if (it == adj.end()) continue;
    for (const auto& n : it->second) {
      if (visited.insert(n).second) queue.push_back(n);
    }
  }
  for (const auto& k : members) {
    const auto def = lookup(k.instance);
    BusMember m;
    m.key = k;
    m.port = def->find_port(k.port);
    m.block_class = def->classification;
    const auto it = adj.find(k);
    m.edge_count = it == adj.end() ? 0 : it->second.size();
    if (it != adj.end()) {
      for (const auto& n : it->second) {
        if (k < n) comp.edges.push_back(Edge{k, n});
      }
    }
    comp.members.push_back(std::move(m));
  }
  std::sort(comp.edges.begin(), comp.edges.end());
  if (!comp.members.empty() && comp.members.front().port) comp.protocol = comp.members.front().port->protocol;
  return comp;
}

std::optional<Rect> rect_for(const DefLookup& lookup, const std::string& iid, const Placement& p) {
  const auto def = lookup(iid);
  if (!def) return std::nullopt;
  return placed_rect(def->footprint, p);
}

// Edges usable for bus analysis plus diagnostics for the ones that are not.
struct EdgeScan {
  Adjacency adj;
  std::vector<Diagnostic> diagnostics;
};

EdgeScan scan_edges(const Design& design, const DefLookup& lookup) {
  EdgeScan out;
  for (const auto& e : design.edges) {
    const auto da = design.find(e.a.instance) ? lookup(e.a.instance) : nullptr;
    const auto db = design.find(e.b.instance) ? lookup(e.b.instance) : nullptr;
    const ProtocolPort* pa = da ? da->find_port(e.a.port) : nullptr;
    const ProtocolPort* pb = db ? db->find_port(e.b.port) : nullptr;
    if (!pa || !pb) {
      out.diagnostics.push_back({Severity::Error, DiagnosticKind::NotFound, e.subject(),
                                 "edge endpoint " + (!pa ? e.a.str() : e.b.str()) + " does not exist"});
      continue;
    }
    if (auto d = protocol_match(*pa, *pb, subject::port(e.a.instance, e.a.port))) {
      out.diagnostics.push_back(std::move(*d));
      continue;
    }
    out.adj[e.a].insert(e.b);
    out.adj[e.b].insert(e.a);
  }
  return out;
}

DefLookup library_lookup(const Design& design, const Library& library) {
  return [&design, &library](std::string_view iid) -> std::shared_ptr<const BlockDefinition> {
    const BlockInstance* inst = design.find(iid);
    return inst ? library.find(inst->block_id) : nullptr;
  };
}

}  // namespace

VoltageRange effective_vout(const Design& design, const Library& library, std::string_view mat_iid) {
  const BlockInstance* inst = design.find(mat_iid);
  if (!inst) throw Error(ErrorCode::NotFound, "no instance '" + std::string(mat_iid) + "'");
  return vout_of(*library.get(inst->block_id), *inst);
}

std::vector<BusComponent> bus_components(const Design& design, const Library& library) {
  const auto lookup = library_lookup(design, library);
  const auto scan = scan_edges(design, lookup);
  std::vector<BusComponent> out;
  std::set<PortKey> visited;
  for (const auto& [key, _] : scan.adj) {
    if (visited.count(key)) continue;
    out.push_back(collect_component(key, scan.adj, lookup, visited));
  }
  return out;
}

std::vector<Diagnostic> check_design(const Design& design, const Library& library, CheckStage stage) {
  const auto lookup = library_lookup(design, library);
  std::vector<Diagnostic> out;

  for (const auto& [iid, inst] : design.instances) {
    if (!library.find(inst.block_id)) {
      out.push_back({Severity::Error, DiagnosticKind::NotFound, subject::instance(iid),
                     "block '" + inst.block_id + "' is not in the library"});
      continue;
    }
    if (auto d = voltage_for(design, lookup, inst)) out.push_back(std::move(*d));
  }

  auto scan = scan_edges(design, lookup);
  out.insert(out.end(), scan.diagnostics.begin(), scan.diagnostics.end());
  std::set<PortKey> visited;
  for (const auto& [key, _] : scan.adj) {
    if (visited.count(key)) continue;
    const auto comp = collect_component(key, scan.adj, lookup, visited);
    auto diags = bus_check(comp, library.registry());
    out.insert(out.end(), diags.begin(), diags.end());
  }

  std::vector<std::pair<std::string, Rect>> rects;
  for (const auto& [iid, p] : design.placements) {
    if (!design.find(iid)) continue;
    const auto r = rect_for(lookup, iid, p);
    if (!r) continue;
    if (auto d = boundary_check(iid, *r, design.board)) out.push_back(std::move(*d));
    rects.emplace_back(iid, *r);
  }
  for (std::size_t i = 0; i < rects.size(); ++i) {
    for (std::size_t j = i + 1; j < rects.size(); ++j) {
      if (auto d = overlap_check(rects[i].first, rects[i].second, rects[j].first, rects[j].second)) {
        out.push_back(std::move(*d));
      }
    }
  }

  if (stage == CheckStage::Compose) {
    // Unknown blocks were already reported above.
    Design known = design;
    std::erase_if(known.instances, [&](const auto& kv) { return !library.find(kv.second.block_id); });
    auto req = required_check(known, library);
    out.insert(out.end(), req.begin(), req.end());
  }
  sort_diagnostics(out);
  return out;
}

// ---- Engine ----

Engine::Engine(const Library& library, Design shell) : library_(&library), design_(std::move(shell)) {
  if (!design_.instances.empty() || !design_.edges.empty() || !design_.placements.empty()) {
    throw Error(ErrorCode::StructureError, "engine shell must be empty; use load_design");
  }
}

Engine::Engine(const Library& library, std::string name) : Engine(library, new_design(std::move(name))) {}

const BlockInstance& Engine::require(std::string_view iid) const {
  const BlockInstance* inst = design_.find(iid);
  if (!inst) throw Error(ErrorCode::NotFound, "no instance '" + std::string(iid) + "'");
  return *inst;
}

std::shared_ptr<const BlockDefinition> Engine::definition(std::string_view iid) const {
  const auto it = defs_.find(iid);
  if (it == defs_.end()) throw Error(ErrorCode::NotFound, "no instance '" + std::string(iid) + "'");
  return it->second;
}

const ProtocolPort& Engine::require_port(const PortKey& key) const {
  require(key.instance);
  const ProtocolPort* port = definition(key.instance)->find_port(key.port);
  if (!port) throw Error(ErrorCode::NotFound, "instance '" + key.instance + "' has no port '" + key.port + "'");
  return *port;
}

std::string Engine::generate_id(std::string_view block_id) const {
  for (int n = 1;; ++n) {
    std::string id = std::string(block_id) + "_" + std::to_string(n);
    if (!design_.find(id)) return id;
  }
}

std::vector<std::string> Engine::subtree(std::string_view root) const {
  std::vector<std::string> out{std::string(root)};
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (const auto& [iid, inst] : design_.instances) {
      if (inst.mat_parent == out[i]) out.push_back(iid);
    }
  }
  return out;
}

VoltageRange Engine::effective_vout(std::string_view mat_iid) const {
  return vout_of(*definition(mat_iid), require(mat_iid));
}

void Engine::recheck_voltage(const std::string& iid) {
  if (auto it = voltage_.find(iid); it != voltage_.end()) {
    before_.push_back(it->second);
    voltage_.erase(it);
  }
  const BlockInstance* inst = design_.find(iid);
  if (!inst) return;
  const DefLookup lookup = [this](std::string_view id) { return definition(id); };
  if (auto d = voltage_for(design_, lookup, *inst)) {
    after_.push_back(*d);
    voltage_.emplace(iid, std::move(*d));
  }
}

void Engine::recheck_buses(const std::vector<PortKey>& seeds) {
  // Retire every component a seed belonged to, then rebuild from the seeds.
  for (const auto& s : seeds) {
    const auto pa = port_anchor_.find(s);
    if (pa == port_anchor_.end()) continue;
    const auto entry = bus_.find(pa->second);
    for (const auto& d : entry->second.diagnostics) before_.push_back(d);
    for (const auto& m : entry->second.members) port_anchor_.erase(m);
    bus_.erase(entry);
  }
  const DefLookup lookup = [this](std::string_view id) { return definition(id); };
  std::set<PortKey> visited;
  for (const auto& s : seeds) {
    const auto it = adjacency_.find(s);
    if (it == adjacency_.end() || it->second.empty() || visited.count(s)) continue;
    const auto comp = collect_component(s, adjacency_, lookup, visited);
    BusEntry entry;
    for (const auto& m : comp.members) {
      entry.members.push_back(m.key);
      port_anchor_[m.key] = comp.anchor();
    }
    entry.diagnostics = bus_check(comp, library_->registry());
    after_.insert(after_.end(), entry.diagnostics.begin(), entry.diagnostics.end());
    bus_[comp.anchor()] = std::move(entry);
  }
}

void Engine::recheck_placement(const std::string& iid) {
  if (auto it = boundary_.find(iid); it != boundary_.end()) {
    before_.push_back(it->second);
    boundary_.erase(it);
  }
  for (auto it = overlap_.begin(); it != overlap_.end();) {
    if (it->first.first == iid || it->first.second == iid) {
      before_.push_back(it->second);
      it = overlap_.erase(it);
    } else {
      ++it;
    }
  }
  const auto pit = design_.placements.find(iid);
  if (pit == design_.placements.end()) return;
  const Rect r = placed_rect(definition(iid)->footprint, pit->second);
  if (auto d = boundary_check(iid, r, design_.board)) {
    after_.push_back(*d);
    boundary_.emplace(iid, std::move(*d));
  }
  for (const auto& [other, p] : design_.placements) {
    if (other == iid) continue;
    const Rect o = placed_rect(definition(other)->footprint, p);
    const bool first = iid < other;
    auto d = first ? overlap_check(iid, r, other, o) : overlap_check(other, o, iid, r);
    if (!d) continue;
    after_.push_back(*d);
    overlap_.emplace(first ? std::pair{iid, other} : std::pair{other, iid}, std::move(*d));
  }
}

void Engine::recheck_boundaries() {
  for (const auto& [iid, p] : design_.placements) {
    if (auto it = boundary_.find(iid); it != boundary_.end()) {
      before_.push_back(it->second);
      boundary_.erase(it);
    }
    if (auto d = boundary_check(iid, placed_rect(definition(iid)->footprint, p), design_.board)) {
      after_.push_back(*d);
      boundary_.emplace(iid, std::move(*d));
    }
  }
}

OpOutcome Engine::finish() {
  sort_diagnostics(before_);
  sort_diagnostics(after_);
  OpOutcome out;
  std::set_difference(after_.begin(), after_.end(), before_.begin(), before_.end(), std::back_inserter(out.added),
                      diagnostic_less);
  std::set_difference(before_.begin(), before_.end(), after_.begin(), after_.end(),
                      std::back_inserter(out.retracted), diagnostic_less);
  before_.clear();
  after_.clear();
  return out;
}

OpOutcome Engine::add_instance(std::string_view block_id, std::optional<std::string> mat_parent,
                               std::optional<std::string> instance_id, std::optional<int> supply_mv) {
  const auto def = library_->get(block_id);
  const std::string iid = instance_id ? *instance_id : generate_id(block_id);
  if (iid.empty() || iid.find_first_of(":/ \t\n") != std::string::npos) {
    throw Error(ErrorCode::BadRequest, "invalid instance id '" + iid + "'");
  }
  if (design_.find(iid)) throw Error(ErrorCode::StructureError, "instance '" + iid + "' already exists");

  if (def->classification == BlockClass::Power) {
    if (mat_parent) throw Error(ErrorCode::StructureError, "POWER block '" + iid + "' cannot have a mat parent");
  } else {
    if (!mat_parent) {
      throw Error(ErrorCode::StructureError, std::string(to_string(def->classification)) + " block '" + iid +
                                                 "' needs a mat parent");
    }
    require(*mat_parent);
    if (!definition(*mat_parent)->is_mat()) {
      throw Error(ErrorCode::StructureError, "parent '" + *mat_parent + "' is not a mat block");
    }
  }
  if (supply_mv) {
    if (def->classification != BlockClass::Power) {
      throw Error(ErrorCode::StructureError, "supply settings apply to POWER blocks only");
    }
    if (!def->power_out->contains(*supply_mv)) {
      throw Error(ErrorCode::StructureError, "supply " + render_millivolts(*supply_mv) + " is outside VOUT " +
                                                 render_voltage(*def->power_out));
    }
  }

  design_.instances.emplace(iid, BlockInstance{iid, def->block_id, std::move(mat_parent), supply_mv});
  defs_.emplace(iid, def);
  recheck_voltage(iid);
  auto out = finish();
  out.instance_id = iid;
  return out;
}

OpOutcome Engine::reparent(std::string_view iid_view, std::string_view new_mat) {
  const std::string iid(iid_view);
  const BlockInstance& inst = require(iid);
  require(new_mat);
  if (definition(iid)->classification == BlockClass::Power) {
    throw Error(ErrorCode::StructureError, "POWER block '" + iid + "' cannot have a mat parent");
  }
  if (!definition(new_mat)->is_mat()) {
    throw Error(ErrorCode::StructureError, "parent '" + std::string(new_mat) + "' is not a mat block");
  }
  const auto moved = subtree(iid);
  if (std::find(moved.begin(), moved.end(), new_mat) != moved.end()) {
    throw Error(ErrorCode::StructureError, "cannot move '" + iid + "' into its own subtree");
  }
  design_.instances.at(iid).mat_parent = std::string(new_mat);
  (void)inst;
  for (const auto& m : moved) recheck_voltage(m);
  return finish();
}

void Engine::drop_instance_diagnostics(const std::string& iid) {
  recheck_voltage(iid);
  recheck_placement(iid);
}

OpOutcome Engine::remove_instance(std::string_view iid_view) {
  const std::string iid(iid_view);
  require(iid);
  for (const auto& [other, inst] : design_.instances) {
    if (inst.mat_parent == iid) {
      throw Error(ErrorCode::MatNotEmpty, "mat '" + iid + "' still holds '" + other + "'");
    }
  }

  std::vector<PortKey> seeds;
  for (const auto& port : definition(iid)->ports) {
    PortKey k{iid, port.ref()};
    const auto it = adjacency_.find(k);
    if (it == adjacency_.end()) continue;
    seeds.push_back(k);
    for (const auto& n : it->second) {
      seeds.push_back(n);
      adjacency_[n].erase(k);
      if (adjacency_[n].empty()) adjacency_.erase(n);
      design_.edges.erase(Edge::between(k, n));
    }
    adjacency_.erase(k);
  }
  design_.instances.erase(design_.instances.find(iid));
  design_.placements.erase(iid);
  recheck_buses(seeds);
  drop_instance_diagnostics(iid);
  defs_.erase(defs_.find(iid));
  return finish();
}

OpOutcome Engine::connect(const PortKey& a, const PortKey& b) {
  for (const auto* k : {&a, &b}) {
    require(k->instance);
    if (definition(k->instance)->is_mat()) {
      throw Error(ErrorCode::StructureError, "mat block '" + k->instance + "' cannot carry edges");
    }
  }
  const ProtocolPort& pa = require_port(a);
  const ProtocolPort& pb = require_port(b);
  if (a == b) throw Error(ErrorCode::StructureError, "cannot connect " + a.str() + " to itself");
  const Edge e = Edge::between(a, b);
  if (design_.edges.count(e)) throw Error(ErrorCode::StructureError, "edge " + e.subject() + " already exists");

  const bool swapped = !(e.a == a);
  if (auto d = protocol_match(swapped ? pb : pa, swapped ? pa : pb, subject::port(e.a.instance, e.a.port))) {
    OpOutcome out;
    out.applied = false;
    out.added.push_back(std::move(*d));
    return out;
  }
  design_.edges.insert(e);
  adjacency_[a].insert(b);
  adjacency_[b].insert(a);
  recheck_buses({e.a, e.b});
  return finish();
}

OpOutcome Engine::disconnect(const PortKey& a, const PortKey& b) {
  const Edge e = Edge::between(a, b);
  if (!design_.edges.count(e)) throw Error(ErrorCode::NotFound, "no edge " + e.subject());
  design_.edges.erase(e);
  for (const auto& [x, y] : {std::pair{e.a, e.b}, std::pair{e.b, e.a}}) {
    adjacency_[x].erase(y);
    if (adjacency_[x].empty()) adjacency_.erase(x);
  }
  recheck_buses({e.a, e.b});
  return finish();
}

OpOutcome Engine::set_supply(std::string_view iid_view, std::optional<int> supply_mv) {
  const std::string iid(iid_view);
  require(iid);
  const auto def = definition(iid);
  if (def->classification != BlockClass::Power) {
    throw Error(ErrorCode::StructureError, "supply settings apply to POWER blocks only");
  }
  if (supply_mv && !def->power_out->contains(*supply_mv)) {
    throw Error(ErrorCode::StructureError,
                "supply " + render_millivolts(*supply_mv) + " is outside VOUT " + render_voltage(*def->power_out));
  }
  design_.instances.at(iid).supply_mv = supply_mv;
  for (const auto& [child, inst] : design_.instances) {
    if (inst.mat_parent == iid) recheck_voltage(child);
  }
  return finish();
}

OpOutcome Engine::place(std::string_view iid_view, const Placement& placement) {
  const std::string iid(iid_view);
  require(iid);
  if (!valid_rotation(placement.rot)) {
    throw Error(ErrorCode::BadRequest, "rotation must be 0, 90, 180 or 270 (got " + std::to_string(placement.rot) + ")");
  }
  design_.placements[iid] = placement;
  recheck_placement(iid);
  return finish();
}

OpOutcome Engine::set_board(const BoardSpec& board) {
  if (!(board.w_mm > 0) || !(board.h_mm > 0) || !(board.pitch_mm > 0)) {
    throw Error(ErrorCode::BadRequest, "board dimensions and pitch must be positive");
  }
  design_.board = board;
  recheck_boundaries();
  return finish();
}

OpOutcome Engine::apply(Op& op) {
  struct Visitor {
    Engine& e;
    OpOutcome operator()(AddInstanceOp& o) const {
      auto out = e.add_instance(o.block, o.parent, o.id, o.supply_mv);
      o.id = out.instance_id;
      return out;
    }
    OpOutcome operator()(ReparentOp& o) const { return e.reparent(o.instance, o.parent); }
    OpOutcome operator()(RemoveInstanceOp& o) const { return e.remove_instance(o.instance); }
    OpOutcome operator()(ConnectOp& o) const { return e.connect(o.a, o.b); }
    OpOutcome operator()(DisconnectOp& o) const { return e.disconnect(o.a, o.b); }
    OpOutcome operator()(SetSupplyOp& o) const { return e.set_supply(o.instance, o.supply_mv); }
    OpOutcome operator()(PlaceOp& o) const { return e.place(o.instance, o.placement); }
    OpOutcome operator()(SetBoardOp& o) const { return e.set_board(o.board); }
  };
  return std::visit(Visitor{*this}, op);
}

std::vector<Diagnostic> Engine::live_diagnostics() const {
  std::vector<Diagnostic> out;
  for (const auto& [_, d] : voltage_) out.push_back(d);
  for (const auto& [_, entry] : bus_) out.insert(out.end(), entry.diagnostics.begin(), entry.diagnostics.end());
  for (const auto& [_, d] : boundary_) out.push_back(d);
  for (const auto& [_, d] : overlap_) out.push_back(d);
  sort_diagnostics(out);
  return out;
}

bool Engine::edge_errored(const Edge& edge) const {
  const auto pa = port_anchor_.find(edge.a);
  if (pa == port_anchor_.end() || !design_.edges.count(edge)) return false;
  return has_errors(bus_.at(pa->second).diagnostics);
}

LoadReport load_design(Engine& engine, const Design& file) {
  LoadReport report;
  std::set<std::string> added;
  std::vector<const BlockInstance*> pending;
  for (const auto& [_, inst] : file.instances) pending.push_back(&inst);
  while (!pending.empty()) {
    std::vector<const BlockInstance*> next;
    for (const auto* inst : pending) {
      if (inst->mat_parent && !added.count(*inst->mat_parent)) {
        next.push_back(inst);
        continue;
      }
      engine.add_instance(inst->block_id, inst->mat_parent, inst->id, inst->supply_mv);
      added.insert(inst->id);
    }
    if (next.size() == pending.size()) {
      const auto* stuck = next.front();
      throw Error(file.find(*stuck->mat_parent) ? ErrorCode::StructureError : ErrorCode::NotFound,
                  "instance '" + stuck->id + "' has unresolvable mat parent '" + *stuck->mat_parent + "'");
    }
    pending = std::move(next);
  }
  engine.set_board(file.board);
  for (const auto& [iid, p] : file.placements) engine.place(iid, p);
  for (const auto& e : file.edges) {
    auto out = engine.connect(e.a, e.b);
    if (!out.applied) report.rejected.insert(report.rejected.end(), out.added.begin(), out.added.end());
  }
  return report;
}

}  // namespace bw
