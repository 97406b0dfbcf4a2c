#include "generators.hpp"

#include <algorithm>
#include <set>

namespace bw::testing {

namespace {

template <class T>
const T& pick(const std::vector<T>& v, std::mt19937& rng) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

bool chance(std::mt19937& rng, double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; }

int uniform(std::mt19937& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

struct View {
  std::vector<std::shared_ptr<const BlockDefinition>> blocks;
  std::vector<std::string> power, mats, general, all;
  std::vector<PortKey> ports;
};

View view_of(const Design& d, const Library& lib) {
  View v;
  for (const auto& [_, defs] : lib.list()) v.blocks.insert(v.blocks.end(), defs.begin(), defs.end());
  for (const auto& [iid, inst] : d.instances) {
    const auto def = lib.get(inst.block_id);
    v.all.push_back(iid);
    if (def->classification == BlockClass::Power) v.power.push_back(iid);
    if (def->is_mat()) {
      v.mats.push_back(iid);
    } else {
      v.general.push_back(iid);
      for (const auto& p : def->ports) v.ports.push_back({iid, p.ref()});
    }
  }
  return v;
}

std::string random_ident(std::mt19937& rng, bool letter_first) {
  static const std::string letters = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";
  static const std::string alnum = letters + "0123456789";
  std::uniform_int_distribution<int> len(1, 6);
  std::string out;
  const int n = len(rng);
  for (int i = 0; i < n; ++i) {
    const std::string& pool = (i == 0 && letter_first) ? letters : alnum;
    out += pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
  }
  return out;
}

VoltageRange random_range(std::mt19937& rng) {
  std::uniform_int_distribution<int> mv(1, 48000);
  const int a = mv(rng);
  if (rng() % 2) return VoltageRange::fixed(a);
  const int b = mv(rng);
  return {std::min(a, b), std::max(a, b)};
}

}  // namespace

Annotation random_annotation(std::mt19937& rng) {
  switch (rng() % 4) {
    case 0: {
      ProtocolDecl p;
      p.protocol = random_ident(rng, true);
      if (rng() % 2) p.signal = random_ident(rng, false);
      if (rng() % 2) p.alt_name = random_ident(rng, false);
      if (rng() % 3 == 0) p.level = random_range(rng);
      p.optional_flag = rng() % 2;
      return p;
    }
    case 1:
      return PowerDecl{rng() % 2 ? PowerDirection::Vin : PowerDirection::Vout, random_range(rng)};
    case 2:
      return Ground{};
    default: {
      std::string name = random_ident(rng, true) + "_" + random_ident(rng, false);
      return Plain{name};
    }
  }
}

Op random_op(const Engine& engine, std::mt19937& rng, const OpLimits& limits) {
  const Design& d = engine.design();
  const Library& lib = engine.library();
  const View v = view_of(d, lib);

  for (;;) {
    switch (uniform(rng, 0, 11)) {
      case 0:
      case 1:
      case 2: {
        if (d.instances.size() >= limits.max_instances) break;
        const auto& def = pick(v.blocks, rng);
        AddInstanceOp op{def->block_id, std::nullopt, std::nullopt, std::nullopt};
        if (def->classification == BlockClass::Power) {
          if (def->power_out && chance(rng, 0.6)) op.supply_mv = uniform(rng, def->power_out->min_mv - 500, def->power_out->max_mv);
          if (!v.all.empty() && chance(rng, 0.05)) op.parent = pick(v.all, rng);
        } else {
          if (v.mats.empty()) break;
          op.parent = chance(rng, 0.9) || v.general.empty() ? pick(v.mats, rng) : pick(v.general, rng);
        }
        return op;
      }
      case 3:
        if (v.all.empty()) break;
        return RemoveInstanceOp{pick(v.all, rng)};
      case 4: {
        if (v.all.empty() || v.mats.empty()) break;
        return ReparentOp{pick(v.all, rng), pick(v.mats, rng)};
      }
      case 5:
      case 6:
      case 7: {
        if (v.ports.size() < 2 || d.edges.size() >= limits.max_edges) break;
        const PortKey a = pick(v.ports, rng);
        std::vector<PortKey> same;
        for (const auto& p : v.ports) {
          if (p.instance == a.instance) continue;
          const auto pa = engine.definition(a.instance)->find_port(a.port);
          const auto pb = engine.definition(p.instance)->find_port(p.port);
          if (pa->protocol == pb->protocol) same.push_back(p);
        }
        if (!same.empty() && chance(rng, 0.85)) return ConnectOp{a, pick(same, rng)};
        return ConnectOp{a, pick(v.ports, rng)};
      }
      case 8: {
        if (d.edges.empty()) break;
        std::vector<Edge> edges(d.edges.begin(), d.edges.end());
        const auto& e = pick(edges, rng);
        return chance(rng, 0.5) ? DisconnectOp{e.a, e.b} : DisconnectOp{e.b, e.a};
      }
      case 9: {
        if (v.power.empty()) break;
        const auto& iid = pick(v.power, rng);
        const auto out = engine.definition(iid)->power_out;
        if (!out || chance(rng, 0.2)) return SetSupplyOp{iid, std::nullopt};
        return SetSupplyOp{iid, uniform(rng, out->min_mv - 300, out->max_mv + 300)};
      }
      case 10: {
        if (v.all.empty()) break;
        const int rots[] = {0, 90, 180, 270};
        Placement p{static_cast<double>(uniform(rng, -5, static_cast<int>(d.board.w_mm))),
                    static_cast<double>(uniform(rng, -5, static_cast<int>(d.board.h_mm))), rots[uniform(rng, 0, 3)]};
        return PlaceOp{pick(v.all, rng), p};
      }
      case 11:
        if (!chance(rng, 0.2)) break;
        return SetBoardOp{BoardSpec{static_cast<double>(uniform(rng, 40, 150)), static_cast<double>(uniform(rng, 40, 150)), 0.5}};
    }
  }
}

Design synthetic_design(const Library& library, std::size_t instances, std::size_t edges, unsigned seed) {
  std::mt19937 rng(seed);
  Design d = new_design("synthetic");
  d.board = BoardSpec{400, 400, 0.5};
  const auto groups = library.list();
  auto ids_of = [&](BlockClass c) {
    std::vector<std::string> out;
    if (const auto it = groups.find(c); it != groups.end()) {
      for (const auto& def : it->second) out.push_back(def->block_id);
    }
    return out;
  };
  const auto power = ids_of(BlockClass::Power);
  const auto regs = ids_of(BlockClass::Regulator);
  const auto computes = ids_of(BlockClass::Compute);
  const auto periph = ids_of(BlockClass::Peripheral);

  std::vector<std::string> mats;
  std::vector<PortKey> ports;
  auto add = [&](const std::string& block, std::optional<std::string> parent) {
    const std::string iid = "n" + std::to_string(d.instances.size());
    d.instances[iid] = BlockInstance{iid, block, parent, std::nullopt};
    const auto def = library.get(block);
    if (def->classification == BlockClass::Power && def->power_out) d.instances[iid].supply_mv = def->power_out->max_mv;
    if (def->is_mat()) mats.push_back(iid);
    for (const auto& p : def->ports) ports.push_back({iid, p.ref()});
    const std::size_t k = d.instances.size() - 1;
    d.placements[iid] = Placement{static_cast<double>(k % 20) * 20.0, static_cast<double>(k / 20) * 20.0, 0};
  };

  const std::size_t roots = std::max<std::size_t>(1, instances / 20);
  for (std::size_t i = 0; i < roots && d.instances.size() < instances; ++i) add(pick(power, rng), std::nullopt);
  for (std::size_t i = 0; i < roots * 2 && d.instances.size() < instances; ++i) add(pick(regs, rng), pick(mats, rng));
  while (d.instances.size() < instances) {
    add(chance(rng, 0.25) ? pick(computes, rng) : pick(periph, rng), pick(mats, rng));
  }

  std::map<std::string, std::vector<PortKey>> by_protocol;
  for (const auto& p : ports) {
    by_protocol[library.get(d.instances.at(p.instance).block_id)->find_port(p.port)->protocol].push_back(p);
  }
  std::vector<std::string> protocols;
  for (const auto& [proto, list] : by_protocol) {
    if (list.size() > 1) protocols.push_back(proto);
  }
  for (std::size_t tries = 0; d.edges.size() < edges && tries < edges * 100; ++tries) {
    const auto& list = by_protocol.at(pick(protocols, rng));
    const auto& a = pick(list, rng);
    const auto& b = pick(list, rng);
    if (a.instance == b.instance) continue;
    d.edges.insert(Edge::between(a, b));
  }
  return d;
}

std::vector<Op> design_to_ops(const Design& design) {
  std::vector<Op> ops;
  std::set<std::string> added;
  while (added.size() < design.instances.size()) {
    const std::size_t before = added.size();
    for (const auto& [iid, inst] : design.instances) {
      if (added.count(iid) || (inst.mat_parent && !added.count(*inst.mat_parent))) continue;
      ops.push_back(AddInstanceOp{inst.block_id, inst.mat_parent, iid, inst.supply_mv});
      added.insert(iid);
    }
    if (added.size() == before) break;  // dangling parent: leave the rest out
  }
  ops.push_back(SetBoardOp{design.board});
  for (const auto& [iid, p] : design.placements) ops.push_back(PlaceOp{iid, p});
  for (const auto& e : design.edges) ops.push_back(ConnectOp{e.a, e.b});
  return ops;
}

bool forest_ok(const Design& design, const Library& library) {
  for (const auto& [iid, inst] : design.instances) {
    std::set<std::string> seen{iid};
    const BlockInstance* cur = &inst;
    while (cur->mat_parent) {
      const BlockInstance* parent = design.find(*cur->mat_parent);
      if (!parent || !seen.insert(parent->id).second) return false;
      if (!library.get(parent->block_id)->is_mat()) return false;
      cur = parent;
    }
    if (library.get(cur->block_id)->classification != BlockClass::Power) return false;
  }
  return true;
}

bool subject_resolves(const Diagnostic& d, const Design& design, const Library& library) {
  auto port_exists = [&](const std::string& iid, const std::string& port) {
    const auto* inst = design.find(iid);
    return inst && library.get(inst->block_id)->find_port(port);
  };
  auto parse_key = [](const std::string& s) {
    const auto colon = s.find(':');
    return PortKey{s.substr(0, colon), colon == std::string::npos ? "" : s.substr(colon + 1)};
  };
  const std::string& s = d.subject;
  auto segment = [&](std::size_t from) {
    const auto slash = s.find('/', from);
    return s.substr(from, slash == std::string::npos ? std::string::npos : slash - from);
  };
  if (s.rfind("inst/", 0) == 0) {
    const std::string iid = segment(5);
    if (!design.find(iid)) return false;
    const auto port_at = s.find("/port/");
    return port_at == std::string::npos || port_exists(iid, s.substr(port_at + 6));
  }
  if (s.rfind("place/", 0) == 0) {
    if (!design.find(segment(6))) return false;
    const auto other = s.find("/overlap/");
    return other == std::string::npos || design.find(s.substr(other + 9));
  }
  if (s.rfind("bus/", 0) == 0) {
    const auto key = parse_key(segment(4));
    return port_exists(key.instance, key.port);
  }
  if (s.rfind("edge/", 0) == 0) {
    const std::string body = s.substr(5);
    const auto sep = body.find("--");
    if (sep == std::string::npos) return false;
    return design.edges.count(Edge::between(parse_key(body.substr(0, sep)), parse_key(body.substr(sep + 2)))) > 0;
  }
  return false;
}

}  // namespace bw::testing
