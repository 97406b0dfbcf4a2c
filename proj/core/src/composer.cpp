#include "blockweave/composer.hpp"

#include <json.hpp>

#include "blockweave/engine.hpp"
#include "blockweave/library.hpp"
#include "fs_util.hpp"

namespace bw {

using nlohmann::json;

std::string_view to_string(NetOrigin o) {
  switch (o) {
    case NetOrigin::BlockLocal: return "block-local";
    case NetOrigin::Rail: return "rail";
    case NetOrigin::Ground: return "ground";
    case NetOrigin::Bus: return "bus";
  }
  return "?";
}

namespace {

NetOrigin origin_from_string(std::string_view s) {
  for (auto o : {NetOrigin::BlockLocal, NetOrigin::Rail, NetOrigin::Ground, NetOrigin::Bus}) {
    if (to_string(o) == s) return o;
  }
  throw Error(ErrorCode::FormatError, "unknown net origin '" + std::string(s) + "'");
}

}  // namespace

std::map<std::string, int, std::less<>> instance_ordinals(const Design& design) {
  std::map<std::string, int, std::less<>> out;
  int k = 0;
  for (const auto& [iid, _] : design.instances) out.emplace(iid, ++k);
  return out;
}

std::string prefix_for(int ordinal) { return "B" + std::to_string(ordinal) + "_"; }

MergedNetlist compose_schematic(const Design& design, const Library& library) {
  auto diags = check_design(design, library, CheckStage::Compose);
  if (has_errors(diags)) {
    std::erase_if(diags, [](const Diagnostic& d) { return d.severity != Severity::Error; });
    throw BlockedError(ErrorCode::ComposeError,
                       "compose blocked by " + std::to_string(diags.size()) + " error diagnostic(s)", diags);
  }
  for (const auto& [iid, inst] : design.instances) {
    const auto def = library.get(inst.block_id);
    if (def->classification == BlockClass::Power && !effective_vout(design, library, iid).is_fixed()) {
      throw BlockedError(ErrorCode::UnsetSupply,
                         "POWER instance '" + iid + "' has output range " + render_voltage(*def->power_out) +
                             " and no supply setting",
                         {});
    }
  }

  const auto ordinals = instance_ordinals(design);

  // port -> bus ordinal, buses numbered by anchor
  std::map<PortKey, int> bus_of;
  int n = 0;
  for (const auto& comp : bus_components(design, library)) {
    ++n;
    for (const auto& m : comp.members) bus_of[m.key] = n;
  }

  MergedNetlist out;
  auto add_pins = [&out](const std::string& name, NetOrigin origin, const std::string& prefix,
                         const std::vector<PinRef>& pins) {
    if (pins.empty()) return;
    auto& net = out.nets[name];
    for (const auto& p : pins) net.insert(PinRef{prefix + p.refdes, p.pin});
    out.provenance[name] = origin;
  };

  for (const auto& [iid, inst] : design.instances) {
    const auto def = library.get(inst.block_id);
    const int k = ordinals.at(iid);
    const std::string prefix = prefix_for(k);
    for (const auto& net : def->nets) {
      for (const auto& p : net.pins) out.components[prefix + p.refdes] = ComponentRef{def->block_id, p.refdes};
    }
    for (const auto& net : def->nets) {
      std::string name = prefix + net.net_id;
      NetOrigin origin = NetOrigin::BlockLocal;
      if (std::holds_alternative<Ground>(net.annotation)) {
        name = "GND";
        origin = NetOrigin::Ground;
      } else if (const auto* pw = std::get_if<PowerDecl>(&net.annotation)) {
        if (pw->direction == PowerDirection::Vout) {
          name = "VRAIL_" + std::to_string(k);
          origin = NetOrigin::Rail;
        } else if (inst.mat_parent) {
          name = "VRAIL_" + std::to_string(ordinals.at(*inst.mat_parent));
          origin = NetOrigin::Rail;
        }
      } else if (std::holds_alternative<ProtocolDecl>(net.annotation)) {
        for (const auto& port : def->ports) {
          for (const auto& [signal, net_id] : port.signals) {
            if (net_id != net.net_id) continue;
            const auto it = bus_of.find(PortKey{iid, port.ref()});
            if (it == bus_of.end()) continue;
            name = port.protocol + "_" + std::to_string(it->second) + "_" + signal;
            origin = NetOrigin::Bus;
          }
        }
      }
      add_pins(name, origin, prefix, net.pins);
    }
  }
  return out;
}

std::string export_netlist(const MergedNetlist& netlist) {
  json components = json::object();
  for (const auto& [ref, c] : netlist.components) components[ref] = {{"block", c.block}, {"part", c.part}};
  json nets = json::object();
  for (const auto& [name, pins] : netlist.nets) {
    json arr = json::array();
    for (const auto& p : pins) arr.push_back(json::array({p.refdes, p.pin}));
    nets[name] = std::move(arr);
  }
  json provenance = json::object();
  for (const auto& [name, o] : netlist.provenance) provenance[name] = to_string(o);
  json doc = {{"components", components}, {"nets", nets}, {"provenance", provenance}};
  return doc.dump(2) + "\n";
}

void write_netlist(const MergedNetlist& netlist, const std::filesystem::path& path) {
  write_file_atomic(path, export_netlist(netlist));
}

MergedNetlist parse_netlist(std::string_view text) {
  MergedNetlist out;
  try {
    const json doc = json::parse(text);
    for (const auto& [ref, c] : doc.at("components").items()) {
      out.components[ref] = ComponentRef{c.at("block").get<std::string>(), c.at("part").get<std::string>()};
    }
    for (const auto& [name, pins] : doc.at("nets").items()) {
      auto& net = out.nets[name];
      for (const auto& p : pins) {
        if (!p.is_array() || p.size() != 2) throw Error(ErrorCode::FormatError, "pin must be [refdes, pin]");
        net.insert(PinRef{p[0].get<std::string>(), p[1].get<std::string>()});
      }
    }
    if (doc.contains("provenance")) {
      for (const auto& [name, o] : doc.at("provenance").items()) {
        out.provenance[name] = origin_from_string(o.get<std::string>());
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("malformed netlist: ") + e.what());
  }
  return out;
}

}  // namespace bw
