#include "blockweave/checks.hpp"

#include <cstdio>
#include <map>

#include "blockweave/library.hpp"
#include "text_util.hpp"

namespace bw {

namespace {

std::string hex_addr(int addr) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "0x%02X", addr);
  return buf;
}

}  // namespace

std::optional<Diagnostic> voltage_check(const VoltageRange& child_vin, const VoltageRange& rail,
                                        const std::string& subject) {
  if (child_vin.contains(rail)) return std::nullopt;
  return Diagnostic{Severity::Error, DiagnosticKind::VoltageMismatch, subject,
                    "rail " + render_voltage(rail) + " does not fit the input range " + render_voltage(child_vin)};
}

std::optional<Diagnostic> protocol_match(const ProtocolPort& a, const ProtocolPort& b, const std::string& subject) {
  if (a.protocol == b.protocol) return std::nullopt;
  return Diagnostic{Severity::Error, DiagnosticKind::ProtocolMismatch, subject,
                    "cannot connect " + a.ref() + " to " + b.ref() + ": protocols " + a.protocol + " and " +
                        b.protocol + " differ"};
}

std::vector<Diagnostic> bus_check(const BusComponent& component, const ProtocolRegistry& registry) {
  std::vector<Diagnostic> out;
  const ProtocolSpec* spec = registry.find(component.protocol);
  if (!spec || component.members.empty()) return out;

  if (!spec->multi_drop) {
    for (const auto& m : component.members) {
      if (m.edge_count > 1) {
        out.push_back({Severity::Error, DiagnosticKind::GpioExclusivity, subject::port(m.key.instance, m.key.port),
                       spec->name + " port " + m.key.str() + " carries " + std::to_string(m.edge_count) +
                           " connections; " + spec->name + " connects point-to-point"});
      }
    }
  }

  if (spec->has_validator(Validator::I2cAddrUnique)) {
    std::map<int, std::vector<std::string>> by_addr;
    for (const auto& m : component.members) {
      if (m.port->attrs.i2c_addr) {
        by_addr[*m.port->attrs.i2c_addr].push_back(m.key.str());
      } else if (m.block_class == BlockClass::Peripheral) {
        out.push_back({Severity::Warning, DiagnosticKind::I2cAddressConflict,
                       subject::port(m.key.instance, m.key.port),
                       "peripheral port " + m.key.str() + " declares no I2C address; uniqueness not checked"});
      }
    }
    for (const auto& [addr, ports] : by_addr) {
      if (ports.size() > 1) {
        out.push_back({Severity::Error, DiagnosticKind::I2cAddressConflict,
                       component.subject() + "/i2c/" + hex_addr(addr),
                       "I2C address " + hex_addr(addr) + " is used by " + join(ports, ", ")});
      }
    }
  }

  if (spec->has_validator(Validator::SpiMasterSlave)) {
    int masters = 0;
    int slaves = 0;
    for (const auto& m : component.members) {
      if (!m.port->attrs.spi_role) {
        out.push_back({Severity::Warning, DiagnosticKind::SpiRoleConflict, subject::port(m.key.instance, m.key.port),
                       "SPI port " + m.key.str() + " declares no role"});
      } else if (*m.port->attrs.spi_role == SpiRole::Master) {
        ++masters;
      } else {
        ++slaves;
      }
    }
    if (masters != 1 || slaves < 1) {
      out.push_back({Severity::Error, DiagnosticKind::SpiRoleConflict, component.subject(),
                     "SPI bus needs exactly one MASTER and at least one SLAVE (found " + std::to_string(masters) +
                         " master(s), " + std::to_string(slaves) + " slave(s))"});
    }
  }

  if (spec->has_validator(Validator::LogicLevel)) {
    std::map<PortKey, const ProtocolPort*> ports;
    for (const auto& m : component.members) ports.emplace(m.key, m.port);
    for (const auto& e : component.edges) {
      const auto* a = ports.at(e.a);
      const auto* b = ports.at(e.b);
      if (a->level && b->level && !a->level->overlaps(*b->level)) {
        out.push_back({Severity::Warning, DiagnosticKind::LogicLevelMismatch, e.subject(),
                       "logic levels " + render_voltage(*a->level) + " and " + render_voltage(*b->level) +
                           " do not overlap"});
      }
    }
  }
  return out;
}

std::vector<Diagnostic> required_check(const Design& design, const Library& library) {
  std::map<PortKey, std::size_t> degree;
  for (const auto& e : design.edges) {
    ++degree[e.a];
    ++degree[e.b];
  }
  std::vector<Diagnostic> out;
  for (const auto& [iid, inst] : design.instances) {
    const auto def = library.get(inst.block_id);
    if (def->is_mat()) continue;
    for (const auto& port : def->ports) {
      if (port.optional_flag) continue;
      if (degree.count(PortKey{iid, port.ref()})) continue;
      out.push_back({Severity::Error, DiagnosticKind::MissingRequiredInterface, subject::port(iid, port.ref()),
                     "required port " + port.ref() + " of " + iid + " is not connected"});
    }
  }
  return out;
}

}  // namespace bw
