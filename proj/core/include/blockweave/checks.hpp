#pragma once

#include <optional>
#include <string>
#include <vector>

#include "blockweave/annotation.hpp"
#include "blockweave/block.hpp"
#include "blockweave/design.hpp"
#include "blockweave/diagnostic.hpp"
#include "blockweave/registry.hpp"

namespace bw {

class Library;

// The interface-checking families. Every function here is a pure,
// deterministic function of its arguments.

// VoltageMismatch unless the rail range lies inside the child's VIN range.
std::optional<Diagnostic> voltage_check(const VoltageRange& child_vin, const VoltageRange& rail,
                                        const std::string& subject);

// ProtocolMismatch unless both ports carry the same protocol. Alternate
// names never matter.
std::optional<Diagnostic> protocol_match(const ProtocolPort& a, const ProtocolPort& b, const std::string& subject);

struct BusMember {
  PortKey key;
  const ProtocolPort* port = nullptr;
  BlockClass block_class = BlockClass::Peripheral;
  std::size_t edge_count = 0;
};

// Edge-connected set of same-protocol ports.
struct BusComponent {
  std::string protocol;
  std::vector<BusMember> members;  // sorted by key
  std::vector<Edge> edges;         // sorted

  const PortKey& anchor() const { return members.front().key; }
  std::string subject() const { return "bus/" + anchor().str(); }
};

std::vector<Diagnostic> bus_check(const BusComponent& component, const ProtocolRegistry& registry);

// MissingRequiredInterface for every non-optional port on a general block
// that has no edge.
std::vector<Diagnostic> required_check(const Design& design, const Library& library);

}  // namespace bw
