#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace bw {

// Inclusive voltage window in integer millivolts. A fixed voltage has
// min_mv == max_mv.
struct VoltageRange {
  int min_mv = 0;
  int max_mv = 0;

  static VoltageRange fixed(int mv) { return {mv, mv}; }

  bool is_fixed() const { return min_mv == max_mv; }
  bool contains(int mv) const { return min_mv <= mv && mv <= max_mv; }
  bool contains(const VoltageRange& inner) const {
    return min_mv <= inner.min_mv && inner.max_mv <= max_mv;
  }
  bool overlaps(const VoltageRange& o) const {
    return min_mv <= o.max_mv && o.min_mv <= max_mv;
  }

  friend bool operator==(const VoltageRange&, const VoltageRange&) = default;
};

struct ProtocolDecl {
  std::string protocol;
  std::optional<std::string> signal;
  std::optional<std::string> alt_name;
  bool optional_flag = false;
  std::optional<VoltageRange> level;

  friend bool operator==(const ProtocolDecl&, const ProtocolDecl&) = default;
};

enum class PowerDirection { Vin, Vout };

struct PowerDecl {
  PowerDirection direction = PowerDirection::Vin;
  VoltageRange range;

  friend bool operator==(const PowerDecl&, const PowerDecl&) = default;
};

struct Ground {
  friend bool operator==(const Ground&, const Ground&) = default;
};

struct Plain {
  std::string name;

  friend bool operator==(const Plain&, const Plain&) = default;
};

using Annotation = std::variant<ProtocolDecl, PowerDecl, Ground, Plain>;

enum class BlockClass { Power, Regulator, Compute, Peripheral };
enum class SpiRole { Master, Slave };

std::string_view to_string(BlockClass c);
std::string_view to_string(SpiRole r);
std::string_view to_string(PowerDirection d);
std::optional<BlockClass> block_class_from_string(std::string_view s);

// Block-wide attributes from the "#{ KEY=VALUE, ... }" comment. Port-scoped
// maps use the port's alternate name as key; "" addresses the unnamed port.
struct GlobalAttrs {
  std::optional<BlockClass> block_class;
  std::map<std::string, int> i2c_addr;
  std::map<std::string, SpiRole> spi_role;
  std::vector<std::pair<std::string, std::string>> extras;

  friend bool operator==(const GlobalAttrs&, const GlobalAttrs&) = default;
};

// All parsers throw bw::SyntaxError on malformed input.
Annotation parse_annotation(std::string_view label);
VoltageRange parse_voltage(std::string_view text);
GlobalAttrs parse_global_attrs(std::string_view comment);

std::string render_annotation(const Annotation& a);
std::string render_voltage(const VoltageRange& r);
std::string render_millivolts(int mv);
std::string render_global_attrs(const GlobalAttrs& attrs);

}  // namespace bw
