#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bw {

// The fixed set of bus-level rule shapes a protocol can opt into.
enum class Validator {
  I2cAddrUnique,   // "i2c_addr_unique"
  SpiMasterSlave,  // "spi_master_slave"
  LogicLevel,      // "logic_level"
};

std::string_view to_string(Validator v);
std::optional<Validator> validator_from_string(std::string_view s);

struct ProtocolSpec {
  std::string name;
  std::vector<std::string> signals;
  // When false, every port of this protocol carries at most one edge.
  bool multi_drop = false;
  std::vector<Validator> validators;
  bool builtin = false;

  bool has_validator(Validator v) const;
  bool has_signal(std::string_view s) const;
};

// Protocol table. Built-ins (I2C, SPI, GPIO) are always present; user
// definitions extend it declaratively. Immutable once handed to a Library.
class ProtocolRegistry {
 public:
  static ProtocolRegistry builtins();

  const ProtocolSpec* find(std::string_view name) const;
  // Throws bw::Error(DefError) on a name collision or an invalid spec.
  void add(ProtocolSpec spec);

  const std::map<std::string, ProtocolSpec, std::less<>>& protocols() const { return protocols_; }

 private:
  std::map<std::string, ProtocolSpec, std::less<>> protocols_;
};

// Protocol definitions document:
//   {"protocols": [{"name": "UART", "signals": ["TX", "RX"],
//                   "multi_drop": false, "validators": ["logic_level"]}]}
// Empty or whitespace-only text yields the built-ins.
ProtocolRegistry parse_protocol_defs(std::string_view text);
ProtocolRegistry load_protocol_registry(const std::filesystem::path& defs_file);
std::string render_protocol_registry(const ProtocolRegistry& registry);

}  // namespace bw
