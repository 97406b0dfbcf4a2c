#include "blockweave/registry.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "blockweave/error.hpp"
#include "text_util.hpp"

namespace bw {

using nlohmann::json;

std::string_view to_string(Validator v) {
  switch (v) {
    case Validator::I2cAddrUnique: return "i2c_addr_unique";
    case Validator::SpiMasterSlave: return "spi_master_slave";
    case Validator::LogicLevel: return "logic_level";
  }
  return "?";
}

std::optional<Validator> validator_from_string(std::string_view s) {
  for (auto v : {Validator::I2cAddrUnique, Validator::SpiMasterSlave, Validator::LogicLevel}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

bool ProtocolSpec::has_validator(Validator v) const {
  return std::find(validators.begin(), validators.end(), v) != validators.end();
}

bool ProtocolSpec::has_signal(std::string_view s) const {
  return std::find(signals.begin(), signals.end(), s) != signals.end();
}

ProtocolRegistry ProtocolRegistry::builtins() {
  ProtocolRegistry r;
  auto builtin = [&](std::string name, std::vector<std::string> signals, bool multi_drop,
                     std::vector<Validator> validators) {
    r.protocols_.emplace(name, ProtocolSpec{name, std::move(signals), multi_drop, std::move(validators), true});
  };
  builtin("I2C", {"SDA", "SCL"}, true, {Validator::I2cAddrUnique, Validator::LogicLevel});
  builtin("SPI", {"SCK", "MISO", "MOSI"}, true, {Validator::SpiMasterSlave, Validator::LogicLevel});
  // GPIO is a single wire; labels omit the signal ("#GPIO-LED").
  builtin("GPIO", {"IO"}, false, {Validator::LogicLevel});
  return r;
}

const ProtocolSpec* ProtocolRegistry::find(std::string_view name) const {
  const auto it = protocols_.find(name);
  return it == protocols_.end() ? nullptr : &it->second;
}

void ProtocolRegistry::add(ProtocolSpec spec) {
  spec.name = to_upper(spec.name);
  if (spec.name.empty() || !std::all_of(spec.name.begin(), spec.name.end(), [](unsigned char c) {
        return std::isalnum(c) != 0;
      }) || !std::isalpha(static_cast<unsigned char>(spec.name.front()))) {
    throw Error(ErrorCode::DefError, "protocol name '" + spec.name + "' is not an identifier");
  }
  if (const auto* existing = find(spec.name)) {
    throw Error(ErrorCode::DefError, existing->builtin
                                         ? "protocol '" + spec.name + "' collides with a built-in"
                                         : "protocol '" + spec.name + "' defined twice");
  }
  if (spec.signals.empty()) {
    throw Error(ErrorCode::DefError, "protocol '" + spec.name + "' has an empty signal list");
  }
  std::set<std::string> seen;
  for (auto& s : spec.signals) {
    s = to_upper(s);
    if (s.empty() || !seen.insert(s).second) {
      throw Error(ErrorCode::DefError, "protocol '" + spec.name + "' has empty or repeated signal names");
    }
  }
  spec.builtin = false;
  protocols_.emplace(spec.name, std::move(spec));
}

ProtocolRegistry parse_protocol_defs(std::string_view text) {
  ProtocolRegistry registry = ProtocolRegistry::builtins();
  if (trim(text).empty()) return registry;

  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::DefError, std::string("protocol definitions are not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("protocols") || !doc["protocols"].is_array()) {
    throw Error(ErrorCode::DefError, "protocol definitions need a top-level \"protocols\" array");
  }
  for (const auto& entry : doc["protocols"]) {
    // listings from render_protocol_registry carry the built-ins too
    if (entry.is_object() && entry.value("builtin", false)) continue;
    try {
      ProtocolSpec spec;
      spec.name = entry.at("name").get<std::string>();
      spec.signals = entry.at("signals").get<std::vector<std::string>>();
      spec.multi_drop = entry.value("multi_drop", false);
      for (const auto& v : entry.value("validators", std::vector<std::string>{})) {
        const auto validator = validator_from_string(v);
        if (!validator) throw Error(ErrorCode::DefError, "unknown validator '" + v + "'");
        spec.validators.push_back(*validator);
      }
      registry.add(std::move(spec));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::DefError, std::string("malformed protocol entry: ") + e.what());
    }
  }
  return registry;
}

ProtocolRegistry load_protocol_registry(const std::filesystem::path& defs_file) {
  std::ifstream in(defs_file, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read protocol definitions " + defs_file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_protocol_defs(buf.str());
}

std::string render_protocol_registry(const ProtocolRegistry& registry) {
  json arr = json::array();
  for (const auto& [name, spec] : registry.protocols()) {
    json validators = json::array();
    for (auto v : spec.validators) validators.push_back(std::string(to_string(v)));
    arr.push_back({{"name", name},
                   {"signals", spec.signals},
                   {"multi_drop", spec.multi_drop},
                   {"validators", validators},
                   {"builtin", spec.builtin}});
  }
  return json{{"protocols", arr}}.dump(2) + "\n";
}

}  // namespace bw
