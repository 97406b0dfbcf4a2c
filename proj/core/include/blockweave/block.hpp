#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "blockweave/annotation.hpp"
#include "blockweave/diagnostic.hpp"
#include "blockweave/registry.hpp"

namespace bw {

struct PinRef {
  std::string refdes;
  std::string pin;

  friend auto operator<=>(const PinRef&, const PinRef&) = default;
  friend bool operator==(const PinRef&, const PinRef&) = default;
};

struct Pad {
  std::string net_id;
  double x_mm = 0;
  double y_mm = 0;

  friend bool operator==(const Pad&, const Pad&) = default;
};

// Pad coordinates are relative to the footprint's lower-left corner.
struct Footprint {
  double width_mm = 0;
  double height_mm = 0;
  std::vector<Pad> pads;

  friend bool operator==(const Footprint&, const Footprint&) = default;
};

// Raw contents of a block.json file. Labels are kept as written; parsing
// happens during validation.
struct BlockBundle {
  struct Net {
    std::string id;
    std::string label;
    std::vector<PinRef> pins;

    friend bool operator==(const Net&, const Net&) = default;
  };

  std::string id;
  std::string name;
  std::vector<Net> nets;
  std::string attrs;
  Footprint footprint;
  std::optional<std::string> image;

  friend bool operator==(const BlockBundle&, const BlockBundle&) = default;
};

// A bundle as found on disk, with its optional preview image bytes.
struct BundleFiles {
  BlockBundle bundle;
  std::optional<std::string> image_bytes;
};

// Throws bw::Error(BundleError) on malformed documents.
BlockBundle parse_bundle_json(std::string_view text);
// Canonical form: sorted keys, two-space indent, trailing LF.
std::string render_bundle_json(const BlockBundle& bundle);
// `path` is either a bundle directory holding block.json or the file itself.
BundleFiles read_bundle(const std::filesystem::path& path);

struct NetDecl {
  std::string net_id;
  Annotation annotation;
  std::vector<PinRef> pins;
};

struct PortAttrs {
  std::optional<int> i2c_addr;
  std::optional<SpiRole> spi_role;

  friend bool operator==(const PortAttrs&, const PortAttrs&) = default;
};

// Nets sharing (protocol, alt_name), presented as one connectable port.
struct ProtocolPort {
  std::string protocol;
  std::optional<std::string> alt_name;
  std::map<std::string, std::string> signals;  // signal name -> net id
  bool optional_flag = false;
  std::optional<VoltageRange> level;
  PortAttrs attrs;

  // "I2C", "GPIO-LED": the name edges and design files use.
  std::string ref() const;

  friend bool operator==(const ProtocolPort&, const ProtocolPort&) = default;
};

struct BlockDefinition {
  std::string block_id;
  std::string display_name;
  std::vector<NetDecl> nets;
  std::optional<VoltageRange> power_in;
  std::optional<VoltageRange> power_out;
  std::optional<std::string> vin_net;
  std::optional<std::string> vout_net;
  bool has_ground = false;
  std::vector<ProtocolPort> ports;
  BlockClass classification = BlockClass::Peripheral;
  GlobalAttrs attrs;
  Footprint footprint;
  std::optional<std::string> image_ref;
  BlockBundle bundle;

  const NetDecl* find_net(std::string_view net_id) const;
  const ProtocolPort* find_port(std::string_view ref) const;
  bool is_mat() const {
    return classification == BlockClass::Power || classification == BlockClass::Regulator;
  }
};

struct ImportReport {
  bool accepted = false;
  std::vector<Diagnostic> diagnostics;
};

struct NetAnnotation {
  std::string net_id;
  Annotation annotation;
};

// Throws bw::Error(ClassificationError) when a CLASS attribute contradicts
// the block's power declarations.
BlockClass classify(const std::vector<NetAnnotation>& nets, const GlobalAttrs& attrs);

// Groups protocol nets into ports. Throws bw::Error(PortError) on the first
// inconsistency; collect_ports() reports all of them instead.
std::vector<ProtocolPort> derive_ports(const std::vector<NetAnnotation>& nets, const GlobalAttrs& attrs,
                                       const ProtocolRegistry& registry);

struct PortDerivation {
  std::vector<ProtocolPort> ports;
  std::vector<std::pair<std::string, std::string>> errors;  // (net id or "", message)
};
PortDerivation collect_ports(const std::vector<NetAnnotation>& nets, const GlobalAttrs& attrs,
                             const ProtocolRegistry& registry);

struct ValidationResult {
  std::shared_ptr<const BlockDefinition> definition;  // null when rejected
  ImportReport report;
};

// Syntax validation, port derivation, classification, footprint cross-check
// and the import-time ERC. Pure: nothing is stored.
ValidationResult validate_bundle(const BlockBundle& bundle, const ProtocolRegistry& registry);

// Re-checks every BlockDefinition invariant; returns violated ones.
std::vector<std::string> audit_definition(const BlockDefinition& def, const ProtocolRegistry& registry);

std::string render_definition_json(const BlockDefinition& def);

}  // namespace bw
