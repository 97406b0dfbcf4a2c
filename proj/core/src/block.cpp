#include "blockweave/block.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "blockweave/error.hpp"
#include "fs_util.hpp"
#include "text_util.hpp"

namespace bw {

using nlohmann::json;

namespace {

constexpr double kEps = 1e-9;

bool valid_id(std::string_view id) {
  return !id.empty() && std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) != 0 || c == '_' || c == '-' || c == '.';
  });
}

std::string pad_subject(std::string_view block_id, std::size_t index) {
  return subject::block(block_id) + "/pad/" + std::to_string(index);
}

struct PortKeyLess {
  bool operator()(const std::pair<std::string, std::string>& a,
                  const std::pair<std::string, std::string>& b) const {
    return a < b;
  }
};

}  // namespace

std::string ProtocolPort::ref() const { return alt_name ? protocol + "-" + *alt_name : protocol; }

const NetDecl* BlockDefinition::find_net(std::string_view net_id) const {
  for (const auto& n : nets) {
    if (n.net_id == net_id) return &n;
  }
  return nullptr;
}

const ProtocolPort* BlockDefinition::find_port(std::string_view ref) const {
  for (const auto& p : ports) {
    if (p.ref() == ref) return &p;
  }
  return nullptr;
}

BlockBundle parse_bundle_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BundleError, std::string("block.json is not valid JSON: ") + e.what());
  }
  BlockBundle b;
  try {
    b.id = doc.at("id").get<std::string>();
    if (!valid_id(b.id)) throw Error(ErrorCode::BundleError, "block id '" + b.id + "' must match [A-Za-z0-9_.-]+");
    b.name = doc.value("name", b.id);
    std::set<std::string> net_ids;
    for (const auto& n : doc.at("nets")) {
      BlockBundle::Net net;
      net.id = n.at("id").get<std::string>();
      if (net.id.empty()) throw Error(ErrorCode::BundleError, "net with empty id");
      if (!net_ids.insert(net.id).second) throw Error(ErrorCode::BundleError, "duplicate net id '" + net.id + "'");
      net.label = n.at("label").get<std::string>();
      for (const auto& pin : n.value("pins", json::array())) {
        if (!pin.is_array() || pin.size() != 2) {
          throw Error(ErrorCode::BundleError, "pins of net '" + net.id + "' must be [refdes, pin] pairs");
        }
        net.pins.push_back({pin[0].get<std::string>(), pin[1].get<std::string>()});
      }
      b.nets.push_back(std::move(net));
    }
    b.attrs = doc.value("attrs", std::string{});
    const auto& fp = doc.at("footprint");
    b.footprint.width_mm = fp.at("w_mm").get<double>();
    b.footprint.height_mm = fp.at("h_mm").get<double>();
    if (!(b.footprint.width_mm > 0) || !(b.footprint.height_mm > 0)) {
      throw Error(ErrorCode::BundleError, "footprint dimensions must be positive");
    }
    for (const auto& pad : fp.value("pads", json::array())) {
      b.footprint.pads.push_back(
          {pad.at("net").get<std::string>(), pad.at("x_mm").get<double>(), pad.at("y_mm").get<double>()});
    }
    if (doc.contains("image") && !doc["image"].is_null()) b.image = doc["image"].get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BundleError, std::string("malformed block.json: ") + e.what());
  }
  return b;
}

std::string render_bundle_json(const BlockBundle& b) {
  json nets = json::array();
  for (const auto& n : b.nets) {
    json pins = json::array();
    for (const auto& p : n.pins) pins.push_back({p.refdes, p.pin});
    nets.push_back({{"id", n.id}, {"label", n.label}, {"pins", pins}});
  }
  json pads = json::array();
  for (const auto& p : b.footprint.pads) pads.push_back({{"net", p.net_id}, {"x_mm", p.x_mm}, {"y_mm", p.y_mm}});
  json doc = {{"id", b.id},
              {"name", b.name},
              {"nets", nets},
              {"attrs", b.attrs},
              {"footprint", {{"w_mm", b.footprint.width_mm}, {"h_mm", b.footprint.height_mm}, {"pads", pads}}}};
  if (b.image) doc["image"] = *b.image;
  return doc.dump(2) + "\n";
}

BundleFiles read_bundle(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  const fs::path file = fs::is_directory(path) ? path / "block.json" : path;
  if (!fs::exists(file)) throw Error(ErrorCode::Io, "no block.json at " + path.string());
  BundleFiles out{parse_bundle_json(read_text_file(file)), std::nullopt};
  if (out.bundle.image) {
    const fs::path image = file.parent_path() / *out.bundle.image;
    if (!fs::exists(image)) throw Error(ErrorCode::BundleError, "image '" + *out.bundle.image + "' not found");
    out.image_bytes = read_text_file(image);
  }
  return out;
}

BlockClass classify(const std::vector<NetAnnotation>& nets, const GlobalAttrs& attrs) {
  bool vin = false;
  bool vout = false;
  for (const auto& n : nets) {
    if (const auto* p = std::get_if<PowerDecl>(&n.annotation)) {
      (p->direction == PowerDirection::Vin ? vin : vout) = true;
    }
  }
  auto contradiction = [&](BlockClass derived) {
    return Error(ErrorCode::ClassificationError,
                 "CLASS=" + std::string(to_string(*attrs.block_class)) + " contradicts power declarations (" +
                     std::string(to_string(derived)) + ")");
  };
  if (vout) {
    const BlockClass derived = vin ? BlockClass::Regulator : BlockClass::Power;
    if (attrs.block_class && *attrs.block_class != derived) throw contradiction(derived);
    return derived;
  }
  if (attrs.block_class) {
    if (*attrs.block_class == BlockClass::Power || *attrs.block_class == BlockClass::Regulator) {
      throw Error(ErrorCode::ClassificationError,
                  "CLASS=" + std::string(to_string(*attrs.block_class)) + " requires a @VOUT net");
    }
    return *attrs.block_class;
  }
  return BlockClass::Peripheral;
}

PortDerivation collect_ports(const std::vector<NetAnnotation>& nets, const GlobalAttrs& attrs,
                             const ProtocolRegistry& registry) {
  PortDerivation out;
  struct Group {
    ProtocolPort port;
    std::set<bool> optional_flags;
    std::set<std::pair<int, int>> levels;
    bool no_level = false;
    std::string first_net;
  };
  std::map<std::pair<std::string, std::string>, Group, PortKeyLess> groups;

  for (const auto& n : nets) {
    const auto* decl = std::get_if<ProtocolDecl>(&n.annotation);
    if (!decl) continue;
    const ProtocolSpec* spec = registry.find(decl->protocol);
    if (!spec) {
      out.errors.emplace_back(n.net_id, "unknown protocol '" + decl->protocol + "'");
      continue;
    }
    std::string signal;
    if (decl->signal) {
      if (!spec->has_signal(*decl->signal)) {
        out.errors.emplace_back(n.net_id, "protocol " + spec->name + " has no signal '" + *decl->signal + "'");
        continue;
      }
      signal = *decl->signal;
    } else if (spec->signals.size() == 1) {
      signal = spec->signals.front();
    } else {
      out.errors.emplace_back(n.net_id, "protocol " + spec->name + " needs a signal name (e.g. ." +
                                            spec->signals.front() + ")");
      continue;
    }

    auto& g = groups[{decl->protocol, decl->alt_name.value_or("")}];
    if (g.first_net.empty()) {
      g.first_net = n.net_id;
      g.port.protocol = decl->protocol;
      g.port.alt_name = decl->alt_name;
    }
    if (!g.port.signals.emplace(signal, n.net_id).second) {
      out.errors.emplace_back(n.net_id, "duplicate signal " + signal + " in port " + g.port.ref());
      continue;
    }
    g.optional_flags.insert(decl->optional_flag);
    if (decl->level) {
      g.levels.insert({decl->level->min_mv, decl->level->max_mv});
    } else {
      g.no_level = true;
    }
  }

  for (auto& [key, g] : groups) {
    const ProtocolSpec* spec = registry.find(g.port.protocol);
    std::vector<std::string> missing;
    for (const auto& s : spec->signals) {
      if (!g.port.signals.count(s)) missing.push_back(s);
    }
    bool ok = true;
    if (!missing.empty()) {
      out.errors.emplace_back(g.first_net, "port " + g.port.ref() + " is missing signal(s) " + join(missing, ", "));
      ok = false;
    }
    if (g.optional_flags.size() > 1) {
      out.errors.emplace_back(g.first_net, "port " + g.port.ref() + " mixes optional and required signals");
      ok = false;
    }
    if (g.levels.size() > 1 || (!g.levels.empty() && g.no_level)) {
      out.errors.emplace_back(g.first_net, "port " + g.port.ref() + " declares inconsistent logic levels");
      ok = false;
    }
    if (!ok) continue;
    g.port.optional_flag = *g.optional_flags.begin();
    if (!g.levels.empty()) g.port.level = VoltageRange{g.levels.begin()->first, g.levels.begin()->second};
    const std::string alt = g.port.alt_name.value_or("");
    if (g.port.protocol == "I2C") {
      if (auto it = attrs.i2c_addr.find(alt); it != attrs.i2c_addr.end()) g.port.attrs.i2c_addr = it->second;
    } else if (g.port.protocol == "SPI") {
      if (auto it = attrs.spi_role.find(alt); it != attrs.spi_role.end()) g.port.attrs.spi_role = it->second;
    }
    out.ports.push_back(std::move(g.port));
  }
  std::sort(out.ports.begin(), out.ports.end(),
            [](const ProtocolPort& a, const ProtocolPort& b) { return a.ref() < b.ref(); });
  return out;
}

std::vector<ProtocolPort> derive_ports(const std::vector<NetAnnotation>& nets, const GlobalAttrs& attrs,
                                       const ProtocolRegistry& registry) {
  auto result = collect_ports(nets, attrs, registry);
  if (!result.errors.empty()) {
    const auto& [net, msg] = result.errors.front();
    throw Error(ErrorCode::PortError, net.empty() ? msg : "net " + net + ": " + msg);
  }
  return std::move(result.ports);
}

ValidationResult validate_bundle(const BlockBundle& bundle, const ProtocolRegistry& registry) {
  ValidationResult result;
  auto& diags = result.report.diagnostics;
  const std::string& id = bundle.id;
  auto error = [&](DiagnosticKind kind, std::string subj, std::string msg) {
    diags.push_back({Severity::Error, kind, std::move(subj), std::move(msg)});
  };
  auto warning = [&](DiagnosticKind kind, std::string subj, std::string msg) {
    diags.push_back({Severity::Warning, kind, std::move(subj), std::move(msg)});
  };

  auto def = std::make_shared<BlockDefinition>();
  def->block_id = id;
  def->display_name = bundle.name;
  def->footprint = bundle.footprint;
  def->image_ref = bundle.image;
  def->bundle = bundle;

  std::vector<NetAnnotation> annotated;
  for (const auto& net : bundle.nets) {
    NetDecl decl{net.id, Plain{net.label}, net.pins};
    try {
      decl.annotation = parse_annotation(net.label);
    } catch (const SyntaxError& e) {
      error(DiagnosticKind::SyntaxError, subject::block_net(id, net.id), e.what());
    }
    annotated.push_back({decl.net_id, decl.annotation});
    def->nets.push_back(std::move(decl));
  }

  if (!trim(bundle.attrs).empty()) {
    try {
      def->attrs = parse_global_attrs(trim(bundle.attrs));
    } catch (const SyntaxError& e) {
      error(DiagnosticKind::SyntaxError, subject::block(id) + "/attrs", e.what());
    }
  }

  int vin_count = 0;
  int vout_count = 0;
  for (const auto& n : def->nets) {
    if (const auto* p = std::get_if<PowerDecl>(&n.annotation)) {
      if (p->direction == PowerDirection::Vin) {
        ++vin_count;
        def->power_in = p->range;
        def->vin_net = n.net_id;
      } else {
        ++vout_count;
        def->power_out = p->range;
        def->vout_net = n.net_id;
      }
    } else if (std::holds_alternative<Ground>(n.annotation)) {
      def->has_ground = true;
    }
  }
  if (vin_count > 1 || vout_count > 1) {
    error(DiagnosticKind::ClassificationError, subject::block(id),
          "multi-rail blocks are not supported (at most one @VIN and one @VOUT net)");
  }

  auto ports = collect_ports(annotated, def->attrs, registry);
  for (const auto& [net, msg] : ports.errors) {
    error(DiagnosticKind::PortError, net.empty() ? subject::block(id) : subject::block_net(id, net), msg);
  }
  def->ports = std::move(ports.ports);

  try {
    def->classification = classify(annotated, def->attrs);
  } catch (const Error& e) {
    error(DiagnosticKind::ClassificationError, subject::block(id), e.what());
  }

  for (std::size_t i = 0; i < bundle.footprint.pads.size(); ++i) {
    const auto& pad = bundle.footprint.pads[i];
    if (!def->find_net(pad.net_id)) {
      error(DiagnosticKind::PadNetMismatch, pad_subject(id, i), "pad references unknown net '" + pad.net_id + "'");
    }
    if (pad.x_mm < -kEps || pad.y_mm < -kEps || pad.x_mm > bundle.footprint.width_mm + kEps ||
        pad.y_mm > bundle.footprint.height_mm + kEps) {
      error(DiagnosticKind::BoundaryViolation, pad_subject(id, i),
            "pad (" + format_mm(pad.x_mm) + ", " + format_mm(pad.y_mm) + ") lies outside the " +
                format_mm(bundle.footprint.width_mm) + "x" + format_mm(bundle.footprint.height_mm) + " mm footprint");
    }
  }

  // Import-time ERC: presence and connectivity only.
  std::map<PinRef, std::string> pin_owner;
  for (const auto& n : def->nets) {
    if (!std::holds_alternative<Plain>(n.annotation) && n.pins.empty()) {
      error(DiagnosticKind::ErcViolation, subject::block_net(id, n.net_id), "typed net has no pins");
    }
    for (const auto& pin : n.pins) {
      auto [it, inserted] = pin_owner.emplace(pin, n.net_id);
      if (!inserted) {
        error(DiagnosticKind::ErcViolation, subject::block_net(id, n.net_id),
              "pin " + pin.refdes + "." + pin.pin + " already belongs to net " + it->second);
      }
    }
  }
  const bool classified = !std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) {
    return d.kind == DiagnosticKind::ClassificationError;
  });
  if (classified && def->classification != BlockClass::Power && !def->has_ground) {
    error(DiagnosticKind::ErcViolation, subject::block(id), "non-power block has no GND net");
  }
  if (classified && def->is_mat()) {
    for (const auto& p : def->ports) {
      warning(DiagnosticKind::ErcViolation, subject::block(id),
              "port " + p.ref() + " on a " + std::string(to_string(def->classification)) +
                  " block cannot be wired and is ignored");
    }
  }
  auto has_port = [&](std::string_view protocol, const std::string& alt) {
    return std::any_of(def->ports.begin(), def->ports.end(), [&](const ProtocolPort& p) {
      return p.protocol == protocol && p.alt_name.value_or("") == alt;
    });
  };
  for (const auto& [alt, addr] : def->attrs.i2c_addr) {
    if (!has_port("I2C", alt)) {
      warning(DiagnosticKind::ErcViolation, subject::block(id) + "/attrs",
              "I2C address given for missing port I2C" + (alt.empty() ? "" : "-" + alt));
    }
  }
  for (const auto& [alt, role] : def->attrs.spi_role) {
    if (!has_port("SPI", alt)) {
      warning(DiagnosticKind::ErcViolation, subject::block(id) + "/attrs",
              "SPI role given for missing port SPI" + (alt.empty() ? "" : "-" + alt));
    }
  }

  if (!has_errors(diags)) {
    for (const auto& violation : audit_definition(*def, registry)) {
      error(DiagnosticKind::ErcViolation, subject::block(id), "audit: " + violation);
    }
  }

  sort_diagnostics(diags);
  result.report.accepted = !has_errors(diags);
  if (result.report.accepted) result.definition = std::move(def);
  return result;
}

std::vector<std::string> audit_definition(const BlockDefinition& def, const ProtocolRegistry& registry) {
  std::vector<std::string> v;
  std::set<std::string> ids;
  std::vector<NetAnnotation> annotated;
  int vin = 0;
  int vout = 0;
  bool ground = false;
  for (const auto& n : def.nets) {
    if (!ids.insert(n.net_id).second) v.push_back("duplicate net id " + n.net_id);
    if (!std::holds_alternative<Plain>(n.annotation) && n.pins.empty()) v.push_back("typed net without pins " + n.net_id);
    if (const auto* p = std::get_if<PowerDecl>(&n.annotation)) {
      (p->direction == PowerDirection::Vin ? vin : vout) += 1;
      if (!(0 < p->range.min_mv && p->range.min_mv <= p->range.max_mv)) v.push_back("bad voltage range on " + n.net_id);
    }
    if (std::holds_alternative<Ground>(n.annotation)) ground = true;
    annotated.push_back({n.net_id, n.annotation});
  }
  if (vin > 1 || vout > 1) v.push_back("more than one VIN or VOUT net");
  if (ground != def.has_ground) v.push_back("has_ground flag disagrees with nets");
  if (def.classification != BlockClass::Power && !def.has_ground) v.push_back("non-power block without ground");
  try {
    if (classify(annotated, def.attrs) != def.classification) v.push_back("classification is stale");
  } catch (const Error& e) {
    v.push_back(e.what());
  }
  for (const auto& pad : def.footprint.pads) {
    if (!ids.count(pad.net_id)) v.push_back("pad on unknown net " + pad.net_id);
    if (pad.x_mm < -kEps || pad.y_mm < -kEps || pad.x_mm > def.footprint.width_mm + kEps ||
        pad.y_mm > def.footprint.height_mm + kEps) {
      v.push_back("pad outside footprint");
    }
  }
  for (const auto& port : def.ports) {
    const auto* spec = registry.find(port.protocol);
    if (!spec) {
      v.push_back("port with unknown protocol " + port.protocol);
      continue;
    }
    if (port.signals.size() != spec->signals.size()) v.push_back("port " + port.ref() + " has wrong signal set");
    for (const auto& [signal, net_id] : port.signals) {
      const auto* net = def.find_net(net_id);
      const auto* decl = net ? std::get_if<ProtocolDecl>(&net->annotation) : nullptr;
      if (!decl || decl->protocol != port.protocol || decl->alt_name != port.alt_name ||
          decl->optional_flag != port.optional_flag) {
        v.push_back("port " + port.ref() + " signal " + signal + " does not match its net");
      }
    }
    if (port.attrs.i2c_addr && (*port.attrs.i2c_addr < 0 || *port.attrs.i2c_addr > 0x7F)) {
      v.push_back("I2C address out of range on " + port.ref());
    }
  }
  return v;
}

std::string render_definition_json(const BlockDefinition& def) {
  json ports = json::array();
  for (const auto& p : def.ports) {
    json port = {{"ref", p.ref()}, {"protocol", p.protocol}, {"signals", p.signals}, {"optional", p.optional_flag}};
    if (p.alt_name) port["alt_name"] = *p.alt_name;
    if (p.level) port["level"] = render_voltage(*p.level);
    if (p.attrs.i2c_addr) port["i2c_addr"] = *p.attrs.i2c_addr;
    if (p.attrs.spi_role) port["spi_role"] = std::string(to_string(*p.attrs.spi_role));
    ports.push_back(std::move(port));
  }
  json doc = {{"bundle", json::parse(render_bundle_json(def.bundle))},
              {"classification", std::string(to_string(def.classification))},
              {"has_ground", def.has_ground},
              {"ports", ports}};
  if (def.power_in) doc["power_in"] = render_voltage(*def.power_in);
  if (def.power_out) doc["power_out"] = render_voltage(*def.power_out);
  return doc.dump(2) + "\n";
}

}  // namespace bw
