#include "blockweave/design.hpp"

#include <atomic>

#include <json.hpp>

#include "blockweave/error.hpp"

namespace bw {

using nlohmann::json;

Edge Edge::between(PortKey x, PortKey y) {
  if (y < x) std::swap(x, y);
  return Edge{std::move(x), std::move(y)};
}

std::string Edge::subject() const { return "edge/" + a.str() + "--" + b.str(); }

const BlockInstance* Design::find(std::string_view iid) const {
  const auto it = instances.find(iid);
  return it == instances.end() ? nullptr : &it->second;
}

Design new_design(std::string name) {
  static std::atomic<unsigned> counter{0};
  const unsigned n = ++counter;
  Design d;
  d.id = "design-" + std::to_string(n);
  d.name = name.empty() ? "untitled-" + std::to_string(n) : std::move(name);
  return d;
}

namespace {

json port_json(const PortKey& k) { return json::array({k.instance, k.port}); }

PortKey port_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::BadRequest, "port must be [instance, port]");
  return {j[0].get<std::string>(), j[1].get<std::string>()};
}

json op_json(const Op& op) {
  struct Visitor {
    json operator()(const AddInstanceOp& o) const {
      json j = {{"op", "add_instance"}, {"block", o.block}};
      if (o.parent) j["parent"] = *o.parent;
      if (o.id) j["id"] = *o.id;
      if (o.supply_mv) j["supply_mv"] = *o.supply_mv;
      return j;
    }
    json operator()(const ReparentOp& o) const {
      return {{"op", "reparent"}, {"instance", o.instance}, {"parent", o.parent}};
    }
    json operator()(const RemoveInstanceOp& o) const { return {{"op", "remove_instance"}, {"instance", o.instance}}; }
    json operator()(const ConnectOp& o) const { return {{"op", "connect"}, {"a", port_json(o.a)}, {"b", port_json(o.b)}}; }
    json operator()(const DisconnectOp& o) const {
      return {{"op", "disconnect"}, {"a", port_json(o.a)}, {"b", port_json(o.b)}};
    }
    json operator()(const SetSupplyOp& o) const {
      json j = {{"op", "set_supply"}, {"instance", o.instance}};
      j["supply_mv"] = o.supply_mv ? json(*o.supply_mv) : json(nullptr);
      return j;
    }
    json operator()(const PlaceOp& o) const {
      return {{"op", "place"},
              {"instance", o.instance},
              {"x_mm", o.placement.x_mm},
              {"y_mm", o.placement.y_mm},
              {"rot", o.placement.rot}};
    }
    json operator()(const SetBoardOp& o) const {
      return {{"op", "set_board"}, {"w_mm", o.board.w_mm}, {"h_mm", o.board.h_mm}, {"pitch_mm", o.board.pitch_mm}};
    }
  };
  return std::visit(Visitor{}, op);
}

}  // namespace

std::string render_design(const Design& d) {
  json instances = json::array();
  for (const auto& [id, inst] : d.instances) {
    json j = {{"id", inst.id}, {"block", inst.block_id}};
    if (inst.mat_parent) j["parent"] = *inst.mat_parent;
    if (inst.supply_mv) j["supply_mv"] = *inst.supply_mv;
    instances.push_back(std::move(j));
  }
  json edges = json::array();
  for (const auto& e : d.edges) edges.push_back({e.a.instance, e.a.port, e.b.instance, e.b.port});
  json placements = json::object();
  for (const auto& [id, p] : d.placements) placements[id] = {{"x_mm", p.x_mm}, {"y_mm", p.y_mm}, {"rot", p.rot}};
  json doc = {{"design", {{"id", d.id}, {"name", d.name}}},
              {"instances", instances},
              {"edges", edges},
              {"placements", placements},
              {"board", {{"w_mm", d.board.w_mm}, {"h_mm", d.board.h_mm}, {"pitch_mm", d.board.pitch_mm}}}};
  return doc.dump(2) + "\n";
}

Design parse_design(std::string_view text) {
  Design d;
  try {
    const json doc = json::parse(text);
    const auto& meta = doc.at("design");
    d.id = meta.at("id").get<std::string>();
    d.name = meta.value("name", std::string{});
    for (const auto& j : doc.value("instances", json::array())) {
      BlockInstance inst;
      inst.id = j.at("id").get<std::string>();
      inst.block_id = j.at("block").get<std::string>();
      if (j.contains("parent") && !j["parent"].is_null()) inst.mat_parent = j["parent"].get<std::string>();
      if (j.contains("supply_mv") && !j["supply_mv"].is_null()) inst.supply_mv = j["supply_mv"].get<int>();
      if (inst.id.empty()) throw Error(ErrorCode::FormatError, "instance with empty id");
      const std::string key = inst.id;
      if (!d.instances.emplace(key, std::move(inst)).second) {
        throw Error(ErrorCode::FormatError, "duplicate instance id '" + key + "'");
      }
    }
    for (const auto& e : doc.value("edges", json::array())) {
      if (!e.is_array() || e.size() != 4) throw Error(ErrorCode::FormatError, "edge must be [instA, portA, instB, portB]");
      d.edges.insert(Edge::between({e[0].get<std::string>(), e[1].get<std::string>()},
                                   {e[2].get<std::string>(), e[3].get<std::string>()}));
    }
    const json placements = doc.value("placements", json::object());
    for (const auto& [id, p] : placements.items()) {
      d.placements[id] = Placement{p.at("x_mm").get<double>(), p.at("y_mm").get<double>(), p.value("rot", 0)};
    }
    if (doc.contains("board")) {
      const auto& b = doc["board"];
      d.board = BoardSpec{b.at("w_mm").get<double>(), b.at("h_mm").get<double>(), b.value("pitch_mm", 0.5)};
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("malformed design file: ") + e.what());
  }
  return d;
}

Op parse_op(std::string_view text) {
  try {
    const json j = json::parse(text);
    const std::string name = j.at("op").get<std::string>();
    auto opt_string = [&](const char* key) -> std::optional<std::string> {
      if (!j.contains(key) || j[key].is_null()) return std::nullopt;
      return j[key].get<std::string>();
    };
    auto opt_int = [&](const char* key) -> std::optional<int> {
      if (!j.contains(key) || j[key].is_null()) return std::nullopt;
      return j[key].get<int>();
    };
    if (name == "add_instance") {
      return AddInstanceOp{j.at("block").get<std::string>(), opt_string("parent"), opt_string("id"),
                           opt_int("supply_mv")};
    }
    if (name == "reparent") return ReparentOp{j.at("instance").get<std::string>(), j.at("parent").get<std::string>()};
    if (name == "remove_instance") return RemoveInstanceOp{j.at("instance").get<std::string>()};
    if (name == "connect") return ConnectOp{port_from_json(j.at("a")), port_from_json(j.at("b"))};
    if (name == "disconnect") return DisconnectOp{port_from_json(j.at("a")), port_from_json(j.at("b"))};
    if (name == "set_supply") return SetSupplyOp{j.at("instance").get<std::string>(), opt_int("supply_mv")};
    if (name == "place") {
      return PlaceOp{j.at("instance").get<std::string>(),
                     Placement{j.at("x_mm").get<double>(), j.at("y_mm").get<double>(), j.value("rot", 0)}};
    }
    if (name == "set_board") {
      return SetBoardOp{BoardSpec{j.at("w_mm").get<double>(), j.at("h_mm").get<double>(), j.value("pitch_mm", 0.5)}};
    }
    throw Error(ErrorCode::BadRequest, "unknown op '" + name + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadRequest, std::string("malformed op: ") + e.what());
  }
}

std::string render_op(const Op& op) { return op_json(op).dump(); }

std::string_view op_name(const Op& op) {
  static constexpr std::string_view names[] = {"add_instance", "reparent", "remove_instance", "connect",
                                                "disconnect",   "set_supply", "place",         "set_board"};
  return names[op.index()];
}

}  // namespace bw
