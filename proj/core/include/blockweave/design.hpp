#pragma once

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>

namespace bw {

// One protocol port on one instance, e.g. {"mcu", "I2C"}.
struct PortKey {
  std::string instance;
  std::string port;

  std::string str() const { return instance + ":" + port; }

  friend auto operator<=>(const PortKey&, const PortKey&) = default;
  friend bool operator==(const PortKey&, const PortKey&) = default;
};

// Undirected; `between` stores endpoints in ascending order so that
// connect(a, b) and connect(b, a) yield the same edge.
struct Edge {
  PortKey a;
  PortKey b;

  static Edge between(PortKey x, PortKey y);
  std::string subject() const;

  friend auto operator<=>(const Edge&, const Edge&) = default;
  friend bool operator==(const Edge&, const Edge&) = default;
};

struct BlockInstance {
  std::string id;
  std::string block_id;
  std::optional<std::string> mat_parent;
  std::optional<int> supply_mv;

  friend bool operator==(const BlockInstance&, const BlockInstance&) = default;
};

// Lower-left corner of the rotated footprint; rot in {0, 90, 180, 270}
// counter-clockwise.
struct Placement {
  double x_mm = 0;
  double y_mm = 0;
  int rot = 0;

  friend bool operator==(const Placement&, const Placement&) = default;
};

struct BoardSpec {
  double w_mm = 100;
  double h_mm = 100;
  double pitch_mm = 0.5;

  friend bool operator==(const BoardSpec&, const BoardSpec&) = default;
};

struct Design {
  std::string id;
  std::string name;
  std::map<std::string, BlockInstance, std::less<>> instances;
  std::set<Edge> edges;
  BoardSpec board;
  std::map<std::string, Placement, std::less<>> placements;

  const BlockInstance* find(std::string_view iid) const;

  friend bool operator==(const Design&, const Design&) = default;
};

// Empty design with a process-unique id; an empty name is replaced by a
// generated one.
Design new_design(std::string name);

// Design File Format. Throws bw::Error(FormatError) on malformed input; the
// parser does not check references (replay does).
std::string render_design(const Design& design);
Design parse_design(std::string_view text);

// Single design mutations, as carried by the service op log.
struct AddInstanceOp {
  std::string block;
  std::optional<std::string> parent;
  std::optional<std::string> id;
  std::optional<int> supply_mv;
};
struct ReparentOp {
  std::string instance;
  std::string parent;
};
struct RemoveInstanceOp {
  std::string instance;
};
struct ConnectOp {
  PortKey a;
  PortKey b;
};
struct DisconnectOp {
  PortKey a;
  PortKey b;
};
struct SetSupplyOp {
  std::string instance;
  std::optional<int> supply_mv;
};
struct PlaceOp {
  std::string instance;
  Placement placement;
};
struct SetBoardOp {
  BoardSpec board;
};

using Op = std::variant<AddInstanceOp, ReparentOp, RemoveInstanceOp, ConnectOp, DisconnectOp, SetSupplyOp,
                        PlaceOp, SetBoardOp>;

// {"op": "connect", "a": ["mcu", "I2C"], "b": ["temp", "I2C"]} and friends.
// Throws bw::Error(BadRequest).
Op parse_op(std::string_view text);
std::string render_op(const Op& op);
std::string_view op_name(const Op& op);

}  // namespace bw
