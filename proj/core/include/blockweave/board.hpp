#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "blockweave/block.hpp"
#include "blockweave/composer.hpp"
#include "blockweave/design.hpp"
#include "blockweave/diagnostic.hpp"

namespace bw {

class Library;

struct Rect {
  double x0 = 0;
  double y0 = 0;
  double x1 = 0;
  double y1 = 0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  // Positive-area intersection; shared edges do not count.
  bool overlaps(const Rect& o) const;
  bool within(const BoardSpec& board) const;
};

bool valid_rotation(int rot);
// A W x H footprint at rot 90/270 occupies H x W.
Rect placed_rect(const Footprint& fp, const Placement& p);
// Absolute position of a footprint-relative point after rotation.
std::pair<double, double> placed_point(const Footprint& fp, double x, double y, const Placement& p);

std::optional<Diagnostic> boundary_check(std::string_view iid, const Rect& r, const BoardSpec& board);
std::optional<Diagnostic> overlap_check(std::string_view iid_a, const Rect& a, std::string_view iid_b, const Rect& b);

enum class Layer { Top, Bottom };
std::string_view to_string(Layer l);

struct GridPoint {
  int x = 0;
  int y = 0;

  friend auto operator<=>(const GridPoint&, const GridPoint&) = default;
  friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

struct PlacedPad {
  std::string instance;
  std::size_t index = 0;  // position in the footprint's pad list
  std::string local_net;
  std::optional<PinRef> first_pin;  // first pin of the local net, unprefixed
  double x_mm = 0;
  double y_mm = 0;
  GridPoint cell;
};

struct PlacedBlock {
  std::string instance;
  std::string label;
  Rect rect;
  std::vector<PlacedPad> pads;
};

struct RatsnestLink {
  std::string net;
  PlacedPad a;
  PlacedPad b;

  long long squared_length() const;
};

struct Track {
  std::string net;
  Layer layer = Layer::Top;
  std::vector<GridPoint> points;  // every grid point visited, endpoints included
  std::size_t link = 0;           // index into the routed link list

  double length_mm(double pitch) const;
};

struct BoardLayout {
  BoardSpec board;
  std::vector<PlacedBlock> blocks;  // sorted by instance id
  std::vector<Track> tracks;        // in routing order
  std::vector<RatsnestLink> unrouted;

  int grid_width() const;   // grid points along x
  int grid_height() const;  // grid points along y
  GridPoint snap(double x_mm, double y_mm) const;
};

// Resolves footprints and placements. Throws bw::Error(UnplacedInstance).
BoardLayout build_layout(const Design& design, const Library& library);

// Euclidean MST over the pads of every merged net (one pad per instance
// net), ties broken on (instance, pad index).
std::vector<RatsnestLink> ratsnest(const Design& design, const MergedNetlist& netlist, const BoardLayout& layout);

struct RouteResult {
  std::vector<Track> tracks;
  std::vector<RatsnestLink> unrouted;
  std::vector<Diagnostic> diagnostics;
  std::vector<RatsnestLink> order;  // links as routed: shortest first
};

// Routes each link on one layer (TOP, then BOTTOM) by breadth-first search
// on the 4-connected grid. Placed blocks are keep-outs on both layers except
// for the link's own two pads; earlier tracks of other nets block their layer.
RouteResult route(const BoardLayout& layout, const std::vector<RatsnestLink>& links);

std::string export_board_svg(const BoardLayout& layout, const MergedNetlist& netlist);
std::string render_layout_json(const BoardLayout& layout);

}  // namespace bw
