#include "blockweave/board.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "blockweave/error.hpp"
#include "blockweave/library.hpp"
#include "text_util.hpp"

namespace bw {

namespace {

constexpr double kEps = 1e-9;

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

bool Rect::overlaps(const Rect& o) const {
  return x0 < o.x1 - kEps && o.x0 < x1 - kEps && y0 < o.y1 - kEps && o.y0 < y1 - kEps;
}

bool Rect::within(const BoardSpec& board) const {
  return x0 >= -kEps && y0 >= -kEps && x1 <= board.w_mm + kEps && y1 <= board.h_mm + kEps;
}

bool valid_rotation(int rot) { return rot == 0 || rot == 90 || rot == 180 || rot == 270; }

Rect placed_rect(const Footprint& fp, const Placement& p) {
  const bool turned = p.rot == 90 || p.rot == 270;
  const double w = turned ? fp.height_mm : fp.width_mm;
  const double h = turned ? fp.width_mm : fp.height_mm;
  return {p.x_mm, p.y_mm, p.x_mm + w, p.y_mm + h};
}

std::pair<double, double> placed_point(const Footprint& fp, double x, double y, const Placement& p) {
  const double w = fp.width_mm;
  const double h = fp.height_mm;
  double rx = x;
  double ry = y;
  switch (p.rot) {
    case 90: rx = h - y; ry = x; break;
    case 180: rx = w - x; ry = h - y; break;
    case 270: rx = y; ry = w - x; break;
    default: break;
  }
  return {p.x_mm + rx, p.y_mm + ry};
}

std::optional<Diagnostic> boundary_check(std::string_view iid, const Rect& r, const BoardSpec& board) {
  if (r.within(board)) return std::nullopt;
  return Diagnostic{Severity::Error, DiagnosticKind::BoundaryViolation, subject::placement(iid),
                    "block " + std::string(iid) + " at [" + format_mm(r.x0) + ", " + format_mm(r.y0) + "]-[" +
                        format_mm(r.x1) + ", " + format_mm(r.y1) + "] leaves the " + format_mm(board.w_mm) + "x" +
                        format_mm(board.h_mm) + " mm board"};
}

std::optional<Diagnostic> overlap_check(std::string_view iid_a, const Rect& a, std::string_view iid_b, const Rect& b) {
  if (!a.overlaps(b)) return std::nullopt;
  if (iid_b < iid_a) std::swap(iid_a, iid_b);
  return Diagnostic{Severity::Error, DiagnosticKind::Overlap,
                    subject::placement(iid_a) + "/overlap/" + std::string(iid_b),
                    "blocks " + std::string(iid_a) + " and " + std::string(iid_b) + " overlap"};
}

std::string_view to_string(Layer l) { return l == Layer::Top ? "TOP" : "BOTTOM"; }

long long RatsnestLink::squared_length() const {
  const long long dx = a.cell.x - b.cell.x;
  const long long dy = a.cell.y - b.cell.y;
  return dx * dx + dy * dy;
}

double Track::length_mm(double pitch) const {
  return points.empty() ? 0.0 : static_cast<double>(points.size() - 1) * pitch;
}

int BoardLayout::grid_width() const { return static_cast<int>(std::floor(board.w_mm / board.pitch_mm + kEps)) + 1; }
int BoardLayout::grid_height() const { return static_cast<int>(std::floor(board.h_mm / board.pitch_mm + kEps)) + 1; }

GridPoint BoardLayout::snap(double x_mm, double y_mm) const {
  const int x = static_cast<int>(std::lround(x_mm / board.pitch_mm));
  const int y = static_cast<int>(std::lround(y_mm / board.pitch_mm));
  return {std::clamp(x, 0, grid_width() - 1), std::clamp(y, 0, grid_height() - 1)};
}

BoardLayout build_layout(const Design& design, const Library& library) {
  BoardLayout layout;
  layout.board = design.board;
  for (const auto& [iid, inst] : design.instances) {
    const auto pit = design.placements.find(iid);
    if (pit == design.placements.end()) {
      throw Error(ErrorCode::UnplacedInstance, "instance '" + iid + "' has no board placement");
    }
    const auto def = library.get(inst.block_id);
    PlacedBlock block;
    block.instance = iid;
    block.label = iid;
    block.rect = placed_rect(def->footprint, pit->second);
    for (std::size_t i = 0; i < def->footprint.pads.size(); ++i) {
      const Pad& pad = def->footprint.pads[i];
      const auto [x, y] = placed_point(def->footprint, pad.x_mm, pad.y_mm, pit->second);
      std::optional<PinRef> first;
      if (const NetDecl* net = def->find_net(pad.net_id); net && !net->pins.empty()) first = net->pins.front();
      block.pads.push_back(PlacedPad{iid, i, pad.net_id, first, x, y, layout.snap(x, y)});
    }
    layout.blocks.push_back(std::move(block));
  }
  return layout;
}

std::vector<RatsnestLink> ratsnest(const Design& design, const MergedNetlist& netlist, const BoardLayout& layout) {
  std::map<PinRef, std::string> pin_net;
  for (const auto& [name, pins] : netlist.nets) {
    for (const auto& p : pins) pin_net.emplace(p, name);
  }
  const auto ordinals = instance_ordinals(design);

  // One representative pad per (instance, local net). Blocks are sorted by
  // instance and pads by index, so each group comes out in tie-break order.
  std::map<std::string, std::vector<PlacedPad>> by_net;
  for (const auto& block : layout.blocks) {
    const auto ord = ordinals.find(block.instance);
    if (ord == ordinals.end()) continue;
    const std::string prefix = prefix_for(ord->second);
    std::set<std::string> seen;
    for (const auto& pad : block.pads) {
      if (!pad.first_pin || !seen.insert(pad.local_net).second) continue;
      const auto it = pin_net.find(PinRef{prefix + pad.first_pin->refdes, pad.first_pin->pin});
      if (it == pin_net.end()) continue;
      by_net[it->second].push_back(pad);
    }
  }

  std::vector<RatsnestLink> out;
  for (const auto& [net, pads] : by_net) {
    if (pads.size() < 2) continue;
    struct Pair {
      long long d2;
      std::size_t i;
      std::size_t j;
    };
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < pads.size(); ++i) {
      for (std::size_t j = i + 1; j < pads.size(); ++j) {
        const long long dx = pads[i].cell.x - pads[j].cell.x;
        const long long dy = pads[i].cell.y - pads[j].cell.y;
        pairs.push_back({dx * dx + dy * dy, i, j});
      }
    }
    std::sort(pairs.begin(), pairs.end(),
              [](const Pair& a, const Pair& b) { return std::tie(a.d2, a.i, a.j) < std::tie(b.d2, b.i, b.j); });
    std::vector<std::size_t> parent(pads.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto root = [&parent](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (const auto& p : pairs) {
      const auto ri = root(p.i);
      const auto rj = root(p.j);
      if (ri == rj) continue;
      parent[rj] = ri;
      out.push_back(RatsnestLink{net, pads[p.i], pads[p.j]});
    }
  }
  return out;
}

namespace {

class Grid {
 public:
  Grid(const BoardLayout& layout) : w_(layout.grid_width()), h_(layout.grid_height()), blocked_(w_ * h_, 0) {
    const double pitch = layout.board.pitch_mm;
    for (const auto& b : layout.blocks) {
      const int x0 = std::max(0, static_cast<int>(std::ceil(b.rect.x0 / pitch - kEps)));
      const int x1 = std::min(w_ - 1, static_cast<int>(std::floor(b.rect.x1 / pitch + kEps)));
      const int y0 = std::max(0, static_cast<int>(std::ceil(b.rect.y0 / pitch - kEps)));
      const int y1 = std::min(h_ - 1, static_cast<int>(std::floor(b.rect.y1 / pitch + kEps)));
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) blocked_[index({x, y})] = 1;
      }
    }
    for (auto& layer : owner_) layer.assign(w_ * h_, -1);
  }

  int index(GridPoint p) const { return p.y * w_ + p.x; }
  bool in_bounds(GridPoint p) const { return p.x >= 0 && p.y >= 0 && p.x < w_ && p.y < h_; }

  bool passable(GridPoint p, int layer, int net, GridPoint a, GridPoint b) const {
    const int i = index(p);
    if (blocked_[i] && !(p == a) && !(p == b)) return false;
    const int o = owner_[layer][i];
    return o == -1 || o == net;
  }

  std::optional<std::vector<GridPoint>> bfs(GridPoint a, GridPoint b, int layer, int net) const {
    if (!passable(a, layer, net, a, b) || !passable(b, layer, net, a, b)) return std::nullopt;
    std::vector<int> from(w_ * h_, -2);
    std::deque<GridPoint> queue{a};
    from[index(a)] = -1;
    static constexpr int dx[] = {1, -1, 0, 0};
    static constexpr int dy[] = {0, 0, 1, -1};
    while (!queue.empty()) {
      const GridPoint p = queue.front();
      queue.pop_front();
      if (p == b) break;
      for (int k = 0; k < 4; ++k) {
        const GridPoint n{p.x + dx[k], p.y + dy[k]};
        if (!in_bounds(n) || from[index(n)] != -2 || !passable(n, layer, net, a, b)) continue;
        from[index(n)] = index(p);
        queue.push_back(n);
      }
    }
    if (from[index(b)] == -2) return std::nullopt;
    std::vector<GridPoint> path;
    for (int i = index(b); i != -1; i = from[i]) path.push_back({i % w_, i / w_});
    std::reverse(path.begin(), path.end());
    return path;
  }

  void claim(const std::vector<GridPoint>& path, int layer, int net) {
    for (const auto& p : path) owner_[layer][index(p)] = net;
  }

 private:
  int w_;
  int h_;
  std::vector<char> blocked_;
  std::vector<int> owner_[2];
};

std::string pad_ref(const PlacedPad& p) { return p.instance + "." + std::to_string(p.index); }

}  // namespace

RouteResult route(const BoardLayout& layout, const std::vector<RatsnestLink>& links) {
  RouteResult out;
  out.order = links;
  std::stable_sort(out.order.begin(), out.order.end(), [](const RatsnestLink& x, const RatsnestLink& y) {
    return x.squared_length() < y.squared_length();
  });

  std::map<std::string, int> net_ids;
  for (const auto& l : out.order) net_ids.emplace(l.net, static_cast<int>(net_ids.size()));

  Grid grid(layout);
  for (std::size_t i = 0; i < out.order.size(); ++i) {
    const auto& link = out.order[i];
    const int net = net_ids.at(link.net);
    bool routed = false;
    for (Layer layer : {Layer::Top, Layer::Bottom}) {
      const int li = layer == Layer::Top ? 0 : 1;
      auto path = grid.bfs(link.a.cell, link.b.cell, li, net);
      if (!path) continue;
      grid.claim(*path, li, net);
      out.tracks.push_back(Track{link.net, layer, std::move(*path), i});
      routed = true;
      break;
    }
    if (!routed) {
      out.unrouted.push_back(link);
      out.diagnostics.push_back({Severity::Error, DiagnosticKind::Unroutable,
                                 "route/" + link.net + "/" + pad_ref(link.a) + "--" + pad_ref(link.b),
                                 "no path for net " + link.net + " between " + pad_ref(link.a) + " and " +
                                     pad_ref(link.b) + " on either layer"});
    }
  }
  sort_diagnostics(out.diagnostics);
  return out;
}

std::string export_board_svg(const BoardLayout& layout, const MergedNetlist& netlist) {
  const double w = layout.board.w_mm;
  const double h = layout.board.h_mm;
  const double pitch = layout.board.pitch_mm;
  // Board y grows upwards; SVG y grows downwards.
  auto sx = [](double x) { return format_mm(x); };
  auto sy = [h](double y) { return format_mm(h - y); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_mm(w) << "mm\" height=\"" << format_mm(h)
      << "mm\" viewBox=\"0 0 " << format_mm(w) << ' ' << format_mm(h) << "\">\n";
  svg << "<rect class=\"outline\" x=\"0\" y=\"0\" width=\"" << format_mm(w) << "\" height=\"" << format_mm(h)
      << "\" fill=\"#1e5631\" stroke=\"#000000\" stroke-width=\"0.4\"/>\n";

  for (const auto& b : layout.blocks) {
    svg << "<g class=\"block\" id=\"" << xml_escape(b.instance) << "\">\n";
    svg << "<rect x=\"" << sx(b.rect.x0) << "\" y=\"" << sy(b.rect.y1) << "\" width=\"" << format_mm(b.rect.width())
        << "\" height=\"" << format_mm(b.rect.height())
        << "\" fill=\"none\" stroke=\"#ffffff\" stroke-width=\"0.3\"/>\n";
    svg << "<text x=\"" << sx(b.rect.x0 + 0.5) << "\" y=\"" << sy(b.rect.y1 - 2) << "\" font-size=\"1.6\" fill=\"#ffffff\">"
        << xml_escape(b.label) << "</text>\n";
    for (const auto& p : b.pads) {
      svg << "<circle class=\"pad\" cx=\"" << sx(p.cell.x * pitch) << "\" cy=\"" << sy(p.cell.y * pitch)
          << "\" r=\"0.35\" fill=\"#d4a017\"/>\n";
    }
    svg << "</g>\n";
  }

  for (const auto& t : layout.tracks) {
    const bool top = t.layer == Layer::Top;
    svg << "<polyline class=\"track " << (top ? "top" : "bottom") << "\" data-net=\"" << xml_escape(t.net)
        << "\" fill=\"none\" stroke=\"" << (top ? "#c83737" : "#3771c8") << "\" stroke-width=\"0.25\" points=\"";
    // Only corners are written; the grid path itself is in the layout JSON.
    for (std::size_t i = 0; i < t.points.size(); ++i) {
      const bool corner = i == 0 || i + 1 == t.points.size() ||
                          (t.points[i - 1].x == t.points[i].x) != (t.points[i].x == t.points[i + 1].x);
      if (!corner) continue;
      if (i) svg << ' ';
      svg << sx(t.points[i].x * pitch) << ',' << sy(t.points[i].y * pitch);
    }
    svg << "\"/>\n";
  }

  for (const auto& l : layout.unrouted) {
    svg << "<line class=\"unrouted\" data-net=\"" << xml_escape(l.net) << "\" x1=\"" << sx(l.a.cell.x * pitch)
        << "\" y1=\"" << sy(l.a.cell.y * pitch) << "\" x2=\"" << sx(l.b.cell.x * pitch) << "\" y2=\""
        << sy(l.b.cell.y * pitch) << "\" stroke=\"#ffcc00\" stroke-width=\"0.2\" stroke-dasharray=\"1,1\"/>\n";
  }
  svg << "<!-- " << netlist.nets.size() << " nets, " << layout.tracks.size() << " tracks, " << layout.unrouted.size()
      << " unrouted -->\n";
  svg << "</svg>\n";
  return svg.str();
}

std::string render_layout_json(const BoardLayout& layout) {
  using nlohmann::json;
  auto pad_json = [](const PlacedPad& p) {
    return json{{"instance", p.instance}, {"pad", p.index}, {"net", p.local_net}, {"x", p.cell.x}, {"y", p.cell.y}};
  };
  json blocks = json::array();
  for (const auto& b : layout.blocks) {
    json pads = json::array();
    for (const auto& p : b.pads) pads.push_back(pad_json(p));
    blocks.push_back({{"instance", b.instance},
                      {"rect", {b.rect.x0, b.rect.y0, b.rect.x1, b.rect.y1}},
                      {"pads", pads}});
  }
  json tracks = json::array();
  for (const auto& t : layout.tracks) {
    json pts = json::array();
    for (const auto& p : t.points) pts.push_back({p.x, p.y});
    tracks.push_back({{"net", t.net},
                      {"layer", to_string(t.layer)},
                      {"length_mm", t.length_mm(layout.board.pitch_mm)},
                      {"points", pts}});
  }
  json unrouted = json::array();
  for (const auto& l : layout.unrouted) unrouted.push_back({{"net", l.net}, {"a", pad_json(l.a)}, {"b", pad_json(l.b)}});
  json doc = {{"board", {{"w_mm", layout.board.w_mm}, {"h_mm", layout.board.h_mm}, {"pitch_mm", layout.board.pitch_mm}}},
              {"blocks", blocks},
              {"tracks", tracks},
              {"unrouted", unrouted}};
  return doc.dump(2) + "\n";
}

}  // namespace bw
