#include "route_oracle.hpp"

#include <cmath>
#include <cstdlib>
#include <queue>
#include <sstream>

namespace bw::testing {

namespace {

struct Dims {
  int w;
  int h;
};

Dims dims_of(const BoardLayout& l) {
  return {static_cast<int>(std::floor(l.board.w_mm / l.board.pitch_mm + 1e-9)) + 1,
          static_cast<int>(std::floor(l.board.h_mm / l.board.pitch_mm + 1e-9)) + 1};
}

bool in_block(const BoardLayout& l, GridPoint c) {
  const double x = c.x * l.board.pitch_mm;
  const double y = c.y * l.board.pitch_mm;
  for (const auto& b : l.blocks) {
    if (x >= b.rect.x0 - 1e-9 && x <= b.rect.x1 + 1e-9 && y >= b.rect.y0 - 1e-9 && y <= b.rect.y1 + 1e-9) return true;
  }
  return false;
}

std::string cell_str(GridPoint c) { return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + ")"; }

}  // namespace

std::optional<int> bfs_distance(const BoardLayout& layout, GridPoint a, GridPoint b,
                                const std::vector<std::vector<std::string>>& taken, const std::string& net) {
  const Dims d = dims_of(layout);
  auto free = [&](GridPoint c) {
    if (c.x < 0 || c.y < 0 || c.x >= d.w || c.y >= d.h) return false;
    const std::string& owner = taken[c.x][c.y];
    if (!owner.empty() && owner != net) return false;
    return c == a || c == b || !in_block(layout, c);
  };
  if (!free(a) || !free(b)) return std::nullopt;
  std::vector<std::vector<int>> dist(d.w, std::vector<int>(d.h, -1));
  std::queue<GridPoint> q;
  q.push(a);
  dist[a.x][a.y] = 0;
  while (!q.empty()) {
    const GridPoint c = q.front();
    q.pop();
    if (c == b) return dist[c.x][c.y];
    for (const GridPoint n : {GridPoint{c.x, c.y + 1}, GridPoint{c.x, c.y - 1}, GridPoint{c.x + 1, c.y}, GridPoint{c.x - 1, c.y}}) {
      if (!free(n) || dist[n.x][n.y] != -1) continue;
      dist[n.x][n.y] = dist[c.x][c.y] + 1;
      q.push(n);
    }
  }
  return std::nullopt;
}

std::vector<std::string> audit_route(const BoardLayout& layout, const RouteResult& result) {
  std::vector<std::string> bad;
  const Dims d = dims_of(layout);
  std::vector<std::vector<std::string>> taken[2] = {
      std::vector<std::vector<std::string>>(d.w, std::vector<std::string>(d.h)),
      std::vector<std::vector<std::string>>(d.w, std::vector<std::string>(d.h))};

  std::vector<const Track*> track_for(result.order.size(), nullptr);
  for (const auto& t : result.tracks) {
    if (t.link >= result.order.size() || track_for[t.link]) {
      bad.push_back("track with bad or repeated link index " + std::to_string(t.link));
      continue;
    }
    track_for[t.link] = &t;
  }
  std::size_t unrouted_seen = 0;

  for (std::size_t i = 0; i < result.order.size(); ++i) {
    const auto& link = result.order[i];
    std::ostringstream tag;
    tag << "link " << i << " " << link.net << " " << cell_str(link.a.cell) << "-" << cell_str(link.b.cell) << ": ";
    if (i > 0 && result.order[i - 1].squared_length() > link.squared_length()) bad.push_back(tag.str() + "out of order");

    const auto top = bfs_distance(layout, link.a.cell, link.b.cell, taken[0], link.net);
    const Track* t = track_for[i];
    if (!t) {
      ++unrouted_seen;
      const auto bottom = bfs_distance(layout, link.a.cell, link.b.cell, taken[1], link.net);
      if (top || bottom) bad.push_back(tag.str() + "reported unroutable but oracle found a path");
      continue;
    }
    const int li = t->layer == Layer::Top ? 0 : 1;
    if (li == 1 && top) bad.push_back(tag.str() + "routed on BOTTOM although TOP was free");
    const auto expect = li == 0 ? top : bfs_distance(layout, link.a.cell, link.b.cell, taken[1], link.net);
    const auto& pts = t->points;
    if (pts.empty() || !(pts.front() == link.a.cell) || !(pts.back() == link.b.cell)) {
      bad.push_back(tag.str() + "track does not join the link pads");
      continue;
    }
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const GridPoint c = pts[k];
      if (c.x < 0 || c.y < 0 || c.x >= d.w || c.y >= d.h) {
        bad.push_back(tag.str() + "off-grid point " + cell_str(c));
        break;
      }
      if (k && std::abs(c.x - pts[k - 1].x) + std::abs(c.y - pts[k - 1].y) != 1) bad.push_back(tag.str() + "non-adjacent step");
      const bool endpoint = c == link.a.cell || c == link.b.cell;
      if (!endpoint && in_block(layout, c)) bad.push_back(tag.str() + "crosses a block at " + cell_str(c));
      const std::string& owner = taken[li][c.x][c.y];
      if (!owner.empty() && owner != link.net) bad.push_back(tag.str() + "shares " + cell_str(c) + " with " + owner);
    }
    if (!expect || static_cast<std::size_t>(*expect) + 1 != pts.size()) {
      bad.push_back(tag.str() + "length " + std::to_string(pts.size() - 1) + " differs from oracle " +
                    (expect ? std::to_string(*expect) : "unreachable"));
    }
    for (const auto& c : pts) taken[li][c.x][c.y] = link.net;
  }
  if (unrouted_seen != result.unrouted.size() || unrouted_seen != result.diagnostics.size()) {
    bad.push_back("unrouted count mismatch");
  }
  return bad;
}

}  // namespace bw::testing
