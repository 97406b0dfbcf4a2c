#include <catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <random>

#include "blockweave/board.hpp"
#include "blockweave/composer.hpp"
#include "blockweave/error.hpp"
#include "blockweave/pipeline.hpp"
#include "fixtures.hpp"
#include "route_oracle.hpp"

using namespace bw;
using bw::testing::audit_route;
using bw::testing::fixture_design;
using bw::testing::fixture_library;

namespace {

BoardLayout empty_layout(double w, double h, double pitch) {
  BoardLayout l;
  l.board = BoardSpec{w, h, pitch};
  return l;
}

PlacedPad pad_at(const std::string& inst, std::size_t idx, GridPoint cell, double pitch = 1.0) {
  return PlacedPad{inst, idx, "N", PinRef{"R1", "1"}, cell.x * pitch, cell.y * pitch, cell};
}

void add_block(BoardLayout& l, const std::string& id, Rect r) { l.blocks.push_back(PlacedBlock{id, id, r, {}}); }

int count_of(const std::string& hay, const std::string& needle) {
  int n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("placement geometry", "[board][place]") {
  const BoardSpec board{100, 100, 0.5};
  const Footprint fp{10, 10, {}};
  CHECK(boundary_check("a", placed_rect(fp, {95, 95, 0}), board)->kind == DiagnosticKind::BoundaryViolation);
  CHECK_FALSE(boundary_check("a", placed_rect(fp, {0, 0, 0}), board));
  CHECK_FALSE(boundary_check("a", placed_rect(fp, {90, 90, 0}), board));
  const auto o = overlap_check("b", placed_rect(fp, {5, 5, 0}), "a", placed_rect(fp, {0, 0, 0}));
  REQUIRE(o);
  CHECK(o->subject == "place/a/overlap/b");
  CHECK_FALSE(overlap_check("a", placed_rect(fp, {0, 0, 0}), "b", placed_rect(fp, {10, 0, 0})));

  const Footprint tall{4, 12, {}};
  const Rect r90 = placed_rect(tall, {0, 0, 90});
  CHECK(r90.width() == 12);
  CHECK(r90.height() == 4);
  CHECK(placed_rect(tall, {0, 0, 180}).width() == 4);
  // 12 wide at rot 90: fits a 10x20 board upright but not turned
  CHECK(boundary_check("t", placed_rect(tall, {0, 0, 0}), {10, 20, 0.5}) == std::nullopt);
  CHECK(boundary_check("t", placed_rect(tall, {0, 0, 90}), {10, 20, 0.5}));
}

TEST_CASE("rotated pads stay inside the rotated footprint", "[board][place][property]") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 2000; ++i) {
    const Footprint fp{1 + 20 * u(rng), 1 + 20 * u(rng), {}};
    const int rots[] = {0, 90, 180, 270};
    const Placement p{50 * u(rng), 50 * u(rng), rots[i % 4]};
    const double px = fp.width_mm * u(rng);
    const double py = fp.height_mm * u(rng);
    const Rect r = placed_rect(fp, p);
    const auto [x, y] = placed_point(fp, px, py, p);
    REQUIRE(x >= r.x0 - 1e-9);
    REQUIRE(x <= r.x1 + 1e-9);
    REQUIRE(y >= r.y0 - 1e-9);
    REQUIRE(y <= r.y1 + 1e-9);
    // counter-clockwise: the footprint's lower-left corner moves to the lower-right at 90
    if (p.rot == 90) {
      const auto [cx, cy] = placed_point(fp, 0, 0, p);
      CHECK(cx == Catch::Approx(r.x1));
      CHECK(cy == Catch::Approx(r.y0));
    }
  }
}

TEST_CASE("grid snapping", "[board][grid]") {
  const auto l = empty_layout(100, 100, 0.5);
  CHECK(l.grid_width() == 201);
  CHECK(l.grid_height() == 201);
  CHECK(l.snap(10.2, 10.3) == GridPoint{20, 21});
  CHECK(l.snap(-3, 200) == GridPoint{0, 200});
}

TEST_CASE("ratsnest is a minimum spanning tree", "[board][ratsnest]") {
  // three instances, one pad each on net N
  Design d = new_design("r");
  for (const char* id : {"a", "b", "c"}) d.instances[id] = BlockInstance{id, "x", std::nullopt, std::nullopt};
  MergedNetlist n;
  n.nets["N"] = {PinRef{"B1_R1", "1"}, PinRef{"B2_R1", "1"}, PinRef{"B3_R1", "1"}};
  BoardLayout l = empty_layout(20, 20, 1.0);
  const GridPoint cells[] = {{0, 0}, {10, 0}, {10, 5}};
  const char* ids[] = {"a", "b", "c"};
  for (int i = 0; i < 3; ++i) {
    PlacedBlock b{ids[i], ids[i], {}, {pad_at(ids[i], 0, cells[i])}};
    l.blocks.push_back(b);
  }
  const auto links = ratsnest(d, n, l);
  REQUIRE(links.size() == 2);
  CHECK(links[0].a.cell == GridPoint{10, 0});
  CHECK(links[0].b.cell == GridPoint{10, 5});
  CHECK(links[1].a.cell == GridPoint{0, 0});
  CHECK(links[1].b.cell == GridPoint{10, 0});

  SECTION("single-pad net yields nothing") {
    n.nets["N"] = {PinRef{"B1_R1", "1"}};
    CHECK(ratsnest(d, n, l).empty());
  }
}

TEST_CASE("ratsnest weight matches brute force", "[board][ratsnest][property]") {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 2 + static_cast<int>(rng() % 5);
    Design d = new_design("r");
    MergedNetlist n;
    BoardLayout l = empty_layout(30, 30, 1.0);
    std::vector<GridPoint> pts;
    for (int i = 0; i < k; ++i) {
      const std::string id = "i" + std::to_string(i);
      d.instances[id] = BlockInstance{id, "x", std::nullopt, std::nullopt};
      n.nets["N"].insert(PinRef{"B" + std::to_string(i + 1) + "_R1", "1"});
      pts.push_back({static_cast<int>(rng() % 31), static_cast<int>(rng() % 31)});
      l.blocks.push_back(PlacedBlock{id, id, {}, {pad_at(id, 0, pts.back())}});
    }
    const auto links = ratsnest(d, n, l);
    REQUIRE(links.size() == static_cast<std::size_t>(k - 1));
    double got = 0;
    for (const auto& e : links) got += std::sqrt(static_cast<double>(e.squared_length()));

    // brute force over every (k-1)-subset of the complete graph
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < k; ++i) {
      for (int j = i + 1; j < k; ++j) edges.push_back({i, j});
    }
    double best = 1e18;
    const int m = static_cast<int>(edges.size());
    for (int mask = 0; mask < (1 << m); ++mask) {
      if (__builtin_popcount(mask) != k - 1) continue;
      std::vector<int> comp(k);
      std::iota(comp.begin(), comp.end(), 0);
      double w = 0;
      for (int e = 0; e < m; ++e) {
        if (!(mask >> e & 1)) continue;
        const auto [i, j] = edges[e];
        const int ci = comp[i], cj = comp[j];
        for (auto& c : comp) {
          if (c == cj) c = ci;
        }
        w += std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y);
      }
      if (std::all_of(comp.begin(), comp.end(), [&](int c) { return c == comp[0]; })) best = std::min(best, w);
    }
    REQUIRE(got == Catch::Approx(best));
  }
}

TEST_CASE("routing basics", "[board][route]") {
  SECTION("straight line") {
    BoardLayout l = empty_layout(10, 10, 0.5);
    const RatsnestLink link{"N", pad_at("a", 0, {0, 0}, 0.5), pad_at("b", 0, {10, 0}, 0.5)};
    const auto r = route(l, {link});
    REQUIRE(r.tracks.size() == 1);
    CHECK(r.tracks[0].points.size() == 11);
    CHECK(r.tracks[0].length_mm(0.5) == Catch::Approx(5.0));
    CHECK(r.tracks[0].layer == Layer::Top);
  }
  SECTION("through a one-cell gap") {
    BoardLayout l = empty_layout(20, 20, 1.0);
    add_block(l, "w1", {9.6, 0, 10.4, 14.4});
    add_block(l, "w2", {9.6, 15.6, 10.4, 20});
    const RatsnestLink link{"N", pad_at("a", 0, {2, 2}), pad_at("b", 0, {18, 2})};
    const auto r = route(l, {link});
    REQUIRE(r.tracks.size() == 1);
    CHECK(r.tracks[0].points.size() == 43);
    CHECK(bw::testing::bfs_distance(l, {2, 2}, {18, 2}, std::vector<std::vector<std::string>>(21, std::vector<std::string>(21)), "N") == 42);
    CHECK(audit_route(l, r).empty());
  }
  SECTION("enclosed pad") {
    BoardLayout l = empty_layout(20, 20, 1.0);
    add_block(l, "s", {5, 5, 15, 6});
    add_block(l, "n", {5, 14, 15, 15});
    add_block(l, "w", {5, 5, 6, 15});
    add_block(l, "e", {14, 5, 15, 15});
    const RatsnestLink link{"N", pad_at("a", 0, {10, 10}), pad_at("b", 0, {1, 1})};
    const auto r = route(l, {link});
    CHECK(r.tracks.empty());
    REQUIRE(r.unrouted.size() == 1);
    REQUIRE(r.diagnostics.size() == 1);
    CHECK(r.diagnostics[0].kind == DiagnosticKind::Unroutable);
    CHECK(r.diagnostics[0].subject == "route/N/a.0--b.0");
    CHECK(audit_route(l, r).empty());
  }
  SECTION("second net falls back to the bottom layer") {
    BoardLayout l = empty_layout(20, 4, 1.0);
    add_block(l, "top", {0, 1, 20, 4});  // leaves only row y=0
    const RatsnestLink n1{"A", pad_at("a", 0, {0, 0}), pad_at("b", 0, {10, 0})};
    const RatsnestLink n2{"B", pad_at("c", 0, {2, 0}), pad_at("d", 0, {20, 0})};
    const auto r = route(l, {n1, n2});
    REQUIRE(r.tracks.size() == 2);
    CHECK(r.tracks[0].net == "A");
    CHECK(r.tracks[0].layer == Layer::Top);
    CHECK(r.tracks[1].layer == Layer::Bottom);
    CHECK(audit_route(l, r).empty());
  }
}

TEST_CASE("random routing satisfies the invariants", "[board][route][property]") {
  std::mt19937 rng(23);
  for (int trial = 0; trial < 60; ++trial) {
    BoardLayout l = empty_layout(30, 30, 1.0);
    for (int b = 0; b < 6; ++b) {
      const double x = rng() % 26, y = rng() % 26;
      add_block(l, "k" + std::to_string(b), {x, y, x + 1 + rng() % 4, y + 1 + rng() % 4});
    }
    std::vector<RatsnestLink> links;
    for (int i = 0; i < 12; ++i) {
      const std::string net = "N" + std::to_string(rng() % 5);
      const GridPoint a{static_cast<int>(rng() % 31), static_cast<int>(rng() % 31)};
      const GridPoint b{static_cast<int>(rng() % 31), static_cast<int>(rng() % 31)};
      if (a == b) continue;
      links.push_back({net, pad_at("p", static_cast<std::size_t>(2 * i), a), pad_at("q", static_cast<std::size_t>(2 * i + 1), b)});
    }
    const auto r = route(l, links);
    const auto problems = audit_route(l, r);
    INFO("trial " << trial << ": " << (problems.empty() ? "" : problems.front()));
    REQUIRE(problems.empty());
    CHECK(r.tracks.size() + r.unrouted.size() == links.size());
  }
}

TEST_CASE("fixture layouts", "[board][fixture]") {
  auto lib = fixture_library();
  SECTION("unplaced instance") {
    Design d = fixture_design("thermostat");
    d.placements.erase("led");
    try {
      build_layout(d, *lib);
      FAIL("expected UnplacedInstance");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::UnplacedInstance);
    }
  }
  for (const char* name : {"thermostat", "catamaran", "blinky", "router20"}) {
    INFO(name);
    const Design d = fixture_design(name);
    const auto art = compose_design(d, *lib);
    const auto layout = build_layout(d, *lib);
    const auto links = ratsnest(d, art.netlist, layout);

    // per net: links form a spanning tree over the net's representative pads
    std::map<std::string, std::set<std::pair<std::string, std::string>>> nodes;
    std::map<std::string, int> per_net;
    for (const auto& link : links) {
      nodes[link.net].insert({link.a.instance, link.a.local_net});
      nodes[link.net].insert({link.b.instance, link.b.local_net});
      ++per_net[link.net];
    }
    for (const auto& [net, ns] : nodes) CHECK(per_net[net] + 1 == static_cast<int>(ns.size()));

    const auto r = route(layout, links);
    CHECK(audit_route(layout, r).empty());
    CHECK(art.layout.tracks.size() == r.tracks.size());
    if (std::string(name) != "router20") CHECK(r.unrouted.empty());

    CHECK(count_of(art.svg, "<g class=\"block\"") == static_cast<int>(d.instances.size()));
    CHECK(art.svg == compose_design(d, *lib).svg);
    CHECK(art.board_json == compose_design(d, *lib).board_json);
  }
}

TEST_CASE("empty board export", "[board][svg]") {
  auto lib = fixture_library();
  const auto art = compose_design(new_design("empty"), *lib);
  CHECK(count_of(art.svg, "<rect") == 1);
  CHECK(count_of(art.svg, "<polyline") == 0);
  CHECK(art.svg.rfind("<svg", 0) == 0);
  CHECK(art.svg.find("</svg>\n") == art.svg.size() - 7);
}

TEST_CASE("svg shows unrouted links dashed and corner-only tracks", "[board][svg]") {
  BoardLayout l = empty_layout(20, 20, 1.0);
  add_block(l, "w", {5, 5, 15, 6});
  const RatsnestLink ok{"A", pad_at("a", 0, {0, 0}), pad_at("b", 0, {10, 0})};
  const RatsnestLink blocked{"B", pad_at("c", 0, {10, 5}), pad_at("d", 0, {10, 5})};
  auto r = route(l, {ok});
  l.tracks = r.tracks;
  l.unrouted = {blocked};
  const std::string svg = export_board_svg(l, MergedNetlist{});
  CHECK(svg.find("points=\"0,20 10,20\"") != std::string::npos);  // y flipped, straight run has two points
  CHECK(count_of(svg, "stroke-dasharray") == 1);
  CHECK(svg == export_board_svg(l, MergedNetlist{}));
}

TEST_CASE("the route audit catches tampering", "[board][route]") {
  BoardLayout l = empty_layout(20, 20, 1.0);
  add_block(l, "w", {9.6, 0, 10.4, 14.4});
  const RatsnestLink a{"A", pad_at("a", 0, {2, 2}), pad_at("b", 0, {18, 2})};
  const RatsnestLink b{"B", pad_at("c", 0, {2, 18}), pad_at("d", 0, {18, 18})};
  const auto good = route(l, {a, b});
  REQUIRE(audit_route(l, good).empty());

  auto detour = good;
  detour.tracks[0].points.insert(detour.tracks[0].points.begin() + 1, {GridPoint{2, 3}, GridPoint{2, 2}});
  CHECK_FALSE(audit_route(l, detour).empty());

  auto through = good;
  through.tracks[0].points = {};
  for (int x = 2; x <= 18; ++x) through.tracks[0].points.push_back({x, 2});
  CHECK_FALSE(audit_route(l, through).empty());

  auto dropped = good;
  dropped.unrouted.push_back(dropped.order[dropped.tracks.back().link]);
  dropped.tracks.pop_back();
  CHECK_FALSE(audit_route(l, dropped).empty());
}
