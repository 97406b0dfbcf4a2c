#include "blockweave/pipeline.hpp"

#include <json.hpp>

#include "blockweave/engine.hpp"
#include "blockweave/error.hpp"
#include "blockweave/library.hpp"
#include "fs_util.hpp"

namespace bw {

using nlohmann::json;

namespace {

json diagnostics_array(const std::vector<Diagnostic>& diags) {
  std::vector<Diagnostic> sorted = diags;
  sort_diagnostics(sorted);
  json arr = json::array();
  for (const auto& d : sorted) {
    arr.push_back({{"severity", to_string(d.severity)},
                   {"kind", to_string(d.kind)},
                   {"subject", d.subject},
                   {"message", d.message}});
  }
  return arr;
}

}  // namespace

ComposeArtifacts compose_design(const Design& design, const Library& library) {
  ComposeArtifacts out;
  out.netlist = compose_schematic(design, library);
  out.layout = build_layout(design, library);
  const auto links = ratsnest(design, out.netlist, out.layout);
  auto routed = route(out.layout, links);
  out.layout.tracks = std::move(routed.tracks);
  out.layout.unrouted = std::move(routed.unrouted);

  out.diagnostics = check_design(design, library, CheckStage::Compose);
  out.diagnostics.insert(out.diagnostics.end(), routed.diagnostics.begin(), routed.diagnostics.end());
  sort_diagnostics(out.diagnostics);

  out.netlist_json = export_netlist(out.netlist);
  out.board_json = render_layout_json(out.layout);
  out.svg = export_board_svg(out.layout, out.netlist);

  double total = 0;
  for (const auto& t : out.layout.tracks) total += t.length_mm(design.board.pitch_mm);
  json report = {{"design", design.id},
                 {"blocked", false},
                 {"components", out.netlist.components.size()},
                 {"nets", out.netlist.nets.size()},
                 {"links", links.size()},
                 {"routed", out.layout.tracks.size()},
                 {"unrouted", out.layout.unrouted.size()},
                 {"track_length_mm", total},
                 {"diagnostics", diagnostics_array(out.diagnostics)}};
  out.report_json = report.dump(2) + "\n";
  return out;
}

void write_artifacts(const ComposeArtifacts& artifacts, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "netlist.json", artifacts.netlist_json);
  write_file_atomic(dir / "board.json", artifacts.board_json);
  write_file_atomic(dir / "board.svg", artifacts.svg);
  write_file_atomic(dir / "report.json", artifacts.report_json);
}

std::string render_diagnostics_json(const std::vector<Diagnostic>& diags) {
  return diagnostics_array(diags).dump(2) + "\n";
}

std::vector<Diagnostic> parse_diagnostics_json(std::string_view text) {
  std::vector<Diagnostic> out;
  try {
    for (const auto& j : json::parse(text)) {
      const auto sev = severity_from_string(j.at("severity").get<std::string>());
      const auto kind = kind_from_string(j.at("kind").get<std::string>());
      if (!sev || !kind) throw Error(ErrorCode::FormatError, "unknown severity or kind");
      out.push_back({*sev, *kind, j.at("subject").get<std::string>(), j.at("message").get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("malformed diagnostics: ") + e.what());
  }
  return out;
}

std::string render_diagnostics_text(const std::vector<Diagnostic>& diags) {
  std::vector<Diagnostic> sorted = diags;
  sort_diagnostics(sorted);
  std::string out;
  for (const auto& d : sorted) {
    out += std::string(to_string(d.severity)) + " " + std::string(to_string(d.kind)) + " " + d.subject + ": " +
           d.message + "\n";
  }
  return out;
}

}  // namespace bw
