#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "blockweave/board.hpp"
#include "blockweave/composer.hpp"
#include "blockweave/design.hpp"
#include "blockweave/diagnostic.hpp"

namespace bw {

class Library;

// Everything `compose` produces for one design.
struct ComposeArtifacts {
  MergedNetlist netlist;
  BoardLayout layout;  // tracks and unrouted links filled in
  std::vector<Diagnostic> diagnostics;  // warnings from checking plus routing failures, sorted
  std::string netlist_json;
  std::string board_json;
  std::string svg;
  std::string report_json;
};

// compose_schematic, build_layout, ratsnest and route in sequence. Throws
// BlockedError / bw::Error as the underlying steps do.
ComposeArtifacts compose_design(const Design& design, const Library& library);

// Writes netlist.json, board.json, board.svg and report.json into `dir`.
void write_artifacts(const ComposeArtifacts& artifacts, const std::filesystem::path& dir);

// Stable machine form: a JSON array of {severity, kind, subject, message},
// sorted by subject then kind.
std::string render_diagnostics_json(const std::vector<Diagnostic>& diags);
std::vector<Diagnostic> parse_diagnostics_json(std::string_view text);
// One "<severity> <kind> <subject>: <message>" line per diagnostic.
std::string render_diagnostics_text(const std::vector<Diagnostic>& diags);

}  // namespace bw
