#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "blockweave/block.hpp"
#include "blockweave/composer.hpp"
#include "blockweave/engine.hpp"
#include "blockweave/error.hpp"
#include "blockweave/library.hpp"
#include "blockweave/pipeline.hpp"
#include "blockweave/registry.hpp"

namespace bw::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string defs;
  std::string library;
  std::vector<std::string> bundles;
  std::string bundle;
  std::string design_file;
  std::string format = "text";
  std::string stage = "compose";
  std::string out_dir;
  bool overwrite = false;
};

std::string read_design(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ProtocolRegistry registry_for(const Options& o) {
  return o.defs.empty() ? ProtocolRegistry::builtins() : load_protocol_registry(o.defs);
}

fs::path library_dir(const Options& o) {
  if (!o.library.empty()) return o.library;
  if (const char* env = std::getenv("BW_DATA_DIR"); env && *env) return fs::path(env) / "library";
  throw Error(ErrorCode::BadRequest, "no library: pass --library or set BW_DATA_DIR");
}

void print_diagnostics(const std::vector<Diagnostic>& diags, const std::string& format, std::ostream& out) {
  out << (format == "machine" ? render_diagnostics_json(diags) : render_diagnostics_text(diags));
}

int status_for(const std::vector<Diagnostic>& diags) { return has_errors(diags) ? kErrors : kClean; }

// Loads a design file through the engine so the same structural rules as
// the service apply. Edges refused during replay are reported, not fatal.
std::vector<Diagnostic> load(Engine& engine, const Design& file) {
  return load_design(engine, file).rejected;
}

Design shell_of(const Design& file) {
  Design shell;
  shell.id = file.id;
  shell.name = file.name;
  return shell;
}

int cmd_import(const Options& o, std::ostream& out) {
  Library lib(library_dir(o), registry_for(o));
  int status = kClean;
  for (const auto& b : o.bundles) {
    const auto report = lib.import_path(b, o.overwrite);
    out << b << ": " << (report.accepted ? "accepted" : "rejected") << "\n";
    print_diagnostics(report.diagnostics, o.format, out);
    if (!report.accepted) status = kErrors;
  }
  return status;
}

int cmd_validate(const Options& o, std::ostream& out) {
  const auto files = read_bundle(o.bundle);
  const auto result = validate_bundle(files.bundle, registry_for(o));
  if (o.format != "machine") out << files.bundle.id << ": " << (result.report.accepted ? "valid" : "invalid") << "\n";
  print_diagnostics(result.report.diagnostics, o.format, out);
  return result.report.accepted ? kClean : kErrors;
}

int cmd_check(const Options& o, std::ostream& out) {
  Library lib(library_dir(o), registry_for(o));
  const Design file = parse_design(read_design(o.design_file));
  Engine engine(lib, shell_of(file));
  auto diags = load(engine, file);
  const auto stage = o.stage == "edit" ? CheckStage::Edit : CheckStage::Compose;
  const auto checked = check_design(engine.design(), lib, stage);
  diags.insert(diags.end(), checked.begin(), checked.end());
  sort_diagnostics(diags);
  print_diagnostics(diags, o.format, out);
  return status_for(diags);
}

int cmd_compose(const Options& o, std::ostream& out) {
  Library lib(library_dir(o), registry_for(o));
  const Design file = parse_design(read_design(o.design_file));
  Engine engine(lib, shell_of(file));
  const auto rejected = load(engine, file);
  const fs::path dir = o.out_dir;
  try {
    if (!rejected.empty()) throw BlockedError(ErrorCode::ComposeError, "design file has rejected edges", rejected);
    const auto artifacts = compose_design(engine.design(), lib);
    write_artifacts(artifacts, dir);
    out << "wrote " << (dir / "netlist.json").string() << ", board.json, board.svg, report.json\n";
    print_diagnostics(artifacts.diagnostics, o.format, out);
    return status_for(artifacts.diagnostics);
  } catch (const BlockedError& e) {
    fs::create_directories(dir);
    const nlohmann::json report = {{"design", file.id},
                                   {"blocked", true},
                                   {"error", to_string(e.code())},
                                   {"message", e.what()},
                                   {"diagnostics", nlohmann::json::parse(render_diagnostics_json(e.diagnostics()))}};
    std::ofstream(dir / "report.json") << report.dump(2) << "\n";
    out << "compose blocked: " << e.what() << "\n";
    print_diagnostics(e.diagnostics(), o.format, out);
    return kErrors;
  }
}

int cmd_protocols(const Options& o, std::ostream& out) {
  out << render_protocol_registry(registry_for(o));
  return kClean;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Typed hardware block composition"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--defs", o.defs, "Protocol definitions file")->check(CLI::ExistingFile);
  const std::vector<std::string> formats{"text", "machine"};

  auto* imp = app.add_subcommand("import", "Validate bundles and store them in a library");
  imp->add_option("bundles", o.bundles, "Bundle directories or block.json files")->required();
  imp->add_option("--library", o.library, "Library directory (default: $BW_DATA_DIR/library)");
  imp->add_flag("--overwrite", o.overwrite, "Replace blocks with the same id");
  imp->add_option("--format", o.format)->check(CLI::IsMember(formats));

  auto* val = app.add_subcommand("validate", "Validate a bundle without storing it");
  val->add_option("bundle", o.bundle)->required();
  val->add_option("--format", o.format)->check(CLI::IsMember(formats));

  auto* chk = app.add_subcommand("check", "Check a design file");
  chk->add_option("design", o.design_file)->required()->check(CLI::ExistingFile);
  chk->add_option("--library", o.library);
  chk->add_option("--format", o.format)->check(CLI::IsMember(formats));
  chk->add_option("--stage", o.stage, "edit or compose")->check(CLI::IsMember({"edit", "compose"}));

  auto* cmp = app.add_subcommand("compose", "Compose, route and export a design file");
  cmp->add_option("design", o.design_file)->required()->check(CLI::ExistingFile);
  cmp->add_option("--library", o.library);
  cmp->add_option("--out", o.out_dir)->required();
  cmp->add_option("--format", o.format)->check(CLI::IsMember(formats));

  auto* prot = app.add_subcommand("protocols", "Print the effective protocol registry");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kClean;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kUsage;
  }

  try {
    if (*imp) return cmd_import(o, out);
    if (*val) return cmd_validate(o, out);
    if (*chk) return cmd_check(o, out);
    if (*cmp) return cmd_compose(o, out);
    if (*prot) return cmd_protocols(o, out);
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace bw::cli
