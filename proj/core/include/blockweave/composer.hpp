#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "blockweave/block.hpp"
#include "blockweave/design.hpp"
#include "blockweave/diagnostic.hpp"
#include "blockweave/error.hpp"

namespace bw {

class Library;

enum class NetOrigin { BlockLocal, Rail, Ground, Bus };

std::string_view to_string(NetOrigin o);

struct ComponentRef {
  std::string block;
  std::string part;  // refdes inside the source block

  friend bool operator==(const ComponentRef&, const ComponentRef&) = default;
};

struct MergedNetlist {
  std::map<std::string, ComponentRef> components;
  std::map<std::string, std::set<PinRef>> nets;
  std::map<std::string, NetOrigin> provenance;

  friend bool operator==(const MergedNetlist&, const MergedNetlist&) = default;
};

// Raised when composition is blocked by outstanding Error diagnostics.
class BlockedError : public Error {
 public:
  BlockedError(ErrorCode code, const std::string& what, std::vector<Diagnostic> diagnostics)
      : Error(code, what), diagnostics_(std::move(diagnostics)) {}

  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

// 1-based ordinals from sorted instance ids.
std::map<std::string, int, std::less<>> instance_ordinals(const Design& design);
std::string prefix_for(int ordinal);  // "B<k>_"

// Merges every instance into one netlist: prefixed block-local nets, one
// global GND, a VRAIL_<k> per mat and <PROTO>_<n>_<SIGNAL> per bus signal.
// Throws BlockedError(ComposeError) if check_design reports errors and
// BlockedError(UnsetSupply) for range-output supplies with no setting.
MergedNetlist compose_schematic(const Design& design, const Library& library);

// Netlist File Format: {"components": {...}, "nets": {...},
// "provenance": {...}}, sorted keys, LF endings.
std::string export_netlist(const MergedNetlist& netlist);
void write_netlist(const MergedNetlist& netlist, const std::filesystem::path& path);
MergedNetlist parse_netlist(std::string_view text);

}  // namespace bw
