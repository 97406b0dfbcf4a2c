#include "blockweave/diagnostic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <tuple>

#include "blockweave/error.hpp"
#include "text_util.hpp"

namespace bw {

namespace {

constexpr std::array kKindNames = {
    std::pair{DiagnosticKind::ProtocolMismatch, std::string_view{"ProtocolMismatch"}},
    std::pair{DiagnosticKind::VoltageMismatch, std::string_view{"VoltageMismatch"}},
    std::pair{DiagnosticKind::I2cAddressConflict, std::string_view{"I2cAddressConflict"}},
    std::pair{DiagnosticKind::SpiRoleConflict, std::string_view{"SpiRoleConflict"}},
    std::pair{DiagnosticKind::GpioExclusivity, std::string_view{"GpioExclusivity"}},
    std::pair{DiagnosticKind::MissingRequiredInterface, std::string_view{"MissingRequiredInterface"}},
    std::pair{DiagnosticKind::BoundaryViolation, std::string_view{"BoundaryViolation"}},
    std::pair{DiagnosticKind::Overlap, std::string_view{"Overlap"}},
    std::pair{DiagnosticKind::Unroutable, std::string_view{"Unroutable"}},
    std::pair{DiagnosticKind::SyntaxError, std::string_view{"SyntaxError"}},
    std::pair{DiagnosticKind::PortError, std::string_view{"PortError"}},
    std::pair{DiagnosticKind::ClassificationError, std::string_view{"ClassificationError"}},
    std::pair{DiagnosticKind::PadNetMismatch, std::string_view{"PadNetMismatch"}},
    std::pair{DiagnosticKind::LogicLevelMismatch, std::string_view{"LogicLevelMismatch"}},
    std::pair{DiagnosticKind::NotFound, std::string_view{"NotFound"}},
    std::pair{DiagnosticKind::ErcViolation, std::string_view{"ErcViolation"}},
    std::pair{DiagnosticKind::DuplicateBlock, std::string_view{"DuplicateBlock"}},
};

}  // namespace

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::PortError: return "PortError";
    case ErrorCode::ClassificationError: return "ClassificationError";
    case ErrorCode::BundleError: return "BundleError";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::StructureError: return "StructureError";
    case ErrorCode::MatNotEmpty: return "MatNotEmpty";
    case ErrorCode::DefError: return "DefError";
    case ErrorCode::ComposeError: return "ComposeError";
    case ErrorCode::UnsetSupply: return "UnsetSupply";
    case ErrorCode::UnplacedInstance: return "UnplacedInstance";
    case ErrorCode::StaleRevision: return "StaleRevision";
    case ErrorCode::BadRequest: return "BadRequest";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::Io: return "Io";
  }
  return "?";
}

SyntaxError::SyntaxError(std::size_t position, std::string expected, std::string_view input)
    : Error(ErrorCode::SyntaxError,
            "syntax error at position " + std::to_string(position) + " in '" + std::string(input) +
                "': expected " + expected),
      position_(position),
      expected_(std::move(expected)) {}

std::string_view to_string(Severity s) { return s == Severity::Error ? "error" : "warning"; }

std::string_view to_string(DiagnosticKind k) {
  for (const auto& [kind, name] : kKindNames) {
    if (kind == k) return name;
  }
  return "?";
}

std::optional<Severity> severity_from_string(std::string_view s) {
  if (s == "error") return Severity::Error;
  if (s == "warning") return Severity::Warning;
  return std::nullopt;
}

std::optional<DiagnosticKind> kind_from_string(std::string_view s) {
  for (const auto& [kind, name] : kKindNames) {
    if (name == s) return kind;
  }
  return std::nullopt;
}

bool diagnostic_less(const Diagnostic& a, const Diagnostic& b) {
  return std::tuple{std::string_view(a.subject), to_string(a.kind), a.severity, std::string_view(a.message)} <
         std::tuple{std::string_view(b.subject), to_string(b.kind), b.severity, std::string_view(b.message)};
}

void sort_diagnostics(std::vector<Diagnostic>& diags) {
  std::sort(diags.begin(), diags.end(), diagnostic_less);
}

bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

namespace subject {
std::string instance(std::string_view iid) { return "inst/" + std::string(iid); }
std::string port(std::string_view iid, std::string_view port) {
  return "inst/" + std::string(iid) + "/port/" + std::string(port);
}
std::string placement(std::string_view iid) { return "place/" + std::string(iid); }
std::string block(std::string_view block_id) { return "block/" + std::string(block_id); }
std::string block_net(std::string_view block_id, std::string_view net_id) {
  return "block/" + std::string(block_id) + "/net/" + std::string(net_id);
}
}  // namespace subject

std::string format_mm(double v) {
  const double rounded = std::round(v * 1000.0) / 1000.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", rounded == 0.0 ? 0.0 : rounded);
  std::string out(buf);
  while (!out.empty() && out.back() == '0') out.pop_back();
  if (!out.empty() && out.back() == '.') out.pop_back();
  return out;
}

}  // namespace bw
