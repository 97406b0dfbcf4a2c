#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bw {

enum class Severity { Error, Warning };

enum class DiagnosticKind {
  ProtocolMismatch,
  VoltageMismatch,
  I2cAddressConflict,
  SpiRoleConflict,
  GpioExclusivity,
  MissingRequiredInterface,
  BoundaryViolation,
  Overlap,
  Unroutable,
  SyntaxError,
  PortError,
  ClassificationError,
  PadNetMismatch,
  LogicLevelMismatch,
  NotFound,
  ErcViolation,
  DuplicateBlock,
};

std::string_view to_string(Severity s);
std::string_view to_string(DiagnosticKind k);
std::optional<Severity> severity_from_string(std::string_view s);
std::optional<DiagnosticKind> kind_from_string(std::string_view s);

// One validation finding. `subject` is a slash-separated path to the entity
// the finding is about, e.g. "inst/temp", "inst/mcu/port/I2C",
// "edge/mcu:I2C--temp:I2C", "bus/mcu:I2C/i2c/0x18", "place/temp".
struct Diagnostic {
  Severity severity = Severity::Error;
  DiagnosticKind kind = DiagnosticKind::NotFound;
  std::string subject;
  std::string message;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

// Total order: subject, then kind name, then severity and message.
bool diagnostic_less(const Diagnostic& a, const Diagnostic& b);
void sort_diagnostics(std::vector<Diagnostic>& diags);
bool has_errors(const std::vector<Diagnostic>& diags);

// Subject path builders shared by every module so paths stay consistent.
namespace subject {
std::string instance(std::string_view iid);
std::string port(std::string_view iid, std::string_view port);
std::string placement(std::string_view iid);
std::string block(std::string_view block_id);
std::string block_net(std::string_view block_id, std::string_view net_id);
}  // namespace subject

}  // namespace bw
