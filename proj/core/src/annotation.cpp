#include "blockweave/annotation.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <set>

#include "blockweave/error.hpp"
#include "text_util.hpp"

namespace bw {

namespace {

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// Reads one <digits>[.<digits>]V | <digits>V<digits> token. `base` is the
// token's offset inside the original input, for error positions.
int parse_single_voltage(std::string_view tok, std::size_t base, std::string_view input) {
  std::size_t i = 0;
  auto read_digits = [&](std::size_t max_len) {
    const std::size_t start = i;
    while (i < tok.size() && is_digit(tok[i])) ++i;
    if (i - start > max_len) throw SyntaxError(base + start, "at most " + std::to_string(max_len) + " digits", input);
    return tok.substr(start, i - start);
  };

  const auto whole = read_digits(6);
  if (whole.empty()) throw SyntaxError(base + i, "voltage digits", input);

  std::string_view frac;
  if (i < tok.size() && tok[i] == '.') {
    ++i;
    frac = read_digits(3);
    if (frac.empty()) throw SyntaxError(base + i, "digits after '.'", input);
    if (i >= tok.size() || (tok[i] != 'V' && tok[i] != 'v')) throw SyntaxError(base + i, "'V'", input);
    ++i;
  } else {
    if (i >= tok.size() || (tok[i] != 'V' && tok[i] != 'v')) throw SyntaxError(base + i, "'V'", input);
    ++i;
    frac = read_digits(3);
  }
  if (i != tok.size()) throw SyntaxError(base + i, "end of voltage", input);

  int whole_v = 0;
  std::from_chars(whole.data(), whole.data() + whole.size(), whole_v);
  int frac_mv = 0;
  if (!frac.empty()) {
    std::from_chars(frac.data(), frac.data() + frac.size(), frac_mv);
    for (std::size_t pad = frac.size(); pad < 3; ++pad) frac_mv *= 10;
  }
  const int mv = whole_v * 1000 + frac_mv;
  if (mv <= 0) throw SyntaxError(base, "a positive voltage", input);
  return mv;
}

VoltageRange parse_voltage_at(std::string_view text, std::size_t base, std::string_view input) {
  if (text.empty()) throw SyntaxError(base, "voltage", input);
  if (text.front() == '-') throw SyntaxError(base, "a positive voltage", input);
  const auto dash = text.find('-');
  if (dash == std::string_view::npos) {
    return VoltageRange::fixed(parse_single_voltage(text, base, input));
  }
  if (text.find('-', dash + 1) != std::string_view::npos) {
    throw SyntaxError(base + text.find('-', dash + 1), "at most one '-' in a voltage range", input);
  }
  const int lo = parse_single_voltage(text.substr(0, dash), base, input);
  const int hi = parse_single_voltage(text.substr(dash + 1), base + dash + 1, input);
  if (lo > hi) throw SyntaxError(base, "range minimum not above maximum", input);
  return {lo, hi};
}

std::size_t read_ident(std::string_view s, std::size_t pos) {
  while (pos < s.size() && is_alnum(s[pos])) ++pos;
  return pos;
}

ProtocolDecl parse_protocol(std::string_view label) {
  ProtocolDecl decl;
  std::size_t pos = 1;
  if (pos < label.size() && label[pos] == '{') {
    throw SyntaxError(pos, "protocol name (global attribute blocks are not net labels)", label);
  }
  if (pos >= label.size() || !is_alpha(label[pos])) throw SyntaxError(pos, "protocol name", label);
  std::size_t end = read_ident(label, pos);
  decl.protocol = to_upper(label.substr(pos, end - pos));
  pos = end;

  while (pos < label.size()) {
    const char c = label[pos];
    if (c == '.' || c == '-') {
      auto& slot = (c == '.') ? decl.signal : decl.alt_name;
      if (slot) throw SyntaxError(pos, c == '.' ? "only one signal name" : "only one alternate name", label);
      end = read_ident(label, pos + 1);
      if (end == pos + 1) throw SyntaxError(pos + 1, c == '.' ? "signal name" : "alternate name", label);
      slot = to_upper(label.substr(pos + 1, end - pos - 1));
      pos = end;
      continue;
    }
    if (c == '_') {
      std::size_t stop = label.find('!', pos + 1);
      if (stop == std::string_view::npos) stop = label.size();
      decl.level = parse_voltage_at(label.substr(pos + 1, stop - pos - 1), pos + 1, label);
      pos = stop;
      if (pos < label.size()) {
        decl.optional_flag = true;
        if (pos + 1 != label.size()) throw SyntaxError(pos + 1, "end of label after '!'", label);
        ++pos;
      }
      break;
    }
    if (c == '!') {
      if (pos + 1 != label.size()) throw SyntaxError(pos + 1, "end of label after '!'", label);
      decl.optional_flag = true;
      ++pos;
      break;
    }
    throw SyntaxError(pos, "'.', '-', '_', '!' or end of label", label);
  }
  return decl;
}

PowerDecl parse_power(std::string_view label) {
  std::size_t pos = 1;
  std::size_t end = pos;
  while (end < label.size() && is_alpha(label[end])) ++end;
  const std::string word = to_upper(label.substr(pos, end - pos));
  PowerDecl decl;
  if (word == "VIN") {
    decl.direction = PowerDirection::Vin;
  } else if (word == "VOUT") {
    decl.direction = PowerDirection::Vout;
  } else {
    throw SyntaxError(pos, "VIN or VOUT", label);
  }
  pos = end;
  if (pos >= label.size() || label[pos] != '_') throw SyntaxError(pos, "'_' followed by a voltage", label);
  ++pos;
  if (const auto bang = label.find('!', pos); bang != std::string_view::npos) {
    throw SyntaxError(bang, "voltage ('!' is only valid on protocol declarations)", label);
  }
  decl.range = parse_voltage_at(label.substr(pos), pos, label);
  return decl;
}

int parse_i2c_address(std::string_view value, std::size_t base, std::string_view input) {
  int addr = -1;
  std::string_view digits = value;
  int radix = 10;
  if (digits.size() > 2 && digits[0] == '0' && (digits[1] == 'x' || digits[1] == 'X')) {
    digits.remove_prefix(2);
    radix = 16;
  }
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), addr, radix);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
    throw SyntaxError(base, "an I2C address such as 0x18", input);
  }
  if (addr < 0 || addr > 0x7F) throw SyntaxError(base, "a 7-bit I2C address (0x00-0x7F)", input);
  return addr;
}

// Splits "I2C.ADDR-X" into ("I2C.ADDR", "X"); returns nullopt unless the key
// is `stem` or `stem-<alt>`.
std::optional<std::string> scoped_suffix(std::string_view key, std::string_view stem) {
  if (key.substr(0, stem.size()) != stem) return std::nullopt;
  const auto rest = key.substr(stem.size());
  if (rest.empty()) return std::string{};
  if (rest.size() > 1 && rest[0] == '-') return std::string(rest.substr(1));
  return std::nullopt;
}

}  // namespace

std::string_view to_string(BlockClass c) {
  switch (c) {
    case BlockClass::Power: return "POWER";
    case BlockClass::Regulator: return "REGULATOR";
    case BlockClass::Compute: return "COMPUTE";
    case BlockClass::Peripheral: return "PERIPHERAL";
  }
  return "?";
}

std::string_view to_string(SpiRole r) { return r == SpiRole::Master ? "MASTER" : "SLAVE"; }
std::string_view to_string(PowerDirection d) { return d == PowerDirection::Vin ? "VIN" : "VOUT"; }

std::optional<BlockClass> block_class_from_string(std::string_view s) {
  const auto up = to_upper(s);
  if (up == "POWER") return BlockClass::Power;
  if (up == "REGULATOR") return BlockClass::Regulator;
  if (up == "COMPUTE") return BlockClass::Compute;
  if (up == "PERIPHERAL") return BlockClass::Peripheral;
  return std::nullopt;
}

VoltageRange parse_voltage(std::string_view text) { return parse_voltage_at(text, 0, text); }

Annotation parse_annotation(std::string_view label) {
  if (const auto nl = label.find_first_of("\r\n"); nl != std::string_view::npos) {
    throw SyntaxError(nl, "a single-line label", label);
  }
  if (iequals(label, "GND")) return Ground{};
  if (!label.empty() && label.front() == '#') return parse_protocol(label);
  if (!label.empty() && label.front() == '@') return parse_power(label);
  return Plain{std::string(label)};
}

GlobalAttrs parse_global_attrs(std::string_view comment) {
  if (comment.size() < 2 || comment.substr(0, 2) != "#{") throw SyntaxError(0, "'#{'", comment);
  if (comment.back() != '}' || comment.size() < 3) throw SyntaxError(comment.size(), "'}'", comment);

  GlobalAttrs attrs;
  const std::string_view interior = comment.substr(2, comment.size() - 3);
  if (trim(interior).empty()) return attrs;

  std::set<std::string> seen;
  std::size_t start = 0;
  while (start <= interior.size()) {
    std::size_t comma = interior.find(',', start);
    if (comma == std::string_view::npos) comma = interior.size();
    const std::size_t base = 2 + start;
    const std::string_view item = interior.substr(start, comma - start);
    const auto eq = item.find('=');
    if (trim(item).empty() || eq == std::string_view::npos) throw SyntaxError(base, "KEY=VALUE", comment);

    const std::string key = to_upper(trim(item.substr(0, eq)));
    const std::string_view value = trim(item.substr(eq + 1));
    const std::size_t value_pos = base + eq + 1;
    if (key.empty() || !std::all_of(key.begin(), key.end(), [](char c) {
          return is_alnum(c) || c == '.' || c == '-' || c == '_';
        })) {
      throw SyntaxError(base, "attribute key", comment);
    }
    if (value.empty()) throw SyntaxError(value_pos, "attribute value", comment);
    if (!seen.insert(key).second) throw SyntaxError(base, "unique key (duplicate '" + key + "')", comment);

    if (key == "CLASS") {
      const auto cls = block_class_from_string(value);
      if (!cls) throw SyntaxError(value_pos, "POWER, REGULATOR, COMPUTE or PERIPHERAL", comment);
      attrs.block_class = cls;
    } else if (auto alt = scoped_suffix(key, "I2C.ADDR")) {
      attrs.i2c_addr[*alt] = parse_i2c_address(value, value_pos, comment);
    } else if (auto alt = scoped_suffix(key, "SPI.ROLE")) {
      const auto role = to_upper(value);
      if (role == "MASTER") {
        attrs.spi_role[*alt] = SpiRole::Master;
      } else if (role == "SLAVE") {
        attrs.spi_role[*alt] = SpiRole::Slave;
      } else {
        throw SyntaxError(value_pos, "MASTER or SLAVE", comment);
      }
    } else {
      attrs.extras.emplace_back(key, std::string(value));
    }
    start = comma + 1;
  }
  return attrs;
}

std::string render_millivolts(int mv) {
  std::string out = std::to_string(mv / 1000);
  if (const int frac = mv % 1000; frac != 0) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "%03d", frac);
    std::string digits(buf);
    while (digits.back() == '0') digits.pop_back();
    out += "." + digits;
  }
  return out + "V";
}

std::string render_voltage(const VoltageRange& r) {
  if (r.is_fixed()) return render_millivolts(r.min_mv);
  return render_millivolts(r.min_mv) + "-" + render_millivolts(r.max_mv);
}

std::string render_annotation(const Annotation& a) {
  struct Renderer {
    std::string operator()(const ProtocolDecl& p) const {
      std::string out = "#" + p.protocol;
      if (p.signal) out += "." + *p.signal;
      if (p.alt_name) out += "-" + *p.alt_name;
      if (p.level) out += "_" + render_voltage(*p.level);
      if (p.optional_flag) out += "!";
      return out;
    }
    std::string operator()(const PowerDecl& p) const {
      return "@" + std::string(to_string(p.direction)) + "_" + render_voltage(p.range);
    }
    std::string operator()(const Ground&) const { return "GND"; }
    std::string operator()(const Plain& p) const { return p.name; }
  };
  return std::visit(Renderer{}, a);
}

std::string render_global_attrs(const GlobalAttrs& attrs) {
  std::vector<std::string> items;
  if (attrs.block_class) items.push_back("CLASS=" + std::string(to_string(*attrs.block_class)));
  for (const auto& [alt, addr] : attrs.i2c_addr) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "0x%02X", addr);
    items.push_back("I2C.ADDR" + (alt.empty() ? "" : "-" + alt) + "=" + buf);
  }
  for (const auto& [alt, role] : attrs.spi_role) {
    items.push_back("SPI.ROLE" + (alt.empty() ? "" : "-" + alt) + "=" + std::string(to_string(role)));
  }
  for (const auto& [k, v] : attrs.extras) items.push_back(k + "=" + v);
  return "#{" + join(items, ", ") + "}";
}

}  // namespace bw
