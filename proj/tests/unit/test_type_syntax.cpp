#include <catch_amalgamated.hpp>

#include <random>

#include "blockweave/annotation.hpp"
#include "blockweave/error.hpp"
#include "generators.hpp"

using namespace bw;

namespace {

ProtocolDecl proto(std::string p, std::optional<std::string> sig = {}, std::optional<std::string> alt = {},
                   bool opt = false, std::optional<VoltageRange> level = {}) {
  return ProtocolDecl{std::move(p), std::move(sig), std::move(alt), opt, level};
}

template <typename T>
T as(const Annotation& a) {
  REQUIRE(std::holds_alternative<T>(a));
  return std::get<T>(a);
}

std::size_t syntax_error_position(std::string_view label) {
  try {
    parse_annotation(label);
  } catch (const SyntaxError& e) {
    return e.position();
  }
  FAIL("expected a syntax error for '" << label << "'");
  return 0;
}

}  // namespace

TEST_CASE("inline examples parse to the documented annotations", "[syntax]") {
  CHECK(as<ProtocolDecl>(parse_annotation("#I2C.SDA")) == proto("I2C", "SDA"));
  CHECK(as<ProtocolDecl>(parse_annotation("#I2C.SCL")) == proto("I2C", "SCL"));
  CHECK(as<ProtocolDecl>(parse_annotation("#GPIO-0")) == proto("GPIO", {}, "0"));
  CHECK(as<ProtocolDecl>(parse_annotation("#GPIO-RESET")) == proto("GPIO", {}, "RESET"));
  CHECK(as<ProtocolDecl>(parse_annotation("#GPIO-0!")) == proto("GPIO", {}, "0", true));
  CHECK(as<ProtocolDecl>(parse_annotation("#GPIO0-1")) == proto("GPIO0", {}, "1"));
  CHECK(as<PowerDecl>(parse_annotation("@VOUT_3V")) == PowerDecl{PowerDirection::Vout, {3000, 3000}});
  CHECK(as<PowerDecl>(parse_annotation("@VIN_5V-9V")) == PowerDecl{PowerDirection::Vin, {5000, 9000}});
  CHECK(std::holds_alternative<Ground>(parse_annotation("GND")));
}

TEST_CASE("protocol with signal, alternate name, voltage and optional flag", "[syntax]") {
  CHECK(as<ProtocolDecl>(parse_annotation("#SPI.MOSI-FLASH_3.3V!")) ==
        proto("SPI", "MOSI", "FLASH", true, VoltageRange{3300, 3300}));
  // '.' and '-' may come in either order
  CHECK(as<ProtocolDecl>(parse_annotation("#SPI-FLASH.MOSI")) == proto("SPI", "MOSI", "FLASH"));
  CHECK(as<ProtocolDecl>(parse_annotation("#i2c.sda")) == proto("I2C", "SDA"));
  CHECK(as<ProtocolDecl>(parse_annotation("#GPIO_1.8V-3.6V")) ==
        proto("GPIO", {}, {}, false, VoltageRange{1800, 3600}));
}

TEST_CASE("voltage token forms", "[syntax][voltage]") {
  CHECK(parse_voltage("5V") == VoltageRange{5000, 5000});
  CHECK(parse_voltage("3.3V") == VoltageRange{3300, 3300});
  CHECK(parse_voltage("3V3") == VoltageRange{3300, 3300});
  CHECK(parse_voltage("1V05") == VoltageRange{1050, 1050});
  CHECK(parse_voltage("0.5V") == VoltageRange{500, 500});
  CHECK(parse_voltage("6.5V-12V") == VoltageRange{6500, 12000});
  CHECK(parse_voltage("5v") == VoltageRange{5000, 5000});
  CHECK(parse_voltage("4.5V-4.5V").is_fixed());
}

TEST_CASE("malformed voltages are rejected", "[syntax][voltage]") {
  for (const char* bad : {"", "V", "5", "0V", "-5V", "9V-5V", "5V-", "3.V", "3.3333V", "5V-6V-7V", "1234567V", "5VV"}) {
    INFO(bad);
    CHECK_THROWS_AS(parse_voltage(bad), SyntaxError);
  }
}

TEST_CASE("ground is case-insensitive and other labels are plain", "[syntax]") {
  CHECK(std::holds_alternative<Ground>(parse_annotation("gnd")));
  CHECK(std::holds_alternative<Ground>(parse_annotation("Gnd")));
  CHECK(as<Plain>(parse_annotation("GND2")) == Plain{"GND2"});
  CHECK(as<Plain>(parse_annotation("LED_A")) == Plain{"LED_A"});
  CHECK(as<Plain>(parse_annotation("")) == Plain{""});
}

TEST_CASE("power direction is case-insensitive", "[syntax]") {
  CHECK(as<PowerDecl>(parse_annotation("@vin_3V3")) == PowerDecl{PowerDirection::Vin, {3300, 3300}});
}

TEST_CASE("syntax errors carry the offending position", "[syntax][errors]") {
  CHECK(syntax_error_position("#") == 1);
  CHECK(syntax_error_position("#1WIRE") == 1);
  CHECK(syntax_error_position("#I2C.") == 5);
  CHECK(syntax_error_position("#I2C.SDA.SCL") == 8);
  CHECK(syntax_error_position("#GPIO-A-B") == 7);
  CHECK(syntax_error_position("#GPIO!x") == 6);
  CHECK(syntax_error_position("#GPIO*") == 5);
  CHECK(syntax_error_position("@VCC_5V") == 1);
  CHECK(syntax_error_position("@VIN5V") == 4);
  CHECK(syntax_error_position("#{CLASS=POWER}") == 1);
  CHECK_THROWS_AS(parse_annotation("@VIN_5V!"), SyntaxError);
  CHECK_THROWS_AS(parse_annotation("#I2C\n.SDA"), SyntaxError);
}

TEST_CASE("syntax error message names position and expectation", "[syntax][errors]") {
  try {
    parse_annotation("#I2C.");
    FAIL("no error");
  } catch (const SyntaxError& e) {
    CHECK(e.code() == ErrorCode::SyntaxError);
    CHECK(e.expected() == "signal name");
    CHECK(std::string(e.what()).find("position 5") != std::string::npos);
  }
}

TEST_CASE("global attributes", "[syntax][attrs]") {
  const auto a = parse_global_attrs("#{ CLASS=Peripheral, I2C.ADDR=0x18, SPI.ROLE-FLASH=slave, VENDOR=acme }");
  CHECK(a.block_class == BlockClass::Peripheral);
  CHECK(a.i2c_addr.at("") == 0x18);
  CHECK(a.spi_role.at("FLASH") == SpiRole::Slave);
  REQUIRE(a.extras.size() == 1);
  CHECK(a.extras[0].first == "VENDOR");
  CHECK(render_global_attrs(a) == "#{CLASS=PERIPHERAL, I2C.ADDR=0x18, SPI.ROLE-FLASH=SLAVE, VENDOR=acme}");
  CHECK(parse_global_attrs(render_global_attrs(a)) == a);

  CHECK(parse_global_attrs("#{I2C.ADDR=24}").i2c_addr.at("") == 24);
  CHECK(parse_global_attrs("#{}") == GlobalAttrs{});
  CHECK_THROWS_AS(parse_global_attrs("#{I2C.ADDR=0x80}"), SyntaxError);
  CHECK_THROWS_AS(parse_global_attrs("#{CLASS=POWER, class=compute}"), SyntaxError);
  CHECK_THROWS_AS(parse_global_attrs("#{CLASS=BATTERY}"), SyntaxError);
  CHECK_THROWS_AS(parse_global_attrs("#{SPI.ROLE=BOSS}"), SyntaxError);
  CHECK_THROWS_AS(parse_global_attrs("#{CLASS}"), SyntaxError);
  CHECK_THROWS_AS(parse_global_attrs("{CLASS=POWER}"), SyntaxError);
  CHECK_THROWS_AS(parse_global_attrs("#{CLASS=POWER"), SyntaxError);
}

TEST_CASE("rendering uses the canonical order", "[syntax][render]") {
  CHECK(render_annotation(parse_annotation("#spi-flash.mosi!")) == "#SPI.MOSI-FLASH!");
  CHECK(render_annotation(parse_annotation("@VOUT_3V3")) == "@VOUT_3.3V");
  CHECK(render_annotation(parse_annotation("@VIN_5.000V-9V")) == "@VIN_5V-9V");
  CHECK(render_annotation(parse_annotation("gnd")) == "GND");
  CHECK(render_millivolts(1050) == "1.05V");
}

TEST_CASE("render then parse is the identity on generated annotations", "[syntax][property]") {
  std::mt19937 rng(20241015);
  for (int i = 0; i < 2000; ++i) {
    const Annotation a = bw::testing::random_annotation(rng);
    const std::string text = render_annotation(a);
    INFO(text);
    REQUIRE(parse_annotation(text) == a);
    REQUIRE(render_annotation(parse_annotation(text)) == text);
  }
}

TEST_CASE("parse never crashes on arbitrary short labels", "[syntax][property]") {
  std::mt19937 rng(7);
  const std::string alphabet = "#@.-_!V0123456789ABGND{}=, ";
  for (int i = 0; i < 5000; ++i) {
    std::string s;
    const int n = static_cast<int>(rng() % 12);
    for (int k = 0; k < n; ++k) s += alphabet[rng() % alphabet.size()];
    try {
      const Annotation a = parse_annotation(s);
      // whatever parses re-renders to something that parses identically
      REQUIRE(parse_annotation(render_annotation(a)) == a);
    } catch (const SyntaxError& e) {
      REQUIRE(e.position() <= s.size());
    }
  }
}
