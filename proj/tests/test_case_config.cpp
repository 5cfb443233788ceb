#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "gridport/case_config.hpp"
#include "gridport/network.hpp"

using namespace gridport;

namespace {

const char* kMachineCase = R"({
  "name": "machine_line",
  "buses": [
    {"id": "inf", "kind": "slack"},
    {"id": "b1", "kind": "pv", "v_set": 1.0, "p_gen": 0.5, "shunt_c": 0.01}
  ],
  "branches": [
    {"from": "inf", "to": "b1", "l": 0.4}
  ],
  "apparatus": [
    {"id": "sg1", "type": "sg", "bus": "b1",
     "params": {"J": 7.0, "K_D": 0.2, "R": 0.01, "L": 0.15}}
  ],
  "sweeps": [
    {"parameter": "branches[0].r", "start": 0.0, "stop": 0.3, "points": 7}
  ],
  "scenarios": [
    {"name": "bump", "t_end": 1.0, "record_every": 20,
     "probes": ["sg1.omega"],
     "events": [{"time": 0.1, "input": "sg1.T_m", "delta": 0.01}]}
  ]
})";

}  // namespace

TEST_CASE("minimal config parses with documented defaults") {
  const CaseConfig cfg = parse_config_text(kMachineCase, "machine_line.json");
  CHECK(cfg.name == "machine_line");
  CHECK(cfg.base_frequency_hz == doctest::Approx(60.0));
  CHECK(cfg.buses.size() == 2);
  CHECK(cfg.buses[0].kind == BusKind::slack);
  CHECK(cfg.buses[0].v_set == doctest::Approx(1.0));
  CHECK(cfg.buses[0].shunt_c == doctest::Approx(kDefaultShuntC));
  CHECK(cfg.buses[1].shunt_c == doctest::Approx(0.01));
  CHECK(cfg.branches[0].r == doctest::Approx(0.0));
  CHECK(cfg.branches[0].tap == doctest::Approx(1.0));
  REQUIRE(cfg.apparatus.size() == 1);
  const auto& sg = std::get<SGParams>(cfg.apparatus[0].params);
  CHECK(sg.J == doctest::Approx(7.0));
  CHECK(sg.K_D == doctest::Approx(0.2));
  CHECK(sg.omega_base == doctest::Approx(2.0 * kPi * 60.0));
  REQUIRE(cfg.scenarios.size() == 1);
  CHECK(cfg.scenarios[0].dt == doctest::Approx(5e-5));
  CHECK(cfg.scenarios[0].record_every == 20);
  CHECK(cfg.scenarios[0].events[0].is_input);
  CHECK(cfg.scenarios[0].events[0].is_delta);
}

TEST_CASE("unknown keys are rejected with their path") {
  std::string text = kMachineCase;
  SUBCASE("top level") {
    text.insert(text.rfind('}'), R"(, "extra": 1)");
    CHECK_THROWS_WITH_AS((void)parse_config_text(text, "t"), doctest::Contains("extra"),
                         ConfigError);
  }
  SUBCASE("inside a bus") {
    const std::string bad = R"({"id": "b1", "kind": "pv", "volt": 1.0})";
    text.replace(text.find(R"({"id": "b1", "kind": "pv", "v_set": 1.0, "p_gen": 0.5, "shunt_c": 0.01})"),
                 std::string(R"({"id": "b1", "kind": "pv", "v_set": 1.0, "p_gen": 0.5, "shunt_c": 0.01})").size(),
                 bad);
    CHECK_THROWS_WITH_AS((void)parse_config_text(text, "t"),
                         doctest::Contains("buses[1].volt"), ConfigError);
  }
  SUBCASE("inside apparatus params") {
    const std::string old = R"("params": {"J": 7.0)";
    text.replace(text.find(old), old.size(), R"("params": {"JJ": 7.0)");
    CHECK_THROWS_WITH_AS((void)parse_config_text(text, "t"),
                         doctest::Contains("apparatus[0].params.JJ"), ConfigError);
  }
}

TEST_CASE("dangling references name both ends") {
  std::string text = kMachineCase;
  SUBCASE("apparatus bus") {
    const std::string old = R"("bus": "b1",)";
    text.replace(text.find(old), old.size(), R"("bus": "b9",)");
    bool thrown = false;
    try {
      (void)parse_config_text(text, "t");
    } catch (const ConfigError& e) {
      thrown = true;
      const std::string msg = e.what();
      CHECK(msg.find("sg1") != std::string::npos);
      CHECK(msg.find("b9") != std::string::npos);
    }
    CHECK(thrown);
  }
  SUBCASE("branch endpoint") {
    const std::string old = R"("to": "b1")";
    text.replace(text.find(old), old.size(), R"("to": "z9")");
    bool thrown = false;
    try {
      (void)parse_config_text(text, "t");
    } catch (const ConfigError& e) {
      thrown = true;
      const std::string msg = e.what();
      CHECK(msg.find("branches[0]") != std::string::npos);
      CHECK(msg.find("z9") != std::string::npos);
    }
    CHECK(thrown);
  }
}

TEST_CASE("dump round-trips byte for byte") {
  const CaseConfig cfg = parse_config_text(kMachineCase, "t");
  const std::string once = dump_config(cfg);
  const CaseConfig again = parse_config_text(once, "t2");
  CHECK(dump_config(again) == once);
  // the resolved dump spells out applied defaults
  CHECK(once.find("\"r\"") != std::string::npos);
  CHECK(once.find("\"base_frequency_hz\"") != std::string::npos);
}

TEST_CASE("parameter paths resolve and apply") {
  CaseConfig cfg = parse_config_text(kMachineCase, "t");
  apply_parameter(cfg, "branches[0].r", 0.25);
  CHECK(cfg.branches[0].r == doctest::Approx(0.25));
  apply_parameter(cfg, "apparatus[sg1].K_D", 2.0);
  CHECK(std::get<SGParams>(cfg.apparatus[0].params).K_D == doctest::Approx(2.0));
  apply_parameter(cfg, "buses[b1].shunt_c", 0.02);
  CHECK(cfg.buses[1].shunt_c == doctest::Approx(0.02));

  CHECK_THROWS_WITH_AS(apply_parameter(cfg, "apparatus[zz].K_D", 1.0),
                       doctest::Contains("zz"), ConfigError);
  CHECK_THROWS_WITH_AS(apply_parameter(cfg, "branches[9].r", 1.0),
                       doctest::Contains("branches[9]"), ConfigError);
  CHECK_THROWS_WITH_AS(apply_parameter(cfg, "apparatus[sg1].C_dc", 1.0),
                       doctest::Contains("C_dc"), ConfigError);
  CHECK_THROWS_WITH_AS(apply_parameter(cfg, "frobnicate", 1.0),
                       doctest::Contains("frobnicate"), ConfigError);
}

TEST_CASE("sweeps and scenarios are cross-checked at parse time") {
  std::string text = kMachineCase;
  SUBCASE("sweep path must resolve") {
    const std::string old = R"("parameter": "branches[0].r")";
    text.replace(text.find(old), old.size(), R"("parameter": "branches[3].r")");
    CHECK_THROWS_WITH_AS((void)parse_config_text(text, "t"),
                         doctest::Contains("branches[3]"), ConfigError);
  }
  SUBCASE("event input must name a real port") {
    const std::string old = R"("input": "sg1.T_m")";
    text.replace(text.find(old), old.size(), R"("input": "sg9.T_m")");
    CHECK_THROWS_WITH_AS((void)parse_config_text(text, "t"), doctest::Contains("sg9"),
                         ConfigError);
  }
  SUBCASE("events may not outlive the scenario") {
    const std::string old = R"("time": 0.1)";
    text.replace(text.find(old), old.size(), R"("time": 5.0)");
    CHECK_THROWS_AS((void)parse_config_text(text, "t"), ConfigError);
  }
  SUBCASE("an event is either a parameter change or an input step") {
    const std::string old = R"({"time": 0.1, "input": "sg1.T_m", "delta": 0.01})";
    text.replace(text.find(old), old.size(),
                 R"({"time": 0.1, "input": "sg1.T_m", "set": "branches[0].r", "value": 1.0})");
    CHECK_THROWS_AS((void)parse_config_text(text, "t"), ConfigError);
  }
  SUBCASE("sweeps need at least two points") {
    const std::string old = R"("points": 7)";
    text.replace(text.find(old), old.size(), R"("points": 1)");
    CHECK_THROWS_AS((void)parse_config_text(text, "t"), ConfigError);
  }
}

TEST_CASE("syntax errors carry the line number") {
  const std::string broken = "{\n  \"name\": \"x\",\n  \"base_frequency_hz\" 60\n}\n";
  CHECK_THROWS_WITH_AS((void)parse_config_text(broken, "broken.json"),
                       doctest::Contains("line 3"), ConfigError);
}

TEST_CASE("duplicate ids are rejected") {
  std::string text = kMachineCase;
  SUBCASE("buses") {
    const std::string old = R"("id": "inf", "kind": "slack")";
    text.replace(text.find(old), old.size(), R"("id": "b1", "kind": "slack")");
    CHECK_THROWS_WITH_AS((void)parse_config_text(text, "t"), doctest::Contains("duplicate"),
                         ConfigError);
  }
  SUBCASE("scenario names") {
    const std::string old = R"("scenarios": [)";
    const std::string extra =
        R"("scenarios": [{"name": "bump", "t_end": 0.5, "events": []}, )";
    text.replace(text.find(old), old.size(), extra);
    CHECK_THROWS_WITH_AS((void)parse_config_text(text, "t"), doctest::Contains("bump"),
                         ConfigError);
  }
}

TEST_CASE("type mismatches name the key") {
  std::string text = kMachineCase;
  const std::string old = R"("v_set": 1.0)";
  text.replace(text.find(old), old.size(), R"("v_set": "one")");
  CHECK_THROWS_WITH_AS((void)parse_config_text(text, "t"),
                       doctest::Contains("buses[1].v_set"), ConfigError);
}

TEST_CASE("configs load from disk and missing files are reported") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "gridport_cfg_test";
  fs::create_directories(dir);
  const fs::path file = dir / "m.json";
  {
    std::ofstream out(file);
    out << kMachineCase;
  }
  const CaseConfig cfg = parse_config(file.string());
  CHECK(cfg.name == "machine_line");
  CHECK_THROWS_AS((void)parse_config((dir / "absent.json").string()), ConfigError);
  fs::remove_all(dir);
}
