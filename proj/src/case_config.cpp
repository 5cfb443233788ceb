#include "gridport/case_config.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "gridport/errors.hpp"

namespace gridport {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* k) { return it.key() == k; }) == allowed.end()) {
      fail("config key " + join(path, it.key()) + " is not recognized");
    }
  }
}

const json* find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double want_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail("config key " + path + " must be a number");
  return j.get<double>();
}

double number_or(const json& obj, const char* key, const std::string& path, double fallback) {
  const json* j = find(obj, key);
  return j == nullptr ? fallback : want_number(*j, join(path, key));
}

int want_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail("config key " + path + " must be an integer");
  return j.get<int>();
}

std::string want_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail("config key " + path + " must be a string");
  return j.get<std::string>();
}

const json& want_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail("config key " + path + " must be an object");
  return j;
}

const json& want_array(const json& j, const std::string& path) {
  if (!j.is_array()) fail("config key " + path + " must be an array");
  return j;
}

BusKind bus_kind_from(const std::string& text, const std::string& path) {
  if (text == "slack") return BusKind::slack;
  if (text == "pv") return BusKind::pv;
  if (text == "pq") return BusKind::pq;
  fail("config key " + path + " must be one of slack, pv, pq (got \"" + text + "\")");
}

std::string bus_kind_name(BusKind kind) {
  switch (kind) {
    case BusKind::slack: return "slack";
    case BusKind::pv: return "pv";
    default: return "pq";
  }
}

BusConfig parse_bus(const json& j, const std::string& path) {
  const json& obj = want_object(j, path);
  check_keys(obj, path,
             {"id", "kind", "v_set", "theta_set", "p_gen", "q_gen", "p_load", "q_load",
              "shunt_c"});
  BusConfig bus;
  const json* id = find(obj, "id");
  if (id == nullptr) fail("config key " + join(path, "id") + " is required");
  bus.id = want_string(*id, join(path, "id"));
  if (const json* kind = find(obj, "kind")) {
    bus.kind = bus_kind_from(want_string(*kind, join(path, "kind")), join(path, "kind"));
  }
  bus.v_set = number_or(obj, "v_set", path, bus.v_set);
  bus.theta_set = number_or(obj, "theta_set", path, bus.theta_set);
  bus.p_gen = number_or(obj, "p_gen", path, bus.p_gen);
  bus.q_gen = number_or(obj, "q_gen", path, bus.q_gen);
  bus.p_load = number_or(obj, "p_load", path, bus.p_load);
  bus.q_load = number_or(obj, "q_load", path, bus.q_load);
  bus.shunt_c = number_or(obj, "shunt_c", path, bus.shunt_c);
  return bus;
}

BranchConfig parse_branch(const json& j, const std::string& path) {
  const json& obj = want_object(j, path);
  check_keys(obj, path, {"from", "to", "r", "l", "b", "tap"});
  BranchConfig br;
  const json* from = find(obj, "from");
  const json* to = find(obj, "to");
  const json* l = find(obj, "l");
  if (from == nullptr || to == nullptr || l == nullptr) {
    fail("config key " + path + " needs from, to, and l");
  }
  br.from = want_string(*from, join(path, "from"));
  br.to = want_string(*to, join(path, "to"));
  br.l = want_number(*l, join(path, "l"));
  br.r = number_or(obj, "r", path, br.r);
  br.b = number_or(obj, "b", path, br.b);
  br.tap = number_or(obj, "tap", path, br.tap);
  return br;
}

ApparatusConfig parse_apparatus(const json& j, const std::string& path, double omega_base) {
  const json& obj = want_object(j, path);
  check_keys(obj, path, {"id", "type", "bus", "params"});
  const json* id = find(obj, "id");
  const json* type = find(obj, "type");
  const json* bus = find(obj, "bus");
  if (id == nullptr || type == nullptr || bus == nullptr) {
    fail("config key " + path + " needs id, type, and bus");
  }
  ApparatusConfig ap;
  ap.id = want_string(*id, join(path, "id"));
  ap.bus = want_string(*bus, join(path, "bus"));
  const std::string kind = want_string(*type, join(path, "type"));
  const json empty = json::object();
  const json& params =
      want_object(find(obj, "params") ? *find(obj, "params") : empty, join(path, "params"));
  const std::string ppath = join(path, "params");
  if (kind == "sg") {
    check_keys(params, ppath, {"J", "K_D", "R", "L"});
    SGParams p;
    p.J = number_or(params, "J", ppath, p.J);
    p.K_D = number_or(params, "K_D", ppath, p.K_D);
    p.R = number_or(params, "R", ppath, p.R);
    p.L = number_or(params, "L", ppath, p.L);
    p.omega_base = omega_base;
    ap.params = p;
  } else if (kind == "ibr") {
    check_keys(params, ppath,
               {"L_f", "R_f", "C_dc", "v_dc_ref", "i_q_ref", "f_bw_pf", "f_bw_current"});
    IBRParams p;
    p.L_f = number_or(params, "L_f", ppath, p.L_f);
    p.R_f = number_or(params, "R_f", ppath, p.R_f);
    p.C_dc = number_or(params, "C_dc", ppath, p.C_dc);
    p.v_dc_ref = number_or(params, "v_dc_ref", ppath, p.v_dc_ref);
    p.i_q_ref = number_or(params, "i_q_ref", ppath, p.i_q_ref);
    p.f_bw_pf = number_or(params, "f_bw_pf", ppath, p.f_bw_pf);
    p.f_bw_current = number_or(params, "f_bw_current", ppath, p.f_bw_current);
    p.omega_base = omega_base;
    ap.params = p;
  } else {
    fail("config key " + join(path, "type") + " must be sg or ibr (got \"" + kind + "\")");
  }
  return ap;
}

SweepSpec parse_sweep(const json& j, const std::string& path) {
  const json& obj = want_object(j, path);
  check_keys(obj, path, {"parameter", "start", "stop", "points"});
  const json* parameter = find(obj, "parameter");
  const json* start = find(obj, "start");
  const json* stop = find(obj, "stop");
  const json* points = find(obj, "points");
  if (parameter == nullptr || start == nullptr || stop == nullptr || points == nullptr) {
    fail("config key " + path + " needs parameter, start, stop, and points");
  }
  SweepSpec sweep;
  sweep.parameter = want_string(*parameter, join(path, "parameter"));
  sweep.start = want_number(*start, join(path, "start"));
  sweep.stop = want_number(*stop, join(path, "stop"));
  sweep.points = want_int(*points, join(path, "points"));
  if (sweep.points < 2) {
    fail("config key " + join(path, "points") + " must be at least 2 for a sweep");
  }
  return sweep;
}

EventSpec parse_event(const json& j, const std::string& path, double t_end) {
  const json& obj = want_object(j, path);
  check_keys(obj, path, {"time", "set", "input", "value", "delta"});
  const json* time = find(obj, "time");
  if (time == nullptr) fail("config key " + join(path, "time") + " is required");
  EventSpec ev;
  ev.time = want_number(*time, join(path, "time"));
  if (ev.time < 0.0) fail("config key " + join(path, "time") + " must be non-negative");
  if (ev.time > t_end) {
    fail("config key " + path + " fires at " + std::to_string(ev.time) +
         " s, after the scenario ends");
  }
  const json* set = find(obj, "set");
  const json* input = find(obj, "input");
  const json* value = find(obj, "value");
  const json* delta = find(obj, "delta");
  if ((set != nullptr) == (input != nullptr)) {
    fail("config key " + path + " must carry exactly one of set or input");
  }
  if (set != nullptr) {
    if (delta != nullptr) fail("config key " + join(path, "delta") + " only applies to inputs");
    if (value == nullptr) fail("config key " + join(path, "value") + " is required with set");
    ev.is_input = false;
    ev.target = want_string(*set, join(path, "set"));
    ev.value = want_number(*value, join(path, "value"));
  } else {
    if ((value != nullptr) == (delta != nullptr)) {
      fail("config key " + path + " needs exactly one of value or delta");
    }
    ev.is_input = true;
    ev.target = want_string(*input, join(path, "input"));
    ev.is_delta = delta != nullptr;
    ev.value = ev.is_delta ? want_number(*delta, join(path, "delta"))
                           : want_number(*value, join(path, "value"));
  }
  return ev;
}

ScenarioSpec parse_scenario(const json& j, const std::string& path) {
  const json& obj = want_object(j, path);
  check_keys(obj, path, {"name", "t_end", "dt", "record_every", "probes", "events"});
  const json* name = find(obj, "name");
  const json* t_end = find(obj, "t_end");
  if (name == nullptr || t_end == nullptr) {
    fail("config key " + path + " needs name and t_end");
  }
  ScenarioSpec sc;
  sc.name = want_string(*name, join(path, "name"));
  sc.t_end = want_number(*t_end, join(path, "t_end"));
  if (!(sc.t_end > 0.0)) fail("config key " + join(path, "t_end") + " must be positive");
  sc.dt = number_or(obj, "dt", path, sc.dt);
  if (!(sc.dt > 0.0)) fail("config key " + join(path, "dt") + " must be positive");
  if (const json* rec = find(obj, "record_every")) {
    sc.record_every = want_int(*rec, join(path, "record_every"));
    if (sc.record_every < 1) {
      fail("config key " + join(path, "record_every") + " must be at least 1");
    }
  }
  if (const json* probes = find(obj, "probes")) {
    const json& arr = want_array(*probes, join(path, "probes"));
    for (size_t k = 0; k < arr.size(); ++k) {
      sc.probes.push_back(
          want_string(arr[k], join(path, "probes") + "[" + std::to_string(k) + "]"));
    }
  }
  if (const json* events = find(obj, "events")) {
    const json& arr = want_array(*events, join(path, "events"));
    for (size_t k = 0; k < arr.size(); ++k) {
      sc.events.push_back(
          parse_event(arr[k], join(path, "events") + "[" + std::to_string(k) + "]", sc.t_end));
    }
  }
  return sc;
}

// mechanical input or source-bus voltage this event may step
void validate_event_input(const CaseConfig& cfg, const std::string& target,
                          const std::string& path) {
  const auto dot = target.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == target.size()) {
    fail("config key " + path + " input \"" + target + "\" is not of the form id.signal");
  }
  const std::string id = target.substr(0, dot);
  const std::string sig = target.substr(dot + 1);
  Signal signal{};
  try {
    signal = signal_from_string(sig);
  } catch (const Error&) {
    fail("config key " + path + " names unknown signal \"" + sig + "\"");
  }
  for (const ApparatusConfig& ap : cfg.apparatus) {
    if (ap.id != id) continue;
    const Signal mech = std::holds_alternative<SGParams>(ap.params) ? Signal::T_m : Signal::i_dc;
    if (signal != mech) {
      fail("config key " + path + " steps " + target + ", but " + id + " only accepts " +
           to_string(mech));
    }
    return;
  }
  for (const BusConfig& bus : cfg.buses) {
    if (bus.id != id) continue;
    const bool hosts_apparatus =
        std::any_of(cfg.apparatus.begin(), cfg.apparatus.end(),
                    [&](const ApparatusConfig& ap) { return ap.bus == id; });
    if (bus.kind != BusKind::slack || hosts_apparatus) {
      fail("config key " + path + " steps " + target + ", but bus " + id +
           " is not an ideal source");
    }
    if (signal != Signal::v_D && signal != Signal::v_Q) {
      fail("config key " + path + " steps " + target + "; source buses accept v_D or v_Q");
    }
    return;
  }
  fail("config key " + path + " references " + id +
       ", but the config defines no such apparatus or bus");
}

void check_unique(const std::vector<std::string>& ids, const std::string& what) {
  std::set<std::string> seen;
  for (const std::string& id : ids) {
    if (!seen.insert(id).second) fail("duplicate " + what + " \"" + id + "\"");
  }
}

CaseConfig from_json(const json& root) {
  if (!root.is_object()) fail("the config root must be an object");
  check_keys(root, "",
             {"name", "base_frequency_hz", "output_dir", "buses", "branches", "apparatus",
              "sweeps", "scenarios"});
  CaseConfig cfg;
  const json* name = find(root, "name");
  if (name == nullptr) fail("config key name is required");
  cfg.name = want_string(*name, "name");
  if (cfg.name.empty()) fail("config key name must not be empty");
  cfg.base_frequency_hz = number_or(root, "base_frequency_hz", "", cfg.base_frequency_hz);
  if (!(cfg.base_frequency_hz > 0.0)) fail("config key base_frequency_hz must be positive");
  if (const json* out = find(root, "output_dir")) {
    cfg.output_dir = want_string(*out, "output_dir");
  }
  const double omega_base = 2.0 * kPi * cfg.base_frequency_hz;

  const json* buses = find(root, "buses");
  if (buses == nullptr) fail("config key buses is required");
  const json& bus_arr = want_array(*buses, "buses");
  if (bus_arr.empty()) fail("config key buses must not be empty");
  for (size_t k = 0; k < bus_arr.size(); ++k) {
    cfg.buses.push_back(parse_bus(bus_arr[k], "buses[" + std::to_string(k) + "]"));
  }

  if (const json* branches = find(root, "branches")) {
    const json& arr = want_array(*branches, "branches");
    for (size_t k = 0; k < arr.size(); ++k) {
      cfg.branches.push_back(parse_branch(arr[k], "branches[" + std::to_string(k) + "]"));
    }
  }
  if (const json* apparatus = find(root, "apparatus")) {
    const json& arr = want_array(*apparatus, "apparatus");
    for (size_t k = 0; k < arr.size(); ++k) {
      cfg.apparatus.push_back(
          parse_apparatus(arr[k], "apparatus[" + std::to_string(k) + "]", omega_base));
    }
  }
  if (const json* sweeps = find(root, "sweeps")) {
    const json& arr = want_array(*sweeps, "sweeps");
    for (size_t k = 0; k < arr.size(); ++k) {
      cfg.sweeps.push_back(parse_sweep(arr[k], "sweeps[" + std::to_string(k) + "]"));
    }
  }
  if (const json* scenarios = find(root, "scenarios")) {
    const json& arr = want_array(*scenarios, "scenarios");
    for (size_t k = 0; k < arr.size(); ++k) {
      cfg.scenarios.push_back(parse_scenario(arr[k], "scenarios[" + std::to_string(k) + "]"));
    }
  }

  // uniqueness
  {
    std::vector<std::string> ids;
    for (const auto& b : cfg.buses) ids.push_back(b.id);
    check_unique(ids, "bus id");
    ids.clear();
    for (const auto& a : cfg.apparatus) ids.push_back(a.id);
    check_unique(ids, "apparatus id");
    ids.clear();
    for (const auto& s : cfg.scenarios) ids.push_back(s.name);
    check_unique(ids, "scenario name");
  }

  // cross references
  const auto has_bus = [&](const std::string& id) {
    return std::any_of(cfg.buses.begin(), cfg.buses.end(),
                       [&](const BusConfig& b) { return b.id == id; });
  };
  for (size_t k = 0; k < cfg.branches.size(); ++k) {
    const BranchConfig& br = cfg.branches[k];
    for (const std::string& end : {br.from, br.to}) {
      if (!has_bus(end)) {
        fail("config branches[" + std::to_string(k) + "] runs from " + br.from + " to " +
             br.to + ", but no bus " + end + " exists");
      }
    }
    if (br.from == br.to) {
      fail("config branches[" + std::to_string(k) + "] must join two distinct buses");
    }
  }
  for (const ApparatusConfig& ap : cfg.apparatus) {
    if (!has_bus(ap.bus)) {
      fail("config apparatus " + ap.id + " sits on bus " + ap.bus + ", but no bus " + ap.bus +
           " exists");
    }
  }

  // parameter paths and event targets resolve against the parsed tables
  for (size_t k = 0; k < cfg.sweeps.size(); ++k) {
    CaseConfig probe = cfg;
    try {
      apply_parameter(probe, cfg.sweeps[k].parameter, cfg.sweeps[k].start);
    } catch (const ConfigError& e) {
      fail("config sweeps[" + std::to_string(k) + "]: " + e.what());
    }
  }
  for (size_t si = 0; si < cfg.scenarios.size(); ++si) {
    const ScenarioSpec& sc = cfg.scenarios[si];
    for (size_t ei = 0; ei < sc.events.size(); ++ei) {
      const std::string path =
          "scenarios[" + std::to_string(si) + "].events[" + std::to_string(ei) + "]";
      const EventSpec& ev = sc.events[ei];
      if (ev.is_input) {
        validate_event_input(cfg, ev.target, path);
      } else {
        CaseConfig probe = cfg;
        try {
          apply_parameter(probe, ev.target, ev.value);
        } catch (const ConfigError& e) {
          fail("config " + path + ": " + e.what());
        }
      }
    }
  }
  return cfg;
}

}  // namespace

CaseConfig parse_config_text(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    size_t line = 1;
    const size_t stop = e.byte > 0 ? std::min(text.size(), static_cast<size_t>(e.byte) - 1)
                                   : text.size();
    for (size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') ++line;
    }
    fail(origin + " line " + std::to_string(line) + ": " + e.what());
  }
  try {
    return from_json(root);
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

CaseConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("config file " + path + " cannot be opened");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path);
}

std::string dump_config(const CaseConfig& cfg) {
  json root;
  root["name"] = cfg.name;
  root["base_frequency_hz"] = cfg.base_frequency_hz;
  root["output_dir"] = cfg.output_dir;
  root["buses"] = json::array();
  for (const BusConfig& b : cfg.buses) {
    root["buses"].push_back(json{{"id", b.id},
                                 {"kind", bus_kind_name(b.kind)},
                                 {"v_set", b.v_set},
                                 {"theta_set", b.theta_set},
                                 {"p_gen", b.p_gen},
                                 {"q_gen", b.q_gen},
                                 {"p_load", b.p_load},
                                 {"q_load", b.q_load},
                                 {"shunt_c", b.shunt_c}});
  }
  root["branches"] = json::array();
  for (const BranchConfig& br : cfg.branches) {
    root["branches"].push_back(json{{"from", br.from},
                                    {"to", br.to},
                                    {"r", br.r},
                                    {"l", br.l},
                                    {"b", br.b},
                                    {"tap", br.tap}});
  }
  root["apparatus"] = json::array();
  for (const ApparatusConfig& ap : cfg.apparatus) {
    json entry{{"id", ap.id}, {"bus", ap.bus}};
    if (const auto* sg = std::get_if<SGParams>(&ap.params)) {
      entry["type"] = "sg";
      entry["params"] = json{{"J", sg->J}, {"K_D", sg->K_D}, {"R", sg->R}, {"L", sg->L}};
    } else {
      const auto& p = std::get<IBRParams>(ap.params);
      entry["type"] = "ibr";
      entry["params"] = json{{"L_f", p.L_f},
                             {"R_f", p.R_f},
                             {"C_dc", p.C_dc},
                             {"v_dc_ref", p.v_dc_ref},
                             {"i_q_ref", p.i_q_ref},
                             {"f_bw_pf", p.f_bw_pf},
                             {"f_bw_current", p.f_bw_current}};
    }
    root["apparatus"].push_back(std::move(entry));
  }
  root["sweeps"] = json::array();
  for (const SweepSpec& s : cfg.sweeps) {
    root["sweeps"].push_back(json{{"parameter", s.parameter},
                                  {"start", s.start},
                                  {"stop", s.stop},
                                  {"points", s.points}});
  }
  root["scenarios"] = json::array();
  for (const ScenarioSpec& sc : cfg.scenarios) {
    json entry{{"name", sc.name},
               {"t_end", sc.t_end},
               {"dt", sc.dt},
               {"record_every", sc.record_every},
               {"probes", sc.probes},
               {"events", json::array()}};
    for (const EventSpec& ev : sc.events) {
      json e{{"time", ev.time}};
      if (ev.is_input) {
        e["input"] = ev.target;
        e[ev.is_delta ? "delta" : "value"] = ev.value;
      } else {
        e["set"] = ev.target;
        e["value"] = ev.value;
      }
      entry["events"].push_back(std::move(e));
    }
    root["scenarios"].push_back(std::move(entry));
  }
  return root.dump(2) + "\n";
}

void apply_parameter(CaseConfig& cfg, const std::string& path, double value) {
  const auto open = path.find('[');
  const auto close = path.find("].", open == std::string::npos ? 0 : open);
  if (open == std::string::npos || close == std::string::npos || close + 2 >= path.size()) {
    fail("parameter path \"" + path + "\" is not recognized; expected section[key].field");
  }
  const std::string section = path.substr(0, open);
  const std::string key = path.substr(open + 1, close - open - 1);
  const std::string field = path.substr(close + 2);

  const auto set_field = [&](double& slot) { slot = value; };

  if (section == "branches") {
    size_t index = 0;
    try {
      size_t used = 0;
      index = static_cast<size_t>(std::stoul(key, &used));
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      fail("parameter path " + path + " needs a numeric branch index");
    }
    if (index >= cfg.branches.size()) {
      fail("branches[" + key + "] does not exist; the config has " +
           std::to_string(cfg.branches.size()) + " branches");
    }
    BranchConfig& br = cfg.branches[index];
    if (field == "r") return set_field(br.r);
    if (field == "l") return set_field(br.l);
    if (field == "b") return set_field(br.b);
    if (field == "tap") return set_field(br.tap);
    fail("branch parameter \"" + field + "\" is not recognized (r, l, b, tap)");
  }
  if (section == "buses") {
    for (BusConfig& bus : cfg.buses) {
      if (bus.id != key) continue;
      if (field == "v_set") return set_field(bus.v_set);
      if (field == "theta_set") return set_field(bus.theta_set);
      if (field == "p_gen") return set_field(bus.p_gen);
      if (field == "q_gen") return set_field(bus.q_gen);
      if (field == "p_load") return set_field(bus.p_load);
      if (field == "q_load") return set_field(bus.q_load);
      if (field == "shunt_c") return set_field(bus.shunt_c);
      fail("bus parameter \"" + field + "\" is not recognized");
    }
    fail("parameter path " + path + " references bus " + key +
         ", but the config defines no such bus");
  }
  if (section == "apparatus") {
    for (ApparatusConfig& ap : cfg.apparatus) {
      if (ap.id != key) continue;
      if (auto* sg = std::get_if<SGParams>(&ap.params)) {
        if (field == "J") return set_field(sg->J);
        if (field == "K_D") return set_field(sg->K_D);
        if (field == "R") return set_field(sg->R);
        if (field == "L") return set_field(sg->L);
        fail("apparatus " + key + " is a machine; parameter \"" + field +
             "\" does not apply (J, K_D, R, L)");
      }
      auto& p = std::get<IBRParams>(ap.params);
      if (field == "L_f") return set_field(p.L_f);
      if (field == "R_f") return set_field(p.R_f);
      if (field == "C_dc") return set_field(p.C_dc);
      if (field == "v_dc_ref") return set_field(p.v_dc_ref);
      if (field == "i_q_ref") return set_field(p.i_q_ref);
      if (field == "f_bw_pf") return set_field(p.f_bw_pf);
      if (field == "f_bw_current") return set_field(p.f_bw_current);
      fail("apparatus " + key + " is an inverter; parameter \"" + field +
           "\" does not apply (L_f, R_f, C_dc, v_dc_ref, i_q_ref, f_bw_pf, f_bw_current)");
    }
    fail("parameter path " + path + " references apparatus " + key +
         ", but the config defines no such apparatus");
  }
  fail("parameter path \"" + path + "\" is not recognized; sections are branches, buses, "
       "apparatus");
}

}  // namespace gridport
