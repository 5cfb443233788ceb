#include "gridport/cli.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>

#include "gridport/analysis.hpp"
#include "gridport/case_config.hpp"
#include "gridport/errors.hpp"
#include "gridport/simulate.hpp"
#include "gridport/whole_system.hpp"

namespace gridport {

namespace {

using cplx = std::complex<double>;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12e", v);
  return buf;
}

// files appear atomically so a re-run can never leave a half-written table
void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    f << content;
    if (!f) throw NumericalError("cannot write " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<double> make_grid(double start, double stop, int n, bool log_scale) {
  if (n < 1) throw ConfigError("grid needs at least one point");
  if (log_scale && (start <= 0.0 || stop <= 0.0)) {
    throw ConfigError("log grid endpoints must be positive");
  }
  std::vector<double> grid;
  grid.reserve(static_cast<size_t>(n));
  if (n == 1) {
    grid.push_back(start);
    return grid;
  }
  const double a = log_scale ? std::log10(start) : start;
  const double b = log_scale ? std::log10(stop) : stop;
  for (int i = 0; i < n; ++i) {
    const double t = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    grid.push_back(log_scale ? std::pow(10.0, t) : t);
  }
  return grid;
}

struct SweepRequest {
  std::string parameter;
  std::vector<double> grid;
};

// --sweep <param>=<start>:<stop>:<n>
SweepRequest parse_sweep_flag(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("--sweep expects <parameter>=<start>:<stop>:<n>, got \"" + text + "\"");
  }
  SweepRequest req;
  req.parameter = text.substr(0, eq);
  const std::string rest = text.substr(eq + 1);
  double start = 0.0, stop = 0.0;
  int n = 0;
  if (std::sscanf(rest.c_str(), "%lf:%lf:%d", &start, &stop, &n) != 3 || n < 1) {
    throw ConfigError("--sweep range must be <start>:<stop>:<n>, got \"" + rest + "\"");
  }
  req.grid = make_grid(start, stop, n, false);
  return req;
}

// --freq <start>:<stop>:<n,log|lin>; the scale token is optional and linear
// when omitted
std::vector<double> parse_freq_flag(const std::string& text) {
  double start = 0.0, stop = 0.0;
  int n = 0;
  char scale[8] = "lin";
  const int got = std::sscanf(text.c_str(), "%lf:%lf:%d,%7s", &start, &stop, &n, scale);
  if (got < 3 || n < 1) {
    throw ConfigError("--freq expects <start>:<stop>:<n,log|lin>, got \"" + text + "\"");
  }
  const std::string sc(scale);
  if (sc != "log" && sc != "lin") {
    throw ConfigError("--freq scale must be log or lin, got \"" + sc + "\"");
  }
  return make_grid(start, stop, n, sc == "log");
}

std::vector<double> unwrap_phases_deg(const std::vector<cplx>& values) {
  std::vector<double> out;
  out.reserve(values.size());
  double prev = 0.0;
  for (size_t i = 0; i < values.size(); ++i) {
    double p = std::arg(values[i]) * 180.0 / kPi;
    if (i > 0) p += 360.0 * std::round((prev - p) / 360.0);
    out.push_back(p);
    prev = p;
  }
  return out;
}

Eigen::VectorXcd matrix_eigenvalues(const Eigen::MatrixXd& a) {
  if (a.rows() == 0) return Eigen::VectorXcd();
  Eigen::EigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) throw NumericalError("eigenvalue iteration failed");
  return es.eigenvalues();
}

// greedy nearest matching; sizes must agree
double worst_pole_gap(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  std::vector<cplx> pool(b.data(), b.data() + b.size());
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    size_t best = 0;
    double dist = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < pool.size(); ++k) {
      const double d = std::abs(a(i) - pool[k]);
      if (d < dist) {
        dist = d;
        best = k;
      }
    }
    worst = std::max(worst, dist);
    pool.erase(pool.begin() + static_cast<long>(best));
  }
  return worst;
}

// ---- drawing -------------------------------------------------------------

struct Series {
  std::string name;
  std::vector<double> x, y;
};

struct ChartSpec {
  std::string title, xlabel, ylabel;
  std::vector<Series> series;
  bool log_x = false;
  bool markers_only = false;
};

const char* kPalette[6] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

void render_chart(std::ostringstream& svg, const ChartSpec& chart, double y_offset) {
  const double x0 = 80.0, x1 = 830.0, y0 = y_offset + 55.0, y1 = y_offset + 480.0;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const Series& s : chart.series) {
    for (double v : s.x) {
      const double t = chart.log_x ? std::log10(v) : v;
      xmin = std::min(xmin, t);
      xmax = std::max(xmax, t);
    }
    for (double v : s.y) {
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  }
  if (!(xmin < xmax)) {
    xmin -= 1.0;
    xmax += 1.0;
  }
  if (!(ymin < ymax)) {
    ymin -= 1.0;
    ymax += 1.0;
  }
  const double xpad = 0.05 * (xmax - xmin), ypad = 0.05 * (ymax - ymin);
  xmin -= xpad;
  xmax += xpad;
  ymin -= ypad;
  ymax += ypad;
  auto px = [&](double v) {
    const double t = chart.log_x ? std::log10(v) : v;
    return x0 + (t - xmin) / (xmax - xmin) * (x1 - x0);
  };
  auto py = [&](double v) { return y1 - (v - ymin) / (ymax - ymin) * (y1 - y0); };

  svg << "<rect x=\"" << svg_num(x0) << "\" y=\"" << svg_num(y0) << "\" width=\""
      << svg_num(x1 - x0) << "\" height=\"" << svg_num(y1 - y0)
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << svg_num((x0 + x1) / 2) << "\" y=\"" << svg_num(y_offset + 30.0)
      << "\" text-anchor=\"middle\" font-size=\"15\">" << chart.title << "</text>\n";
  svg << "<text x=\"" << svg_num((x0 + x1) / 2) << "\" y=\"" << svg_num(y1 + 35.0)
      << "\" text-anchor=\"middle\" font-size=\"12\">" << chart.xlabel << "</text>\n";
  svg << "<text x=\"20\" y=\"" << svg_num((y0 + y1) / 2)
      << "\" font-size=\"12\" transform=\"rotate(-90 20 " << svg_num((y0 + y1) / 2) << ")\""
      << " text-anchor=\"middle\">" << chart.ylabel << "</text>\n";

  for (int i = 0; i <= 4; ++i) {
    const double tx = xmin + (xmax - xmin) * i / 4.0;
    const double ty = ymin + (ymax - ymin) * i / 4.0;
    const double gx = x0 + (x1 - x0) * i / 4.0;
    const double gy = y1 - (y1 - y0) * i / 4.0;
    svg << "<line x1=\"" << svg_num(gx) << "\" y1=\"" << svg_num(y1) << "\" x2=\"" << svg_num(gx)
        << "\" y2=\"" << svg_num(y1 + 5.0) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << svg_num(gx) << "\" y=\"" << svg_num(y1 + 18.0)
        << "\" text-anchor=\"middle\" font-size=\"11\">"
        << tick_label(chart.log_x ? std::pow(10.0, tx) : tx) << "</text>\n";
    svg << "<line x1=\"" << svg_num(x0 - 5.0) << "\" y1=\"" << svg_num(gy) << "\" x2=\""
        << svg_num(x0) << "\" y2=\"" << svg_num(gy) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << svg_num(x0 - 8.0) << "\" y=\"" << svg_num(gy + 4.0)
        << "\" text-anchor=\"end\" font-size=\"11\">" << tick_label(ty) << "</text>\n";
  }

  for (size_t k = 0; k < chart.series.size(); ++k) {
    const Series& s = chart.series[k];
    const char* color = kPalette[k % 6];
    if (!chart.markers_only && s.x.size() > 1) {
      svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (size_t i = 0; i < s.x.size(); ++i) {
        svg << svg_num(px(s.x[i])) << "," << svg_num(py(s.y[i])) << " ";
      }
      svg << "\"/>\n";
    }
    if (chart.markers_only) {
      for (size_t i = 0; i < s.x.size(); ++i) {
        svg << "<circle cx=\"" << svg_num(px(s.x[i])) << "\" cy=\"" << svg_num(py(s.y[i]))
            << "\" r=\"3\" fill=\"" << color << "\"/>\n";
      }
    } else if (!s.x.empty()) {
      svg << "<circle cx=\"" << svg_num(px(s.x.back())) << "\" cy=\"" << svg_num(py(s.y.back()))
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    if (chart.series.size() > 1 && !s.name.empty()) {
      const double ly = y0 + 16.0 + 14.0 * static_cast<double>(k);
      svg << "<rect x=\"" << svg_num(x1 - 150.0) << "\" y=\"" << svg_num(ly - 9.0)
          << "\" width=\"10\" height=\"10\" fill=\"" << color << "\"/>\n";
      svg << "<text x=\"" << svg_num(x1 - 135.0) << "\" y=\"" << svg_num(ly)
          << "\" font-size=\"11\">" << s.name << "</text>\n";
    }
  }
}

std::string render_charts(const std::vector<ChartSpec>& charts) {
  const double height = 540.0 * static_cast<double>(charts.size());
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"860\" height=\"" << svg_num(height)
      << "\" viewBox=\"0 0 860 " << svg_num(height) << "\" font-family=\"monospace\">\n";
  svg << "<rect width=\"860\" height=\"" << svg_num(height) << "\" fill=\"white\"/>\n";
  for (size_t i = 0; i < charts.size(); ++i) {
    render_chart(svg, charts[i], 540.0 * static_cast<double>(i));
  }
  svg << "</svg>\n";
  return svg.str();
}

// ---- commands ------------------------------------------------------------

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::string sweep_flag;
  std::string freq_flag;
  std::string port;
  std::string scenario;
  bool svg = false;
};

std::filesystem::path resolve_out_dir(const CommonOptions& opt, const CaseConfig& cfg) {
  return opt.out_dir.empty() ? std::filesystem::path(cfg.output_dir)
                             : std::filesystem::path(opt.out_dir);
}

void emit_resolved(const CaseConfig& cfg, const std::filesystem::path& dir, std::ostream& out) {
  const auto path = dir / (cfg.name + "_resolved.json");
  write_atomic(path, dump_config(cfg));
  out << "wrote " << path.string() << "\n";
}

int cmd_poles(const CommonOptions& opt, std::ostream& out, std::ostream& err) {
  const CaseConfig cfg = parse_config(opt.config_path);
  const auto dir = resolve_out_dir(opt, cfg);
  emit_resolved(cfg, dir, out);

  SweepRequest req;
  if (!opt.sweep_flag.empty()) {
    req = parse_sweep_flag(opt.sweep_flag);
  } else if (!cfg.sweeps.empty()) {
    const SweepSpec& sw = cfg.sweeps.front();
    req.parameter = sw.parameter;
    req.grid = make_grid(sw.start, sw.stop, sw.points, false);
  }

  std::string csv = "sweep_value,re_per_s,im_per_s,freq_hz,damping_ratio,tracked_mode_id\n";
  std::vector<ChartSpec> charts;

  if (req.parameter.empty()) {
    const BuiltCase built = build_case(cfg);
    if (built.assembled.A.rows() == 0) {
      throw ConfigError("the case has no apparatus, so it has no poles");
    }
    Eigen::VectorXcd poles = matrix_eigenvalues(built.assembled.A);
    std::vector<cplx> sorted(poles.data(), poles.data() + poles.size());
    std::sort(sorted.begin(), sorted.end(), [](cplx a, cplx b) {
      return a.real() != b.real() ? a.real() > b.real() : a.imag() < b.imag();
    });
    ChartSpec chart{cfg.name + " poles", "Re (1/s)", "Im (rad/s)", {}, false, true};
    chart.series.push_back({"", {}, {}});
    for (size_t k = 0; k < sorted.size(); ++k) {
      const cplx lam = sorted[k];
      const double mag = std::abs(lam);
      csv += fmt(0.0) + "," + fmt(lam.real()) + "," + fmt(lam.imag()) + "," +
             fmt(std::abs(lam.imag()) / (2.0 * kPi)) + "," +
             fmt(mag > 0.0 ? -lam.real() / mag : 0.0) + "," + std::to_string(k) + "\n";
      chart.series[0].x.push_back(lam.real());
      chart.series[0].y.push_back(lam.imag());
    }
    charts.push_back(std::move(chart));
  } else {
    auto poles_at = [&](double value) {
      CaseConfig modified = cfg;
      apply_parameter(modified, req.parameter, value);
      const BuiltCase built = build_case(modified);
      if (built.assembled.A.rows() == 0) {
        throw ConfigError("the case has no apparatus, so it has no poles");
      }
      return matrix_eigenvalues(built.assembled.A);
    };
    const SweepResult sweep = pole_sweep(req.parameter, req.grid, poles_at);
    int ok_points = 0;
    std::map<int, Series> loci;
    for (const SweepPoint& pt : sweep.points) {
      if (!pt.ok) {
        err << "sweep " << req.parameter << "=" << pt.value << " failed: " << pt.error << "\n";
        continue;
      }
      ++ok_points;
      for (Eigen::Index k = 0; k < pt.poles.size(); ++k) {
        const cplx lam = pt.poles(k);
        const double mag = std::abs(lam);
        const int id = pt.mode_ids[static_cast<size_t>(k)];
        csv += fmt(pt.value) + "," + fmt(lam.real()) + "," + fmt(lam.imag()) + "," +
               fmt(std::abs(lam.imag()) / (2.0 * kPi)) + "," +
               fmt(mag > 0.0 ? -lam.real() / mag : 0.0) + "," + std::to_string(id) + "\n";
        Series& s = loci[id];
        s.x.push_back(lam.real());
        s.y.push_back(lam.imag());
      }
    }
    if (ok_points == 0) throw NumericalError("every sweep point failed; see notes above");
    ChartSpec chart{cfg.name + " pole locus over " + req.parameter, "Re (1/s)", "Im (rad/s)",
                    {}, false, false};
    for (auto& [id, series] : loci) chart.series.push_back(std::move(series));
    charts.push_back(std::move(chart));
  }

  const auto csv_path = dir / (cfg.name + "_poles.csv");
  write_atomic(csv_path, csv);
  out << "wrote " << csv_path.string() << "\n";
  if (opt.svg) {
    const auto svg_path = dir / (cfg.name + "_poles.svg");
    write_atomic(svg_path, render_charts(charts));
    out << "wrote " << svg_path.string() << "\n";
  }
  return 0;
}

int cmd_coeff(const CommonOptions& opt, std::ostream& out, std::ostream&) {
  const CaseConfig cfg = parse_config(opt.config_path);
  const auto dir = resolve_out_dir(opt, cfg);
  emit_resolved(cfg, dir, out);

  const BuiltCase built = build_case(cfg);
  if (built.apparatus.empty()) {
    throw ConfigError("the case has no apparatus, so it has no coefficient ports");
  }
  size_t which = 0;
  if (!opt.port.empty()) {
    const auto it = std::find_if(built.apparatus.begin(), built.apparatus.end(),
                                 [&](const Apparatus& a) { return a.id == opt.port; });
    if (it == built.apparatus.end()) {
      throw ConfigError("the case defines no apparatus named \"" + opt.port + "\"");
    }
    which = static_cast<size_t>(it - built.apparatus.begin());
  }
  const Apparatus& ap = built.apparatus[which];

  const std::vector<double> freq =
      parse_freq_flag(opt.freq_flag.empty() ? "0.1:120:200,log" : opt.freq_flag);
  std::vector<cplx> samples;
  samples.reserve(freq.size());
  for (double f : freq) samples.emplace_back(0.0, 2.0 * kPi * f);

  const bool is_machine = std::holds_alternative<SGParams>(ap.params);
  const PortCoefficient coeff =
      is_machine ? torque_coefficient(built.assembled, ap, samples)
                 : dc_current_coefficient(built.assembled, ap, samples);
  // rejects the request outright when the coefficient's own dynamics are
  // unstable and the -90 degree reading would be meaningless
  (void)phase_margin_index(coeff, freq.front());

  const std::vector<double> phase = unwrap_phases_deg(coeff.values);
  std::string csv = "freq_hz,re_K,im_K,mag_db,phase_deg,flag_above_minus90\n";
  Series mag_series{"", {}, {}}, phase_series{"", {}, {}};
  for (size_t i = 0; i < freq.size(); ++i) {
    const cplx k = coeff.values[i];
    const double mag = std::abs(k);
    const double mag_db = 20.0 * std::log10(std::max(mag, 1e-300));
    csv += fmt(freq[i]) + "," + fmt(k.real()) + "," + fmt(k.imag()) + "," + fmt(mag_db) + "," +
           fmt(phase[i]) + "," + (phase[i] > -90.0 ? "1" : "0") + "\n";
    mag_series.x.push_back(freq[i]);
    mag_series.y.push_back(mag_db);
    phase_series.x.push_back(freq[i]);
    phase_series.y.push_back(phase[i]);
  }

  const auto csv_path = dir / (cfg.name + "_coeff_" + ap.id + ".csv");
  write_atomic(csv_path, csv);
  out << "wrote " << csv_path.string() << "\n";
  if (opt.svg) {
    const std::string kind = is_machine ? "torque coefficient" : "dc current coefficient";
    std::vector<ChartSpec> charts;
    charts.push_back({cfg.name + " " + ap.id + " " + kind + " magnitude", "frequency (Hz)",
                      "magnitude (dB)", {mag_series}, true, false});
    charts.push_back({cfg.name + " " + ap.id + " " + kind + " phase", "frequency (Hz)",
                      "phase (deg)", {phase_series}, true, false});
    const auto svg_path = dir / (cfg.name + "_coeff_" + ap.id + ".svg");
    write_atomic(svg_path, render_charts(charts));
    out << "wrote " << svg_path.string() << "\n";
  }
  return 0;
}

int cmd_simulate(const CommonOptions& opt, std::ostream& out, std::ostream& err) {
  const CaseConfig cfg = parse_config(opt.config_path);
  const auto dir = resolve_out_dir(opt, cfg);
  emit_resolved(cfg, dir, out);

  std::string name = opt.scenario;
  if (name.empty()) {
    if (cfg.scenarios.empty()) throw ConfigError("the case defines no scenarios");
    name = cfg.scenarios.front().name;
  }
  const ScenarioRun run = run_scenario(cfg, name);
  const SimTrace& tr = run.trace;

  std::string csv = "time_s";
  for (const std::string& col : tr.columns) csv += "," + col;
  csv += "\n";
  for (long i = 0; i < tr.samples.rows(); ++i) {
    csv += fmt(tr.time[static_cast<size_t>(i)]);
    for (long c = 0; c < tr.samples.cols(); ++c) csv += "," + fmt(tr.samples(i, c));
    csv += "\n";
  }

  const auto csv_path = dir / (cfg.name + "_simulate_" + name + ".csv");
  write_atomic(csv_path, csv);
  out << "wrote " << csv_path.string() << "\n";
  if (opt.svg) {
    ChartSpec chart{cfg.name + " scenario " + name, "time (s)", "probe value", {}, false, false};
    for (long c = 0; c < tr.samples.cols(); ++c) {
      Series s{tr.columns[static_cast<size_t>(c)], {}, {}};
      for (long i = 0; i < tr.samples.rows(); ++i) {
        s.x.push_back(tr.time[static_cast<size_t>(i)]);
        s.y.push_back(tr.samples(i, c));
      }
      chart.series.push_back(std::move(s));
    }
    const auto svg_path = dir / (cfg.name + "_simulate_" + name + ".svg");
    write_atomic(svg_path, render_charts({chart}));
    out << "wrote " << svg_path.string() << "\n";
  }
  if (tr.diverged) {
    err << "simulation diverged at t=" << tr.diverged_at << " s; trace truncated there\n";
    return 3;
  }
  return 0;
}

int cmd_participation(const CommonOptions& opt, std::ostream& out, std::ostream&) {
  const CaseConfig cfg = parse_config(opt.config_path);
  const auto dir = resolve_out_dir(opt, cfg);
  emit_resolved(cfg, dir, out);

  const BuiltCase built = build_case(cfg);
  std::vector<std::string> sg_ids;
  for (const Apparatus& ap : built.apparatus) {
    if (std::holds_alternative<SGParams>(ap.params)) sg_ids.push_back(ap.id);
  }
  if (sg_ids.empty()) {
    throw IndexInapplicableError("participation screening reads machine torque ports, and "
                                 "this case has no machines");
  }

  const std::vector<double> band =
      parse_freq_flag(opt.freq_flag.empty() ? "0.1:15:2,lin" : opt.freq_flag);
  const double lo = band.front(), hi = band.back();

  const Eigen::VectorXcd poles = matrix_eigenvalues(built.assembled.A);
  double best_re = -std::numeric_limits<double>::infinity();
  double mode_freq = 0.0;
  for (Eigen::Index i = 0; i < poles.size(); ++i) {
    const double f = std::abs(poles(i).imag()) / (2.0 * kPi);
    if (f < lo || f > hi) continue;
    if (poles(i).real() > best_re) {
      best_re = poles(i).real();
      mode_freq = f;
    }
  }
  if (!std::isfinite(best_re)) {
    throw IndexInapplicableError("no mode lies in the requested band [" + std::to_string(lo) +
                                 ", " + std::to_string(hi) + "] Hz");
  }

  const ParticipationReport report = participation_screen(built.assembled, sg_ids, mode_freq);
  std::string csv = "rank,apparatus_id,peak_db,peak_freq_hz,participating,mode_freq_hz\n";
  for (size_t i = 0; i < report.ranking.size(); ++i) {
    const ParticipationEntry& e = report.ranking[i];
    csv += std::to_string(i + 1) + "," + e.apparatus_id + "," + fmt(e.peak_db) + "," +
           fmt(e.peak_freq_hz) + "," + (e.participating ? "1" : "0") + "," +
           fmt(report.mode_freq_hz) + "\n";
  }

  const auto csv_path = dir / (cfg.name + "_participation.csv");
  write_atomic(csv_path, csv);
  out << "wrote " << csv_path.string() << "\n";
  return 0;
}

int cmd_powerflow(const CommonOptions& opt, std::ostream& out, std::ostream&) {
  const CaseConfig cfg = parse_config(opt.config_path);
  const auto dir = resolve_out_dir(opt, cfg);
  emit_resolved(cfg, dir, out);

  NetworkData net = network_from_config(cfg);
  validate(net);
  const PowerFlowSolution pf = solve_power_flow(net);

  std::string csv = "bus,kind,v_mag_pu,theta_deg,p_inj_pu,q_inj_pu\n";
  for (size_t k = 0; k < net.buses.size(); ++k) {
    const BusSpec& bus = net.buses[k];
    const char* kind = bus.kind == BusKind::slack ? "slack"
                       : bus.kind == BusKind::pv  ? "pv"
                                                  : "pq";
    const auto i = static_cast<Eigen::Index>(k);
    csv += bus.id + "," + kind + "," + fmt(pf.v_mag(i)) + "," +
           fmt(pf.theta(i) * 180.0 / kPi) + "," + fmt(pf.p_inj(i)) + "," + fmt(pf.q_inj(i)) +
           "\n";
  }

  const auto csv_path = dir / (cfg.name + "_powerflow.csv");
  write_atomic(csv_path, csv);
  out << "wrote " << csv_path.string() << "\n";
  return 0;
}

int cmd_check(const CommonOptions& opt, std::ostream& out, std::ostream&) {
  const CaseConfig cfg = parse_config(opt.config_path);
  int passed = 0, failed = 0, skipped = 0;
  auto report = [&](const char* name, bool ok, const std::string& detail) {
    out << (ok ? "PASS " : "FAIL ") << name << ": " << detail << "\n";
    (ok ? passed : failed) += 1;
  };
  auto skip = [&](const char* name, const std::string& why) {
    out << "SKIP " << name << ": " << why << "\n";
    ++skipped;
  };

  NetworkData net = network_from_config(cfg);
  validate(net);
  const PowerFlowSolution pf = solve_power_flow(net);
  const double mismatch = pf.residuals.empty() ? 1.0 : pf.residuals.back();
  report("power-flow", mismatch < 1e-8,
         "mismatch " + fmt(mismatch) + " after " + std::to_string(pf.iterations) +
             " iterations");

  if (cfg.apparatus.empty()) {
    skip("steady-state", "no apparatus");
    skip("model-agreement", "no apparatus");
    skip("jacobian", "no apparatus");
    skip("equilibrium", "no apparatus");
  } else {
    const BuiltCase built = build_case(cfg);
    const WholeSystem& ws = *built.whole;

    const double residual = whole_rhs(ws, ws.x0, ws.u0).lpNorm<Eigen::Infinity>();
    report("steady-state", residual < 1e-8, "rhs residual " + fmt(residual));

    const Eigen::MatrixXd mono = monolithic_state_matrix(ws);
    const double gap = worst_pole_gap(matrix_eigenvalues(built.assembled.A),
                                      matrix_eigenvalues(mono));
    report("model-agreement", gap < 1e-7, "worst pole gap " + fmt(gap));

    // central differences around the operating point
    const Eigen::Index n = ws.x0.size();
    Eigen::MatrixXd fd(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(ws.x0(j)));
      Eigen::VectorXd xp = ws.x0, xm = ws.x0;
      xp(j) += h;
      xm(j) -= h;
      fd.col(j) = (whole_rhs(ws, xp, ws.u0) - whole_rhs(ws, xm, ws.u0)) / (2.0 * h);
    }
    const double scale = std::max(1.0, mono.cwiseAbs().maxCoeff());
    const double jac_err = (fd - mono).cwiseAbs().maxCoeff() / scale;
    report("jacobian", jac_err < 1e-6, "max relative gap " + fmt(jac_err));

    SimOptions options;
    options.record_every = 100;
    for (int i = 0; i < static_cast<int>(ws.x0.size()); ++i) options.probes.push_back(i);
    const SimTrace tr = simulate_nonlinear({{&ws, 1.0}}, ws.x0, ws.u0, {}, options);
    double drift = 0.0;
    for (long i = 0; i < tr.samples.rows(); ++i) {
      for (long c = 0; c < tr.samples.cols(); ++c) {
        drift = std::max(drift, std::abs(tr.samples(i, c) - ws.x0(c)));
      }
    }
    report("equilibrium", !tr.diverged && drift < 1e-8,
           "max state drift " + fmt(drift) + " over 1 s without events");
  }

  out << "check " << (failed == 0 ? "passed" : "failed") << ": " << passed << " passed, "
      << failed << " failed, " << skipped << " skipped\n";
  return failed == 0 ? 0 : 3;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"port-mapping small-signal analysis of mixed machine/inverter grids"};
  app.require_subcommand(1);

  CommonOptions opt;
  struct Sub {
    CLI::App* app;
    int (*fn)(const CommonOptions&, std::ostream&, std::ostream&);
  };
  std::vector<Sub> subs;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "case configuration file")->required();
    sub->add_option("--out", opt.out_dir, "output directory (default: the config's own)");
    sub->add_flag("--svg", opt.svg, "also draw the result");
  };

  CLI::App* poles = app.add_subcommand("poles", "whole-system poles, swept or snapshot");
  add_common(poles);
  poles->add_option("--sweep", opt.sweep_flag, "<parameter>=<start>:<stop>:<n>");
  subs.push_back({poles, &cmd_poles});

  CLI::App* coeff = app.add_subcommand("coeff", "port coefficient over a frequency grid");
  add_common(coeff);
  coeff->add_option("--port", opt.port, "apparatus id (default: first apparatus)");
  coeff->add_option("--freq", opt.freq_flag, "<start>:<stop>:<n,log|lin>");
  subs.push_back({coeff, &cmd_coeff});

  CLI::App* simulate = app.add_subcommand("simulate", "nonlinear scenario run");
  add_common(simulate);
  simulate->add_option("--scenario", opt.scenario, "scenario name (default: first scenario)");
  subs.push_back({simulate, &cmd_simulate});

  CLI::App* participation =
      app.add_subcommand("participation", "machine ranking at the least damped band mode");
  add_common(participation);
  participation->add_option("--freq", opt.freq_flag, "band <start>:<stop>:<n,log|lin>");
  subs.push_back({participation, &cmd_participation});

  CLI::App* powerflow = app.add_subcommand("powerflow", "network power flow solution");
  add_common(powerflow);
  subs.push_back({powerflow, &cmd_powerflow});

  CLI::App* check = app.add_subcommand("check", "self-consistency battery for one case");
  check->add_option("--config", opt.config_path, "case configuration file")->required();
  subs.push_back({check, &cmd_check});

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return 2;
  }

  try {
    for (const Sub& sub : subs) {
      if (sub.app->parsed()) return sub.fn(opt, out, err);
    }
    err << "no command given\n";
    return 2;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const IndexInapplicableError& e) {
    err << "index inapplicable: " << e.what() << "\n";
    return 4;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace gridport
