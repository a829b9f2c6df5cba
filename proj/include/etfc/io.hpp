#pragma once

#include "etfc/engine.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace etfc {

// Shortest representation that parses back to the same bits.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::invalid_argument("io: bad numeric field '" + std::string(s) + "'");
  return v;
}

inline long long parse_int(std::string_view s) {
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::invalid_argument("io: bad integer field '" + std::string(s) + "'");
  return v;
}

inline std::string condition_name(int code) {
  switch (code) {
    case 0: return "initial";
    case 1: return "1";
    case 2: return "2";
    case 3: return "periodic";
    default: return "none";
  }
}

inline int condition_from_name(std::string_view name) {
  if (name == "initial") return 0;
  if (name == "1") return 1;
  if (name == "2") return 2;
  if (name == "periodic") return 3;
  if (name == "none") return -1;
  throw std::invalid_argument("io: unknown condition '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Config (JSON)

inline nlohmann::json config_to_json(const SimConfig& cfg) {
  nlohmann::json j;
  j["name"] = cfg.name;
  j["n"] = cfg.spec.graph.node_count();

  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : cfg.spec.graph.edges()) edges.push_back({e.a, e.b});
  j["graph"]["edges"] = edges;
  j["formation"]["distances"] = cfg.spec.desired_dist;

  nlohmann::json init_pos = nlohmann::json::array();
  for (Eigen::Index i = 0; i < cfg.initial_positions.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index d = 0; d < cfg.initial_positions.cols(); ++d)
      row.push_back(cfg.initial_positions(i, d));
    init_pos.push_back(row);
  }
  j["initial"]["positions"] = init_pos;
  if (!cfg.initial_headings.empty()) j["initial"]["headings"] = cfg.initial_headings;

  nlohmann::json& c = j["controller"];
  c["gain_mode"] = cfg.controller.gain_mode == GainMode::kConstant ? "constant" : "state_dependent";
  c["alpha"] = cfg.controller.alpha;
  c["v_max"] = cfg.controller.v_max;
  c["k_vel"] = cfg.controller.k_vel;
  const Eigen::MatrixXd& a = cfg.controller.A;
  if (a.size() > 0 && (a.array() == a(0, 0)).all()) {
    c["A"] = a(0, 0);
  } else {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index d = 0; d < a.cols(); ++d) row.push_back(a(i, d));
      rows.push_back(row);
    }
    c["A"] = rows;
  }
  if (cfg.controller.sigma.size() > 0) {
    std::vector<double> sig(cfg.controller.sigma.data(),
                            cfg.controller.sigma.data() + cfg.controller.sigma.size());
    c["sigma"] = sig;
  } else {
    c["sigma_scale"] = cfg.controller.sigma_scale;
  }
  c["a_rule"]["type"] = cfg.controller.a_rule.kind == ARule::Kind::kScaled ? "scaled" : "fixed";
  c["a_rule"]["value"] = cfg.controller.a_rule.value;
  c["b"] = cfg.controller.b;
  c["c"] = cfg.controller.c;
  if (cfg.controller.cond1_broadcast_distance) c["cond1_broadcast_distance"] = true;

  nlohmann::json& p = j["plant"];
  p["model"] = cfg.plant.model == PlantModel::kSingleIntegrator ? "si" : "unicycle";
  p["dt"] = cfg.plant.dt;
  p["ell"] = cfg.plant.ell;
  if (std::isfinite(cfg.plant.v_max)) p["v_max"] = cfg.plant.v_max;

  j["trigger"]["mode"] = cfg.trigger_mode == TriggerMode::kEvent ? "event" : "periodic";
  if (cfg.trigger_mode == TriggerMode::kPeriodic) j["trigger"]["period"] = cfg.period;
  j["control_refresh"] =
      cfg.control_refresh == ControlRefresh::kTriggeredAgents ? "triggered" : "neighborhood";

  j["horizon"] = cfg.horizon;
  j["record_stride"] = cfg.record_stride;
  j["seed"] = cfg.seed;
  return j;
}

inline SimConfig config_from_json(const nlohmann::json& j) {
  SimConfig cfg;
  cfg.name = j.value("name", "custom");
  const int n = j.at("n").get<int>();

  std::vector<std::pair<int, int>> pairs;
  for (const auto& e : j.at("graph").at("edges"))
    pairs.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  const Graph g = Graph::from_edges(n, pairs);

  const auto& fj = j.at("formation");
  if (fj.contains("distances")) {
    // distances are listed in the order the edges were given; map them onto
    // the canonical edge order
    const auto dists_in = fj.at("distances").get<std::vector<double>>();
    if (dists_in.size() != pairs.size())
      throw std::invalid_argument("io: formation distance count does not match edge count");
    std::map<std::pair<int, int>, int> index;
    for (int k = 0; k < g.edge_count(); ++k)
      index[{g.edges()[k].a, g.edges()[k].b}] = k;
    std::vector<double> dists(pairs.size());
    for (size_t q = 0; q < pairs.size(); ++q) {
      const auto key = std::minmax(pairs[q].first, pairs[q].second);
      dists[index.at({key.first, key.second})] = dists_in[q];
    }
    cfg.spec = FormationSpec::from_distances(g, std::move(dists));
  } else if (fj.contains("target")) {
    const auto target_rows = fj.at("target").get<std::vector<std::vector<double>>>();
    if (static_cast<int>(target_rows.size()) != n)
      throw std::invalid_argument("io: formation target row count does not match n");
    Eigen::MatrixXd target(n, static_cast<Eigen::Index>(target_rows.at(0).size()));
    for (int i = 0; i < n; ++i)
      for (size_t d = 0; d < target_rows[i].size(); ++d)
        target(i, static_cast<Eigen::Index>(d)) = target_rows[i][d];
    cfg.spec = FormationSpec::from_target_placement(g, target);
  } else {
    throw std::invalid_argument("io: formation needs 'distances' or 'target'");
  }

  const auto pos_rows = j.at("initial").at("positions").get<std::vector<std::vector<double>>>();
  if (static_cast<int>(pos_rows.size()) != n)
    throw std::invalid_argument("io: initial position count does not match n");
  const int dim = static_cast<int>(pos_rows.at(0).size());
  cfg.initial_positions.resize(n, dim);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(pos_rows[i].size()) != dim)
      throw std::invalid_argument("io: ragged initial positions");
    for (int d = 0; d < dim; ++d) cfg.initial_positions(i, d) = pos_rows[i][d];
  }
  if (j.at("initial").contains("headings"))
    cfg.initial_headings = j.at("initial").at("headings").get<std::vector<double>>();

  const auto& c = j.at("controller");
  const std::string gain_mode = c.value("gain_mode", "constant");
  if (gain_mode == "constant") cfg.controller.gain_mode = GainMode::kConstant;
  else if (gain_mode == "state_dependent") cfg.controller.gain_mode = GainMode::kStateDependent;
  else throw std::invalid_argument("io: unknown gain_mode '" + gain_mode + "'");
  cfg.controller.alpha = c.value("alpha", cfg.controller.alpha);
  cfg.controller.v_max = c.value("v_max", cfg.controller.v_max);
  cfg.controller.k_vel = c.value("k_vel", cfg.controller.k_vel);
  const auto& aj = c.at("A");
  if (aj.is_number()) {
    cfg.controller.A = ControllerParams::uniform_A(n, dim, aj.get<double>());
  } else {
    const auto rows = aj.get<std::vector<std::vector<double>>>();
    if (static_cast<int>(rows.size()) != n)
      throw std::invalid_argument("io: A row count does not match n");
    cfg.controller.A.resize(n, dim);
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(rows[i].size()) != dim)
        throw std::invalid_argument("io: ragged A matrix");
      for (int d = 0; d < dim; ++d) cfg.controller.A(i, d) = rows[i][d];
    }
  }
  if (c.contains("sigma")) {
    const auto sig = c.at("sigma").get<std::vector<double>>();
    cfg.controller.sigma =
        Eigen::Map<const Eigen::VectorXd>(sig.data(), static_cast<Eigen::Index>(sig.size()));
  } else {
    cfg.controller.sigma_scale = c.value("sigma_scale", cfg.controller.sigma_scale);
  }
  if (c.contains("a_rule")) {
    const std::string kind = c.at("a_rule").value("type", "scaled");
    if (kind == "scaled") cfg.controller.a_rule.kind = ARule::Kind::kScaled;
    else if (kind == "fixed") cfg.controller.a_rule.kind = ARule::Kind::kFixed;
    else throw std::invalid_argument("io: unknown a_rule type '" + kind + "'");
    cfg.controller.a_rule.value = c.at("a_rule").value("value", cfg.controller.a_rule.value);
  }
  cfg.controller.b = c.value("b", cfg.controller.b);
  cfg.controller.c = c.value("c", cfg.controller.c);
  cfg.controller.cond1_broadcast_distance =
      c.value("cond1_broadcast_distance", cfg.controller.cond1_broadcast_distance);

  const auto& p = j.at("plant");
  const std::string model = p.value("model", "si");
  if (model == "si") cfg.plant.model = PlantModel::kSingleIntegrator;
  else if (model == "unicycle") cfg.plant.model = PlantModel::kUnicycle;
  else throw std::invalid_argument("io: unknown plant model '" + model + "'");
  cfg.plant.dt = p.at("dt").get<double>();
  cfg.plant.ell = p.value("ell", cfg.plant.ell);
  cfg.plant.v_max =
      p.contains("v_max") ? p.at("v_max").get<double>() : std::numeric_limits<double>::infinity();

  const std::string mode = j.at("trigger").value("mode", "event");
  if (mode == "event") cfg.trigger_mode = TriggerMode::kEvent;
  else if (mode == "periodic") cfg.trigger_mode = TriggerMode::kPeriodic;
  else throw std::invalid_argument("io: unknown trigger mode '" + mode + "'");
  cfg.period = j.at("trigger").value("period", 1);
  const std::string refresh = j.value("control_refresh", "triggered");
  if (refresh == "triggered") cfg.control_refresh = ControlRefresh::kTriggeredAgents;
  else if (refresh == "neighborhood") cfg.control_refresh = ControlRefresh::kNeighborhood;
  else throw std::invalid_argument("io: unknown control_refresh '" + refresh + "'");

  cfg.horizon = j.at("horizon").get<double>();
  cfg.record_stride = j.value("record_stride", 1);
  cfg.seed = j.value("seed", std::uint64_t{0});
  return cfg;
}

inline SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("io: cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
    return config_from_json(j);
  } catch (const nlohmann::json::exception& ex) {
    throw std::invalid_argument("io: bad config '" + path + "': " + ex.what());
  }
}

inline void save_config(const SimConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("io: cannot write config '" + path + "'");
  out << config_to_json(cfg).dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Run artifacts (CSV / key=value)

struct RunArtifacts {
  std::string trace_path;
  std::string events_path;
  std::string summary_path;
  std::string sweep_path;
};

inline void write_trace_csv(std::ostream& out, const SimTrace& tr, int dim) {
  out << "t,agent";
  for (int d = 1; d <= dim; ++d) out << ",x_" << d;
  for (int d = 1; d <= dim; ++d) out << ",u_" << d;
  out << ",e_norm,triggered,condition\n";
  for (size_t s = 0; s < tr.times.size(); ++s) {
    const auto& pos = tr.positions[s];
    const auto& u = tr.controls[s];
    for (Eigen::Index i = 0; i < pos.rows(); ++i) {
      out << format_double(tr.times[s]) << ',' << i;
      for (int d = 0; d < dim; ++d) out << ',' << format_double(pos(i, d));
      for (int d = 0; d < dim; ++d) out << ',' << format_double(u(i, d));
      const int cond = tr.conditions[s][static_cast<size_t>(i)];
      out << ',' << format_double(tr.e_norms[s](i)) << ',' << (cond >= 0 ? 1 : 0) << ','
          << condition_name(cond) << '\n';
    }
  }
}

inline void write_events_csv(std::ostream& out, const std::vector<TriggerRecord>& events) {
  out << "t,agent,condition,lhs,threshold\n";
  for (const TriggerRecord& r : events)
    out << format_double(r.time) << ',' << r.agent << ','
        << condition_name(condition_code(r.condition)) << ',' << format_double(r.lhs) << ','
        << format_double(r.threshold) << '\n';
}

inline void write_summary(std::ostream& out, const RunSummary& s) {
  out << "scenario=" << s.scenario << '\n';
  out << "trigger=" << s.trigger << '\n';
  out << "n=" << s.n << '\n';
  out << "dim=" << s.dim << '\n';
  out << "dt=" << format_double(s.dt) << '\n';
  out << "steps=" << s.steps << '\n';
  out << "horizon=" << format_double(s.horizon) << '\n';
  out << "tau1_avg=" << format_double(s.tau1_avg) << '\n';
  out << "tau2_avg=" << format_double(s.tau2_avg) << '\n';
  out << "periodic_avg=" << format_double(s.periodic_avg) << '\n';
  out << "total_updates_avg=" << format_double(s.total_updates_avg) << '\n';
  out << "F_initial=" << format_double(s.f_initial) << '\n';
  out << "F_final=" << format_double(s.f_final) << '\n';
  out << "V_initial=" << format_double(s.v_initial) << '\n';
  out << "V_final=" << format_double(s.v_final) << '\n';
  out << "saturation=" << (s.saturation ? 1 : 0) << '\n';
  out << "centroid_drift=" << format_double(s.centroid_drift) << '\n';
  out << "v_descent_fraction=" << format_double(s.v_descent_fraction) << '\n';
  out << "wall_time_s=" << format_double(s.wall_time_s) << '\n';
}

struct SweepCellRow {
  double alpha = 0.0;
  double A = 0.0;
  double f_final = 0.0;
  double triggers_total = 0.0;
  bool saturated = false;
};

template <typename Cell>
inline void write_sweep_csv(std::ostream& out, const std::vector<Cell>& cells) {
  out << "alpha,A,F_T,triggers_total,saturated\n";
  for (const auto& c : cells)
    out << format_double(c.alpha) << ',' << format_double(c.A) << ','
        << format_double(c.f_final) << ',' << format_double(c.triggers_total) << ','
        << (c.saturated ? 1 : 0) << '\n';
}

// ---------------------------------------------------------------------------
// Readers (round-trip checks and downstream tooling)

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

struct TraceRow {
  double t = 0.0;
  int agent = 0;
  std::vector<double> x;
  std::vector<double> u;
  double e_norm = 0.0;
  bool triggered = false;
  int condition = -1;  // same coding as SimTrace::conditions
};

inline std::vector<TraceRow> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("io: empty trace file");
  const auto header = split_csv_line(line);
  if (header.size() < 5 || header[0] != "t" || header[1] != "agent")
    throw std::invalid_argument("io: bad trace header");
  const int dim = static_cast<int>((header.size() - 5) / 2);
  std::vector<TraceRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (static_cast<int>(f.size()) != 5 + 2 * dim)
      throw std::invalid_argument("io: bad trace row");
    TraceRow r;
    r.t = parse_double(f[0]);
    r.agent = static_cast<int>(parse_int(f[1]));
    for (int d = 0; d < dim; ++d) r.x.push_back(parse_double(f[2 + d]));
    for (int d = 0; d < dim; ++d) r.u.push_back(parse_double(f[2 + dim + d]));
    r.e_norm = parse_double(f[2 + 2 * dim]);
    r.triggered = parse_int(f[3 + 2 * dim]) != 0;
    r.condition = condition_from_name(f[4 + 2 * dim]);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<TriggerRecord> read_events_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("io: empty events file");
  if (line != "t,agent,condition,lhs,threshold")
    throw std::invalid_argument("io: bad events header");
  std::vector<TriggerRecord> events;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 5) throw std::invalid_argument("io: bad events row");
    TriggerRecord r;
    r.time = parse_double(f[0]);
    r.agent = static_cast<int>(parse_int(f[1]));
    const int code = condition_from_name(f[2]);
    switch (code) {
      case 0: r.condition = TriggerCondition::kInitial; break;
      case 1: r.condition = TriggerCondition::kCondition1; break;
      case 2: r.condition = TriggerCondition::kCondition2; break;
      case 3: r.condition = TriggerCondition::kPeriodic; break;
      default: throw std::invalid_argument("io: bad event condition");
    }
    r.lhs = parse_double(f[3]);
    r.threshold = parse_double(f[4]);
    events.push_back(r);
  }
  return events;
}

inline std::map<std::string, std::string> read_summary(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("io: bad summary line");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

inline std::vector<SweepCellRow> read_sweep_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("io: empty sweep file");
  if (line != "alpha,A,F_T,triggers_total,saturated")
    throw std::invalid_argument("io: bad sweep header");
  std::vector<SweepCellRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 5) throw std::invalid_argument("io: bad sweep row");
    rows.push_back({parse_double(f[0]), parse_double(f[1]), parse_double(f[2]),
                    parse_double(f[3]), parse_int(f[4]) != 0});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// File helpers

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("io: cannot write '" + path + "'");
  out << content;
}

inline std::string trace_csv_string(const SimTrace& tr, int dim) {
  std::ostringstream os;
  write_trace_csv(os, tr, dim);
  return os.str();
}

inline std::string events_csv_string(const SimTrace& tr) {
  std::ostringstream os;
  write_events_csv(os, tr.events);
  return os.str();
}

inline std::string summary_string(const RunSummary& s) {
  std::ostringstream os;
  write_summary(os, s);
  return os.str();
}

// Write the standard artifact set for one run into `dir`.
inline RunArtifacts write_run_artifacts(const std::string& dir, const SimConfig& cfg,
                                        const SimTrace& tr) {
  std::filesystem::create_directories(dir);
  RunArtifacts art;
  art.trace_path = (std::filesystem::path(dir) / "trace.csv").string();
  art.events_path = (std::filesystem::path(dir) / "events.csv").string();
  art.summary_path = (std::filesystem::path(dir) / "summary.txt").string();
  write_file(art.trace_path, trace_csv_string(tr, cfg.dim()));
  write_file(art.events_path, events_csv_string(tr));
  write_file(art.summary_path, summary_string(summarize(cfg, tr)));
  return art;
}

}  // namespace etfc
