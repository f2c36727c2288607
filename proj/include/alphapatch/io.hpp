#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "alphapatch/bounds.hpp"
#include "alphapatch/diagnostics.hpp"
#include "alphapatch/dynamics.hpp"
#include "alphapatch/errors.hpp"
#include "alphapatch/fields.hpp"

namespace alphapatch {

inline constexpr const char* kVersion = "0.1.0";

namespace fs = std::filesystem;
using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Config (flat JSON with a tagged initial_condition object)

namespace detail {

inline void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw ConfigError(where + it.key(), "unknown key");
  }
}

template <typename T>
T get_field(const json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + key, std::string("bad value: ") + e.what());
  }
}

inline std::size_t line_of_offset(const std::string& text, std::size_t offset) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

}  // namespace detail

inline InitialCondition initial_condition_from_json(const json& j) {
  const std::string w = "initial_condition.";
  if (!j.is_object()) throw ConfigError("initial_condition", "must be an object with a \"type\" key");
  detail::reject_unknown(j, {"type", "R0", "theta0", "inner_radius", "n_blobs", "aspect"}, w);
  InitialCondition ic;
  if (!j.contains("type")) throw ConfigError("initial_condition.type", "missing");
  ic.type = detail::get_field<std::string>(j, "type", w);
  if (j.contains("R0")) ic.R0 = detail::get_field<double>(j, "R0", w);
  if (j.contains("theta0")) ic.theta0 = detail::get_field<double>(j, "theta0", w);
  if (j.contains("inner_radius")) ic.inner_radius = detail::get_field<double>(j, "inner_radius", w);
  if (j.contains("n_blobs")) ic.n_blobs = detail::get_field<int>(j, "n_blobs", w);
  if (j.contains("aspect")) ic.aspect = detail::get_field<double>(j, "aspect", w);
  return ic;
}

/// Builds and validates a SimConfig. Required keys: alpha, t_end, initial_condition.
inline SimConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("", "config must be a JSON object");
  detail::reject_unknown(j,
                         {"alpha", "dt", "t_end", "integrator", "representation", "output_stride",
                          "seed", "initial_condition", "n_particles", "n_nodes", "eps", "n_max",
                          "snapshot_every"},
                         "");
  for (const char* key : {"alpha", "t_end", "initial_condition"})
    if (!j.contains(key)) throw ConfigError(key, "missing required key");
  SimConfig c;
  c.alpha = detail::get_field<double>(j, "alpha", "");
  c.t_end = detail::get_field<double>(j, "t_end", "");
  c.initial_condition = initial_condition_from_json(j.at("initial_condition"));
  if (j.contains("dt")) c.dt = detail::get_field<double>(j, "dt", "");
  if (j.contains("integrator")) c.integrator = detail::get_field<std::string>(j, "integrator", "");
  if (j.contains("representation")) {
    const auto r = detail::get_field<std::string>(j, "representation", "");
    if (r == "particles") c.representation = Representation::particles;
    else if (r == "contour") c.representation = Representation::contour;
    else throw ConfigError("representation", "must be \"particles\" or \"contour\"");
  }
  if (j.contains("output_stride")) c.output_stride = detail::get_field<int>(j, "output_stride", "");
  if (j.contains("seed")) c.seed = detail::get_field<std::uint64_t>(j, "seed", "");
  if (j.contains("n_particles")) c.n_particles = detail::get_field<std::size_t>(j, "n_particles", "");
  if (j.contains("n_nodes")) c.n_nodes = detail::get_field<std::size_t>(j, "n_nodes", "");
  if (j.contains("eps") && !j.at("eps").is_null()) c.eps = detail::get_field<double>(j, "eps", "");
  if (j.contains("n_max")) c.n_max = detail::get_field<int>(j, "n_max", "");
  if (j.contains("snapshot_every")) c.snapshot_every = detail::get_field<int>(j, "snapshot_every", "");
  validate(c);
  return c;
}

inline json config_to_json(const SimConfig& c) {
  const InitialCondition& ic = c.initial_condition;
  json j;
  j["alpha"] = c.alpha;
  j["dt"] = c.dt;
  j["t_end"] = c.t_end;
  j["integrator"] = c.integrator;
  j["representation"] = to_string(c.representation);
  j["output_stride"] = c.output_stride;
  j["seed"] = c.seed;
  j["n_particles"] = c.n_particles;
  j["n_nodes"] = c.n_nodes;
  j["eps"] = c.eps ? json(*c.eps) : json(nullptr);
  j["n_max"] = c.n_max;
  j["snapshot_every"] = c.snapshot_every;
  j["initial_condition"] = {{"type", ic.type},           {"R0", ic.R0},
                            {"theta0", ic.theta0},       {"inner_radius", ic.inner_radius},
                            {"n_blobs", ic.n_blobs},     {"aspect", ic.aspect}};
  return j;
}

inline json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", source + ":" + std::to_string(detail::line_of_offset(text, e.byte)) +
                              ": parse error: " + e.what());
  }
}

inline std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline SimConfig parse_config(const fs::path& path) {
  return config_from_json(parse_json_text(read_text_file(path), path.string()));
}

// Writes via a temporary file and rename so readers never see a partial file.
inline void write_text_atomic(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << text;
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline void write_config(const fs::path& path, const SimConfig& c) {
  write_text_atomic(path, config_to_json(c).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError(where + ": cannot parse number '" + s + "'");
  }
}

// Parses "# tag key=value key=value" into a map.
inline std::map<std::string, std::string> parse_header_comment(const std::string& line) {
  std::map<std::string, std::string> out;
  std::istringstream ss(line.substr(1));
  std::string tok;
  while (ss >> tok) {
    const auto eq = tok.find('=');
    if (eq != std::string::npos) out[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return out;
}

}  // namespace detail

inline std::string diagnostics_csv_header(int n_max) {
  std::string h = "t,mass,max_theta,cx,cy,inertia,r_supp";
  for (int n = 1; n <= n_max; ++n) h += ",m" + std::to_string(n);
  return "# alphapatch diagnostics v1\n" + h + "\n";
}

inline std::string diagnostics_csv_row(const DiagnosticsRecord& r) {
  using detail::fmt;
  std::string s = fmt(r.t) + "," + fmt(r.mass) + "," + fmt(r.max_theta) + "," + fmt(r.center.x1) +
                  "," + fmt(r.center.x2) + "," + fmt(r.inertia) + "," + fmt(r.support_radius);
  for (double m : r.moments) s += "," + fmt(m);
  return s + "\n";
}

inline std::vector<DiagnosticsRecord> read_diagnostics_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  std::vector<DiagnosticsRecord> out;
  std::size_t columns = 0, lineno = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    auto cells = detail::split(line, ',');
    if (!saw_header) {
      if (cells.size() < 7 || cells[0] != "t") throw IoError(where + ": bad diagnostics header");
      columns = cells.size();
      saw_header = true;
      continue;
    }
    if (cells.size() != columns)
      throw IoError(where + ": expected " + std::to_string(columns) + " columns, got " +
                    std::to_string(cells.size()));
    DiagnosticsRecord r;
    r.t = detail::parse_double(cells[0], where);
    r.mass = detail::parse_double(cells[1], where);
    r.max_theta = detail::parse_double(cells[2], where);
    r.center = {detail::parse_double(cells[3], where), detail::parse_double(cells[4], where)};
    r.inertia = detail::parse_double(cells[5], where);
    r.support_radius = detail::parse_double(cells[6], where);
    for (std::size_t k = 7; k < columns; ++k) r.moments.push_back(detail::parse_double(cells[k], where));
    out.push_back(std::move(r));
  }
  if (!saw_header) throw IoError(path.string() + ": missing diagnostics header");
  return out;
}

inline std::string snapshot_csv(const Field& field, double t) {
  using detail::fmt;
  std::string s;
  if (const auto* pf = std::get_if<ParticleField>(&field)) {
    s = "# alphapatch snapshot v1 kind=particles t=" + fmt(t) + " eps=" + fmt(pf->eps) +
        " max_theta=" + fmt(pf->max_theta_density) + "\nx1,x2,w\n";
    for (std::size_t i = 0; i < pf->size(); ++i)
      s += fmt(pf->positions[i].x1) + "," + fmt(pf->positions[i].x2) + "," + fmt(pf->weights[i]) + "\n";
  } else {
    const auto& patch = std::get<ContourPatch>(field);
    s = "# alphapatch snapshot v1 kind=contour t=" + fmt(t) + " theta0=" + fmt(patch.theta0) +
        " target_spacing=" + fmt(patch.target_spacing) + "\nx1,x2\n";
    for (const Vec2& v : patch.nodes) s += fmt(v.x1) + "," + fmt(v.x2) + "\n";
  }
  return s;
}

inline Field read_snapshot_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("# alphapatch snapshot", 0) != 0)
    throw IoError(path.string() + ": not a snapshot file");
  const auto meta = detail::parse_header_comment(line);
  auto meta_value = [&](const std::string& key) {
    auto it = meta.find(key);
    if (it == meta.end()) throw IoError(path.string() + ": header lacks " + key);
    return detail::parse_double(it->second, path.string());
  };
  const auto kind = meta.count("kind") ? meta.at("kind") : std::string();
  const std::size_t columns = kind == "particles" ? 3 : 2;
  if (kind != "particles" && kind != "contour") throw IoError(path.string() + ": unknown kind");
  std::getline(in, line);  // column names
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    const auto cells = detail::split(line, ',');
    if (cells.size() != columns) throw IoError(where + ": wrong column count");
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(detail::parse_double(c, where));
    rows.push_back(std::move(row));
  }
  if (kind == "particles") {
    ParticleField f;
    f.eps = meta_value("eps");
    f.max_theta_density = meta_value("max_theta");
    for (const auto& r : rows) {
      f.positions.push_back({r[0], r[1]});
      f.weights.push_back(r[2]);
    }
    try {
      validate(f);
    } catch (const std::exception& e) {
      throw IoError(path.string() + ": " + e.what());
    }
    return f;
  }
  ContourPatch p;
  p.theta0 = meta_value("theta0");
  p.target_spacing = meta_value("target_spacing");
  for (const auto& r : rows) p.nodes.push_back({r[0], r[1]});
  if (p.nodes.size() < kMinContourNodes) throw IoError(path.string() + ": too few contour nodes");
  return p;
}

// ---------------------------------------------------------------------------
// Bound reports

inline json report_to_json(const BoundReport& r) {
  json constants = json::object();
  for (const auto& [k, v] : r.constants) constants[k] = std::isfinite(v) ? json(v) : json(nullptr);
  return {{"check_name", r.check_name},
          {"constants", constants},
          {"verdict", r.pass ? "pass" : "fail"},
          {"margin", std::isfinite(r.margin) ? json(r.margin) : json(nullptr)},
          {"samples", r.samples},
          {"notes", r.notes}};
}

inline BoundReport report_from_json(const json& j) {
  BoundReport r;
  r.check_name = j.at("check_name").get<std::string>();
  for (auto it = j.at("constants").begin(); it != j.at("constants").end(); ++it)
    r.constants[it.key()] = it->is_null() ? std::numeric_limits<double>::quiet_NaN() : it->get<double>();
  r.pass = j.at("verdict").get<std::string>() == "pass";
  r.margin = j.at("margin").is_null() ? std::numeric_limits<double>::quiet_NaN() : j.at("margin").get<double>();
  r.samples = j.at("samples").get<std::size_t>();
  r.notes = j.at("notes").get<std::vector<std::string>>();
  return r;
}

// ---------------------------------------------------------------------------
// Trajectory directories: manifest.json + diagnostics.csv + snapshots/*.csv

/// Loads a trajectory written by cmd_simulate. Every snapshot listed in the
/// manifest must exist and the diagnostics row count must match.
inline Trajectory load_trajectory(const fs::path& dir, SimConfig* config_out = nullptr) {
  const fs::path manifest_path = dir / "manifest.json";
  json m;
  try {
    m = json::parse(read_text_file(manifest_path));
  } catch (const json::exception& e) {
    throw IoError(manifest_path.string() + ": " + e.what());
  }
  SimConfig cfg;
  try {
    cfg = config_from_json(m.at("config"));
  } catch (const std::exception& e) {
    throw IoError(manifest_path.string() + ": bad config echo: " + e.what());
  }
  if (config_out) *config_out = cfg;

  Trajectory traj;
  try {
    traj.alpha = cfg.alpha;
    traj.R0 = m.at("R0").get<double>();
    traj.dt = m.at("dt").get<double>();
    const auto records = read_diagnostics_csv(dir / m.at("files").at("diagnostics").get<std::string>());
    const auto& listed = m.at("files").at("snapshots");
    const std::size_t expected = m.at("records").get<std::size_t>();
    if (records.size() != expected)
      throw IoError("diagnostics.csv has " + std::to_string(records.size()) + " rows, manifest lists " +
                    std::to_string(expected));
    for (const auto& rec : records) {
      Snapshot s;
      s.t = rec.t;
      s.diagnostics = rec;
      traj.snapshots.push_back(std::move(s));
    }
    for (const auto& entry : listed) {
      const std::size_t index = entry.at("record").get<std::size_t>();
      if (index >= traj.snapshots.size()) throw IoError("snapshot record index out of range");
      traj.snapshots[index].step = entry.at("step").get<std::size_t>();
      traj.snapshots[index].field = read_snapshot_csv(dir / entry.at("path").get<std::string>());
    }
  } catch (const json::exception& e) {
    throw IoError(manifest_path.string() + ": " + e.what());
  }
  if (traj.snapshots.empty()) throw IoError(dir.string() + ": trajectory has no records");
  return traj;
}

}  // namespace alphapatch
