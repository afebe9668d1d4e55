#pragma once

// Text formats: model files, drive files, experiment specs, the plain-text
// matrix cache and CSV outputs. All share one line-oriented grammar:
// `[section optional-name]` headers, whitespace-separated tokens, `#` comments.

#include <charconv>
#include <complex>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "eddy/errors.hpp"
#include "eddy/linalg.hpp"
#include "eddy/ndt.hpp"
#include "eddy/network.hpp"
#include "eddy/observer.hpp"
#include "eddy/reduction.hpp"

#ifndef EDDY_VERSION
#define EDDY_VERSION "0.1.0"
#endif

namespace eddy {

inline constexpr const char* version = EDDY_VERSION;

// ---------------------------------------------------------------------------
// Tokenizer

struct TextLine {
  std::size_t number = 0;  // 1-based
  std::vector<std::string> tokens;
};

struct TextSection {
  std::string name;
  std::string label;  // optional second word of the header
  std::size_t number = 0;
  std::vector<TextLine> lines;
};

namespace detail {

inline std::vector<std::string> split_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace detail

inline std::vector<TextSection> parse_sections(std::string_view text) {
  std::vector<TextSection> out;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++number;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto tokens = detail::split_tokens(line);
    if (tokens.empty()) continue;
    if (tokens.front().front() == '[') {
      std::string header;
      for (const auto& t : tokens) header += (header.empty() ? "" : " ") + t;
      if (header.size() < 3 || header.back() != ']') throw ParseError(number, "malformed section header");
      const auto words = detail::split_tokens(std::string_view(header).substr(1, header.size() - 2));
      if (words.empty() || words.size() > 2) throw ParseError(number, "section header needs a name and at most one label");
      out.push_back({words[0], words.size() == 2 ? words[1] : std::string{}, number, {}});
      continue;
    }
    if (out.empty()) throw ParseError(number, "content before the first section header");
    out.back().lines.push_back({number, std::move(tokens)});
  }
  return out;
}

inline double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && s.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw ParseError(line, "expected a number, got '" + s + "'");
  return v;
}

inline std::size_t parse_index(const std::string& s, std::size_t line) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ParseError(line, "expected a non-negative integer, got '" + s + "'");
  return v;
}


/// Shortest decimal form that reads back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << content;
  if (!out) throw InputError("write to '" + path + "' failed");
}

namespace detail {

inline void expect_tokens(const TextLine& l, std::size_t n, const char* what) {
  if (l.tokens.size() != n)
    throw ParseError(l.number, std::string(what) + " expects " + std::to_string(n) + " fields, got " +
                                   std::to_string(l.tokens.size()));
}

/// `key value...` lines of a section, with duplicate keys rejected.
inline std::map<std::string, TextLine> key_values(const TextSection& s) {
  std::map<std::string, TextLine> out;
  for (const auto& l : s.lines) {
    if (!out.emplace(l.tokens[0], l).second) throw ParseError(l.number, "duplicate key '" + l.tokens[0] + "'");
  }
  return out;
}

inline double number_value(const TextLine& l) {
  expect_tokens(l, 2, l.tokens[0].c_str());
  return parse_double(l.tokens[1], l.number);
}

inline std::size_t index_value(const TextLine& l) {
  expect_tokens(l, 2, l.tokens[0].c_str());
  return parse_index(l.tokens[1], l.number);
}

inline Vector number_list(const TextLine& l) {
  Vector v;
  for (std::size_t i = 1; i < l.tokens.size(); ++i) v.push_back(parse_double(l.tokens[i], l.number));
  return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Model files
//
//   [nodes]       id x y z
//   [branches]    id a b radius resistivity cross_section
//   [electrodes]  name node...          (last one is the reference)
//   [sources]     name free|port=K x y z x y z ...

inline LoopNetwork parse_model(std::string_view text) {
  LoopNetwork net;
  bool seen_nodes = false;
  for (const auto& s : parse_sections(text)) {
    if (s.name == "nodes") {
      seen_nodes = true;
      for (const auto& l : s.lines) {
        detail::expect_tokens(l, 4, "node");
        if (parse_index(l.tokens[0], l.number) != net.nodes.size())
          throw ParseError(l.number, "node ids must be consecutive from 0");
        net.nodes.push_back(
            {parse_double(l.tokens[1], l.number), parse_double(l.tokens[2], l.number), parse_double(l.tokens[3], l.number)});
      }
    } else if (s.name == "branches") {
      for (const auto& l : s.lines) {
        detail::expect_tokens(l, 6, "branch");
        if (parse_index(l.tokens[0], l.number) != net.branches.size())
          throw ParseError(l.number, "branch ids must be consecutive from 0");
        net.branches.push_back({parse_index(l.tokens[1], l.number), parse_index(l.tokens[2], l.number),
                                parse_double(l.tokens[3], l.number), parse_double(l.tokens[4], l.number),
                                parse_double(l.tokens[5], l.number)});
      }
    } else if (s.name == "electrodes") {
      for (const auto& l : s.lines) {
        if (l.tokens.size() < 2) throw ParseError(l.number, "electrode needs a name and at least one node");
        Electrode e{l.tokens[0], {}};
        for (std::size_t i = 1; i < l.tokens.size(); ++i) e.nodes.push_back(parse_index(l.tokens[i], l.number));
        net.electrodes.push_back(std::move(e));
      }
    } else if (s.name == "sources") {
      for (const auto& l : s.lines) {
        if (l.tokens.size() < 8 || (l.tokens.size() - 2) % 3 != 0)
          throw ParseError(l.number, "source needs a name, a binding and at least two points");
        SourceCoil c;
        c.name = l.tokens[0];
        const auto& b = l.tokens[1];
        if (b == "free") {
          c.binding = SourceBinding::free;
        } else if (b.rfind("port=", 0) == 0) {
          c.binding = SourceBinding::port;
          c.port = parse_index(b.substr(5), l.number);
        } else {
          throw ParseError(l.number, "source binding must be 'free' or 'port=K'");
        }
        for (std::size_t i = 2; i < l.tokens.size(); i += 3)
          c.points.push_back({parse_double(l.tokens[i], l.number), parse_double(l.tokens[i + 1], l.number),
                              parse_double(l.tokens[i + 2], l.number)});
        net.sources.push_back(std::move(c));
      }
    } else {
      throw ParseError(s.number, "unknown section '" + s.name + "'");
    }
  }
  if (!seen_nodes) throw ParseError(1, "model has no [nodes] section");
  validate(net);
  return net;
}

inline std::string serialize_model(const LoopNetwork& net) {
  std::string o = "# eddy model\n[nodes]\n";
  for (std::size_t i = 0; i < net.nodes.size(); ++i) {
    const auto& p = net.nodes[i];
    o += std::to_string(i) + ' ' + format_double(p.x) + ' ' + format_double(p.y) + ' ' + format_double(p.z) + '\n';
  }
  o += "[branches]\n";
  for (std::size_t i = 0; i < net.branches.size(); ++i) {
    const auto& b = net.branches[i];
    o += std::to_string(i) + ' ' + std::to_string(b.node_a) + ' ' + std::to_string(b.node_b) + ' ' +
         format_double(b.radius) + ' ' + format_double(b.resistivity) + ' ' + format_double(b.cross_section) + '\n';
  }
  if (!net.electrodes.empty()) {
    o += "[electrodes]\n";
    for (const auto& e : net.electrodes) {
      o += e.name;
      for (auto n : e.nodes) o += ' ' + std::to_string(n);
      o += '\n';
    }
  }
  if (!net.sources.empty()) {
    o += "[sources]\n";
    for (const auto& c : net.sources) {
      o += c.name + (c.binding == SourceBinding::free ? std::string(" free") : " port=" + std::to_string(c.port));
      for (const auto& p : c.points) o += ' ' + format_double(p.x) + ' ' + format_double(p.y) + ' ' + format_double(p.z);
      o += '\n';
    }
  }
  return o;
}

inline LoopNetwork load_model(const std::string& path) { return parse_model(read_file(path)); }

// ---------------------------------------------------------------------------
// Drive files
//
//   [drive]   port_weights w...   coil_weights w...   phases default
//   [tones]   amplitude frequency phase

inline DriveSignal parse_drive(std::string_view text) {
  DriveSignal d;
  bool default_phase = false;
  for (const auto& s : parse_sections(text)) {
    if (s.name == "drive") {
      for (const auto& [key, l] : detail::key_values(s)) {
        if (key == "port_weights")
          d.port_weights = detail::number_list(l);
        else if (key == "coil_weights")
          d.coil_weights = detail::number_list(l);
        else if (key == "phases") {
          if (l.tokens.size() != 2 || l.tokens[1] != "default") throw ParseError(l.number, "only 'phases default' is supported");
          default_phase = true;
        } else
          throw ParseError(l.number, "unknown drive key '" + key + "'");
      }
    } else if (s.name == "tones") {
      for (const auto& l : s.lines) {
        detail::expect_tokens(l, 3, "tone");
        d.tones.push_back(
            {parse_double(l.tokens[0], l.number), parse_double(l.tokens[1], l.number), parse_double(l.tokens[2], l.number)});
      }
    } else {
      throw ParseError(s.number, "unknown section '" + s.name + "'");
    }
  }
  if (default_phase && !d.tones.empty()) {
    const auto ph = default_phases(d.tones.size());
    for (std::size_t k = 0; k < d.tones.size(); ++k) d.tones[k].phase = ph[k];
  }
  d.validate();
  return d;
}

inline std::string serialize_drive(const DriveSignal& d) {
  std::string o = "[drive]\nport_weights";
  for (double w : d.port_weights) o += ' ' + format_double(w);
  o += "\ncoil_weights";
  for (double w : d.coil_weights) o += ' ' + format_double(w);
  o += "\n[tones]\n# amplitude_A frequency_Hz phase_rad\n";
  for (const auto& t : d.tones)
    o += format_double(t.amplitude) + ' ' + format_double(t.frequency) + ' ' + format_double(t.phase) + '\n';
  return o;
}

// ---------------------------------------------------------------------------
// Experiment specs
//
//   [geometry]    radius length wall_thickness n_axial n_circumferential resistivity
//   [electrodes]  name top|bottom angle           (last one is the reference)
//   [drive]       port_weights w...   phases default
//   [tones]       amplitude frequency phase
//   [probes]      count offset height span center
//   [analysis]    sample_rate settle_multiple settle_time window method theta quad_order
//   [defect NAME] mode remove|scale  factor  angle_min angle_max z_min z_max
//                 (an empty defect section is a defect-free control run)

inline Solver parse_solver(const std::string& s, std::size_t line) {
  if (s == "td1") return Solver::td1;
  if (s == "td2") return Solver::td2;
  if (s == "fd") return Solver::fd;
  throw ParseError(line, "method must be td1, td2 or fd");
}

inline ExperimentSpec parse_experiment(std::string_view text) {
  ExperimentSpec spec = default_experiment();
  spec.defects.clear();
  bool tones_given = false;
  bool electrodes_given = false;
  bool default_phase = false;
  for (const auto& s : parse_sections(text)) {
    if (s.name == "geometry") {
      for (const auto& [key, l] : detail::key_values(s)) {
        auto& g = spec.geometry;
        if (key == "radius") g.radius = detail::number_value(l);
        else if (key == "length") g.length = detail::number_value(l);
        else if (key == "wall_thickness") g.wall_thickness = detail::number_value(l);
        else if (key == "n_axial") g.n_axial = detail::index_value(l);
        else if (key == "n_circumferential") g.n_circumferential = detail::index_value(l);
        else if (key == "resistivity") g.resistivity = detail::number_value(l);
        else throw ParseError(l.number, "unknown geometry key '" + key + "'");
      }
    } else if (s.name == "electrodes") {
      if (!electrodes_given) spec.electrodes.placements.clear();
      electrodes_given = true;
      for (const auto& l : s.lines) {
        detail::expect_tokens(l, 3, "electrode");
        EndRing ring{};
        if (l.tokens[1] == "top") ring = EndRing::top;
        else if (l.tokens[1] == "bottom") ring = EndRing::bottom;
        else throw ParseError(l.number, "electrode ring must be top or bottom");
        spec.electrodes.placements.push_back({l.tokens[0], ring, parse_double(l.tokens[2], l.number)});
      }
    } else if (s.name == "drive") {
      for (const auto& [key, l] : detail::key_values(s)) {
        if (key == "port_weights") spec.port_weights = detail::number_list(l);
        else if (key == "phases") {
          if (l.tokens.size() != 2 || l.tokens[1] != "default") throw ParseError(l.number, "only 'phases default' is supported");
          default_phase = true;
        } else throw ParseError(l.number, "unknown drive key '" + key + "'");
      }
    } else if (s.name == "tones") {
      if (!tones_given) spec.tones.clear();
      tones_given = true;
      for (const auto& l : s.lines) {
        detail::expect_tokens(l, 3, "tone");
        spec.tones.push_back(
            {parse_double(l.tokens[0], l.number), parse_double(l.tokens[1], l.number), parse_double(l.tokens[2], l.number)});
      }
    } else if (s.name == "probes") {
      for (const auto& [key, l] : detail::key_values(s)) {
        auto& p = spec.probes;
        if (key == "count") p.count = detail::index_value(l);
        else if (key == "offset") p.offset = detail::number_value(l);
        else if (key == "height") p.height = detail::number_value(l);
        else if (key == "span") p.span = detail::number_value(l);
        else if (key == "center") p.center = detail::number_value(l);
        else throw ParseError(l.number, "unknown probe key '" + key + "'");
      }
    } else if (s.name == "analysis") {
      for (const auto& [key, l] : detail::key_values(s)) {
        if (key == "sample_rate") spec.sample_rate = detail::number_value(l);
        else if (key == "settle_multiple") spec.settle_multiple = detail::number_value(l);
        else if (key == "settle_time") spec.settle_time = detail::number_value(l);
        else if (key == "window") spec.window = detail::number_value(l);
        else if (key == "theta") spec.theta = detail::number_value(l);
        else if (key == "quad_order") spec.quad_order = static_cast<int>(detail::index_value(l));
        else if (key == "method") {
          detail::expect_tokens(l, 2, "method");
          spec.method = parse_solver(l.tokens[1], l.number);
        } else throw ParseError(l.number, "unknown analysis key '" + key + "'");
      }
    } else if (s.name == "defect") {
      if (s.label.empty()) throw ParseError(s.number, "defect section needs a name: [defect NAME]");
      NamedDefect d{s.label, std::nullopt};
      if (!s.lines.empty()) {
        DefectSpec w;
        bool has_window[4] = {false, false, false, false};
        for (const auto& [key, l] : detail::key_values(s)) {
          if (key == "mode") {
            detail::expect_tokens(l, 2, "mode");
            if (l.tokens[1] == "remove") w.mode = DefectMode::remove_branches;
            else if (l.tokens[1] == "scale") w.mode = DefectMode::scale_resistivity;
            else throw ParseError(l.number, "defect mode must be remove or scale");
          } else if (key == "factor") w.factor = detail::number_value(l);
          else if (key == "angle_min") { w.angle_min = detail::number_value(l); has_window[0] = true; }
          else if (key == "angle_max") { w.angle_max = detail::number_value(l); has_window[1] = true; }
          else if (key == "z_min") { w.z_min = detail::number_value(l); has_window[2] = true; }
          else if (key == "z_max") { w.z_max = detail::number_value(l); has_window[3] = true; }
          else throw ParseError(l.number, "unknown defect key '" + key + "'");
        }
        for (bool h : has_window)
          if (!h) throw ParseError(s.number, "defect '" + s.label + "' needs angle_min, angle_max, z_min and z_max");
        d.window = w;
      }
      spec.defects.push_back(std::move(d));
    } else {
      throw ParseError(s.number, "unknown section '" + s.name + "'");
    }
  }
  if (default_phase) {
    const auto ph = default_phases(spec.tones.size());
    for (std::size_t k = 0; k < spec.tones.size(); ++k) spec.tones[k].phase = ph[k];
  }
  if (spec.defects.empty()) throw ValidationError("experiment needs at least one [defect NAME] section");
  spec.validate();
  return spec;
}

inline std::string serialize_experiment(const ExperimentSpec& s) {
  const auto& g = s.geometry;
  std::string o = "[geometry]\n";
  o += "radius " + format_double(g.radius) + "\nlength " + format_double(g.length) + "\nwall_thickness " +
       format_double(g.wall_thickness) + "\nn_axial " + std::to_string(g.n_axial) + "\nn_circumferential " +
       std::to_string(g.n_circumferential) + "\nresistivity " + format_double(g.resistivity) + "\n";
  o += "[electrodes]\n";
  for (const auto& p : s.electrodes.placements)
    o += p.name + (p.ring == EndRing::top ? " top " : " bottom ") + format_double(p.angle) + '\n';
  o += "[drive]\nport_weights";
  for (double w : s.port_weights) o += ' ' + format_double(w);
  o += "\n[tones]\n# amplitude_A frequency_Hz phase_rad\n";
  for (const auto& t : s.tones)
    o += format_double(t.amplitude) + ' ' + format_double(t.frequency) + ' ' + format_double(t.phase) + '\n';
  const auto& p = s.probes;
  o += "[probes]\ncount " + std::to_string(p.count) + "\noffset " + format_double(p.offset) + "\nheight " +
       format_double(p.height) + "\nspan " + format_double(p.span) + "\ncenter " + format_double(p.center) + '\n';
  o += "[analysis]\nsample_rate " + format_double(s.sample_rate) + "\nsettle_multiple " +
       format_double(s.settle_multiple) + "\nsettle_time " + format_double(s.settle_time) + "\nwindow " +
       format_double(s.window) + "\nmethod " + to_string(s.method) + "\ntheta " + format_double(s.theta) +
       "\nquad_order " + std::to_string(s.quad_order) + '\n';
  for (const auto& d : s.defects) {
    o += "[defect " + d.name + "]\n";
    if (!d.window) continue;
    const auto& w = *d.window;
    o += std::string("mode ") + (w.mode == DefectMode::remove_branches ? "remove" : "scale") + '\n';
    if (w.mode == DefectMode::scale_resistivity) o += "factor " + format_double(w.factor) + '\n';
    o += "angle_min " + format_double(w.angle_min) + "\nangle_max " + format_double(w.angle_max) + "\nz_min " +
         format_double(w.z_min) + "\nz_max " + format_double(w.z_max) + '\n';
  }
  return o;
}

// ---------------------------------------------------------------------------
// Matrix cache
//
//   meta KEY VALUE
//   matrix NAME ROWS COLS
//   <ROWS lines of COLS values>
//
// Names used: R_i L_i R_D L_D M0 (reduced model) and G_i G_D G_0 (probe
// observer, one B_φ row per probe). A cache holding only R_i and L_i is a
// valid model without ports, which is how external matrices come in.

struct MatrixCache {
  std::map<std::string, std::string> meta;
  std::map<std::string, Matrix> matrices;

  bool has(const std::string& name) const { return matrices.count(name) != 0; }
  const Matrix& get(const std::string& name) const {
    const auto it = matrices.find(name);
    if (it == matrices.end()) throw InputError("matrix cache has no '" + name + "'");
    return it->second;
  }
};

inline std::string serialize_cache(const MatrixCache& c) {
  std::string o = "# eddy matrix cache\n";
  for (const auto& [k, v] : c.meta) o += "meta " + k + ' ' + v + '\n';
  for (const auto& [name, m] : c.matrices) {
    o += "matrix " + name + ' ' + std::to_string(m.rows()) + ' ' + std::to_string(m.cols()) + '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
      for (std::size_t j = 0; j < m.cols(); ++j) {
        if (j > 0) o += ' ';
        o += format_double(m(i, j));
      }
      o += '\n';
    }
  }
  return o;
}

inline MatrixCache parse_cache(std::string_view text) {
  MatrixCache c;
  std::size_t number = 0;
  std::size_t pos = 0;
  auto next_line = [&](std::vector<std::string>& tokens) {
    while (pos <= text.size()) {
      const std::size_t end = std::min(text.find('\n', pos), text.size());
      std::string_view line = text.substr(pos, end - pos);
      pos = end + 1;
      ++number;
      if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      tokens = detail::split_tokens(line);
      if (!tokens.empty()) return true;
    }
    return false;
  };
  std::vector<std::string> t;
  while (next_line(t)) {
    if (t[0] == "meta") {
      if (t.size() != 3) throw ParseError(number, "meta expects a key and a value");
      c.meta[t[1]] = t[2];
    } else if (t[0] == "matrix") {
      if (t.size() != 4) throw ParseError(number, "matrix expects a name, rows and cols");
      const std::string name = t[1];
      const std::size_t rows = parse_index(t[2], number), cols = parse_index(t[3], number);
      Matrix m(rows, cols);
      for (std::size_t i = 0; i < rows; ++i) {
        if (cols == 0) break;
        if (!next_line(t)) throw ParseError(number, "matrix '" + name + "' is truncated");
        if (t.size() != cols)
          throw ParseError(number, "matrix '" + name + "' row has " + std::to_string(t.size()) + " values, expected " +
                                       std::to_string(cols));
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = parse_double(t[j], number);
      }
      if (!c.matrices.emplace(name, std::move(m)).second) throw ParseError(number, "duplicate matrix '" + name + "'");
    } else {
      throw ParseError(number, "expected 'meta' or 'matrix'");
    }
  }
  return c;
}

namespace detail {

inline SymMatrix to_symmetric(const Matrix& m, const char* name) {
  if (m.rows() != m.cols()) throw DimensionMismatch(std::string(name) + " must be square");
  SymMatrix s(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      if (m(i, j) != m(j, i)) throw ValidationError(std::string(name) + " is not symmetric");
      s.lower(i, j) = m(i, j);
    }
  return s;
}

}  // namespace detail

inline MatrixCache make_cache(const ReducedModel& rm, const ProbeObserver* observer = nullptr) {
  MatrixCache c;
  c.meta["version"] = version;
  c.meta["N_X"] = std::to_string(rm.n_coordinates);
  c.meta["N0"] = std::to_string(rm.n_internal());
  c.meta["ports"] = std::to_string(rm.n_ports());
  c.matrices["R_i"] = rm.resistance.to_dense();
  c.matrices["L_i"] = rm.inductance.to_dense();
  c.matrices["R_D"] = rm.drive_resistance;
  c.matrices["L_D"] = rm.drive_inductance;
  c.matrices["M0"] = rm.coil_mutual;
  if (observer != nullptr) {
    c.matrices["G_i"] = observer->internal;
    c.matrices["G_D"] = observer->ports;
    c.matrices["G_0"] = observer->coils;
    Matrix p(observer->probes.size(), 3);
    for (std::size_t i = 0; i < observer->probes.size(); ++i) {
      p(i, 0) = observer->probes[i].x;
      p(i, 1) = observer->probes[i].y;
      p(i, 2) = observer->probes[i].z;
    }
    c.matrices["probes"] = std::move(p);
  }
  return c;
}

/// Reduced model from a cache. Missing drive matrices mean no ports or coils.
inline ReducedModel cache_model(const MatrixCache& c) {
  ReducedModel rm;
  rm.resistance = detail::to_symmetric(c.get("R_i"), "R_i");
  rm.inductance = detail::to_symmetric(c.get("L_i"), "L_i");
  const std::size_t n = rm.resistance.size();
  if (rm.inductance.size() != n) throw DimensionMismatch("R_i and L_i differ in size");
  rm.drive_resistance = c.has("R_D") ? c.get("R_D") : Matrix(n, 0);
  rm.drive_inductance = c.has("L_D") ? c.get("L_D") : Matrix(n, rm.drive_resistance.cols());
  rm.coil_mutual = c.has("M0") ? c.get("M0") : Matrix(n, 0);
  if (rm.drive_resistance.rows() != n || rm.drive_inductance.rows() != n || rm.coil_mutual.rows() != n ||
      rm.drive_inductance.cols() != rm.drive_resistance.cols())
    throw DimensionMismatch("drive matrices do not match R_i");
  rm.n_coordinates = n + rm.n_ports();
  return rm;
}

inline std::optional<ProbeObserver> cache_observer(const MatrixCache& c, const ReducedModel& rm) {
  if (!c.has("G_i")) return std::nullopt;
  ProbeObserver o;
  o.components = 1;
  o.internal = c.get("G_i");
  o.ports = c.has("G_D") ? c.get("G_D") : Matrix(o.internal.rows(), 0);
  o.coils = c.has("G_0") ? c.get("G_0") : Matrix(o.internal.rows(), 0);
  if (o.internal.cols() != rm.n_internal() || o.ports.cols() != rm.n_ports() || o.coils.cols() != rm.n_coils() ||
      o.ports.rows() != o.rows() || o.coils.rows() != o.rows())
    throw DimensionMismatch("observer matrices do not match the model");
  if (c.has("probes")) {
    const auto& p = c.get("probes");
    if (p.rows() != o.rows() || p.cols() != 3) throw DimensionMismatch("probe table does not match the observer");
    for (std::size_t i = 0; i < p.rows(); ++i) o.probes.push_back({p(i, 0), p(i, 1), p(i, 2)});
  }
  return o;
}

// ---------------------------------------------------------------------------
// CSV output

/// Leading `#` lines: tool version, seed and a parameter echo.
struct CsvHeader {
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> params;

  std::string render() const {
    std::string o = std::string("# eddy ") + version + "\n# seed " + std::to_string(seed) + '\n';
    for (const auto& [k, v] : params) o += "# " + k + ' ' + v + '\n';
    return o;
  }
};

inline std::string phasor_csv(const PhasorSet& ph, const CsvHeader& h) {
  std::string o = h.render() + "probe_id,f_hz,re,im,mag,phase_deg\n";
  for (std::size_t p = 0; p < ph.probe_count; ++p)
    for (std::size_t k = 0; k < ph.tone_count(); ++k) {
      const Complex x = ph.at(p, k);
      o += std::to_string(p) + ',' + format_double(ph.frequencies[k]) + ',' + format_double(x.real()) + ',' +
           format_double(x.imag()) + ',' + format_double(std::abs(x)) + ',' +
           format_double(std::arg(x) * 180.0 / std::numbers::pi) + '\n';
    }
  return o;
}

inline std::string signature_csv(const CrackSignature& s, const CsvHeader& h) {
  std::string o = h.render() + "probe_angle_rad,f_hz,dB_re,dB_im,dB_mag\n";
  for (std::size_t p = 0; p < s.probe_count; ++p)
    for (std::size_t k = 0; k < s.tone_count(); ++k) {
      const Complex x = s.at(p, k);
      const double angle = p < s.probe_angles.size() ? s.probe_angles[p] : static_cast<double>(p);
      o += format_double(angle) + ',' + format_double(s.frequencies[k]) + ',' + format_double(x.real()) + ',' +
           format_double(x.imag()) + ',' + format_double(std::abs(x)) + '\n';
    }
  return o;
}

}  // namespace eddy
