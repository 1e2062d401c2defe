#include "mcfs/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "mcfs/error.hpp"

namespace mcfs::io {
namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "null";
  if (std::isinf(v)) return v > 0 ? "1e999" : "-1e999";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

void write(std::ostringstream& out, const Json& j, int indent, int depth) {
  const auto pad = [&](int d) {
    if (indent >= 0) out << '\n' << std::string(static_cast<std::size_t>(indent * d), ' ');
  };
  const char* sep = indent >= 0 ? ": " : ":";
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out << "{}";
        return;
      }
      out << '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out << ',';
        first = false;
        pad(depth + 1);
        out << Json(it.key()).dump() << sep;
        write(out, it.value(), indent, depth + 1);
      }
      pad(depth);
      out << '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out << "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const auto& e : j) flat = flat && !e.is_structured();
      out << '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out << (flat && indent >= 0 ? ", " : ",");
        first = false;
        if (!flat) pad(depth + 1);
        write(out, e, indent, depth + 1);
      }
      if (!flat) pad(depth);
      out << ']';
      return;
    }
    case Json::value_t::number_float:
      out << format_double(j.get<double>());
      return;
    default:
      out << j.dump();
  }
}

Json trig_to_json(const linflow::TrigPoly& p) {
  if (p.is_constant()) return p.constant;
  Json j;
  j["constant"] = p.constant;
  j["cos"] = p.cos;
  j["sin"] = p.sin;
  return j;
}

linflow::TrigPoly trig_from_json(const Json& j) {
  linflow::TrigPoly p;
  if (j.is_number()) {
    p.constant = j.get<double>();
    return p;
  }
  if (!j.is_object()) throw Error(ErrorCode::invalid_input, "coefficient must be a number or a trig object");
  p.constant = j.value("constant", 0.0);
  auto list = [&](const char* key) {
    std::vector<double> v;
    if (!j.contains(key)) return v;
    if (!j[key].is_array()) throw Error(ErrorCode::invalid_input, std::string("'") + key + "' must be an array");
    for (const auto& e : j[key]) {
      if (!e.is_number()) throw Error(ErrorCode::invalid_input, "trig coefficients must be numbers");
      v.push_back(e.get<double>());
    }
    return v;
  };
  p.cos = list("cos");
  p.sin = list("sin");
  return p;
}

std::vector<linflow::TrigPoly> trig_list(const Json& j, std::size_t expected, const char* name) {
  if (!j.is_array() || j.size() != expected) {
    throw Error(ErrorCode::invalid_input, std::string("'") + name + "' must have " + std::to_string(expected) + " entries");
  }
  std::vector<linflow::TrigPoly> out;
  for (const auto& e : j) out.push_back(trig_from_json(e));
  return out;
}

Json complex_list(const std::vector<Complex>& zs) {
  Json j = Json::array();
  for (const Complex& z : zs) j.push_back(to_json(z));
  return j;
}

Json columns(const Matrix& m) {
  Json j = Json::array();
  for (Eigen::Index c = 0; c < m.cols(); ++c) j.push_back(to_json(Vector(m.col(c))));
  return j;
}

}  // namespace

std::string dump(const Json& j, int indent) {
  std::ostringstream out;
  write(out, j, indent, 0);
  return out.str();
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::invalid_input, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_input, "malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::invalid_input, "cannot write " + path.string());
  out << text;
}

void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, dump(j) + "\n"); }

Json to_json(const Vector& v) {
  Json j = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

Json to_json(const Matrix& m) {
  Json j = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) j.push_back(to_json(Vector(m.row(i).transpose())));
  return j;
}

Json to_json(const Complex& z) { return Json::array({z.real(), z.imag()}); }

Json to_json(const Signs& s) {
  Json j = Json::array();
  for (int v : s) j.push_back(v);
  return j;
}

Json to_json(const signature::LyapunovBounds& b) {
  Json j;
  j["n_min"] = b.n_min;
  j["n_max"] = b.n_max;
  j["exact"] = b.exact;
  return j;
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::invalid_input, "vector must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error(ErrorCode::invalid_input, "vector entries must be numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::invalid_input, "matrix must be a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const Vector first = vector_from_json(j[0]);
  Matrix m(rows, first.size());
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Vector r = vector_from_json(j[static_cast<std::size_t>(i)]);
    if (r.size() != m.cols()) throw Error(ErrorCode::invalid_input, "matrix rows differ in length");
    m.row(i) = r.transpose();
  }
  return m;
}

Vector parse_vector(const std::string& text) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw Error(ErrorCode::invalid_input, "cannot parse number '" + item + "'");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos) {
      throw Error(ErrorCode::invalid_input, "cannot parse number '" + item + "'");
    }
    vals.push_back(v);
  }
  if (vals.empty()) throw Error(ErrorCode::invalid_input, "empty vector");
  return Eigen::Map<Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

Json to_json(const linflow::CoefficientSpec& spec) {
  Json j;
  j["n"] = spec.n;
  Json diag = Json::array();
  for (const auto& p : spec.diag) diag.push_back(trig_to_json(p));
  Json sub = Json::array();
  for (const auto& p : spec.sub) sub.push_back(trig_to_json(p));
  j["entries"] = {{"diag", diag}, {"sub", sub}, {"corner", trig_to_json(spec.corner)}};
  if (spec.period) j["period"] = *spec.period;
  if (spec.frequency != 0.0) j["frequency"] = spec.frequency;
  return j;
}

linflow::CoefficientSpec coefficient_spec_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("n") || !j["n"].is_number_integer()) {
    throw Error(ErrorCode::invalid_input, "linear system needs integer 'n'");
  }
  if (!j.contains("entries") || !j["entries"].is_object()) throw Error(ErrorCode::invalid_input, "linear system needs 'entries'");
  linflow::CoefficientSpec s;
  s.n = j["n"].get<int>();
  if (s.n < 3) throw Error(ErrorCode::invalid_input, "n must be at least 3");
  const Json& e = j["entries"];
  if (!e.contains("diag") || !e.contains("sub") || !e.contains("corner")) {
    throw Error(ErrorCode::invalid_input, "entries need diag, sub and corner");
  }
  s.diag = trig_list(e["diag"], static_cast<std::size_t>(s.n), "diag");
  s.sub = trig_list(e["sub"], static_cast<std::size_t>(s.n - 1), "sub");
  s.corner = trig_from_json(e["corner"]);
  if (j.contains("period")) {
    if (!j["period"].is_number() || !(j["period"].get<double>() > 0.0)) {
      throw Error(ErrorCode::invalid_input, "period must be a positive number");
    }
    s.period = j["period"].get<double>();
  }
  if (j.contains("frequency")) {
    s.frequency = j["frequency"].get<double>();
  } else if (s.period) {
    s.frequency = 2.0 * std::numbers::pi / *s.period;
  }
  return s;
}

Json to_json(const linflow::TransitionMatrix& t) {
  Json j;
  j["t0"] = t.t0;
  j["t1"] = t.t1;
  j["matrix"] = to_json(t.value);
  j["abel_residual"] = t.abel_residual;
  return j;
}

Json to_json(const linflow::MonotonicityTrace& trace) {
  Json j;
  j["nonincreasing"] = trace.nonincreasing;
  j["eventually_constant"] = trace.eventually_constant;
  Json inc = Json::array();
  for (const auto& [a, b] : trace.increases) inc.push_back(Json::array({a, b}));
  j["increases"] = inc;
  Json s = Json::array();
  for (const auto& p : trace.samples) s.push_back(Json::array({p.t, p.bounds.n_min, p.bounds.n_max}));
  j["samples"] = s;
  return j;
}

Json to_json(const linflow::ConeInvarianceReport& r) {
  Json j;
  j["h"] = r.h;
  j["t"] = r.t;
  j["samples"] = r.samples;
  j["boundary_samples"] = r.boundary_samples;
  j["starved"] = r.starved;
  j["violations"] = r.failures;
  Json w = Json::array();
  for (const auto& c : r.witnesses) {
    w.push_back({{"start", to_json(c.start)},
                 {"image", to_json(c.image)},
                 {"image_bounds", to_json(c.image_bounds)},
                 {"boundary_start", c.boundary_start}});
  }
  j["witnesses"] = w;
  return j;
}

Json to_json(const spectra::SpectralSplit& s) {
  Json j;
  j["n"] = s.n;
  Json blocks = Json::array();
  for (int h = 0; h < s.block_count(); ++h) {
    const auto k = static_cast<std::size_t>(h);
    Json b;
    b["h"] = h + 1;
    b["dimension"] = s.blocks[k].cols();
    b["basis"] = columns(s.blocks[k]);
    b["eigenvalues"] = complex_list(s.eigenvalues[k]);
    b["nu"] = s.nu[k];
    b["mu"] = s.mu[k];
    blocks.push_back(b);
  }
  j["blocks"] = blocks;
  j["gaps"] = s.gaps;
  j["min_singular"] = s.min_singular;
  return j;
}

Json to_json(const spectra::SplitConeReport& r) {
  Json j;
  j["block_checks"] = r.block_checks;
  j["sum_checks"] = r.sum_checks;
  j["violations"] = r.violations;
  Json w = Json::array();
  for (const auto& c : r.witnesses) {
    w.push_back({{"h_first", c.h_first}, {"h_last", c.h_last}, {"vector", to_json(c.vector)}, {"bounds", to_json(c.bounds)}});
  }
  j["witnesses"] = w;
  return j;
}

Json to_json(const orbits::Equilibrium& e) {
  Json j;
  j["point"] = to_json(e.point);
  j["eigenvalues"] = complex_list(e.eigenvalues);
  j["unstable_dim"] = e.unstable_dim;
  j["hyperbolic"] = e.hyperbolic;
  j["residual"] = e.residual;
  j["iterations"] = e.iterations;
  if (e.split) j["split"] = to_json(*e.split);
  return j;
}

Json to_json(const orbits::PeriodicOrbit& p) {
  Json j;
  j["base_point"] = to_json(p.base_point);
  j["period"] = p.period;
  j["multipliers"] = complex_list(p.multipliers);
  j["trivial_index"] = p.trivial_index;
  j["trivial_multiplier_error"] = p.trivial_multiplier_error;
  j["trivial_alignment"] = p.trivial_alignment;
  j["hyperbolic"] = p.hyperbolic;
  j["unstable_multipliers"] = p.unstable_multipliers;
  j["h"] = p.h;
  j["closure_error"] = p.closure_error;
  j["newton_iterations"] = p.newton_iterations;
  j["monodromy"] = to_json(p.monodromy);
  Json s = Json::array();
  for (std::size_t k = 0; k < p.samples.t.size(); ++k) {
    Json row = Json::array({p.samples.t[k]});
    for (Eigen::Index i = 0; i < p.samples.y[k].size(); ++i) row.push_back(p.samples.y[k](i));
    s.push_back(row);
  }
  j["samples"] = s;
  return j;
}

Json to_json(const orbits::TransversalityReport& r) {
  Json j;
  j["source_kind"] = r.source_kind;
  j["target_kind"] = r.target_kind;
  j["source_anchor"] = to_json(r.source_anchor);
  j["target_anchor"] = to_json(r.target_anchor);
  j["h_minus"] = r.h_minus;
  j["h_plus"] = r.h_plus;
  j["unstable_basis"] = columns(r.unstable_basis);
  j["stable_basis"] = columns(r.stable_basis);
  j["midpoint_time"] = r.midpoint_time;
  j["singular_values"] = r.singular_values;
  j["stacked_rank"] = r.stacked_rank;
  j["sigma_min"] = r.sigma_min;
  j["verdict"] = orbits::to_string(r.verdict);
  j["manifold_distance"] = r.manifold_distance;
  j["source_unstable_dim"] = r.source_unstable_dim;
  j["target_unstable_dim"] = r.target_unstable_dim;
  j["theorem_applies"] = r.theorem_applies;
  j["dimension_consistent"] = r.dimension_consistent;
  return j;
}

Json to_json(const orbits::DifferenceReport& r) {
  Json j;
  j["h"] = r.h;
  j["checked"] = r.checked;
  j["skipped"] = r.skipped;
  j["violations"] = r.violations;
  Json w = Json::array();
  for (const auto& p : r.witnesses) w.push_back({{"x", to_json(p.x)}, {"y", to_json(p.y)}, {"bounds", to_json(p.bounds)}});
  j["witnesses"] = w;
  return j;
}

std::string matrix_csv(const Matrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) out += ',';
      out += format_double(m(i, c));
    }
    out += '\n';
  }
  return out;
}

std::string trajectory_csv(const orbits::Trajectory& traj) {
  std::string out = "t";
  const Eigen::Index n = traj.y.empty() ? 0 : traj.y.front().size();
  for (Eigen::Index i = 0; i < n; ++i) out += ",x" + std::to_string(i + 1);
  out += '\n';
  for (std::size_t k = 0; k < traj.t.size(); ++k) {
    out += format_double(traj.t[k]);
    for (Eigen::Index i = 0; i < n; ++i) out += ',' + format_double(traj.y[k](i));
    out += '\n';
  }
  return out;
}

}  // namespace mcfs::io
