#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcfs/linflow.hpp"
#include "mcfs/orbits.hpp"
#include "mcfs/signature.hpp"
#include "mcfs/spectra.hpp"
#include "mcfs/types.hpp"

namespace mcfs::io {

using Json = nlohmann::ordered_json;

/// Serializes with fixed key order and every double at 17 significant digits.
std::string dump(const Json& j, int indent = 2);

Json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const Json& j);

Json to_json(const Vector& v);
Json to_json(const Matrix& m);  // array of rows
Json to_json(const Complex& z);  // [re, im]
Json to_json(const Signs& s);
Json to_json(const signature::LyapunovBounds& b);

Vector vector_from_json(const Json& j);
Matrix matrix_from_json(const Json& j);
/// Parses "1,-1,0.5" (whitespace allowed).
Vector parse_vector(const std::string& text);

/// {n, entries: {diag, sub, corner}, period?, frequency?}; each entry is a
/// number or {constant, cos: [...], sin: [...]}.
Json to_json(const linflow::CoefficientSpec& spec);
linflow::CoefficientSpec coefficient_spec_from_json(const Json& j);

Json to_json(const linflow::TransitionMatrix& t);
Json to_json(const linflow::MonotonicityTrace& trace);
Json to_json(const linflow::ConeInvarianceReport& r);

/// Blocks as arrays of basis columns, plus moduli and gaps.
Json to_json(const spectra::SpectralSplit& s);
Json to_json(const spectra::SplitConeReport& r);

Json to_json(const orbits::Equilibrium& e);
/// {base_point, period, samples: [[t, x...], ...], ...}
Json to_json(const orbits::PeriodicOrbit& p);
Json to_json(const orbits::TransversalityReport& r);
Json to_json(const orbits::DifferenceReport& r);

/// Row-major, one row per line.
std::string matrix_csv(const Matrix& m);
/// Header t,x1..xn; one row per stored step.
std::string trajectory_csv(const orbits::Trajectory& traj);

}  // namespace mcfs::io
