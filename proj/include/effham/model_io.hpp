#pragma once
// JSON serialization for models, states, generator trajectories, phase
// records, and scan configurations.  Complex numbers are two-element
// [re, im] arrays; matrices are row-major nested arrays of those pairs.
//
// Requires the single-header nlohmann/json on the include path (a vendored
// copy ships in vendor/).

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "effham/eigen_tracks.hpp"
#include "effham/error.hpp"
#include "effham/generalized.hpp"
#include "effham/invariant.hpp"
#include "effham/lindblad.hpp"
#include "effham/scan.hpp"

namespace effham::io {

using json = nlohmann::json;

namespace detail {

inline void expect(bool ok, const std::string& message, const std::string& field) {
  if (!ok) throw Error(ErrorCode::IoError, message, field);
}

inline double number_at(const json& j, const std::string& field) {
  expect(j.is_number(), "expected a number", field);
  return j.get<double>();
}

inline std::size_t index_at(const json& j, const std::string& field) {
  expect(j.is_number_integer() && j.template get<long long>() >= 0,
         "expected a non-negative integer", field);
  return j.get<std::size_t>();
}

}  // namespace detail

inline json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline cplx complex_from_json(const json& j, const std::string& field) {
  detail::expect(j.is_array() && j.size() == 2, "complex entries are [re, im] pairs", field);
  return {detail::number_at(j[0], field), detail::number_at(j[1], field)};
}

inline json matrix_to_json(const CMatrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline CMatrix matrix_from_json(const json& j, const std::string& field) {
  detail::expect(j.is_array() && !j.empty(), "matrix must be a nonempty array of rows", field);
  const std::size_t nrows = j.size();
  detail::expect(j[0].is_array() && !j[0].empty(), "matrix rows must be nonempty arrays", field);
  const std::size_t ncols = j[0].size();
  CMatrix m(nrows, ncols);
  for (std::size_t r = 0; r < nrows; ++r) {
    detail::expect(j[r].is_array() && j[r].size() == ncols, "matrix rows have unequal lengths",
                   field);
    for (std::size_t c = 0; c < ncols; ++c) m(r, c) = complex_from_json(j[r][c], field);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Markovian model: {"dim": n, "hamiltonian": [[..]], "lindblad_ops": [[[..]]]}

inline json model_to_json(const LindbladModel& m) {
  json j;
  j["dim"] = m.dim;
  j["hamiltonian"] = matrix_to_json(m.hamiltonian);
  json ops = json::array();
  for (const auto& l : m.lindblad_ops) ops.push_back(matrix_to_json(l));
  j["lindblad_ops"] = std::move(ops);
  return j;
}

inline LindbladModel model_from_json(const json& j) {
  detail::expect(j.is_object(), "model file must be a JSON object", "model");
  detail::expect(j.contains("dim"), "missing integer field", "dim");
  detail::expect(j.contains("hamiltonian"), "missing field", "hamiltonian");
  LindbladModel m;
  m.dim = detail::index_at(j["dim"], "dim");
  m.hamiltonian = matrix_from_json(j["hamiltonian"], "hamiltonian");
  if (j.contains("lindblad_ops")) {
    detail::expect(j["lindblad_ops"].is_array(), "expected an array of matrices", "lindblad_ops");
    for (const auto& l : j["lindblad_ops"])
      m.lindblad_ops.push_back(matrix_from_json(l, "lindblad_ops"));
  }
  validate(m);
  return m;
}

inline json state_to_json(const CMatrix& rho) { return matrix_to_json(rho); }

inline CMatrix state_from_json(const json& j) { return matrix_from_json(j, "state"); }

// ---------------------------------------------------------------------------
// Generalized model: {"dim": N, "components": K, "hamiltonians": [..],
//                     "transitions": [{"to_k","from_j","lambda","matrix"}]}

inline json generalized_to_json(const GeneralizedLindbladModel& m) {
  json j;
  j["dim"] = m.dim;
  j["components"] = m.components;
  json hs = json::array();
  for (const auto& h : m.hamiltonians) hs.push_back(matrix_to_json(h));
  j["hamiltonians"] = std::move(hs);
  json ts = json::array();
  for (const auto& t : m.transitions) {
    json tj;
    tj["to_k"] = t.to_k;
    tj["from_j"] = t.from_j;
    tj["lambda"] = t.lambda;
    tj["matrix"] = matrix_to_json(t.matrix);
    ts.push_back(std::move(tj));
  }
  j["transitions"] = std::move(ts);
  return j;
}

inline GeneralizedLindbladModel generalized_from_json(const json& j) {
  detail::expect(j.is_object(), "model file must be a JSON object", "model");
  for (const char* key : {"dim", "components"})
    detail::expect(j.contains(key), "missing integer field", key);
  detail::expect(j.contains("hamiltonians") && j["hamiltonians"].is_array(),
                 "missing array field", "hamiltonians");
  GeneralizedLindbladModel m;
  m.dim = detail::index_at(j["dim"], "dim");
  m.components = detail::index_at(j["components"], "components");
  for (const auto& h : j["hamiltonians"]) m.hamiltonians.push_back(matrix_from_json(h, "hamiltonians"));
  if (j.contains("transitions")) {
    detail::expect(j["transitions"].is_array(), "expected an array", "transitions");
    for (const auto& tj : j["transitions"]) {
      detail::expect(tj.is_object(), "transitions are objects", "transitions");
      for (const char* key : {"to_k", "from_j", "lambda"})
        detail::expect(tj.contains(key), "missing integer field",
                       std::string("transitions.") + key);
      detail::expect(tj.contains("matrix"), "missing field", "transitions.matrix");
      Transition t;
      t.to_k = detail::index_at(tj["to_k"], "transitions.to_k");
      t.from_j = detail::index_at(tj["from_j"], "transitions.from_j");
      t.lambda = detail::index_at(tj["lambda"], "transitions.lambda");
      t.matrix = matrix_from_json(tj["matrix"], "transitions.matrix");
      m.transitions.push_back(std::move(t));
    }
  }
  validate(m);
  return m;
}

/// A model file with a "components" field uses the coupled-component schema.
inline bool is_generalized_model(const json& j) {
  return j.is_object() && j.contains("components");
}

// ---------------------------------------------------------------------------
// Generator trajectory: {"times": [..], "matrices": [[[..]], ..]}

inline json trajectory_to_json(const GeneratorTrajectory& gen) {
  json j;
  j["times"] = gen.times;
  json ms = json::array();
  for (const auto& m : gen.matrices) ms.push_back(matrix_to_json(m));
  j["matrices"] = std::move(ms);
  return j;
}

inline GeneratorTrajectory trajectory_from_json(const json& j) {
  detail::expect(j.is_object(), "trajectory file must be a JSON object", "trajectory");
  detail::expect(j.contains("times") && j["times"].is_array(), "missing array field", "times");
  detail::expect(j.contains("matrices") && j["matrices"].is_array(), "missing array field",
                 "matrices");
  GeneratorTrajectory gen;
  for (const auto& t : j["times"]) gen.times.push_back(detail::number_at(t, "times"));
  for (const auto& m : j["matrices"]) gen.matrices.push_back(matrix_from_json(m, "matrices"));
  validate_generator(gen);
  return gen;
}

// ---------------------------------------------------------------------------
// Phase record: {track, geometric, dynamical_re, dynamical_im, noncyclic}

inline json phase_to_json(const PhaseResult& pr) {
  json j;
  j["track"] = pr.track;
  j["geometric"] = pr.geometric.real();
  j["dynamical_re"] = pr.dynamical.real();
  j["dynamical_im"] = pr.dynamical.imag();
  j["noncyclic"] = pr.noncyclic_correction;
  return j;
}

// ---------------------------------------------------------------------------
// Scan configuration.  "initial" is either the tag "A03" (seed with the
// stationary mixed mode of the endpoint rates) or an explicit array of
// component matrices.

inline json scan_config_to_json(const ScanConfig& cfg) {
  json j;
  j["gamma1_values"] = cfg.gamma1_values;
  j["dgamma1_values"] = cfg.dgamma1_values;
  j["T"] = cfg.duration;
  j["steps"] = cfg.steps;
  j["gamma2_value"] = cfg.gamma2_value;
  j["gamma2_slope"] = cfg.gamma2_slope;
  j["rate_floor"] = cfg.rate_floor;
  j["jobs"] = cfg.jobs;
  if (cfg.initial) {
    json comps = json::array();
    for (const auto& c : *cfg.initial) comps.push_back(matrix_to_json(c));
    j["initial"] = std::move(comps);
  } else {
    j["initial"] = "A03";
  }
  return j;
}

inline ScanConfig scan_config_from_json(const json& j) {
  detail::expect(j.is_object(), "scan config must be a JSON object", "config");
  ScanConfig cfg;
  for (const char* key : {"gamma1_values", "dgamma1_values"})
    detail::expect(j.contains(key) && j[key].is_array(), "missing array field", key);
  for (const auto& v : j["gamma1_values"])
    cfg.gamma1_values.push_back(detail::number_at(v, "gamma1_values"));
  for (const auto& v : j["dgamma1_values"])
    cfg.dgamma1_values.push_back(detail::number_at(v, "dgamma1_values"));
  if (j.contains("T")) cfg.duration = detail::number_at(j["T"], "T");
  if (j.contains("steps")) cfg.steps = detail::index_at(j["steps"], "steps");
  if (j.contains("gamma2_value")) cfg.gamma2_value = detail::number_at(j["gamma2_value"], "gamma2_value");
  if (j.contains("gamma2_slope")) cfg.gamma2_slope = detail::number_at(j["gamma2_slope"], "gamma2_slope");
  if (j.contains("rate_floor")) cfg.rate_floor = detail::number_at(j["rate_floor"], "rate_floor");
  if (j.contains("jobs")) cfg.jobs = detail::index_at(j["jobs"], "jobs");
  if (j.contains("initial") && !j["initial"].is_string()) {
    detail::expect(j["initial"].is_array(), "initial is the tag \"A03\" or component matrices",
                   "initial");
    BlockOperator init;
    for (const auto& c : j["initial"]) init.push_back(matrix_from_json(c, "initial"));
    cfg.initial = std::move(init);
  } else if (j.contains("initial")) {
    detail::expect(j["initial"].get<std::string>() == "A03", "unknown initial-state tag",
                   "initial");
  }
  validate_scan(cfg);
  return cfg;
}

// ---------------------------------------------------------------------------
// File helpers.

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open file for reading: " + path, "path");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::IoError, std::string("JSON parse failure: ") + e.what(), "path");
  }
  return j;
}

inline void save_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot open file for writing: " + path, "path");
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failure: " + path, "path");
}

}  // namespace effham::io
