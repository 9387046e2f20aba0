// Command-line driver: model ingestion, trajectory solving, damping bases,
// steady states, decoherence-free-subspace checks, geometric phases, and the
// two-band ramp scan with CSV/JSON/SVG emission.
//
// Exit codes: 0 success, 1 domain error (machine-readable JSON on stderr),
// 2 usage error.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "effham/adiabatic.hpp"
#include "effham/csv.hpp"
#include "effham/ddfs.hpp"
#include "effham/invariant.hpp"
#include "effham/model_io.hpp"
#include "effham/svg.hpp"
#include "effham/two_band.hpp"

namespace {

using namespace effham;
using effham::io::json;

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open file for writing: " + path, "path");
  out << content;
  if (!out) throw Error(ErrorCode::IoError, "write failure: " + path, "path");
}

std::vector<double> uniform_times(double t0, double t1, std::size_t steps) {
  std::vector<double> ts(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i)
    ts[i] = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(steps);
  return ts;
}

// Initial-state files hold either one matrix (single-component models) or an
// array of component matrices.
BlockOperator block_state_from_json(const json& j) {
  if (j.is_array() && !j.empty() && j[0].is_array() && !j[0].empty() && j[0][0].is_array() &&
      !j[0][0].empty() && j[0][0][0].is_array()) {
    BlockOperator op;
    for (const auto& c : j) op.push_back(io::matrix_from_json(c, "initial"));
    return op;
  }
  return {io::matrix_from_json(j, "initial")};
}

std::string trajectory_csv(const std::vector<double>& times,
                           const std::vector<BlockOperator>& states) {
  const std::size_t comps = states.front().size();
  const std::size_t dim = states.front().front().rows();
  std::string out = "t";
  for (std::size_t k = 0; k < comps; ++k)
    for (std::size_t m = 0; m < dim; ++m)
      for (std::size_t n = 0; n < dim; ++n) {
        const std::string tag = (comps > 1 ? "_" + std::to_string(k) : std::string()) + "_" +
                                std::to_string(m) + "_" + std::to_string(n);
        out += ",re" + tag + ",im" + tag;
      }
  out.push_back('\n');
  for (std::size_t i = 0; i < times.size(); ++i) {
    std::vector<double> row;
    row.reserve(1 + 2 * comps * dim * dim);
    row.push_back(times[i]);
    for (std::size_t k = 0; k < comps; ++k)
      for (std::size_t m = 0; m < dim; ++m)
        for (std::size_t n = 0; n < dim; ++n) {
          row.push_back(states[i][k](m, n).real());
          row.push_back(states[i][k](m, n).imag());
        }
    io::append_csv_row(out, row);
  }
  return out;
}

void cmd_solve(const std::string& model_path, const std::string& initial_path, double t0,
               double t1, std::size_t steps, const std::string& out_path) {
  const json mj = io::load_json_file(model_path);
  const json sj = io::load_json_file(initial_path);
  const auto times = uniform_times(t0, t1, steps);
  std::vector<BlockOperator> states;
  if (io::is_generalized_model(mj)) {
    const auto model = io::generalized_from_json(mj);
    states = propagate_blocks_grid(model, block_state_from_json(sj), t0, t1, steps);
  } else {
    const auto model = io::model_from_json(mj);
    const auto grid = propagate_grid(model, io::state_from_json(sj), t0, t1, steps);
    for (const auto& rho : grid) states.push_back({rho});
  }
  write_text_file(out_path, trajectory_csv(times, states));
}

void cmd_steady(const std::string& model_path, const std::string& out_path) {
  const json mj = io::load_json_file(model_path);
  json out;
  out["states"] = json::array();
  if (io::is_generalized_model(mj)) {
    const auto model = io::generalized_from_json(mj);
    for (const auto& s : generalized_steady_states(model)) {
      json rec;
      json comps = json::array();
      for (const auto& c : s.rho) comps.push_back(io::matrix_to_json(c));
      rec["components"] = std::move(comps);
      rec["trace_normalized"] = s.trace_normalized;
      out["states"].push_back(std::move(rec));
    }
  } else {
    const auto model = io::model_from_json(mj);
    for (const auto& s : steady_states(model)) {
      json rec;
      rec["rho"] = io::matrix_to_json(s.rho);
      rec["trace_normalized"] = s.trace_normalized;
      out["states"].push_back(std::move(rec));
    }
  }
  io::save_json_file(out_path, out);
}

void cmd_damping_basis(const std::string& model_path, const std::string& out_path) {
  const json mj = io::load_json_file(model_path);
  json out;
  json evs = json::array();
  if (io::is_generalized_model(mj)) {
    const auto basis = generalized_damping_basis(io::generalized_from_json(mj));
    for (const cplx& ev : basis.eigenvalues) evs.push_back(io::complex_to_json(ev));
    json right = json::array(), left = json::array();
    for (const auto& op : basis.right) {
      json comps = json::array();
      for (const auto& c : op) comps.push_back(io::matrix_to_json(c));
      right.push_back(std::move(comps));
    }
    for (const auto& op : basis.left) {
      json comps = json::array();
      for (const auto& c : op) comps.push_back(io::matrix_to_json(c));
      left.push_back(std::move(comps));
    }
    out["right"] = std::move(right);
    out["left"] = std::move(left);
    out["residual_norm"] = basis.residual_norm;
  } else {
    const auto basis = damping_basis(io::model_from_json(mj));
    for (const cplx& ev : basis.eigenvalues) evs.push_back(io::complex_to_json(ev));
    json right = json::array(), left = json::array();
    for (const auto& a : basis.right) right.push_back(io::matrix_to_json(a));
    for (const auto& b : basis.left) left.push_back(io::matrix_to_json(b));
    out["right"] = std::move(right);
    out["left"] = std::move(left);
    out["residual_norm"] = basis.residual_norm;
  }
  out["eigenvalues"] = std::move(evs);
  io::save_json_file(out_path, out);
}

void cmd_ddfs_check(const std::string& model_path, const std::string& basis_path, double tol,
                    const std::string& out_path) {
  const json mj = io::load_json_file(model_path);
  const json bj = io::load_json_file(basis_path);
  if (!bj.is_array() || bj.empty())
    throw Error(ErrorCode::IoError, "basis file must be a nonempty array of state matrices",
                "basis");
  std::vector<CompositeState> basis;
  for (const auto& b : bj) basis.push_back(vectorize(io::matrix_from_json(b, "basis")));

  DDFSReport rep;
  if (io::is_generalized_model(mj)) {
    rep = ddfs_check_generalized(io::generalized_from_json(mj), basis, tol);
  } else {
    rep = ddfs_check(io::model_from_json(mj), basis, tol);
  }
  json out;
  out["passes"] = rep.passes;
  json betas = json::array();
  for (const cplx& b : rep.betas) betas.push_back(io::complex_to_json(b));
  out["betas"] = std::move(betas);
  out["eigen_residual"] = rep.eigen_residual;
  out["invariance_defect"] = rep.invariance_defect;
  if (rep.purity_residual) out["purity_residual"] = *rep.purity_residual;
  out["tolerance"] = rep.tolerance;
  if (out_path.empty()) {
    std::cout << out.dump(2) << '\n';
  } else {
    io::save_json_file(out_path, out);
  }
}

void cmd_geom_phase(const std::string& traj_path, std::size_t track, const std::string& route,
                    const std::string& seed_path, bool noncyclic, double substep,
                    const std::string& out_path) {
  const auto gen = io::trajectory_from_json(io::load_json_file(traj_path));
  PhaseResult pr;
  if (route == "instantaneous") {
    pr = geometric_phase_adiabatic(gen, track);
  } else if (route == "invariant") {
    const InvariantTrajectory traj =
        seed_path.empty()
            ? propagate_invariant_default(gen, substep)
            : propagate_invariant(gen, io::matrix_from_json(io::load_json_file(seed_path), "seed"),
                                  substep);
    pr = noncyclic ? geometric_phase_noncyclic(traj, track) : geometric_phase_cyclic(traj, track);
  } else {
    throw Error(ErrorCode::BadConfig, "route must be 'invariant' or 'instantaneous'", "route");
  }
  const json out = io::phase_to_json(pr);
  if (out_path.empty()) {
    std::cout << out.dump(2) << '\n';
  } else {
    io::save_json_file(out_path, out);
  }
}

void cmd_scan(const std::string& config_path, const std::string& out_path,
              const std::string& svg_path, const std::string& svg_field, std::size_t jobs) {
  ScanConfig cfg = io::scan_config_from_json(io::load_json_file(config_path));
  if (jobs > 0) cfg.jobs = jobs;
  const ScanGrid grid = run_scan(cfg);
  write_text_file(out_path, io::scan_to_csv(grid));
  if (!svg_path.empty()) {
    const io::HeatField field =
        svg_field == "fidelity" ? io::HeatField::OneMinusF : io::HeatField::Gamma;
    write_text_file(svg_path, io::render_heatmap(grid, field));
  }
}

void cmd_two_band(double gamma1, double gamma2, double initial_upper, double t0, double t1,
                  std::size_t steps, const std::string& out_path) {
  if (initial_upper < 0.0 || initial_upper > 1.0)
    throw Error(ErrorCode::BadConfig, "initial upper-band population must lie in [0, 1]",
                "initial-upper");
  const auto model = two_band::model(gamma1, gamma2);
  BlockOperator rho0(2, CMatrix(2, 2));
  rho0[0](0, 0) = cplx(initial_upper, 0.0);
  rho0[0](1, 1) = cplx(1.0 - initial_upper, 0.0);
  const auto states = propagate_blocks_grid(model, rho0, t0, t1, steps);
  write_text_file(out_path, trajectory_csv(uniform_times(t0, t1, steps), states));
}

void emit_error_json(const char* code, const std::string& message, const std::string& field) {
  json err;
  err["error"]["code"] = code;
  err["error"]["message"] = message;
  if (!field.empty()) err["error"]["field"] = field;
  std::cerr << err.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Master-equation toolkit: damping bases, steady states, geometric phases, and "
               "adiabaticity scans for (generalized) Lindblad dynamics"};
  app.require_subcommand(1);
  std::function<void()> action;

  // ---- solve ----------------------------------------------------------
  {
    auto* sub = app.add_subcommand("solve", "Propagate a model and write the trajectory CSV");
    auto model = std::make_shared<std::string>();
    auto initial = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto t0 = std::make_shared<double>(0.0);
    auto t1 = std::make_shared<double>(1.0);
    auto steps = std::make_shared<std::size_t>(100);
    sub->add_option("--model", *model, "model JSON file")->required();
    sub->add_option("--initial", *initial, "initial state JSON file")->required();
    sub->add_option("--t0", *t0, "start time");
    sub->add_option("--t1", *t1, "end time")->required();
    sub->add_option("--steps", *steps, "number of steps")->check(CLI::PositiveNumber);
    sub->add_option("--out", *out, "output CSV path")->required();
    sub->callback([=, &action] {
      action = [=] { cmd_solve(*model, *initial, *t0, *t1, *steps, *out); };
    });
  }

  // ---- steady ---------------------------------------------------------
  {
    auto* sub = app.add_subcommand("steady", "Compute steady states and write them as JSON");
    auto model = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    sub->add_option("--model", *model, "model JSON file")->required();
    sub->add_option("--out", *out, "output JSON path")->required();
    sub->callback([=, &action] { action = [=] { cmd_steady(*model, *out); }; });
  }

  // ---- damping-basis ----------------------------------------------------
  {
    auto* sub =
        app.add_subcommand("damping-basis", "Eigen-operators and duals of the superoperator");
    auto model = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    sub->add_option("--model", *model, "model JSON file")->required();
    sub->add_option("--out", *out, "output JSON path")->required();
    sub->callback([=, &action] { action = [=] { cmd_damping_basis(*model, *out); }; });
  }

  // ---- ddfs-check -------------------------------------------------------
  {
    auto* sub = app.add_subcommand(
        "ddfs-check", "Verify a candidate decoherence-free-subspace basis against a model");
    auto model = std::make_shared<std::string>();
    auto basis = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto tol = std::make_shared<double>(1e-8);
    sub->add_option("--model", *model, "model JSON file")->required();
    sub->add_option("--basis", *basis, "JSON array of candidate state matrices")->required();
    sub->add_option("--tol", *tol, "acceptance tolerance");
    sub->add_option("--out", *out, "output JSON path (stdout when omitted)");
    sub->callback(
        [=, &action] { action = [=] { cmd_ddfs_check(*model, *basis, *tol, *out); }; });
  }

  // ---- geom-phase -------------------------------------------------------
  {
    auto* sub = app.add_subcommand(
        "geom-phase", "Geometric and dynamical phases of a tracked generator trajectory");
    auto traj = std::make_shared<std::string>();
    auto seed = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto route = std::make_shared<std::string>("invariant");
    auto track = std::make_shared<std::size_t>(0);
    auto substep = std::make_shared<double>(0.05);
    auto noncyclic = std::make_shared<bool>(false);
    sub->add_option("--trajectory", *traj, "generator trajectory JSON file")->required();
    sub->add_option("--track", *track, "eigenvalue track index");
    sub->add_option("--route", *route, "'invariant' (flow seed) or 'instantaneous'");
    sub->add_option("--seed", *seed, "invariant seed matrix JSON (default: generator at t0)");
    sub->add_option("--substep", *substep, "flow integrator substep target");
    sub->add_flag("--noncyclic", *noncyclic, "add the open-path closing correction");
    sub->add_option("--out", *out, "output JSON path (stdout when omitted)");
    sub->callback([=, &action] {
      action = [=] { cmd_geom_phase(*traj, *track, *route, *seed, *noncyclic, *substep, *out); };
    });
  }

  // ---- scan -------------------------------------------------------------
  {
    auto* sub = app.add_subcommand(
        "scan", "Two-band ramp scan: adiabaticity measure and infidelity over a rate grid");
    auto config = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto svg = std::make_shared<std::string>();
    auto svg_field = std::make_shared<std::string>("gamma");
    auto jobs = std::make_shared<std::size_t>(0);
    sub->add_option("--config", *config, "scan configuration JSON file")->required();
    sub->add_option("--out", *out, "output CSV path")->required();
    sub->add_option("--svg", *svg, "optional SVG heat-map path");
    sub->add_option("--svg-field", *svg_field, "'gamma' or 'fidelity' heat-map field");
    sub->add_option("--jobs", *jobs, "worker threads (overrides config)");
    sub->callback([=, &action] {
      action = [=] { cmd_scan(*config, *out, *svg, *svg_field, *jobs); };
    });
  }

  // ---- two-band -----------------------------------------------------------
  {
    auto* sub = app.add_subcommand(
        "two-band", "Propagate the built-in two-band dissipative model at constant rates");
    auto out = std::make_shared<std::string>();
    auto g1 = std::make_shared<double>(1.0);
    auto g2 = std::make_shared<double>(1.0);
    auto upper = std::make_shared<double>(1.0);
    auto t0 = std::make_shared<double>(0.0);
    auto t1 = std::make_shared<double>(1.0);
    auto steps = std::make_shared<std::size_t>(100);
    sub->add_option("--gamma1", *g1, "downhill interband rate")->required();
    sub->add_option("--gamma2", *g2, "uphill interband rate")->required();
    sub->add_option("--initial-upper", *upper, "initial upper-band excited population");
    sub->add_option("--t0", *t0, "start time");
    sub->add_option("--t1", *t1, "end time")->required();
    sub->add_option("--steps", *steps, "number of steps")->check(CLI::PositiveNumber);
    sub->add_option("--out", *out, "output CSV path")->required();
    sub->callback([=, &action] {
      action = [=] { cmd_two_band(*g1, *g2, *upper, *t0, *t1, *steps, *out); };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    action();
  } catch (const effham::Error& e) {
    emit_error_json(effham::error_code_name(e.code()), e.what(), e.field());
    return 1;
  } catch (const std::exception& e) {
    emit_error_json("Internal", e.what(), "");
    return 1;
  }
  return 0;
}
