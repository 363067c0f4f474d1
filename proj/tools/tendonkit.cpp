// Copyright 2026 The tendonkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// tendonkit command-line tool. Data goes to stdout or -o; diagnostics go to
// stderr as "ERROR <code>: <message>".
//
// Exit codes: 0 ok, 1 validation, 2 runtime/numerical, 64 usage.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tendonkit/tendonkit.hpp"

namespace {

using nlohmann::ordered_json;
using tendonkit::format_g9;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitUsage = 64;

struct Options {
  std::string input;
  std::string second;  // grid file for effmass
  std::string output;
  std::string format = "csv";
  std::string q;
  std::vector<std::string> overrides;
  int threads = 0;
  bool summary = false;
};

void emit(const Options& o, const std::string& data) {
  if (o.output.empty() || o.output == "-") {
    std::cout << data;
    return;
  }
  std::ofstream out(o.output, std::ios::binary);
  if (!out) throw tendonkit::IoError("cannot open '" + o.output + "' for writing");
  out << data;
  if (!out) throw tendonkit::IoError("write to '" + o.output + "' failed");
}

// Accepts "a,b,c" or "[a, b, c]"; radians.
Eigen::VectorXd parse_q(const std::string& text, int dof) {
  std::string s = text;
  for (char& c : s) {
    if (c == '[' || c == ']') c = ' ';
  }
  Eigen::VectorXd q(dof);
  std::stringstream ss(s);
  std::string item;
  int n = 0;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw tendonkit::InvalidArgument("--q entry '" + item + "' is not a number");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos) {
      throw tendonkit::InvalidArgument("--q entry '" + item + "' is not a number");
    }
    if (n < dof) q[n] = v;
    ++n;
  }
  if (n != dof) {
    throw tendonkit::InvalidArgument("--q has " + std::to_string(n) + " entries, model has " +
                                     std::to_string(dof) + " joints");
  }
  return q;
}

std::vector<double> as_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

int cmd_validate(const Options& o) {
  if (std::filesystem::path(o.input).extension() == ".scn") {
    const tendonkit::Scenario sc = tendonkit::load_scenario_file(o.input, o.overrides);
    tendonkit::validate(sc);
    std::printf("OK: scenario %s, %d DoF, %d routes, %.3f s\n", sc.name.c_str(), sc.model.dof(),
                sc.model.num_routes(), sc.duration);
    return kExitOk;
  }
  const tendonkit::RobotModel m = tendonkit::load_model_file(o.input);
  std::printf("OK: %d DoF, %d routes, moving mass %.3f kg\n", m.dof(), m.num_routes(),
              tendonkit::moving_part_mass(m));
  return kExitOk;
}

int cmd_jacobian(const Options& o) {
  const tendonkit::RobotModel m = tendonkit::load_model_file(o.input);
  const Eigen::VectorXd q = o.q.empty() ? Eigen::VectorXd::Zero(m.dof()) : parse_q(o.q, m.dof());
  const Eigen::MatrixXd G = tendonkit::muscle_jacobian(m, q);
  if (o.format == "json") {
    ordered_json j;
    j["q"] = as_vec(q);
    j["routes"] = ordered_json::array();
    for (const auto& r : m.routes) j["routes"].push_back(r.name);
    j["joints"] = ordered_json::array();
    for (const auto& jt : m.joints) j["joints"].push_back(jt.name);
    j["G"] = ordered_json::array();
    for (int i = 0; i < G.rows(); ++i) j["G"].push_back(as_vec(G.row(i).transpose()));
    emit(o, j.dump(2) + "\n");
    return kExitOk;
  }
  std::ostringstream os;
  os << "# tendonkit-jacobian v1 rows=" << G.rows() << " cols=" << G.cols() << "\n";
  os << "route";
  for (const auto& jt : m.joints) os << "," << jt.name;
  os << "\n";
  for (int i = 0; i < G.rows(); ++i) {
    os << m.routes[static_cast<std::size_t>(i)].name;
    for (int k = 0; k < G.cols(); ++k) os << "," << format_g9(G(i, k));
    os << "\n";
  }
  emit(o, os.str());
  return kExitOk;
}

// [problem] G, tau, lambda, f_min, f_max; lambda and the bounds may be scalars.
tendonkit::TensionProblem load_problem(const std::string& path) {
  const tendonkit::text::Document doc = tendonkit::text::parse(tendonkit::read_text_file(path));
  const tendonkit::text::Section* s = doc.find("problem");
  if (!s) throw tendonkit::ValidationError("problem file needs a [problem] section");
  tendonkit::detail::check_keys(*s, {"G", "tau", "lambda", "f_min", "f_max"});
  tendonkit::TensionProblem p;
  for (const char* k : {"lambda", "f_min", "f_max"}) s->required(k);
  p.G = s->matrix("G");
  p.tau_ref = s->vector("tau");
  const long n = p.G.cols(), r = p.G.rows();
  p.Lambda = tendonkit::detail::gain_matrix(*s, "lambda", Eigen::MatrixXd::Zero(n, n));
  p.f_min = tendonkit::detail::bound_vector(*s, "f_min", Eigen::VectorXd::Zero(r));
  p.f_max = tendonkit::detail::bound_vector(*s, "f_max", Eigen::VectorXd::Zero(r));
  return p;
}

int cmd_tension(const Options& o) {
  const tendonkit::TensionProblem p = load_problem(o.input);
  const tendonkit::TensionSolution sol = tendonkit::solve_tension(p);
  if (o.format == "json") {
    ordered_json j;
    j["status"] = tendonkit::status_name(sol.status);
    j["iterations"] = sol.iterations;
    j["objective"] = tendonkit::tension_objective(p, sol.f_ref);
    j["kkt_residual"] = sol.kkt_residual;
    j["f"] = as_vec(sol.f_ref);
    j["torque_residual"] = as_vec(sol.torque_residual);
    emit(o, j.dump(2) + "\n");
  } else {
    std::ostringstream os;
    auto list = [&](const Eigen::VectorXd& v) {
      os << "[";
      for (int i = 0; i < v.size(); ++i) os << (i ? ", " : "") << format_g9(v[i]);
      os << "]\n";
    };
    os << "status = \"" << tendonkit::status_name(sol.status) << "\"\n";
    os << "iterations = " << sol.iterations << "\n";
    os << "objective = " << format_g9(tendonkit::tension_objective(p, sol.f_ref)) << "\n";
    os << "kkt_residual = " << format_g9(sol.kkt_residual) << "\n";
    os << "f = ";
    list(sol.f_ref);
    os << "torque_residual = ";
    list(sol.torque_residual);
    emit(o, os.str());
  }
  return sol.status == tendonkit::TensionStatus::kOptimal ? kExitOk : kExitRuntime;
}

int cmd_effmass(const Options& o) {
  const tendonkit::RobotModel m = tendonkit::load_model_file(o.input);
  tendonkit::FieldJob job = tendonkit::load_field_job(m, tendonkit::read_text_file(o.second));
  const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  job.spec.threads = o.threads > 0 ? o.threads : hw;
  const tendonkit::FieldResult res = tendonkit::effective_mass_field(m, job.grid.postures(), job.spec);
  if (o.format == "json") {
    ordered_json j;
    j["plane"] = tendonkit::plane_name(job.spec.plane);
    j["max"] = res.max;
    j["singular_count"] = res.singular_count;
    j["rows"] = ordered_json::array();
    for (const auto& r : res.rows) {
      j["rows"].push_back({{"x", r.x}, {"z", r.z}, {"m_u_max", r.m_u_max}, {"singular", r.singular}});
    }
    emit(o, j.dump(2) + "\n");
  } else {
    std::ostringstream os;
    os << "# tendonkit-effmass v1 plane=" << tendonkit::plane_name(job.spec.plane)
       << " max=" << format_g9(res.max) << " singular=" << res.singular_count << "\n";
    os << "x,z,m_u_max\n";
    for (const auto& r : res.rows) {
      os << format_g9(r.x) << "," << format_g9(r.z) << ","
         << format_g9(r.m_u_max) << "\n";
    }
    emit(o, os.str());
  }
  return kExitOk;
}

ordered_json summary_json(const tendonkit::Summary& s) {
  ordered_json j = ordered_json::object();
  for (const auto& [k, v] : s.metrics) j[k] = v;
  return j;
}

int cmd_run(const Options& o) {
  const tendonkit::Scenario sc = tendonkit::load_scenario_file(o.input, o.overrides);
  const tendonkit::RunResult r = tendonkit::run_scenario(sc);
  if (o.format == "json") {
    ordered_json j;
    j["schema"] = "tendonkit-trace v1";
    j["scenario"] = r.trace.scenario;
    j["sample_rate"] = r.trace.sample_rate;
    j["columns"] = r.trace.columns;
    j["rows"] = r.trace.rows;
    emit(o, j.dump() + "\n");
  } else {
    emit(o, tendonkit::write_trace_csv(r.trace));
  }
  if (o.summary) std::cerr << tendonkit::summary_text(tendonkit::summarize(r.trace));
  if (!r.ok) {
    std::cerr << "ERROR " << r.error_code << ": " << r.error_message << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_summarize(const Options& o) {
  const tendonkit::Trace t = tendonkit::read_trace_csv(tendonkit::read_text_file(o.input));
  const tendonkit::Summary s = tendonkit::summarize(t);
  if (o.format == "json") {
    emit(o, summary_json(s).dump(2) + "\n");
  } else {
    emit(o, tendonkit::summary_text(s));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tendonkit: tendon-driven arm models, tension control and simulation"};
  app.require_subcommand(1, 1);
  Options o;

  auto existing = [](CLI::Option* opt) { opt->check(CLI::ExistingFile); };
  auto format = [&](CLI::App* sub, std::vector<std::string> allowed) {
    sub->add_option("--format", o.format, "output format")->check(CLI::IsMember(std::move(allowed)));
  };

  CLI::App* validate = app.add_subcommand("validate", "check a model (.model) or scenario (.scn) file");
  existing(validate->add_option("file", o.input, "model or scenario")->required());
  validate->add_option("--set", o.overrides, "scenario override key=value (repeatable)");

  CLI::App* jac = app.add_subcommand("jacobian", "print the wire Jacobian G = dl/dq");
  existing(jac->add_option("model", o.input)->required());
  jac->add_option("--q", o.q, "joint angles in rad, comma separated (default zeros)");
  jac->add_option("-o,--output", o.output);
  format(jac, {"csv", "json"});

  CLI::App* ten = app.add_subcommand("tension", "solve one tension-distribution problem");
  existing(ten->add_option("problem", o.input)->required());
  ten->add_option("-o,--output", o.output);
  format(ten, {"text", "json"});

  CLI::App* eff = app.add_subcommand("effmass", "effective-mass field over a posture grid");
  existing(eff->add_option("model", o.input)->required());
  existing(eff->add_option("grid", o.second)->required());
  eff->add_option("--threads", o.threads, "worker count (capped by TENDONKIT_THREADS)")
      ->check(CLI::NonNegativeNumber);
  eff->add_option("-o,--output", o.output);
  format(eff, {"csv", "json"});

  CLI::App* run = app.add_subcommand("run", "simulate a scenario and write its trace");
  existing(run->add_option("scenario", o.input)->required());
  run->add_option("-o,--output", o.output);
  run->add_option("--set", o.overrides, "override key=value (repeatable)");
  run->add_flag("--summary", o.summary, "print summary metrics to stderr");
  format(run, {"csv", "json"});

  CLI::App* sum = app.add_subcommand("summarize", "metrics of a trace file");
  existing(sum->add_option("trace", o.input)->required());
  sum->add_option("-o,--output", o.output);
  format(sum, {"text", "json"});

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "ERROR UsageError: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }
  if (o.format == "csv" && (ten->parsed() || sum->parsed())) o.format = "text";

  try {
    if (validate->parsed()) return cmd_validate(o);
    if (jac->parsed()) return cmd_jacobian(o);
    if (ten->parsed()) return cmd_tension(o);
    if (eff->parsed()) return cmd_effmass(o);
    if (run->parsed()) return cmd_run(o);
    if (sum->parsed()) return cmd_summarize(o);
  } catch (const tendonkit::Error& e) {
    std::cerr << "ERROR " << e.code() << ": " << e.what() << "\n";
    return e.kind() == tendonkit::Error::Kind::kValidation ? kExitValidation : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "ERROR InternalError: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
