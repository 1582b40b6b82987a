#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cuspidal/classify.hpp"
#include "cuspidal/config.hpp"
#include "cuspidal/error.hpp"
#include "cuspidal/export.hpp"
#include "cuspidal/ik.hpp"
#include "cuspidal/path.hpp"
#include "cuspidal/robot_io.hpp"
#include "cuspidal/singular.hpp"
#include "cuspidal/svg.hpp"
#include "cuspidal/topo.hpp"

namespace cuspidal::cli {

enum ExitCode { kOk = 0, kUsage = 2, kInputFile = 3, kAnomaly = 4 };

struct RunConfig {
  std::string command;
  std::string robot_file;
  int resolution = 512;
  int ws_resolution = 256;
  std::string out_dir;
  std::vector<std::string> formats{"json"};
  unsigned seed = 1;
  bool degrees = false;
  std::vector<std::string> tol_overrides;  // key=value
  Tolerances tol;
};

namespace detail {

inline bool power_of_two_64(int n) { return n >= 64 && (n & (n - 1)) == 0; }

inline void apply_overrides(RunConfig& c) {
  for (const std::string& kv : c.tol_overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::InvalidInput, "tolerance override must be key=value: " + kv);
    const std::string key = kv.substr(0, eq);
    double v = 0.0;
    try {
      v = std::stod(kv.substr(eq + 1));
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::InvalidInput, "bad tolerance value in " + kv);
    }
    if (!(v > 0.0)) throw Error(ErrorKind::InvalidInput, "tolerance overrides must be positive: " + kv);
    Tolerances& t = c.tol;
    const std::map<std::string, double*> fields = {
        {"root_cluster", &t.root_cluster},   {"root_polish", &t.root_polish},
        {"triple_root_factor", &t.triple_root_factor}, {"merge", &t.merge},
        {"ik_residual", &t.ik_residual},     {"spurious", &t.spurious},
        {"trace_refine", &t.trace_refine},   {"cusp_velocity_ratio", &t.cusp_velocity_ratio},
        {"cusp_merge", &t.cusp_merge},       {"closed_form_band", &t.closed_form_band},
        {"newton_residual", &t.newton_residual}, {"min_step_fraction", &t.min_step_fraction},
        {"singular", &t.singular},           {"tracking", &t.tracking}};
    if (key == "newton_max_iter") {
      t.newton_max_iter = static_cast<int>(v);
      continue;
    }
    const auto it = fields.find(key);
    if (it == fields.end()) throw Error(ErrorKind::InvalidInput, "unknown tolerance " + key);
    *it->second = v;
  }
}

class Output {
 public:
  Output(const RunConfig& c, std::ostream& out) : cfg_(c), out_(out) {}

  bool wants(const std::string& f) const {
    return std::find(cfg_.formats.begin(), cfg_.formats.end(), f) != cfg_.formats.end();
  }

  void file(const std::string& name, const std::string& content) const {
    std::filesystem::path dir = cfg_.out_dir.empty() ? std::filesystem::path(".") : std::filesystem::path(cfg_.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw Error(ErrorKind::InputFile, "cannot write " + (dir / name).string());
    f << content;
  }

  /// Report on stdout; also <command>.json when json output is written to a directory.
  void report(const std::string& stem, Json body, const RobotParams* robot) const {
    Json j;
    j["command"] = cfg_.command;
    if (robot) j["robot"] = robot_to_json(*robot);
    j["result"] = std::move(body);
    j["tolerances"] = io::tolerances_json(cfg_.tol);
    const std::string text = j.dump(2) + "\n";
    out_ << text;
    if (!cfg_.out_dir.empty() && wants("json")) file(stem + ".json", text);
  }
  void csv(const std::string& name, const std::string& content) const {
    if (wants("csv")) file(name, content);
  }
  void svg(const std::string& name, const std::string& content) const {
    if (wants("svg")) file(name, content);
  }

 private:
  const RunConfig& cfg_;
  std::ostream& out_;
};

inline void error_json(std::ostream& err, const std::string& kind, const std::string& msg, int code) {
  err << Json{{"error", {{"kind", kind}, {"message", msg}}}, {"exit_code", code}}.dump() << "\n";
}

inline int exit_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::InputFile:
    case ErrorKind::Unreachable: return kInputFile;
    case ErrorKind::InvalidInput:
    case ErrorKind::Precondition: return kUsage;
    case ErrorKind::Degenerate:
    case ErrorKind::Anomaly: return kAnomaly;
  }
  return kAnomaly;
}

}  // namespace detail

/// Entry point of the command-line tool. Reports go to `out`, error JSON to
/// `err`; the return value is the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  RunConfig cfg;
  CLI::App app{"Cuspidality analysis of 3-R serial robots"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::array<double, 3> at{0, 0, 0};
  std::string path_file;
  std::vector<double> start, goal;
  bool free_endpoints = false;
  int samples = 1000;
  int plan_grid = 512;
  double r2 = 1.0, r3 = 0.0;
  std::vector<double> d3r{0.2, 3.0}, d4r{0.2, 3.0};
  int cells = 64;
  int cusp_grid = cusp_grid_default();
  std::map<std::string, int> resolution;  // per subcommand, so defaults do not overwrite each other

  auto common = [&](CLI::App* s, bool needs_robot, int default_res) {
    if (needs_robot) s->add_option("--robot", cfg.robot_file, "robot JSON file")->required();
    int& res = resolution[s->get_name()];
    res = default_res;
    s->add_option("--resolution", res, "joint grid resolution (power of two >= 64)")->capture_default_str();
    s->add_option("--out", cfg.out_dir, "output directory for files");
    s->add_option("--format", cfg.formats, "output formats: json, csv, svg")
        ->check(CLI::IsMember({"json", "csv", "svg"}))
        ->default_val(std::vector<std::string>{"json"});
    s->add_option("--seed", cfg.seed, "seed for sampling checks")->default_val(1u);
    s->add_flag("--degrees", cfg.degrees, "angles in input files and flags are in degrees");
    s->add_option("--tol", cfg.tol_overrides, "tolerance override key=value");
  };

  auto* c_classify = app.add_subcommand("classify", "cuspidality verdict, rules, closed form and cusp count");
  common(c_classify, true, cusp_grid_default());
  auto* c_sing = app.add_subcommand("singularities", "singularity curves, workspace boundary and cusps");
  common(c_sing, true, 512);
  auto* c_asp = app.add_subcommand("aspects", "aspects of the joint space");
  common(c_asp, true, 512);
  c_asp->add_option("--at", at, "also sort the inverse solutions at x y z by aspect");
  auto* c_cs = app.add_subcommand("charsurf", "characteristic surfaces");
  common(c_cs, true, 512);
  auto* c_uq = app.add_subcommand("uniqueness", "basic regions and maximal uniqueness domains");
  common(c_uq, true, 512);
  c_uq->add_option("--ws-resolution", cfg.ws_resolution, "workspace raster resolution")->default_val(256);
  c_uq->add_option("--samples", samples, "injectivity samples per domain")->default_val(1000);
  auto* c_fr = app.add_subcommand("feasible-regions", "regions of feasible paths");
  common(c_fr, true, 512);
  c_fr->add_option("--ws-resolution", cfg.ws_resolution, "workspace raster resolution")->default_val(256);
  auto* c_ik = app.add_subcommand("ik", "inverse kinematics at a point");
  common(c_ik, true, 512);
  c_ik->add_option("--at", at, "target x y z")->required();
  auto* c_cp = app.add_subcommand("check-path", "feasibility of a workspace path from every branch");
  common(c_cp, true, 512);
  c_cp->add_option("--path", path_file, "path file (.json or .csv)")->required();
  auto* c_pp = app.add_subcommand("plan-posture-change", "non-singular path between two postures");
  common(c_pp, true, 512);
  c_pp->add_option("--start", start, "theta1 theta2 theta3")->expected(3)->required();
  c_pp->add_option("--goal", goal, "theta1 theta2 theta3")->expected(3)->required();
  c_pp->add_flag("--free", free_endpoints, "allow start and goal at different workspace points");
  c_pp->add_option("--planner-grid", plan_grid, "planner grid resolution")->default_val(512);
  auto* c_at = app.add_subcommand("atlas", "cusp-count domains over a (d3, d4) section");
  common(c_at, false, 256);
  c_at->add_option("--r2", r2, "joint offset r2")->default_val(1.0);
  c_at->add_option("--r3", r3, "joint offset r3")->default_val(0.0);
  c_at->add_option("--d3", d3r, "d3 range lo hi")->expected(2)->default_val(std::vector<double>{0.2, 3.0});
  c_at->add_option("--d4", d4r, "d4 range lo hi")->expected(2)->default_val(std::vector<double>{0.2, 3.0});
  c_at->add_option("--cells", cells, "cells per axis")->default_val(64)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    detail::error_json(err, "usage", e.what(), kUsage);
    return kUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  cfg.command = sub->get_name();
  cfg.resolution = resolution.at(cfg.command);

  try {
    detail::apply_overrides(cfg);
    if (cfg.command == "atlas") {
      cusp_grid = cfg.resolution;
      if (!detail::power_of_two_64(cusp_grid))
        throw Error(ErrorKind::InvalidInput, "--resolution must be a power of two >= 64");
    } else if (!detail::power_of_two_64(cfg.resolution) || !detail::power_of_two_64(cfg.ws_resolution) ||
               !detail::power_of_two_64(plan_grid)) {
      throw Error(ErrorKind::InvalidInput, "resolutions must be powers of two >= 64");
    }
    const detail::Output o(cfg, out);
    const Tolerances& tol = cfg.tol;
    const double ang = cfg.degrees ? kPi / 180.0 : 1.0;

    if (cfg.command == "atlas") {
      const Atlas a = atlas_scan(r2, r3, {d3r[0], d3r[1]}, {d4r[0], d4r[1]}, cells, cusp_grid, tol);
      Json body = io::atlas_json(a);
      body["curve_grid"] = cusp_grid;
      o.report("atlas", body, nullptr);
      o.csv("atlas.csv", io::atlas_csv(a));
      o.svg("atlas.svg", svg::atlas(a));
      return kOk;
    }

    const RobotParams p = load_robot(cfg.robot_file, cfg.degrees);

    if (cfg.command == "classify") {
      const ClassificationResult r = classify(p, cfg.resolution, tol);
      Json body = io::classification_json(r);
      body["curve_grid"] = cfg.resolution;
      o.report("classify", body, &p);
      return r.anomalies.empty() ? kOk : kAnomaly;
    }
    if (cfg.command == "singularities") {
      const SingularitySet s = analyze_singularities(p, cfg.resolution, tol);
      o.report("singularities", io::singularities_json(s), &p);
      o.csv("curves.csv", io::curves_csv(s, p));
      o.csv("cusps.csv", io::cusps_csv(s.cusps));
      o.svg("singularities.svg", svg::singularities(p, s));
      return s.anomalies.empty() ? kOk : kAnomaly;
    }
    if (cfg.command == "aspects") {
      const AspectMap m = compute_aspects(p, cfg.resolution);
      Json body = io::aspects_json(m);
      if (c_asp->count("--at")) {
        IkSolutionSet s = inverse_kinematics(p, at[0], at[1], at[2], tol);
        for (IkSolution& q : s.solutions) q.aspect = m.aspect_of(p, q.q);
        body["solutions"] = io::ik_json(s);
        Json per = Json::array();
        for (int a = 1; a <= m.count; ++a)
          per.push_back(std::count_if(s.solutions.begin(), s.solutions.end(), [&](const IkSolution& q) { return q.aspect == a; }));
        body["solutions_per_aspect"] = per;
      }
      o.report("aspects", body, &p);
      o.csv("aspects.csv", io::joint_raster_csv(m, m.label));
      if (o.wants("svg")) o.svg("aspects.svg", svg::aspects(p, m, analyze_singularities(p, cfg.resolution, tol)));
      return kOk;
    }
    if (cfg.command == "ik") {
      IkSolutionSet s = inverse_kinematics(p, at[0], at[1], at[2], tol);
      const AspectMap m = compute_aspects(p, cfg.resolution);
      for (IkSolution& q : s.solutions) q.aspect = m.aspect_of(p, q.q);
      o.report("ik", io::ik_json(s), &p);
      return kOk;
    }
    if (cfg.command == "charsurf") {
      const SingularitySet s = analyze_singularities(p, cfg.resolution, tol);
      const AspectMap m = compute_aspects(p, cfg.resolution);
      const CharSurfaceSet cs = characteristic_surfaces(p, m, s.boundary, tol);
      o.report("charsurf", io::char_surfaces_json(cs, m.count), &p);
      o.csv("charsurf.csv", io::char_surfaces_csv(p, cs));
      o.svg("charsurf.svg", svg::char_surfaces(p, m, s, cs));
      return cs.skipped.empty() ? kOk : kAnomaly;
    }
    if (cfg.command == "uniqueness" || cfg.command == "feasible-regions") {
      const TopologyAnalysis t = analyze_topology(p, cfg.resolution, cfg.ws_resolution, tol);
      if (cfg.command == "uniqueness") {
        std::vector<InjectivityReport> inj;
        int violations = 0;
        for (const UniquenessDomain& u : t.uniqueness) {
          inj.push_back(check_injectivity(p, t.aspects, u, samples, cfg.seed, tol));
          violations += inj.back().violations;
        }
        Json body = io::partition_json(t.partition);
        body["uniqueness_domains"] = io::uniqueness_json(t.uniqueness, inj);
        o.report("uniqueness", body, &p);
        o.csv("basic_regions.csv", io::joint_raster_csv(t.aspects, t.partition.ra));
        for (const UniquenessDomain& u : t.uniqueness)
          o.csv("qu" + std::to_string(u.id) + ".csv", io::joint_raster_csv(t.aspects, u.mask));
        o.svg("uniqueness.svg", svg::uniqueness(p, t.partition, t.uniqueness, t.char_surfaces));
        return violations == 0 ? kOk : kAnomaly;
      }
      Json body = io::partition_json(t.partition);
      body["feasible_regions"] = io::feasible_json(t.feasible);
      o.report("feasible_regions", body, &p);
      o.csv("workspace_regions.csv", io::workspace_raster_csv(t.partition.ws, t.partition.ws_region));
      for (const FeasibleRegion& w : t.feasible)
        o.csv("wf" + std::to_string(w.id) + ".csv", io::workspace_raster_csv(t.partition.ws, w.mask));
      o.svg("feasible_regions.svg", svg::feasible_regions(p, t.partition, t.feasible, t.singularities));
      return kOk;
    }
    if (cfg.command == "check-path") {
      const WorkspacePath path = load_path(path_file);
      const FeasibilityReport rep = check_feasibility(p, path, tol);
      o.report("check_path", io::feasibility_json(path, rep), &p);
      o.csv("lift.csv", io::lift_csv(rep));
      if (o.wants("svg"))
        o.svg("check_path.svg", svg::path_check(p, path, rep, analyze_singularities(p, cfg.resolution, tol)));
      return kOk;
    }
    if (cfg.command == "plan-posture-change") {
      const JointConfig qs(ang * start[0], ang * start[1], ang * start[2]);
      const JointConfig qg(ang * goal[0], ang * goal[1], ang * goal[2]);
      const SingularitySet s = analyze_singularities(p, cfg.resolution, tol);
      PlannerOptions opt;
      opt.grid_n = plan_grid;
      opt.free_endpoints = free_endpoints;
      const PostureChangePlan plan = plan_posture_change(p, qs, qg, s.cusps, opt, tol);
      o.report("plan", io::plan_json(plan), &p);
      if (plan.found) {
        o.csv("plan.csv", io::plan_csv(plan));
        o.svg("plan.svg", svg::posture_plan(p, compute_aspects(p, plan_grid), s, plan));
      }
      return kOk;
    }
    throw Error(ErrorKind::InvalidInput, "unknown command " + cfg.command);
  } catch (const Error& e) {
    const int code = detail::exit_for(e.kind());
    detail::error_json(err, to_string(e.kind()), e.what(), code);
    return code;
  } catch (const std::exception& e) {
    detail::error_json(err, "internal", e.what(), kAnomaly);
    return kAnomaly;
  }
}

}  // namespace cuspidal::cli
