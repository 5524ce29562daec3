#include "radauhp/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace radauhp {

namespace {

using nlohmann::json;

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json mat_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

json mesh_to_json(const Mesh& mesh) {
  json j;
  j["fractions"] = mesh.fractions;
  j["degrees"] = mesh.degrees;
  json segs = json::array();
  for (const Segment& s : mesh.segments) {
    segs.push_back({{"kind", to_string(s.kind)}, {"first", s.first},
                    {"count", s.count}});
  }
  j["segments"] = segs;
  return j;
}

json detections_to_json(const DetectionReport& report) {
  json dets = json::array();
  for (const Detection& d : report.detections) {
    dets.push_back({{"location", d.location},
                    {"lower", d.lower},
                    {"upper", d.upper},
                    {"magnitude", d.magnitude},
                    {"minmod", vec_to_json(d.minmod)}});
  }
  return dets;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

json record_to_json(const RunRecord& record) {
  json j;
  j["problem"] = record.problem;
  j["seed"] = record.seed;

  json cfg;
  cfg["epsilon"] = record.config.epsilon;
  cfg["max_refinements"] = record.config.max_refinements;
  cfg["initial_intervals"] = record.config.initial_intervals;
  cfg["initial_degree"] = record.config.initial_degree;
  cfg["no_jump_detection"] = record.config.no_jump_detection;
  cfg["jump"] = {{"orders", record.config.jump.orders},
                 {"threshold", record.config.jump.threshold},
                 {"safety", record.config.jump.safety}};
  cfg["solver"] = {{"kkt_tolerance", record.config.solver.kkt_tolerance},
                   {"max_iterations", record.config.solver.max_iterations},
                   {"fd_step_scale", record.config.solver.fd_step_scale},
                   {"constraint_tolerance", record.config.solver.constraint_tolerance},
                   {"mu_init", record.config.solver.mu_init}};
  j["config"] = cfg;

  json iters = json::array();
  for (const IterationRecord& rec : record.history.iterations) {
    json it;
    it["iteration"] = rec.iteration;
    it["mesh"] = mesh_to_json(rec.mesh);
    it["status"] = to_string(rec.outcome.status);
    it["kkt_residual"] = rec.outcome.kkt_residual;
    it["solver_iterations"] = rec.outcome.iterations;
    it["cost"] = rec.cost;
    it["e_max"] = rec.e_max;
    it["detections"] = detections_to_json(rec.detections);
    json actions = json::array();
    for (const RefineAction& a : rec.refinement.actions) actions.push_back(to_string(a));
    it["refinement"] = actions;
    it["wall_seconds"] = rec.wall_seconds;
    iters.push_back(std::move(it));
  }
  j["iterations"] = iters;
  j["converged"] = record.history.converged;
  j["final_mesh"] = mesh_to_json(record.history.final_mesh);

  const CollocationSolution& sol = record.history.solution;
  json s;
  s["t0"] = sol.t0;
  s["tf"] = sol.tf;
  s["cost"] = sol.cost;
  json intervals = json::array();
  for (const IntervalSolution& iv : sol.intervals) {
    intervals.push_back({{"tau_support", vec_to_json(iv.tau_support)},
                         {"states", mat_to_json(iv.states)},
                         {"controls", mat_to_json(iv.controls)}});
  }
  s["intervals"] = intervals;
  j["solution"] = s;
  return j;
}

void write_record(const RunRecord& record, const std::string& path) {
  auto out = open_out(path);
  out << record_to_json(record).dump(2) << "\n";
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  json j;
  in >> j;
  return j;
}

void write_history_csv(const RunHistory& history, const std::string& path) {
  auto out = open_out(path);
  out << "iteration,interval_index,T_left,T_right,degree,segment_kind,e_max\n";
  for (const IterationRecord& rec : history.iterations) {
    const Mesh& mesh = rec.mesh;
    for (int k = 0; k < mesh.num_intervals(); ++k) {
      const std::string e =
          k < static_cast<int>(rec.e_max.size()) ? num(rec.e_max[k]) : "nan";
      out << rec.iteration << ',' << k << ',' << num(mesh.left(k)) << ','
          << num(mesh.right(k)) << ',' << mesh.degrees[k] << ','
          << to_string(mesh.segments[mesh.segment_of(k)].kind) << ',' << e
          << '\n';
    }
  }
}

void write_plot_data(const RunHistory& history, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const CollocationSolution& sol = history.solution;
  const int n_u =
      sol.intervals.empty() ? 0 : static_cast<int>(sol.intervals[0].controls.cols());
  const int n_y =
      sol.intervals.empty() ? 0 : static_cast<int>(sol.intervals[0].states.cols());

  for (int i = 0; i < n_u; ++i) {
    auto out = open_out(dir + "/control_" + std::to_string(i) + ".csv");
    out << "tau,value\n";
    for (const IntervalSolution& iv : sol.intervals) {
      for (int j = 0; j < iv.controls.rows(); ++j) {
        out << num(iv.tau_support[j]) << ',' << num(iv.controls(j, i)) << '\n';
      }
    }
  }
  for (int i = 0; i < n_y; ++i) {
    auto out = open_out(dir + "/state_" + std::to_string(i) + ".csv");
    out << "tau,value\n";
    for (size_t q = 0; q < sol.intervals.size(); ++q) {
      const IntervalSolution& iv = sol.intervals[q];
      const int rows = q + 1 == sol.intervals.size()
                           ? static_cast<int>(iv.states.rows())
                           : static_cast<int>(iv.states.rows()) - 1;
      for (int j = 0; j < rows; ++j) {
        out << num(iv.tau_support[j]) << ',' << num(iv.states(j, i)) << '\n';
      }
    }
  }
  auto out = open_out(dir + "/mesh_history.csv");
  out << "iteration,tau\n";
  for (const IterationRecord& rec : history.iterations) {
    for (double f : rec.mesh.fractions) {
      out << rec.iteration << ',' << num(f) << '\n';
    }
  }
}

}  // namespace radauhp
