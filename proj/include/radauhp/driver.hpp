#pragma once

#include <Eigen/Dense>
#include <vector>

#include "radauhp/error_estimate.hpp"
#include "radauhp/jump.hpp"
#include "radauhp/mesh.hpp"
#include "radauhp/nlp.hpp"
#include "radauhp/problem.hpp"
#include "radauhp/refine.hpp"
#include "radauhp/transcription.hpp"

namespace radauhp {

struct RunConfig {
  double epsilon = 1e-6;       // per-interval error tolerance
  int max_refinements = 20;    // refinement iterations before giving up
  int initial_intervals = 10;
  int initial_degree = 4;
  JumpConfig jump;
  // Mesh iterations only need the NLP solved a couple of orders below the
  // mesh tolerance; bang-bang solutions make tighter targets unreachable
  // with finite-difference derivatives.
  SolverOptions solver{.kkt_tolerance = 1e-7};
  bool no_jump_detection = false;
};

/// Everything observed during one refinement iteration.
struct IterationRecord {
  int iteration = 0;
  Mesh mesh;                    // mesh that was solved
  SolveOutcome outcome;
  double cost = 0.0;
  std::vector<double> e_max;
  DetectionReport detections;   // empty on the terminating iteration
  RefinementLog refinement;
  double wall_seconds = 0.0;
};

struct RunHistory {
  std::vector<IterationRecord> iterations;
  bool converged = false;       // every interval met the tolerance
  Mesh final_mesh;              // mesh of the last solve
  CollocationSolution solution;
};

/// Straight-line initial guess: states linear between the boundary guesses
/// (bound midpoints when a problem gives none), controls and free times at
/// their bound midpoints.
Eigen::VectorXd initial_guess(const OcpProblem& problem, const Mesh& mesh,
                              const DecisionLayout& layout);

/// Interpolates a previous solution onto a new mesh with the old mesh's
/// interval-local Lagrange bases, clipping to the variable bounds.
Eigen::VectorXd warm_start(const OcpProblem& problem,
                           const CollocationSolution& prev, const Mesh& mesh,
                           const DecisionLayout& layout);

/// Full refinement loop: solve, estimate the error, stop when every
/// interval passes or the iteration budget is exhausted, otherwise detect
/// jumps (unless disabled), refine, warm start and repeat.  A solver
/// failure aborts the loop with the partial history.
RunHistory run(const OcpProblem& problem, const RunConfig& config);

}  // namespace radauhp
