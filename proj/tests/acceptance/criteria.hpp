#pragma once

// Acceptance criteria runner: each criterion is evaluated independently and
// reports one pass/fail line. Expensive experiment state (trained models,
// sweep cells) is shared through the context.

#include <string>
#include <vector>

#include "eertag/synthetic.hpp"

namespace acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

struct TrendPoint {
  int train_sentences = 0;
  double token_error = 0.0;
  double rho_gap = 0.0;
};

struct Context {
  // Criterion 4/5: consistency experiments per training-set size.
  std::vector<TrendPoint> trend;
  eertag::ConsistencyReport main_report;  // m = 2000, with baselines
  double consistency_seconds = 0.0;

  // Criterion 6/7: the rho/gamma sweep.
  std::vector<eertag::SweepCell> sweep;
};

std::vector<CriterionResult> run_inference_criteria();        // 1-3
void run_training_experiments(Context& ctx);                  // fills ctx
std::vector<CriterionResult> evaluate_training_criteria(const Context& ctx);  // 4-7
std::vector<CriterionResult> run_pipeline_criteria();         // 8-10

}  // namespace acceptance
