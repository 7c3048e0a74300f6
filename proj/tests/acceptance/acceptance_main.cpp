// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <vector>

#include "criteria.hpp"

int main() {
  using namespace acceptance;
  auto t0 = std::chrono::steady_clock::now();

  std::vector<CriterionResult> results = run_inference_criteria();

  Context ctx;
  run_training_experiments(ctx);
  for (CriterionResult& r : evaluate_training_criteria(ctx))
    results.push_back(std::move(r));
  for (CriterionResult& r : run_pipeline_criteria())
    results.push_back(std::move(r));

  int failures = 0;
  std::printf("\n");
  for (const CriterionResult& r : results) {
    std::printf("[%s] criterion %2d: %s - %s\n", r.pass ? "PASS" : "FAIL", r.id,
                r.name.c_str(), r.detail.c_str());
    if (!r.pass) ++failures;
  }
  double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("\n%d/%zu criteria passed in %.0f seconds\n",
              static_cast<int>(results.size()) - failures, results.size(), elapsed);
  return failures;
}
