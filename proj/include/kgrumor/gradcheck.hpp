#pragma once

#include "kgrumor/trainer.hpp"

namespace kgrumor {
namespace pipeline {

struct GradCheckGroup {
  std::string name;
  int coordinates = 0;
  double max_rel_error = 0.0;
  double max_abs_grad = 0.0;  // largest reverse-mode gradient magnitude
};

struct GradCheckReport {
  std::vector<GradCheckGroup> groups;
  double max_rel_error = 0.0;
  double step = 0.0;
  std::string to_json() const;
};

// Reduced-width config for the built-in fixture (one post over a six-node
// graph); ablation flags can be toggled before running.
RunConfig gradcheck_config();

// Compares reverse-mode gradients of the full BCE loss against central
// finite differences over every coordinate of every parameter group.
// Relative error is |ad - fd| / max(|ad|, |fd|, 1).
GradCheckReport grad_check(const RunConfig& cfg, double step = 1e-5);

}  // namespace pipeline
}  // namespace kgrumor
