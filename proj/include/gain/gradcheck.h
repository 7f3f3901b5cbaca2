#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "gain/encoding.h"
#include "gain/model.h"

namespace gain {

struct GradcheckOptions {
  double step = 1e-5;
  // Denominator floor: entries where both gradients are below it are
  // compared on absolute error instead.
  double floor = 1e-6;
  // 0 checks every element of every parameter.
  std::size_t max_elements_per_param = 0;
};

struct GradcheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  std::size_t worst_doc = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  // Parameter elements compared per document.
  std::size_t checked = 0;
};

// Small dimensions that keep a full finite-difference sweep cheap.
ModelConfig ToyConfig(std::size_t vocab_size, std::size_t num_types, std::size_t num_relations);

double RelativeError(double analytic, double numeric, double floor);

// Sum over `docs` of the per-document loss on all candidate pairs, eval mode.
double EvalLoss(const GainModel& model, std::span<const EncodedDoc> docs);

// Central finite differences against tape gradients for every parameter,
// on each document's loss separately.
GradcheckReport GradCheck(GainModel& model, std::span<const EncodedDoc> docs, const GradcheckOptions& options = {});

}  // namespace gain
