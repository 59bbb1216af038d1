#pragma once

// Central finite differences against reverse-mode gradients.
// rel_err = |analytic - numeric| / max(|analytic|, |numeric|, 1e-8)

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "charblock/numcore/param_store.hpp"

namespace charblock {

struct GradCheckReport {
  struct Entry {
    std::string name;
    double max_rel_err = 0.0;
    bool finite = true;
  };
  std::vector<Entry> entries;
  double max_rel_err = 0.0;
  bool all_finite = true;

  bool ok(double tol) const { return all_finite && max_rel_err < tol; }
};

// fn(store, grads_out) -> scalar loss; when grads_out != nullptr it must be
// filled with the reverse-mode gradients of the loss.
template <typename Scalar, typename Fn>
GradCheckReport grad_check(Fn&& fn, ParamStore<Scalar>& params, double eps = 1e-3,
                           double tol = 1e-4) {
  (void)tol;
  GradCheckReport report;
  std::map<std::string, Mat<Scalar>> analytic;
  const double base = static_cast<double>(fn(params, &analytic));
  if (!std::isfinite(base)) {
    report.all_finite = false;
    return report;
  }

  for (auto& [name, slot] : params.slots) {
    GradCheckReport::Entry entry;
    entry.name = name;
    const auto git = analytic.find(name);
    Mat<Scalar>& value = slot.value;
    for (int c = 0; c < value.cols(); ++c) {
      for (int r = 0; r < value.rows(); ++r) {
        const Scalar keep = value(r, c);
        value(r, c) = keep + Scalar(eps);
        const double up = static_cast<double>(fn(params, nullptr));
        value(r, c) = keep - Scalar(eps);
        const double down = static_cast<double>(fn(params, nullptr));
        value(r, c) = keep;
        const double numeric = (up - down) / (2 * eps);
        const double a =
            git == analytic.end() ? 0.0 : static_cast<double>(git->second(r, c));
        if (!std::isfinite(numeric) || !std::isfinite(a)) {
          entry.finite = false;
          continue;
        }
        const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
        entry.max_rel_err = std::max(entry.max_rel_err, std::abs(a - numeric) / denom);
      }
    }
    report.max_rel_err = std::max(report.max_rel_err, entry.max_rel_err);
    report.all_finite = report.all_finite && entry.finite;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace charblock
