#include <algorithm>
#include <stdexcept>

#include "charblock/metrics/metrics.hpp"

namespace charblock {

namespace {

void check_corpus(const std::vector<std::string>& hyps,
                  const std::vector<std::string>& refs, const char* what) {
  if (hyps.empty()) throw std::invalid_argument(std::string(what) + ": empty corpus");
  if (hyps.size() != refs.size()) {
    throw std::invalid_argument(std::string(what) + ": hypothesis/reference counts differ");
  }
}

}  // namespace

EvalResult char_accuracy(const std::vector<std::string>& hyps,
                         const std::vector<std::string>& refs) {
  check_corpus(hyps, refs, "char_accuracy");
  long correct = 0, total = 0;
  for (size_t i = 0; i < hyps.size(); ++i) {
    const auto& h = hyps[i];
    const auto& r = refs[i];
    const size_t common = std::min(h.size(), r.size());
    for (size_t j = 0; j < common; ++j) {
      if (h[j] == r[j]) ++correct;
    }
    total += static_cast<long>(std::max(h.size(), r.size()));
  }
  EvalResult result;
  result.metric = "char_accuracy";
  result.support = static_cast<long>(hyps.size());
  result.correct = correct;
  result.total = total;
  result.value = total == 0 ? 1.0 : static_cast<double>(correct) / static_cast<double>(total);
  return result;
}

EvalResult sequence_accuracy(const std::vector<std::string>& hyps,
                             const std::vector<std::string>& refs) {
  check_corpus(hyps, refs, "sequence_accuracy");
  long correct = 0;
  for (size_t i = 0; i < hyps.size(); ++i) {
    if (hyps[i] == refs[i]) ++correct;
  }
  EvalResult result;
  result.metric = "sequence_accuracy";
  result.support = static_cast<long>(hyps.size());
  result.correct = correct;
  result.total = result.support;
  result.value = static_cast<double>(correct) / static_cast<double>(result.total);
  return result;
}

}  // namespace charblock
