#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "charblock/metrics/metrics.hpp"

namespace charblock {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> toks;
  std::string t;
  while (ss >> t) toks.push_back(std::move(t));
  return toks;
}

// n-gram multiset keyed by joined tokens.
std::map<std::string, long> ngram_counts(const std::vector<std::string>& toks, int n) {
  std::map<std::string, long> counts;
  for (size_t i = 0; i + n <= toks.size(); ++i) {
    std::string key;
    for (int j = 0; j < n; ++j) {
      key += toks[i + j];
      key.push_back('\x01');
    }
    ++counts[key];
  }
  return counts;
}

}  // namespace

EvalResult corpus_bleu(const std::vector<std::string>& hyps,
                       const std::vector<std::string>& refs, int max_n) {
  if (hyps.empty()) throw std::invalid_argument("corpus_bleu: empty corpus");
  if (hyps.size() != refs.size()) {
    throw std::invalid_argument("corpus_bleu: hypothesis/reference counts differ");
  }
  if (max_n < 1) throw std::invalid_argument("corpus_bleu: max_n must be >= 1");

  std::vector<long> clipped(max_n, 0), total(max_n, 0);
  long hyp_len = 0, ref_len = 0;
  for (size_t i = 0; i < hyps.size(); ++i) {
    const auto h = tokenize(hyps[i]);
    const auto r = tokenize(refs[i]);
    hyp_len += static_cast<long>(h.size());
    ref_len += static_cast<long>(r.size());
    for (int n = 1; n <= max_n; ++n) {
      const auto hc = ngram_counts(h, n);
      const auto rc = ngram_counts(r, n);
      for (const auto& [key, count] : hc) {
        total[n - 1] += count;
        const auto it = rc.find(key);
        if (it != rc.end()) clipped[n - 1] += std::min(count, it->second);
      }
    }
  }

  EvalResult result;
  result.metric = "bleu";
  result.support = static_cast<long>(hyps.size());
  result.notes = "tokenizer=whitespace smoothing=floor_1/(2*hyp_ngrams) empty_orders=dropped";

  double log_sum = 0.0;
  int used_orders = 0;
  for (int n = 1; n <= max_n; ++n) {
    if (total[n - 1] == 0) {
      result.precisions.push_back(0.0);
      continue;  // no hypothesis n-grams of this order anywhere
    }
    double p = static_cast<double>(clipped[n - 1]) / static_cast<double>(total[n - 1]);
    if (clipped[n - 1] == 0) p = 1.0 / (2.0 * static_cast<double>(total[n - 1]));
    result.precisions.push_back(p);
    log_sum += std::log(p);
    ++used_orders;
  }
  const double geo = used_orders > 0 ? std::exp(log_sum / used_orders) : 0.0;
  result.brevity_penalty =
      hyp_len >= ref_len || hyp_len == 0
          ? (hyp_len == 0 ? 0.0 : 1.0)
          : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
  result.value = 100.0 * result.brevity_penalty * geo;
  return result;
}

}  // namespace charblock
