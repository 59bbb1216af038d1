#include "charblock/leakaudit/binomial.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace charblock {

namespace {

// Cumulative log-factorial table in long double with Kahan compensation;
// the tail sum needs ~1e-13 relative accuracy up to n = 4000.
std::vector<long double> log_factorials(long n) {
  std::vector<long double> lf(n + 1, 0.0L);
  long double sum = 0.0L, comp = 0.0L;
  for (long k = 1; k <= n; ++k) {
    const long double term = std::log(static_cast<long double>(k)) - comp;
    const long double next = sum + term;
    comp = (next - sum) - term;
    sum = next;
    lf[k] = sum;
  }
  return lf;
}

}  // namespace

double binom_pvalue(long successes, long n, double chance) {
  if (n < 0) throw std::invalid_argument("binom_pvalue: n must be >= 0");
  if (successes > n) throw std::invalid_argument("binom_pvalue: successes > n");
  if (!(chance >= 0.0 && chance <= 1.0)) {
    throw std::invalid_argument("binom_pvalue: chance must be in [0,1]");
  }
  if (successes <= 0) return 1.0;
  if (chance == 0.0) return 0.0;  // successes >= 1 impossible
  if (chance == 1.0) return 1.0;

  const auto lf = log_factorials(n);
  const long double lp = std::log(static_cast<long double>(chance));
  const long double lq = std::log1p(static_cast<long double>(-chance));

  auto log_pmf = [&](long k) {
    return lf[n] - lf[k] - lf[n - k] + k * lp + (n - k) * lq;
  };

  // Anchor the sum at the largest term in the tail; terms are unimodal with
  // mode near n*chance, so the max is at max(successes, floor-mode).
  const long mode = std::min<long>(n, static_cast<long>((n + 1) * chance));
  const long anchor_k = std::max(successes, std::min(mode, n));
  const long double anchor = log_pmf(anchor_k);

  long double sum = 0.0L;
  for (long k = successes; k <= n; ++k) {
    sum += std::exp(log_pmf(k) - anchor);
  }
  const long double log_tail = anchor + std::log(sum);
  const long double tail = std::exp(log_tail);
  if (tail >= 1.0L) return 1.0;
  if (tail <= 0.0L) return 0.0;
  return static_cast<double>(tail);
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::leak: return "leak";
    case Verdict::no_leak: return "no_leak";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

}  // namespace charblock
