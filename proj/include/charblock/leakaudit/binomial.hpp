#pragma once

#include <string>

namespace charblock {

// One-sided exact binomial upper tail P(X >= successes | Binomial(n, chance)),
// summed in log space.
double binom_pvalue(long successes, long n, double chance);

enum class Verdict { leak, no_leak, inconclusive };

// leak iff p < 1e-10, no_leak iff p > 1e-3, inconclusive between.
constexpr double kLeakP = 1e-10;
constexpr double kNoLeakP = 1e-3;

inline Verdict verdict_from_p(double p) {
  if (p < kLeakP) return Verdict::leak;
  if (p > kNoLeakP) return Verdict::no_leak;
  return Verdict::inconclusive;
}

std::string to_string(Verdict v);

}  // namespace charblock
