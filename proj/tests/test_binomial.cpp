#include <doctest.h>

#include <cmath>

#include "charblock/leakaudit/binomial.hpp"

using namespace charblock;

namespace {

// Direct-summation oracle: multiplicative pmf recurrence in long double,
// no logarithms. Independent of the production log-space route.
double binom_tail_direct(long successes, long n, double p) {
  if (successes <= 0) return 1.0;
  if (successes > n) return 0.0;
  const long double lp = p, lq = 1.0L - lp;
  long double term = std::pow(lq, static_cast<long double>(n));  // k = 0
  long double tail = successes == 0 ? term : 0.0L;
  for (long k = 0; k < n; ++k) {
    term *= static_cast<long double>(n - k) / static_cast<long double>(k + 1) * (lp / lq);
    if (k + 1 >= successes) tail += term;
  }
  return static_cast<double>(tail > 1.0L ? 1.0L : tail);
}

double rel_diff(double a, double b) {
  if (a == b) return 0.0;
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

}  // namespace

TEST_CASE("tail from zero successes is exactly 1") {
  CHECK(binom_pvalue(0, 3200, 0.01) == 1.0);
  CHECK(binom_pvalue(0, 0, 0.5) == 1.0);
}

TEST_CASE("Table-1-scale boundary values") {
  // 47/3200 at chance 0.01 sits above the no-leak threshold...
  const double p47 = binom_pvalue(47, 3200, 0.01);
  CHECK(p47 > 1e-3);
  CHECK(p47 < 2e-2);
  // ...while 108/3200 (accuracy 0.0338) is deep in the leak region.
  CHECK(binom_pvalue(108, 3200, 0.01) < 1e-10);
}

TEST_CASE("agrees with the direct-summation oracle to 1e-12 relative") {
  const long ns[] = {1, 2, 7, 50, 320, 1000, 3200, 4000};
  const double ps[] = {1e-4, 0.01, 0.1, 0.37, 0.5};
  for (const long n : ns) {
    for (const double p : ps) {
      const long ss[] = {0,         1,         n / 10,     n / 4,
                         n / 2,     (3 * n) / 4, n - 1 > 0 ? n - 1 : 0, n};
      for (const long s : ss) {
        if (s > n) continue;
        const double mine = binom_pvalue(s, n, p);
        const double ref = binom_tail_direct(s, n, p);
        INFO("n=", n, " s=", s, " p=", p, " mine=", mine, " ref=", ref);
        CHECK(rel_diff(mine, ref) < 1e-12);
      }
    }
  }
}

TEST_CASE("oracle sweep across the success range at probe scale") {
  const long n = 3200;
  const double chance = 0.01;
  for (long s = 0; s <= 200; s += 3) {
    CHECK(rel_diff(binom_pvalue(s, n, chance), binom_tail_direct(s, n, chance)) < 1e-12);
  }
}

TEST_CASE("edge cases") {
  CHECK(binom_pvalue(5, 10, 0.0) == 0.0);
  CHECK(binom_pvalue(0, 10, 0.0) == 1.0);
  CHECK(binom_pvalue(10, 10, 1.0) == 1.0);
  CHECK(binom_pvalue(10, 10, 0.5) == doctest::Approx(std::pow(0.5, 10)).epsilon(1e-12));
  CHECK_THROWS(binom_pvalue(11, 10, 0.5));
  CHECK_THROWS(binom_pvalue(1, 10, 1.5));
}

TEST_CASE("verdict bands mirror the two thresholds") {
  CHECK(verdict_from_p(1e-12) == Verdict::leak);
  CHECK(verdict_from_p(0.5) == Verdict::no_leak);
  CHECK(verdict_from_p(1e-6) == Verdict::inconclusive);
  CHECK(verdict_from_p(1e-3) == Verdict::inconclusive);   // boundary: not strictly above
  CHECK(verdict_from_p(1e-10) == Verdict::inconclusive);  // boundary: not strictly below
}

TEST_CASE("monotone: more successes never raise the tail") {
  double prev = 1.0;
  for (long s = 0; s <= 100; ++s) {
    const double p = binom_pvalue(s, 100, 0.3);
    CHECK(p <= prev + 1e-15);
    prev = p;
  }
}
