#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "charblock/downsamplers/config.hpp"
#include "charblock/leakaudit/binomial.hpp"

namespace charblock {

struct PositionStat {
  int pos = 0;  // 1-based target position
  double accuracy = 0.0;
  long successes = 0;
  long n = 0;
  double p_value = 1.0;
  Verdict verdict = Verdict::no_leak;
};

struct LeakReport {
  std::string label;
  int delta = 0;
  Variant variant = Variant::non_causal;
  PosKind pos_kind = PosKind::sinusoidal;
  int pad_multiplier = 1;
  double chance = 0.01;
  std::uint64_t seed = 0;
  std::string config_fingerprint;
  std::vector<PositionStat> positions;

  // 1-based positions with p < p_max.
  std::vector<int> flagged(double p_max) const {
    std::vector<int> out;
    for (const auto& s : positions) {
      if (s.p_value < p_max) out.push_back(s.pos);
    }
    return out;
  }

  std::vector<int> leak_positions() const {
    std::vector<int> out;
    for (const auto& s : positions) {
      if (s.verdict == Verdict::leak) out.push_back(s.pos);
    }
    return out;
  }
};

}  // namespace charblock
