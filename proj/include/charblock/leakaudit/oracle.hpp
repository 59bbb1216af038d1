#pragma once

// Perturbation-based reachability: runs the downsampler with random
// parameters, bumps one embedding row at a time, and records which blocks
// move. A target position is reachable iff the block that predicts it is
// sensitive to the input position carrying that target. Unreachable blocks
// are bit-identical under the bump, so the 1e-6 threshold is generous.

#include <vector>

#include "charblock/bytedata.hpp"
#include "charblock/downsamplers/layers.hpp"

namespace charblock {

struct ReachabilitySet {
  int seq_len = 0;
  int delta = 1;
  int pad_len = 0;
  std::vector<char> reachable;                 // per target position, 0-based
  std::vector<std::vector<int>> contributing;  // sensitive input positions per target

  std::vector<int> reachable_positions() const {  // 1-based
    std::vector<int> out;
    for (int t = 0; t < seq_len; ++t) {
      if (reachable[t]) out.push_back(t + 1);
    }
    return out;
  }
};

inline ReachabilitySet reachability_oracle(const DownsamplerConfig& config,
                                           const ProbeSpec& spec, int n_seeds = 3) {
  config.validate();
  spec.validate();
  const int L = spec.seq_len, d = config.model_dim, delta = config.delta;
  check(L % delta == 0, "reachability_oracle: seq_len must be divisible by delta");
  const int input_len = L + spec.pad_len();  // BOS padding + full target
  const int blocks = input_len / delta;

  std::vector<std::vector<char>> block_sensitive(blocks, std::vector<char>(input_len, 0));
  for (int s = 0; s < n_seeds; ++s) {
    Rng rng = Rng(spec.seed).split(9000 + s);
    ParamStore<double> store;
    init_downsampler(store, config, "ds.", rng);
    const MatD base_emb = rng.normal<double>(input_len, d, 1.0);
    const MatD bump = rng.normal<double>(1, d, 1.0) * 0.5;

    auto run = [&](const MatD& E0) {
      Tape<double> tape;
      TapeParams<double> params(tape, store, /*trainable=*/false);
      Var<double> E = tape.constant(E0);
      return downsample_core(params, config, "ds.", E, input_len).value();
    };
    const MatD base = run(base_emb);
    for (int j = 0; j < input_len; ++j) {
      MatD bumped = base_emb;
      bumped.row(j) += bump;
      const MatD diff = (run(bumped) - base).cwiseAbs();
      for (int b = 0; b < blocks; ++b) {
        if (diff.row(b).maxCoeff() > 1e-6) block_sensitive[b][j] = 1;
      }
    }
  }

  ReachabilitySet set;
  set.seq_len = L;
  set.delta = delta;
  set.pad_len = spec.pad_len();
  set.reachable.assign(L, 0);
  set.contributing.resize(L);
  for (int t = 0; t < L; ++t) {
    // Target t is predicted from the block holding output position t and is
    // carried by input position t + pad_len.
    const int input_pos = t + set.pad_len;
    const int block = t / delta;
    for (int j = 0; j < input_len; ++j) {
      if (block_sensitive[block][j]) set.contributing[t].push_back(j);
    }
    set.reachable[t] = block_sensitive[block][input_pos] != 0;
  }
  return set;
}

}  // namespace charblock
