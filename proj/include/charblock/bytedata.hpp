#pragma once

// Byte-level tokenization and data plumbing: probe sequences for the leak
// test, synthetic copy/reverse corpora, parallel-corpus ingestion, batching.

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace charblock {

// Fixed special-id layout. Raw bytes occupy ids [3, 259).
constexpr int kPadId = 0;
constexpr int kBosId = 1;
constexpr int kEosId = 2;
constexpr int kByteOffset = 3;
constexpr int kByteVocabSize = 259;

struct ByteSequence {
  std::vector<int> ids;

  bool operator==(const ByteSequence&) const = default;
  int size() const { return static_cast<int>(ids.size()); }
};

// UTF-8 string -> byte ids (+3 offset). Rejects invalid UTF-8. EOS is not
// appended; callers that need a terminator add it themselves.
ByteSequence byte_encode(const std::string& text);

// Inverse of byte_encode: drops specials, stops at the first EOS.
std::string byte_decode(const ByteSequence& seq);

// True iff `text` is well-formed UTF-8.
bool is_valid_utf8(const std::string& text);

// Number of Unicode code points; requires valid UTF-8.
int count_codepoints(const std::string& text);

struct ProbeSpec {
  int seq_len = 12;
  int probe_vocab = 100;
  int delta = 2;
  int pad_multiplier = 1;  // BOS padding = pad_multiplier * delta
  std::uint64_t seed = 0;

  int pad_len() const { return pad_multiplier * delta; }
  void validate() const;
};

// Random target over the probe vocabulary (ids [3, 3+probe_vocab)) plus the
// BOS-padded input that conditions it:
//   input = BOS x pad_len ++ target       (length seq_len + pad_len)
// so input[pad_len + t] == target[t] for every t. Predictions for target t
// are read from model output position t.
std::pair<ByteSequence, ByteSequence> make_probe_pair(const ProbeSpec& spec,
                                                      std::mt19937_64& rng);
std::pair<ByteSequence, ByteSequence> make_probe_pair(const ProbeSpec& spec);

struct ParallelPair {
  ByteSequence src;
  ByteSequence tgt;
};

enum class ToyTask { copy, reverse };

// Synthetic parallel data. Token ids are drawn uniformly from [3, 3+vocab);
// both sides end with EOS. Deterministic under seed.
std::vector<ParallelPair> gen_toy_pairs(ToyTask task, int count, int len_min,
                                        int len_max, int vocab,
                                        std::uint64_t seed);

// One sentence per line, parallel by line number. Pairs whose source exceeds
// max_src_chars code points are dropped; order preserved. Throws on
// unreadable files or line-count mismatch.
std::vector<ParallelPair> load_parallel_corpus(const std::string& src_path,
                                               const std::string& tgt_path,
                                               int max_src_chars = 256);

struct Batch {
  // Row-major [batch][position]; PAD-padded to a common length that is a
  // multiple of the requested delta.
  std::vector<std::vector<int>> src;
  std::vector<std::vector<int>> tgt;
  std::vector<std::vector<bool>> src_pad_mask;  // true at PAD
  std::vector<std::vector<bool>> tgt_pad_mask;

  int size() const { return static_cast<int>(src.size()); }
  int src_len() const { return src.empty() ? 0 : static_cast<int>(src[0].size()); }
  int tgt_len() const { return tgt.empty() ? 0 : static_cast<int>(tgt[0].size()); }
};

// Consecutive batches of up to batch_size pairs. Source sides are padded to
// the batch max then up to a multiple of delta_src, targets likewise with
// delta_tgt.
std::vector<Batch> batch_pad(const std::vector<ParallelPair>& pairs,
                             int batch_size, int delta_src, int delta_tgt);
std::vector<Batch> batch_pad(const std::vector<ParallelPair>& pairs,
                             int batch_size, int delta);

}  // namespace charblock
