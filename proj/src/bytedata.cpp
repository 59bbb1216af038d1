#include "charblock/bytedata.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace charblock {

namespace {

// Returns the length of the UTF-8 sequence starting at s[i], or 0 if malformed.
int utf8_seq_len(const std::string& s, size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  int len = 0;
  if (b0 < 0x80) {
    return 1;
  } else if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    if (b0 < 0xC2) return 0;  // overlong
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    if (b0 > 0xF4) return 0;  // beyond U+10FFFF
  } else {
    return 0;
  }
  if (i + len > s.size()) return 0;
  for (int k = 1; k < len; ++k) {
    if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return 0;
  }
  // Reject overlong 3-byte forms and surrogates.
  if (len == 3) {
    const auto b1 = static_cast<unsigned char>(s[i + 1]);
    if (b0 == 0xE0 && b1 < 0xA0) return 0;
    if (b0 == 0xED && b1 >= 0xA0) return 0;
  }
  if (len == 4) {
    const auto b1 = static_cast<unsigned char>(s[i + 1]);
    if (b0 == 0xF0 && b1 < 0x90) return 0;
    if (b0 == 0xF4 && b1 >= 0x90) return 0;
  }
  return len;
}

}  // namespace

bool is_valid_utf8(const std::string& text) {
  size_t i = 0;
  while (i < text.size()) {
    const int len = utf8_seq_len(text, i);
    if (len == 0) return false;
    i += len;
  }
  return true;
}

int count_codepoints(const std::string& text) {
  size_t i = 0;
  int n = 0;
  while (i < text.size()) {
    const int len = utf8_seq_len(text, i);
    if (len == 0) throw std::invalid_argument("count_codepoints: invalid UTF-8");
    i += len;
    ++n;
  }
  return n;
}

ByteSequence byte_encode(const std::string& text) {
  if (!is_valid_utf8(text)) {
    throw std::invalid_argument("byte_encode: input is not valid UTF-8");
  }
  ByteSequence seq;
  seq.ids.reserve(text.size());
  for (const char c : text) {
    seq.ids.push_back(static_cast<int>(static_cast<unsigned char>(c)) + kByteOffset);
  }
  return seq;
}

std::string byte_decode(const ByteSequence& seq) {
  std::string out;
  out.reserve(seq.ids.size());
  for (const int id : seq.ids) {
    if (id == kEosId) break;
    if (id < kByteOffset || id >= kByteVocabSize) continue;  // skip specials
    out.push_back(static_cast<char>(static_cast<unsigned char>(id - kByteOffset)));
  }
  return out;
}

void ProbeSpec::validate() const {
  if (delta < 1) throw std::invalid_argument("ProbeSpec: delta must be >= 1");
  if (seq_len < 1 || seq_len % delta != 0) {
    throw std::invalid_argument("ProbeSpec: seq_len must be a positive multiple of delta");
  }
  if (pad_multiplier != 1 && pad_multiplier != 2) {
    throw std::invalid_argument("ProbeSpec: pad_multiplier must be 1 or 2");
  }
  if (pad_len() >= seq_len) {
    throw std::invalid_argument("ProbeSpec: pad_multiplier*delta must be < seq_len");
  }
  if (probe_vocab < 2 || probe_vocab > kByteVocabSize - kByteOffset) {
    throw std::invalid_argument("ProbeSpec: probe_vocab out of range");
  }
}

std::pair<ByteSequence, ByteSequence> make_probe_pair(const ProbeSpec& spec,
                                                      std::mt19937_64& rng) {
  spec.validate();
  std::uniform_int_distribution<int> dist(kByteOffset, kByteOffset + spec.probe_vocab - 1);
  ByteSequence target;
  target.ids.resize(spec.seq_len);
  for (int& id : target.ids) id = dist(rng);

  // The input carries the whole target after the BOS padding; position t+pad
  // holds target t. Trailing model outputs past seq_len are unused.
  ByteSequence input;
  input.ids.assign(spec.pad_len(), kBosId);
  input.ids.insert(input.ids.end(), target.ids.begin(), target.ids.end());
  return {std::move(input), std::move(target)};
}

std::pair<ByteSequence, ByteSequence> make_probe_pair(const ProbeSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  return make_probe_pair(spec, rng);
}

std::vector<ParallelPair> gen_toy_pairs(ToyTask task, int count, int len_min,
                                        int len_max, int vocab,
                                        std::uint64_t seed) {
  if (count < 0) throw std::invalid_argument("gen_toy_pairs: negative count");
  if (len_min < 1 || len_max < len_min) {
    throw std::invalid_argument("gen_toy_pairs: bad length range");
  }
  if (vocab < 1 || vocab > kByteVocabSize - kByteOffset) {
    throw std::invalid_argument("gen_toy_pairs: vocab out of range");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> len_dist(len_min, len_max);
  std::uniform_int_distribution<int> id_dist(kByteOffset, kByteOffset + vocab - 1);

  std::vector<ParallelPair> pairs;
  pairs.reserve(count);
  for (int i = 0; i < count; ++i) {
    const int len = len_dist(rng);
    ParallelPair p;
    p.src.ids.resize(len);
    for (int& id : p.src.ids) id = id_dist(rng);
    p.tgt.ids = p.src.ids;
    if (task == ToyTask::reverse) {
      std::reverse(p.tgt.ids.begin(), p.tgt.ids.end());
    }
    p.src.ids.push_back(kEosId);
    p.tgt.ids.push_back(kEosId);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<ParallelPair> load_parallel_corpus(const std::string& src_path,
                                               const std::string& tgt_path,
                                               int max_src_chars) {
  std::ifstream src_file(src_path), tgt_file(tgt_path);
  if (!src_file) throw std::runtime_error("cannot open " + src_path);
  if (!tgt_file) throw std::runtime_error("cannot open " + tgt_path);

  std::vector<ParallelPair> pairs;
  std::string src_line, tgt_line;
  while (true) {
    const bool got_src = static_cast<bool>(std::getline(src_file, src_line));
    const bool got_tgt = static_cast<bool>(std::getline(tgt_file, tgt_line));
    if (got_src != got_tgt) {
      throw std::runtime_error("parallel corpus line counts differ: " + src_path +
                               " vs " + tgt_path);
    }
    if (!got_src) break;
    if (!src_line.empty() && src_line.back() == '\r') src_line.pop_back();
    if (!tgt_line.empty() && tgt_line.back() == '\r') tgt_line.pop_back();
    if (count_codepoints(src_line) > max_src_chars) continue;
    ParallelPair p;
    p.src = byte_encode(src_line);
    p.tgt = byte_encode(tgt_line);
    p.src.ids.push_back(kEosId);
    p.tgt.ids.push_back(kEosId);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

namespace {

int padded_len(int max_len, int delta) {
  return ((max_len + delta - 1) / delta) * delta;
}

void pad_side(const std::vector<const ByteSequence*>& seqs, int delta,
              std::vector<std::vector<int>>& out,
              std::vector<std::vector<bool>>& mask) {
  int max_len = 0;
  for (const auto* s : seqs) max_len = std::max(max_len, s->size());
  const int len = padded_len(max_len, delta);
  for (const auto* s : seqs) {
    std::vector<int> row(len, kPadId);
    std::copy(s->ids.begin(), s->ids.end(), row.begin());
    std::vector<bool> m(len, false);
    for (int i = s->size(); i < len; ++i) m[i] = true;
    out.push_back(std::move(row));
    mask.push_back(std::move(m));
  }
}

}  // namespace

std::vector<Batch> batch_pad(const std::vector<ParallelPair>& pairs,
                             int batch_size, int delta_src, int delta_tgt) {
  if (batch_size < 1) throw std::invalid_argument("batch_pad: batch_size must be >= 1");
  if (delta_src < 1 || delta_tgt < 1) {
    throw std::invalid_argument("batch_pad: delta must be >= 1");
  }
  std::vector<Batch> batches;
  for (size_t start = 0; start < pairs.size(); start += batch_size) {
    const size_t end = std::min(pairs.size(), start + batch_size);
    std::vector<const ByteSequence*> srcs, tgts;
    for (size_t i = start; i < end; ++i) {
      srcs.push_back(&pairs[i].src);
      tgts.push_back(&pairs[i].tgt);
    }
    Batch b;
    pad_side(srcs, delta_src, b.src, b.src_pad_mask);
    pad_side(tgts, delta_tgt, b.tgt, b.tgt_pad_mask);
    batches.push_back(std::move(b));
  }
  return batches;
}

std::vector<Batch> batch_pad(const std::vector<ParallelPair>& pairs,
                             int batch_size, int delta) {
  return batch_pad(pairs, batch_size, delta, delta);
}

}  // namespace charblock
