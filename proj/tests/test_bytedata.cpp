#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "charblock/bytedata.hpp"

using namespace charblock;

TEST_CASE("byte_encode maps raw bytes with +3 offset") {
  CHECK(byte_encode("ab").ids == std::vector<int>{100, 101});
  CHECK(byte_encode("").ids.empty());
  CHECK(byte_encode("\xc3\xa9").ids == std::vector<int>{198, 172});  // e-acute
}

TEST_CASE("byte_encode rejects invalid UTF-8") {
  CHECK_THROWS_AS(byte_encode("\xff"), std::invalid_argument);
  CHECK_THROWS_AS(byte_encode("\xc3"), std::invalid_argument);       // truncated
  CHECK_THROWS_AS(byte_encode("\xed\xa0\x80"), std::invalid_argument);  // surrogate
  CHECK_THROWS_AS(byte_encode("\xc0\xaf"), std::invalid_argument);   // overlong
}

TEST_CASE("decode(encode(text)) round-trips random UTF-8 strings") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::string s;
    const int n = static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) {
      // Mix ASCII with multi-byte code points.
      const int kind = static_cast<int>(rng() % 3);
      char32_t cp;
      if (kind == 0) {
        cp = 1 + rng() % 0x7F;
      } else if (kind == 1) {
        cp = 0x80 + rng() % (0x800 - 0x80);
      } else {
        cp = 0x800 + rng() % (0xD800 - 0x800);
      }
      if (cp < 0x80) {
        s.push_back(static_cast<char>(cp));
      } else if (cp < 0x800) {
        s.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        s.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
      } else {
        s.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        s.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        s.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
      }
    }
    CHECK(byte_decode(byte_encode(s)) == s);
  }
}

TEST_CASE("probe pairs shift the target by the BOS padding") {
  ProbeSpec spec;
  spec.seq_len = 12;
  spec.delta = 3;
  spec.pad_multiplier = 1;
  spec.seed = 42;
  auto [input, target] = make_probe_pair(spec);
  REQUIRE(input.size() == 15);  // BOS x3 ++ full target
  REQUIRE(target.size() == 12);
  for (int i = 0; i < 3; ++i) CHECK(input.ids[i] == kBosId);
  for (int i = 0; i < 12; ++i) CHECK(input.ids[i + 3] == target.ids[i]);
  for (int id : target.ids) {
    CHECK(id >= kByteOffset);
    CHECK(id < kByteOffset + 100);
  }
}

TEST_CASE("probe pair with pad_multiplier=2 starts with 2*delta BOS") {
  ProbeSpec spec;
  spec.seq_len = 12;
  spec.delta = 2;
  spec.pad_multiplier = 2;
  auto [input, target] = make_probe_pair(spec);
  REQUIRE(input.size() == 16);
  for (int i = 0; i < 4; ++i) CHECK(input.ids[i] == kBosId);
  CHECK(input.ids[4] == target.ids[0]);
}

TEST_CASE("probe pairs are deterministic under the seed") {
  ProbeSpec spec;
  spec.delta = 4;
  spec.seed = 9;
  auto a = make_probe_pair(spec);
  auto b = make_probe_pair(spec);
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
}

TEST_CASE("probe spec invariants are enforced") {
  ProbeSpec spec;
  spec.seq_len = 10;
  spec.delta = 4;  // not divisible
  CHECK_THROWS_AS(make_probe_pair(spec), std::invalid_argument);
  spec.seq_len = 8;
  spec.pad_multiplier = 2;
  spec.delta = 4;  // pad 8 == seq_len
  CHECK_THROWS_AS(make_probe_pair(spec), std::invalid_argument);
}

TEST_CASE("toy pairs: copy and reverse") {
  auto copy = gen_toy_pairs(ToyTask::copy, 50, 3, 8, 20, 1);
  REQUIRE(copy.size() == 50);
  for (const auto& p : copy) {
    CHECK(p.src.ids == p.tgt.ids);
    CHECK(p.src.ids.back() == kEosId);
    const int len = p.src.size() - 1;
    CHECK(len >= 3);
    CHECK(len <= 8);
    for (int i = 0; i < len; ++i) CHECK(p.src.ids[i] != kPadId);
  }
  auto rev = gen_toy_pairs(ToyTask::reverse, 20, 3, 3, 20, 1);
  for (const auto& p : rev) {
    std::vector<int> r(p.src.ids.begin(), p.src.ids.end() - 1);
    std::reverse(r.begin(), r.end());
    r.push_back(kEosId);
    CHECK(p.tgt.ids == r);
  }
  CHECK(gen_toy_pairs(ToyTask::copy, 5, 2, 4, 10, 3)[1].src.ids ==
        gen_toy_pairs(ToyTask::copy, 5, 2, 4, 10, 3)[1].src.ids);
}

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const std::string path = std::string("/tmp/charblock_test_") + name;
  std::ofstream f(path, std::ios::trunc);
  f << content;
  return path;
}

}  // namespace

TEST_CASE("corpus loading drops over-long sources and keeps order") {
  const std::string long_line(300, 'x');
  auto src = write_temp("src.txt", "short one\n" + long_line + "\nthird line\n");
  auto tgt = write_temp("tgt.txt", "a\nb\nc\n");
  auto pairs = load_parallel_corpus(src, tgt, 256);
  REQUIRE(pairs.size() == 2);
  CHECK(byte_decode(pairs[0].src) == "short one");
  CHECK(byte_decode(pairs[1].tgt) == "c");
  CHECK(pairs[0].src.ids.back() == kEosId);
}

TEST_CASE("corpus loading counts code points, not bytes") {
  // 200 two-byte code points = 400 bytes but only 200 chars: kept.
  std::string s;
  for (int i = 0; i < 200; ++i) s += "\xc3\xa9";
  auto src = write_temp("src2.txt", s + "\n");
  auto tgt = write_temp("tgt2.txt", "y\n");
  CHECK(load_parallel_corpus(src, tgt, 256).size() == 1);
  CHECK(load_parallel_corpus(src, tgt, 199).empty());
}

TEST_CASE("corpus loading errors") {
  auto src = write_temp("src3.txt", "a\nb\n");
  auto tgt = write_temp("tgt3.txt", "a\n");
  CHECK_THROWS_AS(load_parallel_corpus(src, tgt), std::runtime_error);
  CHECK_THROWS_AS(load_parallel_corpus("/nonexistent/file", tgt), std::runtime_error);
  auto empty1 = write_temp("e1.txt", "");
  auto empty2 = write_temp("e2.txt", "");
  CHECK(load_parallel_corpus(empty1, empty2).empty());
}

TEST_CASE("batch padding rounds up to a delta multiple") {
  std::vector<ParallelPair> pairs(2);
  pairs[0].src.ids = {5, 6, 7, 8, kEosId};           // len 5
  pairs[0].tgt.ids = {5, kEosId};
  pairs[1].src.ids = {5, 6, 7, 8, 9, 10, kEosId};    // len 7
  pairs[1].tgt.ids = {6, kEosId};
  auto batches = batch_pad(pairs, 4, 4);
  REQUIRE(batches.size() == 1);
  CHECK(batches[0].src_len() == 8);
  CHECK(batches[0].src[0][4] == kEosId);
  CHECK(batches[0].src[0][5] == kPadId);
  CHECK(batches[0].src_pad_mask[0][4] == false);
  CHECK(batches[0].src_pad_mask[0][5] == true);
  CHECK(batches[0].src_pad_mask[1][6] == false);
  CHECK(batches[0].src_pad_mask[1][7] == true);
}

TEST_CASE("batch padding: single pair and delta=1") {
  std::vector<ParallelPair> pairs(1);
  pairs[0].src.ids = {5, 6, 7, kEosId};
  pairs[0].tgt.ids = {5, 6, 7, kEosId};
  auto b3 = batch_pad(pairs, 8, 3);
  CHECK(b3[0].size() == 1);
  CHECK(b3[0].src_len() == 6);  // ceil(4/3)*3
  auto b1 = batch_pad(pairs, 8, 1);
  CHECK(b1[0].src_len() == 4);  // batch max only
}

TEST_CASE("batch padding never alters non-PAD ids and masks exactly PAD") {
  auto pairs = gen_toy_pairs(ToyTask::copy, 23, 2, 9, 30, 5);
  for (const auto& batch : batch_pad(pairs, 8, 2, 3)) {
    for (int i = 0; i < batch.size(); ++i) {
      for (size_t j = 0; j < batch.src[i].size(); ++j) {
        CHECK(batch.src_pad_mask[i][j] == (batch.src[i][j] == kPadId));
      }
      for (size_t j = 0; j < batch.tgt[i].size(); ++j) {
        CHECK(batch.tgt_pad_mask[i][j] == (batch.tgt[i][j] == kPadId));
      }
      CHECK(batch.src_len() % 2 == 0);
      CHECK(batch.tgt_len() % 3 == 0);
    }
  }
}
