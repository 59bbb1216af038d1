#include <doctest.h>

#include "charblock/seq2seq/checkpoint.hpp"

using namespace charblock;

namespace {

Checkpoint small_ckpt() {
  Checkpoint ckpt;
  ckpt.config = desk_model(2, Variant::removal, PosKind::sinusoidal,
                           DecoderHead::two_step, 16);
  ckpt.config.dims.layers = 1;
  ckpt.config.dims.heads = 2;
  ckpt.config.dims.ffn_dim = 8;
  ckpt.config.vocab_size = 16;
  Rng rng(3);
  ckpt.params.add("a", rng.normal<float>(3, 4, 1.0));
  ckpt.params.add("b", rng.normal<float>(1, 2, 1.0));
  ckpt.params.slots.at("a").m = rng.normal<float>(3, 4, 0.1);
  ckpt.params.slots.at("a").v = rng.normal<float>(3, 4, 0.1).cwiseAbs();
  ckpt.step = 42;
  ckpt.val_history = {2.5, 1.25, 0.75};
  return ckpt;
}

}  // namespace

TEST_CASE("round trip preserves every array bit-exactly") {
  Checkpoint ckpt = small_ckpt();
  save_checkpoint(ckpt, "/tmp/charblock_ckpt_a.bin");
  Checkpoint loaded = load_checkpoint("/tmp/charblock_ckpt_a.bin");
  CHECK(loaded.step == 42);
  CHECK(loaded.val_history == ckpt.val_history);
  CHECK(loaded.config.decoder.delta == 2);
  for (const auto& [name, slot] : ckpt.params.slots) {
    CHECK((slot.value - loaded.params.at(name)).cwiseAbs().maxCoeff() == 0.0f);
    CHECK((slot.m - loaded.params.slots.at(name).m).cwiseAbs().maxCoeff() == 0.0f);
    CHECK((slot.v - loaded.params.slots.at(name).v).cwiseAbs().maxCoeff() == 0.0f);
  }
}

TEST_CASE("double save produces identical bytes (deterministic format)") {
  Checkpoint ckpt = small_ckpt();
  save_checkpoint(ckpt, "/tmp/charblock_ckpt_b1.bin");
  save_checkpoint(ckpt, "/tmp/charblock_ckpt_b2.bin");
  CHECK(read_file("/tmp/charblock_ckpt_b1.bin") == read_file("/tmp/charblock_ckpt_b2.bin"));
}

TEST_CASE("rejects version and payload corruption") {
  Checkpoint ckpt = small_ckpt();
  const std::string path = "/tmp/charblock_ckpt_c.bin";
  save_checkpoint(ckpt, path);
  std::string content = read_file(path);

  // Truncated payload.
  atomic_write(path, content.substr(0, content.size() - 8));
  CHECK_THROWS(load_checkpoint(path));

  // Unsupported version.
  std::string v2 = content;
  const size_t pos = v2.find("\"version\":1");
  REQUIRE(pos != std::string::npos);
  v2.replace(pos, 11, "\"version\":9");
  atomic_write(path, v2);
  CHECK_THROWS(load_checkpoint(path));

  // Missing manifest newline entirely.
  atomic_write(path, "{\"version\":1}");
  CHECK_THROWS(load_checkpoint(path));
}

TEST_CASE("manifest offsets are consistent with array sizes") {
  Checkpoint ckpt = small_ckpt();
  const std::string path = "/tmp/charblock_ckpt_d.bin";
  save_checkpoint(ckpt, path);
  const std::string content = read_file(path);
  const Json manifest = Json::parse(content.substr(0, content.find('\n')));
  size_t expect_offset = 0;
  for (const auto& entry : manifest.at("arrays")) {
    CHECK(entry.at("offset").get<size_t>() == expect_offset);
    expect_offset += sizeof(float) * entry.at("rows").get<size_t>() *
                     entry.at("cols").get<size_t>();
  }
  CHECK(expect_offset == manifest.at("payload_bytes").get<size_t>());
}
