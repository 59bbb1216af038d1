#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "charblock/cli/run_config.hpp"

using namespace charblock;

TEST_CASE("defaults mirror the paper appendices") {
  RunConfig c = default_run_config();
  // Appendix A probe protocol.
  CHECK(c.probe_hyper.steps == 5000);
  CHECK(c.probe_hyper.batch == 32);
  CHECK(c.probe_hyper.lr == doctest::Approx(1e-4));
  CHECK(c.probe_hyper.eval_batches == 100);
  CHECK(c.probe.probe_vocab == 100);
  CHECK(c.probe.seq_len == 12);
  // Appendix B training defaults.
  CHECK(c.train.optimizer == OptimizerKind::adamw);
  CHECK(c.train.learning_rate == doctest::Approx(2e-4));
  CHECK(c.train.warmup_steps == 4000);
  CHECK(c.train.batch_size == 128);
  CHECK(c.train.label_smoothing == doctest::Approx(0.1));
  CHECK(c.train.patience == 10);
}

TEST_CASE("config JSON round-trips") {
  RunConfig c = default_run_config();
  c.seed = 99;
  c.downsampler = decoder_config(3, Variant::masking, PosKind::sinusoidal, 64);
  c.task.kind = "reverse";
  RunConfig back = run_config_from_json(to_json(c));
  CHECK(back.seed == 99);
  CHECK(back.downsampler.delta == 3);
  CHECK(back.downsampler.variant == Variant::masking);
  CHECK(back.task.kind == "reverse");
  CHECK(to_json(back) == to_json(c));
}

TEST_CASE("unknown keys are rejected at every level") {
  CHECK_THROWS_AS(run_config_from_json(Json{{"sedd", 1}}), std::invalid_argument);
  CHECK_THROWS_AS(run_config_from_json(Json{{"probe", {{"seq_len", 12}, {"oops", 1}}}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_config_from_json(Json{{"train", {{"lr", 0.1}, {"momentum", 0.9}}}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      run_config_from_json(Json{{"model", {{"encoder", {{"delta", 2}, {"width", 3}}}}}}),
      std::invalid_argument);
  CHECK_THROWS_AS(run_config_from_json(Json::parse(R"({"bench": {"warp": 9}})")),
                  std::invalid_argument);
}

TEST_CASE("invalid values are rejected") {
  CHECK_THROWS_AS(run_config_from_json(Json{{"downsampler", {{"delta", 0}}}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_config_from_json(Json{{"train", {{"lr", -1.0}}}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_config_from_json(Json{{"task", {{"kind", "sort"}}}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      run_config_from_json(Json{{"probe", {{"seq_len", 10}, {"delta", 4}}}}),
      std::invalid_argument);
}

TEST_CASE("resolved config emission pairs outputs with a content hash") {
  RunConfig c = default_run_config();
  c.out_dir = "/tmp/charblock_cfg_test";
  std::filesystem::remove_all(c.out_dir);
  const std::string hash = emit_resolved_config(c, {"a.tsv", "b.md"});

  const std::string resolved = read_file(c.out_dir + "/resolved_config.json");
  CHECK(content_hash(resolved) == hash);  // pairing checked by hash
  const Json manifest = Json::parse(read_file(c.out_dir + "/run_manifest.json"));
  CHECK(manifest.at("config_hash").get<std::string>() == hash);
  CHECK(manifest.at("outputs").size() == 2);
  // Resolved config re-parses to the same config.
  RunConfig back = run_config_from_json(Json::parse(resolved));
  CHECK(to_json(back) == to_json(c));
}

TEST_CASE("atomic write leaves no temp files behind") {
  const std::string dir = "/tmp/charblock_atomic_test";
  std::filesystem::remove_all(dir);
  atomic_write(dir + "/x/y.txt", "payload");
  CHECK(read_file(dir + "/x/y.txt") == "payload");
  int files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir + "/x")) {
    (void)entry;
    ++files;
  }
  CHECK(files == 1);
}

#ifdef CHARBLOCK_CLI_PATH
namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CHARBLOCK_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

}  // namespace

TEST_CASE("cli: oracle verb writes reports and validates flags") {
  std::filesystem::remove_all("/tmp/charblock_cli_oracle");
  CHECK(run_cli("oracle --delta 3 --variant non_causal --pos-emb sinusoidal "
                "--out /tmp/charblock_cli_oracle") == 0);
  const std::string tsv = read_file("/tmp/charblock_cli_oracle/oracle.tsv");
  CHECK(tsv.rfind("config\tdelta\tvariant\tpos\treachable\tcontributing_inputs\n", 0) == 0);
  CHECK(read_file("/tmp/charblock_cli_oracle/resolved_config.json").size() > 0);
  // delta=0 must fail with a config error
  CHECK(run_cli("oracle --delta 0 --out /tmp/charblock_cli_oracle") != 0);
}

TEST_CASE("cli: evaluate verb computes BLEU on files") {
  const std::string dir = "/tmp/charblock_cli_eval";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  atomic_write(dir + "/hyp.txt", "a b c\nx y\n");
  atomic_write(dir + "/ref.txt", "a b c\nx y\n");
  const std::string cfg = Json{{"paths", {{"hyp", dir + "/hyp.txt"}, {"ref", dir + "/ref.txt"}}},
                               {"out", dir}}
                              .dump();
  atomic_write(dir + "/cfg.json", cfg);
  CHECK(run_cli("evaluate --config " + dir + "/cfg.json") == 0);
  const Json eval = Json::parse(read_file(dir + "/eval.json"));
  CHECK(eval.at("bleu").at("value").get<double>() == doctest::Approx(100.0));
  CHECK(eval.at("sequence_accuracy").at("value").get<double>() == doctest::Approx(1.0));
}

TEST_CASE("cli: unknown config keys exit nonzero") {
  const std::string dir = "/tmp/charblock_cli_bad";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  atomic_write(dir + "/bad.json", R"({"trian": {}})");
  CHECK(run_cli("oracle --config " + dir + "/bad.json --out " + dir) != 0);
}
#endif
