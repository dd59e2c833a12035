#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "cli/commands.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "rfvqa/error.hpp"

namespace rfvqa::cli {
namespace {

std::string config_error(const ojson& doc) {
  try {
    config_from_json(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(CliConfig, DefaultsRoundTrip) {
  const RunConfig d;
  const auto j = config_to_json(d);
  EXPECT_EQ(config_to_json(config_from_json(j)), j);
  EXPECT_EQ(j["stft"]["K"], 512);
  EXPECT_EQ(j["stft"]["H"], 256);
  EXPECT_EQ(j["segmentation"]["p_min"], 20);
  EXPECT_EQ(j["segmentation"]["p_max"], 25);
  EXPECT_EQ(j["dataset"]["n_way"], 10);
  EXPECT_EQ(j["dataset"]["records"], 1000);
}

TEST(CliConfig, ErrorsNameTheKey) {
  EXPECT_NE(config_error({{"dataset", {{"n_wya", 3}}}}).find("dataset.n_wya"), std::string::npos);
  EXPECT_NE(config_error({{"stft", {{"K", "big"}}}}).find("stft.K"), std::string::npos);
  EXPECT_NE(config_error({{"bogus", 1}}).find("bogus"), std::string::npos);
  EXPECT_NE(config_error({{"dataset", {{"modes", {"spec", "hologram"}}}}}).find("dataset.modes"), std::string::npos);
  EXPECT_NE(config_error({{"dataset", {{"snr_grid", {"loud"}}}}}).find("dataset.snr_grid"), std::string::npos);
  EXPECT_NE(config_error({{"dataset", {{"classes", {"qpsk", "nope"}}}}}).find("dataset.classes"), std::string::npos);
  EXPECT_NE(config_error({{"stft", {{"K", 0}}}}).find("stft"), std::string::npos);
  EXPECT_NE(config_error({{"segmentation", {{"p_min", 30}}}}).find("segmentation"), std::string::npos);
}

TEST(CliConfig, Precedence) {
  oracle::TempDir dir;
  const auto file = dir.path() / "c.json";
  std::ofstream(file) << R"({
    // comments allowed
    "master_seed": 5, "output_dir": "from-file",
    "dataset": {"n_way": 4, "shots": 1},
    "stft": {"K": 64, "H": 32}
  })";
  Overrides ov;
  ov.file = file;
  EXPECT_EQ(resolve_config(ov).dataset.n_way, 4);
  EXPECT_EQ(resolve_config(ov).master_seed, 5u);
  EXPECT_EQ(resolve_config(ov).dataset.master_seed, 5u);
  ov.sets = {"dataset.n_way=6", "master_seed=9", "dataset.n_way=7", "inference.model=vlm-x"};
  auto cfg = resolve_config(ov);
  EXPECT_EQ(cfg.dataset.n_way, 7);     // later --set wins
  EXPECT_EQ(cfg.dataset.shots, 1);     // file survives
  EXPECT_EQ(cfg.pipeline.stft.fft_size, 64u);
  EXPECT_EQ(cfg.master_seed, 9u);
  EXPECT_EQ(cfg.inference.model, "vlm-x");  // bare string value
  ov.seed = 11;
  ov.output_dir = dir.path() / "flag";
  cfg = resolve_config(ov);
  EXPECT_EQ(cfg.master_seed, 11u);  // flag beats --set
  EXPECT_EQ(cfg.output_dir, dir.path() / "flag");
  ov.sets = {"dataset.nway=3"};
  EXPECT_THROW(resolve_config(ov), ConfigError);
  ov.sets = {"no-equals-sign"};
  EXPECT_THROW(resolve_config(ov), ConfigError);
  ov.file = dir.path() / "absent.json";
  EXPECT_THROW(resolve_config(ov), MissingArtifact);
}

TEST(CliConfig, HashIgnoresOutputLocation) {
  RunConfig a, b;
  b.output_dir = "elsewhere";
  b.workers = 3;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.dataset.n_way = 5;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(CliClasses, Listing) {
  std::ostringstream os;
  cmd_classes(os);
  std::istringstream is(os.str());
  std::string line;
  std::map<std::string, int> family;
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    const auto a = line.find('\t'), b = line.find('\t', a + 1);
    ASSERT_NE(b, std::string::npos) << line;
    ++family[line.substr(a + 1, b - a - 1)];
  }
  EXPECT_EQ(rows, 57);
  EXPECT_EQ(family["ASK"], 5);
  EXPECT_EQ(family["OFDM"], 12);
}

RunConfig small_config(const std::filesystem::path& out) {
  RunConfig c;
  c.output_dir = out;
  c.pipeline.stft = {64, 32};
  c.pipeline.synthesis.num_samples = 8192;
  c.dataset.seeds_per_class = 2;
  c.dataset.modes = {ImageMode::Joint};
  c.master_seed = 1;
  c.dataset.master_seed = 1;
  c.workers = 1;
  return c;
}

TEST(CliPipeline, GenIsIdempotentAndBuildWrites1000) {
  oracle::TempDir dir;
  const auto cfg = small_config(dir.path() / "run");
  std::ostringstream log1, log2;
  const auto s1 = cmd_gen(cfg, log1);
  EXPECT_EQ(s1.assets, 114u);  // one train and one eval seed per class
  EXPECT_FALSE(s1.up_to_date);
  const Layout l{cfg.output_dir};
  const auto manifest = oracle::slurp(l.manifest());
  const auto mtime = std::filesystem::last_write_time(l.root / read_manifest_csv(l.manifest()).rows[0].path);
  const auto s2 = cmd_gen(cfg, log2);
  EXPECT_TRUE(s2.up_to_date);
  EXPECT_NE(log2.str().find("up to date"), std::string::npos);
  EXPECT_EQ(oracle::slurp(l.manifest()), manifest);
  EXPECT_EQ(std::filesystem::last_write_time(l.root / read_manifest_csv(l.manifest()).rows[0].path), mtime);
  EXPECT_EQ(s1.config_hash, s2.config_hash);

  // A damaged asset is detected and the set is regenerated.
  const auto victim = l.root / read_manifest_csv(l.manifest()).rows[3].path;
  std::ofstream(victim, std::ios::trunc) << "x";
  std::ostringstream log3;
  EXPECT_FALSE(cmd_gen(cfg, log3).up_to_date);
  EXPECT_EQ(oracle::slurp(l.manifest()), manifest);

  std::ostringstream blog;
  const auto b = cmd_build(cfg, blog);
  EXPECT_EQ(b.episodes, 1000u);
  EXPECT_EQ(b.config_hash, s1.config_hash);
  const auto text = oracle::slurp(l.episodes());
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1000);
  for (const auto& r : read_jsonl(l.episodes())) {
    ASSERT_EQ(r.mode, ImageMode::Joint);
    ASSERT_EQ(r.n_way, 10);
    ASSERT_TRUE(std::filesystem::exists(l.root / r.query_image));
  }
  for (const char* cmd : {"gen", "build"}) {
    EXPECT_TRUE(std::filesystem::exists(l.summary(cmd))) << cmd;
  }
  EXPECT_TRUE(std::filesystem::exists(l.resolved_config()));
  EXPECT_EQ(config_hash(config_from_json(ojson::parse(oracle::slurp(l.resolved_config())))), s1.config_hash);
}

TEST(CliPipeline, MissingUpstreamNamesPath) {
  oracle::TempDir dir;
  const auto cfg = small_config(dir.path() / "empty");
  std::ostringstream log;
  try {
    cmd_build(cfg, log);
    FAIL();
  } catch (const MissingArtifact& e) {
    EXPECT_NE(std::string(e.what()).find("manifest.csv"), std::string::npos);
  }
  EXPECT_THROW(cmd_score(cfg, log), MissingArtifact);
  EXPECT_THROW(cmd_sweep(cfg, SweepFacet::Snr, {}, log), MissingArtifact);
}

TEST(CliPipeline, SnrSweepNineRows) {
  oracle::TempDir dir;
  auto cfg = small_config(dir.path() / "snr");
  cfg.dataset.classes = {"tone", "fm", "bpsk"};
  cfg.dataset.n_way = 3;
  cfg.dataset.modes = {ImageMode::Spec, ImageMode::IQ};
  cfg.dataset.records_per_mode = 45;
  cfg.dataset.snr_grid.clear();
  for (int s = 10; s <= 50; s += 5) cfg.dataset.snr_grid.push_back(double(s));
  std::ostringstream log;
  cmd_gen(cfg, log);
  cmd_build(cfg, log);
  const Layout l{cfg.output_dir};
  std::vector<ResponseRecord> rs;
  for (const auto& r : read_jsonl(l.episodes())) rs.push_back(fixture::answer(r.id, r.gold));
  write_responses(rs, l.responses());
  std::ostringstream out;
  const auto sc = cmd_score(cfg, out);
  EXPECT_EQ(sc.responses, 90u);
  EXPECT_TRUE(std::filesystem::exists(l.reports() / "report.json"));
  std::ostringstream table;
  cmd_sweep(cfg, SweepFacet::Snr, {}, table);
  const auto csv = oracle::slurp(l.reports() / "sweep_snr.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 2 * 9);
  std::size_t spec_rows = 0;
  for (std::size_t p = csv.find(",spec,"); p != std::string::npos; p = csv.find(",spec,", p + 1)) ++spec_rows;
  EXPECT_EQ(spec_rows, 9u);

  // Separately scored reports as sweep inputs.
  const auto rep = l.reports() / "report.json";
  std::ostringstream t2;
  cmd_sweep(cfg, SweepFacet::Oov, {parse_report_arg("0=" + rep.string()), parse_report_arg("4=" + rep.string())}, t2);
  const auto oov = oracle::slurp(l.reports() / "sweep_oov.csv");
  EXPECT_EQ(std::count(oov.begin(), oov.end(), '\n'), 1 + 2 * 2);
  EXPECT_THROW(parse_report_arg("nolabel"), ConfigError);
}

#ifdef RFVQA_CLI_BIN
int run(const std::string& args) {
  const int rc = std::system((std::string(RFVQA_CLI_BIN) + " " + args + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(rc);
}

TEST(CliBinary, ExitCodes) {
  oracle::TempDir dir;
  const auto out = (dir.path() / "x").string();
  EXPECT_EQ(run("classes"), 0);
  EXPECT_EQ(run("-o " + out + " --set dataset.bogus=1 build"), 2);
  EXPECT_EQ(run("--frobnicate classes"), 2);
  EXPECT_EQ(run("-o " + out + " build"), 3);
  EXPECT_EQ(run("-o " + out + " sweep --facet color"), 2);
  std::filesystem::create_directories(dir.path() / "x");
  std::ofstream(dir.path() / "x" / "episodes.jsonl") << "";
  EXPECT_EQ(run("-o " + out + " --set inference.endpoint=http://127.0.0.1:9/v1/chat/completions infer"), 0);  // nothing to do
}
#endif

}  // namespace
}  // namespace rfvqa::cli
