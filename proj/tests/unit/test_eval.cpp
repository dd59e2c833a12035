#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "rfvqa/error.hpp"
#include "rfvqa/eval.hpp"

namespace rfvqa {
namespace {

using fixture::answer;
using fixture::failure;
using fixture::record;

const std::vector<std::string> kCands{"fm", "qpsk", "8psk", "128psk", "am-dsb", "am-dsb-sc", "2fsk"};

TEST(ParsePrediction, ClassificationExamples) {
  EXPECT_EQ(parse_prediction(" FM.\n", kCands, false), "fm");
  EXPECT_EQ(parse_prediction("'qpsk'", kCands, false), "qpsk");
  EXPECT_EQ(parse_prediction("\"AM-DSB-SC\"!", kCands, false), "am-dsb-sc");
  EXPECT_EQ(parse_prediction("i am not sure", kCands, false), std::nullopt);
  EXPECT_EQ(parse_prediction("it is fm", kCands, false), std::nullopt);  // exact only
  EXPECT_EQ(parse_prediction("", kCands, false), std::nullopt);
}

TEST(ParsePrediction, RationaleExamples) {
  EXPECT_EQ(parse_prediction("the most likely class from the given list is 'fm'", kCands, true), "fm");
  EXPECT_EQ(parse_prediction("It could be qpsk or 8psk; the stable line suggests FM.", kCands, true), "fm");
  EXPECT_EQ(parse_prediction("i am not sure", kCands, true), std::nullopt);
  // token boundaries
  EXPECT_EQ(parse_prediction("looks like 128psk", kCands, true), "128psk");
  EXPECT_EQ(parse_prediction("class: am-dsb-sc", kCands, true), "am-dsb-sc");
  EXPECT_EQ(parse_prediction("the 2fskx family", kCands, true), std::nullopt);
}

TEST(ParsePrediction, Idempotent) {
  for (const auto& cls : list_classes()) {
    const std::vector<std::string> cands{cls.canonical_name, "tone"};
    for (bool rationale : {false, true}) {
      const auto once = parse_prediction(cls.canonical_name, cands, rationale);
      ASSERT_EQ(once, cls.canonical_name);
      EXPECT_EQ(parse_prediction(*once, cands, rationale), once);
    }
  }
}

std::vector<std::string> ten_way_with(const std::string& gold) {
  std::vector<std::string> out{gold};
  for (const auto& c : list_classes()) {
    if (out.size() == 10) break;
    if (c.canonical_name != gold) out.push_back(c.canonical_name);
  }
  return out;
}

// Any candidate other than the gold.
std::string wrong(const VqaRecord& r) { return r.candidates[0] == r.gold ? r.candidates[1] : r.candidates[0]; }

TEST(Score, NineOfTen) {
  std::vector<VqaRecord> data;
  std::vector<ResponseRecord> resp;
  for (int i = 0; i < 10; ++i) {
    data.push_back(record("r" + std::to_string(i), "qpsk", ten_way_with("qpsk")));
    resp.push_back(answer(data.back().id, i == 3 ? wrong(data.back()) : "qpsk"));
  }
  const auto rep = score(data, resp, "m");
  EXPECT_EQ(rep.overall, (Tally{9, 10}));
  EXPECT_DOUBLE_EQ(rep.overall.accuracy() * 100.0, 90.0);
  EXPECT_EQ(rep.invalid, 0u);
  EXPECT_EQ(rep.model, "m");
  EXPECT_EQ(rep.system_prompt_sha256.size(), 64u);
}

TEST(Score, AllInvalid) {
  std::vector<VqaRecord> data;
  std::vector<ResponseRecord> resp;
  for (int i = 0; i < 8; ++i) {
    data.push_back(record("r" + std::to_string(i), "fm", ten_way_with("fm")));
    resp.push_back(answer(data.back().id, "i am not sure"));
  }
  const auto rep = score(data, resp);
  EXPECT_EQ(rep.overall, (Tally{0, 8}));
  EXPECT_EQ(rep.invalid, 8u);
  EXPECT_DOUBLE_EQ(rep.invalid_rate(), 1.0);
  EXPECT_DOUBLE_EQ(rep.failed_rate(), 0.0);
}

TEST(Score, FailedAndMissingAreSeparate) {
  std::vector<VqaRecord> data;
  for (int i = 0; i < 4; ++i) data.push_back(record("r" + std::to_string(i), "fm", ten_way_with("fm")));
  std::vector<ResponseRecord> resp{answer("r0", "fm"), answer("r1", "??"), failure("r2")};
  const auto rep = score(data, resp);
  EXPECT_EQ(rep.overall, (Tally{1, 4}));
  EXPECT_EQ(rep.invalid, 1u);
  EXPECT_EQ(rep.failed, 1u);
  EXPECT_EQ(rep.missing, 1u);
  EXPECT_EQ(rep.family_confusion.at({Family::FM, std::nullopt}), 3u);
}

TEST(Score, RationaleTemplateUsesContainment) {
  auto r = build_explanation_variant(record("x", "fm", ten_way_with("fm")));
  const std::vector<VqaRecord> data{r};
  const std::vector<ResponseRecord> resp{answer("x", "Looking at the sweep, the most likely class from the given list is 'fm'")};
  EXPECT_EQ(score(data, resp).overall, (Tally{1, 1}));
}

// One record per class; correct on PSK and FSK golds only.
struct Fixture57 {
  std::vector<VqaRecord> data;
  std::vector<ResponseRecord> resp;
};

Fixture57 psk_fsk_fixture() {
  Fixture57 f;
  for (const auto& c : list_classes()) {
    auto r = record("q-" + c.canonical_name, c.canonical_name, ten_way_with(c.canonical_name));
    const bool right = c.family == Family::PSK || c.family == Family::FSK;
    f.resp.push_back(answer(r.id, right ? r.gold : wrong(r)));
    f.data.push_back(std::move(r));
  }
  return f;
}

TEST(Score, PskFskFixture) {
  const auto f = psk_fsk_fixture();
  const auto rep = score(f.data, f.resp);
  EXPECT_EQ(rep.overall, (Tally{10, 57}));  // 6 PSK + 4 FSK
  ASSERT_EQ(rep.per_family.size(), 13u);
  for (const auto& [fam, t] : rep.per_family) {
    if (fam == Family::PSK) {
      EXPECT_EQ(t, (Tally{6, 6}));
    } else if (fam == Family::FSK) {
      EXPECT_EQ(t, (Tally{4, 4}));
    } else {
      EXPECT_EQ(t.correct, 0u) << family_name(fam);
    }
  }
  EXPECT_EQ(rep.per_family.at(Family::OFDM).total, 12u);
  EXPECT_EQ(rep.per_family.at(Family::FM).total, 1u);
  EXPECT_EQ(rep.invalid, 0u);
}

TEST(Score, DecompositionExact) {
  // Uneven class counts, mixed outcomes.
  std::vector<VqaRecord> data;
  std::vector<ResponseRecord> resp;
  std::mt19937 gen(5);
  const auto& classes = list_classes();
  for (int i = 0; i < 400; ++i) {
    const auto& cls = classes[gen() % 20];
    auto r = record("r" + std::to_string(i), cls.canonical_name, ten_way_with(cls.canonical_name));
    const auto roll = gen() % 4;
    resp.push_back(answer(r.id, roll == 0 ? "junk" : roll == 1 ? wrong(r) : r.gold));
    data.push_back(std::move(r));
  }
  const auto rep = score(data, resp);
  // overall = sum_c (n_c / N) * (k_c / n_c); in integers: sum k_c == K and sum n_c == N.
  std::size_t k = 0, n = 0;
  for (const auto& [c, t] : rep.per_class) {
    k += t.correct;
    n += t.total;
  }
  EXPECT_EQ(k, rep.overall.correct);
  EXPECT_EQ(n, rep.overall.total);
  std::map<Family, Tally> fam;
  for (const auto& [c, t] : rep.per_class) {
    auto& f = fam[parse_class(c).family];
    f.correct += t.correct;
    f.total += t.total;
  }
  EXPECT_EQ(fam, rep.per_family);
  std::size_t conf = 0;
  for (const auto& [key, count] : rep.family_confusion) conf += count;
  EXPECT_EQ(conf, 400u);
}

TEST(Score, PermutationInvariant) {
  auto f = psk_fsk_fixture();
  f.resp[3] = failure(f.resp[3].id);
  f.resp[7].raw_text = "no idea";
  const auto base = score(f.data, f.resp, "m");
  std::mt19937 gen(9);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(f.resp.begin(), f.resp.end(), gen);
    EXPECT_EQ(score(f.data, f.resp, "m"), base);
    EXPECT_EQ(report_to_json(score(f.data, f.resp, "m")), report_to_json(base));
  }
}

TEST(Score, DuplicateAndUnknownIds) {
  const auto f = psk_fsk_fixture();
  auto dup = f.resp;
  dup.push_back(dup.front());
  EXPECT_THROW(score(f.data, dup), InvalidArgument);
  auto unknown = f.resp;
  unknown.push_back(answer("nope", "fm"));
  EXPECT_THROW(score(f.data, unknown), InvalidArgument);
}

TEST(Score, ReportJsonRoundTripAndText) {
  auto f = psk_fsk_fixture();
  f.resp.pop_back();
  f.resp[0] = failure(f.resp[0].id);
  const auto rep = score(f.data, f.resp, "model-x");
  EXPECT_EQ(report_from_json(report_to_json(rep)), rep);
  const auto text = report_to_text(rep);
  EXPECT_NE(text.find("PSK"), std::string::npos);
  EXPECT_NE(text.find("model-x"), std::string::npos);
}

TEST(Responses, JsonlRoundTrip) {
  std::vector<ResponseRecord> rs{answer("a", "fm\n\"quoted\""), failure("b")};
  rs[0].prediction = "fm";
  rs[0].latency_ms = 12.5;
  oracle::TempDir dir;
  write_responses(rs, dir.path() / "r.jsonl");
  EXPECT_EQ(read_responses(dir.path() / "r.jsonl"), rs);
  EXPECT_THROW(read_responses(dir.path() / "none.jsonl"), MissingArtifact);
  EXPECT_THROW(response_from_json_line(R"({"id":"a"})", 2), ParseError);
}

// SNR grid 10..50 step 5, three modes, one report.
EvalReport snr_report() {
  std::vector<VqaRecord> data;
  std::vector<ResponseRecord> resp;
  int i = 0;
  for (auto mode : {ImageMode::Spec, ImageMode::IQ, ImageMode::Joint}) {
    for (int snr = 10; snr <= 50; snr += 5) {
      for (int k = 0; k < 3; ++k, ++i) {
        data.push_back(record("r" + std::to_string(i), "fm", ten_way_with("fm"), mode, double(snr)));
        resp.push_back(answer(data.back().id, k < 2 ? "fm" : "tone"));
      }
    }
  }
  return score(data, resp, "m");
}

TEST(Sweep, SnrNineRowsPerMode) {
  const auto t = sweep_within_report(SweepFacet::Snr, snr_report());
  ASSERT_EQ(t.rows.size(), 27u);
  std::map<ImageMode, int> per_mode;
  for (const auto& r : t.rows) {
    ++per_mode[r.mode];
    EXPECT_EQ(r.tally, (Tally{2, 3}));
  }
  for (const auto& [m, n] : per_mode) EXPECT_EQ(n, 9);
  const auto csv = t.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "snr,mode,correct,total,accuracy");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 28);
  EXPECT_FALSE(t.to_text().empty());
}

TEST(Sweep, OovFourRowsPerMode) {
  std::vector<std::pair<std::string, EvalReport>> reports;
  for (const char* k : {"0", "4", "8", "16"}) reports.emplace_back(k, snr_report());
  const auto t = sweep_from_reports(SweepFacet::Oov, reports);
  ASSERT_EQ(t.rows.size(), 12u);
  for (std::size_t m = 0; m < 3; ++m) {
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(t.rows[m * 4 + j].facet_value, reports[j].first);
  }
}

TEST(Sweep, SingleReportSingleRow) {
  std::vector<VqaRecord> data{record("a", "fm", ten_way_with("fm"))};
  std::vector<ResponseRecord> resp{answer("a", "fm")};
  std::vector<std::pair<std::string, EvalReport>> reports{{"10", score(data, resp)}};
  const auto t = sweep_from_reports(SweepFacet::NWay, reports);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0].tally, (Tally{1, 1}));
  EXPECT_EQ(sweep_within_report(SweepFacet::NWay, reports[0].second).rows.size(), 1u);
}

TEST(Sweep, MixedModesRejected) {
  std::vector<VqaRecord> a{record("a", "fm", ten_way_with("fm"), ImageMode::Spec)};
  std::vector<VqaRecord> b{record("a", "fm", ten_way_with("fm"), ImageMode::IQ)};
  std::vector<ResponseRecord> resp{answer("a", "fm")};
  std::vector<std::pair<std::string, EvalReport>> reports{{"0", score(a, resp)}, {"4", score(b, resp)}};
  EXPECT_THROW(sweep_from_reports(SweepFacet::Oov, reports), InvalidArgument);
  reports[1] = {"4", score(a, resp, "other-model")};
  EXPECT_THROW(sweep_from_reports(SweepFacet::Oov, reports), InvalidArgument);
  EXPECT_THROW(parse_facet("color"), InvalidArgument);
}

PipelineConfig small_pipeline() {
  PipelineConfig p;
  p.stft = {64, 32};
  p.synthesis.num_samples = 8192;
  return p;
}

TEST(Baseline, ToneVersusFm) {
  DatasetSpec s;
  s.classes = {"tone", "fm"};
  s.n_way = 2;
  s.modes = {ImageMode::Spec};
  s.seeds_per_class = 40;  // 20 train + 20 eval
  s.master_seed = 3;
  const auto m = fixture::synthetic_manifest(s);
  const auto res = nearest_centroid_baseline(filter_split(m, Split::Train), filter_split(m, Split::Eval), small_pipeline());
  EXPECT_EQ(res.overall, (Tally{40, 40}));
}

TEST(Baseline, ResubstitutionBeatsChance) {
  DatasetSpec s;
  s.modes = {ImageMode::Spec};
  s.seeds_per_class = 2;
  const auto eval = filter_split(fixture::synthetic_manifest(s), Split::Eval);
  const auto res = nearest_centroid_baseline(eval, eval, small_pipeline());
  EXPECT_EQ(res.overall.total, 57u);
  EXPECT_GT(res.overall.accuracy(), 1.0 / 57.0);
  EXPECT_EQ(res.per_family.size(), 13u);
}

TEST(Baseline, Errors) {
  DatasetSpec s;
  s.classes = {"tone", "fm", "bpsk"};
  s.n_way = 2;
  s.modes = {ImageMode::Spec, ImageMode::IQ};
  const auto m = fixture::synthetic_manifest(s);
  auto train = filter_split(m, Split::Train);
  std::erase_if(train.rows, [](const AssetRecord& r) { return r.class_name == "bpsk"; });
  EXPECT_THROW(nearest_centroid_baseline(train, filter_split(m, Split::Eval), small_pipeline()), InvalidArgument);
  EXPECT_THROW(nearest_centroid_baseline(filter_split(m, Split::Train), filter_split(m, Split::Eval), small_pipeline(),
                                         ImageMode::IQ),
               InvalidArgument);
}

}  // namespace
}  // namespace rfvqa
