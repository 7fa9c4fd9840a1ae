#include <gtest/gtest.h>

#include <map>

#include "longscribe/config.hpp"
#include "longscribe/error.hpp"
#include "test_util.hpp"

using namespace longscribe;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST(Config, DefaultsAreValid) {
  PipelineConfig c;
  EXPECT_NO_THROW(validate(c));
  EXPECT_EQ(c.chunking, Chunking::Smart);
  EXPECT_DOUBLE_EQ(c.segmentation.max_chunk_s, 30.0);
  EXPECT_EQ(c.backends.frame_classifier, "energy");
}

TEST(Config, ParsesText) {
  PipelineConfig c;
  apply_config_text(c, R"(# comment
chunking = uniform
uniform_chunk_s = 12.5

ast_filter = off
speech_labels = Speech, Singing
uncertainty = ensemble
ensemble_members = scores, tta
score_reduction = mean
lm_group_max = 3
recognizer = script:/tmp/x.json
worker_count = 4
)");
  EXPECT_EQ(c.chunking, Chunking::Uniform);
  EXPECT_DOUBLE_EQ(c.uniform_chunk_s, 12.5);
  EXPECT_FALSE(c.ast_filter);
  EXPECT_EQ(c.speech_labels, (std::set<std::string>{"Singing", "Speech"}));
  EXPECT_EQ(c.uncertainty, UncertaintyMode::Ensemble);
  EXPECT_EQ(c.ensemble_members, (std::vector<UncertaintyMode>{UncertaintyMode::Scores, UncertaintyMode::Tta}));
  EXPECT_EQ(c.reduction, ScoreReduction::Mean);
  EXPECT_EQ(c.lm.group_max, 3u);
  EXPECT_EQ(c.backends.recognizer, "script:/tmp/x.json");
  EXPECT_EQ(c.worker_count, 4);
}

TEST(Config, TextRoundTrip) {
  PipelineConfig c;
  apply_setting(c, "onset", "0.61");
  apply_setting(c, "score_threshold", "-0.123456789");
  apply_setting(c, "uncertainty", "disagreement");
  apply_setting(c, "flag_deletes", "no");
  apply_setting(c, "sequence_scorer", "unigram:/data/u.tsv");
  PipelineConfig back;
  apply_config_text(back, to_config_text(c));
  EXPECT_EQ(to_config_text(back), to_config_text(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_DOUBLE_EQ(back.segmentation.onset, 0.61);
  EXPECT_EQ(back.score_threshold, -0.123456789);
  EXPECT_FALSE(back.flag_deletes);
}

TEST(Config, RejectsBadInput) {
  PipelineConfig c;
  EXPECT_EQ(kind_of([&] { apply_setting(c, "no_such_key", "1"); }), ErrorKind::Config);
  EXPECT_EQ(kind_of([&] { apply_setting(c, "onset", "high"); }), ErrorKind::Config);
  EXPECT_EQ(kind_of([&] { apply_setting(c, "ast_filter", "maybe"); }), ErrorKind::Config);
  EXPECT_EQ(kind_of([&] { apply_setting(c, "chunking", "random"); }), ErrorKind::Config);
  EXPECT_EQ(kind_of([&] { apply_config_text(c, "just words\n"); }), ErrorKind::Config);
  EXPECT_EQ(kind_of([&] { apply_config_file(c, "/nonexistent/longscribe.conf"); }), ErrorKind::FileNotFound);
}

TEST(Config, ValidationNamesConstraint) {
  auto invalid = [](const std::function<void(PipelineConfig&)>& edit) {
    PipelineConfig c;
    edit(c);
    return kind_of([&] { validate(c); });
  };
  EXPECT_EQ(invalid([](auto& c) { c.worker_count = 0; }), ErrorKind::Config);
  EXPECT_EQ(invalid([](auto& c) { c.stretch_down = 0; }), ErrorKind::Config);
  EXPECT_EQ(invalid([](auto& c) { c.segmentation.offset = 0.9; }), ErrorKind::Config);
  EXPECT_EQ(invalid([](auto& c) { c.speech_threshold = 1.5; }), ErrorKind::Config);
  EXPECT_EQ(invalid([](auto& c) { c.lm.group_max = 0; }), ErrorKind::Config);
  EXPECT_EQ(invalid([](auto& c) { c.ensemble_members.clear(); c.uncertainty = UncertaintyMode::Ensemble; }),
            ErrorKind::Config);
}

TEST(Config, EnvironmentOverridesBackends) {
  const std::map<std::string, std::string> env{{"LONGSCRIBE_RECOGNIZER", "cmd:my-adapter"},
                                               {"LONGSCRIBE_SEQUENCE_SCORER", "constant"}};
  PipelineConfig c;
  apply_env_overrides(c, [&](const char* name) -> std::optional<std::string> {
    const auto it = env.find(name);
    if (it == env.end()) return std::nullopt;
    return it->second;
  });
  EXPECT_EQ(c.backends.recognizer, "cmd:my-adapter");
  EXPECT_EQ(c.backends.sequence_scorer, "constant");
  EXPECT_EQ(c.backends.frame_classifier, "energy");
}

TEST(Config, FileLoads) {
  testutil::TempDir dir;
  testutil::write_text(dir / "a.conf", "max_chunk_s = 20\nmerge_gap_s=0.5\n");
  PipelineConfig c;
  apply_config_file(c, dir / "a.conf");
  EXPECT_DOUBLE_EQ(c.segmentation.max_chunk_s, 20.0);
  EXPECT_DOUBLE_EQ(c.segmentation.merge_gap_s, 0.5);
}
