#include <doctest.h>

#include <random>

#include "frameguard/error.hpp"
#include "frameguard/framing.hpp"

using namespace frameguard;

namespace {

FrameAnalysis article_of(std::initializer_list<std::pair<FrameLabel, double>> s) {
  std::vector<std::pair<FrameLabel, double>> v(s);
  return aggregate_frames(std::span<const std::pair<FrameLabel, double>>(v));
}

}  // namespace

TEST_CASE("frame labels parse from canonical, identifier and short names") {
  CHECK(parse_frame("Fairness and Equality") == FrameLabel::FairnessEquality);
  CHECK(parse_frame("fairness & equality") == FrameLabel::FairnessEquality);
  CHECK(parse_frame("HealthSafety") == FrameLabel::HealthSafety);
  CHECK(parse_frame("Political") == FrameLabel::PoliticalPolicies);
  CHECK(parse_frame("cultural") == FrameLabel::CulturalIdentity);
  CHECK_FALSE(parse_frame("Weather").has_value());
  CHECK_THROWS_AS(parse_frame_or_throw("Weather"), ValidationError);
  for (auto f : kAllFrames) CHECK(parse_frame(to_string(f)) == f);
}

TEST_CASE("single sentence article takes its label as primary") {
  auto a = article_of({{FrameLabel::Economic, 0.7}});
  CHECK(a.primary == FrameLabel::Economic);
  CHECK(a.secondaries.empty());
  REQUIRE(a.top_k.size() == 1);
  CHECK(a.top_k[0].weight == doctest::Approx(1.0));
}

TEST_CASE("secondary frames need at least ten percent of the mass") {
  auto a = article_of({{FrameLabel::Economic, 0.9}, {FrameLabel::Economic, 0.9}, {FrameLabel::Morality, 0.2},
                       {FrameLabel::LegalityCrime, 0.1}});
  // Morality 0.2/2.1 < 0.1, Legality lower still.
  CHECK(a.primary == FrameLabel::Economic);
  CHECK(a.secondaries.empty());
  auto b = article_of({{FrameLabel::Economic, 0.9}, {FrameLabel::Morality, 0.1}});
  // exactly 0.1 of the mass counts
  CHECK(b.has_secondary(FrameLabel::Morality));
}

TEST_CASE("argmax ties break in taxonomy order") {
  auto a = article_of({{FrameLabel::SecurityDefense, 0.5}, {FrameLabel::Morality, 0.5}});
  CHECK(a.primary == FrameLabel::Morality);
  CHECK(a.top_k[0].label == FrameLabel::Morality);
  CHECK(a.top_k[1].label == FrameLabel::SecurityDefense);
}

TEST_CASE("top-k keeps at most five labels in descending weight") {
  auto a = article_of({{FrameLabel::Economic, 0.9}, {FrameLabel::Morality, 0.8}, {FrameLabel::FairnessEquality, 0.7},
                       {FrameLabel::LegalityCrime, 0.6}, {FrameLabel::PoliticalPolicies, 0.5},
                       {FrameLabel::SecurityDefense, 0.4}, {FrameLabel::HealthSafety, 0.3}});
  REQUIRE(a.top_k.size() == 5);
  for (std::size_t i = 1; i < a.top_k.size(); ++i) CHECK(a.top_k[i - 1].weight >= a.top_k[i].weight);
  CHECK(a.top_k.back().label == FrameLabel::PoliticalPolicies);
}

TEST_CASE("aggregation rejects empty, negative and massless input") {
  std::vector<std::pair<FrameLabel, double>> empty;
  CHECK_THROWS_AS(aggregate_frames(std::span<const std::pair<FrameLabel, double>>(empty)), ValidationError);
  CHECK_THROWS_AS(article_of({{FrameLabel::Economic, -0.1}}), ValidationError);
  CHECK_THROWS_AS(article_of({{FrameLabel::Economic, 0.0}}), ValidationError);
}

TEST_CASE("worked examples: Obamacare comment is selective, insult comment is complete") {
  // Article: health primary, economic/political/morality secondary.
  auto obamacare = article_of({{FrameLabel::HealthSafety, 0.9}, {FrameLabel::HealthSafety, 0.9},
                               {FrameLabel::HealthSafety, 0.9}, {FrameLabel::Economic, 0.5},
                               {FrameLabel::PoliticalPolicies, 0.5}, {FrameLabel::Morality, 0.5}});
  REQUIRE(obamacare.primary == FrameLabel::HealthSafety);
  CHECK(classify_alignment(FrameLabel::PoliticalPolicies, obamacare) == AlignmentCondition::Selective);

  // Article: political primary, legality/morality/cultural secondary.
  auto insulting = article_of({{FrameLabel::PoliticalPolicies, 0.9}, {FrameLabel::PoliticalPolicies, 0.9},
                               {FrameLabel::PoliticalPolicies, 0.9}, {FrameLabel::LegalityCrime, 0.5},
                               {FrameLabel::Morality, 0.5}, {FrameLabel::CulturalIdentity, 0.5}});
  REQUIRE(insulting.primary == FrameLabel::PoliticalPolicies);
  CHECK(classify_alignment(FrameLabel::HealthSafety, insulting) == AlignmentCondition::Complete);
  CHECK(classify_alignment(FrameLabel::PoliticalPolicies, insulting) == AlignmentCondition::Match);
}

TEST_CASE("any-comment-frame mode looks at comment secondaries") {
  auto article = article_of({{FrameLabel::Economic, 0.9}, {FrameLabel::Morality, 0.4}});
  auto comment = article_of({{FrameLabel::HealthSafety, 0.9}, {FrameLabel::Morality, 0.5}});
  CHECK(classify_alignment(comment, article) == AlignmentCondition::Complete);
  CHECK(classify_alignment(comment, article, AlignmentMode::AnyCommentFrame) == AlignmentCondition::Selective);
}

TEST_CASE("alignment is invariant to sentence order and confidence scale") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> label(0, 9);
  std::uniform_real_distribution<double> conf(0.05, 1.0), scale(0.1, 10.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::pair<FrameLabel, double>> s(1 + trial % 12);
    for (auto& p : s) p = {kAllFrames[static_cast<std::size_t>(label(rng))], conf(rng)};
    const auto base = aggregate_frames(std::span<const std::pair<FrameLabel, double>>(s));
    auto shuffled = s;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const double c = scale(rng);
    auto scaled = s;
    for (auto& p : scaled) p.second *= c;
    const auto a2 = aggregate_frames(std::span<const std::pair<FrameLabel, double>>(shuffled));
    const auto a3 = aggregate_frames(std::span<const std::pair<FrameLabel, double>>(scaled));
    const FrameLabel comment = kAllFrames[static_cast<std::size_t>(label(rng))];
    CHECK(classify_alignment(comment, base) == classify_alignment(comment, a2));
    CHECK(classify_alignment(comment, base) == classify_alignment(comment, a3));
    CHECK(base.primary == a2.primary);
    CHECK(base.secondaries == a3.secondaries);
  }
}
