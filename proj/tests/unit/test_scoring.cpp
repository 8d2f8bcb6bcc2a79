#include <doctest.h>

#include <atomic>
#include <chrono>
#include <random>
#include <set>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "../support/mock_scorer.hpp"
#include "frameguard/error.hpp"
#include "frameguard/scoring.hpp"

using namespace frameguard;
using nlohmann::json;

TEST_CASE("sentence splitting handles abbreviations, initials and quotes") {
  auto s = split_sentences("Mr. Smith went to Washington. He met Dr. Jones at 3 p.m. on Friday! Was it fun?");
  REQUIRE(s.size() == 3);
  CHECK(s[0] == "Mr. Smith went to Washington.");
  CHECK(s[1] == "He met Dr. Jones at 3 p.m. on Friday!");
  CHECK(s[2] == "Was it fun?");

  s = split_sentences("The U.S. economy grew. J. R. Tolkien wrote books.");
  REQUIRE(s.size() == 2);
  CHECK(s[1] == "J. R. Tolkien wrote books.");

  s = split_sentences("She said \"stop.\" Then she left.");
  REQUIRE(s.size() == 2);
  CHECK(s[0] == "She said \"stop.\"");

  s = split_sentences("First paragraph without a stop\n\nSecond paragraph.");
  REQUIRE(s.size() == 2);
  CHECK(s[0] == "First paragraph without a stop");

  CHECK(split_sentences("   \n  ").empty());
  CHECK(split_sentences("no terminal punctuation").size() == 1);
  CHECK(split_sentences("lower case after stop. continues here").size() == 1);
}

TEST_CASE("generated 50-sentence text splits back into its sentences") {
  const char* subjects[] = {"Mr. Brown", "The senator", "Dr. Lee", "Officials in the U.S. capital", "Prof. Ortiz",
                            "A spokesperson for Acme Inc.", "J. K. Rowling"};
  const char* verbs[] = {"said", "argued", "wrote", "claimed", "insisted"};
  const char* objects[] = {"the plan was sound", "costs would rise, e.g. for rent", "nothing had changed",
                           "\"the vote is final\"", "the report (released Jan. 5) was wrong"};
  const char* ends[] = {".", "!", "?"};
  std::mt19937_64 rng(11);
  std::vector<std::string> expected;
  std::string text;
  for (int i = 0; i < 50; ++i) {
    std::string s = std::string(subjects[rng() % 7]) + " " + verbs[rng() % 5] + " " + objects[rng() % 5] + ends[rng() % 3];
    expected.push_back(s);
    text += s + (i % 9 == 8 ? "\n" : " ");
  }
  CHECK(split_sentences(text) == expected);
}

TEST_CASE("baseline health scores match the independent oracle") {
  // Frozen from tests/oracles/lexicon_oracle.py
  const std::pair<const char*, double> cases[] = {
      {"", 0.750000000000000},
      {"The bill passed on Tuesday.", 0.750000000000000},
      {"You are an idiot and this is stupid.", 0.083066937759253},
      {"Thanks, good point. I think the evidence supports it.", 0.947777794748963},
      {"Yeah right, you people never learn. Shut up.", 0.032252123432054},
      {"I respectfully disagree; perhaps consider the data. Thank you!", 0.956835467020004},
      {"Typical liberal nonsense \xE2\x80\x94 what a joke.", 0.425218280714686},
      {"Idiot idiot idiot", 0.007381366792984},
  };
  BaselineHealthScorer scorer;
  for (const auto& [text, expected] : cases) {
    CAPTURE(text);
    CHECK(scorer.score(text) == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK(health_lexicon().size() == 60);
}

TEST_CASE("word tokens fold case and curly apostrophes") {
  auto t = word_tokens("Don\xE2\x80\x99t SHOUT, 'please' 42x");
  CHECK(t == std::vector<std::string>{"don't", "shout", "please", "42x"});
}

TEST_CASE("health score threshold and validation") {
  CHECK(make_health_score(0.5).binary);
  CHECK_FALSE(make_health_score(0.4999).binary);
  CHECK_THROWS_AS(make_health_score(1.5), ValidationError);
}

TEST_CASE("baseline frame prediction") {
  auto f = baseline_sentence_frame("The tax plan.");
  CHECK(f.label == FrameLabel::Economic);
  CHECK(f.confidence == doctest::Approx(0.6321205588).epsilon(1e-9));
  f = baseline_sentence_frame("Nothing to see here.");
  CHECK(f.label == FrameLabel::Other);
  CHECK(f.confidence == kOtherFloorConfidence);
  // two economic hits, one legal: (1 - e^-2) * 2/3
  f = baseline_sentence_frame("Taxes and jobs in court.");
  CHECK(f.label == FrameLabel::Economic);
  CHECK(f.confidence == doctest::Approx((1.0 - std::exp(-2.0)) * 2.0 / 3.0));
  // tie goes to the earlier frame in the taxonomy
  CHECK(baseline_sentence_frame("war and money").label == FrameLabel::Economic);
}

TEST_CASE("keywords belong to exactly one frame") {
  std::set<std::string_view> seen;
  for (auto f : kAllFrames) {
    for (auto k : frame_keywords(f)) CHECK(seen.insert(k).second);
  }
  CHECK(frame_keywords(FrameLabel::Other).empty());
}

TEST_CASE("score_frames aggregates sentence predictions") {
  BaselineFrameScorer scorer;
  auto a = score_frames("Taxes rose again. The court ruled. Jobs vanished from the market.", scorer);
  CHECK(a.primary == FrameLabel::Economic);
  CHECK(a.has_secondary(FrameLabel::LegalityCrime));
  CHECK(a.sentence_frames.size() == 3);
  auto empty = score_frames("   ", scorer);
  CHECK(empty.primary == FrameLabel::Other);
}

TEST_CASE("scorer config validation") {
  ScorerConfig c;
  CHECK_NOTHROW(c.validate());
  c.kind = ScorerConfig::Kind::Remote;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  CHECK_NOTHROW(ScorerConfig::remote("http://localhost:1/x").validate());
}

TEST_CASE("payload decoders reject malformed bodies") {
  CHECK(decode_health_payload(R"({"scores": [0.1, 0.9]})", 2) == std::vector<double>{0.1, 0.9});
  CHECK_THROWS_AS(decode_health_payload(R"({"scores": [0.1]})", 2), RemoteError);
  CHECK_THROWS_AS(decode_health_payload(R"({"scores": [1.5]})", 1), RemoteError);
  CHECK_THROWS_AS(decode_health_payload("nope", 1), RemoteError);
  const std::vector<std::string> s{"a", "b"};
  auto f = decode_frame_payload(
      R"({"frames": [[{"label": "Economic", "confidence": 0.4}, {"label": "Morality", "confidence": 0.6}],
                     [{"label": "Health", "confidence": 0.5}, {"label": "Economic", "confidence": 0.5}]]})",
      s);
  CHECK(f[0].label == FrameLabel::Morality);
  CHECK(f[1].label == FrameLabel::Economic);
  CHECK_THROWS_AS(decode_frame_payload(R"({"frames": [[{"label": "Weather", "confidence": 0.4}], []]})", s),
                  RemoteError);
}

TEST_CASE("remote health scorer batches and keeps input order") {
  mock::ScorerServer mock;
  auto cfg = ScorerConfig::remote(mock.url("/health"));
  cfg.batch_size = 4;
  RemoteHealthScorer scorer(cfg);
  std::vector<std::string> texts;
  for (int i = 0; i < 10; ++i) texts.emplace_back(static_cast<std::size_t>(i * 7), 'x');
  auto scores = scorer.score_batch(texts);
  REQUIRE(scores.size() == 10);
  for (int i = 0; i < 10; ++i) CHECK(scores[static_cast<std::size_t>(i)] == doctest::Approx(i * 0.07));
  CHECK(mock.requests == 3);
}

TEST_CASE("remote frame scorer uses the top candidate") {
  mock::ScorerServer mock;
  RemoteFrameScorer scorer(ScorerConfig::remote(mock.url("/frames")));
  auto a = score_frames("One. Two.", scorer);
  CHECK(a.primary == FrameLabel::SecurityDefense);
  CHECK(a.sentence_frames.size() == 2);
}

TEST_CASE("remote failures surface as typed errors within the timeout") {
  mock::ScorerServer mock;
  try {
    RemoteHealthScorer(ScorerConfig::remote(mock.url("/broken"))).score_batch(std::vector<std::string>{"x"});
    FAIL("expected RemoteError");
  } catch (const RemoteError& e) {
    CHECK(e.kind() == RemoteError::Kind::HttpStatus);
    CHECK(e.status() == 503);
    CHECK(e.retryable());
  }

  mock.delay_ms = 1500;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    RemoteHealthScorer(ScorerConfig::remote(mock.url("/health"), std::chrono::milliseconds(200)))
        .score_batch(std::vector<std::string>{"x"});
    FAIL("expected RemoteError");
  } catch (const RemoteError& e) {
    CHECK(e.kind() == RemoteError::Kind::Timeout);
  }
  CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::milliseconds(1200));
  mock.delay_ms = 0;

  try {
    RemoteHealthScorer(ScorerConfig::remote("http://127.0.0.1:1/none", std::chrono::milliseconds(300)))
        .score_batch(std::vector<std::string>{"x"});
    FAIL("expected RemoteError");
  } catch (const RemoteError& e) {
    CHECK(e.kind() == RemoteError::Kind::Connection);
  }
}
