#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "frameguard/error.hpp"
#include "frameguard/reformulator.hpp"

using namespace frameguard;

namespace {

ModerationContext context(double health, AlignmentCondition a) {
  ModerationContext ctx;
  ctx.article_text = "The senate debated the climate bill for hours.";
  ctx.article_top_frames = {{FrameLabel::PoliticalPolicies, 0.7}, {FrameLabel::Economic, 0.3}};
  ctx.comment_text = "You people are idiots.";
  ctx.comment_frames.primary = FrameLabel::Other;
  ctx.alignment = a;
  ctx.health = make_health_score(health);
  ctx.trigger = make_trigger(ctx.health, a, assess(health, a));
  return ctx;
}

struct ScriptedClient : LlmClient {
  std::vector<std::string> replies;
  int calls = 0;
  std::string last_prompt;
  std::string generate(const std::string& prompt) override {
    last_prompt = prompt;
    const auto i = static_cast<std::size_t>(calls++);
    if (i >= replies.size()) throw RemoteError(RemoteError::Kind::Connection, "scripted failure");
    return replies[i];
  }
};

}  // namespace

TEST_CASE("prompt carries the template markers in order") {
  auto ctx = context(0.2, AlignmentCondition::Complete);
  const auto p = build_prompt(ctx);
  const char* markers[] = {"System Instruction:", "CONTEXT:", "Article Text:", "Comment to Analyze:",
                           "Trigger: This comment requires intervention due to:", "Task:", "Provide a JSON response."};
  std::size_t pos = 0;
  for (const char* m : markers) {
    CAPTURE(m);
    const auto at = p.find(m, pos);
    REQUIRE(at != std::string::npos);
    pos = at;
  }
  CHECK(p.find(std::string(kSystemInstruction)) != std::string::npos);
  CHECK(p.find("Political and Policies (0.70)") != std::string::npos);
  CHECK(p.find("Complete") != std::string::npos);
}

TEST_CASE("article text is truncated on a character boundary") {
  bool cut = false;
  CHECK(truncate_text("short", 10, &cut) == "short");
  CHECK_FALSE(cut);
  CHECK(truncate_text("abcdef", 3, &cut) == "abc...");
  CHECK(cut);
  // "é" is two bytes; a cut in its middle backs off
  CHECK(truncate_text("ab\xC3\xA9z", 3) == "ab...");
  auto ctx = context(0.2, AlignmentCondition::Match);
  ctx.article_text = std::string(5000, 'a');
  CHECK(build_prompt(ctx).find(std::string(2000, 'a') + "...") != std::string::npos);
}

TEST_CASE("trigger text names the reasons") {
  auto low = context(0.9, AlignmentCondition::Match);
  CHECK(low.trigger.empty());
  CHECK(build_prompt(low).find(std::string(kNoIntervention)) != std::string::npos);
  auto high = context(0.2, AlignmentCondition::Complete);
  CHECK_FALSE(high.trigger.empty());
}

TEST_CASE("guidance parser accepts bare, fenced and embedded JSON") {
  const ModerationGuidance g{RiskLevel::High, {"one", "two", "three"}, false};
  const auto text = guidance_to_json(g);
  CHECK(parse_guidance(text) == g);
  CHECK(parse_guidance("```json\n" + text + "\n```") == g);
  CHECK(parse_guidance("```\n" + text + "\n```") == g);
  CHECK(parse_guidance("Here is my answer: " + text + " Hope it helps.") == g);
  CHECK(parse_guidance(R"({"risk_level": "low", "suggestions": [], "allow_post": true})").risk_level == RiskLevel::Low);
}

TEST_CASE("guidance parser rejects bad output") {
  CHECK_THROWS_AS(parse_guidance("no json here"), ParseError);
  try {
    parse_guidance("garbage {");
  } catch (const ParseError& e) {
    CHECK(e.raw() == "garbage {");
  }
  CHECK_THROWS_AS(parse_guidance(R"({"risk_level": "extreme", "suggestions": ["a"], "allow_post": true})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_guidance(R"({"risk_level": "high", "suggestions": [], "allow_post": false})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_guidance(R"({"risk_level": "high", "suggestions": ["a"]})"), ValidationError);
  CHECK_THROWS_AS(parse_guidance(R"({"risk_level": "high", "suggestions": [1], "allow_post": false})"),
                  ValidationError);
}

TEST_CASE("low risk never calls the client") {
  ScriptedClient client;
  auto ctx = context(0.9, AlignmentCondition::Match);
  auto out = moderate(ctx, assess(0.9, AlignmentCondition::Match), &client);
  CHECK(client.calls == 0);
  CHECK(out.guidance.suggestions.empty());
  CHECK(out.guidance.allow_post);
  CHECK_FALSE(out.degraded);
}

TEST_CASE("valid generation is used, the rule engine keeps allow_post") {
  ScriptedClient client;
  client.replies = {R"({"risk_level": "medium", "suggestions": ["a", "b", "c"], "allow_post": true})"};
  auto ctx = context(0.2, AlignmentCondition::Complete);
  const auto risk = assess(0.2, AlignmentCondition::Complete);
  auto out = moderate(ctx, risk, &client);
  CHECK(client.calls == 1);
  CHECK(out.guidance.suggestions.size() == 3);
  CHECK_FALSE(out.guidance.allow_post);
  CHECK(out.llm_override);
  CHECK(out.llm_allow_post == true);
  CHECK_FALSE(out.degraded);
}

TEST_CASE("one retry after a bad generation") {
  ScriptedClient client;
  client.replies = {"sorry, I cannot", R"({"risk_level": "high", "suggestions": ["x"], "allow_post": false})"};
  auto out = moderate(context(0.2, AlignmentCondition::Match), assess(0.2, AlignmentCondition::Match), &client);
  CHECK(client.calls == 2);
  CHECK(out.guidance.suggestions == std::vector<std::string>{"x"});
  CHECK_FALSE(out.degraded);
}

TEST_CASE("double failure gives deterministic fallback guidance") {
  auto ctx = context(0.2, AlignmentCondition::Complete);
  const auto risk = assess(0.2, AlignmentCondition::Complete);
  ScriptedClient a, b;
  a.replies = {"nope", "still nope"};
  auto out1 = moderate(ctx, risk, &a);
  auto out2 = moderate(ctx, risk, &b);
  CHECK(a.calls == 2);
  CHECK(b.calls == 2);
  CHECK(out1.degraded);
  CHECK(out1.guidance == out2.guidance);
  CHECK(out1.guidance.risk_level == RiskLevel::High);
  CHECK_FALSE(out1.guidance.allow_post);
  CHECK(out1.guidance.suggestions.size() == 3);
  auto none = moderate(ctx, risk, nullptr);
  CHECK(none.degraded);
  CHECK(none.guidance == out1.guidance);
}

TEST_CASE("completion bodies from common servers decode") {
  CHECK(decode_completion(R"({"response": "hi"})") == "hi");
  CHECK(decode_completion(R"({"text": "hi"})") == "hi");
  CHECK(decode_completion(R"({"choices": [{"message": {"content": "hi"}}]})") == "hi");
  CHECK(decode_completion(R"({"choices": [{"text": "hi"}]})") == "hi");
  CHECK_THROWS_AS(decode_completion(R"({"nothing": 1})"), RemoteError);
}

TEST_CASE("http client posts the generation request and writes audit lines") {
  httplib::Server server;
  nlohmann::json seen;
  server.Post("/api/generate", [&](const httplib::Request& req, httplib::Response& res) {
    seen = nlohmann::json::parse(req.body);
    res.set_content(R"({"response": "{\"risk_level\": \"high\", \"suggestions\": [\"s\"], \"allow_post\": false}"})",
                    "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  LlmConfig cfg;
  cfg.url = "http://127.0.0.1:" + std::to_string(port) + "/api/generate";
  cfg.redact_audit = true;
  std::vector<std::string> audit;
  HttpLlmClient client(cfg, [&](const std::string& line) { audit.push_back(line); });
  const auto text = client.generate("PROMPT TEXT");
  server.stop();
  t.join();
  CHECK(parse_guidance(text).suggestions == std::vector<std::string>{"s"});
  CHECK(seen["model"] == "gemma3:1b");
  CHECK(seen["prompt"] == "PROMPT TEXT");
  CHECK(seen["stream"] == false);
  REQUIRE_FALSE(audit.empty());
  for (const auto& line : audit) CHECK(line.find("PROMPT TEXT") == std::string::npos);
}
