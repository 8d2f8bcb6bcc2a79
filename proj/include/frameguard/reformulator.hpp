#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "frameguard/framing.hpp"
#include "frameguard/risk.hpp"
#include "frameguard/scoring.hpp"

namespace frameguard {

struct ModerationContext {
  std::string article_text;
  std::vector<FrameWeight> article_top_frames;  // at most 5
  std::string comment_text;
  FrameAnalysis comment_frames;
  AlignmentCondition alignment = AlignmentCondition::Match;
  HealthScore health;
  std::string trigger;  // empty means no intervention required
  std::size_t article_char_limit = 2000;
};

// Human-readable reason for intervening, empty for Low risk.
std::string make_trigger(const HealthScore& health, AlignmentCondition alignment,
                         const RiskAssessment& risk);

inline constexpr std::string_view kSystemInstruction =
    "You are an AI comment moderator. Analyze this comment for health and frame transfer "
    "(reframing). Provide constructive suggestions only when the comment is unhealthy or uses a "
    "completely different perspective from the article.";
inline constexpr std::string_view kTriggerPrefix = "This comment requires intervention due to:";
inline constexpr std::string_view kNoIntervention = "none (no intervention required)";

// Cuts at `limit` bytes (backing off to a UTF-8 boundary) and appends "..."
// when anything was removed.
std::string truncate_text(std::string_view text, std::size_t limit, bool* truncated = nullptr);

std::string build_prompt(const ModerationContext& ctx);

struct ModerationGuidance {
  RiskLevel risk_level = RiskLevel::Low;
  std::vector<std::string> suggestions;
  bool allow_post = true;

  bool operator==(const ModerationGuidance&) const = default;
};

// Accepts bare JSON, JSON inside ``` fences, or a JSON object embedded in
// prose. Throws ParseError (raw text attached) when no JSON object can be
// read and ValidationError when fields are missing or ill-typed.
ModerationGuidance parse_guidance(std::string_view raw);

std::string guidance_to_json(const ModerationGuidance& g);

// Text generation endpoint. Implementations throw RemoteError on transport failure.
class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual std::string generate(const std::string& prompt) = 0;
};

struct LlmConfig {
  std::string url;
  std::string model = "gemma3:1b";
  double temperature = 0.2;
  int max_tokens = 512;
  std::chrono::milliseconds timeout{20000};
  // Replace prompt/response text by length + hash in audit records.
  bool redact_audit = false;

  // FRAMEGUARD_LLM_URL (required), FRAMEGUARD_LLM_MODEL, FRAMEGUARD_TIMEOUT_MS.
  static std::optional<LlmConfig> from_env();
};

using AuditSink = std::function<void(const std::string& json_line)>;

// Chat-completion style contract:
//   POST {"model", "prompt", "temperature", "max_tokens", "stream": false,
//         "options": {"temperature", "num_predict"}}
// and reads the generated text from "response" (Ollama), "text", or
// "choices"[0].("message".)"content"/"text".
class HttpLlmClient final : public LlmClient {
 public:
  explicit HttpLlmClient(LlmConfig cfg, AuditSink audit = {});
  std::string generate(const std::string& prompt) override;

  const LlmConfig& config() const noexcept { return cfg_; }

 private:
  LlmConfig cfg_;
  AuditSink audit_;
};

// Extracts the generated text from a completion response body.
std::string decode_completion(std::string_view body);

struct ModerationOutcome {
  ModerationGuidance guidance;
  // Deterministic fallback guidance was used (no client, transport failure or
  // unparseable output after the retry).
  bool degraded = false;
  // A valid generation reported a risk level different from the rule engine.
  bool llm_override = false;
  // The generation's own allow_post; the rule engine decides the returned one.
  std::optional<bool> llm_allow_post;
  int generation_calls = 0;
  std::vector<std::string> warnings;
};

// Canned suggestions used by the fallback path.
std::vector<std::string> fallback_suggestions(const ModerationContext& ctx, RiskLevel level);

// Low risk returns (low, [], true) without calling the client. Otherwise one
// generation plus one retry; then fallback guidance. Never throws on client
// failure. `client` may be null.
ModerationOutcome moderate(const ModerationContext& ctx, const RiskAssessment& risk, LlmClient* client);

}  // namespace frameguard
