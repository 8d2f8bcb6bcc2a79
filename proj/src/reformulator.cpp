#include "frameguard/reformulator.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "frameguard/detail/text.hpp"
#include "frameguard/error.hpp"
#include "frameguard/http.hpp"

namespace frameguard {

using nlohmann::json;

namespace {

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string_view alignment_gloss(AlignmentCondition a) {
  switch (a) {
    case AlignmentCondition::Match: return "comment keeps the article's primary frame";
    case AlignmentCondition::Selective: return "comment adopts a secondary frame present in the article";
    case AlignmentCondition::Complete: return "comment introduces a frame absent from the article";
  }
  return "";
}

}  // namespace

std::string make_trigger(const HealthScore& health, AlignmentCondition alignment, const RiskAssessment& risk) {
  if (risk.level == RiskLevel::Low) return {};
  std::vector<std::string> reasons;
  if (!health.binary || health.score < 0.6) {
    reasons.push_back((health.binary ? "borderline health score (" : "low health score (") +
                      fixed2(health.score) + ")");
  }
  if (alignment == AlignmentCondition::Complete) {
    reasons.push_back("complete reframing (frame absent from the article)");
  } else if (alignment == AlignmentCondition::Selective) {
    reasons.push_back("selective reframing (secondary article frame)");
  }
  if (reasons.empty()) reasons.push_back(std::string(to_string(risk.level)) + " risk");
  std::string out;
  for (std::size_t i = 0; i < reasons.size(); ++i) {
    if (i) out += "; ";
    out += reasons[i];
  }
  return out;
}

std::string truncate_text(std::string_view text, std::size_t limit, bool* truncated) {
  if (text.size() <= limit) {
    if (truncated) *truncated = false;
    return std::string(text);
  }
  std::size_t cut = limit;
  // Never split a multi-byte sequence: continuation bytes are 10xxxxxx.
  while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;
  if (truncated) *truncated = true;
  return std::string(text.substr(0, cut)) + "...";
}

std::string build_prompt(const ModerationContext& ctx) {
  std::ostringstream p;
  p << "System Instruction:\n" << kSystemInstruction << "\n\n";

  p << "CONTEXT:\n";
  p << "Article top frames: ";
  if (ctx.article_top_frames.empty()) p << "none detected";
  for (std::size_t i = 0; i < ctx.article_top_frames.size() && i < 5; ++i) {
    if (i) p << ", ";
    p << to_string(ctx.article_top_frames[i].label) << " (" << fixed2(ctx.article_top_frames[i].weight) << ")";
  }
  p << "\nComment frames: primary " << to_string(ctx.comment_frames.primary);
  if (!ctx.comment_frames.secondaries.empty()) {
    p << "; secondary ";
    for (std::size_t i = 0; i < ctx.comment_frames.secondaries.size(); ++i) {
      if (i) p << ", ";
      p << to_string(ctx.comment_frames.secondaries[i]);
    }
  }
  p << "\nFrame alignment: " << to_string(ctx.alignment) << " (" << alignment_gloss(ctx.alignment) << ")";
  p << "\nHealth score: " << fixed2(ctx.health.score) << " (" << (ctx.health.binary ? "healthy" : "unhealthy")
    << ")\n\n";

  p << "Article Text: " << truncate_text(ctx.article_text, ctx.article_char_limit) << "\n\n";
  p << "Comment to Analyze: " << ctx.comment_text << "\n\n";
  p << "Trigger: " << kTriggerPrefix << ' ' << (ctx.trigger.empty() ? kNoIntervention : ctx.trigger) << "\n\n";

  p << "Task:\n"
       "Based on health and frame transfer analysis:\n"
       "1. Confirm the risk level (low, medium, high).\n"
       "2. Provide 2\xE2\x80\x93" "3 specific, constructive reformulations that:\n"
       "   - Improve health if unhealthy\n"
       "   - Help align comment with article frames if reframing is detected\n"
       "   - Maintain the core message\n"
       "3. Determine if the original comment should be allowed.\n\n";
  p << "Provide a JSON response.\n";
  p << "Keys: risk_level (low|medium|high), suggestions (array of strings), allow_post (true|false).\n";
  return p.str();
}

// ---------------------------------------------------------------------------
// Guidance parsing

namespace {

std::optional<std::string_view> fenced_body(std::string_view raw) {
  auto open = raw.find("```");
  if (open == std::string_view::npos) return std::nullopt;
  auto line_end = raw.find('\n', open);
  if (line_end == std::string_view::npos) return std::nullopt;
  auto close = raw.find("```", line_end);
  if (close == std::string_view::npos) return raw.substr(line_end + 1);
  return raw.substr(line_end + 1, close - line_end - 1);
}

}  // namespace

ModerationGuidance parse_guidance(std::string_view raw) {
  std::string_view body = detail::trim(raw);
  if (auto fenced = fenced_body(body)) body = detail::trim(*fenced);

  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    auto first = body.find('{');
    auto last = body.rfind('}');
    if (first != std::string_view::npos && last != std::string_view::npos && last > first) {
      j = json::parse(body.substr(first, last - first + 1), nullptr, false);
    }
  }
  if (j.is_discarded() || !j.is_object()) {
    throw ParseError("guidance: no JSON object found in generation output", std::string(raw));
  }

  ModerationGuidance g;
  if (!j.contains("risk_level") || !j["risk_level"].is_string()) {
    throw ValidationError("guidance: missing string field 'risk_level'");
  }
  auto level = parse_risk_level(j["risk_level"].get<std::string>());
  if (!level) throw ValidationError("guidance: unknown risk_level '" + j["risk_level"].get<std::string>() + "'");
  g.risk_level = *level;

  if (!j.contains("suggestions") || !j["suggestions"].is_array()) {
    throw ValidationError("guidance: missing array field 'suggestions'");
  }
  for (const auto& s : j["suggestions"]) {
    if (!s.is_string()) throw ValidationError("guidance: suggestions must be strings");
    g.suggestions.push_back(s.get<std::string>());
  }
  if (!j.contains("allow_post") || !j["allow_post"].is_boolean()) {
    throw ValidationError("guidance: missing boolean field 'allow_post'");
  }
  g.allow_post = j["allow_post"].get<bool>();
  if (g.risk_level != RiskLevel::Low && g.suggestions.empty()) {
    throw ValidationError("guidance: suggestions must be non-empty unless risk_level is low");
  }
  return g;
}

std::string guidance_to_json(const ModerationGuidance& g) {
  return json{{"risk_level", std::string(to_string(g.risk_level))},
              {"suggestions", g.suggestions},
              {"allow_post", g.allow_post}}
      .dump();
}

// ---------------------------------------------------------------------------
// HTTP client

std::optional<LlmConfig> LlmConfig::from_env() {
  const char* url = std::getenv("FRAMEGUARD_LLM_URL");
  if (!url || !*url) return std::nullopt;
  LlmConfig cfg;
  cfg.url = url;
  if (const char* model = std::getenv("FRAMEGUARD_LLM_MODEL"); model && *model) cfg.model = model;
  if (const char* ms = std::getenv("FRAMEGUARD_TIMEOUT_MS"); ms && *ms) {
    cfg.timeout = std::chrono::milliseconds(std::strtol(ms, nullptr, 10));
  }
  if (const char* r = std::getenv("FRAMEGUARD_AUDIT_REDACT"); r && *r == '1') cfg.redact_audit = true;
  return cfg;
}

HttpLlmClient::HttpLlmClient(LlmConfig cfg, AuditSink audit) : cfg_(std::move(cfg)), audit_(std::move(audit)) {
  http::split_url(cfg_.url);
}

std::string decode_completion(std::string_view body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw RemoteError(RemoteError::Kind::MalformedPayload, "completion response is not a JSON object");
  }
  if (j.contains("response") && j["response"].is_string()) return j["response"].get<std::string>();
  if (j.contains("text") && j["text"].is_string()) return j["text"].get<std::string>();
  if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
    const auto& c = j["choices"][0];
    if (c.contains("message") && c["message"].contains("content") && c["message"]["content"].is_string()) {
      return c["message"]["content"].get<std::string>();
    }
    if (c.contains("text") && c["text"].is_string()) return c["text"].get<std::string>();
  }
  throw RemoteError(RemoteError::Kind::MalformedPayload, "completion response carries no generated text");
}

std::string HttpLlmClient::generate(const std::string& prompt) {
  json req = {{"model", cfg_.model},
              {"prompt", prompt},
              {"temperature", cfg_.temperature},
              {"max_tokens", cfg_.max_tokens},
              {"stream", false},
              {"options", {{"temperature", cfg_.temperature}, {"num_predict", cfg_.max_tokens}}}};
  auto redact = [&](const std::string& s) -> json {
    if (!cfg_.redact_audit) return s;
    return json{{"redacted", true}, {"bytes", s.size()}, {"fnv1a", detail::hex64(detail::fnv1a64(s))}};
  };
  std::string body;
  try {
    body = http::post_json(cfg_.url, req.dump(), cfg_.timeout);
  } catch (const RemoteError& e) {
    if (audit_) audit_(json{{"event", "llm_error"}, {"prompt", redact(prompt)}, {"error", e.what()}}.dump());
    throw;
  }
  if (audit_) {
    audit_(json{{"event", "llm_call"}, {"model", cfg_.model}, {"prompt", redact(prompt)}, {"response", redact(body)}}
               .dump());
  }
  return decode_completion(body);
}

// ---------------------------------------------------------------------------
// Moderation

std::vector<std::string> fallback_suggestions(const ModerationContext& ctx, RiskLevel level) {
  std::vector<std::string> out;
  if (level == RiskLevel::Low) return out;
  if (!ctx.health.binary || ctx.health.score < 0.6) {
    out.emplace_back(
        "Address the argument rather than the people involved, and drop dismissive, sarcastic or "
        "sweeping wording.");
  }
  if (ctx.alignment != AlignmentCondition::Match) {
    std::string frame = ctx.article_top_frames.empty()
                            ? std::string("the article's main perspective")
                            : std::string(to_string(ctx.article_top_frames.front().label)) + " perspective";
    out.push_back("Connect your point to the article's " + frame + " before introducing a new angle.");
  }
  out.emplace_back("Keep your core concern, but state it as a specific claim with a reason or example.");
  return out;
}

ModerationOutcome moderate(const ModerationContext& ctx, const RiskAssessment& risk, LlmClient* client) {
  ModerationOutcome out;
  if (risk.level == RiskLevel::Low) {
    out.guidance = {RiskLevel::Low, {}, true};
    return out;
  }

  if (client) {
    const auto prompt = build_prompt(ctx);
    for (int attempt = 1; attempt <= 2; ++attempt) {
      ++out.generation_calls;
      try {
        auto g = parse_guidance(client->generate(prompt));
        out.llm_allow_post = g.allow_post;
        out.llm_override = g.risk_level != risk.level;
        g.allow_post = risk.allow_post;
        if (g.suggestions.empty()) g.suggestions = fallback_suggestions(ctx, risk.level);
        out.guidance = std::move(g);
        return out;
      } catch (const Error& e) {
        out.warnings.push_back("generation attempt " + std::to_string(attempt) + " failed: " + e.what());
        spdlog::warn("moderation: {}", out.warnings.back());
      }
    }
  } else {
    out.warnings.emplace_back("no generation endpoint configured");
  }

  out.degraded = true;
  out.guidance = {risk.level, fallback_suggestions(ctx, risk.level), risk.allow_post};
  return out;
}

}  // namespace frameguard
