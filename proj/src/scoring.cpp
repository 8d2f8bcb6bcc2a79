#include "frameguard/scoring.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <unordered_map>

#include <json.hpp>

#include "frameguard/detail/text.hpp"
#include "frameguard/error.hpp"
#include "frameguard/http.hpp"

namespace frameguard {

using nlohmann::json;

HealthScore make_health_score(double score, double threshold) {
  if (!(score >= 0.0 && score <= 1.0)) {
    throw ValidationError("health score must lie in [0,1], got " + std::to_string(score));
  }
  return {score, score >= threshold};
}

void ScorerConfig::validate() const {
  if (kind == Kind::Remote && (!endpoint || endpoint->empty())) {
    throw ValidationError("remote scorer requires an endpoint");
  }
  if (kind == Kind::Baseline && endpoint) {
    throw ValidationError("baseline scorer must not carry an endpoint");
  }
  if (batch_size == 0) throw ValidationError("batch_size must be positive");
  if (timeout.count() <= 0) throw ValidationError("timeout must be positive");
}

ScorerConfig ScorerConfig::remote(std::string url, std::chrono::milliseconds timeout) {
  ScorerConfig cfg;
  cfg.kind = Kind::Remote;
  cfg.endpoint = std::move(url);
  cfg.timeout = timeout;
  return cfg;
}

ScorerConfig ScorerConfig::from_env(const char* url_variable) {
  const char* url = std::getenv(url_variable);
  if (!url || !*url) return baseline();
  ScorerConfig cfg = remote(url);
  if (const char* ms = std::getenv("FRAMEGUARD_TIMEOUT_MS"); ms && *ms) {
    cfg.timeout = std::chrono::milliseconds(std::strtol(ms, nullptr, 10));
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Lexicon

namespace {

constexpr std::array<LexiconEntry, 60> kHealthLexicon = {{
    // hostility
    {"idiot", -2.0},
    {"idiots", -2.0},
    {"moron", -2.0},
    {"morons", -2.0},
    {"stupid", -1.5},
    {"fool", -1.0},
    {"fools", -1.0},
    {"pathetic", -1.2},
    {"disgusting", -1.2},
    {"garbage", -1.0},
    {"trash", -1.0},
    {"shut up", -2.0},
    {"liar", -1.5},
    {"liars", -1.5},
    {"lies", -1.0},
    {"hate", -0.8},
    {"ridiculous", -0.8},
    {"clown", -1.2},
    {"brainwashed", -1.5},
    {"sheeple", -1.5},
    // dismissive
    {"did not read", -1.2},
    {"didn't read", -1.2},
    {"who cares", -1.2},
    {"who still reads", -1.2},
    {"stopped reading", -1.0},
    {"get with the program", -1.5},
    {"nonsense", -0.8},
    {"whatever", -0.5},
    {"give me a break", -1.0},
    {"wake up", -0.8},
    // sweeping generalisation / stereotypes
    {"all of them", -0.5},
    {"always", -0.3},
    {"never", -0.3},
    {"everyone knows", -0.8},
    {"typical", -0.6},
    {"these people", -1.0},
    {"you people", -1.2},
    {"fetish", -0.8},
    // sarcasm / condescension
    {"yeah right", -1.0},
    {"oh please", -1.0},
    {"good lord", -0.6},
    {"re-education camp", -1.2},
    {"surprise surprise", -1.0},
    {"how convenient", -0.8},
    {"wonder where", -0.6},
    // constructive engagement
    {"i think", 0.3},
    {"i believe", 0.3},
    {"in my opinion", 0.3},
    {"evidence", 0.4},
    {"research", 0.3},
    {"data", 0.3},
    {"agree", 0.3},
    {"thank", 0.5},
    {"thanks", 0.5},
    {"respectfully", 0.6},
    {"perhaps", 0.3},
    {"consider", 0.3},
    {"good point", 0.6},
    {"fair point", 0.6},
    {"for example", 0.4},
}};

struct CompiledPhrase {
  std::vector<std::string> tokens;
  double weight;
};

const std::vector<CompiledPhrase>& compiled_lexicon() {
  static const std::vector<CompiledPhrase> compiled = [] {
    std::vector<CompiledPhrase> out;
    for (const auto& e : kHealthLexicon) out.push_back({word_tokens(e.phrase), e.weight});
    return out;
  }();
  return compiled;
}

std::size_t count_phrase(const std::vector<std::string>& tokens, const std::vector<std::string>& phrase) {
  if (phrase.empty() || tokens.size() < phrase.size()) return 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i + phrase.size() <= tokens.size(); ++i) {
    if (std::equal(phrase.begin(), phrase.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) ++n;
  }
  return n;
}

double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

std::span<const LexiconEntry> health_lexicon() noexcept { return kHealthLexicon; }

std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    while (!cur.empty() && cur.front() == '\'') cur.erase(cur.begin());
    while (!cur.empty() && cur.back() == '\'') cur.pop_back();
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (c == 0xE2 && i + 2 < text.size() && static_cast<unsigned char>(text[i + 1]) == 0x80 &&
        (static_cast<unsigned char>(text[i + 2]) == 0x99 || static_cast<unsigned char>(text[i + 2]) == 0x98)) {
      cur += '\'';
      i += 2;
    } else if (std::isalnum(c) || c == '\'') {
      cur += static_cast<char>(std::tolower(c));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

double baseline_health_logit(std::string_view text) {
  const auto tokens = word_tokens(text);
  double logit = std::log(kBaselineHealthPrior / (1.0 - kBaselineHealthPrior));
  for (const auto& p : compiled_lexicon()) {
    if (auto n = count_phrase(tokens, p.tokens)) logit += p.weight * static_cast<double>(n);
  }
  return logit;
}

double BaselineHealthScorer::score(std::string_view text) const {
  return logistic(baseline_health_logit(text));
}

std::vector<double> BaselineHealthScorer::score_batch(std::span<const std::string> texts) const {
  std::vector<double> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(score(t));
  return out;
}

// ---------------------------------------------------------------------------
// Remote payloads

std::vector<double> decode_health_payload(std::string_view body, std::size_t expected) {
  auto malformed = [&](const std::string& why) {
    return RemoteError(RemoteError::Kind::MalformedPayload, "health payload: " + why);
  };
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception&) {
    throw malformed("not JSON");
  }
  if (!j.is_object() || !j.contains("scores") || !j["scores"].is_array()) {
    throw malformed("missing 'scores' array");
  }
  const auto& arr = j["scores"];
  if (arr.size() != expected) {
    throw malformed("expected " + std::to_string(expected) + " scores, got " + std::to_string(arr.size()));
  }
  std::vector<double> out;
  out.reserve(expected);
  for (const auto& v : arr) {
    if (!v.is_number()) throw malformed("non-numeric score");
    double s = v.get<double>();
    if (!(s >= 0.0 && s <= 1.0)) throw malformed("score outside [0,1]");
    out.push_back(s);
  }
  return out;
}

std::vector<SentenceFrame> decode_frame_payload(std::string_view body,
                                                std::span<const std::string> sentences) {
  auto malformed = [&](const std::string& why) {
    return RemoteError(RemoteError::Kind::MalformedPayload, "frame payload: " + why);
  };
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception&) {
    throw malformed("not JSON");
  }
  if (!j.is_object() || !j.contains("frames") || !j["frames"].is_array()) {
    throw malformed("missing 'frames' array");
  }
  const auto& arr = j["frames"];
  if (arr.size() != sentences.size()) {
    throw malformed("expected " + std::to_string(sentences.size()) + " sentences, got " +
                    std::to_string(arr.size()));
  }
  std::vector<SentenceFrame> out;
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& cands = arr[i];
    if (!cands.is_array() || cands.empty()) throw malformed("sentence without frame candidates");
    SentenceFrame best{sentences[i], FrameLabel::Other, -1.0};
    for (const auto& c : cands) {
      if (!c.is_object() || !c.contains("label") || !c["label"].is_string() || !c.contains("confidence") ||
          !c["confidence"].is_number()) {
        throw malformed("candidate needs string 'label' and numeric 'confidence'");
      }
      auto label = parse_frame(c["label"].get<std::string>());
      if (!label) throw malformed("unknown frame label '" + c["label"].get<std::string>() + "'");
      double conf = c["confidence"].get<double>();
      if (!(conf >= 0.0 && conf <= 1.0)) throw malformed("confidence outside [0,1]");
      if (conf > best.confidence || (conf == best.confidence && index_of(*label) < index_of(best.label))) {
        best.label = *label;
        best.confidence = conf;
      }
    }
    out.push_back(std::move(best));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Remote scorers

RemoteHealthScorer::RemoteHealthScorer(ScorerConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  if (cfg_.kind != ScorerConfig::Kind::Remote) throw ValidationError("RemoteHealthScorer needs a remote config");
}

std::vector<double> RemoteHealthScorer::score_batch(std::span<const std::string> texts) const {
  std::vector<double> out;
  out.reserve(texts.size());
  for (std::size_t start = 0; start < texts.size(); start += cfg_.batch_size) {
    auto chunk = texts.subspan(start, std::min(cfg_.batch_size, texts.size() - start));
    json req = {{"texts", json::array()}};
    for (const auto& t : chunk) req["texts"].push_back(t);
    auto body = http::post_json(*cfg_.endpoint, req.dump(), cfg_.timeout);
    auto scores = decode_health_payload(body, chunk.size());
    out.insert(out.end(), scores.begin(), scores.end());
  }
  return out;
}

std::unique_ptr<HealthScorer> make_health_scorer(const ScorerConfig& cfg) {
  cfg.validate();
  if (cfg.kind == ScorerConfig::Kind::Remote) return std::make_unique<RemoteHealthScorer>(cfg);
  return std::make_unique<BaselineHealthScorer>();
}

HealthScore score_health(std::string_view text, const HealthScorer& scorer, double threshold) {
  std::string copy(text);
  auto scores = scorer.score_batch(std::span<const std::string>(&copy, 1));
  if (scores.size() != 1) {
    throw RemoteError(RemoteError::Kind::MalformedPayload, "scorer returned a wrong number of scores");
  }
  return make_health_score(scores[0], threshold);
}

HealthScore score_health(std::string_view text, const ScorerConfig& cfg) {
  auto scorer = make_health_scorer(cfg);
  return score_health(text, *scorer, cfg.threshold);
}

// ---------------------------------------------------------------------------
// Frame keywords

namespace {

constexpr std::string_view kEconomic[] = {
    "tax",   "taxes",  "taxpayer", "taxpayers", "economy",      "economic", "jobs",     "job",
    "cost",  "costs",  "money",    "budget",    "spending",     "wages",    "market",   "markets",
    "trade", "price",  "prices",   "unemployment", "business",  "funding",  "dollars",  "income"};
constexpr std::string_view kMorality[] = {
    "moral", "morality", "immoral", "ethical", "ethics", "values", "god",  "religious",
    "religion", "sin",   "conscience", "evil", "righteous", "faith", "sinful", "virtue"};
constexpr std::string_view kFairness[] = {
    "fair",   "unfair",  "fairness", "equality",  "inequality", "equal",
    "rights", "discrimination", "justice", "injustice", "privilege", "bias"};
constexpr std::string_view kLegality[] = {
    "law",    "laws",   "legal",     "illegal",      "court",   "courts",     "crime",  "crimes",
    "criminal", "police", "judge",   "constitution", "constitutional", "unconstitutional",
    "lawsuit", "prosecution", "arrest", "prison"};
constexpr std::string_view kPolitical[] = {
    "president", "congress", "republicans", "democrats", "republican", "democrat", "election",
    "vote",      "policy",   "policies",    "government", "senate",    "politicians", "political",
    "party",     "administration", "legislation", "bill", "campaign", "parliament"};
constexpr std::string_view kSecurity[] = {
    "security", "military", "war",     "defense", "defence", "terrorism", "terrorist",
    "attack",   "army",     "weapons", "troops",  "threat",  "nuclear",   "border"};
constexpr std::string_view kHealth[] = {
    "health",  "healthcare", "disease", "medical", "doctors", "doctor", "hospital", "hospitals",
    "safety",  "patients",   "vaccine", "illness", "sick",    "sicker", "deaths",   "mental"};
constexpr std::string_view kCultural[] = {
    "culture", "cultural", "identity", "tradition", "traditions", "heritage",
    "community", "immigrants", "language", "history", "family", "families", "national"};
constexpr std::string_view kPublicOpinion[] = {
    "poll",     "polls",  "polling",  "survey",  "surveys", "protest",
    "protests", "protesters", "popular", "sentiment", "backlash", "outrage"};

const std::unordered_map<std::string_view, FrameLabel>& keyword_index() {
  static const auto index = [] {
    std::unordered_map<std::string_view, FrameLabel> m;
    for (FrameLabel f : kAllFrames) {
      for (auto w : frame_keywords(f)) m.emplace(w, f);
    }
    return m;
  }();
  return index;
}

}  // namespace

std::span<const std::string_view> frame_keywords(FrameLabel f) noexcept {
  switch (f) {
    case FrameLabel::Economic: return kEconomic;
    case FrameLabel::Morality: return kMorality;
    case FrameLabel::FairnessEquality: return kFairness;
    case FrameLabel::LegalityCrime: return kLegality;
    case FrameLabel::PoliticalPolicies: return kPolitical;
    case FrameLabel::SecurityDefense: return kSecurity;
    case FrameLabel::HealthSafety: return kHealth;
    case FrameLabel::CulturalIdentity: return kCultural;
    case FrameLabel::PublicOpinion: return kPublicOpinion;
    case FrameLabel::Other: return {};
  }
  return {};
}

SentenceFrame baseline_sentence_frame(std::string_view sentence) {
  std::array<int, kFrameCount> hits{};
  int total = 0;
  const auto& index = keyword_index();
  for (const auto& tok : word_tokens(sentence)) {
    auto it = index.find(tok);
    if (it != index.end()) {
      ++hits[index_of(it->second)];
      ++total;
    }
  }
  SentenceFrame out{std::string(sentence), FrameLabel::Other, kOtherFloorConfidence};
  if (total == 0) return out;
  std::size_t best = 0;
  for (std::size_t i = 1; i < kFrameCount; ++i) {
    if (hits[i] > hits[best]) best = i;
  }
  const double h = hits[best];
  out.label = kAllFrames[best];
  out.confidence = (1.0 - std::exp(-h)) * h / total;
  return out;
}

std::vector<SentenceFrame> BaselineFrameScorer::score_sentences(std::span<const std::string> sentences) const {
  std::vector<SentenceFrame> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(baseline_sentence_frame(s));
  return out;
}

RemoteFrameScorer::RemoteFrameScorer(ScorerConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  if (cfg_.kind != ScorerConfig::Kind::Remote) throw ValidationError("RemoteFrameScorer needs a remote config");
}

std::vector<SentenceFrame> RemoteFrameScorer::score_sentences(std::span<const std::string> sentences) const {
  std::vector<SentenceFrame> out;
  out.reserve(sentences.size());
  for (std::size_t start = 0; start < sentences.size(); start += cfg_.batch_size) {
    auto chunk = sentences.subspan(start, std::min(cfg_.batch_size, sentences.size() - start));
    json req = {{"texts", json::array()}};
    for (const auto& t : chunk) req["texts"].push_back(t);
    auto body = http::post_json(*cfg_.endpoint, req.dump(), cfg_.timeout);
    auto frames = decode_frame_payload(body, chunk);
    out.insert(out.end(), std::make_move_iterator(frames.begin()), std::make_move_iterator(frames.end()));
  }
  return out;
}

std::unique_ptr<FrameScorer> make_frame_scorer(const ScorerConfig& cfg) {
  cfg.validate();
  if (cfg.kind == ScorerConfig::Kind::Remote) return std::make_unique<RemoteFrameScorer>(cfg);
  return std::make_unique<BaselineFrameScorer>();
}

FrameAnalysis score_frames(std::string_view text, const FrameScorer& scorer, const AggregationOptions& opts) {
  auto sentences = split_sentences(text);
  if (sentences.empty()) {
    SentenceFrame fallback{"", FrameLabel::Other, kOtherFloorConfidence};
    return aggregate_frames(std::span<const SentenceFrame>(&fallback, 1), opts);
  }
  auto frames = scorer.score_sentences(sentences);
  if (frames.size() != sentences.size()) {
    throw RemoteError(RemoteError::Kind::MalformedPayload, "frame scorer returned a wrong number of sentences");
  }
  return aggregate_frames(std::span<const SentenceFrame>(frames), opts);
}

FrameAnalysis score_frames(std::string_view text, const ScorerConfig& cfg, const AggregationOptions& opts) {
  auto scorer = make_frame_scorer(cfg);
  return score_frames(text, *scorer, opts);
}

}  // namespace frameguard
