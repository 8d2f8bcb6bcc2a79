#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "frameguard/framing.hpp"

namespace frameguard {

// ---------------------------------------------------------------------------
// Sentence segmentation

// Splits at '.', '!' or '?' (plus any closing quotes/brackets) followed by
// whitespace and an upper-case letter or an opening quote. Known
// abbreviations ("Mr.", "U.S.", "e.g.") and single-letter initials never end
// a sentence. Blank lines always end one. Sentences are trimmed and never
// empty.
std::vector<std::string> split_sentences(std::string_view text);

// ---------------------------------------------------------------------------
// Health

struct HealthScore {
  double score = 0.0;  // P(healthy)
  bool binary = false;

  bool operator==(const HealthScore&) const = default;
};

HealthScore make_health_score(double score, double threshold = 0.5);

struct ScorerConfig {
  enum class Kind { Baseline, Remote };

  Kind kind = Kind::Baseline;
  std::optional<std::string> endpoint;
  std::chrono::milliseconds timeout{5000};
  std::size_t batch_size = 32;
  double threshold = 0.5;

  // Throws ValidationError unless endpoint is present exactly when kind is Remote.
  void validate() const;

  static ScorerConfig baseline() { return {}; }
  static ScorerConfig remote(std::string url, std::chrono::milliseconds timeout = std::chrono::milliseconds(5000));
  // Remote when the variable is set and non-empty, baseline otherwise.
  static ScorerConfig from_env(const char* url_variable);
};

struct LexiconEntry {
  std::string_view phrase;
  double weight;
};

// Signed phrase weights of the baseline health scorer. Negative entries mark
// hostility, dismissiveness, sweeping generalisation and sarcasm; positive
// entries mark constructive engagement.
std::span<const LexiconEntry> health_lexicon() noexcept;

// Healthy prior used when no lexicon phrase fires.
inline constexpr double kBaselineHealthPrior = 0.75;

// Lower-cased word tokens ([a-z0-9']+, curly apostrophes folded to ').
std::vector<std::string> word_tokens(std::string_view text);

// logit(prior) + sum over lexicon phrases of weight * occurrences.
double baseline_health_logit(std::string_view text);

class HealthScorer {
 public:
  virtual ~HealthScorer() = default;
  // Exactly one score per input text, in input order.
  virtual std::vector<double> score_batch(std::span<const std::string> texts) const = 0;
};

class BaselineHealthScorer final : public HealthScorer {
 public:
  std::vector<double> score_batch(std::span<const std::string> texts) const override;
  double score(std::string_view text) const;
};

// POST {"texts": [...]} -> {"scores": [...]}.
class RemoteHealthScorer final : public HealthScorer {
 public:
  explicit RemoteHealthScorer(ScorerConfig cfg);
  std::vector<double> score_batch(std::span<const std::string> texts) const override;

 private:
  ScorerConfig cfg_;
};

std::unique_ptr<HealthScorer> make_health_scorer(const ScorerConfig& cfg);

HealthScore score_health(std::string_view text, const ScorerConfig& cfg);
HealthScore score_health(std::string_view text, const HealthScorer& scorer, double threshold = 0.5);

// ---------------------------------------------------------------------------
// Frames

// Baseline keyword lists, one list per frame except Other. A keyword belongs
// to exactly one frame.
std::span<const std::string_view> frame_keywords(FrameLabel f) noexcept;

// Confidence assigned to the Other fallback when a sentence has no keyword.
inline constexpr double kOtherFloorConfidence = 0.2;

// Baseline sentence prediction: the frame with most keyword hits (taxonomy
// order on ties) with confidence (1 - exp(-h_best)) * h_best / h_total, or
// (Other, kOtherFloorConfidence) without hits.
SentenceFrame baseline_sentence_frame(std::string_view sentence);

class FrameScorer {
 public:
  virtual ~FrameScorer() = default;
  // One (label, confidence) per sentence, in order.
  virtual std::vector<SentenceFrame> score_sentences(std::span<const std::string> sentences) const = 0;
};

class BaselineFrameScorer final : public FrameScorer {
 public:
  std::vector<SentenceFrame> score_sentences(std::span<const std::string> sentences) const override;
};

// POST {"texts": [sentences]} -> {"frames": [[{"label", "confidence"}, ...], ...]}.
// Each sentence takes its highest-confidence candidate (taxonomy order on ties).
class RemoteFrameScorer final : public FrameScorer {
 public:
  explicit RemoteFrameScorer(ScorerConfig cfg);
  std::vector<SentenceFrame> score_sentences(std::span<const std::string> sentences) const override;

 private:
  ScorerConfig cfg_;
};

std::unique_ptr<FrameScorer> make_frame_scorer(const ScorerConfig& cfg);

// Segments the text, scores each sentence and aggregates. Text without any
// sentence is analysed as a single (Other, floor) sentence.
FrameAnalysis score_frames(std::string_view text, const FrameScorer& scorer,
                           const AggregationOptions& opts = {});
FrameAnalysis score_frames(std::string_view text, const ScorerConfig& cfg,
                           const AggregationOptions& opts = {});

// Decoders for the remote wire payloads, exposed for tests. Throw RemoteError
// (MalformedPayload) when the payload does not match `expected` items.
std::vector<double> decode_health_payload(std::string_view body, std::size_t expected);
std::vector<SentenceFrame> decode_frame_payload(std::string_view body,
                                                std::span<const std::string> sentences);

}  // namespace frameguard
