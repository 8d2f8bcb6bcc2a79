#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace frameguard {

// Generic frame taxonomy: nine frames plus Other. Declaration order is the
// taxonomy order used for every tie-break.
enum class FrameLabel {
  Economic,
  Morality,
  FairnessEquality,
  LegalityCrime,
  PoliticalPolicies,
  SecurityDefense,
  HealthSafety,
  CulturalIdentity,
  PublicOpinion,
  Other,
};

inline constexpr std::size_t kFrameCount = 10;

inline constexpr std::array<FrameLabel, kFrameCount> kAllFrames = {
    FrameLabel::Economic,          FrameLabel::Morality,
    FrameLabel::FairnessEquality,  FrameLabel::LegalityCrime,
    FrameLabel::PoliticalPolicies, FrameLabel::SecurityDefense,
    FrameLabel::HealthSafety,      FrameLabel::CulturalIdentity,
    FrameLabel::PublicOpinion,     FrameLabel::Other,
};

constexpr std::size_t index_of(FrameLabel f) noexcept { return static_cast<std::size_t>(f); }

// Canonical display string, e.g. "Fairness and Equality".
std::string_view to_string(FrameLabel f) noexcept;

// Case-insensitive. Accepts the canonical string, the enum identifier
// ("FairnessEquality") and the short names used in result tables
// ("Fairness", "Political", "Health", ...).
std::optional<FrameLabel> parse_frame(std::string_view s);

// Throws ValidationError on unknown labels.
FrameLabel parse_frame_or_throw(std::string_view s);

struct SentenceFrame {
  std::string text;
  FrameLabel label = FrameLabel::Other;
  double confidence = 0.0;
};

struct FrameWeight {
  FrameLabel label = FrameLabel::Other;
  double weight = 0.0;

  bool operator==(const FrameWeight&) const = default;
};

struct FrameAnalysis {
  std::vector<SentenceFrame> sentence_frames;
  FrameLabel primary = FrameLabel::Other;
  // Taxonomy order, never contains primary.
  std::vector<FrameLabel> secondaries;
  // Up to five labels, descending weight, ties by taxonomy order.
  std::vector<FrameWeight> top_k;
  // Normalised label mass, indexed by taxonomy order.
  std::array<double, kFrameCount> weights{};

  bool has_secondary(FrameLabel f) const noexcept;
};

struct AggregationOptions {
  double secondary_threshold = 0.10;
  std::size_t top_k = 5;
};

// Confidence-weighted label mass over sentence predictions. Throws
// ValidationError on empty input, negative confidences or zero total mass.
FrameAnalysis aggregate_frames(std::span<const SentenceFrame> sentences,
                               const AggregationOptions& opts = {});
FrameAnalysis aggregate_frames(std::span<const std::pair<FrameLabel, double>> sentences,
                               const AggregationOptions& opts = {});

enum class AlignmentCondition { Match, Selective, Complete };

std::string_view to_string(AlignmentCondition a) noexcept;
std::optional<AlignmentCondition> parse_alignment(std::string_view s);

enum class AlignmentMode {
  // Only the comment's primary frame is compared with the article.
  PrimaryOnly,
  // Match on primary; otherwise Selective if the comment's primary or any of
  // its secondaries appears among the article's frames.
  AnyCommentFrame,
};

AlignmentCondition classify_alignment(FrameLabel comment_primary, const FrameAnalysis& article);
AlignmentCondition classify_alignment(const FrameAnalysis& comment, const FrameAnalysis& article,
                                      AlignmentMode mode = AlignmentMode::PrimaryOnly);

}  // namespace frameguard
