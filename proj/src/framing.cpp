#include "frameguard/framing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "frameguard/detail/text.hpp"
#include "frameguard/error.hpp"

namespace frameguard {

namespace {

constexpr std::array<std::string_view, kFrameCount> kCanonical = {
    "Economic",          "Morality",           "Fairness and Equality", "Legality and Crime",
    "Political and Policies", "Security and Defense", "Health and Safety",  "Cultural Identity",
    "Public Opinion",    "Other",
};

constexpr std::array<std::string_view, kFrameCount> kIdentifiers = {
    "Economic",        "Morality",          "FairnessEquality", "LegalityCrime", "PoliticalPolicies",
    "SecurityDefense", "HealthSafety",      "CulturalIdentity", "PublicOpinion", "Other",
};

constexpr std::array<std::string_view, kFrameCount> kShort = {
    "Economic", "Morality", "Fairness", "Legality", "Political",
    "Security", "Health",   "Cultural", "Public",   "Other",
};

}  // namespace

std::string_view to_string(FrameLabel f) noexcept { return kCanonical[index_of(f)]; }

std::optional<FrameLabel> parse_frame(std::string_view s) {
  s = detail::trim(s);
  for (std::size_t i = 0; i < kFrameCount; ++i) {
    if (detail::iequals(s, kCanonical[i]) || detail::iequals(s, kIdentifiers[i]) ||
        detail::iequals(s, kShort[i])) {
      return kAllFrames[i];
    }
  }
  // "Political & Policies" style spelling.
  std::string normalized;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '&') {
      normalized += "and";
    } else {
      normalized += s[i];
    }
  }
  if (normalized != s) {
    for (std::size_t i = 0; i < kFrameCount; ++i) {
      if (detail::iequals(normalized, kCanonical[i])) return kAllFrames[i];
    }
  }
  return std::nullopt;
}

FrameLabel parse_frame_or_throw(std::string_view s) {
  if (auto f = parse_frame(s)) return *f;
  throw ValidationError("unknown frame label '" + std::string(s) + "'");
}

bool FrameAnalysis::has_secondary(FrameLabel f) const noexcept {
  return std::find(secondaries.begin(), secondaries.end(), f) != secondaries.end();
}

FrameAnalysis aggregate_frames(std::span<const SentenceFrame> sentences,
                               const AggregationOptions& opts) {
  if (sentences.empty()) throw ValidationError("aggregate_frames: no sentence predictions");

  std::array<double, kFrameCount> mass{};
  double total = 0.0;
  for (const auto& s : sentences) {
    if (!(s.confidence >= 0.0) || !std::isfinite(s.confidence)) {
      throw ValidationError("aggregate_frames: confidence must be finite and non-negative");
    }
    mass[index_of(s.label)] += s.confidence;
    total += s.confidence;
  }
  if (total <= 0.0) throw ValidationError("aggregate_frames: total confidence is zero");

  FrameAnalysis out;
  out.sentence_frames.assign(sentences.begin(), sentences.end());
  for (std::size_t i = 0; i < kFrameCount; ++i) out.weights[i] = mass[i] / total;

  // Strict comparison keeps the earliest label on ties.
  std::size_t best = 0;
  for (std::size_t i = 1; i < kFrameCount; ++i) {
    if (out.weights[i] > out.weights[best]) best = i;
  }
  out.primary = kAllFrames[best];

  for (std::size_t i = 0; i < kFrameCount; ++i) {
    if (i != best && mass[i] > 0.0 && out.weights[i] >= opts.secondary_threshold) {
      out.secondaries.push_back(kAllFrames[i]);
    }
  }

  std::vector<std::size_t> order(kFrameCount);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return out.weights[a] > out.weights[b]; });
  for (std::size_t i : order) {
    if (out.top_k.size() >= opts.top_k || mass[i] <= 0.0) break;
    out.top_k.push_back({kAllFrames[i], out.weights[i]});
  }
  return out;
}

FrameAnalysis aggregate_frames(std::span<const std::pair<FrameLabel, double>> sentences,
                               const AggregationOptions& opts) {
  std::vector<SentenceFrame> converted;
  converted.reserve(sentences.size());
  for (const auto& [label, conf] : sentences) converted.push_back({{}, label, conf});
  return aggregate_frames(std::span<const SentenceFrame>(converted), opts);
}

std::string_view to_string(AlignmentCondition a) noexcept {
  switch (a) {
    case AlignmentCondition::Match: return "Match";
    case AlignmentCondition::Selective: return "Selective";
    case AlignmentCondition::Complete: return "Complete";
  }
  return "Complete";
}

std::optional<AlignmentCondition> parse_alignment(std::string_view s) {
  s = detail::trim(s);
  if (detail::iequals(s, "match")) return AlignmentCondition::Match;
  if (detail::iequals(s, "selective")) return AlignmentCondition::Selective;
  if (detail::iequals(s, "complete")) return AlignmentCondition::Complete;
  return std::nullopt;
}

AlignmentCondition classify_alignment(FrameLabel comment_primary, const FrameAnalysis& article) {
  if (comment_primary == article.primary) return AlignmentCondition::Match;
  if (article.has_secondary(comment_primary)) return AlignmentCondition::Selective;
  return AlignmentCondition::Complete;
}

AlignmentCondition classify_alignment(const FrameAnalysis& comment, const FrameAnalysis& article,
                                      AlignmentMode mode) {
  auto primary_only = classify_alignment(comment.primary, article);
  if (mode == AlignmentMode::PrimaryOnly || primary_only != AlignmentCondition::Complete) {
    return primary_only;
  }
  for (FrameLabel f : comment.secondaries) {
    if (f == article.primary || article.has_secondary(f)) return AlignmentCondition::Selective;
  }
  return AlignmentCondition::Complete;
}

}  // namespace frameguard
