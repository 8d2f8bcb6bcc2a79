#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "frameguard/corpus.hpp"
#include "frameguard/framing.hpp"
#include "frameguard/reformulator.hpp"
#include "frameguard/risk.hpp"
#include "frameguard/scoring.hpp"
#include "frameguard/stats/glmm.hpp"
#include "frameguard/stats/inference.hpp"
#include "frameguard/stats/table.hpp"

namespace frameguard {

struct PipelineConfig {
  ScorerConfig health_scorer;
  ScorerConfig frame_scorer;
  AggregationOptions aggregation;
  AlignmentMode alignment_mode = AlignmentMode::PrimaryOnly;
  double health_threshold = 0.5;
  double toxicity_threshold = 0.5;
  // Use gold_health labels when a comment carries one.
  bool prefer_gold_health = true;
  stats::EmmWeighting emm_weighting = stats::EmmWeighting::Equal;
  stats::GlmmOptions glmm;
  // Recorded in the report; the baseline path draws no random numbers.
  std::uint64_t seed = 42;
  // Scoring workers; 0 means hardware concurrency.
  unsigned threads = 0;

  nlohmann::json to_json() const;
};

// Default treatment-coding baselines, used when present in the data.
inline constexpr std::string_view kFrameReference = "Cultural Identity";
inline constexpr std::string_view kAlignmentReference = "Match";
inline constexpr std::string_view kTopicReference = "Abortion";

struct ScoredComment {
  std::string id;
  std::string article_id;
  int depth = 1;
  double health_score = 0.0;
  bool healthy = false;
  bool gold = false;  // health came from the gold label
  FrameLabel frame = FrameLabel::Other;
  AlignmentCondition alignment = AlignmentCondition::Match;
};

struct ScoredCorpus {
  std::vector<FrameAnalysis> articles;  // parallel to corpus.articles()
  std::vector<ScoredComment> comments;  // parallel to corpus.comments()
};

// Scores every article body and comment in parallel. Output is independent of
// the number of workers.
ScoredCorpus score_corpus(const Corpus& corpus, const HealthScorer& health, const FrameScorer& frames,
                          const PipelineConfig& cfg);

// Flat analysis table of top-level comments: health, article_frame,
// frame_condition, topic, article_id, outlet, comment_id.
stats::DataTable top_level_table(const Corpus& corpus, const ScoredCorpus& scored);

// Thread table: mrh, top_health, top_frame, topic, outlet, top_comment_id.
stats::DataTable thread_table(const Corpus& corpus, const ScoredCorpus& scored);

// Sections of the report. Each returns {"status": "ok", ...} or
// {"status": "failed", "error": ...}; they never throw on fit failures.
nlohmann::json rq1_article_frame(const stats::DataTable& top_level, const PipelineConfig& cfg);
nlohmann::json rq1_frame_condition(const stats::DataTable& top_level, const PipelineConfig& cfg);
nlohmann::json rq2_reply_health(const stats::DataTable& threads, const PipelineConfig& cfg);

struct AnalysisReport {
  nlohmann::json body;

  // Stable serialisation: sorted keys, fixed indentation, no timestamps.
  std::string dump() const { return body.dump(2) + "\n"; }
  std::string render_text() const;
};

AnalysisReport analyze_corpus(const Corpus& corpus, const HealthScorer& health, const FrameScorer& frames,
                              const PipelineConfig& cfg = {});
AnalysisReport analyze_corpus(const Corpus& corpus, const PipelineConfig& cfg = {});

// Flat-table entry points (CLI rq1/rq2): analyses over a prepared table.
AnalysisReport analyze_rq1_table(const stats::DataTable& table, const PipelineConfig& cfg = {});
AnalysisReport analyze_rq2_table(const stats::DataTable& table, const PipelineConfig& cfg = {});

// ---------------------------------------------------------------------------
// Single comment moderation

struct ArticleAnalysis {
  std::string id;  // content hash of the text
  std::string text;
  FrameAnalysis frames;
};

std::string analysis_id_for(std::string_view text);

ArticleAnalysis analyze_article(std::string_view text, const FrameScorer& frames,
                                const AggregationOptions& opts = {});

nlohmann::json to_json(const ArticleAnalysis& a);

struct ModerationSettings {
  double health_threshold = 0.5;
  AlignmentMode alignment_mode = AlignmentMode::PrimaryOnly;
  AggregationOptions aggregation;
  const RiskRuleSet* rules = nullptr;  // standard table when null
  // On remote scorer failure, score with the baseline instead of throwing.
  bool baseline_fallback = true;
};

struct ModerationResult {
  HealthScore health;
  FrameAnalysis comment_frames;
  AlignmentCondition alignment = AlignmentCondition::Match;
  RiskAssessment risk;
  ModerationOutcome outcome;
  // A scorer fell back to the baseline.
  bool scorer_degraded = false;
};

// Composes scoring, alignment, the rule engine and the reformulator. The
// returned risk level always equals the rule engine's verdict for the
// returned (health, alignment). Throws RemoteError only when a remote scorer
// fails and baseline_fallback is off.
ModerationResult moderate_comment(const ArticleAnalysis& article, std::string_view comment,
                                  const HealthScorer& health, const FrameScorer& frames, LlmClient* llm,
                                  const ModerationSettings& settings = {});

nlohmann::json to_json(const ModerationResult& r);

}  // namespace frameguard
