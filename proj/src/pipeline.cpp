#include "frameguard/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <set>
#include <thread>

#include <spdlog/spdlog.h>

#include "frameguard/detail/text.hpp"
#include "frameguard/error.hpp"
#include "frameguard/stats/agreement.hpp"
#include "frameguard/stats/format.hpp"
#include "frameguard/stats/ols.hpp"
#include "frameguard/stats/report.hpp"
#include "frameguard/stats/threads.hpp"

namespace frameguard {

using nlohmann::json;

namespace {

std::string_view kind_name(ScorerConfig::Kind k) { return k == ScorerConfig::Kind::Baseline ? "baseline" : "remote"; }

json scorer_json(const ScorerConfig& c) {
  json j{{"kind", kind_name(c.kind)}, {"threshold", c.threshold}, {"batch_size", c.batch_size},
         {"timeout_ms", c.timeout.count()}};
  j["endpoint"] = c.endpoint ? json(*c.endpoint) : json(nullptr);
  return j;
}

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<std::string> distinct(const std::vector<std::string>& v) {
  std::set<std::string> s(v.begin(), v.end());
  return {s.begin(), s.end()};
}

// The default reference when it occurs, otherwise the first sorted level.
std::string pick_reference(const std::vector<std::string>& levels, std::string_view preferred) {
  for (const auto& l : levels) {
    if (l == preferred) return l;
  }
  return levels.front();
}

json failed(const std::string& formula, const std::exception& e) {
  return {{"status", "failed"}, {"formula", formula}, {"error", e.what()}};
}

struct FactorPlan {
  std::vector<stats::FactorSpec> factors;
  json references = json::object();
  std::vector<std::string> dropped;
};

// Keeps factors with at least two observed levels; the focal factor must have them.
FactorPlan plan_factors(const stats::DataTable& t, const std::vector<std::pair<std::string, std::string_view>>& wanted,
                        const std::string& focal) {
  FactorPlan plan;
  for (const auto& [name, preferred] : wanted) {
    const auto levels = distinct(t.column(name));
    if (levels.size() < 2) {
      if (name == focal) throw ValidationError("factor '" + name + "' has fewer than two observed levels");
      plan.dropped.push_back(name);
      continue;
    }
    const auto ref = pick_reference(levels, preferred);
    plan.references[name] = ref;
    stats::FactorSpec spec{name, ref, {}};
    if (name == "frame_condition") {
      for (auto a : {AlignmentCondition::Match, AlignmentCondition::Selective, AlignmentCondition::Complete}) {
        spec.order.emplace_back(to_string(a));
      }
    }
    plan.factors.push_back(std::move(spec));
  }
  return plan;
}

std::string join_terms(const std::vector<stats::FactorSpec>& f, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < f.size(); ++i) out += (i ? sep : "") + f[i].name;
  return out;
}

json glmm_section(const stats::DataTable& t, const std::string& focal, std::string_view focal_ref,
                  const PipelineConfig& cfg) {
  std::string formula = "health ~ " + focal + " + topic + (1 | article_id)";
  try {
    if (t.rows() == 0) throw ValidationError("no top-level comments");
    auto plan = plan_factors(t, {{focal, focal_ref}, {"topic", kTopicReference}}, focal);
    formula = "health ~ " + join_terms(plan.factors, " + ") + " + (1 | article_id)";
    stats::ModelSpec spec{"health", plan.factors, {}, "article_id"};
    const auto fit = stats::fit_glmm_logit(spec, t, cfg.glmm);
    const auto view = stats::view_of(fit);

    json s{{"status", "ok"}, {"formula", formula}, {"reference_levels", plan.references}};
    if (!plan.dropped.empty()) s["dropped_factors"] = plan.dropped;
    s["fit"] = stats::to_json(fit);
    json wald = json::object();
    for (const auto& f : plan.factors) wald[f.name] = stats::to_json(stats::wald_type2(view, f.name));
    s["wald"] = wald;
    const auto emm = stats::emmeans(view, focal, cfg.emm_weighting);
    s["emmeans"] = stats::to_json(emm);
    s["pairwise"] = stats::to_json(stats::pairwise_or(emm, view));
    if (!fit.converged) spdlog::warn("{}: GLMM did not converge (gradient {:.3g})", formula, fit.gradient_norm);
    return s;
  } catch (const Error& e) {
    spdlog::warn("{}: {}", formula, e.what());
    return failed(formula, e);
  }
}

}  // namespace

json PipelineConfig::to_json() const {
  json j;
  j["health_scorer"] = scorer_json(health_scorer);
  j["frame_scorer"] = scorer_json(frame_scorer);
  j["secondary_threshold"] = aggregation.secondary_threshold;
  j["top_k"] = aggregation.top_k;
  j["alignment_mode"] = alignment_mode == AlignmentMode::PrimaryOnly ? "primary_only" : "any_comment_frame";
  j["health_threshold"] = health_threshold;
  j["toxicity_threshold"] = toxicity_threshold;
  j["prefer_gold_health"] = prefer_gold_health;
  j["emm_weighting"] = stats::to_string(emm_weighting);
  j["seed"] = seed;
  j["glmm"] = {{"estimator", "laplace"},
               {"random_effects", "intercept per article"},
               {"optimizer", "bfgs"},
               {"grad_tol", glmm.grad_tol},
               {"max_iter", glmm.max_iter},
               {"init_sigma2", glmm.init_sigma2},
               {"init_beta", "logistic"}};
  j["pairwise_adjustment"] = "tukey (studentized range, infinite df)";
  j["coding"] = "treatment";
  return j;
}

ScoredCorpus score_corpus(const Corpus& corpus, const HealthScorer& health, const FrameScorer& frames,
                          const PipelineConfig& cfg) {
  const auto& articles = corpus.articles();
  const auto& comments = corpus.comments();
  ScoredCorpus out;
  out.articles.resize(articles.size());
  out.comments.resize(comments.size());

  parallel_for(articles.size(), cfg.threads, [&](std::size_t i) {
    out.articles[i] = score_frames(articles[i].body, frames, cfg.aggregation);
  });

  std::unordered_map<std::string, std::size_t> article_pos;
  for (std::size_t i = 0; i < articles.size(); ++i) article_pos.emplace(articles[i].id, i);

  // Health in batches; a batch maps to a contiguous slice of comments.
  const std::size_t batch = std::max<std::size_t>(cfg.health_scorer.batch_size, 1);
  const std::size_t n_batches = (comments.size() + batch - 1) / batch;
  std::vector<double> scores(comments.size());
  parallel_for(n_batches, cfg.threads, [&](std::size_t b) {
    const std::size_t lo = b * batch, hi = std::min(comments.size(), lo + batch);
    std::vector<std::string> texts;
    texts.reserve(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) texts.push_back(comments[i].body);
    const auto s = health.score_batch(texts);
    std::copy(s.begin(), s.end(), scores.begin() + static_cast<std::ptrdiff_t>(lo));
  });

  parallel_for(comments.size(), cfg.threads, [&](std::size_t i) {
    const Comment& c = comments[i];
    ScoredComment& sc = out.comments[i];
    sc.id = c.id;
    sc.article_id = c.article_id;
    sc.depth = c.depth;
    sc.health_score = scores[i];
    if (cfg.prefer_gold_health && c.gold_health) {
      sc.healthy = *c.gold_health;
      sc.gold = true;
    } else {
      sc.healthy = make_health_score(scores[i], cfg.health_threshold).binary;
    }
    const FrameAnalysis cf = score_frames(c.body, frames, cfg.aggregation);
    sc.frame = cf.primary;
    sc.alignment = classify_alignment(cf, out.articles[article_pos.at(c.article_id)], cfg.alignment_mode);
  });
  return out;
}

stats::DataTable top_level_table(const Corpus& corpus, const ScoredCorpus& scored) {
  std::vector<std::string> health, frame, condition, topic, article, outlet, id;
  std::unordered_map<std::string, std::size_t> article_pos;
  for (std::size_t i = 0; i < corpus.articles().size(); ++i) article_pos.emplace(corpus.articles()[i].id, i);
  for (const auto& c : scored.comments) {
    if (c.depth != 1) continue;
    const std::size_t a = article_pos.at(c.article_id);
    health.push_back(c.healthy ? "1" : "0");
    frame.emplace_back(to_string(scored.articles[a].primary));
    condition.emplace_back(to_string(c.alignment));
    topic.push_back(corpus.articles()[a].topic);
    article.push_back(c.article_id);
    outlet.emplace_back(to_string(corpus.articles()[a].outlet));
    id.push_back(c.id);
  }
  stats::DataTable t;
  t.add_column("health", std::move(health));
  t.add_column("article_frame", std::move(frame));
  t.add_column("frame_condition", std::move(condition));
  t.add_column("topic", std::move(topic));
  t.add_column("article_id", std::move(article));
  t.add_column("outlet", std::move(outlet));
  t.add_column("comment_id", std::move(id));
  return t;
}

stats::DataTable thread_table(const Corpus& corpus, const ScoredCorpus& scored) {
  std::unordered_map<std::string, bool> health;
  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < scored.comments.size(); ++i) {
    health.emplace(scored.comments[i].id, scored.comments[i].healthy);
    pos.emplace(scored.comments[i].id, i);
  }
  const auto rows = stats::thread_stats(corpus, health);
  std::vector<std::string> mrh, top_health, top_frame, topic, outlet, id;
  for (const auto& r : rows) {
    const auto& top = scored.comments[pos.at(r.top_comment_id)];
    const Article* a = corpus.find_article(top.article_id);
    mrh.push_back(json(r.mean_reply_health).dump());
    top_health.emplace_back(top.healthy ? "healthy" : "unhealthy");
    top_frame.emplace_back(to_string(top.frame));
    topic.push_back(a->topic);
    outlet.emplace_back(to_string(a->outlet));
    id.push_back(r.top_comment_id);
  }
  stats::DataTable t;
  t.add_column("mrh", std::move(mrh));
  t.add_column("top_health", std::move(top_health));
  t.add_column("top_frame", std::move(top_frame));
  t.add_column("topic", std::move(topic));
  t.add_column("outlet", std::move(outlet));
  t.add_column("top_comment_id", std::move(id));
  return t;
}

json rq1_article_frame(const stats::DataTable& top_level, const PipelineConfig& cfg) {
  return glmm_section(top_level, "article_frame", kFrameReference, cfg);
}

json rq1_frame_condition(const stats::DataTable& top_level, const PipelineConfig& cfg) {
  return glmm_section(top_level, "frame_condition", kAlignmentReference, cfg);
}

json rq2_reply_health(const stats::DataTable& t, const PipelineConfig& cfg) {
  (void)cfg;
  std::string formula = "mrh ~ top_health * top_frame + topic";
  try {
    if (t.rows() == 0) throw ValidationError("no threads with replies");
    auto plan = plan_factors(t, {{"top_health", "unhealthy"}, {"top_frame", kFrameReference}, {"topic", kTopicReference}},
                             "top_health");
    std::vector<std::pair<std::string, std::string>> inter;
    const bool has_frame = plan.references.contains("top_frame");
    if (has_frame) inter.emplace_back("top_health", "top_frame");
    formula = "mrh ~ " + join_terms(plan.factors, " + ") + (has_frame ? " + top_health:top_frame" : "");
    stats::ModelSpec spec{"mrh", plan.factors, inter, std::nullopt};
    const auto fit = stats::fit_ols(spec, t);
    const auto view = stats::view_of(fit);
    json s{{"status", "ok"}, {"formula", formula}, {"reference_levels", plan.references}};
    if (!plan.dropped.empty()) s["dropped_factors"] = plan.dropped;
    s["fit"] = stats::to_json(fit);
    json wald = json::object();
    for (const auto& f : plan.factors) wald[f.name] = stats::to_json(stats::wald_type2(view, f.name));
    if (has_frame) wald["top_health:top_frame"] = stats::to_json(stats::wald_type2(view, "top_health:top_frame"));
    s["wald"] = wald;
    return s;
  } catch (const Error& e) {
    spdlog::warn("{}: {}", formula, e.what());
    return failed(formula, e);
  }
}

namespace {

json topic_table(const CorpusStats& st, const std::string& outlet) {
  json rows = json::array();
  const auto it = st.by_outlet_topic.find(outlet);
  if (it == st.by_outlet_topic.end()) return rows;
  for (const auto& [topic, p] : it->second) {
    rows.push_back({{"topic", topic}, {"healthy", p.healthy}, {"total", p.total}, {"rate", p.rate()}});
  }
  return rows;
}

json agreement_section(const Corpus& corpus, const ScoredCorpus& scored, const std::vector<std::size_t>& positions,
                       const PipelineConfig& cfg) {
  std::vector<int> binary;
  std::vector<double> score, tox;
  for (std::size_t i : positions) {
    const auto& c = corpus.comments()[i];
    if (!c.toxicity) continue;
    binary.push_back(scored.comments[i].healthy ? 1 : 0);
    score.push_back(scored.comments[i].health_score);
    tox.push_back(*c.toxicity);
  }
  if (tox.empty()) return nullptr;
  try {
    json s = stats::to_json(stats::health_toxicity_agreement(binary, score, tox, cfg.toxicity_threshold));
    s["status"] = "ok";
    return s;
  } catch (const Error& e) {
    return {{"status", "failed"}, {"error", e.what()}, {"n", tox.size()}};
  }
}

}  // namespace

AnalysisReport analyze_corpus(const Corpus& corpus, const HealthScorer& health, const FrameScorer& frames,
                              const PipelineConfig& cfg) {
  const ScoredCorpus scored = score_corpus(corpus, health, frames, cfg);

  std::unordered_map<std::string, bool> health_map;
  std::size_t gold = 0;
  for (const auto& c : scored.comments) {
    health_map.emplace(c.id, c.healthy);
    gold += c.gold ? 1 : 0;
  }
  const CorpusStats st = corpus_stats(corpus, health_map);
  const auto top = top_level_table(corpus, scored);
  const auto threads = thread_table(corpus, scored);

  json report;
  report["metadata"] = cfg.to_json();
  report["metadata"]["n_articles"] = corpus.articles().size();
  report["metadata"]["n_comments"] = corpus.comments().size();
  report["metadata"]["n_gold_health"] = gold;
  report["metadata"]["max_depth"] = corpus.max_depth();

  std::set<std::string> outlets(top.column("outlet").begin(), top.column("outlet").end());
  for (const auto& a : corpus.articles()) outlets.emplace(to_string(a.outlet));

  json by_outlet = json::object();
  for (const auto& outlet : outlets) {
    json o;
    const auto p = st.by_outlet.count(outlet) ? st.by_outlet.at(outlet) : Proportion{};
    o["health"] = {{"healthy", p.healthy}, {"total", p.total}, {"rate", p.rate()}};
    o["topic_health"] = topic_table(st, outlet);

    std::vector<bool> keep_top(top.rows());
    for (std::size_t i = 0; i < top.rows(); ++i) keep_top[i] = top.column("outlet")[i] == outlet;
    const auto sub = top.filter(keep_top);
    o["rq1_article_frame"] = rq1_article_frame(sub, cfg);
    o["rq1_frame_condition"] = rq1_frame_condition(sub, cfg);

    std::vector<bool> keep_thr(threads.rows());
    for (std::size_t i = 0; i < threads.rows(); ++i) keep_thr[i] = threads.column("outlet")[i] == outlet;
    o["rq2_reply_health"] = rq2_reply_health(threads.filter(keep_thr), cfg);

    std::vector<std::size_t> positions;
    for (std::size_t i = 0; i < corpus.comments().size(); ++i) {
      const Article* a = corpus.find_article(corpus.comments()[i].article_id);
      if (to_string(a->outlet) == outlet) positions.push_back(i);
    }
    if (auto ag = agreement_section(corpus, scored, positions, cfg); !ag.is_null()) o["agreement"] = std::move(ag);
    by_outlet[outlet] = std::move(o);
  }
  report["outlets"] = std::move(by_outlet);
  report["overall_health"] = {{"healthy", st.overall.healthy}, {"total", st.overall.total}, {"rate", st.overall.rate()}};
  return {std::move(report)};
}

AnalysisReport analyze_corpus(const Corpus& corpus, const PipelineConfig& cfg) {
  const auto health = make_health_scorer(cfg.health_scorer);
  const auto frames = make_frame_scorer(cfg.frame_scorer);
  return analyze_corpus(corpus, *health, *frames, cfg);
}

AnalysisReport analyze_rq1_table(const stats::DataTable& table, const PipelineConfig& cfg) {
  json report;
  report["metadata"] = cfg.to_json();
  report["metadata"].erase("health_scorer");
  report["metadata"].erase("frame_scorer");
  report["metadata"]["n_rows"] = table.rows();
  if (table.has("article_frame")) report["rq1_article_frame"] = rq1_article_frame(table, cfg);
  if (table.has("frame_condition")) report["rq1_frame_condition"] = rq1_frame_condition(table, cfg);
  if (!table.has("article_frame") && !table.has("frame_condition")) {
    throw ValidationError("table needs an article_frame or frame_condition column");
  }
  return {std::move(report)};
}

AnalysisReport analyze_rq2_table(const stats::DataTable& table, const PipelineConfig& cfg) {
  json report;
  report["metadata"] = cfg.to_json();
  report["metadata"].erase("health_scorer");
  report["metadata"].erase("frame_scorer");
  report["metadata"]["n_rows"] = table.rows();
  report["rq2_reply_health"] = rq2_reply_health(table, cfg);
  return {std::move(report)};
}

std::string AnalysisReport::render_text() const {
  std::string out;
  auto sections = [&](const json& holder, const std::string& prefix) {
    static const std::pair<const char*, const char*> kTitles[] = {
        {"rq1_article_frame", "Article frame and comment health"},
        {"rq1_frame_condition", "Frame alignment and comment health"},
        {"rq2_reply_health", "Mean reply health"},
    };
    for (const auto& [key, title] : kTitles) {
      if (holder.contains(key)) out += stats::render_section(prefix + title, holder[key]);
    }
    if (holder.contains("agreement")) {
      const auto& a = holder["agreement"];
      out += prefix + "Health vs toxicity\n";
      if (a.value("status", "") == "ok") {
        out += "kappa = " + stats::fixed(a["kappa"].get<double>(), 3) +
               "; rho = " + stats::fixed(a["spearman_rho"].get<double>(), 3) + " (n = " + a["n"].dump() + ")\n\n";
      } else {
        out += "failed: " + a.value("error", std::string()) + "\n\n";
      }
    }
  };
  if (body.contains("outlets")) {
    for (const auto& [name, o] : body["outlets"].items()) sections(o, name + ": ");
  } else {
    sections(body, "");
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string analysis_id_for(std::string_view text) { return detail::hex64(detail::fnv1a64(text)); }

ArticleAnalysis analyze_article(std::string_view text, const FrameScorer& frames, const AggregationOptions& opts) {
  if (detail::trim(text).empty()) throw ValidationError("article text is empty");
  return {analysis_id_for(text), std::string(text), score_frames(text, frames, opts)};
}

json to_json(const ArticleAnalysis& a) {
  json sentences = json::array();
  for (const auto& s : a.frames.sentence_frames) {
    sentences.push_back({{"text", s.text}, {"frame", to_string(s.label)}, {"confidence", s.confidence}});
  }
  json secondaries = json::array();
  for (auto f : a.frames.secondaries) secondaries.push_back(to_string(f));
  json top = json::array();
  for (const auto& w : a.frames.top_k) top.push_back({{"frame", to_string(w.label)}, {"weight", w.weight}});
  return {{"analysis_id", a.id},
          {"sentences", sentences},
          {"primary", to_string(a.frames.primary)},
          {"secondaries", secondaries},
          {"top_frames", top}};
}

ModerationResult moderate_comment(const ArticleAnalysis& article, std::string_view comment, const HealthScorer& health,
                                  const FrameScorer& frames, LlmClient* llm, const ModerationSettings& settings) {
  if (detail::trim(comment).empty()) throw ValidationError("comment text is empty");
  ModerationResult r;
  std::vector<std::string> warnings;

  const std::vector<std::string> text{std::string(comment)};
  double score = 0.0;
  try {
    score = health.score_batch(text).at(0);
  } catch (const RemoteError& e) {
    if (!settings.baseline_fallback) throw;
    warnings.push_back(std::string("health scorer unavailable, baseline used: ") + e.what());
    score = BaselineHealthScorer().score(comment);
    r.scorer_degraded = true;
  }
  r.health = make_health_score(score, settings.health_threshold);

  try {
    r.comment_frames = score_frames(comment, frames, settings.aggregation);
  } catch (const RemoteError& e) {
    if (!settings.baseline_fallback) throw;
    warnings.push_back(std::string("frame scorer unavailable, baseline used: ") + e.what());
    r.comment_frames = score_frames(comment, BaselineFrameScorer(), settings.aggregation);
    r.scorer_degraded = true;
  }
  r.alignment = classify_alignment(r.comment_frames, article.frames, settings.alignment_mode);

  const RiskRuleSet& rules = settings.rules ? *settings.rules : RiskRuleSet::standard();
  r.risk = rules.assess(r.health.score, r.alignment);

  ModerationContext ctx;
  ctx.article_text = article.text;
  ctx.article_top_frames = article.frames.top_k;
  ctx.comment_text = std::string(comment);
  ctx.comment_frames = r.comment_frames;
  ctx.alignment = r.alignment;
  ctx.health = r.health;
  ctx.trigger = make_trigger(r.health, r.alignment, r.risk);
  r.outcome = moderate(ctx, r.risk, llm);
  r.outcome.warnings.insert(r.outcome.warnings.begin(), warnings.begin(), warnings.end());
  return r;
}

json to_json(const ModerationResult& r) {
  json frames = json::array();
  for (const auto& w : r.comment_frames.top_k) frames.push_back({{"frame", to_string(w.label)}, {"weight", w.weight}});
  return {{"health", {{"score", r.health.score}, {"healthy", r.health.binary}}},
          {"primary_frame", to_string(r.comment_frames.primary)},
          {"frames", frames},
          {"alignment", to_string(r.alignment)},
          {"risk_level", to_string(r.risk.level)},
          {"action", to_string(r.risk.action)},
          {"allow_post", r.risk.allow_post},
          {"matched_rule", r.risk.matched_rule},
          {"suggestions", r.outcome.guidance.suggestions},
          {"degraded", r.outcome.degraded || r.scorer_degraded},
          {"override", r.outcome.llm_override},
          {"warnings", r.outcome.warnings}};
}

}  // namespace frameguard
