// Acceptance checks. One line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../support/oracles.hpp"
#include "../support/synth.hpp"
#include "frameguard/error.hpp"
#include "frameguard/framing.hpp"
#include "frameguard/pipeline.hpp"
#include "frameguard/reformulator.hpp"
#include "frameguard/risk.hpp"
#include "frameguard/service.hpp"
#include "frameguard/stats/agreement.hpp"
#include "frameguard/stats/format.hpp"
#include "frameguard/stats/glmm.hpp"
#include "frameguard/stats/inference.hpp"
#include "frameguard/stats/ols.hpp"

// after Eigen: <resolv.h> defines _res
#include <httplib.h>
#include <json.hpp>

#include "../support/mock_scorer.hpp"

namespace fg = frameguard;
namespace st = frameguard::stats;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1e", v);
  return buf;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1e-300, std::abs(b)); }

// ---------------------------------------------------------------------------

Outcome risk_truth_table() {
  using fg::AlignmentCondition;
  using fg::RiskLevel;
  Outcome o;
  const auto t0 = Clock::now();
  int cases = 0;
  for (int i = 0; i <= 20; ++i) {
    const double h = i / 20.0;
    for (auto a : {AlignmentCondition::Match, AlignmentCondition::Selective, AlignmentCondition::Complete}) {
      RiskLevel want;
      if (h < 0.3) {
        want = RiskLevel::High;
      } else if (h < 0.5 && a == AlignmentCondition::Complete) {
        want = RiskLevel::High;
      } else if (h < 0.6) {
        want = RiskLevel::Medium;
      } else if (a == AlignmentCondition::Match) {
        want = RiskLevel::Low;
      } else {
        want = RiskLevel::Medium;
      }
      const auto got = fg::assess(h, a);
      ++cases;
      std::ostringstream what;
      what << "health " << h << " " << fg::to_string(a) << ": got " << fg::to_string(got.level);
      o.require(got.level == want, what.str());
      o.require(got.allow_post == (want != RiskLevel::High), what.str() + " (allow_post)");
    }
  }
  const double secs = seconds_since(t0);
  o.require(cases == 63, "expected 63 cases");
  o.require(secs < 1.0, "slower than 1s");
  if (o.pass) o.detail = std::to_string(cases) + " cases";
  return o;
}

fg::FrameAnalysis analysis_of(const std::vector<std::pair<fg::FrameLabel, double>>& s) {
  return fg::aggregate_frames(std::span<const std::pair<fg::FrameLabel, double>>(s));
}

Outcome alignment_classifier() {
  using fg::FrameLabel;
  Outcome o;
  const auto t0 = Clock::now();
  // Health-care article with economic, political and moral asides; the
  // comment argues policy.
  const auto obamacare = analysis_of({{FrameLabel::HealthSafety, 0.9}, {FrameLabel::HealthSafety, 0.9},
                                      {FrameLabel::HealthSafety, 0.9}, {FrameLabel::Economic, 0.5},
                                      {FrameLabel::PoliticalPolicies, 0.5}, {FrameLabel::Morality, 0.5}});
  o.require(fg::classify_alignment(FrameLabel::PoliticalPolicies, obamacare) == fg::AlignmentCondition::Selective,
            "policy comment on health article is not Selective");
  // Political article; the comment drifts to health.
  const auto insulting = analysis_of({{FrameLabel::PoliticalPolicies, 0.9}, {FrameLabel::PoliticalPolicies, 0.9},
                                      {FrameLabel::PoliticalPolicies, 0.9}, {FrameLabel::LegalityCrime, 0.5},
                                      {FrameLabel::Morality, 0.5}, {FrameLabel::CulturalIdentity, 0.5}});
  o.require(fg::classify_alignment(FrameLabel::HealthSafety, insulting) == fg::AlignmentCondition::Complete,
            "health comment on political article is not Complete");

  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> label(0, static_cast<int>(fg::kFrameCount) - 1);
  std::uniform_int_distribution<int> length(1, 12);
  std::uniform_real_distribution<double> conf(0.01, 1.0), scale(0.01, 100.0);
  auto draw = [&] {
    std::vector<std::pair<FrameLabel, double>> s(static_cast<std::size_t>(length(rng)));
    for (auto& p : s) p = {fg::kAllFrames[static_cast<std::size_t>(label(rng))], conf(rng)};
    return s;
  };
  for (int trial = 0; trial < 10000 && o.pass; ++trial) {
    const auto art = draw();
    const auto com = draw();
    for (auto mode : {fg::AlignmentMode::PrimaryOnly, fg::AlignmentMode::AnyCommentFrame}) {
      const auto base = fg::classify_alignment(analysis_of(com), analysis_of(art), mode);
      const int v = static_cast<int>(base);
      o.require(v >= 0 && v <= 2, "result outside the three conditions");
      auto pa = art, pc = com;
      std::shuffle(pa.begin(), pa.end(), rng);
      std::shuffle(pc.begin(), pc.end(), rng);
      o.require(fg::classify_alignment(analysis_of(pc), analysis_of(pa), mode) == base,
                "permutation changed the condition at trial " + std::to_string(trial));
      const double ca = scale(rng), cc = scale(rng);
      auto sa = art, sc = com;
      for (auto& p : sa) p.second *= ca;
      for (auto& p : sc) p.second *= cc;
      o.require(fg::classify_alignment(analysis_of(sc), analysis_of(sa), mode) == base,
                "rescaling changed the condition at trial " + std::to_string(trial));
    }
  }
  const double secs = seconds_since(t0);
  o.require(secs < 5.0, "slower than 5s");
  if (o.pass) o.detail = "worked examples + 10000 random inputs, " + st::fixed(secs, 2) + "s";
  return o;
}

Outcome glmm_recovery() {
  Outcome o;
  const auto t0 = Clock::now();
  int passes = 0;
  std::string misses;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto d = synth::simulate_glmm(seed, 300, 20, -0.5, 1.0, 0.7);
    const auto fit = st::fit_glmm_logit(d);
    const double sigma = std::sqrt(fit.sigma2);
    const bool ok = fit.converged && std::abs(fit.beta[0] + 0.5) <= 3.0 * fit.se[0] &&
                    std::abs(fit.beta[1] - 1.0) <= 3.0 * fit.se[1] && std::abs(sigma - 0.7) <= 0.5 * 0.7;
    if (ok) {
      ++passes;
    } else {
      misses += " seed" + std::to_string(seed);
    }
  }
  const double secs = seconds_since(t0);
  o.require(passes >= 18, std::to_string(passes) + "/20 seeds recovered;" + misses);
  o.require(secs < 60.0, "20 fits took " + st::fixed(secs, 1) + "s");

  double worst = 0.0;
  for (std::uint64_t seed = 101; seed <= 105; ++seed) {
    const auto d = synth::simulate_glmm(seed, 6, 8, 0.3, 0.8, 0.8);
    const auto fit = st::fit_glmm_logit(d);
    const double sigma = std::sqrt(fit.sigma2);
    const double quad = oracle::quadrature_loglik(d.X, d.y, d.groups, fit.beta, sigma, 50);
    worst = std::max(worst, std::abs(fit.loglik - quad) / std::abs(quad));
  }
  o.require(worst <= 0.02, "Laplace vs quadrature relative gap " + st::fixed(worst, 4));
  if (o.pass) {
    o.detail = std::to_string(passes) + "/20 seeds, " + st::fixed(secs, 1) + "s; worst Laplace gap " +
               st::fixed(100.0 * worst, 3) + "%";
  }
  return o;
}

Outcome degenerate_glmm() {
  Outcome o;
  double worst = 0.0;
  for (std::uint64_t seed : {31u, 32u, 33u}) {
    const auto d = synth::simulate_glmm(seed, 25, 40, -0.2, 0.9, 0.0);
    st::GlmmOptions opts;
    opts.fixed_sigma2 = 0.0;
    opts.grad_tol = 1e-10;
    const auto fit = st::fit_glmm_logit(d, opts);
    const auto ref = oracle::logistic_newton(d.X, d.y);
    worst = std::max(worst, (fit.beta - ref).cwiseAbs().maxCoeff());
  }
  o.require(worst <= 1e-6, "max coefficient gap " + sci(worst));
  if (o.pass) o.detail = "3 fixtures, max gap " + sci(worst);
  return o;
}

Outcome ols_oracle() {
  Outcome o;
  std::mt19937_64 rng(77);
  std::normal_distribution<double> N(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 100 + 40 * trial, p = 2 + trial % 6;
    Eigen::MatrixXd X(n, p);
    Eigen::VectorXd y(n);
    std::vector<std::string> names{"(Intercept)"};
    for (int j = 1; j < p; ++j) names.push_back("x" + std::to_string(j));
    for (int i = 0; i < n; ++i) {
      X(i, 0) = 1.0;
      for (int j = 1; j < p; ++j) X(i, j) = N(rng);
      y[i] = X.row(i).sum() * 0.5 + N(rng);
    }
    const auto fit = st::fit_ols(X, y, names);
    const auto ref = oracle::ols_normal_equations(X, y);
    for (int j = 0; j < p; ++j) {
      worst = std::max(worst, rel_err(fit.beta[j], ref.beta[j]));
      worst = std::max(worst, rel_err(fit.se[j], ref.se[j]));
    }
    worst = std::max({worst, rel_err(fit.r2, ref.r2), rel_err(fit.f_stat, ref.f)});
  }
  o.require(worst <= 1e-8, "max relative gap " + sci(worst));

  Eigen::MatrixXd X(40, 3);
  Eigen::VectorXd y(40);
  for (int i = 0; i < 40; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = i;
    X(i, 2) = (i * 7) % 5;
    y[i] = 2.0 - 0.5 * X(i, 1) + 3.0 * X(i, 2);
  }
  const auto exact = st::fit_ols(X, y, {"(Intercept)", "a", "b"});
  o.require(std::abs(exact.r2 - 1.0) < 1e-12, "noiseless R2 = " + std::to_string(exact.r2));
  if (o.pass) o.detail = "10 designs, max relative gap " + sci(worst) + "; noiseless R2 = 1";
  return o;
}

st::DataTable binary_table(const std::vector<std::pair<int, int>>& cells, int groups) {
  std::vector<std::string> y, f, g;
  int row = 0;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (int i = 0; i < cells[c].first; ++i, ++row) {
      y.push_back(i < cells[c].second ? "1" : "0");
      f.push_back("L" + std::to_string(c));
      g.push_back("g" + std::to_string(row % groups));
    }
  }
  st::DataTable t;
  t.add_column("y", y);
  t.add_column("f", f);
  t.add_column("g", g);
  return t;
}

Outcome wald_emm_tukey() {
  Outcome o;
  // one-column factor: Wald statistic is the squared z
  const auto two = binary_table({{400, 300}, {400, 260}}, 10);
  const auto fit2 = st::fit_glmm_logit(st::ModelSpec{"y", {{"f", std::nullopt}}, {}, "g"}, two);
  const auto w = st::wald_type2(fit2, "f");
  const double z = fit2.beta[1] / fit2.se[1];
  o.require(w.df == 1 && std::abs(w.statistic - z * z) <= 1e-12 * z * z,
            "Wald " + std::to_string(w.statistic) + " vs z^2 " + std::to_string(z * z));

  // saturated model with the variance pinned at zero reproduces cell proportions
  const std::vector<std::pair<int, int>> cells = {{300, 249}, {280, 227}, {260, 203}, {240, 170}};
  const auto t = binary_table(cells, 12);
  st::GlmmOptions opts;
  opts.fixed_sigma2 = 0.0;
  opts.grad_tol = 1e-10;
  const auto fit = st::fit_glmm_logit(st::ModelSpec{"y", {{"f", std::nullopt}}, {}, "g"}, t, opts);
  const auto view = st::view_of(fit);
  const auto emm = st::emmeans(view, "f");
  double worst = 0.0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const double observed = static_cast<double>(cells[i].second) / cells[i].first;
    worst = std::max(worst, std::abs(emm.levels[i].response - observed));
  }
  o.require(worst <= 1e-6, "EMM vs observed proportion gap " + sci(worst));

  const auto pairs = st::pairwise_or(emm, view);
  for (const auto& p : pairs) {
    o.require(p.p_adjusted >= p.p_unadjusted, p.a + " vs " + p.b + ": adjusted p below unadjusted");
  }
  double anti = 0.0;
  for (std::size_t a = 0; a < cells.size(); ++a) {
    for (std::size_t b = a + 1; b < cells.size(); ++b) {
      const auto ab = st::compare_levels(emm, view, a, b, cells.size());
      const auto ba = st::compare_levels(emm, view, b, a, cells.size());
      anti = std::max(anti, std::abs(std::log(ab.odds_ratio) + std::log(ba.odds_ratio)));
      anti = std::max(anti, std::abs(ab.odds_ratio * ba.odds_ratio - 1.0));
    }
  }
  o.require(anti <= 1e-12, "OR antisymmetry gap " + sci(anti));
  if (o.pass) {
    o.detail = "EMM gap " + sci(worst) + ", " + std::to_string(pairs.size()) + " pairs, OR gap " +
               sci(anti);
  }
  return o;
}

Outcome end_to_end() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto planted = synth::planted_alignment_corpus(20000, {0.83, 0.81, 0.78}, 42);
  const auto report = fg::analyze_corpus(planted.corpus, fg::PipelineConfig{});
  const double secs = seconds_since(t0);
  const auto& section = report.body.at("outlets").at("NYT").at("rq1_frame_condition");
  o.require(section.at("status") == "ok", "frame-condition model failed: " + section.dump());
  if (!o.pass) return o;
  double m = 0, s = 0, c = 0;
  for (const auto& l : section.at("emmeans").at("levels")) {
    const double r = l.at("response").get<double>();
    if (l.at("level") == "Match") m = r;
    if (l.at("level") == "Selective") s = r;
    if (l.at("level") == "Complete") c = r;
  }
  o.require(m > s && s > c, "EMM order " + st::fixed(m, 4) + "/" + st::fixed(s, 4) + "/" + st::fixed(c, 4));
  double worst_p = 0.0;
  for (const auto& p : section.at("pairwise")) worst_p = std::max(worst_p, p.at("p_adjusted").get<double>());
  o.require(section.at("pairwise").size() == 3 && worst_p < 0.05, "largest adjusted p " + std::to_string(worst_p));
  o.require(secs < 300.0, "took " + st::fixed(secs, 1) + "s");
  if (o.pass) {
    o.detail = "EMMs " + st::fixed(100 * m, 1) + "% > " + st::fixed(100 * s, 1) + "% > " + st::fixed(100 * c, 1) +
               "%, max adjusted p " + st::format_p(worst_p).substr(4) + ", " + st::fixed(secs, 1) + "s";
  }
  return o;
}

Outcome agreement_metrics() {
  Outcome o;
  std::mt19937_64 rng(5150);
  std::uniform_int_distribution<int> bit(0, 1), len(3, 200);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_k = 0.0, worst_r = 0.0;
  int done = 0;
  while (done < 1000) {
    const int n = len(rng);
    std::vector<int> a(n), b(n);
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      a[i] = bit(rng);
      b[i] = u(rng) < 0.7 ? a[i] : bit(rng);
      // rounding to a coarse grid leaves plenty of ties
      x[i] = std::round(u(rng) * 10.0) / 10.0;
      y[i] = std::round((x[i] + u(rng)) * 10.0) / 10.0;
    }
    const bool const_a = std::count(a.begin(), a.end(), a[0]) == n;
    const bool const_b = std::count(b.begin(), b.end(), b[0]) == n;
    const bool const_x = std::count(x.begin(), x.end(), x[0]) == n;
    const bool const_y = std::count(y.begin(), y.end(), y[0]) == n;
    if (const_a || const_b || const_x || const_y) continue;
    worst_k = std::max(worst_k, std::abs(st::cohen_kappa(a, b) - oracle::kappa_direct(a, b)));
    worst_r = std::max(worst_r, std::abs(st::spearman(x, y) - oracle::spearman_direct(x, y)));
    ++done;
  }
  o.require(worst_k <= 1e-12, "kappa gap " + sci(worst_k));
  o.require(worst_r <= 1e-12, "rho gap " + sci(worst_r));
  const std::vector<int> same = {1, 0, 0, 1, 1, 0, 1};
  o.require(st::cohen_kappa(same, same) == 1.0, "kappa on identical vectors is not 1");
  // po = 0.5 and pe = 0.5 by construction
  const std::vector<int> r1 = {1, 1, 0, 0}, r2 = {1, 0, 1, 0};
  o.require(st::cohen_kappa(r1, r2) == 0.0, "hand-computed zero case");
  if (o.pass) {
    o.detail = "1000 vectors, max gaps " + sci(worst_k) + " / " + sci(worst_r);
  }
  return o;
}

Outcome rebalance_structure() {
  Outcome o;
  // shaped so that 2,649 confident unhealthy comments are the minority
  const auto train = synth::ucc_shaped(32000, 29000, 3000, 2649, 9);
  const auto r = fg::rebalance(train);
  o.require(r.count(true) == 5298 && r.count(false) == 2649,
            "train " + std::to_string(r.count(true)) + "/" + std::to_string(r.count(false)));
  o.require(fg::rebalance(r).records == r.records, "rebalance is not idempotent");

  const auto pool = fg::rebalance(synth::ucc_shaped(40000, 36000, 3500, 3311, 10));
  const auto parts = fg::stratified_split(pool);
  const auto shape = [](const fg::LabeledSplit& s) {
    return std::to_string(s.count(true)) + "/" + std::to_string(s.count(false));
  };
  o.require(shape(parts[0]) == "5298/2649", "split train " + shape(parts[0]));
  o.require(shape(parts[1]) == "662/331", "split val " + shape(parts[1]));
  o.require(shape(parts[2]) == "662/331", "split test " + shape(parts[2]));
  for (const auto& p : parts) o.require(fg::rebalance(p).records == p.records, "split not idempotent");
  if (o.pass) o.detail = shape(r) + "; splits " + shape(parts[0]) + ", " + shape(parts[1]) + ", " + shape(parts[2]);
  return o;
}

struct FixedLlm : fg::LlmClient {
  std::string reply;
  std::string generate(const std::string&) override { return reply; }
};

struct BrokenLlm : fg::LlmClient {
  int calls = 0;
  std::string generate(const std::string&) override {
    ++calls;
    return "I'd rather not answer in JSON.";
  }
};

Outcome prompt_parse_service() {
  Outcome o;
  fg::ModerationContext ctx;
  ctx.article_text = "The health care bill will expand coverage. Premiums may rise.";
  ctx.article_top_frames = {{fg::FrameLabel::HealthSafety, 0.6}, {fg::FrameLabel::Economic, 0.4}};
  ctx.comment_text = "Typical politicians, all of them crooks.";
  ctx.comment_frames.primary = fg::FrameLabel::PoliticalPolicies;
  ctx.alignment = fg::AlignmentCondition::Complete;
  ctx.health = fg::make_health_score(0.2);
  const auto risk = fg::assess(0.2, ctx.alignment);
  ctx.trigger = fg::make_trigger(ctx.health, ctx.alignment, risk);
  const auto prompt = fg::build_prompt(ctx);
  for (const char* marker : {"System Instruction:", "CONTEXT:", "Article Text:", "Comment to Analyze:",
                             "Trigger: This comment requires intervention due to:", "Task:"}) {
    o.require(prompt.find(marker) != std::string::npos, std::string("prompt lacks '") + marker + "'");
  }

  const fg::ModerationGuidance g{fg::RiskLevel::Medium, {"Consider the coverage numbers.", "Drop the label."}, true};
  const auto raw = fg::guidance_to_json(g);
  o.require(fg::parse_guidance(raw) == g, "unfenced JSON did not round-trip");
  o.require(fg::parse_guidance("```json\n" + raw + "\n```") == g, "fenced JSON did not round-trip");

  BrokenLlm b1, b2;
  const auto f1 = fg::moderate(ctx, risk, &b1);
  const auto f2 = fg::moderate(ctx, risk, &b2);
  o.require(f1.degraded && f1.guidance == f2.guidance && !f1.guidance.suggestions.empty(),
            "double failure fallback is not deterministic");
  o.require(b1.calls == 2, "expected two generation attempts, saw " + std::to_string(b1.calls));

  // service with mock scorers and a canned generator
  mock::ScorerServer scorers;
  fg::ServiceConfig cfg;
  cfg.port = 0;
  cfg.health_scorer = fg::ScorerConfig::remote(scorers.url("/health"));
  cfg.frame_scorer = fg::ScorerConfig::remote(scorers.url("/frames"));
  cfg.moderation.baseline_fallback = false;
  fg::ServiceBackends backends;
  auto llm = std::make_shared<FixedLlm>();
  llm->reply = R"({"risk_level": "high", "suggestions": ["a", "b", "c"], "allow_post": false})";
  backends.llm = llm;
  const std::filesystem::path fixtures = FRAMEGUARD_FIXTURES;
  backends.corpus = std::make_shared<const fg::Corpus>(
      fg::load_corpus(fixtures / "articles.jsonl", fixtures / "comments.jsonl", fg::Format::Jsonl).corpus);
  fg::Service service(cfg, backends);
  service.set_report({{"metadata", {{"seed", 42}}}});
  httplib::Client client("127.0.0.1", service.start());
  client.set_read_timeout(10, 0);

  auto call = [&](const char* method, const std::string& path, const json& body = nullptr) -> std::pair<int, json> {
    auto res = std::string(method) == "GET" ? client.Get(path) : client.Post(path, body.dump(), "application/json");
    if (!res) return {0, json()};
    return {res->status, json::parse(res->body, nullptr, false)};
  };
  auto [s_health, _h] = call("GET", "/api/health");
  o.require(s_health == 200, "GET /api/health -> " + std::to_string(s_health));
  auto [s_search, hits] = call("GET", "/api/topics/search?q=climate");
  o.require(s_search == 200 && hits.is_array() && !hits.empty() && hits.size() <= 3, "search failed");
  auto [s_report, rep] = call("GET", "/api/reports/latest");
  o.require(s_report == 200 && rep.contains("metadata"), "reports/latest failed");
  const std::string first_article = backends.corpus->articles().front().id;
  auto [s_art, art] = call("POST", "/api/articles/analyze", {{"article_id", first_article}});
  o.require(s_art == 200 && art.contains("analysis_id"), "articles/analyze failed");
  auto [s_bad, bad] = call("POST", "/api/comments/moderate", {{"analysis_id", "missing"}, {"comment", "x"}});
  o.require(s_bad == 404 && bad.contains("error"), "unknown analysis id not rejected");

  std::vector<double> latencies;
  const auto& comments = backends.corpus->comments();
  for (std::size_t i = 0; i < 100; ++i) {
    const auto t0 = Clock::now();
    auto [s, m] = call("POST", "/api/comments/moderate",
                       {{"analysis_id", art.value("analysis_id", "")}, {"comment", comments[i % comments.size()].body}});
    latencies.push_back(seconds_since(t0));
    o.require(s == 200, "moderate -> " + std::to_string(s));
    if (s == 200) {
      o.require(m.at("risk_level") == std::string(fg::to_string(fg::assess(m.at("health").at("score"),
                                                                          *fg::parse_alignment(m.at("alignment").get<std::string>()))
                                                                   .level)),
                "service risk disagrees with the rule engine");
      if (m.at("risk_level") != "low") o.require(m.at("suggestions").size() == 3, "expected 3 suggestions");
    }
  }
  service.stop();
  std::sort(latencies.begin(), latencies.end());
  const double p95 = latencies[94];
  o.require(p95 < 2.0, "p95 " + st::fixed(p95, 3) + "s");
  if (o.pass) o.detail = "6 markers, parser round trips, fallback stable, p95 " + st::fixed(p95 * 1000.0, 1) + "ms";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"risk engine truth table", risk_truth_table},
      {"alignment classifier", alignment_classifier},
      {"GLMM recovery", glmm_recovery},
      {"degenerate GLMM", degenerate_glmm},
      {"OLS", ols_oracle},
      {"Wald/EMM/Tukey", wald_emm_tukey},
      {"end-to-end gradient replication", end_to_end},
      {"agreement metrics", agreement_metrics},
      {"rebalance", rebalance_structure},
      {"prompt/parse and service", prompt_parse_service},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failed;
    std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
