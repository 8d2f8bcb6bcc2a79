#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "frameguard/corpus.hpp"
#include "frameguard/pipeline.hpp"
#include "frameguard/reformulator.hpp"
#include "frameguard/scoring.hpp"

namespace frameguard {

enum class ApiErrorCode { BadRequest, UpstreamUnavailable, NotFound, Internal };

std::string_view to_string(ApiErrorCode c) noexcept;
int http_status(ApiErrorCode c) noexcept;

// {"error": {"code", "message", "retryable"}}; upstream_unavailable is always retryable.
nlohmann::json api_error(ApiErrorCode code, std::string_view message);

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 binds an ephemeral port
  ScorerConfig health_scorer;
  ScorerConfig frame_scorer;
  std::optional<LlmConfig> llm;
  ModerationSettings moderation;
  std::optional<std::filesystem::path> store;
  std::optional<std::filesystem::path> report;
  std::optional<std::filesystem::path> static_dir;
  std::size_t cache_size = 1024;
  unsigned worker_threads = 8;

  // JSON keys: host, port, store, report, static_dir, cache_size,
  // health_url, frame_url, llm_url, llm_model, timeout_ms, baseline_fallback.
  static ServiceConfig from_json(const nlohmann::json& j);
  static ServiceConfig from_file(const std::filesystem::path& path);
  // FRAMEGUARD_PORT, FRAMEGUARD_HOST, FRAMEGUARD_STORE, FRAMEGUARD_REPORT,
  // FRAMEGUARD_HEALTH_URL, FRAMEGUARD_FRAME_URL, FRAMEGUARD_LLM_URL,
  // FRAMEGUARD_LLM_MODEL, FRAMEGUARD_TIMEOUT_MS.
  void apply_env();
};

// Optional injected backends; anything left null is built from the config.
struct ServiceBackends {
  std::shared_ptr<const HealthScorer> health;
  std::shared_ptr<const FrameScorer> frames;
  std::shared_ptr<LlmClient> llm;
  std::shared_ptr<const Corpus> corpus;
};

// HTTP API:
//   POST /api/articles/analyze   {text} | {article_id}
//   POST /api/comments/moderate  {analysis_id, comment}
//   GET  /api/topics/search?q=
//   GET  /api/reports/latest
//   GET  /api/health
// Article analyses are kept in an in-memory LRU keyed by content hash; a
// restart only loses that cache.
class Service {
 public:
  explicit Service(ServiceConfig cfg, ServiceBackends backends = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds host:port and returns the bound port. Throws IoError on failure.
  int bind();
  // Serves until stop(); bind() first.
  void run();
  // bind() + run() on a background thread.
  int start();
  void stop();

  void set_report(nlohmann::json report);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Article summaries ranked by case-insensitive term frequency of the query
// words over headline and body; ties by article id. Zero scores are dropped.
nlohmann::json search_articles(const Corpus& corpus, std::string_view query, std::size_t limit = 3);

}  // namespace frameguard
