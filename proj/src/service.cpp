#include "frameguard/service.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <list>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "frameguard/detail/text.hpp"
#include "frameguard/error.hpp"

namespace frameguard {

using nlohmann::json;

std::string_view to_string(ApiErrorCode c) noexcept {
  switch (c) {
    case ApiErrorCode::BadRequest: return "bad_request";
    case ApiErrorCode::UpstreamUnavailable: return "upstream_unavailable";
    case ApiErrorCode::NotFound: return "not_found";
    case ApiErrorCode::Internal: return "internal";
  }
  return "internal";
}

int http_status(ApiErrorCode c) noexcept {
  switch (c) {
    case ApiErrorCode::BadRequest: return 400;
    case ApiErrorCode::UpstreamUnavailable: return 503;
    case ApiErrorCode::NotFound: return 404;
    case ApiErrorCode::Internal: return 500;
  }
  return 500;
}

json api_error(ApiErrorCode code, std::string_view message) {
  return {{"error",
           {{"code", to_string(code)},
            {"message", message},
            {"retryable", code == ApiErrorCode::UpstreamUnavailable}}}};
}

// ---------------------------------------------------------------------------
// Config

ServiceConfig ServiceConfig::from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("service config must be a JSON object");
  ServiceConfig c;
  try {
    c.host = j.value("host", c.host);
    c.port = j.value("port", c.port);
    if (j.contains("store")) c.store = j["store"].get<std::string>();
    if (j.contains("report")) c.report = j["report"].get<std::string>();
    if (j.contains("static_dir")) c.static_dir = j["static_dir"].get<std::string>();
    c.cache_size = j.value("cache_size", c.cache_size);
    c.moderation.baseline_fallback = j.value("baseline_fallback", c.moderation.baseline_fallback);
    c.moderation.health_threshold = j.value("health_threshold", c.moderation.health_threshold);
    const auto timeout = std::chrono::milliseconds(j.value("timeout_ms", 5000));
    if (j.contains("health_url")) c.health_scorer = ScorerConfig::remote(j["health_url"].get<std::string>(), timeout);
    if (j.contains("frame_url")) c.frame_scorer = ScorerConfig::remote(j["frame_url"].get<std::string>(), timeout);
    if (j.contains("llm_url")) {
      LlmConfig llm;
      llm.url = j["llm_url"].get<std::string>();
      llm.model = j.value("llm_model", llm.model);
      if (j.contains("llm_timeout_ms")) llm.timeout = std::chrono::milliseconds(j["llm_timeout_ms"].get<int>());
      c.llm = llm;
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("service config: ") + e.what());
  }
  if (c.port < 0 || c.port > 65535) throw ValidationError("service config: port out of range");
  if (c.cache_size == 0) throw ValidationError("service config: cache_size must be positive");
  return c;
}

ServiceConfig ServiceConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read service config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return from_json(json::parse(ss.str()));
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("service config: ") + e.what(), ss.str());
  }
}

void ServiceConfig::apply_env() {
  auto env = [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
  };
  if (auto v = env("FRAMEGUARD_PORT")) {
    try {
      port = std::stoi(*v);
    } catch (const std::exception&) {
      throw ValidationError("FRAMEGUARD_PORT is not a number");
    }
  }
  if (auto v = env("FRAMEGUARD_HOST")) host = *v;
  if (auto v = env("FRAMEGUARD_STORE")) store = *v;
  if (auto v = env("FRAMEGUARD_REPORT")) report = *v;
  if (env("FRAMEGUARD_HEALTH_URL")) health_scorer = ScorerConfig::from_env("FRAMEGUARD_HEALTH_URL");
  if (env("FRAMEGUARD_FRAME_URL")) frame_scorer = ScorerConfig::from_env("FRAMEGUARD_FRAME_URL");
  if (auto llm_env = LlmConfig::from_env()) llm = llm_env;
}

// ---------------------------------------------------------------------------
// Search

namespace {

struct SearchIndex {
  struct Entry {
    std::size_t article;
    std::unordered_map<std::string, std::size_t> tf;
  };
  std::vector<Entry> entries;

  explicit SearchIndex(const Corpus& corpus) {
    const auto& arts = corpus.articles();
    entries.reserve(arts.size());
    for (std::size_t i = 0; i < arts.size(); ++i) {
      Entry e{i, {}};
      for (auto& t : word_tokens(arts[i].headline + "\n" + arts[i].body)) ++e.tf[t];
      entries.push_back(std::move(e));
    }
  }

  json search(const Corpus& corpus, std::string_view query, std::size_t limit) const {
    auto terms = word_tokens(query);
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    std::vector<std::pair<std::size_t, std::size_t>> scored;  // (score, article pos)
    for (const auto& e : entries) {
      std::size_t score = 0;
      for (const auto& t : terms) {
        if (auto it = e.tf.find(t); it != e.tf.end()) score += it->second;
      }
      if (score > 0) scored.emplace_back(score, e.article);
    }
    const auto& arts = corpus.articles();
    std::sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return arts[a.second].id < arts[b.second].id;
    });
    if (scored.size() > limit) scored.resize(limit);
    json out = json::array();
    for (const auto& [score, pos] : scored) {
      const Article& a = arts[pos];
      out.push_back({{"article_id", a.id},
                     {"headline", a.headline},
                     {"topic", a.topic},
                     {"outlet", to_string(a.outlet)},
                     {"published", a.published ? json(*a.published) : json(nullptr)},
                     {"snippet", truncate_text(a.body, 200)},
                     {"score", score}});
    }
    return out;
  }
};

class AnalysisCache {
 public:
  explicit AnalysisCache(std::size_t capacity) : capacity_(capacity) {}

  std::shared_ptr<const ArticleAnalysis> get(const std::string& id) {
    std::lock_guard lock(mu_);
    auto it = map_.find(id);
    if (it == map_.end()) return nullptr;
    order_.splice(order_.begin(), order_, it->second);
    return it->second->second;
  }

  void put(std::shared_ptr<const ArticleAnalysis> a) {
    std::lock_guard lock(mu_);
    if (auto it = map_.find(a->id); it != map_.end()) {
      order_.splice(order_.begin(), order_, it->second);
      return;
    }
    order_.emplace_front(a->id, std::move(a));
    map_[order_.front().first] = order_.begin();
    if (order_.size() > capacity_) {
      map_.erase(order_.back().first);
      order_.pop_back();
    }
  }

 private:
  using Item = std::pair<std::string, std::shared_ptr<const ArticleAnalysis>>;
  std::size_t capacity_;
  std::mutex mu_;
  std::list<Item> order_;
  std::unordered_map<std::string, std::list<Item>::iterator> map_;
};

struct HttpError {
  ApiErrorCode code;
  std::string message;
};

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) throw HttpError{ApiErrorCode::BadRequest, "request body is empty"};
  try {
    json j = json::parse(req.body);
    if (!j.is_object()) throw HttpError{ApiErrorCode::BadRequest, "request body must be a JSON object"};
    return j;
  } catch (const json::parse_error& e) {
    throw HttpError{ApiErrorCode::BadRequest, std::string("malformed JSON: ") + e.what()};
  }
}

std::string string_field(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw HttpError{ApiErrorCode::BadRequest, std::string("'") + key + "' must be a string"};
  }
  return j[key].get<std::string>();
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ApiErrorCode code, std::string_view message) {
  send_json(res, http_status(code), api_error(code, message));
}

}  // namespace

json search_articles(const Corpus& corpus, std::string_view query, std::size_t limit) {
  return SearchIndex(corpus).search(corpus, query, limit);
}

// ---------------------------------------------------------------------------

struct Service::Impl {
  ServiceConfig cfg;
  std::shared_ptr<const HealthScorer> health;
  std::shared_ptr<const FrameScorer> frames;
  std::shared_ptr<LlmClient> llm;
  std::shared_ptr<const Corpus> corpus;
  std::unique_ptr<SearchIndex> index;
  AnalysisCache cache;
  httplib::Server server;
  std::thread thread;
  int port = -1;

  std::mutex report_mu;
  std::optional<json> report;

  explicit Impl(ServiceConfig c, ServiceBackends b)
      : cfg(std::move(c)),
        health(std::move(b.health)),
        frames(std::move(b.frames)),
        llm(std::move(b.llm)),
        corpus(std::move(b.corpus)),
        cache(cfg.cache_size) {
    if (!health) health = make_health_scorer(cfg.health_scorer);
    if (!frames) frames = make_frame_scorer(cfg.frame_scorer);
    if (!llm && cfg.llm) llm = std::make_shared<HttpLlmClient>(*cfg.llm);
    if (!corpus && cfg.store) corpus = std::make_shared<const Corpus>(load_store(*cfg.store).corpus);
    if (corpus) index = std::make_unique<SearchIndex>(*corpus);
    routes();
  }

  // Runs a handler and maps exceptions onto ApiError bodies.
  template <class Fn>
  void guarded(httplib::Response& res, Fn&& fn) {
    try {
      fn();
    } catch (const HttpError& e) {
      send_error(res, e.code, e.message);
    } catch (const RemoteError& e) {
      send_error(res, ApiErrorCode::UpstreamUnavailable, e.what());
    } catch (const ValidationError& e) {
      send_error(res, ApiErrorCode::BadRequest, e.what());
    } catch (const std::exception& e) {
      spdlog::error("service: {}", e.what());
      send_error(res, ApiErrorCode::Internal, "internal error");
    }
  }

  ArticleAnalysis analyze(std::string_view text) {
    try {
      return analyze_article(text, *frames, cfg.moderation.aggregation);
    } catch (const RemoteError& e) {
      if (!cfg.moderation.baseline_fallback) throw;
      spdlog::warn("frame scorer unavailable, baseline used: {}", e.what());
      return analyze_article(text, BaselineFrameScorer(), cfg.moderation.aggregation);
    }
  }

  void routes() {
    server.Post("/api/articles/analyze", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = parse_body(req);
        std::string text;
        std::optional<std::string> article_id;
        if (body.contains("text")) {
          text = string_field(body, "text");
        } else if (body.contains("article_id")) {
          article_id = string_field(body, "article_id");
          if (!corpus) throw HttpError{ApiErrorCode::NotFound, "no corpus store is mounted"};
          const Article* a = corpus->find_article(*article_id);
          if (!a) throw HttpError{ApiErrorCode::NotFound, "unknown article_id '" + *article_id + "'"};
          text = a->body;
        } else {
          throw HttpError{ApiErrorCode::BadRequest, "expected 'text' or 'article_id'"};
        }
        if (detail::trim(text).empty()) throw HttpError{ApiErrorCode::BadRequest, "article text is empty"};
        auto cached = cache.get(analysis_id_for(text));
        if (!cached) {
          cached = std::make_shared<const ArticleAnalysis>(analyze(text));
          cache.put(cached);
        }
        json out = to_json(*cached);
        if (article_id) out["article_id"] = *article_id;
        send_json(res, 200, out);
      });
    });

    server.Post("/api/comments/moderate", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = parse_body(req);
        const auto id = string_field(body, "analysis_id");
        const auto comment = string_field(body, "comment");
        if (detail::trim(comment).empty()) throw HttpError{ApiErrorCode::BadRequest, "comment is empty"};
        const auto article = cache.get(id);
        if (!article) throw HttpError{ApiErrorCode::NotFound, "unknown analysis_id '" + id + "'"};
        const auto result = moderate_comment(*article, comment, *health, *frames, llm.get(), cfg.moderation);
        json out = to_json(result);
        out["analysis_id"] = id;
        send_json(res, 200, out);
      });
    });

    server.Get("/api/topics/search", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        if (!index) throw HttpError{ApiErrorCode::NotFound, "no corpus store is mounted"};
        send_json(res, 200, index->search(*corpus, req.get_param_value("q"), 3));
      });
    });

    server.Get("/api/reports/latest", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] {
        {
          std::lock_guard lock(report_mu);
          if (report) return send_json(res, 200, *report);
        }
        if (cfg.report && std::filesystem::exists(*cfg.report)) {
          std::ifstream in(*cfg.report);
          std::stringstream ss;
          ss << in.rdbuf();
          try {
            return send_json(res, 200, json::parse(ss.str()));
          } catch (const json::parse_error&) {
            throw HttpError{ApiErrorCode::Internal, "stored report is not valid JSON"};
          }
        }
        throw HttpError{ApiErrorCode::NotFound, "no report has been produced yet"};
      });
    });

    server.Get("/api/health", [this](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, {{"status", "ok"}, {"corpus", corpus != nullptr}, {"llm", llm != nullptr}});
    });

    if (cfg.static_dir) server.set_mount_point("/", cfg.static_dir->string());

    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (!res.body.empty()) return;
      if (res.status == 404) {
        send_error(res, ApiErrorCode::NotFound, "no route for " + req.method + " " + req.path);
      } else if (res.status >= 500) {
        send_error(res, ApiErrorCode::Internal, "internal error");
      } else {
        const int status = res.status;
        send_json(res, status, api_error(ApiErrorCode::BadRequest, "request rejected"));
      }
    });
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
      send_error(res, ApiErrorCode::Internal, "internal error");
    });
  }
};

Service::Service(ServiceConfig cfg, ServiceBackends backends)
    : impl_(std::make_unique<Impl>(std::move(cfg), std::move(backends))) {
  const unsigned workers = std::max(1u, impl_->cfg.worker_threads);
  impl_->server.new_task_queue = [workers] { return new httplib::ThreadPool(workers); };
}

Service::~Service() { stop(); }

int Service::bind() {
  auto& s = impl_->server;
  if (impl_->cfg.port == 0) {
    impl_->port = s.bind_to_any_port(impl_->cfg.host);
  } else {
    impl_->port = s.bind_to_port(impl_->cfg.host, impl_->cfg.port) ? impl_->cfg.port : -1;
  }
  if (impl_->port < 0) {
    throw IoError("cannot bind " + impl_->cfg.host + ":" + std::to_string(impl_->cfg.port));
  }
  return impl_->port;
}

void Service::run() { impl_->server.listen_after_bind(); }

int Service::start() {
  const int port = bind();
  impl_->thread = std::thread([this] { run(); });
  impl_->server.wait_until_ready();
  return port;
}

void Service::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

void Service::set_report(json report) {
  std::lock_guard lock(impl_->report_mu);
  impl_->report = std::move(report);
}

}  // namespace frameguard
