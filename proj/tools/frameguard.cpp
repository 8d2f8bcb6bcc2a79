// frameguard command line: corpus ingestion, analyses, one-off moderation and the HTTP service.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "frameguard/corpus.hpp"
#include "frameguard/error.hpp"
#include "frameguard/pipeline.hpp"
#include "frameguard/service.hpp"
#include "frameguard/stats/table.hpp"

namespace fg = frameguard;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw fg::IoError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw fg::IoError("cannot write " + path);
  out << text;
}

fg::stats::DataTable read_table(const std::string& path) {
  const auto text = read_file(path);
  const bool jsonl = path.size() >= 6 && path.substr(path.size() - 6) == ".jsonl";
  return jsonl ? fg::stats::DataTable::from_jsonl(text) : fg::stats::DataTable::from_csv(text);
}

fg::PipelineConfig pipeline_from_env() {
  fg::PipelineConfig cfg;
  cfg.health_scorer = fg::ScorerConfig::from_env("FRAMEGUARD_HEALTH_URL");
  cfg.frame_scorer = fg::ScorerConfig::from_env("FRAMEGUARD_FRAME_URL");
  return cfg;
}

fg::Service* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frame-aware comment health analysis and moderation"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Validate a corpus and write a flat-file store");
  std::string articles, comments, format = "jsonl", store_out;
  int max_depth = 2;
  ingest->add_option("--articles", articles, "Articles file")->required()->check(CLI::ExistingFile);
  ingest->add_option("--comments", comments, "Comments file")->required()->check(CLI::ExistingFile);
  ingest->add_option("--format", format, "jsonl or csv")->check(CLI::IsMember({"jsonl", "csv"}));
  ingest->add_option("--out", store_out, "Store directory")->required();
  ingest->add_option("--max-depth", max_depth, "Deepest reply level kept for reply analyses");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Score a stored corpus and run the health analyses");
  std::string store, report_out, text_out;
  std::uint64_t seed = 42;
  unsigned threads = 0;
  std::string weighting = "equal";
  analyze->add_option("--store", store, "Store directory")->required()->check(CLI::ExistingDirectory);
  analyze->add_option("--report", report_out, "Report JSON path ('-' for stdout)")->required();
  analyze->add_option("--seed", seed, "Run seed recorded in the report");
  analyze->add_option("--threads", threads, "Scoring workers (0 = all cores)");
  analyze->add_option("--emm-weighting", weighting, "equal or proportional")
      ->check(CLI::IsMember({"equal", "proportional"}));
  analyze->add_option("--text", text_out, "Also write a plain-text table rendering");

  // moderate
  auto* moderate = app.add_subcommand("moderate", "Moderate one comment against an article");
  std::string article_file, comment_text;
  moderate->add_option("--article", article_file, "Article text file")->required()->check(CLI::ExistingFile);
  moderate->add_option("--comment", comment_text, "Comment text")->required();

  // rq1 / rq2
  std::string table_in, table_out;
  bool as_text = false;
  auto* rq1 = app.add_subcommand("rq1", "Mixed-effects health models over a flat table");
  auto* rq2 = app.add_subcommand("rq2", "Mean reply health regression over a flat table");
  for (auto* sub : {rq1, rq2}) {
    sub->add_option("--table", table_in, "CSV or JSONL table")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", table_out, "Report JSON path (stdout by default)");
    sub->add_flag("--text", as_text, "Print a plain-text table instead of JSON");
  }

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  int port = -1;
  std::string config_file, serve_store, serve_report, static_dir;
  serve->add_option("--port", port, "Listen port");
  serve->add_option("--config", config_file, "Service config JSON")->check(CLI::ExistingFile);
  serve->add_option("--store", serve_store, "Corpus store for search and article ids");
  serve->add_option("--report", serve_report, "Report served by /api/reports/latest");
  serve->add_option("--static", static_dir, "Static files served at /");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);
  spdlog::set_pattern("[%l] %v");

  try {
    if (*ingest) {
      const auto fmt = fg::parse_format(format);
      auto result = fg::load_corpus(articles, comments, *fmt, {max_depth});
      fg::save_store(result.corpus, store_out, &result.report);
      const auto& r = result.report;
      for (const auto& d : r.diagnostics) {
        spdlog::warn("{}:{} {} {}", d.file, d.line, d.record_id, d.message);
      }
      std::cout << "articles: " << result.corpus.articles().size() << " kept, " << r.articles_dropped
                << " dropped\ncomments: " << result.corpus.comments().size() << " kept, " << r.comments_dropped
                << " dropped (" << r.dangling_parents << " dangling parents, " << r.beyond_max_depth
                << " beyond max depth)\n";
      return 0;
    }

    if (*analyze) {
      auto loaded = fg::load_store(store);
      auto cfg = pipeline_from_env();
      cfg.seed = seed;
      cfg.threads = threads;
      cfg.emm_weighting = weighting == "equal" ? fg::stats::EmmWeighting::Equal : fg::stats::EmmWeighting::Proportional;
      const auto report = fg::analyze_corpus(loaded.corpus, cfg);
      write_output(report_out, report.dump());
      if (!text_out.empty()) write_output(text_out, report.render_text());
      return 0;
    }

    if (*moderate) {
      const auto cfg = pipeline_from_env();
      const auto health = fg::make_health_scorer(cfg.health_scorer);
      const auto frames = fg::make_frame_scorer(cfg.frame_scorer);
      std::unique_ptr<fg::LlmClient> llm;
      if (auto llm_cfg = fg::LlmConfig::from_env()) llm = std::make_unique<fg::HttpLlmClient>(*llm_cfg);
      const auto article = fg::analyze_article(read_file(article_file), *frames);
      const auto result = fg::moderate_comment(article, comment_text, *health, *frames, llm.get());
      std::cout << fg::to_json(result).dump(2) << "\n";
      return 0;
    }

    if (*rq1 || *rq2) {
      const auto table = read_table(table_in);
      const auto report = *rq1 ? fg::analyze_rq1_table(table) : fg::analyze_rq2_table(table);
      write_output(table_out, as_text ? report.render_text() : report.dump());
      return 0;
    }

    if (*serve) {
      fg::ServiceConfig cfg = config_file.empty() ? fg::ServiceConfig{} : fg::ServiceConfig::from_file(config_file);
      cfg.apply_env();
      if (port >= 0) cfg.port = port;
      if (!serve_store.empty()) cfg.store = serve_store;
      if (!serve_report.empty()) cfg.report = serve_report;
      if (!static_dir.empty()) cfg.static_dir = static_dir;
      fg::Service service(cfg);
      const int bound = service.bind();
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      spdlog::info("listening on http://{}:{}", cfg.host, bound);
      service.run();
      g_service = nullptr;
      return 0;
    }
  } catch (const fg::Error& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
