#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace frameguard {

enum class Outlet { NYT, SOCC, OTHER };

std::string_view to_string(Outlet o) noexcept;
std::optional<Outlet> parse_outlet(std::string_view s);

struct Article {
  std::string id;
  Outlet outlet = Outlet::OTHER;
  std::string topic;
  std::string headline;
  std::string body;
  std::optional<std::string> published;
};

struct Comment {
  std::string id;
  std::string article_id;
  std::optional<std::string> parent_id;
  int depth = 1;
  std::string body;
  std::optional<bool> gold_health;
  std::optional<double> gold_confidence;
  std::optional<double> toxicity;
  // Set by the loader when depth exceeds the configured maximum. Such comments
  // stay in the corpus but are left out of reply-level analyses.
  bool beyond_max_depth = false;
};

struct Diagnostic {
  std::string file;
  std::size_t line = 0;
  std::string record_id;
  std::string message;
};

struct LoadReport {
  std::size_t articles_read = 0;
  std::size_t comments_read = 0;
  std::size_t articles_dropped = 0;
  std::size_t comments_dropped = 0;
  std::size_t dangling_parents = 0;
  std::size_t beyond_max_depth = 0;
  std::vector<Diagnostic> diagnostics;
};

// Immutable after construction. Every comment resolves to an article and
// the reply graph is a forest (parents are always exactly one level up).
class Corpus {
 public:
  Corpus() = default;

  const std::vector<Article>& articles() const noexcept { return articles_; }
  const std::vector<Comment>& comments() const noexcept { return comments_; }

  const Article* find_article(std::string_view id) const;
  const Comment* find_comment(std::string_view id) const;

  // Comment positions (into comments()) for an article, in load order.
  const std::vector<std::size_t>& comments_of(std::string_view article_id) const;
  // Direct replies of a comment, in load order.
  const std::vector<std::size_t>& replies_of(std::string_view comment_id) const;

  // article id -> comment ids, in load order.
  std::map<std::string, std::vector<std::string>> index() const;

  int max_depth() const noexcept { return max_depth_; }

 private:
  friend class CorpusBuilder;

  std::vector<Article> articles_;
  std::vector<Comment> comments_;
  std::unordered_map<std::string, std::size_t> article_pos_;
  std::unordered_map<std::string, std::size_t> comment_pos_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_article_;
  std::unordered_map<std::string, std::vector<std::size_t>> replies_;
  int max_depth_ = 2;
};

// Validates records and assembles a Corpus. Invalid records are dropped with a
// diagnostic instead of failing the whole load.
class CorpusBuilder {
 public:
  explicit CorpusBuilder(int max_depth = 2) : max_depth_(max_depth) {}

  void add_article(Article a, Diagnostic where = {});
  void add_comment(Comment c, Diagnostic where = {});
  void note(Diagnostic d);

  Corpus build(LoadReport* report = nullptr);

 private:
  int max_depth_;
  std::vector<std::pair<Article, Diagnostic>> articles_;
  std::vector<std::pair<Comment, Diagnostic>> comments_;
  LoadReport report_;
};

enum class Format { Jsonl, Csv };

std::optional<Format> parse_format(std::string_view s);

struct LoadOptions {
  int max_depth = 2;
};

struct LoadResult {
  Corpus corpus;
  LoadReport report;
};

// Throws IoError when a file cannot be read. Record-level problems (missing
// required field, wrong type, dangling parent) are reported and the record is
// dropped.
LoadResult load_corpus(const std::filesystem::path& articles, const std::filesystem::path& comments,
                       Format format, const LoadOptions& opts = {});
LoadResult load_corpus_text(std::string_view articles, std::string_view comments, Format format,
                            const LoadOptions& opts = {});

// Flat-file store: a directory holding articles.jsonl, comments.jsonl and
// manifest.json.
void save_store(const Corpus& corpus, const std::filesystem::path& dir, const LoadReport* report = nullptr);
LoadResult load_store(const std::filesystem::path& dir, const LoadOptions& opts = {});

std::string to_jsonl(const Corpus& corpus, bool articles);

// ---------------------------------------------------------------------------
// Labelled splits and rebalancing

enum class SplitName { Train, Val, Test };
std::string_view to_string(SplitName s) noexcept;

struct LabeledRecord {
  std::string text;
  bool label = false;  // true = healthy
  double confidence = 1.0;

  bool operator==(const LabeledRecord&) const = default;
};

struct LabeledSplit {
  SplitName name = SplitName::Train;
  std::vector<LabeledRecord> records;
  // Seed of the undersampling draw that produced this split, if any.
  std::optional<std::uint64_t> seed;

  std::size_t count(bool label) const noexcept;
};

struct RebalanceOptions {
  double conf_threshold = 0.8;
  double majority_ratio = 2.0;
  std::uint64_t seed = 42;
};

// Keeps records with confidence >= threshold, all of the minority class and a
// seeded uniform subsample of the majority class capped at
// floor(majority_ratio * minority). Input order is preserved.
// Throws ValidationError on bad parameters or an empty minority class.
LabeledSplit rebalance(const LabeledSplit& split, const RebalanceOptions& opts = {});

struct SplitFractions {
  double train = 0.8;
  double val = 0.1;
};

// Per-class shuffle then cut: train and val counts are rounded to nearest,
// test receives the remainder.
std::vector<LabeledSplit> stratified_split(const LabeledSplit& pool, const SplitFractions& f = {},
                                           std::uint64_t seed = 42);

// ---------------------------------------------------------------------------
// Health proportions

struct Proportion {
  std::size_t healthy = 0;
  std::size_t total = 0;
  double rate() const noexcept { return total ? static_cast<double>(healthy) / total : 0.0; }
};

struct CorpusStats {
  std::map<std::string, Proportion> by_topic;
  std::map<std::string, Proportion> by_outlet;
  std::map<std::string, std::map<std::string, Proportion>> by_outlet_topic;
  Proportion overall;
};

// Throws ValidationError when a comment has no health entry.
CorpusStats corpus_stats(const Corpus& corpus, const std::unordered_map<std::string, bool>& health);

}  // namespace frameguard
