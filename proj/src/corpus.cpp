#include "frameguard/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "frameguard/csv.hpp"
#include "frameguard/detail/random.hpp"
#include "frameguard/detail/text.hpp"
#include "frameguard/error.hpp"

namespace frameguard {

using nlohmann::json;

std::string_view to_string(Outlet o) noexcept {
  switch (o) {
    case Outlet::NYT: return "NYT";
    case Outlet::SOCC: return "SOCC";
    case Outlet::OTHER: return "OTHER";
  }
  return "OTHER";
}

std::optional<Outlet> parse_outlet(std::string_view s) {
  s = detail::trim(s);
  if (detail::iequals(s, "nyt")) return Outlet::NYT;
  if (detail::iequals(s, "socc")) return Outlet::SOCC;
  if (detail::iequals(s, "other")) return Outlet::OTHER;
  return std::nullopt;
}

std::optional<Format> parse_format(std::string_view s) {
  if (detail::iequals(s, "jsonl")) return Format::Jsonl;
  if (detail::iequals(s, "csv")) return Format::Csv;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Corpus

namespace {
const std::vector<std::size_t> kNoPositions;
}

const Article* Corpus::find_article(std::string_view id) const {
  auto it = article_pos_.find(std::string(id));
  return it == article_pos_.end() ? nullptr : &articles_[it->second];
}

const Comment* Corpus::find_comment(std::string_view id) const {
  auto it = comment_pos_.find(std::string(id));
  return it == comment_pos_.end() ? nullptr : &comments_[it->second];
}

const std::vector<std::size_t>& Corpus::comments_of(std::string_view article_id) const {
  auto it = by_article_.find(std::string(article_id));
  return it == by_article_.end() ? kNoPositions : it->second;
}

const std::vector<std::size_t>& Corpus::replies_of(std::string_view comment_id) const {
  auto it = replies_.find(std::string(comment_id));
  return it == replies_.end() ? kNoPositions : it->second;
}

std::map<std::string, std::vector<std::string>> Corpus::index() const {
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& a : articles_) {
    auto& ids = out[a.id];
    for (std::size_t pos : comments_of(a.id)) ids.push_back(comments_[pos].id);
  }
  return out;
}

// ---------------------------------------------------------------------------
// CorpusBuilder

void CorpusBuilder::add_article(Article a, Diagnostic where) {
  articles_.emplace_back(std::move(a), std::move(where));
}

void CorpusBuilder::add_comment(Comment c, Diagnostic where) {
  comments_.emplace_back(std::move(c), std::move(where));
}

void CorpusBuilder::note(Diagnostic d) { report_.diagnostics.push_back(std::move(d)); }

Corpus CorpusBuilder::build(LoadReport* report) {
  Corpus corpus;
  corpus.max_depth_ = max_depth_;
  auto reject = [&](Diagnostic where, std::string id, std::string msg) {
    where.record_id = std::move(id);
    where.message = std::move(msg);
    report_.diagnostics.push_back(std::move(where));
  };

  for (auto& [a, where] : articles_) {
    if (a.id.empty()) {
      reject(where, a.id, "article id is empty");
      ++report_.articles_dropped;
    } else if (detail::trim(a.body).empty()) {
      reject(where, a.id, "article body is empty");
      ++report_.articles_dropped;
    } else if (corpus.article_pos_.count(a.id)) {
      reject(where, a.id, "duplicate article id");
      ++report_.articles_dropped;
    } else {
      corpus.article_pos_.emplace(a.id, corpus.articles_.size());
      corpus.articles_.push_back(std::move(a));
    }
  }

  // Parents are validated before children regardless of file order; depth
  // strictly increases along accepted edges, so no cycle can be accepted.
  std::vector<std::size_t> order(comments_.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return comments_[x].first.depth < comments_[y].first.depth;
  });

  struct Accepted {
    std::string article_id;
    int depth;
  };
  std::unordered_map<std::string, Accepted> accepted;
  std::vector<bool> keep(comments_.size(), false);
  std::unordered_map<std::string, bool> seen_ids;

  for (std::size_t i : order) {
    auto& [c, where] = comments_[i];
    auto drop = [&](std::string msg) {
      reject(where, c.id, std::move(msg));
      ++report_.comments_dropped;
    };
    if (c.id.empty()) {
      drop("comment id is empty");
      continue;
    }
    if (seen_ids.count(c.id)) {
      drop("duplicate comment id");
      continue;
    }
    seen_ids[c.id] = true;
    if (!corpus.article_pos_.count(c.article_id)) {
      drop("article_id '" + c.article_id + "' does not resolve");
      continue;
    }
    if (c.depth < 1) {
      drop("depth must be >= 1");
      continue;
    }
    if (c.depth == 1 && c.parent_id) {
      drop("top-level comment (depth 1) must not have a parent_id");
      continue;
    }
    if (c.depth > 1) {
      if (!c.parent_id) {
        drop("reply (depth " + std::to_string(c.depth) + ") is missing parent_id");
        continue;
      }
      auto parent = accepted.find(*c.parent_id);
      if (parent == accepted.end()) {
        ++report_.dangling_parents;
        drop("parent_id '" + *c.parent_id + "' does not resolve to a loaded comment");
        continue;
      }
      if (parent->second.article_id != c.article_id) {
        ++report_.dangling_parents;
        drop("parent_id '" + *c.parent_id + "' belongs to a different article");
        continue;
      }
      if (parent->second.depth != c.depth - 1) {
        ++report_.dangling_parents;
        drop("parent depth " + std::to_string(parent->second.depth) +
             " is inconsistent with depth " + std::to_string(c.depth));
        continue;
      }
    }
    if (c.gold_confidence && (*c.gold_confidence < 0.0 || *c.gold_confidence > 1.0)) {
      drop("gold_confidence outside [0,1]");
      continue;
    }
    if (c.toxicity && (*c.toxicity < 0.0 || *c.toxicity > 1.0)) {
      drop("toxicity outside [0,1]");
      continue;
    }
    c.beyond_max_depth = c.depth > max_depth_;
    if (c.beyond_max_depth) ++report_.beyond_max_depth;
    accepted.emplace(c.id, Accepted{c.article_id, c.depth});
    keep[i] = true;
  }

  for (std::size_t i = 0; i < comments_.size(); ++i) {
    if (!keep[i]) continue;
    auto& c = comments_[i].first;
    const std::size_t pos = corpus.comments_.size();
    corpus.comment_pos_.emplace(c.id, pos);
    corpus.by_article_[c.article_id].push_back(pos);
    if (c.parent_id) corpus.replies_[*c.parent_id].push_back(pos);
    corpus.comments_.push_back(std::move(c));
  }

  articles_.clear();
  comments_.clear();
  if (report) {
    report->articles_dropped += report_.articles_dropped;
    report->comments_dropped += report_.comments_dropped;
    report->dangling_parents += report_.dangling_parents;
    report->beyond_max_depth += report_.beyond_max_depth;
    for (auto& d : report_.diagnostics) report->diagnostics.push_back(std::move(d));
  }
  report_ = {};
  return corpus;
}

// ---------------------------------------------------------------------------
// Record decoding

namespace {

// Field accessors over either a JSON object or a CSV row.
class RecordView {
 public:
  explicit RecordView(const json* j) : json_(j) {}
  RecordView(const csv::Document* doc, const std::vector<std::string>* row) : doc_(doc), row_(row) {}

  // nullopt when the field is missing, null or (for CSV) an empty cell.
  std::optional<std::string> str(const char* name) const {
    if (json_) {
      auto it = json_->find(name);
      if (it == json_->end() || it->is_null()) return std::nullopt;
      if (it->is_string()) return it->get<std::string>();
      if (it->is_number_integer()) return std::to_string(it->get<long long>());
      throw ValidationError(std::string("field '") + name + "' must be a string");
    }
    int col = doc_->column(name);
    if (col < 0) return std::nullopt;
    const auto& cell = (*row_)[static_cast<std::size_t>(col)];
    if (cell.empty()) return std::nullopt;
    return cell;
  }

  std::string required_str(const char* name) const {
    auto v = str(name);
    if (!v) throw ValidationError(std::string("missing required field '") + name + "'");
    return *v;
  }

  std::optional<double> number(const char* name) const {
    if (json_) {
      auto it = json_->find(name);
      if (it == json_->end() || it->is_null()) return std::nullopt;
      if (it->is_number()) return it->get<double>();
      if (it->is_boolean()) return it->get<bool>() ? 1.0 : 0.0;
      throw ValidationError(std::string("field '") + name + "' must be numeric");
    }
    auto s = str(name);
    if (!s) return std::nullopt;
    try {
      std::size_t used = 0;
      double v = std::stod(*s, &used);
      if (used != s->size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ValidationError(std::string("field '") + name + "' must be numeric, got '" + *s + "'");
    }
  }

  std::optional<bool> boolean(const char* name) const {
    if (json_) {
      auto it = json_->find(name);
      if (it != json_->end() && it->is_boolean()) return it->get<bool>();
    } else if (auto s = str(name)) {
      if (detail::iequals(*s, "true")) return true;
      if (detail::iequals(*s, "false")) return false;
    }
    auto v = number(name);
    if (!v) return std::nullopt;
    if (*v == 1.0) return true;
    if (*v == 0.0) return false;
    throw ValidationError(std::string("field '") + name + "' must be binary (0/1)");
  }

 private:
  const json* json_ = nullptr;
  const csv::Document* doc_ = nullptr;
  const std::vector<std::string>* row_ = nullptr;
};

Article decode_article(const RecordView& r) {
  Article a;
  a.id = r.required_str("id");
  auto outlet = r.required_str("outlet");
  auto parsed = parse_outlet(outlet);
  if (!parsed) throw ValidationError("outlet must be one of NYT, SOCC, OTHER; got '" + outlet + "'");
  a.outlet = *parsed;
  a.topic = r.required_str("topic");
  a.headline = r.required_str("headline");
  a.body = r.required_str("body");
  a.published = r.str("published");
  return a;
}

Comment decode_comment(const RecordView& r) {
  Comment c;
  c.id = r.required_str("id");
  c.article_id = r.required_str("article_id");
  c.parent_id = r.str("parent_id");
  auto depth = r.number("depth");
  if (!depth) throw ValidationError("missing required field 'depth'");
  if (*depth != static_cast<double>(static_cast<int>(*depth))) {
    throw ValidationError("depth must be an integer");
  }
  c.depth = static_cast<int>(*depth);
  c.body = r.required_str("body");
  c.gold_health = r.boolean("gold_health");
  c.gold_confidence = r.number("gold_confidence");
  c.toxicity = r.number("toxicity");
  return c;
}

template <class Decode, class Add>
void read_jsonl(std::string_view text, const std::string& file, Decode decode, Add add,
                std::size_t& count, std::size_t& dropped, CorpusBuilder& builder) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    auto line = detail::trim(text.substr(start, end - start));
    start = end + 1;
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    ++count;
    Diagnostic where{file, line_no, {}, {}};
    try {
      json j = json::parse(line);
      if (!j.is_object()) throw ValidationError("record is not a JSON object");
      add(decode(RecordView(&j)), where);
    } catch (const json::exception& e) {
      where.message = std::string("malformed JSON: ") + e.what();
      builder.note(where);
      ++dropped;
    } catch (const ValidationError& e) {
      where.message = e.what();
      builder.note(where);
      ++dropped;
    }
    if (end == text.size()) break;
  }
}

template <class Decode, class Add>
void read_csv(std::string_view text, const std::string& file, Decode decode, Add add,
              std::size_t& count, std::size_t& dropped, CorpusBuilder& builder) {
  auto doc = csv::parse(text);
  for (std::size_t i = 0; i < doc.rows.size(); ++i) {
    ++count;
    Diagnostic where{file, doc.lines[i], {}, {}};
    try {
      add(decode(RecordView(&doc, &doc.rows[i])), where);
    } catch (const ValidationError& e) {
      where.message = e.what();
      builder.note(where);
      ++dropped;
    }
  }
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failure on '" + p.string() + "'");
  return ss.str();
}

LoadResult load_impl(std::string_view articles, std::string_view comments, Format format,
                     const LoadOptions& opts, const std::string& articles_name,
                     const std::string& comments_name) {
  CorpusBuilder builder(opts.max_depth);
  LoadResult out;
  auto add_article = [&](Article a, Diagnostic d) { builder.add_article(std::move(a), std::move(d)); };
  auto add_comment = [&](Comment c, Diagnostic d) { builder.add_comment(std::move(c), std::move(d)); };
  auto& rep = out.report;
  if (format == Format::Jsonl) {
    read_jsonl(articles, articles_name, decode_article, add_article, rep.articles_read,
               rep.articles_dropped, builder);
    read_jsonl(comments, comments_name, decode_comment, add_comment, rep.comments_read,
               rep.comments_dropped, builder);
  } else {
    read_csv(articles, articles_name, decode_article, add_article, rep.articles_read,
             rep.articles_dropped, builder);
    read_csv(comments, comments_name, decode_comment, add_comment, rep.comments_read,
             rep.comments_dropped, builder);
  }
  out.corpus = builder.build(&rep);
  return out;
}

json article_json(const Article& a) {
  json j = {{"id", a.id},
            {"outlet", std::string(to_string(a.outlet))},
            {"topic", a.topic},
            {"headline", a.headline},
            {"body", a.body}};
  if (a.published) j["published"] = *a.published;
  return j;
}

json comment_json(const Comment& c) {
  json j = {{"id", c.id}, {"article_id", c.article_id}};
  if (c.parent_id) j["parent_id"] = *c.parent_id;
  j["depth"] = c.depth;
  j["body"] = c.body;
  if (c.gold_health) j["gold_health"] = *c.gold_health ? 1 : 0;
  if (c.gold_confidence) j["gold_confidence"] = *c.gold_confidence;
  if (c.toxicity) j["toxicity"] = *c.toxicity;
  return j;
}

void spill(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + p.string() + "'");
  out << content;
  if (!out) throw IoError("write failure on '" + p.string() + "'");
}

}  // namespace

LoadResult load_corpus(const std::filesystem::path& articles, const std::filesystem::path& comments,
                       Format format, const LoadOptions& opts) {
  return load_impl(slurp(articles), slurp(comments), format, opts, articles.string(), comments.string());
}

LoadResult load_corpus_text(std::string_view articles, std::string_view comments, Format format,
                            const LoadOptions& opts) {
  return load_impl(articles, comments, format, opts, "articles", "comments");
}

std::string to_jsonl(const Corpus& corpus, bool articles) {
  std::string out;
  if (articles) {
    for (const auto& a : corpus.articles()) out += article_json(a).dump() + '\n';
  } else {
    for (const auto& c : corpus.comments()) out += comment_json(c).dump() + '\n';
  }
  return out;
}

void save_store(const Corpus& corpus, const std::filesystem::path& dir, const LoadReport* report) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create store '" + dir.string() + "': " + ec.message());
  spill(dir / "articles.jsonl", to_jsonl(corpus, true));
  spill(dir / "comments.jsonl", to_jsonl(corpus, false));
  json manifest = {{"format_version", 1},
                   {"articles", corpus.articles().size()},
                   {"comments", corpus.comments().size()},
                   {"max_depth", corpus.max_depth()}};
  if (report) {
    manifest["load"] = {{"articles_read", report->articles_read},
                        {"comments_read", report->comments_read},
                        {"articles_dropped", report->articles_dropped},
                        {"comments_dropped", report->comments_dropped},
                        {"dangling_parents", report->dangling_parents},
                        {"beyond_max_depth", report->beyond_max_depth}};
  }
  spill(dir / "manifest.json", manifest.dump(2) + '\n');
}

LoadResult load_store(const std::filesystem::path& dir, const LoadOptions& opts) {
  if (!std::filesystem::is_directory(dir)) throw IoError("store '" + dir.string() + "' is not a directory");
  LoadOptions effective = opts;
  if (std::filesystem::exists(dir / "manifest.json")) {
    try {
      auto m = json::parse(slurp(dir / "manifest.json"));
      if (m.contains("max_depth")) effective.max_depth = m["max_depth"].get<int>();
    } catch (const json::exception& e) {
      throw IoError("store manifest is malformed: " + std::string(e.what()));
    }
  }
  return load_corpus(dir / "articles.jsonl", dir / "comments.jsonl", Format::Jsonl, effective);
}

// ---------------------------------------------------------------------------
// Splits

std::string_view to_string(SplitName s) noexcept {
  switch (s) {
    case SplitName::Train: return "train";
    case SplitName::Val: return "val";
    case SplitName::Test: return "test";
  }
  return "train";
}

std::size_t LabeledSplit::count(bool label) const noexcept {
  return static_cast<std::size_t>(std::count_if(records.begin(), records.end(),
                                                [&](const auto& r) { return r.label == label; }));
}

LabeledSplit rebalance(const LabeledSplit& split, const RebalanceOptions& opts) {
  if (!(opts.conf_threshold >= 0.0 && opts.conf_threshold <= 1.0)) {
    throw ValidationError("rebalance: conf_threshold must lie in [0,1]");
  }
  if (!(opts.majority_ratio >= 1.0)) throw ValidationError("rebalance: majority_ratio must be >= 1");

  std::vector<std::size_t> kept[2];
  for (std::size_t i = 0; i < split.records.size(); ++i) {
    const auto& r = split.records[i];
    if (r.confidence < 0.0 || r.confidence > 1.0) {
      throw ValidationError("rebalance: record confidence outside [0,1]");
    }
    if (r.confidence >= opts.conf_threshold) kept[r.label ? 1 : 0].push_back(i);
  }
  const int minority = kept[1].size() < kept[0].size() ? 1 : 0;
  const int majority = 1 - minority;
  if (kept[minority].empty()) {
    throw ValidationError("rebalance: minority class is empty after confidence filtering");
  }

  const auto cap = static_cast<std::size_t>(
      std::floor(opts.majority_ratio * static_cast<double>(kept[minority].size())));
  auto& maj = kept[majority];
  if (maj.size() > cap) {
    std::mt19937_64 rng(opts.seed);
    detail::shuffle(std::span<std::size_t>(maj), rng);
    maj.resize(cap);
  }

  std::vector<std::size_t> chosen;
  chosen.reserve(kept[0].size() + kept[1].size());
  chosen.insert(chosen.end(), kept[0].begin(), kept[0].end());
  chosen.insert(chosen.end(), kept[1].begin(), kept[1].end());
  std::sort(chosen.begin(), chosen.end());

  LabeledSplit out;
  out.name = split.name;
  out.seed = opts.seed;
  out.records.reserve(chosen.size());
  for (std::size_t i : chosen) out.records.push_back(split.records[i]);
  return out;
}

std::vector<LabeledSplit> stratified_split(const LabeledSplit& pool, const SplitFractions& f,
                                           std::uint64_t seed) {
  if (f.train < 0.0 || f.val < 0.0 || f.train + f.val > 1.0) {
    throw ValidationError("stratified_split: fractions must be non-negative and sum to <= 1");
  }
  std::vector<LabeledSplit> out(3);
  out[0].name = SplitName::Train;
  out[1].name = SplitName::Val;
  out[2].name = SplitName::Test;
  std::vector<std::size_t> assigned[3];
  std::mt19937_64 rng(seed);
  for (bool label : {false, true}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < pool.records.size(); ++i) {
      if (pool.records[i].label == label) idx.push_back(i);
    }
    detail::shuffle(std::span<std::size_t>(idx), rng);
    const double n = static_cast<double>(idx.size());
    auto n_train = std::min(idx.size(), static_cast<std::size_t>(std::llround(f.train * n)));
    auto n_val = std::min(idx.size() - n_train, static_cast<std::size_t>(std::llround(f.val * n)));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      int which = k < n_train ? 0 : (k < n_train + n_val ? 1 : 2);
      assigned[which].push_back(idx[k]);
    }
  }
  for (int s = 0; s < 3; ++s) {
    std::sort(assigned[s].begin(), assigned[s].end());
    for (std::size_t i : assigned[s]) out[static_cast<std::size_t>(s)].records.push_back(pool.records[i]);
    out[static_cast<std::size_t>(s)].seed = seed;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stats

CorpusStats corpus_stats(const Corpus& corpus, const std::unordered_map<std::string, bool>& health) {
  CorpusStats out;
  for (const auto& c : corpus.comments()) {
    auto h = health.find(c.id);
    if (h == health.end()) throw ValidationError("corpus_stats: no health value for comment '" + c.id + "'");
    const Article* a = corpus.find_article(c.article_id);
    const std::string outlet(to_string(a->outlet));
    for (Proportion* p : {&out.by_topic[a->topic], &out.by_outlet[outlet],
                          &out.by_outlet_topic[outlet][a->topic], &out.overall}) {
      ++p->total;
      if (h->second) ++p->healthy;
    }
  }
  return out;
}

}  // namespace frameguard
