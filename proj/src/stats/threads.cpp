#include "frameguard/stats/threads.hpp"

#include "frameguard/error.hpp"

namespace frameguard::stats {

bool mean_reply_health(const std::string& top_comment_id, const std::vector<bool>& reply_health, ThreadStats& out) {
  if (reply_health.empty()) return false;
  std::size_t healthy = 0;
  for (bool h : reply_health) healthy += h ? 1 : 0;
  out.top_comment_id = top_comment_id;
  out.n_replies = reply_health.size();
  out.mean_reply_health = static_cast<double>(healthy) / static_cast<double>(reply_health.size());
  return true;
}

std::vector<ThreadStats> thread_stats(const Corpus& corpus, const std::unordered_map<std::string, bool>& health) {
  std::vector<ThreadStats> rows;
  const auto& comments = corpus.comments();
  for (const auto& top : comments) {
    if (top.depth != 1) continue;
    std::vector<bool> replies;
    for (std::size_t pos : corpus.replies_of(top.id)) {
      const Comment& r = comments[pos];
      if (r.depth != 2 || r.beyond_max_depth) continue;
      auto it = health.find(r.id);
      if (it == health.end()) throw ValidationError("thread_stats: no health for reply " + r.id);
      replies.push_back(it->second);
    }
    ThreadStats row;
    if (mean_reply_health(top.id, replies, row)) rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace frameguard::stats
