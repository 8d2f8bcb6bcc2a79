#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "frameguard/corpus.hpp"

namespace frameguard::stats {

struct ThreadStats {
  std::string top_comment_id;
  double mean_reply_health = 0.0;
  std::size_t n_replies = 0;
};

// Mean of binary reply health over the given replies. Returns false (no row)
// when there are no replies.
bool mean_reply_health(const std::string& top_comment_id, const std::vector<bool>& reply_health, ThreadStats& out);

// One row per top-level comment that has at least one depth-2 reply, in
// corpus order. Replies beyond the maximum depth are ignored. Throws
// ValidationError when a reply has no health entry.
std::vector<ThreadStats> thread_stats(const Corpus& corpus, const std::unordered_map<std::string, bool>& health);

}  // namespace frameguard::stats
