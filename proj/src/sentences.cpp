#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "frameguard/detail/text.hpp"
#include "frameguard/scoring.hpp"

namespace frameguard {

namespace {

// Compared against the token before the period, lower-cased, trailing '.' removed.
constexpr std::array<std::string_view, 44> kAbbreviations = {
    "mr",   "mrs",  "ms",  "dr",   "prof", "sr",  "jr",    "st",    "mt",   "gen",  "gov",
    "sen",  "rep",  "rev", "col",  "capt", "lt",  "sgt",   "inc",   "ltd",  "co",   "corp",
    "vs",   "etc",  "e.g", "i.e",  "u.s",  "u.k", "u.n",   "a.m",   "p.m",  "fig",  "jan",
    "feb",  "aug",  "sept", "oct", "nov",  "dec", "approx", "dept", "est",  "cf",   "ph.d",
};

bool starts_with(std::string_view s, std::size_t pos, std::string_view prefix) {
  return s.substr(pos, prefix.size()) == prefix;
}

// Closing quotes and brackets that stay attached to the preceding sentence.
std::size_t closing_width(std::string_view s, std::size_t pos) {
  if (pos >= s.size()) return 0;
  char c = s[pos];
  if (c == '"' || c == '\'' || c == ')' || c == ']') return 1;
  if (starts_with(s, pos, "\xE2\x80\x9D") || starts_with(s, pos, "\xE2\x80\x99")) return 3;
  return 0;
}

bool opens_sentence(std::string_view s, std::size_t pos) {
  if (pos >= s.size()) return false;
  char c = s[pos];
  if (detail::is_upper(c)) return true;
  std::size_t next = 0;
  if (c == '"' || c == '(' || c == '\'') {
    next = pos + 1;
  } else if (starts_with(s, pos, "\xE2\x80\x9C") || starts_with(s, pos, "\xE2\x80\x98")) {
    next = pos + 3;
  } else {
    return false;
  }
  return next < s.size() && detail::is_upper(s[next]);
}

bool is_abbreviation(std::string_view text, std::size_t period) {
  std::size_t start = period;
  while (start > 0 && !detail::is_space(text[start - 1]) && text[start - 1] != '(' &&
         text[start - 1] != '"') {
    --start;
  }
  auto token = text.substr(start, period - start);
  if (token.empty()) return false;
  if (token.size() == 1 && detail::is_upper(token[0])) return true;  // initial
  auto lower = detail::to_lower(token);
  for (auto abbr : kAbbreviations) {
    if (lower == abbr) return true;
  }
  return false;
}

bool blank_line_at(std::string_view text, std::size_t pos, std::size_t* after) {
  if (text[pos] != '\n') return false;
  std::size_t k = pos + 1;
  while (k < text.size() && (text[k] == ' ' || text[k] == '\t' || text[k] == '\r')) ++k;
  if (k < text.size() && text[k] == '\n') {
    *after = k + 1;
    return true;
  }
  return false;
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  auto emit = [&](std::size_t end) {
    auto piece = detail::trim(text.substr(start, end - start));
    if (!piece.empty()) out.emplace_back(piece);
    start = end;
  };

  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t after = 0;
    if (blank_line_at(text, i, &after)) {
      emit(i);
      i = after;
      continue;
    }
    char c = text[i];
    if (c != '.' && c != '!' && c != '?') {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < text.size() && (text[j] == '.' || text[j] == '!' || text[j] == '?')) ++j;
    while (std::size_t w = closing_width(text, j)) j += w;

    if (j >= text.size()) break;
    if (!detail::is_space(text[j])) {
      i = j;
      continue;
    }
    std::size_t k = j;
    while (k < text.size() && detail::is_space(text[k])) ++k;
    const bool abbreviated = c == '.' && is_abbreviation(text, i);
    if (opens_sentence(text, k) && !abbreviated) emit(j);
    i = j;
  }
  emit(text.size());
  return out;
}

}  // namespace frameguard
