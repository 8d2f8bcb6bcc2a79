#include "frameguard/stats/format.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace frameguard::stats {

std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  std::string s = buf;
  if (s == "-0" || s.rfind("-0.", 0) == 0) {
    // Avoid "-0.00" for values that round to zero.
    if (s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  }
  return s;
}

std::string group_thousands(long value) {
  std::string digits = std::to_string(std::labs(value));
  std::string out;
  const int n = static_cast<int>(digits.size());
  for (int i = 0; i < n; ++i) {
    if (i > 0 && (n - i) % 3 == 0) out += ',';
    out += digits[static_cast<std::size_t>(i)];
  }
  return value < 0 ? "-" + out : out;
}

std::string format_p(double p) {
  if (p < 0.001) return "p < .001";
  std::string s = fixed(p, 3);
  if (s.rfind("0.", 0) == 0) s.erase(0, 1);
  return "p = " + s;
}

std::string format_chisq(double statistic, int df, double p) {
  return "χ²(" + std::to_string(df) + ") = " + fixed(statistic, 2) + ", " + format_p(p);
}

std::string format_f(double statistic, long df1, long df2) {
  return "F(" + group_thousands(df1) + ", " + group_thousands(df2) + ") = " + fixed(statistic, 2);
}

}  // namespace frameguard::stats
