#pragma once

#include <string>

namespace frameguard::stats {

// "p < .001" below one in a thousand, otherwise "p = .042" (three decimals,
// no leading zero).
std::string format_p(double p);

// "χ²(2) = 340.61, p < .001"
std::string format_chisq(double statistic, int df, double p);

// "F(29, 72,800) = 73.82"; integers carry thousands separators.
std::string format_f(double statistic, long df1, long df2);

// 72800 -> "72,800"
std::string group_thousands(long value);

// Fixed-point with `decimals` places.
std::string fixed(double value, int decimals);

}  // namespace frameguard::stats
