#include "chosim/sim_time.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace chosim {

std::string SimTime::str() const {
  const bool neg = us_ < 0;
  const std::uint64_t mag = neg ? static_cast<std::uint64_t>(-(us_ + 1)) + 1 : static_cast<std::uint64_t>(us_);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%s%llu.%06llu", neg ? "-" : "", static_cast<unsigned long long>(mag / 1'000'000),
                static_cast<unsigned long long>(mag % 1'000'000));
  return buf;
}

SimTime SimTime::parse(const std::string& text) {
  auto fail = [&]() -> SimTime { throw std::invalid_argument("bad time value '" + text + "'"); };
  std::string_view s = text;
  bool neg = false;
  if (!s.empty() && s.front() == '-') {
    neg = true;
    s.remove_prefix(1);
  }
  const auto dot = s.find('.');
  const std::string_view whole = s.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
  if (whole.empty() && frac.empty()) return fail();
  if (frac.size() > 6) return fail();

  std::int64_t sec = 0;
  if (!whole.empty()) {
    const auto [p, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), sec);
    if (ec != std::errc{} || p != whole.data() + whole.size()) return fail();
  }
  std::int64_t micros = 0;
  for (std::size_t i = 0; i < 6; ++i) {
    int digit = 0;
    if (i < frac.size()) {
      if (frac[i] < '0' || frac[i] > '9') return fail();
      digit = frac[i] - '0';
    }
    micros = micros * 10 + digit;
  }
  const std::int64_t v = sec * 1'000'000 + micros;
  return SimTime{neg ? -v : v};
}

}  // namespace chosim
