#pragma once

#include <compare>
#include <cmath>
#include <cstdint>
#include <string>

namespace chosim {

/// Simulated time with microsecond resolution.
///
/// Every timestamp in the simulator is an integer count of microseconds so
/// that outage sums and event ordering are exact and reproducible. Table
/// constants such as 54.375 ms are representable without rounding.
class SimTime {
public:
  constexpr SimTime() = default;

  static constexpr SimTime us(std::int64_t v) { return SimTime{v}; }
  static constexpr SimTime ms(std::int64_t v) { return SimTime{v * 1000}; }
  static constexpr SimTime s(std::int64_t v) { return SimTime{v * 1'000'000}; }

  /// Converts fractional milliseconds, rounding to the nearest microsecond.
  static SimTime from_ms(double v) { return SimTime{std::llround(v * 1000.0)}; }
  static SimTime from_s(double v) { return SimTime{std::llround(v * 1e6)}; }

  constexpr std::int64_t count_us() const { return us_; }
  constexpr double to_ms() const { return static_cast<double>(us_) / 1e3; }
  constexpr double to_s() const { return static_cast<double>(us_) / 1e6; }

  constexpr SimTime operator+(SimTime o) const { return SimTime{us_ + o.us_}; }
  constexpr SimTime operator-(SimTime o) const { return SimTime{us_ - o.us_}; }
  constexpr SimTime operator*(std::int64_t k) const { return SimTime{us_ * k}; }
  constexpr SimTime& operator+=(SimTime o) {
    us_ += o.us_;
    return *this;
  }
  constexpr SimTime& operator-=(SimTime o) {
    us_ -= o.us_;
    return *this;
  }
  constexpr auto operator<=>(const SimTime&) const = default;

  /// Fixed "seconds.micros" rendering, e.g. "12.054375". Parses back exactly.
  std::string str() const;
  static SimTime parse(const std::string& text);

private:
  constexpr explicit SimTime(std::int64_t v) : us_(v) {}
  std::int64_t us_ = 0;
};

}  // namespace chosim
