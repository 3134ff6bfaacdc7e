#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <string>

namespace totalloss {

// A real number or one of the two infinities, kept as explicit states so a
// degenerate total can never silently flow through arithmetic as a raw inf.
class ExtendedValue {
 public:
  enum class Kind : std::uint8_t { Finite, PosInfinity, NegInfinity };

  constexpr ExtendedValue() = default;

  // Maps an IEEE infinity onto the matching marker. NaN is a caller bug.
  static ExtendedValue of(double x) noexcept {
    if (x == std::numeric_limits<double>::infinity()) return pos_infinity();
    if (x == -std::numeric_limits<double>::infinity()) return neg_infinity();
    return ExtendedValue(Kind::Finite, x);
  }
  static constexpr ExtendedValue pos_infinity() noexcept { return {Kind::PosInfinity, 0.0}; }
  static constexpr ExtendedValue neg_infinity() noexcept { return {Kind::NegInfinity, 0.0}; }

  constexpr Kind kind() const noexcept { return kind_; }
  constexpr bool is_finite() const noexcept { return kind_ == Kind::Finite; }

  // Only meaningful when is_finite().
  constexpr double finite() const noexcept { return value_; }

  // Converts back to an IEEE double (infinities included) for display or
  // for callers that have already checked the state.
  double as_double() const noexcept {
    switch (kind_) {
      case Kind::PosInfinity: return std::numeric_limits<double>::infinity();
      case Kind::NegInfinity: return -std::numeric_limits<double>::infinity();
      case Kind::Finite: break;
    }
    return value_;
  }

  // Bitwise identity: same state and, when finite, the same bit pattern.
  bool identical(const ExtendedValue& other) const noexcept;

  std::string to_string() const;

  friend std::partial_ordering operator<=>(const ExtendedValue& a, const ExtendedValue& b) noexcept {
    return a.as_double() <=> b.as_double();
  }
  friend bool operator==(const ExtendedValue& a, const ExtendedValue& b) noexcept {
    return a.as_double() == b.as_double();
  }

 private:
  constexpr ExtendedValue(Kind kind, double value) : kind_(kind), value_(value) {}

  Kind kind_ = Kind::Finite;
  double value_ = 0.0;
};

}  // namespace totalloss
