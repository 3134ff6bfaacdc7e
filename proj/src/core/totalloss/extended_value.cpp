#include "totalloss/extended_value.hpp"

#include <bit>
#include <cstdio>

namespace totalloss {

bool ExtendedValue::identical(const ExtendedValue& other) const noexcept {
  if (kind_ != other.kind_) return false;
  if (kind_ != Kind::Finite) return true;
  return std::bit_cast<std::uint64_t>(value_) == std::bit_cast<std::uint64_t>(other.value_);
}

std::string ExtendedValue::to_string() const {
  switch (kind_) {
    case Kind::PosInfinity: return "+inf";
    case Kind::NegInfinity: return "-inf";
    case Kind::Finite: break;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value_);
  return buf;
}

}  // namespace totalloss
