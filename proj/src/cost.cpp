#include "cvcsp/cost.hpp"

#include <charconv>
#include <numeric>

namespace cvcsp {
namespace detail {

namespace {

using I128 = __int128;

std::int64_t narrow(I128 v, const char* what) {
  if (v > INT64_MAX || v < INT64_MIN)
    throw std::overflow_error(std::string("rational overflow in ") + what);
  return static_cast<std::int64_t>(v);
}

I128 gcd128(I128 a, I128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    I128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

}  // namespace

Rat Rat::make(std::int64_t n, std::int64_t d) {
  if (d == 0) throw StructuralError("rational with zero denominator");
  I128 nn = n, dd = d;
  if (dd < 0) {
    nn = -nn;
    dd = -dd;
  }
  I128 g = gcd128(nn, dd);
  if (g > 1) {
    nn /= g;
    dd /= g;
  }
  return Rat{narrow(nn, "make"), narrow(dd, "make")};
}

Rat operator+(const Rat& a, const Rat& b) {
  I128 nn = I128(a.num) * b.den + I128(b.num) * a.den;
  I128 dd = I128(a.den) * b.den;
  I128 g = gcd128(nn, dd);
  if (g > 1) {
    nn /= g;
    dd /= g;
  }
  return Rat{narrow(nn, "add"), narrow(dd, "add")};
}

Rat operator-(const Rat& a, const Rat& b) { return a + Rat{-b.num, b.den}; }

std::strong_ordering operator<=>(const Rat& a, const Rat& b) {
  I128 lhs = I128(a.num) * b.den;
  I128 rhs = I128(b.num) * a.den;
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::string Rat::str() const {
  std::string s = std::to_string(num);
  if (den != 1) s += "/" + std::to_string(den);
  return s;
}

}  // namespace detail

Cost Cost::ratio(std::int64_t num, std::int64_t den) {
  if (den <= 0) throw StructuralError("cost denominator must be positive");
  if (num < 0) throw StructuralError("costs are non-negative");
  std::int64_t g = std::gcd(num, den);
  Cost c;
  c.num_ = num / g;
  c.den_ = den / g;
  return c;
}

std::optional<Cost> Cost::parse(std::string_view text) {
  if (text == "inf") return infinity();
  auto parse_int = [](std::string_view s, std::int64_t& out) {
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
  };
  std::int64_t num = 0, den = 1;
  auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    if (!parse_int(text, num)) return std::nullopt;
  } else {
    if (!parse_int(text.substr(0, slash), num)) return std::nullopt;
    if (!parse_int(text.substr(slash + 1), den)) return std::nullopt;
  }
  if (num < 0 || den <= 0) return std::nullopt;
  return ratio(num, den);
}

std::string Cost::str() const {
  if (!finite()) return "inf";
  std::string s = std::to_string(num_);
  if (den_ != 1) s += "/" + std::to_string(den_);
  return s;
}

Cost operator+(const Cost& a, const Cost& b) {
  if (!a.finite() || !b.finite()) return Cost::infinity();
  detail::Rat r = detail::Rat{a.num_, a.den_} + detail::Rat{b.num_, b.den_};
  Cost c;
  c.num_ = r.num;
  c.den_ = r.den;
  return c;
}

std::strong_ordering operator<=>(const Cost& a, const Cost& b) {
  if (!a.finite() && !b.finite()) return std::strong_ordering::equal;
  if (!a.finite()) return std::strong_ordering::greater;
  if (!b.finite()) return std::strong_ordering::less;
  return detail::Rat{a.num_, a.den_} <=> detail::Rat{b.num_, b.den_};
}

}  // namespace cvcsp
