#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cvcsp {

/// Input or document is malformed (bad scope, unknown function, parse failure).
struct StructuralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A configured resource guard was exceeded (search nodes, enumeration size).
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An invariant that should hold by construction was observed to fail.
struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

namespace detail {

/// Signed exact rational on 64-bit words; intermediate products go through
/// 128-bit arithmetic and the reduced result must fit back into 64 bits.
struct Rat {
  std::int64_t num = 0;
  std::int64_t den = 1;  // > 0, gcd(|num|, den) == 1

  static Rat make(std::int64_t n, std::int64_t d);
  friend Rat operator+(const Rat& a, const Rat& b);
  friend Rat operator-(const Rat& a, const Rat& b);
  Rat operator-() const { return Rat{-num, den}; }
  friend bool operator==(const Rat&, const Rat&) = default;
  friend std::strong_ordering operator<=>(const Rat& a, const Rat& b);
  std::string str() const;
};

}  // namespace detail

/// A cost: a non-negative exact rational or positive infinity.
/// Addition saturates at infinity; comparison is total with infinity maximal.
class Cost {
 public:
  constexpr Cost() : num_(0), den_(1) {}

  static Cost infinity() {
    Cost c;
    c.num_ = 1;
    c.den_ = 0;
    return c;
  }

  /// Builds num/den in lowest terms. Throws StructuralError on a negative
  /// value or a non-positive denominator.
  static Cost ratio(std::int64_t num, std::int64_t den = 1);

  /// Accepts "inf", "p" and "p/q"; returns nullopt on anything else
  /// (including negative values).
  static std::optional<Cost> parse(std::string_view text);

  bool finite() const { return den_ != 0; }
  bool is_zero() const { return den_ != 0 && num_ == 0; }
  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  /// Canonical text form: "inf", "3", "3/2".
  std::string str() const;

  friend Cost operator+(const Cost& a, const Cost& b);
  Cost& operator+=(const Cost& o) { return *this = *this + o; }

  friend bool operator==(const Cost&, const Cost&) = default;
  friend std::strong_ordering operator<=>(const Cost& a, const Cost& b);

 private:
  std::int64_t num_;
  std::int64_t den_;  // 0 encodes infinity (num_ == 1)
};

}  // namespace cvcsp
