#pragma once

// Exact field arithmetic over Q and prime fields F_p.

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace bnt {

using Rational = boost::multiprecision::cpp_rational;

struct Field {
  // p == 0 means the rationals; otherwise a prime modulus.
  std::int64_t p = 0;

  bool is_q() const { return p == 0; }
  bool operator==(const Field& o) const { return p == o.p; }
  bool operator!=(const Field& o) const { return p != o.p; }

  static bool is_prime(std::int64_t n) {
    if (n < 2) return false;
    for (std::int64_t d = 2; d * d <= n; ++d)
      if (n % d == 0) return false;
    return true;
  }

  static Field parse(const std::string& spec) {
    if (spec == "Q" || spec == "q") return Field{0};
    std::size_t pos = 0;
    std::int64_t v = 0;
    try {
      v = std::stoll(spec, &pos);
    } catch (...) {
      throw std::invalid_argument("field spec not 'Q' or an integer: " + spec);
    }
    if (pos != spec.size())
      throw std::invalid_argument("trailing junk in field spec: " + spec);
    if (!is_prime(v))
      throw std::invalid_argument("modulus is not prime: " + spec);
    return Field{v};
  }

  std::string to_string() const { return is_q() ? "Q" : std::to_string(p); }
};

class Scalar {
 public:
  Scalar() : field_{0}, q_(0) {}
  Scalar(Field f, std::int64_t n) : field_(f) {
    if (f.is_q()) {
      q_ = n;
    } else {
      r_ = n % f.p;
      if (r_ < 0) r_ += f.p;
    }
  }
  Scalar(Field f, const Rational& v) : field_(f) {
    if (!f.is_q()) throw std::invalid_argument("rational value in F_p field");
    q_ = v;
  }

  Field field() const { return field_; }
  bool is_zero() const { return field_.is_q() ? q_ == 0 : r_ == 0; }
  bool is_one() const { return field_.is_q() ? q_ == 1 : r_ == 1; }
  const Rational& rational() const { return q_; }
  std::int64_t residue() const { return r_; }

  Scalar operator-() const {
    Scalar s(*this);
    if (field_.is_q())
      s.q_ = -q_;
    else if (r_ != 0)
      s.r_ = field_.p - r_;
    return s;
  }
  Scalar operator+(const Scalar& o) const {
    check(o);
    Scalar s(*this);
    if (field_.is_q())
      s.q_ += o.q_;
    else
      s.r_ = (r_ + o.r_) % field_.p;
    return s;
  }
  Scalar operator-(const Scalar& o) const { return *this + (-o); }
  Scalar operator*(const Scalar& o) const {
    check(o);
    Scalar s(*this);
    if (field_.is_q()) {
      s.q_ *= o.q_;
    } else {
      s.r_ = mulmod(r_, o.r_, field_.p);
    }
    return s;
  }
  Scalar inv() const {
    if (is_zero()) throw std::domain_error("division by zero");
    Scalar s(*this);
    if (field_.is_q()) {
      s.q_ = 1 / q_;
    } else {
      // extended Euclid
      std::int64_t a = r_, m = field_.p, x0 = 1, x1 = 0;
      while (m) {
        std::int64_t q = a / m;
        std::int64_t t = a - q * m;
        a = m;
        m = t;
        t = x0 - q * x1;
        x0 = x1;
        x1 = t;
      }
      s.r_ = x0 % field_.p;
      if (s.r_ < 0) s.r_ += field_.p;
    }
    return s;
  }
  Scalar operator/(const Scalar& o) const { return *this * o.inv(); }
  Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
  Scalar& operator-=(const Scalar& o) { return *this = *this - o; }
  Scalar& operator*=(const Scalar& o) { return *this = *this * o; }

  bool operator==(const Scalar& o) const {
    return field_ == o.field_ && (field_.is_q() ? q_ == o.q_ : r_ == o.r_);
  }
  bool operator!=(const Scalar& o) const { return !(*this == o); }

  std::string to_string() const {
    if (field_.is_q()) return q_.str();
    return std::to_string(r_);
  }

  static Scalar parse(Field f, const std::string& text) {
    if (f.is_q()) return Scalar(f, Rational(text));
    return Scalar(f, std::stoll(text));
  }

  static Scalar zero(Field f) { return Scalar(f, 0); }
  static Scalar one(Field f) { return Scalar(f, 1); }

 private:
  void check(const Scalar& o) const {
    if (field_ != o.field_) throw std::invalid_argument("field mismatch");
  }
  static std::int64_t mulmod(std::int64_t a, std::int64_t b, std::int64_t p) {
    return static_cast<std::int64_t>(
        static_cast<unsigned __int128>(a) * static_cast<unsigned __int128>(b) %
        static_cast<unsigned __int128>(p));
  }

  Field field_;
  std::int64_t r_ = 0;  // F_p residue in [0, p)
  Rational q_;          // rational value
};

}  // namespace bnt
