#pragma once

// The Bar-Natan quiver algebra B over a field: two idempotents (• and ∘),
// arrows S and D, all adjacent S·D and D·S compositions zero, and the
// central element G = S^2 - D.  Standard basis: ι, G^n·D, G^n·SS (loops)
// and G^n·S (crossing paths).

#include <algorithm>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "bnt/coeff.hpp"

namespace bnt {

enum class Idem : std::uint8_t { B = 0, W = 1 };  // B = • (dot), W = ∘

inline Idem other(Idem i) { return i == Idem::B ? Idem::W : Idem::B; }
inline char idem_char(Idem i) { return i == Idem::B ? '.' : 'o'; }

enum class Kind : std::uint8_t { Id = 0, D = 1, S = 2, SS = 3 };

// A standard-basis element G^g * kind, rooted at its source idempotent.
struct Pure {
  Kind kind = Kind::Id;
  Idem source = Idem::B;
  int g = 0;

  Idem target() const { return kind == Kind::S ? other(source) : source; }
  int qdeg() const {
    int base = kind == Kind::Id ? 0 : kind == Kind::S ? -1 : -2;
    return base - 2 * g;
  }
  bool operator<(const Pure& o) const {
    return std::tie(kind, source, g) < std::tie(o.kind, o.source, o.g);
  }
  bool operator==(const Pure& o) const {
    return kind == o.kind && source == o.source && g == o.g;
  }

  std::string to_string() const {
    std::string s;
    if (g > 0) s += "G^" + std::to_string(g) + "*";
    switch (kind) {
      case Kind::Id: s += "i"; break;
      case Kind::D: s += "D"; break;
      case Kind::S: s += "S"; break;
      case Kind::SS: s += "SS"; break;
    }
    s += idem_char(source);
    return s;
  }
};

// A field-linear combination of standard-basis elements.
struct AlgElt {
  Field field;
  std::map<Pure, Scalar> terms;

  explicit AlgElt(Field f = Field{0}) : field(f) {}

  static AlgElt zero(Field f) { return AlgElt(f); }
  static AlgElt make(Field f, Pure p, Scalar c) {
    AlgElt e(f);
    if (!c.is_zero()) e.terms.emplace(p, c);
    return e;
  }
  static AlgElt make(Field f, Pure p) { return make(f, p, Scalar::one(f)); }
  static AlgElt idem(Field f, Idem i) {
    return make(f, Pure{Kind::Id, i, 0});
  }

  bool is_zero() const { return terms.empty(); }

  void add_term(Pure p, Scalar c) {
    auto it = terms.find(p);
    if (it == terms.end()) {
      if (!c.is_zero()) terms.emplace(p, c);
    } else {
      it->second += c;
      if (it->second.is_zero()) terms.erase(it);
    }
  }

  AlgElt operator+(const AlgElt& o) const {
    AlgElt r(*this);
    for (auto& [p, c] : o.terms) r.add_term(p, c);
    return r;
  }
  AlgElt operator-() const {
    AlgElt r(field);
    for (auto& [p, c] : terms) r.terms.emplace(p, -c);
    return r;
  }
  AlgElt operator-(const AlgElt& o) const { return *this + (-o); }
  AlgElt scaled(const Scalar& s) const {
    AlgElt r(field);
    if (s.is_zero()) return r;
    for (auto& [p, c] : terms) r.terms.emplace(p, c * s);
    return r;
  }
  bool operator==(const AlgElt& o) const { return terms == o.terms; }
  bool operator!=(const AlgElt& o) const { return !(*this == o); }

  // Quantum degree of a homogeneous element; throws if mixed or zero.
  int qdeg() const {
    if (terms.empty()) throw std::domain_error("qdeg of zero element");
    int q = terms.begin()->first.qdeg();
    for (auto& [p, c] : terms)
      if (p.qdeg() != q) throw std::domain_error("qdeg of mixed element");
    return q;
  }
  bool homogeneous() const {
    if (terms.empty()) return true;
    int q = terms.begin()->first.qdeg();
    for (auto& [p, c] : terms)
      if (p.qdeg() != q) return false;
    return true;
  }

  std::string to_string() const {
    if (terms.empty()) return "0";
    std::string out;
    bool first = true;
    for (auto& [p, c] : terms) {
      std::string cs = c.to_string();
      bool neg = !cs.empty() && cs[0] == '-';
      if (neg) cs = cs.substr(1);
      if (first) {
        if (neg) out += "-";
        first = false;
      } else {
        out += neg ? " - " : " + ";
      }
      if (cs != "1") out += cs + "*";
      out += p.to_string();
    }
    return out;
  }

  static AlgElt parse(Field f, const std::string& text);
};

// Pure-element multiplication b*a, meaning "apply a, then b".
// Returns coefficient and basis element; zero signalled via ok=false.
struct PureProduct {
  bool ok = false;
  Pure result;
  int sign = 1;  // +1 or -1
};

inline PureProduct pure_multiply(const Pure& b, const Pure& a) {
  PureProduct out;
  if (b.source != a.target()) return out;  // incomposable → 0
  if (a.kind == Kind::Id) {
    out.ok = true;
    out.result = b;
    out.result.g += a.g;  // a is ι only when g==0 anyway
    return out;
  }
  if (b.kind == Kind::Id) {
    out.ok = true;
    out.result = a;
    out.result.g += b.g;
    return out;
  }
  bool a_dkind = a.kind == Kind::D;
  bool b_dkind = b.kind == Kind::D;
  if (a_dkind != b_dkind) return out;  // adjacent D and S/SS products vanish
  int g = a.g + b.g;
  if (a_dkind) {
    // D·D = -G·D (loops at the same idempotent)
    out.ok = true;
    out.sign = -1;
    out.result = Pure{Kind::D, a.source, g + 1};
    return out;
  }
  // both S-kind (S or SS)
  int slen = (a.kind == Kind::S ? 1 : 2) + (b.kind == Kind::S ? 1 : 2);
  // S^{2n+1} = G^n S ; S^{2n+2} = G^n SS, rooted at the source of a.
  out.ok = true;
  if (slen % 2 == 1)
    out.result = Pure{Kind::S, a.source, g + (slen - 1) / 2};
  else
    out.result = Pure{Kind::SS, a.source, g + (slen - 2) / 2};
  return out;
}

inline AlgElt multiply(const AlgElt& b, const AlgElt& a) {
  if (b.field != a.field) throw std::invalid_argument("field mismatch");
  AlgElt r(a.field);
  for (auto& [pb, cb] : b.terms)
    for (auto& [pa, ca] : a.terms) {
      PureProduct pp = pure_multiply(pb, pa);
      if (!pp.ok) continue;
      Scalar c = cb * ca;
      if (pp.sign < 0) c = -c;
      r.add_term(pp.result, c);
    }
  return r;
}

// G^n restricted to an idempotent, in the standard basis.
inline AlgElt central_g(Field f, int n, Idem i) {
  if (n < 0) throw std::invalid_argument("negative G power");
  if (n == 0) return AlgElt::idem(f, i);
  AlgElt r(f);
  r.add_term(Pure{Kind::SS, i, n - 1}, Scalar::one(f));
  r.add_term(Pure{Kind::D, i, n - 1}, -Scalar::one(f));
  return r;
}

// G^n at both idempotents (the central element itself).
inline AlgElt central_g_full(Field f, int n) {
  return central_g(f, n, Idem::B) + central_g(f, n, Idem::W);
}

inline AlgElt g_times(const AlgElt& a, int n) {
  if (n == 0) return a;
  AlgElt r(a.field);
  for (auto& [p, c] : a.terms) {
    if (p.kind == Kind::Id) {
      // G^n·ι = G^{n-1}(SS - D)
      r.add_term(Pure{Kind::SS, p.source, p.g + n - 1}, c);
      r.add_term(Pure{Kind::D, p.source, p.g + n - 1}, -c);
    } else {
      Pure q = p;
      q.g += n;
      r.add_term(q, c);
    }
  }
  return r;
}

inline AlgElt involution_rho(const AlgElt& a) {
  AlgElt r(a.field);
  for (auto& [p, c] : a.terms) {
    Pure q = p;
    q.source = other(p.source);
    r.terms.emplace(q, c);
  }
  return r;
}

// Mirror anti-automorphism: fixes ι, D, SS; sends S with source x to S
// with source other(x) (i.e. reverses the arrow).
inline AlgElt involution_mirror(const AlgElt& a) {
  AlgElt r(a.field);
  for (auto& [p, c] : a.terms) {
    Pure q = p;
    if (p.kind == Kind::S) q.source = other(p.source);
    r.terms.emplace(q, c);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Independent oracle: reduce a composable word of quiver arrows (letters
// D or S at a source idempotent, plus Id) to the standard basis, using only
// the defining relations.  Used in tests against `multiply`.

struct Arrow {
  Kind kind;  // Id, D or S
  Idem source;
  Idem target() const { return kind == Kind::S ? other(source) : source; }
};

// Word listed in application order: word[0] acts first.
inline AlgElt brute_force_reduce(Field f, const std::vector<Arrow>& word,
                                 Idem idem_if_empty = Idem::B) {
  std::vector<Arrow> w;
  for (const Arrow& a : word) {
    if (a.kind == Kind::SS) throw std::invalid_argument("SS is not an arrow");
    if (a.kind != Kind::Id) w.push_back(a);
  }
  // composability check on the full word including identities
  {
    Idem cur = word.empty() ? idem_if_empty : word.front().source;
    for (const Arrow& a : word) {
      if (a.source != cur) throw std::invalid_argument("incomposable word");
      cur = a.target();
    }
  }
  if (w.empty()) {
    Idem i = word.empty() ? idem_if_empty : word.front().source;
    return AlgElt::idem(f, i);
  }
  // any adjacent D,S pair lies in the ideal
  for (std::size_t i = 0; i + 1 < w.size(); ++i)
    if ((w[i].kind == Kind::D) != (w[i + 1].kind == Kind::D))
      return AlgElt::zero(f);
  int k = static_cast<int>(w.size());
  AlgElt r(f);
  if (w[0].kind == Kind::D) {
    // D^k = (-1)^{k-1} G^{k-1} D
    Scalar c = Scalar::one(f);
    if ((k - 1) % 2 == 1) c = -c;
    r.add_term(Pure{Kind::D, w[0].source, k - 1}, c);
  } else {
    // S^{2n+1} = G^n S ; S^{2n+2} = G^n SS
    if (k % 2 == 1)
      r.add_term(Pure{Kind::S, w[0].source, (k - 1) / 2}, Scalar::one(f));
    else
      r.add_term(Pure{Kind::SS, w[0].source, (k - 2) / 2}, Scalar::one(f));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Parsing of the textual rendering.

namespace detail {
inline std::string strip(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}
}  // namespace detail

inline AlgElt AlgElt::parse(Field f, const std::string& text) {
  AlgElt r(f);
  std::string t = detail::strip(text);
  if (t.empty() || t == "0") return r;
  // split into signed terms
  std::vector<std::pair<int, std::string>> parts;
  int sign = 1;
  std::string cur;
  for (std::size_t i = 0; i < t.size(); ++i) {
    char ch = t[i];
    if ((ch == '+' || ch == '-') && !cur.empty() &&
        detail::strip(cur).size() > 0 &&
        (t[i - 1] != '/' && t[i - 1] != '^' && t[i - 1] != '*')) {
      parts.emplace_back(sign, detail::strip(cur));
      cur.clear();
      sign = ch == '-' ? -1 : 1;
    } else if ((ch == '+' || ch == '-') && detail::strip(cur).empty()) {
      sign = ch == '-' ? -sign : sign;
    } else {
      cur += ch;
    }
  }
  if (!detail::strip(cur).empty()) parts.emplace_back(sign, detail::strip(cur));
  for (auto& [sg, part] : parts) {
    // factors separated by '*'
    std::vector<std::string> factors;
    std::stringstream ss(part);
    std::string fac;
    while (std::getline(ss, fac, '*')) factors.push_back(detail::strip(fac));
    Scalar coef = Scalar::one(f);
    if (sg < 0) coef = -coef;
    Pure p{Kind::Id, Idem::B, 0};
    bool have_sym = false;
    for (const std::string& fs : factors) {
      if (fs.empty()) throw std::invalid_argument("empty factor: " + part);
      if (fs[0] == 'G') {
        int n = 1;
        if (fs.size() > 1) {
          if (fs[1] != '^') throw std::invalid_argument("bad G factor: " + fs);
          n = std::stoi(fs.substr(2));
        }
        p.g += n;
      } else if (fs[0] == 'i' || fs[0] == 'D' || fs[0] == 'S') {
        have_sym = true;
        std::string sym = fs.substr(0, fs.size() - 1);
        char ic = fs.back();
        if (ic != '.' && ic != 'o')
          throw std::invalid_argument("bad idempotent marker: " + fs);
        p.source = ic == '.' ? Idem::B : Idem::W;
        if (sym == "i") p.kind = Kind::Id;
        else if (sym == "D") p.kind = Kind::D;
        else if (sym == "S") p.kind = Kind::S;
        else if (sym == "SS") p.kind = Kind::SS;
        else throw std::invalid_argument("bad symbol: " + fs);
      } else {
        coef *= Scalar::parse(f, fs);
      }
    }
    if (!have_sym) throw std::invalid_argument("term without symbol: " + part);
    if (p.kind == Kind::Id && p.g > 0) {
      r = r + g_times(AlgElt::idem(f, p.source), p.g).scaled(coef);
    } else {
      r.add_term(p, coef);
    }
  }
  return r;
}

}  // namespace bnt
