#pragma once

// Classification of multicurve components into rational and special curves
// with slope, length, grading shift, and local-system normal form.

#include <optional>
#include <queue>
#include <set>

#include "bnt/mcg.hpp"

namespace bnt {

enum class CurveKind { Rational, Special, Unclassified };

struct ClassifiedComponent {
  CurveKind kind = CurveKind::Unclassified;
  Slope slope;     // undefined when unclassified
  int length = 0;  // n for rational components and arcs, 2n for specials
  int dq = 0, dh = 0;
  LocalSystem ls;  // rational canonical form

  std::string kind_name() const {
    switch (kind) {
      case CurveKind::Rational: return "rational";
      case CurveKind::Special: return "special";
      default: return "unclassified";
    }
  }
};

namespace detail {

inline Mat2 mat_inv2(const Mat2& m) {
  return Mat2{m.d, -m.c, -m.b, m.a}.normalized();  // inverse mod +-1
}

// shape fingerprint ignoring gradings, minimal over rotation and reversal
inline std::string shape_key(const GradedCurve& c) {
  std::size_t n = c.vertices.size();
  std::string best;
  for (int rev = 0; rev < 2; ++rev) {
    std::size_t rots = c.cyclic ? n : 1;
    for (std::size_t r = 0; r < rots; ++r) {
      std::string s = c.cyclic ? "O" : "I";
      for (std::size_t k = 0; k < n; ++k) {
        std::size_t i = rev ? (n - 1 - k + r) % n : (k + r) % n;
        s += c.vertices[i].idem == Idem::B ? 'B' : 'W';
        std::size_t ne = c.cyclic ? n : n - 1;
        std::size_t ei = rev ? (2 * n - 2 - k + r) % n : (k + r) % n;
        if ((k + 1 < n || c.cyclic) && ei < ne) {
          const CurveEdge& e = c.edges[ei];
          int dir = rev ? -e.dir : e.dir;
          s += '[';
          s += e.label.kind == Kind::D ? "D" : e.label.kind == Kind::S ? "S"
                                                                       : "Z";
          s += std::to_string(e.label.g);
          s += dir > 0 ? '>' : '<';
          s += ']';
        }
      }
      if (best.empty() || s < best) best = s;
    }
    if (!c.cyclic && n == 1) break;
  }
  return best;
}

inline GradedCurve rho_curve_graph(GradedCurve c) {
  for (auto& v : c.vertices) v.idem = other(v.idem);
  for (auto& e : c.edges) e.label.source = other(e.label.source);
  return c;
}

// grading offset between two curves with equal shapes, if one exists
inline std::optional<std::pair<int, int>> grading_offset(const GradedCurve& a,
                                                         const GradedCurve& b) {
  if (a.vertices.size() != b.vertices.size()) return std::nullopt;
  auto sorted = [](const GradedCurve& c) {
    std::vector<std::pair<int, int>> v;
    for (auto& x : c.vertices) v.emplace_back(x.q, x.h);
    std::sort(v.begin(), v.end());
    return v;
  };
  auto va = sorted(a), vb = sorted(b);
  int dq = va[0].first - vb[0].first, dh = va[0].second - vb[0].second;
  for (std::size_t i = 0; i < va.size(); ++i)
    if (va[i].first - vb[i].first != dq || va[i].second - vb[i].second != dh)
      return std::nullopt;
  return std::make_pair(dq, dh);
}

inline LocalSystem ls_normal_form(const LocalSystem& ls, Field f) {
  auto facs = invariant_factors(ls.mat, f);
  int dim = 0;
  for (auto& p : facs) dim += static_cast<int>(p.size()) - 1;
  LocalSystem r;
  r.edge = ls.edge;
  r.mat.assign(dim, std::vector<Scalar>(dim, Scalar(f, 0)));
  int at = 0;
  for (auto& p : facs) {  // companion matrix of each invariant factor
    int d = static_cast<int>(p.size()) - 1;
    for (int i = 0; i + 1 < d; ++i) r.mat[at + i + 1][at + i] = Scalar::one(f);
    for (int i = 0; i < d; ++i) r.mat[at + i][at + d - 1] = -p[i];
    at += d;
  }
  return r;
}

}  // namespace detail

// apply one twist generator to a single component (arcs via the dictionary)
inline CurveWithLS twist_component(const CurveWithLS& c, Axis t, End e,
                                   Field f) {
  if (c.curve.cyclic) return twist_curve(c, t, e, f);
  Multicurve m{f, {c}, {}};
  Multicurve r = twist_multicurve(m, t, e);
  if (r.components.size() != 1)
    throw std::runtime_error("twist_component: arc split");
  return r.components[0];
}

// Untwist the component toward a canonical slope-0 or slope-infinity pattern,
// searching states in order of generator count while tracking the PSL(2,Z)
// product of the applied twists; the component's slope is the inverse product
// applied to the canonical slope.
inline ClassifiedComponent classify(const CurveWithLS& comp, Field f,
                                    int budget = 400) {
  struct Canon {
    CurveKind kind;
    int length;
    Slope s0;
    GradedCurve graph;
  };
  auto canonicals_for = [&](const GradedCurve& g) {
    std::vector<Canon> out;
    std::size_t n = g.vertices.size();
    if (!g.cyclic) {
      if (n == 1) {
        out.push_back(Canon{CurveKind::Rational, 1, Slope::make(0, 1),
                            curve_a0(f).curve});
        GradedCurve w = detail::rho_curve_graph(curve_a0(f).curve);
        out.push_back(Canon{CurveKind::Rational, 1, Slope::infinity(), w});
      }
      return out;
    }
    if (n % 2 == 0 && n >= 2) {
      int r = static_cast<int>(n) / 2;
      GradedCurve c0 = curve_r(f, r).curve;
      out.push_back(Canon{CurveKind::Rational, r, Slope::make(0, 1), c0});
      out.push_back(Canon{CurveKind::Rational, r, Slope::infinity(),
                          detail::rho_curve_graph(c0)});
    }
    if (n % 4 == 0 && n >= 8) {
      int sn = (static_cast<int>(n) - 4) / 4;
      GradedCurve c0 = curve_s(f, sn).curve;
      out.push_back(Canon{CurveKind::Special, 2 * sn, Slope::make(0, 1), c0});
      out.push_back(Canon{CurveKind::Special, 2 * sn, Slope::infinity(),
                          detail::rho_curve_graph(c0)});
    }
    return out;
  };

  struct State {
    CurveWithLS c;
    Mat2 M;  // product of the applied twist matrices, newest on the left
    End e;
    int len;
  };
  auto complexity = [](const State& s) {
    return std::pair(s.c.curve.vertices.size(), s.len);
  };
  auto cmp = [&](const State& a, const State& b) {
    return complexity(a) > complexity(b);
  };
  std::priority_queue<State, std::vector<State>, decltype(cmp)> queue(cmp);
  std::set<std::string> seen;
  queue.push(State{comp, Mat2{}, End::E2, 0});

  // the four moves: both generators and their 5-letter positive inverses
  const std::vector<std::vector<Axis>> moves = {
      {Axis::Dot},
      {Axis::Hollow},
      {Axis::Hollow, Axis::Dot, Axis::Hollow, Axis::Dot, Axis::Hollow},
      {Axis::Dot, Axis::Hollow, Axis::Dot, Axis::Hollow, Axis::Dot}};

  for (int steps = 0; !queue.empty() && steps < budget; ++steps) {
    State s = queue.top();
    queue.pop();
    std::string key = detail::shape_key(s.c.curve);
    if (!seen.insert(key).second) continue;

    for (const Canon& can : canonicals_for(s.c.curve)) {
      if (detail::shape_key(can.graph) != key) continue;
      ClassifiedComponent r;
      r.kind = can.kind;
      r.length = can.length;
      r.slope = apply_slope(detail::mat_inv2(s.M), can.s0);
      if (auto off = detail::grading_offset(s.c.curve, can.graph)) {
        r.dq = off->first;
        r.dh = off->second;
      }
      r.ls = detail::ls_normal_form(comp.ls, f);
      return r;
    }

    for (const auto& mv : moves) {
      State t = s;
      try {
        for (Axis a : mv) {
          t.c = twist_component(t.c, a, t.e, f);
          t.M = psi_gen(a) * t.M;
          t.e = twist_end(a, t.e);
        }
      } catch (const std::exception&) {
        continue;
      }
      t.len = s.len + 1;
      if (t.c.curve.vertices.size() <= 4 * comp.curve.vertices.size() + 8)
        queue.push(t);
    }
  }
  ClassifiedComponent r;
  r.ls = detail::ls_normal_form(comp.ls, f);
  return r;  // unclassified
}

inline std::vector<ClassifiedComponent> classify_multicurve(
    const Multicurve& m) {
  std::vector<ClassifiedComponent> out;
  for (auto& c : m.components) out.push_back(classify(c, m.field));
  return out;
}

}  // namespace bnt
