#pragma once

// Formal curves on the four-punctured sphere: graded curves with local
// systems, the dictionary between curves and type D structures, decomposition
// of reduced complexes into multicurves, D-label counts and mirroring.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bnt/typed.hpp"

namespace bnt {

// ---------------------------------------------------------------------------
// Curve types
//
// A curve is stored as a vertex path (linear) or cycle (cyclic).  Edge i
// connects vertex i to vertex i+1 (mod n when cyclic); dir = +1 means the
// differential arrow points from vertex i to vertex i+1, dir = -1 the other
// way.  Labels are pure algebra elements, never idempotents; scalar data
// lives entirely in the local system.

struct CurveVertex {
  Idem idem = Idem::B;
  int q = 0;
  int h = 0;
};

struct CurveEdge {
  Pure label;
  int dir = +1;
};

struct GradedCurve {
  bool cyclic = false;
  std::vector<CurveVertex> vertices;
  std::vector<CurveEdge> edges;  // n-1 edges when linear, n when cyclic
};

struct LocalSystem {
  std::vector<std::vector<Scalar>> mat;  // square, invertible
  int edge = 0;                          // index of the decorated edge

  int dim() const { return static_cast<int>(mat.size()); }
};

struct CurveWithLS {
  GradedCurve curve;
  LocalSystem ls;
};

struct Multicurve {
  Field field;
  std::vector<CurveWithLS> components;
  // components the decomposition could not read as curves are reported here,
  // never silently dropped
  std::vector<TypeD> unreadable;
};

inline LocalSystem scalar_ls(const Scalar& s, int edge = 0) {
  return LocalSystem{{{s}}, edge};
}
inline LocalSystem trivial_ls(Field f, int edge = 0) {
  return scalar_ls(Scalar::one(f), edge);
}

inline bool is_d_type(const Pure& p) { return p.kind == Kind::D; }
inline bool is_s_type(const Pure& p) {
  return p.kind == Kind::S || p.kind == Kind::SS;
}

// ---------------------------------------------------------------------------
// Validation

inline std::vector<std::string> validate_curve(const CurveWithLS& cw) {
  std::vector<std::string> rep;
  const GradedCurve& c = cw.curve;
  std::size_t n = c.vertices.size();
  std::size_t ne = c.cyclic ? n : (n ? n - 1 : 0);
  if (c.cyclic && n < 2) rep.push_back("cyclic curve needs >= 2 vertices");
  if (c.edges.size() != ne) rep.push_back("edge count mismatch");
  for (std::size_t i = 0; i < c.edges.size() && i < ne; ++i) {
    const CurveEdge& e = c.edges[i];
    const CurveVertex& a = c.vertices[i];
    const CurveVertex& b = c.vertices[(i + 1) % n];
    const CurveVertex& src = e.dir > 0 ? a : b;
    const CurveVertex& dst = e.dir > 0 ? b : a;
    if (e.label.kind == Kind::Id) rep.push_back("idempotent edge label");
    if (e.label.source != src.idem) rep.push_back("edge/idem mismatch");
    if (e.label.target() != dst.idem) rep.push_back("edge/target mismatch");
    if (dst.q != src.q - e.label.qdeg()) rep.push_back("edge q mismatch");
    if (dst.h != src.h + 1) rep.push_back("edge h mismatch");
  }
  // adjacent edges at a vertex alternate between D-type and S-type
  for (std::size_t i = 0; i + 1 < c.edges.size() + (c.cyclic ? 1 : 0); ++i) {
    const Pure& p = c.edges[i % ne].label;
    const Pure& q = c.edges[(i + 1) % ne].label;
    if (is_d_type(p) == is_d_type(q))
      rep.push_back("adjacent edges do not alternate D/S");
  }
  int d = cw.ls.dim();
  if (d == 0) rep.push_back("empty local system");
  for (auto& row : cw.ls.mat)
    if (static_cast<int>(row.size()) != d)
      rep.push_back("local system not square");
  if (!c.cyclic && d != 1) rep.push_back("non-compact curve needs dim 1");
  if (ne && (cw.ls.edge < 0 || cw.ls.edge >= static_cast<int>(ne)))
    rep.push_back("local system edge out of range");
  return rep;
}

// ---------------------------------------------------------------------------
// curve -> complex

inline TypeD curve_to_complex(Field f, const CurveWithLS& cw,
                              const std::string& prefix = "c") {
  auto rep = validate_curve(cw);
  if (!rep.empty())
    throw std::invalid_argument("invalid curve: " + rep.front());
  const GradedCurve& c = cw.curve;
  int d = cw.ls.dim();
  std::size_t n = c.vertices.size();
  TypeD X(f);
  auto name = [&](std::size_t i, int a) {
    std::string s = prefix + std::to_string(i);
    if (d > 1) s += "." + std::to_string(a);
    return s;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (int a = 0; a < d; ++a)
      X.add_gen(name(i, a), c.vertices[i].idem, c.vertices[i].q,
                c.vertices[i].h);
  for (std::size_t i = 0; i < c.edges.size(); ++i) {
    const CurveEdge& e = c.edges[i];
    std::size_t j = (i + 1) % n;
    std::size_t si = e.dir > 0 ? i : j;
    std::size_t di = e.dir > 0 ? j : i;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        Scalar coef = (static_cast<int>(i) == cw.ls.edge)
                          ? cw.ls.mat[b][a]
                          : (a == b ? Scalar::one(f) : Scalar(f, 0));
        if (!coef.is_zero())
          X.add_edge(name(si, a), name(di, b), AlgElt::make(f, e.label, coef));
      }
  }
  require_valid(X, "curve complex");
  return X;
}

// ---------------------------------------------------------------------------
// Canonical slope-0 curves: the arc a(0), rationals r_n(0), specials s_2n(0)

inline CurveWithLS curve_a0(Field f) {
  CurveWithLS cw;
  cw.curve.cyclic = false;
  cw.curve.vertices = {CurveVertex{Idem::B, 0, 0}};
  cw.ls = trivial_ls(f);
  return cw;
}

// r_n(0): two rows of n dot generators joined by D rungs; row labels
// alternate S^2, D, S^2, ...; local system (-1) on the left rung.
inline CurveWithLS curve_r(Field f, int n) {
  if (n < 1) throw std::invalid_argument("curve_r needs n >= 1");
  CurveWithLS cw;
  GradedCurve& c = cw.curve;
  c.cyclic = true;
  Pure D{Kind::D, Idem::B, 0}, SSb{Kind::SS, Idem::B, 0};
  // vertices: top row t_0..t_{n-1}, then bottom row reversed b_{n-1}..b_0 so
  // that consecutive vertices are joined by an edge around the cycle
  for (int i = 0; i < n; ++i)
    c.vertices.push_back(CurveVertex{Idem::B, -n + 2 * i, -n + i});
  for (int i = n - 1; i >= 0; --i)
    c.vertices.push_back(CurveVertex{Idem::B, 2 - n + 2 * i, 1 - n + i});
  // edges: top row (dir +1), right rung, bottom row reversed (dir -1), left
  // rung back to t_0 (dir -1: the arrow points t_0 -> b_0)
  for (int i = 0; i + 1 < n; ++i)
    c.edges.push_back(CurveEdge{i % 2 == 0 ? SSb : D, +1});
  c.edges.push_back(CurveEdge{n % 2 == 1 ? SSb : D, +1});  // right rung
  for (int i = n - 1; i > 0; --i)
    c.edges.push_back(CurveEdge{(i - 1) % 2 == 0 ? SSb : D, -1});
  c.edges.push_back(CurveEdge{D, -1});  // left rung, arrow t_0 -> b_0
  cw.ls = scalar_ls(-Scalar::one(f), static_cast<int>(c.edges.size()) - 1);
  return cw;
}

// s_2n(0): two rows  o -S-> . -D-> . -S^2-> ... -D-> . -S-> o  of 2n+2
// generators each, joined by D rungs at the hollow ends; local system (-1)
// on the left rung.
inline CurveWithLS curve_s(Field f, int n) {
  if (n < 1) throw std::invalid_argument("curve_s needs n >= 1");
  CurveWithLS cw;
  GradedCurve& c = cw.curve;
  c.cyclic = true;
  Pure D{Kind::D, Idem::B, 0}, Do{Kind::D, Idem::W, 0}, SSb{Kind::SS, Idem::B, 0};
  Pure Sb{Kind::S, Idem::B, 0}, So{Kind::S, Idem::W, 0};
  int m = 2 * n + 2;  // row length
  auto row_vertex = [&](int i, int q0, int h0) {
    Idem idem = (i == 0 || i == m - 1) ? Idem::W : Idem::B;
    // the two row ends are S edges (q step 1), the interior D/S^2 (q step 2)
    int q = q0 + (i == 0 ? 0 : (i == m - 1 ? 2 * i - 2 : 2 * i - 1));
    int h = h0 + i;
    return CurveVertex{idem, q, h};
  };
  auto row_label = [&](int i) {  // edge i of a row, i = 0..m-2
    if (i == 0) return So;
    if (i == m - 2) return Sb;
    return i % 2 == 1 ? D : SSb;
  };
  for (int i = 0; i < m; ++i)
    c.vertices.push_back(row_vertex(i, -2 * n - 1, -n - 1));  // top row
  for (int i = m - 1; i >= 0; --i)
    c.vertices.push_back(row_vertex(i, 1 - 2 * n, -n));  // bottom, reversed
  for (int i = 0; i + 1 < m; ++i) c.edges.push_back(CurveEdge{row_label(i), +1});
  c.edges.push_back(CurveEdge{Do, +1});  // right rung
  for (int i = m - 1; i > 0; --i)
    c.edges.push_back(CurveEdge{row_label(i - 1), -1});
  c.edges.push_back(CurveEdge{Do, -1});  // left rung, arrow top -> bottom
  cw.ls = scalar_ls(-Scalar::one(f), static_cast<int>(c.edges.size()) - 1);
  return cw;
}

// ---------------------------------------------------------------------------
// Polynomial helpers over the field (for local-system normal forms)

namespace detail {

using Poly = std::vector<Scalar>;  // coefficients, low degree first

inline void poly_trim(Poly& p) {
  while (!p.empty() && p.back().is_zero()) p.pop_back();
}
inline Poly poly_mul(const Poly& a, const Poly& b, Field f) {
  if (a.empty() || b.empty()) return {};
  Poly r(a.size() + b.size() - 1, Scalar(f, 0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  poly_trim(r);
  return r;
}
inline Poly poly_sub(Poly a, const Poly& b, Field f) {
  if (a.size() < b.size()) a.resize(b.size(), Scalar(f, 0));
  for (std::size_t i = 0; i < b.size(); ++i) a[i] -= b[i];
  poly_trim(a);
  return a;
}
// divide a by b (b nonzero), returning quotient; remainder left in a
inline Poly poly_divmod(Poly& a, const Poly& b, Field f) {
  Poly q;
  Scalar lead = b.back();
  while (a.size() >= b.size()) {
    Scalar c = a.back() / lead;
    std::size_t shift = a.size() - b.size();
    if (q.size() < shift + 1) q.resize(shift + 1, Scalar(f, 0));
    q[shift] += c;
    for (std::size_t i = 0; i < b.size(); ++i) a[shift + i] -= c * b[i];
    poly_trim(a);
    if (a.empty()) break;
  }
  return q;
}
inline Poly poly_monic(Poly p) {
  if (p.empty()) return p;
  Scalar inv = p.back().inv();
  for (auto& c : p) c *= inv;
  return p;
}

// Invariant factors of a square matrix over the field: the nontrivial
// diagonal entries of the Smith normal form of xI - A over k[x], monic,
// each dividing the next.  Conjugacy-invariant, and a complete invariant.
inline std::vector<Poly> invariant_factors(
    const std::vector<std::vector<Scalar>>& A, Field f) {
  int n = static_cast<int>(A.size());
  std::vector<std::vector<Poly>> M(n, std::vector<Poly>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Poly p;
      if (!A[i][j].is_zero()) p = {-A[i][j]};
      if (i == j) {
        p.resize(2, Scalar(f, 0));
        p[1] = Scalar::one(f);
      }
      M[i][j] = p;
    }
  std::vector<Poly> out;
  for (int t = 0; t < n; ++t) {
    for (;;) {
      // pick the nonzero entry of least degree in the remaining block
      int pi = -1, pj = -1;
      std::size_t best = 0;
      for (int i = t; i < n; ++i)
        for (int j = t; j < n; ++j)
          if (!M[i][j].empty() && (pi < 0 || M[i][j].size() < best)) {
            pi = i;
            pj = j;
            best = M[i][j].size();
          }
      if (pi < 0) {
        M[t][t].clear();
        break;
      }
      std::swap(M[pi], M[t]);
      for (int i = t; i < n; ++i) std::swap(M[i][pj], M[i][t]);
      bool clean = true;
      for (int i = t + 1; i < n; ++i)
        if (!M[i][t].empty()) {
          Poly rem = M[i][t];
          Poly q = poly_divmod(rem, M[t][t], f);
          for (int j = t; j < n; ++j)
            M[i][j] = poly_sub(M[i][j], poly_mul(q, M[t][j], f), f);
          if (!M[i][t].empty()) clean = false;
        }
      for (int j = t + 1; j < n; ++j)
        if (!M[t][j].empty()) {
          Poly rem = M[t][j];
          Poly q = poly_divmod(rem, M[t][t], f);
          for (int i = t; i < n; ++i)
            M[i][j] = poly_sub(M[i][j], poly_mul(q, M[i][t], f), f);
          if (!M[t][j].empty()) clean = false;
        }
      if (!clean) continue;
      // ensure divisibility into the remaining block
      bool divides = true;
      for (int i = t + 1; i < n && divides; ++i)
        for (int j = t + 1; j < n && divides; ++j)
          if (!M[i][j].empty()) {
            Poly rem = M[i][j];
            poly_divmod(rem, M[t][t], f);
            if (!rem.empty()) {
              for (int jj = t; jj < n; ++jj)
                M[t][jj] = poly_sub(M[t][jj], poly_mul({-Scalar::one(f)},
                                                       M[i][jj], f),
                                    f);
              divides = false;
            }
          }
      if (divides) break;
    }
    if (!M[t][t].empty()) out.push_back(poly_monic(M[t][t]));
  }
  // drop trivial factors (units)
  std::vector<Poly> nontrivial;
  for (auto& p : out)
    if (p.size() > 1) nontrivial.push_back(p);
  return nontrivial;
}

inline std::vector<std::vector<Scalar>> mat_inverse(
    std::vector<std::vector<Scalar>> A, Field f) {
  int n = static_cast<int>(A.size());
  std::vector<std::vector<Scalar>> I(n, std::vector<Scalar>(n, Scalar(f, 0)));
  for (int i = 0; i < n; ++i) I[i][i] = Scalar::one(f);
  for (int c = 0; c < n; ++c) {
    int piv = -1;
    for (int r = c; r < n; ++r)
      if (!A[r][c].is_zero()) {
        piv = r;
        break;
      }
    if (piv < 0) throw std::invalid_argument("singular local system");
    std::swap(A[piv], A[c]);
    std::swap(I[piv], I[c]);
    Scalar inv = A[c][c].inv();
    for (int j = 0; j < n; ++j) {
      A[c][j] *= inv;
      I[c][j] *= inv;
    }
    for (int r = 0; r < n; ++r)
      if (r != c && !A[r][c].is_zero()) {
        Scalar m = A[r][c];
        for (int j = 0; j < n; ++j) {
          A[r][j] -= m * A[c][j];
          I[r][j] -= m * I[c][j];
        }
      }
  }
  return I;
}

inline std::vector<std::vector<Scalar>> mat_mul(
    const std::vector<std::vector<Scalar>>& A,
    const std::vector<std::vector<Scalar>>& B, Field f) {
  int n = static_cast<int>(A.size());
  std::vector<std::vector<Scalar>> C(n, std::vector<Scalar>(n, Scalar(f, 0)));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      if (!A[i][k].is_zero())
        for (int j = 0; j < n; ++j) C[i][j] += A[i][k] * B[k][j];
  return C;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// complex -> multicurve

namespace detail {

struct Arrow {
  std::string src, dst;
  Pure label;
  Scalar coef;
};

// canonical encoding of a graded curve (vertices+edges as printable tokens),
// minimized over rotations and traversal reversal; used for equivalence and
// for merging equal curves during multicurve reduction
inline std::string curve_key(const GradedCurve& c) {
  std::size_t n = c.vertices.size();
  auto encode = [&](std::size_t start, bool rev) {
    std::string s = c.cyclic ? "cyc:" : "lin:";
    auto vtx = [&](std::size_t i) {
      const CurveVertex& v = c.vertices[i];
      return std::string(v.idem == Idem::B ? "B" : "W") + "(" +
             std::to_string(v.q) + "," + std::to_string(v.h) + ")";
    };
    auto edg = [&](std::size_t i, bool flip) {
      const CurveEdge& e = c.edges[i];
      int d = flip ? -e.dir : e.dir;
      return std::string("[") + e.label.to_string() +
             (d > 0 ? ">" : "<") + "]";
    };
    std::size_t ne = c.edges.size();
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t i = rev ? (start + n - k) % n : (start + k) % n;
      s += vtx(i);
      if (k + 1 < n || c.cyclic) {
        std::size_t ei = rev ? (i + n - 1) % n : i;
        if (!c.cyclic) ei = rev ? i - 1 : i;
        if (ei < ne) s += edg(ei, rev);
      }
    }
    return s;
  };
  std::string best;
  if (!c.cyclic) {
    best = encode(0, false);
    if (n > 1) best = std::min(best, encode(n - 1, true));
  } else {
    for (std::size_t s0 = 0; s0 < n; ++s0) {
      best = best.empty() ? encode(s0, false)
                          : std::min(best, encode(s0, false));
      best = std::min(best, encode(s0, true));
    }
  }
  return best;
}

inline std::string ls_key(const LocalSystem& ls, Field f) {
  auto inv = invariant_factors(ls.mat, f);
  std::string s;
  for (auto& p : inv) {
    s += "(";
    for (auto& c : p) s += c.to_string() + ",";
    s += ")";
  }
  return s;
}

}  // namespace detail

// Reduce a multicurve: merge compact components with equal graded curves by
// direct sum of local systems.
inline void reduce_multicurve(Multicurve& m) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < m.components.size(); ++i)
    groups[detail::curve_key(m.components[i].curve)].push_back(i);
  std::vector<CurveWithLS> out;
  std::set<std::size_t> used;
  for (std::size_t i = 0; i < m.components.size(); ++i) {
    if (used.count(i)) continue;
    CurveWithLS cw = m.components[i];
    if (cw.curve.cyclic) {
      auto& grp = groups[detail::curve_key(cw.curve)];
      for (std::size_t j : grp) {
        if (j == i || used.count(j)) continue;
        // direct sum of local systems (transported to cw's decorated edge by
        // equivalence; block placement is enough for the normal form)
        const auto& other = m.components[j].ls.mat;
        int d0 = cw.ls.dim(), d1 = static_cast<int>(other.size());
        std::vector<std::vector<Scalar>> big(
            d0 + d1, std::vector<Scalar>(d0 + d1, Scalar(m.field, 0)));
        for (int a = 0; a < d0; ++a)
          for (int b = 0; b < d0; ++b) big[a][b] = cw.ls.mat[a][b];
        for (int a = 0; a < d1; ++a)
          for (int b = 0; b < d1; ++b) big[d0 + a][d0 + b] = other[a][b];
        cw.ls.mat = big;
        used.insert(j);
      }
    }
    used.insert(i);
    out.push_back(cw);
  }
  m.components = out;
}

inline Multicurve complex_to_multicurve(const TypeD& Xin) {
  // Complexes carrying higher-rank local systems keep parallel same-letter
  // arrows that loop_normalize cannot (and must not) split; if normalization
  // stalls, read the reduced complex directly via the fibered branch below.
  TypeD N = reduce(Xin);
  try {
    N = loop_normalize(N, 5000);
  } catch (const std::runtime_error&) {
  }
  Field f = N.field;
  Multicurve result{f, {}, {}};

  // explode the differential into single-term arrows
  std::vector<detail::Arrow> arrows;
  for (auto& [k, a] : N.diff)
    for (auto& [p, c] : a.terms)
      arrows.push_back(detail::Arrow{k.first, k.second, p, c});

  // connected components
  std::map<std::string, std::vector<std::size_t>> touch;  // gen -> arrow idx
  for (std::size_t i = 0; i < arrows.size(); ++i) {
    touch[arrows[i].src].push_back(i);
    touch[arrows[i].dst].push_back(i);
  }
  std::map<std::string, const Gen*> by_id;
  for (auto& g : N.gens) by_id[g.id] = &g;
  std::set<std::string> seen;
  for (auto& g : N.gens) {
    if (seen.count(g.id)) continue;
    std::vector<std::string> comp;
    std::vector<std::size_t> comp_arrows;
    std::set<std::size_t> comp_arrow_set;
    std::vector<std::string> stack = {g.id};
    seen.insert(g.id);
    while (!stack.empty()) {
      std::string s = stack.back();
      stack.pop_back();
      comp.push_back(s);
      for (std::size_t ai : touch[s]) {
        if (!comp_arrow_set.count(ai)) {
          comp_arrow_set.insert(ai);
          comp_arrows.push_back(ai);
        }
        for (const std::string& t : {arrows[ai].src, arrows[ai].dst})
          if (!seen.count(t)) {
            seen.insert(t);
            stack.push_back(t);
          }
      }
    }
    std::sort(comp.begin(), comp.end());

    // incidence per generator per letter type
    bool simple = true, fiberable = true;
    std::map<std::string, std::vector<std::size_t>> inc_d, inc_s;
    for (std::size_t ai : comp_arrows) {
      const detail::Arrow& A = arrows[ai];
      if (A.label.kind == Kind::Id) {
        simple = fiberable = false;
        break;
      }
      auto& m = is_d_type(A.label) ? inc_d : inc_s;
      m[A.src].push_back(ai);
      m[A.dst].push_back(ai);
    }
    for (auto& gid : comp) {
      if (inc_d[gid].size() > 1 || inc_s[gid].size() > 1) simple = false;
      if (inc_d[gid].size() + inc_s[gid].size() > 2) simple = false;
    }

    auto emit_unreadable = [&]() {
      TypeD sub(f);
      for (auto& gid : comp) {
        const Gen* gg = by_id[gid];
        sub.add_gen(gg->id, gg->idem, gg->q, gg->h);
      }
      for (std::size_t ai : comp_arrows)
        sub.add_edge(arrows[ai].src, arrows[ai].dst,
                     AlgElt::make(f, arrows[ai].label, arrows[ai].coef));
      result.unreadable.push_back(sub);
    };

    if (simple) {
      // walk the path/cycle
      std::map<std::string, std::vector<std::size_t>> inc;
      for (std::size_t ai : comp_arrows) {
        inc[arrows[ai].src].push_back(ai);
        inc[arrows[ai].dst].push_back(ai);
      }
      std::string start;
      bool cyclic = true;
      for (auto& gid : comp)
        if (inc[gid].size() < 2) {
          cyclic = false;
          if (start.empty()) start = gid;
        }
      if (cyclic) start = comp.front();
      CurveWithLS cw;
      cw.curve.cyclic = cyclic;
      Scalar prod = Scalar::one(f);
      std::string cur = start;
      std::size_t prev_arrow = static_cast<std::size_t>(-1);
      for (;;) {
        const Gen* gg = by_id[cur];
        cw.curve.vertices.push_back(CurveVertex{gg->idem, gg->q, gg->h});
        std::size_t next_arrow = static_cast<std::size_t>(-1);
        for (std::size_t ai : inc[cur])
          if (ai != prev_arrow) next_arrow = ai;
        if (next_arrow == static_cast<std::size_t>(-1)) break;  // path end
        const detail::Arrow& A = arrows[next_arrow];
        int dir = A.src == cur ? +1 : -1;
        cw.curve.edges.push_back(CurveEdge{A.label, dir});
        prod = dir > 0 ? prod * A.coef : prod * A.coef.inv();
        cur = dir > 0 ? A.dst : A.src;
        prev_arrow = next_arrow;
        if (cyclic && cur == start) break;
      }
      cw.ls = scalar_ls(cyclic ? prod : Scalar::one(f), 0);
      result.components.push_back(cw);
      continue;
    }

    if (!fiberable) {
      emit_unreadable();
      continue;
    }

    // fibered case: partition generators into curve positions.  Start from
    // (idem, q, h) and refine by the incident arrow signature (label,
    // direction, class at the other end) until stable; between two classes
    // all arrows must then share one pure label and direction, giving a
    // matrix.
    std::map<std::string, int> cid;
    {
      std::map<std::string, int> keyid;
      for (auto& gid : comp) {
        const Gen* gg = by_id[gid];
        std::string key = std::string(gg->idem == Idem::B ? "B" : "W") + ":" +
                          std::to_string(gg->q) + ":" + std::to_string(gg->h);
        auto [it, fresh] = keyid.emplace(key, static_cast<int>(keyid.size()));
        (void)fresh;
        cid[gid] = it->second;
      }
      std::size_t nclasses = keyid.size();
      for (;;) {
        // signatures are sets, not multisets: generators in one fiber may
        // differ in arrow multiplicity (off-diagonal local system entries)
        // but never in which (direction, label, class) arrows they carry
        std::map<std::string, std::set<std::string>> sigparts;
        for (std::size_t ai : comp_arrows) {
          const detail::Arrow& A = arrows[ai];
          std::string lab = A.label.to_string();
          sigparts[A.src].insert("o:" + lab + ":" +
                                 std::to_string(cid[A.dst]));
          sigparts[A.dst].insert("i:" + lab + ":" +
                                 std::to_string(cid[A.src]));
        }
        std::map<std::string, int> newid;
        std::map<std::string, int> ncid;
        for (auto& gid : comp) {
          std::string s = std::to_string(cid[gid]);
          for (auto& t : sigparts[gid]) s += "|" + t;
          auto [it, fresh] = newid.emplace(s, static_cast<int>(newid.size()));
          (void)fresh;
          ncid[gid] = it->second;
        }
        cid = ncid;
        if (newid.size() == nclasses) break;
        nclasses = newid.size();
      }
    }
    std::map<std::string, std::string> cls_of;
    std::map<std::string, std::vector<std::string>> cls;  // key -> gens
    for (auto& gid : comp) {
      std::string key = std::to_string(cid[gid]);
      cls_of[gid] = key;
      cls[key].push_back(gid);
    }
    std::size_t dim = cls.begin()->second.size();
    bool ok = dim > 0;
    for (auto& [k, v] : cls) ok = ok && v.size() == dim;
    struct ClsEdge {
      std::string a, b;  // class keys, arrow direction a -> b
      Pure label;
      std::vector<std::vector<Scalar>> mat;
    };
    std::map<std::pair<std::string, std::string>, std::size_t> edge_idx;
    std::vector<ClsEdge> cedges;
    if (ok)
      for (std::size_t ai : comp_arrows) {
        const detail::Arrow& A = arrows[ai];
        std::string ca = cls_of[A.src], cb = cls_of[A.dst];
        auto key = std::make_pair(ca, cb);
        auto it = edge_idx.find(key);
        if (it == edge_idx.end()) {
          edge_idx[key] = cedges.size();
          cedges.push_back(ClsEdge{
              ca, cb, A.label,
              std::vector<std::vector<Scalar>>(
                  dim, std::vector<Scalar>(dim, Scalar(f, 0)))});
          it = edge_idx.find(key);
        }
        ClsEdge& e = cedges[it->second];
        if (!(e.label == A.label)) {
          ok = false;
          break;
        }
        auto pos = [&](const std::string& id, const std::string& ck) {
          auto& v = cls[ck];
          return std::find(v.begin(), v.end(), id) - v.begin();
        };
        e.mat[pos(A.dst, cb)][pos(A.src, ca)] += A.coef;
      }
    // the class graph must be a simple cycle with alternating letter types
    std::map<std::string, std::vector<std::size_t>> cinc;
    for (std::size_t i = 0; i < cedges.size() && ok; ++i) {
      cinc[cedges[i].a].push_back(i);
      cinc[cedges[i].b].push_back(i);
    }
    if (ok)
      for (auto& [k, v] : cinc)
        if (v.size() != 2) ok = false;
    if (ok && cedges.size() != cls.size()) ok = false;
    if (!ok) {
      emit_unreadable();
      continue;
    }
    // walk the class cycle, accumulating the local system
    CurveWithLS cw;
    cw.curve.cyclic = true;
    std::string startc = cls.begin()->first;
    std::string curc = startc;
    std::size_t prev_edge = static_cast<std::size_t>(-1);
    std::vector<std::vector<Scalar>> X(dim,
                                       std::vector<Scalar>(dim, Scalar(f, 0)));
    for (std::size_t i = 0; i < dim; ++i) X[i][i] = Scalar::one(f);
    bool walk_ok = true;
    for (;;) {
      auto& v = cls[curc];
      const Gen* gg = by_id[v.front()];
      cw.curve.vertices.push_back(CurveVertex{gg->idem, gg->q, gg->h});
      std::size_t next_edge = static_cast<std::size_t>(-1);
      for (std::size_t ei : cinc[curc])
        if (ei != prev_edge) next_edge = ei;
      if (next_edge == prev_edge || next_edge == static_cast<std::size_t>(-1)) {
        walk_ok = false;
        break;
      }
      ClsEdge& e = cedges[next_edge];
      int dir = e.a == curc ? +1 : -1;
      cw.curve.edges.push_back(CurveEdge{e.label, dir});
      try {
        X = dir > 0 ? detail::mat_mul(e.mat, X, f)
                    : detail::mat_mul(detail::mat_inverse(e.mat, f), X, f);
      } catch (const std::invalid_argument&) {
        walk_ok = false;
        break;
      }
      curc = dir > 0 ? e.b : e.a;
      prev_edge = next_edge;
      if (curc == startc) break;
    }
    if (!walk_ok || cw.curve.vertices.size() != cls.size()) {
      emit_unreadable();
      continue;
    }
    cw.ls = LocalSystem{X, 0};
    result.components.push_back(cw);
  }

  reduce_multicurve(result);
  // deterministic component order
  std::sort(result.components.begin(), result.components.end(),
            [&](const CurveWithLS& a, const CurveWithLS& b) {
              auto ka = detail::curve_key(a.curve),
                   kb = detail::curve_key(b.curve);
              if (ka != kb) return ka < kb;
              return detail::ls_key(a.ls, f) < detail::ls_key(b.ls, f);
            });
  return result;
}

// ---------------------------------------------------------------------------
// Equivalence / equality

inline bool curves_equivalent(const CurveWithLS& a, const CurveWithLS& b,
                              Field f) {
  if (detail::curve_key(a.curve) != detail::curve_key(b.curve)) return false;
  if (a.ls.dim() != b.ls.dim()) return false;
  std::string ka = detail::ls_key(a.ls, f), kb = detail::ls_key(b.ls, f);
  if (ka == kb) return true;
  // traversal reversal inverts the local system
  LocalSystem binv{detail::mat_inverse(b.ls.mat, f), b.ls.edge};
  return ka == detail::ls_key(binv, f);
}

inline bool multicurves_equal(const Multicurve& a, const Multicurve& b) {
  if (!a.unreadable.empty() || !b.unreadable.empty()) return false;
  if (a.components.size() != b.components.size()) return false;
  std::vector<bool> used(b.components.size(), false);
  for (auto& ca : a.components) {
    bool found = false;
    for (std::size_t j = 0; j < b.components.size() && !found; ++j)
      if (!used[j] && curves_equivalent(ca, b.components[j], a.field)) {
        used[j] = true;
        found = true;
      }
    if (!found) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// D-label counts (counts pure D-terms by their idempotent)

inline std::pair<long, long> count_d_labels(const TypeD& X) {
  long db = 0, dw = 0;
  for (auto& [k, a] : X.diff)
    for (auto& [p, c] : a.terms)
      if (p.kind == Kind::D) (p.source == Idem::B ? db : dw)++;
  return {db, dw};
}

inline std::pair<long, long> count_d_labels(const CurveWithLS& cw, Field f) {
  return count_d_labels(curve_to_complex(f, cw));
}

// ---------------------------------------------------------------------------
// Mirroring: negate gradings, reverse arrows, apply the opposite-algebra
// isomorphism (D and S^2 fixed, S flips its idempotent side).

inline Pure mirror_pure(const Pure& p) {
  Pure r = p;
  if (p.kind == Kind::S) r.source = other(p.source);
  return r;
}

inline TypeD mirror_complex(const TypeD& X) {
  TypeD R(X.field);
  for (auto& g : X.gens) R.add_gen(g.id, g.idem, -g.q, -g.h);
  for (auto& [k, a] : X.diff) {
    AlgElt b(X.field);
    for (auto& [p, c] : a.terms) b.add_term(mirror_pure(p), c);
    R.add_edge(k.second, k.first, b);
  }
  return R;
}

inline CurveWithLS mirror_curve(const CurveWithLS& cwin) {
  CurveWithLS cw = cwin;
  for (auto& v : cw.curve.vertices) {
    v.q = -v.q;
    v.h = -v.h;
  }
  for (auto& e : cw.curve.edges) {
    e.label = mirror_pure(e.label);
    e.dir = -e.dir;
  }
  return cw;
}

inline Multicurve mirror_multicurve(const Multicurve& m) {
  Multicurve r{m.field, {}, {}};
  for (auto& c : m.components) r.components.push_back(mirror_curve(c));
  for (auto& u : m.unreadable) r.unreadable.push_back(mirror_complex(u));
  reduce_multicurve(r);
  return r;
}

}  // namespace bnt
