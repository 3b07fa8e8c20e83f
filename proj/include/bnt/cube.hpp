#pragma once
// Tangle diagrams as slice words, complete resolutions, and the associated
// type D structures built directly in delooped form.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bnt/typed.hpp"

namespace bnt {

enum class TokKind { X, Y, Cup, Cap };

struct Token {
  TokKind kind;
  int pos;
};

inline std::string token_to_string(const Token& t) {
  switch (t.kind) {
    case TokKind::X: return "x" + std::to_string(t.pos);
    case TokKind::Y: return "y" + std::to_string(t.pos);
    case TokKind::Cup: return "cup" + std::to_string(t.pos);
    case TokKind::Cap: return "cap" + std::to_string(t.pos);
  }
  return "";
}

namespace detail {

struct DSU {
  std::vector<int> p;
  explicit DSU(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) { return p[x] == x ? x : p[x] = find(p[x]); }
  void join(int a, int b) { p[find(a)] = find(b); }
};

}  // namespace detail

// A tangle diagram swept through a sequence of slices.  The strand list is
// 0-indexed from the left.  The diagram starts and ends with exactly two
// strands; the four boundary ends are e1 bottom-left, e2 bottom-right,
// e3 top-right, * top-left.  In sweep coordinates the two initial strands
// carry * and e1, the two final strands carry e3 and e2.
struct TangleDiagram {
  std::vector<Token> tokens;

  // derived data
  int nseg = 0;  // number of strand segments
  struct Crossing {
    TokKind kind;       // X or Y
    int a, b, c, d;     // segments: a bottom-left, b bottom-right,
                        // c top-left, d top-right
    int sign;           // +1 / -1 from orientations
    bool turn0;         // the 0-resolution is the turnback smoothing
  };
  std::vector<Crossing> crossings;
  std::vector<std::pair<int, int>> joins;  // cup/cap segment joins
  // segments at the four ends, indexed e1=0, e2=1, e3=2, *=3
  int end_seg[4] = {-1, -1, -1, -1};
  std::vector<int> seg_dir;  // +1 strand flows upward through the segment
  int n_pos = 0, n_neg = 0;
  int closed_components = 0;
  int conn = 3;  // connectivity x_i: which end pairs with *

  int num_crossings() const { return static_cast<int>(crossings.size()); }
};

namespace detail {

inline std::vector<Token> tokenize_tangle(const std::string& word) {
  std::vector<Token> toks;
  std::string w = word;
  for (char& ch : w)
    if (ch == ',') ch = ' ';
  std::istringstream in(w);
  std::string t;
  while (in >> t) {
    TokKind k;
    std::size_t off;
    if (t.rfind("cup", 0) == 0) { k = TokKind::Cup; off = 3; }
    else if (t.rfind("cap", 0) == 0) { k = TokKind::Cap; off = 3; }
    else if (t[0] == 'x') { k = TokKind::X; off = 1; }
    else if (t[0] == 'y') { k = TokKind::Y; off = 1; }
    else throw std::invalid_argument("bad tangle token: " + t);
    if (off >= t.size() ||
        t.find_first_not_of("0123456789", off) != std::string::npos)
      throw std::invalid_argument("bad tangle token: " + t);
    toks.push_back(Token{k, std::stoi(t.substr(off))});
  }
  return toks;
}

}  // namespace detail

// Parse a slice word.  An optional first line "orient: <in|out> x4" fixes the
// orientations at (e1,e2,e3,*); by default e1 points in, and the second open
// strand points in at e3 if e3 lies on it, otherwise at *.
inline TangleDiagram parse_tangle(const std::string& text) {
  std::string word = text;
  std::string orient;
  {
    auto nl = text.find('\n');
    std::string first = text.substr(0, nl == std::string::npos ? text.size() : nl);
    auto pos = first.find("orient:");
    if (pos != std::string::npos) {
      orient = first.substr(pos + 7);
      word = nl == std::string::npos ? "" : text.substr(nl + 1);
    }
  }

  TangleDiagram d;
  d.tokens = detail::tokenize_tangle(word);

  // trace segments through the slices
  std::vector<int> cur = {0, 1};  // segment ids; cur[0] carries *, cur[1] e1
  d.nseg = 2;
  d.end_seg[3] = 0;  // *
  d.end_seg[0] = 1;  // e1
  for (const Token& t : d.tokens) {
    int n = static_cast<int>(cur.size());
    switch (t.kind) {
      case TokKind::X:
      case TokKind::Y: {
        if (t.pos < 0 || t.pos + 1 >= n)
          throw std::invalid_argument("crossing position out of range");
        int a = cur[t.pos], b = cur[t.pos + 1];
        int c = d.nseg++, e = d.nseg++;
        d.crossings.push_back(TangleDiagram::Crossing{t.kind, a, b, c, e, 0});
        cur[t.pos] = c;
        cur[t.pos + 1] = e;
        break;
      }
      case TokKind::Cup: {
        if (t.pos < 0 || t.pos > n)
          throw std::invalid_argument("cup position out of range");
        int l = d.nseg++, r = d.nseg++;
        d.joins.push_back({l, r});
        cur.insert(cur.begin() + t.pos, {l, r});
        break;
      }
      case TokKind::Cap: {
        if (t.pos < 0 || t.pos + 1 >= n)
          throw std::invalid_argument("cap position out of range");
        d.joins.push_back({cur[t.pos], cur[t.pos + 1]});
        cur.erase(cur.begin() + t.pos, cur.begin() + t.pos + 2);
        break;
      }
    }
  }
  if (cur.size() != 2)
    throw std::invalid_argument("diagram must end with exactly two strands");
  d.end_seg[2] = cur[0];  // e3
  d.end_seg[1] = cur[1];  // e2

  // components of the underlying tangle (strands pass through crossings)
  detail::DSU comp(d.nseg);
  for (auto& j : d.joins) comp.join(j.first, j.second);
  for (auto& c : d.crossings) {
    comp.join(c.a, c.d);
    comp.join(c.b, c.c);
  }
  int cstar = comp.find(d.end_seg[3]);
  d.conn = 0;
  for (int i = 0; i < 3; ++i)
    if (comp.find(d.end_seg[i]) == cstar) d.conn = i + 1;
  if (d.conn == 0) throw std::logic_error("open strands failed to pair");
  {
    std::vector<int> reps;
    for (int s = 0; s < d.nseg; ++s)
      if (comp.find(s) == s) reps.push_back(s);
    d.closed_components = static_cast<int>(reps.size()) - 2;
  }

  // orientations: seg_dir[s] = +1 when the strand flows upward through s.
  // Edges: joins flip the direction, crossing strand-connections keep it.
  std::vector<std::vector<std::pair<int, int>>> adj(d.nseg);  // (to, flip)
  for (auto& j : d.joins) {
    adj[j.first].push_back({j.second, 1});
    adj[j.second].push_back({j.first, 1});
  }
  for (auto& c : d.crossings) {
    adj[c.a].push_back({c.d, 0});
    adj[c.d].push_back({c.a, 0});
    adj[c.b].push_back({c.c, 0});
    adj[c.c].push_back({c.b, 0});
  }
  d.seg_dir.assign(d.nseg, 0);
  auto flood = [&](int seed, int dir) {
    if (d.seg_dir[seed] != 0) {
      if (d.seg_dir[seed] != dir)
        throw std::invalid_argument("inconsistent orientation assignment");
      return;
    }
    std::vector<int> stack = {seed};
    d.seg_dir[seed] = dir;
    while (!stack.empty()) {
      int s = stack.back();
      stack.pop_back();
      for (auto& [t, flip] : adj[s]) {
        int want = flip ? -d.seg_dir[s] : d.seg_dir[s];
        if (d.seg_dir[t] == 0) {
          d.seg_dir[t] = want;
          stack.push_back(t);
        } else if (d.seg_dir[t] != want) {
          throw std::invalid_argument("inconsistent orientation assignment");
        }
      }
    }
  };
  // "in" at a bottom end (e2, e3) means the segment flows up; at a top end
  // (e1, *) it flows down.
  const int in_dir[4] = {+1, -1, -1, +1};  // e1, e2, e3, *
  if (!orient.empty()) {
    std::istringstream in(orient);
    std::string s;
    std::vector<int> io;
    while (in >> s) {
      if (s == "in") io.push_back(1);
      else if (s == "out") io.push_back(-1);
      else throw std::invalid_argument("orient header entries must be in/out");
    }
    if (io.size() != 4)
      throw std::invalid_argument("orient header needs four entries");
    int n_in = 0;
    for (int v : io) n_in += (v == 1);
    if (n_in != 2)
      throw std::invalid_argument("orient header needs two in and two out ends");
    for (int i = 0; i < 4; ++i) flood(d.end_seg[i], io[i] * in_dir[i]);
  } else {
    flood(d.end_seg[0], in_dir[0]);  // in at e1
    if (comp.find(d.end_seg[2]) != comp.find(d.end_seg[0]))
      flood(d.end_seg[2], in_dir[2]);  // in at e3
    else
      flood(d.end_seg[3], in_dir[3]);  // in at *
  }
  for (int s = 0; s < d.nseg; ++s)
    if (d.seg_dir[s] == 0) flood(s, +1);  // closed components: arbitrary

  // crossing signs: for both strands flowing up, x is positive and y is
  // negative; reversing either strand flips the sign.
  //
  // Resolution assignment: the 0-/1-smoothings are fixed by the unoriented
  // crossing picture alone (orientations only enter through the n+/n- grading
  // shifts).  For an x-crossing the 0-resolution is the through-smoothing,
  // for a y-crossing the turnback.  This is forced: a kink's circle always
  // sits in the turnback smoothing, Reidemeister I invariance under the
  // h^{|v|-n-} q^{|v|+n+-2n-} shifts needs that circle in resolution 0 for a
  // positive kink and in resolution 1 for a negative one, and kinks carry the
  // opposite sign from parallel crossings of the same picture.
  for (auto& c : d.crossings) {
    int base = c.kind == TokKind::X ? +1 : -1;
    c.sign = base * d.seg_dir[c.a] * d.seg_dir[c.b];
    (c.sign > 0 ? d.n_pos : d.n_neg)++;
    c.turn0 = c.kind == TokKind::Y;
  }
  return d;
}

inline int connectivity(const TangleDiagram& d) { return d.conn; }

// ---------------------------------------------------------------------------
// Resolutions

struct Resolution {
  Idem conn = Idem::B;
  std::vector<int> circle_reps;        // sorted class representatives
  std::vector<int> seg_class;          // segment -> class representative
  int open_rep_star = -1, open_rep_other = -1;

  int num_circles() const { return static_cast<int>(circle_reps.size()); }
  int circle_index(int rep) const {
    auto it = std::lower_bound(circle_reps.begin(), circle_reps.end(), rep);
    if (it == circle_reps.end() || *it != rep)
      throw std::logic_error("unknown circle representative");
    return static_cast<int>(it - circle_reps.begin());
  }
};

namespace detail {

// The two strands of the chosen smoothing, as segment pairs.  Which smoothing
// is the 0-resolution is decided per crossing from the strand orientations
// when the diagram is parsed (see the comment on turn0 above).
inline void smoothing_pairs(const TangleDiagram::Crossing& c, int bit,
                            std::pair<int, int>& p1, std::pair<int, int>& p2) {
  bool turnback = c.turn0 ? (bit == 0) : (bit == 1);
  if (turnback) {
    p1 = {c.a, c.b};
    p2 = {c.c, c.d};
  } else {
    p1 = {c.a, c.c};
    p2 = {c.b, c.d};
  }
}

}  // namespace detail

inline Resolution resolve(const TangleDiagram& d, std::uint32_t v) {
  detail::DSU dsu(d.nseg);
  for (auto& j : d.joins) dsu.join(j.first, j.second);
  for (int i = 0; i < d.num_crossings(); ++i) {
    std::pair<int, int> p1, p2;
    detail::smoothing_pairs(d.crossings[i], (v >> i) & 1u, p1, p2);
    dsu.join(p1.first, p1.second);
    dsu.join(p2.first, p2.second);
  }
  Resolution r;
  // canonicalize: representative = smallest segment in class
  std::vector<int> rep(d.nseg, -1);
  for (int s = 0; s < d.nseg; ++s) {
    int c = dsu.find(s);
    if (rep[c] == -1 || s < rep[c]) rep[c] = s;
  }
  r.seg_class.resize(d.nseg);
  for (int s = 0; s < d.nseg; ++s) r.seg_class[s] = rep[dsu.find(s)];
  r.open_rep_star = r.seg_class[d.end_seg[3]];
  r.conn = (r.seg_class[d.end_seg[2]] == r.open_rep_star) ? Idem::B : Idem::W;
  for (int i = 0; i < 3; ++i)
    if (r.seg_class[d.end_seg[i]] != r.open_rep_star)
      r.open_rep_other = r.seg_class[d.end_seg[i]];
  for (int s = 0; s < d.nseg; ++s)
    if (r.seg_class[s] == s && s != r.open_rep_star && s != r.open_rep_other)
      r.circle_reps.push_back(s);
  return r;
}

// ---------------------------------------------------------------------------
// The cube complex

namespace detail {

inline std::string bits(std::uint32_t v, int n) {
  std::string s(n, '0');
  for (int i = 0; i < n; ++i)
    if ((v >> i) & 1u) s[i] = '1';
  return s;
}

inline std::string gen_id(std::uint32_t v, int n, std::uint32_t mask,
                          int ncirc) {
  std::string s = "v" + bits(v, n);
  if (ncirc > 0) s += ":" + bits(mask, ncirc);
  return s;
}

// One source-generator contribution of an edge map.
struct EdgeTerm {
  std::uint32_t dst_mask;
  AlgElt label;
};

}  // namespace detail

// The complete type D structure D(T) of the diagram, built vertex by vertex
// with the delooped saddle maps.  Throws if d^2 = 0 cannot be arranged.
inline TypeD complex(const TangleDiagram& d, Field field,
                     const std::vector<int>* edge_sign_override = nullptr) {
  int n = d.num_crossings();
  if (n > 20) throw std::invalid_argument("too many crossings");
  std::uint32_t nv = 1u << n;

  std::vector<Resolution> res(nv);
  for (std::uint32_t v = 0; v < nv; ++v) res[v] = resolve(d, v);

  TypeD X(field);
  for (std::uint32_t v = 0; v < nv; ++v) {
    int w = __builtin_popcount(v);
    int ncirc = res[v].num_circles();
    Idem idem = res[v].conn;
    int h = w - d.n_neg;
    int qbase = w + d.n_pos - 2 * d.n_neg + ncirc;
    for (std::uint32_t mask = 0; mask < (1u << ncirc); ++mask) {
      int q = qbase - 2 * __builtin_popcount(mask);
      X.add_gen(detail::gen_id(v, n, mask, ncirc), idem, q, h);
    }
  }

  AlgElt iota_b = AlgElt::idem(field, Idem::B);
  AlgElt iota_w = AlgElt::idem(field, Idem::W);

  int edge_counter = 0;
  for (std::uint32_t v = 0; v < nv; ++v) {
    const Resolution& A = res[v];
    int ncA = A.num_circles();
    for (int i = 0; i < n; ++i) {
      if ((v >> i) & 1u) continue;
      std::uint32_t vp = v | (1u << i);
      const Resolution& B = res[vp];
      int ncB = B.num_circles();
      int sgn = (__builtin_popcount(v & ((1u << i) - 1)) % 2 == 0) ? 1 : -1;
      if (edge_sign_override) sgn *= (*edge_sign_override)[edge_counter];
      ++edge_counter;
      Scalar coef_sign(field, sgn);

      const auto& cr = d.crossings[i];
      std::pair<int, int> p1, p2, q1, q2;
      detail::smoothing_pairs(cr, 0, p1, p2);
      detail::smoothing_pairs(cr, 1, q1, q2);
      int r1 = A.seg_class[p1.first], r2 = A.seg_class[p2.first];
      int s1 = B.seg_class[q1.first], s2 = B.seg_class[q2.first];

      auto is_circle_A = [&](int rep) {
        return rep != A.open_rep_star && rep != A.open_rep_other;
      };
      auto is_circle_B = [&](int rep) {
        return rep != B.open_rep_star && rep != B.open_rep_other;
      };

      // transport map for circles persisting across the edge
      std::vector<int> dst_of_src(ncA, -1);
      for (int ci = 0; ci < ncA; ++ci) {
        int rep = A.circle_reps[ci];
        if (rep == r1 || rep == r2) continue;  // involved in the saddle
        dst_of_src[ci] = B.circle_index(rep);
      }

      AlgElt iota = A.conn == Idem::B ? iota_b : iota_w;
      AlgElt g_label = central_g(field, 1, A.conn);
      AlgElt d_label = AlgElt::make(field, Pure{Kind::D, A.conn, 0});
      AlgElt ss_label = AlgElt::make(field, Pure{Kind::SS, A.conn, 0});
      AlgElt s_label = AlgElt::make(field, Pure{Kind::S, A.conn, 0});

      for (std::uint32_t mask = 0; mask < (1u << ncA); ++mask) {
        std::uint32_t base = 0;
        for (int ci = 0; ci < ncA; ++ci)
          if (((mask >> ci) & 1u) && dst_of_src[ci] >= 0)
            base |= 1u << dst_of_src[ci];

        std::vector<detail::EdgeTerm> terms;
        if (r1 != r2) {
          bool c1 = is_circle_A(r1), c2 = is_circle_A(r2);
          if (c1 && c2) {
            // two circles merge into one
            int ci = A.circle_index(r1), cj = A.circle_index(r2);
            int ck = B.circle_index(B.seg_class[p1.first]);
            bool ei = (mask >> ci) & 1u, ej = (mask >> cj) & 1u;
            if (!ei && !ej)
              terms.push_back({base, iota});
            else if (ei != ej)
              terms.push_back({base | (1u << ck), iota});
            else
              terms.push_back({base | (1u << ck), -g_label});
          } else if (c1 || c2) {
            // a circle merges with an open component
            int crep = c1 ? r1 : r2;
            int orep = c1 ? r2 : r1;
            int ci = A.circle_index(crep);
            bool with_star = (orep == A.open_rep_star);
            bool ei = (mask >> ci) & 1u;
            if (!ei)
              terms.push_back({base, iota});
            else if (!with_star)
              terms.push_back({base, d_label});
            // merging mu into the *-component kills the term
          } else {
            // connectivity change
            terms.push_back({base, s_label});
          }
        } else {
          bool src_circle = is_circle_A(r1);
          if (src_circle) {
            // a circle splits into two circles
            int ck = A.circle_index(r1);
            int ci = B.circle_index(s1), cj = B.circle_index(s2);
            bool ek = (mask >> ck) & 1u;
            if (!ek) {
              terms.push_back({base | (1u << ci), iota});
              terms.push_back({base | (1u << cj), iota});
              terms.push_back({base, g_label});
            } else {
              terms.push_back({base | (1u << ci) | (1u << cj), iota});
            }
          } else {
            // a circle splits off an open component
            int crep = is_circle_B(s1) ? s1 : s2;
            int ci = B.circle_index(crep);
            bool with_star = (r1 == A.open_rep_star);
            terms.push_back({base | (1u << ci), iota});
            terms.push_back({base, with_star ? g_label : ss_label});
          }
        }

        std::string src = detail::gen_id(v, n, mask, ncA);
        for (auto& t : terms)
          X.add_edge(src, detail::gen_id(vp, n, t.dst_mask, ncB),
                     t.label.scaled(coef_sign));
      }
    }
  }
  return X;
}

namespace detail {

// Solve for an edge-sign correction over F2 when the standard alternating
// signs fail; each bad face needs an odd number of flipped edges.
inline std::vector<int> repair_signs(const TangleDiagram& d, Field field);

}  // namespace detail

inline TypeD tangle_complex(const TangleDiagram& d, Field field) {
  TypeD X = complex(d, field);
  if (validate(X).empty()) return X;
  std::vector<int> fix = detail::repair_signs(d, field);
  X = complex(d, field, &fix);
  require_valid(X, "tangle complex after sign repair");
  return X;
}

inline TypeD tangle_complex_n(const TangleDiagram& d, int n, Field field) {
  return cone_g_power(tangle_complex(d, field), n);
}

namespace detail {

inline std::vector<int> repair_signs(const TangleDiagram& d, Field field) {
  int n = d.num_crossings();
  std::uint32_t nv = 1u << n;
  // index edges in construction order: by vertex, then crossing
  std::map<std::pair<std::uint32_t, int>, int> eidx;
  int ne = 0;
  for (std::uint32_t v = 0; v < nv; ++v)
    for (int i = 0; i < n; ++i)
      if (!((v >> i) & 1u)) eidx[{v, i}] = ne++;

  // build the unsigned complex once to evaluate faces
  std::vector<int> plus(ne, 1);
  TypeD X = complex(d, field, &plus);

  // face (v; i<j): edges (v,i),(v,j),(v|i,j),(v|j,i); the two compositions
  // must cancel.  With the alternating baseline folded into X's labels the
  // requirement is that the face anticommutes.
  std::vector<std::vector<int>> rows;      // F2 equations over edges
  std::vector<int> rhs;
  // gens grouped by vertex for composition
  // label composites: delta restricted to an edge
  auto edge_entries = [&](std::uint32_t v, int i) {
    std::map<EdgeKey, AlgElt> m;
    std::uint32_t vp = v | (1u << i);
    int nA = 0, nB = 0;
    (void)nA; (void)nB;
    std::string pv = "v" + bits(v, n);
    std::string pw = "v" + bits(vp, n);
    for (auto& [k, a] : X.diff)
      if (k.first.rfind(pv, 0) == 0 && k.second.rfind(pw, 0) == 0)
        m[k] = a;
    return m;
  };

  for (std::uint32_t v = 0; v < nv; ++v) {
    for (int i = 0; i < n; ++i) {
      if ((v >> i) & 1u) continue;
      for (int j = i + 1; j < n; ++j) {
        if ((v >> j) & 1u) continue;
        auto e1 = edge_entries(v, i);
        auto e2 = edge_entries(v | (1u << i), j);
        auto f1 = edge_entries(v, j);
        auto f2 = edge_entries(v | (1u << j), i);
        // composite path1 = e2 after e1, path2 = f2 after f1
        std::map<EdgeKey, AlgElt> c1, c2;
        auto compose_into = [&](std::map<EdgeKey, AlgElt>& out,
                                const std::map<EdgeKey, AlgElt>& second,
                                const std::map<EdgeKey, AlgElt>& first) {
          for (auto& [k1, a1] : first)
            for (auto& [k2, a2] : second)
              if (k2.first == k1.second) {
                AlgElt prod = multiply(a2, a1);
                if (prod.is_zero()) continue;
                auto key = EdgeKey{k1.first, k2.second};
                auto it = out.find(key);
                if (it == out.end()) out.emplace(key, prod);
                else {
                  it->second = it->second + prod;
                  if (it->second.is_zero()) out.erase(it);
                }
              }
        };
        compose_into(c1, e2, e1);
        compose_into(c2, f2, f1);
        bool anti = true, comm = true;
        {
          std::map<EdgeKey, AlgElt> s = c1, q = c1;
          for (auto& [k, a] : c2) {
            auto it = s.find(k);
            if (it == s.end()) s.emplace(k, a);
            else { it->second = it->second + a; if (it->second.is_zero()) s.erase(it); }
            auto jt = q.find(k);
            if (jt == q.end()) q.emplace(k, -a);
            else { jt->second = jt->second + (-a); if (jt->second.is_zero()) q.erase(jt); }
          }
          anti = s.empty();
          comm = q.empty();
        }
        if (anti && c1.empty()) continue;  // both composites vanish
        if (!anti && !comm)
          throw std::logic_error(
              "cube face neither commutes nor anticommutes; convention bug");
        std::vector<int> row(ne, 0);
        row[eidx[{v, i}]] ^= 1;
        row[eidx[{v | (1u << i), j}]] ^= 1;
        row[eidx[{v, j}]] ^= 1;
        row[eidx[{v | (1u << j), i}]] ^= 1;
        rows.push_back(row);
        rhs.push_back(anti ? 0 : 1);
      }
    }
  }

  // Gaussian elimination over F2
  int m = static_cast<int>(rows.size());
  std::vector<int> sol(ne, 0);
  std::vector<int> where(ne, -1);
  int r = 0;
  for (int c = 0; c < ne && r < m; ++c) {
    int piv = -1;
    for (int k = r; k < m; ++k)
      if (rows[k][c]) { piv = k; break; }
    if (piv < 0) continue;
    std::swap(rows[piv], rows[r]);
    std::swap(rhs[piv], rhs[r]);
    for (int k = 0; k < m; ++k)
      if (k != r && rows[k][c]) {
        for (int cc = c; cc < ne; ++cc) rows[k][cc] ^= rows[r][cc];
        rhs[k] ^= rhs[r];
      }
    where[c] = r;
    ++r;
  }
  for (int k = r; k < m; ++k)
    if (rhs[k])
      throw std::logic_error("cube sign correction system is inconsistent");
  for (int c = 0; c < ne; ++c)
    if (where[c] >= 0) sol[c] = rhs[where[c]];
  std::vector<int> out(ne, 1);
  for (int c = 0; c < ne; ++c)
    if (sol[c]) out[c] = -1;
  return out;
}

}  // namespace detail

}  // namespace bnt
