#pragma once

// Type D structures over the Bar-Natan algebra: validation, Gaussian
// cancellation, clean-up isomorphisms, full reduction, mapping cones of
// central elements, morphism-space homology, nullhomotopy solving and
// homotopy equivalence testing.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "bnt/bnalgebra.hpp"

namespace bnt {

struct Gen {
  std::string id;
  Idem idem = Idem::B;
  int q = 0;
  int h = 0;
};

using EdgeKey = std::pair<std::string, std::string>;  // (src, dst)

struct Morphism {
  Field field;
  std::map<EdgeKey, AlgElt> entries;
  explicit Morphism(Field f = Field{0}) : field(f) {}
  void add(const std::string& src, const std::string& dst, const AlgElt& a) {
    if (a.is_zero()) return;
    auto it = entries.find({src, dst});
    if (it == entries.end()) {
      entries.emplace(EdgeKey{src, dst}, a);
    } else {
      it->second = it->second + a;
      if (it->second.is_zero()) entries.erase(it);
    }
  }
};

using BigradedDims = std::map<std::pair<int, int>, long>;  // (q,h) -> dim

inline long total_dim(const BigradedDims& d) {
  long t = 0;
  for (auto& [k, v] : d) t += v;
  return t;
}

struct FreeSummandError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TypeD {
  Field field;
  std::vector<Gen> gens;
  std::map<EdgeKey, AlgElt> diff;

  explicit TypeD(Field f = Field{0}) : field(f) {}

  const Gen* find(const std::string& id) const {
    for (auto& g : gens)
      if (g.id == id) return &g;
    return nullptr;
  }

  void add_gen(const std::string& id, Idem i, int q, int h) {
    gens.push_back(Gen{id, i, q, h});
  }

  void add_edge(const std::string& src, const std::string& dst,
                const AlgElt& a) {
    if (a.is_zero()) return;
    auto it = diff.find({src, dst});
    if (it == diff.end()) {
      diff.emplace(EdgeKey{src, dst}, a);
    } else {
      it->second = it->second + a;
      if (it->second.is_zero()) diff.erase(it);
    }
  }

  AlgElt label(const std::string& src, const std::string& dst) const {
    auto it = diff.find({src, dst});
    return it == diff.end() ? AlgElt::zero(field) : it->second;
  }

  std::size_t index_of(const std::string& id) const {
    for (std::size_t i = 0; i < gens.size(); ++i)
      if (gens[i].id == id) return i;
    throw std::invalid_argument("unknown generator: " + id);
  }
};

// ---------------------------------------------------------------------------
// Validation

inline std::vector<std::string> validate(const TypeD& X) {
  std::vector<std::string> report;
  std::unordered_map<std::string, const Gen*> by_id;
  for (auto& g : X.gens) {
    if (by_id.count(g.id)) report.push_back("duplicate id: " + g.id);
    by_id[g.id] = &g;
  }
  for (auto& [key, a] : X.diff) {
    auto xs = by_id.find(key.first);
    auto ys = by_id.find(key.second);
    if (xs == by_id.end() || ys == by_id.end()) {
      report.push_back("edge with unknown endpoint: " + key.first + "->" +
                       key.second);
      continue;
    }
    const Gen* x = xs->second;
    const Gen* y = ys->second;
    if (a.is_zero()) report.push_back("stored zero label: " + key.first);
    for (auto& [p, c] : a.terms) {
      if (p.source != x->idem || p.target() != y->idem)
        report.push_back("idempotent mismatch on " + key.first + "->" +
                         key.second + " term " + p.to_string());
      if (y->q - x->q + p.qdeg() != 0)
        report.push_back("q-grading violation on " + key.first + "->" +
                         key.second + " term " + p.to_string());
    }
    if (y->h - x->h != 1)
      report.push_back("h-grading violation on " + key.first + "->" +
                       key.second);
  }
  // delta^2 = 0
  std::unordered_map<std::string, std::vector<std::pair<std::string, const AlgElt*>>>
      out;
  for (auto& [key, a] : X.diff) out[key.first].emplace_back(key.second, &a);
  for (auto& [key, a] : X.diff) {
    const std::string& x = key.first;
    const std::string& y = key.second;
    auto it = out.find(y);
    if (it == out.end()) continue;
    for (auto& [z, b] : it->second) {
      (void)z;
    }
  }
  // accumulate delta^2 per (x,z)
  std::map<EdgeKey, AlgElt> sq;
  for (auto& [key1, a] : X.diff) {
    auto it = out.find(key1.second);
    if (it == out.end()) continue;
    for (auto& [z, b] : it->second) {
      AlgElt prod = multiply(*b, a);
      if (prod.is_zero()) continue;
      auto k = EdgeKey{key1.first, z};
      auto jt = sq.find(k);
      if (jt == sq.end())
        sq.emplace(k, prod);
      else {
        jt->second = jt->second + prod;
        if (jt->second.is_zero()) sq.erase(jt);
      }
    }
  }
  for (auto& [k, v] : sq)
    report.push_back("delta^2 != 0 at " + k.first + "->" + k.second + ": " +
                     v.to_string());
  return report;
}

inline void require_valid(const TypeD& X, const std::string& what) {
  auto rep = validate(X);
  if (!rep.empty())
    throw std::logic_error(what + ": invalid type D structure: " + rep.front());
}

// ---------------------------------------------------------------------------
// Gaussian cancellation

// Cancels the edge src->dst whose label must be an invertible multiple of an
// idempotent.  Standard zig-zag formula: for a: w->dst and b: src->z the new
// differential gains -b·λ⁻¹·a on w->z.
inline TypeD cancel(const TypeD& X, const std::string& src,
                    const std::string& dst) {
  auto it = X.diff.find({src, dst});
  if (it == X.diff.end()) throw std::invalid_argument("no such edge");
  const AlgElt& lbl = it->second;
  if (lbl.terms.size() != 1 || lbl.terms.begin()->first.kind != Kind::Id)
    throw std::invalid_argument("label is not an invertible idempotent multiple");
  Scalar lam = lbl.terms.begin()->second;
  Scalar lam_inv = lam.inv();

  TypeD R(X.field);
  for (auto& g : X.gens)
    if (g.id != src && g.id != dst) R.gens.push_back(g);
  std::vector<std::pair<std::string, AlgElt>> into_dst;   // a: w->dst
  std::vector<std::pair<std::string, AlgElt>> from_src;   // b: src->z
  for (auto& [key, a] : X.diff) {
    if (key.first == src || key.second == dst) {
      if (key.second == dst && key.first != src)
        into_dst.emplace_back(key.first, a);
      if (key.first == src && key.second != dst)
        from_src.emplace_back(key.second, a);
      continue;
    }
    if (key.first == dst || key.second == src) continue;
    R.add_edge(key.first, key.second, a);
  }
  for (auto& [w, a] : into_dst)
    for (auto& [z, b] : from_src)
      R.add_edge(w, z, multiply(b, a).scaled(-lam_inv));
  return R;
}

// Full reduction: cancel identity-labelled edges until none remain.
// Deterministic: always cancels the lexicographically least eligible edge
// (by generator id pair).
inline TypeD reduce(const TypeD& X) {
  int n = static_cast<int>(X.gens.size());
  std::unordered_map<std::string, int> idx;
  for (int i = 0; i < n; ++i) idx[X.gens[i].id] = i;
  // rank by id for deterministic ordering
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return X.gens[a].id < X.gens[b].id;
  });
  std::vector<int> rank(n);
  for (int i = 0; i < n; ++i) rank[order[i]] = i;

  std::vector<std::map<int, AlgElt>> out(n), in(n);
  for (auto& [key, a] : X.diff) {
    int s = idx.at(key.first), d = idx.at(key.second);
    out[s].emplace(d, a);
    in[d].emplace(s, a);
  }
  auto invertible = [](const AlgElt& a) {
    return a.terms.size() == 1 && a.terms.begin()->first.kind == Kind::Id;
  };
  std::set<std::pair<int, int>> cand;  // (rank[src], ) pairs by rank order
  auto key_of = [&](int s, int d) {
    return std::make_pair(rank[s], rank[d]);
  };
  std::unordered_map<long long, std::pair<int, int>> cand_back;
  auto enc = [&](int rs, int rd) {
    return static_cast<long long>(rs) * (n + 1) + rd;
  };
  std::vector<char> alive(n, 1);
  auto refresh_cand = [&](int s, int d) {
    auto k = key_of(s, d);
    auto it = out[s].find(d);
    bool inv = it != out[s].end() && invertible(it->second);
    if (inv) {
      cand.insert(k);
      cand_back[enc(k.first, k.second)] = {s, d};
    } else {
      cand.erase(k);
    }
  };
  for (int s = 0; s < n; ++s)
    for (auto& [d, a] : out[s]) refresh_cand(s, d);

  while (!cand.empty()) {
    auto k = *cand.begin();
    cand.erase(cand.begin());
    auto [s, d] = cand_back.at(enc(k.first, k.second));
    if (!alive[s] || !alive[d]) continue;
    auto it = out[s].find(d);
    if (it == out[s].end() || !invertible(it->second)) continue;
    Scalar lam_inv = it->second.terms.begin()->second.inv();
    alive[s] = alive[d] = 0;
    // collect neighbours
    std::vector<std::pair<int, AlgElt>> into_d, from_s;
    for (auto& [w, a] : in[d])
      if (w != s && alive[w]) into_d.emplace_back(w, a);
    for (auto& [z, b] : out[s])
      if (z != d && alive[z]) from_s.emplace_back(z, b);
    // detach s and d everywhere
    for (auto& [w, a] : in[d]) { out[w].erase(d); cand.erase(key_of(w, d)); }
    for (auto& [z, b] : out[d]) { in[z].erase(d); cand.erase(key_of(d, z)); }
    for (auto& [z, b] : out[s]) { in[z].erase(s); cand.erase(key_of(s, z)); }
    for (auto& [w, a] : in[s]) { out[w].erase(s); cand.erase(key_of(w, s)); }
    out[s].clear(); out[d].clear(); in[s].clear(); in[d].clear();
    // zig-zag corrections
    for (auto& [w, a] : into_d) {
      for (auto& [z, b] : from_s) {
        AlgElt corr = multiply(b, a).scaled(-lam_inv);
        if (corr.is_zero()) continue;
        auto jt = out[w].find(z);
        if (jt == out[w].end()) {
          out[w].emplace(z, corr);
          in[z].emplace(w, corr);
        } else {
          jt->second = jt->second + corr;
          in[z][w] = jt->second;
          if (jt->second.is_zero()) {
            out[w].erase(z);
            in[z].erase(w);
          }
        }
        refresh_cand(w, z);
      }
    }
  }
  TypeD R(X.field);
  for (int i = 0; i < n; ++i)
    if (alive[i]) R.gens.push_back(X.gens[i]);
  for (int s = 0; s < n; ++s)
    if (alive[s])
      for (auto& [d, a] : out[s]) R.add_edge(X.gens[s].id, X.gens[d].id, a);
  return R;
}

// ---------------------------------------------------------------------------
// Clean-up isomorphism: delta' = (1-a) delta (1+a), for a of bidegree (0,0)
// with a^2 = 0 and (da)·a = 0.

inline Morphism compose_morphism_diff(const TypeD& X, const Morphism& a,
                                      bool diff_first) {
  // diff_first: returns a∘δ ; else δ∘a
  Morphism r(X.field);
  if (diff_first) {
    for (auto& [key, lbl] : X.diff)          // x ->(δ) m
      for (auto& [akey, av] : a.entries)     // m ->(a) y
        if (akey.first == key.second)
          r.add(key.first, akey.second, multiply(av, lbl));
  } else {
    for (auto& [akey, av] : a.entries)       // x ->(a) m
      for (auto& [key, lbl] : X.diff)        // m ->(δ) y
        if (key.first == akey.second)
          r.add(akey.first, key.second, multiply(lbl, av));
  }
  return r;
}

inline Morphism compose_morphisms(const Morphism& second, const Morphism& first,
                                  Field f) {
  Morphism r(f);
  for (auto& [k1, v1] : first.entries)
    for (auto& [k2, v2] : second.entries)
      if (k2.first == k1.second) r.add(k1.first, k2.second, multiply(v2, v1));
  return r;
}

inline TypeD clean_up(const TypeD& X, const Morphism& a) {
  // preconditions
  for (auto& [key, v] : a.entries) {
    const Gen& x = X.gens[X.index_of(key.first)];
    const Gen& y = X.gens[X.index_of(key.second)];
    if (y.h - x.h != 0) throw std::invalid_argument("clean_up: a not h-degree 0");
    for (auto& [p, c] : v.terms) {
      if (p.source != x.idem || p.target() != y.idem)
        throw std::invalid_argument("clean_up: idempotent mismatch in a");
      if (y.q - x.q + p.qdeg() != 0)
        throw std::invalid_argument("clean_up: a not q-degree 0");
    }
  }
  Morphism a2 = compose_morphisms(a, a, X.field);
  if (!a2.entries.empty()) throw std::invalid_argument("clean_up: a^2 != 0");
  // ∂a = δ∘a - a∘δ (|a| even)
  Morphism da(X.field);
  {
    Morphism d_after = compose_morphism_diff(X, a, false);  // δ∘a
    Morphism d_before = compose_morphism_diff(X, a, true);  // a∘δ
    for (auto& [k, v] : d_after.entries) da.add(k.first, k.second, v);
    for (auto& [k, v] : d_before.entries) da.add(k.first, k.second, -v);
  }
  Morphism da_a = compose_morphisms(da, a, X.field);
  if (!da_a.entries.empty())
    throw std::invalid_argument("clean_up: (∂a)·a != 0");

  // δ' = δ + δa - aδ - aδa
  TypeD R(X.field);
  R.gens = X.gens;
  for (auto& [k, v] : X.diff) R.add_edge(k.first, k.second, v);
  Morphism da_morph = compose_morphism_diff(X, a, false);   // δ∘a
  Morphism ad_morph = compose_morphism_diff(X, a, true);    // a∘δ
  Morphism ada = compose_morphisms(a, da_morph, X.field);   // a∘(δ∘a)
  for (auto& [k, v] : da_morph.entries) R.add_edge(k.first, k.second, v);
  for (auto& [k, v] : ad_morph.entries) R.add_edge(k.first, k.second, -v);
  for (auto& [k, v] : ada.entries) R.add_edge(k.first, k.second, -v);
  return R;
}

// ---------------------------------------------------------------------------
// Loop normalization (arrow pushing)
//
// Rewrites a reduced complex, by iterated change of basis, into "loop form":
// every generator has at most one incoming and one outgoing arrow carrying a
// D-power, and likewise for S-powers.  In this form the complex is a disjoint
// union of paths and cycles alternating between the two letter types, i.e. a
// multicurve.  Labels are handled in the monomial basis {D^k, S^k} with
// D^i·S^j = S^i·D^j = 0; conversions from the (kind, g) basis:
//   G^a·ι  = S^{2a} + (−1)^a D^a   (a ≥ 1)
//   G^a·D  = (−1)^a D^{a+1}
//   G^a·S  = S^{2a+1}
//   G^a·SS = S^{2a+2}
// Since an edge label is homogeneous in q, it contains at most one D-power
// and at most one S-power; all basis changes below are bidegree-(0,0).

namespace detail {

struct Mono {
  char t;  // 'D', 'S', or 'I' (identity)
  int k;   // letter power; 0 for 'I'
  auto operator<=>(const Mono&) const = default;
};

using MonoElt = std::map<Mono, Scalar>;

inline void mono_add(MonoElt& m, Mono p, const Scalar& c) {
  if (c.is_zero()) return;
  auto [it, fresh] = m.emplace(p, c);
  if (!fresh) {
    it->second = it->second + c;
    if (it->second.is_zero()) m.erase(it);
  }
}

inline MonoElt to_mono(const AlgElt& a) {
  MonoElt r;
  for (auto& [p, c] : a.terms) {
    switch (p.kind) {
      case Kind::Id:
        if (p.g == 0) {
          mono_add(r, {'I', 0}, c);
        } else {
          mono_add(r, {'S', 2 * p.g}, c);
          mono_add(r, {'D', p.g}, (p.g % 2) ? -c : c);
        }
        break;
      case Kind::D:
        mono_add(r, {'D', p.g + 1}, (p.g % 2) ? -c : c);
        break;
      case Kind::S:
        mono_add(r, {'S', 2 * p.g + 1}, c);
        break;
      case Kind::SS:
        mono_add(r, {'S', 2 * p.g + 2}, c);
        break;
    }
  }
  return r;
}

inline AlgElt from_mono(const MonoElt& m, Field f, Idem src) {
  AlgElt r(f);
  for (auto& [p, c] : m) {
    switch (p.t) {
      case 'I':
        r.add_term(Pure{Kind::Id, src, 0}, c);
        break;
      case 'D':
        r.add_term(Pure{Kind::D, src, p.k - 1}, ((p.k - 1) % 2) ? -c : c);
        break;
      case 'S':
        if (p.k % 2)
          r.add_term(Pure{Kind::S, src, (p.k - 1) / 2}, c);
        else
          r.add_term(Pure{Kind::SS, src, p.k / 2 - 1}, c);
        break;
    }
  }
  return r;
}

// b then a ("a ∘ b" read right-to-left), or nullopt when the product is zero
inline std::optional<Mono> mono_mul(Mono a, Mono b) {
  if (a.t == 'I') return b;
  if (b.t == 'I') return a;
  if (a.t != b.t) return std::nullopt;
  return Mono{a.t, a.k + b.k};
}

}  // namespace detail

inline TypeD loop_normalize(const TypeD& X, long max_iter = 100000) {
  using detail::Mono;
  using detail::MonoElt;
  const Field f = X.field;
  const int n = static_cast<int>(X.gens.size());
  std::unordered_map<std::string, int> idx;
  for (int i = 0; i < n; ++i) idx[X.gens[i].id] = i;

  // matrix keyed (src, dst) over the monomial basis
  std::map<std::pair<int, int>, MonoElt> M;
  for (auto& [k, v] : X.diff) {
    for (auto& [p, c] : v.terms)
      if (p.kind == Kind::Id && p.g == 0)
        throw std::invalid_argument("loop_normalize: complex not reduced");
    MonoElt m = detail::to_mono(v);
    if (!m.empty()) M[{idx[k.first], idx[k.second]}] = std::move(m);
  }

  auto entry = [&](int x, int z) -> MonoElt* {
    auto it = M.find({x, z});
    return it == M.end() ? nullptr : &it->second;
  };
  auto add_into = [&](int x, int z, Mono p, const Scalar& c) {
    MonoElt& m = M[{x, z}];
    detail::mono_add(m, p, c);
    if (m.empty()) M.erase({x, z});
  };

  // basis change 1 + e with e(u) = v ⊗ c·b, u ≠ v; Δ' = Δ + eΔ − Δe − eΔe
  auto transvect = [&](int u, int v, Mono b, Scalar c) {
    // collect first: the updates below must not see each other
    std::vector<std::tuple<int, int, Mono, Scalar>> upd;
    for (auto& [key, m] : M) {
      auto [x, z] = key;
      if (z == u)  // (eΔ)[(x,v)] += β·Δ[(x,u)]
        for (auto& [p, cc] : m)
          if (auto q = detail::mono_mul(b, p)) upd.emplace_back(x, v, *q, c * cc);
      if (x == v)  // (Δe)[(u,z)] −= Δ[(v,z)]·β
        for (auto& [p, cc] : m)
          if (auto q = detail::mono_mul(p, b)) upd.emplace_back(u, z, *q, -(c * cc));
    }
    if (MonoElt* vu = entry(v, u))  // (eΔe)[(u,v)] −= β·Δ[(v,u)]·β
      for (auto& [p, cc] : *vu)
        if (auto q1 = detail::mono_mul(p, b))
          if (auto q2 = detail::mono_mul(b, *q1))
            upd.emplace_back(u, v, *q2, -(c * cc * c));
    for (auto& [x, z, p, cc] : upd) add_into(x, z, p, cc);
  };

  // a conflict is a generator with two monomials of the same letter type on
  // its outgoing (or incoming) arrows; a move resolves one such pair by a
  // transvection using the shorter arrow as pivot
  struct Move {
    int u, v;  // transvect(u, v, b, c)
    Mono b;
    Scalar c;
    int pivot_k;
    long score;  // monomials the transvection would newly introduce
  };
  auto move_score = [&](int u, int v, Mono b) {
    long s = 0;
    for (auto& [key, m] : M) {
      auto [x, z] = key;
      if (z == u && x != v)
        for (auto& [p, c] : m)
          if (detail::mono_mul(b, p)) ++s;  // copied into column v
      if (x == v && z != u)
        for (auto& [p, c] : m)
          if (detail::mono_mul(p, b)) ++s;  // copied into row u
    }
    return s;
  };
  auto candidate_moves = [&]() {
    struct Occ {
      int x, y;
      Mono p;
      Scalar c;
    };
    std::map<std::tuple<int, int, char>, std::vector<Occ>> groups;
    for (auto& [key, m] : M)
      for (auto& [p, c] : m) {
        groups[{key.first, 0, p.t}].push_back({key.first, key.second, p, c});
        groups[{key.second, 1, p.t}].push_back({key.first, key.second, p, c});
      }
    std::vector<Move> moves;
    for (auto& [g, occs] : groups) {
      if (occs.size() < 2) continue;
      for (auto& piv : occs)
        for (auto& vic : occs) {
          if (piv.x == vic.x && piv.y == vic.y) continue;
          if (vic.p.k < piv.p.k) continue;
          Mono b{vic.p.k == piv.p.k ? 'I' : piv.p.t, vic.p.k - piv.p.k};
          Move mv;
          if (std::get<1>(g) == 0) {  // shared source: merge targets
            mv = {piv.y, vic.y, b, -(vic.c / piv.c), piv.p.k, 0};
          } else {  // shared target: merge sources
            mv = {vic.x, piv.x, b, vic.c / piv.c, piv.p.k, 0};
          }
          mv.score = move_score(mv.u, mv.v, mv.b);
          moves.push_back(mv);
        }
    }
    std::sort(moves.begin(), moves.end(), [](const Move& a, const Move& b) {
      return std::tie(a.pivot_k, a.score, a.u, a.v, a.b) <
             std::tie(b.pivot_k, b.score, b.u, b.v, b.b);
    });
    return moves;
  };
  auto state_key = [&]() {
    std::ostringstream os;
    for (auto& [key, m] : M) {
      os << key.first << '>' << key.second << ':';
      for (auto& [p, c] : m) os << p.t << p.k << '*' << c.to_string() << ';';
      os << '|';
    }
    return os.str();
  };

  std::set<std::string> seen;
  seen.insert(state_key());
  for (long iter = 0;; ++iter) {
    if (iter >= max_iter)
      throw std::runtime_error("loop_normalize: iteration budget exhausted");
    auto moves = candidate_moves();
    if (moves.empty()) break;
#ifdef BNT_LN_TRACE
    std::cerr << "conflicts: " << moves.size() << "\n";
#endif
    // apply the best move that leads to an unseen state
    bool applied = false;
    for (auto& mv : moves) {
      auto backup = M;
      transvect(mv.u, mv.v, mv.b, mv.c);
      std::string key = state_key();
      if (seen.insert(key).second) {
        applied = true;
        break;
      }
      M = std::move(backup);
    }
    if (!applied)
      throw std::runtime_error("loop_normalize: no progress (cyclic states)");
  }

  TypeD R(f);
  R.gens = X.gens;
  for (auto& [key, m] : M)
    R.add_edge(X.gens[key.first].id, X.gens[key.second].id,
               detail::from_mono(m, f, X.gens[key.first].idem));
  return R;
}

// ---------------------------------------------------------------------------
// Shifts, sums, cones

// Shift gradings by (dq, dh); an odd h-shift negates the differential.
inline TypeD shifted(const TypeD& X, int dq, int dh,
                     const std::string& suffix = "") {
  TypeD R(X.field);
  for (auto& g : X.gens) R.gens.push_back(Gen{g.id + suffix, g.idem,
                                              g.q + dq, g.h + dh});
  bool neg = ((dh % 2) + 2) % 2 == 1;
  for (auto& [k, v] : X.diff)
    R.add_edge(k.first + suffix, k.second + suffix, neg ? -v : v);
  return R;
}

inline TypeD direct_sum(const TypeD& A, const TypeD& B) {
  if (A.field != B.field) throw std::invalid_argument("field mismatch");
  TypeD R(A.field);
  R.gens = A.gens;
  for (auto& g : B.gens) R.gens.push_back(g);
  for (auto& [k, v] : A.diff) R.add_edge(k.first, k.second, v);
  for (auto& [k, v] : B.diff) R.add_edge(k.first, k.second, v);
  return R;
}

// Mapping cone of G^n·1_X: copies X{q^{-n}h^{-1}} and X{q^{+n}}, connected by
// G^n on each generator.
inline TypeD cone_g_power(const TypeD& X, int n) {
  if (n < 1) throw std::invalid_argument("cone_g_power needs n >= 1");
  TypeD A = shifted(X, -n, -1, "`0");
  TypeD B = shifted(X, +n, 0, "`1");
  TypeD R = direct_sum(A, B);
  for (auto& g : X.gens)
    R.add_edge(g.id + "`0", g.id + "`1", central_g(X.field, n, g.idem));
  return R;
}

// ---------------------------------------------------------------------------
// Morphism-space homology over k[G]
//
// Mor(X,Y) is a free graded k[G]-module on "lines": for generators x of X and
// y of Y with equal idempotents the lines (x,y,ι) and (x,y,D); with opposite
// idempotents the line (x,y,S).  The differential has monomial entries, and
// the bigraded homology is computed q-slice by q-slice over the field; a free
// summand surviving in homology (detected at G=1) raises FreeSummandError.

namespace detail {

struct MorLine {
  int x, y;     // generator indices in X, Y
  Kind t;       // Id, D, or S
  int q, h;
};

struct LineEntry {
  int line;     // target line index
  int k;        // extra G power
  Scalar c;
};

// Decompose a standard-basis element into line contributions (t, extra G).
inline void decompose_pure(const Pure& p, const Scalar& c,
                           std::vector<std::tuple<Kind, int, Scalar>>& outv) {
  switch (p.kind) {
    case Kind::Id: outv.emplace_back(Kind::Id, p.g, c); break;
    case Kind::D: outv.emplace_back(Kind::D, p.g, c); break;
    case Kind::S: outv.emplace_back(Kind::S, p.g, c); break;
    case Kind::SS:
      // SS = G^{g+1}·ι + G^g·D
      outv.emplace_back(Kind::Id, p.g + 1, c);
      outv.emplace_back(Kind::D, p.g, c);
      break;
  }
}

// Rank of a sparse matrix over the field (rows: maps col->coef).
inline long sparse_rank(std::vector<std::map<int, Scalar>> rows) {
  long rank = 0;
  std::unordered_map<int, int> pivot_row;  // col -> row index in `rows`
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& row = rows[i];
    while (!row.empty()) {
      int col = row.begin()->first;
      auto it = pivot_row.find(col);
      if (it == pivot_row.end()) break;
      // eliminate with stored pivot row
      Scalar factor = row.begin()->second / rows[it->second].begin()->second;
      for (auto& [c2, v2] : rows[it->second]) {
        auto jt = row.find(c2);
        Scalar delta = v2 * factor;
        if (jt == row.end()) {
          row.emplace(c2, -delta);
        } else {
          jt->second -= delta;
          if (jt->second.is_zero()) row.erase(jt);
        }
      }
    }
    if (!row.empty()) {
      pivot_row[row.begin()->first] = static_cast<int>(i);
      ++rank;
    }
  }
  return rank;
}

}  // namespace detail

inline BigradedDims mor_homology(const TypeD& X, const TypeD& Y) {
  if (X.field != Y.field) throw std::invalid_argument("field mismatch");
  Field f = X.field;
  using detail::MorLine;
  std::vector<MorLine> lines;
  std::map<std::tuple<int, int, Kind>, int> line_idx;
  for (int xi = 0; xi < static_cast<int>(X.gens.size()); ++xi)
    for (int yi = 0; yi < static_cast<int>(Y.gens.size()); ++yi) {
      const Gen& x = X.gens[xi];
      const Gen& y = Y.gens[yi];
      int dq = y.q - x.q, dh = y.h - x.h;
      if (x.idem == y.idem) {
        line_idx[{xi, yi, Kind::Id}] = static_cast<int>(lines.size());
        lines.push_back(MorLine{xi, yi, Kind::Id, dq, dh});
        line_idx[{xi, yi, Kind::D}] = static_cast<int>(lines.size());
        lines.push_back(MorLine{xi, yi, Kind::D, dq - 2, dh});
      } else {
        line_idx[{xi, yi, Kind::S}] = static_cast<int>(lines.size());
        lines.push_back(MorLine{xi, yi, Kind::S, dq - 1, dh});
      }
    }
  if (lines.empty()) return {};

  auto base_elt = [&](const MorLine& L) {
    Kind k = L.t;
    Idem src = X.gens[L.x].idem;
    return Pure{k, src, 0};
  };

  // differential on lines
  std::unordered_map<std::string, int> xidx, yidx;
  for (int i = 0; i < static_cast<int>(X.gens.size()); ++i)
    xidx[X.gens[i].id] = i;
  for (int i = 0; i < static_cast<int>(Y.gens.size()); ++i)
    yidx[Y.gens[i].id] = i;

  std::vector<std::vector<detail::LineEntry>> dmat(lines.size());
  std::vector<std::tuple<Kind, int, Scalar>> decomp;
  for (int li = 0; li < static_cast<int>(lines.size()); ++li) {
    const MorLine& L = lines[li];
    Pure t = base_elt(L);
    AlgElt t_elt = AlgElt::make(f, t);
    // δ_Y ∘ f : edges y -> y'
    for (auto& [key, b] : Y.diff) {
      if (yidx.at(key.first) != L.y) continue;
      int yprime = yidx.at(key.second);
      AlgElt prod = multiply(b, t_elt);
      for (auto& [p, c] : prod.terms) {
        decomp.clear();
        detail::decompose_pure(p, c, decomp);
        for (auto& [tk, k, cc] : decomp) {
          auto it = line_idx.find({L.x, yprime, tk});
          if (it == line_idx.end()) continue;
          dmat[li].push_back(detail::LineEntry{it->second, k, cc});
        }
      }
    }
    // -(-1)^{|f|} f ∘ δ_X : edges x' -> x
    int sgn = (L.h % 2 + 2) % 2 == 0 ? -1 : 1;  // -(-1)^h
    for (auto& [key, a] : X.diff) {
      if (xidx.at(key.second) != L.x) continue;
      int xprime = xidx.at(key.first);
      AlgElt prod = multiply(t_elt, a);
      for (auto& [p, c] : prod.terms) {
        decomp.clear();
        detail::decompose_pure(p, c, decomp);
        for (auto& [tk, k, cc] : decomp) {
          auto it = line_idx.find({xprime, L.y, tk});
          if (it == line_idx.end()) continue;
          Scalar s = sgn < 0 ? -cc : cc;
          dmat[li].push_back(detail::LineEntry{it->second, k, s});
        }
      }
    }
  }

  // ---- free-summand detection: homology of the G=1 specialization --------
  {
    std::map<int, std::vector<int>> by_h;
    for (int i = 0; i < static_cast<int>(lines.size()); ++i)
      by_h[lines[i].h].push_back(i);
    std::map<int, long> ranks;  // h -> rank of d_h (from h to h+1)
    std::map<int, long> dims;
    std::unordered_map<int, int> col_of;
    for (auto& [h, ls] : by_h) dims[h] = static_cast<long>(ls.size());
    for (auto& [h, ls] : by_h) {
      col_of.clear();
      auto jt = by_h.find(h + 1);
      if (jt == by_h.end()) { ranks[h] = 0; continue; }
      for (int i = 0; i < static_cast<int>(jt->second.size()); ++i)
        col_of[jt->second[i]] = i;
      std::vector<std::map<int, Scalar>> rows;
      for (int li : ls) {
        std::map<int, Scalar> row;
        for (auto& e : dmat[li]) {
          auto ct = col_of.find(e.line);
          if (ct == col_of.end()) continue;
          auto rt = row.find(ct->second);
          if (rt == row.end()) row.emplace(ct->second, e.c);
          else {
            rt->second += e.c;
            if (rt->second.is_zero()) row.erase(rt);
          }
        }
        if (!row.empty()) rows.push_back(std::move(row));
      }
      ranks[h] = detail::sparse_rank(std::move(rows));
    }
    for (auto& [h, d] : dims) {
      long rin = ranks.count(h - 1) ? ranks[h - 1] : 0;
      long rout = ranks.count(h) ? ranks[h] : 0;
      if (d - rin - rout != 0)
        throw FreeSummandError(
            "morphism-space homology has a free k[G] summand at h=" +
            std::to_string(h));
    }
  }

  // ---- q-slice homology ----------------------------------------------------
  BigradedDims result;
  int qmin = lines[0].q, qmax = lines[0].q;
  for (auto& L : lines) { qmin = std::min(qmin, L.q); qmax = std::max(qmax, L.q); }
  for (int Q = qmin; Q <= qmax; ++Q) {
    // elements (line, n) with q(line) - 2n == Q, n >= 0
    std::map<int, std::vector<std::pair<int, int>>> elems_by_h;  // h -> (line,n)
    for (int i = 0; i < static_cast<int>(lines.size()); ++i) {
      int d = lines[i].q - Q;
      if (d < 0 || d % 2 != 0) continue;
      elems_by_h[lines[i].h].emplace_back(i, d / 2);
    }
    if (elems_by_h.empty()) continue;
    std::map<int, long> ranks, dims;
    for (auto& [h, es] : dims) (void)h;
    for (auto& [h, es] : elems_by_h) dims[h] = static_cast<long>(es.size());
    std::map<std::pair<int, int>, int> col_of;
    for (auto& [h, es] : elems_by_h) {
      auto jt = elems_by_h.find(h + 1);
      if (jt == elems_by_h.end()) { ranks[h] = 0; continue; }
      col_of.clear();
      for (int i = 0; i < static_cast<int>(jt->second.size()); ++i)
        col_of[jt->second[i]] = i;
      std::vector<std::map<int, Scalar>> rows;
      for (auto& [li, nn] : es) {
        std::map<int, Scalar> row;
        for (auto& e : dmat[li]) {
          auto ct = col_of.find({e.line, nn + e.k});
          if (ct == col_of.end()) continue;
          auto rt = row.find(ct->second);
          if (rt == row.end()) row.emplace(ct->second, e.c);
          else {
            rt->second += e.c;
            if (rt->second.is_zero()) row.erase(rt);
          }
        }
        if (!row.empty()) rows.push_back(std::move(row));
      }
      ranks[h] = detail::sparse_rank(std::move(rows));
    }
    for (auto& [h, d] : dims) {
      long rin = ranks.count(h - 1) ? ranks[h - 1] : 0;
      long rout = ranks.count(h) ? ranks[h] : 0;
      long dim = d - rin - rout;
      if (dim > 0) result[{Q, h}] = dim;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Central-element action and nullhomotopy

inline bool is_central(const AlgElt& z) {
  Field f = z.field;
  std::vector<AlgElt> gens;
  gens.push_back(AlgElt::make(f, Pure{Kind::D, Idem::B, 0}));
  gens.push_back(AlgElt::make(f, Pure{Kind::D, Idem::W, 0}));
  gens.push_back(AlgElt::make(f, Pure{Kind::S, Idem::B, 0}));
  gens.push_back(AlgElt::make(f, Pure{Kind::S, Idem::W, 0}));
  for (auto& a : gens)
    if (multiply(z, a) != multiply(a, z)) return false;
  return true;
}

inline Morphism scalar_action(const TypeD& X, const AlgElt& z) {
  if (!is_central(z)) throw std::invalid_argument("z is not central");
  if (!z.homogeneous()) throw std::invalid_argument("z is not homogeneous");
  Morphism m(X.field);
  for (auto& g : X.gens) {
    AlgElt act = multiply(z, AlgElt::idem(X.field, g.idem));
    m.add(g.id, g.id, act);
  }
  return m;
}

// Solve δh + hδ = z·1_X for h of bidegree (q(z), -1); returns nothing if the
// linear system is inconsistent.
inline std::optional<Morphism> nullhomotopy(const TypeD& X, const AlgElt& z) {
  if (!is_central(z)) throw std::invalid_argument("z is not central");
  if (z.is_zero()) return Morphism(X.field);
  if (!z.homogeneous()) throw std::invalid_argument("z is not homogeneous");
  Field f = X.field;
  int qz = z.qdeg();
  int n = static_cast<int>(X.gens.size());

  // unknowns: (x, y, pure p) with h(y)-h(x) = -1, q(y)-q(x)+q(p) = qz,
  // p idempotent-compatible.
  struct Unknown { int x, y; Pure p; };
  std::vector<Unknown> unknowns;
  std::map<std::tuple<int, int, Pure>, int> unknown_idx;
  auto add_unknown = [&](int x, int y, Pure p) {
    unknown_idx[{x, y, p}] = static_cast<int>(unknowns.size());
    unknowns.push_back(Unknown{x, y, p});
  };
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) {
      if (X.gens[y].h - X.gens[x].h != -1) continue;
      int need_q = qz - (X.gens[y].q - X.gens[x].q);  // q(p) = -need_q... see below
      // q(y)-q(x)+q(p) = qz  =>  q(p) = qz - q(y) + q(x)
      int qp = qz - X.gens[y].q + X.gens[x].q;
      Idem si = X.gens[x].idem, ti = X.gens[y].idem;
      (void)need_q;
      if (si == ti) {
        // ι: q=-2g... ι has q = -2g only for g=0; G^g ι is not a basis elt.
        if (qp == 0) add_unknown(x, y, Pure{Kind::Id, si, 0});
        if (qp <= -2 && (-qp) % 2 == 0) {
          int g = (-qp - 2) / 2;
          add_unknown(x, y, Pure{Kind::D, si, g});
          add_unknown(x, y, Pure{Kind::SS, si, g});
        }
      } else {
        if (qp <= -1 && (-qp) % 2 == 1)
          add_unknown(x, y, Pure{Kind::S, si, (-qp - 1) / 2});
      }
    }

  // equations: for pairs (x,y) with h(y)-h(x) == 0, per pure basis element:
  //   sum over w [ label(w->y)·h_{x,w} ] + sum over w [ h_{w,y}·label(x->w) ]
  //   - (x==y ? z·ι : 0) = 0
  std::unordered_map<std::string, int> idx;
  for (int i = 0; i < n; ++i) idx[X.gens[i].id] = i;
  std::map<std::tuple<int, int, Pure>, std::map<int, Scalar>> eqs;
  std::map<std::tuple<int, int, Pure>, Scalar> rhs;
  auto add_coeff = [&](int x, int y, const Pure& p, int var, Scalar c) {
    auto& row = eqs[{x, y, p}];
    auto it = row.find(var);
    if (it == row.end()) row.emplace(var, c);
    else {
      it->second += c;
      if (it->second.is_zero()) row.erase(it);
    }
  };
  for (int ui = 0; ui < static_cast<int>(unknowns.size()); ++ui) {
    const Unknown& u = unknowns[ui];
    AlgElt up = AlgElt::make(f, u.p);
    // δ∘h: edges u.y -> w
    for (auto& [key, b] : X.diff) {
      if (idx.at(key.first) != u.y) continue;
      int w = idx.at(key.second);
      AlgElt prod = multiply(b, up);
      for (auto& [p2, c2] : prod.terms) add_coeff(u.x, w, p2, ui, c2);
    }
    // h∘δ: edges w -> u.x
    for (auto& [key, a] : X.diff) {
      if (idx.at(key.second) != u.x) continue;
      int w = idx.at(key.first);
      AlgElt prod = multiply(up, a);
      for (auto& [p2, c2] : prod.terms) add_coeff(w, u.y, p2, ui, c2);
    }
  }
  for (int x = 0; x < n; ++x) {
    AlgElt act = multiply(z, AlgElt::idem(f, X.gens[x].idem));
    for (auto& [p, c] : act.terms) {
      rhs[{x, x, p}] = c;
      eqs.try_emplace({x, x, p});
    }
  }

  // Gaussian elimination on (eqs | rhs)
  std::vector<std::map<int, Scalar>> rows;
  std::vector<Scalar> bvec;
  for (auto& [k, row] : eqs) {
    auto rt = rhs.find(k);
    Scalar b = rt == rhs.end() ? Scalar::zero(f) : rt->second;
    if (row.empty() && b.is_zero()) continue;
    rows.push_back(row);
    bvec.push_back(b);
  }
  std::unordered_map<int, int> pivot_of;  // var -> row
  std::vector<int> pivot_var(rows.size(), -1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& row = rows[i];
    while (!row.empty()) {
      int col = row.begin()->first;
      auto it = pivot_of.find(col);
      if (it == pivot_of.end()) break;
      int pr = it->second;
      Scalar factor = row.begin()->second / rows[pr].begin()->second;
      bvec[i] -= bvec[pr] * factor;
      for (auto& [c2, v2] : rows[pr]) {
        auto jt = row.find(c2);
        Scalar delta = v2 * factor;
        if (jt == row.end()) row.emplace(c2, -delta);
        else {
          jt->second -= delta;
          if (jt->second.is_zero()) row.erase(jt);
        }
      }
    }
    if (row.empty()) {
      if (!bvec[i].is_zero()) return std::nullopt;  // inconsistent
    } else {
      pivot_of[row.begin()->first] = static_cast<int>(i);
      pivot_var[i] = row.begin()->first;
    }
  }
  // back-substitute with free variables = 0
  std::vector<Scalar> sol(unknowns.size(), Scalar::zero(f));
  // process pivots in decreasing column order
  std::vector<std::pair<int, int>> piv;  // (col, row)
  for (auto& [col, row] : pivot_of) piv.emplace_back(col, row);
  std::sort(piv.rbegin(), piv.rend());
  for (auto& [col, ri] : piv) {
    Scalar v = bvec[ri];
    bool first = true;
    for (auto& [c2, a2] : rows[ri]) {
      if (first) { first = false; continue; }  // pivot itself
      v -= a2 * sol[c2];
    }
    sol[col] = v / rows[ri].begin()->second;
  }
  Morphism h(f);
  for (std::size_t i = 0; i < unknowns.size(); ++i) {
    if (sol[i].is_zero()) continue;
    h.add(X.gens[unknowns[i].x].id, X.gens[unknowns[i].y].id,
          AlgElt::make(f, unknowns[i].p, sol[i]));
  }
  // verify
  {
    Morphism check(f);
    for (auto& [key, b] : X.diff)
      for (auto& [hk, hv] : h.entries)
        if (hk.second == key.first)
          check.add(hk.first, key.second, multiply(b, hv));
    for (auto& [hk, hv] : h.entries)
      for (auto& [key, a] : X.diff)
        if (key.second == hk.first) check.add(key.first, hk.second,
                                              multiply(hv, a));
    for (auto& g : X.gens)
      check.add(g.id, g.id, -multiply(z, AlgElt::idem(f, g.idem)));
    if (!check.entries.empty()) return std::nullopt;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Homotopy equivalence via reduced representatives

namespace detail {

inline std::string normalized_label_string(const AlgElt& a) {
  // label up to an overall scalar: divide by the first coefficient
  if (a.terms.empty()) return "0";
  Scalar lead = a.terms.begin()->second;
  AlgElt norm = a.scaled(lead.inv());
  return norm.to_string();
}

struct IsoSearch {
  const TypeD& A;
  const TypeD& B;
  std::vector<std::vector<int>> a_out, a_in, b_out, b_in;
  std::map<std::pair<int, int>, const AlgElt*> a_lbl, b_lbl;
  std::vector<int> image;       // a-index -> b-index or -1
  std::vector<char> used;
  long budget = 2000000;

  IsoSearch(const TypeD& a, const TypeD& b) : A(a), B(b) {}

  bool labels_proportional(const AlgElt* x, const AlgElt* y) {
    if ((x == nullptr) != (y == nullptr)) return false;
    if (x == nullptr) return true;
    if (x->terms.size() != y->terms.size()) return false;
    return normalized_label_string(*x) == normalized_label_string(*y);
  }

  bool compatible(int ai, int bi) {
    const Gen& ga = A.gens[ai];
    const Gen& gb = B.gens[bi];
    if (ga.idem != gb.idem || ga.q != gb.q || ga.h != gb.h) return false;
    // check edges to already-mapped generators
    for (int aj = 0; aj < static_cast<int>(image.size()); ++aj) {
      if (image[aj] < 0 || aj == ai) continue;
      auto la = a_lbl.find({ai, aj});
      auto lb = b_lbl.find({bi, image[aj]});
      const AlgElt* pa = la == a_lbl.end() ? nullptr : la->second;
      const AlgElt* pb = lb == b_lbl.end() ? nullptr : lb->second;
      if (!labels_proportional(pa, pb)) return false;
      la = a_lbl.find({aj, ai});
      lb = b_lbl.find({image[aj], bi});
      pa = la == a_lbl.end() ? nullptr : la->second;
      pb = lb == b_lbl.end() ? nullptr : lb->second;
      if (!labels_proportional(pa, pb)) return false;
    }
    return true;
  }

  bool search(std::size_t pos, const std::vector<int>& order) {
    if (--budget < 0) throw std::runtime_error("homotopy_equivalent budget");
    if (pos == order.size()) return scalars_consistent();
    int ai = order[pos];
    for (int bi = 0; bi < static_cast<int>(B.gens.size()); ++bi) {
      if (used[bi]) continue;
      if (!compatible(ai, bi)) continue;
      image[ai] = bi;
      used[bi] = 1;
      if (search(pos + 1, order)) return true;
      image[ai] = -1;
      used[bi] = 0;
    }
    return false;
  }

  // Check existence of scalars c with c_y·label_A(x,y) = c_x·label_B(πx,πy).
  bool scalars_consistent() {
    int n = static_cast<int>(A.gens.size());
    Field f = A.field;
    std::vector<Scalar> c(n, Scalar::zero(f));
    std::vector<char> has(n, 0);
    for (int start = 0; start < n; ++start) {
      if (has[start]) continue;
      c[start] = Scalar::one(f);
      has[start] = 1;
      std::vector<int> stack{start};
      while (!stack.empty()) {
        int x = stack.back();
        stack.pop_back();
        for (int y = 0; y < n; ++y) {
          // ratio from edge x->y and y->x
          for (int dir = 0; dir < 2; ++dir) {
            int s = dir == 0 ? x : y, t = dir == 0 ? y : x;
            auto la = a_lbl.find({s, t});
            if (la == a_lbl.end()) continue;
            auto lb = b_lbl.find({image[s], image[t]});
            if (lb == b_lbl.end()) return false;
            // c_t · A = c_s · B  =>  c_t = c_s · (lead B / lead A)
            Scalar ratio = lb->second->terms.begin()->second /
                           la->second->terms.begin()->second;
            // also require full proportionality with that exact ratio
            if (lb->second->terms != la->second->scaled(ratio).terms)
              return false;
            if (!has[t] && has[s]) {
              c[t] = c[s] * ratio;
              has[t] = 1;
              stack.push_back(t);
            } else if (has[t] && !has[s]) {
              c[s] = c[t] / ratio;
              has[s] = 1;
              stack.push_back(s);
            } else if (has[t] && has[s]) {
              if (c[t] != c[s] * ratio) return false;
            }
          }
        }
      }
    }
    return true;
  }
};

}  // namespace detail

inline bool homotopy_equivalent(const TypeD& Xin, const TypeD& Yin,
                                long budget = 2000000) {
  TypeD X = loop_normalize(reduce(Xin));
  TypeD Y = loop_normalize(reduce(Yin));
  if (X.gens.size() != Y.gens.size()) return false;
  auto sig = [](const TypeD& Z) {
    std::multiset<std::tuple<int, int, int>> s;
    for (auto& g : Z.gens)
      s.insert({static_cast<int>(g.idem), g.q, g.h});
    return s;
  };
  if (sig(X) != sig(Y)) return false;
  detail::IsoSearch srch(X, Y);
  int n = static_cast<int>(X.gens.size());
  srch.image.assign(n, -1);
  srch.used.assign(n, 0);
  srch.budget = budget;
  std::unordered_map<std::string, int> xi, yi;
  for (int i = 0; i < n; ++i) xi[X.gens[i].id] = i;
  for (int i = 0; i < n; ++i) yi[Y.gens[i].id] = i;
  for (auto& [k, v] : X.diff) srch.a_lbl[{xi[k.first], xi[k.second]}] = &v;
  for (auto& [k, v] : Y.diff) srch.b_lbl[{yi[k.first], yi[k.second]}] = &v;
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  // order generators to keep the search connected where possible
  return srch.search(0, order);
}

}  // namespace bnt
