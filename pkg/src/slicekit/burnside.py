"""The effective Burnside category at the homotopy level.

Morphisms between finite G-sets are integer combinations of isomorphism
classes of spans S <- L -> T.  A span with orbit apex is stored in canonical
form (least leg pair under apex automorphisms); a general span decomposes as
the sum of its apex orbits, so ``BurnsideElement`` is a formal sum over
canonical single-orbit spans.  Composition is by pullback, computed on
explicit coset points.
"""

from __future__ import annotations

from dataclasses import dataclass

from .grp import ConcreteGSet, GMap, GSet
from .zmod import IntMatrix


@dataclass(frozen=True)
class ApexOrbit:
    """One orbit G/L of a span apex with its two legs.

    left / right are (component index, coset) pairs: the leg maps
    orbit(L) -> component of the source / target G-set.
    """
    stab: int
    left: tuple
    right: tuple


@dataclass(frozen=True)
class Span:
    src: tuple   # GSet components
    dst: tuple
    apex: tuple  # sorted tuple of canonical ApexOrbits


def canonical_apex(lattice, src: GSet, dst: GSet, stab, left, right):
    """Minimize the leg pair of one apex orbit under apex automorphisms.

    An automorphism of orbit(L) is x*L |-> x*n*L for n in N(L); it turns the
    leg pair (a, b) into (n*a, n*b).  The canonical form takes the least
    ((comp_l, coset_l), (comp_r, coset_r)) over the Weyl group.
    """
    G = lattice.group
    (ci, a), (cj, b) = left, right
    best = None
    for n in lattice.weyl_reps[stab]:
        ka = lattice.coset_key(src.components[ci], G.mul[n][a])
        kb = lattice.coset_key(dst.components[cj], G.mul[n][b])
        cand = ((ci, ka), (cj, kb))
        if best is None or cand < best:
            best = cand
    return ApexOrbit(stab, best[0], best[1])


def _leg_valid(lattice, stab, comp_class, coset):
    return lattice.gmap_valid(GMap(stab, comp_class, coset))


def span_canonicalize(lattice, src: GSet, dst: GSet, apex_data):
    """Canonical Span from raw apex data [(stab, (ci, coset), (cj, coset))].

    Rejects non-equivariant legs.  Apex orbits are individually minimized
    and sorted; a multi-orbit apex stays one Span (use
    BurnsideElement.from_span to decompose into the module basis).
    """
    orbits = []
    for stab, left, right in apex_data:
        (ci, a), (cj, b) = left, right
        a = lattice.coset_key(src.components[ci], a)
        b = lattice.coset_key(dst.components[cj], b)
        if not _leg_valid(lattice, stab, src.components[ci], a):
            raise ValueError("left leg is not equivariant")
        if not _leg_valid(lattice, stab, dst.components[cj], b):
            raise ValueError("right leg is not equivariant")
        orbits.append(canonical_apex(lattice, src, dst, stab, (ci, a), (cj, b)))
    orbits.sort(key=lambda o: (o.stab, o.left, o.right))
    return Span(src.key(), dst.key(), tuple(orbits))


class BurnsideElement:
    """Integer combination of canonical single-orbit spans S -> T."""

    __slots__ = ("lattice", "src", "dst", "terms")

    def __init__(self, lattice, src: GSet, dst: GSet, terms=None):
        self.lattice = lattice
        self.src = src
        self.dst = dst
        self.terms = dict(terms or {})
        self._prune()

    def _prune(self):
        for k in [k for k, v in self.terms.items() if v == 0]:
            del self.terms[k]

    @staticmethod
    def zero(lattice, src, dst):
        return BurnsideElement(lattice, src, dst, {})

    @staticmethod
    def from_span(lattice, span: Span, coeff=1):
        src = GSet(lattice, list(span.src))
        dst = GSet(lattice, list(span.dst))
        terms = {}
        for orb in span.apex:
            single = Span(span.src, span.dst, (orb,))
            terms[single] = terms.get(single, 0) + coeff
        return BurnsideElement(lattice, src, dst, terms)

    @staticmethod
    def from_apex_data(lattice, src, dst, apex_data, coeff=1):
        span = span_canonicalize(lattice, src, dst, apex_data)
        return BurnsideElement.from_span(lattice, span, coeff)

    def __add__(self, other):
        self._check_parallel(other)
        terms = dict(self.terms)
        for k, v in other.terms.items():
            terms[k] = terms.get(k, 0) + v
        return BurnsideElement(self.lattice, self.src, self.dst, terms)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, k):
        return BurnsideElement(self.lattice, self.src, self.dst,
                               {s: k * v for s, v in self.terms.items()})

    def __eq__(self, other):
        return (isinstance(other, BurnsideElement) and self.src == other.src
                and self.dst == other.dst and self.terms == other.terms)

    def __hash__(self):
        return hash((self.src.key(), self.dst.key(), tuple(sorted(self.terms.items(), key=repr))))

    def is_zero(self):
        return not self.terms

    def _check_parallel(self, other):
        if self.src != other.src or self.dst != other.dst:
            raise ValueError("Burnside elements are not parallel")

    def __repr__(self):
        return "BurnsideElement(%r)" % (self.terms,)


def identity_element(lattice, T: GSet):
    terms = {}
    for i, c in enumerate(T.components):
        key = lattice.coset_key(c, 0)
        span = Span(T.key(), T.key(), (ApexOrbit(c, (i, key), (i, key)),))
        terms[span] = terms.get(span, 0) + 1
    return BurnsideElement(lattice, T, T, terms)


def res_span(lattice, f: GMap):
    """The restriction-flavored span orbit(dst) <- orbit(src) = orbit(src)."""
    src = GSet(lattice, [f.dst])
    dst = GSet(lattice, [f.src])
    return BurnsideElement.from_apex_data(
        lattice, src, dst, [(f.src, (0, f.coset), (0, lattice.coset_key(f.src, 0)))])


def tr_span(lattice, f: GMap):
    """The transfer-flavored span orbit(src) = orbit(src) -> orbit(dst)."""
    src = GSet(lattice, [f.src])
    dst = GSet(lattice, [f.dst])
    return BurnsideElement.from_apex_data(
        lattice, src, dst, [(f.src, (0, lattice.coset_key(f.src, 0)), (0, f.coset))])


class _ConcreteSpanSide:
    """Concrete realization of a span's apex with point-level leg maps."""

    def __init__(self, lattice, span: Span):
        self.lattice = lattice
        comps = [o.stab for o in span.apex]
        self.gset = GSet(lattice, comps)
        self.conc = ConcreteGSet.of_gset(lattice, self.gset)
        self.left = [None] * self.conc.n
        self.right = [None] * self.conc.n
        for k, orb in enumerate(span.apex):
            off = self.conc.offsets[k]
            n = lattice.orbit_size(orb.stab)
            (ci, a), (cj, b) = orb.left, orb.right
            for p in range(n):
                x = lattice.cosets[orb.stab][p]
                # point x*L maps to x*a in source component ci, x*b in target cj
                self.left[off + p] = (ci, self.lattice.coset_of[span.src[ci]][lattice.group.mul[x][a]])
                self.right[off + p] = (cj, self.lattice.coset_of[span.dst[cj]][lattice.group.mul[x][b]])


def _compose_spans(lattice, f: Span, g: Span):
    """Pullback composition of two single- or multi-orbit spans.

    f: S -> T, g: T -> U; the result is the BurnsideElement of the span
    S <- (apex_f x_T apex_g) -> U.
    """
    G = lattice.group
    cf = _ConcreteSpanSide(lattice, f)
    cg = _ConcreteSpanSide(lattice, g)
    pairs = [(p, q) for p in range(cf.conc.n) for q in range(cg.conc.n)
             if cf.right[p] == cg.left[q]]
    if not pairs:
        return BurnsideElement.zero(lattice, GSet(lattice, list(f.src)), GSet(lattice, list(g.dst)))
    index = {pq: i for i, pq in enumerate(pairs)}
    act = []
    for e in range(G.order):
        fa, ga = cf.conc.act[e], cg.conc.act[e]
        act.append([index[(fa[p], ga[q])] for (p, q) in pairs])
    conc = ConcreteGSet(lattice, len(pairs), act)
    src = GSet(lattice, list(f.src))
    dst = GSet(lattice, list(g.dst))
    apex_data = []
    for c, chart in conc.decompose():
        base = chart[lattice.coset_of[c][0]]
        p, q = pairs[base]
        ci, pa = cf.left[p]
        cj, qb = cg.right[q]
        left = (ci, lattice.cosets[src.components[ci]][pa])
        right = (cj, lattice.cosets[dst.components[cj]][qb])
        apex_data.append((c, left, right))
    return BurnsideElement.from_apex_data(lattice, src, dst, apex_data)


def compose(f: BurnsideElement, g: BurnsideElement):
    """g after f by pullback: f in A(S,T), g in A(T,U) gives A(S,U)."""
    if f.dst != g.src:
        raise ValueError("middle objects do not match")
    lattice = f.lattice
    cache = getattr(lattice, "_span_compose_cache", None)
    if cache is None:
        cache = lattice._span_compose_cache = {}
    out = BurnsideElement.zero(lattice, f.src, g.dst)
    for sf, cf in f.terms.items():
        for sg, cg in g.terms.items():
            key = (sf, sg)
            res = cache.get(key)
            if res is None:
                res = cache[key] = _compose_spans(lattice, sf, sg)
            out = out + res.scale(cf * cg)
    return out


def hom_span_basis(lattice, src: GSet, dst: GSet):
    """Ordered basis of canonical single-orbit spans src -> dst."""
    seen = set()
    for d in range(lattice.nclasses):
        for i, a in enumerate(src.components):
            homs_l = lattice.hom_orbits(d, a)
            if not homs_l:
                continue
            for j, b in enumerate(dst.components):
                for ml in homs_l:
                    for mr in lattice.hom_orbits(d, b):
                        seen.add(span_canonicalize(
                            lattice, src, dst,
                            [(d, (i, ml.coset), (j, mr.coset))]))
    return sorted(seen, key=lambda s: (s.apex[0].stab, s.apex[0].left, s.apex[0].right))


def mark_matrix(x: BurnsideElement, h_class):
    """Fixed-point matrix Z{src^H} -> Z{dst^H} of a Burnside element.

    Entry (t, s) counts H-fixed apex points lying over source fixed point s
    and target fixed point t, weighted by coefficients.
    """
    lattice = x.lattice
    src_fix, src_index = _fixed_basis(lattice, x.src, h_class)
    dst_fix, dst_index = _fixed_basis(lattice, x.dst, h_class)
    m = [[0] * len(src_fix) for _ in range(len(dst_fix))]
    G = lattice.group
    for span, coeff in x.terms.items():
        for orb in span.apex:
            (ci, a), (cj, b) = orb.left, orb.right
            for p in lattice.fixed_cosets(orb.stab, h_class):
                xelt = lattice.cosets[orb.stab][p]
                s = (ci, lattice.coset_of[span.src[ci]][G.mul[xelt][a]])
                t = (cj, lattice.coset_of[span.dst[cj]][G.mul[xelt][b]])
                m[dst_index[t]][src_index[s]] += coeff
    return IntMatrix(m, len(dst_fix), len(src_fix))


def _fixed_basis(lattice, comps, h_class):
    basis = []
    for i, c in enumerate(comps.components if isinstance(comps, GSet) else list(comps)):
        for p in lattice.fixed_cosets(c, h_class):
            basis.append((i, p))
    return basis, {b: k for k, b in enumerate(basis)}


def fixed_basis(lattice, gset: GSet, h_class):
    """Ordered basis [(component, coset index)] of the H-fixed points."""
    return _fixed_basis(lattice, gset, h_class)[0]


def weyl_perm_on_fixed(lattice, gset: GSet, h_class, weyl_elt):
    """Permutation of the H-fixed basis induced by a Weyl group element."""
    n = lattice.weyl_reps[h_class][weyl_elt]
    basis, index = _fixed_basis(lattice, gset, h_class)
    out = []
    for (i, p) in basis:
        c = gset.components[i]
        q = lattice.coset_act[c][n][p]
        out.append(index[(i, q)])
    return out


# -- Burnside rings ----------------------------------------------------------


class BurnsideRing:
    """A(H) as spans pt <- L -> orbit(H), with product by fiber product.

    The basis is the set of canonical spans whose apex is a single orbit
    over orbit(h_class), i.e. isomorphism classes of transitive H-sets.
    """

    def __init__(self, lattice, h_class):
        self.lattice = lattice
        self.h_class = h_class
        self.orbit = GSet(lattice, [h_class])
        pt = GSet(lattice, [lattice.nclasses - 1])
        self.pt = pt
        self.basis = hom_span_basis(lattice, pt, self.orbit)
        self._basis_index = {sp: i for i, sp in enumerate(self.basis)}

    def rank(self):
        return len(self.basis)

    def element_vector(self, x: BurnsideElement):
        v = [0] * len(self.basis)
        for span, coeff in x.terms.items():
            v[self._basis_index[span]] += coeff
        return v

    def basis_element(self, i):
        return BurnsideElement.from_span(self.lattice, self.basis[i])

    def unit_vector(self):
        ident = span_canonicalize(
            self.lattice, self.pt, self.orbit,
            [(self.h_class, (0, self.lattice.coset_key(self.pt.components[0], 0)),
              (0, self.lattice.coset_key(self.h_class, 0)))])
        v = [0] * len(self.basis)
        v[self._basis_index[ident]] = 1
        return v

    def product_vector(self, i, j):
        """Basis product [L -> orbit] * [L' -> orbit] = [L x_orbit L']."""
        lat = self.lattice
        G = lat.group
        si, sj = self.basis[i], self.basis[j]
        ci = si.apex[0].stab
        cj = sj.apex[0].stab
        ai = si.apex[0].right[1]
        aj = sj.apex[0].right[1]
        ni, nj = lat.orbit_size(ci), lat.orbit_size(cj)
        # matched pairs (p, q) with p*ai and q*aj the same coset of orbit(H)
        pairs = []
        for p in range(ni):
            xp = lat.cosets[ci][p]
            tp = lat.coset_of[self.h_class][G.mul[xp][ai]]
            for q in range(nj):
                xq = lat.cosets[cj][q]
                if lat.coset_of[self.h_class][G.mul[xq][aj]] == tp:
                    pairs.append((p, q))
        if not pairs:
            return [0] * len(self.basis)
        index = {pq: k for k, pq in enumerate(pairs)}
        act = []
        for e in range(G.order):
            ra, rb = lat.coset_act[ci][e], lat.coset_act[cj][e]
            act.append([index[(ra[p], rb[q])] for (p, q) in pairs])
        conc = ConcreteGSet(lat, len(pairs), act)
        v = [0] * len(self.basis)
        for c, chart in conc.decompose():
            base = chart[lat.coset_of[c][0]]
            p, q = pairs[base]
            coset = G.mul[lat.cosets[ci][p]][ai]
            sp = span_canonicalize(
                lat, self.pt, self.orbit,
                [(c, (0, lat.coset_key(self.pt.components[0], 0)),
                  (0, lat.coset_key(self.h_class, coset)))])
            v[self._basis_index[sp]] += 1
        return v
