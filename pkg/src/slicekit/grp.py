"""Finite groups as multiplication tables, subgroup lattices and orbits.

A group element is just its index into the multiplication table.  Subgroups
are frozensets of element indices; conjugacy classes of subgroups get
canonical representatives (lexicographically least sorted element tuple) and
everything downstream -- orbits, equivariant maps, products, marks -- is
indexed by those class representatives.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass


class FiniteGroup:
    __slots__ = ("order", "mul", "name", "inv", "identity")

    def __init__(self, order, mul, name="G"):
        self.order = order
        self.mul = [list(map(int, row)) for row in mul]
        self.name = name
        self.identity = 0
        self.inv = [None] * order
        for g in range(order):
            for h in range(order):
                if self.mul[g][h] == 0 and self.mul[h][g] == 0:
                    self.inv[g] = h
                    break
            if self.inv[g] is None:
                raise ValueError("element %d has no inverse" % g)

    def validate(self):
        """Exhaustive associativity / identity / inverse check."""
        n = self.order
        errs = []
        if len(self.mul) != n or any(len(r) != n for r in self.mul):
            return [("shape",)]
        for g in range(n):
            if self.mul[0][g] != g or self.mul[g][0] != g:
                errs.append(("identity", g))
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    if self.mul[self.mul[a][b]][c] != self.mul[a][self.mul[b][c]]:
                        errs.append(("associativity", a, b, c))
        return errs

    def is_valid(self):
        return not self.validate()

    def conj(self, g, h):
        """h^-1 g h."""
        return self.mul[self.mul[self.inv[h]][g]][h]

    def conj_set(self, elems, h):
        return frozenset(self.conj(g, h) for g in elems)

    def closure(self, gens):
        """Subgroup generated by gens, as a frozenset."""
        seen = {0}
        frontier = [0]
        gens = [g for g in gens]
        while frontier:
            x = frontier.pop()
            for g in gens:
                for y in (self.mul[x][g], self.mul[g][x]):
                    if y not in seen:
                        seen.add(y)
                        frontier.append(y)
        return frozenset(seen)

    def is_abelian(self):
        return all(self.mul[a][b] == self.mul[b][a]
                   for a in range(self.order) for b in range(self.order))

    def element_order(self, g):
        k, x = 1, g
        while x != 0:
            x = self.mul[x][g]
            k += 1
        return k

    def __repr__(self):
        return "FiniteGroup(%s, order %d)" % (self.name, self.order)


def cyclic_group(n, name=None):
    if n < 1:
        raise ValueError("n must be positive")
    mul = [[(i + j) % n for j in range(n)] for i in range(n)]
    return FiniteGroup(n, mul, name or "C%d" % n)


def dihedral_group(n, name=None):
    """Order 2n with r^n = s^2 = 1 and s r s = r^-1; index k + n*eps = r^k s^eps."""
    if n < 1:
        raise ValueError("n must be positive")

    def enc(k, e):
        return k % n + n * (e % 2)

    def dec(i):
        return i % n, i // n

    mul = [[0] * (2 * n) for _ in range(2 * n)]
    for i in range(2 * n):
        a, al = dec(i)
        for j in range(2 * n):
            b, be = dec(j)
            # (r^a s^al)(r^b s^be) = r^(a + b*(-1)^al) s^(al+be)
            k = (a + (b if al == 0 else -b)) % n
            mul[i][j] = enc(k, al + be)
    return FiniteGroup(2 * n, mul, name or "D%d" % n)


def group_from_table(name, order, mul):
    g = FiniteGroup(order, mul, name)
    errs = g.validate()
    if errs:
        raise ValueError("invalid multiplication table: %r" % (errs[:3],))
    return g


def subgroup_from_elements(group, elems):
    s = frozenset(elems)
    if 0 not in s:
        raise ValueError("subgroup must contain the identity")
    for a in s:
        for b in s:
            if group.mul[a][b] not in s:
                raise ValueError("not closed under multiplication")
    return s


@dataclass(frozen=True)
class GMap:
    """Equivariant map orbit(src_class) -> orbit(dst_class), x*H |-> x*g*K.

    `coset` is the canonical (least) representative of the coset g*K; the
    conjugation condition g^-1 H g <= K always holds for stored maps.
    """
    src: int
    dst: int
    coset: int


class SubgroupLattice:
    """All subgroups of a finite group, organized by conjugacy class."""

    def __init__(self, group: FiniteGroup):
        self.group = group
        self.subgroups = self._enumerate_subgroups()
        self._build_classes()
        self._build_cosets()
        self._build_weyl()
        self._hom_cache = {}
        self._fixed_cache = {}

    # -- enumeration ------------------------------------------------------

    def _enumerate_subgroups(self):
        G = self.group
        found = {frozenset([0])}
        frontier = [frozenset([0])]
        closure_memo = {}
        while frontier:
            H = frontier.pop()
            for g in range(1, G.order):
                if g in H:
                    continue
                key = (H, g)
                K = closure_memo.get(key)
                if K is None:
                    K = G.closure(list(H) + [g])
                    closure_memo[key] = K
                if K not in found:
                    found.add(K)
                    frontier.append(K)
        return sorted(found, key=lambda s: (len(s), tuple(sorted(s))))

    def _build_classes(self):
        G = self.group
        class_of = {}
        classes = []
        members = []
        for H in self.subgroups:
            if H in class_of:
                continue
            orbit = {G.conj_set(H, g) for g in range(G.order)}
            rep = min(orbit, key=lambda s: tuple(sorted(s)))
            idx = len(classes)
            classes.append(rep)
            members.append(sorted(orbit, key=lambda s: tuple(sorted(s))))
            for K in orbit:
                class_of[K] = idx
        order = sorted(range(len(classes)), key=lambda i: (len(classes[i]), tuple(sorted(classes[i]))))
        remap = {old: new for new, old in enumerate(order)}
        self.classes = [classes[i] for i in order]
        self.class_members = [members[i] for i in order]
        self.class_of = {H: remap[i] for H, i in class_of.items()}
        self.nclasses = len(self.classes)

    def rep(self, c):
        return self.classes[c]

    def class_index(self, elems):
        return self.class_of[frozenset(elems)]

    def subconjugate(self, a, b):
        """Is some conjugate of rep(a) contained in rep(b)?"""
        H, K = self.classes[a], self.classes[b]
        if len(H) > len(K):
            return False
        G = self.group
        return any(G.conj_set(H, g) <= K for g in range(G.order))

    def strictly_subconjugate(self, a, b):
        return a != b and self.subconjugate(a, b)

    # -- cosets and orbits --------------------------------------------------

    def _build_cosets(self):
        G = self.group
        self.cosets = []        # per class: sorted list of coset keys (min elt)
        self.coset_of = []      # per class: element -> coset index
        self.coset_act = []     # per class: [g][ci] -> index of g * coset
        for c in range(self.nclasses):
            K = self.classes[c]
            coset_of = [None] * G.order
            keys = []
            for g in range(G.order):
                if coset_of[g] is not None:
                    continue
                members = sorted(G.mul[g][k] for k in K)
                key = members[0]
                idx = len(keys)
                keys.append(key)
                for m in members:
                    coset_of[m] = idx
            order = sorted(range(len(keys)), key=lambda i: keys[i])
            remap = {old: new for new, old in enumerate(order)}
            keys = [keys[i] for i in order]
            coset_of = [remap[ci] for ci in coset_of]
            act = [[coset_of[G.mul[g][keys[ci]]] for ci in range(len(keys))]
                   for g in range(G.order)]
            self.cosets.append(keys)
            self.coset_of.append(coset_of)
            self.coset_act.append(act)

    def orbit_size(self, c):
        return len(self.cosets[c])

    def coset_key(self, c, g):
        """Canonical representative of the coset g*rep(c)."""
        return self.cosets[c][self.coset_of[c][g]]

    # -- Weyl groups --------------------------------------------------------

    def _build_weyl(self):
        G = self.group
        self.normalizer = []
        self.weyl = []
        self.weyl_reps = []
        self.weyl_of = []  # per class: dict normalizer element -> weyl index
        for c in range(self.nclasses):
            H = self.classes[c]
            N = [g for g in range(G.order) if G.conj_set(H, g) == H]
            coset_of = {}
            reps = []
            for g in N:
                members = sorted(G.mul[g][h] for h in H)
                key = members[0]
                if key not in coset_of:
                    coset_of[key] = None
            keys = sorted(coset_of)
            for i, k in enumerate(keys):
                coset_of[k] = i
                reps.append(k)
            w_of = {}
            for g in N:
                key = min(G.mul[g][h] for h in H)
                w_of[g] = coset_of[key]
            m = len(reps)
            mul = [[w_of[G.mul[reps[i]][reps[j]]] for j in range(m)] for i in range(m)]
            W = FiniteGroup(m, mul, name="W(%s;%d)" % (G.name, c))
            self.normalizer.append(N)
            self.weyl.append(W)
            self.weyl_reps.append(reps)
            self.weyl_of.append(w_of)

    # -- orbit category -----------------------------------------------------

    def hom_orbits(self, a, b):
        """All G-maps orbit(a) -> orbit(b): cosets gK with g^-1 H g <= K."""
        key = (a, b)
        if key in self._hom_cache:
            return self._hom_cache[key]
        G = self.group
        H, K = self.classes[a], self.classes[b]
        seen = set()
        out = []
        for g in range(G.order):
            ginv = G.inv[g]
            if all(G.mul[G.mul[ginv][h]][g] in K for h in H):
                ck = self.coset_key(b, g)
                if ck not in seen:
                    seen.add(ck)
                    out.append(GMap(a, b, ck))
        out.sort(key=lambda m: m.coset)
        self._hom_cache[key] = out
        return out

    def compose_gmaps(self, f: GMap, g: GMap) -> GMap:
        """g after f (f: A->B, g: B->C)."""
        if f.dst != g.src:
            raise ValueError("maps not composable")
        prod = self.group.mul[f.coset][g.coset]
        return GMap(f.src, g.dst, self.coset_key(g.dst, prod))

    def identity_gmap(self, c):
        return GMap(c, c, self.coset_key(c, 0))

    def gmap_valid(self, m: GMap) -> bool:
        G = self.group
        H, K = self.classes[m.src], self.classes[m.dst]
        g = m.coset
        ginv = G.inv[g]
        return all(G.mul[G.mul[ginv][h]][g] in K for h in H)

    def gmap_point_image(self, m: GMap, ci):
        """Image of the coset with index ci under the map orbit(src)->orbit(dst)."""
        x = self.cosets[m.src][ci]
        return self.coset_of[m.dst][self.group.mul[x][m.coset]]

    def fixed_cosets(self, c, h_class):
        """Indices of cosets of orbit(c) fixed by rep(h_class)."""
        key = (c, h_class)
        if key in self._fixed_cache:
            return self._fixed_cache[key]
        H = self.classes[h_class]
        act = self.coset_act[c]
        out = [ci for ci in range(len(self.cosets[c]))
               if all(act[h][ci] == ci for h in H)]
        self._fixed_cache[key] = out
        return out

    def table_of_marks(self):
        """marks[h][k] = number of rep(h)-fixed points of orbit(k)."""
        n = self.nclasses
        return [[len(self.fixed_cosets(k, h)) for k in range(n)] for h in range(n)]

    # -- conjugator dictionary ---------------------------------------------

    def conjugator_to_rep(self, elems):
        """u with u * S * u^-1 = rep(class(S)), i.e. rep = {u s u^-1}."""
        S = frozenset(elems)
        c = self.class_of[S]
        R = self.classes[c]
        G = self.group
        for u in range(G.order):
            if frozenset(G.mul[G.mul[u][s]][G.inv[u]] for s in S) == R:
                return c, u
        raise AssertionError("conjugator not found")


# -- concrete G-sets --------------------------------------------------------


@dataclass(frozen=True)
class Orbit:
    stabilizer_class: int


class GSet:
    """A finite G-set presented as a multiset of orbits (class indices)."""

    __slots__ = ("lattice", "components")

    def __init__(self, lattice, components):
        self.lattice = lattice
        self.components = list(components)

    def size(self):
        return sum(self.lattice.orbit_size(c) for c in self.components)

    def key(self):
        return tuple(self.components)

    def __eq__(self, other):
        return isinstance(other, GSet) and self.components == other.components

    def __hash__(self):
        return hash(tuple(self.components))

    def __repr__(self):
        return "GSet(%r)" % (self.components,)


class ConcreteGSet:
    """Points with an explicit action table; used for orbit decompositions."""

    def __init__(self, lattice, npoints, act):
        self.lattice = lattice
        self.n = npoints
        self.act = act  # act[g][p]

    @staticmethod
    def of_orbit(lattice, c):
        return ConcreteGSet(lattice, lattice.orbit_size(c), lattice.coset_act[c])

    @staticmethod
    def of_gset(lattice, gset: GSet):
        offsets = []
        total = 0
        for c in gset.components:
            offsets.append(total)
            total += lattice.orbit_size(c)
        G = lattice.group
        act = [[0] * total for _ in range(G.order)]
        for ci, c in enumerate(gset.components):
            off = offsets[ci]
            for g in range(G.order):
                row = lattice.coset_act[c][g]
                for p in range(lattice.orbit_size(c)):
                    act[g][off + p] = off + row[p]
        cg = ConcreteGSet(lattice, total, act)
        cg.offsets = offsets
        return cg

    def stabilizer(self, p):
        return frozenset(g for g in range(self.lattice.group.order) if self.act[g][p] == p)

    def orbit_of(self, p):
        return sorted({self.act[g][p] for g in range(self.lattice.group.order)})

    def decompose(self):
        """Orbit decomposition with charts.

        Returns a list of (class_index, chart) where chart[ci] is the point
        corresponding to coset ci of the canonical representative orbit.
        """
        lat = self.lattice
        G = lat.group
        seen = [False] * self.n
        out = []
        for p in range(self.n):
            if seen[p]:
                continue
            orb = self.orbit_of(p)
            for q in orb:
                seen[q] = True
            S = self.stabilizer(p)
            c = lat.class_of[S]
            R = lat.classes[c]
            # find u with stab(u . p) = R, i.e. u S u^-1 = R
            base = None
            for u in range(G.order):
                if frozenset(G.mul[G.mul[u][s]][G.inv[u]] for s in S) == R:
                    base = self.act[u][p]
                    break
            chart = [None] * lat.orbit_size(c)
            for ci, key in enumerate(lat.cosets[c]):
                chart[ci] = self.act[key][base]
            out.append((c, chart))
        return out


def product_points(lattice, a, b):
    """Concrete G-set on orbit(a) x orbit(b) with point index pa * nb + pb."""
    na, nb = lattice.orbit_size(a), lattice.orbit_size(b)
    G = lattice.group
    act = []
    for g in range(G.order):
        ra, rb = lattice.coset_act[a][g], lattice.coset_act[b][g]
        row = [0] * (na * nb)
        for pa in range(na):
            base = ra[pa] * nb
            for pb in range(nb):
                row[pa * nb + pb] = base + rb[pb]
        act.append(row)
    return ConcreteGSet(lattice, na * nb, act)


@dataclass
class ProductPiece:
    orbit_class: int
    proj_left: GMap
    proj_right: GMap
    chart: list  # coset index of rep orbit -> (pa, pb)


def product_decompose(lattice, a, b):
    """Orbit decomposition of orbit(a) x orbit(b) with the two projections."""
    na, nb = lattice.orbit_size(a), lattice.orbit_size(b)
    conc = product_points(lattice, a, b)
    pieces = []
    for c, chart in conc.decompose():
        base = chart[lattice.coset_of[c][0]]
        pa, pb = divmod(base, nb)
        # projections: orbit(c) -> orbit(a), g*L |-> g * (point pa)
        ga = lattice.cosets[a][pa]
        gb = lattice.cosets[b][pb]
        left = GMap(c, a, lattice.coset_key(a, ga))
        right = GMap(c, b, lattice.coset_key(b, gb))
        pieces.append(ProductPiece(c, left, right, [divmod(p, nb) for p in chart]))
    pieces.sort(key=lambda pc: (pc.orbit_class, pc.proj_left.coset, pc.proj_right.coset))
    return pieces


def gset_product_decompose(lattice, S: GSet, T: GSet):
    """Orbitwise product decomposition of two G-sets.

    Returns a list of (i, j, ProductPiece) for components i of S and j of T.
    """
    out = []
    for i, a in enumerate(S.components):
        for j, b in enumerate(T.components):
            for piece in product_decompose(lattice, a, b):
                out.append((i, j, piece))
    return out
