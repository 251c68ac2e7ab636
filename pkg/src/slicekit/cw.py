"""Cellular models of G-spectra with Burnside-element differentials.

A ``CellComplex`` is a finite collection of cells, each a dimension and an
orbit, with differentials given by matrices of Burnside elements satisfying
d o d = 0.  Geometric fixed points at a subgroup class produce an ordinary
integer chain complex of Weyl-permutation modules via the mark homomorphism;
homology is computed by Smith normal form.  "Wedge of spheres" is read off
as free homology concentrated in a single degree, which is faithful for
these complexes because all chain modules are free.
"""

from __future__ import annotations

import itertools

from .burnside import (BurnsideElement, compose, identity_element,
                       mark_matrix, span_canonicalize)
from .grp import (ConcreteGSet, GMap, GSet, SubgroupLattice, cyclic_group,
                  product_decompose)
from .mackey import subgroup_as_group
from .zmod import (FGAb, GModule, IntMatrix, LatticeSolver, ModuleMap,
                   column_lattice_basis, perm_matrix)


class Cell:
    __slots__ = ("dim", "orbit_class")

    def __init__(self, dim, orbit_class):
        self.dim = dim
        self.orbit_class = orbit_class

    def __repr__(self):
        return "Cell(dim=%d, class=%d)" % (self.dim, self.orbit_class)


class CellComplex:
    """Cells grouped by dimension; diff[(u, v)] is a BurnsideElement from the
    orbit of cell u (dimension d) to the orbit of cell v (dimension d-1)."""

    def __init__(self, lattice, cells, diff, name="X"):
        self.lattice = lattice
        self.cells = list(cells)
        self.diff = {k: v for k, v in diff.items() if not v.is_zero()}
        self.name = name

    def cells_of_dim(self, d):
        return [i for i, c in enumerate(self.cells) if c.dim == d]

    def dims(self):
        return sorted({c.dim for c in self.cells})

    def entry(self, u, v):
        x = self.diff.get((u, v))
        if x is None:
            lat = self.lattice
            x = BurnsideElement.zero(lat, GSet(lat, [self.cells[u].orbit_class]),
                                     GSet(lat, [self.cells[v].orbit_class]))
        return x

    def validate(self):
        """d o d = 0 in every Burnside module; returns witnesses."""
        errs = []
        for (u, v) in self.diff:
            if self.cells[u].dim != self.cells[v].dim + 1:
                errs.append(("dimension", u, v))
        if errs:
            return errs
        by_src = {}
        for (u, v), x in self.diff.items():
            by_src.setdefault(u, []).append((v, x))
        for u, outs in by_src.items():
            acc = {}
            for (v, x) in outs:
                for (w, y) in by_src.get(v, []):
                    z = compose(x, y)
                    if w in acc:
                        acc[w] = acc[w] + z
                    else:
                        acc[w] = z
            for w, z in acc.items():
                if not z.is_zero():
                    errs.append(("d2", u, w, z))
        return errs

    def is_valid(self):
        return not self.validate()

    def total_cells(self):
        return len(self.cells)

    def __repr__(self):
        return "CellComplex(%s, %d cells)" % (self.name, len(self.cells))


def single_cell_complex(lattice, dim, orbit_class, name="S"):
    return CellComplex(lattice, [Cell(dim, orbit_class)], {}, name)


def wedge(X: CellComplex, Y: CellComplex, name=None):
    cells = X.cells + Y.cells
    off = len(X.cells)
    diff = dict(X.diff)
    for (u, v), x in Y.diff.items():
        diff[(u + off, v + off)] = x
    return CellComplex(X.lattice, cells, diff, name or "%s v %s" % (X.name, Y.name))


def suspend(X: CellComplex, k, name=None):
    cells = [Cell(c.dim + k, c.orbit_class) for c in X.cells]
    return CellComplex(X.lattice, cells, dict(X.diff), name or "S^%d %s" % (k, X.name))


# -- geometric fixed points ---------------------------------------------------


class PhiComplex:
    """Integer chain complex of Weyl-permutation modules at one subgroup."""

    def __init__(self, lattice, h_class, basis, diffs, weyl_perms):
        self.lattice = lattice
        self.h_class = h_class
        self.basis = basis          # degree -> list of (cell index, fixed coset)
        self.diffs = diffs          # degree -> IntMatrix degree -> degree-1
        self.weyl_perms = weyl_perms  # degree -> per weyl element, permutation

    def degrees(self):
        return sorted(self.basis)

    def rank(self, d):
        return len(self.basis.get(d, []))

    def validate(self):
        errs = []
        for d, m in self.diffs.items():
            lower = self.diffs.get(d - 1)
            if lower is not None and m.cols and lower.rows:
                if not (lower @ m).is_zero():
                    errs.append(("d2", d))
        return errs


def geometric_complex(X: CellComplex, h_class) -> PhiComplex:
    lat = X.lattice
    basis = {}
    index = {}
    for i, c in enumerate(X.cells):
        fix = lat.fixed_cosets(c.orbit_class, h_class)
        if not fix:
            continue
        lst = basis.setdefault(c.dim, [])
        for p in fix:
            index[(i, p)] = len(lst)
            lst.append((i, p))
    diffs = {}
    for d in sorted(basis):
        rows = len(basis.get(d - 1, []))
        cols = len(basis[d])
        m = [[0] * cols for _ in range(rows)]
        for (u, v), x in X.diff.items():
            if X.cells[u].dim != d:
                continue
            blk = mark_matrix(x, h_class)
            src_fix = lat.fixed_cosets(X.cells[u].orbit_class, h_class)
            dst_fix = lat.fixed_cosets(X.cells[v].orbit_class, h_class)
            for a, p in enumerate(src_fix):
                for b, q in enumerate(dst_fix):
                    val = blk.data[b][a]
                    if val:
                        m[index[(v, q)]][index[(u, p)]] += val
        diffs[d] = IntMatrix(m, rows, cols)
    weyl_perms = {}
    W = lat.weyl[h_class]
    for d, lst in basis.items():
        perms = []
        for w in range(W.order):
            n = lat.weyl_reps[h_class][w]
            perm = []
            for (i, p) in lst:
                q = lat.coset_act[X.cells[i].orbit_class][n][p]
                perm.append(index[(i, q)])
            perms.append(perm)
        weyl_perms[d] = perms
    return PhiComplex(lat, h_class, basis, diffs, weyl_perms)


class HomologyData:
    def __init__(self, degree, module: GModule, cycle_reps: IntMatrix):
        self.degree = degree
        self.module = module
        self.cycle_reps = cycle_reps  # columns: cycles in the chain basis


def homology(C: PhiComplex):
    """SNF homology of a PhiComplex, with the induced Weyl action."""
    lat = C.lattice
    W = lat.weyl[C.h_class]
    out = {}
    for d in C.degrees():
        n = C.rank(d)
        if n == 0:
            continue
        dmat = C.diffs.get(d)
        if dmat is None or dmat.rows == 0:
            zbasis = IntMatrix.identity(n)
        else:
            cols = LatticeSolver(dmat).kernel_basis()
            zbasis = column_lattice_basis(IntMatrix.from_cols(cols, n)) if cols \
                else IntMatrix.zeros(n, 0)
        k = zbasis.cols
        up = C.diffs.get(d + 1)
        if k:
            solver = LatticeSolver(zbasis)
        if k and up is not None and up.cols:
            rels = solver.solve_matrix(up)
            if rels is None:
                raise AssertionError("boundary is not a cycle")
        else:
            rels = IntMatrix.zeros(k, 0)
        ab = FGAb(k, rels)
        act = []
        if k:
            for w in range(W.order):
                # left multiplication by n_w on fixed cosets; a homomorphism
                # since the stabilizer acts trivially on fixed points
                pm = perm_matrix(C.weyl_perms[d][w])
                y = solver.solve_matrix(pm @ zbasis)
                if y is None:
                    raise AssertionError("Weyl action does not preserve cycles")
                act.append(y)
        else:
            act = [IntMatrix.zeros(0, 0)] * W.order
        out[d] = HomologyData(d, GModule(ab, W, act), zbasis)
    return out


def homology_invariants(C: PhiComplex):
    """{degree: invariant factors} from SNF ranks alone (no actions/reps)."""
    from .zmod import normalized_invariant_factors, smith_normal_form
    ranks = {}
    torsion = {}
    for d in C.degrees():
        m = C.diffs.get(d)
        if m is None or m.rows == 0 or m.cols == 0:
            ranks[d] = 0
            torsion[d - 1] = []
            continue
        sf = smith_normal_form(m, track_u=False, track_v=False)
        ranks[d] = sf.rank
        torsion[d - 1] = [x for x in sf.diag if x > 1]
    out = {}
    for d in C.degrees():
        free = C.rank(d) - ranks.get(d, 0) - ranks.get(d + 1, 0)
        inv = normalized_invariant_factors(sorted(torsion.get(d, [])) + [0] * free)
        if inv:
            out[d] = inv
    return out


def homology_summary(X: CellComplex, h_class):
    """{degree: invariant factors} of the Phi^H homology, omitting trivial."""
    return homology_invariants(geometric_complex(X, h_class))


# -- wedge-of-spheres predicates ----------------------------------------------


def is_slice_sphere(X: CellComplex):
    """Every Phi^H homology free and concentrated in at most one degree."""
    for c in range(X.lattice.nclasses):
        summary = homology_summary(X, c)
        if len(summary) > 1:
            return False
        for d, inv in summary.items():
            if any(f != 0 for f in inv):
                return False
    return True


def is_slice_n_sphere(X: CellComplex, n, nu):
    for c in range(X.lattice.nclasses):
        summary = homology_summary(X, c)
        if len(summary) > 1:
            return False
        for d, inv in summary.items():
            if any(f != 0 for f in inv):
                return False
            if d != nu.value(n, c, X.lattice):
                return False
    return True


def is_isotropic(X: CellComplex, n, nu):
    for c in range(X.lattice.nclasses):
        summary = homology_summary(X, c)
        if len(summary) != 1:
            return False
        (d, inv), = summary.items()
        if any(f != 0 for f in inv) or d != nu.value(n, c, X.lattice):
            return False
    return True


def slice_ge(X: CellComplex, n, nu):
    """Phi^H homology vanishes below nu(n, H) for every class."""
    for c in range(X.lattice.nclasses):
        summary = homology_summary(X, c)
        bound = nu.value(n, c, X.lattice)
        if any(d < bound for d in summary):
            return False
    return True


def j_module(X: CellComplex, h_class, n, nu):
    """pi_{nu(n,H)} of Phi^H as a free Weyl module (cellular homology)."""
    if not is_slice_n_sphere(X, n, nu):
        raise ValueError("complex is not a slice %d-sphere" % n)
    d = nu.value(n, h_class, X.lattice)
    hom = homology(geometric_complex(X, h_class))
    if d in hom:
        return hom[d].module
    W = X.lattice.weyl[h_class]
    return GModule(FGAb(0), W, [IntMatrix.zeros(0, 0)] * W.order)


# -- smashing, restriction, induction ------------------------------------------


def _orbit_charts(lattice, a, b):
    """Product decomposition with charts: pieces of orbit(a) x orbit(b)."""
    return product_decompose(lattice, a, b)


def _locate(lattice, pieces, pa, pb):
    """Which piece contains the point (pa, pb), and at which coset index."""
    for k, piece in enumerate(pieces):
        for ci, (qa, qb) in enumerate(piece.chart):
            if (qa, qb) == (pa, pb):
                return k, ci
    raise AssertionError("point not found in decomposition")


def smash_gset(T: GSet, X: CellComplex, name=None):
    """T_+ smash X: cells cross with T orbitwise; spans cross and decompose."""
    parts = []
    for t in T.components:
        parts.append(smash_orbit(t, X))
    if not parts:
        return CellComplex(X.lattice, [], {}, name or "0")
    Z = parts[0]
    for P in parts[1:]:
        Z = wedge(Z, P)
    Z.name = name or "T^%s" % X.name
    return Z


def smash_orbit(t, X: CellComplex, name=None):
    """orbit(t)_+ smash X, with piece bookkeeping on cells."""
    lat = X.lattice
    G = lat.group
    cells = []
    cell_pieces = []   # per original cell: list of (new cell index, piece)
    for i, c in enumerate(X.cells):
        pieces = _orbit_charts(lat, c.orbit_class, t)
        lst = []
        for piece in pieces:
            lst.append((len(cells), piece))
            cells.append(Cell(c.dim, piece.orbit_class))
        cell_pieces.append(lst)
    diff = {}
    for (u, v), x in X.diff.items():
        cu, cv = X.cells[u].orbit_class, X.cells[v].orbit_class
        pu, pv = cell_pieces[u], cell_pieces[v]
        for span, coeff in x.terms.items():
            for orb in span.apex:
                a = orb.stab
                alpha = orb.left[1]
                beta = orb.right[1]
                apex_pieces = _orbit_charts(lat, a, t)
                for apiece in apex_pieces:
                    # base point of the apex piece
                    base_ci = lat.coset_of[apiece.orbit_class][0]
                    pa, pt = apiece.chart[base_ci]
                    xelt = lat.cosets[a][pa]
                    # left image in orbit(cu) x orbit(t)
                    la = lat.coset_of[cu][G.mul[xelt][alpha]]
                    ku, cil = _locate(lat, [p for _, p in pu], la, pt)
                    lelt = lat.cosets[pu[ku][1].orbit_class][cil]
                    ra = lat.coset_of[cv][G.mul[xelt][beta]]
                    kv, cir = _locate(lat, [p for _, p in pv], ra, pt)
                    relt = lat.cosets[pv[kv][1].orbit_class][cir]
                    src_cell = pu[ku][0]
                    dst_cell = pv[kv][0]
                    elt = BurnsideElement.from_apex_data(
                        lat,
                        GSet(lat, [cells[src_cell].orbit_class]),
                        GSet(lat, [cells[dst_cell].orbit_class]),
                        [(apiece.orbit_class, (0, lelt), (0, relt))], coeff)
                    key = (src_cell, dst_cell)
                    diff[key] = diff.get(key, BurnsideElement.zero(
                        lat, GSet(lat, [cells[src_cell].orbit_class]),
                        GSet(lat, [cells[dst_cell].orbit_class]))) + elt
    Z = CellComplex(lat, cells, diff, name or "%d^%s" % (t, X.name))
    Z.cell_pieces = cell_pieces
    return Z


def counit_cofiber(X: CellComplex, t, reduce=True):
    """Mapping cone of the counit orbit(t)_+ smash X -> X."""
    lat = X.lattice
    Y = smash_orbit(t, X)
    cells = list(X.cells) + [Cell(c.dim + 1, c.orbit_class) for c in Y.cells]
    off = len(X.cells)
    diff = dict(X.diff)
    for (u, v), x in Y.diff.items():
        diff[(u + off, v + off)] = x.scale(-1)
    # connecting block: the counit sends the piece P of orbit(c) x orbit(t)
    # to orbit(c) by the first projection, i.e. the span P <- P -> orbit(c).
    for i, lst in enumerate(Y.cell_pieces):
        c = X.cells[i].orbit_class
        for (j, piece) in lst:
            src = GSet(lat, [piece.orbit_class])
            dst = GSet(lat, [c])
            elt = BurnsideElement.from_apex_data(
                lat, src, dst,
                [(piece.orbit_class,
                  (0, lat.coset_key(piece.orbit_class, 0)),
                  (0, piece.proj_left.coset))])
            diff[(j + off, i)] = elt
    Z = CellComplex(lat, cells, diff, "cof(%s)" % X.name)
    return reduce_complex(Z) if reduce else Z


def unit_fiber(X: CellComplex, t, reduce=True):
    """Fiber of the unit X -> orbit(t)_+ smash X (stably ind = coind)."""
    lat = X.lattice
    Y = smash_orbit(t, X)
    cells = list(X.cells) + [Cell(c.dim - 1, c.orbit_class) for c in Y.cells]
    off = len(X.cells)
    diff = dict(X.diff)
    for (u, v), x in Y.diff.items():
        diff[(u + off, v + off)] = x.scale(-1)
    # connecting block: the unit's component at the piece P is the span
    # orbit(c) <- P -> P (restriction along the projection).
    for i, lst in enumerate(Y.cell_pieces):
        c = X.cells[i].orbit_class
        for (j, piece) in lst:
            src = GSet(lat, [c])
            dst = GSet(lat, [piece.orbit_class])
            elt = BurnsideElement.from_apex_data(
                lat, src, dst,
                [(piece.orbit_class,
                  (0, piece.proj_left.coset),
                  (0, lat.coset_key(piece.orbit_class, 0)))])
            diff[(i, j + off)] = elt
    Z = CellComplex(lat, cells, diff, "fib(%s)" % X.name)
    return reduce_complex(Z) if reduce else Z


def restrict_complex(X: CellComplex, elems):
    """Restrict to the subgroup generated by elems; returns (Y, Hgrp, latH, emb)."""
    latG = X.lattice
    G = latG.group
    Hgrp, emb = subgroup_as_group(G, G.closure(elems))
    latH = SubgroupLattice(Hgrp)

    def decompose_orbit(cG):
        n = latG.orbit_size(cG)
        act = [[latG.coset_act[cG][emb[h]][p] for p in range(n)]
               for h in range(Hgrp.order)]
        return ConcreteGSet(latH, n, act).decompose()

    orbit_pieces = {}
    cells = []
    cell_pieces = []
    for i, c in enumerate(X.cells):
        if c.orbit_class not in orbit_pieces:
            orbit_pieces[c.orbit_class] = decompose_orbit(c.orbit_class)
        lst = []
        for (cH, chart) in orbit_pieces[c.orbit_class]:
            lst.append((len(cells), cH, chart))
            cells.append(Cell(c.dim, cH))
        cell_pieces.append(lst)

    def locate(pieces, point):
        for (idx, cH, chart) in pieces:
            if point in chart:
                return idx, cH, latH.cosets[cH][chart.index(point)]
        raise AssertionError("point not found")

    diff = {}
    for (u, v), x in X.diff.items():
        cu, cv = X.cells[u].orbit_class, X.cells[v].orbit_class
        for span, coeff in x.terms.items():
            for orb in span.apex:
                a = orb.stab
                alpha, beta = orb.left[1], orb.right[1]
                if a not in orbit_pieces:
                    orbit_pieces[a] = decompose_orbit(a)
                for (cA, chart) in orbit_pieces[a]:
                    base = chart[latH.coset_of[cA][0]]
                    xelt = latG.cosets[a][base]
                    lpoint = latG.coset_of[cu][G.mul[xelt][alpha]]
                    rpoint = latG.coset_of[cv][G.mul[xelt][beta]]
                    iu, cHu, lelt = locate(cell_pieces[u], lpoint)
                    iv, cHv, relt = locate(cell_pieces[v], rpoint)
                    elt = BurnsideElement.from_apex_data(
                        latH, GSet(latH, [cHu]), GSet(latH, [cHv]),
                        [(cA, (0, lelt), (0, relt))], coeff)
                    key = (iu, iv)
                    diff[key] = diff.get(key, BurnsideElement.zero(
                        latH, GSet(latH, [cHu]), GSet(latH, [cHv]))) + elt
    Y = CellComplex(latH, cells, diff, "res(%s)" % X.name)
    return Y, Hgrp, latH, emb


def induce_complex(X: CellComplex, latG: SubgroupLattice, emb):
    """Induce along the embedding of a subgroup: orbits keep their stabilizer."""
    latH = X.lattice
    G = latG.group

    def conj_data(cH):
        K_G = frozenset(emb[h] for h in latH.classes[cH])
        cG, u = latG.conjugator_to_rep(K_G)
        return cG, G.inv[u]

    data = [conj_data(cH) for cH in range(latH.nclasses)]
    cells = [Cell(c.dim, data[c.orbit_class][0]) for c in X.cells]
    diff = {}
    for (u, v), x in X.diff.items():
        cu, vu = data[X.cells[u].orbit_class]
        cv, vv = data[X.cells[v].orbit_class]
        terms = []
        for span, coeff in x.terms.items():
            for orb in span.apex:
                cA, vA = data[orb.stab]
                alpha = emb[orb.left[1]]
                beta = emb[orb.right[1]]
                lelt = latG.coset_key(cu, G.mul[G.mul[G.inv[vA]][alpha]][vu])
                relt = latG.coset_key(cv, G.mul[G.mul[G.inv[vA]][beta]][vv])
                terms.append(((cA, (0, lelt), (0, relt)), coeff))
        out = BurnsideElement.zero(latG, GSet(latG, [cu]), GSet(latG, [cv]))
        for apex, coeff in terms:
            out = out + BurnsideElement.from_apex_data(
                latG, GSet(latG, [cu]), GSet(latG, [cv]), [apex], coeff)
        diff[(u, v)] = out
    return CellComplex(latG, cells, diff, "ind(%s)" % X.name)


# -- Gaussian cell cancellation -------------------------------------------------


def _invertible_inverse(lattice, x: BurnsideElement):
    """If x is +-(an automorphism span), return its inverse, else None."""
    if len(x.terms) != 1:
        return None
    span, coeff = next(iter(x.terms.items()))
    if coeff not in (1, -1) or len(span.apex) != 1:
        return None
    orb = span.apex[0]
    c = span.src[0]
    if orb.stab != c or span.dst[0] != c:
        return None
    src = GSet(lattice, [c])
    inv = BurnsideElement.from_apex_data(
        lattice, src, src, [(c, orb.right, orb.left)], coeff)
    ident = identity_element(lattice, src)
    if compose(x, inv) == ident and compose(inv, x) == ident:
        return inv
    return None


def reduce_complex(X: CellComplex, max_passes=None):
    """Cancel cell pairs joined by an invertible differential entry.

    Gaussian elimination over the Burnside category: if d[u][v] = e is
    invertible, drop u and v and correct the remaining block by
    d[u'][v'] -= d[u'][v] e^-1 d[u][v'].  Homology of every geometric
    fixed point complex is preserved since marks are functorial.
    """
    lat = X.lattice
    cells = list(X.cells)
    diff = dict(X.diff)
    alive = [True] * len(cells)
    while True:
        pivot = None
        for (u, v), x in diff.items():
            if not (alive[u] and alive[v]):
                continue
            inv = _invertible_inverse(lat, x)
            if inv is not None:
                pivot = (u, v, inv)
                break
        if pivot is None:
            break
        u, v, einv = pivot
        d = cells[u].dim
        row_u = {v2: x for (u2, v2), x in diff.items() if u2 == u and v2 != v and alive[v2]}
        col_v = {u2: x for (u2, v2), x in diff.items() if v2 == v and u2 != u and alive[u2]}
        for u2, xu2 in col_v.items():
            for v2, xv2 in row_u.items():
                corr = compose(compose(xu2, einv), xv2).scale(-1)
                key = (u2, v2)
                cur = diff.get(key)
                if cur is None:
                    cur = BurnsideElement.zero(
                        lat, GSet(lat, [cells[u2].orbit_class]),
                        GSet(lat, [cells[v2].orbit_class]))
                new = cur + corr
                if new.is_zero():
                    diff.pop(key, None)
                else:
                    diff[key] = new
        alive[u] = alive[v] = False
        diff = {k: x for k, x in diff.items()
                if alive[k[0]] and alive[k[1]] and not x.is_zero()}
    remap = {}
    new_cells = []
    for i, c in enumerate(cells):
        if alive[i]:
            remap[i] = len(new_cells)
            new_cells.append(c)
    new_diff = {(remap[u], remap[v]): x for (u, v), x in diff.items()}
    return CellComplex(lat, new_cells, new_diff, X.name)


# -- the isotropic sphere construction ------------------------------------------


class _RestrictedNu:
    """Dimension rule for a subgroup inherited from the ambient group."""

    def __init__(self, nu, latG, emb):
        self.nu = nu
        self.latG = latG
        self.emb = emb
        self.name = getattr(nu, "name", "custom")

    def value(self, n, cH, latH):
        K_G = frozenset(self.emb[h] for h in latH.classes[cH])
        cG = self.latG.class_of[K_G]
        return self.nu.value(n, cG, self.latG)


def fold_cofiber_sphere(lattice, t_class):
    """The cofiber of orbit(t)_+ -> S^0 (one fold differential)."""
    X = single_cell_complex(lattice, 0, lattice.nclasses - 1, "S0")
    return counit_cofiber(X, t_class, reduce=False)


def construct_isotropic_sphere(lattice, n, nu, _depth=0):
    """Build an isotropic slice n-sphere by the poset walk.

    Start from one G/G cell in dimension nu(n, [G/G]) and walk the classes by
    decreasing subgroup order, iterating counit cofibers (Case 2) to raise a
    class's geometric fixed point degree and unit fibers (Case 3) to lower it.
    When the Weyl multiplicity at a class is one, these steps annihilate its
    geometric fixed points instead of shifting them; such classes are repaired
    afterwards by wedging on induced isotropic spheres from their subgroups
    (Case 1).  Deferring the Case 1 wedges until every class sits at its
    target degree or at zero keeps each geometric fixed point complex
    concentrated in a single degree: the induced summands land exactly at the
    target degree of every class they touch.
    """
    if _depth > lattice.nclasses + 2:
        raise AssertionError("recursion bound exceeded")
    top = lattice.nclasses - 1
    X = single_cell_complex(lattice, nu.value(n, top, lattice), top, "X0")
    walk = sorted(range(lattice.nclasses),
                  key=lambda c: (-len(lattice.rep(c)), tuple(sorted(lattice.rep(c)))))
    assert walk[0] == top
    budget = 4 * (lattice.nclasses + 1) * (_degree_spread(lattice, n, nu) + 2) + 16
    for c in walk[1:]:
        target = nu.value(n, c, lattice)
        while True:
            budget -= 1
            if budget < 0:
                raise AssertionError("iteration bound exceeded in sphere construction")
            summary = homology_summary(X, c)
            if not summary:
                break
            (m, inv), = summary.items()
            if any(f != 0 for f in inv):
                raise AssertionError("geometric homology not free during walk")
            if m == target:
                break
            if m < target:
                X = counit_cofiber(X, c)    # Case 2
            else:
                X = unit_fiber(X, c)        # Case 3
    # Case 1 wedges for every class whose geometric fixed points vanished
    for c in walk[1:]:
        if homology_summary(X, c):
            continue
        Hgrp, emb = subgroup_as_group(lattice.group, lattice.rep(c))
        latH = SubgroupLattice(Hgrp)
        sub_nu = _RestrictedNu(nu, lattice, emb)
        A = construct_isotropic_sphere(latH, n, sub_nu, _depth + 1)
        X = wedge(X, induce_complex(A, lattice, emb))
        X = reduce_complex(X)
    X.name = "W(%s,n=%d,%s)" % (lattice.group.name, n, getattr(nu, "name", "nu"))
    return X


def _degree_spread(lattice, n, nu):
    vals = [nu.value(n, c, lattice) for c in range(lattice.nclasses)]
    vals += [nu.value(n + 1, c, lattice) for c in range(lattice.nclasses)]
    return max(vals) - min(vals) if vals else 0
