"""Green functors, geometrically split sections, and Phi-module data.

Green functors are stored levelwise: each level of the underlying Mackey
functor carries a multiplication table and unit, restrictions are ring maps,
and transfers satisfy Frobenius reciprocity.  The geometric fixed point
rings R^{Phi H} are computed as quotients by transfer ideals; a Section
chooses equivariant ring splittings, and modules over a split Green functor
unfold into Phi-module data: one module per class over the fixed point ring,
with transfer/restriction maps through coinvariants and invariants of
Hom-set tensors, a trace triangle, and composition squares.
"""

from __future__ import annotations

import itertools
import os

from .grp import GMap, GSet, SubgroupLattice
from .mackey import MackeyFunctor, burnside_mackey, geometric_fixed_points
from .zmod import (FGAb, GModule, IntMatrix, LatticeSolver, ModuleMap,
                   _bounded_combos, block_diag, column_lattice_basis, image,
                   invariants, kernel, lattice_member, perm_matrix)


DEFAULT_EFFORT_CAP = 10 ** 6


def effort_cap():
    v = os.environ.get("SLICEKIT_EFFORT_CAP")
    return int(v) if v else DEFAULT_EFFORT_CAP


class LevelRing:
    """A presented ring with a group action: FGAb + mul table + unit."""

    def __init__(self, ab: FGAb, group, act, mul, unit):
        self.ab = ab
        self.group = group
        self.act = act      # per group element
        self.mul = mul      # mul[i][j] = vector of e_i * e_j
        self.unit = unit    # vector

    def module(self):
        return GModule(self.ab, self.group, self.act)

    def product(self, x, y):
        """Product of two element vectors via bilinear extension."""
        n = self.ab.ngens
        out = [0] * n
        for i in range(n):
            if not x[i]:
                continue
            for j in range(n):
                if not y[j]:
                    continue
                c = x[i] * y[j]
                for t in range(n):
                    out[t] += c * self.mul[i][j][t]
        return out

    def validate(self):
        errs = []
        mod = self.module()
        errs += [("module",) + e for e in mod.validate()]
        n = self.ab.ngens
        basis = [[1 if t == i else 0 for t in range(n)] for i in range(n)]
        for i in range(n):
            u = self.product(self.unit, basis[i])
            if not self.ab.elts_equal(u, basis[i]):
                errs.append(("unit-left", i))
            u = self.product(basis[i], self.unit)
            if not self.ab.elts_equal(u, basis[i]):
                errs.append(("unit-right", i))
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    lhs = self.product(self.mul[i][j], basis[k])
                    rhs = self.product(basis[i], self.mul[j][k])
                    if not self.ab.elts_equal(lhs, rhs):
                        errs.append(("associativity", i, j, k))
        # multiplication must be well-defined modulo relations
        for r in range(self.ab.rels.cols):
            rel = self.ab.rels.col(r)
            for j in range(n):
                if not self.ab.is_zero_elt(self.product(rel, basis[j])):
                    errs.append(("rel-left", r, j))
                if not self.ab.is_zero_elt(self.product(basis[j], rel)):
                    errs.append(("rel-right", r, j))
        for g in range(self.group.order):
            A = self.act[g]
            for i in range(n):
                for j in range(n):
                    lhs = A.apply(self.mul[i][j])
                    rhs = self.product(A.col(i), A.col(j))
                    if not self.ab.elts_equal(lhs, rhs):
                        errs.append(("action-ring", g, i, j))
            if not self.ab.elts_equal(A.apply(self.unit), self.unit):
                errs.append(("action-unit", g))
        return errs


class GreenFunctor:
    def __init__(self, mackey: MackeyFunctor, rings):
        self.mackey = mackey
        self.rings = rings  # per class LevelRing (sharing level ab and action)

    @property
    def lattice(self):
        return self.mackey.lattice


def check_green(R: GreenFunctor):
    report = {"mackey": [], "rings": [], "res-ring": [], "frobenius": [], "pass": True}
    report["mackey"] = R.mackey.check_axioms()
    for c, ring in enumerate(R.rings):
        for e in ring.validate():
            report["rings"].append((c,) + e)
    lat = R.lattice
    for (a, b) in R.mackey.comparable_pairs():
        ra, rb = R.rings[a], R.rings[b]
        na, nb = ra.ab.ngens, rb.ab.ngens
        basis_a = [[1 if t == i else 0 for t in range(na)] for i in range(na)]
        basis_b = [[1 if t == i else 0 for t in range(nb)] for i in range(nb)]
        for m in lat.hom_orbits(a, b):
            res = R.mackey.res_eval(m)
            tr = R.mackey.tr_eval(m)
            if not ra.ab.elts_equal(res.apply(rb.unit), ra.unit):
                report["res-ring"].append(("unit", a, b, m.coset))
            for i in range(nb):
                for j in range(nb):
                    lhs = res.apply(rb.mul[i][j])
                    rhs = ra.product(res.col(i), res.col(j))
                    if not ra.ab.elts_equal(lhs, rhs):
                        report["res-ring"].append(("mult", a, b, m.coset, i, j))
            # Frobenius: tr(x) y = tr(x res(y)) and y tr(x) = tr(res(y) x)
            for i in range(na):
                for j in range(nb):
                    lhs = rb.product(tr.col(i), basis_b[j])
                    rhs = tr.apply(ra.product(basis_a[i], res.col(j)))
                    if not rb.ab.elts_equal(lhs, rhs):
                        report["frobenius"].append(("right", a, b, m.coset, i, j))
                    lhs = rb.product(basis_b[j], tr.col(i))
                    rhs = tr.apply(ra.product(res.col(j), basis_a[i]))
                    if not rb.ab.elts_equal(lhs, rhs):
                        report["frobenius"].append(("left", a, b, m.coset, i, j))
    report["pass"] = not (report["mackey"] or report["rings"]
                          or report["res-ring"] or report["frobenius"])
    return report


class GreenModule:
    """A Mackey functor with a levelwise right action of a Green functor."""

    def __init__(self, green: GreenFunctor, mackey: MackeyFunctor, act):
        self.green = green
        self.mackey = mackey
        self.act = act  # act[c][i][j] = vector: (level gen i) . (ring gen j)

    @property
    def lattice(self):
        return self.mackey.lattice

    def action(self, c, mvec, rvec):
        n = self.mackey.level_rank(c)
        out = [0] * n
        for i in range(n):
            if not mvec[i]:
                continue
            for j in range(len(rvec)):
                if not rvec[j]:
                    continue
                coef = mvec[i] * rvec[j]
                for t in range(n):
                    out[t] += coef * self.act[c][i][j][t]
        return out


def check_module(M: GreenModule):
    report = {"mackey": [], "module": [], "compat": [], "pass": True}
    report["mackey"] = M.mackey.check_axioms()
    lat = M.lattice
    R = M.green
    for c in range(lat.nclasses):
        ring = R.rings[c]
        lvl = M.mackey.levels[c]
        n = lvl.ab.ngens
        nr = ring.ab.ngens
        basis = [[1 if t == i else 0 for t in range(n)] for i in range(n)]
        rbasis = [[1 if t == i else 0 for t in range(nr)] for i in range(nr)]
        for i in range(n):
            if not lvl.ab.elts_equal(M.action(c, basis[i], ring.unit), basis[i]):
                report["module"].append(("unit", c, i))
            for j in range(nr):
                for k in range(nr):
                    lhs = M.action(c, M.action(c, basis[i], rbasis[j]), rbasis[k])
                    rhs = M.action(c, basis[i], ring.mul[j][k])
                    if not lvl.ab.elts_equal(lhs, rhs):
                        report["module"].append(("associativity", c, i, j, k))
        for r in range(lvl.ab.rels.cols):
            rel = lvl.ab.rels.col(r)
            for j in range(nr):
                if not lvl.ab.is_zero_elt(M.action(c, rel, rbasis[j])):
                    report["module"].append(("rel", c, r, j))
        for r in range(ring.ab.rels.cols):
            rel = ring.ab.rels.col(r)
            for i in range(n):
                if not lvl.ab.is_zero_elt(M.action(c, basis[i], rel)):
                    report["module"].append(("ring-rel", c, r, i))
        for w in range(lat.weyl[c].order):
            A = lvl.act[w]
            B = ring.act[w]
            for i in range(n):
                for j in range(nr):
                    lhs = A.apply(M.action(c, basis[i], rbasis[j]))
                    rhs = M.action(c, A.col(i), B.col(j))
                    if not lvl.ab.elts_equal(lhs, rhs):
                        report["module"].append(("weyl", c, w, i, j))
    for (a, b) in M.mackey.comparable_pairs():
        for m in lat.hom_orbits(a, b):
            res_m = M.mackey.res_eval(m)
            tr_m = M.mackey.tr_eval(m)
            res_r = R.mackey.res_eval(m)
            tr_r = R.mackey.tr_eval(m)
            na, nb = M.mackey.level_rank(a), M.mackey.level_rank(b)
            nra, nrb = R.rings[a].ab.ngens, R.rings[b].ab.ngens
            for i in range(nb):
                ei = [1 if t == i else 0 for t in range(nb)]
                for j in range(nrb):
                    ej = [1 if t == j else 0 for t in range(nrb)]
                    lhs = res_m.apply(M.action(b, ei, ej))
                    rhs = M.action(a, res_m.col(i), res_r.col(j))
                    if not M.mackey.levels[a].ab.elts_equal(lhs, rhs):
                        report["compat"].append(("res-mult", a, b, m.coset, i, j))
                for j in range(nra):
                    # Frobenius: m . tr(r) = tr(res(m) . r)
                    ej = [1 if t == j else 0 for t in range(nra)]
                    lhs = M.action(b, ei, tr_r.col(j))
                    rhs = tr_m.apply(M.action(a, res_m.col(i), ej))
                    if not M.mackey.levels[b].ab.elts_equal(lhs, rhs):
                        report["compat"].append(("frobenius", a, b, m.coset, i, j))
            for i in range(na):
                ei = [1 if t == i else 0 for t in range(na)]
                for j in range(nrb):
                    # projection formula: tr(m) . r = tr(m . res(r))
                    ej = [1 if t == j else 0 for t in range(nrb)]
                    lhs = M.action(b, tr_m.col(i), ej)
                    rhs = tr_m.apply(M.action(a, ei, res_r.col(j)))
                    if not M.mackey.levels[b].ab.elts_equal(lhs, rhs):
                        report["compat"].append(("projection", a, b, m.coset, i, j))
    report["pass"] = not (report["mackey"] or report["module"] or report["compat"])
    return report


# -- constructions ---------------------------------------------------------------


def burnside_green(lattice) -> GreenFunctor:
    """The Burnside Green functor; products by fiber product over the orbit."""
    from .burnside import BurnsideRing
    M = burnside_mackey(lattice)
    rings = []
    for c in range(lattice.nclasses):
        br = BurnsideRing(lattice, c)
        if br.basis != M.span_bases[c]:
            raise AssertionError("span basis mismatch at class %d" % c)
        n = len(br.basis)
        mul = [[br.product_vector(i, j) for j in range(n)] for i in range(n)]
        rings.append(LevelRing(M.levels[c].ab, lattice.weyl[c],
                               M.levels[c].act, mul, br.unit_vector()))
    return GreenFunctor(M, rings)


def constant_green(lattice) -> GreenFunctor:
    from .mackey import constant_mackey
    M = constant_mackey(lattice)
    rings = []
    for c in range(lattice.nclasses):
        rings.append(LevelRing(M.levels[c].ab, lattice.weyl[c],
                               M.levels[c].act, [[[1]]], [1]))
    return GreenFunctor(M, rings)


def module_over_burnside(R: GreenFunctor, M: MackeyFunctor) -> GreenModule:
    """Every Mackey functor is a module over the Burnside Green functor:
    a basis span [L -> orbit] acts as tr o res along its structure map."""
    lat = M.lattice
    act = []
    for c in range(lat.nclasses):
        n = M.level_rank(c)
        spans = R.mackey.span_bases[c]
        table = []
        for i in range(n):
            ei = [1 if t == i else 0 for t in range(n)]
            row = []
            for sp in spans:
                orb = sp.apex[0]
                psi = GMap(orb.stab, c, orb.right[1])
                vec = M.tr_eval(psi).apply(M.res_eval(psi).apply(ei))
                row.append(vec)
            table.append(row)
        act.append(table)
    return GreenModule(R, M, act)


# -- geometric fixed point rings ---------------------------------------------------


def phi_ring(R: GreenFunctor, c):
    """R^{Phi c}: quotient by the transfer ideal, with the ideal verified."""
    lat = R.lattice
    mod, proj = geometric_fixed_points(R.mackey, c)
    ring = R.rings[c]
    n = ring.ab.ngens
    # transfer image lattice (plus relations)
    cols = []
    for a in range(lat.nclasses):
        if not lat.strictly_subconjugate(a, c):
            continue
        for m in lat.hom_orbits(a, c):
            cols.extend(R.mackey.tr_eval(m).columns())
    tlat_cols = cols + ring.ab.rels.columns()
    tlat = IntMatrix.from_cols(tlat_cols, n) if tlat_cols else IntMatrix.zeros(n, 0)
    basis = [[1 if t == i else 0 for t in range(n)] for i in range(n)]
    for j in range(len(cols)):
        t = cols[j]
        for i in range(n):
            if not lattice_member(tlat, ring.product(t, basis[i])) or \
               not lattice_member(tlat, ring.product(basis[i], t)):
                raise AssertionError("transfer image is not an ideal at class %d" % c)
    return LevelRing(mod.ab, lat.weyl[c], mod.act, ring.mul, ring.unit)


class Section:
    """Per class, a ring section s_c of R(G/c) -> R^{Phi c}."""

    def __init__(self, mats):
        self.mats = mats  # per class: IntMatrix  R-gens x Phi-gens


def verify_section(R: GreenFunctor, phis, s: Section):
    """Exact check: projection o s = id, s multiplicative, unital, equivariant."""
    lat = R.lattice
    errs = []
    for c in range(lat.nclasses):
        ring = R.rings[c]
        phi = phis[c]
        mat = s.mats[c]
        n = phi.ab.ngens
        f = ModuleMap(phi.ab, ring.ab, mat)
        if not f.well_defined():
            errs.append(("ill-defined", c))
            continue
        for j in range(n):
            ej = [1 if t == j else 0 for t in range(n)]
            if not phi.ab.elts_equal(mat.col(j), ej):
                errs.append(("not-section", c, j))
        if not ring.ab.elts_equal(mat.apply(phi.unit), ring.unit):
            errs.append(("unit", c))
        for i in range(n):
            for j in range(n):
                lhs = mat.apply(phi.mul[i][j])
                rhs = ring.product(mat.col(i), mat.col(j))
                if not ring.ab.elts_equal(lhs, rhs):
                    errs.append(("mult", c, i, j))
        for w in range(lat.weyl[c].order):
            lhs = mat @ phi.act[w]
            rhs = ring.act[w] @ mat
            d = lhs - rhs
            if not all(ring.ab.is_zero_elt(d.col(j)) for j in range(n)):
                errs.append(("equivariance", c, w))
    return errs


def _affine_solutions(ring, phi):
    """Particular + homogeneous basis for additive sections at one class.

    Unknown S (n x n, R-gens x Phi-gens) with S . rels(Phi) in rels(R) and
    S e_j = e_j mod rels(Phi); returns (S0, basis) or None if unsolvable.
    """
    n = ring.ab.ngens
    relsR = ring.ab.rels
    relsP = phi.ab.rels
    nU = n * n

    def uidx(i, j):
        return i * n + j

    rows = []
    rhs = []
    naux_r = relsR.cols
    naux_p = relsP.cols
    conds = []
    # (a) well defined: for each Phi-relator rho: S rho - relsR y = 0
    for jr in range(relsP.cols):
        rho = relsP.col(jr)
        conds.append(("wd", rho, None))
    # (b) section: S e_j - relsP z = e_j
    for j in range(n):
        ej = [1 if t == j else 0 for t in range(n)]
        conds.append(("sec", ej, ej))
    width = nU + len(conds) * max(naux_r, naux_p, 1)
    # build rows: each condition contributes n scalar equations
    bigrows = []
    bigrhs = []
    aux0 = nU
    for ci, (kind, vec, rvec) in enumerate(conds):
        base = aux0 + ci * max(naux_r, naux_p, 1)
        for i in range(n):
            row = [0] * width
            for jj in range(n):
                if vec[jj]:
                    row[uidx(i, jj)] = vec[jj]
            if kind == "wd":
                for a in range(naux_r):
                    row[base + a] = -relsR.data[i][a]
                bigrhs.append(0)
            else:
                for a in range(naux_p):
                    row[base + a] = -relsP.data[i][a]
                bigrhs.append(rvec[i])
            bigrows.append(row)
    if not bigrows:
        return IntMatrix.identity(n), []
    A = IntMatrix(bigrows, len(bigrows), width)
    solver = LatticeSolver(A)
    x0 = solver.solve(bigrhs)
    if x0 is None:
        return None
    kb = solver.kernel_basis()
    proj = [col[:nU] for col in kb]
    lat = column_lattice_basis(IntMatrix.from_cols(proj, nU)) if proj else IntMatrix.zeros(nU, 0)
    S0 = IntMatrix([[x0[uidx(i, j)] for j in range(n)] for i in range(n)], n, n)
    basis = []
    for col in lat.columns():
        basis.append(IntMatrix([[col[uidx(i, j)] for j in range(n)] for i in range(n)], n, n))
    return S0, basis


def find_section(R: GreenFunctor, phis=None, cap=None):
    """Split(Section) | NotSplit | Unknown, searching additive sections.

    Returns (status, section_or_None, info).  NotSplit only with a
    certificate: no additive section exists at some class, or the full
    (finite) candidate space was exhausted.  `unique` in info is certified
    when each Phi-ring is Z, free on the image of the unit.
    """
    cap = cap or effort_cap()
    lat = R.lattice
    if phis is None:
        phis = [phi_ring(R, c) for c in range(lat.nclasses)]
    mats = []
    unique = True
    for c in range(lat.nclasses):
        ring = R.rings[c]
        phi = phis[c]
        n = phi.ab.ngens
        sol = _affine_solutions(ring, phi)
        if sol is None:
            return "NotSplit", None, {"class": c, "reason": "no additive section"}
        S0, basis = sol
        # unit-generated shortcut: Phi free of rank 1 on the unit image
        unitgen = phi.ab.invariant_factors() == [0] and _generated_by(phi, phi.unit)
        found = None
        tried = 0
        exhausted = len(basis) == 0
        for combo in _bounded_combos(len(basis), cap if basis else 1):
            S = S0
            for t, B in zip(combo, basis):
                if t:
                    S = S + B.scale(t)
            tried += 1
            if _ring_section_ok(ring, phi, S, lat.weyl[c].order):
                if found is None:
                    found = S
                    if unitgen:
                        break
                else:
                    unique = False
                    break
            if tried >= cap:
                break
        if found is None:
            if exhausted or (tried < cap and not basis):
                return "NotSplit", None, {"class": c, "reason": "exhausted"}
            return "Unknown", None, {"class": c, "reason": "cap"}
        if not unitgen and basis:
            unique = False  # not certified
        mats.append(found)
    return "Split", Section(mats), {"unique": unique}


def _generated_by(ring, vec):
    n = ring.ab.ngens
    cols = [vec] + ring.ab.rels.columns()
    latm = IntMatrix.from_cols(cols, n)
    return all(lattice_member(latm, [1 if t == j else 0 for t in range(n)])
               for j in range(n))


def _ring_section_ok(ring, phi, S, weyl_order):
    n = phi.ab.ngens
    f = ModuleMap(phi.ab, ring.ab, S)
    if not f.well_defined():
        return False
    for j in range(n):
        ej = [1 if t == j else 0 for t in range(n)]
        if not phi.ab.elts_equal(S.col(j), ej):
            return False
    if not ring.ab.elts_equal(S.apply(phi.unit), ring.unit):
        return False
    for i in range(n):
        for j in range(n):
            if not ring.ab.elts_equal(S.apply(phi.mul[i][j]),
                                      ring.product(S.col(i), S.col(j))):
                return False
    for w in range(weyl_order):
        d = (S @ phi.act[w]) - (ring.act[w] @ S)
        if not all(ring.ab.is_zero_elt(d.col(j)) for j in range(n)):
            return False
    return True


# -- pair spaces: coinvariants/invariants of Hom tensors ----------------------------


class PairSpace:
    """For classes s > t (finer stabilizer at s): the F- and G-summands.

    F = (M(s) (x) Hom(s,t))_{Aut(s)} and G = (M(s)^{Hom(s,t)})^{Aut(s)},
    presented with recorded bases, with the residual Aut(t)-action and the
    trace map between them.
    """

    def __init__(self, lattice, level: GModule, s, t):
        self.lattice = lattice
        self.s = s
        self.t = t
        self.level = level
        self.hom = lattice.hom_orbits(s, t)
        self.hom_index = {m.coset: k for k, m in enumerate(self.hom)}
        n = level.ab.ngens
        k = len(self.hom)
        self.n = n
        self.nhom = k
        self.raw = n * k
        G = lattice.group
        Ws = lattice.weyl[s]
        Wt = lattice.weyl[t]
        # diagonal Aut(s)-action: w.(m (x) f) = (w m) (x) (f o alpha_{n_w}^-1)
        self.act_raw = []
        for w in range(Ws.order):
            nw = lattice.weyl_reps[s][w]
            nwi = G.inv[nw]
            perm = [self.hom_index[lattice.coset_key(t, G.mul[nwi][m.coset])]
                    for m in self.hom]
            mat = [[0] * self.raw for _ in range(self.raw)]
            A = level.act[w]
            for kk in range(k):
                tk = perm[kk]
                for i in range(n):
                    for i2 in range(n):
                        v = A.data[i2][i]
                        if v:
                            mat[tk * n + i2][kk * n + i] = v
            self.act_raw.append(IntMatrix(mat, self.raw, self.raw))
        # residual Aut(t) permutation on the Hom factor: f |-> beta_{n^-1} o f
        self.res_perm = []
        for w in range(Wt.order):
            nw = lattice.weyl_reps[t][w]
            nwi = G.inv[nw]
            self.res_perm.append([self.hom_index[lattice.coset_key(t, G.mul[m.coset][nwi])]
                                  for m in self.hom])
        rels = block_diag([level.ab.rels] * k) if k else IntMatrix.zeros(0, 0)
        raw_ab = FGAb(self.raw, rels)
        big = GModule(raw_ab, Ws, self.act_raw)
        # F: coinvariants (same generators, extra relators)
        from .zmod import coinvariants as _coinv, invariants as _inv
        self.F_ab, self.F_proj = _coinv(big)
        self.G_ab, self.G_incl = _inv(big)
        # trace
        total = IntMatrix.zeros(self.raw, self.raw)
        for w in range(Ws.order):
            total = total + self.act_raw[w]
        incl_comb = self.G_incl.matrix.hstack(raw_ab.rels) if raw_ab.rels.cols \
            else self.G_incl.matrix
        solver = LatticeSolver(incl_comb)
        sol = solver.solve_matrix(total)
        if sol is None:
            raise AssertionError("trace does not land in invariants")
        self.trace = IntMatrix([row[:] for row in sol.data[:self.G_ab.ngens]],
                               self.G_ab.ngens, self.raw)
        self._raw_ab = raw_ab
        # residual action matrices
        self.F_act = []
        self.G_act = []
        for w in range(Wt.order):
            perm = self.res_perm[w]
            mat = [[0] * self.raw for _ in range(self.raw)]
            for kk in range(k):
                for i in range(n):
                    mat[perm[kk] * n + i][kk * n + i] = 1
            P = IntMatrix(mat, self.raw, self.raw)
            self.F_act.append(P)
            solg = solver.solve_matrix(P @ self.G_incl.matrix)
            if solg is None:
                raise AssertionError("residual action does not preserve invariants")
            self.G_act.append(IntMatrix([row[:] for row in solg.data[:self.G_ab.ngens]],
                                        self.G_ab.ngens, self.G_ab.ngens))

    def raw_index(self, i, k):
        return k * self.n + i

    def corestrict(self, raw_matrix):
        """Express columns of a raw-coordinate matrix in the G presentation."""
        incl_comb = self.G_incl.matrix.hstack(self._raw_ab.rels) \
            if self._raw_ab.rels.cols else self.G_incl.matrix
        sol = LatticeSolver(incl_comb).solve_matrix(raw_matrix)
        if sol is None:
            return None
        return IntMatrix([row[:] for row in sol.data[:self.G_ab.ngens]],
                         self.G_ab.ngens, raw_matrix.cols)


# -- Phi-module data ------------------------------------------------------------------


class PhiModuleData:
    """Levels over the fixed point rings plus pair structure maps.

    * levels[c]: GModule over Weyl(c)
    * rings[c]: LevelRing (R^{Phi c})
    * level_act[c][i][j]: (level gen i) . (ring gen j)
    * pairs[(s,t)]: PairSpace
    * down[(s,t)]: raw F-coordinates -> level t   (transfer flavored)
    * up[(s,t)]: level t -> G presentation        (restriction flavored)
    * ring_maps[(s,t)][k]: ring map R^{Phi t} -> R^{Phi s} attached to the
      k-th Hom element (transition data for module linearity)
    """

    def __init__(self, lattice, levels, rings, level_act, pairs, down, up, ring_maps):
        self.lattice = lattice
        self.levels = levels
        self.rings = rings
        self.level_act = level_act
        self.pairs = pairs
        self.down = down
        self.up = up
        self.ring_maps = ring_maps

    def strict_pairs(self):
        return sorted(self.pairs)

    def level_action(self, c, mvec, rvec):
        n = self.levels[c].ab.ngens
        out = [0] * n
        for i in range(n):
            if not mvec[i]:
                continue
            for j in range(len(rvec)):
                if not rvec[j]:
                    continue
                coef = mvec[i] * rvec[j]
                for tt in range(n):
                    out[tt] += coef * self.level_act[c][i][j][tt]
        return out


def pair_spaces(lattice, levels):
    """PairSpace for each strict pair: stab(s) strictly subconjugate stab(t)."""
    out = {}
    for s in range(lattice.nclasses):
        for t in range(lattice.nclasses):
            if s != t and lattice.strictly_subconjugate(s, t):
                out[(s, t)] = PairSpace(lattice, levels[s], s, t)
    return out


def check_phi_module(D: PhiModuleData):
    """Verify the trace triangle, equivariance, linearity, and the
    composition squares; returns {"checks": {...}, "pass": bool}."""
    lat = D.lattice
    checks = {}

    def record(name, ok):
        checks[name] = checks.get(name, True) and ok

    # level modules over their rings, Weyl compatibility
    for c in range(lat.nclasses):
        ring = D.rings[c]
        lvl = D.levels[c]
        n = lvl.ab.ngens
        nr = ring.ab.ngens
        ok = True
        basis = [[1 if t == i else 0 for t in range(n)] for i in range(n)]
        rbasis = [[1 if t == i else 0 for t in range(nr)] for i in range(nr)]
        for i in range(n):
            if not lvl.ab.elts_equal(D.level_action(c, basis[i], ring.unit), basis[i]):
                ok = False
            for j in range(nr):
                for kk in range(nr):
                    lhs = D.level_action(c, D.level_action(c, basis[i], rbasis[j]), rbasis[kk])
                    rhs = D.level_action(c, basis[i], ring.mul[j][kk])
                    if not lvl.ab.elts_equal(lhs, rhs):
                        ok = False
        for w in range(lat.weyl[c].order):
            for i in range(n):
                for j in range(nr):
                    lhs = lvl.act[w].apply(D.level_action(c, basis[i], rbasis[j]))
                    rhs = D.level_action(c, lvl.act[w].col(i), ring.act[w].col(j))
                    if not lvl.ab.elts_equal(lhs, rhs):
                        ok = False
        record(("level-module", c), ok)

    for (s, t) in D.strict_pairs():
        P = D.pairs[(s, t)]
        down = D.down[(s, t)]
        upm = D.up[(s, t)]
        lvl_t = D.levels[t]
        Wt = lat.weyl[t]
        # well-definedness of down on coinvariants: kills (act - 1) columns
        ok = True
        fd = ModuleMap(P.F_ab, lvl_t.ab, down)
        if not fd.well_defined():
            ok = False
        record(("down-defined", s, t), ok)
        fu = ModuleMap(lvl_t.ab, P.G_ab, upm)
        record(("up-defined", s, t), fu.well_defined())
        # equivariance
        ok = True
        for w in range(Wt.order):
            d = (down @ P.F_act[w]) - (lvl_t.act[w] @ down)
            if not all(lvl_t.ab.is_zero_elt(d.col(j)) for j in range(d.cols)):
                ok = False
        record(("down-equivariant", s, t), ok)
        ok = True
        for w in range(Wt.order):
            d = (upm @ lvl_t.act[w]) - (P.G_act[w] @ upm)
            if not all(P.G_ab.is_zero_elt(d.col(j)) for j in range(d.cols)):
                ok = False
        record(("up-equivariant", s, t), ok)
        # ring linearity through the transition maps
        rt = D.rings[t]
        rs = D.rings[s]
        nrt = rt.ab.ngens
        ok_down = True
        ok_up = True
        for kk in range(P.nhom):
            rho = D.ring_maps[(s, t)][kk]
            for i in range(P.n):
                raw = [0] * P.raw
                raw[P.raw_index(i, kk)] = 1
                for j in range(nrt):
                    ej = [1 if x == j else 0 for x in range(nrt)]
                    # ((m (x) f) . r) via rho_f on the level-s module
                    acted = D.level_action(s, [1 if x == i else 0 for x in range(P.n)],
                                           rho.col(j))
                    raw2 = [0] * P.raw
                    for i2 in range(P.n):
                        raw2[P.raw_index(i2, kk)] = acted[i2]
                    lhs = down.apply(raw2)
                    rhs = D.level_action(t, down.apply(raw), ej)
                    if not lvl_t.ab.elts_equal(lhs, rhs):
                        ok_down = False
        # up linearity: up(m.r)(f) = up(m)(f) . rho_f(r)
        incl = P.G_incl.matrix
        for j in range(lvl_t.ab.ngens):
            ej = [1 if x == j else 0 for x in range(lvl_t.ab.ngens)]
            for jr in range(nrt):
                er = [1 if x == jr else 0 for x in range(nrt)]
                lhs_raw = incl.apply(upm.apply(D.level_action(t, ej, er)))
                base_raw = incl.apply(upm.apply(ej))
                rhs_raw = [0] * P.raw
                for kk in range(P.nhom):
                    rho = D.ring_maps[(s, t)][kk]
                    mvec = [base_raw[P.raw_index(i2, kk)] for i2 in range(P.n)]
                    acted = D.level_action(s, mvec, rho.col(jr))
                    for i2 in range(P.n):
                        rhs_raw[P.raw_index(i2, kk)] = acted[i2]
                diff = [a - b for a, b in zip(lhs_raw, rhs_raw)]
                if not P._raw_ab.is_zero_elt(diff):
                    ok_up = False
        record(("down-linear", s, t), ok_down)
        record(("up-linear", s, t), ok_up)
        # trace triangle (the double-coset formula)
        lhs = (P.G_incl.matrix @ upm @ down)
        rhs = P.G_incl.matrix @ P.trace
        d = lhs - rhs
        record(("triangle", s, t),
               all(P._raw_ab.is_zero_elt(d.col(j)) for j in range(d.cols)))

    # composition squares on strict triples
    for (c0, c1) in D.strict_pairs():
        for (c1b, c2) in D.strict_pairs():
            if c1b != c1 or (c0, c2) not in D.pairs:
                continue
            P01 = D.pairs[(c0, c1)]
            P12 = D.pairs[(c1, c2)]
            P02 = D.pairs[(c0, c2)]
            ok_tr = True
            ok_res = True
            lvl2 = D.levels[c2]
            for k01 in range(P01.nhom):
                f01 = P01.hom[k01]
                for k12 in range(P12.nhom):
                    f12 = P12.hom[k12]
                    comp = lat.compose_gmaps(f01, f12)
                    k02 = P02.hom_index[comp.coset]
                    for i in range(P01.n):
                        # way 1: down01 then down12
                        raw01 = [0] * P01.raw
                        raw01[P01.raw_index(i, k01)] = 1
                        mid = D.down[(c0, c1)].apply(raw01)
                        raw12 = [0] * P12.raw
                        for a in range(P12.n):
                            raw12[P12.raw_index(a, k12)] = mid[a]
                        way1 = D.down[(c1, c2)].apply(raw12)
                        # way 2: collapse then down02
                        raw02 = [0] * P02.raw
                        raw02[P02.raw_index(i, k02)] = 1
                        way2 = D.down[(c0, c2)].apply(raw02)
                        if not lvl2.ab.elts_equal(way1, way2):
                            ok_tr = False
            # restriction square
            incl01 = P01.G_incl.matrix
            incl12 = P12.G_incl.matrix
            incl02 = P02.G_incl.matrix
            for j in range(lvl2.ab.ngens):
                ej = [1 if x == j else 0 for x in range(lvl2.ab.ngens)]
                mid_raw = incl12.apply(D.up[(c1, c2)].apply(ej))   # in raw(1,2)
                targ_raw = incl02.apply(D.up[(c0, c2)].apply(ej))  # in raw(0,2)
                for k01 in range(P01.nhom):
                    f01 = P01.hom[k01]
                    for k12 in range(P12.nhom):
                        f12 = P12.hom[k12]
                        comp = lat.compose_gmaps(f01, f12)
                        k02 = P02.hom_index[comp.coset]
                        mvec = [mid_raw[P12.raw_index(a, k12)] for a in range(P12.n)]
                        inner = incl01.apply(D.up[(c0, c1)].apply(mvec))
                        lvec = [inner[P01.raw_index(i, k01)] for i in range(P01.n)]
                        rvec = [targ_raw[P02.raw_index(i, k02)] for i in range(P01.n)]
                        if not D.levels[c0].ab.elts_equal(lvec, rvec):
                            ok_res = False
            record(("square-tr", c0, c1, c2), ok_tr)
            record(("square-res", c0, c1, c2), ok_res)

    return {"checks": checks, "pass": all(checks.values())}


def to_phi_module(R: GreenFunctor, s: Section, M: GreenModule, phis=None) -> PhiModuleData:
    """Unfold a module over a split Green functor into Phi-module data."""
    lat = R.lattice
    if phis is None:
        phis = [phi_ring(R, c) for c in range(lat.nclasses)]
    errs = verify_section(R, phis, s)
    if errs:
        raise ValueError("section fails verification: %r" % errs[:3])
    levels = {c: M.mackey.levels[c] for c in range(lat.nclasses)}
    level_act = {}
    for c in range(lat.nclasses):
        n = M.mackey.level_rank(c)
        nphi = phis[c].ab.ngens
        table = []
        for i in range(n):
            ei = [1 if x == i else 0 for x in range(n)]
            row = []
            for j in range(nphi):
                row.append(M.action(c, ei, s.mats[c].col(j)))
            table.append(row)
        level_act[c] = table
    pairs = pair_spaces(lat, levels)
    down, up, ring_maps = {}, {}, {}
    for (a, b) in pairs:
        P = pairs[(a, b)]
        mat = [[0] * P.raw for _ in range(M.mackey.level_rank(b))]
        for kk in range(P.nhom):
            f = P.hom[kk]
            trm = M.mackey.tr_eval(f)
            for i in range(P.n):
                col = trm.col(i)
                for r in range(len(col)):
                    mat[r][P.raw_index(i, kk)] = col[r]
        down[(a, b)] = IntMatrix(mat, M.mackey.level_rank(b), P.raw)
        rawmat = [[0] * M.mackey.level_rank(b) for _ in range(P.raw)]
        for kk in range(P.nhom):
            f = P.hom[kk]
            resm = M.mackey.res_eval(f)
            for j in range(M.mackey.level_rank(b)):
                col = resm.col(j)
                for i in range(P.n):
                    rawmat[P.raw_index(i, kk)][j] = col[i]
        raw_up = IntMatrix(rawmat, P.raw, M.mackey.level_rank(b))
        cor = P.corestrict(raw_up)
        if cor is None:
            raise AssertionError("restriction family is not invariant")
        up[(a, b)] = cor
        ring_maps[(a, b)] = []
        for kk in range(P.nhom):
            f = P.hom[kk]
            ring_maps[(a, b)].append(R.mackey.res_eval(f) @ s.mats[b])
    return PhiModuleData(lat, levels, {c: phis[c] for c in range(lat.nclasses)},
                         level_act, pairs, down, up, ring_maps)


# -- F / G / xi and MacPherson-Vilonen objects -----------------------------------------


def F_functor(lattice, levels, t):
    """Direct sum over [s] > [t] of (levels[s] (x) Hom(s,t))_{Aut(s)}.

    Returns (GModule over Weyl(t), list of (s, PairSpace, offset)).
    """
    parts = []
    offset = 0
    mods = []
    for s in range(lattice.nclasses):
        if s != t and lattice.strictly_subconjugate(s, t):
            P = PairSpace(lattice, levels[s], s, t)
            parts.append((s, P, offset))
            offset += P.F_ab.ngens
            mods.append(P)
    W = lattice.weyl[t]
    if not parts:
        return GModule(FGAb(0), W, [IntMatrix.zeros(0, 0)] * W.order), parts
    ab = FGAb(offset, block_diag([P.F_ab.rels for (_, P, _) in parts]))
    act = [block_diag([P.F_act[w] for (_, P, _) in parts]) for w in range(W.order)]
    return GModule(ab, W, act), parts


def G_functor(lattice, levels, t):
    """Product over [s] > [t] of (levels[s]^{Hom(s,t)})^{Aut(s)}."""
    parts = []
    offset = 0
    for s in range(lattice.nclasses):
        if s != t and lattice.strictly_subconjugate(s, t):
            P = PairSpace(lattice, levels[s], s, t)
            parts.append((s, P, offset))
            offset += P.G_ab.ngens
    W = lattice.weyl[t]
    if not parts:
        return GModule(FGAb(0), W, [IntMatrix.zeros(0, 0)] * W.order), parts
    ab = FGAb(offset, block_diag([P.G_ab.rels for (_, P, _) in parts]))
    act = [block_diag([P.G_act[w] for (_, P, _) in parts]) for w in range(W.order)]
    return GModule(ab, W, act), parts


def xi_map(lattice, levels, t):
    """The trace transformation F(t) -> G(t) assembled blockwise."""
    Fm, fparts = F_functor(lattice, levels, t)
    Gm, gparts = G_functor(lattice, levels, t)
    blocks = [P.trace for (_, P, _) in fparts]
    mat = block_diag(blocks) if blocks else IntMatrix.zeros(0, 0)
    return Fm, Gm, ModuleMap(Fm.ab, Gm.ab, mat)


class MVObject:
    """U-part, Z-part and a factorization F(U) -> Z -> G(U) of xi."""

    def __init__(self, Z: FGAb, a: IntMatrix, b: IntMatrix):
        self.Z = Z
        self.a = a
        self.b = b


def mv_check(o: MVObject, Fm: GModule, Gm: GModule, xi: ModuleMap) -> bool:
    if not ModuleMap(Fm.ab, o.Z, o.a).well_defined():
        return False
    if not ModuleMap(o.Z, Gm.ab, o.b).well_defined():
        return False
    d = (o.b @ o.a) - xi.matrix
    return all(Gm.ab.is_zero_elt(d.col(j)) for j in range(d.cols))


def mv_image_object(Fm: GModule, Gm: GModule, xi: ModuleMap) -> MVObject:
    """The epi-mono factorization of xi through its image."""
    im_ab, incl = image(xi)
    # express xi through the image: solve incl . a = xi
    comb = incl.matrix.hstack(Gm.ab.rels) if Gm.ab.rels.cols else incl.matrix
    a = LatticeSolver(comb).solve_matrix(xi.matrix)
    if a is None:
        raise AssertionError("xi does not factor through its image")
    a = IntMatrix([row[:] for row in a.data[:im_ab.ngens]], im_ab.ngens, xi.matrix.cols)
    return MVObject(im_ab, a, incl.matrix)


# -- Morita ---------------------------------------------------------------------------


class EndModule:
    """A right End(J)-module with a compatible group action."""

    def __init__(self, module: GModule, units, rank):
        self.module = module
        self.units = units  # units[a][b] = matrix of the right action of E_ab
        self.rank = rank


def end_ring(J: GModule) -> LevelRing:
    """End(J) for free J, with the conjugation action of J's group."""
    r = J.ab.ngens
    n = r * r

    def idx(a, b):
        return a * r + b

    mul = [[None] * n for _ in range(n)]
    for a in range(r):
        for b in range(r):
            for c in range(r):
                for d in range(r):
                    vec = [0] * n
                    if b == c:
                        vec[idx(a, d)] = 1
                    mul[idx(a, b)][idx(c, d)] = vec
    unit = [0] * n
    for a in range(r):
        unit[idx(a, a)] = 1
    act = []
    from .zmod import invert_unimodular
    for g in range(J.group.order):
        A = J.act[g]
        Ainv = invert_unimodular(A)
        mat = [[0] * n for _ in range(n)]
        # E |-> A E A^-1; column (c,d) of the big matrix
        for c in range(r):
            for d in range(r):
                E = IntMatrix([[1 if (i == c and j == d) else 0 for j in range(r)]
                               for i in range(r)])
                out = A @ E @ Ainv
                for a in range(r):
                    for b in range(r):
                        mat[idx(a, b)][idx(c, d)] = out.data[a][b]
        act.append(IntMatrix(mat, n, n))
    return LevelRing(FGAb(n), J.group, act, mul, unit)


def morita_from_module(M: GModule, J: GModule) -> EndModule:
    """M (x) J* with the diagonal action and right End(J)-action."""
    if not J.ab.is_free():
        raise ValueError("torsion J rejected")
    from .zmod import dual
    Js = dual(J)
    r = J.ab.ngens
    n = M.ab.ngens
    ngens = n * r

    def idx(i, k):
        return k * n + i

    rels = block_diag([M.ab.rels] * r) if r else IntMatrix.zeros(0, 0)
    ab = FGAb(ngens, rels)
    act = []
    for g in range(M.group.order):
        A, B = M.act[g], Js.act[g]
        mat = [[0] * ngens for _ in range(ngens)]
        for k in range(r):
            for k2 in range(r):
                v = B.data[k2][k]
                if not v:
                    continue
                for i in range(n):
                    for i2 in range(n):
                        w = A.data[i2][i]
                        if w:
                            mat[idx(i2, k2)][idx(i, k)] = v * w
        act.append(IntMatrix(mat, ngens, ngens))
    units = [[None] * r for _ in range(r)]
    for a in range(r):
        for b in range(r):
            # (m (x) e_k^*) . E_ab = delta_{ka} m (x) e_b^*
            mat = [[0] * ngens for _ in range(ngens)]
            for i in range(n):
                mat[idx(i, b)][idx(i, a)] = 1
            units[a][b] = IntMatrix(mat, ngens, ngens)
    return EndModule(GModule(ab, M.group, act), units, r)


def morita_to_module(N: EndModule, J: GModule) -> GModule:
    """N (x)_{End(J)} J with the diagonal action."""
    if not J.ab.is_free():
        raise ValueError("torsion J rejected")
    from .zmod import tensor_over_endring
    ab, gi = tensor_over_endring(N.module.ab, N.units, N.rank)
    n = N.module.ab.ngens
    r = N.rank
    act = []
    for g in range(N.module.group.order):
        A, B = N.module.act[g], J.act[g]
        mat = [[0] * ab.ngens for _ in range(ab.ngens)]
        for m in range(r):
            for m2 in range(r):
                v = B.data[m2][m]
                if not v:
                    continue
                for i in range(n):
                    for i2 in range(n):
                        w = A.data[i2][i]
                        if w:
                            mat[gi(i2, m2)][gi(i, m)] += v * w
        act.append(IntMatrix(mat, ab.ngens, ab.ngens))
    out = GModule(ab, N.module.group, act)
    return out
