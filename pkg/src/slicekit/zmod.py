"""Exact linear algebra over the integers.

Everything here is arbitrary-precision: matrices are lists of Python ints,
and all subgroup/quotient computations are done through Smith normal form,
never numerically.  The main players are

* ``IntMatrix``            -- dense integer matrix
* ``smith_normal_form``    -- U @ A @ V == D with unimodular U, V
* ``FGAb``                 -- finitely generated abelian group by presentation
* ``ModuleMap``            -- map of presentations, checked exactly
* ``GModule``              -- FGAb with a finite group action
* (co)invariants, permutation tensors, the trace map, duals, and a
  bounded equivariant isomorphism search.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass


class IntMatrix:
    """A rows x cols matrix of Python ints."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, data, rows=None, cols=None):
        if rows is not None:
            self.rows = rows
            self.cols = cols
            self.data = data
        else:
            self.data = [list(map(int, row)) for row in data]
            self.rows = len(self.data)
            self.cols = len(self.data[0]) if self.data else 0
            for row in self.data:
                if len(row) != self.cols:
                    raise ValueError("ragged matrix")

    @staticmethod
    def identity(n):
        return IntMatrix([[1 if i == j else 0 for j in range(n)] for i in range(n)], n, n)

    @staticmethod
    def zeros(r, c):
        return IntMatrix([[0] * c for _ in range(r)], r, c)

    @staticmethod
    def from_cols(cols, nrows):
        return IntMatrix([[col[i] for col in cols] for i in range(nrows)], nrows, len(cols))

    def col(self, j):
        return [self.data[i][j] for i in range(self.rows)]

    def columns(self):
        return [self.col(j) for j in range(self.cols)]

    def copy(self):
        return IntMatrix([row[:] for row in self.data], self.rows, self.cols)

    def transpose(self):
        return IntMatrix([[self.data[i][j] for i in range(self.rows)] for j in range(self.cols)],
                         self.cols, self.rows)

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise ValueError("shape mismatch %sx%s @ %sx%s" % (self.rows, self.cols, other.rows, other.cols))
        bt = other.transpose().data
        out = [[sum(a * b for a, b in zip(row, col)) for col in bt] for row in self.data]
        return IntMatrix(out, self.rows, other.cols)

    def apply(self, vec):
        if self.cols != len(vec):
            raise ValueError("shape mismatch in apply")
        return [sum(a * b for a, b in zip(row, vec)) for row in self.data]

    def __add__(self, other):
        return IntMatrix([[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.data, other.data)],
                         self.rows, self.cols)

    def __sub__(self, other):
        return IntMatrix([[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.data, other.data)],
                         self.rows, self.cols)

    def __neg__(self):
        return IntMatrix([[-a for a in row] for row in self.data], self.rows, self.cols)

    def scale(self, k):
        return IntMatrix([[k * a for a in row] for row in self.data], self.rows, self.cols)

    def __eq__(self, other):
        return (isinstance(other, IntMatrix) and self.rows == other.rows
                and self.cols == other.cols and self.data == other.data)

    def __hash__(self):
        return hash((self.rows, self.cols, tuple(tuple(r) for r in self.data)))

    def is_zero(self):
        return all(a == 0 for row in self.data for a in row)

    def hstack(self, other):
        if self.rows != other.rows:
            raise ValueError("hstack: row mismatch")
        return IntMatrix([r1 + r2 for r1, r2 in zip(self.data, other.data)],
                         self.rows, self.cols + other.cols)

    def vstack(self, other):
        if self.cols != other.cols:
            raise ValueError("vstack: col mismatch")
        return IntMatrix([row[:] for row in self.data] + [row[:] for row in other.data],
                         self.rows + other.rows, self.cols)

    def tolist(self):
        return [row[:] for row in self.data]

    def __repr__(self):
        return "IntMatrix(%r)" % (self.data,)


def hstack_all(mats):
    out = mats[0]
    for m in mats[1:]:
        out = out.hstack(m)
    return out


def vstack_all(mats):
    out = mats[0]
    for m in mats[1:]:
        out = out.vstack(m)
    return out


def block_diag(mats):
    r = sum(m.rows for m in mats)
    c = sum(m.cols for m in mats)
    out = [[0] * c for _ in range(r)]
    i0 = j0 = 0
    for m in mats:
        for i in range(m.rows):
            out[i0 + i][j0:j0 + m.cols] = m.data[i][:]
        i0 += m.rows
        j0 += m.cols
    return IntMatrix(out, r, c)


@dataclass
class SmithForm:
    D: IntMatrix
    U: IntMatrix | None
    V: IntMatrix | None
    diag: list
    rank: int


def smith_normal_form(A, track_u=True, track_v=True):
    """Smith normal form with deterministic pivoting.

    Returns SmithForm with U @ A @ V == D, D diagonal with d1 | d2 | ...
    Pivot choice: smallest nonzero absolute value, ties by lowest (row, col).
    """
    r, c = A.rows, A.cols
    M = [row[:] for row in A.data]
    U = [[1 if i == j else 0 for j in range(r)] for i in range(r)] if track_u else None
    V = [[1 if i == j else 0 for j in range(c)] for i in range(c)] if track_v else None

    def swap_rows(i, j):
        if i != j:
            M[i], M[j] = M[j], M[i]
            if U is not None:
                U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        if i != j:
            for row in M:
                row[i], row[j] = row[j], row[i]
            if V is not None:
                for row in V:
                    row[i], row[j] = row[j], row[i]

    def addmul_row(dst, src, q):
        # row[dst] += q * row[src]
        if q:
            Md, Ms = M[dst], M[src]
            for j in range(c):
                Md[j] += q * Ms[j]
            if U is not None:
                Ud, Us = U[dst], U[src]
                for j in range(r):
                    Ud[j] += q * Us[j]

    def addmul_col(dst, src, q):
        if q:
            for row in M:
                row[dst] += q * row[src]
            if V is not None:
                for row in V:
                    row[dst] += q * row[src]

    def negate_row(i):
        M[i] = [-x for x in M[i]]
        if U is not None:
            U[i] = [-x for x in U[i]]

    t = 0
    n = min(r, c)
    while t < n:
        # deterministic pivot: min(|entry|, row, col) over the trailing block
        piv = None
        for i in range(t, r):
            row = M[i]
            for j in range(t, c):
                v = row[j]
                if v:
                    key = (abs(v), i, j)
                    if piv is None or key < piv[0]:
                        piv = (key, i, j)
        if piv is None:
            break
        _, pi, pj = piv
        swap_rows(t, pi)
        swap_cols(t, pj)
        if M[t][t] < 0:
            negate_row(t)
        while True:
            # clear column t
            dirty = False
            for i in range(t + 1, r):
                v = M[i][t]
                if v:
                    q = v // M[t][t]
                    addmul_row(i, t, -q)
                    if M[i][t]:
                        # remainder is smaller than the pivot: promote it
                        swap_rows(t, i)
                        if M[t][t] < 0:
                            negate_row(t)
                        dirty = True
            if dirty:
                continue
            # clear row t
            for j in range(t + 1, c):
                v = M[t][j]
                if v:
                    q = v // M[t][t]
                    addmul_col(j, t, -q)
                    if M[t][j]:
                        swap_cols(t, j)
                        dirty = True
            if dirty:
                continue
            # enforce divisibility of the trailing block by the pivot
            d = M[t][t]
            bad = None
            for i in range(t + 1, r):
                row = M[i]
                for j in range(t + 1, c):
                    if row[j] % d:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            addmul_row(t, bad, 1)
        t += 1

    diag = []
    for i in range(n):
        diag.append(abs(M[i][i]))
        if M[i][i] < 0:
            negate_row(i)
    rank = sum(1 for d in diag if d)
    return SmithForm(
        D=IntMatrix(M, r, c),
        U=IntMatrix(U, r, r) if U is not None else None,
        V=IntMatrix(V, c, c) if V is not None else None,
        diag=diag,
        rank=rank,
    )


class LatticeSolver:
    """Solve A x = b over the integers, reusing one Smith normal form."""

    def __init__(self, A):
        self.A = A
        self.snf = smith_normal_form(A)

    def solve(self, b):
        """An integer solution x of A x = b, or None."""
        sf = self.snf
        c = sf.U.apply(b)
        y = [0] * self.A.cols
        n = min(self.A.rows, self.A.cols)
        for i in range(self.A.rows):
            d = sf.diag[i] if i < n else 0
            if d:
                if c[i] % d:
                    return None
                if i < self.A.cols:
                    y[i] = c[i] // d
            elif c[i]:
                return None
        return sf.V.apply(y)

    def solve_matrix(self, B):
        """Integer X with A X = B, or None; one pass for all columns."""
        sf = self.snf
        C = sf.U @ B
        n = min(self.A.rows, self.A.cols)
        Y = [[0] * B.cols for _ in range(self.A.cols)]
        for i in range(self.A.rows):
            d = sf.diag[i] if i < n else 0
            row = C.data[i]
            if d:
                for j in range(B.cols):
                    if row[j] % d:
                        return None
                if i < self.A.cols:
                    Y[i] = [row[j] // d for j in range(B.cols)]
            else:
                if any(row):
                    return None
        return sf.V @ IntMatrix(Y, self.A.cols, B.cols)

    def kernel_basis(self):
        """Columns spanning ker(A) as a sublattice of Z^cols."""
        sf = self.snf
        out = []
        n = min(self.A.rows, self.A.cols)
        for j in range(self.A.cols):
            if j >= n or sf.diag[j] == 0:
                out.append(sf.V.col(j))
        return out


def kernel_basis(A):
    return LatticeSolver(A).kernel_basis()


def lattice_member(lattice: IntMatrix, v) -> bool:
    """Is v in the column lattice of `lattice`?"""
    if lattice.cols == 0:
        return all(x == 0 for x in v)
    return LatticeSolver(lattice).solve(v) is not None


def column_lattice_basis(A):
    """Canonical (column-Hermite) basis of the column lattice of A.

    Returns an IntMatrix whose columns are a basis; deterministic, so two
    equal lattices produce identical output.
    """
    cols = [col for col in A.columns() if any(col)]
    if not cols:
        return IntMatrix.zeros(A.rows, 0)
    work = [c[:] for c in cols]
    basis = []
    row = 0
    nrows = A.rows
    while row < nrows and work:
        live = [c for c in work if any(c[row:])]
        if not live:
            break
        # reduce at this row by gcd column operations
        while True:
            nz = [c for c in work if c[row]]
            if len(nz) <= 1:
                break
            nz.sort(key=lambda c: abs(c[row]))
            p = nz[0]
            for c in nz[1:]:
                q = c[row] // p[row]
                for i in range(nrows):
                    c[i] -= q * p[i]
        pivot_cols = [c for c in work if c[row]]
        if pivot_cols:
            p = pivot_cols[0]
            if p[row] < 0:
                for i in range(nrows):
                    p[i] = -p[i]
            basis.append(p)
            work = [c for c in work if c is not p and any(c)]
        row += 1
    # normalize: reduce entries of earlier pivots by later pivot columns
    basis2 = []
    for b in basis:
        basis2.append(b)
    # reduce above-pivot entries for a canonical form
    pivots = []
    for b in basis2:
        lead = next(i for i, x in enumerate(b) if x)
        pivots.append((lead, b))
    pivots.sort(key=lambda t: t[0])
    for idx, (lead, b) in enumerate(pivots):
        for jdx in range(idx):
            lead2, b2 = pivots[jdx]
            q = b2[lead] // b[lead]
            if q:
                for i in range(len(b2)):
                    b2[i] -= q * b[i]
    cols = [b for _, b in pivots]
    return IntMatrix.from_cols(cols, A.rows)


def normalized_invariant_factors(diag):
    """Torsion invariant factors (excluding 1) followed by zeros for the free rank."""
    tor = sorted([d for d in diag if d > 1])
    free = sum(1 for d in diag if d == 0)
    return tor + [0] * free


class FGAb:
    """Finitely generated abelian group: Z^ngens / column lattice of `rels`."""

    __slots__ = ("ngens", "rels", "_inv", "_solver")

    def __init__(self, ngens, rels=None):
        self.ngens = ngens
        if rels is None:
            rels = IntMatrix.zeros(ngens, 0)
        if rels.rows != ngens:
            raise ValueError("relations have %d rows, expected %d" % (rels.rows, ngens))
        self.rels = rels
        self._inv = None
        self._solver = None

    @staticmethod
    def free(n):
        return FGAb(n)

    @staticmethod
    def cyclic(n):
        """Z/n (n = 0 gives Z)."""
        return FGAb(1, IntMatrix([[n]]))

    def solver(self):
        if self._solver is None:
            self._solver = LatticeSolver(self.rels)
        return self._solver

    def invariant_factors(self):
        if self._inv is None:
            ambient = min(self.rels.rows, self.rels.cols)
            sf = smith_normal_form(self.rels, track_u=False, track_v=False)
            diag = sf.diag + [0] * (self.ngens - ambient)
            self._inv = normalized_invariant_factors(diag)
        return self._inv

    def rank(self):
        return sum(1 for d in self.invariant_factors() if d == 0)

    def is_trivial(self):
        return not self.invariant_factors()

    def is_free(self):
        return all(d == 0 for d in self.invariant_factors())

    def order(self):
        """Group order, or None if infinite."""
        inv = self.invariant_factors()
        if any(d == 0 for d in inv):
            return None
        out = 1
        for d in inv:
            out *= d
        return out

    def is_zero_elt(self, v):
        if self.rels.cols == 0:
            return all(x == 0 for x in v)
        return self.solver().solve(v) is not None

    def elts_equal(self, v, w):
        return self.is_zero_elt([a - b for a, b in zip(v, w)])

    def elements(self):
        """All elements as coset representative vectors (finite groups only)."""
        if self.order() is None:
            raise ValueError("infinite group")
        sf = smith_normal_form(self.rels)
        # Z^n / rels = Z^n / U^-1 D V^-1 ... use columns of U^-1: easier to
        # enumerate through the diagonal coordinates.
        # coords y with y_i mod d_i; elements x = Uinv y.
        diag = sf.diag + [0] * (self.ngens - len(sf.diag))
        Uinv = invert_unimodular(sf.U)
        ranges = [range(d if d else 1) for d in diag]
        out = []
        for combo in itertools.product(*ranges):
            out.append(Uinv.apply(list(combo)))
        return out

    def __repr__(self):
        inv = self.invariant_factors()
        if not inv:
            return "FGAb(0)"
        parts = ["Z" if d == 0 else "Z/%d" % d for d in inv]
        return "FGAb(%s)" % " + ".join(parts)


def invert_unimodular(U):
    """Inverse of a unimodular integer matrix."""
    n = U.rows
    sf = smith_normal_form(U)
    if any(d != 1 for d in sf.diag):
        raise ValueError("matrix is not unimodular")
    # U = Usf^-1 D Vsf^-1 = Usf^-1 Vsf^-1, so U^-1 = Vsf Usf
    return sf.V @ sf.U


def fgab_iso(a: FGAb, b: FGAb) -> bool:
    return a.invariant_factors() == b.invariant_factors()


class ModuleMap:
    """A homomorphism between presented groups, given on generators."""

    __slots__ = ("source", "target", "matrix")

    def __init__(self, source, target, matrix):
        self.source = source
        self.target = target
        if matrix.rows != ab_of(target).ngens or matrix.cols != ab_of(source).ngens:
            raise ValueError("map matrix has the wrong shape")
        self.matrix = matrix

    def well_defined(self):
        """Does the matrix carry source relations into target relations?"""
        src, tgt = ab_of(self.source), ab_of(self.target)
        for j in range(src.rels.cols):
            if not tgt.is_zero_elt(self.matrix.apply(src.rels.col(j))):
                return False
        return True

    def compose(self, other):
        """self after other (other: A->B, self: B->C gives A->C)."""
        return ModuleMap(other.source, self.target, self.matrix @ other.matrix)

    def equals(self, other):
        tgt = ab_of(self.target)
        d = self.matrix - other.matrix
        return all(tgt.is_zero_elt(d.col(j)) for j in range(d.cols))

    def is_injective(self):
        ker, _ = kernel(self)
        return ker.is_trivial()

    def is_surjective(self):
        coker, _ = cokernel(self)
        return coker.is_trivial()

    def __repr__(self):
        return "ModuleMap(%r -> %r)" % (self.source, self.target)


def ab_of(x):
    """The underlying FGAb of an FGAb or GModule."""
    return x.ab if isinstance(x, GModule) else x


def kernel(f: ModuleMap):
    """Presentation of ker(f) with its inclusion into the source. Exact."""
    src, tgt = ab_of(f.source), ab_of(f.target)
    combined = f.matrix.hstack(tgt.rels) if tgt.rels.cols else f.matrix
    kb = LatticeSolver(combined).kernel_basis()
    proj = [col[: src.ngens] for col in kb]
    # the kernel lattice always contains the source relations
    proj += src.rels.columns()
    lat = column_lattice_basis(IntMatrix.from_cols(proj, src.ngens)) if proj else IntMatrix.zeros(src.ngens, 0)
    k = lat.cols
    # relators of the kernel: x with lat*x inside the source relation lattice
    if k:
        comb2 = lat.hstack(src.rels) if src.rels.cols else lat
        kb2 = LatticeSolver(comb2).kernel_basis()
        rel_cols = [col[:k] for col in kb2]
        rels = column_lattice_basis(IntMatrix.from_cols(rel_cols, k)) if rel_cols else IntMatrix.zeros(k, 0)
    else:
        rels = IntMatrix.zeros(0, 0)
    ker_ab = FGAb(k, rels)
    incl = ModuleMap(ker_ab, src, lat)
    return ker_ab, incl


def cokernel(f: ModuleMap):
    """Presentation of coker(f) with the projection from the target. Exact."""
    tgt = ab_of(f.target)
    rels = tgt.rels.hstack(f.matrix) if tgt.rels.cols else f.matrix
    cok = FGAb(tgt.ngens, rels)
    proj = ModuleMap(tgt, cok, IntMatrix.identity(tgt.ngens))
    return cok, proj


def image(f: ModuleMap):
    """The image of f as a subgroup of the target, with inclusion."""
    tgt = ab_of(f.target)
    gens = f.matrix.columns() + tgt.rels.columns()
    lat = column_lattice_basis(IntMatrix.from_cols(gens, tgt.ngens)) if gens else IntMatrix.zeros(tgt.ngens, 0)
    k = lat.cols
    if k:
        comb = lat.hstack(tgt.rels) if tgt.rels.cols else lat
        kb = LatticeSolver(comb).kernel_basis()
        rel_cols = [col[:k] for col in kb]
        rels = column_lattice_basis(IntMatrix.from_cols(rel_cols, k)) if rel_cols else IntMatrix.zeros(k, 0)
    else:
        rels = IntMatrix.zeros(0, 0)
    im_ab = FGAb(k, rels)
    return im_ab, ModuleMap(im_ab, tgt, lat)


def induced_map_into_sub(incl: ModuleMap, f: ModuleMap):
    """Given incl: S -> B and f: A -> B with im(f) <= S, the map A -> S."""
    src_ab = ab_of(f.source)
    sub_ab = ab_of(incl.source)
    tgt_ab = ab_of(incl.target)
    combined = incl.matrix.hstack(tgt_ab.rels) if tgt_ab.rels.cols else incl.matrix
    solver = LatticeSolver(combined)
    cols = []
    for j in range(f.matrix.cols):
        sol = solver.solve(f.matrix.col(j))
        if sol is None:
            raise ValueError("image does not lie in the subgroup")
        cols.append(sol[: sub_ab.ngens])
    mat = IntMatrix.from_cols(cols, sub_ab.ngens) if cols else IntMatrix.zeros(sub_ab.ngens, 0)
    return ModuleMap(src_ab if not isinstance(f.source, GModule) else f.source, incl.source, mat)


class GModule:
    """An FGAb with an action of a finite group, one matrix per element."""

    __slots__ = ("ab", "group", "act")

    def __init__(self, ab, group, act):
        self.ab = ab
        self.group = group
        if len(act) != group.order:
            raise ValueError("need one action matrix per group element")
        self.act = act

    @staticmethod
    def trivial(ab, group):
        eye = IntMatrix.identity(ab.ngens)
        return GModule(ab, group, [eye] * group.order)

    def validate(self):
        """Check the action satisfies the group law modulo relations."""
        errs = []
        n = self.ab.ngens
        eye = IntMatrix.identity(n)
        for g, m in enumerate(self.act):
            if m.rows != n or m.cols != n:
                errs.append(("shape", g))
                continue
            for j in range(self.ab.rels.cols):
                if not self.ab.is_zero_elt(m.apply(self.ab.rels.col(j))):
                    errs.append(("relations", g, j))
        d = self.act[self.group.identity] - eye
        if not all(self.ab.is_zero_elt(d.col(j)) for j in range(n)):
            errs.append(("identity",))
        for g in range(self.group.order):
            for h in range(self.group.order):
                lhs = self.act[self.group.mul[g][h]]
                rhs = self.act[g] @ self.act[h]
                dd = lhs - rhs
                if not all(self.ab.is_zero_elt(dd.col(j)) for j in range(n)):
                    errs.append(("law", g, h))
        return errs

    def is_valid(self):
        return not self.validate()

    def __repr__(self):
        return "GModule(%r over %s)" % (self.ab, self.group.name)


def invariants(M: GModule):
    """M^G as a subgroup of M, with inclusion: simultaneous kernel of (g - 1)."""
    n = M.ab.ngens
    eye = IntMatrix.identity(n)
    blocks = [M.act[g] - eye for g in range(M.group.order) if g != M.group.identity]
    if not blocks:
        incl = ModuleMap(M.ab, M.ab, eye)
        return M.ab, incl
    stacked = vstack_all(blocks)
    big_rels = block_diag([M.ab.rels] * len(blocks)) if M.ab.rels.cols else IntMatrix.zeros(stacked.rows, 0)
    big = FGAb(stacked.rows, big_rels)
    f = ModuleMap(M.ab, big, stacked)
    return kernel(f)


def coinvariants(M: GModule):
    """M_G as a quotient of M, with projection: cokernel of all (g - 1)."""
    n = M.ab.ngens
    eye = IntMatrix.identity(n)
    cols = []
    for g in range(M.group.order):
        if g == M.group.identity:
            continue
        d = M.act[g] - eye
        cols.extend(d.columns())
    if not cols:
        return M.ab, ModuleMap(M.ab, M.ab, eye)
    extra = IntMatrix.from_cols(cols, n)
    # cokernel of the stacked (g-1) columns
    rels = M.ab.rels.hstack(extra) if M.ab.rels.cols else extra
    cok = FGAb(n, rels)
    return cok, ModuleMap(M.ab, cok, eye)


def perm_matrix(perm):
    n = len(perm)
    m = [[0] * n for _ in range(n)]
    for src, dst in enumerate(perm):
        m[dst][src] = 1
    return IntMatrix(m, n, n)


def tensor_perm(M: GModule, perms):
    """M (x) Z{S} with the diagonal action; perms[g][s] is the S-action."""
    n = M.ab.ngens
    k = len(perms[0]) if perms else 0
    # generator (i, s) at index s*n + i
    rels = block_diag([M.ab.rels] * k) if k else IntMatrix.zeros(0, 0)
    ab = FGAb(n * k, rels)
    act = []
    for g in range(M.group.order):
        mat = [[0] * (n * k) for _ in range(n * k)]
        Ag = M.act[g]
        pg = perms[g]
        for s in range(k):
            t = pg[s]
            for i in range(n):
                for i2 in range(n):
                    v = Ag.data[i2][i]
                    if v:
                        mat[t * n + i2][s * n + i] = v
        act.append(IntMatrix(mat, n * k, n * k))
    return GModule(ab, M.group, act)


def hom_perm(M: GModule, perms):
    """Maps Z{S} -> M with the conjugation action.

    On the canonical basis this is the same underlying data as tensor_perm;
    only the comparison map (which is the identity on the basis) differs.
    """
    return tensor_perm(M, perms)


def trace_map(M: GModule, perms):
    """The trace (M (x) S)_G -> (M^S)^G, m(x)s |-> sum_h hm(x)hs."""
    big = tensor_perm(M, perms)
    n = big.ab.ngens
    total = IntMatrix.zeros(n, n)
    for g in range(M.group.order):
        total = total + big.act[g]
    coin, proj = coinvariants(big)
    inv, incl = invariants(big)
    f = ModuleMap(big.ab, big.ab, total)
    induced = induced_map_into_sub(incl, f)
    return ModuleMap(coin, inv, induced.matrix)


def dual(M: GModule):
    """J* = Hom(J, Z) with the conjugation action; J must be free."""
    if not M.ab.is_free() or M.ab.rels.cols and not all(
            all(x == 0 for x in M.ab.rels.col(j)) for j in range(M.ab.rels.cols)):
        if not M.ab.is_free():
            raise ValueError("dual of a torsion group rejected")
    act = []
    for g in range(M.group.order):
        ginv = M.group.inv[g]
        act.append(M.act[ginv].transpose())
    return GModule(FGAb(M.ab.ngens), M.group, act)


def tensor_over_endring(N_ab: FGAb, unit_actions, rank):
    """N (x)_{End(J)} J for J free of the given rank.

    `unit_actions[k][l]` is the matrix of the right action of the matrix unit
    E_{kl} on N.  Presentation: generators (a, m) = n_a (x) e_m, with
    relations N.rels (x) e_m and (n_a . E_{kl}) (x) e_m = delta_{lm} n_a (x) e_k.
    Returns (FGAb, gen_index) where gen_index(a, m) gives the flat index.
    """
    n = N_ab.ngens
    ngens = n * rank

    def gi(a, m):
        return m * n + a

    rel_cols = []
    base = block_diag([N_ab.rels] * rank) if rank else IntMatrix.zeros(0, 0)
    rel_cols.extend(base.columns())
    for a in range(n):
        for k in range(rank):
            for l in range(rank):
                act = unit_actions[k][l]
                for m in range(rank):
                    col = [0] * ngens
                    v = act.col(a)
                    for a2 in range(n):
                        col[gi(a2, m)] += v[a2]
                    if l == m:
                        col[gi(a, k)] -= 1
                    if any(col):
                        rel_cols.append(col)
    rels = IntMatrix.from_cols(rel_cols, ngens) if rel_cols else IntMatrix.zeros(ngens, 0)
    return FGAb(ngens, rels), gi


def equivariant_map_lattice(A: GModule, B: GModule, extra_ops=None):
    """Lattice of matrices U with U well-defined and U a_g = b_g U (mod rels).

    Returns (particular, basis) where particular is the zero matrix and basis
    is a list of IntMatrix spanning the solution lattice.  extra_ops, if
    given, is a list of (opA, opB) matrix pairs that U must also intertwine.
    """
    nA, nB = A.ab.ngens, B.ab.ngens
    nU = nA * nB
    relsB = B.ab.rels

    def uidx(i, j):
        # U[i][j], i < nB, j < nA
        return i * nA + j

    rows = []  # each row: coefficients on (vec(U), aux y's); built sparsely
    conds = []  # list of (coeff rows over vec(U), rhs uses relsB columns)

    ops = [(A.act[g], B.act[g]) for g in range(A.group.order)]
    if extra_ops:
        ops = ops + list(extra_ops)

    # Conditions: for each source relator r: U r in lattice(relsB)
    # for each op pair (P, Q), each basis e_j: (U P - Q U) e_j in lattice(relsB)
    cond_vectors = []
    for j in range(A.ab.rels.cols):
        r = A.ab.rels.col(j)
        rowset = []
        for i in range(nB):
            coeffs = {}
            for jj in range(nA):
                if r[jj]:
                    coeffs[uidx(i, jj)] = r[jj]
            rowset.append(coeffs)
        cond_vectors.append(rowset)
    for (P, Q) in ops:
        for j in range(nA):
            pcol = P.col(j)
            rowset = []
            for i in range(nB):
                coeffs = {}
                for jj in range(nA):
                    if pcol[jj]:
                        coeffs[uidx(i, jj)] = coeffs.get(uidx(i, jj), 0) + pcol[jj]
                qrow = Q.data[i]
                for ii in range(nB):
                    if qrow[ii]:
                        coeffs[uidx(ii, j)] = coeffs.get(uidx(ii, j), 0) - qrow[ii]
                rowset.append(coeffs)
            cond_vectors.append(rowset)

    ncond = len(cond_vectors)
    naux = relsB.cols
    width = nU + ncond * naux
    bigrows = []
    for ci, rowset in enumerate(cond_vectors):
        for i in range(nB):
            row = [0] * width
            for k, v in rowset[i].items():
                row[k] = v
            for jj in range(naux):
                row[nU + ci * naux + jj] = -relsB.data[i][jj]
            bigrows.append(row)
    if not bigrows:
        basis_vecs = [[1 if t == s else 0 for t in range(nU)] for s in range(nU)]
    else:
        big = IntMatrix(bigrows, len(bigrows), width)
        kb = LatticeSolver(big).kernel_basis()
        basis_vecs = [col[:nU] for col in kb]
        lat = column_lattice_basis(IntMatrix.from_cols(basis_vecs, nU)) if basis_vecs else IntMatrix.zeros(nU, 0)
        basis_vecs = lat.columns()

    basis = []
    for v in basis_vecs:
        m = [[v[i * nA + j] for j in range(nA)] for i in range(nB)]
        basis.append(IntMatrix(m, nB, nA))
    return basis


def is_iso_map(A: GModule, B: GModule, U: IntMatrix) -> bool:
    f = ModuleMap(A.ab, B.ab, U)
    if not f.well_defined():
        return False
    cok, _ = cokernel(f)
    if not cok.is_trivial():
        return False
    ker, _ = kernel(f)
    return ker.is_trivial()


def _bounded_combos(r, cap):
    """Integer coefficient vectors of length r in growing max-norm shells."""
    yield [0] * r
    count = 1
    radius = 1
    while True:
        rng = range(-radius, radius + 1)
        for combo in itertools.product(rng, repeat=r):
            if max(abs(x) for x in combo) != radius:
                continue
            yield list(combo)
            count += 1
            if count >= cap:
                return
        radius += 1


def gmodule_iso(A: GModule, B: GModule, cap=20000):
    """Bounded search for an equivariant isomorphism.

    Returns "Iso", "NotIso" or "Unknown" (never guesses: "NotIso" only on a
    certificate, i.e. differing invariant factors or an exhausted search
    space of rank zero).
    """
    if A.group.order != B.group.order:
        return "NotIso"
    if A.ab.invariant_factors() != B.ab.invariant_factors():
        return "NotIso"
    basis = equivariant_map_lattice(A, B)
    if not basis:
        return "NotIso" if not A.ab.is_trivial() else "Iso"
    r = len(basis)
    tried = 0
    for combo in _bounded_combos(r, cap):
        if all(c == 0 for c in combo):
            if A.ab.is_trivial() and B.ab.is_trivial():
                return "Iso"
            continue
        U = IntMatrix.zeros(B.ab.ngens, A.ab.ngens)
        for c, mat in zip(combo, basis):
            if c:
                U = U + mat.scale(c)
        tried += 1
        if is_iso_map(A, B, U):
            return "Iso"
        if tried >= cap:
            break
    return "Unknown"
