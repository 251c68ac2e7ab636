"""Dimension functions, jump sets, and twisted Mackey functor presentations.

The cyclic-group objects here are small diagrams of abelian groups with
designated operators:

* ``TwMackCp``:  M_top, a C_p-module M_bot, maps R: top -> bot, T: bot -> top
  subject to three relations (norm kills T, norm kills the image of R, and
  the double-coset identity R T = 1 - gamma).
* ``TwMackC4``:  three levels with two restriction/transfer pairs and nine
  relations, checked literally as matrix identities.  The middle level's
  operator "gamma" is stored as an arbitrary integer matrix so that every
  relation, including the two involving gamma^2, is a real constraint.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .grp import GSet, SubgroupLattice, cyclic_group
from .zmod import (FGAb, GModule, IntMatrix, ModuleMap, kernel, cokernel)


# -- dimension functions -------------------------------------------------------


class DimensionFunction:
    """nu(n, [H]) rule; sl and reg are floor(n/|H|) and ceil(n/|H|)."""

    def __init__(self, name, rule=None, table=None):
        self.name = name
        self._rule = rule
        self._table = table  # {(n, class): value} for custom functions

    def value(self, n, c, lattice):
        if self._table is not None:
            return self._table[(n, c)]
        return self._rule(n, len(lattice.rep(c)))

    @staticmethod
    def slice():
        return DimensionFunction("sl", rule=lambda n, h: n // h)

    @staticmethod
    def regular():
        return DimensionFunction("reg", rule=lambda n, h: -((-n) // h))

    @staticmethod
    def custom(name, table):
        return DimensionFunction(name, table=table)


def nu_slice(n, order):
    return n // order


def nu_regular(n, order):
    return -((-n) // order)


def validate_dimension_function(nu, lattice, window):
    """Monotonicity, step <= 1, and jump (surjectivity) checks on a window.

    Surjectivity on Z cannot be certified from a finite window; the check
    scans the window extended by |G| on each side and requires at least one
    jump per class there (the extension is returned as `slack`).
    """
    a, b = window
    slack = lattice.group.order
    errs = []
    for c in range(lattice.nclasses):
        prev = None
        jumped = False
        for n in range(a - slack, b + slack + 1):
            v = nu.value(n, c, lattice)
            if prev is not None:
                if v < prev:
                    errs.append(("monotonicity", c, n))
                elif v > prev + 1:
                    errs.append(("step", c, n))
                elif v == prev + 1:
                    jumped = True
            prev = v
        if not jumped:
            errs.append(("surjectivity", c))
    return {"pass": not errs, "errors": errs, "slack": slack}


@dataclass
class JumpSet:
    n: int
    classes: list
    gset: GSet


def jump_set(nu, n, lattice) -> JumpSet:
    classes = [c for c in range(lattice.nclasses)
               if nu.value(n + 1, c, lattice) > nu.value(n, c, lattice)]
    return JumpSet(n, classes, GSet(lattice, classes))


# -- C_p twisted Mackey functors -------------------------------------------------


@dataclass
class TwMackCp:
    p: int
    top: FGAb
    bot: GModule            # over C_p; act[1] is the action of gamma
    R: IntMatrix            # top -> bot
    T: IntMatrix            # bot -> top

    def gamma(self):
        return self.bot.act[1]

    def norm(self):
        n = self.bot.ab.ngens
        out = IntMatrix.zeros(n, n)
        for g in range(self.p):
            out = out + self.bot.act[g]
        return out


def _zero_mod(ab: FGAb, mat: IntMatrix):
    return all(ab.is_zero_elt(mat.col(j)) for j in range(mat.cols))


def check_twmack_cp(o: TwMackCp):
    """The three relations, each reported separately with witnesses."""
    report = {"structure": [], "relations": {}, "pass": True}
    if not ModuleMap(o.top, o.bot.ab, o.R).well_defined():
        report["structure"].append("R ill-defined")
    if not ModuleMap(o.bot.ab, o.top, o.T).well_defined():
        report["structure"].append("T ill-defined")
    verrs = o.bot.validate()
    if verrs:
        report["structure"].append(("bot module invalid", verrs[:3]))
    if report["structure"]:
        report["pass"] = False
        return report
    N = o.norm()
    eye = IntMatrix.identity(o.bot.ab.ngens)
    checks = {
        "T-norm": (o.T @ N, o.top),                       # T((1+...+g^{p-1})x) = 0
        "norm-R": (N @ o.R, o.bot.ab),                    # (1+...+g^{p-1})R(x) = 0
        "RT": (o.R @ o.T - (eye - o.gamma()), o.bot.ab),  # R(T(x)) = (1-g)x
    }
    for name, (mat, ab) in checks.items():
        ok = _zero_mod(ab, mat)
        report["relations"][name] = ok
        if not ok:
            report["pass"] = False
    return report


def is_local_cp(o: TwMackCp) -> bool:
    """Locality: the restriction R is injective."""
    ker, _ = kernel(ModuleMap(o.top, o.bot.ab, o.R))
    return ker.is_trivial()


def linj_twmack_cp(o: TwMackCp) -> TwMackCp:
    """Quotient the top level by ker(R); re-verifies the relations."""
    ker, incl = kernel(ModuleMap(o.top, o.bot.ab, o.R))
    extra = incl.matrix
    rels = o.top.rels.hstack(extra) if extra.cols else o.top.rels
    new_top = FGAb(o.top.ngens, rels)
    out = TwMackCp(o.p, new_top, o.bot, o.R, o.T)
    rep = check_twmack_cp(out)
    if not rep["pass"]:
        raise AssertionError("linj broke the C_p relations: %r" % rep)
    if not is_local_cp(out):
        raise AssertionError("linj output is not local")
    return out


def coker_R(o: TwMackCp):
    """Cokernel of R with its projection from the bottom level."""
    return cokernel(ModuleMap(o.top, o.bot.ab, o.R))


# -- C_4 twisted Mackey functors -------------------------------------------------


@dataclass
class TwMackC4:
    m4: FGAb                # level C4/C4
    m2: FGAb                # level C4/C2
    gamma2: IntMatrix       # the designated operator on m2
    m1: GModule             # level C4/e, a C_4-module; act[1] = gamma
    R42: IntMatrix          # m4 -> m2
    T24: IntMatrix          # m2 -> m4
    R21: IntMatrix          # m2 -> m1
    T12: IntMatrix          # m1 -> m2

    def gamma1(self):
        return self.m1.act[1]

    def norm1(self):
        n = self.m1.ab.ngens
        out = IntMatrix.zeros(n, n)
        for g in range(4):
            out = out + self.m1.act[g]
        return out


C4_RELATIONS = ("gamma-res-1", "gamma-res-2", "gamma-res-norm",
                "gamma-tr-1", "gamma-tr-2", "gamma-tr-norm",
                "RT-e", "RT-C2", "RT-long")


def check_twmack_c4(o: TwMackC4):
    """All nine relations of the C_4 presentation, individually reported."""
    report = {"structure": [], "relations": {}, "pass": True}
    for name, f in (("R42", ModuleMap(o.m4, o.m2, o.R42)),
                    ("T24", ModuleMap(o.m2, o.m4, o.T24)),
                    ("R21", ModuleMap(o.m2, o.m1.ab, o.R21)),
                    ("T12", ModuleMap(o.m1.ab, o.m2, o.T12)),
                    ("gamma2", ModuleMap(o.m2, o.m2, o.gamma2))):
        if not f.well_defined():
            report["structure"].append("%s ill-defined" % name)
    verrs = o.m1.validate()
    if verrs:
        report["structure"].append(("m1 module invalid", verrs[:3]))
    if report["structure"]:
        report["pass"] = False
        return report
    g1 = o.gamma1()
    g2 = o.gamma2
    e1 = IntMatrix.identity(o.m1.ab.ngens)
    e2 = IntMatrix.identity(o.m2.ngens)
    N1 = o.norm1()
    checks = {
        # group action and restrictions
        "gamma-res-1": ((e1 + g1 @ g1) @ o.R21, o.m1.ab),
        "gamma-res-2": ((e2 - g2 @ g2) @ o.R42, o.m2),
        "gamma-res-norm": (N1 @ o.R21 @ o.R42, o.m1.ab),
        # group action and transfers
        "gamma-tr-1": (o.T12 @ (e1 + g1 @ g1), o.m2),
        "gamma-tr-2": (o.T24 @ (e2 - g2 @ g2), o.m4),
        "gamma-tr-norm": (o.T24 @ o.T12 @ N1, o.m4),
        # double coset formulae
        "RT-e": (o.R21 @ o.T12 - (e1 - g1), o.m1.ab),
        "RT-C2": (o.R42 @ o.T24 - (e2 + g2), o.m2),
        "RT-long": (o.R21 @ o.R42 @ o.T24 @ o.T12 - (e1 - g1), o.m1.ab),
    }
    for name in C4_RELATIONS:
        mat, ab = checks[name]
        ok = _zero_mod(ab, mat)
        report["relations"][name] = ok
        if not ok:
            report["pass"] = False
    return report


def is_local_c4(o: TwMackC4) -> bool:
    """Locality: (R42, R21 o R42) jointly injective on the top level."""
    stacked = o.R42.vstack(o.R21 @ o.R42)
    from .zmod import block_diag
    big = FGAb(stacked.rows, block_diag([o.m2.rels, o.m1.ab.rels]))
    ker, _ = kernel(ModuleMap(o.m4, big, stacked))
    return ker.is_trivial()


def linj_twmack_c4(o: TwMackC4) -> TwMackC4:
    stacked = o.R42.vstack(o.R21 @ o.R42)
    from .zmod import block_diag
    big = FGAb(stacked.rows, block_diag([o.m2.rels, o.m1.ab.rels]))
    ker, incl = kernel(ModuleMap(o.m4, big, stacked))
    extra = incl.matrix
    rels = o.m4.rels.hstack(extra) if extra.cols else o.m4.rels
    out = TwMackC4(FGAb(o.m4.ngens, rels), o.m2, o.gamma2, o.m1,
                   o.R42, o.T24, o.R21, o.T12)
    rep = check_twmack_c4(out)
    if not rep["pass"]:
        raise AssertionError("linj broke the C_4 relations: %r" % rep)
    if not is_local_c4(out):
        raise AssertionError("linj output is not local")
    return out


def trivial_twmack_cp(p):
    """(Z, Z trivial, R = T = 0): passes since torsion-free levels force it."""
    C = cyclic_group(p)
    bot = GModule(FGAb(1), C, [IntMatrix.identity(1)] * p)
    return TwMackCp(p, FGAb(1), bot, IntMatrix.zeros(1, 1), IntMatrix.zeros(1, 1))


def trivial_twmack_c4():
    """All-zero maps on torsion-free levels.

    The double-coset identities force (1 - gamma) = 0 on the bottom level and
    (1 + gamma) = 0 on the middle one, so the middle operator is -1.
    """
    C = cyclic_group(4)
    m1 = GModule(FGAb(1), C, [IntMatrix.identity(1)] * 4)
    z = IntMatrix.zeros(1, 1)
    return TwMackC4(FGAb(1), FGAb(1), IntMatrix([[-1]]), m1, z, z, z, z)
