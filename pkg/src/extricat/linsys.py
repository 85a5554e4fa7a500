"""Block linear systems in several morphism unknowns.

Fill-in problems throughout the package are linear in the unknown morphisms;
this assembles them into one flat system, solves it exactly, and iterates
the affine solution set when an invertibility side condition must be met.
"""

from __future__ import annotations

import numpy as np

from .category import CategoryPresentation, Mor, Obj
from .field import PrimeField


class LinSys:
    """Sum_i M_i @ u_i = rhs equations over named vector unknowns."""

    def __init__(self, field: PrimeField):
        self.field = field
        self.names: list[str] = []
        self.dims: dict[str, int] = {}
        self.rows: list[tuple[list[tuple[str, np.ndarray]], np.ndarray]] = []

    def unknown(self, name: str, dim: int):
        if name in self.dims:
            raise ValueError(f"duplicate unknown {name}")
        self.names.append(name)
        self.dims[name] = int(dim)
        return name

    def eq(self, terms, rhs):
        self.rows.append(([(n, self.field.arr(m)) for n, m in terms], self.field.arr(rhs)))

    def solve(self):
        offs = {}
        off = 0
        for n in self.names:
            offs[n] = off
            off += self.dims[n]
        total = off
        blocks = []
        rhss = []
        for terms, rhs in self.rows:
            nrows = rhs.shape[0]
            row = self.field.zeros(nrows, total)
            for n, m in terms:
                if m.shape != (nrows, self.dims[n]):
                    raise ValueError(f"equation block for {n} has shape {m.shape}, expected {(nrows, self.dims[n])}")
                row[:, offs[n] : offs[n] + self.dims[n]] = (
                    row[:, offs[n] : offs[n] + self.dims[n]] + m
                ) % self.field.p
            blocks.append(row)
            rhss.append(rhs)
        if blocks:
            a = np.concatenate(blocks, axis=0)
            b = np.concatenate(rhss)
        else:
            a = self.field.zeros(0, total)
            b = self.field.zeros(0)
        res = self.field.solve_affine(a, b)
        if res is None:
            return None
        x0, ker = res
        return Solution(self, offs, total, x0, ker)


class Solution:
    """Affine solution set of a LinSys with named extraction."""

    def __init__(self, sys: LinSys, offs, total, x0, ker):
        self.sys = sys
        self.offs = offs
        self.total = total
        self.x0 = x0
        self.ker = ker

    def extract(self, name: str, vec=None):
        vec = self.x0 if vec is None else vec
        o = self.offs[name]
        return vec[o : o + self.sys.dims[name]]

    def points(self, cap: int):
        return self.sys.field.affine_elements(self.x0, self.ker, cap)

    def points_capped(self, budget: int):
        """The particular solution, single kernel steps, then everything if
        the family is small enough; never raises."""
        f = self.sys.field
        k = self.ker.shape[0]
        if k and f.p ** k <= budget:
            yield from f.affine_elements(self.x0, self.ker, budget)
            return
        yield self.x0
        for i in range(k):
            yield (self.x0 + self.ker[i]) % f.p

    @property
    def kernel_dim(self):
        return self.ker.shape[0]


def mor_inverse(cat: CategoryPresentation, e: Mor):
    """A two-sided inverse of e in the presented category, or None."""
    f = cat.field
    sys = LinSys(f)
    sys.unknown("g", cat.hom_dim(e.cod, e.dom))
    sys.eq([("g", cat.right_mul_matrix(e, e.dom))], cat.id_mor(e.dom).vec)
    sys.eq([("g", cat.left_mul_matrix(e, e.cod))], cat.id_mor(e.cod).vec)
    sol = sys.solve()
    if sol is None:
        return None
    return Mor(cat, e.cod, e.dom, sol.extract("g"))


def solve_with_isos(cat: CategoryPresentation, sol: Solution, iso_specs, cap: int):
    """First affine solution whose named components are invertible morphisms.

    iso_specs is a list of (name, dom, cod).  The particular solution is
    tried first; for exact inputs the comparison lemma makes it succeed, so
    the enumeration fallback only runs on corrupted data.
    """
    if sol is None:
        return None

    def all_isos(vec):
        for name, dom, cod in iso_specs:
            e = Mor(cat, dom, cod, sol.extract(name, vec))
            if mor_inverse(cat, e) is None:
                return False
        return True

    if all_isos(sol.x0):
        return sol.x0
    if sol.kernel_dim == 0:
        return None
    for vec in sol.points(cap):
        if all_isos(vec):
            return vec
    return None
