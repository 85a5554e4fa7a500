"""Finite additive categories presented by Hom bases and structure constants.

Objects are formal direct sums of named indecomposables (sorted multisets of
indecomposable indices); morphisms are block coordinate vectors with respect
to the fixed Hom bases.  Nothing here ever changes basis implicitly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import PrimeField


class Obj:
    """A formal direct sum of indecomposables, as a sorted index multiset."""

    __slots__ = ("parts", "_hash")

    def __init__(self, parts):
        self.parts = tuple(sorted(parts))
        self._hash = hash(self.parts)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return isinstance(other, Obj) and self.parts == other.parts

    def __lt__(self, other):
        return self.parts < other.parts

    def __repr__(self):
        return f"Obj{self.parts}"

    @property
    def is_zero(self) -> bool:
        return not self.parts

    def __add__(self, other: "Obj") -> "Obj":
        return Obj(tuple(sorted(self.parts + other.parts)))

    def __len__(self):
        return len(self.parts)


ZERO = Obj(())


class LoadError(ValueError):
    """Presentation data violates a category law."""


class CategoryPresentation:
    """A finite k-linear additive category over F_p.

    homdim[i][j] is the dimension of Hom(indec_i, indec_j); comp[(i, j, l)]
    holds structure constants of shape (homdim[i][j], homdim[j][l],
    homdim[i][l]) sending basis pairs to coordinates of their composite;
    idc[i] are the coordinates of the identity of indec_i.
    """

    def __init__(self, field: PrimeField, names, homdim, comp, idc, validate=True):
        self.field = field
        self.names = list(names)
        self.n = len(self.names)
        self.homdim = np.asarray(homdim, dtype=np.int64)
        self.comp = {k: field.arr(v) for k, v in comp.items()}
        self.idc = [field.arr(v) for v in idc]
        self._name_index = {nm: i for i, nm in enumerate(self.names)}
        self._offsets_cache = {}
        self._dim_cache = {}
        self._mul_cache = {}
        if validate:
            self.validate()

    def index(self, name: str) -> int:
        return self._name_index[name]

    def obj(self, *names) -> Obj:
        return Obj(tuple(sorted(self._name_index[nm] for nm in names)))

    def obj_name(self, x: Obj) -> str:
        return "0" if x.is_zero else "+".join(self.names[i] for i in x.parts)

    def obj_of_subcat(self, x: Obj, members) -> bool:
        return all(i in members for i in x.parts)

    def comp_const(self, i, j, l) -> np.ndarray:
        key = (i, j, l)
        if key not in self.comp:
            self.comp[key] = self.field.zeros(
                self.homdim[i][j], self.homdim[j][l], self.homdim[i][l]
            )
        return self.comp[key]

    # -- morphism spaces ------------------------------------------------

    def hom_dim(self, x: Obj, y: Obj) -> int:
        key = (x, y)
        d = self._dim_cache.get(key)
        if d is None:
            d = int(sum(self.homdim[s][t] for s in x.parts for t in y.parts))
            self._dim_cache[key] = d
        return d

    def hom_offsets(self, x: Obj, y: Obj):
        """Flat layout of Hom(x, y): dict (t_pos, s_pos) -> (offset, dim)."""
        key = (x, y)
        offs = self._offsets_cache.get(key)
        if offs is not None:
            return offs
        offs = {}
        off = 0
        for tp, t in enumerate(y.parts):
            for sp, s in enumerate(x.parts):
                d = int(self.homdim[s][t])
                offs[(tp, sp)] = (off, d)
                off += d
        self._offsets_cache[key] = offs
        return offs

    def zero_mor(self, x: Obj, y: Obj) -> "Mor":
        return Mor(self, x, y, self.field.zeros(self.hom_dim(x, y)))

    def id_mor(self, x: Obj) -> "Mor":
        f = self.zero_mor(x, x)
        offs = self.hom_offsets(x, x)
        for p_pos, i in enumerate(x.parts):
            off, d = offs[(p_pos, p_pos)]
            f.vec[off : off + d] = self.idc[i]
        return f

    def basis_mor(self, i: int, j: int, k: int) -> "Mor":
        """The k-th basis morphism indec_i -> indec_j as a Mor."""
        f = self.zero_mor(Obj((i,)), Obj((j,)))
        f.vec[k] = 1
        return f

    def mor_from_blocks(self, x: Obj, y: Obj, blocks) -> "Mor":
        """blocks: dict (t_pos, s_pos) -> coordinate vector."""
        f = self.zero_mor(x, y)
        offs = self.hom_offsets(x, y)
        for key, v in blocks.items():
            off, d = offs[key]
            f.vec[off : off + d] = self.field.arr(v)
        return f

    def block(self, f: "Mor", t_pos: int, s_pos: int) -> np.ndarray:
        off, d = self.hom_offsets(f.dom, f.cod)[(t_pos, s_pos)]
        return f.vec[off : off + d]

    def compose(self, f: "Mor", g: "Mor") -> "Mor":
        """g after f.  Requires cod(f) = dom(g)."""
        if f.cod != g.dom:
            raise ValueError(
                f"compose mismatch: cod {self.obj_name(f.cod)} vs dom {self.obj_name(g.dom)}"
            )
        x, y, z = f.dom, f.cod, g.cod
        out = self.zero_mor(x, z)
        offs_out = self.hom_offsets(x, z)
        for up, u in enumerate(z.parts):
            for sp, s in enumerate(x.parts):
                off, d = offs_out[(up, sp)]
                if d == 0:
                    continue
                acc = self.field.zeros(d)
                for tp, t in enumerate(y.parts):
                    fb = self.block(f, tp, sp)
                    gb = self.block(g, up, tp)
                    if fb.size == 0 or gb.size == 0:
                        continue
                    c = self.comp_const(s, t, u)
                    acc = (acc + np.einsum("a,b,abc->c", fb, gb, c)) % self.field.p
                out.vec[off : off + d] = acc
        return out

    def add_mor(self, f: "Mor", g: "Mor") -> "Mor":
        return Mor(self, f.dom, f.cod, self.field.add(f.vec, g.vec))

    def neg_mor(self, f: "Mor") -> "Mor":
        return Mor(self, f.dom, f.cod, self.field.neg(f.vec))

    def sub_mor(self, f: "Mor", g: "Mor") -> "Mor":
        return Mor(self, f.dom, f.cod, self.field.sub(f.vec, g.vec))

    def direct_sum_mor(self, f: "Mor", g: "Mor") -> "Mor":
        """Block-diagonal sum f (+) g with sorted-multiset relabeling."""
        x, y = f.dom + g.dom, f.cod + g.cod
        out = self.zero_mor(x, y)
        dpos = _merge_positions(f.dom, g.dom)
        cpos = _merge_positions(f.cod, g.cod)
        for which, h in ((0, f), (1, g)):
            for tp in range(len(h.cod)):
                for sp in range(len(h.dom)):
                    b = self.block(h, tp, sp)
                    if b.size:
                        off, d = self.hom_offsets(x, y)[(cpos[which][tp], dpos[which][sp])]
                        out.vec[off : off + d] = b
        return out

    def injection(self, x: Obj, total: Obj, positions) -> "Mor":
        """Canonical inclusion of the summand of `total` at the given positions."""
        f = self.zero_mor(x, total)
        offs = self.hom_offsets(x, total)
        for sp, tp in enumerate(positions):
            off, d = offs[(tp, sp)]
            f.vec[off : off + d] = self.idc[x.parts[sp]]
        return f

    def projection(self, total: Obj, y: Obj, positions) -> "Mor":
        """Canonical projection of `total` onto the summand at the given positions."""
        f = self.zero_mor(total, y)
        offs = self.hom_offsets(total, y)
        for tp, sp in enumerate(positions):
            off, d = offs[(tp, sp)]
            f.vec[off : off + d] = self.idc[y.parts[tp]]
        return f

    # -- linear operators on Hom spaces ----------------------------------

    def left_mul_matrix(self, g: "Mor", x: Obj) -> np.ndarray:
        """Matrix of Hom(x, dom g) -> Hom(x, cod g), f |-> g o f."""
        key = ("L", g.dom, g.cod, g.vec.tobytes(), x)
        hit = self._mul_cache.get(key)
        if hit is not None:
            return hit
        m = self._left_mul_matrix(g, x)
        if len(self._mul_cache) < 200000:
            self._mul_cache[key] = m
        return m

    def _left_mul_matrix(self, g: "Mor", x: Obj) -> np.ndarray:
        y, z = g.dom, g.cod
        rows, cols = self.hom_dim(x, z), self.hom_dim(x, y)
        m = self.field.zeros(rows, cols)
        offs_in = self.hom_offsets(x, y)
        offs_out = self.hom_offsets(x, z)
        for up, u in enumerate(z.parts):
            for sp, s in enumerate(x.parts):
                ro, rd = offs_out[(up, sp)]
                if rd == 0:
                    continue
                for tp, t in enumerate(y.parts):
                    co, cd = offs_in[(tp, sp)]
                    gb = self.block(g, up, tp)
                    if cd == 0 or gb.size == 0:
                        continue
                    c = self.comp_const(s, t, u)
                    m[ro : ro + rd, co : co + cd] = (
                        m[ro : ro + rd, co : co + cd] + np.einsum("b,abc->ca", gb, c)
                    ) % self.field.p
        return m

    def right_mul_matrix(self, f: "Mor", z: Obj) -> np.ndarray:
        """Matrix of Hom(cod f, z) -> Hom(dom f, z), h |-> h o f."""
        key = ("R", f.dom, f.cod, f.vec.tobytes(), z)
        hit = self._mul_cache.get(key)
        if hit is not None:
            return hit
        m = self._right_mul_matrix(f, z)
        if len(self._mul_cache) < 200000:
            self._mul_cache[key] = m
        return m

    def _right_mul_matrix(self, f: "Mor", z: Obj) -> np.ndarray:
        x, y = f.dom, f.cod
        rows, cols = self.hom_dim(x, z), self.hom_dim(y, z)
        m = self.field.zeros(rows, cols)
        offs_in = self.hom_offsets(y, z)
        offs_out = self.hom_offsets(x, z)
        for up, u in enumerate(z.parts):
            for sp, s in enumerate(x.parts):
                ro, rd = offs_out[(up, sp)]
                if rd == 0:
                    continue
                for tp, t in enumerate(y.parts):
                    co, cd = offs_in[(up, tp)]
                    fb = self.block(f, tp, sp)
                    if cd == 0 or fb.size == 0:
                        continue
                    c = self.comp_const(s, t, u)
                    m[ro : ro + rd, co : co + cd] = (
                        m[ro : ro + rd, co : co + cd] + np.einsum("a,abc->cb", fb, c)
                    ) % self.field.p
        return m

    # -- validation -------------------------------------------------------

    def validate(self):
        """Exhaustive unit and associativity laws on all basis tuples."""
        f = self.field
        for i in range(self.n):
            if self.idc[i].shape != (self.homdim[i][i],):
                raise LoadError(f"identity coordinates of {self.names[i]} have wrong length")
        for i in range(self.n):
            for j in range(self.n):
                d = int(self.homdim[i][j])
                if d == 0:
                    continue
                cl = self.comp_const(i, i, j)
                cr = self.comp_const(i, j, j)
                for k in range(d):
                    e = f.zeros(d)
                    e[k] = 1
                    left = np.einsum("a,b,abc->c", self.idc[i], e, cl) % f.p
                    right = np.einsum("a,b,abc->c", e, self.idc[j], cr) % f.p
                    if not np.array_equal(left, e) or not np.array_equal(right, e):
                        raise LoadError(
                            f"identity law fails on basis {k} of "
                            f"Hom({self.names[i]},{self.names[j]})"
                        )
        for i in range(self.n):
            for j in range(self.n):
                if self.homdim[i][j] == 0:
                    continue
                for l in range(self.n):
                    if self.homdim[j][l] == 0:
                        continue
                    for m in range(self.n):
                        if self.homdim[l][m] == 0 or self.homdim[i][m] == 0:
                            continue
                        c_ijl = self.comp_const(i, j, l)
                        c_ilm = self.comp_const(i, l, m)
                        c_jlm = self.comp_const(j, l, m)
                        c_ijm = self.comp_const(i, j, m)
                        lhs = np.einsum("abe,ecd->abcd", c_ijl, c_ilm) % f.p
                        rhs = np.einsum("bce,aed->abcd", c_jlm, c_ijm) % f.p
                        if not np.array_equal(lhs, rhs):
                            raise LoadError(
                                f"associativity fails on "
                                f"({self.names[i]},{self.names[j]},{self.names[l]},{self.names[m]})"
                            )


class Mor:
    """A morphism between formal sums, as a flat coordinate vector."""

    __slots__ = ("cat", "dom", "cod", "vec")

    def __init__(self, cat: CategoryPresentation, dom: Obj, cod: Obj, vec):
        self.cat = cat
        self.dom = dom
        self.cod = cod
        self.vec = cat.field.arr(vec)
        if self.vec.shape != (cat.hom_dim(dom, cod),):
            raise ValueError("morphism coordinate vector has wrong length")

    def __eq__(self, other):
        return (
            isinstance(other, Mor)
            and self.dom == other.dom
            and self.cod == other.cod
            and np.array_equal(self.vec, other.vec)
        )

    def __hash__(self):
        return hash((self.dom, self.cod, self.vec.tobytes()))

    @property
    def is_zero(self) -> bool:
        return not self.vec.any()

    def __repr__(self):
        c = self.cat
        return f"Mor({c.obj_name(self.dom)} -> {c.obj_name(self.cod)}, {self.vec.tolist()})"


def _merge_positions(a: Obj, b: Obj):
    """Positions of the parts of a and b inside the sorted multiset a + b."""
    tagged = [(idx, 0, pos) for pos, idx in enumerate(a.parts)]
    tagged += [(idx, 1, pos) for pos, idx in enumerate(b.parts)]
    tagged.sort(key=lambda t: (t[0], t[1], t[2]))
    out = ({}, {})
    for newpos, (_, which, oldpos) in enumerate(tagged):
        out[which][oldpos] = newpos
    return out


def merge_many(objs):
    """Total sorted sum of several objects plus per-component position maps."""
    tagged = []
    for which, o in enumerate(objs):
        tagged += [(idx, which, pos) for pos, idx in enumerate(o.parts)]
    tagged.sort(key=lambda t: (t[0], t[1], t[2]))
    total = Obj(tuple(t[0] for t in tagged))
    pos = [dict() for _ in objs]
    for newpos, (_, which, oldpos) in enumerate(tagged):
        pos[which][oldpos] = newpos
    return total, pos


def col_mor(cat: CategoryPresentation, fs):
    """Stack morphisms with a common domain into X -> cod(f_1) + ... + cod(f_k)."""
    x = fs[0].dom
    total, pos = merge_many([f.cod for f in fs])
    out = cat.zero_mor(x, total)
    offs = cat.hom_offsets(x, total)
    for which, f in enumerate(fs):
        for tp in range(len(f.cod)):
            for sp in range(len(x)):
                b = cat.block(f, tp, sp)
                if b.size:
                    off, d = offs[(pos[which][tp], sp)]
                    out.vec[off : off + d] = (out.vec[off : off + d] + b) % cat.field.p
    return out


def row_mor(cat: CategoryPresentation, gs):
    """Stack morphisms with a common codomain into dom(g_1) + ... -> Z."""
    z = gs[0].cod
    total, pos = merge_many([g.dom for g in gs])
    out = cat.zero_mor(total, z)
    offs = cat.hom_offsets(total, z)
    for which, g in enumerate(gs):
        for tp in range(len(z)):
            for sp in range(len(g.dom)):
                b = cat.block(g, tp, sp)
                if b.size:
                    off, d = offs[(tp, pos[which][sp])]
                    out.vec[off : off + d] = (out.vec[off : off + d] + b) % cat.field.p
    return out
