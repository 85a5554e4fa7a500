"""Ideal quotients C/[I], isomorphism testing mod an ideal, functor data.

The quotient of a presented category by the ideal of morphisms factoring
through a subcategory is again a presented category; we keep section and
projection matrices per Hom space so morphisms can be moved back and forth.
"""

from __future__ import annotations

import numpy as np

from .category import CategoryPresentation, Mor, Obj
from .field import CapExceeded


class QuotientCategory:
    """C/[I] with per-pair projection/section onto chosen quotient bases."""

    def __init__(self, base: CategoryPresentation, ideal_over):
        self.base = base
        self.ideal_over = frozenset(ideal_over)
        f = base.field
        n = base.n
        self.proj = {}
        self.sect = {}
        qdim = np.zeros((n, n), dtype=np.int64)
        ideal_bases = {}
        for i in range(n):
            for j in range(n):
                d = int(base.homdim[i][j])
                if d == 0:
                    ideal_bases[(i, j)] = f.zeros(0, 0)
                    continue
                span = []
                for m in sorted(self.ideal_over):
                    for k1 in range(int(base.homdim[i][m])):
                        u = base.basis_mor(i, m, k1)
                        for k2 in range(int(base.homdim[m][j])):
                            v = base.basis_mor(m, j, k2)
                            span.append(base.compose(u, v).vec)
                ib = f.row_space(np.array(span)) if span else f.zeros(0, d)
                ideal_bases[(i, j)] = ib
                # complement basis: unit vectors at non-pivot coordinates
                _, pivots = f.rref(ib) if ib.shape[0] else (ib, [])
                free = [c for c in range(d) if c not in pivots]
                qdim[i][j] = len(free)
                sect = f.zeros(d, len(free))
                for col, c in enumerate(free):
                    sect[c, col] = 1
                # projection: express v = ideal part + sum q_c e_c; solve once
                stack = np.concatenate([ib.T, sect], axis=1) if ib.shape[0] else sect
                sol = f.solve(stack, f.eye(d))
                self.proj[(i, j)] = sol[ib.shape[0] :, :] % f.p
                self.sect[(i, j)] = sect
        self.qdim = qdim
        self._ideal_bases = ideal_bases
        # quotient structure constants -> presented category on same names
        qcomp = {}
        for i in range(n):
            for j in range(n):
                if qdim[i][j] == 0:
                    continue
                for l in range(n):
                    if qdim[j][l] == 0 or qdim[i][l] == 0:
                        continue
                    c = f.zeros(qdim[i][j], qdim[j][l], qdim[i][l])
                    for a in range(qdim[i][j]):
                        fa = Mor(base, Obj((i,)), Obj((j,)), self.sect[(i, j)][:, a])
                        for b in range(qdim[j][l]):
                            gb = Mor(base, Obj((j,)), Obj((l,)), self.sect[(j, l)][:, b])
                            c[a, b] = self.proj[(i, l)] @ base.compose(fa, gb).vec % f.p
                    qcomp[(i, j, l)] = c % f.p
        qid = [self.proj[(i, i)] @ base.idc[i] % f.p for i in range(n)]
        self.qcat = CategoryPresentation(f, base.names, qdim, qcomp, qid, validate=False)

    # -- moving morphisms ---------------------------------------------------

    def project(self, m: Mor) -> Mor:
        """Image of a base morphism in the quotient presentation."""
        out = self.qcat.zero_mor(m.dom, m.cod)
        offs_b = self.base.hom_offsets(m.dom, m.cod)
        offs_q = self.qcat.hom_offsets(m.dom, m.cod)
        for tp, t in enumerate(m.cod.parts):
            for sp, s in enumerate(m.dom.parts):
                ob, db = offs_b[(tp, sp)]
                oq, dq = offs_q[(tp, sp)]
                if dq:
                    out.vec[oq : oq + dq] = (
                        self.proj[(s, t)] @ m.vec[ob : ob + db]
                    ) % self.base.field.p
        return out

    def section(self, m: Mor) -> Mor:
        """A chosen base-category lift of a quotient morphism."""
        out = self.base.zero_mor(m.dom, m.cod)
        offs_b = self.base.hom_offsets(m.dom, m.cod)
        offs_q = self.qcat.hom_offsets(m.dom, m.cod)
        for tp, t in enumerate(m.cod.parts):
            for sp, s in enumerate(m.dom.parts):
                ob, db = offs_b[(tp, sp)]
                oq, dq = offs_q[(tp, sp)]
                if dq:
                    out.vec[ob : ob + db] = (
                        self.sect[(s, t)] @ m.vec[oq : oq + dq]
                    ) % self.base.field.p
        return out

    def project_matrix(self, x: Obj, y: Obj) -> np.ndarray:
        """Matrix of the projection Hom(x, y) -> qHom(x, y) in flat layouts."""
        f = self.base.field
        rows, cols = self.qcat.hom_dim(x, y), self.base.hom_dim(x, y)
        m = f.zeros(rows, cols)
        offs_b = self.base.hom_offsets(x, y)
        offs_q = self.qcat.hom_offsets(x, y)
        for key, (ob, db) in offs_b.items():
            oq, dq = offs_q[key]
            if dq:
                s, t = x.parts[key[1]], y.parts[key[0]]
                m[oq : oq + dq, ob : ob + db] = self.proj[(s, t)]
        return m

    def is_zero(self, m: Mor) -> bool:
        return not self.project(m).vec.any()

    def equal(self, a: Mor, b: Mor) -> bool:
        return np.array_equal(self.project(a).vec, self.project(b).vec)

    # -- isomorphism testing -------------------------------------------------

    def is_iso(self, m: Mor):
        """Two-sided invertibility of m in C/[I]; returns (bool, inverse Mor|None).

        A base-category morphism is accepted and an inverse is returned as a
        base morphism (a chosen lift).  Decided by one linear solve.
        """
        qm = self.project(m) if m.cat is self.base else m
        q = self.qcat
        f = q.field
        if q.hom_dim(qm.dom, qm.dom) == 0 and q.hom_dim(qm.cod, qm.cod) == 0:
            return True, self.section(q.zero_mor(qm.cod, qm.dom))
        # unknowns g with g o m = id_dom and m o g = id_cod in the quotient
        pre = q.right_mul_matrix(qm, qm.dom)  # g |-> g o m
        post = q.left_mul_matrix(qm, qm.cod)  # g |-> m o g
        lhs = np.concatenate([pre, post], axis=0)
        rhs = np.concatenate([q.id_mor(qm.dom).vec, q.id_mor(qm.cod).vec])
        sol = f.solve(lhs, rhs)
        if sol is None:
            return False, None
        inv = Mor(q, qm.cod, qm.dom, sol)
        return True, self.section(inv)

    def obj_iso(self, x: Obj, y: Obj, cap: int = 1 << 16):
        """Isomorphism x ~ y in C/[I]; returns (bool, witness Mor|None)."""
        rx = self.reduce_obj(x)
        ry = self.reduce_obj(y)
        if rx == ry:
            # identity on common parts extends to an isomorphism
            w = self._reduction_iso(x, y)
            if w is not None:
                return True, w
        q = self.qcat
        f = q.field
        d = q.hom_dim(x, y)
        if d == 0:
            return (True, self.section(q.zero_mor(x, y))) if rx.is_zero and ry.is_zero else (False, None)
        for vec in f.all_vectors(d, cap):
            cand = Mor(q, x, y, vec)
            ok, inv = self.is_iso(cand)
            if ok:
                return True, self.section(cand)
        return False, None

    def reduce_obj(self, x: Obj) -> Obj:
        """Drop summands lying in the ideal (they are zero in C/[I])."""
        return Obj(tuple(i for i in x.parts if i not in self.ideal_over))

    def _reduction_iso(self, x: Obj, y: Obj):
        q = self.qcat
        m = q.zero_mor(x, y)
        offs = q.hom_offsets(x, y)
        used = set()
        for sp, s in enumerate(x.parts):
            if s in self.ideal_over:
                continue
            for tp, t in enumerate(y.parts):
                if tp in used or t != s:
                    continue
                off, dd = offs[(tp, sp)]
                m.vec[off : off + dd] = q.idc[s]
                used.add(tp)
                break
        ok, inv = self.is_iso(m)
        return self.section(m) if ok else None


def ideal_quotient(base: CategoryPresentation, ideal_over) -> QuotientCategory:
    """The quotient of a presented category by the ideal [I]."""
    return QuotientCategory(base, ideal_over)


class FunctorData:
    """An additive functor between quotient presentations.

    Stored on indecomposables of the source: objmap gives the image object,
    mormap[(i, j)] the matrix qHom(i, j) -> qHom(objmap[i], objmap[j]).
    """

    def __init__(self, src: QuotientCategory, dst: QuotientCategory, src_indecs, objmap, mormap):
        self.src = src
        self.dst = dst
        self.src_indecs = list(src_indecs)
        self.objmap = dict(objmap)
        self.mormap = {k: dst.base.field.arr(v) for k, v in mormap.items()}

    def apply_obj(self, x: Obj) -> Obj:
        out = ()
        for i in x.parts:
            out += self.objmap[i].parts
        return Obj(tuple(sorted(out)))

    def apply(self, m: Mor) -> Mor:
        """Image of a quotient morphism between source objects."""
        q = self.dst.qcat
        fx, fy = self.apply_obj(m.dom), self.apply_obj(m.cod)
        out = q.zero_mor(fx, fy)
        src_q = self.src.qcat
        offs_in = src_q.hom_offsets(m.dom, m.cod)
        # positions of each source summand's image inside the image object
        dpos = _image_positions(self, m.dom)
        cpos = _image_positions(self, m.cod)
        offs_out = q.hom_offsets(fx, fy)
        for tp, t in enumerate(m.cod.parts):
            for sp, s in enumerate(m.dom.parts):
                oin, din = offs_in[(tp, sp)]
                if din == 0:
                    continue
                img = (self.mormap[(s, t)] @ m.vec[oin : oin + din]) % q.field.p
                # distribute into block rows/cols of the image objects
                sub_offs = q.hom_offsets(self.objmap[s], self.objmap[t])
                for (btp, bsp), (boff, bd) in sub_offs.items():
                    if bd == 0:
                        continue
                    off, d = offs_out[(cpos[tp][btp], dpos[sp][bsp])]
                    out.vec[off : off + d] = (out.vec[off : off + d] + img[boff : boff + bd]) % q.field.p
        return out


def _image_positions(fd: FunctorData, x: Obj):
    """For each summand position of x, positions of its image parts in F(x)."""
    tagged = []
    for pos, idx in enumerate(x.parts):
        for sub, part in enumerate(fd.objmap[idx].parts):
            tagged.append((part, pos, sub))
    tagged.sort(key=lambda t: (t[0], t[1], t[2]))
    out = {pos: {} for pos in range(len(x.parts))}
    for newpos, (_, pos, sub) in enumerate(tagged):
        out[pos][sub] = newpos
    return out


class NatTransData:
    """A natural transformation between functors on the same source."""

    def __init__(self, src: FunctorData, dst: FunctorData, components):
        self.src_f = src
        self.dst_f = dst
        self.components = dict(components)  # indec -> Mor in dst quotient


def check_functor(fd: FunctorData) -> "Report":
    """Identity and composition preservation on all quotient basis pairs."""
    rep = Report("functor")
    srcq = fd.src.qcat
    dstq = fd.dst.qcat
    for i in fd.src_indecs:
        x = Obj((i,))
        fid = fd.apply(srcq.id_mor(x))
        if fid != dstq.id_mor(fd.apply_obj(x)):
            rep.fail(f"identity of {srcq.names[i]} not preserved", {"indec": i})
            return rep
    for i in fd.src_indecs:
        for j in fd.src_indecs:
            dij = int(srcq.homdim[i][j])
            for j2 in fd.src_indecs:
                djk = int(srcq.homdim[j][j2])
                if dij == 0 or djk == 0:
                    continue
                for a in range(dij):
                    fa = srcq.basis_mor(i, j, a)
                    for b in range(djk):
                        gb = srcq.basis_mor(j, j2, b)
                        lhs = fd.apply(srcq.compose(fa, gb))
                        rhs = dstq.compose(fd.apply(fa), fd.apply(gb))
                        if lhs != rhs:
                            rep.fail(
                                "composition not preserved",
                                {"i": i, "j": j, "k": j2, "a": a, "b": b},
                            )
                            return rep
    rep.ok()
    return rep


def check_natural(nt: NatTransData) -> "Report":
    """Naturality of nt on all quotient basis morphisms of the source."""
    rep = Report("naturality")
    fd, gd = nt.src_f, nt.dst_f
    srcq = fd.src.qcat
    dstq = fd.dst.qcat
    dq = gd.dst.qcat
    for i in fd.src_indecs:
        for j in fd.src_indecs:
            for a in range(int(srcq.homdim[i][j])):
                f = srcq.basis_mor(i, j, a)
                top = dstq.compose(nt.components[i], gd.apply(f))
                bot = dstq.compose(fd.apply(f), nt.components[j])
                if top != bot:
                    rep.fail("naturality square fails", {"i": i, "j": j, "basis": a})
                    return rep
    rep.ok()
    return rep


class Report:
    """A pass/fail verdict with a replayable witness."""

    def __init__(self, name: str):
        self.name = name
        self.passed = None
        self.detail = None
        self.witness = None

    def ok(self, detail=None):
        if self.passed is None:
            self.passed = True
            self.detail = detail
        return self

    def fail(self, detail, witness=None):
        self.passed = False
        self.detail = detail
        self.witness = witness
        return self

    def __bool__(self):
        return bool(self.passed)

    def __repr__(self):
        status = "pass" if self.passed else f"FAIL: {self.detail}"
        return f"<{self.name}: {status}>"

    def as_dict(self):
        return {
            "name": self.name,
            "passed": self.passed,
            "detail": self.detail,
            "witness": _jsonable(self.witness),
        }


def _jsonable(x):
    if isinstance(x, (Mor,)):
        return {
            "dom": list(x.dom.parts),
            "cod": list(x.cod.parts),
            "vec": x.vec.tolist(),
        }
    if isinstance(x, Obj):
        return list(x.parts)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    return x
