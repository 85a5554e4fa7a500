"""The extriangulated-structure validator.

Checks, against the stored realization table: bifunctoriality of the action
data, additivity of realizations, the fill-in property of realizations, both
lifting axioms and their duals, composability of conflations (the octahedral
axiom), and exactness of the two long Hom sequences at every object.

Bilinearity makes every universally quantified fill-in condition a statement
about a solution subspace, so each is decided on a basis of that subspace by
rank tests instead of element enumeration.
"""

from __future__ import annotations

import numpy as np

from .axioms import find_invertible, first_index, left_contraction, mid_index, right_contraction, same_class
from .category import Mor, Obj, ZERO, _merge_positions
from .ext import (Conflation, TableIncomplete, Workspace, class_split,
                  folded_conflation)
from .field import CapExceeded
from .linsys import LinSys
from .quotient import Report

ADDITIVITY_BUDGET = 512


class ETReport:
    """Named sub-verdicts with an overall pass flag and counters."""

    def __init__(self):
        self.sections: dict[str, Report] = {}
        self.stats: dict[str, int] = {}

    def add(self, rep: Report):
        self.sections[rep.name] = rep
        return rep

    @property
    def passed(self):
        return all(bool(r) for r in self.sections.values())

    def first_failure(self):
        for r in self.sections.values():
            if not r:
                return r
        return None

    def as_dict(self):
        return {
            "passed": self.passed,
            "sections": {k: v.as_dict() for k, v in self.sections.items()},
            "stats": dict(self.stats),
        }

    def __repr__(self):
        flags = ", ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in self.sections.items())
        return f"<ETReport {flags}>"


def validate_et(ws: Workspace, skip_et4: bool = False, full_pairs: bool = False) -> ETReport:
    """Validate the whole structure.

    With full_pairs the quadratic fill-in sweeps run over every stored
    class pair; by default they run over the classes that do not decompose
    as direct sums, which together with the zero- and additivity checks
    covers all pairs (fill-ins for sums assemble blockwise and transport
    along the verified middle isomorphisms).
    """
    rep = ETReport()
    rep.add(check_action_bifunctoriality(ws))
    rep.add(check_zero_realizations(ws))
    rep.add(check_additive_realizations(ws))
    lifts, pair_count = check_lifting_axioms(ws, full_pairs=full_pairs)
    rep.add(lifts)
    rep.stats["conflation_pairs"] = pair_count
    rep.add(check_long_exactness(ws))
    if not skip_et4:
        et4, tried, skipped = check_composability(ws)
        rep.add(et4)
        rep.stats["et4_pairs"] = tried
        rep.stats["et4_skipped"] = skipped
        et4op, tried_op, skipped_op = check_composability(ws.op())
        et4op.name = "ET4-op"
        rep.add(et4op)
        rep.stats["et4op_pairs"] = tried_op
        rep.stats["et4op_skipped"] = skipped_op
    return rep


def irreducible_conflations(ws: Workspace):
    """Stored conflations whose class has a connected nonzero-block graph."""
    out = []
    for (third, first), entries in sorted(ws.table.items()):
        for dk, conf in sorted(entries.items()):
            if class_split(ws, third, first, dk) is None:
                out.append(conf)
    return out


# -- (ET1) ---------------------------------------------------------------------


def check_action_bifunctoriality(ws: Workspace) -> Report:
    """Action by identities is the identity; actions compose and commute."""
    rep = Report("ET1")
    cat, ext, f = ws.cat, ws.ext, ws.field
    singles = [Obj((i,)) for i in range(cat.n)]
    for c in range(cat.n):
        for a in range(cat.n):
            d = int(ext.extdim[c][a])
            if d == 0:
                continue
            idc = cat.id_mor(singles[c])
            ida = cat.id_mor(singles[a])
            if not np.array_equal(ext.right_action_matrix(idc, singles[a]), f.eye(d)):
                return rep.fail("identity does not act as identity on the right", {"c": c, "a": a})
            if not np.array_equal(ext.left_action_matrix(ida, singles[c]), f.eye(d)):
                return rep.fail("identity does not act as identity on the left", {"c": c, "a": a})
    for y in range(cat.n):
        for c in range(cat.n):
            for k in range(int(cat.homdim[y][c])):
                b = cat.basis_mor(y, c, k)
                for y2 in range(cat.n):
                    for k2 in range(int(cat.homdim[y2][y])):
                        b2 = cat.basis_mor(y2, y, k2)
                        for a in range(cat.n):
                            if ext.extdim[c][a] == 0 and ext.extdim[y2][a] == 0:
                                continue
                            lhs = ext.right_action_matrix(cat.compose(b2, b), singles[a])
                            rhs = f.mul(ext.right_action_matrix(b2, singles[a]),
                                        ext.right_action_matrix(b, singles[a]))
                            if not np.array_equal(lhs, rhs):
                                return rep.fail(
                                    "right action not functorial",
                                    {"y2": y2, "y": y, "c": c, "k": k, "k2": k2, "a": a},
                                )
    for a in range(cat.n):
        for a2 in range(cat.n):
            for k in range(int(cat.homdim[a][a2])):
                g = cat.basis_mor(a, a2, k)
                for a3 in range(cat.n):
                    for k2 in range(int(cat.homdim[a2][a3])):
                        g2 = cat.basis_mor(a2, a3, k2)
                        for c in range(cat.n):
                            if ext.extdim[c][a] == 0 and ext.extdim[c][a3] == 0:
                                continue
                            lhs = ext.left_action_matrix(cat.compose(g, g2), singles[c])
                            rhs = f.mul(ext.left_action_matrix(g2, singles[c]),
                                        ext.left_action_matrix(g, singles[c]))
                            if not np.array_equal(lhs, rhs):
                                return rep.fail(
                                    "left action not functorial",
                                    {"a": a, "a2": a2, "a3": a3, "k": k, "k2": k2, "c": c},
                                )
    for y in range(cat.n):
        for c in range(cat.n):
            for k in range(int(cat.homdim[y][c])):
                b = cat.basis_mor(y, c, k)
                for a in range(cat.n):
                    for a2 in range(cat.n):
                        for k2 in range(int(cat.homdim[a][a2])):
                            g = cat.basis_mor(a, a2, k2)
                            lhs = f.mul(ext.left_action_matrix(g, singles[y]),
                                        ext.right_action_matrix(b, singles[a]))
                            rhs = f.mul(ext.right_action_matrix(b, singles[a2]),
                                        ext.left_action_matrix(g, singles[c]))
                            if not np.array_equal(lhs, rhs):
                                return rep.fail(
                                    "left and right actions do not commute",
                                    {"y": y, "c": c, "k": k, "a": a, "a2": a2, "k2": k2},
                                )
    return rep.ok()


# -- (ET2): zero classes and additivity ------------------------------------------


def split_conflation(ws: Workspace, first: Obj, third: Obj) -> Conflation:
    from .category import merge_many

    total, pos = merge_many([first, third])
    x = ws.cat.injection(first, total, [pos[0][s] for s in range(len(first))])
    y = ws.cat.projection(total, third, [pos[1][t] for t in range(len(third))])
    return Conflation(x, y, tuple(int(v) for v in ws.ext.zero(third, first)))


def check_zero_realizations(ws: Workspace) -> Report:
    rep = Report("ET2-zero")
    for (third, first), entries in sorted(ws.table.items()):
        zero = tuple(int(v) for v in ws.ext.zero(third, first))
        if zero not in entries:
            return rep.fail("zero class has no stored realization",
                            {"third": third, "first": first})
        if not same_class(ws, entries[zero], split_conflation(ws, first, third)):
            return rep.fail("zero class is not realized by a split sequence",
                            {"third": third, "first": first})
    return rep.ok()


def check_additive_realizations(ws: Workspace) -> Report:
    """Every decomposable stored class is realized by the direct sum of its
    components' realizations (up to middle isomorphism)."""
    rep = Report("ET2-additive")
    cat = ws.cat
    checked = 0
    for (third, first), entries in sorted(ws.table.items()):
        for dk, conf in sorted(entries.items()):
            comps = class_split(ws, third, first, dk)
            if comps is None:
                continue
            candidate = folded_conflation(ws, third, first, comps)
            if not same_class(ws, conf, candidate):
                return rep.fail(
                    "stored realization differs from the sum of its components",
                    {"third": third, "first": first, "delta": list(dk)},
                )
            checked += 1
    return rep.ok({"checked": checked})


# -- (ET2)(ii) + (ET3) + (ET3)op over all conflation pairs -----------------------


class _PairCache:
    def __init__(self, ws: Workspace):
        self.ws = ws
        self.left = {}
        self.right = {}
        self.lc = {}
        self.rc = {}

    def left_mul(self, tag, m: Mor, x: Obj):
        key = (tag, x)
        if key not in self.left:
            self.left[key] = self.ws.cat.left_mul_matrix(m, x)
        return self.left[key]

    def right_mul(self, tag, m: Mor, z: Obj):
        key = (tag, z)
        if key not in self.right:
            self.right[key] = self.ws.cat.right_mul_matrix(m, z)
        return self.right[key]

    def lcon(self, tag, third, a_from, a_to, delta):
        key = (tag, a_to)
        if key not in self.lc:
            self.lc[key] = left_contraction(self.ws, third, a_from, a_to, delta)
        return self.lc[key]

    def rcon(self, tag, third_from, third_to, first, delta):
        key = (tag, third_from)
        if key not in self.rc:
            self.rc[key] = right_contraction(self.ws, third_from, third_to, first, delta)
        return self.rc[key]


def check_lifting_axioms(ws: Workspace, full_pairs: bool = False):
    """Realization fill-ins and both lifting axioms on conflation pairs.

    For conflations (x, y, d) and (x', y', d'):
      (ii)   every (a, b) with a d = d' b admits e with e x = x' a, y' e = b y;
      lift   every (a, e) with e x = x' a admits b with b y = y' e, d' b = a d;
      colift every (b, e) with y' e = b y admits a with x' a = e x, a d = d' b.
    Each condition is linear in the quantified pair, so it is checked on a
    basis of the constraint subspace by one consistency rank test.
    """
    rep = Report("ET2ii-ET3")
    cat, ext, f = ws.cat, ws.ext, ws.field
    confs = list(ws.conflations()) if full_pairs else irreducible_conflations(ws)
    cache = _PairCache(ws)
    pair_count = 0
    deltas = {id(c): f.arr(c.delta) for c in confs}
    for ia, A in enumerate(confs):
        X, M, T = A.first, A.middle, A.third
        dA = deltas[id(A)]
        a_zero = not dA.any()
        for ib, B in enumerate(confs):
            Xp, Mp, Tp = B.first, B.middle, B.third
            dB = deltas[id(B)]
            if a_zero and not dB.any():
                continue  # split against split: fill-ins exist by retraction/section
            hXX = cat.hom_dim(X, Xp)
            hTT = cat.hom_dim(T, Tp)
            hMM = cat.hom_dim(M, Mp)
            if hXX + hTT == 0 and hMM == 0:
                continue
            pair_count += 1
            lm_xp_X = cache.left_mul(("x", ib), B.x, X) if hXX else None
            rm_y_Tp = cache.right_mul(("y", ia), A.y, Tp) if hTT else None
            rm_x_Mp = cache.right_mul(("x", ia), A.x, Mp) if hMM else None
            lm_yp_M = cache.left_mul(("y", ib), B.y, M) if hMM else None
            lcon = cache.lcon(("d", ia), T, X, Xp, dA) if hXX else f.zeros(ext.dim(T, Xp), 0)
            rcon = cache.rcon(("d", ib), T, Tp, Xp, dB) if hTT else f.zeros(ext.dim(T, Xp), 0)

            # (ii): pairs (a, b) with a dA = dB b
            if hXX or hTT:
                wmat = np.concatenate(
                    [lcon if hXX else f.zeros(lcon.shape[0], 0),
                     f.neg(rcon) if hTT else f.zeros(lcon.shape[0], 0)], axis=1)
                basis = f.nullspace(wmat)
                if basis.shape[0]:
                    emap = np.concatenate([
                        rm_x_Mp if hMM else f.zeros(cat.hom_dim(X, Mp), 0),
                        lm_yp_M if hMM else f.zeros(cat.hom_dim(M, Tp), 0),
                    ], axis=0)
                    rhs = []
                    for vec in basis:
                        a_v, b_v = vec[:hXX], vec[hXX:]
                        top = f.mul(lm_xp_X, a_v) if hXX else f.zeros(cat.hom_dim(X, Mp))
                        bot = f.mul(rm_y_Tp, b_v) if hTT else f.zeros(cat.hom_dim(M, Tp))
                        rhs.append(np.concatenate([top, bot]))
                    bad = _inconsistent_column(f, emap, rhs)
                    if bad is not None:
                        return rep.fail(
                            "realization fill-in missing",
                            _pair_witness(ws, A, B, {"pair_vec": basis[bad].tolist()}),
                        ), pair_count

            # lifting: pairs (a, e) with e x = x' a
            if hXX or hMM:
                wmat = np.concatenate([
                    lm_xp_X if hXX else f.zeros(cat.hom_dim(X, Mp), 0),
                    f.neg(rm_x_Mp) if hMM else f.zeros(cat.hom_dim(X, Mp), 0),
                ], axis=1)
                basis = f.nullspace(wmat)
                if basis.shape[0]:
                    bmap = np.concatenate([
                        rm_y_Tp if hTT else f.zeros(cat.hom_dim(M, Tp), 0),
                        rcon if hTT else f.zeros(ext.dim(T, Xp), 0),
                    ], axis=0)
                    rhs = []
                    for vec in basis:
                        a_v, e_v = vec[:hXX], vec[hXX:]
                        top = f.mul(lm_yp_M, e_v) if hMM else f.zeros(cat.hom_dim(M, Tp))
                        bot = f.mul(lcon, a_v) if hXX else f.zeros(ext.dim(T, Xp))
                        rhs.append(np.concatenate([top, bot]))
                    bad = _inconsistent_column(f, bmap, rhs)
                    if bad is not None:
                        return rep.fail(
                            "third-morphism lift missing",
                            _pair_witness(ws, A, B, {"pair_vec": basis[bad].tolist()}),
                        ), pair_count

            # colifting: pairs (b, e) with y' e = b y
            if hTT or hMM:
                wmat = np.concatenate([
                    rm_y_Tp if hTT else f.zeros(cat.hom_dim(M, Tp), 0),
                    f.neg(lm_yp_M) if hMM else f.zeros(cat.hom_dim(M, Tp), 0),
                ], axis=1)
                basis = f.nullspace(wmat)
                if basis.shape[0]:
                    amap = np.concatenate([
                        lm_xp_X if hXX else f.zeros(cat.hom_dim(X, Mp), 0),
                        lcon if hXX else f.zeros(ext.dim(T, Xp), 0),
                    ], axis=0)
                    rhs = []
                    for vec in basis:
                        b_v, e_v = vec[:hTT], vec[hTT:]
                        top = f.mul(rm_x_Mp, e_v) if hMM else f.zeros(cat.hom_dim(X, Mp))
                        bot = f.mul(rcon, b_v) if hTT else f.zeros(ext.dim(T, Xp))
                        rhs.append(np.concatenate([top, bot]))
                    bad = _inconsistent_column(f, amap, rhs)
                    if bad is not None:
                        return rep.fail(
                            "first-morphism colift missing",
                            _pair_witness(ws, A, B, {"pair_vec": basis[bad].tolist()}),
                        ), pair_count
    return rep.ok({"pairs": pair_count}), pair_count


def _pair_witness(ws, A, B, extra):
    w = {"A": A.as_dict(), "B": B.as_dict()}
    w.update(extra)
    return w


def _inconsistent_column(field, amat, rhs_list):
    """Index of the first rhs not in the column space of amat, else None."""
    if not rhs_list:
        return None
    aug = np.concatenate([amat] + [r.reshape(-1, 1) for r in rhs_list], axis=1)
    base_rank = field.rank(amat)
    if field.rank(aug) == base_rank:
        return None
    for i, r in enumerate(rhs_list):
        if field.rank(np.concatenate([amat, r.reshape(-1, 1)], axis=1)) != base_rank:
            return i
    return None


# -- long exact sequences ----------------------------------------------------------


def check_long_exactness(ws: Workspace) -> Report:
    """Both six-term Hom sequences of every stored conflation, at every
    indecomposable, are exact at the four interior spots."""
    rep = Report("long-exactness")
    cat, ext, f = ws.cat, ws.ext, ws.field
    singles = [Obj((i,)) for i in range(cat.n)]
    for conf in ws.conflations():
        X, M, T = conf.first, conf.middle, conf.third
        delta = f.arr(conf.delta)
        for w in singles:
            # contravariant: C(T,w) -> C(M,w) -> C(X,w) -> E(T,w) -> E(M,w) -> E(X,w)
            m1 = cat.right_mul_matrix(conf.y, w)
            m2 = cat.right_mul_matrix(conf.x, w)
            m3 = left_contraction(ws, T, X, w, delta)
            m4 = ext.right_action_matrix(conf.y, w)
            m5 = ext.right_action_matrix(conf.x, w)
            if not _exact_run(f, [m1, m2, m3, m4, m5]):
                return rep.fail("contravariant Hom sequence not exact",
                                {"conflation": conf.as_dict(), "at": cat.obj_name(w)})
            # covariant: C(w,X) -> C(w,M) -> C(w,T) -> E(w,X) -> E(w,M) -> E(w,T)
            m1 = cat.left_mul_matrix(conf.x, w)
            m2 = cat.left_mul_matrix(conf.y, w)
            m3 = right_contraction(ws, w, T, X, delta)
            m4 = ext.left_action_matrix(conf.x, w)
            m5 = ext.left_action_matrix(conf.y, w)
            if not _exact_run(f, [m1, m2, m3, m4, m5]):
                return rep.fail("covariant Hom sequence not exact",
                                {"conflation": conf.as_dict(), "at": cat.obj_name(w)})
    return rep.ok()


def _exact_run(field, mats) -> bool:
    for m1, m2 in zip(mats, mats[1:]):
        if m1.shape[1] and m2.shape[0]:
            if field.mul(m2, m1).any():
                return False
        r1 = field.rank(m1) if m1.size else 0
        nullity = m2.shape[1] - (field.rank(m2) if m2.size else 0)
        if r1 != nullity:
            return False
    return True


# -- (ET4): composability of inflations ----------------------------------------------


def check_composability(ws: Workspace):
    """For every composable pair of stored conflations, the composition
    diagram exists: a realized cone of the composite inflation together with
    a conflation between the two cones, all squares commuting."""
    rep = Report("ET4")
    cat, ext, f = ws.cat, ws.ext, ws.field
    by_first = first_index(ws)
    tried = 0
    skipped = 0
    for (thirdC, X), entries in sorted(ws.table.items()):
        for dk1, c1 in sorted(entries.items()):
            Y = c1.middle
            for thirdD, dk2, c2 in by_first.get(Y, []):
                tried += 1
                try:
                    ok = _et4_instance(ws, c1, c2)
                except TableIncomplete:
                    skipped += 1
                    continue
                if not ok:
                    return rep.fail(
                        "no composition diagram",
                        {"first": c1.as_dict(), "second": c2.as_dict()},
                    ), tried, skipped
    return rep.ok({"pairs": tried, "skipped": skipped}), tried, skipped


def _et4_instance(ws: Workspace, c1: Conflation, c2: Conflation) -> bool:
    cat, ext, f = ws.cat, ws.ext, ws.field
    X, Y, C = c1.first, c1.middle, c1.third
    Z, D = c2.middle, c2.third
    x, xp = c1.x, c1.y
    y, yp = c2.x, c2.y
    d1 = f.arr(c1.delta)
    eps = f.arr(c2.delta)
    z = cat.compose(x, y)
    epsp = ext.lact_apply(xp, eps, D)  # x' eps in E(D, C)
    if not ws.has_realization(D, C, epsp):
        raise TableIncomplete("pushout class of the cone pair not stored")
    target = ws.realize(D, C, epsp)
    candidates = mid_index(ws).get((X, Z), [])
    if not candidates:
        raise TableIncomplete("no stored classes with the composite's ends")
    any_cone = False
    for E_obj, dkp, stored in candidates:
        sys = LinSys(f)
        sys.unknown("eb", cat.hom_dim(Z, stored.middle))
        sys.eq([("eb", cat.right_mul_matrix(z, stored.middle))], stored.x.vec)
        sol = sys.solve()
        if sol is None:
            continue
        dp_pre = f.arr(dkp)
        # cheap necessary conditions pinning the candidate class
        if not f.consistent(right_contraction(ws, C, E_obj, X, dp_pre), [d1]):
            continue
        if not f.consistent(right_contraction(ws, E_obj, D, Y, eps),
                            [ext.lact_apply(x, dp_pre, E_obj)]):
            continue
        got = find_invertible(cat, Z, stored.middle, sol.x0, sol.ker)
        if got is None:
            continue
        any_cone = True
        ebar = Mor(cat, Z, stored.middle, got)
        zp = cat.compose(ebar, stored.y)
        dp = f.arr(dkp)
        # c: C -> E and d: E -> D with the four commuting constraints
        sys2 = LinSys(f)
        sys2.unknown("c", cat.hom_dim(C, E_obj))
        sys2.unknown("d", cat.hom_dim(E_obj, D))
        sys2.eq([("c", cat.right_mul_matrix(xp, E_obj))], cat.compose(y, zp).vec)
        sys2.eq([("d", cat.right_mul_matrix(zp, D))], yp.vec)
        sys2.eq([("c", right_contraction(ws, C, E_obj, X, dp))], d1)
        sys2.eq([("d", right_contraction(ws, E_obj, D, Y, eps))],
                ext.lact_apply(x, dp, E_obj))
        sol2 = sys2.solve()
        if sol2 is None:
            continue
        for vec in sol2.points(64):
            c_m = Mor(cat, C, E_obj, sol2.extract("c", vec))
            d_m = Mor(cat, E_obj, D, sol2.extract("d", vec))
            if same_class(ws, (c_m, d_m), target):
                return True
    if not any_cone:
        raise TableIncomplete("no realized cone of the composite inflation")
    return False
