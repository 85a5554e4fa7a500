"""Axiom validation for a loaded extension structure, plus the basic diagram
constructions (inflation from a morphism, shifted octahedra, composite
diagrams) the rest of the pipeline builds on.

Fill-in morphisms are always found by linear solves; only conflations are
ever searched for, and those searches are bounded by the realization table.
A missing class is reported as table incompleteness, never as an axiom
violation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .category import Mor, Obj, ZERO, col_mor, row_mor
from .ext import Conflation, FullExt, TableIncomplete, Workspace
from .field import CapExceeded
from .linsys import LinSys, mor_inverse
from .quotient import Report

ENUM_BUDGET = 4096
RANDOM_TRIES = 2000
PAIR_POINTS = 64  # affine points tried when a class test follows a solve


# -- indices ---------------------------------------------------------------


def mid_index(ws: Workspace):
    """Stored conflations indexed by (first, middle)."""
    if not hasattr(ws, "_mid_index"):
        idx = {}
        for (third, first), entries in ws.table.items():
            for dk, conf in entries.items():
                idx.setdefault((first, conf.middle), []).append((third, dk, conf))
        for v in idx.values():
            v.sort(key=lambda t: (t[0].parts, t[1]))
        ws._mid_index = idx
    return ws._mid_index


def first_index(ws: Workspace):
    if not hasattr(ws, "_first_index"):
        idx = {}
        for (third, first), entries in ws.table.items():
            for dk, conf in entries.items():
                idx.setdefault(first, []).append((third, dk, conf))
        for v in idx.values():
            v.sort(key=lambda t: (t[0].parts, t[1]))
        ws._first_index = idx
    return ws._first_index


def _lact_tensor(ws: Workspace, third: Obj, a_from: Obj, a_to: Obj):
    if not hasattr(ws, "_lact_tensors"):
        ws._lact_tensors = {}
    key = (third, a_from, a_to)
    hit = ws._lact_tensors.get(key)
    if hit is not None:
        return hit
    cat, ext, f = ws.cat, ws.ext, ws.field
    k = cat.hom_dim(a_from, a_to)
    if k:
        stack = np.stack([
            ext.left_action_matrix(Mor(cat, a_from, a_to, _unit(f, k, i)), third)
            for i in range(k)
        ])
    else:
        stack = np.zeros((0, ext.dim(third, a_to), ext.dim(third, a_from)), dtype=np.int64)
    ws._lact_tensors[key] = stack
    return stack


def _ract_tensor(ws: Workspace, third_from: Obj, third_to: Obj, first: Obj):
    if not hasattr(ws, "_ract_tensors"):
        ws._ract_tensors = {}
    key = (third_from, third_to, first)
    hit = ws._ract_tensors.get(key)
    if hit is not None:
        return hit
    cat, ext, f = ws.cat, ws.ext, ws.field
    k = cat.hom_dim(third_from, third_to)
    if k:
        stack = np.stack([
            ext.right_action_matrix(Mor(cat, third_from, third_to, _unit(f, k, i)), first)
            for i in range(k)
        ])
    else:
        stack = np.zeros((0, ext.dim(third_from, first), ext.dim(third_to, first)), dtype=np.int64)
    ws._ract_tensors[key] = stack
    return stack


def left_contraction(ws: Workspace, third: Obj, a_from: Obj, a_to: Obj, delta):
    """Matrix of a |-> a o delta on Hom(a_from, a_to), for fixed delta."""
    stack = _lact_tensor(ws, third, a_from, a_to)
    if stack.shape[0] == 0:
        return ws.field.zeros(ws.ext.dim(third, a_to), 0)
    return np.tensordot(stack, np.asarray(delta, dtype=np.int64), axes=(2, 0)).T % ws.field.p


def right_contraction(ws: Workspace, third_from: Obj, third_to: Obj, first: Obj, delta):
    """Matrix of b |-> delta o b on Hom(third_from, third_to), for fixed delta."""
    stack = _ract_tensor(ws, third_from, third_to, first)
    if stack.shape[0] == 0:
        return ws.field.zeros(ws.ext.dim(third_from, first), 0)
    return np.tensordot(stack, np.asarray(delta, dtype=np.int64), axes=(2, 0)).T % ws.field.p


# -- invertible points in affine morphism families ---------------------------


def _hash_stream(seed_bytes: bytes, k: int, p: int):
    import hashlib

    counter = 0
    while True:
        h = hashlib.sha256(seed_bytes + counter.to_bytes(4, "little")).digest()
        if k <= 32:
            yield np.frombuffer(h, dtype=np.uint8)[:k].astype(np.int64) % p
        else:
            buf = h
            while len(buf) < k:
                counter += 1
                buf += hashlib.sha256(seed_bytes + counter.to_bytes(4, "little")).digest()
            yield np.frombuffer(buf[:k], dtype=np.uint8).astype(np.int64) % p
        counter += 1


def _unit_mul_stacks(cat, dom: Obj, cod: Obj):
    """Per-basis right/left multiplication matrices for Hom(dom, cod),
    stacked so that the operators of any morphism are linear assemblies."""
    key = (dom, cod)
    if not hasattr(cat, "_unit_mul_cache"):
        cat._unit_mul_cache = {}
    hit = cat._unit_mul_cache.get(key)
    if hit is not None:
        return hit
    f = cat.field
    d = cat.hom_dim(dom, cod)
    rstack = np.stack(
        [cat.right_mul_matrix(Mor(cat, dom, cod, _unit(f, d, k)), dom) for k in range(d)]
    ) if d else np.zeros((0, cat.hom_dim(dom, dom), 0), dtype=np.int64)
    lstack = np.stack(
        [cat.left_mul_matrix(Mor(cat, dom, cod, _unit(f, d, k)), cod) for k in range(d)]
    ) if d else np.zeros((0, 0, 0), dtype=np.int64)
    cat._unit_mul_cache[key] = (rstack, lstack)
    return rstack, lstack


def _unit(f, d, k):
    v = f.zeros(d)
    v[k] = 1
    return v


def is_invertible(cat, dom: Obj, cod: Obj, vec) -> bool:
    """Two-sided invertibility of the morphism with the given coordinates."""
    f = cat.field
    d = cat.hom_dim(dom, cod)
    if d == 0:
        return cat.hom_dim(dom, dom) == 0 and cat.hom_dim(cod, cod) == 0
    if not hasattr(cat, "_inv_cache"):
        cat._inv_cache = {}
    key = (dom, cod, vec.tobytes())
    hit = cat._inv_cache.get(key)
    if hit is not None:
        return hit
    rstack, lstack = _unit_mul_stacks(cat, dom, cod)
    rm = np.tensordot(vec, rstack, axes=(0, 0)) % f.p  # g |-> g o e on Hom(cod, dom)
    lm = np.tensordot(vec, lstack, axes=(0, 0)) % f.p  # g |-> e o g
    a = np.concatenate([rm, lm], axis=0)
    rhs = np.concatenate([cat.id_mor(dom).vec, cat.id_mor(cod).vec])
    res = f.consistent(a, [rhs])
    if len(cat._inv_cache) < 300000:
        cat._inv_cache[key] = res
    return res


def find_invertible(cat, dom: Obj, cod: Obj, x0, ker, budget=ENUM_BUDGET):
    """An invertible morphism in the affine family x0 + span(ker rows).

    Tries the particular solution, single basis steps, full enumeration for
    small families, then a deterministic pseudo-random sweep.  Returns the
    coordinate vector or None; raises CapExceeded if the family is too large
    to decide negatively.
    """
    f = cat.field
    k = ker.shape[0]

    def test(vec):
        return vec if is_invertible(cat, dom, cod, vec) else None

    got = test(x0)
    if got is not None:
        return got
    if k == 0:
        return None
    for i in range(k):
        got = test((x0 + ker[i]) % f.p)
        if got is not None:
            return got
    if f.p ** k <= budget:
        for vec in f.affine_elements(x0, ker, budget):
            got = test(vec)
            if got is not None:
                return got
        return None
    for _, coeffs in zip(range(RANDOM_TRIES), _hash_stream(x0.tobytes() + ker.tobytes(), k, f.p)):
        got = test((x0 + coeffs @ ker) % f.p)
        if got is not None:
            return got
    raise CapExceeded(f"invertibility search in a family of size {f.p}^{k} is undecided")


def same_class(ws: Workspace, a, b) -> bool:
    """Equivalence of two three-term sequences with equal end terms."""
    cat, f = ws.cat, ws.field
    xa, ya = (a.x, a.y) if isinstance(a, Conflation) else a
    xb, yb = (b.x, b.y) if isinstance(b, Conflation) else b
    if xa.dom != xb.dom or ya.cod != yb.cod or xa.cod != xb.cod:
        return False
    sys = LinSys(f)
    sys.unknown("e", cat.hom_dim(xa.cod, xb.cod))
    sys.eq([("e", cat.right_mul_matrix(xa, xb.cod))], xb.vec)
    sys.eq([("e", cat.left_mul_matrix(yb, xa.cod))], ya.vec)
    sol = sys.solve()
    if sol is None:
        return False
    return find_invertible(cat, xa.cod, xb.cod, sol.x0, sol.ker) is not None


def class_of(ws: Workspace, x: Mor, y: Mor):
    """The stored extension class realized by the sequence (x, y), or None."""
    key = (y.cod, x.dom)
    for dk in sorted(ws.table.get(key, {})):
        if same_class(ws, (x, y), ws.table[key][dk]):
            return dk
    return None


@dataclass
class ConeResult:
    delta: tuple
    zprime: Mor
    third: Obj


def find_cone(ws: Workspace, z: Mor, rel=None, require=None, order=None):
    """A realized conflation with inflation exactly z, as (delta, z', cone).

    For each stored class with matching (first, middle), an invertible ebar
    with ebar o z = x_stored turns the stored sequence into one whose
    inflation is z, with deflation z' = y_stored o ebar.
    """
    cat, f = ws.cat, ws.field
    candidates = mid_index(ws).get((z.dom, z.cod), [])
    if order is not None:
        candidates = order(candidates)
    for third, dk, conf in candidates:
        if rel is not None and not rel.contains(third, z.dom, dk):
            continue
        if require is not None and not cat.obj_of_subcat(third, require):
            continue
        sys = LinSys(f)
        sys.unknown("eb", cat.hom_dim(z.cod, conf.middle))
        sys.eq([("eb", cat.right_mul_matrix(z, conf.middle))], conf.x.vec)
        sol = sys.solve()
        if sol is None:
            continue
        got = find_invertible(cat, z.cod, conf.middle, sol.x0, sol.ker)
        if got is None:
            continue
        ebar = Mor(cat, z.cod, conf.middle, got)
        return ConeResult(delta=dk, zprime=cat.compose(ebar, conf.y), third=third)
    raise TableIncomplete(
        f"no realized cone for an inflation {cat.obj_name(z.dom)} -> {cat.obj_name(z.cod)}"
    )


def find_cocone(ws: Workspace, y: Mor, rel=None, require=None, order=None):
    """Dual: a realized conflation with deflation exactly y, as (delta, y', cocone)."""
    op = ws.op()
    res = find_cone(op, ws.mor_to_op(y),
                    rel=rel.op() if rel is not None else None,
                    require=require, order=order)
    return ConeResult(delta=res.delta, zprime=op.mor_to_op(res.zprime), third=res.third)


# -- Lemma-style constructions ---------------------------------------------


def inflation_from(ws: Workspace, f_mor: Mor, conf: Conflation):
    """Extend a morphism out of the first term of a conflation to an inflation.

    Given f: X -> X' and a conflation X -> E -> T with class d, realizes the
    pushout class f.d as X' -> E' -> T, solves the connecting map g: E -> E',
    and returns the conflation [f; x]: X -> X' (+) E -> E' with class d.y'
    together with g.
    """
    cat, ext, f = ws.cat, ws.ext, ws.field
    if f_mor.dom != conf.first:
        raise ValueError("domain mismatch with the conflation's first term")
    third = conf.third
    delta = f.arr(conf.delta)
    fdelta = ext.lact_apply(f_mor, delta, third)
    target = ws.realize(third, f_mor.cod, fdelta)
    xp, yp = target.x, target.y
    sys = LinSys(f)
    sys.unknown("g", cat.hom_dim(conf.middle, target.middle))
    sys.eq([("g", cat.right_mul_matrix(conf.x, target.middle))],
           cat.compose(f_mor, xp).vec)
    sys.eq([("g", cat.left_mul_matrix(yp, conf.middle))], conf.y.vec)
    sol = sys.solve()
    if sol is None:
        raise TableIncomplete("no connecting morphism onto the pushout realization")
    g = Mor(cat, conf.middle, target.middle, sol.x0)
    atilde = col_mor(cat, [f_mor, conf.x])
    btilde = row_mor(cat, [cat.neg_mor(xp), g])
    new_delta = ext.ract_apply(delta, yp, conf.first)
    return Conflation(atilde, btilde, tuple(int(v) for v in new_delta)), g


@dataclass
class OctahedronWitness:
    w: Obj
    v1: Mor
    w1: Mor
    eps1: tuple
    v2: Mor
    w2: Mor
    eps2: tuple


def shifted_octahedron(ws: Workspace, t1: Conflation, t2: Conflation) -> OctahedronWitness:
    """For conflations X1 -> Y1 -> Z and X2 -> Y2 -> Z over a common third
    term, build the common-middle diagram: conflations X1 -> W -> Y2 and
    X2 -> W -> Y1 with its six commuting squares."""
    cat, ext, f = ws.cat, ws.ext, ws.field
    if t1.third != t2.third:
        raise ValueError("the conflations must share their third term")
    z = t1.third
    d1, d2 = f.arr(t1.delta), f.arr(t2.delta)
    eps2 = ext.ract_apply(d1, t2.y, t1.first)
    base = ws.realize(t2.middle, t1.first, eps2)
    v2, w2 = base.x, base.y
    w_obj = base.middle
    eps1 = ext.ract_apply(d2, t1.y, t2.first)
    stored1 = ws.realize(t1.middle, t2.first, eps1)
    # w1: y1 w1 = y2 w2 and w1 v2 = x1
    s1 = LinSys(f)
    s1.unknown("w1", cat.hom_dim(w_obj, t1.middle))
    s1.eq([("w1", cat.left_mul_matrix(t1.y, w_obj))], cat.compose(w2, t2.y).vec)
    s1.eq([("w1", cat.right_mul_matrix(v2, t1.middle))], t1.x.vec)
    sol1 = s1.solve()
    # v1: w2 v1 = x2 and v1 d2 = -(v2 d1) in E(Z, W)
    s2 = LinSys(f)
    s2.unknown("v1", cat.hom_dim(t2.first, w_obj))
    s2.eq([("v1", cat.left_mul_matrix(w2, t2.first))], t2.x.vec)
    s2.eq([("v1", left_contraction(ws, z, t2.first, w_obj, d2))],
          f.neg(ext.lact_apply(v2, d1, z)))
    sol2 = s2.solve()
    if sol1 is None or sol2 is None:
        raise TableIncomplete("octahedron fill-in systems unsolvable against the table")
    for vec1 in sol1.points(PAIR_POINTS):
        w1 = Mor(cat, w_obj, t1.middle, vec1)
        for vec2 in sol2.points(PAIR_POINTS):
            v1 = Mor(cat, t2.first, w_obj, vec2)
            if same_class(ws, (v1, w1), stored1):
                return OctahedronWitness(
                    w=w_obj, v1=v1, w1=w1, eps1=tuple(int(t) for t in eps1),
                    v2=v2, w2=w2, eps2=tuple(int(t) for t in eps2),
                )
    raise TableIncomplete("octahedron witness not found within the table")


@dataclass
class CompositeWitness:
    f: Mor
    g: Mor
    delta: tuple


def composite_octahedron(ws: Workspace, t_top: Conflation, t_mid: Conflation,
                         t_col: Conflation) -> CompositeWitness:
    """The composition diagram for conflations (a, b', d1), (c, d, d2),
    (a', b, d3) with c = b a: a conflation (b' a', g, delta) with
    g b' = d b, d2 g = d1, delta d = d3 and a' delta = -(a d2)."""
    cat, ext, f = ws.cat, ws.ext, ws.field
    a, bp = t_top.x, t_top.y
    c, dmor = t_mid.x, t_mid.y
    ap, b = t_col.x, t_col.y
    if cat.compose(a, b) != c:
        raise ValueError("the middle conflation's inflation must be the composite")
    d1, d2, d3 = f.arr(t_top.delta), f.arr(t_mid.delta), f.arr(t_col.delta)
    f_out = cat.compose(ap, bp)
    sg = LinSys(f)
    sg.unknown("g", cat.hom_dim(t_top.third, t_mid.third))
    sg.eq([("g", cat.right_mul_matrix(bp, t_mid.third))], cat.compose(b, dmor).vec)
    sg.eq([("g", right_contraction(ws, t_top.third, t_mid.third, t_mid.first, d2))], d1)
    solg = sg.solve()
    if solg is None:
        raise TableIncomplete("no connecting morphism in the composition diagram")
    # delta candidates: delta o d = d3 and a' delta = -(a d2)
    sd = LinSys(f)
    dim_delta = ext.dim(t_mid.third, t_col.first)
    sd.unknown("dl", dim_delta)
    rd = ext.right_action_matrix(dmor, t_col.first)
    sd.eq([("dl", rd)], d3)
    lam = ext.left_action_matrix(ap, t_mid.third)
    sd.eq([("dl", lam)], f.neg(ext.lact_apply(a, d2, t_mid.third)))
    sold = sd.solve()
    if sold is None:
        raise TableIncomplete("no extension class fits the composition diagram")
    for gvec in solg.points(PAIR_POINTS):
        g = Mor(cat, t_top.third, t_mid.third, gvec)
        for dvec in sold.points(PAIR_POINTS):
            dk = tuple(int(t) for t in dvec)
            if not ws.has_realization(t_mid.third, t_col.first, dk):
                continue
            if same_class(ws, (f_out, g), ws.realize(t_mid.third, t_col.first, dk)):
                return CompositeWitness(f=f_out, g=g, delta=dk)
    raise TableIncomplete("composition diagram witness not found within the table")
