"""Approximation theory: relative epimorphisms and monomorphisms, one-sided
approximations, strong finiteness with frozen triangle choices, and the
relative Frobenius test.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .category import Mor, Obj, ZERO, col_mor, row_mor
from .ext import Conflation, FullExt, Workspace
from .quotient import Report


def is_epic_for(ws: Workspace, a: Mor, members) -> bool:
    """Surjectivity of postcomposition with a on maps out of every member."""
    cat, f = ws.cat, ws.field
    for d in sorted(members):
        dob = Obj((d,))
        target = cat.hom_dim(dob, a.cod)
        if target == 0:
            continue
        m = cat.left_mul_matrix(a, dob)
        if f.rank(m) != target:
            return False
    return True


def is_monic_for(ws: Workspace, a: Mor, members) -> bool:
    """Surjectivity of precomposition with a on maps into every member."""
    cat, f = ws.cat, ws.field
    for d in sorted(members):
        dob = Obj((d,))
        target = cat.hom_dim(a.dom, dob)
        if target == 0:
            continue
        m = cat.right_mul_matrix(a, dob)
        if f.rank(m) != target:
            return False
    return True


def right_approximation(ws: Workspace, x: Obj, members) -> Mor:
    """The canonical evaluation morphism onto x from a sum of members,
    greedily pruned to a smaller sum that still approximates.

    The full evaluation (one summand per basis map out of each member) is
    always an approximation; minimality is not attempted.
    """
    cat = ws.cat
    pieces = []
    for d in sorted(members):
        dob = Obj((d,))
        for k in range(cat.hom_dim(dob, x)):
            unit = ws.field.zeros(cat.hom_dim(dob, x))
            unit[k] = 1
            pieces.append(Mor(cat, dob, x, unit))
    if not pieces:
        return cat.zero_mor(ZERO, x)
    keep = list(pieces)
    for i in range(len(pieces)):
        trial = keep[:]
        target = pieces[i]
        if target not in trial:
            continue
        trial.remove(target)
        if trial and is_epic_for(ws, row_mor(cat, trial), members):
            keep = trial
    return row_mor(cat, keep)


def left_approximation(ws: Workspace, x: Obj, members) -> Mor:
    cat = ws.cat
    pieces = []
    for d in sorted(members):
        dob = Obj((d,))
        for k in range(cat.hom_dim(x, dob)):
            unit = ws.field.zeros(cat.hom_dim(x, dob))
            unit[k] = 1
            pieces.append(Mor(cat, x, dob, unit))
    if not pieces:
        return cat.zero_mor(x, ZERO)
    keep = list(pieces)
    for i in range(len(pieces)):
        trial = keep[:]
        target = pieces[i]
        if target not in trial:
            continue
        trial.remove(target)
        if trial and is_monic_for(ws, col_mor(cat, trial), members):
            keep = trial
    return col_mor(cat, keep)


@dataclass
class ApproximationTriangle:
    """A conflation whose inflation (left) or deflation (right) leg is an
    approximation into/from the approximating subcategory."""

    x: Obj
    conflation: Conflation
    direction: str  # "left": x -> I^x -> x<1>; "right": x<-1> -> I_x -> x


def left_triangle_candidates(ws: Workspace, x: Obj, members, rel):
    """Stored conflations x -> I -> T with I in the subcategory, the inflation
    a left approximation, and class inside rel, in deterministic order."""
    cat = ws.cat
    out = []
    for (third, first), entries in sorted(ws.table.items()):
        if first != x:
            continue
        for dk in sorted(entries):
            conf = entries[dk]
            if not cat.obj_of_subcat(conf.middle, members):
                continue
            if not rel.contains(third, first, dk):
                continue
            if not is_monic_for(ws, conf.x, members):
                continue
            out.append(conf)
    return ws.order(out, f"left-tri-{cat.obj_name(x)}")


def right_triangle_candidates(ws: Workspace, x: Obj, members, rel):
    cat = ws.cat
    out = []
    for (third, first), entries in sorted(ws.table.items()):
        if third != x:
            continue
        for dk in sorted(entries):
            conf = entries[dk]
            if not cat.obj_of_subcat(conf.middle, members):
                continue
            if not rel.contains(third, first, dk):
                continue
            if not is_epic_for(ws, conf.y, members):
                continue
            out.append(conf)
    return ws.order(out, f"right-tri-{cat.obj_name(x)}")


def strongly_covariantly_finite(ws: Workspace, members, inside, rel=None) -> Report:
    """Every indecomposable of `inside` admits a realized conflation whose
    inflation is a left approximation into the subcategory.  The report
    carries the frozen triangle choices."""
    rel = rel if rel is not None else FullExt(ws)
    rep = Report("strongly-covariantly-finite")
    choices = {}
    for i in sorted(inside):
        x = Obj((i,))
        cands = left_triangle_candidates(ws, x, members, rel)
        if not cands:
            return rep.fail(
                f"no approximation inflation for {ws.cat.names[i]}", {"indec": i}
            )
        choices[i] = ApproximationTriangle(x=x, conflation=cands[0], direction="left")
    rep.ok()
    rep.choices = choices
    return rep


def strongly_contravariantly_finite(ws: Workspace, members, inside, rel=None) -> Report:
    rel = rel if rel is not None else FullExt(ws)
    rep = Report("strongly-contravariantly-finite")
    choices = {}
    for i in sorted(inside):
        x = Obj((i,))
        cands = right_triangle_candidates(ws, x, members, rel)
        if not cands:
            return rep.fail(
                f"no approximation deflation for {ws.cat.names[i]}", {"indec": i}
            )
        choices[i] = ApproximationTriangle(x=x, conflation=cands[0], direction="right")
    rep.ok()
    rep.choices = choices
    return rep


def is_relative_frobenius(ws: Workspace, members) -> Report:
    """Strong functorial finiteness of the subcategory in the whole category
    together with agreement of the two relative structures."""
    rep = Report("relative-frobenius")
    allobj = frozenset(range(ws.cat.n))
    cov = strongly_covariantly_finite(ws, members, allobj)
    if not cov:
        return rep.fail("not strongly covariantly finite", cov.witness)
    contra = strongly_contravariantly_finite(ws, members, allobj)
    if not contra:
        return rep.fail("not strongly contravariantly finite", contra.witness)
    sub = ws.restrict(members, "sub")
    sup = ws.restrict(members, "sup")
    f = ws.field
    for c in range(ws.cat.n):
        for a in range(ws.cat.n):
            b1 = f.row_space(sub.basis[(c, a)])
            b2 = f.row_space(sup.basis[(c, a)])
            if b1.shape != b2.shape or not np.array_equal(b1, b2):
                return rep.fail(
                    "the two relative structures differ",
                    {"c": c, "a": a},
                )
    return rep.ok()


def epic_matches_relative(ws: Workspace, members) -> Report:
    """Membership in the precomposition-killed subfunctor is equivalent to the
    deflation being epic for the subcategory, and dually, over the table."""
    rep = Report("relative-vs-approximation")
    sub = ws.restrict(members, "sub")
    sup = ws.restrict(members, "sup")
    for (third, first), entries in sorted(ws.table.items()):
        for dk, conf in sorted(entries.items()):
            in_sub = sub.contains(third, first, dk)
            if in_sub != is_epic_for(ws, conf.y, members):
                return rep.fail(
                    "precomposition-killed membership disagrees with epic test",
                    {"third": third, "first": first, "delta": list(dk)},
                )
            in_sup = sup.contains(third, first, dk)
            if in_sup != is_monic_for(ws, conf.x, members):
                return rep.fail(
                    "postcomposition-killed membership disagrees with monic test",
                    {"third": third, "first": first, "delta": list(dk)},
                )
    return rep.ok()
