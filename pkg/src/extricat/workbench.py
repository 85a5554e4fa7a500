"""Pipeline orchestration: run the condition checks, build the functors and
families, verify the axioms, and collect everything into one result object.
Also the triangulated-input front end and its self-consistency test.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .category import Mor, Obj
from .ext import TableIncomplete, Workspace
from .field import CapExceeded
from .mutation import (MutationTripleSpec, build_adjunction, certify,
                       check_adjunction, check_MT1, check_MT2, check_MT3,
                       check_MT4, check_plus_minus, freeze_reduction_triangles,
                       make_spec, plus_minus)
from .quotient import Report
from .triangles import (Triangle, TriangleFamily, exactness_probe,
                        generate_family, generate_left_family, is_member,
                        triangles_isomorphic, verify_LT, verify_pretriangulated,
                        verify_RT, verify_triangulated)


@dataclass
class PipelineResult:
    spec: MutationTripleSpec = None
    adj: object = None
    nabla: TriangleFamily = None
    fam_op: TriangleFamily = None
    pm: object = None
    verdicts: dict = dc_field(default_factory=dict)
    error: str | None = None

    @property
    def passed(self):
        return self.error is None and all(bool(v) for v in self.verdicts.values())

    def as_dict(self):
        out = {k: v.as_dict() for k, v in self.verdicts.items()}
        if self.error is not None:
            out["error"] = self.error
        return out


def parse_triple(ws: Workspace, text: str):
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError("a triple needs three comma-separated subcategories")
    out = []
    for token in parts:
        token = token.strip()
        if token in ws.subcats:
            out.append(ws.subcats[token])
        elif token in ("NONE", "0", ""):
            out.append(frozenset())
        elif token == "ALL":
            out.append(frozenset(range(ws.cat.n)))
        else:
            members = set()
            for nm in token.split("+"):
                members.add(ws.cat.index(nm.strip()))
            out.append(frozenset(members))
    return tuple(out)


def run_pipeline(ws: Workspace, S, Z, V, seed: int = 0,
                 stage: str = "triangulated") -> PipelineResult:
    """Stages: conditions < induce < axioms < triangulated."""
    ws.seed = seed
    res = PipelineResult()
    spec = make_spec(ws, S, Z, V)
    res.spec = spec
    try:
        for checker, key in ((check_MT1, "MT1"), (check_MT2, "MT2"), (check_MT3, "MT3")):
            rep = checker(spec)
            res.verdicts[key] = rep
            if not rep:
                return res
        if stage == "conditions":
            return res
        freeze_reduction_triangles(spec)
        adj = build_adjunction(spec)
        res.adj = adj
        res.verdicts["adjunction"] = check_adjunction(spec, adj)
        res.nabla = generate_family(spec, adj.Sigma)
        res.fam_op = generate_left_family(spec, adj.Omega)
        if stage == "induce":
            return res
        res.verdicts["RT"] = verify_RT(res.nabla)
        res.verdicts["LT"] = verify_LT(spec, res.fam_op)
        res.verdicts["exactness"] = exactness_probe(res.nabla)
        res.verdicts["pretriangulated"] = verify_pretriangulated(
            spec, res.nabla, res.fam_op, adj)
        res.pm = plus_minus(spec)
        res.verdicts["plus-minus"] = check_plus_minus(spec, res.pm)
        mt4 = check_MT4(spec, res.pm)
        res.verdicts["MT4"] = mt4
        if stage == "axioms":
            return res
        res.verdicts["triangulated"] = verify_triangulated(
            spec, adj, res.nabla, res.fam_op, mt4)
        return res
    except (TableIncomplete, CapExceeded) as e:
        res.error = str(e)
        return res


def gen_shifted_triple(ws: Workspace) -> MutationTripleSpec:
    """The self-consistency triple of a declared triangulated input: the
    empty subcategory on both sides, with the whole category between."""
    if ws.triangles is None:
        raise TableIncomplete("input carries no declared triangle table")
    return make_spec(ws, frozenset(), frozenset(range(ws.cat.n)), frozenset())


def shifted_self_consistency(ws: Workspace, seed: int = 0) -> tuple[Report, PipelineResult]:
    """Run the pipeline on the self-consistency triple and compare the
    induced structure with the declared shift and triangle table."""
    rep = Report("shifted-self-consistency")
    if ws.triangles is None:
        rep.fail("input carries no declared triangle table")
        return rep, None
    spec = gen_shifted_triple(ws)
    res = run_pipeline(ws, spec.S, spec.Z, spec.V, seed=seed, stage="triangulated")
    if res.error is not None:
        return rep.fail(f"pipeline error: {res.error}"), res
    if not res.passed:
        bad = [k for k, v in res.verdicts.items() if not v]
        return rep.fail(f"pipeline verdicts failed: {bad}"), res
    adj = res.adj
    shift_obj, shift_mor = ws.shift if ws.shift is not None else ({}, {})
    if ws.shift is not None:
        for i in sorted(shift_obj):
            if adj.Sigma.objmap[i] != shift_obj[i]:
                return rep.fail("induced shift disagrees on an object",
                                {"indec": i}), res
        for (i, j), mat in sorted(shift_mor.items()):
            if not np.array_equal(adj.Sigma.mormap[(i, j)] % ws.field.p, mat % ws.field.p):
                return rep.fail("induced shift disagrees on a basis morphism",
                                {"i": i, "j": j}), res
    q = res.spec.quotient.qcat
    matched = 0
    for (x, y, z, fv, gv, hv) in ws.triangles:
        cand = Triangle(
            x=x, y=y, q=z,
            f1=Mor(q, x, y, np.array(fv, dtype=np.int64)),
            f2=Mor(q, y, z, np.array(gv, dtype=np.int64)),
            f3=Mor(q, z, adj.Sigma.apply_obj(x), np.array(hv, dtype=np.int64)),
        )
        if not is_member(res.nabla, cand):
            return rep.fail("a declared triangle is not in the induced family",
                            {"x": x.parts, "f": list(fv)}), res
        matched += 1
    # every induced generator must match some declared row over the same map
    declared = {}
    for (x, y, z, fv, gv, hv) in ws.triangles:
        declared.setdefault((x, y, tuple(int(v) for v in fv)), []).append((z, gv, hv))
    for gen in res.nabla.generators:
        T = gen.triangle
        key = (T.x, T.y, tuple(int(v) for v in T.f1.vec))
        rows = declared.get(key, [])
        ok = False
        for (z, gv, hv) in rows:
            cand = Triangle(
                x=T.x, y=T.y, q=z,
                f1=T.f1,
                f2=Mor(q, T.y, z, np.array(gv, dtype=np.int64)),
                f3=Mor(q, z, adj.Sigma.apply_obj(T.x), np.array(hv, dtype=np.int64)),
            )
            if triangles_isomorphic(res.nabla, T, cand):
                ok = True
                break
        if not ok:
            return rep.fail("an induced triangle has no declared counterpart",
                            {"x": T.x.parts, "f": T.f1.vec.tolist()}), res
    return rep.ok({"declared": matched}), res
