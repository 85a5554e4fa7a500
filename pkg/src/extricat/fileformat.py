"""The category file grammar (versioned header "extricat/1").

Line-oriented plain text with named sections; all matrices row-major, field
elements as decimal residues.  Emission is canonical (sorted), so files
round-trip byte-identically through emit then parse then emit.

    extricat/1
    p <prime>
    name <token>
    cap <int>                 (optional)
    [indec]    one name per line
    [hom]      one row of the dimension table per line
    [id]       <name> : coords
    [compose]  <i> <j> <l> : <k1> <k2> : coords of the composite
    [ext]      <c> <a> : dim
    [eact]     right <y> <c> <a> <k> : flattened action matrix
               left <c> <a> <a2> <k> : flattened action matrix
    [realize]  <third> : <first> : delta : <middle> : xvec : yvec
    [subcats]  <name> : member names      (optional)
    [shift]    obj <name> : <objexpr>     (optional, triangulated input)
               mor <i> <j> : flattened matrix
    [triangles] <X> : <Y> : <Z> : fvec : gvec : hvec   (optional)
"""

from __future__ import annotations

import numpy as np

from .category import CategoryPresentation, Mor, Obj, ZERO
from .ext import Conflation, ExtStructure, Workspace
from .field import PrimeField


class ParseError(ValueError):
    def __init__(self, msg, line=None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


def _obj_expr(cat: CategoryPresentation, x: Obj) -> str:
    return "0" if x.is_zero else "+".join(cat.names[i] for i in x.parts)


def _parse_obj(names_index, expr, lineno) -> Obj:
    expr = expr.strip()
    if expr == "0":
        return ZERO
    parts = []
    for nm in expr.split("+"):
        nm = nm.strip()
        if nm not in names_index:
            raise ParseError(f"unknown indecomposable {nm!r}", lineno)
        parts.append(names_index[nm])
    return Obj(tuple(sorted(parts)))


def _ints(text):
    return [int(t) for t in text.split()] if text.strip() else []


def emit(ws: Workspace) -> str:
    cat, ext = ws.cat, ws.ext
    out = ["extricat/1", f"p {ws.field.p}", f"name {ws.name or 'workspace'}", f"cap {ws.cap}"]
    out.append("[indec]")
    out.extend(cat.names)
    out.append("[hom]")
    for i in range(cat.n):
        out.append(" ".join(str(int(v)) for v in cat.homdim[i]))
    out.append("[id]")
    for i in range(cat.n):
        out.append(f"{cat.names[i]} : " + " ".join(str(int(v)) for v in cat.idc[i]))
    out.append("[compose]")
    for i in range(cat.n):
        for j in range(cat.n):
            for l in range(cat.n):
                dij, djl = int(cat.homdim[i][j]), int(cat.homdim[j][l])
                if dij == 0 or djl == 0 or cat.homdim[i][l] == 0:
                    continue
                c = cat.comp_const(i, j, l)
                for k1 in range(dij):
                    for k2 in range(djl):
                        coords = " ".join(str(int(v)) for v in c[k1, k2])
                        out.append(f"{cat.names[i]} {cat.names[j]} {cat.names[l]} : {k1} {k2} : {coords}")
    out.append("[ext]")
    for c in range(cat.n):
        for a in range(cat.n):
            out.append(f"{cat.names[c]} {cat.names[a]} : {int(ext.extdim[c][a])}")
    out.append("[eact]")
    for (y, c, a) in sorted(ext.ract):
        arr = ext.ract[(y, c, a)]
        if arr.size == 0:
            continue
        for k in range(arr.shape[0]):
            flat = " ".join(str(int(v)) for v in arr[k].reshape(-1))
            out.append(f"right {cat.names[y]} {cat.names[c]} {cat.names[a]} {k} : {flat}")
    for (c, a, a2) in sorted(ext.lact):
        arr = ext.lact[(c, a, a2)]
        if arr.size == 0:
            continue
        for k in range(arr.shape[0]):
            flat = " ".join(str(int(v)) for v in arr[k].reshape(-1))
            out.append(f"left {cat.names[c]} {cat.names[a]} {cat.names[a2]} {k} : {flat}")
    out.append("[realize]")
    for (third, first) in sorted(ws.table.keys()):
        for dk in sorted(ws.table[(third, first)]):
            conf = ws.table[(third, first)][dk]
            out.append(" : ".join([
                _obj_expr(cat, third),
                _obj_expr(cat, first),
                " ".join(str(int(v)) for v in dk),
                _obj_expr(cat, conf.middle),
                " ".join(str(int(v)) for v in conf.x.vec),
                " ".join(str(int(v)) for v in conf.y.vec),
            ]))
    if ws.subcats:
        out.append("[subcats]")
        for nm in sorted(ws.subcats):
            members = " ".join(cat.names[i] for i in sorted(ws.subcats[nm]))
            out.append(f"{nm} : {members}")
    if ws.shift is not None:
        out.append("[shift]")
        objmap, mormap = ws.shift
        for i in sorted(objmap):
            out.append(f"obj {cat.names[i]} : {_obj_expr(cat, objmap[i])}")
        for (i, j) in sorted(mormap):
            flat = " ".join(str(int(v)) for v in np.asarray(mormap[(i, j)]).reshape(-1))
            out.append(f"mor {cat.names[i]} {cat.names[j]} : {flat}")
    if ws.triangles is not None:
        out.append("[triangles]")
        for (x, y, z, fv, gv, hv) in ws.triangles:
            out.append(" : ".join([
                _obj_expr(cat, x), _obj_expr(cat, y), _obj_expr(cat, z),
                " ".join(str(int(v)) for v in fv),
                " ".join(str(int(v)) for v in gv),
                " ".join(str(int(v)) for v in hv),
            ]))
    return "\n".join(out) + "\n"


def parse(text: str) -> Workspace:
    lines = text.splitlines()
    if not lines or lines[0].strip() != "extricat/1":
        raise ParseError("missing or unsupported format header", 1)
    p = None
    name = ""
    cap = 1 << 16
    section = None
    idx = {}
    names = []
    homdim_rows = []
    idc = {}
    comp = {}
    extdim_rows = {}
    ract = {}
    lact = {}
    realize_rows = []
    subcats = {}
    shift_obj = {}
    shift_mor = {}
    triangles = []
    seen_shift = False
    seen_tri = False

    def need_field(lineno):
        if p is None:
            raise ParseError("field characteristic not declared before sections", lineno)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if lineno == 1:
            continue
        if line.startswith("["):
            section = line.strip()
            if section not in ("[indec]", "[hom]", "[id]", "[compose]", "[ext]",
                               "[eact]", "[realize]", "[subcats]", "[shift]", "[triangles]"):
                raise ParseError(f"unknown section {section}", lineno)
            if section == "[shift]":
                seen_shift = True
            if section == "[triangles]":
                seen_tri = True
            continue
        if section is None:
            tok = line.split()
            if tok[0] == "p":
                p = int(tok[1])
            elif tok[0] == "name":
                name = tok[1] if len(tok) > 1 else ""
            elif tok[0] == "cap":
                cap = int(tok[1])
            else:
                raise ParseError(f"unexpected header line {line!r}", lineno)
            continue
        need_field(lineno)
        if section == "[indec]":
            nm = line.strip()
            if nm in idx:
                raise ParseError(f"duplicate indecomposable {nm!r}", lineno)
            idx[nm] = len(names)
            names.append(nm)
        elif section == "[hom]":
            homdim_rows.append(_ints(line))
        elif section == "[id]":
            nm, coords = line.split(":", 1)
            nm = nm.strip()
            if nm not in idx:
                raise ParseError(f"unknown indecomposable {nm!r}", lineno)
            idc[idx[nm]] = _ints(coords)
        elif section == "[compose]":
            try:
                head, ks, coords = line.split(":")
            except ValueError:
                raise ParseError("malformed composition line", lineno)
            i, j, l = (idx[t] for t in head.split())
            k1, k2 = _ints(ks)
            comp.setdefault((i, j, l), {})[(k1, k2)] = _ints(coords)
        elif section == "[ext]":
            head, dim = line.split(":")
            c, a = (idx[t] for t in head.split())
            extdim_rows[(c, a)] = int(dim)
        elif section == "[eact]":
            head, flat = line.split(":", 1)
            tok = head.split()
            kind = tok[0]
            if kind == "right":
                y, c, a = idx[tok[1]], idx[tok[2]], idx[tok[3]]
                k = int(tok[4])
                ract.setdefault((y, c, a), {})[k] = _ints(flat)
            elif kind == "left":
                c, a, a2 = idx[tok[1]], idx[tok[2]], idx[tok[3]]
                k = int(tok[4])
                lact.setdefault((c, a, a2), {})[k] = _ints(flat)
            else:
                raise ParseError(f"unknown action kind {kind!r}", lineno)
        elif section == "[realize]":
            fields = [t.strip() for t in line.split(":")]
            if len(fields) != 6:
                raise ParseError("realization line needs 6 fields", lineno)
            realize_rows.append((lineno, fields))
        elif section == "[subcats]":
            nm, members = line.split(":", 1)
            subcats[nm.strip()] = frozenset(idx[t] for t in members.split())
        elif section == "[shift]":
            tok = line.split(":", 1)
            head = tok[0].split()
            if head[0] == "obj":
                shift_obj[idx[head[1]]] = (tok[1].strip(), lineno)
            elif head[0] == "mor":
                shift_mor[(idx[head[1]], idx[head[2]])] = _ints(tok[1])
            else:
                raise ParseError("malformed shift line", lineno)
        elif section == "[triangles]":
            fields = [t.strip() for t in line.split(":")]
            if len(fields) != 6:
                raise ParseError("triangle line needs 6 fields", lineno)
            triangles.append((lineno, fields))

    if p is None:
        raise ParseError("field characteristic never declared")
    field = PrimeField(p)
    n = len(names)
    if len(homdim_rows) != n or any(len(r) != n for r in homdim_rows):
        raise ParseError("dimension table shape does not match the indecomposables")
    homdim = np.array(homdim_rows, dtype=np.int64)
    comp_arrays = {}
    for (i, j, l), entries in comp.items():
        arr = np.zeros((homdim[i][j], homdim[j][l], homdim[i][l]), dtype=np.int64)
        for (k1, k2), coords in entries.items():
            arr[k1, k2] = coords
        comp_arrays[(i, j, l)] = arr
    idc_list = [field.arr(idc.get(i, [])) for i in range(n)]
    cat = CategoryPresentation(field, names, homdim, comp_arrays, idc_list)
    extdim = np.zeros((n, n), dtype=np.int64)
    for (c, a), d in extdim_rows.items():
        extdim[c][a] = d
    ract_arrays = {}
    for (y, c, a), entries in ract.items():
        arr = np.zeros((homdim[y][c], extdim[c][a], extdim[y][a]), dtype=np.int64)
        for k, flat in entries.items():
            arr[k] = np.array(flat, dtype=np.int64).reshape(extdim[c][a], extdim[y][a])
        ract_arrays[(y, c, a)] = arr
    lact_arrays = {}
    for (c, a, a2), entries in lact.items():
        arr = np.zeros((homdim[a][a2], extdim[c][a], extdim[c][a2]), dtype=np.int64)
        for k, flat in entries.items():
            arr[k] = np.array(flat, dtype=np.int64).reshape(extdim[c][a], extdim[c][a2])
        lact_arrays[(c, a, a2)] = arr
    ext = ExtStructure(cat, extdim, ract_arrays, lact_arrays)
    table = {}
    for lineno, fields in realize_rows:
        third = _parse_obj(idx, fields[0], lineno)
        first = _parse_obj(idx, fields[1], lineno)
        dk = tuple(_ints(fields[2]))
        middle = _parse_obj(idx, fields[3], lineno)
        if len(dk) != ext.dim(third, first):
            raise ParseError("class coordinates have the wrong length", lineno)
        try:
            x = Mor(cat, first, middle, _ints(fields[4]))
            y = Mor(cat, middle, third, _ints(fields[5]))
        except ValueError as e:
            raise ParseError(str(e), lineno)
        table.setdefault((third, first), {})[dk] = Conflation(x, y, dk)
    shift = None
    if seen_shift:
        objmap = {}
        for i, (expr, lineno) in shift_obj.items():
            objmap[i] = _parse_obj(idx, expr, lineno)
        mormap = {}
        for (i, j), flat in shift_mor.items():
            rows = cat.hom_dim(objmap[i], objmap[j])
            cols = int(homdim[i][j])
            mormap[(i, j)] = np.array(flat, dtype=np.int64).reshape(rows, cols) if rows * cols else np.zeros((rows, cols), dtype=np.int64)
        shift = (objmap, mormap)
    tri_list = None
    if seen_tri:
        tri_list = []
        for lineno, fields in triangles:
            x = _parse_obj(idx, fields[0], lineno)
            y = _parse_obj(idx, fields[1], lineno)
            z = _parse_obj(idx, fields[2], lineno)
            tri_list.append((x, y, z,
                             tuple(_ints(fields[3])), tuple(_ints(fields[4])),
                             tuple(_ints(fields[5]))))
    return Workspace(cat, ext, table, subcats=subcats, name=name, cap=cap,
                     shift=shift, triangles=tri_list)
