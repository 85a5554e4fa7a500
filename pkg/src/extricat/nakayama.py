"""Module categories of F_p[x]/(x^n) as workspaces, with independent oracles.

Indecomposables are the nilpotent Jordan modules M_1, ..., M_n (M_i of
dimension i).  Hom bases are the canonical monomial maps 1 |-> x^(shift+t);
extensions are computed from the projective presentation of each module and
realized by explicit pushouts, then cross-checked by a brute-force short
exact sequence enumerator and a syzygy computation that never touch the
extension tables.
"""

from __future__ import annotations

import numpy as np

from .category import CategoryPresentation, Mor, Obj, ZERO
from .ext import Conflation, ExtStructure, Workspace
from .field import CapExceeded, PrimeField


# -- canonical modules --------------------------------------------------------


def part_dim(i: int) -> int:
    return i + 1  # part index i encodes the Jordan module M_{i+1}


def obj_dim(x: Obj) -> int:
    return sum(part_dim(i) for i in x.parts)


def x_action(x: Obj) -> np.ndarray:
    """Nilpotent action matrix of x on the canonical module of an object."""
    d = obj_dim(x)
    m = np.zeros((d, d), dtype=np.int64)
    off = 0
    for i in x.parts:
        s = part_dim(i)
        for r in range(s - 1):
            m[off + r + 1, off + r] = 1
        off += s
    return m


def hom_basis_matrix(n: int, i: int, j: int, t: int) -> np.ndarray:
    """Matrix of the t-th canonical basis map M_{i+1} -> M_{j+1}."""
    di, dj = part_dim(i), part_dim(j)
    shift = max(dj - di, 0) + t
    m = np.zeros((dj, di), dtype=np.int64)
    for s in range(di):
        if s + shift < dj:
            m[s + shift, s] = 1
    return m


def _hom_dims(n: int) -> np.ndarray:
    hd = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            hd[i][j] = min(part_dim(i), part_dim(j))
    return hd


def build_presentation(n: int, field: PrimeField) -> CategoryPresentation:
    names = [f"M{i + 1}" for i in range(n)]
    hd = _hom_dims(n)
    comp = {}
    for i in range(n):
        for j in range(n):
            for l in range(n):
                dij, djl, dil = int(hd[i][j]), int(hd[j][l]), int(hd[i][l])
                if dij == 0 or djl == 0 or dil == 0:
                    continue
                c = np.zeros((dij, djl, dil), dtype=np.int64)
                base_ij = max(part_dim(j) - part_dim(i), 0)
                base_jl = max(part_dim(l) - part_dim(j), 0)
                base_il = max(part_dim(l) - part_dim(i), 0)
                for a in range(dij):
                    for b in range(djl):
                        e = base_ij + a + base_jl + b
                        if e < part_dim(l):
                            w = e - base_il
                            if 0 <= w < dil:
                                c[a, b, w] = 1
                comp[(i, j, l)] = c
    idc = []
    for i in range(n):
        v = np.zeros(int(hd[i][i]), dtype=np.int64)
        v[0] = 1
        idc.append(v)
    return CategoryPresentation(field, names, hd, comp, idc)


# -- converting between matrices and block coordinates ------------------------


def mor_matrix(cat: CategoryPresentation, m: Mor) -> np.ndarray:
    """Explicit module map matrix of a block-coordinate morphism."""
    n = cat.n
    rows, cols = obj_dim(m.cod), obj_dim(m.dom)
    out = np.zeros((rows, cols), dtype=np.int64)
    roff = 0
    for tp, t in enumerate(m.cod.parts):
        coff = 0
        for sp, s in enumerate(m.dom.parts):
            b = cat.block(m, tp, sp)
            for k in range(b.size):
                if b[k]:
                    out[roff : roff + part_dim(t), coff : coff + part_dim(s)] += (
                        int(b[k]) * hom_basis_matrix(n, s, t, k)
                    )
            coff += part_dim(s)
        roff += part_dim(t)
    return out % cat.field.p


def matrix_mor(cat: CategoryPresentation, x: Obj, y: Obj, mat) -> Mor:
    """Block coordinates of an intertwiner matrix V(x) -> V(y)."""
    f = cat.field
    mat = f.arr(mat)
    n = cat.n
    out = cat.zero_mor(x, y)
    offs = cat.hom_offsets(x, y)
    roff = 0
    for tp, t in enumerate(y.parts):
        coff = 0
        for sp, s in enumerate(x.parts):
            d = int(cat.homdim[s][t])
            sub = mat[roff : roff + part_dim(t), coff : coff + part_dim(s)]
            if d:
                basis = np.stack(
                    [hom_basis_matrix(n, s, t, k).reshape(-1) for k in range(d)], axis=1
                )
                sol = f.solve(basis, sub.reshape(-1))
                if sol is None:
                    raise ValueError("matrix is not an intertwiner")
                off, _ = offs[(tp, sp)]
                out.vec[off : off + d] = sol
            elif sub.any():
                raise ValueError("matrix is not an intertwiner")
            coff += part_dim(s)
        roff += part_dim(t)
    return out


# -- Jordan decomposition ------------------------------------------------------


def jordan(field: PrimeField, nil: np.ndarray, nmax: int):
    """Decompose a nilpotent matrix: returns (obj parts, basis matrix U).

    Columns of U are the canonical module basis expressed in the ambient
    coordinates; the multiset of parts is sorted like Obj.
    """
    d = nil.shape[0]
    if d == 0:
        return (), field.zeros(0, 0)
    powers = [field.eye(d)]
    for _ in range(nmax + 1):
        powers.append(field.mul(nil, powers[-1]))
    kerN = field.nullspace(nil)  # rows
    chains = []
    prev_socle = field.zeros(0, d)
    for s in range(nmax, 0, -1):
        # socle layer: im(N^{s-1}) intersect ker N
        img = field.row_space(powers[s - 1].T)
        layer = field.intersect_rows(img, kerN) if img.shape[0] else field.zeros(0, d)
        for w in layer:
            if field.in_row_space(prev_socle, w):
                continue
            v = field.solve(powers[s - 1], w)
            chain = [(field.mul(powers[k], v)) % field.p for k in range(s)]
            chains.append((s, chain))
            prev_socle = field.row_space(
                np.vstack([prev_socle, w.reshape(1, -1)]) if prev_socle.size else w.reshape(1, -1)
            )
    chains.sort(key=lambda c: c[0])
    parts = tuple(s - 1 for s, _ in chains)
    cols = []
    for _, chain in chains:
        cols.extend(chain)
    u = np.stack(cols, axis=1) % field.p
    return parts, u


# -- extension structure -------------------------------------------------------


def ext_dim_pair(n: int, c: int, a: int) -> int:
    ci, aj = part_dim(c), part_dim(a)
    return min(ci, aj, n - ci, n - aj) if (n - ci) >= 0 and (n - aj) >= 0 else 0


def build_ext(n: int, cat: CategoryPresentation) -> ExtStructure:
    """Extension dimensions and actions from projective presentations.

    The class space at (c, a) is spanned by the first few canonical maps
    of Hom(M_{n-c}, M_a); both actions are compositions of cocycles with
    canonical maps, truncated back to class coordinates.
    """
    extdim = np.zeros((n, n), dtype=np.int64)
    for c in range(n):
        for a in range(n):
            extdim[c][a] = ext_dim_pair(n, c, a)

    # part index arithmetic: indec index i encodes M_{i+1}; the syzygy of
    # M_{c+1} is M_{n-(c+1)} with part index n-c-2 (empty when c+1 = n).
    def syz_idx(c):
        return n - c - 2

    ract = {}
    for y in range(n):
        for c in range(n):
            hyc = int(cat.homdim[y][c])
            if hyc == 0:
                continue
            for a in range(n):
                dc, dy = int(extdim[c][a]), int(extdim[y][a])
                if dc == 0 or dy == 0:
                    continue
                arr = np.zeros((hyc, dc, dy), dtype=np.int64)
                sc, sy = syz_idx(c), syz_idx(y)
                if sc < 0 or sy < 0:
                    ract[(y, c, a)] = arr
                    continue
                cc = cat.comp_const(sy, sc, a)  # Hom(syz_y, syz_c) x Hom(syz_c, a) -> Hom(syz_y, a)
                for k in range(hyc):
                    for d in range(dc):
                        if k < int(cat.homdim[sy][sc]) and d < cc.shape[1]:
                            comp = cc[k, d]
                            arr[k, d] = comp[:dy]
                ract[(y, c, a)] = arr
    lact = {}
    for c in range(n):
        sc = syz_idx(c)
        for a in range(n):
            dca = int(extdim[c][a])
            if dca == 0:
                continue
            for a2 in range(n):
                haa = int(cat.homdim[a][a2])
                dca2 = int(extdim[c][a2])
                if haa == 0 or dca2 == 0:
                    continue
                arr = np.zeros((haa, dca, dca2), dtype=np.int64)
                if sc >= 0:
                    cc = cat.comp_const(sc, a, a2)
                    for k in range(haa):
                        for d in range(dca):
                            if d < cc.shape[0]:
                                arr[k, d] = cc[d, k][:dca2]
                lact[(c, a, a2)] = arr
    return ExtStructure(cat, extdim, ract, lact)


# -- realizations by pushout ----------------------------------------------------


def _cocycle_matrix(ws_cat: CategoryPresentation, n: int, ext: ExtStructure,
                    c_obj: Obj, a_obj: Obj, delta) -> np.ndarray:
    """The module map (+) M_{n-c_i} -> A representing delta."""
    rows = obj_dim(a_obj)
    cols = sum(part_dim(n - ci - 2) for ci in c_obj.parts)
    m = np.zeros((rows, cols), dtype=np.int64)
    offs = ext.offsets(c_obj, a_obj)
    coff = {}
    off = 0
    for ip, ci in enumerate(c_obj.parts):
        coff[ip] = off
        off += part_dim(n - ci - 2)
    roff = {}
    off = 0
    for jp, aj in enumerate(a_obj.parts):
        roff[jp] = off
        off += part_dim(aj)
    for (ip, jp), (o, d) in offs.items():
        ci, aj = c_obj.parts[ip], a_obj.parts[jp]
        for t in range(d):
            coef = int(delta[o + t])
            if coef:
                m[
                    roff[jp] : roff[jp] + part_dim(aj),
                    coff[ip] : coff[ip] + part_dim(n - ci - 2),
                ] += coef * hom_basis_matrix(n, n - ci - 2, aj, t)
    return m % ws_cat.field.p


def pushout_conflation(cat: CategoryPresentation, ext: ExtStructure, n: int,
                       third: Obj, first: Obj, delta) -> Conflation:
    """A realized conflation first -> E -> third for the class delta."""
    f = cat.field
    delta = f.arr(delta)
    dk = tuple(int(v) for v in delta)
    if not delta.any():
        # canonical split sequence
        total = first + third
        from .category import _merge_positions

        pos = _merge_positions(first, third)
        x = cat.injection(first, total, [pos[0][s] for s in range(len(first))])
        y = cat.projection(total, third, [pos[1][t] for t in range(len(third))])
        return Conflation(x, y, dk)
    dA, dC = obj_dim(first), obj_dim(third)
    k = len(third.parts)
    # presentation P = (+) Lambda, relation module embedded at exponents >= c
    dP = n * k
    h = _cocycle_matrix(cat, n, ext, third, first, delta)
    # ambient W = A (+) P with relations (-h(w), w)
    dW = dA + dP
    rel_rows = []
    coff = 0
    poff = 0
    for ip, ci in enumerate(third.parts):
        csize = part_dim(ci)
        ssize = n - csize
        for t in range(ssize):
            row = np.zeros(dW, dtype=np.int64)
            row[:dA] = (-h[:, coff + t]) % f.p
            row[dA + poff + csize + t] = 1
            rel_rows.append(row)
        coff += ssize
        poff += n
    rel = f.row_space(np.array(rel_rows))
    # quotient coordinates: unit vectors at non-pivot columns
    _, pivots = f.rref(rel)
    free = [cidx for cidx in range(dW) if cidx not in pivots]
    sect = f.zeros(dW, len(free))
    for col, cidx in enumerate(free):
        sect[cidx, col] = 1
    stack = np.concatenate([rel.T, sect], axis=1)
    sol = f.solve(stack, f.eye(dW))
    proj = sol[rel.shape[0] :, :] % f.p
    # x-action on W and on the quotient
    xW = np.zeros((dW, dW), dtype=np.int64)
    xW[:dA, :dA] = x_action(first)
    poff = dA
    for _ in range(k):
        for r in range(n - 1):
            xW[poff + r + 1, poff + r] = 1
        poff += n
    xQ = f.mul(f.mul(proj, xW), sect)
    parts, u = jordan(f, xQ, n)
    middle = Obj(parts)
    uinv = f.inv_matrix(u)
    # maps in canonical module coordinates
    inclA = np.zeros((dW, dA), dtype=np.int64)
    inclA[:dA, :dA] = np.eye(dA, dtype=np.int64)
    x_mat = f.mul(uinv, f.mul(proj, inclA))
    # deflation: W -> C kills A and projects Lambda-blocks onto M_{c}
    defl = np.zeros((dC, dW), dtype=np.int64)
    roff = 0
    poff = dA
    for ip, ci in enumerate(third.parts):
        csize = part_dim(ci)
        for r in range(csize):
            defl[roff + r, poff + r] = 1
        roff += csize
        poff += n
    y_mat = f.mul(f.mul(defl, sect), u)
    x_mor = matrix_mor(cat, first, middle, x_mat)
    y_mor = matrix_mor(cat, middle, third, y_mat)
    return Conflation(x_mor, y_mor, dk)


def objects_of_dim(n: int, total: int):
    """All objects (sorted part multisets) of a given module dimension."""
    out = []

    def rec(remaining, maxpart, acc):
        if remaining == 0:
            out.append(Obj(tuple(sorted(acc))))
            return
        for size in range(min(maxpart, remaining), 0, -1):
            rec(remaining - size, size, acc + (size - 1,))

    rec(total, n, ())
    return out


def build_nakayama(n: int, p: int, bound: int | None = None, cap: int = 1 << 16,
                   max_pair_dim: int | None = None) -> Workspace:
    """The workspace for mod F_p[x]/(x^n) with realizations up to a size bound.

    The table stores all pairs (third, first) with dim(third) + dim(first)
    bounded; that bound is closed under every composite lookup the axiom
    checks perform.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    field = PrimeField(p)
    cat = build_presentation(n, field)
    ext = build_ext(n, cat)
    if bound is None:
        bound = max(4, 2 * n - 1)
    table = {}
    pair_count = 0
    for dtot in range(0, bound + 1):
        for d3 in range(0, dtot + 1):
            d1 = dtot - d3
            for third in objects_of_dim(n, d3) if d3 else [ZERO]:
                for first in objects_of_dim(n, d1) if d1 else [ZERO]:
                    dim = ext.dim(third, first)
                    if p ** dim > cap:
                        raise CapExceeded(
                            f"E({cat.obj_name(third)},{cat.obj_name(first)}) "
                            f"has {p}^{dim} elements, exceeding cap {cap}"
                        )
                    entries = {}
                    for delta in field.all_vectors(dim, cap):
                        conf = pushout_conflation(cat, ext, n, third, first, delta)
                        entries[tuple(int(v) for v in delta)] = conf
                    table[(third, first)] = entries
                    pair_count += 1
    subcats = {
        "P": frozenset({n - 1}),
        "ALL": frozenset(range(n)),
        "NONE": frozenset(),
    }
    ws = Workspace(cat, ext, table, subcats=subcats, name=f"nakayama-{n}-p{p}", cap=cap)
    ws.realizer = lambda third, first, delta: pushout_conflation(cat, ext, n, third, first, delta)
    return ws


# -- independent oracles ---------------------------------------------------------


def ses_is_exact(cat: CategoryPresentation, conf: Conflation) -> bool:
    """Direct exactness of a stored conflation as module maps."""
    f = cat.field
    mx = mor_matrix(cat, conf.x)
    my = mor_matrix(cat, conf.y)
    dA, dE, dC = obj_dim(conf.first), obj_dim(conf.middle), obj_dim(conf.third)
    if dE != dA + dC:
        return False
    if f.mul(my, mx).any():
        return False
    if dA and f.rank(mx) != dA:
        return False
    if dC and f.rank(my) != dC:
        return False
    return True


def ses_class_count(cat: CategoryPresentation, n: int, third: Obj, first: Obj,
                    cap: int = 1 << 12):
    """Number of equivalence classes of short exact sequences first -> E -> third.

    Pure brute force: enumerates all morphism pairs over all candidate middle
    terms and groups them by the middle-fixing isomorphism relation.  Raises
    CapExceeded when any enumeration is too large.
    """
    f = cat.field
    total = obj_dim(first) + obj_dim(third)
    reps = []  # representatives (middle, x, y)
    for middle in objects_of_dim(n, total) if total else [ZERO]:
        dxm = cat.hom_dim(first, middle)
        dmy = cat.hom_dim(middle, third)
        if f.p ** dxm > cap or f.p ** dmy > cap:
            raise CapExceeded("SES oracle enumeration too large")
        exact_pairs = []
        for xv in f.all_vectors(dxm, cap):
            x = Mor(cat, first, middle, xv)
            mx = mor_matrix(cat, x)
            if obj_dim(first) and f.rank(mx) != obj_dim(first):
                continue
            for yv in f.all_vectors(dmy, cap):
                y = Mor(cat, middle, third, yv)
                my = mor_matrix(cat, y)
                if obj_dim(third) and f.rank(my) != obj_dim(third):
                    continue
                if f.mul(my, mx).any():
                    continue
                exact_pairs.append((x, y))
        for x, y in exact_pairs:
            matched = False
            for middle2, x2, y2 in reps:
                if middle2 != middle:
                    continue
                if _same_class(cat, x, y, x2, y2):
                    matched = True
                    break
            if not matched:
                reps.append((middle, x, y))
    return len(reps), reps


def _same_class(cat: CategoryPresentation, x, y, x2, y2) -> bool:
    """Middle isomorphism e with e x = x2 and y = y2 e."""
    f = cat.field
    lhs = np.concatenate(
        [cat.right_mul_matrix(x, x.cod), cat.left_mul_matrix(y2, x.cod)], axis=0
    )
    rhs = np.concatenate([x2.vec, y.vec])
    sol = f.solve_affine(lhs, rhs)
    if sol is None:
        return False
    e0, ker = sol
    for ev in f.affine_elements(e0, ker, 1 << 12):
        e = Mor(cat, x.cod, x.cod, ev)
        if f.inv_matrix(mor_matrix(cat, e)) is not None:
            return True
    return False


def class_of_conflation(cat, ws, conf: Conflation):
    """Find which stored class a raw exact sequence belongs to (oracle side)."""
    key = (conf.third, conf.first)
    for dk, stored in ws.table.get(key, {}).items():
        if stored.middle != conf.middle:
            continue
        if _same_class(cat, conf.x, conf.y, stored.x, stored.y):
            return dk
    return None


def syzygy_object(n: int, i: int) -> Obj:
    """Kernel of the projective cover of M_{i+1}, by explicit linear algebra."""
    # cover Lambda -> M_{i+1}; kernel = x^{i+1} Lambda
    size = n - (i + 1)
    return Obj((size - 1,)) if size > 0 else ZERO


def syzygy_swap(n: int, p: int) -> dict:
    """Object map of the syzygy on stable indecomposables, computed from
    kernels of projective covers (independent of any extension data)."""
    field = PrimeField(p)
    out = {}
    for i in range(n - 1):
        cover = np.zeros((part_dim(i), n), dtype=np.int64)
        for r in range(part_dim(i)):
            cover[r, r] = 1
        ker = field.nullspace(cover)  # rows spanning kernel inside Lambda
        # restrict the Lambda action to the kernel and decompose
        xl = np.zeros((n, n), dtype=np.int64)
        for r in range(n - 1):
            xl[r + 1, r] = 1
        basis = ker.T  # columns
        coords = field.solve(basis, field.mul(xl, basis))
        parts, _ = jordan(field, coords, n)
        out[i] = Obj(parts)
    return out


# -- the stable category as a triangulated input file ------------------------------


def _cosyzygy_matrix(field: PrimeField, n: int, i: int, j: int, fmat: np.ndarray) -> np.ndarray:
    """Module matrix of the induced map M_{n-i-1} -> M_{n-j-1} obtained by
    extending f: M_{i+1} -> M_{j+1} over the free covers."""
    di, dj = i + 1, j + 1
    si, sj = n - di, n - dj
    if si == 0 or sj == 0:
        return np.zeros((sj, si), dtype=np.int64)
    # hat(1) solves x^{n-di} hat(1) = x^{n-dj} f(1) in Lambda
    rhs = np.zeros(n, dtype=np.int64)
    rhs[sj : sj + dj] = fmat[:, 0]
    lhs = np.zeros((n, n), dtype=np.int64)
    for s in range(n):
        if s + si < n:
            lhs[s + si, s] = 1
    hat1 = field.solve(lhs, rhs)
    if hat1 is None:
        raise ValueError("not an intertwiner")
    # induced map on cokernels: x^s |-> x^s * hat(1) truncated
    out = np.zeros((sj, si), dtype=np.int64)
    for s in range(si):
        for t in range(n):
            if hat1[t] and s + t < sj:
                out[s + t, s] = (out[s + t, s] + hat1[t]) % field.p
    return out


def stable_workspace(n: int, p: int, bound: int | None = None, cap: int = 1 << 16) -> Workspace:
    """The quotient of mod F_p[x]/(x^n) by its projectives, as a declared
    triangulated input: a presentation with shift data, a full realization
    table built by explicit pullbacks, and a distinguished-triangle table
    built from mapping cones.  Everything is computed module-theoretically,
    independent of the condition-checking pipeline."""
    from .quotient import QuotientCategory

    if n < 2:
        raise ValueError("the stable category is empty for n < 2")
    field = PrimeField(p)
    big = build_presentation(n, field)
    q = QuotientCategory(big, {n - 1})
    m = n - 1  # stable indecomposables M_1 .. M_{n-1}
    names = [f"M{i + 1}" for i in range(m)]
    homdim = q.qdim[:m, :m].copy()
    comp = {}
    for i in range(m):
        for j in range(m):
            for l in range(m):
                if homdim[i][j] and homdim[j][l] and homdim[i][l]:
                    comp[(i, j, l)] = q.qcat.comp_const(i, j, l).copy()
    idc = [q.qcat.idc[i].copy() for i in range(m)]
    cat = CategoryPresentation(field, names, homdim, comp, idc)

    def sh(i):
        return m - 1 - i  # part index of the cosyzygy

    # shift morphism matrices on the stable bases
    shift_mor = {}
    for i in range(m):
        for j in range(m):
            d = int(homdim[i][j])
            rows = int(homdim[sh(i)][sh(j)])
            mat = field.zeros(rows, d)
            for k in range(d):
                unit = field.zeros(d)
                unit[k] = 1
                base = q.section(Mor(q.qcat, Obj((i,)), Obj((j,)), unit))
                fmat = mor_matrix(big, base)
                smat = _cosyzygy_matrix(field, n, i, j, fmat)
                smor = matrix_mor(big, Obj((sh(i),)), Obj((sh(j),)), smat)
                mat[:, k] = q.project(smor).vec
            shift_mor[(i, j)] = mat
    shift_obj = {i: Obj((sh(i),)) for i in range(m)}

    extdim = np.zeros((m, m), dtype=np.int64)
    for c in range(m):
        for a in range(m):
            extdim[c][a] = homdim[c][sh(a)]
    ract = {}
    for y in range(m):
        for c in range(m):
            hyc = int(homdim[y][c])
            if hyc == 0:
                continue
            for a in range(m):
                if extdim[c][a] == 0 or extdim[y][a] == 0:
                    continue
                cc = cat.comp_const(y, c, sh(a))
                ract[(y, c, a)] = np.transpose(cc, (0, 1, 2)).copy()
    lact = {}
    for c in range(m):
        for a in range(m):
            if extdim[c][a] == 0:
                continue
            for a2 in range(m):
                haa = int(homdim[a][a2])
                if haa == 0 or extdim[c][a2] == 0:
                    continue
                arr = field.zeros(haa, extdim[c][a], extdim[c][a2])
                cc = cat.comp_const(c, sh(a), sh(a2))
                for k in range(haa):
                    sg = shift_mor[(a, a2)][:, k]
                    arr[k] = np.einsum("m,dme->de", sg, cc) % p
                lact[(c, a, a2)] = arr
    ext = ExtStructure(cat, extdim, ract, lact)

    def class_as_shift_mor(third: Obj, first: Obj, delta) -> Mor:
        """Repack extension-layout coordinates as a morphism third -> shift(first)
        (shifting reverses the sorted summand order)."""
        sfirst = Obj(tuple(sh(a) for a in first.parts))
        tagged = sorted((sh(first.parts[jp]), jp) for jp in range(len(first.parts)))
        tp_of = {jp: pos for pos, (_, jp) in enumerate(tagged)}
        vec = field.zeros(cat.hom_dim(third, sfirst))
        offs_e = ext.offsets(third, first)
        offs_h = cat.hom_offsets(third, sfirst)
        delta = field.arr(delta)
        for (ip, jp), (o, d) in offs_e.items():
            if d:
                ho, _ = offs_h[(tp_of[jp], ip)]
                vec[ho : ho + d] = delta[o : o + d]
        return Mor(cat, third, sfirst, vec)

    # pullback realizations in the big module category, reduced mod projectives
    def stable_pullback(third: Obj, first: Obj, delta) -> Conflation:
        sfirst = Obj(tuple(sh(a) for a in first.parts))
        dmor = class_as_shift_mor(third, first, delta)
        base = q.section(Mor(q.qcat, third, sfirst, dmor.vec))
        dmat = mor_matrix(big, base)
        da = obj_dim(first)
        k = len(first.parts)
        dp = n * k
        dthird = obj_dim(third)
        # pi: P -> shift(first) (rows in the canonical sorted layout of the
        # shifted object), e: first -> P
        tagged = sorted((sh(a), jp) for jp, a in enumerate(first.parts))
        row_off = {}
        off = 0
        for pos, (val, jp) in enumerate(tagged):
            row_off[jp] = off
            off += val + 1
        pi = np.zeros((obj_dim(sfirst), dp), dtype=np.int64)
        emb = np.zeros((dp, da), dtype=np.int64)
        poff = 0
        coff = 0
        for jp, a in enumerate(first.parts):
            asz = a + 1
            ssz = n - asz
            for r in range(ssz):
                pi[row_off[jp] + r, poff + r] = 1
            for r in range(asz):
                emb[poff + ssz + r, coff + r] = 1
            poff += n
            coff += asz
        stacked = np.concatenate([pi, (-dmat) % p], axis=1)  # on P (+) third
        kerb = field.nullspace(stacked).T  # columns span E inside P (+) third
        dE = kerb.shape[1]
        xw = np.zeros((dp + dthird, dp + dthird), dtype=np.int64)
        poff = 0
        for _ in range(k):
            for r in range(n - 1):
                xw[poff + r + 1, poff + r] = 1
            poff += n
        xw[dp:, dp:] = x_action(third)
        xe = field.solve(kerb, field.mul(xw, kerb))
        parts, u = jordan(field, xe, n)
        middle = Obj(parts)
        red_parts = tuple(t for t in parts if t != n - 1)
        red = Obj(red_parts)
        # inclusion of the reduced canonical module into the canonical module
        sel = []
        off = 0
        for t in parts:
            if t != n - 1:
                sel.extend(range(off, off + t + 1))
            off += t + 1
        uinv = field.inv_matrix(u)
        # x: first -> E (ambient coords) via the embedding into P
        amb_x = np.concatenate([emb, np.zeros((dthird, da), dtype=np.int64)], axis=0)
        x_coords = field.solve(kerb, amb_x)
        x_can = field.mul(uinv, x_coords)
        y_can = field.mul(np.concatenate(
            [np.zeros((dthird, dp), dtype=np.int64), np.eye(dthird, dtype=np.int64)], axis=1
        ) @ kerb % p, u)
        x_red = x_can[sel, :]
        y_red = y_can[:, sel]
        x_mor = q.project(matrix_mor(big, first, red, x_red))
        y_mor = q.project(matrix_mor(big, red, third, y_red))
        dk = tuple(int(v) for v in delta)
        return Conflation(Mor(cat, first, red, x_mor.vec),
                          Mor(cat, red, third, y_mor.vec), dk)

    if bound is None:
        bound = max(4, 2 * m - 1)
    table = {}
    for dtot in range(0, bound + 1):
        for d3 in range(0, dtot + 1):
            d1 = dtot - d3
            for third in objects_of_dim(m, d3) if d3 else [ZERO]:
                for first in objects_of_dim(m, d1) if d1 else [ZERO]:
                    dim = ext.dim(third, first)
                    entries = {}
                    for delta in field.all_vectors(dim, cap):
                        entries[tuple(int(v) for v in delta)] = stable_pullback(third, first, delta)
                    table[(third, first)] = entries

    # declared triangles from mapping cones, one per Hom element
    triangles = []
    for i in range(m):
        for j in range(m):
            xo, yo = Obj((i,)), Obj((j,))
            d = int(homdim[i][j])
            for fvec in field.all_vectors(d, cap):
                fm = Mor(cat, xo, yo, fvec)
                base = q.section(Mor(q.qcat, xo, yo, fvec))
                fmat = mor_matrix(big, base)
                dj, di = j + 1, i + 1
                dpp = n
                w = dj + dpp
                rel = []
                for s in range(di):
                    row = np.zeros(w, dtype=np.int64)
                    row[:dj] = (-fmat[:, s]) % p
                    row[dj + (n - di) + s] = 1
                    rel.append(row)
                relb = field.row_space(np.array(rel))
                _, pivots = field.rref(relb) if relb.size else (relb, [])
                free = [cidx for cidx in range(w) if cidx not in pivots]
                sect = field.zeros(w, len(free))
                for col, cidx in enumerate(free):
                    sect[cidx, col] = 1
                stack = np.concatenate([relb.T, sect], axis=1) if relb.size else sect
                sol = field.solve(stack, field.eye(w))
                proj = sol[relb.shape[0]:, :] % p
                xw = np.zeros((w, w), dtype=np.int64)
                for r in range(dj - 1):
                    xw[r + 1, r] = 1
                for r in range(n - 1):
                    xw[dj + r + 1, dj + r] = 1
                xe = field.mul(field.mul(proj, xw), sect)
                parts, u = jordan(field, xe, n)
                sel = []
                off = 0
                red_parts = []
                for t in parts:
                    if t != n - 1:
                        sel.extend(range(off, off + t + 1))
                        red_parts.append(t)
                    off += t + 1
                red = Obj(tuple(red_parts))
                uinv = field.inv_matrix(u)
                inclY = np.zeros((w, dj), dtype=np.int64)
                inclY[:dj, :] = np.eye(dj, dtype=np.int64)
                g_can = field.mul(uinv, field.mul(proj, inclY))
                # h: cone -> shift(i): kill Y, project Lambda onto the cokernel
                hmap = np.zeros((n - di, w), dtype=np.int64)
                for r in range(n - di):
                    hmap[r, dj + r] = 1
                h_can = field.mul(field.mul(hmap, sect), u)
                g_red = g_can[sel, :]
                h_red = h_can[:, sel]
                g_mor = q.project(matrix_mor(big, yo, red, g_red))
                h_mor = q.project(matrix_mor(big, red, Obj((sh(i),)), h_red))
                triangles.append((xo, yo, red,
                                  tuple(int(v) for v in fvec),
                                  tuple(int(v) for v in g_mor.vec),
                                  tuple(int(v) for v in h_mor.vec)))

    subcats = {"ALL": frozenset(range(m)), "NONE": frozenset()}
    ws = Workspace(cat, ext, table, subcats=subcats, name=f"stable-nakayama-{n}-p{p}",
                   cap=cap, shift=(shift_obj, shift_mor), triangles=triangles)
    ws.realizer = lambda third, first, delta: stable_pullback(third, first, delta)
    return ws


