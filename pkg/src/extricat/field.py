"""Exact linear algebra over a prime field F_p.

Matrices are numpy int64 arrays with entries reduced mod p.  Everything is
computed exactly; there is no floating point anywhere in the package.
"""

from __future__ import annotations

import numpy as np


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


class PrimeField:
    """Arithmetic and Gaussian elimination mod a prime p."""

    def __init__(self, p: int):
        if not _is_prime(p):
            raise ValueError(f"{p} is not prime")
        self.p = p
        inv = np.zeros(p, dtype=np.int64)
        for a in range(1, p):
            inv[a] = pow(a, p - 2, p)
        self._inv = inv

    def __repr__(self):
        return f"PrimeField({self.p})"

    # -- constructors -------------------------------------------------

    def arr(self, data) -> np.ndarray:
        return np.asarray(data, dtype=np.int64) % self.p

    def zeros(self, *shape) -> np.ndarray:
        return np.zeros(shape, dtype=np.int64)

    def eye(self, n: int) -> np.ndarray:
        return np.eye(n, dtype=np.int64)

    # -- arithmetic ----------------------------------------------------

    def neg(self, a):
        return (-np.asarray(a, dtype=np.int64)) % self.p

    def add(self, a, b):
        return (np.asarray(a) + np.asarray(b)) % self.p

    def sub(self, a, b):
        return (np.asarray(a) - np.asarray(b)) % self.p

    def smul(self, c, a):
        return (int(c) % self.p * np.asarray(a)) % self.p

    def mul(self, a, b):
        """Matrix product mod p (also matrix @ vector)."""
        return (np.asarray(a, dtype=np.int64) @ np.asarray(b, dtype=np.int64)) % self.p

    def inv_scalar(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise ZeroDivisionError("inverse of 0")
        return int(self._inv[a])

    # -- elimination ---------------------------------------------------

    def _pack2(self, m: np.ndarray) -> list[int]:
        """Rows of a 0/1 matrix as python ints (low bit = column 0)."""
        rows, cols = m.shape
        out = [0] * rows
        off = 0
        mm = m % 2
        while off < cols:
            w = min(62, cols - off)
            pw = (1 << np.arange(off, off + w, dtype=object))
            chunk = mm[:, off : off + w].astype(object) @ pw
            for i in range(rows):
                out[i] += int(chunk[i])
            off += w
        return out

    def _unpack2(self, bits: list[int], cols: int) -> np.ndarray:
        out = np.zeros((len(bits), cols), dtype=np.int64)
        for i, b in enumerate(bits):
            j = 0
            while b:
                if b & 1:
                    out[i, j] = 1
                b >>= 1
                j += 1
        return out

    @staticmethod
    def _rref2(bits: list[int], cols: int):
        pivots = []
        r = 0
        nrows = len(bits)
        for c in range(cols):
            if r == nrows:
                break
            mask = 1 << c
            piv = -1
            for i in range(r, nrows):
                if bits[i] & mask:
                    piv = i
                    break
            if piv < 0:
                continue
            bits[r], bits[piv] = bits[piv], bits[r]
            pr = bits[r]
            for i in range(nrows):
                if i != r and bits[i] & mask:
                    bits[i] ^= pr
            pivots.append(c)
            r += 1
        return bits, pivots

    def rref(self, a) -> tuple[np.ndarray, list[int]]:
        """Reduced row echelon form; returns (R, pivot column list)."""
        m = self.arr(a)
        if self.p == 2 and m.size:
            bits, pivots = self._rref2(self._pack2(m), m.shape[1])
            return self._unpack2(bits, m.shape[1]), pivots
        m = m.copy()
        rows, cols = m.shape
        pivots: list[int] = []
        r = 0
        for c in range(cols):
            if r == rows:
                break
            pos = np.nonzero(m[r:, c])[0]
            if pos.size == 0:
                continue
            piv = r + int(pos[0])
            if piv != r:
                m[[r, piv]] = m[[piv, r]]
            m[r] = (m[r] * self._inv[m[r, c]]) % self.p
            other = np.nonzero(m[:, c])[0]
            other = other[other != r]
            if other.size:
                m[other] = (m[other] - np.outer(m[other, c], m[r])) % self.p
            pivots.append(c)
            r += 1
        return m, pivots

    def rank(self, a) -> int:
        m = self.arr(a)
        if m.size == 0:
            return 0
        if self.p == 2:
            return len(self._rref2(self._pack2(m), m.shape[1])[1])
        return len(self.rref(m)[1])

    def nullspace(self, a) -> np.ndarray:
        """Basis of the right kernel of a, one vector per row."""
        m = self.arr(a)
        rows, cols = m.shape
        if cols == 0:
            return self.zeros(0, 0)
        if rows == 0:
            return self.eye(cols)
        r, pivots = self.rref(m)
        free = [c for c in range(cols) if c not in pivots]
        basis = self.zeros(len(free), cols)
        for k, fc in enumerate(free):
            basis[k, fc] = 1
            for i, pc in enumerate(pivots):
                basis[k, pc] = (-r[i, fc]) % self.p
        return basis

    def solve(self, a, b):
        """One solution x of a @ x = b, or None.  b may be a vector or matrix."""
        res = self.solve_affine(a, b)
        return None if res is None else res[0]

    def solve_affine(self, a, b):
        """All solutions of a @ x = b as (particular, kernel basis rows).

        For matrix right-hand sides the particular solution is a matrix and
        the kernel basis spans the kernel of a (to be added columnwise).
        """
        a = self.arr(a)
        b = self.arr(b)
        vec = b.ndim == 1
        bm = b.reshape(-1, 1) if vec else b
        rows, cols = a.shape
        if bm.shape[0] != rows:
            raise ValueError("shape mismatch in solve")
        aug = np.concatenate([a, bm], axis=1)
        r, pivots = self.rref(aug)
        for pc in pivots:
            if pc >= cols:
                return None
        x = self.zeros(cols, bm.shape[1])
        for i, pc in enumerate(pivots):
            x[pc] = r[i, cols:]
        if vec:
            x = x[:, 0]
        return x, self.nullspace(a)

    def consistent(self, a, b_cols) -> bool:
        """Whether a @ x = b is solvable for every column b in b_cols."""
        a = self.arr(a)
        if not b_cols:
            return True
        stack = np.stack([self.arr(b) for b in b_cols], axis=1)
        if not stack.any():
            return True
        aug = np.concatenate([a, stack], axis=1)
        cols = a.shape[1]
        if self.p == 2:
            _, pivots = self._rref2(self._pack2(aug), aug.shape[1])
        else:
            _, pivots = self.rref(aug)
        return all(pc < cols for pc in pivots)

    def inv_matrix(self, a):
        """Inverse of a square matrix, or None if singular."""
        a = self.arr(a)
        n = a.shape[0]
        if a.shape != (n, n):
            return None
        sol = self.solve(a, self.eye(n))
        if sol is None:
            return None
        if not np.array_equal(self.mul(a, sol), self.eye(n)):
            return None
        return sol

    # -- subspaces (rows spanning) --------------------------------------

    def row_space(self, a) -> np.ndarray:
        """Canonical basis (rref rows) of the row space of a."""
        m = self.arr(a)
        if m.size == 0:
            return self.zeros(0, m.shape[1] if m.ndim == 2 else 0)
        r, pivots = self.rref(m)
        return r[: len(pivots)]

    def in_row_space(self, basis, v) -> bool:
        basis = self.arr(basis)
        v = self.arr(v)
        if not v.any():
            return True
        if basis.size == 0:
            return False
        stacked = np.vstack([basis, v])
        return self.rank(stacked) == self.rank(basis)

    def intersect_rows(self, a, b) -> np.ndarray:
        """Basis of the intersection of the row spaces of a and b."""
        a = self.row_space(a)
        b = self.row_space(b)
        if a.shape[0] == 0 or b.shape[0] == 0:
            return self.zeros(0, a.shape[1])
        # x in both spans: x = u a = v b; solve [a^T | -b^T] kernel.
        stacked = np.concatenate([a.T, (-b.T) % self.p], axis=1)
        ker = self.nullspace(stacked)
        if ker.shape[0] == 0:
            return self.zeros(0, a.shape[1])
        combos = self.mul(ker[:, : a.shape[0]], a)
        return self.row_space(combos)

    def affine_elements(self, x0, basis, cap: int):
        """Iterate all points x0 + span(basis rows); raises if count exceeds cap."""
        k = basis.shape[0]
        total = self.p ** k
        if total > cap:
            raise CapExceeded(f"affine space of size {self.p}^{k} exceeds cap {cap}")
        coeffs = np.zeros(k, dtype=np.int64)
        while True:
            yield (x0 + coeffs @ basis) % self.p if k else x0 % self.p
            i = 0
            while i < k:
                coeffs[i] += 1
                if coeffs[i] < self.p:
                    break
                coeffs[i] = 0
                i += 1
            else:
                return
            if k == 0:
                return

    def all_vectors(self, n: int, cap: int):
        """Iterate all vectors of F_p^n; raises if p^n exceeds cap."""
        return self.affine_elements(self.zeros(n), self.eye(n), cap)


class CapExceeded(RuntimeError):
    """An enumeration would exceed the configured cardinality cap."""
