"""Dense linear algebra over F_p with float64 BLAS.

Matrices hold integers in balanced form, |x| <= p/2 + 1.  A product A @ B is
made exact by cutting B into balanced base-2^w digits so that every partial
sum of (entry of A) * (digit) stays within 2^53, then recombining the
reduced partial products by Horner's rule.  Reduction uses a rounded
quotient, x - rint(x / p) * p, which is exact for |x| < 2^53 and lands back
in balanced form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_LIMIT = 2**53
PANEL = 1024
COL_CHUNK = 4096
BASE = 16


def reduce(x: np.ndarray, p: int) -> np.ndarray:
    """Balanced reduction in place; returns x."""
    q = x * (1.0 / p)
    np.rint(q, out=q)
    q *= p
    x -= q
    return x


def balanced(A: np.ndarray, p: int) -> np.ndarray:
    """A float64 copy of A (any integer entries) in balanced form."""
    if A.dtype != np.float64:
        A = np.asarray(A) % p
    return reduce(np.array(A, dtype=np.float64), p)


def to_unsigned(A: np.ndarray, p: int) -> np.ndarray:
    out = np.array(A, dtype=np.float64)
    reduce(out, p)
    out[out < 0] += p
    return out


def _half(p: int) -> int:
    return p // 2 + 2


def plan(p: int, k: int) -> tuple[int, int]:
    """Digit width w and count for inner dimension k; (0, 1) means no split is needed.

    The bound covers one Horner step: |acc| * 2^w + |A @ digit| + |target| <= 2^53.
    """
    half = _half(p)
    if (k + 2) * half * half <= _LIMIT:
        return 0, 1
    def fits(w: int) -> bool:
        return half * 2**w * (k + 2) + half <= _LIMIT

    if not fits(2):
        raise ValueError("inner dimension too large for exact products")
    w = 2
    while w < 21 and fits(w + 1):
        w += 1
    count = 2
    while 2 ** (w * count - 1) < half:
        count += 1
    return w, count


def max_inner(p: int) -> int:
    """Largest inner dimension that still needs at most three digits."""
    k = 1
    while k < 2**22:
        try:
            if plan(p, 2 * k)[1] > 3:
                break
        except ValueError:
            break
        k *= 2
    return k


@dataclass
class SplitOperand:
    """Right operand of a modular product, cut into digits once and reused."""

    p: int
    w: int
    digits: list

    @classmethod
    def of(cls, B: np.ndarray, p: int) -> "SplitOperand":
        B = np.asarray(B, dtype=np.float64)
        w, count = plan(p, max(B.shape[0], 1))
        if count == 1:
            return cls(p, 0, [B])
        base = float(2**w)
        digits = []
        cur = B.copy()
        for _ in range(count - 1):
            q = np.rint(cur / base)
            digits.append(cur - q * base)
            cur = q
        digits.append(cur)
        return cls(p, w, digits)

    def rmul(self, A: np.ndarray, subtract_from: np.ndarray | None = None) -> np.ndarray:
        """Balanced (A @ B) mod p, or target - A @ B (mod p) written into `subtract_from`."""
        p = self.p
        scale = float(2**self.w)
        res = A @ self.digits[-1]
        for D in reversed(self.digits[:-1]):
            reduce(res, p)
            res *= scale
            res += A @ D
        if subtract_from is not None:
            subtract_from -= res
            del res
            return reduce(subtract_from, p)
        return reduce(res, p)


def matmul(A: np.ndarray, B: np.ndarray, p: int) -> np.ndarray:
    """Balanced (A @ B) mod p for balanced inputs of any inner dimension."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    k = A.shape[1]
    if k == 0:
        return np.zeros((A.shape[0], B.shape[1]))
    step = max_inner(p)
    acc = None
    for s in range(0, k, step):
        part = SplitOperand.of(B[s : s + step], p).rmul(A[:, s : s + step])
        if acc is None:
            acc = part
        else:
            acc += part
            reduce(acc, p)
    return acc


def submul(T: np.ndarray, A: np.ndarray, B: np.ndarray, p: int, chunk: int = 1024, col_chunk: int = 4096) -> None:
    """T -= A @ B (mod p) in place, in row and column chunks to bound temporaries."""
    k = A.shape[1]
    if k == 0 or T.size == 0:
        return
    step = max_inner(p)
    for c0 in range(0, T.shape[1], col_chunk):
        c1 = min(T.shape[1], c0 + col_chunk)
        ops = [(s, SplitOperand.of(B[s : s + step, c0:c1], p)) for s in range(0, k, step)]
        for r0 in range(0, T.shape[0], chunk):
            r1 = min(T.shape[0], r0 + chunk)
            tgt = T[r0:r1, c0:c1]
            for s, op in ops:
                op.rmul(np.ascontiguousarray(A[r0:r1, s : s + step]), subtract_from=tgt)


def tri_inverse(Lw: np.ndarray, p: int) -> np.ndarray:
    """Inverse of the unit lower-triangular matrix whose strict lower part is that of Lw."""
    t = Lw.shape[0]
    if t <= 32:
        Li = np.eye(t, dtype=np.int64)
        Lint = np.tril(np.asarray(Lw, dtype=np.int64) % p, -1)
        for i in range(1, t):
            acc = (Lint[i, :i, None] * Li[:i, :i]) % p
            Li[i, :i] = (-acc.sum(axis=0)) % p
        return balanced(Li, p)
    h = t // 2
    Ai = tri_inverse(Lw[:h, :h], p)
    Bi = tri_inverse(Lw[h:, h:], p)
    out = np.zeros((t, t))
    out[:h, :h] = Ai
    out[h:, h:] = Bi
    out[h:, :h] = -matmul(Bi, matmul(Lw[h:, :h], Ai, p), p)
    reduce(out[h:, :h], p)
    return out


def _swap_rows(A: np.ndarray, swaps, offset: int = 0) -> None:
    for a, b in swaps:
        A[[offset + a, offset + b]] = A[[offset + b, offset + a]]


def _lu_base(P: np.ndarray, p: int):
    """Right-looking rank-1 elimination on a narrow panel (int64); multipliers stored below pivots."""
    n, k = P.shape
    Q = np.asarray(P, dtype=np.int64) % p
    t = 0
    pivots: list[int] = []
    swaps: list[tuple[int, int]] = []
    for j in range(k):
        if t >= n:
            break
        nz = np.flatnonzero(Q[t:, j])
        if len(nz) == 0:
            continue
        r = t + int(nz[0])
        if r != t:
            Q[[t, r]] = Q[[r, t]]
            swaps.append((t, r))
        inv = pow(int(Q[t, j]), p - 2, p)
        f = Q[t + 1 :, j] * inv % p
        if j + 1 < k:
            upd = np.multiply.outer(f, Q[t, j + 1 :])
            upd %= p
            sub = Q[t + 1 :, j + 1 :]
            sub -= upd
            sub %= p
        Q[t + 1 :, j] = f
        pivots.append(j)
        t += 1
    P[...] = balanced(Q, p)
    return pivots, swaps


def lu_panel(P: np.ndarray, p: int, base: int = BASE):
    """Recursive row-pivoted LU of a panel in place.

    On return row q holds the q-th pivot (column pivots[q]); the entry of a lower
    row in that column is its multiplier.  Returns (pivots, swaps).
    """
    n, k = P.shape
    if k <= base or n <= 1:
        return _lu_base(P, p)
    h = k // 2
    left, right = P[:, :h], P[:, h:]
    pc1, sw1 = lu_panel(left, p, base)
    _swap_rows(right, sw1)
    t1 = len(pc1)
    if t1:
        Linv = tri_inverse(left[:t1][:, pc1], p)
        right[:t1] = matmul(Linv, right[:t1], p)
        if t1 < n:
            submul(right[t1:], left[t1:][:, pc1], right[:t1], p)
    if t1 >= n:
        return pc1, sw1
    pc2, sw2 = lu_panel(right[t1:], p, base)
    _swap_rows(left, sw2, t1)
    return pc1 + [h + j for j in pc2], sw1 + [(a + t1, b + t1) for a, b in sw2]


def rank(
    data: np.ndarray,
    p: int,
    block: int = PANEL,
    overwrite: bool = False,
    progress=None,
) -> int:
    """Exact rank over F_p by blocked right-looking elimination.

    With overwrite=True a float64 input is reduced and destroyed in place; it may be
    an np.memmap, since every pass touches it in bounded row chunks.
    """
    if data.size == 0:
        return 0
    if overwrite and data.dtype == np.float64:
        A = data
        for r in range(0, A.shape[0], 4096):
            reduce(A[r : r + 4096], p)
    else:
        A = balanced(data, p)
    R, C = A.shape
    r0 = c0 = 0
    total = 0
    while c0 < C and r0 < R:
        c1 = min(C, c0 + block)
        P = np.array(A[r0:, c0:c1])
        pivots, swaps = lu_panel(P, p)
        t = len(pivots)
        if t and c1 < C:
            trail = A[r0:, c1:]
            _swap_rows(trail, swaps)
            Linv = tri_inverse(P[:t][:, pivots], p)
            for j in range(0, trail.shape[1], COL_CHUNK):
                top = trail[:t, j : j + COL_CHUNK]
                top[...] = matmul(Linv, top, p)
            if r0 + t < R:
                # contiguous pivots (the usual case) keep the multipliers a view, not a copy
                mult = P[t:, :t] if pivots == list(range(t)) else P[t:][:, pivots]
                submul(trail[t:], mult, trail[:t], p)
        total += t
        r0 += t
        c0 = c1
        if progress is not None:
            progress(c0, C, total)
    return total


def rank_reference(M: np.ndarray, p: int) -> int:
    """Unblocked row reduction with Python integers (slow, independent check)."""
    rows = [[int(x) % p for x in r] for r in np.asarray(M)]
    r = 0
    ncol = len(rows[0]) if rows else 0
    for c in range(ncol):
        piv = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = pow(rows[r][c], p - 2, p)
        pr = [x * inv % p for x in rows[r]]
        rows[r] = pr
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [(x - f * y) % p for x, y in zip(rows[i], pr)]
        r += 1
    return r
