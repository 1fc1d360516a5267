"""Dense eigenvalue kernels: balancing, Hessenberg reduction, shifted QR.

Each kernel has two implementations: a loop form compiled with numba and a
vectorised pure-numpy form.  Set ``PSEUDOSPEC_DISABLE_NUMBA=1`` to force the
numpy path (useful for debugging and for platforms without numba).  The flag
is read on every call, so it can be flipped at runtime.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

EPS = np.finfo(np.float64).eps
SAFMIN = np.finfo(np.float64).tiny
RADIX = 2.0
# iterations allowed per deflated eigenvalue before giving up
ITERS_PER_EIGENVALUE = 30


def numba_enabled() -> bool:
    flag = os.environ.get("PSEUDOSPEC_DISABLE_NUMBA", "").strip().lower()
    return HAVE_NUMBA and flag not in ("1", "true", "yes", "on")


def backend_name() -> str:
    return "numba" if numba_enabled() else "numpy"


# ---------------------------------------------------------------------------
# numpy implementations


def _balance_np(a):
    n = a.shape[0]
    scale = np.ones(n)
    off = ~np.eye(n, dtype=bool)
    converged = False
    while not converged:
        converged = True
        for i in range(n):
            # exclude the diagonal exactly; subtracting it leaves ulp residue
            c = np.abs(a[off[:, i], i]).sum()
            r = np.abs(a[i, off[i]]).sum()
            if c == 0.0 or r == 0.0:
                continue
            g = r / RADIX
            f = 1.0
            s = c + r
            while c < g:
                f *= RADIX
                c *= RADIX * RADIX
            g = r * RADIX
            while c >= g:
                f /= RADIX
                c /= RADIX * RADIX
            if (c + r) / f < 0.95 * s:
                converged = False
                scale[i] *= f
                a[i, :] /= f
                a[:, i] *= f
    return scale


def _hessenberg_np(a):
    n = a.shape[0]
    for k in range(n - 2):
        x = a[k + 1 :, k]
        tail = np.linalg.norm(x[1:])
        if tail == 0.0:
            continue
        alpha = np.linalg.norm(x)
        x0 = x[0]
        phase = x0 / abs(x0) if x0 != 0 else 1.0
        v = x.copy()
        v[0] += phase * alpha
        v /= np.linalg.norm(v)
        block = a[k + 1 :, k:]
        block -= 2.0 * np.outer(v, v.conj() @ block)
        cols = a[:, k + 1 :]
        cols -= 2.0 * np.outer(cols @ v, v.conj())
        a[k + 2 :, k] = 0.0


def _givens(x, y):
    ax = abs(x)
    ay = abs(y)
    if ay == 0.0:
        return 1.0, 0.0j, x
    if ax == 0.0:
        return 0.0, np.conj(y) / ay, complex(ay)
    r = np.hypot(ax, ay)
    phase = x / ax
    return ax / r, phase * np.conj(y) / r, phase * r


def _wilkinson_shift(a, b, c, d):
    p = 0.5 * (a - d)
    bc = b * c
    if bc == 0:
        return d
    disc = np.sqrt(p * p + bc)
    den1 = p + disc
    den2 = p - disc
    den = den1 if abs(den1) >= abs(den2) else den2
    if den == 0:
        return d
    return d - bc / den


def _hqr_np(h, max_iter):
    n = h.shape[0]
    w = np.zeros(n, dtype=np.complex128)
    hi = n - 1
    its = 0
    while hi >= 0:
        lo = hi
        while lo > 0:
            s = abs(h[lo - 1, lo - 1]) + abs(h[lo, lo])
            if s == 0.0:
                s = np.abs(h[: hi + 1, : hi + 1]).max()
            if abs(h[lo, lo - 1]) <= EPS * s:
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            w[hi] = h[hi, hi]
            hi -= 1
            its = 0
            continue
        its += 1
        if its > max_iter:
            return w, lo, hi
        if its % 10 == 0:
            sig = h[hi, hi] + 0.75 * abs(h[hi, hi - 1].real)
        else:
            sig = _wilkinson_shift(h[hi - 1, hi - 1], h[hi - 1, hi], h[hi, hi - 1], h[hi, hi])
        for k in range(lo, hi):
            if k == lo:
                x = h[k, k] - sig
                y = h[k + 1, k]
            else:
                x = h[k, k - 1]
                y = h[k + 1, k - 1]
            c, s, r = _givens(x, y)
            if k > lo:
                h[k, k - 1] = r
                h[k + 1, k - 1] = 0.0
            rows = h[k : k + 2, k : hi + 1]
            t1 = rows[0].copy()
            rows[0] = c * t1 + s * rows[1]
            rows[1] = -np.conj(s) * t1 + c * rows[1]
            top = min(k + 2, hi) + 1
            cols = h[lo:top, k : k + 2]
            t1 = cols[:, 0].copy()
            cols[:, 0] = c * t1 + np.conj(s) * cols[:, 1]
            cols[:, 1] = -s * t1 + c * cols[:, 1]
    return w, -1, -1


# ---------------------------------------------------------------------------
# numba implementations (scalar loops)

if HAVE_NUMBA:

    @njit(cache=True)
    def _abs1(z):
        return abs(z.real) + abs(z.imag)

    @njit(cache=True)
    def _balance_nb(a):
        n = a.shape[0]
        scale = np.ones(n)
        converged = False
        while not converged:
            converged = True
            for i in range(n):
                c = 0.0
                r = 0.0
                for j in range(n):
                    if j != i:
                        c += abs(a[j, i])
                        r += abs(a[i, j])
                if c == 0.0 or r == 0.0:
                    continue
                g = r / RADIX
                f = 1.0
                s = c + r
                while c < g:
                    f *= RADIX
                    c *= RADIX * RADIX
                g = r * RADIX
                while c >= g:
                    f /= RADIX
                    c /= RADIX * RADIX
                if (c + r) / f < 0.95 * s:
                    converged = False
                    scale[i] *= f
                    for j in range(n):
                        a[i, j] /= f
                        a[j, i] *= f
        return scale

    @njit(cache=True)
    def _hessenberg_nb(a):
        n = a.shape[0]
        v = np.empty(n, dtype=np.complex128)
        for k in range(n - 2):
            tail = 0.0
            for i in range(k + 2, n):
                tail += a[i, k].real ** 2 + a[i, k].imag ** 2
            if tail == 0.0:
                continue
            x0 = a[k + 1, k]
            alpha = np.sqrt(tail + x0.real ** 2 + x0.imag ** 2)
            phase = x0 / abs(x0) if abs(x0) != 0.0 else 1.0 + 0.0j
            m = n - k - 1
            for i in range(m):
                v[i] = a[k + 1 + i, k]
            v[0] += phase * alpha
            vn = 0.0
            for i in range(m):
                vn += v[i].real ** 2 + v[i].imag ** 2
            vn = np.sqrt(vn)
            for i in range(m):
                v[i] /= vn
            # left: rows k+1.., columns k..
            for j in range(k, n):
                acc = 0.0j
                for i in range(m):
                    acc += np.conj(v[i]) * a[k + 1 + i, j]
                acc *= 2.0
                for i in range(m):
                    a[k + 1 + i, j] -= v[i] * acc
            # right: all rows, columns k+1..
            for i in range(n):
                acc = 0.0j
                for j in range(m):
                    acc += a[i, k + 1 + j] * v[j]
                acc *= 2.0
                for j in range(m):
                    a[i, k + 1 + j] -= acc * np.conj(v[j])
            for i in range(k + 2, n):
                a[i, k] = 0.0

    @njit(cache=True)
    def _hqr_nb(h, max_iter):
        n = h.shape[0]
        w = np.zeros(n, dtype=np.complex128)
        hi = n - 1
        its = 0
        while hi >= 0:
            lo = hi
            while lo > 0:
                s = _abs1(h[lo - 1, lo - 1]) + _abs1(h[lo, lo])
                if s == 0.0:
                    for i in range(hi + 1):
                        for j in range(hi + 1):
                            s = max(s, _abs1(h[i, j]))
                if _abs1(h[lo, lo - 1]) <= EPS * s:
                    h[lo, lo - 1] = 0.0
                    break
                lo -= 1
            if lo == hi:
                w[hi] = h[hi, hi]
                hi -= 1
                its = 0
                continue
            its += 1
            if its > max_iter:
                return w, lo, hi
            if its % 10 == 0:
                sig = h[hi, hi] + 0.75 * abs(h[hi, hi - 1].real)
            else:
                a = h[hi - 1, hi - 1]
                d = h[hi, hi]
                bc = h[hi - 1, hi] * h[hi, hi - 1]
                sig = d
                if bc != 0:
                    p = 0.5 * (a - d)
                    disc = np.sqrt(p * p + bc)
                    den = p + disc
                    if abs(p - disc) > abs(den):
                        den = p - disc
                    if den != 0:
                        sig = d - bc / den
            for k in range(lo, hi):
                if k == lo:
                    x = h[k, k] - sig
                    y = h[k + 1, k]
                else:
                    x = h[k, k - 1]
                    y = h[k + 1, k - 1]
                ax = abs(x)
                ay = abs(y)
                if ay == 0.0:
                    c = 1.0
                    s = 0.0j
                    r = x
                elif ax == 0.0:
                    c = 0.0
                    s = np.conj(y) / ay
                    r = complex(ay)
                else:
                    rn = np.hypot(ax, ay)
                    ph = x / ax
                    c = ax / rn
                    s = ph * np.conj(y) / rn
                    r = ph * rn
                if k > lo:
                    h[k, k - 1] = r
                    h[k + 1, k - 1] = 0.0
                sc = np.conj(s)
                for j in range(k, hi + 1):
                    t1 = h[k, j]
                    t2 = h[k + 1, j]
                    h[k, j] = c * t1 + s * t2
                    h[k + 1, j] = c * t2 - sc * t1
                top = min(k + 2, hi)
                for i in range(lo, top + 1):
                    t1 = h[i, k]
                    t2 = h[i, k + 1]
                    h[i, k] = c * t1 + sc * t2
                    h[i, k + 1] = c * t2 - s * t1
        return w, -1, -1


def balance(a: np.ndarray) -> np.ndarray:
    """Diagonal similarity scaling in place; returns the scale factors."""
    if numba_enabled():
        return _balance_nb(a)
    return _balance_np(a)


def hessenberg(a: np.ndarray) -> None:
    """Unitary reduction of ``a`` to upper Hessenberg form, in place."""
    if numba_enabled():
        _hessenberg_nb(a)
    else:
        _hessenberg_np(a)


def hqr(h: np.ndarray, max_iter: int = ITERS_PER_EIGENVALUE):
    """Single-shift complex QR on a Hessenberg matrix, eigenvalues only.

    Returns ``(w, lo, hi)``; ``lo == hi == -1`` on success, otherwise the
    active block ``h[lo:hi+1, lo:hi+1]`` failed to converge and only
    ``w[hi+1:]`` is valid.
    """
    if numba_enabled():
        w, lo, hi = _hqr_nb(h, max_iter)
    else:
        w, lo, hi = _hqr_np(h, max_iter)
    return w, int(lo), int(hi)
