"""Exact linear algebra over a prime field GF(p).

Matrices are numpy int64 arrays with entries reduced into [0, p).  Every
operation is exact; there is no floating point anywhere in the package.

The row-reduction and multiplication kernels exist twice: a numba-compiled
version and a pure-numpy fallback.  The fallback is selected by setting the
environment variable PGLUE_NUMBA=0 (or automatically when numba is not
importable).  ``bench/benchmark_kernels.py`` compares the two paths.
"""

import os

import numpy as np

from .errors import InputError

DEFAULT_CHAR = 101

_WANT_NUMBA = os.environ.get("PGLUE_NUMBA", "1") != "0"

try:
    if _WANT_NUMBA:
        from numba import njit
        HAVE_NUMBA = True
    else:
        HAVE_NUMBA = False
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False


def is_prime(p):
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def check_char(p):
    """Validate a field characteristic. Returns p."""
    if not isinstance(p, int) or not is_prime(p):
        raise InputError(f"characteristic must be a prime integer, got {p!r}")
    if p > 1_000_003:
        raise InputError(f"characteristic {p} too large (int64 overflow guard)")
    return p


def mat(data, p):
    """Build a reduced int64 matrix from nested lists / arrays."""
    a = np.asarray(data, dtype=np.int64)
    if a.ndim != 2:
        raise InputError(f"matrix literal must be 2-dimensional, got shape {a.shape}")
    return np.mod(a, p)


def zeros(rows, cols):
    return np.zeros((rows, cols), dtype=np.int64)


def eye(n):
    return np.eye(n, dtype=np.int64)


# ---------------------------------------------------------------------------
# kernels: numba versions and numpy fallbacks

def _py_rref_inplace(a, p):
    rows, cols = a.shape
    piv = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            a[[r, i]] = a[[i, r]]
        inv = pow(int(a[r, c]), p - 2, p)
        a[r] = (a[r] * inv) % p
        hit = np.nonzero(a[:, c])[0]
        hit = hit[hit != r]
        if hit.size:
            a[hit] = (a[hit] - np.outer(a[hit, c], a[r])) % p
        piv.append(c)
        r += 1
    return np.asarray(piv, dtype=np.int64)


def _py_matmul(a, b, p):
    return (a @ b) % p


if HAVE_NUMBA:

    @njit(cache=True)
    def _nb_pow_mod(a, e, p):
        r = 1
        b = a % p
        while e > 0:
            if e & 1:
                r = (r * b) % p
            b = (b * b) % p
            e >>= 1
        return r

    @njit(cache=True)
    def _nb_rref_inplace(a, p):
        rows, cols = a.shape
        piv = np.empty(min(rows, cols), dtype=np.int64)
        r = 0
        for c in range(cols):
            if r == rows:
                break
            pr = -1
            for i in range(r, rows):
                if a[i, c] != 0:
                    pr = i
                    break
            if pr < 0:
                continue
            if pr != r:
                for j in range(cols):
                    t = a[r, j]
                    a[r, j] = a[pr, j]
                    a[pr, j] = t
            inv = _nb_pow_mod(a[r, c], p - 2, p)
            if inv != 1:
                for j in range(cols):
                    a[r, j] = (a[r, j] * inv) % p
            for i in range(rows):
                if i != r and a[i, c] != 0:
                    f = a[i, c]
                    for j in range(cols):
                        a[i, j] = (a[i, j] - f * a[r, j]) % p
            piv[r] = c
            r += 1
        return piv[:r]

    @njit(cache=True)
    def _nb_matmul(a, b, p):
        n, k = a.shape
        m = b.shape[1]
        out = np.zeros((n, m), dtype=np.int64)
        for i in range(n):
            for t in range(k):
                v = a[i, t]
                if v != 0:
                    for j in range(m):
                        out[i, j] += v * b[t, j]
        return np.mod(out, p)

    _rref_inplace = _nb_rref_inplace
    _matmul_kernel = _nb_matmul
else:
    _rref_inplace = _py_rref_inplace
    _matmul_kernel = _py_matmul


def matmul(a, b, p):
    """a @ b reduced mod p. Shapes must be compatible."""
    if a.shape[1] != b.shape[0]:
        raise InputError(f"matmul shape mismatch {a.shape} x {b.shape}")
    if a.shape[0] == 0 or b.shape[1] == 0 or a.shape[1] == 0:
        return zeros(a.shape[0], b.shape[1])
    return _matmul_kernel(np.ascontiguousarray(a), np.ascontiguousarray(b), p)


def madd(a, b, p):
    return (a + b) % p


def msub(a, b, p):
    return (a - b) % p


def mneg(a, p):
    return (-a) % p


def rref(m, p):
    """Reduced row-echelon form. Returns (R, rank, pivot column list)."""
    a = np.array(m, dtype=np.int64, copy=True)
    if a.size == 0:
        return a, 0, []
    piv = _rref_inplace(a, p)
    return a, len(piv), [int(c) for c in piv]


def rank(m, p):
    return rref(m, p)[1]


def kernel_basis(m, p):
    """Columns form a basis of the right null space {x : m x = 0}."""
    m = np.asarray(m, dtype=np.int64)
    rows, cols = m.shape
    r, rk, piv = rref(m, p)
    free = [c for c in range(cols) if c not in piv]
    out = zeros(cols, len(free))
    for k, f in enumerate(free):
        out[f, k] = 1
        for row, c in enumerate(piv):
            out[c, k] = (-r[row, f]) % p
    return out


def solve(a, b, p):
    """Some X with a X = b, or None when the system is inconsistent.

    b may be a vector (shape (m,)) or a matrix of right-hand sides.
    """
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    vec = b.ndim == 1
    if vec:
        b = b.reshape(-1, 1)
    if a.shape[0] != b.shape[0]:
        raise InputError(f"solve shape mismatch {a.shape} vs {b.shape}")
    n = a.shape[1]
    aug, _, piv = rref(np.hstack([a, b]) % p, p)
    x = zeros(n, b.shape[1])
    for row, c in enumerate(piv):
        if c >= n:
            return None
        x[c] = aug[row, n:]
    return x[:, 0] if vec else x


def image_basis(m, p):
    """Columns of m spanning the column space (the pivot columns)."""
    m = np.asarray(m, dtype=np.int64)
    _, _, piv = rref(m, p)
    return m[:, piv] if piv else zeros(m.shape[0], 0)


def complement_basis(span, p):
    """Standard basis vectors completing the column space of span to k^rows.

    Returns a (rows, rows-rank) matrix of 0/1 columns; its columns together
    with a basis of im(span) form a basis of the full space.
    """
    rows = span.shape[0]
    _, _, piv = rref(np.hstack([span, eye(rows)]), p)
    extra = [c - span.shape[1] for c in piv if c >= span.shape[1]]
    out = zeros(rows, len(extra))
    for k, i in enumerate(extra):
        out[i, k] = 1
    return out


def right_inverse(m, p):
    """A right inverse of a full-row-rank matrix, else None."""
    return solve(m, eye(m.shape[0]), p)


def random_matrix(rng, rows, cols, p):
    return np.asarray(
        [[rng.randrange(p) for _ in range(cols)] for _ in range(rows)],
        dtype=np.int64,
    ).reshape(rows, cols)


# ---------------------------------------------------------------------------
# matrix literals: rows separated by ';', entries by spaces, decimal residues

def parse_matrix(text, rows, cols, p, where=""):
    """Parse a matrix literal, validating the expected shape."""
    text = text.strip()
    if rows == 0 or cols == 0:
        if text:
            raise InputError(f"{where}: expected empty literal for {rows}x{cols} matrix")
        return zeros(rows, cols)
    try:
        data = [[int(e) for e in row.split()] for row in text.split(";")]
    except ValueError as exc:
        raise InputError(f"{where}: bad matrix entry ({exc})") from None
    if len(data) != rows or any(len(r) != cols for r in data):
        raise InputError(f"{where}: expected {rows}x{cols} matrix, got {text!r}")
    return mat(data, p)


def format_matrix(m):
    if m.size == 0:
        return ""
    return "; ".join(" ".join(str(int(e)) for e in row) for row in m)
