"""Bounded complexes of poset representations.

Homological convention: the differential d_n : X_n -> X_{n-1} lowers degree,
and d o d = 0 holds exactly.  Fixed sign conventions, chosen once for bit
reproducibility:

* shift:        (X[k])_n = X_{n-k} with differential (-1)^k d;
* cone(f):      C_n = X_{n-1} + Y_n,  d(x, y) = (-dx, -f x + dy);
* fiber:        fib(f) = cone(f)[-1], so fib(f)_n = X_n + Y_{n+1} with
                d(x, y) = (dx, f x - dy), and the projection to X is strict.

Quasi-isomorphism is tested as acyclicity of the cone; it is the only notion
of isomorphism "up to homotopy" used anywhere.
"""

import random

import numpy as np

from . import field
from .errors import InputError
from .rep import (
    Rep,
    RepMap,
    hom_space,
    is_projective,
    projective,
    projective_cover,
    rep_cokernel,
    rep_direct_sum,
    rep_kernel,
    skyscraper,
    summand_inclusion,
    summand_projection,
    zero_rep,
)


class Cx:
    """A bounded complex of representations of one poset over GF(p)."""

    def __init__(self, poset, p, terms, diffs, validate=True):
        self.poset = poset
        self.p = p
        degrees = [n for n, t in terms.items() if not t.is_zero()]
        if degrees:
            self.lo, self.hi = min(degrees), max(degrees)
        else:
            self.lo, self.hi = 0, -1
        self.terms = {
            n: terms.get(n, zero_rep(poset, p)) for n in range(self.lo, self.hi + 1)
        }
        self.diffs = {}
        for n in range(self.lo + 1, self.hi + 1):
            d = diffs.get(n)
            if d is None:
                d = RepMap.zero(self.term(n), self.term(n - 1))
            self.diffs[n] = d
        self._hdims = {}
        if validate:
            self.validate()

    def validate(self):
        """Check the complex invariants; raises InputError with coordinates."""
        for n, t in self.terms.items():
            if t.poset != self.poset or t.p != self.p:
                raise InputError(f"degree {n}: term over wrong poset or field")
        for n, d in self.diffs.items():
            if d.source is not self.term(n) and d.source != self.term(n):
                raise InputError(f"degree {n}: differential source mismatch")
            if d.target is not self.term(n - 1) and d.target != self.term(n - 1):
                raise InputError(f"degree {n}: differential target mismatch")
            d._check_natural()
        for n in range(self.lo + 2, self.hi + 1):
            comp = self.diff(n - 1).compose(self.diff(n))
            for x, m in enumerate(comp.comps):
                if m.any():
                    raise InputError(
                        f"d o d != 0 at degree {n}, element {self.poset.elements[x]}"
                    )
        return self

    @classmethod
    def zero(cls, poset, p):
        return cls(poset, p, {}, {}, validate=False)

    @classmethod
    def concentrated(cls, rep, n):
        return cls(rep.poset, rep.p, {n: rep}, {}, validate=False)

    def term(self, n):
        t = self.terms.get(n)
        if t is None:
            t = zero_rep(self.poset, self.p)
        return t

    def diff(self, n):
        d = self.diffs.get(n)
        if d is None:
            d = RepMap.zero(self.term(n), self.term(n - 1))
        return d

    def is_zero_object(self):
        return self.lo > self.hi

    @property
    def total_dim(self):
        return sum(t.total_dim for t in self.terms.values())

    def h_dim(self, n):
        """Homology dimensions at degree n, one entry per poset element."""
        if n not in self._hdims:
            dn, dn1 = self.diff(n), self.diff(n + 1)
            dims = []
            for x in range(self.poset.n):
                nullity = self.term(n).dims[x] - field.rank(dn.comps[x], self.p)
                dims.append(nullity - field.rank(dn1.comps[x], self.p))
            self._hdims[n] = tuple(dims)
        return self._hdims[n]

    def homology_dims(self):
        return {n: self.h_dim(n) for n in range(self.lo, self.hi + 1)}

    def is_acyclic(self):
        return all(
            all(d == 0 for d in self.h_dim(n)) for n in range(self.lo, self.hi + 1)
        )

    def shift(self, k):
        if k == 0:
            return self
        terms = {n + k: t for n, t in self.terms.items()}
        sign = 1 if k % 2 == 0 else -1
        diffs = {
            n + k: (d if sign == 1 else d.neg()) for n, d in self.diffs.items()
        }
        return Cx(self.poset, self.p, terms, diffs, validate=False)

    def trim(self):
        """Drop all-zero edge terms (identity on homology)."""
        lo, hi = self.lo, self.hi
        while lo <= hi and self.term(lo).is_zero():
            lo += 1
        while hi >= lo and self.term(hi).is_zero():
            hi -= 1
        if (lo, hi) == (self.lo, self.hi):
            return self
        terms = {n: self.terms[n] for n in range(lo, hi + 1)}
        diffs = {n: self.diffs[n] for n in range(lo + 1, hi + 1)}
        return Cx(self.poset, self.p, terms, diffs, validate=False)

    def restrict(self, sub):
        terms = {n: t.restrict(sub) for n, t in self.terms.items()}
        diffs = {n: d.restrict(sub) for n, d in self.diffs.items()}
        # reuse restricted term objects so identity checks stay cheap
        out = Cx(sub, self.p, terms, diffs, validate=False)
        return _relink(out)

    def __eq__(self, other):
        if not isinstance(other, Cx):
            return False
        a, b = self.trim(), other.trim()
        if (a.poset, a.p, a.lo, a.hi) != (b.poset, b.p, b.lo, b.hi):
            return False
        return all(a.term(n) == b.term(n) for n in a.terms) and all(
            a.diff(n) == b.diff(n) for n in a.diffs
        )

    def __repr__(self):
        dims = {n: t.dims for n, t in self.terms.items()}
        return f"Cx(degrees {self.lo}..{self.hi}, dims {dims})"


def _relink(x):
    """Make diffs reference the stored term objects (identity hygiene)."""
    for n in list(x.diffs):
        d = x.diffs[n]
        x.diffs[n] = RepMap(x.term(n), x.term(n - 1), d.comps, validate=False)
    return x


class ChainMap:
    """A degreewise natural map commuting exactly with the differentials."""

    def __init__(self, source, target, comps, validate=True):
        if source.poset != target.poset or source.p != target.p:
            raise InputError("chain map between complexes over different posets")
        self.source = source
        self.target = target
        self.p = source.p
        self.comps = {}
        for n, f in comps.items():
            if f is not None and not f.is_zero():
                self.comps[n] = f
        if validate:
            self.validate()

    def validate(self):
        for n, f in self.comps.items():
            if f.source != self.source.term(n) or f.target != self.target.term(n):
                raise InputError(f"degree {n}: component endpoints mismatch")
            f._check_natural()
        lo = min(self.source.lo, self.target.lo)
        hi = max(self.source.hi, self.target.hi)
        for n in range(lo + 1, hi + 1):
            lhs = self.target.diff(n).compose(self.comp(n))
            rhs = self.comp(n - 1).compose(self.source.diff(n))
            for x in range(self.source.poset.n):
                if not np.array_equal(lhs.comps[x], rhs.comps[x]):
                    raise InputError(
                        f"chain map fails d-commutation at degree {n},"
                        f" element {self.source.poset.elements[x]}"
                    )
        return self

    def comp(self, n):
        f = self.comps.get(n)
        if f is None:
            f = RepMap.zero(self.source.term(n), self.target.term(n))
        return f

    @staticmethod
    def identity(x):
        return ChainMap(
            x, x, {n: RepMap.identity(x.term(n)) for n in x.terms}, validate=False
        )

    @staticmethod
    def zero(source, target):
        return ChainMap(source, target, {}, validate=False)

    def compose(self, other):
        """self after other."""
        comps = {}
        for n in other.comps:
            comps[n] = self.comp(n).compose(other.comp(n))
        return ChainMap(other.source, self.target, comps, validate=False)

    def add(self, other):
        comps = {}
        for n in set(self.comps) | set(other.comps):
            comps[n] = self.comp(n).add(other.comp(n))
        return ChainMap(self.source, self.target, comps, validate=False)

    def scale(self, c):
        return ChainMap(
            self.source,
            self.target,
            {n: f.scale(c) for n, f in self.comps.items()},
            validate=False,
        )

    def neg(self):
        return self.scale(self.p - 1)

    def is_zero(self):
        return all(f.is_zero() for f in self.comps.values())

    def shift(self, k):
        return ChainMap(
            self.source.shift(k),
            self.target.shift(k),
            {n + k: f for n, f in self.comps.items()},
            validate=False,
        )

    def restrict(self, sub):
        return ChainMap(
            self.source.restrict(sub),
            self.target.restrict(sub),
            {n: f.restrict(sub) for n, f in self.comps.items()},
            validate=False,
        )

    def retarget(self, source, target):
        """Re-anchor onto equal (==) complex objects."""
        comps = {
            n: RepMap(source.term(n), target.term(n), f.comps, validate=False)
            for n, f in self.comps.items()
        }
        return ChainMap(source, target, comps, validate=False)

    def is_qiso(self):
        c, _, _ = cone(self)
        return c.is_acyclic()

    def __eq__(self, other):
        if not isinstance(other, ChainMap):
            return False
        if self.source != other.source or self.target != other.target:
            return False
        degrees = set(self.comps) | set(other.comps)
        return all(self.comp(n) == other.comp(n) for n in degrees)


class GradedMap:
    """A degree +1 collection of natural maps (used for chain homotopies)."""

    def __init__(self, source, target, comps):
        self.source = source
        self.target = target
        self.p = source.p
        self.comps = {n: f for n, f in comps.items() if f is not None and not f.is_zero()}

    def comp(self, n):
        f = self.comps.get(n)
        if f is None:
            f = RepMap.zero(self.source.term(n), self.target.term(n + 1))
        return f

    @staticmethod
    def zero(source, target):
        return GradedMap(source, target, {})

    def boundary(self):
        """The chain map d o h + h o d this homotopy bounds."""
        comps = {}
        lo = min(self.source.lo, self.target.lo)
        hi = max(self.source.hi, self.target.hi)
        for n in range(lo, hi + 1):
            a = self.target.diff(n + 1).compose(self.comp(n))
            b = self.comp(n - 1).compose(self.source.diff(n))
            comps[n] = a.add(b)
        return ChainMap(self.source, self.target, comps, validate=False)

    def pre(self, f):
        """h o f for a chain map f into the source."""
        return GradedMap(
            f.source, self.target, {n: self.comp(n).compose(f.comp(n)) for n in f.comps}
        )

    def post(self, f):
        """f o h for a chain map f out of the target."""
        return GradedMap(
            self.source,
            f.target,
            {n: f.comp(n + 1).compose(self.comp(n)) for n in self.comps},
        )

    def add(self, other):
        comps = {}
        for n in set(self.comps) | set(other.comps):
            comps[n] = self.comp(n).add(other.comp(n))
        return GradedMap(self.source, self.target, comps)

    def neg(self):
        return GradedMap(self.source, self.target, {n: f.neg() for n, f in self.comps.items()})

    def shift(self, k):
        """Shifted homotopy; carries (-1)^k so boundaries shift to boundaries."""
        out = GradedMap(
            self.source.shift(k),
            self.target.shift(k),
            {n + k: f for n, f in self.comps.items()},
        )
        return out if k % 2 == 0 else out.neg()


def is_null_homotopy(h, f):
    """True iff f = d o h + h o d exactly."""
    return h.boundary().add(f.neg()).is_zero()


# ---------------------------------------------------------------------------
# cones, fibers, canonical comparison maps

def _pair_term(xt, yt):
    total, offs = rep_direct_sum([xt, yt])
    return total, offs


def cone(f):
    """Mapping cone. Returns (C, incl: Y -> C, proj: C -> X[1])."""
    X, Y, p = f.source, f.target, f.p
    poset = X.poset
    lo = min(X.lo + 1, Y.lo)
    hi = max(X.hi + 1, Y.hi)
    terms, parts = {}, {}
    for n in range(lo, hi + 1):
        total, offs = _pair_term(X.term(n - 1), Y.term(n))
        terms[n] = total
        parts[n] = offs
    diffs = {}
    for n in range(lo + 1, hi + 1):
        src, tgt = terms[n], terms[n - 1]
        comps = []
        for e in range(poset.n):
            m = field.zeros(tgt.dims[e], src.dims[e])
            xs, ys = X.term(n - 1).dims[e], Y.term(n).dims[e]
            xo_s, yo_s = parts[n][0][e], parts[n][1][e]
            xo_t, yo_t = parts[n - 1][0][e], parts[n - 1][1][e]
            dx = X.diff(n - 1).comps[e]
            dy = Y.diff(n).comps[e]
            fe = f.comp(n - 1).comps[e]
            m[xo_t:xo_t + dx.shape[0], xo_s:xo_s + xs] = (-dx) % p
            m[yo_t:yo_t + fe.shape[0], xo_s:xo_s + xs] = (-fe) % p
            m[yo_t:yo_t + dy.shape[0], yo_s:yo_s + ys] = dy
            comps.append(m)
        diffs[n] = RepMap(src, tgt, comps, validate=False)
    C = Cx(poset, p, terms, diffs, validate=False)
    incl = ChainMap(
        Y,
        C,
        {
            n: summand_inclusion(C.term(n), Y.term(n), parts[n][1])
            for n in range(lo, hi + 1)
            if n in C.terms
        },
        validate=False,
    )
    Xs = X.shift(1)
    proj = ChainMap(
        C,
        Xs,
        {
            n: summand_projection(C.term(n), X.term(n - 1), parts[n][0])
            for n in range(lo, hi + 1)
            if n in C.terms
        },
        validate=False,
    )
    return C, incl, proj


def fib(f):
    """Fiber of a chain map. Returns (F, proj: F -> X)."""
    C, _, _ = cone(f)
    F = C.shift(-1)
    X = f.source
    comps = {}
    for n in F.terms:
        m = []
        for e in range(X.poset.n):
            xd = X.term(n).dims[e]
            mm = field.zeros(xd, F.term(n).dims[e])
            mm[:, :xd] = field.eye(xd)
            m.append(mm)
        comps[n] = RepMap(F.term(n), X.term(n), m, validate=False)
    proj = ChainMap(F, X, comps, validate=False)
    return F, proj


def cone_null_homotopy(f, C=None, incl=None):
    """The canonical homotopy bounding incl o f : X -> cone(f): h(x) = (-x, 0)."""
    if C is None:
        C, incl, _ = cone(f)
    X = f.source
    comps = {}
    for n in X.terms:
        m = []
        for e in range(X.poset.n):
            xd = X.term(n).dims[e]
            mm = field.zeros(C.term(n + 1).dims[e], xd)
            mm[:xd, :] = (-field.eye(xd)) % f.p
            m.append(mm)
        comps[n] = RepMap(X.term(n), C.term(n + 1), m, validate=False)
    return GradedMap(X, C, comps)


def map_from_cone(f, cone_of_f, g, h):
    """The map cone(f) -> C induced by g: Y -> C and a homotopy h with
    g o f = d h + h d.  Formula: (x, y) |-> g(y) - h(x)."""
    X, Y = f.source, f.target
    p = f.p
    comps = {}
    for n in cone_of_f.terms:
        m = []
        for e in range(X.poset.n):
            xd = X.term(n - 1).dims[e]
            tgt = g.target.term(n).dims[e]
            mm = field.zeros(tgt, cone_of_f.term(n).dims[e])
            he = h.comp(n - 1).comps[e]
            ge = g.comp(n).comps[e]
            mm[:, :xd] = (-he) % p
            mm[:, xd:xd + ge.shape[1]] = ge
            m.append(mm)
        comps[n] = RepMap(cone_of_f.term(n), g.target.term(n), m, validate=False)
    return ChainMap(cone_of_f, g.target, comps, validate=False)


def map_into_fib(f, fib_of_f, g, h):
    """The map A -> fib(f) induced by g: A -> X and a homotopy h with
    f o g = d h + h d.  Formula: a |-> (g(a), h(a))."""
    A = g.source
    comps = {}
    for n in A.terms:
        m = []
        for e in range(A.poset.n):
            ge = g.comp(n).comps[e]
            he = h.comp(n).comps[e]
            mm = field.zeros(fib_of_f.term(n).dims[e], A.term(n).dims[e])
            mm[:ge.shape[0], :] = ge
            mm[ge.shape[0]:ge.shape[0] + he.shape[0], :] = he
            m.append(mm)
        comps[n] = RepMap(A.term(n), fib_of_f.term(n), m, validate=False)
    return ChainMap(A, fib_of_f, comps, validate=False)


def fib_compare_cone(f, fib_of_f, cone_of_pi):
    """Canonical comparison cone(fib(f) -> X) -> Y: (x', y', x) |-> f(x) - y'.

    Always a quasi-isomorphism; used to verify fiber-sequence axioms.
    """
    X, Y = f.source, f.target
    p = f.p
    comps = {}
    for n in cone_of_pi.terms:
        m = []
        for e in range(X.poset.n):
            # cone(pi)_n = fib_{n-1} + X_n = X_{n-1} + Y_n + X_n
            xd1 = X.term(n - 1).dims[e]
            yd = Y.term(n).dims[e]
            xd = X.term(n).dims[e]
            mm = field.zeros(yd, cone_of_pi.term(n).dims[e])
            mm[:, xd1:xd1 + yd] = (-field.eye(yd)) % p
            fe = f.comp(n).comps[e]
            mm[:, xd1 + yd:xd1 + yd + xd] = fe
            m.append(mm)
        comps[n] = RepMap(cone_of_pi.term(n), Y.term(n), m, validate=False)
    return ChainMap(cone_of_pi, Y, comps, validate=False)


def cone_map(cone_f, cone_g, a, b):
    """Functorial map cone(f) -> cone(g) induced by a strict square
    b o f = g o a (a on sources, b on targets): blockwise diag(a, b)."""
    p = a.p
    comps = {}
    for n in set(cone_f.terms) | set(cone_g.terms):
        cs = []
        for e in range(a.source.poset.n):
            an = a.comp(n - 1).comps[e]
            bn = b.comp(n).comps[e]
            m = field.zeros(cone_g.term(n).dims[e], cone_f.term(n).dims[e])
            m[:an.shape[0], :an.shape[1]] = an
            m[an.shape[0]:an.shape[0] + bn.shape[0], an.shape[1]:an.shape[1] + bn.shape[1]] = bn
            cs.append(m)
        comps[n] = RepMap(cone_f.term(n), cone_g.term(n), cs, validate=False)
    return ChainMap(cone_f, cone_g, comps, validate=False)


def cone_map_h(cone_f, cone_g, a, b, h):
    """cone(f) -> cone(g) for a square commuting up to a homotopy h with
    d h + h d = b o f - g o a.  Formula: (u, x) |-> (a u, b x - h u)."""
    p = a.p
    comps = {}
    for n in set(cone_f.terms) | set(cone_g.terms):
        cs = []
        for e in range(a.source.poset.n):
            an = a.comp(n - 1).comps[e]
            bn = b.comp(n).comps[e]
            hn = h.comp(n - 1).comps[e]
            m = field.zeros(cone_g.term(n).dims[e], cone_f.term(n).dims[e])
            m[:an.shape[0], :an.shape[1]] = an
            m[an.shape[0]:an.shape[0] + hn.shape[0], :hn.shape[1]] = (-hn) % p
            m[an.shape[0]:an.shape[0] + bn.shape[0], an.shape[1]:an.shape[1] + bn.shape[1]] = bn
            cs.append(m)
        comps[n] = RepMap(cone_f.term(n), cone_g.term(n), cs, validate=False)
    return ChainMap(cone_f, cone_g, comps, validate=False)


def fib_map(fib_f, fib_g, a, b):
    """Functorial map fib(f) -> fib(g) induced by a strict square
    b o f = g o a: blockwise diag(a_n, b_{n+1})."""
    comps = {}
    for n in set(fib_f.terms) | set(fib_g.terms):
        cs = []
        for e in range(a.source.poset.n):
            an = a.comp(n).comps[e]
            bn = b.comp(n + 1).comps[e]
            m = field.zeros(fib_g.term(n).dims[e], fib_f.term(n).dims[e])
            m[:an.shape[0], :an.shape[1]] = an
            m[an.shape[0]:an.shape[0] + bn.shape[0], an.shape[1]:an.shape[1] + bn.shape[1]] = bn
            cs.append(m)
        comps[n] = RepMap(fib_f.term(n), fib_g.term(n), cs, validate=False)
    return ChainMap(fib_f, fib_g, comps, validate=False)


def fib_null_homotopy(f, fib_of_f):
    """The homotopy bounding f o pi : fib(f) -> Y: project the second block."""
    X, Y = f.source, f.target
    comps = {}
    for n in fib_of_f.terms:
        cs = []
        for e in range(X.poset.n):
            xd = X.term(n).dims[e]
            yd = Y.term(n + 1).dims[e]
            m = field.zeros(yd, fib_of_f.term(n).dims[e])
            m[:, xd:xd + yd] = field.eye(yd)
            cs.append(m)
        comps[n] = RepMap(fib_of_f.term(n), Y.term(n + 1), cs, validate=False)
    return GradedMap(fib_of_f, Y, comps)


def cx_direct_sum(parts):
    """Direct sum of complexes. Returns (X, inclusions, projections)."""
    parts = list(parts)
    poset, p = parts[0].poset, parts[0].p
    lo = min(x.lo for x in parts)
    hi = max(x.hi for x in parts)
    terms, offs = {}, {}
    for n in range(lo, hi + 1):
        terms[n], offs[n] = rep_direct_sum([x.term(n) for x in parts])
    diffs = {}
    for n in range(lo + 1, hi + 1):
        comps = []
        for e in range(poset.n):
            m = field.zeros(terms[n - 1].dims[e], terms[n].dims[e])
            for k, x in enumerate(parts):
                d = x.diff(n).comps[e]
                os, ot = offs[n][k][e], offs[n - 1][k][e]
                m[ot:ot + d.shape[0], os:os + d.shape[1]] = d
            comps.append(m)
        diffs[n] = RepMap(terms[n], terms[n - 1], comps, validate=False)
    X = Cx(poset, p, terms, diffs, validate=False)
    incls, projs = [], []
    for k, part in enumerate(parts):
        incls.append(
            ChainMap(
                part,
                X,
                {
                    n: summand_inclusion(X.term(n), part.term(n), offs[n][k])
                    for n in part.terms if n in X.terms
                },
                validate=False,
            )
        )
        projs.append(
            ChainMap(
                X,
                part,
                {
                    n: summand_projection(X.term(n), part.term(n), offs[n][k])
                    for n in part.terms if n in X.terms
                },
                validate=False,
            )
        )
    return X, incls, projs


# ---------------------------------------------------------------------------
# standard (smart) truncations

def truncate_ge(X, n):
    """Smart truncation killing homology below n. Returns (T, incl)."""
    if n <= X.lo:
        return X, ChainMap.identity(X)
    if n > X.hi:
        Z = Cx.zero(X.poset, X.p)
        return Z, ChainMap.zero(Z, X)
    K, incl_k = rep_kernel(X.diff(n))
    terms = {n: K}
    diffs = {}
    for m in range(n + 1, X.hi + 1):
        terms[m] = X.term(m)
        if m > n + 1:
            diffs[m] = X.diffs[m]
    if n + 1 <= X.hi:
        comps = []
        dn1 = X.diff(n + 1)
        for e in range(X.poset.n):
            sol = field.solve(incl_k.comps[e], dn1.comps[e], X.p)
            assert sol is not None, "image of d is not contained in ker d"
            comps.append(sol)
        diffs[n + 1] = RepMap(terms[n + 1], K, comps, validate=False)
    T = Cx(X.poset, X.p, terms, diffs, validate=False)
    incl = ChainMap(
        T,
        X,
        {m: (incl_k if m == n else RepMap.identity(X.term(m))) for m in T.terms},
        validate=False,
    )
    return T, incl


def truncate_lt(X, n):
    """Smart truncation keeping homology below n. Returns (proj, R)."""
    if n > X.hi:
        return ChainMap.identity(X), X
    if n <= X.lo:
        Z = Cx.zero(X.poset, X.p)
        return ChainMap.zero(X, Z), Z
    K, incl_k = rep_kernel(X.diff(n))
    Q, proj_q = rep_cokernel(incl_k)
    terms = {n: Q}
    diffs = {}
    for m in range(X.lo, n):
        terms[m] = X.term(m)
        if m > X.lo:
            diffs[m] = X.diffs[m]
    # induced differential Q -> X_{n-1}: solve N o proj_q = d_n
    if n - 1 >= X.lo:
        comps = []
        dn = X.diff(n)
        for e in range(X.poset.n):
            sol = field.solve(proj_q.comps[e].T, dn.comps[e].T, X.p)
            assert sol is not None
            comps.append(sol.T % X.p)
        diffs[n] = RepMap(Q, terms[n - 1], comps, validate=False)
    R = Cx(X.poset, X.p, terms, diffs, validate=False)
    proj = ChainMap(
        X,
        R,
        {m: (proj_q if m == n else RepMap.identity(X.term(m))) for m in R.terms},
        validate=False,
    )
    return proj, R


def truncate_ge_map(f, n, TX, inclX, TY, inclY):
    """Induced map on truncations, strictly natural: inclY o Tf = f o inclX."""
    comps = {}
    for m in TX.terms:
        if m > n:
            comps[m] = f.comp(m)
        else:
            cs = []
            for e in range(f.source.poset.n):
                rhs = field.matmul(f.comp(m).comps[e], inclX.comp(m).comps[e], f.p)
                sol = field.solve(inclY.comp(m).comps[e], rhs, f.p)
                assert sol is not None
                cs.append(sol)
            comps[m] = RepMap(TX.term(m), TY.term(m), cs, validate=False)
    return ChainMap(TX, TY, comps, validate=False)


def truncate_lt_map(f, n, projX, RX, projY, RY):
    """Induced map on quotient truncations: Rf o projX = projY o f."""
    comps = {}
    for m in RX.terms:
        if m < n:
            comps[m] = f.comp(m)
        else:
            cs = []
            for e in range(f.source.poset.n):
                rhs = field.matmul(projY.comp(m).comps[e], f.comp(m).comps[e], f.p)
                sol = field.solve(projX.comp(m).comps[e].T, rhs.T, f.p)
                assert sol is not None
                cs.append(sol.T % f.p)
            comps[m] = RepMap(RX.term(m), RY.term(m), cs, validate=False)
    return ChainMap(RX, RY, comps, validate=False)


# ---------------------------------------------------------------------------
# homology as a representation, induced maps

def homology(X, n):
    """H_n(X) as a Rep with induced structure maps.

    Returns (H, cycles) where cycles[e] holds representative cycle columns.
    """
    p = X.p
    Z, B, H_reps = [], [], []
    dims = []
    for e in range(X.poset.n):
        z = field.kernel_basis(X.diff(n).comps[e], p)
        b = field.image_basis(X.diff(n + 1).comps[e], p)
        stacked = np.hstack([b, z])
        _, _, piv = field.rref(stacked, p)
        sel = [c - b.shape[1] for c in piv if c >= b.shape[1]]
        h = z[:, sel] if sel else field.zeros(z.shape[0], 0)
        Z.append(z)
        B.append(b)
        H_reps.append(h)
        dims.append(h.shape[1])
    mats = {}
    for (i, j) in X.poset.covers():
        push = field.matmul(X.term(n).mats[(i, j)], H_reps[i], p)
        sol = field.solve(np.hstack([B[j], H_reps[j]]), push, p)
        assert sol is not None, "homology classes are not preserved"
        mats[(i, j)] = sol[B[j].shape[1]:, :]
    H = Rep(X.poset, p, dims, mats, validate=False)
    return H, H_reps


def homology_map(f, n, HX=None, HY=None):
    """Matrices of the induced map H_n(f) per poset element."""
    p = f.p
    if HX is None:
        HX = homology(f.source, n)
    if HY is None:
        HY = homology(f.target, n)
    _, repsX = HX
    _, repsY = HY
    out = []
    for e in range(f.source.poset.n):
        by = field.image_basis(f.target.diff(n + 1).comps[e], p)
        push = field.matmul(f.comp(n).comps[e], repsX[e], p)
        sol = field.solve(np.hstack([by, repsY[e]]), push, p)
        assert sol is not None
        out.append(sol[by.shape[1]:, :])
    return out


# ---------------------------------------------------------------------------
# spaces of chain maps and homotopies (exact linear systems)

class _Coords:
    """Coordinates for degreewise natural collections A_n -> B_{n+shift}."""

    def __init__(self, A, B, shift=0):
        self.A, self.B, self.shift = A, B, shift
        self.p = A.p
        self.slots = []
        self.offsets = {}
        total = 0
        for n in range(A.lo, A.hi + 1):
            for e in range(A.poset.n):
                da = A.term(n).dims[e]
                db = B.term(n + shift).dims[e]
                if da and db:
                    self.offsets[(n, e)] = (total, da, db)
                    total += da * db
        self.total = total

    def block(self, n, e):
        return self.offsets.get((n, e))

    def to_maps(self, vec):
        comps = {}
        for n in range(self.A.lo, self.A.hi + 1):
            cs = []
            for e in range(self.A.poset.n):
                blk = self.block(n, e)
                da = self.A.term(n).dims[e]
                db = self.B.term(n + self.shift).dims[e]
                if blk is None:
                    cs.append(field.zeros(db, da))
                else:
                    o, da, db = blk
                    cs.append(vec[o:o + da * db].reshape(db, da) % self.p)
            comps[n] = RepMap(
                self.A.term(n), self.B.term(n + self.shift), cs, validate=False
            )
        return comps

    def from_maps(self, comps):
        vec = np.zeros(self.total, dtype=np.int64)
        for n, f in comps.items():
            for e in range(self.A.poset.n):
                blk = self.block(n, e)
                if blk is not None:
                    o, da, db = blk
                    vec[o:o + da * db] = f.comps[e].reshape(-1)
        return vec

    def naturality_rows(self):
        """Rows expressing naturality of every component over every cover."""
        blocks = []
        for n in range(self.A.lo, self.A.hi + 1):
            At = self.A.term(n)
            Bt = self.B.term(n + self.shift)
            for (i, j) in self.A.poset.covers():
                rows = Bt.dims[j] * At.dims[i]
                if rows == 0:
                    continue
                entries = []
                bi = self.block(n, i)
                if bi is not None:
                    entries.append((bi[0], np.kron(Bt.mats[(i, j)], field.eye(At.dims[i]))))
                bj = self.block(n, j)
                if bj is not None:
                    entries.append(
                        (bj[0], (-np.kron(field.eye(Bt.dims[j]), At.mats[(i, j)].T)) % self.p)
                    )
                if entries:
                    blocks.append((rows, entries))
        return blocks

    def chain_rows(self):
        """Rows expressing d_B o phi - (-1)^shift phi o d_A = 0."""
        sign = -1 if self.shift % 2 else 1
        blocks = []
        for n in range(self.A.lo, self.A.hi + 2):
            At = self.A.term(n)
            Btm = self.B.term(n - 1 + self.shift)
            for e in range(self.A.poset.n):
                rows = Btm.dims[e] * At.dims[e]
                if rows == 0:
                    continue
                entries = []
                b_here = self.block(n, e)
                if b_here is not None:
                    dB = self.B.diff(n + self.shift).comps[e]
                    entries.append((b_here[0], np.kron(dB, field.eye(At.dims[e]))))
                b_prev = self.block(n - 1, e)
                if b_prev is not None:
                    dA = self.A.diff(n).comps[e]
                    m = np.kron(field.eye(Btm.dims[e]), dA.T)
                    entries.append((b_prev[0], (-sign * m) % self.p))
                if entries:
                    blocks.append((rows, entries))
        return blocks

    def assemble(self, blocks):
        nrows = sum(r for r, _ in blocks)
        out = np.zeros((nrows, self.total), dtype=np.int64)
        at = 0
        for rows, entries in blocks:
            for off, m in entries:
                out[at:at + rows, off:off + m.shape[1]] = (out[at:at + rows, off:off + m.shape[1]] + m) % self.p
            at += rows
        return out


def chain_map_space(A, B):
    """Basis of the space of strict chain maps A -> B (deterministic order)."""
    if A.is_zero_object() or B.is_zero_object():
        return []
    co = _Coords(A, B, 0)
    if co.total == 0:
        return []
    sys = co.assemble(co.naturality_rows() + co.chain_rows())
    basis = field.kernel_basis(sys, A.p)
    out = []
    for k in range(basis.shape[1]):
        out.append(ChainMap(A, B, co.to_maps(basis[:, k]), validate=False))
    return out


def homotopy_space(A, B):
    """Basis of degreewise natural degree +1 collections A -> B."""
    co = _Coords(A, B, 1)
    if co.total == 0:
        return co, []
    sys = co.assemble(co.naturality_rows())
    basis = field.kernel_basis(sys, A.p)
    return co, [GradedMap(A, B, co.to_maps(basis[:, k])) for k in range(basis.shape[1])]


# ---------------------------------------------------------------------------
# cofibrant replacement and derived hom

def cofibrant_replace(X):
    """A quasi-isomorphism (P, w: P -> X) with P degreewise projective.

    Built degree by degree from the bottom: P_n covers the compatibility
    object T_n = X_n x_{X_{n-1}} Z_{n-1}(P).  Bounded because the category
    of representations has finite global dimension (longest chain length).
    """
    X = X.trim()
    poset, p = X.poset, X.p
    if X.is_zero_object():
        return X, ChainMap.identity(X)
    if all(is_projective(t) for t in X.terms.values()):
        return X, ChainMap.identity(X)
    height = max(len(c) for c in poset.chains_idx(tuple(range(poset.n))))
    P_terms, P_diffs, w_comps = {}, {}, {}
    Z, zeta = None, None  # cycles of the previous P-degree and their inclusion
    n = X.lo
    cap = X.hi + height + 2
    while n <= cap:
        Xn = X.term(n)
        if Z is None:
            Z = zero_rep(poset, p)
            zeta = None
        # T = ker( X_n + Z --(d, -w o zeta)--> X_{n-1} )
        D, offs = rep_direct_sum([Xn, Z])
        comps = []
        for e in range(poset.n):
            dx = X.diff(n).comps[e]
            if zeta is None:
                wz = field.zeros(X.term(n - 1).dims[e], Z.dims[e])
            else:
                wz = field.matmul(w_comps[n - 1].comps[e], zeta.comps[e], p)
            comps.append(np.hstack([dx, (-wz) % p]))
        to_prev = RepMap(D, X.term(n - 1), comps, validate=False)
        T, incl_T = rep_kernel(to_prev)
        pr_X = summand_projection(D, Xn, offs[0]).compose(incl_T)
        pr_Z = summand_projection(D, Z, offs[1]).compose(incl_T)
        if n > X.hi:
            if T.total_dim == 0:
                break
            if is_projective(T):
                Pn, cover = T, RepMap.identity(T)
            else:
                Pn, cover = projective_cover(T)
        else:
            Pn, cover = projective_cover(T)
        P_terms[n] = Pn
        w_comps[n] = pr_X.compose(cover)
        d_from_Pn = pr_Z.compose(cover)
        if zeta is not None:
            P_diffs[n] = zeta.compose(d_from_Pn)
        if Pn.total_dim == 0 and n > X.hi:
            break
        # cycles of the new degree
        if n in P_diffs:
            Z, zeta = rep_kernel(P_diffs[n])
        else:
            Z, zeta = Pn, RepMap.identity(Pn)
        n += 1
    else:  # pragma: no cover - guarded by the global dimension bound
        raise AssertionError("cofibrant replacement failed to terminate")
    P = Cx(poset, p, P_terms, P_diffs, validate=False)
    w = ChainMap(P, X, {m: w_comps[m] for m in P.terms}, validate=False)
    return P.trim(), w


def derived_hom_h0(X, Y):
    """dim of degree-0 maps X -> Y in the homotopy category.

    Computed as chain maps cofibrant_replace(X) -> Y modulo chain homotopy:
    one kernel and one rank computation over GF(p).
    """
    if X.poset != Y.poset:
        raise InputError("derived hom needs complexes over the same poset")
    P, _ = cofibrant_replace(X)
    if P.is_zero_object() or Y.is_zero_object():
        return 0
    co0 = _Coords(P, Y, 0)
    if co0.total == 0:
        return 0
    sys = co0.assemble(co0.naturality_rows() + co0.chain_rows())
    cycles = field.kernel_basis(sys, X.p)
    if cycles.shape[1] == 0:
        return 0
    _, h_basis = homotopy_space(P, Y)
    if not h_basis:
        return cycles.shape[1]
    bcols = []
    for h in h_basis:
        bd = h.boundary()
        bcols.append(co0.from_maps(bd.comps))
    boundary = np.stack(bcols, axis=1) % X.p
    return cycles.shape[1] - field.rank(boundary, X.p)


def lift_compare(f, g):
    """Solve for a comparison c with g o c homotopic to f o w.

    f: A -> X and g: B -> X; returns (c: P -> B, w: P -> A) with P a
    cofibrant replacement of A, or None when no strict solution exists.
    """
    if f.target != g.target:
        raise InputError("lift_compare needs maps with a common target")
    A, B, X = f.source, g.source, f.target
    p = f.p
    P, w = cofibrant_replace(A)
    fw = f.compose(w)
    co_c = _Coords(P, B, 0)
    co_h = _Coords(P, X, 1)
    nc, nh = co_c.total, co_h.total
    blocks = []
    # homogeneous: c is a chain map
    for rows, entries in co_c.naturality_rows() + co_c.chain_rows():
        blocks.append((rows, entries, None))
    # homogeneous: h is natural
    for rows, entries in co_h.naturality_rows():
        blocks.append((rows, [(off + nc, m) for off, m in entries], None))
    # affine: g o c + d h + h d = f o w
    for n in range(P.lo, P.hi + 1):
        Pt = P.term(n)
        Xt = X.term(n)
        for e in range(P.poset.n):
            rows = Xt.dims[e] * Pt.dims[e]
            if rows == 0:
                continue
            entries = []
            bc = co_c.block(n, e)
            if bc is not None:
                ge = g.comp(n).comps[e]
                entries.append((bc[0], np.kron(ge, field.eye(Pt.dims[e]))))
            bh = co_h.block(n, e)
            if bh is not None:
                dX = X.diff(n + 1).comps[e]
                entries.append((nc + bh[0], np.kron(dX, field.eye(Pt.dims[e]))))
            bh_prev = co_h.block(n - 1, e)
            if bh_prev is not None:
                dP = P.diff(n).comps[e]
                entries.append(
                    (nc + bh_prev[0], np.kron(field.eye(Xt.dims[e]), dP.T))
                )
            rhs = fw.comp(n).comps[e].reshape(-1)
            blocks.append((rows, entries, rhs))
    nrows = sum(r for r, _, _ in blocks)
    M = np.zeros((nrows, nc + nh), dtype=np.int64)
    b = np.zeros(nrows, dtype=np.int64)
    at = 0
    for rows, entries, rhs in blocks:
        for off, m in entries:
            M[at:at + rows, off:off + m.shape[1]] = (M[at:at + rows, off:off + m.shape[1]] + m) % p
        if rhs is not None:
            b[at:at + rows] = rhs
        at += rows
    sol = field.solve(M, b, p)
    if sol is None:
        return None
    c = ChainMap(P, B, co_c.to_maps(sol[:nc]), validate=False)
    h = GradedMap(P, X, co_h.to_maps(sol[nc:]))
    return c, w, h


# ---------------------------------------------------------------------------
# seeded random complexes and chain maps

def random_complex(poset, p, seed_or_rng, degree_lo=-2, degree_hi=2,
                   generators=2, cone_steps=2, sky_dim=1):
    """Deterministic random bounded complex, valid by construction.

    Starts from shifted projectives and skyscrapers and iterates cones over
    random elements of the strict chain-map space.
    """
    rng = (
        random.Random(seed_or_rng)
        if isinstance(seed_or_rng, int)
        else seed_or_rng
    )
    pieces = []
    for _ in range(generators):
        x = rng.randrange(poset.n)
        deg = rng.randint(degree_lo, degree_hi)
        if rng.random() < 0.5:
            r = projective(poset, x, p)
        else:
            r = skyscraper(poset, x, p, dim=rng.randint(1, sky_dim))
        pieces.append(Cx.concentrated(r, deg))
    if not pieces:
        return Cx.zero(poset, p)
    X, _, _ = cx_direct_sum(pieces)
    for _ in range(cone_steps):
        x = rng.randrange(poset.n)
        deg = rng.randint(degree_lo, degree_hi)
        G = Cx.concentrated(projective(poset, x, p), deg)
        basis = chain_map_space(G, X)
        if not basis:
            continue
        f = ChainMap.zero(G, X)
        for bmap in basis:
            f = f.add(bmap.scale(rng.randrange(p)))
        X, _, _ = cone(f)
        X = X.trim()
    return X


def random_chain_map(rng, A, B):
    """Deterministic random strict chain map A -> B (possibly zero)."""
    basis = chain_map_space(A, B)
    f = ChainMap.zero(A, B)
    for bmap in basis:
        f = f.add(bmap.scale(rng.randrange(A.p)))
    return f


# ---------------------------------------------------------------------------
# complex file format

def write_cx(X, poset_name, fh):
    X = X.trim()
    fh.write(f"complex over {poset_name} char={X.p} degrees {X.lo}..{X.hi}\n")
    names = X.poset.elements
    for n in range(X.lo, X.hi + 1):
        dims = " ".join(f"{names[e]}={X.term(n).dims[e]}" for e in range(X.poset.n))
        fh.write(f"dims {n} {dims}\n")
    for n in range(X.lo, X.hi + 1):
        t = X.term(n)
        for (i, j) in X.poset.covers():
            m = t.mats[(i, j)]
            if m.size:
                fh.write(f"map {n} {names[i]} {names[j]} {field.format_matrix(m)}\n")
    for n in range(X.lo + 1, X.hi + 1):
        d = X.diff(n)
        for e in range(X.poset.n):
            m = d.comps[e]
            if m.size:
                fh.write(f"diff {n} {names[e]} {field.format_matrix(m)}\n")
    fh.write("end\n")


def read_cx(text, poset, p, name="complex"):
    """Parse and fully validate a complex file against a known poset."""
    header = None
    dims = {}
    maps = {}
    diffs = {}
    ended = False
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ended:
            raise InputError(f"{name}:{ln}: content after 'end'")
        parts = line.split(None, 1)
        kind = parts[0]
        rest = parts[1] if len(parts) > 1 else ""
        if kind == "complex":
            toks = rest.split()
            if len(toks) != 5 or toks[0] != "over" or toks[3] != "degrees":
                raise InputError(f"{name}:{ln}: malformed header")
            if not toks[2].startswith("char=") or ".." not in toks[4]:
                raise InputError(f"{name}:{ln}: malformed header")
            try:
                char = int(toks[2][5:])
                lo_s, hi_s = toks[4].rsplit("..", 1)
                lo, hi = int(lo_s), int(hi_s)
            except ValueError:
                raise InputError(f"{name}:{ln}: malformed header") from None
            if char != p:
                raise InputError(
                    f"{name}:{ln}: characteristic {char} does not match session char {p}"
                )
            header = (toks[1], lo, hi)
        elif kind == "dims":
            toks = rest.split()
            try:
                n = int(toks[0])
            except (IndexError, ValueError):
                raise InputError(f"{name}:{ln}: malformed dims line") from None
            row = [0] * poset.n
            for tok in toks[1:]:
                if "=" not in tok:
                    raise InputError(f"{name}:{ln}: malformed dims entry {tok!r}")
                e, v = tok.split("=", 1)
                row[poset.idx(e)] = int(v)
            dims[n] = row
        elif kind == "map":
            toks = rest.split(None, 3)
            if len(toks) < 3:
                raise InputError(f"{name}:{ln}: malformed map line")
            n = int(toks[0])
            i, j = poset.idx(toks[1]), poset.idx(toks[2])
            maps[(n, i, j)] = (ln, toks[3] if len(toks) > 3 else "")
        elif kind == "diff":
            toks = rest.split(None, 2)
            if len(toks) < 2:
                raise InputError(f"{name}:{ln}: malformed diff line")
            n = int(toks[0])
            e = poset.idx(toks[1])
            diffs[(n, e)] = (ln, toks[2] if len(toks) > 2 else "")
        elif kind == "end":
            ended = True
        else:
            raise InputError(f"{name}:{ln}: unknown directive {kind!r}")
    if header is None:
        raise InputError(f"{name}: missing header")
    if not ended:
        raise InputError(f"{name}: missing 'end' terminator")
    _, lo, hi = header
    terms = {}
    for n in range(lo, hi + 1):
        row = dims.get(n, [0] * poset.n)
        mats = {}
        for (i, j) in poset.covers():
            entry = maps.get((n, i, j))
            shape = (row[j], row[i])
            if entry is None:
                mats[(i, j)] = field.zeros(*shape)
            else:
                eln, text_m = entry
                mats[(i, j)] = field.parse_matrix(
                    text_m, *shape, p, where=f"{name}:{eln}"
                )
        try:
            terms[n] = Rep(poset, p, row, mats)
        except InputError as exc:
            raise InputError(f"{name}: degree {n}: {exc}") from None
    dmaps = {}
    for n in range(lo + 1, hi + 1):
        comps = []
        for e in range(poset.n):
            entry = diffs.get((n, e))
            shape = (terms.get(n - 1, zero_rep(poset, p)).dims[e], terms.get(n, zero_rep(poset, p)).dims[e])
            if entry is None:
                comps.append(field.zeros(*shape))
            else:
                eln, text_m = entry
                comps.append(field.parse_matrix(text_m, *shape, p, where=f"{name}:{eln}"))
        try:
            dmaps[n] = RepMap(terms[n], terms[n - 1], comps)
        except InputError as exc:
            raise InputError(f"{name}: differential at degree {n}: {exc}") from None
    try:
        return Cx(poset, p, terms, dmaps, validate=True)
    except InputError as exc:
        raise InputError(f"{name}: {exc}") from None


def load_cx(path, poset, p):
    import os
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return read_cx(text, poset, p, name=os.path.basename(path))
