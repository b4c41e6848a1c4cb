"""Finite-dimensional representations of a poset over GF(p).

A Rep assigns a vector space dimension to every element and a structure
matrix to every cover relation; commutativity over diamonds is validated at
construction, so composites along arbitrary paths are well defined.  These
are exactly the sheaves on the finite space whose open sets are the
up-closed subsets.
"""

import numpy as np

from . import field
from .errors import InputError


class Rep:
    """A functor poset -> GF(p)-vector spaces.

    dims: one dimension per poset element (by index).
    mats: structure matrix for each cover (i, j), of shape dims[j] x dims[i].
    """

    def __init__(self, poset, p, dims, mats, validate=True):
        self.poset = poset
        self.p = p
        self.dims = tuple(int(d) for d in dims)
        if len(self.dims) != poset.n:
            raise InputError("dims length does not match poset size")
        self.mats = {}
        for (i, j) in poset.covers():
            m = mats.get((i, j))
            if m is None:
                m = field.zeros(self.dims[j], self.dims[i])
            m = np.asarray(m, dtype=np.int64) % p
            if m.shape != (self.dims[j], self.dims[i]):
                raise InputError(
                    f"structure matrix for cover {poset.elements[i]}<{poset.elements[j]}"
                    f" has shape {m.shape}, expected {(self.dims[j], self.dims[i])}"
                )
            self.mats[(i, j)] = m
        self._full = {}
        if validate:
            self._check_diamonds()

    def _check_diamonds(self):
        # topological sweep; every cover path between two elements must agree
        order = sorted(range(self.poset.n), key=lambda j: int(np.sum(self.poset.leq[:, j])))
        covers_into = {j: [] for j in range(self.poset.n)}
        for (i, j) in self.poset.covers():
            covers_into[j].append(i)
        full = {}
        for z in order:
            full[(z, z)] = field.eye(self.dims[z])
            for x in range(self.poset.n):
                if x == z or not self.poset.leq[x, z]:
                    continue
                candidate = None
                for y in covers_into[z]:
                    if not self.poset.leq[x, y]:
                        continue
                    comp = field.matmul(self.mats[(y, z)], full[(x, y)], self.p)
                    if candidate is None:
                        candidate = comp
                    elif not np.array_equal(candidate, comp):
                        raise InputError(
                            "diamond commutativity fails between "
                            f"{self.poset.elements[x]} and {self.poset.elements[z]}"
                        )
                full[(x, z)] = candidate
        self._full = full

    def full_map(self, i, j):
        """Composite structure matrix for any pair i <= j."""
        if (i, j) not in self._full:
            if i == j:
                self._full[(i, j)] = field.eye(self.dims[i])
            else:
                if not self.poset.leq[i, j]:
                    raise InputError("full_map on incomparable pair")
                for y, z in self.poset.covers():
                    if z == j and self.poset.leq[i, y]:
                        self._full[(i, j)] = field.matmul(
                            self.mats[(y, j)], self.full_map(i, y), self.p
                        )
                        break
        return self._full[(i, j)]

    @property
    def total_dim(self):
        return sum(self.dims)

    def is_zero(self):
        return self.total_dim == 0

    def restrict(self, sub):
        """Restriction along a subposet (computed with composite maps)."""
        pidx = sub._parent_indices
        dims = [self.dims[i] for i in pidx]
        mats = {
            (a, b): self.full_map(pidx[a], pidx[b]) for (a, b) in sub.covers()
        }
        return Rep(sub, self.p, dims, mats, validate=False)

    def __eq__(self, other):
        return (
            isinstance(other, Rep)
            and self.poset == other.poset
            and self.p == other.p
            and self.dims == other.dims
            and all(np.array_equal(self.mats[c], other.mats[c]) for c in self.mats)
        )

    def __repr__(self):
        by_elem = {self.poset.elements[i]: d for i, d in enumerate(self.dims)}
        return f"Rep({by_elem})"


class RepMap:
    """A natural transformation between two Reps on the same poset."""

    def __init__(self, source, target, comps, validate=True):
        if source.poset != target.poset:
            raise InputError("RepMap between representations of different posets")
        self.source = source
        self.target = target
        self.p = source.p
        self.comps = []
        for x in range(source.poset.n):
            m = comps[x] if x < len(comps) and comps[x] is not None else None
            if m is None:
                m = field.zeros(target.dims[x], source.dims[x])
            m = np.asarray(m, dtype=np.int64) % self.p
            if m.shape != (target.dims[x], source.dims[x]):
                raise InputError(
                    f"component at {source.poset.elements[x]} has shape {m.shape},"
                    f" expected {(target.dims[x], source.dims[x])}"
                )
            self.comps.append(m)
        if validate:
            self._check_natural()

    def _check_natural(self):
        for (i, j) in self.source.poset.covers():
            lhs = field.matmul(self.target.mats[(i, j)], self.comps[i], self.p)
            rhs = field.matmul(self.comps[j], self.source.mats[(i, j)], self.p)
            if not np.array_equal(lhs, rhs):
                names = self.source.poset.elements
                raise InputError(f"naturality fails on cover {names[i]}<{names[j]}")

    def compose(self, other):
        """self after other."""
        if other.target is not self.source and other.target != self.source:
            raise InputError("composition source/target mismatch")
        comps = [
            field.matmul(self.comps[x], other.comps[x], self.p)
            for x in range(len(self.comps))
        ]
        return RepMap(other.source, self.target, comps, validate=False)

    def add(self, other):
        comps = [field.madd(a, b, self.p) for a, b in zip(self.comps, other.comps)]
        return RepMap(self.source, self.target, comps, validate=False)

    def scale(self, c):
        comps = [(m * (c % self.p)) % self.p for m in self.comps]
        return RepMap(self.source, self.target, comps, validate=False)

    def neg(self):
        return self.scale(self.p - 1)

    def is_zero(self):
        return all(not m.any() for m in self.comps)

    def restrict(self, sub):
        pidx = sub._parent_indices
        return RepMap(
            self.source.restrict(sub),
            self.target.restrict(sub),
            [self.comps[i] for i in pidx],
            validate=False,
        )

    def __eq__(self, other):
        return (
            isinstance(other, RepMap)
            and self.source == other.source
            and self.target == other.target
            and all(np.array_equal(a, b) for a, b in zip(self.comps, other.comps))
        )

    @staticmethod
    def identity(rep):
        return RepMap(rep, rep, [field.eye(d) for d in rep.dims], validate=False)

    @staticmethod
    def zero(source, target):
        return RepMap(source, target, [None] * source.poset.n, validate=False)


def zero_rep(poset, p):
    return Rep(poset, p, [0] * poset.n, {}, validate=False)


def projective(poset, x, p):
    """The representable projective P_x: k at every y >= x, identity maps."""
    if not isinstance(x, (int, np.integer)):
        x = poset.idx(x)
    dims = [1 if poset.leq[x, y] else 0 for y in range(poset.n)]
    mats = {}
    for (i, j) in poset.covers():
        if dims[i] and dims[j]:
            mats[(i, j)] = field.eye(1)
    return Rep(poset, p, dims, mats, validate=False)


def skyscraper(poset, x, p, dim=1):
    """k^dim at the single element x, zero elsewhere."""
    if not isinstance(x, (int, np.integer)):
        x = poset.idx(x)
    dims = [dim if y == x else 0 for y in range(poset.n)]
    return Rep(poset, p, dims, {}, validate=False)


def rep_direct_sum(reps):
    """Blockwise direct sum. Returns (sum, offsets) with offsets[k][x] the
    starting coordinate of summand k at element x."""
    if not reps:
        raise InputError("empty direct sum needs an explicit poset")
    poset, p = reps[0].poset, reps[0].p
    offsets = []
    dims = [0] * poset.n
    for r in reps:
        offsets.append(tuple(dims))
        dims = [d + rd for d, rd in zip(dims, r.dims)]
    mats = {}
    for (i, j) in poset.covers():
        m = field.zeros(dims[j], dims[i])
        for k, r in enumerate(reps):
            oi, oj = offsets[k][i], offsets[k][j]
            m[oj:oj + r.dims[j], oi:oi + r.dims[i]] = r.mats[(i, j)]
        mats[(i, j)] = m
    return Rep(poset, p, dims, mats, validate=False), offsets


def summand_inclusion(total, summand, offset):
    comps = []
    for x in range(summand.poset.n):
        m = field.zeros(total.dims[x], summand.dims[x])
        o = offset[x]
        m[o:o + summand.dims[x]] = field.eye(summand.dims[x])
        comps.append(m)
    return RepMap(summand, total, comps, validate=False)


def summand_projection(total, summand, offset):
    comps = []
    for x in range(summand.poset.n):
        m = field.zeros(summand.dims[x], total.dims[x])
        o = offset[x]
        m[:, o:o + summand.dims[x]] = field.eye(summand.dims[x])
        comps.append(m)
    return RepMap(total, summand, comps, validate=False)


def hom_space(m, n):
    """Basis of the space of natural transformations m -> n.

    Solves the naturality linear system exactly; deterministic basis order.
    """
    if m.poset != n.poset:
        raise InputError("hom_space needs representations of the same poset")
    poset, p = m.poset, m.p
    offs, total = _unknown_offsets(m, n)
    rows = []
    for (i, j) in poset.covers():
        # n.mats[ij] @ f_i - f_j @ m.mats[ij] = 0, entrywise
        a, b = m.dims[i], n.dims[i]
        c, d = m.dims[j], n.dims[j]
        if d * a == 0:
            continue
        block = field.zeros(d * a, total)
        tm = n.mats[(i, j)]
        sm = m.mats[(i, j)]
        for r in range(d):
            for s in range(a):
                row = block[r * a + s]
                # coefficient of f_i[t, s] is tm[r, t]
                for t in range(b):
                    row[offs[i] + t * a + s] = (row[offs[i] + t * a + s] + tm[r, t]) % p
                # coefficient of f_j[r, u] is -sm[u, s]
                for u in range(c):
                    row[offs[j] + r * c + u] = (row[offs[j] + r * c + u] - sm[u, s]) % p
        rows.append(block)
    sys = np.vstack(rows) if rows else field.zeros(0, total)
    basis = field.kernel_basis(sys, p)
    out = []
    for k in range(basis.shape[1]):
        out.append(_vector_to_repmap(basis[:, k], m, n, offs))
    return out


def _unknown_offsets(m, n):
    offs = []
    total = 0
    for x in range(m.poset.n):
        offs.append(total)
        total += n.dims[x] * m.dims[x]
    return offs, total


def _vector_to_repmap(vec, m, n, offs):
    comps = []
    for x in range(m.poset.n):
        a, b = m.dims[x], n.dims[x]
        comps.append(vec[offs[x]:offs[x] + a * b].reshape(b, a))
    return RepMap(m, n, comps, validate=False)


def repmap_to_vector(f, offs=None):
    if offs is None:
        offs, _ = _unknown_offsets(f.source, f.target)
    return np.concatenate([m.reshape(-1) for m in f.comps]) if f.comps else np.zeros(0, dtype=np.int64)


def rep_kernel(f):
    """(K, incl) with K(x) = ker f(x) and induced structure maps."""
    poset, p = f.source.poset, f.p
    bases = [field.kernel_basis(f.comps[x], p) for x in range(poset.n)]
    dims = [b.shape[1] for b in bases]
    mats = {}
    for (i, j) in poset.covers():
        pushed = field.matmul(f.source.mats[(i, j)], bases[i], p)
        sol = field.solve(bases[j], pushed, p)
        assert sol is not None, "kernel is not preserved by structure maps"
        mats[(i, j)] = sol
    k = Rep(poset, p, dims, mats, validate=False)
    incl = RepMap(k, f.source, bases, validate=False)
    return k, incl


def rep_cokernel(f):
    """(C, proj) with C(x) = coker f(x) and induced structure maps."""
    poset, p = f.target.poset, f.p
    projs = []
    dims = []
    rinvs = []
    for x in range(poset.n):
        im = field.image_basis(f.comps[x], p)
        comp = field.complement_basis(im, p)
        full = np.hstack([im, comp])
        inv = field.solve(full, field.eye(full.shape[0]), p)
        proj = inv[im.shape[1]:, :] if inv is not None else field.zeros(0, 0)
        projs.append(proj)
        dims.append(proj.shape[0])
        rinvs.append(comp)  # right inverse of proj: proj @ comp = I
    mats = {}
    for (i, j) in poset.covers():
        mats[(i, j)] = field.matmul(
            field.matmul(projs[j], f.target.mats[(i, j)], p), rinvs[i], p
        )
    c = Rep(poset, p, dims, mats, validate=False)
    proj = RepMap(f.target, c, projs, validate=False)
    return c, proj


def radical_cogenerators(m):
    """For each element, standard basis vectors spanning m(x) modulo the
    images of all structure maps into x. Returns list of (x, vector)."""
    poset, p = m.poset, m.p
    gens = []
    covers_into = {x: [] for x in range(poset.n)}
    for (i, j) in poset.covers():
        covers_into[j].append(i)
    for x in range(poset.n):
        if m.dims[x] == 0:
            continue
        cols = [m.mats[(y, x)] for y in covers_into[x] if m.dims[y] > 0]
        span = np.hstack(cols) if cols else field.zeros(m.dims[x], 0)
        comp = field.complement_basis(span, p)
        for k in range(comp.shape[1]):
            gens.append((x, comp[:, k]))
    return gens


def projective_cover(m):
    """(Q, cover) with Q a sum of representable projectives surjecting onto m."""
    poset, p = m.poset, m.p
    gens = radical_cogenerators(m)
    summands = [projective(poset, x, p) for x, _ in gens]
    if summands:
        q, _ = rep_direct_sum(summands)
    else:
        q = zero_rep(poset, p)
    comps = []
    for y in range(poset.n):
        cols = [
            field.matmul(m.full_map(x, y), v.reshape(-1, 1), p)
            for (x, v) in gens
            if poset.leq[x, y]
        ]
        comps.append(np.hstack(cols) if cols else field.zeros(m.dims[y], 0))
    cover = RepMap(q, m, comps, validate=False)
    return q, cover


def is_projective(m):
    """True iff m is a finite direct sum of representable projectives."""
    q, cover = projective_cover(m)
    if q.dims != m.dims:
        return False
    return all(field.rank(cover.comps[x], m.p) == m.dims[x] for x in range(m.poset.n))
