"""The six functors attached to one open/closed cut of a poset.

For a cut of the poset into a down-closed part F and its up-closed
complement U, restriction and extension by zero give four exact functors
that commute with everything strictly:

    q   restrict to U          q_L  extend by zero from U
    i_L restrict to F          i    extend by zero from F

The right adjoint of q is the derived direct image ``q_R``: at each element
x it totalizes the nerve of {u in U : x <= u} with coefficients in the
input complex (nondegenerate chains only, face i weighted (-1)^i, the last
face applying the structure map).  The remaining functor is defined by the
fiber formula

    i_R X  =  i_L fib(X -> q_R q X),

so "sections supported on F".  The counit i i_R -> id exists only as a
zig-zag through that fiber; every verification below is arranged to use
strict canonical maps plus that zig-zag.
"""

import random
from dataclasses import dataclass

import numpy as np

from . import field
from .errors import InputError
from .complexes import (
    ChainMap,
    Cx,
    GradedMap,
    chain_map_space,
    cone,
    cx_direct_sum,
    fib,
    fib_compare_cone,
    map_from_cone,
    random_chain_map,
    random_complex,
)
from .rep import Rep, RepMap, zero_rep
from .report import Report


@dataclass
class CorruptionConfig:
    """Deliberate defects, used only by the mutation-sensitivity suite."""

    drop_ir_fiber_sign: bool = False
    swap_ir_il_right_class: bool = False
    omit_cech_face: bool = False

    def any(self):
        return self.drop_ir_fiber_sign or self.swap_ir_il_right_class or self.omit_cech_face


class Cut:
    """An open/closed decomposition of a poset."""

    def __init__(self, poset, open_part):
        self.poset = poset
        open_idx = frozenset(poset._as_indices(open_part))
        if not poset.is_up_closed(open_idx):
            raise InputError("open part of a cut must be up-closed")
        closed_idx = frozenset(range(poset.n)) - open_idx
        self.open_idx = tuple(sorted(open_idx))
        self.closed_idx = tuple(sorted(closed_idx))
        self.U = poset.subposet(self.open_idx)
        self.F = poset.subposet(self.closed_idx)

    def __repr__(self):
        names = self.poset.elements
        return (
            f"Cut(closed={[names[i] for i in self.closed_idx]},"
            f" open={[names[i] for i in self.open_idx]})"
        )


def extend_rep(r, parent, sub):
    """Zero-extension of a representation of a subposet."""
    pidx = sub._parent_indices
    inv = {pe: se for se, pe in enumerate(pidx)}
    dims = [0] * parent.n
    for se, pe in enumerate(pidx):
        dims[pe] = r.dims[se]
    mats = {}
    for (i, j) in parent.covers():
        if i in inv and j in inv:
            mats[(i, j)] = r.full_map(inv[i], inv[j])
    return Rep(parent, r.p, dims, mats, validate=False)


def extend_repmap(f, parent, sub, src_ext=None, tgt_ext=None):
    pidx = sub._parent_indices
    inv = {pe: se for se, pe in enumerate(pidx)}
    if src_ext is None:
        src_ext = extend_rep(f.source, parent, sub)
    if tgt_ext is None:
        tgt_ext = extend_rep(f.target, parent, sub)
    comps = []
    for pe in range(parent.n):
        if pe in inv:
            comps.append(f.comps[inv[pe]])
        else:
            comps.append(field.zeros(0, 0))
    return RepMap(src_ext, tgt_ext, comps, validate=False)


def extend_cx(n_cx, parent, sub):
    terms = {n: extend_rep(t, parent, sub) for n, t in n_cx.terms.items()}
    diffs = {
        n: extend_repmap(d, parent, sub, terms[n], terms[n - 1])
        for n, d in n_cx.diffs.items()
    }
    return Cx(parent, n_cx.p, terms, diffs, validate=False)


def extend_chain_map(f, parent, sub, src_ext=None, tgt_ext=None):
    if src_ext is None:
        src_ext = extend_cx(f.source, parent, sub)
    if tgt_ext is None:
        tgt_ext = extend_cx(f.target, parent, sub)
    comps = {
        n: extend_repmap(g, parent, sub, src_ext.term(n), tgt_ext.term(n))
        for n, g in f.comps.items()
    }
    return ChainMap(src_ext, tgt_ext, comps, validate=False)


@dataclass
class Support:
    """fib(X -> q_R q X) with its strict projection and extension unit."""

    phi: Cx
    pi: ChainMap        # phi -> X, strict
    eta: ChainMap       # phi -> i i_L phi, strict; a quasi-iso
    h0: GradedMap       # bounds (unit) o pi : phi -> q_R q X


class Recollement:
    """The six functors of one cut, all canonical maps, and the axiom suite."""

    def __init__(self, cut, corrupt=None):
        self.cut = cut
        self.poset = cut.poset
        self.corrupt = corrupt or CorruptionConfig()
        self._chain_sets = {}
        self._qr_cache = {}

    # -- the four strict functors ------------------------------------------

    def q(self, x):
        return x.restrict(self.cut.U)

    def q_map(self, f):
        return f.restrict(self.cut.U)

    def i_L(self, x):
        return x.restrict(self.cut.F)

    def i_L_map(self, f):
        return f.restrict(self.cut.F)

    def i(self, n_cx):
        return extend_cx(n_cx, self.poset, self.cut.F)

    def i_map(self, f):
        return extend_chain_map(f, self.poset, self.cut.F)

    def q_L(self, n_cx):
        return extend_cx(n_cx, self.poset, self.cut.U)

    def q_L_map(self, f):
        return extend_chain_map(f, self.poset, self.cut.U)

    # -- nerve totalization: the derived right adjoint of q ----------------

    def _chains_at(self, x):
        """Nondegenerate chains of {u in U : x <= u}, as U-subposet indices,
        ordered by (length, lexicographic)."""
        if x not in self._chain_sets:
            U = self.cut.U
            members = tuple(
                se for se, pe in enumerate(U._parent_indices) if self.poset.leq[x, pe]
            )
            self._chain_sets[x] = U.chains_idx(members)
        return self._chain_sets[x]

    def _tot_layout(self, n_cx, n):
        """Block offsets of (q_R n_cx)(x) in degree n, per parent element."""
        layout = []
        for x in range(self.poset.n):
            blocks = []
            at = 0
            for c in self._chains_at(x):
                d = n_cx.term(n + len(c) - 1).dims[c[-1]]
                blocks.append((c, at, d))
                at += d
            layout.append((blocks, at))
        return layout

    def q_R(self, n_cx):
        """Derived right Kan extension of a complex over U to the poset."""
        hit = self._qr_cache.get(id(n_cx))
        if hit is not None and hit[0] is n_cx:
            return hit[1]
        out = self._q_R_build(n_cx)
        self._qr_cache[id(n_cx)] = (n_cx, out)
        return out

    def _q_R_build(self, n_cx):
        U = self.cut.U
        maxlen = max(
            (len(c) for x in range(self.poset.n) for c in self._chains_at(x)),
            default=1,
        )
        lo = n_cx.lo - maxlen + 1
        hi = n_cx.hi
        if n_cx.is_zero_object():
            return Cx.zero(self.poset, n_cx.p)
        p = n_cx.p
        layouts = {n: self._tot_layout(n_cx, n) for n in range(lo, hi + 1)}
        terms = {}
        for n in range(lo, hi + 1):
            dims = [layouts[n][x][1] for x in range(self.poset.n)]
            mats = {}
            for (i, j) in self.poset.covers():
                bi, di = layouts[n][i]
                bj, dj = layouts[n][j]
                m = field.zeros(dj, di)
                src_at = {c: (at, d) for c, at, d in bi}
                for c, at_j, d in bj:
                    at_i, _ = src_at[c]
                    m[at_j:at_j + d, at_i:at_i + d] = field.eye(d)
                mats[(i, j)] = m
            terms[n] = Rep(self.poset, p, dims, mats, validate=False)
        diffs = {}
        for n in range(lo + 1, hi + 1):
            comps = []
            for x in range(self.poset.n):
                bs, ds = layouts[n][x]
                bt, dt = layouts[n - 1][x]
                m = field.zeros(dt, ds)
                src_at = {c: (at, d) for c, at, d in bs}
                for c, at_t, d in bt:
                    k = len(c) - 1
                    # internal differential, sign (-1)^k
                    if c in src_at:
                        at_s, _ = src_at[c]
                        dn = n_cx.diff(n + k).comps[c[-1]]
                        sign = 1 if k % 2 == 0 else -1
                        m[at_t:at_t + dn.shape[0], at_s:at_s + dn.shape[1]] = (sign * dn) % p
                    # Cech faces into the longer chain c
                    if k >= 1:
                        coeff_rep = n_cx.term(n - 1 + k)
                        for idx in range(k + 1):
                            if idx == 0 and self.corrupt.omit_cech_face:
                                continue
                            face = c[:idx] + c[idx + 1:]
                            if face not in src_at:
                                continue
                            at_s, d_s = src_at[face]
                            if idx < k:
                                blk = field.eye(d_s)
                            else:
                                blk = coeff_rep.full_map(c[-2], c[-1])
                            sign = 1 if idx % 2 == 0 else -1
                            m[at_t:at_t + blk.shape[0], at_s:at_s + blk.shape[1]] = (
                                m[at_t:at_t + blk.shape[0], at_s:at_s + blk.shape[1]]
                                + sign * blk
                            ) % p
                comps.append(m)
            diffs[n] = RepMap(terms[n], terms[n - 1], comps, validate=False)
        out = Cx(self.poset, p, terms, diffs, validate=False)
        if not self.corrupt.any():
            out.validate()
        return out

    def q_R_map(self, f):
        """q_R on chain maps: blockwise on chain coefficients."""
        src = self.q_R(f.source)
        tgt = self.q_R(f.target)
        p = f.p
        comps = {}
        for n in src.terms:
            cs = []
            for x in range(self.poset.n):
                s_blocks = self._tot_layout(f.source, n)[x]
                t_blocks = self._tot_layout(f.target, n)[x]
                m = field.zeros(t_blocks[1], s_blocks[1])
                tgt_at = {c: (at, d) for c, at, d in t_blocks[0]}
                for c, at_s, d_s in s_blocks[0]:
                    at_t, d_t = tgt_at[c]
                    blk = f.comp(n + len(c) - 1).comps[c[-1]]
                    m[at_t:at_t + blk.shape[0], at_s:at_s + blk.shape[1]] = blk
                cs.append(m)
            comps[n] = RepMap(src.term(n), tgt.term(n), cs, validate=False)
        return ChainMap(src, tgt, comps, validate=False)

    def q_R_h(self, h):
        """Transport of a homotopy through q_R: per-chain sign (-1)^k keeps
        boundaries mapping to boundaries."""
        src = self.q_R(h.source)
        tgt = self.q_R(h.target)
        p = h.p
        comps = {}
        for n in src.terms:
            cs = []
            for x in range(self.poset.n):
                s_blocks = self._tot_layout(h.source, n)[x]
                t_blocks = self._tot_layout(h.target, n + 1)[x]
                m = field.zeros(t_blocks[1], s_blocks[1])
                tgt_at = {c: (at, d) for c, at, d in t_blocks[0]}
                for c, at_s, d_s in s_blocks[0]:
                    at_t, d_t = tgt_at[c]
                    k = len(c) - 1
                    blk = h.comp(n + k).comps[c[-1]]
                    sign = 1 if k % 2 == 0 else -1
                    m[at_t:at_t + blk.shape[0], at_s:at_s + blk.shape[1]] = (sign * blk) % p
                cs.append(m)
            comps[n] = RepMap(src.term(n), tgt.term(n + 1), cs, validate=False)
        return GradedMap(src, tgt, comps)

    # -- canonical units and counits ---------------------------------------

    def unit_q_qR(self, n_cx):
        """The unit N -> q q_R N over U; a quasi-isomorphism."""
        tot = self.q_R(n_cx)
        q_tot = self.q(tot)
        U = self.cut.U
        comps = {}
        for n in n_cx.terms:
            cs = []
            for se, pe in enumerate(U._parent_indices):
                blocks, total = self._tot_layout(n_cx, n)[pe]
                m = field.zeros(total, n_cx.term(n).dims[se])
                for c, at, d in blocks:
                    if len(c) == 1:
                        m[at:at + d, :] = n_cx.term(n).full_map(se, c[0])
                cs.append(m)
            comps[n] = RepMap(n_cx.term(n), q_tot.term(n), cs, validate=False)
        return ChainMap(n_cx, q_tot, comps, validate=False)

    def unit_qR(self, x_cx, qx=None, tot=None):
        """The unit X -> q_R q X over the whole poset."""
        if qx is None:
            qx = self.q(x_cx)
        if tot is None:
            tot = self.q_R(qx)
        comps = {}
        for n in x_cx.terms:
            cs = []
            for x in range(self.poset.n):
                blocks, total = self._tot_layout(qx, n)[x]
                m = field.zeros(total, x_cx.term(n).dims[x])
                for c, at, d in blocks:
                    if len(c) == 1:
                        pe = self.cut.U._parent_indices[c[0]]
                        m[at:at + d, :] = x_cx.term(n).full_map(x, pe)
                cs.append(m)
            comps[n] = RepMap(x_cx.term(n), tot.term(n), cs, validate=False)
        out = ChainMap(x_cx, tot, comps, validate=False)
        if not self.corrupt.any():
            out.validate()
        return out

    def unit_iiL(self, x_cx, ext=None):
        """The unit X -> i i_L X (identity over F, zero over U)."""
        if ext is None:
            ext = self.i(self.i_L(x_cx))
        closed = set(self.cut.closed_idx)
        comps = {}
        for n in x_cx.terms:
            cs = []
            for x in range(self.poset.n):
                d = x_cx.term(n).dims[x]
                cs.append(field.eye(d) if x in closed else field.zeros(0, d))
            comps[n] = RepMap(x_cx.term(n), ext.term(n), cs, validate=False)
        return ChainMap(x_cx, ext, comps, validate=False)

    def counit_qqL(self, x_cx, ext=None):
        """The counit q_L q X -> X (identity over U, zero over F)."""
        if ext is None:
            ext = self.q_L(self.q(x_cx))
        opened = set(self.cut.open_idx)
        comps = {}
        for n in x_cx.terms:
            cs = []
            for x in range(self.poset.n):
                d = x_cx.term(n).dims[x]
                cs.append(field.eye(d) if x in opened else field.zeros(d, 0))
            comps[n] = RepMap(ext.term(n), x_cx.term(n), cs, validate=False)
        return ChainMap(ext, x_cx, comps, validate=False)

    # -- sections supported on the closed part ------------------------------

    def supported(self, x_cx):
        """fib(X -> q_R q X) with its strict structure maps."""
        u = self.unit_qR(x_cx)
        phi, pi = fib(u)
        if self.corrupt.drop_ir_fiber_sign:
            phi = _flip_fiber_sign(phi, x_cx, u.target)
            pi = ChainMap(phi, x_cx, pi.comps, validate=False)
        eta = self.unit_iiL(phi)
        h0 = _fib_second_projection(phi, x_cx, u.target)
        return Support(phi=phi, pi=pi, eta=eta, h0=h0)

    def i_R(self, x_cx):
        return self.i_L(self.supported(x_cx).phi)

    def phi_map(self, f, supX=None, supY=None):
        """Functoriality of fib(X -> q_R q X): blockwise (f, q_R q f)."""
        if supX is None:
            supX = self.supported(f.source)
        if supY is None:
            supY = self.supported(f.target)
        g = self.q_R_map(self.q_map(f))
        comps = {}
        for n in supX.phi.terms:
            cs = []
            for x in range(self.poset.n):
                fx = f.comp(n).comps[x]
                gx = g.comp(n + 1).comps[x]
                m = field.zeros(supY.phi.term(n).dims[x], supX.phi.term(n).dims[x])
                m[:fx.shape[0], :fx.shape[1]] = fx
                m[fx.shape[0]:fx.shape[0] + gx.shape[0], fx.shape[1]:fx.shape[1] + gx.shape[1]] = gx
            # noqa: block layout is X_n + (q_R q X)_{n+1}
                cs.append(m)
            comps[n] = RepMap(supX.phi.term(n), supY.phi.term(n), cs, validate=False)
        return ChainMap(supX.phi, supY.phi, comps, validate=False)

    def i_R_map(self, f, supX=None, supY=None):
        return self.i_L_map(self.phi_map(f, supX, supY))

    def phi_h(self, h, supX, supY):
        """Homotopy transport through the supported-sections fiber."""
        qh = GradedMap(
            self.q(h.source),
            self.q(h.target),
            {n: g.restrict(self.cut.U) for n, g in h.comps.items()},
        )
        ghat = self.q_R_h(qh)
        comps = {}
        for n in supX.phi.terms:
            cs = []
            for x in range(self.poset.n):
                hx = h.comp(n).comps[x]
                gx = ghat.comp(n + 1).comps[x]
                m = field.zeros(supY.phi.term(n + 1).dims[x], supX.phi.term(n).dims[x])
                m[:hx.shape[0], :hx.shape[1]] = hx
                m[hx.shape[0]:hx.shape[0] + gx.shape[0], hx.shape[1]:hx.shape[1] + gx.shape[1]] = (-gx) % h.p
                cs.append(m)
            comps[n] = RepMap(supX.phi.term(n), supY.phi.term(n + 1), cs, validate=False)
        return GradedMap(supX.phi, supY.phi, comps)

    def ir_to_il(self, x_cx, sup=None):
        """The canonical map i_R X -> i_L X (restriction of the projection)."""
        if sup is None:
            sup = self.supported(x_cx)
        return self.i_L_map(sup.pi)

    # -- the randomized axiom suite -----------------------------------------

    def check_recollement_axioms(self, samples=100, seed=0, size=None):
        size = size or {}
        rep = Report(
            "check-axioms",
            {"samples": samples, "seed": seed, "char": None},
        )
        names = [
            "adjunction-units-counits",
            "essential-kernel",
            "axiom4-bicartesian-squares",
            "joint-conservativity",
            "ir-il-fiber-sequence",
        ]
        for name in names:
            rep.check(name)
        for k in range(samples):
            s = seed + k
            rng = random.Random(s)
            p = size.get("char", field.DEFAULT_CHAR)
            kw = dict(
                degree_lo=size.get("degree_lo", -1),
                degree_hi=size.get("degree_hi", 1),
                generators=size.get("generators", 2),
                cone_steps=size.get("cone_steps", 1),
            )
            X = random_complex(self.poset, p, rng, **kw)
            N = random_complex(self.cut.F, p, rng, **kw)
            M = random_complex(self.cut.U, p, rng, **kw)
            Y = random_complex(self.poset, p, rng, **kw)
            f = random_chain_map(rng, X, Y)
            rep.check(names[0]).record(s, self._axiom_units(N, M))
            rep.check(names[1]).record(s, self._axiom_essential_kernel(X))
            rep.check(names[2]).record(s, self._axiom_squares(X))
            rep.check(names[3]).record(s, self._axiom_conservativity(f, rng))
            rep.check(names[4]).record(s, self._axiom_fiber_sequence(X))
        return rep

    def _axiom_units(self, N, M):
        try:
            iN = self.i(N)
            if self.i_L(iN) != N:
                return False
            if not self.q(iN).trim().is_zero_object():
                return False
            if self.i_R(iN) != N:
                return False
            if self.q(self.q_L(M)) != M:
                return False
            if not self.i_L(self.q_L(M)).trim().is_zero_object():
                return False
            if not self.unit_q_qR(M).is_qiso():
                return False
            return True
        except InputError:
            return False

    def _axiom_essential_kernel(self, X):
        sup = self.supported(X)
        if not self.q(sup.phi).is_acyclic():
            return False
        return sup.eta.is_qiso()

    def _axiom_squares(self, X):
        # left square: cone(q_L q X -> X) compared with i i_L X
        eps = self.counit_qqL(X)
        c_eps, _, _ = cone(eps)
        unit = self.unit_iiL(X)
        cmp1 = map_from_cone(eps, c_eps, unit, GradedMap.zero(eps.source, unit.target))
        if not cmp1.is_qiso():
            return False
        # right square: phi ~ i i_R X and cone(phi -> X) ~ q_R q X
        sup = self.supported(X)
        if not sup.eta.is_qiso():
            return False
        u = self.unit_qR(X)
        c_pi, _, _ = cone(sup.pi)
        cmp2 = fib_compare_cone(u, sup.phi, c_pi)
        return cmp2.is_qiso()

    def _axiom_conservativity(self, f, rng):
        variants = [f]
        # an inclusion into X + acyclic: a quasi-iso that is not an identity
        A = f.source
        acyc, _, _ = cone(ChainMap.identity(f.target))
        tot, incls, _ = cx_direct_sum([A, acyc])
        variants.append(incls[0])
        variants.append(self.counit_qqL(A))
        for g in variants:
            whole = g.is_qiso()
            via_l = self.q_map(g).is_qiso() and self.i_L_map(g).is_qiso()
            via_r = self.q_map(g).is_qiso() and self.i_R_map(g).is_qiso()
            if not (whole == via_l == via_r):
                return False
        return True

    def _axiom_fiber_sequence(self, X):
        sup = self.supported(X)
        nu = self.ir_to_il(X, sup)
        eps = self.counit_qqL(X)
        alpha = self.i_R_map(eps, self.supported(eps.source), sup)
        comp = nu.compose(alpha)
        if not comp.is_zero():
            return False
        c_alpha, _, _ = cone(alpha)
        cmp1 = map_from_cone(alpha, c_alpha, nu, GradedMap.zero(alpha.source, nu.target))
        if not cmp1.is_qiso():
            return False
        u = self.unit_qR(X)
        g = self.i_L_map(u)
        h = GradedMap(
            self.i_L(sup.phi),
            self.i_L(u.target),
            {n: m.restrict(self.cut.F) for n, m in sup.h0.comps.items()},
        )
        c_nu, _, _ = cone(nu)
        cmp2 = map_from_cone(nu, c_nu, g, h)
        return cmp2.is_qiso()


def _fib_second_projection(phi, x_cx, g_cx):
    """The homotopy phi -> q_R q X bounding (unit) o pi: project block two."""
    comps = {}
    for n in phi.terms:
        cs = []
        for x in range(phi.poset.n):
            xd = x_cx.term(n).dims[x]
            gd = g_cx.term(n + 1).dims[x]
            m = field.zeros(gd, phi.term(n).dims[x])
            m[:, xd:xd + gd] = field.eye(gd)
            cs.append(m)
        comps[n] = RepMap(phi.term(n), g_cx.term(n + 1), cs, validate=False)
    return GradedMap(phi, g_cx, comps)


def _flip_fiber_sign(phi, x_cx, g_cx):
    """Mutation hook: drop the sign on the coinduced block of the fiber
    differential. The result is not a complex; validation is skipped."""
    terms = dict(phi.terms)
    diffs = {}
    for n, d in phi.diffs.items():
        comps = []
        for x in range(phi.poset.n):
            m = d.comps[x].copy()
            xd_t = x_cx.term(n - 1).dims[x]
            xd_s = x_cx.term(n).dims[x]
            m[xd_t:, xd_s:] = (-m[xd_t:, xd_s:]) % phi.p
            comps.append(m)
        diffs[n] = RepMap(terms[n], terms[n - 1], comps, validate=False)
    return Cx(phi.poset, phi.p, terms, diffs, validate=False)
