"""Perversity data: integer shifts per stratum, perverse objects, and the
shift equivariance of the gluing operation."""

import random

from .errors import InputError
from .complexes import lift_compare, random_complex, random_chain_map
from .gluing import GluedProvider, StandardProvider, arrow_in_E_routes, arrow_in_M_routes
from .intervals import iterated_glue, left_comb
from .report import Report


class Perversity:
    """An integer per stratum index; no constraints on the values."""

    def __init__(self, values):
        self.values = tuple(int(v) for v in values)

    def __getitem__(self, k):
        return self.values[k]

    def __len__(self):
        return len(self.values)

    def shifted(self, m):
        return Perversity(v + m for v in self.values)

    @staticmethod
    def parse(text, n_strata):
        try:
            vals = [int(t) for t in text.split(",")]
        except ValueError:
            raise InputError(f"bad perversity {text!r}") from None
        if len(vals) != n_strata:
            raise InputError(
                f"perversity has {len(vals)} entries, stratification has {n_strata} strata"
            )
        return Perversity(vals)

    def __repr__(self):
        return f"Perversity{self.values}"


def perverted_provider(poset, p, k):
    """The standard homology t-structure shifted by k."""
    return StandardProvider(poset, p, cut_degree=k)


def glued_perverted_provider(diagram, perversity, tree=None):
    if tree is None:
        tree = left_comb(diagram.n)
    return iterated_glue(diagram, list(perversity.values), tree)


def is_perverse(diagram, perversity, x_cx, tree=None):
    """Heart membership: X in D_{>=0} and X[-1] in D_{<0} under the glued
    perverted t-structure."""
    prov = glued_perverted_provider(diagram, perversity, tree)
    return prov.is_ge0(x_cx) and prov.is_lt0(x_cx.shift(-1))


def heart_oracle(recol, p0, p1, x_cx):
    """Direct homology-degree evaluation of the four membership predicates
    for one cut: independent of the provider machinery."""
    qx = recol.q(x_cx)
    ilx = recol.i_L(x_cx)
    irx = recol.i_R(x_cx)

    def vanish_below(z, k):
        return all(all(d == 0 for d in z.h_dim(n)) for n in range(z.lo, min(z.hi, k - 1) + 1))

    def vanish_from(z, k):
        return all(all(d == 0 for d in z.h_dim(n)) for n in range(max(z.lo, k), z.hi + 1))

    ge0 = vanish_below(qx, p1) and vanish_below(ilx, p0)
    # X[-1] in D_<0 means homology of q X / i_R X vanishes at degrees >= p+1
    qs = recol.q(x_cx)
    lt1 = vanish_from(qs, p1 + 1) and vanish_from(irx, p0 + 1)
    return ge0 and lt1


def shift_equivariance_check(make_glued, samples=50, seed=0, p_range=(-2, 2), size=None):
    """The gluing commutes with the integer shift action.

    make_glued(p0, p1) must return a GluedProvider over a fixed recollement.
    Checks, for seeded arrows f and objects X:
      * arrow class under p+1 of f equals arrow class under p of f[-1];
      * the coreflection under p+1 of X[1] is quasi-isomorphic to the
        shift of the coreflection under p of X (lifted comparison);
      * membership under (p + m, X[m]) is independent of m.
    """
    size = size or {}
    from . import field as _field
    p_char = size.get("char", _field.DEFAULT_CHAR)
    rep = Report("equivariance", {"samples": samples, "seed": seed,
                                  "p_range": f"{p_range[0]}..{p_range[1]}"})
    arrows = rep.check("arrow classes shift with the perversity")
    trunc = rep.check("coreflection shifts with the perversity")
    memb = rep.check("membership invariant under diagonal shift")
    probe = make_glued(0, 0)
    poset = probe.recol.poset
    kw = dict(
        degree_lo=size.get("degree_lo", -1),
        degree_hi=size.get("degree_hi", 1),
        generators=size.get("generators", 1),
        cone_steps=size.get("cone_steps", 1),
    )
    lo, hi = p_range
    for k in range(samples):
        s = seed + k
        rng = random.Random(s)
        p0 = rng.randint(lo, hi)
        p1 = rng.randint(lo, hi)
        X = random_complex(poset, p_char, rng, **kw)
        Y = random_complex(poset, p_char, rng, **kw)
        f = random_chain_map(rng, X, Y)
        g_here = make_glued(p0, p1)
        g_up = make_glued(p0 + 1, p1 + 1)

        e_up = arrow_in_E_routes(g_up, f)
        e_here = arrow_in_E_routes(g_here, f.shift(-1))
        m_up = arrow_in_M_routes(g_up, f)
        m_here = arrow_in_M_routes(g_here, f.shift(-1))
        arrows.record(s, e_up[0] == e_here[0] and m_up[0] == m_here[0])

        t_up = g_up.truncation(X.shift(1))
        t_here = g_here.truncation(X)
        shifted = t_here.eps.shift(1)
        same_h = all(
            t_up.S.h_dim(n) == shifted.source.h_dim(n)
            for n in range(
                min(t_up.S.lo, shifted.source.lo),
                max(t_up.S.hi, shifted.source.hi) + 1,
            )
        )
        res = lift_compare(t_up.eps, shifted)
        trunc.record(s, same_h and res is not None and res[0].is_qiso())

        base = (make_glued(p0, p1).is_ge0(X), make_glued(p0, p1).is_lt0(X))
        ok = True
        for m in range(lo, hi + 1):
            gm = make_glued(p0 + m, p1 + m)
            if (gm.is_ge0(X.shift(m)), gm.is_lt0(X.shift(m))) != base:
                ok = False
                break
        memb.record(s, ok)
    return rep


def constant_perversity_check(make_glued, samples=50, seed=0, k_range=(-2, 2), size=None):
    """Constant perversity k is the k-shift of the glued t-structure:
    membership under constant p = k on X equals membership under p = 0 on
    X[-k]."""
    size = size or {}
    from . import field as _field
    p_char = size.get("char", _field.DEFAULT_CHAR)
    rep = Report("constant-perversity", {"samples": samples, "seed": seed})
    chk = rep.check("constant perversity equals shift")
    probe = make_glued(0, 0)
    poset = probe.recol.poset
    kw = dict(
        degree_lo=size.get("degree_lo", -1),
        degree_hi=size.get("degree_hi", 1),
        generators=size.get("generators", 1),
        cone_steps=size.get("cone_steps", 1),
    )
    base = make_glued(0, 0)
    for i in range(samples):
        s = seed + i
        rng = random.Random(s)
        k = rng.randint(*k_range)
        X = random_complex(poset, p_char, rng, **kw)
        gk = make_glued(k, k)
        ok = (
            gk.is_ge0(X) == base.is_ge0(X.shift(-k))
            and gk.is_lt0(X) == base.is_lt0(X.shift(-k))
        )
        chk.record(s, ok)
    return rep
