"""Iterated gluing over a stratification.

A stratification with strata E_0 .. E_n induces, for every interval [i, j],
the locally closed subposet S_[i,j] = U_j - U_{i-1}, and for every split a
recollement of complexes over S_[i,j] with closed part S_[i,k] and open
part S_[k+1,j].  Gluing stratum t-structures along any parenthesization of
the strata then lands on the root; the associativity checks verify that
the outcome does not depend on the parenthesization, and the Beck-Chevalley
checks verify the square identities that drive that independence.
"""

import random
from dataclasses import dataclass

from .errors import InputError
from .complexes import Cx, random_complex
from .gluing import GluedProvider, StandardProvider, compare_ladder_sides
from .recollement import Cut, CorruptionConfig, Recollement
from .report import Report


class IntervalDiagram:
    """All interval subposets and contiguous-pair recollements of a
    stratification."""

    def __init__(self, strat, p, corrupt=None):
        if strat.n_strata < 2:
            raise InputError("need at least two strata to glue")
        self.strat = strat
        self.p = p
        self.n = strat.n_strata - 1
        self.corrupt = corrupt or CorruptionConfig()
        self._edges = {}
        self._providers = {}

    def node_poset(self, i, j):
        return self.strat.interval_poset(i, j)

    def intervals(self):
        return [
            (i, j) for length in range(self.n + 1)
            for i in range(self.n + 1 - length)
            for j in [i + length]
        ]

    def glueable_intervals(self):
        return [(i, j) for (i, j) in self.intervals() if i < j]

    def edge(self, i, k, j):
        """The recollement over S_[i,j] with closed S_[i,k], open S_[k+1,j]."""
        if not (0 <= i <= k < j <= self.n):
            raise InputError(f"bad interval split [{i},{k}|{k+1},{j}]")
        key = (i, k, j)
        if key not in self._edges:
            node = self.node_poset(i, j)
            open_ids = [
                self.strat.poset.elements[e] for e in self.strat.interval_idx(k + 1, j)
            ]
            self._edges[key] = Recollement(Cut(node, open_ids), corrupt=self.corrupt)
        return self._edges[key]

    def contiguous_pairs(self):
        return [
            (i, k, j)
            for (i, j) in self.glueable_intervals()
            for k in range(i, j)
        ]

    def squares(self):
        return [
            BCSquare(self, i, j)
            for i in range(self.n)
            for j in range(i + 1, self.n)
        ]

    # -- providers ----------------------------------------------------------

    def leaf_provider(self, i, shift=0):
        return StandardProvider(self.node_poset(i, i), self.p, shift)

    def provider(self, tree, perversity):
        """The glued provider for one parenthesization tree."""
        key = (tree, tuple(perversity))
        if key not in self._providers:
            self._providers[key] = self._build_provider(tree, perversity)
        return self._providers[key]

    def _build_provider(self, tree, perversity):
        if isinstance(tree, int):
            return self.leaf_provider(tree, perversity[tree])
        left, right = tree
        li, lj = tree_span(left)
        ri, rj = tree_span(right)
        if lj + 1 != ri:
            raise InputError(f"parenthesization splits non-contiguously: {tree}")
        rec = self.edge(li, lj, rj)
        return GluedProvider(
            rec,
            self._build_provider(left, perversity),
            self._build_provider(right, perversity),
        )


def tree_span(tree):
    if isinstance(tree, int):
        return tree, tree
    li, _ = tree_span(tree[0])
    _, rj = tree_span(tree[1])
    return li, rj


def tree_leaves(tree):
    if isinstance(tree, int):
        return [tree]
    return tree_leaves(tree[0]) + tree_leaves(tree[1])


def validate_tree(tree, n):
    leaves = tree_leaves(tree)
    if leaves != list(range(n + 1)):
        raise InputError(f"parenthesization leaves {leaves} do not match 0..{n}")
    return tree


def all_parenthesizations(lo, hi):
    if lo == hi:
        return [lo]
    out = []
    for k in range(lo, hi):
        for left in all_parenthesizations(lo, k):
            for right in all_parenthesizations(k + 1, hi):
                out.append((left, right))
    return out


def left_comb(n):
    tree = 0
    for i in range(1, n + 1):
        tree = (tree, i)
    return tree


def right_comb(n):
    tree = n
    for i in range(n - 1, -1, -1):
        tree = (i, tree)
    return tree


def parse_tree(text, n):
    """Parenthesization selector: 'left', 'right', or nested parens like
    ((0 1) 2)."""
    text = text.strip()
    if text == "left":
        return left_comb(n)
    if text == "right":
        return right_comb(n)
    tokens = text.replace("(", " ( ").replace(")", " ) ").split()
    pos = 0

    def parse():
        nonlocal pos
        if pos >= len(tokens):
            raise InputError("unbalanced parenthesization expression")
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            left = parse()
            right = parse()
            if pos >= len(tokens) or tokens[pos] != ")":
                raise InputError("unbalanced parenthesization expression")
            pos += 1
            return (left, right)
        if tok == ")":
            raise InputError("unbalanced parenthesization expression")
        return int(tok)

    tree = parse()
    if pos != len(tokens):
        raise InputError("trailing tokens in parenthesization expression")
    return validate_tree(tree, n)


def iterated_glue(diagram, perversity, tree):
    """Glue the shifted stratum t-structures along a parenthesization."""
    perversity = list(perversity)
    if len(perversity) != diagram.n + 1:
        raise InputError(
            f"perversity length {len(perversity)} != stratum count {diagram.n + 1}"
        )
    validate_tree(tree, diagram.n)
    return diagram.provider(tree, perversity)


# ---------------------------------------------------------------------------
# Beck-Chevalley cells

@dataclass
class BCSquare:
    """The square of nodes [i,j], [i,j+1], [i+1,j], [i+1,j+1].

    a : zero-extension [i,j] -> [i,j+1]        (closed inclusion)
    u : restriction [i,j+1] -> [i+1,j+1]       (open restriction)
    g : restriction [i,j] -> [i+1,j]
    h : zero-extension [i+1,j] -> [i+1,j+1]
    """

    diagram: IntervalDiagram
    i: int
    j: int

    @property
    def name(self):
        return f"square[{self.i},{self.j}]"

    def _nodes(self):
        d = self.diagram
        return (
            d.node_poset(self.i, self.j),
            d.node_poset(self.i, self.j + 1),
            d.node_poset(self.i + 1, self.j),
            d.node_poset(self.i + 1, self.j + 1),
        )

    def left_cell(self, m_cx):
        """theta-hat at a(M): both composites restrict to the lower-left
        node; returns (strictly_equal, quasi_iso)."""
        A, B, C, D = self._nodes()
        rec_b = self.diagram.edge(self.i, self.j, self.j + 1)
        aM = rec_b.i(m_cx)
        lhs = _restrict_to(_restrict_to(aM, D), C)   # h_L (u (a M))
        rhs = _restrict_to(m_cx, C)                  # g (a_L (a M)) = g M
        eq = lhs == rhs
        return eq, eq or _same_h(lhs, rhs)

    def right_cell(self, x_cx):
        """theta-tilde as a zig-zag of strict maps at an object of the upper
        right node; returns (endpoint_equal, both_legs_qiso)."""
        A, B, C, D = self._nodes()
        rec_b = self.diagram.edge(self.i, self.j, self.j + 1)
        rec_d = self.diagram.edge(self.i + 1, self.j, self.j + 1)
        sup = rec_b.supported(x_cx)
        leg1 = rec_d.i_R_map(_restrict_map_to(sup.eta, D))
        leg2 = rec_d.i_R_map(_restrict_map_to(sup.pi, D))
        g_aR = _restrict_to(rec_b.i_L(sup.phi), C)
        endpoint = leg1.target == g_aR
        return endpoint, leg1.is_qiso() and leg2.is_qiso()


def _restrict_to(x_cx, node):
    """Restrict along the subposet of x's own poset with node's elements."""
    return x_cx.restrict(x_cx.poset.subposet(node.elements))


def _restrict_map_to(f, node):
    return f.restrict(f.source.poset.subposet(node.elements))


def _same_h(a, b):
    lo = min(a.lo, b.lo)
    hi = max(a.hi, b.hi)
    return all(a.h_dim(n) == b.h_dim(n) for n in range(lo, hi + 1))


def bc_check(square, samples=50, seed=0, size=None):
    """Randomized verification of both cells of one square."""
    size = size or {}
    d = square.diagram
    rep = Report("bc", {"square": square.name, "samples": samples, "seed": seed})
    left = rep.check(f"{square.name} left cell strict")
    right = rep.check(f"{square.name} right cell qiso")
    kw = dict(
        degree_lo=size.get("degree_lo", -1),
        degree_hi=size.get("degree_hi", 1),
        generators=size.get("generators", 2),
        cone_steps=size.get("cone_steps", 1),
    )
    A = d.node_poset(square.i, square.j)
    rec_b = d.edge(square.i, square.j, square.j + 1)
    for k in range(samples):
        s = seed + k
        rng = random.Random(s)
        M = random_complex(A, d.p, rng, **kw)
        eq, _ = square.left_cell(M)
        left.record(s, eq)
        endpoint, qiso = square.right_cell(rec_b.i(M))
        right.record(s, endpoint and qiso)
    return rep


# ---------------------------------------------------------------------------
# winged path independence

def winged_paths(diagram, leaf):
    """All descent paths root -> leaf in the interval diagram; a path is a
    list of steps ('closed'|'open', i, j) naming the interval left."""
    n = diagram.n
    paths = []

    def walk(i, j, acc):
        if (i, j) == (leaf, leaf):
            paths.append(list(acc))
            return
        if j > leaf:
            acc.append(("closed", i, j))
            walk(i, j - 1, acc)
            acc.pop()
        if i < leaf:
            acc.append(("open", i, j))
            walk(i + 1, j, acc)
            acc.pop()

    walk(0, n, [])
    return paths


def apply_winged_path(diagram, path, x_cx, side):
    """Fold a path's functors over an object of the root category."""
    out = x_cx
    for (kind, i, j) in path:
        if kind == "closed":
            rec = diagram.edge(i, j - 1, j)
            out = rec.i_L(out) if side == "left" else rec.i_R(out)
        else:
            out = _restrict_to(out, diagram.node_poset(i + 1, j))
    return out


# ---------------------------------------------------------------------------
# associativity of iterated gluing

def assoc_check(diagram, perversity, samples=50, seed=0, pairs="all", size=None):
    """Parenthesization independence of the glued t-structure.

    Per sample: membership verdicts agree across parenthesizations; the
    coreflections agree up to quasi-isomorphism (via the coreflection
    functoriality zig-zag); winged path independence at every leaf.
    """
    size = size or {}
    n = diagram.n
    if pairs == "all" and n <= 3:
        trees = all_parenthesizations(0, n)
    else:
        trees = [left_comb(n), right_comb(n)]
        if isinstance(pairs, (list, tuple)):
            trees = list(pairs)
    providers = [iterated_glue(diagram, perversity, t) for t in trees]
    rep = Report(
        "assoc",
        {
            "samples": samples,
            "seed": seed,
            "perversity": ",".join(str(v) for v in perversity),
            "parenthesizations": len(trees),
        },
    )
    memb = rep.check("membership agreement")
    trunc = rep.check("truncation agreement")
    wing_l = rep.check("left-winged path independence")
    wing_r = rep.check("right-winged path independence")
    kw = dict(
        degree_lo=size.get("degree_lo", -1),
        degree_hi=size.get("degree_hi", 0),
        generators=size.get("generators", 1),
        cone_steps=size.get("cone_steps", 1),
    )
    root = diagram.node_poset(0, n)
    for k in range(samples):
        s = seed + k
        rng = random.Random(s)
        X = random_complex(root, diagram.p, rng, **kw)
        verdicts = [(t.is_ge0(X), t.is_lt0(X)) for t in providers]
        memb.record(s, all(v == verdicts[0] for v in verdicts))
        trunc.record(s, _truncation_agreement(providers, X))
        wing_l.record(s, _left_wing_ok(diagram, X))
        wing_r.record(s, _right_wing_ok(diagram, X))
    return rep


def _truncation_agreement(providers, x_cx):
    base = providers[0].truncation(x_cx)
    for other in providers[1:]:
        t = other.truncation(x_cx)
        if not _same_h(base.S, t.S) or not _same_h(base.R, t.R):
            return False
        # zig-zag: other's coreflection of base.S maps quasi-isomorphically
        # both onto base.S (counit; membership) and into other's S (S(s)).
        ts = other.truncation(base.S)
        if not ts.eps.is_qiso():
            return False
        pair = other.truncation_map(base.eps, ts, t)
        if not pair.S_f.is_qiso():
            return False
    return True


def _left_wing_ok(diagram, x_cx):
    for leaf in range(diagram.n + 1):
        outs = [
            apply_winged_path(diagram, path, x_cx, "left")
            for path in winged_paths(diagram, leaf)
        ]
        if any(o != outs[0] for o in outs[1:]):
            return False
    return True


def _right_wing_ok(diagram, x_cx):
    for leaf in range(diagram.n + 1):
        outs = [
            apply_winged_path(diagram, path, x_cx, "right")
            for path in winged_paths(diagram, leaf)
        ]
        if any(not _same_h(o, outs[0]) for o in outs[1:]):
            return False
    # elementary comparison cells at the root-level squares
    for sq in diagram.squares():
        if (sq.i, sq.j) != (0, diagram.n - 1):
            continue
        endpoint, qiso = sq.right_cell(x_cx)
        if not (endpoint and qiso):
            return False
    return True


def build_interval_diagram(strat, p, corrupt=None):
    return IntervalDiagram(strat, p, corrupt=corrupt)
