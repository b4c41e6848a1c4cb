"""Finite posets, stratifications by down-closed subsets, and chain data.

Open subsets of the associated finite topological space are the up-closed
subsets, so sheaves on the space are plain functors out of the poset.
Elements are identifier strings; most internal code works with element
indices into ``Poset.elements``.
"""

import itertools

import numpy as np

from .errors import InputError


class Poset:
    """Immutable finite partial order.

    leq is an n x n boolean matrix, leq[i, j] iff element i <= element j.
    Use :func:`build_poset` to construct one from cover relations.
    """

    def __init__(self, elements, leq):
        self.elements = tuple(elements)
        self.index = {e: i for i, e in enumerate(self.elements)}
        if len(self.index) != len(self.elements):
            raise InputError("duplicate element identifier")
        self.leq = np.asarray(leq, dtype=bool)
        self.leq.setflags(write=False)
        n = len(self.elements)
        if self.leq.shape != (n, n):
            raise InputError("leq matrix shape mismatch")
        self._covers = None
        self._subposets = {}
        self._chain_cache = {}

    @property
    def n(self):
        return len(self.elements)

    def idx(self, e):
        try:
            return self.index[e]
        except KeyError:
            raise InputError(f"unknown element {e!r}") from None

    def leq_idx(self, i, j):
        return bool(self.leq[i, j])

    def covers(self):
        """Cover relations (i, j): i < j with nothing strictly between."""
        if self._covers is None:
            lt = self.leq & ~np.eye(self.n, dtype=bool)
            between = lt @ lt
            self._covers = [
                (int(i), int(j)) for i, j in np.argwhere(lt & ~between)
            ]
            self._covers.sort()
        return self._covers

    def up_set_idx(self, i):
        return [j for j in range(self.n) if self.leq[i, j]]

    def below_idx(self, j):
        return [i for i in range(self.n) if self.leq[i, j]]

    def _as_indices(self, subset):
        out = []
        for e in subset:
            out.append(self.idx(e) if not isinstance(e, (int, np.integer)) else int(e))
        return sorted(set(out))

    def is_down_closed(self, subset):
        s = set(self._as_indices(subset))
        return all(i in s for j in s for i in range(self.n) if self.leq[i, j])

    def is_up_closed(self, subset):
        s = set(self._as_indices(subset))
        return all(j in s for i in s for j in range(self.n) if self.leq[i, j])

    def subposet(self, subset):
        """Restriction to a subset of elements (identifiers or indices)."""
        idxs = tuple(self._as_indices(subset))
        if idxs not in self._subposets:
            sub = Poset(
                [self.elements[i] for i in idxs],
                self.leq[np.ix_(idxs, idxs)],
            )
            sub._parent_indices = idxs
            self._subposets[idxs] = sub
        return self._subposets[idxs]

    def chains_idx(self, subset_idxs):
        """All nonempty strictly increasing chains inside the given index set.

        Deterministic order: by length, then lexicographically by indices.
        """
        key = tuple(sorted(set(subset_idxs)))
        if key not in self._chain_cache:
            found = []

            def extend(chain):
                found.append(tuple(chain))
                last = chain[-1]
                for j in key:
                    if j != last and self.leq[last, j]:
                        chain.append(j)
                        extend(chain)
                        chain.pop()

            for i in key:
                extend([i])
            found.sort(key=lambda c: (len(c), c))
            self._chain_cache[key] = found
        return self._chain_cache[key]

    def __eq__(self, other):
        return (
            isinstance(other, Poset)
            and self.elements == other.elements
            and bool(np.array_equal(self.leq, other.leq))
        )

    def __hash__(self):
        return hash(self.elements)

    def __repr__(self):
        return f"Poset({list(self.elements)!r}, covers={self.covers()!r})"


def build_poset(elements, cover_relations):
    """Build a poset from cover pairs, computing the reflexive-transitive
    closure and rejecting cycles."""
    elements = list(elements)
    if len(set(elements)) != len(elements):
        raise InputError("duplicate element identifier")
    index = {e: i for i, e in enumerate(elements)}
    n = len(elements)
    rel = np.eye(n, dtype=bool)
    for a, b in cover_relations:
        if a not in index or b not in index:
            raise InputError(f"relation mentions unknown element {a!r} or {b!r}")
        rel[index[a], index[b]] = True
    # transitive closure by saturation
    while True:
        nxt = rel | (rel @ rel)
        if np.array_equal(nxt, rel):
            break
        rel = nxt
    cyc = rel & rel.T & ~np.eye(n, dtype=bool)
    if cyc.any():
        i, j = map(int, np.argwhere(cyc)[0])
        raise InputError(f"relations induce a cycle through {elements[i]!r} and {elements[j]!r}")
    return Poset(elements, rel)


def chains(poset, subset):
    """All nonempty strictly increasing chains in subset, as identifier tuples."""
    idxs = poset._as_indices(subset)
    return [tuple(poset.elements[i] for i in c) for c in poset.chains_idx(idxs)]


class Stratification:
    """A chain of down-closed subsets U_0 c U_1 c ... c U_n = all elements.

    Pure strata are the successive differences E_k = U_k - U_{k-1}.
    """

    def __init__(self, poset, closed_chain):
        self.poset = poset
        chain = [frozenset(poset._as_indices(u)) for u in closed_chain]
        if not chain:
            raise InputError("stratification needs at least one closed subset")
        prev = frozenset()
        for k, u in enumerate(chain):
            if not poset.is_down_closed(u):
                names = sorted(poset.elements[i] for i in u)
                raise InputError(f"stratum chain member {k} {names} is not down-closed")
            if not prev < u:
                raise InputError(f"stratum chain not strictly increasing at member {k}")
            prev = u
        if chain[-1] != frozenset(range(poset.n)):
            raise InputError("last member of the stratum chain must be the whole poset")
        self.closed_chain = tuple(chain)

    @property
    def n_strata(self):
        return len(self.closed_chain)

    def stratum_idx(self, k):
        lower = self.closed_chain[k - 1] if k > 0 else frozenset()
        return tuple(sorted(self.closed_chain[k] - lower))

    def strata(self):
        return [self.stratum_idx(k) for k in range(self.n_strata)]

    def interval_idx(self, i, j):
        """Indices of S_[i,j] = U_j - U_{i-1} (a locally closed subset)."""
        if not 0 <= i <= j < self.n_strata:
            raise InputError(f"bad stratum interval [{i},{j}]")
        lower = self.closed_chain[i - 1] if i > 0 else frozenset()
        return tuple(sorted(self.closed_chain[j] - lower))

    def interval_poset(self, i, j):
        return self.poset.subposet(self.interval_idx(i, j))


def validate_stratification(poset, closed_chain):
    return Stratification(poset, closed_chain)


def random_poset(rng, size, density=0.35, prefix="e"):
    """Random poset on `size` elements, deterministic in the rng state.

    Cover edges are sampled only from lower to higher label, so no cycles.
    """
    elements = [f"{prefix}{k}" for k in range(size)]
    covers = []
    for i, j in itertools.combinations(range(size), 2):
        if rng.random() < density:
            covers.append((elements[i], elements[j]))
    return build_poset(elements, covers)


def random_stratification(rng, poset, parts):
    """Split a poset into `parts` nonempty down-closed steps, rng-deterministic."""
    remaining = set(range(poset.n))
    order = sorted(remaining, key=lambda i: (int(np.sum(poset.leq[:, i])), i))
    groups = [[] for _ in range(parts)]
    # deal minimal-first into groups, keeping each prefix down-closed
    taken = set()
    g = 0
    for i in order:
        groups[min(g, parts - 1)].append(i)
        taken.add(i)
        if len(groups[min(g, parts - 1)]) >= max(1, poset.n // parts) and g < parts - 1:
            g += 1
    chain = []
    acc = set()
    for grp in groups:
        acc |= set(grp)
        chain.append(sorted(acc))
    if len(chain[-1]) != poset.n:
        chain[-1] = list(range(poset.n))
    # drop empty steps (possible when parts > n)
    chain = [c for k, c in enumerate(chain) if k == 0 or len(c) > len(chain[k - 1])]
    return Stratification(poset, chain)


# ---------------------------------------------------------------------------
# poset file format: elem/rel/strat lines, '#' comments, 'end' terminator

def parse_poset_file(text, name="poset"):
    """Parse the line-oriented poset format.

    Returns (Poset, Stratification or None).  Raises InputError with the
    offending line number on malformed input.
    """
    elements = []
    covers = []
    strata = []
    ended = False
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ended:
            raise InputError(f"{name}:{ln}: content after 'end'")
        parts = line.split()
        kind = parts[0]
        if kind == "elem":
            if len(parts) != 2:
                raise InputError(f"{name}:{ln}: 'elem' takes one identifier")
            elements.append(parts[1])
        elif kind == "rel":
            if len(parts) != 3:
                raise InputError(f"{name}:{ln}: 'rel' takes two identifiers")
            covers.append((parts[1], parts[2]))
        elif kind == "strat":
            if len(parts) < 2:
                raise InputError(f"{name}:{ln}: 'strat' needs at least one element")
            strata.append((ln, parts[1:]))
        elif kind == "end":
            ended = True
        else:
            raise InputError(f"{name}:{ln}: unknown directive {kind!r}")
    if not ended:
        raise InputError(f"{name}: missing 'end' terminator")
    try:
        poset = build_poset(elements, covers)
    except InputError as exc:
        raise InputError(f"{name}: {exc}") from None
    strat = None
    if strata:
        try:
            strat = Stratification(poset, [ids for _, ids in strata])
        except InputError as exc:
            raise InputError(f"{name}:{strata[0][0]}: {exc}") from None
    return poset, strat


def load_poset_file(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    import os
    name = os.path.splitext(os.path.basename(path))[0]
    poset, strat = parse_poset_file(text, name=name)
    return poset, strat, name


def sierpinski():
    """The two-point poset c < o: closed point c, open point o."""
    return build_poset(["c", "o"], [("c", "o")])
