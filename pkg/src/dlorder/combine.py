"""Combining body types through a rule into minimal head types.

Given one complete type per body IDB atom, a rule application constrains any
derived full tuple by: the EDB order atoms, every atom of every body type
pushed through its argument substitution, and the implicit facts that all
elements lie between the two boundaries. All of these are difference
constraints on element "potentials" (prefix distances), so the feasible
region projects exactly onto any subset of positions via longest paths.

Two entry points:

* :func:`combine` follows the candidate-order formulation: the caller fixes a
  weak order over all rule variables, and the minimal head gap vectors for
  that arrangement come back.
* :func:`combine_all` is what saturation uses: it leaves the arrangement free,
  enumerating only the weak orders of the *head* variables and reading
  everything else off the constraint graph.

Both return every Pareto-minimal head type with one witness assignment.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .errors import ProgramError
from .program import Constant, IdbAtom, IntervalAtom, OrderAtom, Rule
from .typesys import MINUS_INF, PLUS_INF, CompleteType, weak_orders

_NEG = float("-inf")


@dataclass(frozen=True)
class Witness:
    """One full gap assignment realizing a head type: an ordered partition
    of the rule's variables plus its gap vector."""

    order: tuple
    gaps: tuple


class CombineResult:
    """A minimal head type plus one witness assignment.

    Witnesses are built on first access: saturation discards most candidate
    results as dominated, and only survivors need one.
    """

    __slots__ = ("head_type", "_witness", "_thunk")

    def __init__(self, head_type, witness=None, thunk=None):
        self.head_type = head_type
        self._witness = witness
        self._thunk = thunk

    @property
    def witness(self) -> Witness:
        if self._witness is None:
            self._witness = self._thunk()
            self._thunk = None
        return self._witness

    def __repr__(self):
        return f"CombineResult({self.head_type!r})"


@dataclass(frozen=True)
class ConstraintSystem:
    """Interval lower bounds over the gap vector of a fixed variable order.

    ``positions`` are the ordered equality classes; ``lower_bounds`` entries
    are ``(i, j, d)`` in prefix-node indexing (node 0 sits before the first
    gap, node len(gaps) after the last): the gaps i..j-1 must sum to >= d.
    """

    positions: tuple
    lower_bounds: tuple

    @property
    def num_gaps(self) -> int:
        return len(self.positions) + 1

    def floors(self) -> tuple:
        s = len(self.positions)
        if s == 0:
            return (0,)
        return (0,) + (1,) * (s - 1) + (0,)


def pareto_min(vectors) -> list:
    """Pointwise-minimal elements; lexicographic scan needs no eviction."""
    out = []
    for v in sorted(set(vectors)):
        if not any(all(a <= b for a, b in zip(o, v)) for o in out):
            out.append(v)
    return out


class TooWide(Exception):
    """The minimal solution frontier exceeds the caller's result budget."""


@lru_cache(maxsize=200_000)
def minimal_gap_vectors(floors: tuple, bounds: tuple, budget=None) -> tuple:
    """Pareto-minimal integer vectors g >= floors with sum(g[i:j]) >= d.

    ``bounds`` are (i, j, d) prefix-node intervals. Works left to right,
    carrying for each later endpoint the strongest outstanding requirement;
    a gap never needs to exceed the largest live requirement, which bounds
    the search. Memoized on the residual state. A bound that spans several
    gaps with slack splits into one solution per distribution; ``budget``
    raises TooWide instead of enumerating a frontier larger than that.
    """
    n = len(floors)
    base = [[0] * (n + 1) for _ in range(n + 1)]
    for i, j, d in bounds:
        if d <= 0:
            continue
        if not 0 <= i < j <= n:
            return ()
        if base[i][j] < d:
            base[i][j] = d

    memo = {}

    def solve(k, residuals):
        if k == n:
            return ((),)
        key = (k, residuals)
        hit = memo.get(key)
        if hit is not None:
            return hit
        need_now, later = residuals[0], residuals[1:]
        lo = max(floors[k], need_now)
        hi = max((lo, *later)) if later else lo
        outs = []
        base_next = base[k + 1]
        for v in range(lo, hi + 1):
            nxt = tuple(
                max(later[t] - v, base_next[k + 2 + t]) for t in range(len(later))
            )
            for tail in solve(k + 1, nxt):
                outs.append((v,) + tail)
                if budget is not None and len(outs) > 4 * budget:
                    raise TooWide
        outs = tuple(pareto_min(outs))
        if budget is not None and len(outs) > budget:
            raise TooWide
        memo[key] = outs
        return outs

    init = tuple(base[0][j] for j in range(1, n + 1))
    return solve(0, init)


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra

    def members(self):
        groups = {}
        for x in self.parent:
            groups.setdefault(self.find(x), []).append(x)
        return {rep: tuple(sorted(vs)) for rep, vs in groups.items()}


def _check_inputs(rule: Rule, body_types):
    body_atoms = rule.body_idb_atoms()
    if len(body_types) != len(body_atoms):
        raise ProgramError(
            f"rule has {len(body_atoms)} body IDB atoms, got {len(body_types)} types")
    for atom, t in zip(body_atoms, body_types):
        if t.items() != frozenset(range(len(atom.args))):
            raise ProgramError(
                f"type for {atom.symbol} must cover positions 0..{len(atom.args) - 1}")
    for atom in (rule.head, *rule.body):
        if isinstance(atom, IntervalAtom):
            raise ProgramError("interval atoms must be lowered before combining")
        terms = atom.args if isinstance(atom, IdbAtom) else (atom.left, atom.right)
        if any(isinstance(term, Constant) for term in terms):
            raise ProgramError("constants must be eliminated before combining")
    return body_atoms


def _merge_equalities(rule, body_atoms, body_types):
    uf = _UnionFind(rule.variables())
    for atom, t in zip(body_atoms, body_types):
        for cls in t.classes:
            first = atom.args[cls[0]].name
            for p in cls[1:]:
                uf.union(first, atom.args[p].name)
    return uf


def _graph_edges(rule, body_atoms, body_types, uf):
    """Difference-constraint edges (u, v, w): potential(v) - potential(u) >= w."""
    find = uf.find
    edges = []
    reps = sorted({find(v) for v in rule.variables()})
    for r in reps:
        edges.append((MINUS_INF, r, 0))
        edges.append((r, PLUS_INF, 0))
    for atom in rule.body:
        if isinstance(atom, OrderAtom):
            edges.append((find(atom.left.name), find(atom.right.name), 1))
    for atom, t in zip(body_atoms, body_types):
        cls_reps = [find(atom.args[c[0]].name) for c in t.classes]
        if not cls_reps:
            edges.append((MINUS_INF, PLUS_INF, t.gaps[0]))
            continue
        edges.append((MINUS_INF, cls_reps[0], t.gaps[0]))
        for (u, v), g in zip(zip(cls_reps, cls_reps[1:]), t.gaps[1:-1]):
            edges.append((u, v, g))
        edges.append((cls_reps[-1], PLUS_INF, t.gaps[-1]))
    return reps, edges


def _toposort(nodes, edges):
    """Kahn's algorithm; None if the graph has a cycle."""
    indeg = {n: 0 for n in nodes}
    adj = {n: [] for n in nodes}
    for u, v, w in edges:
        if u == v:
            return None  # every variable-to-variable constraint is strict
        adj[u].append((v, w))
        indeg[v] += 1
    ready = [n for n in nodes if indeg[n] == 0]
    order = []
    while ready:
        n = ready.pop()
        order.append(n)
        for v, _ in adj[n]:
            indeg[v] -= 1
            if indeg[v] == 0:
                ready.append(v)
    if len(order) != len(nodes):
        return None
    return order, adj


def _longest_from(src, order, adj):
    dist = {src: 0}
    started = False
    for n in order:
        if n == src:
            started = True
        if not started or n not in dist:
            continue
        d = dist[n]
        for v, w in adj[n]:
            if dist.get(v, _NEG) < d + w:
                dist[v] = d + w
    return dist


def _minimal_anchor_vectors(matrix, size):
    """Solve the anchor-gap system given a closed bounds matrix."""
    bounds = []
    for i in range(size):
        row = matrix[i]
        for j in range(i + 1, size):
            if row[j] is not None and row[j] >= 1:
                bounds.append((i, j, row[j]))
    floors = (0,) * (size - 1)
    return minimal_gap_vectors(floors, tuple(sorted(bounds)))


@lru_cache(maxsize=50_000)
def _arrangements(count: int, forced: frozenset) -> tuple:
    """Weak orders of 0..count-1 extending the forced strict pairs."""
    return tuple(weak_orders(range(count), forced))


def combine_all(rule: Rule, body_types, max_results=None) -> list:
    """Every Pareto-minimal head type of one rule application, all
    arrangements of the rule variables considered at once.

    With ``max_results`` set, raises TooWide instead of materializing a
    larger answer; saturation defers such combinations until their inputs
    have usually been evicted.
    """
    body_atoms = _check_inputs(rule, body_types)
    uf = _merge_equalities(rule, body_atoms, body_types)
    reps, edges = _graph_edges(rule, body_atoms, body_types, uf)
    nodes = [MINUS_INF, *reps, PLUS_INF]
    topo = _toposort(nodes, edges)
    if topo is None:
        return []
    order, adj = topo
    head_reps = sorted({uf.find(t.name) for t in rule.head.args})
    lp = {src: _longest_from(src, order, adj) for src in (MINUS_INF, *head_reps)}

    # pairwise path matrix over (-inf, head reps..., +inf), None = no path
    h = len(head_reps)
    anchor_nodes = (MINUS_INF, *head_reps, PLUS_INF)
    base = [[None] * (h + 2) for _ in range(h + 2)]
    for i in range(h + 1):
        row = lp[anchor_nodes[i]]
        for j in range(h + 2):
            if i != j:
                base[i][j] = row.get(anchor_nodes[j])
    forced = frozenset(
        (i, j)
        for i in range(h)
        for j in range(h)
        if i != j and base[i + 1][j + 1] is not None
    )
    head_positions = {}
    for pos, term in enumerate(rule.head.args):
        head_positions.setdefault(uf.find(term.name), []).append(pos)

    results = []
    members = None
    for tau in _arrangements(h, forced):
        # anchors: 0 = -inf, groups of head-rep indices, len(tau)+1 = +inf
        size = len(tau) + 2
        bounds = []
        for i in range(size - 1):
            rows = (0,) if i == 0 else tuple(g + 1 for g in tau[i - 1])
            for j in range(i + 1, size):
                cols = (h + 1,) if j == size - 1 else tuple(g + 1 for g in tau[j - 1])
                best = 0
                for r in rows:
                    base_r = base[r]
                    for c in cols:
                        d = base_r[c]
                        if d is not None and d > best:
                            best = d
                if best >= 1:
                    bounds.append((i, j, best))
        floors = ((0,) + (1,) * (len(tau) - 1) + (0,)) if tau else (0,)
        vecs = minimal_gap_vectors(floors, tuple(bounds), max_results)
        if not vecs:
            continue
        if max_results is not None and len(results) + len(vecs) > max_results:
            raise TooWide
        rep_groups = tuple(tuple(head_reps[g] for g in group) for group in tau)
        classes = [
            tuple(sorted(p for rep in group for p in head_positions[rep]))
            for group in rep_groups
        ]
        if members is None:
            members = uf.members()
        for vec in vecs:
            head_type = CompleteType.build(classes, vec)

            def thunk(vec=vec, groups=rep_groups):
                return _reconstruct_witness(vec, groups, lp, members, reps)

            results.append(CombineResult(head_type, thunk=thunk))
    return results


def _reconstruct_witness(vec, tau, lp, members, reps):
    pins = {MINUS_INF: 0}
    total = 0
    for group, gap in zip(tau, vec[:-1]):
        total += gap
        for rep in group:
            pins[rep] = total
    pins[PLUS_INF] = sum(vec)
    potential = {}
    for rep in reps:
        if rep in pins:
            potential[rep] = pins[rep]
            continue
        best = 0
        for src, value in pins.items():
            row = lp.get(src)
            if row is None:
                continue
            d = row.get(rep)
            if d is not None and value + d > best:
                best = value + d
        potential[rep] = best
    levels = {}
    for rep, phi in potential.items():
        levels.setdefault(phi, []).extend(members[rep])
    ordered = sorted(levels)
    classes = tuple(tuple(sorted(levels[phi])) for phi in ordered)
    gaps = []
    prev = 0
    for phi in ordered:
        gaps.append(phi - prev)
        prev = phi
    gaps.append(pins[PLUS_INF] - prev)
    return Witness(order=classes, gaps=tuple(gaps))


def build_constraint_system(rule: Rule, body_types, sigma) -> ConstraintSystem:
    """Map rule EDB atoms and body-type atoms onto a candidate variable order.

    Returns None when ``sigma`` contradicts an order atom or a body type's
    order structure; callers then produce no head types for it.
    """
    body_atoms = _check_inputs(rule, body_types)
    sigma = tuple(tuple(sorted(cls)) for cls in sigma)
    pos_of = {}
    for idx, cls in enumerate(sigma):
        for var in cls:
            if var in pos_of:
                raise ProgramError(f"variable {var!r} occurs twice in the order")
            pos_of[var] = idx
    if set(pos_of) != set(rule.variables()):
        raise ProgramError("candidate order must cover exactly the rule variables")

    s = len(sigma)
    bounds = []
    for atom in rule.body:
        if not isinstance(atom, OrderAtom):
            continue
        i, j = pos_of[atom.left.name], pos_of[atom.right.name]
        if i >= j:
            return None
        bounds.append((i + 1, j + 1, 1))
    for atom, t in zip(body_atoms, body_types):
        cls_pos = []
        for cls in t.classes:
            ps = {pos_of[atom.args[p].name] for p in cls}
            if len(ps) != 1:
                return None
            cls_pos.append(ps.pop())
        if any(a >= b for a, b in zip(cls_pos, cls_pos[1:])):
            return None
        if not cls_pos:
            bounds.append((0, s + 1, t.gaps[0]))
            continue
        bounds.append((0, cls_pos[0] + 1, t.gaps[0]))
        for (a, b), g in zip(zip(cls_pos, cls_pos[1:]), t.gaps[1:-1]):
            bounds.append((a + 1, b + 1, g))
        bounds.append((cls_pos[-1] + 1, s + 1, t.gaps[-1]))
    bounds = tuple(sorted({(i, j, d) for i, j, d in bounds if d > 0}))
    return ConstraintSystem(positions=sigma, lower_bounds=bounds)


def combine(rule: Rule, body_types, sigma) -> list:
    """Minimal head types of one rule application under a fixed variable order."""
    cs = build_constraint_system(rule, body_types, sigma)
    if cs is None:
        return []
    sigma = cs.positions
    s = len(sigma)
    pos_of = {v: i for i, cls in enumerate(sigma) for v in cls}

    # longest paths over prefix nodes 0..s+1 (all edges go forward)
    floors = cs.floors()
    n_nodes = s + 2
    adj = [[] for _ in range(n_nodes)]
    for t in range(s + 1):
        adj[t].append((t + 1, floors[t]))
    for i, j, d in cs.lower_bounds:
        adj[i].append((j, d))

    def longest_from(src):
        dist = [None] * n_nodes
        dist[src] = 0
        for node in range(src, n_nodes):
            if dist[node] is None:
                continue
            for v, w in adj[node]:
                if dist[v] is None or dist[v] < dist[node] + w:
                    dist[v] = dist[node] + w
        return dist

    head_classes = sorted({pos_of[t.name] for t in rule.head.args})
    anchors = [0] + [c + 1 for c in head_classes] + [s + 1]
    lp = {a: longest_from(a) for a in anchors}
    size = len(anchors)
    matrix = [[lp[anchors[i]][anchors[j]] if j >= i else None for j in range(size)]
              for i in range(size)]
    for i in range(size):
        matrix[i][i] = 0

    classes = []
    for c in head_classes:
        cls = tuple(p for p, term in enumerate(rule.head.args)
                    if pos_of[term.name] == c)
        classes.append(cls)

    results = []
    for vec in _minimal_anchor_vectors(matrix, size):
        head_type = CompleteType.build(classes, vec)
        witness = _sigma_witness(vec, anchors, lp, sigma, s)
        results.append(CombineResult(head_type, witness))
    return results


def _sigma_witness(vec, anchors, lp, sigma, s):
    pins = {}
    total = 0
    pins[anchors[0]] = 0
    for anchor, gap in zip(anchors[1:], vec):
        total += gap
        pins[anchor] = total
    potential = [0] * (s + 2)
    for node in range(s + 2):
        if node in pins:
            potential[node] = pins[node]
            continue
        best = 0
        for a, value in pins.items():
            if a <= node:
                d = lp[a][node]
                if d is not None and value + d > best:
                    best = value + d
        potential[node] = best
    gaps = tuple(potential[t + 1] - potential[t] for t in range(s + 1))
    return Witness(order=sigma, gaps=gaps)
