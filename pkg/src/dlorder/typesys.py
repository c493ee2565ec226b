"""Distance types over linear orders.

A distance atom ``x <=_d y`` asserts "x <= y with at least d strict steps in
between"; boundary atoms assert room below (``-inf <=_d x``) or above
(``x <=_d +inf``). A distance type is a finite set of such atoms.

Complete types are kept in a canonical additive form: an ordered partition of
the items into equality classes plus a gap vector of consecutive ranks,
including the two boundary gaps. The rank of any induced pairwise atom is the
sum of the gaps it spans. A type over zero items degenerates to a single gap,
the total span it requires of the surrounding order; this is what lets 0-ary
relations be decided on finite chains.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import ProgramError
from .orders import EQ, GT, LT, OrderModel


class _Boundary:
    __slots__ = ("label",)

    def __init__(self, label):
        self.label = label

    def __repr__(self):
        return self.label


MINUS_INF = _Boundary("-inf")
PLUS_INF = _Boundary("+inf")


@dataclass(frozen=True)
class DistanceAtom:
    left: object   # item or MINUS_INF
    right: object  # item or PLUS_INF
    rank: int

    def __post_init__(self):
        if self.rank < 0:
            raise ProgramError("distance atom rank must be nonnegative")
        if self.left is PLUS_INF or self.right is MINUS_INF:
            raise ProgramError("boundary on the wrong side of a distance atom")

    def __repr__(self):
        return f"{self.left!r}<={self.rank}{self.right!r}"


@dataclass(frozen=True)
class DistanceType:
    atoms: frozenset

    def __init__(self, atoms: Iterable[DistanceAtom] = ()):
        object.__setattr__(self, "atoms", frozenset(atoms))

    def items(self) -> frozenset:
        out = set()
        for a in self.atoms:
            if not isinstance(a.left, _Boundary):
                out.add(a.left)
            if not isinstance(a.right, _Boundary):
                out.add(a.right)
        return frozenset(out)

    def rank(self) -> int:
        return max((a.rank for a in self.atoms), default=0)


@dataclass(frozen=True)
class CompleteType:
    """Canonical complete type: ordered equality classes plus a gap vector.

    ``gaps`` has one more entry than ``classes``: the leading entry is the
    below-boundary rank of the first class, the trailing entry the
    above-boundary rank of the last class, and interior entries the ranks
    between consecutive classes (at least 1, classes being distinct).
    """

    classes: tuple  # tuple of tuples of items, in ascending order
    gaps: tuple     # len(classes) + 1 nonnegative ints

    def __post_init__(self):
        if len(self.gaps) != len(self.classes) + 1:
            raise ProgramError("gap vector length must be number of classes + 1")
        if any(g < 0 for g in self.gaps):
            raise ProgramError("gaps must be nonnegative")
        if any(g < 1 for g in self.gaps[1:-1]):
            raise ProgramError("interior gaps must be at least 1")
        seen = set()
        for cls in self.classes:
            if not cls:
                raise ProgramError("empty equality class")
            for item in cls:
                if item in seen:
                    raise ProgramError(f"item {item!r} in two classes")
                seen.add(item)

    @classmethod
    def build(cls, classes, gaps) -> "CompleteType":
        return cls(tuple(tuple(sorted(c)) for c in classes), tuple(gaps))

    def items(self) -> frozenset:
        return frozenset(i for c in self.classes for i in c)

    def order_type(self) -> tuple:
        """The underlying weak order, i.e. the classes without gap data."""
        return self.classes

    def arity(self) -> int:
        return sum(len(c) for c in self.classes)

    def class_of(self) -> dict:
        out = {}
        for idx, cls in enumerate(self.classes):
            for item in cls:
                out[item] = idx
        return out

    def rank(self) -> int:
        """Maximum induced atom rank: the larger of the two one-ended spans."""
        if not self.classes:
            return self.gaps[0]
        return max(sum(self.gaps[:-1]), sum(self.gaps[1:]))

    def total_span(self) -> int:
        return sum(self.gaps)

    def pairwise_rank(self, i: int, j: int) -> int:
        """Induced rank between class i and class j (i <= j)."""
        return sum(self.gaps[i + 1:j + 1])

    def below_rank(self, j: int) -> int:
        return sum(self.gaps[:j + 1])

    def above_rank(self, i: int) -> int:
        return sum(self.gaps[i + 1:])

    def rank_vector(self) -> tuple:
        """All boundary and pairwise ranks; length 2k + k(k-1)/2 for k classes.

        Layout: below ranks per class, above ranks per class, then pairwise
        ranks for i < j in lexicographic order. Entrywise comparison of two
        rank vectors over the same order type is equivalent to comparing gap
        vectors, since every entry is an interval sum of gaps.
        """
        k = len(self.classes)
        below = [self.below_rank(j) for j in range(k)]
        above = [self.above_rank(i) for i in range(k)]
        pairs = [self.pairwise_rank(i, j)
                 for i in range(k) for j in range(i + 1, k)]
        return tuple(below + above + pairs)

    def atoms(self) -> DistanceType:
        """The full induced atom set (equalities as mutual rank-0 atoms)."""
        out = []
        k = len(self.classes)
        if k == 0:
            return DistanceType()
        for j, cls in enumerate(self.classes):
            for item in cls:
                out.append(DistanceAtom(MINUS_INF, item, self.below_rank(j)))
                out.append(DistanceAtom(item, PLUS_INF, self.above_rank(j)))
            for a, b in itertools.combinations(cls, 2):
                out.append(DistanceAtom(a, b, 0))
                out.append(DistanceAtom(b, a, 0))
        for i in range(k):
            for j in range(i + 1, k):
                rank = self.pairwise_rank(i, j)
                for a in self.classes[i]:
                    for b in self.classes[j]:
                        out.append(DistanceAtom(a, b, rank))
        return DistanceType(out)

    def relabel(self, mapping) -> "CompleteType":
        return CompleteType.build(
            [[mapping[i] for i in c] for c in self.classes], self.gaps)


def render_type(t: CompleteType, names=None) -> str:
    """Canonical text form: ``[-inf] <=g0 {X1} <=g1 {X2,X3} <=g2 [+inf]``.

    Integer items are shown as positional names X1..Xk unless ``names`` maps
    them to something else.
    """
    def name(item):
        if names is not None:
            return str(names[item])
        return f"X{item + 1}" if isinstance(item, int) else str(item)

    parts = ["[-inf]"]
    for cls, gap in zip(t.classes, t.gaps):
        parts.append(f"<={gap}")
        parts.append("{" + ",".join(name(i) for i in cls) + "}")
    parts.append(f"<={t.gaps[-1]}")
    parts.append("[+inf]")
    return " ".join(parts)


def weak_orders(items, strictly_before=()):
    """All ordered partitions of ``items`` respecting the given strict pairs.

    ``strictly_before`` pairs (u, v) force u's class before v's. Deterministic
    order; the count for k unconstrained items is the ordered Bell number.
    """
    items = sorted(items)
    before = {}
    for u, v in strictly_before:
        before.setdefault(v, set()).add(u)

    def rec(remaining):
        if not remaining:
            yield ()
            return
        rem = set(remaining)
        sources = [x for x in remaining if not (before.get(x, set()) & rem)]
        for size in range(1, len(sources) + 1):
            for block in itertools.combinations(sources, size):
                rest = [x for x in remaining if x not in block]
                for tail in rec(rest):
                    yield (tuple(block),) + tail

    yield from rec(items)


def satisfies(model: OrderModel, assignment: Mapping, t) -> bool:
    """Does the assignment satisfy the distance (or complete) type in the model?

    For complete types this checks equality classes, consecutive gaps and
    boundary gaps; real distances are additive, so the induced long-range
    atoms follow. A 0-item complete type asks the model itself for its span.
    """
    if isinstance(t, CompleteType):
        return _satisfies_complete(model, assignment, t)
    for atom in t.atoms:
        if not _atom_holds(model, assignment, atom):
            return False
    return True


def _atom_holds(model, assignment, atom):
    if atom.left is MINUS_INF:
        a = assignment[atom.right]
        return model.boundary_distance(a, "below", atom.rank) >= atom.rank
    if atom.right is PLUS_INF:
        a = assignment[atom.left]
        return model.boundary_distance(a, "above", atom.rank) >= atom.rank
    a = assignment[atom.left]
    b = assignment[atom.right]
    if model.compare(a, b) == GT:
        return False
    return model.distance(a, b, atom.rank) >= atom.rank


def _satisfies_complete(model, assignment, t):
    if not t.classes:
        need = t.gaps[0]
        return model.chain_steps(need) >= need
    reps = []
    for cls in t.classes:
        first = assignment[cls[0]]
        for item in cls[1:]:
            if model.compare(assignment[item], first) != EQ:
                return False
        reps.append(first)
    for left, right in zip(reps, reps[1:]):
        if model.compare(left, right) != LT:
            return False
    for (left, right), gap in zip(zip(reps, reps[1:]), t.gaps[1:-1]):
        if model.distance(left, right, gap) < gap:
            return False
    g0, gk = t.gaps[0], t.gaps[-1]
    if model.boundary_distance(reps[0], "below", g0) < g0:
        return False
    return model.boundary_distance(reps[-1], "above", gk) >= gk


def satisfied_by_tuple(model: OrderModel, elems, t) -> bool:
    """Positional convenience: item i of ``t`` is bound to ``elems[i]``."""
    return satisfies(model, dict(enumerate(elems)), t)


def tuple_type(model: OrderModel, elems, depth: int) -> CompleteType:
    """The distance-``depth`` type of a tuple: all gaps capped at depth.

    Equal elements share a class; consecutive and boundary gaps are the real
    distances capped at ``depth``. The result is complete and is satisfied by
    the tuple itself.
    """
    if not elems:
        raise ProgramError("tuple_type needs a nonempty tuple")
    order = sorted(range(len(elems)), key=lambda i: model.check_element(elems[i]))
    classes = []
    for idx in order:
        if classes and model.compare(elems[classes[-1][0]], elems[idx]) == EQ:
            classes[-1].append(idx)
        else:
            classes.append([idx])
    reps = [elems[c[0]] for c in classes]
    gaps = [model.boundary_distance(reps[0], "below", depth)]
    for a, b in zip(reps, reps[1:]):
        gaps.append(model.distance(a, b, depth))
    gaps.append(model.boundary_distance(reps[-1], "above", depth))
    return CompleteType.build(classes, gaps)


def implies(stronger, weaker) -> bool:
    """Atom-wise implication: every atom of ``weaker`` has a counterpart in
    ``stronger`` between the same endpoints with at least its rank."""
    strong = stronger.atoms() if isinstance(stronger, CompleteType) else stronger
    weak = weaker.atoms() if isinstance(weaker, CompleteType) else weaker
    best = {}
    for atom in strong.atoms:
        key = (atom.left, atom.right)
        best[key] = max(best.get(key, -1), atom.rank)
    return all(best.get((a.left, a.right), -1) >= a.rank for a in weak.atoms)


def dominates(stronger: CompleteType, weaker: CompleteType) -> bool:
    """True iff both share an order type and ``stronger`` has entrywise
    greater-or-equal ranks; then every tuple satisfying it satisfies
    ``weaker`` too."""
    if stronger.classes != weaker.classes:
        return False
    return all(a >= b for a, b in zip(stronger.gaps, weaker.gaps))


def is_satisfiable(t) -> bool:
    """Satisfiability of a distance type in *some* linear order.

    Viewing items as nodes and pairwise atoms as weighted edges, the type is
    satisfiable iff no cycle carries positive total weight; rank-0 cycles
    merely force equalities. Boundary atoms are always individually
    satisfiable and impose nothing between items.
    """
    if isinstance(t, CompleteType):
        return True  # canonical form is satisfiable by construction
    edges = {}
    for atom in t.atoms:
        if isinstance(atom.left, _Boundary) or isinstance(atom.right, _Boundary):
            continue
        key = (atom.left, atom.right)
        edges[key] = max(edges.get(key, 0), atom.rank)
    nodes = set()
    for u, v in edges:
        nodes.add(u)
        nodes.add(v)
    for comp in _sccs(nodes, edges):
        comp_set = set(comp)
        for (u, v), w in edges.items():
            if w >= 1 and u in comp_set and v in comp_set:
                return False
    return True


def _sccs(nodes, edges):
    """Tarjan's algorithm, iterative."""
    adj = {n: [] for n in nodes}
    for (u, v) in edges:
        adj[u].append(v)
    index = {}
    low = {}
    on_stack = set()
    stack = []
    result = []
    counter = itertools.count()

    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(adj[root]))]
        index[root] = low[root] = next(counter)
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for succ in it:
                if succ not in index:
                    index[succ] = low[succ] = next(counter)
                    stack.append(succ)
                    on_stack.add(succ)
                    work.append((succ, iter(adj[succ])))
                    advanced = True
                    break
                if succ in on_stack:
                    low[node] = min(low[node], index[succ])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                result.append(comp)
    return result


def project(t: CompleteType, head_items) -> CompleteType:
    """Restrict a complete type to the given items, renumbered 0..k-1.

    The i-th head item becomes item i of the result; repeated head items land
    in one class. Each projected gap is the sum of the gaps it spans, so the
    projection is exactly the additive image of the original type.
    """
    head_items = tuple(head_items)
    cls_of = t.class_of()
    for item in head_items:
        if item not in cls_of:
            raise ProgramError(f"head item {item!r} missing from the type")
    anchor_classes = sorted({cls_of[i] for i in head_items})
    new_classes = [
        tuple(sorted(p for p, item in enumerate(head_items) if cls_of[item] == c))
        for c in anchor_classes
    ]
    if not anchor_classes:
        return CompleteType.build([], [t.total_span()])
    gaps = [t.below_rank(anchor_classes[0])]
    for a, b in zip(anchor_classes, anchor_classes[1:]):
        gaps.append(t.pairwise_rank(a, b))
    gaps.append(t.above_rank(anchor_classes[-1]))
    return CompleteType.build(new_classes, gaps)
