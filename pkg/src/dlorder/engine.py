"""Saturation of per-IDB type sets and the decision procedures.

The engine never materializes relations. Each IDB carries, per order type of
its argument positions, a Pareto-minimal antichain of complete types: a type
dominated by (entrywise at least as strong as) a present member describes a
subset of its tuples and is redundant, and inserting a new member evicts the
members it weakens. By Dickson's lemma the per-key insertion sequence, being
non-dominating, is finite, so saturation terminates without any rank bound.

Decisions then reduce to scanning antichains: a tuple is derivable iff it
satisfies a member; a goal is nonempty over a model iff a member is
satisfiable there. On infinite models without constants the far cheaper
initialization-sequence pass answers nonemptiness directly.
"""
from __future__ import annotations

import heapq
import itertools
import os
from dataclasses import dataclass, field
from functools import lru_cache

from .combine import CombineResult, TooWide, Witness, combine_all
from .errors import ModelError, ProgramError, SaturationLimitError
from .orders import EQ, LT, OrderModel
from .program import Program, Rule, validate
from .transform import eliminate_constants, to_type_disjoint
from .typesys import CompleteType, dominates, satisfies

DEFAULT_MAX_INSERTIONS = 10 ** 6
MAX_INSERTIONS_ENV = "DLORDER_MAX_STEPS"
_NARROW_BUDGET = 64


def _insertion_cap(limit=None) -> int:
    if limit is not None:
        return limit
    raw = os.environ.get(MAX_INSERTIONS_ENV)
    if raw:
        try:
            return int(raw)
        except ValueError:
            raise ModelError(f"{MAX_INSERTIONS_ENV} must be an integer") from None
    return DEFAULT_MAX_INSERTIONS


class TypeSet:
    """Antichains of complete types keyed by (IDB symbol, order type)."""

    def __init__(self):
        self._data = {}
        self._by_symbol = {}
        self._live = {}

    def insert(self, symbol: str, entry: CombineResult) -> bool:
        """Add unless dominated-or-equal by a present member; evict members the
        new one weakens. Returns whether the antichain changed."""
        head = entry.head_type
        key = (symbol, head.classes)
        chain = self._data.setdefault(key, [])
        for present, _ in chain:
            if dominates(head, present):
                return False
        live = self._live.setdefault(symbol, {})
        kept = []
        for t, w in chain:
            if dominates(t, head):
                del live[t]
            else:
                kept.append((t, w))
        kept.append((head, entry.witness))
        live[head] = None
        self._data[key] = kept
        self._by_symbol.setdefault(symbol, set()).add(key)
        return True

    def is_live(self, symbol: str, t: CompleteType) -> bool:
        return t in self._live.get(symbol, ())

    def live_types(self, symbol: str) -> tuple:
        """Current members in insertion order, types only."""
        return tuple(self._live.get(symbol, ()))

    def members(self, symbol: str) -> list:
        out = []
        for key in sorted(self._by_symbol.get(symbol, ())):
            out.extend(self._data[key])
        return out

    def keys(self):
        return sorted(self._data)

    def entries(self):
        for key in self.keys():
            for t, w in self._data[key]:
                yield key, t, w

    def max_rank(self) -> int:
        return max((t.rank() for _, t, _ in self.entries()), default=0)

    def snapshot(self) -> dict:
        return {key: tuple(chain) for key, chain in self._data.items() if chain}


@dataclass
class SaturationStats:
    steps: int = 0                    # rule applications that changed the state
    max_rank_per_step: list = field(default_factory=list)
    insertions: int = 0
    fixpoint_reached: bool = False
    insertion_log: list = None        # populated when log_insertions is set


def saturate(program: Program, limit=None, rank_cap=None, log_insertions=False):
    """Run type saturation to its fixpoint; returns (TypeSet, SaturationStats).

    Rule applications are driven by a worklist of (rule, body-type choice)
    combinations, ordered by the total span of the chosen types so that weak
    types breed first. A combination whose member has been evicted is skipped:
    the evictor is weaker, and the heads it combines to dominate whatever the
    evicted member would have produced, so no represented tuple is lost.

    ``rank_cap`` clamps every derived gap (used for dense orders, where any
    positive rank is equivalent to 1). ``limit`` caps antichain insertions;
    when exceeded the partial state is returned with ``fixpoint_reached``
    False. Saturation never consults a model.
    """
    _require_plain_order(program)
    cap = _insertion_cap(limit)
    ts = TypeSet()
    stats = SaturationStats(insertion_log=[] if log_insertions else None)
    queued = set()
    heap = []  # (tier, -tick, rule index, body types): newest-first per tier
    tick = itertools.count()
    rules = program.rules
    body_syms = [tuple(a.symbol for a in r.body_idb_atoms()) for r in rules]
    positions_of = {}  # symbol -> [(rule index, body position), ...]
    for idx, syms in enumerate(body_syms):
        for pos, sym in enumerate(syms):
            positions_of.setdefault(sym, []).append((idx, pos))

    def enqueue(idx, types):
        key = (idx, types)
        if key not in queued:
            queued.add(key)
            heapq.heappush(heap, (0, -next(tick), idx, types))

    for idx, syms in enumerate(body_syms):
        if not syms:
            enqueue(idx, ())

    while heap:
        tier, _, idx, types = heapq.heappop(heap)
        syms = body_syms[idx]
        if any(not ts.is_live(s, t) for s, t in zip(syms, types)):
            continue
        rule = rules[idx]
        head_symbol = rule.head.symbol
        try:
            results = combine_all(
                rule, types, max_results=_NARROW_BUDGET if tier == 0 else None)
        except TooWide:
            # expensive frontier: retry only once the narrow work has drained,
            # by which point the inputs have usually been evicted
            heapq.heappush(heap, (1, -next(tick), idx, types))
            continue
        inserted_any = False
        for result in results:
            if rank_cap is not None:
                result = _clamp(result, rank_cap)
            if not ts.insert(head_symbol, result):
                continue
            stats.insertions += 1
            inserted_any = True
            if stats.insertion_log is not None:
                stats.insertion_log.append((head_symbol, result.head_type))
            member = result.head_type
            for jdx, pos in positions_of.get(head_symbol, ()):
                lists = [
                    (member,) if p == pos else ts.live_types(s)
                    for p, s in enumerate(body_syms[jdx])
                ]
                for combo in itertools.product(*lists):
                    enqueue(jdx, combo)
            if stats.insertions >= cap:
                stats.steps += 1
                stats.max_rank_per_step.append(ts.max_rank())
                return ts, stats
        if inserted_any:
            stats.steps += 1
            stats.max_rank_per_step.append(ts.max_rank())
    stats.fixpoint_reached = True
    return ts, stats


def _clamp(result: CombineResult, cap: int) -> CombineResult:
    head = result.head_type
    gaps = tuple(min(g, cap) for g in head.gaps)
    if gaps == head.gaps:
        return result
    return CombineResult(
        CompleteType(head.classes, gaps),
        Witness(result.witness.order, tuple(min(g, cap) for g in result.witness.gaps)),
    )


def _require_plain_order(program: Program):
    if program.mode != "order":
        raise ProgramError("saturation needs an order-mode program")
    if program.constants:
        raise ProgramError("eliminate constants before saturating")
    diags = validate(program)
    if diags:
        raise ProgramError(str(diags[0]))


@dataclass(frozen=True)
class InitSequence:
    """Rule applications that switch an empty IDB to nonempty; on infinite
    models this settles nonemptiness for every IDB of a type-disjoint
    program."""

    rules: tuple  # ((Rule, head symbol), ...)

    @property
    def nonempty_idbs(self) -> frozenset:
        return frozenset(symbol for _, symbol in self.rules)

    def __len__(self):
        return len(self.rules)


def init_sequence(program: Program) -> InitSequence:
    """Cycle through the rules, firing any whose body IDBs are all nonempty.

    Sound for type-disjoint order-mode programs on infinite models: whether a
    rule adds tuples there depends only on body nonemptiness, never on actual
    contents, because rules with contradictory combined order facts were
    dropped by the rewrite and any finite distance demands can be met.
    """
    _require_plain_order(program)
    nonempty = set()
    fired = []
    n_symbols = len(program.idb_symbols())
    for _ in range(max(1, n_symbols)):
        changed = False
        for rule in program.rules:
            if rule.head.symbol in nonempty:
                continue
            if all(a.symbol in nonempty for a in rule.body_idb_atoms()):
                nonempty.add(rule.head.symbol)
                fired.append((rule, rule.head.symbol))
                changed = True
        if not changed:
            break
    return InitSequence(rules=tuple(fired))


def satisfiable_in_model(t: CompleteType, model: OrderModel, bindings=None) -> bool:
    """Can some total extension of ``bindings`` satisfy ``t`` in ``model``?

    Scans the classes in order. Bound classes must agree internally and be
    strictly increasing across classes; between consecutive bound anchors the
    spanned gap sum must fit in the available distance, and the runs before
    the first and after the last anchor must fit below/above. With no anchors
    the whole gap vector must fit somewhere in the model.
    """
    bindings = dict(bindings or {})
    anchored = []  # (class index, element)
    for idx, cls in enumerate(t.classes):
        values = [bindings[item] for item in cls if item in bindings]
        if not values:
            continue
        first = values[0]
        for other in values[1:]:
            if model.compare(other, first) != EQ:
                raise ModelError(
                    "bindings contradict an equality class of the type")
        anchored.append((idx, first))

    if not anchored:
        need = t.total_span()
        return model.chain_steps(need) >= need

    for (i, a), (j, b) in zip(anchored, anchored[1:]):
        if model.compare(a, b) != LT:
            return False
        need = t.pairwise_rank(i, j)
        if model.distance(a, b, need) < need:
            return False
    first_idx, first_el = anchored[0]
    need = t.below_rank(first_idx)
    if model.boundary_distance(first_el, "below", need) < need:
        return False
    last_idx, last_el = anchored[-1]
    need = t.above_rank(last_idx)
    return model.boundary_distance(last_el, "above", need) >= need


@lru_cache(maxsize=64)
def _saturated_cached(program: Program, rank_cap):
    ts, stats = saturate(program, rank_cap=rank_cap)
    if not stats.fixpoint_reached:
        raise SaturationLimitError(
            f"insertion cap hit after {stats.insertions} insertions")
    return ts


def _prepare(program: Program, model: OrderModel):
    """Common front: lower intervals, split off constants, build bindings."""
    if program.mode == "interval":
        from .allen import interval_to_order

        if not model.is_dense:
            raise ModelError("interval programs are decided over rat only")
        program = interval_to_order(program)
    names = program.constants
    if names:
        available = model.binding_map()
        missing = [n for n in names if n not in available]
        if missing:
            raise ModelError(f"constant '{missing[0]}' is not bound")
        values = tuple(model.check_element(available[n]) for n in names)
        program = eliminate_constants(program)
        return program, values
    return program, ()


def _goal_arity(program: Program, goal: str) -> int:
    arities = program.idb_symbols()
    if goal not in arities:
        raise ProgramError(f"unknown IDB '{goal}'")
    return arities[goal]


def nonempty_via_saturation(program: Program, goal: str, model: OrderModel) -> bool:
    """Saturation-based nonemptiness; works on every model, with or without
    constants. Constant values enter as bindings of the threaded positions."""
    _goal_arity(program, goal)
    lowered, const_values = _prepare(program, model)
    _goal_arity(lowered, goal)
    ts = _saturated_cached(lowered, 1 if model.is_dense else None)
    bindings = dict(enumerate(const_values))
    return any(
        satisfiable_in_model(t, model, bindings)
        for t, _ in ts.members(goal)
    )


def decide_nonempty(program: Program, goal: str, model: OrderModel) -> bool:
    """Is the goal's fixpoint relation over the model nonempty?

    Infinite constant-free models take the initialization-sequence fast path
    on the type-disjoint rewrite; everything else goes through saturation
    plus per-type satisfiability.
    """
    _goal_arity(program, goal)
    if (not model.is_finite and not program.constants
            and program.mode == "order"):
        rewritten, report = to_type_disjoint(program)
        marked = init_sequence(rewritten).nonempty_idbs
        copies = dict(report.mapping)[goal]
        return any(name in marked for name, _ in copies)
    return nonempty_via_saturation(program, goal, model)


def decide_tuple(program: Program, goal: str, elems, model: OrderModel) -> bool:
    """Is the tuple in the goal's fixpoint relation over the model?"""
    lowered, const_values = _prepare(program, model)
    arity = _goal_arity(lowered, goal)
    elems = tuple(model.check_element(e) for e in elems)
    if len(const_values) + len(elems) != arity:
        raise ProgramError(
            f"'{goal}' expects {arity - len(const_values)} elements, got {len(elems)}")
    full = const_values + elems
    ts = _saturated_cached(lowered, 1 if model.is_dense else None)
    assignment = dict(enumerate(full))
    return any(satisfies(model, assignment, t) for t, _ in ts.members(goal))
