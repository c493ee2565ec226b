"""Reference bottom-up evaluator on finite chains.

Deliberately unoptimized: every rule pass tries every assignment of the
rule's variables to the domain. Its value is being obviously correct; it is
the ground truth the engine is tested against, so it shares no machinery
with the engine.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import ModelError, ProgramError
from .orders import OrderModel
from .program import Constant, IdbAtom, OrderAtom, Program, Rule


@dataclass
class FixpointStore:
    relations: dict = field(default_factory=dict)
    stages: int = 0


def naive_eval(program: Program, model: OrderModel, bindings=None) -> FixpointStore:
    """Least fixpoint by exhaustive rule instantiation; terminates on any
    finite chain. ``bindings`` maps declared constant names to elements."""
    if not model.is_finite:
        raise ModelError("the reference evaluator only runs on finite chains")
    if program.mode != "order":
        raise ProgramError("the reference evaluator expects an order-mode program")
    bindings = dict(bindings or {})
    for name in program.constants:
        if name not in bindings:
            raise ModelError(f"constant '{name}' is not bound")
        model.check_element(bindings[name])

    store = FixpointStore({sym: set() for sym in program.idb_symbols()})
    rels = store.relations
    universe = tuple(model.elements())

    compiled = [_compile_rule(rule, bindings) for rule in program.rules]
    changed = True
    while changed:
        changed = False
        store.stages += 1
        for rule, (variables, head_fn, checks) in zip(program.rules, compiled):
            head_rel = rels[rule.head.symbol]
            if any(not rels[a.symbol] for a in rule.body_idb_atoms()):
                continue
            for assignment in itertools.product(universe, repeat=len(variables)):
                env = dict(zip(variables, assignment))
                if all(check(env, rels) for check in checks):
                    tup = head_fn(env)
                    if tup not in head_rel:
                        head_rel.add(tup)
                        changed = True
    return store


def _compile_rule(rule: Rule, bindings):
    variables = rule.variables()

    def resolve(term):
        if isinstance(term, Constant):
            value = bindings[term.name]
            return lambda env: value
        name = term.name
        return lambda env: env[name]

    def make_order_check(atom):
        left, right = resolve(atom.left), resolve(atom.right)
        return lambda env, rels: left(env) < right(env)

    def make_idb_check(atom):
        getters = tuple(resolve(t) for t in atom.args)
        symbol = atom.symbol
        return lambda env, rels: tuple(g(env) for g in getters) in rels[symbol]

    checks = []
    for atom in rule.body:
        if isinstance(atom, OrderAtom):
            checks.append(make_order_check(atom))
        elif isinstance(atom, IdbAtom):
            checks.append(make_idb_check(atom))
        else:
            raise ProgramError("interval atoms are outside the evaluator's domain")

    head_getters = tuple(resolve(t) for t in rule.head.args)

    def head_fn(env):
        return tuple(g(env) for g in head_getters)

    return variables, head_fn, checks


def naive_nonempty(program, model, bindings, goal: str) -> bool:
    store = naive_eval(program, model, bindings)
    if goal not in store.relations:
        raise ProgramError(f"unknown IDB '{goal}'")
    return bool(store.relations[goal])


def naive_tuple(program, model, bindings, goal: str, elems) -> bool:
    store = naive_eval(program, model, bindings)
    if goal not in store.relations:
        raise ProgramError(f"unknown IDB '{goal}'")
    arity = program.idb_symbols()[goal]
    if len(elems) != arity:
        raise ProgramError(f"'{goal}' has arity {arity}, got {len(elems)} elements")
    return tuple(elems) in store.relations[goal]
