"""Program-to-program rewrites: the type-disjoint split and constant removal.

The type-disjoint rewrite gives every IDB one copy per consistent weak order
of its argument positions, so each copy's relation realizes a single order
type. Rules are multiplied over head and body copies; a rule whose combined
order facts (its own order atoms, the head tag, and the body copies' tags)
contain a directed cycle can never fire and is dropped.

Constant removal threads the declared constants through every IDB as leading
arguments, turning a program over (A, <, c1..cr) into one over (A, <): a
tuple is derived in the original iff the constant-prefixed tuple is derived
in the rewrite.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import ProgramError
from .program import (
    Constant,
    IdbAtom,
    OrderAtom,
    Program,
    Rule,
    Variable,
    params,
    validate,
)
from .typesys import weak_orders

OrderTypeTag = tuple  # ordered partition of argument positions


def enumerate_order_types(arity: int) -> list:
    """All consistent weak orders of ``arity`` positions, deterministically.

    These are the ordered set partitions; their count is the ordered Bell
    number (1, 1, 3, 13, 75, ...), a fraction of the 3^(k*k) raw relation
    pickings, which include inconsistent combinations.
    """
    return list(weak_orders(range(arity)))


def tag_name(symbol: str, tag: OrderTypeTag) -> str:
    """Stable IDB copy name: classes joined by '_', members by 'e', 1-based."""
    body = "_".join("e".join(str(p + 1) for p in cls) for cls in tag)
    return f"{symbol}@{body}"


@dataclass(frozen=True)
class TransformReport:
    n_idb: int
    n_rules: int
    max_idb_arity: int
    max_rule_vars: int
    max_body_idbs: int
    mapping: tuple  # ((original symbol, ((copy name, tag), ...)), ...)

    def mapping_dict(self) -> dict:
        return {sym: list(copies) for sym, copies in self.mapping}


class _RuleOrderFacts:
    """Equalities and strict order edges accumulated for the cycle check."""

    def __init__(self, variables):
        self.parent = {v: v for v in variables}
        self.edges = set()

    def find(self, v):
        parent = self.parent
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    def merge(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra

    def add_edge(self, a, b):
        self.edges.add((a, b))

    def consistent(self) -> bool:
        edges = {(self.find(a), self.find(b)) for a, b in self.edges}
        if any(a == b for a, b in edges):
            return False
        adj = {}
        indeg = {}
        for a, b in edges:
            adj.setdefault(a, []).append(b)
            indeg[b] = indeg.get(b, 0) + 1
            indeg.setdefault(a, indeg.get(a, 0))
        ready = [n for n, d in indeg.items() if d == 0]
        seen = 0
        while ready:
            n = ready.pop()
            seen += 1
            for m in adj.get(n, ()):
                indeg[m] -= 1
                if indeg[m] == 0:
                    ready.append(m)
        return seen == len(indeg)


def _substitute(rule: Rule, mapping) -> Rule:
    def sub(term):
        return mapping.get(term.name, term) if isinstance(term, Variable) else term

    def sub_atom(atom):
        if isinstance(atom, IdbAtom):
            return IdbAtom(atom.symbol, tuple(sub(t) for t in atom.args), atom.pos)
        return OrderAtom(sub(atom.left), sub(atom.right), atom.pos)

    return Rule(head=sub_atom(rule.head), body=tuple(sub_atom(a) for a in rule.body),
                pos=rule.pos)


def to_type_disjoint(program: Program):
    """Split every IDB by order type; returns (rewritten program, report)."""
    if program.mode != "order":
        raise ProgramError("type-disjoint rewrite needs an order-mode program")
    if program.constants:
        raise ProgramError("eliminate constants before the type-disjoint rewrite")

    arities = program.idb_symbols()
    copies = {
        sym: [(tag_name(sym, tag), tag) for tag in enumerate_order_types(k)]
        for sym, k in arities.items()
    }

    out_rules = []
    for rule in program.rules:
        for head_name, head_tag in copies[rule.head.symbol]:
            # identify variables tied by the head tag, then add its order atoms
            mapping = {}
            for cls in head_tag:
                keep = rule.head.args[cls[0]]
                for pos in cls[1:]:
                    mapping[rule.head.args[pos].name] = keep
            tagged = _substitute(rule, mapping)
            head_atoms = []
            for left_cls, right_cls in zip(head_tag, head_tag[1:]):
                left = tagged.head.args[left_cls[0]]
                right = tagged.head.args[right_cls[0]]
                head_atoms.append(OrderAtom(left, right))
            base = Rule(
                head=IdbAtom(head_name, tagged.head.args, tagged.head.pos),
                body=tagged.body + tuple(head_atoms),
                pos=tagged.pos,
            )
            body_idbs = base.body_idb_atoms()
            choice_lists = [copies[a.symbol] for a in body_idbs]
            for choice in itertools.product(*choice_lists):
                atom_map = dict(zip(body_idbs, choice))
                new_body = []
                facts = _RuleOrderFacts(base.variables())
                for atom in base.body:
                    if isinstance(atom, OrderAtom):
                        new_body.append(atom)
                        facts.add_edge(atom.left.name, atom.right.name)
                        continue
                    copy_name, tag = atom_map[atom]
                    new_body.append(IdbAtom(copy_name, atom.args, atom.pos))
                    for cls in tag:
                        first = atom.args[cls[0]].name
                        for pos in cls[1:]:
                            facts.merge(first, atom.args[pos].name)
                    for lc, rc in zip(tag, tag[1:]):
                        facts.add_edge(atom.args[lc[0]].name, atom.args[rc[0]].name)
                if facts.consistent():
                    deduped = tuple(dict.fromkeys(new_body))
                    out_rules.append(Rule(base.head, deduped, base.pos))

    out = Program(rules=tuple(out_rules))
    before = params(program)
    report = _build_report(program, out, copies, before)
    return out, report


def _build_report(original, rewritten, copies, before):
    n_idb = sum(len(c) for c in copies.values())
    after_rules = len(rewritten.rules)
    after = params(rewritten)
    report = TransformReport(
        n_idb=n_idb,
        n_rules=after_rules,
        max_idb_arity=before.max_idb_arity,
        max_rule_vars=after.max_rule_vars,
        max_body_idbs=after.max_body_idbs,
        mapping=tuple((sym, tuple(cps)) for sym, cps in copies.items()),
    )
    # the rewrite may not exceed the direct copy/combination counts
    assert report.n_idb <= before.n_idb * 3 ** (before.max_idb_arity ** 2)
    assert report.n_rules <= (
        3 ** (before.max_idb_arity ** 2 * (before.max_body_idbs + 1)) * before.n_rules
    )
    assert report.max_rule_vars <= before.max_rule_vars
    assert report.max_body_idbs <= before.max_body_idbs
    return report


def eliminate_constants(program: Program) -> Program:
    """Thread the declared constants through every IDB as fresh lead variables.

    Arities grow by the number of declared constants even when a rule never
    mentions them; the rewrite is uniform so that all rule applications agree
    on the constants' values.
    """
    if program.mode != "order":
        raise ProgramError("constants can only be eliminated in order mode")
    names = program.constants
    if not names:
        return program
    diags = validate(program)
    if diags:
        raise ProgramError(str(diags[0]))

    used = {v for rule in program.rules for v in rule.variables()}
    fresh = []
    for name in names:
        candidate = name[:1].upper() + name[1:]
        while candidate in used:
            candidate += "x"
        used.add(candidate)
        fresh.append(Variable(candidate))
    by_name = dict(zip(names, fresh))

    def fix_term(term):
        if isinstance(term, Constant):
            return by_name[term.name]
        return term

    def fix_atom(atom):
        if isinstance(atom, IdbAtom):
            args = tuple(fresh) + tuple(fix_term(t) for t in atom.args)
            return IdbAtom(atom.symbol, args, atom.pos)
        return OrderAtom(fix_term(atom.left), fix_term(atom.right), atom.pos)

    rules = tuple(
        Rule(head=fix_atom(r.head), body=tuple(fix_atom(a) for a in r.body), pos=r.pos)
        for r in program.rules
    )
    return Program(rules=rules)
