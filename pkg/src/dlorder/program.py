"""Datalog AST for programs over linear orders, plus validation and parameters.

A program is a sequence of rules over IDB atoms and a single kind of EDB:
either strict order atoms ``X < Y`` ("order mode") or Allen interval atoms
("interval mode"). Constants must be declared with ``@const`` before use.
All AST nodes are immutable and hashable; source positions are carried for
diagnostics but ignored by equality.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import ProgramError

#: The 13 Allen basic relation names; reserved, never usable as IDB symbols.
RESERVED_RELATION_NAMES = (
    "p", "m", "o", "d", "s", "f", "eq", "pi", "mi", "oi", "di", "si", "fi",
)

SourcePos = tuple  # (line, col), 1-based


@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class Constant:
    name: str


Term = Union[Variable, Constant]


def is_variable_name(name: str) -> bool:
    """Uppercase-initial identifiers are variables, lowercase-initial are constants."""
    return name[:1].isupper()


def make_term(name: str) -> Term:
    return Variable(name) if is_variable_name(name) else Constant(name)


@dataclass(frozen=True)
class IdbAtom:
    symbol: str
    args: tuple
    pos: Optional[SourcePos] = field(default=None, compare=False)

    @property
    def arity(self) -> int:
        return len(self.args)


@dataclass(frozen=True)
class OrderAtom:
    left: Term
    right: Term
    pos: Optional[SourcePos] = field(default=None, compare=False)


@dataclass(frozen=True)
class IntervalAtom:
    relations: frozenset
    left: Term
    right: Term
    pos: Optional[SourcePos] = field(default=None, compare=False)


Atom = Union[IdbAtom, OrderAtom, IntervalAtom]


@dataclass(frozen=True)
class Rule:
    head: IdbAtom
    body: tuple = ()
    pos: Optional[SourcePos] = field(default=None, compare=False)

    def variables(self) -> tuple:
        """Distinct variable names in head and body, in first-occurrence order."""
        seen = {}
        for term in self._terms():
            if isinstance(term, Variable):
                seen.setdefault(term.name, None)
        return tuple(seen)

    def constants(self) -> tuple:
        seen = {}
        for term in self._terms():
            if isinstance(term, Constant):
                seen.setdefault(term.name, None)
        return tuple(seen)

    def _terms(self):
        yield from self.head.args
        for atom in self.body:
            if isinstance(atom, IdbAtom):
                yield from atom.args
            else:
                yield atom.left
                yield atom.right

    def body_idb_atoms(self) -> tuple:
        return tuple(a for a in self.body if isinstance(a, IdbAtom))


@dataclass(frozen=True)
class Program:
    rules: tuple = ()
    constants: tuple = ()
    bind_directives: tuple = ()  # ((constant name, element literal), ...)

    def idb_symbols(self) -> dict:
        """Map from IDB symbol to arity, in first-occurrence order.

        Every parenthesized symbol is an IDB; the only EDBs are ``<`` and the
        interval relations, which have their own atom kinds.
        """
        arities = {}
        for rule in self.rules:
            for atom in (rule.head, *rule.body_idb_atoms()):
                arities.setdefault(atom.symbol, atom.arity)
        return arities

    @property
    def mode(self) -> str:
        """"interval" if any Allen atom occurs, else "order"."""
        for rule in self.rules:
            for atom in rule.body:
                if isinstance(atom, IntervalAtom):
                    return "interval"
        return "order"


@dataclass(frozen=True)
class ProgramParams:
    n_idb: int          # number of IDB symbols
    n_rules: int
    max_idb_arity: int
    max_rule_vars: int  # max distinct variables in a single rule
    max_body_idbs: int  # max IDB occurrences in one rule body
    length: int         # length of the canonical text encoding


@dataclass(frozen=True)
class Diagnostic:
    message: str
    pos: Optional[SourcePos] = None

    def __str__(self):
        if self.pos:
            return f"{self.pos[0]}:{self.pos[1]}: {self.message}"
        return self.message


def params(program: Program) -> ProgramParams:
    """Size parameters of a program; all are bounded by its encoded length."""
    arities = program.idb_symbols()
    return ProgramParams(
        n_idb=len(arities),
        n_rules=len(program.rules),
        max_idb_arity=max(arities.values(), default=0),
        max_rule_vars=max((len(r.variables()) for r in program.rules), default=0),
        max_body_idbs=max((len(r.body_idb_atoms()) for r in program.rules), default=0),
        length=len(format_program(program)),
    )


def validate(program: Program) -> list:
    """Well-formedness diagnostics; an empty list means the program is valid."""
    out = []
    declared = set(program.constants)
    seen_decl = set()
    for name in program.constants:
        if name in seen_decl:
            out.append(Diagnostic(f"constant '{name}' declared twice"))
        seen_decl.add(name)
        if is_variable_name(name):
            out.append(Diagnostic(f"constant '{name}' must be lowercase-initial"))

    arities = {}
    has_order = False
    has_interval = False
    for rule in program.rules:
        for atom in (rule.head, *rule.body):
            if isinstance(atom, IdbAtom):
                if atom.symbol == "<":
                    out.append(Diagnostic("reserved EDB used as IDB", atom.pos))
                if atom.symbol in RESERVED_RELATION_NAMES:
                    out.append(Diagnostic(
                        f"reserved interval relation '{atom.symbol}' used as IDB",
                        atom.pos))
                known = arities.setdefault(atom.symbol, atom.arity)
                if known != atom.arity:
                    out.append(Diagnostic(
                        f"'{atom.symbol}' used with arity {atom.arity}, "
                        f"declared arity {known}", atom.pos))
            elif isinstance(atom, OrderAtom):
                has_order = True
            else:
                has_interval = True
                bad = set(atom.relations) - set(RESERVED_RELATION_NAMES)
                if bad:
                    out.append(Diagnostic(
                        f"unknown interval relation(s): {sorted(bad)}", atom.pos))
        for name in rule.constants():
            if name not in declared:
                out.append(Diagnostic(f"undeclared constant '{name}'", rule.pos))
    if has_order and has_interval:
        out.append(Diagnostic("mixed atom modes: order and interval atoms in one program"))
    if has_interval and (declared or any(r.constants() for r in program.rules)):
        out.append(Diagnostic("constants are not supported in interval mode"))
    return out


def check_valid(program: Program) -> Program:
    """Raise ProgramError on the first diagnostic; convenience for pipelines."""
    diags = validate(program)
    if diags:
        raise ProgramError(str(diags[0]))
    return program


def format_term(term: Term) -> str:
    return term.name


def format_atom(atom: Atom) -> str:
    if isinstance(atom, IdbAtom):
        return f"{atom.symbol}({','.join(format_term(t) for t in atom.args)})"
    if isinstance(atom, OrderAtom):
        return f"{format_term(atom.left)} < {format_term(atom.right)}"
    rels = [r for r in RESERVED_RELATION_NAMES if r in atom.relations]
    name = rels[0] if len(rels) == 1 else "[" + ",".join(rels) + "]"
    return f"{name}({format_term(atom.left)},{format_term(atom.right)})"


def format_rule(rule: Rule) -> str:
    head = format_atom(rule.head)
    if not rule.body:
        return f"{head}."
    return f"{head} :- {', '.join(format_atom(a) for a in rule.body)}."


def format_program(program: Program) -> str:
    """Canonical text form; parsing it back yields an equal Program."""
    lines = []
    if program.constants:
        lines.append("@const " + ", ".join(program.constants) + ".")
    for name, literal in program.bind_directives:
        lines.append(f"@bind {name} = {literal}.")
    lines.extend(format_rule(r) for r in program.rules)
    return "\n".join(lines) + ("\n" if lines else "")
