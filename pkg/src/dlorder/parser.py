"""Parser for the .dl program text format.

Grammar (UTF-8, ``%`` line comments)::

    program  := (decl | bind | rule)*
    decl     := "@const" IDENT ("," IDENT)* "."
    bind     := "@bind" IDENT "=" LITERAL "."
    rule     := head ( ":-" body )? "."
    head     := IDENT "(" terms? ")" | IDENT
    body     := literal ("," literal)*
    literal  := IDENT "(" terms ")" | term "<" term | relset "(" term "," term ")"
    relset   := "[" REL ("," REL)* "]" | REL
    terms    := term ("," term)*
    term     := IDENT            (uppercase-initial = variable, else constant)

Identifiers match ``[A-Za-z][A-Za-z0-9_@]*``; the ``@`` is admitted so that
the IDB copies produced by the type-disjoint rewrite stay parseable.
"""
from __future__ import annotations

from .errors import ParseError
from .program import (
    RESERVED_RELATION_NAMES,
    IdbAtom,
    IntervalAtom,
    OrderAtom,
    Program,
    Rule,
    make_term,
)

_PUNCT = {"(", ")", ",", ".", "<", "[", "]", "=", "@", "/", "-"}


class _Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col

    def __repr__(self):
        return f"{self.kind}({self.text!r})@{self.line}:{self.col}"


def _is_ident_start(ch):
    return ch.isalpha()


def _is_ident_char(ch):
    return ch.isalnum() or ch in "_@"


def tokenize(text: str) -> list:
    tokens = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            i += 1
            col += 1
        elif ch == "%":
            while i < n and text[i] != "\n":
                i += 1
        elif ch == ":" and text[i:i + 2] == ":-":
            tokens.append(_Token(":-", ":-", line, col))
            i += 2
            col += 2
        elif ch in _PUNCT:
            tokens.append(_Token(ch, ch, line, col))
            i += 1
            col += 1
        elif _is_ident_start(ch):
            j = i
            while j < n and _is_ident_char(text[j]):
                j += 1
            tokens.append(_Token("IDENT", text[i:j], line, col))
            col += j - i
            i = j
        elif ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(_Token("INT", text[i:j], line, col))
            col += j - i
            i = j
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("EOF", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = tokenize(text)
        self.pos = 0
        self.constants = []
        self.binds = []
        self.rules = []
        self.arities = {}

    def peek(self, ahead=0):
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self):
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def expect(self, kind):
        tok = self.next()
        if tok.kind != kind:
            raise ParseError(f"expected {kind!r}, found {tok.text!r}", tok.line, tok.col)
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        raise ParseError(message, tok.line, tok.col)

    def parse(self):
        while self.peek().kind != "EOF":
            if self.peek().kind == "@":
                self.directive()
            else:
                self.rule()
        return Program(
            rules=tuple(self.rules),
            constants=tuple(self.constants),
            bind_directives=tuple(self.binds),
        )

    def directive(self):
        self.expect("@")
        name = self.expect("IDENT")
        if name.text == "const":
            while True:
                tok = self.expect("IDENT")
                if tok.text[:1].isupper():
                    self.error(f"constant '{tok.text}' must be lowercase-initial", tok)
                if tok.text in self.constants:
                    self.error(f"constant '{tok.text}' declared twice", tok)
                self.constants.append(tok.text)
                if self.peek().kind == ",":
                    self.next()
                else:
                    break
            self.expect(".")
        elif name.text == "bind":
            target = self.expect("IDENT")
            self.expect("=")
            # element literals are model-specific; capture raw text up to "."
            parts = []
            while self.peek().kind not in (".", "EOF"):
                parts.append(self.next().text)
            self.expect(".")
            self.binds.append((target.text, "".join(parts)))
        else:
            self.error(f"unknown directive '@{name.text}'", name)

    def rule(self):
        head = self.atom()
        if head.symbol in RESERVED_RELATION_NAMES:
            self.error(f"reserved interval relation '{head.symbol}' cannot head a rule")
        body = []
        if self.peek().kind == ":-":
            self.next()
            body.append(self.literal())
            while self.peek().kind == ",":
                self.next()
                body.append(self.literal())
        self.expect(".")
        self.rules.append(Rule(head=head, body=tuple(body), pos=(head.pos or None)))

    def literal(self):
        tok = self.peek()
        if tok.kind == "[":
            return self.interval_atom(self.relation_set())
        if tok.kind == "IDENT":
            if self.peek(1).kind == "(":
                if tok.text in RESERVED_RELATION_NAMES:
                    self.next()
                    return self.interval_atom(frozenset([tok.text]), pos=(tok.line, tok.col))
                return self.atom()
            if self.peek(1).kind == "<":
                left = self.term()
                self.expect("<")
                right = self.term()
                return OrderAtom(left, right, pos=(tok.line, tok.col))
            # bare identifier: 0-ary IDB atom
            return self.atom()
        self.error(f"expected an atom, found {tok.text!r}", tok)

    def relation_set(self):
        self.expect("[")
        rels = []
        while True:
            tok = self.expect("IDENT")
            if tok.text not in RESERVED_RELATION_NAMES:
                self.error(f"unknown interval relation '{tok.text}'", tok)
            rels.append(tok.text)
            if self.peek().kind == ",":
                self.next()
            else:
                break
        self.expect("]")
        return frozenset(rels)

    def interval_atom(self, relations, pos=None):
        lp = self.expect("(")
        left = self.term()
        self.expect(",")
        right = self.term()
        self.expect(")")
        return IntervalAtom(relations, left, right, pos=pos or (lp.line, lp.col))

    def atom(self):
        name = self.expect("IDENT")
        args = []
        if self.peek().kind == "(":
            self.next()
            if self.peek().kind != ")":
                args.append(self.term())
                while self.peek().kind == ",":
                    self.next()
                    args.append(self.term())
            self.expect(")")
        known = self.arities.setdefault(name.text, len(args))
        if known != len(args):
            self.error(
                f"'{name.text}' used with arity {len(args)}, declared arity {known}",
                name)
        return IdbAtom(name.text, tuple(args), pos=(name.line, name.col))

    def term(self):
        tok = self.expect("IDENT")
        term = make_term(tok.text)
        if not tok.text[:1].isupper() and tok.text not in self.constants:
            self.error(f"undeclared constant '{tok.text}'", tok)
        return term


def parse(text: str) -> Program:
    """Parse program text into a structurally valid Program.

    Raises ParseError (with position) on syntax errors, arity mismatches,
    and undeclared constants.
    """
    return _Parser(text).parse()
