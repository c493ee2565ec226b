"""Pluggable linearly ordered domains.

Four models are shipped: finite chains ``{0,..,n-1}``, the naturals, the
integers, and the rationals (dense without endpoints; elements are reduced
``Fraction`` values). All distance queries are capped: the engine never
needs a distance beyond its current rank bound, and uncapped distances can
be infinite.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Union

from .errors import ModelError

Element = Union[int, Fraction]

FINITE = "finite"
NATURALS = "nat"
INTEGERS = "int"
RATIONALS = "rat"

LT, EQ, GT = -1, 0, 1


@dataclass(frozen=True)
class OrderModel:
    kind: str
    size: int = 0  # only meaningful for finite chains
    bindings: tuple = field(default=())  # ((constant name, Element), ...)

    def __post_init__(self):
        if self.kind not in (FINITE, NATURALS, INTEGERS, RATIONALS):
            raise ModelError(f"unknown order model kind '{self.kind}'")
        if self.kind == FINITE and self.size < 1:
            raise ModelError("finite chain needs at least one element")

    @classmethod
    def from_spec(cls, spec: str, bindings=()) -> "OrderModel":
        """Build a model from a CLI spec string: finite:N, nat, int, rat."""
        spec = spec.strip()
        if spec.startswith("finite:"):
            try:
                n = int(spec.split(":", 1)[1])
            except ValueError:
                raise ModelError(f"bad finite model spec '{spec}'") from None
            return cls(FINITE, n, tuple(bindings))
        if spec in (NATURALS, INTEGERS, RATIONALS):
            return cls(spec, 0, tuple(bindings))
        raise ModelError(f"unknown model spec '{spec}'")

    @property
    def is_finite(self) -> bool:
        return self.kind == FINITE

    @property
    def is_dense(self) -> bool:
        return self.kind == RATIONALS

    @property
    def has_minimum(self) -> bool:
        return self.kind in (FINITE, NATURALS)

    @property
    def has_maximum(self) -> bool:
        return self.kind == FINITE

    def binding_map(self) -> Mapping[str, Element]:
        return dict(self.bindings)

    def with_bindings(self, mapping) -> "OrderModel":
        merged = dict(self.bindings)
        merged.update(mapping)
        return OrderModel(self.kind, self.size, tuple(sorted(merged.items())))

    def check_element(self, a: Element) -> Element:
        if self.kind == RATIONALS:
            if not isinstance(a, (int, Fraction)):
                raise ModelError(f"{a!r} is not a rational element")
            return Fraction(a)
        if not isinstance(a, int) or isinstance(a, bool):
            raise ModelError(f"{a!r} is not an element of this model")
        if self.kind == NATURALS and a < 0:
            raise ModelError(f"{a} is negative; not a natural")
        if self.kind == FINITE and not 0 <= a < self.size:
            raise ModelError(f"{a} outside the finite chain of size {self.size}")
        return a

    def compare(self, a: Element, b: Element) -> int:
        """Trichotomy: LT (-1), EQ (0), GT (1)."""
        a = self.check_element(a)
        b = self.check_element(b)
        return LT if a < b else (EQ if a == b else GT)

    def distance(self, a: Element, b: Element, cap: int) -> int:
        """min(cap, d(a, b)): the longest strictly increasing chain from a to b.

        Requires a <= b; dense models return cap for any a < b.
        """
        a = self.check_element(a)
        b = self.check_element(b)
        if a > b:
            raise ModelError(f"distance requires a <= b, got {a} > {b}")
        if a == b:
            return 0
        if self.kind == RATIONALS:
            return cap
        return min(cap, b - a)

    def boundary_distance(self, a: Element, side: str, cap: int) -> int:
        """min(cap, number of elements strictly below/above a).

        ``side`` is "below" or "above"; unbounded sides return cap.
        """
        a = self.check_element(a)
        if side == "below":
            if self.kind == FINITE or self.kind == NATURALS:
                return min(cap, a)
            return cap
        if side == "above":
            if self.kind == FINITE:
                return min(cap, self.size - 1 - a)
            return cap
        raise ModelError(f"unknown side {side!r}")

    def chain_steps(self, cap: int) -> int:
        """min(cap, longest strict chain anywhere in the domain)."""
        if self.kind == FINITE:
            return min(cap, self.size - 1)
        return cap

    def parse_element(self, text: str) -> Element:
        """Parse a canonical element literal; fractions are reduced."""
        text = text.strip()
        if self.kind == RATIONALS:
            try:
                return Fraction(text)
            except (ValueError, ZeroDivisionError):
                raise ModelError(f"malformed rational literal '{text}'") from None
        try:
            value = int(text)
        except ValueError:
            raise ModelError(f"malformed integer literal '{text}'") from None
        return self.check_element(value)

    def format_element(self, a: Element) -> str:
        return str(a)

    def elements(self):
        """Iterate the whole domain; finite chains only (oracle support)."""
        if self.kind != FINITE:
            raise ModelError("only finite chains are enumerable")
        return range(self.size)
