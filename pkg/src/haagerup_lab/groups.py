"""Finitely generated groups in normal form: free, free-abelian, cyclic, and
direct products of these, with the word metric for the standard generators.

Group specs are written as ``F<k>``, ``Z^<d>`` (``Z`` alone means ``Z^1``)
and ``C<m>``, joined by ``x``::

    >>> spec = GroupSpec.parse("F2 x C3")
    >>> g = spec.element("ab;2")
    >>> g.word_length()
    3
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator

from .defaults import BALL_CAP
from .errors import InputError, ResourceError

FREE, ABELIAN, CYCLIC = "free", "abelian", "cyclic"

_TOKEN = re.compile(r"^(?:F(\d+)|Z(?:\^(\d+))?|C(\d+))$")


@dataclass(frozen=True)
class Factor:
    kind: str
    param: int

    def __post_init__(self):
        if self.kind not in (FREE, ABELIAN, CYCLIC):
            raise InputError(f"unknown factor kind {self.kind!r}")
        if self.param < 1:
            raise InputError(f"factor parameter must be >= 1, got {self.param}")
        if self.kind == FREE and self.param > 26:
            raise InputError("free rank above 26 has no letter encoding")

    def __str__(self):
        if self.kind == FREE:
            return f"F{self.param}"
        if self.kind == ABELIAN:
            return "Z" if self.param == 1 else f"Z^{self.param}"
        return f"C{self.param}"

    def identity(self):
        if self.kind == FREE:
            return ()
        if self.kind == ABELIAN:
            return (0,) * self.param
        return 0

    def generators(self) -> list:
        """Standard generators in a fixed order: x1, x1^-1, x2, x2^-1, ..."""
        if self.kind == FREE:
            gens = []
            for i in range(1, self.param + 1):
                gens += [(i,), (-i,)]
            return gens
        if self.kind == ABELIAN:
            gens = []
            for i in range(self.param):
                for s in (1, -1):
                    v = [0] * self.param
                    v[i] = s
                    gens.append(tuple(v))
            return gens
        m = self.param
        if m == 1:
            return []
        if m == 2:
            return [1]
        return [1, m - 1]

    def multiply(self, x, y):
        if self.kind == FREE:
            out = list(x)
            for letter in y:
                if out and out[-1] == -letter:
                    out.pop()
                else:
                    out.append(letter)
            return tuple(out)
        if self.kind == ABELIAN:
            return tuple(a + b for a, b in zip(x, y))
        return (x + y) % self.param

    def inverse(self, x):
        if self.kind == FREE:
            return tuple(-letter for letter in reversed(x))
        if self.kind == ABELIAN:
            return tuple(-a for a in x)
        return (-x) % self.param

    def length(self, x) -> int:
        if self.kind == FREE:
            return len(x)
        if self.kind == ABELIAN:
            return sum(abs(a) for a in x)
        return min(x, self.param - x)

    def format(self, x) -> str:
        if self.kind == FREE:
            if not x:
                return "1"
            return "".join(
                chr(ord("a") + l - 1) if l > 0 else chr(ord("A") - l - 1) for l in x
            )
        if self.kind == ABELIAN:
            return "(" + ",".join(str(a) for a in x) + ")"
        return str(x)

    def parse(self, token: str):
        token = token.strip()
        if self.kind == FREE:
            if token in ("", "1"):
                return ()
            word = []
            for ch in token:
                if "a" <= ch <= "z":
                    letter = ord(ch) - ord("a") + 1
                elif "A" <= ch <= "Z":
                    letter = -(ord(ch) - ord("A") + 1)
                else:
                    raise InputError(f"bad letter {ch!r} in free word {token!r}")
                if abs(letter) > self.param:
                    raise InputError(f"letter {ch!r} outside F{self.param}")
                word.append(letter)
            return self.multiply((), tuple(word))
        if self.kind == ABELIAN:
            inner = token.strip("()")
            try:
                vec = tuple(int(s) for s in inner.split(",")) if inner else ()
            except ValueError:
                raise InputError(f"bad integer tuple {token!r}") from None
            if len(vec) != self.param:
                raise InputError(f"expected {self.param} coordinates in {token!r}")
            return vec
        try:
            return int(token) % self.param
        except ValueError:
            raise InputError(f"bad residue {token!r}") from None

    def check(self, x):
        if self.kind == FREE:
            ok = isinstance(x, tuple) and all(
                isinstance(l, int) and 0 < abs(l) <= self.param for l in x
            )
            ok = ok and all(x[i] != -x[i + 1] for i in range(len(x) - 1))
        elif self.kind == ABELIAN:
            ok = isinstance(x, tuple) and len(x) == self.param
        else:
            ok = isinstance(x, int) and 0 <= x < self.param
        if not ok:
            raise InputError(f"{x!r} is not a normal form for {self}")


@dataclass(frozen=True)
class GroupSpec:
    factors: tuple[Factor, ...]

    def __post_init__(self):
        if not self.factors:
            raise InputError("a group spec needs at least one factor")

    @classmethod
    def parse(cls, text: str) -> "GroupSpec":
        factors = []
        for token in text.replace(" ", "").split("x"):
            m = _TOKEN.match(token)
            if not m:
                raise InputError(f"cannot parse group factor {token!r} in {text!r}")
            free, dim, order = m.groups()
            if free is not None:
                factors.append(Factor(FREE, int(free)))
            elif order is not None:
                factors.append(Factor(CYCLIC, int(order)))
            else:
                factors.append(Factor(ABELIAN, int(dim) if dim else 1))
        return cls(tuple(factors))

    def __str__(self):
        return " x ".join(str(f) for f in self.factors)

    def identity(self) -> "GroupElement":
        return GroupElement(self, tuple(f.identity() for f in self.factors))

    def generators(self) -> list["GroupElement"]:
        e = [f.identity() for f in self.factors]
        gens = []
        for i, f in enumerate(self.factors):
            for x in f.generators():
                parts = list(e)
                parts[i] = x
                gens.append(GroupElement(self, tuple(parts)))
        return gens

    def element(self, label: str) -> "GroupElement":
        tokens = label.split(";")
        if len(tokens) != len(self.factors):
            raise InputError(
                f"element {label!r} has {len(tokens)} tokens, {self} needs {len(self.factors)}"
            )
        return GroupElement(
            self, tuple(f.parse(t) for f, t in zip(self.factors, tokens))
        )

    def make(self, *parts) -> "GroupElement":
        """Build an element from raw per-factor normal forms, validating them."""
        for f, x in zip(self.factors, parts):
            f.check(x)
        if len(parts) != len(self.factors):
            raise InputError("wrong number of factor components")
        return GroupElement(self, tuple(parts))


@dataclass(frozen=True)
class GroupElement:
    spec: GroupSpec
    parts: tuple

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return multiply(self, other)

    def inverse(self) -> "GroupElement":
        return inverse(self)

    def word_length(self) -> int:
        return word_length(self)

    def is_identity(self) -> bool:
        return self == self.spec.identity()

    @property
    def label(self) -> str:
        return ";".join(f.format(x) for f, x in zip(self.spec.factors, self.parts))

    def __repr__(self):
        return f"<{self.label} in {self.spec}>"


def multiply(g: GroupElement, h: GroupElement) -> GroupElement:
    if g.spec != h.spec:
        raise InputError(f"cannot multiply elements of {g.spec} and {h.spec}")
    return GroupElement(
        g.spec,
        tuple(f.multiply(x, y) for f, x, y in zip(g.spec.factors, g.parts, h.parts)),
    )


def inverse(g: GroupElement) -> GroupElement:
    return GroupElement(
        g.spec, tuple(f.inverse(x) for f, x in zip(g.spec.factors, g.parts))
    )


def word_length(g: GroupElement) -> int:
    return sum(f.length(x) for f, x in zip(g.spec.factors, g.parts))


@dataclass(frozen=True)
class Ball:
    """The closed ball B(e, radius), in shortlex (breadth-first) order."""

    spec: GroupSpec
    radius: int
    elements: tuple[GroupElement, ...]
    lengths: tuple[int, ...]
    index: dict = field(compare=False, repr=False)

    def __len__(self):
        return len(self.elements)

    def __iter__(self) -> Iterator[GroupElement]:
        return iter(self.elements)

    def __contains__(self, g):
        return g in self.index

    def position(self, g: GroupElement) -> int:
        try:
            return self.index[g]
        except KeyError:
            raise InputError(f"{g.label} is not in the ball of radius {self.radius}") from None

    def sphere(self, r: int) -> list[GroupElement]:
        return [g for g, n in zip(self.elements, self.lengths) if n == r]

    @property
    def labels(self) -> list[str]:
        return [g.label for g in self.elements]


def ball(spec: GroupSpec, radius: int, cap: int = BALL_CAP) -> Ball:
    """Enumerate B(e, radius) breadth-first over the ordered standard generators.

    Raises :class:`ResourceError` as soon as the ball would exceed ``cap``.
    """
    if radius < 0:
        raise InputError("radius must be >= 0")
    gens = spec.generators()
    e = spec.identity()
    seen = {e: 0}
    order = [e]
    lengths = [0]
    queue = deque([e])
    while queue:
        g = queue.popleft()
        d = seen[g]
        if d == radius:
            continue
        for s in gens:
            h = g * s
            if h not in seen:
                seen[h] = d + 1
                order.append(h)
                lengths.append(d + 1)
                if len(order) > cap:
                    raise ResourceError(
                        f"ball of radius {radius} in {spec} exceeds the cap of {cap} elements"
                    )
                queue.append(h)
    return Ball(spec, radius, tuple(order), tuple(lengths), {g: i for i, g in enumerate(order)})
