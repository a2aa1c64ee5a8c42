"""Operator recipes: curve-independent descriptions of inertia operators.

Grammar (whitespace is ignored)::

    recipe   := "l2"
              | "sobolev(" int "," "[" float ("," float)* "]" ")"
              | "almost_local(" tag ")"
              | "prescribed(" splitting "," recipe ")"
    splitting:= "tan_nor" | "arc0"
    tag      := "1" | "1+kappa^2" | "length" | "length*(1+kappa^2)"

A recipe builds a :class:`~curvemetrics.linops.LinOp` on any curve, which is
what the reparametrization and path code needs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .curve import DiscreteCurve
from .errors import CurveMetricsError, InvalidRecipe
from .linops import LinOp, almost_local_operator, identity, sobolev_operator

ALMOST_LOCAL_TAGS = {
    "1": lambda c: np.ones(c.n),
    "1+kappa^2": lambda c: 1.0 + c.curvature**2,
    "length": lambda c: np.full(c.n, c.total_length),
    "length*(1+kappa^2)": lambda c: c.total_length * (1.0 + c.curvature**2),
}
SPLITTINGS = ("tan_nor", "arc0")


@dataclass(frozen=True)
class Recipe:
    kind: str
    l: int = 0
    coeffs: tuple[float, ...] = ()
    tag: str = ""
    splitting: str = ""
    inner: "Recipe | None" = None

    def __str__(self) -> str:
        if self.kind == "l2":
            return "l2"
        if self.kind == "sobolev":
            return f"sobolev({self.l},[{','.join(repr(x) for x in self.coeffs)}])"
        if self.kind == "almost_local":
            return f"almost_local({self.tag})"
        return f"prescribed({self.splitting},{self.inner})"

    @property
    def needs_constant_speed(self) -> bool:
        if self.kind == "prescribed":
            return self.splitting == "arc0" or self.inner.needs_constant_speed
        return False

    def build(self, c: DiscreteCurve) -> LinOp:
        if self.kind == "l2":
            return identity(c)
        if self.kind == "sobolev":
            return sobolev_operator(c, self.l, self.coeffs)
        if self.kind == "almost_local":
            return almost_local_operator(c, ALMOST_LOCAL_TAGS[self.tag](c))
        from .metrics import prescribed_operator
        from .splittings import make_splitting

        return prescribed_operator(make_splitting(c, self.splitting), self.inner.build(c))

    __call__ = build


def _normalize(text: str) -> str:
    text = re.sub(r"\s+", "", text)
    return text.replace("κ", "kappa").replace("²", "^2")


def _split_top(args: str) -> list[str]:
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(args):
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
            if depth < 0:
                raise InvalidRecipe(f"unbalanced brackets in {args!r}")
        elif ch == "," and depth == 0:
            parts.append(args[start:i])
            start = i + 1
    if depth:
        raise InvalidRecipe(f"unbalanced brackets in {args!r}")
    parts.append(args[start:])
    return parts


def parse_recipe(text: str) -> Recipe:
    """Parse and validate a recipe string; raises :class:`InvalidRecipe`."""
    s = _normalize(text)
    if s == "l2":
        return Recipe("l2")
    m = re.fullmatch(r"(\w+)\((.*)\)", s)
    if not m:
        raise InvalidRecipe(f"cannot parse recipe {text!r}")
    name, body = m.groups()
    if name == "sobolev":
        parts = _split_top(body)
        if len(parts) != 2 or not (parts[1].startswith("[") and parts[1].endswith("]")):
            raise InvalidRecipe(f"expected sobolev(l,[c0,...,cl]), got {text!r}")
        try:
            l = int(parts[0])
            coeffs = tuple(float(x) for x in parts[1][1:-1].split(",") if x)
        except ValueError as exc:
            raise InvalidRecipe(f"bad sobolev parameters in {text!r}") from exc
        if l < 0 or len(coeffs) != l + 1 or coeffs[0] <= 0 or any(x < 0 for x in coeffs):
            raise InvalidRecipe(f"invalid sobolev order/coefficients in {text!r}")
        return Recipe("sobolev", l=l, coeffs=coeffs)
    if name == "almost_local":
        if body not in ALMOST_LOCAL_TAGS:
            raise InvalidRecipe(f"unknown almost_local tag {body!r}; known: {sorted(ALMOST_LOCAL_TAGS)}")
        return Recipe("almost_local", tag=body)
    if name == "prescribed":
        parts = _split_top(body)
        if len(parts) != 2 or parts[0] not in SPLITTINGS:
            raise InvalidRecipe(f"expected prescribed(tan_nor|arc0, recipe), got {text!r}")
        return Recipe("prescribed", splitting=parts[0], inner=parse_recipe(parts[1]))
    raise InvalidRecipe(f"unknown recipe kind {name!r}")


def as_builder(recipe):
    """Accept a Recipe, a recipe string or any callable ``curve -> LinOp``."""
    if isinstance(recipe, str):
        return parse_recipe(recipe)
    if callable(recipe):
        return recipe
    raise CurveMetricsError(f"not an operator recipe: {recipe!r}")
