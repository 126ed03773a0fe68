"""Allocation rules on a linear river.

Agents are ordered upstream to downstream; the last agent is the mouth.  All
rules work unchanged in exact (Fraction) and float mode: parameters are
coerced into the backend of the problem they are applied to.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .core import (
    Allocation,
    ParameterOutOfRange,
    Problem,
    ValidationError,
    format_quantity,
    make_allocation,
    to_quantity,
)

__all__ = [
    "GammaOutOfRange",
    "GammaFunction",
    "LinearGamma",
    "CapGamma",
    "PiecewiseLinearGamma",
    "OpaqueGamma",
    "parse_gamma_function",
    "proportional",
    "full_transfer",
    "geometric",
    "geometric_bubble_oracle",
    "averaging",
    "generalized_geometric",
    "augmented_claims",
    "RuleSpec",
    "parse_rule_spec",
]


class GammaOutOfRange(ValidationError):
    """A retention function returned a value outside ``[0, t]``."""

    def __init__(self, t, value=None) -> None:
        self.t = t
        self.value = value
        super().__init__(f"retention function violates 0 <= G(t) <= t at t={t} (got {value})")


def _param(value, p: Problem, name: str):
    q = to_quantity(value, p.exact)
    if not 0 <= q <= 1:
        raise ParameterOutOfRange(name, value)
    return q


# ---------------------------------------------------------------------------
# Retention functions for generalized geometric rules
# ---------------------------------------------------------------------------


class GammaFunction:
    """A map ``t -> G(t)`` with ``0 <= G(t) <= t``, checked on every call."""

    spec: str = "?"

    def _raw(self, t):
        raise NotImplementedError

    def __call__(self, t):
        value = self._raw(t)
        if value < 0 or value > t:
            raise GammaOutOfRange(t, value)
        return value

    def __str__(self) -> str:
        return self.spec


@dataclass(frozen=True)
class LinearGamma(GammaFunction):
    """``G(t) = gamma * t``; reproduces the plain geometric rule."""

    gamma: object

    def __post_init__(self):
        if not 0 <= self.gamma <= 1:
            raise ParameterOutOfRange("gamma", self.gamma)

    def _raw(self, t):
        return _match(self.gamma, t) * t

    @property
    def spec(self) -> str:
        return f"linear:{format_quantity(self.gamma)}"


@dataclass(frozen=True)
class CapGamma(GammaFunction):
    """``G(t) = min(t, cap)``."""

    cap: object

    def __post_init__(self):
        if self.cap < 0:
            raise GammaOutOfRange(self.cap, self.cap)

    def _raw(self, t):
        return min(t, _match(self.cap, t))

    @property
    def spec(self) -> str:
        return f"cap:{format_quantity(self.cap)}"


@dataclass(frozen=True)
class PiecewiseLinearGamma(GammaFunction):
    """Linear interpolation through ``breakpoints``.

    The origin is prepended when the first breakpoint is not at ``t = 0``.
    Beyond the last breakpoint the final segment's slope is continued, so
    validity is decided statically: every breakpoint must satisfy
    ``0 <= y <= t`` and the final slope must lie in ``[0, 1]``.
    """

    breakpoints: tuple = field()

    def __post_init__(self):
        pts = sorted((t, y) for t, y in self.breakpoints)
        if not pts:
            raise ValidationError("piecewise-linear retention needs at least one breakpoint")
        if pts[0][0] != 0:
            pts.insert(0, (pts[0][0] * 0, pts[0][1] * 0))
        ts = [t for t, _ in pts]
        if len(set(ts)) != len(ts):
            raise ValidationError("duplicate breakpoint abscissa")
        for t, y in pts:
            if t < 0 or y < 0 or y > t:
                raise GammaOutOfRange(t, y)
        if len(pts) == 1:
            slope = 0
        else:
            (t0, y0), (t1, y1) = pts[-2], pts[-1]
            slope = (y1 - y0) / (t1 - t0)
        if not 0 <= slope <= 1:
            raise ValidationError(f"final slope {slope} must lie in [0, 1]")
        object.__setattr__(self, "breakpoints", tuple(pts))
        object.__setattr__(self, "_slope", slope)

    def _raw(self, t):
        pts = self.breakpoints
        t_last, y_last = pts[-1]
        if t >= t_last:
            return _match(y_last, t) + _match(self._slope, t) * (t - _match(t_last, t))
        for (t0, y0), (t1, y1) in zip(pts, pts[1:]):
            if t0 <= t <= t1:
                t0, y0, t1, y1 = (_match(v, t) for v in (t0, y0, t1, y1))
                return y0 + (y1 - y0) * (t - t0) / (t1 - t0)
        raise GammaOutOfRange(t)

    @property
    def spec(self) -> str:
        body = ",".join(f"{format_quantity(t)}:{format_quantity(y)}" for t, y in self.breakpoints)
        return f"pwl:{body}"


class OpaqueGamma(GammaFunction):
    """Arbitrary callable; the bound is only checked where it is evaluated."""

    def __init__(self, fn: Callable, name: str = "opaque") -> None:
        self.fn = fn
        self.spec = name

    def _raw(self, t):
        return self.fn(t)


def _match(value, like):
    # Keep Fraction arithmetic exact; fall back to float when ``like`` is a float.
    if isinstance(like, float):
        return float(value)
    return value


def parse_gamma_function(text: str, exact: bool = True) -> GammaFunction:
    """Parse ``linear:G``, ``cap:A`` or ``pwl:t0:y0,t1:y1,...``."""
    kind, _, rest = text.strip().partition(":")
    try:
        if kind == "linear":
            return LinearGamma(to_quantity(rest, exact))
        if kind == "cap":
            return CapGamma(to_quantity(rest, exact))
        if kind == "pwl":
            pts = []
            for chunk in rest.split(","):
                t, y = chunk.split(":")
                pts.append((to_quantity(t, exact), to_quantity(y, exact)))
            return PiecewiseLinearGamma(tuple(pts))
    except (ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"malformed retention function {text!r}: {exc}") from exc
    raise ValidationError(f"unknown retention function {text!r} (expected linear:, cap: or pwl:)")


# ---------------------------------------------------------------------------
# Rules
# ---------------------------------------------------------------------------


def proportional(p: Problem) -> Allocation:
    ratio = p.ratio
    return make_allocation(p, [c * ratio for c in p.claims])


def full_transfer(p: Problem) -> Allocation:
    zero = p.budget * 0
    return make_allocation(p, [zero] * (p.n - 1) + [p.budget])


def augmented_claims(claims: Sequence, gamma) -> list:
    """Own claim plus the geometrically decayed claims of every upstream agent.

    Computed from the closed-form sum with powers built by repeated
    multiplication, independently of the recursion in
    :func:`geometric_bubble_oracle`.
    """
    keep = 1 - gamma
    out = []
    for i, c in enumerate(claims):
        total = c
        power = keep ** 0
        for k in range(i - 1, -1, -1):
            power = power * keep
            total = total + power * claims[k]
        out.append(total)
    return out


def geometric(p: Problem, gamma) -> Allocation:
    """Geometric rule: each non-mouth agent keeps a share ``gamma`` of its
    augmented claim and the mouth keeps everything that reaches it."""
    g = _param(gamma, p, "gamma")
    ratio = p.ratio
    augmented = augmented_claims(p.claims, g)
    awards = [g * a * ratio for a in augmented[:-1]]
    awards.append(augmented[-1] * ratio)
    return make_allocation(p, awards)


def geometric_bubble_oracle(p: Problem, gamma) -> Allocation:
    """Sequential bubbling-down process, kept as an independent oracle."""
    g = _param(gamma, p, "gamma")
    ratio = p.ratio
    retained = []
    carried = p.budget * 0
    for i, c in enumerate(p.claims):
        mass = c + carried
        if i == p.n - 1:
            retained.append(mass)
        else:
            retained.append(g * mass)
            carried = mass - g * mass
    return make_allocation(p, [r * ratio for r in retained])


def averaging(p: Problem, lam) -> Allocation:
    """Convex combination of the proportional and full-transfer rules."""
    lam = _param(lam, p, "lambda")
    prop = proportional(p).awards
    ft = full_transfer(p).awards
    return make_allocation(p, [lam * a + (1 - lam) * b for a, b in zip(prop, ft)])


def generalized_retained(claims: Sequence, gamma_fn: GammaFunction) -> list:
    """Pre-scaling shares: each agent applies ``gamma_fn`` to its own claim
    plus every unretained upstream residual; the mouth keeps the rest."""
    retained = []
    residual = claims[0] * 0
    n = len(claims)
    for i, c in enumerate(claims):
        mass = c + residual
        r = mass if i == n - 1 else gamma_fn(mass)
        retained.append(r)
        residual = mass - r
    return retained


def generalized_geometric(p: Problem, gamma_fn: GammaFunction) -> Allocation:
    ratio = p.ratio
    return make_allocation(p, [r * ratio for r in generalized_retained(p.claims, gamma_fn)])


# ---------------------------------------------------------------------------
# Rule identifiers
# ---------------------------------------------------------------------------

_KINDS = ("proportional", "full_transfer", "geometric", "averaging", "generalized_geometric")
_ALIASES = {
    "prop": "proportional",
    "proportional": "proportional",
    "ft": "full_transfer",
    "full_transfer": "full_transfer",
    "full-transfer": "full_transfer",
    "geometric": "geometric",
    "geo": "geometric",
    "averaging": "averaging",
    "avg": "averaging",
    "gengeo": "generalized_geometric",
    "generalized_geometric": "generalized_geometric",
}


@dataclass(frozen=True)
class RuleSpec:
    """A rule together with its parameter, callable on any problem.

    ``param`` is ``gamma`` for geometric, ``lambda`` for averaging and a
    :class:`GammaFunction` for generalized geometric rules.
    """

    kind: str
    param: object = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValidationError(f"unknown rule kind {self.kind!r}")
        if self.kind in ("geometric", "averaging"):
            if self.param is None or not 0 <= self.param <= 1:
                raise ParameterOutOfRange("gamma" if self.kind == "geometric" else "lambda", self.param)
        elif self.kind == "generalized_geometric":
            if not isinstance(self.param, GammaFunction):
                raise ValidationError("generalized geometric rule needs a GammaFunction")

    def __call__(self, p: Problem) -> Allocation:
        if self.kind == "proportional":
            return proportional(p)
        if self.kind == "full_transfer":
            return full_transfer(p)
        if self.kind == "geometric":
            return geometric(p, self.param)
        if self.kind == "averaging":
            return averaging(p, self.param)
        return generalized_geometric(p, self.param)

    @property
    def name(self) -> str:
        if self.kind == "proportional":
            return "prop"
        if self.kind == "full_transfer":
            return "ft"
        if self.kind == "generalized_geometric":
            return f"gengeo:{self.param}"
        return f"{self.kind}:{format_quantity(self.param)}"

    def __str__(self) -> str:
        return self.name


def parse_rule_spec(text: str) -> RuleSpec:
    """Parse ``prop``, ``ft``, ``geometric:0.5``, ``averaging:1/4`` or
    ``gengeo:cap:1``.  Numeric parameters are read as exact rationals."""
    head, _, rest = text.strip().partition(":")
    kind = _ALIASES.get(head)
    if kind is None:
        raise ValidationError(f"unknown rule {head!r}")
    if kind in ("proportional", "full_transfer"):
        if rest:
            raise ValidationError(f"rule {head!r} takes no parameter")
        return RuleSpec(kind)
    if not rest:
        raise ValidationError(f"rule {head!r} needs a parameter, e.g. {head}:0.5")
    if kind == "generalized_geometric":
        return RuleSpec(kind, parse_gamma_function(rest))
    try:
        value = Fraction(rest)
    except ValueError as exc:
        raise ValidationError(f"bad parameter {rest!r} for rule {head!r}") from exc
    return RuleSpec(kind, value)
