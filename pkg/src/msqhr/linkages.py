"""Interaction matrices for electric-dipole linkages between angular-momentum levels.

Sublevels are ordered by ascending magnetic quantum number in both sets.
The coupling between lower ``|J_l m_l>`` and upper ``|J_u m_u>`` is
``<J_l m_l; 1 q | J_u m_u> V_q`` with ``q = m_u - m_l`` selecting the
sigma+ (q=+1), pi (q=0) or sigma- (q=-1) amplitude.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from .errors import ValidationError
from .morris_shore import InteractionMatrix

__all__ = [
    "PolarizationAmplitudes",
    "TwoLevelLinkage",
    "LadderLinkage",
    "ExplicitLinkage",
    "LinkageSpec",
    "Block",
    "clebsch_gordan",
    "build_linkage",
    "coupled_blocks",
    "half_integer",
    "format_m",
]


def half_integer(x, name="value"):
    """Parse ``x`` (number or string like "3/2") into a half-integer Fraction."""
    try:
        f = Fraction(str(x)) if isinstance(x, str) else Fraction(x).limit_denominator(1000)
    except (ValueError, ZeroDivisionError, TypeError):
        raise ValidationError(f"{name}={x!r} is not a number") from None
    if (2 * f).denominator != 1:
        raise ValidationError(f"{name}={x!r} is not a half-integer")
    return f


def format_m(m):
    m = Fraction(m)
    if m.denominator == 1:
        return f"{int(m):+d}" if m else "0"
    return f"{'+' if m > 0 else '-'}{abs(m.numerator)}/{m.denominator}"


def _fact(x):
    return math.factorial(int(x))


def clebsch_gordan(j1, m1, j2, m2, J, M):
    """Clebsch-Gordan coefficient ``<j1 m1; j2 m2 | J M>`` (Condon-Shortley).

    Evaluated with Racah's closed-form sum in exact rational arithmetic.
    Returns 0 when ``M != m1 + m2`` or the triangle rule fails.

    Raises:
        ValidationError: arguments are not half-integers or ``|m| > j``.
    """
    j1, m1, j2, m2, J, M = (
        half_integer(x, n) for x, n in zip((j1, m1, j2, m2, J, M), ("j1", "m1", "j2", "m2", "J", "M"))
    )
    for j, m, n in ((j1, m1, "1"), (j2, m2, "2"), (J, M, "")):
        if j < 0 or abs(m) > j or (j - m).denominator != 1:
            raise ValidationError(f"invalid angular momentum pair j{n}={j}, m{n}={m}")
    if M != m1 + m2:
        return 0.0
    if J < abs(j1 - j2) or J > j1 + j2 or (j1 + j2 + J).denominator != 1:
        return 0.0

    pre = Fraction(
        (2 * J + 1) * _fact(J + j1 - j2) * _fact(J - j1 + j2) * _fact(j1 + j2 - J),
        _fact(j1 + j2 + J + 1),
    )
    pre *= _fact(J + M) * _fact(J - M) * _fact(j1 - m1) * _fact(j1 + m1) * _fact(j2 - m2) * _fact(j2 + m2)
    total = Fraction(0)
    k_min = max(0, int(j2 - J - m1), int(j1 - J + m2))
    k_max = min(int(j1 + j2 - J), int(j1 - m1), int(j2 + m2))
    for k in range(k_min, k_max + 1):
        den = (
            _fact(k) * _fact(j1 + j2 - J - k) * _fact(j1 - m1 - k) * _fact(j2 + m2 - k)
            * _fact(J - j2 + m1 + k) * _fact(J - j1 - m2 + k)
        )
        total += Fraction((-1) ** k, den)
    if total == 0:
        return 0.0
    return math.copysign(math.sqrt(pre * total * total), total)


@dataclass(frozen=True)
class PolarizationAmplitudes:
    """Field amplitudes (1/T) for sigma+, pi and sigma- light."""

    plus: complex = 0.0
    zero: complex = 0.0
    minus: complex = 0.0

    def __post_init__(self):
        for name in ("plus", "zero", "minus"):
            v = complex(getattr(self, name))
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise ValidationError(f"polarization amplitude {name} is not finite")
            object.__setattr__(self, name, v)

    def by_q(self, q):
        return {1: self.plus, 0: self.zero, -1: self.minus}[q]


@dataclass(frozen=True)
class TwoLevelLinkage:
    J_lower: Fraction
    J_upper: Fraction
    pol: PolarizationAmplitudes

    def __post_init__(self):
        jl = half_integer(self.J_lower, "J_lower")
        ju = half_integer(self.J_upper, "J_upper")
        if jl < 0 or ju < 0:
            raise ValidationError("angular momenta must be nonnegative")
        if abs(jl - ju) > 1 or (jl - ju).denominator != 1:
            raise ValidationError(f"J={jl} <-> J={ju} is not an electric-dipole transition")
        object.__setattr__(self, "J_lower", jl)
        object.__setattr__(self, "J_upper", ju)


@dataclass(frozen=True)
class LadderLinkage:
    """J=0 <-> J=1 <-> J=0 ladder; the J=1 sublevels are the lower set.

    ``first`` couples the J=1 sublevels to one J=0 end, ``second`` to the
    other. Rows follow the polarization order (+, 0, -) of the amplitudes.
    """

    first: PolarizationAmplitudes
    second: PolarizationAmplitudes


@dataclass(frozen=True)
class ExplicitLinkage:
    V: np.ndarray


LinkageSpec = Union[TwoLevelLinkage, LadderLinkage, ExplicitLinkage]


def _two_level(linkage):
    jl, ju = linkage.J_lower, linkage.J_upper
    ml = [-jl + k for k in range(int(2 * jl) + 1)]
    mu = [-ju + k for k in range(int(2 * ju) + 1)]
    v = np.zeros((len(ml), len(mu)), dtype=complex)
    for i, a in enumerate(ml):
        for j, b in enumerate(mu):
            q = b - a
            if abs(q) <= 1:
                v[i, j] = clebsch_gordan(jl, a, 1, q, ju, b) * linkage.pol.by_q(int(q))
    return InteractionMatrix(v, tuple(format_m(m) for m in ml), tuple(format_m(m) for m in mu))


def build_linkage(linkage):
    """Interaction matrix for a linkage description.

    An explicit matrix is passed through unchanged, including an all-zero
    one (a legitimate uncoupled reference problem).

    Raises:
        ValidationError: every polarization amplitude vanishes, or the linkage
            is malformed.
    """
    if isinstance(linkage, ExplicitLinkage):
        return linkage.V if isinstance(linkage.V, InteractionMatrix) else InteractionMatrix(linkage.V)
    if isinstance(linkage, TwoLevelLinkage):
        im = _two_level(linkage)
    elif isinstance(linkage, LadderLinkage):
        f, s = linkage.first, linkage.second
        v = np.array([[f.plus, s.plus], [f.zero, s.zero], [f.minus, s.minus]], dtype=complex)
        im = InteractionMatrix(v, ("+1", "0", "-1"), ("a", "b"))
    else:
        raise ValidationError(f"unknown linkage description {linkage!r}")
    if not np.any(im.V != 0):
        raise ValidationError("linkage has no nonzero coupling")
    return im


@dataclass(frozen=True)
class Block:
    """A connected group of lower and upper sublevels (indices into V)."""

    lower: tuple
    upper: tuple

    @property
    def shape(self):
        return len(self.lower), len(self.upper)


def coupled_blocks(im, tol=0.0):
    """Split a linkage into mutually uncoupled blocks.

    Blocks are connected components of the bipartite coupling graph,
    ordered by their smallest lower index; uncoupled sublevels form
    singleton blocks.
    """
    v = im.V if isinstance(im, InteractionMatrix) else np.asarray(im)
    n, m = v.shape
    parent = list(range(n + m))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in zip(*np.nonzero(np.abs(v) > tol)):
        ri, rj = find(int(i)), find(n + int(j))
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    groups = {}
    for x in range(n + m):
        groups.setdefault(find(x), []).append(x)
    blocks = [
        Block(tuple(x for x in g if x < n), tuple(x - n for x in g if x >= n))
        for _, g in sorted(groups.items())
    ]
    return blocks
