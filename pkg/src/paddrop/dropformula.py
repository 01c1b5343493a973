"""Closed-form maximum voltage drop for square, triangular and hexagonal pads.

All values are for the normalised problem ``Laplacian(u) = 1`` off the pads,
``u = 0`` on them; the drop is ``-u`` and scales linearly with the source.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .elliptic import (
    SigmaEvaluator,
    aq_constant,
    log_abs_sigma,
    make_evaluator,
    scaled_sigma,
)
from .lattice import (
    D2,
    D3,
    SQRT3,
    Arrangement,
    LatticeKind,
    LatticeSpec,
    half_spacing,
    make_lattice,
    nearest_lattice_point,
)

TWO_PI = 2 * math.pi

#: Square cell centre, where the square arrangement has its largest drop.
B_SQUARE = (1 + 1j) / 2
#: Barycentre of the triangle 0, d2, d2*exp(i pi/3).
B_TRIANGLE = 3 ** -0.75 * math.sqrt(2) * cmath.exp(1j * math.pi / 6)
#: Squared distance from a hexagon centre to its vertices (pads).
HEX_A_SQUARED = 4 / (3 * SQRT3)


class BandKind(enum.Enum):
    CERTIFIED = "certified"
    ASYMPTOTIC_ORDER_ONLY = "asymptotic_order_only"


@dataclass(frozen=True)
class DropResult:
    arrangement: Arrangement
    epsilon: float
    value: float
    lower: float
    upper: float
    constant: float
    band_kind: BandKind

    @property
    def halfwidth(self) -> float:
        return (self.upper - self.lower) / 2

    def scaled(self, c: float) -> DropResult:
        """The same drop for ``Laplacian(u) = c``."""
        lo, hi = sorted((self.lower * c, self.upper * c))
        return DropResult(self.arrangement, self.epsilon, self.value * c, lo, hi,
                          self.constant, self.band_kind)


@dataclass(frozen=True)
class MaxPoint:
    arrangement: Arrangement
    location: complex


def max_point(arrangement: Arrangement | str) -> MaxPoint:
    arrangement = Arrangement.parse(arrangement)
    loc = {Arrangement.SQUARE: B_SQUARE, Arrangement.TRIANGULAR: B_TRIANGLE,
           Arrangement.HEXAGONAL: 0j}[arrangement]
    return MaxPoint(arrangement, loc)


def constant_CM() -> float:
    return math.lgamma(0.25) / math.pi - math.log(2 * math.sqrt(2 * math.pi)) / TWO_PI


def constant_CY() -> float:
    return (3 * math.lgamma(1 / 3) / TWO_PI - math.log(2 * math.sqrt(2) * math.pi) / TWO_PI
            + math.log(3) / (8 * math.pi))


def log_sigma_barycentre() -> float:
    """``log|sigma|`` of the unit-density triangular lattice at a triangle barycentre."""
    return (math.pi / (3 * SQRT3) + math.log(2 * math.sqrt(2) * math.pi) - 0.25 * math.log(3)
            - 3 * math.lgamma(1 / 3))


def log_sigma_square_centre() -> float:
    return math.pi / 4 + math.log(2 * math.sqrt(2 * math.pi)) - 2 * math.lgamma(0.25)


def sigma_barycentre_modulus() -> float:
    return math.exp(log_sigma_barycentre())


def constant_CH() -> float:
    # the honeycomb pads are BR \ R; R is the unit-density triangular lattice
    # scaled by sqrt(2) and turned by pi/6, and a pad A is a barycentre of R
    log_sigma_r = math.log(math.sqrt(2)) + log_sigma_barycentre()
    return HEX_A_SQUARED / 8 - log_sigma_r / TWO_PI


@lru_cache(maxsize=None)
def _evaluator(kind: LatticeKind) -> SigmaEvaluator:
    return make_evaluator(make_lattice(kind))


def constants_via_sigma() -> dict[str, tuple[float, float]]:
    """``C_M``, ``C_Y`` and ``C_H`` recomputed from the sigma evaluator.

    Returns ``name -> (value, error_bound)``.  Independent of the Gamma
    function closed forms used by :func:`constant_CM` and friends.
    """
    sq = _evaluator(LatticeKind.SQUARE)
    tr = _evaluator(LatticeKind.TRIANGULAR)
    ls, es = log_abs_sigma(sq, B_SQUARE)
    lt, et = log_abs_sigma(tr, B_TRIANGLE)
    pad = D3 * cmath.exp(1j * math.pi / 3)
    lr, er = scaled_sigma(tr, math.sqrt(2), pad / cmath.exp(1j * math.pi / 6))
    return {
        "C_M": (abs(B_SQUARE) ** 2 / 4 - ls / TWO_PI, es / TWO_PI),
        "C_Y": (abs(B_TRIANGLE) ** 2 / 4 - lt / TWO_PI, et / TWO_PI),
        "C_H": (abs(pad) ** 2 / 8 - lr / TWO_PI, er / TWO_PI),
    }


def _constant(arrangement: Arrangement) -> float:
    return {Arrangement.SQUARE: constant_CM, Arrangement.TRIANGULAR: constant_CY,
            Arrangement.HEXAGONAL: constant_CH}[arrangement]()


def certified_halfwidth(q: int, epsilon: float) -> float:
    """Certified band ``(A_q / 2pi)(eps^q + eps^2q)``, rounded outward by the A_q error."""
    aq, err = aq_constant(q)
    x = epsilon ** q
    return (aq + err) / TWO_PI * (x + x * x)


def check_epsilon(arrangement: Arrangement, epsilon: float) -> None:
    if not (isinstance(epsilon, (int, float, np.floating)) and math.isfinite(epsilon)):
        raise ValueError(f"pad radius must be a finite number, got {epsilon!r}")
    if epsilon <= 0:
        raise ValueError(f"pad radius must be positive, got {epsilon}")
    limit = half_spacing(arrangement)
    if epsilon >= limit:
        raise ValueError(f"pads overlap: eps = {epsilon} must be below half the pad spacing "
                         f"({limit:.6g}) for the {arrangement.value} arrangement")


def vmax(arrangement: Arrangement | str, epsilon: float, hex_band_constant: float = 1.0) -> DropResult:
    """Largest voltage drop ``(1/2pi) log(1/eps) - C + eps^2/4`` with its error band.

    Square and triangular bands are rigorous.  For hexagonal pads the value is
    the drop at a hexagon centre; its band ``hex_band_constant * eps^3`` only
    reflects the order of the neglected term.
    """
    arrangement = Arrangement.parse(arrangement)
    check_epsilon(arrangement, epsilon)
    const = _constant(arrangement)
    value = math.log(1 / epsilon) / TWO_PI - const + epsilon ** 2 / 4
    if arrangement is Arrangement.HEXAGONAL:
        half = hex_band_constant * epsilon ** 3
        kind = BandKind.ASYMPTOTIC_ORDER_ONLY
    else:
        q = 4 if arrangement is Arrangement.SQUARE else 6
        if epsilon ** q > 0.6:
            raise ValueError(f"eps^{q} = {epsilon ** q:.4g} exceeds 3/5; band not certified")
        half = certified_halfwidth(q, epsilon)
        kind = BandKind.CERTIFIED
    return DropResult(arrangement, float(epsilon), value, value - half, value + half, const, kind)


def u_epsilon(spec: LatticeSpec, epsilon: float, z: complex,
              evaluator: SigmaEvaluator | None = None) -> tuple[float, float]:
    """Explicit part of the periodic solution with pads of radius ``epsilon`` on ``spec``.

    Returns ``(value, band)``; the true solution lies within ``band`` of
    ``value``.  For a lattice of cell area ``A`` the explicit part is
    ``-(A/2pi) log|sigma(z)| + |z|^2/4 + (A/2pi) log(eps) - eps^2/4``.
    """
    z = complex(z)
    if not epsilon > 0:
        raise ValueError(f"pad radius must be positive, got {epsilon}")
    if epsilon >= spec.d / 2:
        raise ValueError(f"pads overlap: eps = {epsilon} >= half spacing {spec.d / 2:.6g}")
    x = (epsilon / spec.scale) ** spec.q
    if x > 0.6:
        raise ValueError("eps^q exceeds 3/5; band not certified")
    dist = abs(z - nearest_lattice_point(spec, z))
    if dist < epsilon * (1 - 1e-12):
        raise ValueError(f"z = {z} lies inside a pad")
    ev = evaluator if evaluator is not None else make_evaluator(spec)
    area = spec.covolume
    ls, err = log_abs_sigma(ev, z)
    value = (-area / TWO_PI * ls + abs(z) ** 2 / 4 + area / TWO_PI * math.log(epsilon)
             - epsilon ** 2 / 4)
    aq, aq_err = aq_constant(spec.q)
    band = area / TWO_PI * ((aq + aq_err) * (x + x * x) + err)
    return value, band


def sweep(arrangements, eps_min: float, eps_max: float, steps: int,
          hex_band_constant: float = 1.0) -> list[DropResult]:
    """Drops on a uniform grid of pad radii, ordered by arrangement then radius."""
    if not 0 < eps_min <= eps_max:
        raise ValueError(f"need 0 < eps_min <= eps_max, got {eps_min}, {eps_max}")
    if int(steps) != steps or steps < 1:
        raise ValueError(f"steps must be a positive integer, got {steps}")
    chosen = {Arrangement.parse(a) for a in arrangements}
    ordered = [a for a in Arrangement if a in chosen]
    grid = [eps_min] if steps == 1 else list(np.linspace(eps_min, eps_max, int(steps)))
    return [vmax(a, float(e), hex_band_constant) for a in ordered for e in grid]


def scaling_check(spec: LatticeSpec, epsilon: float, r: float, points=None) -> float:
    """Largest ``|r^2 u(z/r) - u_r(z)|`` between a lattice and its ``r``-scaled copy.

    ``u`` is the explicit solution for pads of radius ``epsilon`` on ``spec``
    and ``u_r`` the one for radius ``r * epsilon`` on ``r * spec``.
    """
    if not r > 0:
        raise ValueError(f"scale must be positive, got {r}")
    big = spec.scaled(r)
    if points is None:
        a, b = big.periods
        rng = np.random.default_rng(12345)
        points = []
        while len(points) < 16:
            s, t = rng.random(2)
            z = complex(s * a + t * b)
            if abs(z - nearest_lattice_point(big, z)) > 1.05 * r * epsilon:
                points.append(z)
    ev_small = make_evaluator(spec)
    ev_big = make_evaluator(big)
    worst = 0.0
    for z in points:
        u_small, _ = u_epsilon(spec, epsilon, complex(z) / r, ev_small)
        u_big, _ = u_epsilon(big, r * epsilon, z, ev_big)
        worst = max(worst, abs(r * r * u_small - u_big))
    return worst
