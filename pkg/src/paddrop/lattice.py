"""Pad arrangements, their lattices and matched-density spacings.

Square and equilateral pad sets are lattices ``{m d + n alpha d}`` with
``alpha`` a q-th root of unity (q = 4 or 6).  The hexagonal (honeycomb) pad set
is not a lattice; it is represented as the difference of two triangular
lattices, see :class:`HoneycombPads`.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, replace

import numpy as np

SQRT3 = math.sqrt(3.0)

#: Spacing of the equilateral arrangement with the same pad density as a unit square grid.
D2 = math.sqrt(2.0) / 3.0**0.25
#: Pad spacing (hexagon side) of the honeycomb arrangement with the same density.
D3 = 2.0 / 27.0**0.25

#: Refuse enumerations larger than this many points.
MAX_POINTS = 5_000_000


class LatticeKind(enum.Enum):
    SQUARE = "square"
    TRIANGULAR = "triangular"
    SCALED_TRIANGULAR = "scaled_triangular"


class Arrangement(enum.Enum):
    SQUARE = "square"
    TRIANGULAR = "triangular"
    HEXAGONAL = "hexagonal"

    @classmethod
    def parse(cls, name: str | Arrangement) -> Arrangement:
        if isinstance(name, Arrangement):
            return name
        key = name.strip().lower()
        aliases = {"s": "square", "t": "triangular", "h": "hexagonal",
                   "equilateral": "triangular", "manhattan": "square",
                   "hex": "hexagonal", "tri": "triangular"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown arrangement {name!r}") from None


class LatticeError(ValueError):
    pass


@dataclass(frozen=True)
class LatticeSpec:
    """A square or triangular lattice ``{m d + n alpha d}``.

    ``scale`` records the factor applied to the standard (unit pad density)
    lattice; it is 1 for the lattices of the square and equilateral pad
    arrangements.
    """

    kind: LatticeKind
    q: int
    d: float
    alpha: complex
    w1: complex
    w3: complex
    eta1: complex
    eta3: complex
    covolume: float
    scale: float = 1.0

    @property
    def periods(self) -> tuple[complex, complex]:
        return 2 * self.w1, 2 * self.w3

    @property
    def circumradius(self) -> float:
        """Largest distance from a point of the plane to the nearest lattice point."""
        if self.q == 4:
            return self.d / math.sqrt(2.0)
        return self.d / SQRT3

    @property
    def min_distance(self) -> float:
        return self.d

    def scaled(self, t: float) -> LatticeSpec:
        """Lattice with all lengths multiplied by ``t``."""
        if not t > 0:
            raise LatticeError(f"scale must be positive, got {t}")
        kind = self.kind
        if kind is LatticeKind.TRIANGULAR and t != 1.0:
            kind = LatticeKind.SCALED_TRIANGULAR
        return LatticeSpec(
            kind=kind,
            q=self.q,
            d=self.d * t,
            alpha=self.alpha,
            w1=self.w1 * t,
            w3=self.w3 * t,
            eta1=self.eta1 / t,
            eta3=self.eta3 / t,
            covolume=self.covolume * t * t,
            scale=self.scale * t,
        )

    def legendre_residual(self) -> float:
        """``|2 w3 eta1 - 2 w1 eta3 - i pi|``; zero for any lattice."""
        return abs(2 * self.w3 * self.eta1 - 2 * self.w1 * self.eta3 - 1j * math.pi)

    def coordinates(self, z: complex) -> tuple[float, float]:
        """Real coordinates ``(s, t)`` with ``z = s * 2w1 + t * 2w3``."""
        a, b = self.periods
        det = (a.conjugate() * b).imag
        s = (z.conjugate() * b).imag / det
        t = (a.conjugate() * z).imag / det
        return s, t


def _base_lattice(q: int, d: float) -> LatticeSpec:
    alpha = cmath.exp(2j * math.pi / q)
    # eta values from 2 w3 eta1 - 2 w1 eta3 = i pi together with eta1 = alpha eta3
    eta3 = 1j * math.pi / (d * (alpha * alpha - 1))
    eta1 = alpha * eta3
    if q == 4:
        alpha, eta1, eta3 = 1j, complex(math.pi / 2), complex(0.0, -math.pi / 2)
    return LatticeSpec(
        kind=LatticeKind.SQUARE if q == 4 else LatticeKind.TRIANGULAR,
        q=q,
        d=d,
        alpha=alpha,
        w1=complex(d / 2),
        w3=alpha * d / 2,
        eta1=complex(eta1),
        eta3=complex(eta3),
        covolume=d * d * abs(alpha.imag),
    )


def make_lattice(kind: LatticeKind | str, t: float | None = None) -> LatticeSpec:
    """Build the square, triangular or scaled triangular lattice.

    ``t`` is required for ``SCALED_TRIANGULAR`` and must be omitted otherwise.
    """
    if isinstance(kind, str):
        try:
            kind = LatticeKind(kind.lower())
        except ValueError:
            raise LatticeError(f"invalid lattice kind {kind!r}") from None
    if not isinstance(kind, LatticeKind):
        raise LatticeError(f"invalid lattice kind {kind!r}")
    if kind is LatticeKind.SQUARE:
        if t is not None:
            raise LatticeError("scale only applies to SCALED_TRIANGULAR")
        return _base_lattice(4, 1.0)
    base = _base_lattice(6, D2)
    if kind is LatticeKind.TRIANGULAR:
        if t is not None:
            raise LatticeError("scale only applies to SCALED_TRIANGULAR")
        return base
    if t is None or not t > 0:
        raise LatticeError(f"SCALED_TRIANGULAR needs a positive scale, got {t}")
    return replace(base.scaled(float(t)), kind=LatticeKind.SCALED_TRIANGULAR)


def lattice_for(arrangement: Arrangement) -> LatticeSpec:
    arrangement = Arrangement.parse(arrangement)
    if arrangement is Arrangement.SQUARE:
        return make_lattice(LatticeKind.SQUARE)
    if arrangement is Arrangement.TRIANGULAR:
        return make_lattice(LatticeKind.TRIANGULAR)
    raise LatticeError("the hexagonal pad set is not a lattice; use HoneycombPads")


def equal_density_spacings(d1: float = 1.0) -> tuple[float, float]:
    """Triangular and hexagonal spacings matching the density of a square grid of pitch ``d1``."""
    if not d1 > 0:
        raise ValueError(f"d1 must be positive, got {d1}")
    return d1 * D2, d1 * D3


@dataclass(frozen=True)
class PadConfig:
    arrangement: Arrangement
    epsilon: float
    spacing: float

    def __post_init__(self):
        object.__setattr__(self, "arrangement", Arrangement.parse(self.arrangement))
        if not self.spacing > 0:
            raise ValueError(f"spacing must be positive, got {self.spacing}")
        if not self.epsilon > 0:
            raise ValueError(f"pad radius must be positive, got {self.epsilon}")
        if not self.epsilon < self.spacing / 2:
            raise ValueError(
                f"pads overlap: radius {self.epsilon} must be below half the spacing "
                f"({self.spacing / 2:.6g})"
            )

    @classmethod
    def matched(cls, arrangement: Arrangement | str, epsilon: float, d1: float = 1.0) -> PadConfig:
        arrangement = Arrangement.parse(arrangement)
        d2, d3 = equal_density_spacings(d1)
        spacing = {Arrangement.SQUARE: d1, Arrangement.TRIANGULAR: d2,
                   Arrangement.HEXAGONAL: d3}[arrangement]
        return cls(arrangement, epsilon, spacing)

    @property
    def density(self) -> float:
        return areal_density(self)


def areal_density(config: PadConfig) -> float:
    """Fraction of the plane covered by pads."""
    e, d = config.epsilon, config.spacing
    if config.arrangement is Arrangement.SQUARE:
        return math.pi * e * e / (d * d)
    if config.arrangement is Arrangement.TRIANGULAR:
        return 2 * math.pi * e * e / (SQRT3 * d * d)
    return 4 * math.pi * e * e / (3 * SQRT3 * d * d)


def half_spacing(arrangement: Arrangement | str, d1: float = 1.0) -> float:
    arrangement = Arrangement.parse(arrangement)
    d2, d3 = equal_density_spacings(d1)
    return {Arrangement.SQUARE: d1, Arrangement.TRIANGULAR: d2,
            Arrangement.HEXAGONAL: d3}[arrangement] / 2


def lattice_indices(spec: LatticeSpec, radius: float, max_points: int = MAX_POINTS):
    """Integer pairs ``(m, n)`` and points ``m*2w1 + n*2w3`` with modulus at most ``radius``."""
    if radius < 0:
        raise ValueError(f"radius must be non-negative, got {radius}")
    a, b = spec.periods
    # |m a + n b| >= |n| |Im(b conj(a))| / |a|, and symmetrically for m
    height_n = abs((b * a.conjugate()).imag) / abs(a)
    height_m = abs((b * a.conjugate()).imag) / abs(b)
    n_max = int(math.floor(radius / height_n + 1e-12))
    m_max = int(math.floor(radius / height_m + 1e-12))
    estimate = (2 * m_max + 1) * (2 * n_max + 1)
    if estimate > 4 * max_points:
        raise LatticeError(
            f"enumeration of radius {radius} needs ~{estimate} candidates (cap {max_points})"
        )
    m, n = np.meshgrid(np.arange(-m_max, m_max + 1), np.arange(-n_max, n_max + 1), indexing="ij")
    m = m.ravel()
    n = n.ravel()
    pts = m * a + n * b
    # tolerance so that points exactly on the circle survive rounding
    keep = np.abs(pts) <= radius * (1 + 1e-12) + 1e-15
    if keep.sum() > max_points:
        raise LatticeError(f"{int(keep.sum())} lattice points within radius {radius} exceed cap {max_points}")
    return m[keep], n[keep], pts[keep]


def points_in_disk(spec: LatticeSpec, radius: float, max_points: int = MAX_POINTS) -> np.ndarray:
    """All lattice points ``lambda`` with ``|lambda| <= radius``, each once."""
    return lattice_indices(spec, radius, max_points)[2]


def fold_to_fundamental(spec: LatticeSpec, z: complex) -> tuple[complex, complex]:
    """Split ``z = z0 + lam`` with ``lam`` in the lattice and ``z0`` in the half-open period cell.

    The cell is ``{s 2w1 + t 2w3 : 0 <= s, t < 1}``.
    """
    z = complex(z)
    a, b = spec.periods
    s, t = spec.coordinates(z)
    m = math.floor(s + 1e-12)
    n = math.floor(t + 1e-12)
    lam = m * a + n * b
    z0 = z - lam
    # snap tiny negative coordinates produced by rounding back onto the closed edge
    s0, t0 = spec.coordinates(z0)
    if abs(s0) < 1e-12 and abs(t0) < 1e-12:
        z0 = 0j
    return z0, lam


def nearest_lattice_point(spec: LatticeSpec, z: complex) -> complex:
    """Lattice point closest to ``z`` (searched among the corners of its period cell)."""
    z0, lam = fold_to_fundamental(spec, z)
    a, b = spec.periods
    best = lam
    best_d = abs(z0)
    for corner in (a, b, a + b, b - a, a - b):
        dist = abs(z0 - corner)
        if dist < best_d:
            best, best_d = lam + corner, dist
    return best


@dataclass(frozen=True)
class HoneycombPads:
    """Honeycomb pad set as ``BR \\ R``.

    ``BR`` is the triangular lattice of side ``d3`` (hexagon vertices plus
    centres) and ``R`` the triangular lattice of hexagon centres, side
    ``sqrt(3) d3``, rotated by ``pi/6``.  The hexagon centred at the origin has
    vertices at ``d3 * exp(i k pi / 3)``.
    """

    d3: float = D3

    @property
    def fine(self) -> LatticeSpec:
        return make_lattice(LatticeKind.TRIANGULAR).scaled(self.d3 / D2)

    @property
    def coarse_rotation(self) -> complex:
        return cmath.exp(1j * math.pi / 6)

    @property
    def coarse(self) -> LatticeSpec:
        """Lattice ``R`` before rotation by ``coarse_rotation``."""
        return make_lattice(LatticeKind.TRIANGULAR).scaled(SQRT3 * self.d3 / D2)

    def is_pad(self, z: complex, tol: float = 1e-9) -> bool:
        fine = self.fine
        if abs(z - nearest_lattice_point(fine, z)) > tol * self.d3:
            return False
        w = z / self.coarse_rotation
        return abs(w - nearest_lattice_point(self.coarse, w)) > tol * self.d3

    def pads_in_disk(self, radius: float) -> np.ndarray:
        pts = points_in_disk(self.fine, radius)
        return np.array([p for p in pts if self.is_pad(complex(p))])

    def vertex(self) -> complex:
        """A pad next to the origin (a barycentre of an ``R`` triangle)."""
        return self.d3 * cmath.exp(1j * math.pi / 3)
