"""Certified evaluation of ``log|sigma(z)|`` for the square and triangular lattices.

The evaluator uses the symmetrised product

    log|sigma(z)| = log|z| + (1/q) * sum'_lambda log|1 - z^q / lambda^q|

whose terms decay like ``|z/lambda|^q``.  The first two Taylor terms of every
summand are removed and added back in closed form through the Eisenstein sums
``G_q`` and ``G_2q`` (computed from their rapidly converging q-expansions), so
the truncated remainder decays like ``|z/lambda|^(3q)`` and is bounded
rigorously by comparing the lattice sum with an area integral.

Points far from the origin are first reduced to the nearest lattice point
using the quasi-periodicity of sigma, under which
``log|sigma(z)| - (pi / 2A) |z|^2`` is periodic (``A`` the cell area).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .lattice import LatticeSpec, lattice_indices, nearest_lattice_point

EPS = np.finfo(float).eps

#: Points closer than this to a lattice point are rejected.
SINGULAR_DISTANCE = 1e-9
#: Largest modulus accepted by the folded evaluation.
MAX_FOLD_MODULUS = 1e6


class SigmaDomainError(ValueError):
    """Evaluation point is a lattice point or lies outside the certified domain."""


def annulus_sum_bound(spec: LatticeSpec, p: float, radius: float) -> float:
    """Upper bound for ``sum_{|lambda| > radius} |lambda|^-p``.

    Every lattice point owns a Voronoi cell of area ``A`` within distance
    ``rho`` (the cell circumradius), so the sum is dominated by
    ``(1/A) * integral_{|x| > R - rho} (|x| - rho)^-p dx``.
    """
    if p <= 2:
        raise ValueError("lattice sums of |lambda|^-p diverge for p <= 2")
    rho = spec.circumradius
    r0 = radius - 2 * rho
    if r0 <= 0:
        return math.inf
    return (2 * math.pi / spec.covolume) * (r0 ** (2 - p) / (p - 2) + rho * r0 ** (1 - p) / (p - 1))


def eisenstein(spec: LatticeSpec, order: int) -> tuple[complex, float]:
    """Eisenstein sum ``G_order = sum' lambda^-order`` and an error bound.

    Uses the q-expansion of ``G_2k(tau)`` for the lattice ``Z + tau Z``
    (``tau = w3/w1``) and rescales by ``(2 w1)^-order``.
    """
    if order < 4 or order % 2:
        raise ValueError("order must be an even integer >= 4")
    k = order // 2
    tau = spec.w3 / spec.w1
    r = np.exp(2j * np.pi * tau)
    n = np.arange(1, 80)
    divisor_sums = np.array([sum(dd ** (order - 1) for dd in range(1, m + 1) if m % dd == 0)
                             for m in n], dtype=float)
    terms = divisor_sums * r ** n
    prefactor = 2 * (2j * np.pi) ** order / math.factorial(order - 1)
    g = 2 * special.zeta(order) + prefactor * terms.sum()
    scale = (2 * spec.w1) ** (-order)
    value = complex(g * scale)
    err = 4 * EPS * (2 * special.zeta(order) + abs(prefactor) * np.abs(terms).sum()) * abs(scale)
    # remainder of the q-series beyond n = 79 is far below double precision
    return value, float(err)


def epstein_zeta(a: float, b: float, c: float, s: float) -> tuple[float, float]:
    """``sum' (a m^2 + b m n + c n^2)^-s`` by the Chowla-Selberg formula.

    Returns ``(value, error_bound)``.  The Bessel series converges like
    ``exp(-pi m sqrt(4ac - b^2) / a)`` and is truncated with a bounded tail.
    """
    disc = 4 * a * c - b * b
    if disc <= 0 or a <= 0:
        raise ValueError("quadratic form must be positive definite")
    if s <= 1:
        raise ValueError("Epstein zeta sum diverges for s <= 1")
    sd = math.sqrt(disc)
    nu = s - 0.5
    term0 = 2 * special.zeta(2 * s) * a ** (-s)
    term1 = (math.sqrt(math.pi) * special.gamma(s - 0.5) / special.gamma(s) / math.sqrt(a)
             * 2 * special.zeta(2 * s - 1) * (sd / (2 * math.sqrt(a))) ** (1 - 2 * s))
    pref = 8 * math.sqrt(math.pi) / (special.gamma(s) * math.sqrt(a))

    def bessel_terms(m_lo: int, m_hi: int) -> tuple[float, float]:
        total, absolute = 0.0, 0.0
        for m in range(m_lo, m_hi + 1):
            x = math.pi * m * sd / a
            kv = special.kv(nu, x)
            for k in range(1, m + 1):
                if m % k:
                    continue
                n = m // k
                t = (2 * math.pi * k / (n * sd)) ** nu * kv * math.cos(math.pi * m * b / a)
                total += t
                absolute += abs(t)
        return total, absolute

    m_max = 1
    while math.pi * m_max * sd / a < 60:
        m_max += 1
    series, absolute = bessel_terms(1, m_max)
    # crude but safe tail: d(m) <= m and every (k, n) factor bounded by (2 pi m / sd)^nu
    tail = 0.0
    for m in range(m_max + 1, m_max + 60):
        tail += m * (2 * math.pi * m / sd) ** nu * special.kv(nu, math.pi * m * sd / a)
    value = term0 + term1 + pref * series
    err = 2 * pref * tail + 32 * EPS * (abs(term0) + abs(term1) + pref * absolute)
    return float(value), float(err)


@dataclass(frozen=True)
class LatticeSumResult:
    value: float
    partial: float
    tail_correction: float
    certified_error: float


def lattice_sum_Aq(spec: LatticeSpec, target_error: float = 5e-9,
                   truncation_radius: float = 200.0) -> LatticeSumResult:
    """The constant ``A_q = (1/q) sum' |lambda|^-q``.

    ``value`` comes from the Chowla-Selberg expansion.  ``partial`` is the
    plain sum over ``|lambda| <= truncation_radius`` and ``tail_correction``
    the area-integral estimate of the rest; together they reproduce ``value``
    to roughly ``R^-3`` and serve as an independent check.
    """
    if spec.q not in (4, 6):
        raise ValueError(f"q must be 4 or 6, got {spec.q}")
    if not target_error > 0:
        raise ValueError("target_error must be positive")
    q = spec.q
    u, v = spec.periods
    a = abs(u) ** 2
    c = abs(v) ** 2
    b = 2 * (u * v.conjugate()).real
    z, err = epstein_zeta(a, b, c, q / 2)
    value, certified = z / q, err / q
    if certified > target_error:
        raise ValueError(f"cannot certify A_{q} to {target_error:g}; best is {certified:g}")

    pts = lattice_indices(spec, truncation_radius)[2]
    pts = pts[pts != 0]
    partial = float(np.sum(np.abs(pts) ** (-q)) / q)
    tail = 2 * math.pi / spec.covolume * truncation_radius ** (2 - q) / (q - 2) / q
    return LatticeSumResult(value=value, partial=partial, tail_correction=tail,
                            certified_error=certified)


@dataclass(frozen=True)
class SigmaEvaluator:
    """Truncated-sum evaluator of ``log|sigma|`` with a certified tail bound.

    ``tail_bound`` bounds the truncation and constant error of the unreduced
    sum for every ``|z| <= eval_domain_radius``.  Build instances with
    :func:`make_evaluator`.
    """

    spec: LatticeSpec
    truncation_radius: float
    tail_bound: float
    eval_domain_radius: float
    _points: np.ndarray = field(repr=False, compare=False)
    # sum_{|lambda| > R} lambda^-q and lambda^-2q, with absolute error bounds
    _tail_q: complex = field(repr=False, compare=False)
    _tail_2q: complex = field(repr=False, compare=False)
    _tail_q_err: float = field(repr=False, compare=False)
    _tail_2q_err: float = field(repr=False, compare=False)

    def truncation_error(self, modulus: float) -> float:
        """Bound on the omitted remainder at ``|z| = modulus``."""
        return _remainder_bound(self.spec, self.truncation_radius, modulus,
                                self._tail_q_err, self._tail_2q_err)


def _remainder_bound(spec, radius, modulus, tail_q_err, tail_2q_err):
    # beyond R, log|1 - w| = -Re(w) - Re(w^2)/2 + r3 with |r3| <= |w|^3 / (3 (1 - |w|))
    q = spec.q
    ratio = (modulus / radius) ** q
    if ratio >= 0.5:
        return math.inf
    cubic = modulus ** (3 * q) / (3 * (1 - ratio)) * annulus_sum_bound(spec, 3 * q, radius)
    return (cubic + modulus ** q * tail_q_err + modulus ** (2 * q) * tail_2q_err / 2) / q


def _tail_sums(spec, radius, outer_factor):
    q = spec.q
    pts = lattice_indices(spec, outer_factor * radius)[2]
    pts = pts[pts != 0]
    inner = np.abs(pts) <= radius
    gq, gq_err = eisenstein(spec, q)
    near_q = pts[inner] ** (-q)
    tail_q = gq - complex(math.fsum(near_q.real), math.fsum(near_q.imag))
    tail_q_err = gq_err + 4 * EPS * float(np.abs(near_q).sum())
    # lambda^-2q decays fast enough to sum the shell R < |lambda| <= outer directly
    far = pts[~inner] ** (-2 * q)
    tail_2q = complex(math.fsum(far.real), math.fsum(far.imag))
    tail_2q_err = (annulus_sum_bound(spec, 2 * q, outer_factor * radius)
                   + 4 * EPS * float(np.abs(far).sum()))
    return pts[inner], tail_q, tail_q_err, tail_2q, tail_2q_err


def make_evaluator(spec: LatticeSpec, eval_domain_radius: float | None = None,
                   tol: float = 1e-12, truncation_radius: float | None = None,
                   outer_factor: float = 8.0) -> SigmaEvaluator:
    """Build an evaluator certified on ``|z| <= eval_domain_radius``.

    By default the domain is the reduced region (distance to the nearest
    lattice point) and the truncation radius is the smallest multiple of the
    spacing whose remainder bound is at most ``tol``.
    """
    if eval_domain_radius is None:
        eval_domain_radius = spec.circumradius * (1 + 1e-9)
    q = spec.q
    if truncation_radius is None:
        gq_err = eisenstein(spec, q)[1]
        radius = max(4 * spec.d, 2 * eval_domain_radius)
        while True:
            # Eisenstein/shell errors estimated before the enumeration is paid for
            est = _remainder_bound(spec, radius, eval_domain_radius, gq_err,
                                   annulus_sum_bound(spec, 2 * q, outer_factor * radius))
            if est <= tol / 2:
                break
            radius += spec.d
            if radius > 400 * spec.d:
                raise ValueError(f"cannot reach tail bound {tol:g} on |z| <= {eval_domain_radius}")
        truncation_radius = radius
        pts, tq, tq_err, t2q, t2q_err = _tail_sums(spec, truncation_radius, outer_factor)
        tail = _remainder_bound(spec, truncation_radius, eval_domain_radius, tq_err, t2q_err)
        if tail > tol:
            raise ValueError(f"tail bound {tail:.3g} on |z| <= {eval_domain_radius} exceeds {tol:g}; "
                             "the Eisenstein constants limit the attainable accuracy")
    else:
        pts, tq, tq_err, t2q, t2q_err = _tail_sums(spec, truncation_radius, outer_factor)
        tail = _remainder_bound(spec, truncation_radius, eval_domain_radius, tq_err, t2q_err)
    return SigmaEvaluator(spec=spec, truncation_radius=float(truncation_radius), tail_bound=tail,
                          eval_domain_radius=float(eval_domain_radius), _points=pts,
                          _tail_q=tq, _tail_2q=t2q, _tail_q_err=tq_err, _tail_2q_err=t2q_err)


def _raw_log_abs_sigma(ev: SigmaEvaluator, z: complex) -> tuple[float, float]:
    q = ev.spec.q
    w = (z / ev._points) ** q
    terms = 0.5 * np.log1p((w * w.conjugate()).real - 2 * w.real)
    s = math.fsum(terms)
    zq = z ** q
    tail = -(zq * ev._tail_q).real - 0.5 * (zq * zq * ev._tail_2q).real
    log_z = math.log(abs(z))
    value = log_z + (s + tail) / q
    rounding = 8 * EPS * (abs(log_z) + (float(np.abs(terms).sum()) + float(np.abs(w).sum())
                                        + abs(tail)) / q)
    return value, ev.truncation_error(abs(z)) + rounding


def log_abs_sigma(ev: SigmaEvaluator, z: complex, fold: bool = True) -> tuple[float, float]:
    """``(log|sigma(z)|, error_bound)``.

    With ``fold`` the point is first moved next to its nearest lattice point
    and the exact quasi-periodic correction is added back; otherwise the sum
    is evaluated at ``z`` itself, which requires ``|z| <= eval_domain_radius``.
    """
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise SigmaDomainError(f"non-finite argument {z}")
    if not fold:
        if abs(z) > ev.eval_domain_radius:
            raise SigmaDomainError(
                f"|z| = {abs(z):.6g} beyond certified radius {ev.eval_domain_radius:.6g}")
        lam = nearest_lattice_point(ev.spec, z)
        if abs(z - lam) < SINGULAR_DISTANCE * ev.spec.d:
            raise SigmaDomainError(f"z = {z} is a lattice point (log singularity)")
        return _raw_log_abs_sigma(ev, z)

    if abs(z) > MAX_FOLD_MODULUS:
        raise SigmaDomainError(f"|z| = {abs(z):.6g} too large for periodic reduction")
    lam = nearest_lattice_point(ev.spec, z)
    z0 = z - lam
    if abs(z0) < SINGULAR_DISTANCE * ev.spec.d:
        raise SigmaDomainError(f"z = {z} is a lattice point (log singularity)")
    value, err = _raw_log_abs_sigma(ev, z0)
    if lam != 0:
        # |z|^2 - |z0|^2 written without cancellation
        shift = abs(lam) ** 2 + 2 * (lam.conjugate() * z0).real
        corr = math.pi / (2 * ev.spec.covolume) * shift
        value += corr
        err += 4 * EPS * abs(corr)
    return value, err


def h_potential(ev: SigmaEvaluator, z: complex) -> tuple[float, float]:
    """The periodic function ``-(1/2pi) log|sigma(z)| + |z|^2 / (4A)``."""
    z = complex(z)
    lam = nearest_lattice_point(ev.spec, z)
    z0 = z - lam
    if abs(z0) < SINGULAR_DISTANCE * ev.spec.d:
        raise SigmaDomainError(f"z = {z} is a lattice point (log singularity)")
    value, err = _raw_log_abs_sigma(ev, z0)
    return -value / (2 * math.pi) + abs(z0) ** 2 / (4 * ev.spec.covolume), err / (2 * math.pi)


def sigma_origin_deviation_bound(spec: LatticeSpec, z: complex) -> float:
    """Bound ``A_q (|z|^q + |z|^2q)`` on ``|log|sigma(z)| - log|z||``.

    Valid for ``|z|^q <= 3/5``.  For a scaled lattice ``t Lambda`` the bound is
    applied to ``z / t`` on the unscaled lattice.
    """
    q = spec.q
    x = (abs(complex(z)) / spec.scale) ** q
    if x > 0.6:
        raise SigmaDomainError(f"|z|^q = {x:.6g} exceeds 3/5; bound not certified there")
    aq = _aq_base(q)
    return aq * (x + x * x)


_AQ_CACHE: dict[int, tuple[float, float]] = {}


def _aq_base(q: int) -> float:
    """``A_q`` of the unit-density lattice plus its certified error (upper value)."""
    if q not in _AQ_CACHE:
        from .lattice import LatticeKind, make_lattice

        kind = LatticeKind.SQUARE if q == 4 else LatticeKind.TRIANGULAR
        res = lattice_sum_Aq(make_lattice(kind), truncation_radius=4.0)
        _AQ_CACHE[q] = (res.value, res.certified_error)
    value, err = _AQ_CACHE[q]
    return value + err


def aq_constant(q: int) -> tuple[float, float]:
    """``(A_q, certified_error)`` for the standard square (4) or triangular (6) lattice."""
    _aq_base(q)
    return _AQ_CACHE[q]


def scaled_sigma(ev: SigmaEvaluator, t: float, z: complex) -> tuple[float, float]:
    """``log|sigma|`` of the lattice ``t Lambda``: ``log t + log|sigma(z / t)|``."""
    if not t > 0:
        raise ValueError(f"scale must be positive, got {t}")
    value, err = log_abs_sigma(ev, complex(z) / t)
    return math.log(t) + value, err + EPS * abs(math.log(t))


def zeta_series(spec: LatticeSpec, z: complex, radius: float = 200.0) -> complex:
    """Weierstrass zeta by direct summation over ``|lambda| <= radius``.

    Conditionally convergent; disks are symmetric under ``lambda -> -lambda``
    so the odd part cancels and the remainder is ``O(|z|^3 / radius^2)``.
    Used only to validate the closed-form eta values.
    """
    z = complex(z)
    pts = lattice_indices(spec, radius)[2]
    pts = pts[pts != 0]
    terms = 1 / (z - pts) + 1 / pts + z / pts ** 2
    return 1 / z + complex(np.sum(terms))
