"""Finite-difference oracle for ``Laplacian(u) = 1`` off periodic pad disks.

Each arrangement is discretised on a rectangular periodic supercell with
pad centres on grid nodes.  Nodes within ``eps`` of a pad centre are
Dirichlet (``u = 0``).  A free node next to a pad uses a cut-arm stencil in
the symmetric form: the arm to the circle has length ``theta*h`` and adds
``1/(theta*h^2)`` to the diagonal, while every coupling between free nodes
stays ``-1/h^2``.  The matrix is therefore a symmetric M-matrix and CG
applies.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from .krylov import pcg
from .lattice import D2, D3, SQRT3, Arrangement, half_spacing

MIN_N = 32
MIN_PAD_CELLS = 4.0
#: Smallest arm fraction kept; shorter arms are clipped to avoid inf.
THETA_FLOOR = 1e-8


@dataclass(frozen=True)
class PeriodicCell:
    """Rectangular period of a pad arrangement and its grid.

    ``nx`` and ``ny`` count nodes (equal to intervals, by periodicity); the
    node ``(i, j)`` sits at ``(i*hx, j*hy)``.
    """

    arrangement: Arrangement
    lx: float
    ly: float
    pads: tuple[tuple[float, float], ...]
    epsilon: float
    n: int
    nx: int
    ny: int
    scale: float = 1.0

    @property
    def cell_vectors(self) -> tuple[tuple[float, float], tuple[float, float]]:
        return (self.lx, 0.0), (0.0, self.ly)

    @property
    def hx(self) -> float:
        return self.lx / self.nx

    @property
    def hy(self) -> float:
        return self.ly / self.ny

    @property
    def h(self) -> float:
        return max(self.hx, self.hy)

    @property
    def area(self) -> float:
        return self.lx * self.ly

    @property
    def density(self) -> float:
        return len(self.pads) * math.pi * self.epsilon ** 2 / self.area

    def refined(self, factor: int = 2) -> PeriodicCell:
        return replace(self, n=self.n * factor, nx=self.nx * factor, ny=self.ny * factor)

    def centres(self) -> np.ndarray:
        """Points where the drop is predicted to peak, as an ``(k, 2)`` array."""
        s = self.scale
        if self.arrangement is Arrangement.SQUARE:
            pts = [(0.5, 0.5)]
        elif self.arrangement is Arrangement.TRIANGULAR:
            lx, ly = D2, SQRT3 * D2
            pts = [(lx / 2, ly / 6), (0, ly / 3), (0, 2 * ly / 3), (lx / 2, 5 * ly / 6)]
        else:
            pts = [(0.0, 0.0), (SQRT3 * D3 / 2, 1.5 * D3)]
        return np.array(pts) * s


@dataclass
class GridSolution:
    cell: PeriodicCell
    values: np.ndarray
    pad_mask: np.ndarray
    residual: float
    iterations: int
    tol: float = field(default=1e-10)

    @property
    def h(self) -> float:
        return self.cell.h

    def coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        x = np.arange(self.cell.nx) * self.cell.hx
        y = np.arange(self.cell.ny) * self.cell.hy
        return np.meshgrid(x, y, indexing="ij")


def _grid_shape(n: int, ratio: float) -> tuple[int, int]:
    # nx even and ny a multiple of 6 put every pad and predicted peak on a node
    nx = n + (n % 2)
    ny = max(6, 6 * round(ratio * nx / 6))
    return nx, ny


def build_cell(arrangement: Arrangement | str, epsilon: float, n: int,
               scale: float = 1.0) -> PeriodicCell:
    """Periodic supercell holding 1 (square), 2 (triangular) or 4 (hexagonal) pads.

    ``n`` is the number of grid intervals along the shorter cell edge.
    ``scale`` multiplies every length; ``epsilon`` is given in scaled units.
    """
    arrangement = Arrangement.parse(arrangement)
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale}")
    if not (isinstance(epsilon, (int, float, np.floating)) and math.isfinite(epsilon)) or epsilon <= 0:
        raise ValueError(f"pad radius must be a positive number, got {epsilon!r}")
    limit = half_spacing(arrangement) * scale
    if epsilon >= limit:
        raise ValueError(f"pads overlap: eps = {epsilon} must be below {limit:.6g} "
                         f"for the {arrangement.value} arrangement")
    if int(n) != n or n < 1:
        raise ValueError(f"grid resolution n must be a positive integer, got {n}")
    n = int(n)
    if arrangement is Arrangement.SQUARE:
        lx = ly = 1.0
        pads = [(0.0, 0.0)]
    elif arrangement is Arrangement.TRIANGULAR:
        lx, ly = D2, SQRT3 * D2
        pads = [(0.0, 0.0), (lx / 2, ly / 2)]
    else:
        lx, ly = SQRT3 * D3, 3 * D3
        pads = [(0.0, D3), (0.0, 2 * D3), (lx / 2, D3 / 2), (lx / 2, 2.5 * D3)]
    nx, ny = (n, n) if arrangement is Arrangement.SQUARE else _grid_shape(n, ly / lx)
    cell = PeriodicCell(arrangement, lx * scale, ly * scale,
                        tuple((x * scale, y * scale) for x, y in pads), float(epsilon), n, nx, ny,
                        scale)
    if epsilon / cell.h < MIN_PAD_CELLS:
        raise ValueError(f"pad under-resolved: eps/h = {epsilon / cell.h:.3g} < {MIN_PAD_CELLS:g}; "
                         f"increase n")
    if n < MIN_N:
        raise ValueError(f"grid resolution n must be at least {MIN_N}, got {n}")
    return cell


def _wrapped_offsets(cell: PeriodicCell):
    """Per node: offset to the nearest pad centre image and whether it is inside a pad."""
    xs = np.arange(cell.nx) * cell.hx
    ys = np.arange(cell.ny) * cell.hy
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    best = np.full(X.shape, np.inf)
    dx = np.zeros_like(X)
    dy = np.zeros_like(X)
    for px, py in cell.pads:
        ox = X - px
        oy = Y - py
        ox -= cell.lx * np.round(ox / cell.lx)
        oy -= cell.ly * np.round(oy / cell.ly)
        r2 = ox * ox + oy * oy
        closer = r2 < best
        best = np.where(closer, r2, best)
        dx = np.where(closer, ox, dx)
        dy = np.where(closer, oy, dy)
    # a node on the circle (up to rounding) counts as a pad node
    inside = best <= cell.epsilon ** 2 * (1 + 1e-12)
    return dx, dy, inside


def assemble(cell: PeriodicCell):
    """Return ``(A, free_index, pad_mask)`` for ``A w = 1`` with ``w = -u``."""
    dx, dy, inside = _wrapped_offsets(cell)
    nx, ny = cell.nx, cell.ny
    if not inside.any():
        raise ValueError("no grid node lies in a pad: periodic Poisson problem is singular")
    free = ~inside
    index = -np.ones((nx, ny), dtype=np.int64)
    index[free] = np.arange(free.sum())
    eps2 = cell.epsilon ** 2
    diag = np.zeros(free.sum())
    rows, cols = [], []
    for axis, h in ((0, cell.hx), (1, cell.hy)):
        inv = 1.0 / (h * h)
        for step in (1, -1):
            nb_inside = np.roll(inside, -step, axis=axis)
            nb_index = np.roll(index, -step, axis=axis)
            both = free & ~nb_inside
            rows.append(index[both])
            cols.append(nb_index[both])
            diag[index[both]] += inv
            cut = free & nb_inside
            # arm from the node to the circle, measured toward the pad neighbour
            nb_dx = np.roll(dx, -step, axis=axis)[cut]
            nb_dy = np.roll(dy, -step, axis=axis)[cut]
            if axis == 0:
                along, across = nb_dx - step * h, nb_dy
            else:
                along, across = nb_dy - step * h, nb_dx
            t = -step * along - np.sqrt(np.maximum(eps2 - across * across, 0.0))
            theta = np.clip(t / h, THETA_FLOOR, 1.0)
            diag[index[cut]] += inv / theta
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    off = np.concatenate([np.full(len(a), -1.0 / (h * h))
                          for a, h in zip(rows, (cell.hx, cell.hx, cell.hy, cell.hy))])
    m = free.sum()
    A = sp.csr_matrix((np.concatenate([off, diag]),
                       (np.concatenate([r, np.arange(m)]), np.concatenate([c, np.arange(m)]))),
                      shape=(m, m))
    return A, index, inside


def solve(cell: PeriodicCell, tol: float = 1e-10, preconditioner: str = "jacobi",
          maxiter: int | None = None) -> GridSolution:
    """Solve the discrete problem; ``values`` holds ``u`` (``<= 0``, zero on pads)."""
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    A, index, inside = assemble(cell)
    if maxiter is None:
        maxiter = 200 * max(cell.nx, cell.ny)
    res = pcg(A, np.ones(A.shape[0]), tol=tol, maxiter=maxiter, preconditioner=preconditioner)
    u = np.zeros((cell.nx, cell.ny))
    u[~inside] = -res.x
    return GridSolution(cell, u, inside, res.residual, res.iterations, tol)


def max_drop(sol: GridSolution) -> tuple[float, tuple[float, float]]:
    """Largest ``-u`` over nodes and its location; ties go to the first node in (i, j) order."""
    drop = -sol.values
    k = int(np.argmax(drop))
    i, j = np.unravel_index(k, drop.shape)
    return float(drop[i, j]), (float(i * sol.cell.hx), float(j * sol.cell.hy))


def distance_to_centre(cell: PeriodicCell, location) -> float:
    """Periodic distance from ``location`` to the closest predicted peak, in grid cells."""
    offs = cell.centres() - np.asarray(location, dtype=float)
    offs[:, 0] -= cell.lx * np.round(offs[:, 0] / cell.lx)
    offs[:, 1] -= cell.ly * np.round(offs[:, 1] / cell.ly)
    return float(np.min(np.hypot(offs[:, 0] / cell.hx, offs[:, 1] / cell.hy)))


def value_at(sol: GridSolution, location) -> float:
    """``u`` at the node nearest ``location`` (periodic)."""
    i, j = _nearest_node(sol.cell, location)
    return float(sol.values[i, j])


def _nearest_node(cell: PeriodicCell, location) -> tuple[int, int]:
    x, y = location
    if not (-cell.lx <= x <= 2 * cell.lx and -cell.ly <= y <= 2 * cell.ly):
        raise ValueError(f"location {location} is out of the cell")
    return int(round(x / cell.hx)) % cell.nx, int(round(y / cell.hy)) % cell.ny


@dataclass(frozen=True)
class RichardsonResult:
    value: float
    error_estimate: float
    coarse: float
    fine: float
    coarse_solution: GridSolution
    fine_solution: GridSolution

    def at(self, location) -> tuple[float, float]:
        """Extrapolated drop ``-u`` at ``location`` and its error estimate."""
        v1 = -value_at(self.coarse_solution, location)
        v2 = -value_at(self.fine_solution, location)
        return v2 + (v2 - v1) / 3, abs(v2 - v1) / 3


def richardson(cell: PeriodicCell, tol: float = 1e-10, n1: int | None = None,
               n2: int | None = None, preconditioner: str = "jacobi") -> RichardsonResult:
    """Second-order extrapolation ``v2 + (v2 - v1)/3`` of the max drop.

    The fine grid halves both spacings of the coarse one, so nodes of the
    coarse grid are nodes of the fine grid.
    """
    n1 = cell.n if n1 is None else n1
    n2 = 2 * n1 if n2 is None else n2
    if n2 != 2 * n1:
        raise ValueError(f"Richardson needs n2 = 2*n1, got {n1}, {n2}")
    coarse = cell if n1 == cell.n else build_cell(cell.arrangement, cell.epsilon, n1, cell.scale)
    s1 = solve(coarse, tol, preconditioner)
    s2 = solve(coarse.refined(2), tol, preconditioner)
    v1, v2 = max_drop(s1)[0], max_drop(s2)[0]
    return RichardsonResult(v2 + (v2 - v1) / 3, abs(v2 - v1) / 3, v1, v2, s1, s2)


def hessian_at_center(sol: GridSolution, location) -> tuple[float, float]:
    """Central second differences ``(u_xx, u_yy)`` at the node nearest ``location``."""
    i, j = _nearest_node(sol.cell, location)
    u = sol.values
    nx, ny = u.shape
    if sol.pad_mask[[(i - 1) % nx, (i + 1) % nx, i, i], [j, j, (j - 1) % ny, (j + 1) % ny]].any():
        raise ValueError("stencil at location touches a pad")
    uxx = (u[(i + 1) % nx, j] - 2 * u[i, j] + u[(i - 1) % nx, j]) / sol.cell.hx ** 2
    uyy = (u[i, (j + 1) % ny] - 2 * u[i, j] + u[i, (j - 1) % ny]) / sol.cell.hy ** 2
    return float(uxx), float(uyy)


def summary(sol: GridSolution) -> dict:
    value, loc = max_drop(sol)
    return {"value": value, "location": list(loc), "residual": sol.residual,
            "iterations": sol.iterations, "h": sol.h,
            "distance_cells": distance_to_centre(sol.cell, loc)}


def write_csv(sol: GridSolution, path) -> None:
    X, Y = sol.coordinates()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "u"])
        for x, y, u in zip(X.ravel(), Y.ravel(), sol.values.ravel()):
            w.writerow([f"{x:.12g}", f"{y:.12g}", f"{u:.12g}"])


def write_json(sol: GridSolution, path) -> None:
    with open(path, "w") as fh:
        json.dump(summary(sol), fh, indent=2)
        fh.write("\n")
