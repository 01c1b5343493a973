"""Resistor-mesh model of a power grid fed by square or staggered pad placements.

Every node of a ``rows x cols`` mesh sinks the same current; neighbouring
nodes are joined by equal wire resistances and pad nodes are held at the
supply voltage.  Nodal analysis gives ``L d = r I`` for the drop ``d`` at the
free nodes, ``L`` being the graph Laplacian with pad rows removed.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra

from .krylov import pcg
from .lattice import Arrangement

#: Target ratio of row spacing to in-row spacing for equilateral pads.
EQUILATERAL_RATIO = math.sqrt(3) / 2


class PlacementError(ValueError):
    pass


@dataclass(frozen=True)
class ResistorMesh:
    rows: int
    cols: int
    pad_nodes: frozenset
    wire_resistance: float = 1.0
    sink_current: float = 1e-3
    pad_voltage: float = 5.0
    wrap: bool = False

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"mesh needs positive dimensions, got {self.rows}x{self.cols}")
        if self.wrap and min(self.rows, self.cols) < 3:
            raise ValueError("a wrapped mesh needs at least 3 rows and 3 columns")
        if not self.wire_resistance > 0:
            raise ValueError(f"wire resistance must be positive, got {self.wire_resistance}")
        if not self.pad_nodes:
            raise ValueError("mesh has no pads: nodal system is singular")
        n = self.rows * self.cols
        if min(self.pad_nodes) < 0 or max(self.pad_nodes) >= n:
            raise ValueError("pad node index out of range")

    @property
    def size(self) -> int:
        return self.rows * self.cols

    @property
    def density(self) -> float:
        return len(self.pad_nodes) / self.size

    def laplacian(self) -> sp.csr_matrix:
        """Unit-conductance graph Laplacian of the whole mesh."""
        idx = np.arange(self.size).reshape(self.rows, self.cols)
        right = idx if self.wrap else idx[:, :-1]
        down = idx if self.wrap else idx[:-1, :]
        a = np.concatenate([right.ravel(), down.ravel()])
        b = np.concatenate([np.roll(idx, -1, axis=1)[:, :right.shape[1]].ravel(),
                            np.roll(idx, -1, axis=0)[:down.shape[0], :].ravel()])
        adj = sp.coo_matrix((np.ones(a.size), (a, b)), shape=(self.size, self.size))
        adj = (adj + adj.T).tocsr()
        return (sp.diags(np.asarray(adj.sum(axis=1)).ravel()) - adj).tocsr()


@dataclass
class MeshSolution:
    mesh: ResistorMesh
    voltages: np.ndarray
    kcl_residual: float
    iterations: int

    def grid(self) -> np.ndarray:
        return self.voltages.reshape(self.mesh.rows, self.mesh.cols)


def _grid_pads(rows, cols, row_step, col_step, row0, col0, stagger) -> frozenset:
    out = set()
    for k, r in enumerate(range(row0, rows, row_step)):
        start = col0 + (stagger if k % 2 else 0)
        out.update(r * cols + c for c in range(start, cols, col_step))
    return frozenset(out)


def _square_pads(rows, cols, pitch) -> frozenset:
    return _grid_pads(rows, cols, pitch, pitch, pitch // 2, pitch // 2, 0)


def _staggered_pads(rows, cols, a, s, r0=None, c0=None) -> frozenset:
    r0 = s // 2 if r0 is None else r0
    c0 = a // 4 if c0 is None else c0
    return _grid_pads(rows, cols, s, a, r0, c0, a // 2)


def _staggered_count(rows, cols, a, s, r0, c0) -> int:
    k = len(range(r0, rows, s))
    even = len(range(c0, cols, a))
    odd = len(range(c0 + a // 2, cols, a))
    return (k + 1) // 2 * even + k // 2 * odd


@dataclass(frozen=True)
class StaggeredLayout:
    """Rows ``s`` apart, pads ``a`` apart within a row, odd rows shifted by ``a/2``.

    Margins mirror the square placement: the first row sits ``s//2`` from
    the edge and the first pad ``a//4`` in.
    """

    a: int
    s: int

    def pads(self, rows: int, cols: int) -> frozenset:
        return _staggered_pads(rows, cols, self.a, self.s)


def staggered_layout(rows: int, cols: int, pitch: int, wrap: bool = False) -> StaggeredLayout:
    """Density-matched staggered placement for a ``rows x cols`` mesh.

    Among placements whose pad count is within one of the square placement,
    picks the one with ``s/a`` closest to ``sqrt(3)/2``, then cell area
    ``a*s`` closest to ``pitch^2``.  A wrapped mesh also needs the pattern to
    tile it.
    """
    target = len(_square_pads(rows, cols, pitch))
    best = None
    closest = None
    for a in range(2, 4 * pitch + 1, 2):
        for s in range(1, 4 * pitch + 1):
            if wrap and (cols % a or rows % (2 * s)):
                continue
            count = _staggered_count(rows, cols, a, s, s // 2, a // 4)
            if closest is None or abs(count - target) < abs(closest - target):
                closest = count
            if abs(count - target) > 1:
                continue
            key = (abs(s / a - EQUILATERAL_RATIO), abs(a * s - pitch * pitch), a)
            if best is None or key < best[0]:
                best = (key, a, s)
    if best is None:
        got = (closest or 0) / (rows * cols)
        raise PlacementError(
            f"no staggered placement on a {rows}x{cols} {'wrapped' if wrap else 'open'} mesh "
            f"matches the square density {target / (rows * cols):.5g}; closest achieved {got:.5g}")
    return StaggeredLayout(best[1], best[2])


def _blocks(pads: frozenset, rows: int, cols: int, k: int, wrap: bool) -> frozenset:
    if k == 1:
        return pads
    lo = -((k - 1) // 2)
    out = set()
    for p in pads:
        r0, c0 = divmod(p, cols)
        for dr in range(lo, lo + k):
            for dc in range(lo, lo + k):
                r, c = r0 + dr, c0 + dc
                if wrap:
                    r, c = r % rows, c % cols
                elif not (0 <= r < rows and 0 <= c < cols):
                    continue
                out.add(r * cols + c)
    return frozenset(out)


def place_pads(rows: int, cols: int, arrangement: Arrangement | str, pitch: int,
               wrap: bool = False, pad_block: int = 1) -> frozenset:
    """Pad node indices (``row*cols + col``) for a square or staggered placement.

    Square pads sit every ``pitch`` nodes in both directions.  Staggered pads
    use :func:`staggered_layout`, shifting alternate rows by half the
    in-row spacing.  ``pad_block`` grows each pad to a ``k x k`` node block.
    """
    arrangement = Arrangement.parse(arrangement)
    if int(pitch) != pitch or pitch < 1:
        raise ValueError(f"pitch must be a positive integer, got {pitch}")
    if int(pad_block) != pad_block or pad_block < 1:
        raise ValueError(f"pad block must be a positive integer, got {pad_block}")
    if pad_block > 1 and pad_block >= pitch:
        raise ValueError(f"pad block {pad_block} must be smaller than the pitch {pitch}")
    if arrangement is Arrangement.SQUARE:
        if wrap and (rows % pitch or cols % pitch):
            raise PlacementError(f"pitch {pitch} does not tile a wrapped {rows}x{cols} mesh")
        pads = _square_pads(rows, cols, pitch)
    elif arrangement is Arrangement.TRIANGULAR:
        if pitch < 2:
            raise PlacementError("staggered placement needs pitch >= 2")
        pads = staggered_layout(rows, cols, pitch, wrap).pads(rows, cols)
    else:
        raise ValueError("mesh placements are square or triangular")
    if pitch > 1 and len(pads) < 4:
        raise PlacementError(f"{rows}x{cols} mesh holds only {len(pads)} pads at pitch {pitch}; "
                             f"need at least 4")
    return _blocks(pads, rows, cols, int(pad_block), wrap)


def solve_mesh(mesh: ResistorMesh, tol: float = 1e-10, preconditioner: str = "jacobi") -> MeshSolution:
    """Nodal voltages with pads at ``pad_voltage`` and every free node sinking ``sink_current``."""
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    L = mesh.laplacian()
    pads = np.zeros(mesh.size, dtype=bool)
    pads[list(mesh.pad_nodes)] = True
    free = ~pads
    drop = np.zeros(mesh.size)
    iterations = 0
    if free.any():
        res = pcg(L[free][:, free], np.full(free.sum(), mesh.wire_resistance * mesh.sink_current),
                  tol=tol, maxiter=20 * mesh.size + 100, preconditioner=preconditioner)
        drop[free] = res.x
        iterations = res.iterations
    v = mesh.pad_voltage - drop
    # net current into each free node minus its sink
    sink = np.full(free.sum(), mesh.sink_current)
    kcl = -(L @ v)[free] / mesh.wire_resistance - sink
    norm = np.linalg.norm(sink)
    rel = float(np.linalg.norm(kcl) / norm) if norm > 0 else float(np.linalg.norm(kcl))
    return MeshSolution(mesh, v, rel, iterations)


def kcl_residuals(sol: MeshSolution) -> np.ndarray:
    """Per free node: wire current in minus sink current (amps)."""
    m = sol.mesh
    free = np.ones(m.size, dtype=bool)
    free[list(m.pad_nodes)] = False
    return -(m.laplacian() @ sol.voltages)[free] / m.wire_resistance - m.sink_current


def max_mesh_drop(sol: MeshSolution) -> float:
    return float(sol.mesh.pad_voltage - sol.voltages.min())


def drop_upper_bound(mesh: ResistorMesh) -> float:
    """Total sink current times the longest wire path to the nearest pad."""
    adj = mesh.laplacian()
    adj = -(adj - sp.diags(adj.diagonal()))
    hops = dijkstra(adj, unweighted=True, indices=sorted(mesh.pad_nodes), min_only=True)
    free = mesh.size - len(mesh.pad_nodes)
    return float(abs(mesh.sink_current) * free * mesh.wire_resistance * hops.max())


def summary(sol: MeshSolution) -> dict:
    m = sol.mesh
    return {"drop": max_mesh_drop(sol), "pad_count": len(m.pad_nodes), "density": m.density,
            "kcl_residual": sol.kcl_residual, "iterations": sol.iterations}


def write_csv(sol: MeshSolution, path) -> None:
    g = sol.grid()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row", "col", "voltage"])
        for (r, c), v in np.ndenumerate(g):
            w.writerow([r, c, f"{v:.12g}"])


def write_json(sol: MeshSolution, path) -> None:
    with open(path, "w") as fh:
        json.dump(summary(sol), fh, indent=2)
        fh.write("\n")
