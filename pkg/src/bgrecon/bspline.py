"""Cubic B-spline basis S_j on the uniform grid, scaled so S_j(t_j) = 1.

The basis has N members, j = 0..N-1, each supported on
[t_{j-2}, t_{j+2}] intersected with [0,1]. Members near the left edge
overhang t < 0 and are simply truncated; no boundary modification is
applied.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import SampledFunction, UniformGrid


@dataclass(frozen=True)
class CubicBSplineBasis:
    grid: UniformGrid

    @property
    def size(self) -> int:
        return self.grid.n

    def eval_spline(self, j: int, t):
        """Value of S_j at t (scalar or array)."""
        n = self.grid.n
        if not 0 <= j <= n - 1:
            raise IndexError(f"spline index {j} out of range [0, {n - 1}]")
        h = self.grid.h
        tj = j * h
        t = np.asarray(t, dtype=float)
        u = t - tj  # distance from the center node; pieces are symmetric in u
        piece1 = (u + 2 * h) ** 3
        piece2 = h**3 + 3 * h**2 * (u + h) + 3 * h * (u + h) ** 2 - 3 * (u + h) ** 3
        piece3 = h**3 + 3 * h**2 * (h - u) + 3 * h * (h - u) ** 2 - 3 * (h - u) ** 3
        piece4 = (2 * h - u) ** 3
        val = np.select(
            [u < -h, u < 0.0, u <= h, u <= 2 * h],
            [piece1, piece2, piece3, piece4],
            default=0.0,
        )
        val = np.where(u < -2 * h, 0.0, val) / (4 * h**3)
        return val if val.ndim else float(val)

    def node_values(self) -> np.ndarray:
        """Matrix S[j, k] = S_j(t_k) over all grid nodes, shape (N, N+1)."""
        return np.stack(
            [self.eval_spline(j, self.grid.nodes) for j in range(self.size)]
        )

    def eval_combination(self, coeffs: np.ndarray, t):
        """Value of sum_j coeffs[j] * S_j at t."""
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (self.size,):
            raise ValueError(f"expected {self.size} coefficients")
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t, dtype=float)
        for j in range(self.size):
            out = out + coeffs[j] * self.eval_spline(j, t)
        return out if out.ndim else float(out)


def delta_moments(basis: CubicBSplineBasis, t0: float) -> np.ndarray:
    """Moments <delta(t0 - .), S_j> = S_j(t0), j = 0..N-1."""
    if not 0.0 <= t0 <= 1.0:
        raise ValueError(f"t0 must lie in [0,1], got {t0}")
    return np.asarray([basis.eval_spline(j, t0) for j in range(basis.size)])


def interpolate(basis: CubicBSplineBasis, samples: SampledFunction) -> np.ndarray:
    """Spline coefficients collocating samples at the nodes t_0..t_{N-1}.

    The collocation matrix S_j(t_i) is tridiagonal for this basis; the
    square system matches the basis cardinality N.
    """
    if samples.grid.n != basis.grid.n:
        raise ValueError("samples must live on the basis grid")
    n = basis.size
    nodes = basis.grid.nodes[:n]
    mat = np.zeros((n, n))
    for j in range(n):
        mat[:, j] = basis.eval_spline(j, nodes)
    coeffs = np.linalg.solve(mat, samples.values[:n])
    residual = np.max(np.abs(mat @ coeffs - samples.values[:n]))
    if residual > 1e-10 * (1.0 + np.max(np.abs(samples.values))):
        raise np.linalg.LinAlgError(
            f"collocation solve failed, residual {residual:.3e}"
        )
    return coeffs
