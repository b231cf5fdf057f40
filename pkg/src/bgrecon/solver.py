"""Backus-Gilbert weight systems: assembly, solves, reconstruction,
iterative re-linearization, and the error-budget diagnostics.

The adjoint system has one equation per basis spline,

    sum_i <dA(x0)* e_i, S_j> phi_i = <mu, S_j>,   j = 0..N-1,

plus one extra row enforcing <phi, A x0 - dA(x0) x0> = 0, giving an
overdetermined (N+1) x N system solved in the least-squares sense.
All inner products use the same grid trapezoid rule as the forward map,
so reconstruction is exact on the spline subspace for linear operators.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .bspline import CubicBSplineBasis, delta_moments, interpolate
from .grid import SampledFunction, quad_weighted_integral
from .volterra import (
    DiscreteForwardMap,
    QuadraticVolterraOperator,
    apply_A,
    apply_dA,
    forward_dA,
    forward_data,
)


class NearSingularSystemError(np.linalg.LinAlgError):
    """The assembled adjoint block is numerically singular."""


CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class WeightVector:
    coefficients: np.ndarray = field(repr=False)
    target: tuple
    residual: float = 0.0

    def __post_init__(self):
        coeffs = np.asarray(self.coefficients, dtype=float)
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("weight coefficients must be finite")
        object.__setattr__(self, "coefficients", coeffs)


@dataclass(frozen=True)
class AssembledSystem:
    """(N+1) x N matrix: N adjoint rows (one per spline) + constraint row."""

    matrix: np.ndarray = field(repr=False)
    rhs: np.ndarray = field(repr=False)
    condition: float

    @property
    def n(self) -> int:
        return self.matrix.shape[1]


def _adjoint_block(
    op: QuadraticVolterraOperator,
    basis: CubicBSplineBasis,
    x0: SampledFunction,
    fmap: DiscreteForwardMap,
) -> np.ndarray:
    """Matrix block M[j, i] = <dA(x0)* e_i, S_j> by grid trapezoid rule."""
    grid = op.grid
    s = grid.nodes
    n = basis.size
    spline_vals = basis.node_values()  # (N, N+1)
    block = np.zeros((n, fmap.nodes.size))
    for i, ti in enumerate(fmap.nodes):
        kappa = op.kernel(ti - s) + 2 * op.nu * x0(ti - s)
        for j in range(n):
            integrand = SampledFunction(grid, kappa * spline_vals[j])
            block[j, i] = quad_weighted_integral(integrand, 0.0, ti)
    return block


def constraint_row(
    op: QuadraticVolterraOperator,
    x0: SampledFunction,
    fmap: DiscreteForwardMap,
) -> np.ndarray:
    """Entries c_i = (A x0)(t_i) - (dA(x0) x0)(t_i); identically 0 for nu=0."""
    return forward_data(fmap, x0) - forward_dA(fmap, x0, x0)


def assemble_adjoint_system(
    op: QuadraticVolterraOperator,
    basis: CubicBSplineBasis,
    x0: SampledFunction,
    mu_moments: np.ndarray,
    fmap: DiscreteForwardMap | None = None,
) -> AssembledSystem:
    if fmap is None:
        fmap = DiscreteForwardMap(op)
    mu_moments = np.asarray(mu_moments, dtype=float)
    if mu_moments.shape != (basis.size,):
        raise ValueError(f"expected {basis.size} moments, got {mu_moments.size}")
    block = _adjoint_block(op, basis, x0, fmap)
    matrix = np.vstack([block, constraint_row(op, x0, fmap)])
    condition = float(np.linalg.cond(block))
    if condition > CONDITION_LIMIT:
        raise NearSingularSystemError(
            f"adjoint block condition {condition:.3e} exceeds {CONDITION_LIMIT:.0e}"
        )
    rhs = np.concatenate([mu_moments, [0.0]])
    return AssembledSystem(matrix, rhs, condition)


def solve_weights(system: AssembledSystem, target: tuple = ("moments",)) -> WeightVector:
    """Least-squares solution of the overdetermined system (minimum-norm
    when rank deficient)."""
    phi, _, rank, _ = np.linalg.lstsq(system.matrix, system.rhs, rcond=None)
    if rank < system.n:
        import warnings

        warnings.warn(
            f"weight system rank deficient: rank {rank} < {system.n}",
            RuntimeWarning,
            stacklevel=2,
        )
    residual = float(np.linalg.norm(system.matrix @ phi - system.rhs))
    return WeightVector(phi, target, residual)


def reconstruct_value(phi: WeightVector, y_data: np.ndarray) -> float:
    y_data = np.asarray(y_data, dtype=float)
    if y_data.shape != phi.coefficients.shape:
        raise ValueError(
            f"length mismatch: {phi.coefficients.size} weights, {y_data.size} data"
        )
    return float(phi.coefficients @ y_data)


def reconstruct_profile(
    op: QuadraticVolterraOperator,
    basis: CubicBSplineBasis,
    x0: SampledFunction,
    y_data: np.ndarray,
    targets: Sequence[float],
    fmap: DiscreteForwardMap | None = None,
) -> list[tuple[float, float]]:
    """Reconstructed values <delta(t0-.), x> for each target t0.

    The weight system does not depend on the data or on the target, so
    the matrix is assembled and pseudo-inverted once.
    """
    targets = list(targets)
    if not targets:
        return []
    if fmap is None:
        fmap = DiscreteForwardMap(op)
    system = assemble_adjoint_system(
        op, basis, x0, delta_moments(basis, targets[0]), fmap
    )
    solve = np.linalg.pinv(system.matrix)
    y_data = np.asarray(y_data, dtype=float)
    out = []
    for t0 in targets:
        rhs = np.concatenate([delta_moments(basis, t0), [0.0]])
        phi = solve @ rhs
        out.append((t0, float(phi @ y_data)))
    return out


def profile_to_csv(pairs, path, truth: Callable[[float], float] | None = None) -> None:
    with open(path, "w", newline="") as fh:
        if truth is None:
            fh.write("t,reconstructed\n")
            for t0, v in pairs:
                fh.write(f"{t0:.12g},{v:.12g}\n")
        else:
            fh.write("t,reconstructed,truth\n")
            for t0, v in pairs:
                fh.write(f"{t0:.12g},{v:.12g},{truth(t0):.12g}\n")


def classical_bg_weights(
    kernels: Sequence[SampledFunction], t0: float
) -> WeightVector:
    """Classical Backus-Gilbert weights for given data kernels K_i.

    Minimizes J(phi) = int |t0-s|^2 (sum_i phi_i K_i(s))^2 ds subject to
    the unit-integral constraint int sum_i phi_i K_i = 1, via a single
    Lagrange multiplier: phi = G^-1 k / (k^T G^-1 k).
    """
    if not kernels:
        raise ValueError("need at least one kernel")
    grid = kernels[0].grid
    s = grid.nodes
    m = len(kernels)
    gram = np.zeros((m, m))
    for i in range(m):
        for j in range(i, m):
            integrand = SampledFunction(
                grid, (t0 - s) ** 2 * kernels[i].values * kernels[j].values
            )
            gram[i, j] = gram[j, i] = quad_weighted_integral(integrand, 0.0, 1.0)
    k = np.asarray([quad_weighted_integral(ki, 0.0, 1.0) for ki in kernels])
    try:
        c = scipy.linalg.solve(gram, k, assume_a="sym")
    except scipy.linalg.LinAlgError as exc:
        raise NearSingularSystemError(f"singular Gram matrix: {exc}") from exc
    if not np.all(np.isfinite(c)):
        raise NearSingularSystemError("singular Gram matrix")
    denom = k @ c
    if abs(denom) < 1e-14 * (1 + np.linalg.norm(k) * np.linalg.norm(c)):
        raise ValueError("unit-integral constraint infeasible: k^T G^-1 k = 0")
    phi = c / denom
    return WeightVector(phi, ("classical", t0), 0.0)


def extended_bg_weights(bgh: np.ndarray, a_row: np.ndarray) -> WeightVector:
    """Extended Backus-Gilbert weights: minimize phi^T Q phi subject to
    a_row . phi = 1, with Q the eigenvalue-clamped symmetrization of bgh.

    Ties (directions Q does not see) are broken by minimum norm, so
    Q = 0 returns the minimum-norm feasible point a_row/||a_row||^2.
    """
    bgh = np.asarray(bgh, dtype=float)
    a_row = np.asarray(a_row, dtype=float)
    norm_a = np.linalg.norm(a_row)
    if norm_a == 0:
        raise ValueError("constraint row is zero: problem infeasible")
    q = (bgh + bgh.T) / 2
    eigval, eigvec = np.linalg.eigh(q)
    q = (eigvec * np.clip(eigval, 0.0, None)) @ eigvec.T
    phi0 = a_row / norm_a**2
    z = scipy.linalg.null_space(a_row[None, :])
    if z.size:
        u, *_ = np.linalg.lstsq(z.T @ q @ z, -z.T @ (q @ phi0), rcond=None)
        phi = phi0 + z @ u
    else:
        phi = phi0
    return WeightVector(phi, ("extended",), float(phi @ q @ phi))


def iterative_refinement(
    op: QuadraticVolterraOperator,
    basis: CubicBSplineBasis,
    x0_init: SampledFunction,
    y_data: np.ndarray,
    targets: Sequence[float],
    rounds: int,
    fmap: DiscreteForwardMap | None = None,
) -> list[list[tuple[float, float]]]:
    """Repeated reconstruction with re-linearization at the B-spline
    interpolant of the previous round's nodal values."""
    if rounds < 1:
        raise ValueError(f"rounds must be >= 1, got {rounds}")
    if fmap is None:
        fmap = DiscreteForwardMap(op)
    grid = op.grid
    nodes = grid.nodes
    x0 = x0_init
    profiles: list[list[tuple[float, float]]] = []
    prev_vals = None
    scale0 = None
    for _ in range(rounds):
        node_pairs = reconstruct_profile(op, basis, x0, y_data, nodes, fmap)
        node_vals = np.asarray([v for _, v in node_pairs])
        pairs = reconstruct_profile(op, basis, x0, y_data, targets, fmap)
        profiles.append(pairs)
        if scale0 is None:
            scale0 = max(1.0, np.max(np.abs(node_vals)))
        elif np.max(np.abs(node_vals)) > 1e3 * scale0:
            raise RuntimeError(
                "iterative refinement diverged: sup-norm grew by more than 1e3"
            )
        if prev_vals is not None and np.max(np.abs(node_vals - prev_vals)) < 1e-8:
            break
        prev_vals = node_vals
        coeffs = interpolate(basis, SampledFunction(grid, node_vals))
        x0 = SampledFunction(grid, basis.eval_combination(coeffs, nodes))
    return profiles


@dataclass(frozen=True)
class ErrorBudget:
    """The four addends bounding |f - f_{eps,phi}| for a linearized
    reconstruction, plus optional linear-theory diagnostics."""

    noise_term: float
    linearization_term: float
    constraint_term: float
    adjoint_defect_term: float
    dist_x_star: float | None = None
    projector_norm: float | None = None

    def __post_init__(self):
        for name in (
            "noise_term",
            "linearization_term",
            "constraint_term",
            "adjoint_defect_term",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    @property
    def total(self) -> float:
        return (
            self.noise_term
            + self.linearization_term
            + self.constraint_term
            + self.adjoint_defect_term
        )

    def to_text(self) -> str:
        lines = [
            f"noise_term={self.noise_term:.12g}",
            f"linearization_term={self.linearization_term:.12g}",
            f"constraint_term={self.constraint_term:.12g}",
            f"adjoint_defect_term={self.adjoint_defect_term:.12g}",
            f"total={self.total:.12g}",
        ]
        if self.dist_x_star is not None:
            lines.append(f"dist_x_star={self.dist_x_star:.12g}")
        if self.projector_norm is not None:
            lines.append(f"projector_norm={self.projector_norm:.12g}")
        return "\n".join(lines) + "\n"


def error_budget(
    op: QuadraticVolterraOperator,
    x_star: SampledFunction,
    x0: SampledFunction,
    phi: WeightVector,
    mu: Callable[[SampledFunction], float],
    y: np.ndarray,
    y_eps: np.ndarray,
    fmap: DiscreteForwardMap | None = None,
    basis: CubicBSplineBasis | None = None,
) -> ErrorBudget:
    """Evaluate the four error-bound terms for ground truth x_star.

    All terms use the discrete forward quantities, so the bound
    |mu(x_star) - phi . y_eps| <= total holds as an exact triangle
    inequality whenever y = forward_data(x_star).
    """
    if fmap is None:
        fmap = DiscreteForwardMap(op)
    w = phi.coefficients
    ax_star = forward_data(fmap, x_star)
    ax0 = forward_data(fmap, x0)
    diff = SampledFunction(op.grid, x_star.values - x0.values)
    da_diff = forward_dA(fmap, x0, diff)
    da_xstar = forward_dA(fmap, x0, x_star)
    da_x0 = forward_dA(fmap, x0, x0)
    noise = abs(w @ (y - y_eps))
    linearization = abs(w @ (ax_star - ax0 - da_diff))
    constraint = abs(w @ (ax0 - da_x0))
    adjoint_defect = abs(w @ da_xstar - mu(x_star))
    dist_x = proj_norm = None
    if basis is not None:
        dist_x = subspace_distance(basis, x_star)
        proj_norm = 1.0  # orthogonal projector in the discrete L2 surrogate
    return ErrorBudget(noise, linearization, constraint, adjoint_defect, dist_x, proj_norm)


def subspace_distance(basis: CubicBSplineBasis, x: SampledFunction) -> float:
    """L2 distance (grid trapezoid surrogate) from x to the spline span."""
    grid = basis.grid
    h = grid.h
    w = np.full(grid.n + 1, h)
    w[0] = w[-1] = h / 2
    sv = basis.node_values()  # (N, N+1)
    sqrt_w = np.sqrt(w)
    design = sv.T * sqrt_w[:, None]
    coeffs, *_ = np.linalg.lstsq(design, x.values * sqrt_w, rcond=None)
    resid = x.values - sv.T @ coeffs
    return float(np.sqrt(np.sum(w * resid**2)))
