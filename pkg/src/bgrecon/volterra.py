"""Quadratic Volterra convolution operator A = A0 + nu*A1 on [0,1].

    (Ax)(t) = int_0^t k(t-s) x(s) ds + nu * int_0^t x(t-s) x(s) ds

with kernel k and a small nonlinearity weight nu. Also provides the
discrete forward map at the measurement nodes t_i, the linearization
dA and its discrete adjoint.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import SampledFunction, UniformGrid, quad_weighted_integral


@dataclass(frozen=True)
class QuadraticVolterraOperator:
    kernel: SampledFunction
    nu: float

    def __post_init__(self):
        if self.nu < 0:
            raise ValueError(f"nonlinearity weight must be nonnegative, got {self.nu}")

    @property
    def grid(self) -> UniformGrid:
        return self.kernel.grid


@dataclass(frozen=True)
class DiscreteForwardMap:
    """Point evaluation of Ax at the measurement nodes t_i = i/N, i=1..N."""

    op: QuadraticVolterraOperator
    nodes: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        nodes = self.nodes
        if nodes is None:
            nodes = self.op.grid.nodes[1:]
        nodes = np.asarray(nodes, dtype=float)
        if np.any(np.diff(nodes) <= 0) or nodes[0] <= 0 or nodes[-1] > 1:
            raise ValueError("measurement nodes must be strictly increasing in (0,1]")
        object.__setattr__(self, "nodes", nodes)


def apply_A(op: QuadraticVolterraOperator, x: SampledFunction, t: float) -> float:
    """(Ax)(t); kernel values at non-node arguments are linearly interpolated."""
    s = op.grid.nodes
    integrand = op.kernel(t - s) * x.values + op.nu * x(t - s) * x.values
    return quad_weighted_integral(SampledFunction(op.grid, integrand), 0.0, t)


def forward_data(fmap: DiscreteForwardMap, x: SampledFunction) -> np.ndarray:
    """Data vector [Ax(t_i)] over the measurement nodes."""
    return np.asarray([apply_A(fmap.op, x, t) for t in fmap.nodes])


def forward_data_exact(
    op: QuadraticVolterraOperator,
    x_fn,
    nodes: np.ndarray | None = None,
    m: int = 4096,
) -> np.ndarray:
    """Data vector [Ax(t_i)] from a callable x, resolved on a dense
    auxiliary grid (m subintervals per integral).

    Stands in for analytically solved right-hand sides: the quadrature
    error is far below the coarse-grid discretization error, so
    reconstruction errors reflect the approximation properties of the
    method rather than data/assembly consistency.
    """
    if nodes is None:
        nodes = op.grid.nodes[1:]
    out = np.zeros(len(nodes))
    for i, t in enumerate(nodes):
        s = np.linspace(0.0, t, m + 1)
        x_s = np.asarray([x_fn(v) for v in s])
        x_rev = x_s[::-1]  # x(t - s) on the symmetric dense grid
        integrand = op.kernel(t - s) * x_s + op.nu * x_rev * x_s
        out[i] = np.trapezoid(integrand, s)
    return out


def apply_dA(
    op: QuadraticVolterraOperator,
    x: SampledFunction,
    f: SampledFunction,
    t: float,
) -> float:
    """Linearization of A at x applied to f, evaluated at t:

    int_0^t k(t-s) f(s) ds + 2*nu * int_0^t x(t-s) f(s) ds
    """
    s = op.grid.nodes
    integrand = op.kernel(t - s) * f.values + 2 * op.nu * x(t - s) * f.values
    return quad_weighted_integral(SampledFunction(op.grid, integrand), 0.0, t)


def forward_dA(
    fmap: DiscreteForwardMap, x: SampledFunction, f: SampledFunction
) -> np.ndarray:
    """Vector [dA(x)f (t_i)] over the measurement nodes."""
    return np.asarray([apply_dA(fmap.op, x, f, t) for t in fmap.nodes])


def apply_dA_adjoint(
    fmap: DiscreteForwardMap, x: SampledFunction, w: np.ndarray
) -> SampledFunction:
    """Adjoint of the discrete linearization applied to a weight vector w:

    s -> sum_i w_i [k(t_i - s) + 2*nu*x(t_i - s)] * 1{s <= t_i}
    """
    w = np.asarray(w, dtype=float)
    if w.shape != fmap.nodes.shape:
        raise ValueError(f"expected {fmap.nodes.size} weights, got {w.size}")
    op = fmap.op
    s = op.grid.nodes
    out = np.zeros_like(s)
    for wi, ti in zip(w, fmap.nodes):
        mask = s <= ti
        out[mask] += wi * (
            op.kernel(ti - s[mask]) + 2 * op.nu * x(ti - s[mask])
        )
    return SampledFunction(op.grid, out)
