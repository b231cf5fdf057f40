"""Uniform grids on [0,1], trapezoid quadrature, norms and noise injection."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class UniformGrid:
    """Uniform partition of [0,1] into n subintervals, nodes t_j = j/n."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"subinterval count must be positive, got {self.n}")

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n + 1) / self.n


@dataclass(frozen=True)
class SampledFunction:
    """Values of a real function at the nodes of a uniform grid."""

    grid: UniformGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n + 1,):
            raise ValueError(
                f"expected {self.grid.n + 1} values, got shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("sampled values must be finite")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, grid: UniformGrid, f) -> "SampledFunction":
        return cls(grid, np.asarray([f(t) for t in grid.nodes], dtype=float))

    def __call__(self, t):
        """Piecewise-linear interpolation; arguments are clamped to [0,1]."""
        return np.interp(t, self.grid.nodes, self.values)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("t,value\n")
            for t, v in zip(self.grid.nodes, self.values):
                fh.write(f"{t:.12g},{v:.12g}\n")


@dataclass(frozen=True)
class NoiseSpec:
    """Relative noise level and RNG seed for reproducible perturbations."""

    level: float
    seed: int = 0

    def __post_init__(self):
        if self.level < 0:
            raise ValueError(f"noise level must be nonnegative, got {self.level}")


def quad_weighted_integral(f: SampledFunction, a: float, b: float) -> float:
    """Integral of the piecewise-linear interpolant of f over [a,b].

    Composite trapezoid rule; endpoints not on the grid are handled by
    linear interpolation. O(h^2) accurate for C^2 integrands.
    """
    if not (0.0 <= a <= b <= 1.0):
        raise ValueError(f"need 0 <= a <= b <= 1, got a={a}, b={b}")
    if a == b:
        return 0.0
    t = f.grid.nodes
    inner = t[(t > a) & (t < b)]
    xs = np.concatenate(([a], inner, [b]))
    ys = np.interp(xs, t, f.values)
    return float(np.trapezoid(ys, xs))


def add_relative_noise(y: SampledFunction, spec: NoiseSpec) -> SampledFunction:
    """Perturb each entry by y_j * level * u_j with u_j uniform in [-1,1].

    The bound |y_j - y_eps_j| <= level * |y_j| holds entrywise and the
    draw is deterministic for a fixed seed.
    """
    rng = np.random.default_rng(spec.seed)
    u = rng.uniform(-1.0, 1.0, size=y.values.shape)
    return SampledFunction(y.grid, y.values + y.values * spec.level * u)


def noise_direction(shape, seed: int) -> np.ndarray:
    """The uniform [-1,1] direction vector a given seed produces."""
    rng = np.random.default_rng(seed)
    return rng.uniform(-1.0, 1.0, size=shape)


def sup_error(f: SampledFunction, g: SampledFunction) -> float:
    """Nodewise sup-norm distance max_j |f_j - g_j| on a shared grid."""
    if f.grid.n != g.grid.n:
        raise ValueError(f"grid mismatch: {f.grid.n} vs {g.grid.n}")
    return float(np.max(np.abs(f.values - g.values)))
