import numpy as np
import pytest

from bgrecon.bspline import CubicBSplineBasis, delta_moments
from bgrecon.grid import SampledFunction, UniformGrid, quad_weighted_integral
from bgrecon.solver import (
    AssembledSystem,
    NearSingularSystemError,
    WeightVector,
    assemble_adjoint_system,
    classical_bg_weights,
    constraint_row,
    error_budget,
    extended_bg_weights,
    iterative_refinement,
    reconstruct_profile,
    reconstruct_value,
    solve_weights,
    subspace_distance,
)
from bgrecon.volterra import (
    DiscreteForwardMap,
    QuadraticVolterraOperator,
    forward_data,
)


def make_setup(n=10, nu=0.0):
    grid = UniformGrid(n)
    kernel = SampledFunction(grid, grid.nodes.copy())
    op = QuadraticVolterraOperator(kernel, nu)
    return grid, CubicBSplineBasis(grid), op, DiscreteForwardMap(op)


def test_toy_matrix_entries_match_brute_force_quadrature():
    grid, basis, op, fmap = make_setup(2)
    x0 = op.kernel
    system = assemble_adjoint_system(op, basis, x0, np.zeros(2), fmap)
    s = grid.nodes
    for j in range(2):
        spline = SampledFunction(grid, basis.eval_spline(j, s))
        for i, ti in enumerate(fmap.nodes):
            integrand = SampledFunction(grid, op.kernel(ti - s) * spline.values)
            direct = quad_weighted_integral(integrand, 0.0, ti)
            assert system.matrix[j, i] == pytest.approx(direct, abs=1e-10)


def test_adjoint_block_upper_band_sparsity():
    # spline j is supported on [t_{j-2}, t_{j+2}], so row j pairs to zero
    # with every data node t_i <= t_{j-2}; equivalently entry (j, i)
    # vanishes whenever i <= j - 2 (data index i maps to node t_{i+1})
    grid, basis, op, fmap = make_setup(12)
    system = assemble_adjoint_system(op, basis, op.kernel, np.zeros(12), fmap)
    for j in range(basis.size):
        for i in range(fmap.nodes.size):
            if fmap.nodes[i] <= (j - 2) * grid.h:
                assert system.matrix[j, i] == pytest.approx(0.0, abs=1e-14)


def test_constraint_row_vanishes_for_linear_operator():
    grid, basis, op, fmap = make_setup(8, nu=0.0)
    row = constraint_row(op, op.kernel, fmap)
    np.testing.assert_allclose(row, 0.0, atol=1e-14)


def test_constraint_row_scales_linearly_in_nu():
    grid, basis, _, _ = make_setup(8)
    rows = []
    for nu in (0.1, 0.2):
        op = QuadraticVolterraOperator(
            SampledFunction(grid, grid.nodes.copy()), nu
        )
        rows.append(constraint_row(op, op.kernel, DiscreteForwardMap(op)))
    np.testing.assert_allclose(2 * rows[0], rows[1], atol=1e-13)


def test_assemble_rejects_wrong_moment_count():
    grid, basis, op, fmap = make_setup(6)
    with pytest.raises(ValueError):
        assemble_adjoint_system(op, basis, op.kernel, np.zeros(5), fmap)


def test_solve_weights_consistent_square_subsystem():
    rng = np.random.default_rng(1)
    n = 6
    block = rng.standard_normal((n, n)) + 3 * np.eye(n)
    rhs_top = rng.standard_normal(n)
    direct = np.linalg.solve(block, rhs_top)
    # appending the zero constraint row keeps the system consistent
    matrix = np.vstack([block, np.zeros(n)])
    system = AssembledSystem(matrix, np.concatenate([rhs_top, [0.0]]), 1.0)
    phi = solve_weights(system)
    np.testing.assert_allclose(phi.coefficients, direct, atol=1e-8)
    assert phi.residual == pytest.approx(0.0, abs=1e-10)


def test_solve_weights_zero_rhs():
    matrix = np.vstack([np.eye(4), np.ones(4)])
    system = AssembledSystem(matrix, np.zeros(5), 1.0)
    phi = solve_weights(system)
    np.testing.assert_allclose(phi.coefficients, 0.0)


def test_solve_weights_warns_on_rank_deficiency():
    matrix = np.zeros((5, 4))
    matrix[0, 0] = 1.0
    system = AssembledSystem(matrix, np.zeros(5), 1.0)
    with pytest.warns(RuntimeWarning):
        solve_weights(system)


def test_weight_vector_rejects_nonfinite():
    with pytest.raises(ValueError):
        WeightVector(np.array([1.0, np.inf]), ("moments",))


def test_reconstruct_value_is_dot_product():
    phi = WeightVector(np.array([1.0, -2.0, 0.5]), ("moments",))
    assert reconstruct_value(phi, np.array([2.0, 1.0, 4.0])) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        reconstruct_value(phi, np.zeros(2))


def test_profile_matches_single_target_solves():
    grid, basis, op, fmap = make_setup(10)
    x0 = op.kernel
    x = SampledFunction.from_callable(grid, lambda t: 2 * t)
    y = forward_data(fmap, x)
    pairs = reconstruct_profile(op, basis, x0, y, [0.3, 0.55], fmap)
    for t0, value in pairs:
        system = assemble_adjoint_system(op, basis, x0, delta_moments(basis, t0), fmap)
        phi = solve_weights(system)
        assert value == pytest.approx(reconstruct_value(phi, y), abs=1e-8)


def test_classical_single_kernel_forced_by_constraint():
    grid = UniformGrid(30)
    k1 = SampledFunction.from_callable(grid, lambda t: 2.0)
    phi = classical_bg_weights([k1], 0.5)
    assert phi.coefficients[0] == pytest.approx(0.5, abs=1e-10)


def test_classical_two_disjoint_kernels_concentrate_near_target():
    grid = UniformGrid(200)
    k1 = SampledFunction.from_callable(grid, lambda t: 1.0 if t <= 0.4 else 0.0)
    k2 = SampledFunction.from_callable(grid, lambda t: 1.0 if t >= 0.6 else 0.0)
    t0 = 0.2
    phi = classical_bg_weights([k1, k2], t0)
    ints = [quad_weighted_integral(k, 0.0, 1.0) for k in (k1, k2)]
    assert abs(phi.coefficients[0] * ints[0]) > abs(phi.coefficients[1] * ints[1])
    # closed-form 2x2 oracle: phi = G^-1 k / (k^T G^-1 k) with diagonal G
    s = grid.nodes
    g11 = quad_weighted_integral(
        SampledFunction(grid, (t0 - s) ** 2 * k1.values**2), 0.0, 1.0
    )
    g22 = quad_weighted_integral(
        SampledFunction(grid, (t0 - s) ** 2 * k2.values**2), 0.0, 1.0
    )
    c = np.array([ints[0] / g11, ints[1] / g22])
    expected = c / (c @ ints)
    np.testing.assert_allclose(phi.coefficients, expected, rtol=1e-8)


def test_classical_unit_integral_constraint_random_kernels():
    rng = np.random.default_rng(5)
    grid = UniformGrid(50)
    kernels = [
        SampledFunction(grid, rng.uniform(0.5, 1.5, grid.n + 1)) for _ in range(4)
    ]
    phi = classical_bg_weights(kernels, 0.37)
    total = sum(
        c * quad_weighted_integral(k, 0.0, 1.0)
        for c, k in zip(phi.coefficients, kernels)
    )
    assert total == pytest.approx(1.0, abs=1e-10)


def test_classical_rejects_empty_kernel_list():
    with pytest.raises(ValueError):
        classical_bg_weights([], 0.5)


def test_extended_weights_satisfy_constraint_and_minimize():
    rng = np.random.default_rng(9)
    m = rng.standard_normal((6, 6))
    bgh = m @ m.T
    a_row = rng.standard_normal(6)
    phi = extended_bg_weights(bgh, a_row)
    assert a_row @ phi.coefficients == pytest.approx(1.0, abs=1e-10)
    # any feasible perturbation within the constraint cannot do better
    q = (bgh + bgh.T) / 2
    base = phi.coefficients @ q @ phi.coefficients
    z = np.linalg.svd(a_row[None, :])[2][1:]
    for d in z:
        trial = phi.coefficients + 0.01 * d
        assert trial @ q @ trial >= base - 1e-10


def test_extended_weights_zero_quadratic_form_min_norm():
    a_row = np.array([3.0, 4.0])
    phi = extended_bg_weights(np.zeros((2, 2)), a_row)
    np.testing.assert_allclose(phi.coefficients, a_row / 25.0, atol=1e-12)


def test_extended_weights_zero_constraint_rejected():
    with pytest.raises(ValueError):
        extended_bg_weights(np.eye(3), np.zeros(3))


def test_error_budget_triangle_identity():
    grid, basis, op, fmap = make_setup(12, nu=0.05)
    x0 = op.kernel
    x_star = SampledFunction.from_callable(grid, lambda t: t + 0.1 * np.sin(3 * t))
    t0 = 0.5
    system = assemble_adjoint_system(op, basis, x0, delta_moments(basis, t0), fmap)
    phi = solve_weights(system)
    y = forward_data(fmap, x_star)
    rng = np.random.default_rng(2)
    y_eps = y * (1 + 0.01 * rng.uniform(-1, 1, y.shape))
    mu = lambda x: float(x(t0))
    budget = error_budget(op, x_star, x0, phi, mu, y, y_eps, fmap, basis)
    recon = reconstruct_value(phi, y_eps)
    assert abs(mu(x_star) - recon) <= budget.total + 1e-10
    assert budget.dist_x_star is not None


def test_error_budget_rejects_negative_terms():
    from bgrecon.solver import ErrorBudget

    with pytest.raises(ValueError):
        ErrorBudget(-1.0, 0.0, 0.0, 0.0)


def test_error_budget_text_output():
    from bgrecon.solver import ErrorBudget

    text = ErrorBudget(0.1, 0.2, 0.3, 0.4).to_text()
    assert "total=1" in text
    assert text.endswith("\n")


def test_subspace_distance_zero_on_span():
    grid, basis, _, _ = make_setup(15)
    rng = np.random.default_rng(4)
    coeffs = rng.standard_normal(basis.size)
    x = SampledFunction(grid, basis.eval_combination(coeffs, grid.nodes))
    assert subspace_distance(basis, x) == pytest.approx(0.0, abs=1e-10)


def test_iterative_refinement_rejects_bad_rounds():
    grid, basis, op, fmap = make_setup(8)
    with pytest.raises(ValueError):
        iterative_refinement(op, basis, op.kernel, np.zeros(8), [0.5], 0, fmap)


def test_iterative_refinement_stationary_for_linear_case():
    # with nu = 0 the linearization point does not matter, so round 2
    # reproduces round 1
    grid, basis, op, fmap = make_setup(10, nu=0.0)
    x = SampledFunction.from_callable(grid, lambda t: 2 * t)
    y = forward_data(fmap, x)
    profiles = iterative_refinement(op, basis, op.kernel, y, [0.5], 2, fmap)
    if len(profiles) == 2:
        assert profiles[0][0][1] == pytest.approx(profiles[1][0][1], abs=1e-7)
