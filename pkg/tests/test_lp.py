import numpy as np
import pytest
from scipy.optimize import linprog

from quadversary import lp


def test_known_two_variable_optimum():
    # max x + y  s.t.  x <= 1, y <= 2
    program = lp.LinearProgram([1.0, 1.0], [[1.0, 0.0], [0.0, 1.0]], [1.0, 2.0])
    sol = lp.solve(program)
    assert sol.value == pytest.approx(3.0, abs=1e-12)
    assert sol.solution == pytest.approx([1.0, 2.0], abs=1e-12)


def test_binding_mixture_constraint():
    # max 2x + y  s.t.  x + y <= 1  ->  all mass on x
    program = lp.LinearProgram([2.0, 1.0], [[1.0, 1.0]], [1.0])
    sol = lp.solve(program)
    assert sol.value == pytest.approx(2.0, abs=1e-12)
    assert sol.solution == pytest.approx([1.0, 0.0], abs=1e-12)


def test_unbounded_detected():
    program = lp.LinearProgram([1.0], [[0.0]], [1.0])
    with pytest.raises(lp.LPError):
        lp.solve(program)


def test_negative_rhs_rejected():
    program = lp.LinearProgram([1.0], [[1.0]], [-0.5])
    with pytest.raises(lp.LPError):
        lp.solve(program)


def test_degenerate_rhs_zero_terminates():
    # Bland's rule must not cycle on the degenerate vertex.
    program = lp.LinearProgram(
        [1.0, 1.0, 1.0],
        [[1.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]],
        [0.0, 0.0, 1.0],
    )
    sol = lp.solve(program)
    assert sol.value == pytest.approx(0.0, abs=1e-12)


def test_duals_and_basis_inverse_identities():
    rng = np.random.default_rng(5)
    for _ in range(20):
        n, m = rng.integers(1, 6), rng.integers(1, 8)
        a = rng.random((m, n))
        b = rng.random(m) + 0.1
        c = rng.random(n)
        program = lp.LinearProgram(c, a, b)
        sol = lp.solve(program)
        # value equals the dual objective
        assert sol.value == pytest.approx(float(sol.duals @ b), abs=1e-9)
        assert sol.duals.min() >= -1e-9
        # basis inverse really inverts the basis columns
        columns = np.hstack([a, np.eye(m)])[:, list(sol.basis)]
        assert np.allclose(sol.basis_inverse @ columns, np.eye(m), atol=1e-9)
        # primal solution feasible and optimal within tolerance
        assert (a @ sol.solution <= b + 1e-9).all()
        assert sol.solution.min() >= -1e-12


def test_matches_reference_solver_on_random_instances():
    rng = np.random.default_rng(11)
    for _ in range(25):
        n, m = rng.integers(1, 7), rng.integers(1, 9)
        a = rng.random((m, n)) * 2.0 - 0.5
        b = rng.random(m)
        c = rng.random(n) * 2.0 - 0.5
        # guarantee boundedness with a simplex-style cap
        a = np.vstack([a, np.ones(n)])
        b = np.append(b, 1.0)
        sol = lp.solve(lp.LinearProgram(c, a, b))
        ref = linprog(-c, A_ub=a, b_ub=b, bounds=[(0, None)] * n, method="highs")
        assert ref.status == 0
        assert sol.value == pytest.approx(-ref.fun, abs=1e-8)
