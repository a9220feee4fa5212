from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from blackwell.examples import sps
from blackwell.matrix import INSIDE, nearest_point, separating_hyperplane, solve_matrix

matrices = st.integers(1, 6).flatmap(
    lambda m: st.integers(1, 6).flatmap(
        lambda n: hnp.arrays(np.float64, (m, n), elements=st.floats(-10, 10, allow_nan=False))))


def pure_guarantees(M, row, col):
    M = np.asarray(M, dtype=float)
    return float(np.min(np.asarray(row, float) @ M)), float(np.max(M @ np.asarray(col, float)))


class TestSolveMatrix:
    def test_sps_exact(self):
        sol = solve_matrix(sps().matrix, exact=True)
        assert sol.value == 0
        assert sol.row_strategy == sol.col_strategy == (Fraction(1, 3),) * 3
        assert sol.certificate_gap == 0

    def test_identity(self):
        sol = solve_matrix([[1, 0], [0, 1]], exact=True)
        assert sol.value == Fraction(1, 2)
        assert sol.row_strategy == (Fraction(1, 2), Fraction(1, 2))

    def test_saddle_point(self):
        sol = solve_matrix([[0, 1], [1, 1]], exact=True)
        assert sol.value == 1
        assert sol.row_strategy == (0, 1)

    def test_single_entry_and_constant(self):
        assert solve_matrix([[Fraction(-7, 3)]], exact=True).value == Fraction(-7, 3)
        assert solve_matrix([[2, 2], [2, 2]]).value == pytest.approx(2)

    def test_degenerate_ties(self):
        # duplicated rows and columns stress Bland's rule
        M = [[1, 1, 0], [1, 1, 0], [0, 0, 1]]
        sol = solve_matrix(M, exact=True)
        assert sol.value == Fraction(1, 2)
        assert sol.lower == sol.upper == sol.value

    def test_float_strategies_have_no_negative_zero(self):
        sol = solve_matrix([[0, 1], [1, 1]])
        assert all(np.copysign(1, p) > 0 for p in sol.row_strategy)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError, match="rectangle"):
            solve_matrix([[1, 2], [3]])
        with pytest.raises(ValueError, match="non-finite"):
            solve_matrix([[float("inf")]])
        with pytest.raises(ValueError, match="tol"):
            solve_matrix([[1]], tol=0)

    @settings(max_examples=150, deadline=None)
    @given(matrices)
    def test_minimax_duality(self, M):
        sol = solve_matrix(M.tolist())
        lo, hi = pure_guarantees(M, sol.row_strategy, sol.col_strategy)
        scale = max(1.0, float(np.max(np.abs(M))))
        assert abs(hi - lo) <= 1e-7 * scale
        assert lo >= sol.value - 1e-7 * scale
        assert hi <= sol.value + 1e-7 * scale
        assert sum(sol.row_strategy) == pytest.approx(1)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.lists(st.fractions(-5, 5, max_denominator=7), min_size=3, max_size=3),
                    min_size=1, max_size=4))
    def test_exact_certificate_is_tight(self, rows):
        sol = solve_matrix(rows, exact=True)
        assert sol.lower == sol.value == sol.upper
        assert sum(sol.row_strategy) == 1 and sum(sol.col_strategy) == 1

    @settings(max_examples=60, deadline=None)
    @given(matrices, st.floats(0, 5), st.floats(-5, 5))
    def test_affine_and_switch(self, M, a, c):
        v = solve_matrix(M.tolist()).value
        assert solve_matrix((a * M + c).tolist()).value == pytest.approx(a * v + c, abs=1e-6)
        assert solve_matrix((-M.T).tolist()).value == pytest.approx(-v, abs=1e-6)


class TestSeparation:
    def test_segment(self):
        y, d = separating_hyperplane([[0, 0], [1, 0]], [2, 0])
        assert np.allclose(y, [1, 0])
        assert d == pytest.approx(1.5)

    def test_inside(self):
        assert separating_hyperplane([[0, 0], [2, 0], [0, 2]], [0.5, 0.5]) == INSIDE
        assert separating_hyperplane([[1, 1]], [1, 1]) == INSIDE

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            separating_hyperplane([[0, 0]], [1, 2, 3])

    def test_nearest_point_weights(self):
        c, w = nearest_point([[0, 0], [2, 0], [0, 2]], [2, 2])
        assert np.allclose(c, [1, 1])
        assert w.sum() == pytest.approx(1)

    @settings(max_examples=100, deadline=None)
    @given(hnp.arrays(np.float64, st.tuples(st.integers(1, 8), st.integers(1, 4)),
                      elements=st.floats(-5, 5, allow_nan=False)),
           st.integers(0, 2**32 - 1))
    def test_margin_invariant(self, P, seed):
        rng = np.random.default_rng(seed)
        b = rng.uniform(-8, 8, size=P.shape[1])
        out = separating_hyperplane(P, b)
        if isinstance(out, str):
            # b is (numerically) in the hull: the nearest point is b itself
            c, _ = nearest_point(P, b)
            assert np.linalg.norm(c - b) <= 1e-6
            return
        y, d = out
        assert np.linalg.norm(y) == pytest.approx(1)
        assert y @ b > d
        assert np.all(P @ y < d + 1e-9)
