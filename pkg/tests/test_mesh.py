import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vofrac.errors import DomainError, PreconditionError
from vofrac.mesh import (
    Grid,
    SolutionHistory,
    backward_diff,
    backward_diffs,
    forward_diff,
    forward_diffs,
    gradient_norm_sq,
    inner_closed_half,
    inner_halfopen,
    inner_open,
    norm_closed_half_sq,
    norm_open_sq,
)

sizes = st.integers(2, 60)
lengths = st.floats(0.1, 5.0)


class TestGrid:
    @given(sizes, st.integers(1, 500), lengths, lengths)
    def test_steps_consistent(self, N, j0, l, T):  # noqa: E741
        g = Grid(N=N, j0=j0, l=l, T=T)
        assert g.h * g.N == pytest.approx(l, rel=1e-14)
        assert g.tau * g.j0 == pytest.approx(T, rel=1e-14)
        assert g.x[-1] == pytest.approx(l, rel=1e-14)
        assert len(g.x) == N + 1 and len(g.t) == j0 + 1

    def test_invalid(self):
        with pytest.raises(DomainError):
            Grid(N=1, j0=10)
        with pytest.raises(DomainError):
            Grid(N=10, j0=0)
        with pytest.raises(DomainError):
            Grid(N=10, j0=10, l=-1.0)

    def test_from_steps(self):
        g = Grid.from_steps(1 / 500, 1 / 4096)
        assert (g.N, g.j0) == (500, 4096)
        with pytest.raises(DomainError):
            Grid.from_steps(0.3, 0.1)

    def test_midpoints(self):
        g = Grid(N=4, j0=2)
        np.testing.assert_allclose(g.x_half, [0.125, 0.375, 0.625, 0.875])
        assert g.t_half(1) == 0.75


class TestHistory:
    def test_levels(self):
        g = Grid(N=3, j0=2)
        hist = SolutionHistory.start(g, np.arange(4.0))
        assert not hist.complete
        hist.append(np.ones(4))
        hist.append(2 * np.ones(4))
        assert hist.complete
        np.testing.assert_array_equal(hist[0], np.arange(4.0))
        np.testing.assert_array_equal(hist.node_series(1), [1.0, 1.0, 2.0])
        with pytest.raises(PreconditionError):
            hist.append(np.ones(4))
        with pytest.raises(IndexError):
            hist[3]

    def test_bad_initial(self):
        with pytest.raises(PreconditionError):
            SolutionHistory.start(Grid(N=3, j0=2), np.zeros(3))


class TestDifferences:
    def test_examples(self):
        h = 0.1
        x = np.arange(11) * h
        assert forward_diff(np.full(11, 4.0), 3, h) == 0.0
        assert all(forward_diff(x, i, h) == pytest.approx(1.0) for i in range(10))
        assert backward_diff(x**2, 4, h) == pytest.approx(0.7, rel=1e-13)
        assert forward_diff(x**2, 3, h) == pytest.approx(0.7, rel=1e-13)

    def test_ranges(self):
        y = np.zeros(5)
        with pytest.raises(IndexError):
            forward_diff(y, 4, 0.25)
        with pytest.raises(IndexError):
            backward_diff(y, 0, 0.25)

    @given(st.lists(st.floats(-10, 10), min_size=3, max_size=30))
    def test_bulk_matches_scalar(self, values):
        y = np.array(values)
        h = 1.0 / (len(y) - 1)
        fwd = forward_diffs(y, h)
        bwd = backward_diffs(y, h)
        for i in range(len(y) - 1):
            assert fwd[i] == forward_diff(y, i, h)
            assert bwd[i] == backward_diff(y, i + 1, h)


class TestInnerProducts:
    def test_examples(self):
        one = np.ones(11)
        assert inner_open(one, one, 0.1) == pytest.approx(0.9, rel=1e-14)
        assert inner_halfopen(one, one, 0.1) == pytest.approx(1.0, rel=1e-14)
        assert inner_closed_half(one, one, 0.1) == pytest.approx(1.0, rel=1e-14)
        x = np.arange(5) * 0.25
        assert inner_open(x, x, 0.25) == pytest.approx(0.21875, rel=1e-14)
        z = np.zeros(11)
        z[0] = z[-1] = 3.0
        assert inner_open(z, one, 0.1) == 0.0
        assert inner_halfopen(np.zeros(11), one, 0.1) == 0.0
        assert inner_closed_half(np.zeros(11), one, 0.1) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(PreconditionError):
            inner_open(np.ones(4), np.ones(5), 0.25)

    @given(st.integers(2, 40), st.integers(0, 2**31 - 1))
    def test_closed_is_open_plus_halves(self, N, seed):
        rng = np.random.default_rng(seed)
        y, v = rng.normal(size=(2, N + 1))
        h = 1.0 / N
        ref = inner_open(y, v, h) + 0.5 * h * (y[0] * v[0] + y[-1] * v[-1])
        assert inner_closed_half(y, v, h) == pytest.approx(ref, rel=1e-12, abs=1e-14)

    @pytest.mark.parametrize("product", [inner_open, inner_halfopen, inner_closed_half])
    @given(st.integers(2, 40), st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 2**31 - 1))
    def test_bilinear_symmetric(self, product, N, a, b, seed):
        rng = np.random.default_rng(seed)
        y, z, v = rng.normal(size=(3, N + 1))
        h = 1.0 / N
        assert product(y, v, h) == pytest.approx(product(v, y, h), rel=1e-13, abs=1e-14)
        lhs = product(a * y + b * z, v, h)
        rhs = a * product(y, v, h) + b * product(z, v, h)
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)


class TestNormInequalities:
    @settings(max_examples=1000)
    @given(st.integers(2, 60), st.floats(0.1, 5.0), st.integers(0, 2**31 - 1))
    def test_friedrichs(self, N, l, seed):  # noqa: E741
        y = np.random.default_rng(seed).uniform(-10, 10, N + 1)
        y[0] = y[-1] = 0.0
        h = l / N
        assert norm_open_sq(y, h) <= 0.5 * l**2 * gradient_norm_sq(y, h) * (1 + 1e-12)

    @settings(max_examples=1000)
    @given(st.integers(2, 60), st.floats(0.1, 5.0), st.integers(0, 2**31 - 1))
    def test_boundary_aware(self, N, l, seed):  # noqa: E741
        y = np.random.default_rng(seed).uniform(-10, 10, N + 1)
        h = l / N
        bound = l**2 * gradient_norm_sq(y, h) + l * (y[0] ** 2 + y[-1] ** 2)
        assert norm_closed_half_sq(y, h) <= bound * (1 + 1e-12)
