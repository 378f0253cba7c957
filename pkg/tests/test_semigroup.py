import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from llglab.fields import gradient, l2_norm, make_grid
from llglab.initial_data import spectral_bump
from llglab.semigroup import (
    SemigroupParams,
    apply_grad_semigroup,
    apply_semigroup,
    default_decay_times,
    duhamel_integral,
    verify_decay,
)

TWO_PI = 2.0 * np.pi


def band_limited(grid, seed, max_mode=4):
    rng = np.random.default_rng(seed)
    coeffs = np.zeros(grid.shape, dtype=complex)
    modes = np.fft.fftfreq(grid.n, d=1.0 / grid.n).astype(int)
    keep = np.abs(modes) <= max_mode
    mask = np.ones(grid.shape, dtype=bool)
    for ax in range(grid.dim):
        mask = mask & grid.axis_table(ax, keep)
    coeffs[mask] = rng.standard_normal(mask.sum()) + 1j * rng.standard_normal(mask.sum())
    return np.fft.ifftn(coeffs, axes=grid.axes)


@pytest.fixture
def params_1d():
    grid = make_grid(1, 16, TWO_PI)
    return SemigroupParams(lam=1.0, grid=grid)


class TestApply:
    def test_eigenfunction(self, params_1d):
        g = params_1d.grid
        x = g.coordinates()[0]
        f = np.exp(1j * x)
        out = apply_semigroup(f, 0.5, params_1d)
        expected = np.exp((1j - 1.0) * 0.5) * f
        assert np.abs(out - expected).max() < 1e-12
        # magnitude factor e^{-lambda k^2 t} = e^{-0.5}
        assert np.abs(out).max() == pytest.approx(np.exp(-0.5), rel=1e-12)

    def test_identity_at_zero(self, params_1d):
        f = band_limited(params_1d.grid, seed=0)
        out = apply_semigroup(f, 0.0, params_1d)
        assert np.array_equal(out, f.astype(complex))

    @given(seed=st.integers(0, 1000), t1=st.floats(0.01, 0.5), t2=st.floats(0.01, 0.5))
    def test_semigroup_law(self, seed, t1, t2):
        grid = make_grid(1, 16, TWO_PI)
        params = SemigroupParams(lam=1.0, grid=grid)
        f = band_limited(grid, seed)
        two_step = apply_semigroup(apply_semigroup(f, t1, params), t2, params)
        one_step = apply_semigroup(f, t1 + t2, params)
        assert np.abs(two_step - one_step).max() < 1e-12 * max(1.0, np.abs(f).max())

    def test_negative_time_rejected(self, params_1d):
        with pytest.raises(ValueError):
            apply_semigroup(np.zeros(16, dtype=complex), -0.1, params_1d)

    def test_nonpositive_damping_rejected(self):
        with pytest.raises(ValueError):
            SemigroupParams(lam=0.0, grid=make_grid(1, 16, TWO_PI))

    def test_l2_strictly_decreasing(self, params_1d):
        f = band_limited(params_1d.grid, seed=2)
        norms = [l2_norm(params_1d.grid, apply_semigroup(f, t, params_1d))
                 for t in (0.0, 0.1, 0.2, 0.4)]
        assert all(a > b for a, b in zip(norms, norms[1:]))

    def test_mean_preserved(self, params_1d):
        f = band_limited(params_1d.grid, seed=3) + 2.5
        out = apply_semigroup(f, 0.3, params_1d)
        assert out.mean() == pytest.approx(f.mean(), abs=1e-13)

    def test_gradient_same_code_path(self, params_1d):
        f = band_limited(params_1d.grid, seed=4)
        direct = apply_grad_semigroup(f, 0.2, params_1d)
        composed = gradient(params_1d.grid, apply_semigroup(f, 0.2, params_1d))
        assert np.array_equal(direct, composed)

    def test_grad_semigroup_t0_analytic(self, params_1d):
        x = params_1d.grid.coordinates()[0]
        out = apply_grad_semigroup(np.exp(1j * x), 0.0, params_1d)
        assert np.abs(out[0] - 1j * np.exp(1j * x)).max() < 1e-12

    def test_grad_of_constant_vanishes(self, params_1d):
        out = apply_grad_semigroup(np.full(16, 1.0 + 0j), 0.7, params_1d)
        assert np.abs(out).max() < 1e-13


class TestVerifyDecay:
    def test_non_expansive_case(self):
        grid = make_grid(2, 64, TWO_PI)
        params = SemigroupParams(lam=1.0, grid=grid)
        bump = spectral_bump(grid, width=grid.length / 48).astype(complex)
        rep = verify_decay(bump, 2.0, 2.0, 2.0, default_decay_times(grid, 1.0),
                           params, c_max=1.1)
        assert rep.passed
        assert rep.max_ratio <= 1.1

    def test_plane_wave_ratio_vanishes(self):
        grid = make_grid(2, 64, TWO_PI)
        params = SemigroupParams(lam=1.0, grid=grid)
        x, _ = grid.coordinates()
        f = np.exp(12j * x)
        rep = verify_decay(f, 2.0, 4.0, 2.0, default_decay_times(grid, 1.0), params)
        assert rep.passed
        assert rep.ratio_series[-1] < 1e-4

    def test_zero_field_rejected(self):
        grid = make_grid(2, 16, TWO_PI)
        params = SemigroupParams(lam=1.0, grid=grid)
        with pytest.raises(ValueError):
            verify_decay(np.zeros(grid.shape, dtype=complex), 2.0, 4.0, 2.0,
                         np.logspace(-3, -1, 5), params)

    def test_short_time_span_rejected(self):
        grid = make_grid(2, 16, TWO_PI)
        params = SemigroupParams(lam=1.0, grid=grid)
        f = np.ones(grid.shape, dtype=complex)
        with pytest.raises(ValueError):
            verify_decay(f, 2.0, 4.0, 2.0, np.linspace(0.01, 0.05, 5), params)

    def test_exponent_range_rejected(self):
        grid = make_grid(2, 16, TWO_PI)
        params = SemigroupParams(lam=1.0, grid=grid)
        f = np.ones(grid.shape, dtype=complex)
        with pytest.raises(ValueError):
            verify_decay(f, 2.0, 8.0, 2.0, np.logspace(-3, -1, 5), params)

    def test_csv_rows(self):
        grid = make_grid(2, 32, TWO_PI)
        params = SemigroupParams(lam=1.0, grid=grid)
        bump = spectral_bump(grid, width=0.5).astype(complex)
        rep = verify_decay(bump, 2.0, 2.0, 2.0, default_decay_times(grid, 1.0), params)
        rows = list(rep.csv_rows())
        assert rows[0] == "t,norm,compensated_ratio"
        assert len(rows) == len(rep.t_samples) + 1


class TestDuhamel:
    def test_zero_forcing(self, params_1d):
        out = duhamel_integral(lambda s: np.zeros(16, dtype=complex), 0.5, 8, params_1d)
        assert np.abs(out).max() == 0.0

    def test_constant_forcing_closed_form(self, params_1d):
        # per-mode ODE: int_0^t e^{(i-1)(t-s)} ds = (1 - e^{(i-1)t}) / (1 - i)
        g = params_1d.grid
        x = g.coordinates()[0]
        F = np.exp(1j * x)
        t = 0.5
        out = duhamel_integral(lambda s: F, t, 64, params_1d)
        exact = F * (1.0 - np.exp((1j - 1.0) * t)) / (1.0 - 1j)
        rel = np.abs(out - exact).max() / np.abs(exact).max()
        assert rel < 1e-4

    def test_second_order_convergence(self, params_1d):
        g = params_1d.grid
        x = g.coordinates()[0]

        def forcing(s):
            return np.cos(3.0 * s) * np.exp(1j * x) + np.sin(s) * np.exp(2j * x)

        ref = duhamel_integral(forcing, 0.5, 1024, params_1d)
        err32 = np.abs(duhamel_integral(forcing, 0.5, 32, params_1d) - ref).max()
        err64 = np.abs(duhamel_integral(forcing, 0.5, 64, params_1d) - ref).max()
        assert err32 / err64 >= 3.5

    def test_validation(self, params_1d):
        with pytest.raises(ValueError):
            duhamel_integral(lambda s: np.zeros(16, dtype=complex), 0.5, 0, params_1d)
        with pytest.raises(ValueError):
            duhamel_integral(lambda s: np.zeros(16, dtype=complex), -0.5, 4, params_1d)
