import numpy as np
import pytest

from conftest import row_orthonormal
from data.datagen import SynthSpec, generate_stream
from optimizer.config import SolverConfig
from optimizer.exceptions import ConfigError, InvalidInput, NumericalBreakdown
from optimizer.memory import MemoryStore
from optimizer.solver import (
    MemEvoSolver,
    orthogonality_residual,
    representation_objective,
    run_stream,
    solve_initial_view,
    update_alignment,
    update_basis,
    update_consolidation,
    update_noise,
    update_representation,
)
from optimizer.tensor_lab import PairTensor, armr_norm, l21_norm


def small_config(**changes):
    values = dict(latent_dim=4, alpha=0.1, beta=0.1, lam=1.5, seed=3)
    values.update(changes)
    return SolverConfig(**values)


def random_block_state(rng, n=8, d=6, m=3):
    return {
        'x': rng.standard_normal((n, d)),
        'a': row_orthonormal(rng, m, d),
        'e': rng.standard_normal((n, d)),
        'y': rng.standard_normal((n, d)),
        'prev_z': rng.standard_normal((n, m)),
        'p': row_orthonormal(rng, m, m),
        'm_cur': rng.standard_normal((n, m)),
        'j_cur': rng.standard_normal((n, m)),
    }


class TestInitialView:
    def test_recovers_planted_factorization(self, planted_view):
        x, _, _ = planted_view
        solver = MemEvoSolver(small_config())
        z, report = solver.solve_initial_view(x)
        assert z.shape == (60, 4)
        assert report.converged
        assert report.recon_residual < 1e-6
        assert np.linalg.norm(x - z @ solver.state.a) <= 1e-4 * np.linalg.norm(x)

    def test_zero_view(self):
        solver = MemEvoSolver(small_config(latent_dim=2))
        z, report = solver.solve_initial_view(np.zeros((10, 5)))
        np.testing.assert_array_equal(z, np.zeros((10, 2)))
        np.testing.assert_array_equal(solver.state.e, np.zeros((10, 5)))
        assert report.converged

    def test_outlier_column_lands_in_noise(self, rng):
        z_true = 30.0 * rng.standard_normal((60, 4))
        x = z_true @ row_orthonormal(rng, 4, 15)
        direction = rng.standard_normal(60)
        x[:, 3] += 100.0 * direction / np.linalg.norm(direction)

        solver = MemEvoSolver(small_config())
        solver.solve_initial_view(x)
        column_norms = np.linalg.norm(solver.state.e, axis=0)
        assert column_norms[3] > 0
        assert np.argmax(column_norms) == 3

    def test_basis_stays_orthonormal(self, planted_view):
        x, _, _ = planted_view
        solver = MemEvoSolver(small_config(tol=0.0, max_iters=60))
        _, report = solver.solve_initial_view(x)
        assert len(report.orthogonality_trace) == 60
        assert max(report.orthogonality_trace) < 1e-8
        assert orthogonality_residual(solver.state.a) < 1e-8

    def test_latent_dim_too_large(self):
        with pytest.raises(InvalidInput):
            solve_initial_view(np.ones((10, 3)), small_config(latent_dim=4))

    def test_non_finite_view_rejected(self):
        x = np.ones((10, 5))
        x[0, 0] = np.nan
        with pytest.raises(InvalidInput):
            solve_initial_view(x, small_config(latent_dim=2))

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_overflow_is_numerical_breakdown(self, rng):
        x = 1e200 * (1.0 + rng.random((10, 5)))
        with pytest.raises(NumericalBreakdown, match="view 1"):
            solve_initial_view(x, small_config(latent_dim=2))


class TestIncrementalView:
    def test_no_coupling_matches_initial_solve(self, rng):
        cfg = small_config(alpha=0.0, beta=0.0)
        x1 = rng.standard_normal((30, 8))
        x2 = rng.standard_normal((30, 10))
        z1, _ = solve_initial_view(x1, cfg)
        store = MemoryStore(cfg.lam).archive_view(z1)

        z_inc, rep_inc = MemEvoSolver(cfg).solve_incremental_view(x2, z1, store, 2)
        z_init, rep_init = MemEvoSolver(cfg).solve_initial_view(x2, view_index=2)
        np.testing.assert_array_equal(z_inc, z_init)
        assert rep_inc.iterations == rep_init.iterations

    def test_strong_alignment_tracks_previous_view(self, rng):
        latent = rng.standard_normal((80, 4))
        x1 = latent @ row_orthonormal(rng, 4, 12)
        x2 = latent @ row_orthonormal(rng, 4, 10)

        solver = MemEvoSolver(small_config(alpha=10.0))
        result = solver.run_stream([x1, x2])
        z1, z2 = result.representations
        p = solver.state.p
        assert np.linalg.norm(z2 - z1 @ p) < 0.05 * np.linalg.norm(z2)

    def test_traces_and_penalties(self, small_spec):
        views, _ = generate_stream(small_spec)
        cfg = SolverConfig(latent_dim=3, tol=0.0, max_iters=200, seed=1)
        result = run_stream(views, cfg)
        for report in result.reports:
            assert report.iterations == 200
            assert max(report.orthogonality_trace) < 1e-8
            assert all(b >= a for a, b in zip(report.mu_trace, report.mu_trace[1:]))
            assert max(report.mu_trace) <= cfg.mu_max
        for report in result.reports[1:]:
            assert all(b >= a for a, b in zip(report.rho_trace, report.rho_trace[1:]))
            assert max(report.rho_trace) <= cfg.rho_max
            assert set(report.objective_trace[-1]) == {'recon', 'align', 'consolidate'}

    def test_needs_matching_history(self, rng):
        cfg = small_config(latent_dim=2)
        x = rng.standard_normal((10, 5))
        z1, _ = solve_initial_view(x, cfg)
        with pytest.raises(InvalidInput):
            MemEvoSolver(cfg).solve_incremental_view(x, z1, MemoryStore(cfg.lam), 2)
        with pytest.raises(InvalidInput):
            MemEvoSolver(cfg).solve_incremental_view(x, z1, MemoryStore(cfg.lam).archive_view(z1), 1)

    def test_previous_representation_shape_checked(self, rng):
        cfg = small_config(latent_dim=2)
        x = rng.standard_normal((10, 5))
        store = MemoryStore(cfg.lam).archive_view(np.zeros((10, 2)))
        with pytest.raises(InvalidInput):
            MemEvoSolver(cfg).solve_incremental_view(x, np.zeros((9, 2)), store, 2)


class TestBlockUpdates:
    def test_representation_update_zeroes_gradient(self):
        for seed in range(10):
            rng = np.random.default_rng(seed)
            state = random_block_state(rng)
            mu, rho, alpha = 2.0, 3.0, 0.7
            z = update_representation(mu=mu, rho=rho, alpha=alpha, **state)

            def objective(candidate):
                return representation_objective(candidate, mu=mu, rho=rho, alpha=alpha, **state)

            def numeric_gradient(at, h=1e-5):
                grad = np.zeros_like(at)
                for idx in np.ndindex(at.shape):
                    step = np.zeros_like(at)
                    step[idx] = h
                    grad[idx] = (objective(at + step) - objective(at - step)) / (2 * h)
                return grad

            reference = np.linalg.norm(numeric_gradient(rng.standard_normal(z.shape)))
            assert np.linalg.norm(numeric_gradient(z)) <= 1e-6 * reference

    def test_representation_ignores_history_slice(self, rng):
        state = random_block_state(rng)
        big_m = PairTensor(rng.standard_normal((8, 3)), state['m_cur'])
        other = PairTensor(100.0 * rng.standard_normal((8, 3)), state['m_cur'])
        state['m_cur'] = big_m.cur
        z1 = update_representation(mu=1.0, rho=1.0, alpha=0.5, **state)
        state['m_cur'] = other.cur
        z2 = update_representation(mu=1.0, rho=1.0, alpha=0.5, **state)
        np.testing.assert_array_equal(z1, z2)

    def test_basis_update_minimizes(self, rng):
        state = random_block_state(rng)
        z = rng.standard_normal((8, 3))
        mu = 0.5
        target = state['x'] - state['e'] + state['y'] / mu
        a = update_basis(state['x'], z, state['e'], state['y'], mu)
        best = np.sum((target - z @ a) ** 2)
        for _ in range(50):
            assert best <= np.sum((target - z @ row_orthonormal(rng, 3, 6)) ** 2) + 1e-9

    def test_noise_update_minimizes(self, rng):
        state = random_block_state(rng)
        z = rng.standard_normal((8, 3))
        mu = 1.5
        c = state['x'] - z @ state['a'] + state['y'] / mu

        def objective(e):
            return 0.5 * mu * np.sum((c - e) ** 2) + l21_norm(e)

        e = update_noise(state['x'], z, state['a'], state['y'], mu)
        best = objective(e)
        assert best <= objective(np.zeros_like(c)) + 1e-12
        assert best <= objective(c) + 1e-12
        for _ in range(20):
            assert best <= objective(e + 1e-2 * rng.standard_normal(e.shape)) + 1e-12

    def test_alignment_update_minimizes(self, rng):
        z = rng.standard_normal((12, 3))
        prev_z = rng.standard_normal((12, 3))
        p = update_alignment(z, prev_z)
        best = np.sum((z - prev_z @ p) ** 2)
        assert best <= np.sum((z - prev_z) ** 2) + 1e-12
        for _ in range(50):
            assert best <= np.sum((z - prev_z @ row_orthonormal(rng, 3, 3)) ** 2) + 1e-9

    def test_consolidation_update_descends(self, rng):
        stacked = PairTensor(rng.standard_normal((10, 3)), rng.standard_normal((10, 3)))
        j = PairTensor(rng.standard_normal((10, 3)), rng.standard_normal((10, 3)))
        rho, beta = 1.0, 0.5

        def objective(m):
            return beta * armr_norm(m) + 0.5 * rho * (stacked - m + j.scale(1.0 / rho)).frobenius_sq()

        m = update_consolidation(stacked, j, rho, beta)
        assert objective(m) <= objective(stacked + j.scale(1.0 / rho)) + 1e-12


class TestStream:
    def test_single_view_stream_is_initial_solve(self, planted_view):
        x, _, _ = planted_view
        cfg = small_config()
        result = run_stream([x], cfg)
        z, _ = solve_initial_view(x, cfg)
        np.testing.assert_array_equal(result.representation, z)
        assert len(result.store) == 1

    def test_callback_sees_every_view(self, small_spec):
        views, _ = generate_stream(small_spec)
        seen = []
        result = run_stream(views, SolverConfig(latent_dim=3, max_iters=30),
                            on_view=lambda t, z, report: seen.append((t, z.shape, report.view_index)))
        assert seen == [(1, (90, 3), 1), (2, (90, 3), 2), (3, (90, 3), 3)]
        assert len(result.store) == 3
        np.testing.assert_array_equal(result.store.archive[-1], result.representation)

    def test_empty_stream(self):
        with pytest.raises(InvalidInput):
            run_stream([], small_config())

    def test_sample_count_must_agree(self, rng):
        with pytest.raises(InvalidInput):
            run_stream([rng.standard_normal((10, 5)), rng.standard_normal((9, 5))], small_config(latent_dim=2))

    @pytest.mark.slow
    def test_default_synthetic_stream_converges(self):
        views, _ = generate_stream(SynthSpec())
        result = run_stream(views, SolverConfig())
        assert all(report.converged for report in result.reports)
        assert result.representation.shape == (300, 20)


def test_zero_tolerance_runs_to_iteration_cap(small_spec):
    views, _ = generate_stream(small_spec)
    result = run_stream(views, SolverConfig(latent_dim=3, tol=0.0, max_iters=25))
    assert [report.iterations for report in result.reports] == [25, 25, 25]
    assert not any(report.converged for report in result.reports)


@pytest.mark.parametrize("changes", [
    {'alpha': -1.0},
    {'latent_dim': 0},
    {'delta': 1.0},
    {'mu0': 0.0},
    {'rho0': 1e11},
    {'max_iters': 0},
    {'tol': -1.0},
])
def test_invalid_solver_config(changes):
    with pytest.raises(ConfigError):
        SolverConfig(**changes)
