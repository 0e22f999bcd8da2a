"""Tests for the gradient regularized Newton solver."""

import csv

import numpy as np
import pytest

from conftest import hand_built_set, scalar_model
from src.core.grnm import (
    TRACE_COLUMNS,
    GrnmConfig,
    InitMode,
    Phase,
    SolveStatus,
    certify_local_min,
    default_initial_point,
    newton_direction,
    phase1,
    phase2,
    solve,
    write_trace_csv,
)
from src.core.metrics import relative_error
from src.core.objective import QuadraticResidualModel
from src.ensembles.generator import EnsembleKind, EnsembleSpec, generate_instance
from src.utils.errors import FactorizationError, InvalidConfigError, InvalidInputError
from src.utils.seeding import StreamRole, make_rng


def _solve(measurements, seed=0, config=None):
    model = QuadraticResidualModel(measurements)
    return model, solve(model, config, rng=make_rng(seed, StreamRole.INIT))


@pytest.fixture(scope="module")
def solved_runs():
    """Noiseless real solves on distinct instances"""
    runs = []
    for seed in range(5):
        ms = generate_instance(EnsembleSpec(kind=EnsembleKind.REAL_GAUSSIAN, p=8, n=48, seed=100 + seed))
        model, result = _solve(ms, seed)
        runs.append((ms, model, result))
    return runs


class TestConfig:
    def test_defaults(self):
        config = GrnmConfig()
        assert (config.eps1, config.eps, config.beta, config.delta) == (0.1, 1e-5, 0.5, 0.25)
        assert (config.mu1, config.mu2, config.alpha1, config.alpha2) == (0.1, 0.1, 0.5, 0.5)
        assert (config.max_iters, config.max_backtracks) == (5000, 60)
        assert config.init_mode is InitMode.SCALED_RANDOM
        assert config.complex_eps == 1e-10

    def test_eps_must_be_below_eps1(self):
        with pytest.raises(InvalidConfigError):
            GrnmConfig.build(eps=0.2, eps1=0.1)

    @pytest.mark.parametrize("field,value", [("delta", 1.0), ("mu1", 0.0), ("alpha2", 1.5), ("beta", -1.0)])
    def test_interval_constraints(self, field, value):
        with pytest.raises(InvalidConfigError):
            GrnmConfig.build(**{field: value})

    def test_build_ignores_unset_overrides(self):
        assert GrnmConfig.build(eps=None, beta=0.25).beta == 0.25

    def test_complex_eps_must_be_below_eps1(self):
        with pytest.raises(InvalidConfigError):
            GrnmConfig.build(complex_eps=0.5)

    def test_noiseless_complex_instances_use_complex_eps(self, complex_instance):
        assert GrnmConfig().for_instance(complex_instance).eps == 1e-10
        assert GrnmConfig(complex_eps=1e-8).for_instance(complex_instance).eps == 1e-8

    def test_other_instances_keep_eps(self, real_instance, complex_instance):
        noisy = generate_instance(EnsembleSpec(kind=EnsembleKind.COMPLEX_GAUSSIAN, p=3, n=20,
                                               noise_sigma=0.1, seed=1))
        assert GrnmConfig().for_instance(real_instance).eps == 1e-5
        assert GrnmConfig().for_instance(noisy).eps == 1e-5
        assert GrnmConfig(complex_eps=None).for_instance(complex_instance).eps == 1e-5
        assert GrnmConfig(eps=1e-12).for_instance(complex_instance).eps == 1e-12


class TestInitialPoint:
    def test_unit_divisor(self):
        model = QuadraticResidualModel(hand_built_set([np.eye(3)] * 4, b=[2.0] * 4))
        x0 = default_initial_point(model, np.random.default_rng(5))
        np.testing.assert_allclose(x0, np.random.default_rng(5).standard_normal(3), rtol=1e-15)

    def test_zero_observations_fall_back_to_unit_norm(self):
        model = QuadraticResidualModel(hand_built_set([np.eye(3)] * 2, b=[0.0, 0.0]))
        x0 = default_initial_point(model, np.random.default_rng(1))
        assert np.linalg.norm(x0) == pytest.approx(1.0)

    def test_deterministic(self, real_instance):
        model = QuadraticResidualModel(real_instance)
        np.testing.assert_array_equal(default_initial_point(model, make_rng(3, StreamRole.INIT)),
                                      default_initial_point(model, make_rng(3, StreamRole.INIT)))


class TestPhaseOne:
    def test_already_below_tolerance(self):
        model = scalar_model(a=1.0, b=1.0)
        x, records, status = phase1(model, np.array([1.0]), GrnmConfig())
        assert records == [] and status is SolveStatus.EXACT_STATIONARY
        x, records, status = phase1(model, np.array([1.01]), GrnmConfig())
        assert records == [] and status is None
        assert x[0] == 1.01

    def test_scalar_brute_force_step(self):
        # f = (x^2 - 1)^2 / 4, g(2) = 6: j = 0 overshoots to -4, j = 1 lands on -1 exactly
        model = scalar_model(a=1.0, b=1.0)
        x, records, status = phase1(model, np.array([2.0]), GrnmConfig())
        assert records[0].j_k == 1
        assert records[0].tau == 0.5
        assert records[0].grad_norm == 6.0
        assert x[0] == -1.0
        assert status is SolveStatus.EXACT_STATIONARY

    def test_armijo_replay_and_minimal_exponent(self, real_instance):
        model = QuadraticResidualModel(real_instance)
        config = GrnmConfig()
        x = default_initial_point(model, np.random.default_rng(9))
        _, records, _ = phase1(model, x, config)
        assert records
        for record in records:
            f_x, g = model.value_and_gradient(x)
            assert record.f == f_x
            assert record.tau == config.alpha1 ** record.j_k
            x_next = x - record.tau * g
            assert model.value(x_next) <= f_x - config.mu1 * record.tau * (g @ g)
            if record.j_k > 0:
                tau_prev = config.alpha1 ** (record.j_k - 1)
                assert model.value(x - tau_prev * g) > f_x - config.mu1 * tau_prev * (g @ g)
            x = x_next

    def test_backtracking_failure(self, real_instance):
        model = QuadraticResidualModel(real_instance)
        config = GrnmConfig(max_backtracks=0)
        x0 = 50.0 * np.ones(model.d)
        _, records, status = phase1(model, x0, config)
        assert status is SolveStatus.BACKTRACK_FAILURE
        assert records == []

    def test_iteration_budget(self, real_instance):
        model = QuadraticResidualModel(real_instance)
        x0 = default_initial_point(model, np.random.default_rng(0))
        _, records, status = phase1(model, x0, GrnmConfig(max_iters=2))
        assert status is SolveStatus.MAX_ITERS
        assert len(records) == 2


class TestNewtonDirection:
    def test_scalar(self):
        assert newton_direction(np.array([[2.0]]), np.array([1.0]), 1.0, 0.5)[0] == pytest.approx(-1.0 / 3.0)

    def test_pure_damping(self):
        assert newton_direction(np.array([[0.0]]), np.array([4.0]), 1.0, 0.5)[0] == pytest.approx(-2.0)

    def test_matches_direct_solve(self):
        rng = np.random.default_rng(4)
        B = rng.standard_normal((5, 5))
        H = B @ B.T
        g = rng.standard_normal(5)
        damped = H + 0.5 * np.linalg.norm(g) ** 0.25 * np.eye(5)
        expected = np.linalg.solve(damped, -g)
        d = newton_direction(H, g, 0.5, 0.25)
        assert np.linalg.norm(d - expected) <= 1e-10 * np.linalg.norm(expected)
        assert np.linalg.norm(damped @ d + g) <= 1e-10 * np.linalg.norm(g)

    def test_contracts(self):
        rng = np.random.default_rng(6)
        beta, delta = 0.5, 0.25
        for _ in range(20):
            B = rng.standard_normal((4, 4))
            g = rng.standard_normal(4) * rng.uniform(1e-4, 10.0)
            d = newton_direction(B @ B.T, g, beta, delta)
            gn = np.linalg.norm(g)
            assert g @ d <= -beta * gn**delta * (d @ d) * (1 - 1e-8)
            assert np.linalg.norm(d) <= gn ** (1 - delta) / beta * (1 + 1e-8)

    def test_zero_gradient_rejected(self):
        with pytest.raises(InvalidInputError):
            newton_direction(np.eye(2), np.zeros(2), 0.5, 0.25)

    def test_indefinite_matrix_fails_after_jitter(self):
        with pytest.raises(FactorizationError):
            newton_direction(-10.0 * np.eye(3), np.array([1e-3, 0.0, 0.0]), 0.5, 0.25)


class TestPhaseTwo:
    def test_already_converged(self):
        model = scalar_model(a=1.0, b=1.0)
        x, records, status = phase2(model, np.array([1.0 + 1e-7]), GrnmConfig())
        assert records == [] and status is SolveStatus.GRAD_TOLERANCE_MET

    def test_scalar_root(self):
        model = scalar_model(a=1.0, b=1.0)
        x, records, status = phase2(model, np.array([1.2]), GrnmConfig())
        assert status is SolveStatus.GRAD_TOLERANCE_MET
        assert len(records) <= 20
        assert x[0] == pytest.approx(1.0, abs=1e-5)
        assert abs(model.gradient(x)[0]) < 1e-5
        assert all(r.phase is Phase.TWO and r.dir_norm > 0 for r in records)

    def test_direction_contracts_along_the_run(self, solved_runs):
        config = GrnmConfig()
        for seed, (_, model, result) in enumerate(solved_runs):
            x = default_initial_point(model, make_rng(seed, StreamRole.INIT))
            checked = 0
            for record in result.trace:
                g = model.gradient(x)
                if record.phase is Phase.ONE:
                    x = x - record.tau * g
                    continue
                gn = np.linalg.norm(g)
                H = model.gauss_newton_matrix(x)
                d = newton_direction(H, g, config.beta, config.delta)
                damped = H + config.beta * gn**config.delta * np.eye(model.d)
                assert g @ d <= -config.beta * gn**config.delta * (d @ d) * (1 - 1e-8)
                assert np.linalg.norm(d) <= gn ** (1 - config.delta) / config.beta * (1 + 1e-8)
                assert np.linalg.norm(damped @ d + g) <= 1e-10 * gn
                assert record.dir_norm == np.linalg.norm(d)
                assert record.tau == config.alpha2 ** record.j_k
                x = x + record.tau * d
                checked += 1
            assert checked == result.phase2_iters > 0
            np.testing.assert_array_equal(x, result.x_hat)


class TestSolve:
    def test_noiseless_recovery(self, solved_runs):
        for ms, _, result in solved_runs:
            assert result.status is SolveStatus.GRAD_TOLERANCE_MET
            assert relative_error(result.x_hat, ms.truth) < 1e-5
            assert result.final_grad_norm < 1e-5
            assert result.iterations == len(result.trace)

    def test_monotone_trace(self, solved_runs):
        for _, _, result in solved_runs:
            values = [r.f for r in result.trace] + [result.final_value]
            assert all(b <= a for a, b in zip(values, values[1:]))

    def test_phase_two_strictly_decreasing(self, solved_runs):
        for _, _, result in solved_runs:
            values = [r.f for r in result.trace if r.phase is Phase.TWO] + [result.final_value]
            assert all(b < a for a, b in zip(values, values[1:]))

    def test_full_step_tail(self, solved_runs):
        for _, _, result in solved_runs:
            tail = [r for r in result.trace if r.phase is Phase.TWO][-3:]
            assert all(r.j_k == 0 and r.tau == 1.0 for r in tail)

    def test_superlinear_tail(self, solved_runs):
        for ms, _, result in solved_runs:
            if relative_error(result.x_hat, ms.truth) >= 1e-8:
                continue
            norms = [r.grad_norm for r in result.trace if r.phase is Phase.TWO][-3:]
            norms.append(result.final_grad_norm)
            for current, following in zip(norms, norms[1:]):
                assert following <= 1e3 * current**1.125

    def test_given_start(self, real_instance):
        model = QuadraticResidualModel(real_instance)
        result = solve(model, GrnmConfig(init_mode=InitMode.GIVEN), x0=real_instance.truth.values)
        assert result.status in (SolveStatus.EXACT_STATIONARY, SolveStatus.GRAD_TOLERANCE_MET)
        assert result.iterations == 0

    def test_given_mode_requires_start(self, real_instance):
        with pytest.raises(InvalidInputError):
            solve(QuadraticResidualModel(real_instance), GrnmConfig(init_mode=InitMode.GIVEN))

    def test_deterministic(self, real_instance):
        _, first = _solve(real_instance, seed=4)
        _, second = _solve(real_instance, seed=4)
        assert first.trace == second.trace
        np.testing.assert_array_equal(first.x_hat, second.x_hat)

    def test_complex_instance(self, complex_instance):
        _, result = _solve(complex_instance, seed=2)
        assert result.status in (SolveStatus.EXACT_STATIONARY, SolveStatus.GRAD_TOLERANCE_MET)
        assert result.final_grad_norm < 1e-10
        assert relative_error(result.x_hat, complex_instance.truth) < 1e-8

    def test_complex_instance_at_plain_tolerance_stops_early(self, complex_instance):
        _, tight = _solve(complex_instance, seed=2)
        _, plain = _solve(complex_instance, seed=2, config=GrnmConfig(complex_eps=None))
        assert plain.final_grad_norm < 1e-5
        assert plain.iterations < tight.iterations

    def test_iteration_budget_counts_both_phases(self, real_instance):
        _, result = _solve(real_instance, config=GrnmConfig(max_iters=3))
        assert result.status is SolveStatus.MAX_ITERS
        assert result.iterations == 3


class TestCertificate:
    def test_passes_at_truth(self, real_instance):
        model = QuadraticResidualModel(real_instance)
        report = certify_local_min(model, real_instance.truth.values, frame_lower=0.4)
        assert report.passed
        assert report.s_norm < report.threshold
        assert report.threshold == pytest.approx(0.8 * np.sum(real_instance.truth.values**2))

    def test_origin_is_degenerate(self, real_instance):
        report = certify_local_min(QuadraticResidualModel(real_instance), np.zeros(10), frame_lower=0.4)
        assert report.degenerate and not report.passed
        assert report.threshold == 0.0

    def test_matches_dense_eigensolver(self):
        ms = generate_instance(EnsembleSpec(kind=EnsembleKind.REAL_GAUSSIAN, p=4, n=300,
                                            noise_sigma=0.5, seed=31))
        model = QuadraticResidualModel(ms)
        x = 1.5 * ms.truth.values
        report = certify_local_min(model, x, frame_lower=0.4)
        expected = np.max(np.abs(np.linalg.eigvalsh(model.residual_matrix(x))))
        assert report.s_norm == pytest.approx(expected, rel=1e-6)
        assert report.passed == (report.s_norm < report.threshold)

    def test_attached_by_solve(self, real_instance):
        model = QuadraticResidualModel(real_instance)
        result = solve(model, rng=np.random.default_rng(0), frame_lower=0.4)
        assert result.certificate is not None and result.certificate.passed

    def test_frame_lower_must_be_positive(self, real_instance):
        with pytest.raises(InvalidInputError):
            certify_local_min(QuadraticResidualModel(real_instance), np.ones(10), frame_lower=0.0)


def test_write_trace_csv(tmp_path, real_instance):
    _, result = _solve(real_instance)
    path = write_trace_csv(result, tmp_path / "trace.csv")
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == TRACE_COLUMNS
    assert len(rows) == len(result.trace) + 1
    assert {row[1] for row in rows[1:]} <= {"1", "2"}
    assert float(rows[1][2]) == result.trace[0].f
