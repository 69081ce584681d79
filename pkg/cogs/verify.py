from __future__ import annotations

import logging
import math
from typing import TYPE_CHECKING, Any, Callable, TypedDict

import numpy as np

from classes.background import PhysicalParams, background_state, friedmann_residual
from classes.data import admissible_data, sampled_constant_data, single_mode_data
from classes.direct_solver import compare_trajectories
from classes.exceptions import JeansException, OutOfValidity
from classes.fuchsian import (
    assemble_matrices,
    from_fuchsian,
    to_fuchsian,
    verify_density_bounds,
)
from classes.modes import (
    JeansClass,
    ModeSpec,
    closed_form_mode,
    integrate_mode_ode,
    jeans_classify,
    jeans_threshold,
    mode_exponents,
)
from classes.scenario import Scenario, check
from classes.simulation import run_simulation
from classes.spectral import (
    SpectralField,
    laplacian,
    random_field,
    transform_forward,
    transform_inverse,
)
from classes.trajectory import Trajectory, growth_exponent
from cogs.simulate import Advisory, admissibility_advisory
from utils.helpers import save_json
from utils.time import Stopwatch

if TYPE_CHECKING:
    from classes.run_config import RunConfig
    from harness import Harness

log = logging.getLogger(__name__)

GROWTH_TARGET = 2 / 3
GROWTH_TOLERANCE = 1e-3
ORACLE_TOLERANCE = 1e-8
MATRIX_TOLERANCE = 1e-14
STEP_TOLERANCE = 1e-8
CROSS_SOLVER_TOLERANCE = 1e-5
SCALING_RANGE = (3.5, 4.5)
SPECTRAL_TOLERANCE = 1e-12
FRIEDMANN_TOLERANCE = 1e-12

SCALING_AMPLITUDES = (1e-2, 5e-3, 2.5e-3, 1.25e-3)


class CheckResult(TypedDict):
    name: str
    passed: bool
    measured: dict[str, Any]


class VerifyReport(TypedDict):
    metadata: dict[str, Any]
    config: dict[str, Any]
    advisories: list[Advisory]
    checks: list[CheckResult]
    passed: bool


def _relative(difference: float, reference: float) -> float:
    return difference / reference if reference > 0 else difference


class Verify(Scenario):
    """The acceptance suite; every check reports its measured margins."""

    name = "verify"

    def __init__(self, harness: Harness) -> None:
        super().__init__(harness)
        self._energy_runs: None | list[tuple[str, Trajectory]] = None

    @check("growth_exponent")
    def growth(self, cfg: RunConfig) -> tuple[bool, dict[str, Any]]:
        times = [float(t) for t in np.geomspace(10.0, 100.0, 11)]
        rng = np.random.default_rng(cfg.seed)
        sample = admissible_data(cfg.grid, cfg.beta, cfg.beta0, cfg.sobolev_s, rng)
        initial = sampled_constant_data(sample)
        base = cfg.replace(tau_min=0.01, t_end=100.0, times=times, snapshots=0, nonlinear=False)

        measured: dict[str, Any] = {
            "target": GROWTH_TARGET,
            "tolerance": GROWTH_TOLERANCE,
            "initial": [initial.rho.mean, initial.rho_t.mean],
        }
        passed = True
        for solver in ("fuchsian", "direct"):
            traj = run_simulation(base.replace(solver=solver), initial)
            samples = [
                (snapshot.t, float(transform_inverse(snapshot.density.rho)[0, 0, 0]))
                for snapshot in traj
                if snapshot.t >= 10.0 - 1e-9
            ]
            slope = growth_exponent(*zip(*samples))
            measured[solver] = slope
            passed &= abs(slope - GROWTH_TARGET) <= GROWTH_TOLERANCE
        return passed, measured

    @check("closed_form_oracle")
    def oracle(self, cfg: RunConfig) -> tuple[bool, dict[str, Any]]:
        kappa_tilde = cfg.params.kappa_tilde
        times = np.geomspace(1.0, 100.0, 101)
        worst = 0.0
        for lam_kappa in np.linspace(-0.69, 0.0, 20):
            mode = ModeSpec.from_lam_kappa(float(lam_kappa), kappa_tilde)
            exact, _, _ = closed_form_mode(mode, times)
            ode = integrate_mode_ode(mode, 100.0, cfg.ode_tol, t_eval=times)
            worst = max(worst, float(np.max(np.abs(ode.f - exact) / np.abs(exact))))
        return worst <= ORACLE_TOLERANCE, {"max_relative": worst, "tolerance": ORACLE_TOLERANCE}

    @check("jeans_criterion")
    def criterion(self, cfg: RunConfig) -> tuple[bool, dict[str, Any]]:
        params = PhysicalParams(1.0, 1.0, 4 / 3)
        threshold = jeans_threshold(params)
        rng = np.random.default_rng(cfg.seed)
        mismatches = 0
        for lam in rng.uniform(-3.0, 0.0, 200):
            mode = ModeSpec(float(lam), params.kappa_tilde)
            growing = jeans_classify(mode, params) is JeansClass.growing
            try:
                mu_plus, _ = mode_exponents(mode)
            except OutOfValidity:
                positive = False
            else:
                positive = mu_plus > 0
            if growing != (lam > threshold) or growing != positive:
                mismatches += 1
        return mismatches == 0, {"threshold": threshold, "mismatches": mismatches, "samples": 200}

    @check("matrix_identities")
    def matrices(self, cfg: RunConfig) -> tuple[bool, dict[str, Any]]:
        rng = np.random.default_rng(cfg.seed)
        worst = 0.0
        for _ in range(50):
            m = assemble_matrices(float(rng.uniform(1.01, 3.0)), float(rng.uniform(0.1, 10.0)))
            scaled = np.linalg.solve(m.B0, m.calB)
            deviations = [
                m.P @ m.P - m.P,
                m.P.T - m.P,
                scaled @ m.P - m.P @ scaled,
                *(B.T - B for B in m.Bi),
            ]
            worst = max(worst, max(float(np.max(np.abs(d))) for d in deviations))
        return worst <= MATRIX_TOLERANCE, {"max_deviation": worst, "tolerance": MATRIX_TOLERANCE}

    def energy_runs(self, cfg: RunConfig) -> list[tuple[str, Trajectory]]:
        """Ten seeded admissible states, both indices, linear and nonlinear, to tau = 0.01."""
        if self._energy_runs is not None:
            return self._energy_runs

        runs = []
        base = cfg.replace(solver="fuchsian", tau_min=0.01, sobolev_s=3)
        for gamma in (4 / 3, 5 / 3):
            for seed in range(cfg.seed, cfg.seed + 10):
                run_cfg = base.replace(gamma=gamma, seed=seed)
                rng = np.random.default_rng(seed)
                initial = admissible_data(cfg.grid, cfg.beta, cfg.beta0, 3, rng)
                for nonlinear in (False, True):
                    kind = "nonlinear" if nonlinear else "linear"
                    traj = run_simulation(run_cfg, initial, nonlinear=nonlinear)
                    runs.append((f"gamma={gamma:.6g} seed={seed} {kind}", traj))
        self._energy_runs = runs
        return runs

    @check("energy_monotonicity")
    def monotonicity(self, cfg: RunConfig) -> tuple[bool, dict[str, Any]]:
        worst_increase, worst_label, failures = -math.inf, "", []
        for label, traj in self.energy_runs(cfg):
            energy_log = traj.energy_log
            assert energy_log is not None
            increase = energy_log.max_increase()
            if increase > worst_increase:
                worst_increase, worst_label = increase, label
            if increase > STEP_TOLERANCE or energy_log.energy[-1] > energy_log.energy[0]:
                failures.append({"run": label, "worst_step": energy_log.worst_step()})
        return not failures, {
            "max_step_increase": worst_increase,
            "worst_run": worst_label,
            "tolerance": STEP_TOLERANCE,
            "failures": failures,
        }

    @check("density_bounds")
    def bounds(self, cfg: RunConfig) -> tuple[bool, dict[str, Any]]:
        reports = [
            (verify_density_bounds(traj, cfg.beta), label) for label, traj in self.energy_runs(cfg)
        ]
        worst, label = min(reports, key=lambda item: item[0].margin)
        return worst.holds, {"worst": worst.to_dict(), "worst_run": label}

    @check("cross_solver")
    def cross_solver(self, cfg: RunConfig) -> tuple[bool, dict[str, Any]]:
        initial = single_mode_data(cfg.grid, (1, 0, 0), cfg.beta, cfg.beta0)
        base = cfg.replace(tau_min=0.01, t_end=100.0, times=[], snapshots=0, nonlinear=False)
        fuchsian = run_simulation(base.replace(solver="fuchsian"), initial)
        direct = run_simulation(base.replace(solver="direct"), initial)
        report = compare_trajectories(direct, fuchsian, [100.0])
        return report.max_sup <= CROSS_SOLVER_TOLERANCE, {
            "sup": report.max_sup,
            "l2": report.max_l2,
            "tolerance": CROSS_SOLVER_TOLERANCE,
        }

    @check("nonlinearity_scaling")
    def scaling(self, cfg: RunConfig) -> tuple[bool, dict[str, Any]]:
        base = cfg.replace(
            solver="fuchsian", tau_min=0.1, rtol=min(cfg.rtol, 1e-10), times=[], snapshots=0
        )
        gaps = []
        for amplitude in SCALING_AMPLITUDES:
            initial = single_mode_data(cfg.grid, (1, 0, 0), cfg.beta, amplitude)
            linear = run_simulation(base, initial, nonlinear=False)
            nonlinear = run_simulation(base, initial, nonlinear=True)
            difference = linear.rho_samples()[-1] - nonlinear.rho_samples()[-1]
            gaps.append(float(np.sqrt(np.mean(difference**2))))

        low, high = SCALING_RANGE
        ratios = [a / b if b > 0 else math.inf for a, b in zip(gaps, gaps[1:])]
        passed = all(low <= ratio <= high for ratio in ratios)
        return passed, {
            "amplitudes": list(SCALING_AMPLITUDES),
            "gaps": gaps,
            "ratios": ratios,
            "range": list(SCALING_RANGE),
        }

    @check("spectral_layer")
    def spectral(self, cfg: RunConfig) -> tuple[bool, dict[str, Any]]:
        grid = cfg.grid
        rng = np.random.default_rng(cfg.seed)

        field = random_field(grid, rng, grid.n / 2)
        samples = transform_inverse(field)
        physical = float(np.mean(samples**2))
        parseval = abs(physical - float(np.sum(np.abs(field.coeffs) ** 2))) / physical

        laplace = 0.0
        for k in ((1, 0, 0), (0, 2, 0), (1, 1, 3), (grid.n // 4, 1, 2)):
            ksq = (k[0] ** 2 + k[1] ** 2 + k[2] ** 2) * grid.scale**2

            def wave(q1, q2, q3, k=k):
                return np.cos(grid.scale * (k[0] * q1 + k[1] * q2 + k[2] * q3))

            mode = SpectralField.from_function(grid, wave)
            deviation = laplacian(mode) - (-ksq) * mode
            laplace = max(laplace, float(np.max(np.abs(deviation.coeffs))) / ksq)

        initial = admissible_data(grid, cfg.beta, max(cfg.beta0, 0.01), 3, rng)
        back = from_fuchsian(to_fuchsian(initial, cfg.beta, cfg.params))
        round_trip = max(
            float(np.max(np.abs(back.rho.coeffs - initial.rho.coeffs))) / cfg.beta,
            float(np.max(np.abs(back.rho_t.coeffs - initial.rho_t.coeffs))) / cfg.beta,
        )
        reconstruction = float(
            np.max(np.abs(transform_forward(samples, grid).coeffs - field.coeffs))
        )

        worst = max(parseval, laplace, round_trip, reconstruction)
        return worst <= SPECTRAL_TOLERANCE, {
            "parseval": parseval,
            "laplacian": laplace,
            "round_trip": round_trip,
            "transform_round_trip": reconstruction,
            "tolerance": SPECTRAL_TOLERANCE,
        }

    @check("friedmann")
    def friedmann(self, cfg: RunConfig) -> tuple[bool, dict[str, Any]]:
        worst = 0.0
        for t in np.geomspace(1.0, 1e4, 41):
            state = background_state(float(t), cfg.params)
            r1, r2 = friedmann_residual(float(t), cfg.params)
            worst = max(
                worst,
                _relative(abs(r1), 3 * state.H * state.rho0),
                _relative(abs(r2), state.H**2),
            )
        return worst <= FRIEDMANN_TOLERANCE, {
            "max_relative": worst,
            "tolerance": FRIEDMANN_TOLERANCE,
        }

    def run_check(
        self, name: str, func: Callable[[RunConfig], tuple[bool, dict[str, Any]]], cfg: RunConfig
    ) -> CheckResult:
        with Stopwatch() as watch:
            try:
                passed, measured = func(cfg)
            except JeansException as e:
                log.error("Check %s raised: %s", name, e)
                passed, measured = False, {"error": str(e)}

        log.info(
            "Check %s %s in %s",
            name,
            "passed" if passed else "FAILED",
            watch,
        )
        return {"name": name, "passed": bool(passed), "measured": measured}

    def report(self, cfg: RunConfig) -> VerifyReport:
        self._energy_runs = None
        checks = [self.run_check(name, getattr(self, attr), cfg) for name, attr in self.__checks__]
        self._energy_runs = None
        return {
            "metadata": self.harness.metadata(cfg),
            "config": cfg.to_dict(),
            "advisories": admissibility_advisory(cfg),
            "checks": checks,
            "passed": all(entry["passed"] for entry in checks),
        }

    def run(self, cfg: RunConfig) -> int:
        report = self.report(cfg)
        path = save_json(self.output_dir(cfg) / "verify.json", report)
        failed = [entry["name"] for entry in report["checks"] if not entry["passed"]]
        if failed:
            log.warning("Verification failed: %s (report in %s)", ", ".join(failed), path)
            return 1
        log.info("All %d checks passed (report in %s)", len(report["checks"]), path)
        return 0


def setup(harness: Harness) -> None:
    harness.add_scenario(Verify(harness))
