from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Any, Mapping, TypedDict

import config
from classes.background import PhysicalParams
from classes.exceptions import ConfigurationError, InvalidParameter
from classes.spectral import TorusGrid
from utils import checks
from utils.helpers import load_json

log = logging.getLogger(__name__)

SCENARIOS = ("modes", "simulate", "verify", "sweep")
SOLVERS = ("fuchsian", "direct")
SWEEP_AXES = ("gamma", "kappa", "G", "lam", "eps", "n", "tol")


class ParamsSection(TypedDict, total=False):
    G: float
    kappa: float
    gamma: float


class GridSection(TypedDict, total=False):
    n: int
    period: float
    dealias: bool


class SolverSection(TypedDict, total=False):
    name: str
    nonlinear: bool
    tau_min: float
    t_end: float
    rtol: float
    ode_tol: float
    cfl: float
    workers: int
    fft_workers: int


class DataSection(TypedDict, total=False):
    beta: float
    beta0: float
    seed: int
    sobolev_s: int


class VerifySection(TypedDict, total=False):
    Cs: float
    Cm: float


class OutputSection(TypedDict, total=False):
    out: str
    snapshots: int
    dump_spectra: bool


class ArgsSection(TypedDict, total=False):
    lams: list[float]
    times: list[float]
    axis: str
    values: list[float]


class ConfigFile(TypedDict, total=False):
    params: ParamsSection
    grid: GridSection
    solver: SolverSection
    data: DataSection
    verify: VerifySection
    output: OutputSection
    args: ArgsSection


# file section -> (file key -> RunConfig field)
SECTIONS: dict[str, dict[str, str]] = {
    "params": {"G": "G", "kappa": "kappa", "gamma": "gamma"},
    "grid": {"n": "grid_n", "period": "period", "dealias": "dealias"},
    "solver": {
        "name": "solver",
        "nonlinear": "nonlinear",
        "tau_min": "tau_min",
        "t_end": "t_end",
        "rtol": "rtol",
        "ode_tol": "ode_tol",
        "cfl": "cfl",
        "workers": "workers",
        "fft_workers": "fft_workers",
    },
    "data": {"beta": "beta", "beta0": "beta0", "seed": "seed", "sobolev_s": "sobolev_s"},
    "verify": {"Cs": "Cs", "Cm": "Cm"},
    "output": {"out": "out", "snapshots": "snapshots", "dump_spectra": "dump_spectra"},
    "args": {"lams": "lams", "times": "times", "axis": "axis", "values": "values"},
}


def _defaults() -> dict[str, Any]:
    return {
        "G": config.G,
        "kappa": config.kappa,
        "gamma": config.gamma,
        "beta": config.beta,
        "beta0": config.beta0,
        "grid_n": config.grid_n,
        "period": config.period,
        "dealias": True,
        "solver": config.solver,
        "nonlinear": config.nonlinear,
        "tau_min": config.tau_min,
        "t_end": config.t_end,
        "rtol": config.rtol,
        "ode_tol": config.ode_tol,
        "cfl": config.cfl,
        "sobolev_s": config.sobolev_s,
        "Cs": config.Cs,
        "Cm": config.Cm,
        "seed": config.seed,
        "snapshots": config.snapshots,
        "workers": config.workers,
        "fft_workers": config.fft_workers,
        "out": config.out,
        "dump_spectra": False,
        "lams": list(config.lams),
        "times": list(config.mode_times),
        "axis": None,
        "values": [],
    }


def _flatten(data: ConfigFile, source: str) -> dict[str, Any]:
    flat: dict[str, Any] = {}
    for section, values in data.items():
        if section not in SECTIONS:
            raise InvalidParameter(f"{source}: section", section, "one of " + ", ".join(SECTIONS))
        if not isinstance(values, Mapping):
            raise InvalidParameter(f"{source}: {section}", values, "an object")
        for key, value in values.items():
            try:
                flat[SECTIONS[section][key]] = value
            except KeyError:
                allowed = ", ".join(SECTIONS[section])
                raise InvalidParameter(f"{source}: {section}.{key}", value, f"a key in {allowed}")
    return flat


class RunConfig:
    """Fully resolved and validated configuration of one harness invocation."""

    def __init__(self, scenario: str, **values: Any) -> None:
        self.scenario: str = checks.one_of("scenario", scenario, SCENARIOS)

        self.params: PhysicalParams = PhysicalParams(values["G"], values["kappa"], values["gamma"])
        self.grid: TorusGrid = TorusGrid(
            int(values["grid_n"]), float(values["period"]), bool(values["dealias"])
        )
        self.beta: float = checks.positive("beta", values["beta"])
        self.beta0: float = checks.non_negative("beta0", values["beta0"])
        self.solver: str = checks.one_of("solver", values["solver"], SOLVERS)
        self.nonlinear: bool = bool(values["nonlinear"])

        self.tau_min: float = checks.in_unit_interval("tau_min", values["tau_min"])
        if self.tau_min == 1.0:
            raise InvalidParameter("tau_min", self.tau_min, "< 1")
        self.t_end: float = checks.greater_than("t_end", values["t_end"], 1.0)
        self.rtol: float = checks.positive("tol", values["rtol"])
        self.ode_tol: float = checks.positive("ode_tol", values["ode_tol"])
        self.cfl: float = checks.positive("cfl", values["cfl"])
        self.sobolev_s: int = int(checks.at_least("sobolev_s", values["sobolev_s"], 0))
        self.Cs: float = checks.positive("Cs", values["Cs"])
        self.Cm: float = checks.positive("Cm", values["Cm"])
        self.seed: int = int(values["seed"])
        self.snapshots: int = int(checks.at_least("snapshots", values["snapshots"], 0))

        workers = values["workers"]
        if workers is not None:
            workers = int(checks.positive("workers", workers))
        self.workers: None | int = workers
        self.fft_workers: int = int(checks.positive("fft_workers", values["fft_workers"]))
        self.out: Path = Path(values["out"])
        self.dump_spectra: bool = bool(values["dump_spectra"])

        self.lams: list[float] = [float(lam) for lam in values["lams"]]
        for lam in self.lams:
            if not math.isfinite(lam) or lam > 0:
                raise InvalidParameter("lam", lam, "<= 0")
        self.times: list[float] = sorted(
            checks.at_least("times", float(t), 1.0) for t in values["times"]
        )

        axis = values["axis"]
        self.axis: None | str = None if axis is None else checks.one_of("axis", axis, SWEEP_AXES)
        self.values: list[float] = [float(v) for v in values["values"]]
        if scenario == "sweep" and self.axis is None:
            raise InvalidParameter("axis", None, "one of " + ", ".join(SWEEP_AXES))

    @property
    def t_final(self) -> float:
        """Final physical time of a simulation with the selected solver."""
        return 1 / self.tau_min if self.solver == "fuchsian" else self.t_end

    @classmethod
    def resolve(
        cls,
        scenario: str,
        *,
        path: None | str | Path = None,
        overrides: None | Mapping[str, Any] = None,
    ) -> RunConfig:
        """Defaults from `config`, then the JSON file at `path`, then `overrides`.

        Overrides set to None are ignored.
        """
        values = _defaults()
        if path is not None:
            try:
                data: ConfigFile = load_json(path)
            except FileNotFoundError:
                raise InvalidParameter("config", str(path), "an existing file")
            except ValueError as e:
                raise ConfigurationError(f"Config file {path} is not valid JSON: {e}") from e
            values.update(_flatten(data, str(path)))
            log.debug("Loaded configuration file %s", path)

        for key, value in (overrides or {}).items():
            if key not in values:
                raise InvalidParameter("override", key, "a known configuration key")
            if value is not None:
                values[key] = value
        return cls(scenario, **values)

    def replace(self, **changes: Any) -> RunConfig:
        values = self.to_flat()
        values.update(changes)
        return RunConfig(self.scenario, **values)

    def to_flat(self) -> dict[str, Any]:
        return {
            "G": self.params.G,
            "kappa": self.params.kappa,
            "gamma": self.params.gamma,
            "beta": self.beta,
            "beta0": self.beta0,
            "grid_n": self.grid.n,
            "period": self.grid.period,
            "dealias": self.grid.dealias,
            "solver": self.solver,
            "nonlinear": self.nonlinear,
            "tau_min": self.tau_min,
            "t_end": self.t_end,
            "rtol": self.rtol,
            "ode_tol": self.ode_tol,
            "cfl": self.cfl,
            "sobolev_s": self.sobolev_s,
            "Cs": self.Cs,
            "Cm": self.Cm,
            "seed": self.seed,
            "snapshots": self.snapshots,
            "workers": self.workers,
            "fft_workers": self.fft_workers,
            "out": str(self.out),
            "dump_spectra": self.dump_spectra,
            "lams": list(self.lams),
            "times": list(self.times),
            "axis": self.axis,
            "values": list(self.values),
        }

    def to_dict(self) -> dict[str, Any]:
        """Echo of the resolved configuration, nested like the config file."""
        flat = self.to_flat()
        echo: dict[str, Any] = {"scenario": self.scenario}
        for section, keys in SECTIONS.items():
            echo[section] = {key: flat[field] for key, field in keys.items()}
        echo["derived"] = {"kappa_tilde": self.params.kappa_tilde}
        return echo
