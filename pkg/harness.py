from __future__ import annotations

import importlib
import logging
from pathlib import Path
from typing import Any

import numpy as np
import psutil
import scipy

import config
from classes.exceptions import ConfigurationError, JeansException
from classes.run_config import RunConfig
from classes.scenario import Scenario
from classes.spectral import set_fft_workers
from utils.time import Stopwatch

log = logging.getLogger(__name__)

__version__ = "1.0.0"

EXTENSIONS = Path(__file__).resolve().parent / "cogs"


class Harness:
    """Custom harness class for jeansbench."""

    def __init__(self) -> None:
        self.config = config
        self.scenarios: dict[str, Scenario] = {}

    @property
    def version(self) -> str:
        return __version__

    @property
    def debug(self) -> bool:
        return config.DEBUG

    def add_scenario(self, scenario: Scenario) -> None:
        if scenario.name in self.scenarios:
            raise ConfigurationError(f"Scenario {scenario.name!r} is already registered.")
        self.scenarios[scenario.name] = scenario

    def load_extensions(self) -> None:
        for extension in sorted(EXTENSIONS.glob("*.py")):
            if extension.name.startswith("_"):
                continue
            try:
                module = importlib.import_module(f"cogs.{extension.stem}")
                module.setup(self)
            except Exception:
                log.exception(f"Extension {extension.name} failed its loading.")
            else:
                log.debug(f"Extension {extension.name} successfully loaded.")

    @staticmethod
    def workers(cfg: RunConfig) -> int:
        """Worker processes of a sweep; defaults to the physical core count."""
        if cfg.workers is not None:
            return cfg.workers
        return psutil.cpu_count(logical=False) or 1

    def metadata(self, cfg: RunConfig) -> dict[str, Any]:
        return {
            "version": self.version,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "fft_workers": cfg.fft_workers,
            "workers": self.workers(cfg),
        }

    def run(self, cfg: RunConfig) -> int:
        """Run the scenario named by `cfg` and map its outcome to an exit code."""
        if not self.scenarios:
            self.load_extensions()

        set_fft_workers(cfg.fft_workers)
        watch = Stopwatch()
        try:
            scenario = self.scenarios[cfg.scenario]
        except KeyError:
            log.error("Scenario %s is not loaded.", cfg.scenario)
            return 2

        try:
            code = scenario.run(cfg)
        except ConfigurationError as e:
            log.error("%s", e)
            return 2
        except JeansException as e:
            log.error("%s failed: %s", cfg.scenario, e)
            return 1
        except Exception:
            log.exception("%s ran into an unexpected error.", cfg.scenario)
            return 1

        log.info(
            "%s finished in %s with exit code %d",
            cfg.scenario,
            watch,
            code,
        )
        return code
