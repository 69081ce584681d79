from __future__ import annotations

import logging
from typing import Callable, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.integrate import RK45

from classes.exceptions import InvalidParameter, StepSizeUnderflow
from utils import checks

log = logging.getLogger(__name__)

RHS = Callable[[float, NDArray], NDArray]
StepCallback = Callable[[float, NDArray, float], None]


class StepControl:
    """Tolerances of the adaptive step size controller."""

    __slots__ = ("rtol", "atol")

    def __init__(self, rtol: float = 1e-8, atol: None | float = None) -> None:
        self.rtol: float = checks.positive("rtol", rtol)
        self.atol: float = checks.positive("atol", rtol * 1e-3 if atol is None else atol)

    def __repr__(self) -> str:
        return f"StepControl(rtol={self.rtol!r}, atol={self.atol!r})"


class StepStats:
    __slots__ = ("accepted", "evaluations", "cfl_limited")

    def __init__(self) -> None:
        self.accepted: int = 0
        self.evaluations: int = 0
        self.cfl_limited: int = 0

    def to_dict(self) -> dict[str, int]:
        return {
            "accepted": self.accepted,
            "evaluations": self.evaluations,
            "cfl_limited": self.cfl_limited,
        }


class DormandPrince:
    """Dormand-Prince 5(4) pair (scipy's `RK45`) stepped one accepted step at a time.

    States of any shape and complex dtype are flattened for the solver and
    handed back to `fun` and the callbacks in their original shape.
    """

    def __init__(self, fun: RHS, control: StepControl, *, variable: str = "t") -> None:
        self.fun: RHS = fun
        self.control: StepControl = control
        self.variable: str = variable
        self.stats: StepStats = StepStats()

    def integrate(
        self,
        x0: float,
        y0: NDArray,
        outputs: Sequence[float],
        *,
        max_step: None | Callable[[float], float] = None,
        on_step: None | StepCallback = None,
    ) -> list[NDArray]:
        """Advance from `x0` through every value of the increasing sequence `outputs`.

        Each output is the end of its own solver segment, so it is hit exactly.
        `max_step` gives an upper bound on the step at the current point (CFL),
        and `on_step` is called after every accepted step.
        """
        if len(outputs) == 0:
            return []
        if any(b <= a for a, b in zip([x0, *outputs], outputs)):
            raise InvalidParameter("outputs", tuple(outputs), f"strictly increasing after {x0}")

        shape = np.shape(y0)

        def flat(x: float, y: NDArray) -> NDArray:
            return np.ravel(self.fun(x, y.reshape(shape)))

        x, y = float(x0), np.ravel(np.array(y0))
        proposal: None | float = None
        results: list[NDArray] = []

        for target in outputs:
            solver = RK45(
                flat,
                x,
                y,
                target,
                rtol=self.control.rtol,
                atol=self.control.atol,
                first_step=None if proposal is None else min(proposal, target - x),
            )
            while solver.status == "running":
                # the last step of a segment is clamped to its end
                proposal = solver.h_abs
                if max_step is not None:
                    limit = max_step(solver.t)
                    if limit < solver.h_abs:
                        self.stats.cfl_limited += 1
                    solver.max_step = limit

                solver.step()
                if solver.status == "failed":
                    raise StepSizeUnderflow(solver.t, solver.h_abs, variable=self.variable)

                self.stats.accepted += 1
                if on_step is not None:
                    on_step(solver.t, solver.y.reshape(shape), solver.step_size)

            x, y = solver.t, solver.y
            self.stats.evaluations += solver.nfev
            results.append(y.reshape(shape).copy())

        log.debug(
            "Integrated to %s = %.6g: %d steps, %d evaluations",
            self.variable,
            x,
            self.stats.accepted,
            self.stats.evaluations,
        )
        return results
