from __future__ import annotations

from typing import Sequence


class JeansException(Exception):
    """Base exception type for jeansbench."""

    pass


class ConfigurationError(JeansException):
    pass


class InvalidParameter(ConfigurationError):
    def __init__(self, name: str, value: object, requirement: str) -> None:
        self.name = name
        self.value = value
        super().__init__(f"Invalid value for `{name}`: {value!r} (required: {requirement}).")


class ShapeMismatch(ConfigurationError):
    def __init__(self, expected: Sequence[int], got: Sequence[int]) -> None:
        super().__init__(
            f"Sample array has shape {tuple(got)} but the grid expects {tuple(expected)}."
        )


class UnsupportedIndex(ConfigurationError):
    def __init__(self, gamma: float) -> None:
        super().__init__(
            f"The closed-form mode solutions require gamma = 4/3, got gamma = {gamma!r}."
        )


class SolverError(JeansException):
    pass


class OutOfValidity(SolverError):
    def __init__(self, lam_kappa: float, classification: str) -> None:
        self.lam_kappa = lam_kappa
        self.classification = classification
        super().__init__(
            f"No closed form for lambda*kappa_tilde = {lam_kappa:.6g} ({classification}); "
            "use the mode ODE instead."
        )


class StepSizeUnderflow(SolverError):
    def __init__(self, reached: float, step: float, *, variable: str = "t") -> None:
        self.reached = reached
        self.step = step
        super().__init__(
            f"Step size underflow ({step:.3e}) after reaching {variable} = {reached:.6g}."
        )


class PositivityError(SolverError):
    def __init__(self, quantity: str, index: tuple[int, ...], value: float, time: float) -> None:
        self.quantity = quantity
        self.index = index
        self.value = value
        self.time = time
        super().__init__(
            f"Positivity of {quantity} failed at grid point {index}: value {value:.6g} "
            f"(time {time:.6g})."
        )


class EnergyOverflow(SolverError):
    def __init__(self, reached: float, energy: float) -> None:
        self.reached = reached
        self.energy = energy
        super().__init__(f"Energy overflow ({energy!r}) after reaching tau = {reached:.6g}.")


class TimeRangeError(SolverError):
    def __init__(self, requested: tuple[float, float], covered: tuple[float, float]) -> None:
        super().__init__(
            f"Requested times [{requested[0]:.6g}, {requested[1]:.6g}] are not covered by "
            f"the trajectory range [{covered[0]:.6g}, {covered[1]:.6g}]."
        )
