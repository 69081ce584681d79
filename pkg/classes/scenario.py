from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING, Any, Callable, ClassVar, TypeVar

if TYPE_CHECKING:
    from classes.run_config import RunConfig
    from harness import Harness

F = TypeVar("F", bound=Callable[..., Any])


def check(name: str) -> Callable[[F], F]:
    """Mark a scenario method as a named check, collected in definition order."""

    def decorator(func: F) -> F:
        setattr(func, "__check_name__", name)
        return func

    return decorator


class Scenario:
    """Base class of the harness subcommands, loaded from the `cogs` package."""

    name: ClassVar[str]
    __checks__: ClassVar[list[tuple[str, str]]]

    def __init_subclass__(cls, **kwargs: Any) -> None:
        super().__init_subclass__(**kwargs)
        cls.__checks__ = [
            (getattr(member, "__check_name__"), attr)
            for attr, member in cls.__dict__.items()
            if hasattr(member, "__check_name__")
        ]

    def __init__(self, harness: Harness) -> None:
        self.harness = harness

    def __repr__(self) -> str:
        return f"<{type(self).__name__} name={self.name!r}>"

    @staticmethod
    def output_dir(cfg: RunConfig) -> Path:
        cfg.out.mkdir(parents=True, exist_ok=True)
        return cfg.out

    def run(self, cfg: RunConfig) -> int:
        """Execute the scenario and return the process exit code."""
        raise NotImplementedError
