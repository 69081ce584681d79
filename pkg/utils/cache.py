"""LRU memoisation for the pure grid and matrix builders."""

from __future__ import annotations

from functools import wraps
from typing import Any, Callable, Hashable, Protocol, TypeVar

from lru import LRU

R = TypeVar("R")


class CachedFunction(Protocol[R]):
    cache: LRU

    def __call__(self, *args: Any, **kwargs: Any) -> R:
        ...

    def invalidate(self, *args: Any, **kwargs: Any) -> bool:
        ...

    def clear(self) -> None:
        ...

    def get_stats(self) -> tuple[int, int]:
        ...


def _make_key(args: tuple[Any, ...], kwargs: dict[str, Any]) -> Hashable:
    return args, tuple(sorted(kwargs.items()))


def cache(maxsize: int = 128) -> Callable[[Callable[..., R]], CachedFunction[R]]:
    """Memoise a function of hashable arguments (grids, floats, ints).

    Values are shared between callers, so returned arrays must be read only.
    `get_stats` gives (hits, misses).
    """

    def decorator(func: Callable[..., R]) -> CachedFunction[R]:
        store = LRU(maxsize)

        @wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> R:
            key = _make_key(args, kwargs)
            try:
                return store[key]
            except KeyError:
                value = store[key] = func(*args, **kwargs)
                return value

        def invalidate(*args: Any, **kwargs: Any) -> bool:
            try:
                del store[_make_key(args, kwargs)]
            except KeyError:
                return False
            return True

        setattr(wrapper, "cache", store)
        setattr(wrapper, "invalidate", invalidate)
        setattr(wrapper, "clear", store.clear)
        setattr(wrapper, "get_stats", store.get_stats)
        return wrapper  # type: ignore

    return decorator
