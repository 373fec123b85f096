"""Retry helper shared by the remote backend clients."""

from __future__ import annotations

import time
from typing import Callable, TypeVar

from .errors import BackendError

T = TypeVar("T")


def retry_call(
    fn: Callable[[], T],
    *,
    attempts: int = 3,
    base_delay: float = 0.5,
    sleep: Callable[[float], None] = time.sleep,
) -> T:
    """Run ``fn``, retrying retryable backend errors with exponential backoff.

    Non-retryable errors propagate immediately. ``sleep`` is injectable so
    tests do not wait on real clocks.
    """
    if attempts < 1:
        raise ValueError("attempts must be >= 1")
    for attempt in range(attempts):
        try:
            return fn()
        except BackendError as exc:
            if not exc.retryable or attempt == attempts - 1:
                raise
            sleep(base_delay * (2.0 ** attempt))
    raise AssertionError("unreachable")
