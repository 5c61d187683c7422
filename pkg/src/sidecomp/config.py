"""Runtime limits. Values can be overridden through environment variables."""

import os
from dataclasses import dataclass


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    value = int(raw)
    if value < 1:
        raise ValueError(f"{name} must be a positive integer, got {raw!r}")
    return value


@dataclass(frozen=True)
class Limits:
    # largest square matrix / fiber / model dimension the library will build
    max_dim: int = 64
    # bits of the dyadic grid used for rational square-root upper bounds
    sqrt_bits: int = 24
    k_max_cap: int = 1000


def current_limits() -> Limits:
    return Limits(
        max_dim=_env_int("SIDECOMP_MAX_DIM", 64),
        sqrt_bits=_env_int("SIDECOMP_SQRT_BITS", 24),
        k_max_cap=_env_int("SIDECOMP_K_MAX_CAP", 1000),
    )
