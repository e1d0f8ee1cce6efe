"""Surface constants feeding the growth, measure and dimension bounds."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

MU_FACTOR = 4.0
A_X_FLOOR = math.e


def kappa_from_C(C: float) -> float:
    return (2.0 + 3.0 / C) ** 2


def mu(k: float, a_X: float, factor: float = MU_FACTOR) -> float:
    """Growth exponent factor * a_X * k * ln(a_X / k + a_X)."""
    if k <= 0:
        raise ValueError("k must be positive")
    return factor * a_X * k * math.log(a_X / k + a_X)


@dataclass(frozen=True)
class GrowthBound:
    """Constants of the surface. ``kappa``, ``d`` and ``c_X`` are derived
    from ``C`` and ``R_hat`` and are not constructor arguments."""

    C: float
    R_hat: float
    a_X: float
    injectivity_radius: float
    R_hat_lower_bound_only: bool = False
    mu_factor: float = MU_FACTOR
    kappa: float = field(init=False)
    d: float = field(init=False)
    c_X: float = field(init=False)

    def __post_init__(self):
        for name in ("C", "R_hat", "a_X", "injectivity_radius"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive, got {v}")
        kappa = kappa_from_C(self.C)
        d = 2.0 * kappa * self.R_hat
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "c_X", 2.0 + d / 2.0)

    def replace(self, **changes) -> "GrowthBound":
        base = {k: getattr(self, k) for k in
                ("C", "R_hat", "a_X", "injectivity_radius", "R_hat_lower_bound_only", "mu_factor")}
        base.update(changes)
        return GrowthBound(**base)

    def mu(self, k: float, factor: float | None = None) -> float:
        return mu(k, self.a_X, self.mu_factor if factor is None else factor)

    def dim_bound(self, k: float) -> float:
        return 4.0 * self.mu(k) + 1.0

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "GrowthBound":
        keys = ("C", "R_hat", "a_X", "injectivity_radius", "R_hat_lower_bound_only", "mu_factor")
        gb = cls(**{k: d[k] for k in keys if k in d})
        for k in ("kappa", "d", "c_X"):
            if k in d and not math.isclose(d[k], getattr(gb, k), rel_tol=1e-12):
                raise ValueError(f"stored {k} = {d[k]} disagrees with derived {getattr(gb, k)}")
        return gb


def k0_for(a_X: float, factor: float = MU_FACTOR, target: float = 0.25,
           lo: float = 1e-300, hi: float = 10.0) -> float:
    """The k with mu(k) = target, by bisection (mu is increasing in k for a_X >= e)."""
    f = lambda k: mu(k, a_X, factor) - target
    if f(hi) < 0:
        raise ValueError(f"no root of mu(k) = {target} in (0, {hi})")
    # mu(k) ~ k ln(1/k) -> 0 as k -> 0, so the lower end is negative
    lo = min(lo, hi)
    while hi - lo > 1e-16 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def dim_bound_and_k0(gb: GrowthBound, k: float) -> tuple[float, float]:
    """(4 mu(k) + 1, k0) with mu(k0) = 1/4."""
    return gb.dim_bound(k), k0_for(gb.a_X, gb.mu_factor)
