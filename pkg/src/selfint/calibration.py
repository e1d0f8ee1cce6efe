"""Measured constants of the surface bundled into a ``GrowthBound``."""

from __future__ import annotations

import math

from .bounds import A_X_FLOOR, MU_FACTOR, GrowthBound
from .census import CensusSlice, ell_min, fit_a_X, no_polynomial
from .closer import DEFAULT_EPS, DEFAULT_RADIUS, estimate_R
from .hexagons import build_hexagons
from .surface import SurfaceGroup

GROWTH_NS = tuple(range(4, 13))
GROWTH_KS = (0.1, 0.2, 0.4)


def calibrate(S: SurfaceGroup, census: CensusSlice | None = None, *, seed: int = 0,
              c_samples: int = 1000, r_trials: int = 50, eps: float = DEFAULT_EPS,
              radius: int = DEFAULT_RADIUS, ns=GROWTH_NS, ks=GROWTH_KS,
              factor: float = MU_FACTOR) -> tuple[GrowthBound, dict]:
    """C from the hexagon decomposition, R_hat from the arc closer, the
    injectivity radius from the systole, and a_X fitted on ``census``
    (left at its floor when no census is given)."""
    H = build_hexagons(S, c_samples=c_samples, seed=seed)
    R = estimate_R(S, eps, r_trials, seed=seed, radius=radius)
    if not math.isfinite(R.R_hat):
        raise RuntimeError("no arc closed; cannot estimate R_hat")
    systole = ell_min(S)
    gb = GrowthBound(C=H.C_min, R_hat=R.R_hat, a_X=A_X_FLOOR, injectivity_radius=0.5 * systole,
                     R_hat_lower_bound_only=R.lower_bound_only, mu_factor=factor)
    if census is not None:
        gb = gb.replace(a_X=fit_a_X(census, ns, ks, gb.c_X, no_polynomial, factor))
    info = {
        "systole": systole,
        "closing_successes": R.successes,
        "closing_trials": R.trials,
        "closing_eps": eps,
        "closing_radius": radius,
        "c_samples": c_samples,
        "seed": seed,
    }
    if census is not None:
        # the other factor in circulation for mu, for comparison only
        info["a_X_factor_half"] = fit_a_X(census, ns, ks, gb.c_X, no_polynomial, 0.5)
    return gb, info
