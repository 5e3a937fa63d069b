"""
Brute-force cross-checks that do not go through the speed formula.

- ``fd_k_estimate`` extracts k from the decay of an integrated survival
  probability, (1 - P(tau)) / tau^2, and extrapolates tau -> 0.
- ``fd_speed_estimate`` extracts the ray speed from finite separations,
  distance(psi(t), psi(t + h)) / h, and extrapolates h -> 0.
- ``quadrature_check`` compares a Riemann sum on a grid with a closed form.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import numpy as np

from .dynamics import EvolutionModel, propagate
from .geometry import fs_distance
from .hilbert import GridState, State, inner_product, norm

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RichardsonEstimate:
    value: float
    stepwise_values: List[Tuple[float, float]]
    extrapolation_order: int


def richardson(steps: Sequence[float], values: Sequence[float], first_order: int = 1) -> float:
    """
    Neville-style Richardson table for steps halving at every level.

    Assumes ``values[i] = L + c1 h_i^p + c2 h_i^(p+1) + ...`` with p = ``first_order``;
    each column eliminates one more power.
    """
    if len(steps) != len(values) or not steps:
        raise ValueError("need matching, non-empty steps and values")
    for h0, h1 in zip(steps, steps[1:]):
        if not np.isclose(h0, 2.0 * h1, rtol=1e-12):
            raise ValueError("steps must halve at every level")
    level = list(values)
    order = first_order
    while len(level) > 1:
        m = 2.0**order
        level = [(m * fine - coarse) / (m - 1.0) for coarse, fine in zip(level, level[1:])]
        order += 1
    return float(level[0])


def _survival(psi0: State, psi: State) -> float:
    return abs(inner_product(psi0, psi)) ** 2 / (norm(psi0) ** 2 * norm(psi) ** 2)


def fd_k_estimate(
    model: EvolutionModel,
    psi0: State,
    tau: float,
    dt: float,
    levels: int = 3,
    method: str = "rk4",
) -> RichardsonEstimate:
    """
    Extrapolated short-time decay constant from integrated survival at tau, tau/2, tau/4, ...

    The raw estimate (1 - P)/tau^2 carries an O(tau) error from the cubic term
    of P, so the table starts at first order. Each level integrates with
    step ``min(dt, tau_level/100)``.
    """
    if levels < 2:
        raise ValueError("need at least two levels to extrapolate")
    raw = []
    for i in range(levels):
        t_i = tau / 2**i
        psi = propagate(model, psi0, 0.0, t_i, min(dt, t_i / 100.0), method)
        p = _survival(psi0, psi)
        if not p > 0.5:
            raise ValueError(f"tau={t_i} too large: P={p:.3f} <= 0.5")
        raw.append((t_i, (1.0 - p) / t_i**2))
    value = richardson([h for h, _ in raw], [k for _, k in raw], first_order=1)
    return RichardsonEstimate(value=value, stepwise_values=raw, extrapolation_order=levels - 1)


def integrated_trajectory(
    model: EvolutionModel, psi0: State, t0: float = 0.0, dt: float = 1e-4, method: str = "rk4"
) -> Callable[[float], State]:
    """State at time t by fixed-step integration from (t0, psi0); t = t0 returns psi0."""

    def at(t: float) -> State:
        if t == t0:
            return psi0
        return propagate(model, psi0, t0, t, min(dt, t - t0), method)

    return at


def fd_speed_estimate(trajectory_provider: Callable[[float], State], t: float, h: float) -> RichardsonEstimate:
    """Forward divided distance at h and h/2, extrapolated to first order."""
    if not h > 0:
        raise ValueError("h must be positive")
    psi_t = trajectory_provider(t)
    raw = [(s, fs_distance(psi_t, trajectory_provider(t + s)) / s) for s in (h, h / 2.0)]
    value = richardson([s for s, _ in raw], [v for _, v in raw], first_order=1)
    return RichardsonEstimate(value=value, stepwise_values=raw, extrapolation_order=1)


def quadrature_check(f: GridState, closed_form: float) -> float:
    """Relative error of the grid Riemann sum of ``f`` against ``closed_form``."""
    total = f.grid.dx * np.sum(f.samples)
    if abs(total.imag) > 1e-12 * max(1.0, abs(total.real)):
        log.warning("integrand has imaginary part %.3e; comparing real part", total.imag)
    diff = abs(total.real - closed_form)
    if closed_form == 0:
        log.info("closed form is zero; reporting absolute difference %.3e", diff)
        return float(diff)
    return float(diff / abs(closed_form))
