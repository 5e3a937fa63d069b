"""
Repeated projective measurement of the initial state.

A Zeno protocol splits a total time T into N free-evolution segments of
length tau = T/N, each followed by an instantaneous measurement of the
projector onto the initial ray. Only the survivor branch is followed: after
a "yes" outcome the state is reset to exactly the initial state.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .dynamics import EvolutionModel, derivative, evolve
from .errors import NumericsError, UnsupportedProtocolError
from .geometry import fs_speed, path_length
from .hilbert import State, inner_product, norm, normalize, zero_threshold

PROBABILITY_WINDOW = 1e-12
MIN_DEFAULT_DT = 1e-5


class CollapseMode(enum.Enum):
    DETERMINISTIC = "deterministic"
    STOCHASTIC = "stochastic"


@dataclass(frozen=True, eq=False)
class ZenoProtocol:
    total_time: float
    n_measurements: int
    initial_state: State
    collapse_mode: CollapseMode = CollapseMode.DETERMINISTIC

    def __post_init__(self):
        if not self.total_time > 0:
            raise ValueError("total_time must be positive")
        if int(self.n_measurements) != self.n_measurements or self.n_measurements < 1:
            raise ValueError("n_measurements must be an integer >= 1")
        if norm(self.initial_state) <= zero_threshold(self.initial_state):
            raise ValueError("initial state has (near) zero norm")
        object.__setattr__(self, "collapse_mode", CollapseMode(self.collapse_mode))

    @property
    def tau(self) -> float:
        return self.total_time / self.n_measurements


@dataclass(frozen=True, eq=False)
class ZenoResult:
    per_step_survival: np.ndarray
    cumulative_survival: float
    k_initial: float
    v0: float
    path_length_per_step: float
    asymptotic_estimate: float
    analytic_product: float


def survival_probability(psi0: State, psi: State) -> float:
    """|<psi0^|psi^>|^2 for the normalized rays of both arguments."""
    p = abs(inner_product(normalize(psi0), normalize(psi))) ** 2
    if p < -PROBABILITY_WINDOW or p > 1.0 + PROBABILITY_WINDOW:
        raise NumericsError(f"survival probability {p!r} outside [0, 1]")
    return min(max(p, 0.0), 1.0)


def short_time_k(model: EvolutionModel, psi0: State) -> float:
    """Coefficient k of the short-time law P(tau) = 1 - k tau^2, as v(0)^2 / 4."""
    v0 = fs_speed(psi0, derivative(model, 0.0, psi0))
    return v0 * v0 / 4.0


def default_dt(tau: float) -> float:
    """Integration step for one segment: tau/100, floored at 1e-5 but never above tau/10."""
    return min(tau / 10.0, max(tau / 100.0, MIN_DEFAULT_DT))


def zeno_asymptotic(v0: float, T: float, N: int) -> float:
    """Large-N survival exp(-T^2 v0^2 / (4N))."""
    if v0 < 0 or T <= 0 or N < 1:
        raise ValueError("need v0 >= 0, T > 0, N >= 1")
    return math.exp(-(T * v0) ** 2 / (4.0 * N))


def analytic_product(v0: float, T: float, N: int) -> float:
    """(1 - tau^2 v0^2 / 4)^N, the product of quadratic short-time survivals."""
    tau = T / N
    return (1.0 - (tau * v0) ** 2 / 4.0) ** N


def _segment(model, protocol, dt, method):
    if not model.autonomous:
        raise UnsupportedProtocolError(
            "the product law needs an autonomous model; each segment must restart identically"
        )
    tau = protocol.tau
    if dt is None:
        dt = default_dt(tau)
    if dt > tau / 10.0 * (1 + 1e-12):
        raise ValueError(f"dt={dt} exceeds tau/10={tau / 10}")
    psi0 = protocol.initial_state
    traj = evolve(model, psi0, 0.0, tau, dt, method)
    return traj, survival_probability(psi0, traj[-1][1])


def zeno_run(
    model: EvolutionModel,
    protocol: ZenoProtocol,
    dt: Optional[float] = None,
    method: str = "rk4",
) -> ZenoResult:
    """
    Deterministic survivor-branch bookkeeping of N measure-and-reset cycles.

    Each segment starts from the exact initial state under an autonomous law,
    so all N segments solve the same initial-value problem; it is integrated
    once and the resulting P(tau) is used for every cycle.
    """
    traj, p_tau = _segment(model, protocol, dt, method)
    n = protocol.n_measurements
    per_step = np.full(n, p_tau)
    per_step.flags.writeable = False
    cumulative = float(np.prod(per_step))
    psi0 = protocol.initial_state
    v0 = fs_speed(psi0, derivative(model, 0.0, psi0))
    T = protocol.total_time
    return ZenoResult(
        per_step_survival=per_step,
        cumulative_survival=cumulative,
        k_initial=v0 * v0 / 4.0,
        v0=v0,
        path_length_per_step=path_length(traj, model).total_length,
        asymptotic_estimate=zeno_asymptotic(v0, T, n),
        analytic_product=analytic_product(v0, T, n),
    )


def stochastic_zeno(
    model: EvolutionModel,
    protocol: ZenoProtocol,
    trials: int,
    seed: int,
    dt: Optional[float] = None,
    method: str = "rk4",
) -> float:
    """
    Monte Carlo collapse: fraction of trajectories that survive all N measurements.

    At every measurement a trajectory survives with probability P(tau) and is
    reset to the initial state; otherwise it is recorded as a transition and
    dropped. Trial i draws from a generator seeded by (seed, i), so the result
    does not depend on the order in which trials are evaluated.
    """
    if protocol.collapse_mode is not CollapseMode.STOCHASTIC:
        raise UnsupportedProtocolError("stochastic_zeno needs a protocol in stochastic collapse mode")
    if int(trials) != trials or trials < 1:
        raise ValueError("trials must be an integer >= 1")
    _, p_tau = _segment(model, protocol, dt, method)
    n = protocol.n_measurements
    survivors = 0
    for i in range(trials):
        rng = np.random.default_rng([seed, i])
        survivors += bool(np.all(rng.random(n) < p_tau))
    return survivors / trials


def zeno_criterion(results: Sequence[Tuple[int, float]]) -> bool:
    """True iff cumulative survival strictly increases along a strictly increasing N-grid."""
    if len(results) < 2:
        raise ValueError("criterion needs at least two (N, survival) entries")
    ns = [n for n, _ in results]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("N values must be strictly increasing")
    ps = [p for _, p in results]
    return all(b > a for a, b in zip(ps, ps[1:]))
