"""
Fubini-Study geometry on the space of rays.

Works with unnormalized states throughout: every quantity here is invariant
under psi -> Z psi for any nonzero complex Z (and, for the speed, under a
smooth time-dependent Z(t)).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence, Tuple

import numpy as np

from .errors import ConsistencyError, ZeroVectorError
from .hilbert import State, check_compatible, inner_product, norm, normalize, zero_threshold

if TYPE_CHECKING:
    from .dynamics import EvolutionModel

# Window around zero inside which a negative squared speed is treated as roundoff.
RADICAND_WINDOW = 1e-12


@dataclass(frozen=True, eq=False)
class GeometryReport:
    """Speed samples along a trajectory and the trapezoidal path length."""

    times: np.ndarray
    speeds: np.ndarray
    total_length: float


def fs_distance(a: State, b: State) -> float:
    """Generalized Fubini-Study distance ``sqrt(4 (1 - |<a^|b^>|^2))`` in [0, 2]."""
    check_compatible(a, b)
    ah, bh = normalize(a), normalize(b)
    overlap = inner_product(ah, bh)
    # 1 - |<a^|b^>|^2 evaluated as the squared norm of b^'s component orthogonal
    # to a^; avoids cancellation when the states are close.
    perp = bh.like(bh.data - overlap * ah.data)
    deficit = min(inner_product(perp, perp).real, 1.0)
    return 2.0 * float(np.sqrt(max(deficit, 0.0)))


def fs_speed(psi: State, psi_dot: State) -> float:
    """
    Speed of the ray of ``psi`` moving with velocity ``psi_dot``:

        v = 2 sqrt(<psi'|psi'>/|psi|^2 - |<psi|psi'>|^2/|psi|^4)
    """
    check_compatible(psi, psi_dot)
    n2 = norm(psi) ** 2
    if np.sqrt(n2) <= zero_threshold(psi):
        raise ZeroVectorError("speed undefined for a zero state")
    dd = inner_product(psi_dot, psi_dot).real / n2
    pd = inner_product(psi, psi_dot)
    radicand = dd - abs(pd) ** 2 / n2**2
    if radicand < -RADICAND_WINDOW * max(1.0, dd):
        raise ConsistencyError(f"negative squared speed {radicand:.3e}")
    # Same quantity via the component of psi' orthogonal to psi; this form
    # is free of the cancellation that the two-term expression suffers when
    # psi' is dominated by phase motion.
    perp = psi_dot.data - (pd / n2) * psi.data
    radicand = psi.weight * np.vdot(perp, perp).real / n2
    return 2.0 * float(np.sqrt(max(radicand, 0.0)))


def path_length(
    traj: Sequence[Tuple[float, State]], psi_dot_provider: "EvolutionModel"
) -> GeometryReport:
    """Sample the speed at every trajectory point and integrate it with the trapezoid rule."""
    from .dynamics import derivative

    if len(traj) < 2:
        raise ValueError("path length needs at least two samples")
    times = np.array([t for t, _ in traj], dtype=float)
    if np.any(np.diff(times) <= 0):
        raise ValueError("trajectory times must be strictly increasing")
    speeds = np.array([fs_speed(psi, derivative(psi_dot_provider, t, psi)) for t, psi in traj])
    total = float(np.trapezoid(speeds, times))
    return GeometryReport(times=times, speeds=speeds, total_length=total)
