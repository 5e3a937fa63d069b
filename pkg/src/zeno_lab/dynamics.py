"""
Evolution laws behind a common derivative/evolve interface.

Units: hbar = 1 unless a model carries an explicit ``hbar``.

Models
------
LinearModel     psi' = -i H psi / hbar
GisinGeneral    psi' = -i H psi / hbar + lam (<H> - H) psi / hbar
GisinTwoLevel   rotating-frame amplitudes (a, b) of a resonantly driven
                two-level atom under Gisin damping:
                  a' = (alpha/2)(lam + i) b + lam [omega |b|^2 - alpha Re(a* b)] a
                  b' = (alpha/2)(lam + i) a + lam [omega (|b|^2 - 1) - alpha Re(a* b)] b
                valid for unit-norm (a, b); the lab-frame state is
                a|g> + b exp(-i omega t)|e>.
NLSE1D          psi_t = i (a/2) psi_xx + i b |psi|^2 psi - i V psi,  a = 1/m,
                on a periodic grid with a spectral second derivative.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, ClassVar, List, Optional, Tuple, Union

import numpy as np

from .errors import DimensionError, DivergenceError, GridTooSmallError, NumericsError
from .hilbert import FiniteState, Grid, GridState, State, normalize

Matrix = np.ndarray
HamiltonianLike = Union[np.ndarray, Callable[[float], np.ndarray]]

HERMITIAN_TOL = 1e-12
TAIL_GUARD = 1e-12


def check_hermitian(h: np.ndarray) -> np.ndarray:
    h = np.array(h, dtype=np.complex128)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DimensionError(f"Hamiltonian must be square, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise ValueError("Hamiltonian entries must be finite")
    scale = max(1.0, float(np.abs(h).max(initial=0.0)))
    if np.abs(h - h.conj().T).max(initial=0.0) > HERMITIAN_TOL * scale:
        raise ValueError("Hamiltonian is not Hermitian")
    h.flags.writeable = False
    return h


class EvolutionModel:
    """Base class: subclasses define ``kind``, ``rhs`` and the state realization."""

    kind: ClassVar[str] = "abstract"

    @property
    def autonomous(self) -> bool:
        return True

    def check_state(self, psi: State) -> None:
        raise NotImplementedError

    def rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def max_stable_dt(self, y: np.ndarray) -> float:
        """Largest RK4 step that keeps the linearized problem stable (inf if unconstrained)."""
        return np.inf


class _MatrixModel(EvolutionModel):
    """Shared handling of a constant or time-dependent Hamiltonian."""

    def _init_hamiltonian(self, hamiltonian: HamiltonianLike) -> None:
        if callable(hamiltonian):
            self._h_func = hamiltonian
            self._h_const = None
            self._dim = check_hermitian(hamiltonian(0.0)).shape[0]
        else:
            self._h_func = None
            self._h_const = check_hermitian(hamiltonian)
            self._dim = self._h_const.shape[0]

    @property
    def autonomous(self) -> bool:
        return self._h_func is None

    @property
    def dimension(self) -> int:
        return self._dim

    def hamiltonian_at(self, t: float) -> np.ndarray:
        if self._h_const is not None:
            return self._h_const
        return check_hermitian(self._h_func(t))

    def check_state(self, psi: State) -> None:
        if not isinstance(psi, FiniteState) or psi.dimension != self._dim:
            raise DimensionError(f"{self.kind} model expects a FiniteState of dimension {self._dim}")


class LinearModel(_MatrixModel):
    kind = "Linear"

    def __init__(self, hamiltonian: HamiltonianLike, hbar: float = 1.0):
        if hbar <= 0:
            raise ValueError("hbar must be positive")
        self.hbar = float(hbar)
        self._init_hamiltonian(hamiltonian)

    def rhs(self, t, y):
        return (-1j / self.hbar) * (self.hamiltonian_at(t) @ y)

    def __repr__(self):
        return f"LinearModel(dim={self.dimension}, autonomous={self.autonomous})"


class GisinGeneral(_MatrixModel):
    kind = "GisinGeneral"

    def __init__(self, hamiltonian: HamiltonianLike, lam: float, hbar: float = 1.0):
        if lam < 0:
            raise ValueError("damping constant lam must be >= 0")
        if hbar <= 0:
            raise ValueError("hbar must be positive")
        self.lam = float(lam)
        self.hbar = float(hbar)
        self._init_hamiltonian(hamiltonian)

    def rhs(self, t, y):
        hy = self.hamiltonian_at(t) @ y
        mean_h = np.vdot(y, hy).real / np.vdot(y, y).real
        return (-1j * hy + self.lam * (mean_h * y - hy)) / self.hbar

    def __repr__(self):
        return f"GisinGeneral(dim={self.dimension}, lam={self.lam}, autonomous={self.autonomous})"


@dataclass(frozen=True)
class GisinTwoLevel(EvolutionModel):
    """Driven two-level atom with Gisin damping, in rotating-frame amplitudes (a, b)."""

    alpha: float
    lam: float
    omega: float = 0.0
    kind: ClassVar[str] = "GisinTwoLevel"

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("Rabi frequency alpha must be >= 0")
        if self.lam < 0:
            raise ValueError("damping constant lam must be >= 0")

    def check_state(self, psi):
        if not isinstance(psi, FiniteState) or psi.dimension != 2:
            raise DimensionError("GisinTwoLevel expects a FiniteState (a, b) of dimension 2")

    def rhs(self, t, y):
        a, b = y[0], y[1]
        al, lam, om = self.alpha, self.lam, self.omega
        bb = b.real * b.real + b.imag * b.imag
        re_ab = (a.conjugate() * b).real
        drive = 0.5 * al * (lam + 1j)
        return np.array(
            [
                drive * b + lam * (om * bb - al * re_ab) * a,
                drive * a + lam * (om * (bb - 1.0) - al * re_ab) * b,
            ]
        )

    def lab_frame(self, t: float, psi: FiniteState) -> FiniteState:
        """Map (a, b) to lab-frame components (a, b exp(-i omega t)) in the (|g>, |e>) basis."""
        a, b = psi.components
        return FiniteState([a, b * np.exp(-1j * self.omega * t)])

    def lab_hamiltonian(self, t: float) -> np.ndarray:
        """
        Instantaneous driven-atom Hamiltonian in the (|g>, |e>) basis, with the
        raising operator taken as |e><g|. This is the convention under which the
        rotating-frame equations above follow from the general Gisin law.
        """
        c = -0.5 * self.alpha
        return np.array(
            [[0.0, c * np.exp(1j * self.omega * t)], [c * np.exp(-1j * self.omega * t), self.omega]]
        )


@dataclass(frozen=True, eq=False)
class NLSE1D(EvolutionModel):
    """Cubic nonlinear Schrodinger equation on a periodic grid (hbar = 1, a = 1/mass)."""

    grid: Grid
    mass: float = 1.0
    b: float = 1.0
    potential: Optional[np.ndarray] = None
    kind: ClassVar[str] = "NLSE1D"
    _kinetic: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        if self.potential is not None:
            v = np.array(self.potential, dtype=float)
            if v.shape != (self.grid.n_points,) or not np.all(np.isfinite(v)):
                raise ValueError("potential must be finite and sampled on the grid")
            v.flags.writeable = False
            object.__setattr__(self, "potential", v)
        # Fourier multiplier of (a/2) d^2/dx^2
        object.__setattr__(self, "_kinetic", -0.5 * self.a * self.grid.wavenumbers**2)

    @classmethod
    def for_soliton(cls, p: "SolitonParams", grid: Grid) -> "NLSE1D":
        return cls(grid=grid, mass=1.0 / p.a, b=p.b)

    @property
    def a(self) -> float:
        return 1.0 / self.mass

    def check_state(self, psi):
        if not isinstance(psi, GridState) or psi.grid != self.grid:
            raise DimensionError("NLSE1D expects a GridState on the model grid")

    def laplacian_term(self, y: np.ndarray) -> np.ndarray:
        return np.fft.ifft(self._kinetic * np.fft.fft(y))

    def rhs(self, t, y):
        local = self.b * (y.real**2 + y.imag**2)
        if self.potential is not None:
            local = local - self.potential
        return 1j * (self.laplacian_term(y) + local * y)

    def max_stable_dt(self, y):
        rate = np.abs(self._kinetic).max() + abs(self.b) * np.max(np.abs(y) ** 2)
        if self.potential is not None:
            rate += np.abs(self.potential).max()
        return 2.0 / rate

    def split_step(self, y: np.ndarray, h: float) -> np.ndarray:
        """One Strang step: half kinetic, full local (nonlinear + potential), half kinetic."""
        half = np.exp(0.5j * h * self._kinetic)
        y = np.fft.ifft(half * np.fft.fft(y))
        local = self.b * (y.real**2 + y.imag**2)
        if self.potential is not None:
            local = local - self.potential
        y = y * np.exp(1j * h * local)
        return np.fft.ifft(half * np.fft.fft(y))


@dataclass(frozen=True)
class SolitonParams:
    """Bright-soliton parameters; ``omega`` is tied to eta by eta = sqrt(u^2 - 2 a omega) / a."""

    eta: float
    u: float
    omega: float
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if not (self.eta > 0 and self.a > 0 and self.b > 0):
            raise ValueError("soliton needs eta > 0, a > 0, b > 0")
        disc = self.u**2 - 2.0 * self.a * self.omega
        if disc < 0:
            raise ValueError("u^2 - 2 a omega must be non-negative")
        eta = np.sqrt(disc) / self.a
        if abs(eta - self.eta) > 1e-12 * max(1.0, self.eta):
            raise ValueError(f"eta={self.eta} inconsistent with (u, a, omega) which give {eta}")

    @classmethod
    def from_eta_u(cls, eta: float, u: float, a: float = 1.0, b: float = 1.0) -> "SolitonParams":
        omega = (u * u - (a * eta) ** 2) / (2.0 * a)
        return cls(eta=eta, u=u, omega=omega, a=a, b=b)

    @property
    def norm_squared(self) -> float:
        return 2.0 * self.eta * self.a / self.b


def _soliton_samples(p: SolitonParams, t: float, x: np.ndarray) -> np.ndarray:
    amp = np.sqrt(p.a / p.b) * p.eta
    phase = np.exp(-1j * (p.omega * t - p.u * x / p.a))
    return amp * phase / np.cosh(p.eta * (x - p.u * t))


def soliton_state(p: SolitonParams, t: float, grid: Grid) -> GridState:
    for edge in (grid.x_min, grid.x_max):
        if 1.0 / np.cosh(p.eta * (edge - p.u * t)) >= TAIL_GUARD:
            raise GridTooSmallError(f"soliton tail at x={edge} exceeds {TAIL_GUARD:g} at t={t}")
    return GridState(grid, _soliton_samples(p, t, grid.x))


def soliton_time_derivative(p: SolitonParams, t: float, grid: Grid) -> GridState:
    """Exact d/dt of the travelling soliton: psi * (-i omega + eta u tanh(eta (x - u t)))."""
    psi = soliton_state(p, t, grid)
    factor = -1j * p.omega + p.eta * p.u * np.tanh(p.eta * (grid.x - p.u * t))
    return GridState(grid, psi.samples * factor)


def energy_uncertainty(h: np.ndarray, psi: FiniteState) -> float:
    """Energy spread sqrt(<H^2> - <H>^2) of ``psi`` (normalized internally)."""
    h = check_hermitian(h)
    if not isinstance(psi, FiniteState) or psi.dimension != h.shape[0]:
        raise DimensionError("state and Hamiltonian dimensions differ")
    y = normalize(psi).components
    hy = h @ y
    mean = np.vdot(y, hy).real
    var = np.vdot(hy, hy).real - mean**2
    return float(np.sqrt(max(var, 0.0)))


def derivative(model: EvolutionModel, t: float, psi: State) -> State:
    model.check_state(psi)
    out = model.rhs(t, psi.data)
    if not np.all(np.isfinite(out)):
        raise NumericsError(f"non-finite derivative from {model.kind} model at t={t}")
    return psi.like(out)


def _step_times(t0: float, t1: float, dt: float) -> np.ndarray:
    if not t1 > t0:
        raise ValueError("evolve requires t1 > t0")
    if not (dt > 0 and dt <= (t1 - t0) * (1 + 1e-12)):
        raise ValueError("evolve requires 0 < dt <= t1 - t0")
    n_full = int(np.floor((t1 - t0) / dt * (1 + 1e-12)))
    times = t0 + dt * np.arange(n_full + 1)
    # drop a final fragment shorter than roundoff, then land exactly on t1
    if t1 - times[-1] > 1e-9 * dt:
        times = np.append(times, t1)
    else:
        times[-1] = t1
    return times


def _rk4_step(model: EvolutionModel, t: float, y: np.ndarray, h: float) -> np.ndarray:
    k1 = model.rhs(t, y)
    k2 = model.rhs(t + 0.5 * h, y + (0.5 * h) * k1)
    k3 = model.rhs(t + 0.5 * h, y + (0.5 * h) * k2)
    k4 = model.rhs(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _integrate(model, psi0, t0, t1, dt, method, keep):
    model.check_state(psi0)
    if method == "rk4":
        step = lambda t, y, h: _rk4_step(model, t, y, h)  # noqa: E731
    elif method == "splitstep":
        if not isinstance(model, NLSE1D):
            raise ValueError("split-step integration is only available for NLSE1D")
        step = lambda t, y, h: model.split_step(y, h)  # noqa: E731
    else:
        raise ValueError(f"unknown integration method {method!r}")
    times = _step_times(t0, t1, dt)
    y = np.array(psi0.data)
    samples = [y] if keep else None
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(len(times) - 1):
            y = step(times[i], y, times[i + 1] - times[i])
            if not np.all(np.isfinite(y)):
                raise DivergenceError(f"{model.kind} integration diverged", step=i + 1, time=times[i + 1])
            if keep:
                samples.append(y)
    return times, samples, y


def evolve(
    model: EvolutionModel,
    psi0: State,
    t0: float,
    t1: float,
    dt: float,
    method: str = "rk4",
) -> List[Tuple[float, State]]:
    """
    Fixed-step integration from t0 to t1, returning every sample including both ends.

    ``method`` is "rk4" (any model) or "splitstep" (NLSE1D only). The last step
    is shortened so the trajectory ends exactly at t1.
    """
    times, samples, _ = _integrate(model, psi0, t0, t1, dt, method, keep=True)
    return [(float(t), psi0.like(y)) for t, y in zip(times, samples)]


def propagate(
    model: EvolutionModel,
    psi0: State,
    t0: float,
    t1: float,
    dt: float,
    method: str = "rk4",
) -> State:
    """Same integration as ``evolve`` but only the final state is kept."""
    _, _, y = _integrate(model, psi0, t0, t1, dt, method, keep=False)
    return psi0.like(y)
