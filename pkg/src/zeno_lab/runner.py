"""
Scenario execution and report files.

CSV survival table columns: N,tau,cumulative,analytic_product,asymptotic
(floats with 17 significant digits, so doubles round-trip exactly).
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from . import oracle
from .config import ScenarioConfig, parse_config
from .dynamics import (
    NLSE1D,
    EvolutionModel,
    GisinTwoLevel,
    LinearModel,
    SolitonParams,
    derivative,
    energy_uncertainty,
    evolve,
    soliton_state,
)
from .geometry import fs_speed, path_length
from .hilbert import FiniteState, Grid, State
from .zeno import CollapseMode, ZenoProtocol, default_dt, stochastic_zeno, zeno_criterion, zeno_run

SURVIVAL_HEADER = ["N", "tau", "cumulative", "analytic_product", "asymptotic"]
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])


@dataclass(frozen=True, eq=False)
class Scenario:
    model: EvolutionModel
    psi0: State
    k_closed_form: Optional[float]
    hamiltonian: Optional[np.ndarray] = None


@dataclass
class SurvivalRow:
    N: int
    tau: float
    cumulative: float
    analytic_product: float
    asymptotic: float
    stochastic: Optional[float] = None


@dataclass
class RunReport:
    config: Dict[str, Any]
    k_analytic: float
    k_closed_form: Optional[float]
    k_oracle: float
    v0: float
    s: float
    delta_e: Optional[float]
    rows: List[SurvivalRow]
    criterion: Optional[bool]
    wall_time: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "RunReport":
        d = dict(d)
        d["rows"] = [SurvivalRow(**r) for r in d["rows"]]
        return cls(**d)


@dataclass
class SweepTable:
    scenario: str
    parameter: str
    n_list: List[int]
    rows: List[Dict[str, float]] = field(default_factory=list)

    @property
    def header(self) -> List[str]:
        return ["param", "k", "v0"] + [f"cumulative_N{n}" for n in self.n_list]


def build_scenario(cfg: ScenarioConfig, point: Optional[Tuple[str, float]] = None) -> Scenario:
    """Model, initial state and closed-form k for a config (optionally with one parameter overridden)."""
    m = dict(cfg.model)
    if point is not None:
        m[point[0]] = point[1]
    if cfg.scenario == "linear_rabi":
        h = 0.5 * m["alpha"] * SIGMA_X
        return Scenario(LinearModel(h), FiniteState([1.0, 0.0]), m["alpha"] ** 2 / 4.0, h)
    if cfg.scenario == "gisin_two_level":
        if m["lambda"] < 0 or m["alpha"] < 0:
            raise ValueError("alpha and lambda must be >= 0")
        model = GisinTwoLevel(alpha=m["alpha"], lam=m["lambda"], omega=m["omega"])
        k = m["alpha"] ** 2 * (m["lambda"] ** 2 + 1.0) / 4.0
        return Scenario(model, FiniteState([1.0, 0.0]), k)
    if cfg.scenario == "nlse_soliton":
        grid = Grid(m["x_min"], m["x_max"], m["n_points"])
        p = SolitonParams.from_eta_u(m["eta"], m["u"], a=m["a"], b=m["b"])
        psi0 = soliton_state(p, 0.0, grid)
        # the soliton must stay clear of the periodic boundary for the whole run
        soliton_state(p, cfg.total_time, grid)
        return Scenario(NLSE1D.for_soliton(p, grid), psi0, (p.eta * p.u) ** 2 / 3.0)
    if cfg.scenario == "custom_linear":
        h = np.array(m["hamiltonian_real"], dtype=complex)
        if m["hamiltonian_imag"] is not None:
            h = h + 1j * np.array(m["hamiltonian_imag"], dtype=float)
        psi = np.array(m["initial_state_real"], dtype=complex)
        if m["initial_state_imag"] is not None:
            psi = psi + 1j * np.array(m["initial_state_imag"], dtype=float)
        model = LinearModel(h)
        if psi.shape != (model.dimension,):
            raise ValueError("initial state dimension does not match the Hamiltonian")
        psi0 = FiniteState(psi)
        if np.linalg.norm(psi) <= 1e-12 * np.sqrt(psi.size):
            raise ValueError("initial state has zero norm")
        return Scenario(model, psi0, energy_uncertainty(h, psi0) ** 2, h)
    raise ValueError(f"unknown scenario {cfg.scenario}")


def _step_for(cfg: ScenarioConfig, sc: Scenario, tau: float) -> float:
    if cfg.dt is not None:
        return cfg.dt
    dt = default_dt(tau)
    if cfg.method == "rk4":
        dt = min(dt, 0.9 * sc.model.max_stable_dt(sc.psi0.data))
    return dt


def _oracle_tau(v0: float) -> float:
    # keeps 1 - P(tau) near or below 1%
    return 1e-2 if v0 <= 0 else min(1e-2, 0.2 / v0)


def _survival_rows(cfg: ScenarioConfig, sc: Scenario) -> Tuple[List[SurvivalRow], float]:
    rows = []
    v0 = 0.0
    for n in cfg.n_list:
        protocol = ZenoProtocol(cfg.total_time, n, sc.psi0, CollapseMode(cfg.collapse_mode))
        dt = _step_for(cfg, sc, protocol.tau)
        res = zeno_run(sc.model, protocol, dt, cfg.method)
        v0 = res.v0
        frac = None
        if protocol.collapse_mode is CollapseMode.STOCHASTIC:
            frac = stochastic_zeno(sc.model, protocol, cfg.trials, cfg.seed, dt, cfg.method)
        rows.append(
            SurvivalRow(
                N=n,
                tau=protocol.tau,
                cumulative=res.cumulative_survival,
                analytic_product=res.analytic_product,
                asymptotic=res.asymptotic_estimate,
                stochastic=frac,
            )
        )
    return rows, v0


def run_scenario(cfg: ScenarioConfig) -> RunReport:
    start = time.perf_counter()
    sc = build_scenario(cfg)
    v0 = fs_speed(sc.psi0, derivative(sc.model, 0.0, sc.psi0))
    rows, _ = _survival_rows(cfg, sc)

    tau_o = _oracle_tau(v0)
    k_oracle = oracle.fd_k_estimate(sc.model, sc.psi0, tau_o, _step_for(cfg, sc, tau_o), method=cfg.method).value

    T = cfg.total_time
    dt_free = min(_step_for(cfg, sc, T), T / 1000.0)
    s = path_length(evolve(sc.model, sc.psi0, 0.0, T, dt_free, cfg.method), sc.model).total_length

    criterion = None
    if len(rows) >= 2:
        criterion = zeno_criterion([(r.N, r.cumulative) for r in rows])
    delta_e = energy_uncertainty(sc.hamiltonian, sc.psi0) if sc.hamiltonian is not None else None
    return RunReport(
        config=cfg.to_dict(),
        k_analytic=v0 * v0 / 4.0,
        k_closed_form=sc.k_closed_form,
        k_oracle=k_oracle,
        v0=v0,
        s=s,
        delta_e=delta_e,
        rows=rows,
        criterion=criterion,
        wall_time=time.perf_counter() - start,
    )


def run_sweep(cfg: ScenarioConfig) -> SweepTable:
    if cfg.sweep is None:
        raise ValueError("config has no sweep section")
    param, values = cfg.sweep
    table = SweepTable(cfg.scenario, param, list(cfg.n_list))
    for value in sorted(values):
        sc = build_scenario(cfg, (param, value))
        rows, _ = _survival_rows(cfg.with_overrides(collapse_mode="deterministic"), sc)
        v0 = fs_speed(sc.psi0, derivative(sc.model, 0.0, sc.psi0))
        row = {"param": value, "k": v0 * v0 / 4.0, "v0": v0}
        row.update({f"cumulative_N{r.N}": r.cumulative for r in rows})
        table.rows.append(row)
    return table


# ---------------------------------------------------------------------------
# files
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(x, ".17g")


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def survival_csv(rows: List[SurvivalRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SURVIVAL_HEADER)
    for r in rows:
        w.writerow([r.N, _fmt(r.tau), _fmt(r.cumulative), _fmt(r.analytic_product), _fmt(r.asymptotic)])
    return buf.getvalue()


def read_survival_csv(path) -> List[SurvivalRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != SURVIVAL_HEADER:
            raise ValueError(f"unexpected header {reader.fieldnames}")
        return [
            SurvivalRow(
                N=int(rec["N"]),
                tau=float(rec["tau"]),
                cumulative=float(rec["cumulative"]),
                analytic_product=float(rec["analytic_product"]),
                asymptotic=float(rec["asymptotic"]),
            )
            for rec in reader
        ]


def sweep_csv(table: SweepTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.header)
    for row in table.rows:
        w.writerow([_fmt(row[h]) for h in table.header])
    return buf.getvalue()


def read_sweep_csv(path) -> List[Dict[str, float]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [{k: float(v) for k, v in rec.items()} for rec in csv.DictReader(fh)]


def write_report(report: RunReport, out_dir, formats) -> List[Path]:
    out_dir = Path(out_dir)
    scenario = report.config["scenario"]
    written = []
    if "csv" in formats:
        p = out_dir / f"{scenario}_survival.csv"
        _atomic_write(p, survival_csv(report.rows))
        written.append(p)
    if "json" in formats:
        p = out_dir / f"{scenario}_report.json"
        _atomic_write(p, json.dumps(report.to_dict(), indent=2) + "\n")
        written.append(p)
    return written


def write_sweep(table: SweepTable, out_dir, formats) -> List[Path]:
    out_dir = Path(out_dir)
    stem = f"{table.scenario}_sweep_{table.parameter}"
    written = []
    if "csv" in formats:
        p = out_dir / f"{stem}.csv"
        _atomic_write(p, sweep_csv(table))
        written.append(p)
    if "json" in formats:
        p = out_dir / f"{stem}.json"
        payload = {"scenario": table.scenario, "parameter": table.parameter, "n_list": table.n_list, "rows": table.rows}
        _atomic_write(p, json.dumps(payload, indent=2) + "\n")
        written.append(p)
    return written


def load_report(path) -> RunReport:
    return RunReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def rerun(report: RunReport) -> RunReport:
    """Run again from the report's echoed config."""
    return run_scenario(parse_config(report.config))
