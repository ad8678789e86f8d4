"""
Command-line runner.

    ojj <subcommand> --config <path> [--out <dir>] [--emit-plots]

Each scenario is one JSON document with ``"schema_version": 1``. Results go
to ``<out>/<kind>.csv`` and ``<out>/summary.json``; wall-clock and version
information is kept apart in ``<out>/provenance.json`` so the other two files
are byte-identical between runs.

Exit codes: 0 success, 1 configuration error, 2 numerical integrity failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import __version__, bragg, fock, interference, protocol, ring

SCHEMA_VERSION = 1
KINDS = ("protocol", "interference", "ring", "bragg", "sweep", "selftest")
NORM_TOL = 1e-9
HERMITIAN_TOL = 1e-12

REQUIRED = object()


class ConfigError(ValueError):
    pass


# name -> (type, default). Types: int, float, bool, str, list (of floats).
SCHEMAS: dict[str, dict[str, tuple[type, Any]]] = {
    "protocol": {
        "N": (int, REQUIRED),
        "phi_values": (list, None),
        "phi_min": (float, 0.0),
        "phi_max": (float, math.pi),
        "phi_points": (int, 50),
        "g": (float, 1.0),
        "kappa": (float, 0.0),
    },
    "interference": {
        "N": (int, REQUIRED),
        "phi": (float, math.pi / 4),
        "state": (str, "protocol"),
        "kappa": (float, 1.0),
        "tau_points": (int, 2000),
        "tau_span": (float, 1.2),
        "threshold_fraction": (float, 1 / math.e),
        "prefactor": (float, None),
        "gamma_prime_1": (float, None),
        "gamma_prime_2": (float, None),
        "omega_k1": (float, None),
        "omega_k2": (float, None),
    },
    "ring": {
        "gamma_prime_1": (float, REQUIRED),
        "gamma_prime_2": (float, REQUIRED),
        "omega_k1": (float, 1.0),
        "omega_k2": (float, 1.0),
        "theta": (float, 0.0),
        "n_particles": (int, 1),
        "ring_cutoff": (int, 2),
        "duration": (float, None),
        "points": (int, 4000),
    },
    "bragg": {
        "omega_pump": (float, REQUIRED),
        "omega_probe": (float, REQUIRED),
        "detuning": (float, REQUIRED),
        "omega_k": (float, REQUIRED),
        "order": (int, 1),
        "max_order": (int, 4),
        "nu_values": (list, None),
        "nu_min": (float, None),
        "nu_max": (float, None),
        "nu_points": (int, 101),
        "t": (float, None),
    },
    "selftest": {},
}
TOP_LEVEL = {
    "schema_version", "kind", "parameters", "output_dir", "emit_plots",
    "scenario", "sweep", "parallel", "workers", "inject_fault",
}
FAULTS = ("non_hermitian",)


@dataclass
class Integrity:
    """Running maxima of the integrity residuals seen during a scenario."""

    fault: Optional[str] = None
    max_norm_drift: float = 0.0
    max_hermiticity_residual: float = 0.0

    def operator(self, ham: np.ndarray) -> np.ndarray:
        if self.fault == "non_hermitian":
            self.fault = None
            ham = ham.copy()
            ham[0, -1] += 1e-3j if ham.shape[0] > 1 else 0
            ham[0, 0] += 1e-3j
        scale = max(1.0, float(np.abs(ham).max()))
        self.max_hermiticity_residual = max(
            self.max_hermiticity_residual, fock.hermiticity_residual(ham) / scale
        )
        return ham

    def norm(self, drift: float) -> None:
        self.max_norm_drift = max(self.max_norm_drift, float(drift))

    def failures(self) -> list[str]:
        out = []
        if self.max_norm_drift > NORM_TOL:
            out.append(f"norm drift {self.max_norm_drift:.3e} exceeds {NORM_TOL:g}")
        if self.max_hermiticity_residual > HERMITIAN_TOL:
            out.append(f"Hermiticity residual {self.max_hermiticity_residual:.3e} exceeds {HERMITIAN_TOL:g}")
        return out

    def as_dict(self) -> dict[str, float]:
        return {
            "max_norm_drift": self.max_norm_drift,
            "max_hermiticity_residual": self.max_hermiticity_residual,
        }


@dataclass
class ScenarioConfig:
    kind: str
    parameters: dict[str, Any]
    output_dir: Path
    emit_plots: bool = False
    raw: dict[str, Any] = field(default_factory=dict)


@dataclass
class ScenarioOutput:
    columns: list[str]
    rows: list[list[float]]
    results: dict[str, Any]
    scalars: dict[str, float]
    plot: Optional[tuple[str, str, int, int]] = None  # title, filename, x column, y column


def _coerce(kind: str, key: str, value: Any, typ: type) -> Any:
    where = f"{kind}.{key}"
    if typ is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"parameter {key!r} ({where}) must be a boolean")
        return value
    if typ is int:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value):
            raise ConfigError(f"parameter {key!r} ({where}) must be an integer")
        return int(value)
    if typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConfigError(f"parameter {key!r} ({where}) must be a finite number")
        return float(value)
    if typ is str:
        if not isinstance(value, str):
            raise ConfigError(f"parameter {key!r} ({where}) must be a string")
        return value
    if typ is list:
        if not isinstance(value, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v) for v in value
        ):
            raise ConfigError(f"parameter {key!r} ({where}) must be a list of finite numbers")
        return [float(v) for v in value]
    raise TypeError(typ)


def resolve_parameters(kind: str, given: dict[str, Any]) -> dict[str, Any]:
    """Validate ``given`` against the schema of ``kind`` and fill in defaults."""
    if not isinstance(given, dict):
        raise ConfigError("'parameters' must be a JSON object")
    schema = SCHEMAS[kind]
    for key in given:
        if key not in schema:
            raise ConfigError(f"unknown parameter {key!r} for scenario {kind!r}")
    out = {}
    for key, (typ, default) in schema.items():
        if key in given and given[key] is not None:
            out[key] = _coerce(kind, key, given[key], typ)
        elif default is REQUIRED:
            raise ConfigError(f"missing required parameter {key!r} for scenario {kind!r}")
        else:
            out[key] = default
    _check_ranges(kind, out)
    return out


def _check_ranges(kind: str, p: dict[str, Any]) -> None:
    def need(cond: bool, key: str, msg: str) -> None:
        if not cond:
            raise ConfigError(f"parameter {key!r}: {msg}")

    if kind in ("protocol", "interference"):
        need(p["N"] >= 2 and p["N"] % 2 == 0, "N", "must be an even integer >= 2")
    if kind == "protocol":
        need(p["phi_points"] >= 1, "phi_points", "must be >= 1")
        need(p["g"] != 0, "g", "must be nonzero")
    if kind == "interference":
        need(p["kappa"] > 0, "kappa", "must be positive")
        need(p["tau_points"] >= 3, "tau_points", "must be >= 3")
        need(p["tau_span"] >= 1.2, "tau_span", "must be >= 1.2 (collapse and revival need [0, 1.2 pi/kappa])")
        need(0 < p["threshold_fraction"] < 1, "threshold_fraction", "must lie in (0, 1)")
        need(p["state"] in ("protocol", "coherent"), "state", "must be 'protocol' or 'coherent'")
        phys = [p[k] for k in ("gamma_prime_1", "gamma_prime_2", "omega_k1", "omega_k2")]
        need(all(v is None for v in phys) or all(v is not None for v in phys),
             "gamma_prime_1", "readout couplings need all of gamma_prime_1/2 and omega_k1/2")
    if kind == "ring":
        need(p["omega_k1"] > 0, "omega_k1", "must be positive")
        need(p["omega_k2"] > 0, "omega_k2", "must be positive")
        need(p["n_particles"] >= 1, "n_particles", "must be >= 1")
        need(p["ring_cutoff"] >= 1, "ring_cutoff", "must be >= 1")
        need(p["points"] >= 10, "points", "must be >= 10")
    if kind == "bragg":
        need(p["omega_k"] > 0, "omega_k", "must be positive")
        need(p["order"] >= 1, "order", "must be >= 1")
        need(p["max_order"] >= 1, "max_order", "must be >= 1")
        need(p["detuning"] != 0, "detuning", "must be nonzero")
        need(p["nu_points"] >= 1, "nu_points", "must be >= 1")


def load_config(path: Path, kind: str, out_dir: Optional[Path] = None, emit_plots: bool = False) -> ScenarioConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file {str(path)!r} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    for key in raw:
        if key not in TOP_LEVEL:
            raise ConfigError(f"unknown top-level key {key!r}")
    if raw.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"'schema_version' must be {SCHEMA_VERSION}")
    if raw.get("kind", kind) != kind:
        raise ConfigError(f"'kind' is {raw['kind']!r} but subcommand is {kind!r}")
    fault = raw.get("inject_fault")
    if fault is not None and fault not in FAULTS:
        raise ConfigError(f"'inject_fault' must be one of {FAULTS}")
    params = raw.get("parameters", {})
    if kind == "sweep":
        _validate_sweep(raw)
    elif kind in SCHEMAS:
        params = resolve_parameters(kind, params)
    output = out_dir or Path(raw.get("output_dir", "results"))
    plots = emit_plots or bool(raw.get("emit_plots", False))
    return ScenarioConfig(kind, params, Path(output), plots, raw)


def _validate_sweep(raw: dict[str, Any]) -> None:
    inner = raw.get("scenario")
    if inner not in ("protocol", "interference", "ring", "bragg"):
        raise ConfigError("'scenario' must name one of protocol, interference, ring, bragg")
    block = raw.get("sweep")
    if not isinstance(block, dict):
        raise ConfigError("missing 'sweep' block")
    for key in block:
        if key not in ("parameter", "values"):
            raise ConfigError(f"unknown key {key!r} in 'sweep'")
    name = block.get("parameter")
    schema = SCHEMAS[inner]
    if name not in schema or schema[name][0] not in (int, float):
        raise ConfigError(f"sweep parameter {name!r} is not a scalar of scenario {inner!r}")
    values = block.get("values")
    if not isinstance(values, list) or not values:
        raise ConfigError("sweep 'values' must be a non-empty list")
    for v in values:
        merged = dict(raw.get("parameters", {}))
        merged[name] = v
        resolve_parameters(inner, merged)


# --- scenarios -------------------------------------------------------------


def _phi_grid(p: dict[str, Any]) -> np.ndarray:
    if p["phi_values"] is not None:
        return np.array(p["phi_values"], dtype=float)
    return np.linspace(p["phi_min"], p["phi_max"], p["phi_points"])


def scenario_protocol(p: dict[str, Any], integ: Integrity) -> ScenarioOutput:
    n = p["N"]
    rows = []
    d_checks = []
    for phi in _phi_grid(p):
        schedule = protocol.PulseSchedule.single_pulse(float(phi), p["g"], p["kappa"])
        seg = schedule.segments[0]
        ham = integ.operator(
            fock.build_two_mode_hamiltonian(fock.TwoModeParams(n, kappa=seg.kappa, g=seg.g, theta=seg.theta))
        )
        fock.evolve(fock.twin_fock_state(n), ham, seg.duration)  # raises on a corrupted operator
        res = protocol.run_protocol(n, schedule)
        integ.norm(abs(res.final_state.norm - 1))
        if res.d_check is not None:
            d_checks.append(res.d_check)
        rows.append([res.phi, res.delta_n_simulated, res.delta_n_paper, res.delta_n_exact])
    arr = np.array(rows)
    matched = all(c.matched for c in d_checks)
    diagnostics = sorted({c.diagnostic for c in d_checks if c.diagnostic})
    slope = protocol.delta_n_slope_at_zero(n) if p["kappa"] == 0 else None
    results = {
        "max_abs_sim_minus_exact": float(np.abs(arr[:, 1] - arr[:, 3]).max()),
        "max_delta_n_sim": float(arr[:, 1].max()),
        "slope_at_zero": slope,
        "slope_closed_form": math.sqrt(n * (n + 2) / 8),
        "d_coefficients_checked": len(d_checks),
        "d_coefficients_matched": matched,
        "d_coefficient_limit": d_checks[0].interpretation if d_checks and matched else None,
        "d_coefficient_diagnostics": diagnostics,
    }
    scalars = {
        "delta_n_sim_max": float(arr[:, 1].max()),
        "delta_n_eq22_max": float(arr[:, 2].max()),
        "delta_n_exact_max": float(arr[:, 3].max()),
        "max_abs_sim_minus_exact": results["max_abs_sim_minus_exact"],
    }
    return ScenarioOutput(
        ["phi", "delta_n_sim", "delta_n_eq22", "delta_n_exact"], rows, results, scalars,
        plot=("Number uncertainty vs pulse phase", "protocol.svg", 0, 1),
    )


def scenario_interference(p: dict[str, Any], integ: Integrity) -> ScenarioOutput:
    n, kappa = p["N"], p["kappa"]
    if p["state"] == "coherent":
        state = fock.coherent_spin_state(n, p["phi"])
    else:
        ham = integ.operator(fock.build_two_mode_hamiltonian(fock.TwoModeParams(n, g=1.0, theta=math.pi)))
        state = fock.evolve(fock.twin_fock_state(n), ham, p["phi"])
    integ.norm(abs(state.norm - 1))
    prefactor = p["prefactor"]
    if prefactor is None and p["gamma_prime_1"] is not None:
        prefactor = interference.readout_prefactor(
            p["gamma_prime_1"], p["gamma_prime_2"], p["omega_k1"], p["omega_k2"]
        )
    prefactor = 1.0 if prefactor is None else prefactor
    taus = interference.default_tau_grid(kappa, p["tau_points"], p["tau_span"])
    trace = interference.intensity_trace(state, kappa, taus, prefactor)
    _, delta_n = fock.number_statistics(state)
    report = interference.detect_collapse_revival(
        trace, p["threshold_fraction"], delta_n if delta_n > 0 else None
    )
    sample = taus[:: max(1, len(taus) // 200)]
    closed = np.array([interference.intensity_closed_form(state.amplitudes, n, kappa, t) for t in sample])
    direct = interference.intensity_trace(state, kappa, sample).intensity
    results = {
        "delta_n": delta_n,
        "t_coll_estimate": report.t_coll_estimate,
        "t_coll_measured": report.t_coll_measured,
        "t_revival_measured": report.t_revival_measured,
        "envelope_threshold": report.envelope_threshold,
        "closed_form_max_deviation": float(np.abs(closed - direct).max()),
        "prefactor": prefactor,
    }
    scalars = {
        "delta_n": delta_n,
        "t_coll_estimate": _nan(report.t_coll_estimate),
        "t_coll_measured": _nan(report.t_coll_measured),
        "t_revival_measured": _nan(report.t_revival_measured),
        "max_abs_intensity": float(np.abs(trace.intensity).max()),
    }
    rows = [[t, i] for t, i in zip(trace.tau_grid, trace.intensity)]
    return ScenarioOutput(["tau", "intensity"], rows, results, scalars,
                          plot=("Interference intensity", "interference.svg", 0, 1))


def scenario_ring(p: dict[str, Any], integ: Integrity) -> ScenarioOutput:
    model = ring.RingCouplingModel(
        p["gamma_prime_1"], p["gamma_prime_2"], p["omega_k1"], p["omega_k2"],
        theta=p["theta"], n_particles=p["n_particles"], ring_cutoff=p["ring_cutoff"],
    )
    ham, _ = ring.build_ring_hamiltonian(model)
    integ.operator(ham)
    g_eff = ring.effective_coupling_g(model)
    duration = p["duration"]
    if duration is None:
        duration = 2.5 * 2 * math.pi / g_eff if g_eff > 0 else 100.0
    times = np.linspace(0.0, duration, p["points"])
    pops = ring.populations(model, times)
    integ.norm(float(np.abs(pops["norm"] - 1).max()))
    results: dict[str, Any] = {
        "epsilon": model.epsilon,
        "effective_g": g_eff,
        "number_drift": float(np.abs(pops["total"] - model.n_particles).max()),
    }
    scalars = {"epsilon": model.epsilon, "effective_g": g_eff}
    if model.n_particles == 1:
        try:
            rep = ring.validate_adiabatic(model, duration, p["points"])
        except ring.AdiabaticFitError as exc:
            results["fit_error"] = str(exc)
            scalars.update(fitted_rabi_frequency=math.nan, relative_error=math.nan,
                           max_ring_population=float(pops["ring"].max()))
        else:
            results.update(
                fitted_rabi_frequency=rep.fitted_rabi_frequency,
                relative_error=rep.relative_error,
                max_ring_population=rep.max_ring_population,
            )
            scalars.update(fitted_rabi_frequency=rep.fitted_rabi_frequency,
                           relative_error=rep.relative_error,
                           max_ring_population=rep.max_ring_population)
    else:
        scalars["max_ring_population"] = float(pops["ring"].max())
        results["max_ring_population"] = scalars["max_ring_population"]
    rows = [list(r) for r in zip(times, pops["trap1"], pops["trap2"], pops["ring"])]
    return ScenarioOutput(["t", "p_trap1", "p_trap2", "ring_population"], rows, results, scalars,
                          plot=("Trap 2 population", "ring.svg", 0, 2))


def scenario_bragg(p: dict[str, Any], integ: Integrity) -> ScenarioOutput:
    params = bragg.BraggLadderParams(
        p["omega_pump"], p["omega_probe"], p["detuning"], 4 * p["omega_k"], p["omega_k"], p["order"]
    )
    if params.delta_1 == 0:
        raise ConfigError("parameter 'detuning': delta_1 = detuning + omega_k must be nonzero")
    integ.operator(bragg.ladder_hamiltonian(params))
    if p["nu_values"] is not None:
        nus = np.array(p["nu_values"])
    else:
        centre = 4 * p["omega_k"]
        lo = centre - 0.5 if p["nu_min"] is None else p["nu_min"]
        hi = centre + 0.5 if p["nu_max"] is None else p["nu_max"]
        nus = np.linspace(lo, hi, p["nu_points"])
    nus = np.sort(nus)
    coupling = abs(params.omega_pump * params.omega_probe)
    t = p["t"]
    if t is None:
        if coupling == 0:
            raise ConfigError("parameter 't': needed when omega_pump * omega_probe = 0")
        t = math.pi * abs(params.delta_1) / (2 * coupling)
    transfer = bragg.transfer_scan(params, nus, t)
    resonant = bragg.first_order_dynamics(params, np.linspace(0.0, t, 200))
    integ.norm(resonant.norm_drift())
    gamma = bragg.effective_gamma(params)
    gammas = {
        str(m): bragg.effective_gamma(
            bragg.BraggLadderParams(params.omega_pump, params.omega_probe, params.detuning,
                                    params.nu, params.omega_k, m)
        )
        for m in range(1, p["max_order"] + 1)
    }
    best = int(np.argmax(transfer))
    results = {
        "t": t,
        "resonance_nu": 4 * p["omega_k"],
        "peak_nu": float(nus[best]),
        "peak_transfer": float(transfer[best]),
        "gamma_eff": gamma,
        "gamma_by_order": gammas,
        "adiabatic": params.adiabatic,
        "norm_drift": resonant.norm_drift(),
    }
    scalars = {"peak_nu": float(nus[best]), "peak_transfer": float(transfer[best]), "gamma_eff": gamma}
    rows = [[nu, tr, gamma] for nu, tr in zip(nus, transfer)]
    return ScenarioOutput(["nu", "transfer_probability", "gamma_eff"], rows, results, scalars,
                          plot=("Bragg transfer vs beam detuning", "bragg.svg", 0, 1))


SCENARIOS = {
    "protocol": scenario_protocol,
    "interference": scenario_interference,
    "ring": scenario_ring,
    "bragg": scenario_bragg,
}


def _nan(x: Optional[float]) -> float:
    return math.nan if x is None else float(x)


# --- output ----------------------------------------------------------------


def fmt(x: Any) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".12g")
    return str(x)


def csv_text(columns: list[str], rows: list[list[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        if len(row) != len(columns):
            raise ValueError("result table is not rectangular")
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _jsonable(x: Any) -> Any:
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return float(format(x, ".12g")) if math.isfinite(x) else None
    return x


def json_text(obj: Any) -> str:
    return json.dumps(_jsonable(obj), indent=2) + "\n"


def _write_plot(path: Path, title: str, columns: list[str], rows: list[list[float]], xi: int, yi: int) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "optical-josephson"  # stable element ids
    data = np.array(rows, dtype=float)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(data[:, xi], data[:, yi], lw=1)
    ax.set_xlabel(columns[xi])
    ax.set_ylabel(columns[yi])
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _sweep_point(inner: str, base: dict[str, Any], name: str, value: float) -> tuple[float, dict[str, float]]:
    merged = dict(base)
    merged[name] = value
    params = resolve_parameters(inner, merged)
    out = SCENARIOS[inner](params, Integrity())
    return params[name], out.scalars


def run_sweep_table(raw: dict[str, Any], parallel: bool = True, workers: Optional[int] = None) -> str:
    """CSV text of a sweep: one row per value, sorted by the swept value."""
    inner = raw["scenario"]
    name = raw["sweep"]["parameter"]
    base = raw.get("parameters", {})
    values = list(raw["sweep"]["values"])
    if parallel and len(values) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(lambda v: _sweep_point(inner, base, name, v), values))
    else:
        points = [_sweep_point(inner, base, name, v) for v in values]
    points.sort(key=lambda pt: pt[0])
    scalar_names = list(points[0][1])
    rows = [[value] + [scalars[k] for k in scalar_names] for value, scalars in points]
    return csv_text([name] + scalar_names, rows)


def run(config: ScenarioConfig) -> int:
    start = time.time()
    out_dir = config.output_dir
    integ = Integrity(fault=config.raw.get("inject_fault"))
    kind = config.kind

    if kind == "selftest":
        from .selftest import run_selftest

        checks, elapsed = run_selftest()
        rows = [[c.name, c.passed, c.value, c.tolerance] for c in checks]
        table = csv_text(["check", "passed", "value", "tolerance"], rows)
        summary = {
            "scenario": kind,
            "parameters": {},
            "results": {c.name: {"passed": c.passed, "value": c.value, "tolerance": c.tolerance} for c in checks},
            "integrity": integ.as_dict(),
        }
        for c in checks:
            print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.value:.3e} (tol {c.tolerance:g})")
        failed = [c.name for c in checks if not c.passed]
        _write_outputs(out_dir, kind, table, summary, config, start, extra={"selftest_seconds": elapsed})
        if failed:
            print(f"selftest failed: {', '.join(failed)}", file=sys.stderr)
            return 2
        return 0

    if kind == "sweep":
        raw = config.raw
        table = run_sweep_table(raw, bool(raw.get("parallel", True)), raw.get("workers"))
        summary = {
            "scenario": kind,
            "parameters": {"scenario": raw["scenario"], "base": raw.get("parameters", {}), "sweep": raw["sweep"]},
            "results": {"rows": table.count("\n") - 1},
            "integrity": integ.as_dict(),
        }
        _write_outputs(out_dir, kind, table, summary, config, start)
        return 0

    output = SCENARIOS[kind](config.parameters, integ)
    problems = integ.failures()
    if problems:
        raise fock.IntegrityError("; ".join(problems))
    table = csv_text(output.columns, output.rows)
    summary = {
        "scenario": kind,
        "parameters": config.parameters,
        "results": output.results,
        "integrity": integ.as_dict(),
    }
    _write_outputs(out_dir, kind, table, summary, config, start)
    if config.emit_plots and output.plot:
        title, filename, xi, yi = output.plot
        _write_plot(out_dir / filename, title, output.columns, output.rows, xi, yi)
    return 0


def _write_outputs(out_dir: Path, kind: str, table: str, summary: dict, config: ScenarioConfig,
                   start: float, extra: Optional[dict] = None) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"{kind}.csv").write_text(table)
    (out_dir / "summary.json").write_text(json_text(summary))
    provenance = {
        "config": config.raw,
        "artifact_version": __version__,
        "started_unix": start,
        "elapsed_seconds": time.time() - start,
        **(extra or {}),
    }
    (out_dir / "provenance.json").write_text(json.dumps(provenance, indent=2, default=str) + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ojj", description="Optical Josephson junction simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        sp = sub.add_parser(kind)
        sp.add_argument("--config", type=Path, required=kind != "selftest")
        sp.add_argument("--out", type=Path, default=None)
        sp.add_argument("--emit-plots", action="store_true")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config is None:
            config = ScenarioConfig("selftest", {}, args.out or Path("results"), args.emit_plots,
                                    {"schema_version": SCHEMA_VERSION, "kind": "selftest"})
        else:
            config = load_config(args.config, args.command, args.out, args.emit_plots)
        return run(config)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except fock.IntegrityError as exc:
        print(f"integrity failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
