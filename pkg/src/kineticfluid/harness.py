"""Run configuration, initial-data presets, and the run/probe/fit/resume
drivers behind the command-line front end.

A run is described by one JSON config document with nested sections (grid,
basis, model, scheme, schedule, initial, weights, fit, output); CLI flags
override file values.  ``cmd_run`` emits ``series.csv`` (one EnergyReport row
per report time, fixed column order), ``summary.json`` (final values, fitted
decay rate, drift maxima), a ``config.json`` echo of the resolved
configuration, and binary checkpoints at the configured cadence.  Runs are
serial and bit-reproducible for a fixed config; ``resume`` continues a
checkpointed run bit-compatibly.
"""

from __future__ import annotations

import csv
import json
import os
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .dynamics import (
    ModelParams,
    Schedule,
    SimState,
    integrate,
    positivity_min,
    read_checkpoint,
    zero_state,
)
from .errors import ConfigurationError, PresetError, StateError
from .functionals import (
    EnergyReport,
    FunctionalWeights,
    fit_decay,
    mixed_sobolev_norm,
    validate_weights,
    zero_mean_check,
)
from .hermite import BasisSpec, HermiteBasis, build_basis, coercivity_probe
from .spectral import Grid

PRESETS = ("equilibrium", "decay-torus", "conservation-audit", "manufactured-moment")


@dataclass(frozen=True)
class RunConfig:
    """Complete description of one simulation run."""

    dim: int = 1
    n: int = 64
    l_box: float = 2.0 * np.pi
    order: int = 32
    quad_size: int | None = None
    gamma: float = 1.4
    c0: float = 1.0 / 1.4
    scheme: str = "imex1"
    tol: float = 1e-11
    max_iter: int = 20
    dt: float = 2e-3
    n_steps: int = 5000
    report_every: int = 10
    checkpoint_every: int = 0
    preset: str = "decay-torus"
    epsilon: float = 1e-3
    seed: int = 7
    micro_fraction: float = 0.2
    x_modes: tuple = (1,)
    weights: FunctionalWeights = field(default_factory=FunctionalWeights.default)
    gamma_convention: str = "constant"
    fit_window: tuple = (1.0, 10.0)
    fit_model: str = "exponential"
    out_dir: str = "run_out"
    serial: bool = True
    validate_weights_on_start: bool = True

    def __post_init__(self):
        if self.epsilon < 0:
            raise ConfigurationError("epsilon must be nonnegative")
        if self.preset not in PRESETS:
            raise ConfigurationError(f"unknown preset {self.preset!r}; choose from {PRESETS}")

    # -- assembly ----------------------------------------------------------

    def make_grid(self) -> Grid:
        return Grid(dim_x=self.dim, n=self.n, box=self.l_box)

    def make_basis(self) -> HermiteBasis:
        return build_basis(BasisSpec(dim=self.dim, order=self.order,
                                     quad_size=self.quad_size))

    def make_params(self) -> ModelParams:
        return ModelParams(gamma=self.gamma, c0=self.c0, dim_x=self.dim,
                           dim_v=self.dim)

    def make_schedule(self) -> Schedule:
        return Schedule(dt=self.dt, n_steps=self.n_steps, scheme=self.scheme,
                        report_every=self.report_every,
                        checkpoint_every=self.checkpoint_every,
                        tol=self.tol, max_iter=self.max_iter)

    # -- (de)serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        d = asdict(self)
        d["x_modes"] = list(self.x_modes)
        d["fit_window"] = list(self.fit_window)
        d["weights"] = {**asdict(self.weights), "ck": list(self.weights.ck)}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        if "weights" in d and isinstance(d["weights"], dict):
            w = dict(d["weights"])
            if "ck" in w:
                w["ck"] = tuple(w["ck"])
            d["weights"] = FunctionalWeights(**w)
        if "x_modes" in d:
            d["x_modes"] = tuple(d["x_modes"])
        if "fit_window" in d:
            d["fit_window"] = tuple(d["fit_window"])
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


def parse_config(path: str) -> RunConfig:
    """Load a JSON run config; parse failures carry the file path and line."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigurationError(
            f"{path}:{err.lineno}:{err.colno}: {err.msg}"
        ) from err
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: config must be a JSON object")
    return RunConfig.from_dict(data)


def apply_overrides(config: RunConfig, overrides: dict) -> RunConfig:
    """Flag overrides beat file values; values are parsed as JSON literals."""
    if not overrides:
        return config
    d = config.to_dict()
    for key, raw in overrides.items():
        if key not in d:
            raise ConfigurationError(f"unknown config key {key!r}")
        try:
            d[key] = json.loads(raw) if isinstance(raw, str) else raw
        except json.JSONDecodeError:
            d[key] = raw   # bare strings (e.g. preset names) pass through
    return RunConfig.from_dict(d)


# -- initial-data presets -------------------------------------------------------


def _random_wave(rng, grid: Grid, x_modes) -> np.ndarray:
    """Random band-limited standing wave, zero mean by construction."""
    out = np.zeros(grid.shape)
    for m in x_modes:
        amp = rng.standard_normal()
        wave = np.ones(grid.shape)
        for ax in range(grid.dim_x):
            phase = rng.uniform(0.0, 2.0 * np.pi)
            wave = wave * np.cos(2.0 * np.pi * m * grid.x[ax] / grid.box + phase)
        out += amp * wave
    return out


def _amplitude_norm(state: SimState) -> float:
    """The smallness measure the near-equilibrium theory is stated in:
    the mixed H^4 norm of f plus the H^4 norms of (rho, u), sum-of-norms."""
    grid, basis = state.grid, state.basis
    total = mixed_sobolev_norm(state.f, grid, basis, s=4)
    total += grid.sobolev_norm_x(state.rho, 4)
    for i in range(grid.dim_x):
        total += grid.sobolev_norm_x(state.u[i], 4)
    return total


def preset_initial(name: str, epsilon: float, seed: int, grid: Grid,
                   basis: HermiteBasis, micro_fraction: float = 0.2,
                   x_modes=(1,)) -> SimState:
    """Construct deterministic initial data (PCG64 stream keyed by ``seed``).

    ``decay-torus`` draws random band-limited zero-mean moment fields and a
    small micro part, scales the whole state so its combined H^4 amplitude is
    ``epsilon``, then shifts u by a constant so the total-momentum integral
    vanishes exactly; the result is checked for phase-space positivity.
    ``conservation-audit`` adds nonzero means to exercise drift tracking;
    ``manufactured-moment`` has a fluid-projection-only kinetic part.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    state = zero_state(grid, basis)
    if name == "equilibrium":
        return state
    if name not in PRESETS:
        raise PresetError(f"unknown preset {name!r}")
    D = grid.dim_x

    a0 = _random_wave(rng, grid, x_modes)
    b0 = [_random_wave(rng, grid, x_modes) for _ in range(D)]
    rho0 = _random_wave(rng, grid, x_modes)
    u0 = [_random_wave(rng, grid, x_modes) for _ in range(D)]

    state.f[..., basis.idx_zero] = a0
    for i in range(D):
        state.f[..., basis.idx_e[i]] = b0[i]
    if name != "manufactured-moment":
        for i in range(D):
            state.f[..., basis.idx_2e[i]] += micro_fraction * _random_wave(rng, grid, x_modes)
            k3 = 3 * np.eye(D, dtype=int)[i]
            idx3 = int(np.ravel_multi_index(tuple(k3), (basis.spec.order,) * D))
            state.f[..., idx3] += micro_fraction * _random_wave(rng, grid, x_modes)
    state.rho[:] = rho0
    for i in range(D):
        state.u[i] = u0[i]

    if name == "conservation-audit":
        state.rho += 0.2 * epsilon if epsilon > 0 else 0.0
        state.f[..., basis.idx_zero] += 0.1 * epsilon
        for i in range(D):
            state.u[i] += 0.15 * epsilon

    amp = _amplitude_norm(state)
    if amp > 0 and epsilon > 0:
        scale = epsilon / amp
        state.f *= scale
        state.rho *= scale
        state.u *= scale
    elif epsilon == 0:
        return zero_state(grid, basis)

    if name == "decay-torus":
        # exact zero total momentum: constant shift of u
        mom = np.array([
            grid.integral(state.f[..., basis.idx_e[i]] + (1.0 + state.rho) * state.u[i])
            for i in range(D)
        ])
        dens = grid.integral(1.0 + state.rho)
        for i in range(D):
            state.u[i] -= mom[i] / dens

    try:
        state.validate()
        bad = positivity_min(state) <= 0.0
    except StateError as err:
        raise PresetError(
            f"preset {name!r} at epsilon = {epsilon} violates the state "
            f"invariants ({err}); reduce epsilon"
        ) from err
    if bad:
        raise PresetError(
            f"preset {name!r} at epsilon = {epsilon} produces a nonpositive "
            "phase-space density; reduce epsilon"
        )
    return state


# -- artifact emission ----------------------------------------------------------


def write_series_csv(path: str, reports: list, dim_x: int):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(EnergyReport.headers(dim_x))
        for r in reports:
            writer.writerow([repr(float(v)) for v in r.to_row()])


def _drift_series(reports, getter):
    base = getter(reports[0])
    return max(abs(getter(r) - base) for r in reports)


def run_summary(config: RunConfig, reports: list, runtime_s: float) -> dict:
    dim = config.dim
    ts = np.array([r.t for r in reports])
    es = np.array([r.E for r in reports])
    summary = {
        "config": config.to_dict(),
        "n_reports": len(reports),
        "t_final": float(ts[-1]),
        "E_initial": float(es[0]),
        "E_final": float(es[-1]),
        "F_min_over_run": float(min(r.F_min for r in reports)),
        "entropy_rhs_max": float(max((r.entropy_rhs for r in reports[1:]), default=0.0)),
        "entropy_residual_max": float(max((abs(r.entropy_residual) for r in reports[1:]),
                                          default=0.0)),
        "truncation_leakage": float(reports[-1].truncation_leakage),
        "drift": {
            "mass_f": _drift_series(reports, lambda r: r.mass_f),
            "mass_rho": _drift_series(reports, lambda r: r.mass_rho),
            **{f"momentum_{i + 1}": _drift_series(reports, lambda r, i=i: r.momentum[i])
               for i in range(dim)},
        },
        "runtime_s": runtime_s,
    }
    lo, hi = config.fit_window
    mask = (ts >= lo) & (ts <= hi)
    if mask.sum() >= 2 and np.all(es[mask] > 0):
        rate, amplitude, r2 = fit_decay(ts, es, config.fit_model,
                                        window=config.fit_window)
        summary["fit"] = {
            "model": config.fit_model,
            "window": [lo, hi],
            "lambda_fit": rate,
            "amplitude": amplitude,
            "r_squared": r2,
        }
    else:
        summary["fit"] = None
    return summary


def cmd_run(config: RunConfig, echo=print):
    """Execute one configured run and write its artifacts.  Returns the
    report list and the summary dict."""
    t0 = time.time()
    grid = config.make_grid()
    basis = config.make_basis()
    params = config.make_params()
    if config.validate_weights_on_start:
        ok, lo, hi = validate_weights(config.weights, grid, basis, params,
                                      n_states=20)
        if not ok:
            raise ConfigurationError(
                f"functional weights fail the norm-equivalence battery "
                f"(E/plain range [{lo:.3g}, {hi:.3g}])"
            )
    state = preset_initial(config.preset, config.epsilon, config.seed, grid,
                           basis, micro_fraction=config.micro_fraction,
                           x_modes=config.x_modes)
    zm = zero_mean_check(state)
    echo(f"initial zero-mean check: a={zm[0]:.3e} rho={zm[1]:.3e} "
         f"momentum={np.max(np.abs(zm[2])):.3e}")
    os.makedirs(config.out_dir, exist_ok=True)
    reports, checkpoints, _, _ = integrate(
        state, config.make_schedule(), params, weights=config.weights,
        convention=config.gamma_convention, checkpoint_dir=config.out_dir,
    )
    write_series_csv(os.path.join(config.out_dir, "series.csv"), reports, config.dim)
    summary = run_summary(config, reports, time.time() - t0)
    with open(os.path.join(config.out_dir, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
    with open(os.path.join(config.out_dir, "config.json"), "w", encoding="utf-8") as fh:
        json.dump(config.to_dict(), fh, indent=2)
    if summary["fit"]:
        echo(f"decay fit: lambda = {summary['fit']['lambda_fit']:.6g}, "
             f"r^2 = {summary['fit']['r_squared']:.6g}")
    echo(f"run complete: {len(reports)} reports -> {config.out_dir} "
         f"({summary['runtime_s']:.1f}s)")
    return reports, summary


def cmd_probe_coercivity(dim: int, order: int, mode: str = "eigensolve",
                         samples: int = 1000, out_path: str | None = None,
                         echo=print):
    spec = BasisSpec(dim=dim, order=order)
    lam, desc = coercivity_probe(spec, mode=mode, samples=samples)
    echo(f"lambda0_emp = {lam:.8f} (dim={dim}, order={order}, mode={mode})")
    record = {"dim": dim, "order": order, "mode": mode, "lambda0_emp": lam,
              "description": desc}
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            json.dump(record, fh, indent=2)
    return lam, record


def cmd_fit(series_path: str, model: str, window: tuple, column: str = "E",
            echo=print):
    times, values = read_series_column(series_path, column)
    model_full = {"exp": "exponential", "alg": "algebraic"}.get(model, model)
    rate, amplitude, r2 = fit_decay(times, values, model_full, window=window)
    echo(f"rate = {rate:.8g}, r^2 = {r2:.8g}")
    return rate, amplitude, r2


def read_series_column(path: str, column: str):
    with open(path, "r", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if column not in header or "t" not in header:
            raise ConfigurationError(f"series {path} lacks column {column!r}")
        it, ic = header.index("t"), header.index(column)
        times, values = [], []
        for row in reader:
            times.append(float(row[it]))
            values.append(float(row[ic]))
    return np.array(times), np.array(values)


def cmd_resume(checkpoint_path: str, n_steps: int, out_dir: str | None = None,
               config_path: str | None = None, echo=print):
    """Continue a checkpointed run bit-compatibly.

    The stepping parameters come from the ``config.json`` echo written next to
    the checkpoint (or an explicit ``config_path``); the state and model
    parameters come from the checkpoint itself.
    """
    if config_path is None:
        config_path = os.path.join(os.path.dirname(checkpoint_path) or ".",
                                   "config.json")
    config = parse_config(config_path)
    state, params = read_checkpoint(checkpoint_path,
                                    quad_size=config.quad_size)
    config = replace(config, n_steps=n_steps,
                     out_dir=out_dir or config.out_dir + "_resumed",
                     validate_weights_on_start=False)
    os.makedirs(config.out_dir, exist_ok=True)
    t0 = time.time()
    reports, checkpoints, _, _ = integrate(
        state, config.make_schedule(), params, weights=config.weights,
        convention=config.gamma_convention, checkpoint_dir=config.out_dir,
    )
    write_series_csv(os.path.join(config.out_dir, "series.csv"), reports, config.dim)
    summary = run_summary(config, reports, time.time() - t0)
    with open(os.path.join(config.out_dir, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
    echo(f"resumed {n_steps} steps from t = {state.t:.6g} -> {config.out_dir}")
    return reports, summary
