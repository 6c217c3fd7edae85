"""Batch front end: config parsing, simulation runs, CSV output, plots.

Config files are line-based ``key = value`` text with ``#`` comments.
Unknown keys are rejected.  All outputs are plain CSV with ``.`` decimal
separators and 17 significant digits, so repeated runs of the same
configuration are byte-identical.

Exit codes: 0 success, 1 configuration error, 2 numerical failure
(blow-up or singular solve), 3 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import (
    TimeSeries,
    TimeSeriesRecorder,
    convergence_report,
    default_fit_window,
    fit_exponential,
    fit_polynomial,
    select_decay_model,
)
from .errors import BlowUpError, ConfigError, NumericsError
from .grid import GridConfig, Mesh, build_mesh, courant_advisory
from .params import (
    PhysicalParameters,
    classify_regime,
    lookup_preset,
    stability_number,
)
from .stencil import estimate_operator_order, operator_error
from .stepper import (
    DAMPING_TREATMENTS,
    Fields,
    InitialData,
    Observer,
    StepRecord,
    apply_boundary_extension,
    fourier_initial_data,
    reference_initial_data,
    run,
    zero_initial_data,
)

PARAMETER_KEYS = ("rho1", "rho2", "rho3", "k", "b", "delta", "beta", "tau")
FIELD_NAMES = ("phi", "psi", "theta", "q")
INITIAL_CHOICES = ("reference", "zero", "fourier")

SERIES_HEADER = "t,energy,max_abs_phi,max_abs_psi,max_abs_theta,max_abs_q"
SNAPSHOT_HEADER = "t,x,phi,psi,theta,q"

#: Grid sizes for the spatial operator-order study start here and double.
SPATIAL_BASE_I = 8


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved batch-run configuration with documented defaults."""

    preset: str = "mu_zero"
    overrides: tuple[tuple[str, float], ...] = ()
    I: int = 26
    T: float = 35.0
    c: float = 0.05
    initial: str = "reference"
    position_modes: tuple[tuple[str, int, float], ...] = ()
    velocity_modes: tuple[tuple[str, int, float], ...] = ()
    stride: int = 20
    snapshot_stride: int = 0
    fit_lo: float | None = None
    fit_hi: float | None = None
    damping: str = "averaged"
    series_out: str = "series.csv"
    snapshots_out: str = "snapshots.csv"
    summary_out: str = "summary.txt"

    def physical_parameters(self) -> PhysicalParameters:
        params = lookup_preset(self.preset).parameters
        if self.overrides:
            params = replace(params, **dict(self.overrides))
        return params

    def grid_config(self) -> GridConfig:
        return GridConfig(I=self.I, T=self.T, c=self.c)

    def initial_data(self, p: PhysicalParameters, mesh: Mesh) -> InitialData:
        if self.initial == "reference":
            return reference_initial_data(p, mesh)
        if self.initial == "zero":
            return zero_initial_data(mesh)
        return fourier_initial_data(
            mesh,
            position_modes=_modes_by_field(self.position_modes),
            velocity_modes=_modes_by_field(self.velocity_modes),
        )

    def fit_window(self) -> tuple[float, float]:
        lo, hi = default_fit_window(self.T)
        if self.fit_lo is not None:
            lo = self.fit_lo
        if self.fit_hi is not None:
            hi = self.fit_hi
        return (lo, hi)


def _modes_by_field(modes: tuple[tuple[str, int, float], ...]) -> dict:
    by_field: dict[str, list[tuple[int, float]]] = {}
    for field, k, amplitude in modes:
        by_field.setdefault(field, []).append((k, amplitude))
    return by_field


def _parse_modes(key: str, raw: str, line_no: int) -> tuple[tuple[int, float], ...]:
    """Parse 'k:amplitude, k:amplitude, ...' mode lists."""
    pairs = []
    for chunk in raw.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            k_text, _, amp_text = chunk.partition(":")
            pairs.append((int(k_text), float(amp_text)))
        except ValueError:
            raise ConfigError(
                f"line {line_no}: cannot parse mode entry {chunk!r} for {key}"
                " (expected k:amplitude)"
            ) from None
    return tuple(pairs)


def _parse_value(key: str, raw: str, line_no: int, kind):
    try:
        return kind(raw)
    except ValueError:
        raise ConfigError(
            f"line {line_no}: value {raw!r} for key {key} is not a valid {kind.__name__}"
        ) from None


def parse_config(text: str) -> RunConfig:
    """Parse 'key = value' configuration text into a RunConfig."""
    values: dict = {}
    overrides: dict[str, float] = {}
    position_modes: list[tuple[str, int, float]] = []
    velocity_modes: list[tuple[str, int, float]] = []

    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()

        if key == "preset":
            lookup_preset(raw)  # validate early, naming valid presets
            values["preset"] = raw
        elif key in PARAMETER_KEYS:
            overrides[key] = _parse_value(key, raw, line_no, float)
        elif key == "I":
            values["I"] = _parse_value(key, raw, line_no, int)
        elif key in ("T", "c", "fit_lo", "fit_hi"):
            values[key] = _parse_value(key, raw, line_no, float)
        elif key in ("stride", "snapshot_stride"):
            values[key] = _parse_value(key, raw, line_no, int)
        elif key == "initial":
            if raw not in INITIAL_CHOICES:
                raise ConfigError(
                    f"line {line_no}: initial must be one of {INITIAL_CHOICES}, got {raw!r}"
                )
            values["initial"] = raw
        elif key == "damping":
            if raw not in DAMPING_TREATMENTS:
                raise ConfigError(
                    f"line {line_no}: damping must be one of {DAMPING_TREATMENTS},"
                    f" got {raw!r}"
                )
            values["damping"] = raw
        elif key in ("series_out", "snapshots_out", "summary_out"):
            values[key] = raw
        elif key.endswith("_modes") and key[:-6].rstrip("01") in FIELD_NAMES:
            field = key[:-7]  # strip '0_modes' / '1_modes'
            which = key[-7]
            if field not in FIELD_NAMES or which not in "01":
                raise ConfigError(f"line {line_no}: unknown key {key!r}")
            target = position_modes if which == "0" else velocity_modes
            for k, amplitude in _parse_modes(key, raw, line_no):
                target.append((field, k, amplitude))
        else:
            raise ConfigError(f"line {line_no}: unknown key {key!r}")

    cfg = RunConfig(
        overrides=tuple(sorted(overrides.items())),
        position_modes=tuple(position_modes),
        velocity_modes=tuple(velocity_modes),
        **values,
    )
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    cfg.physical_parameters()  # raises naming the offending constant
    cfg.grid_config()  # raises naming I, T, or c
    if cfg.stride < 1:
        raise ConfigError(f"stride must be >= 1, got {cfg.stride}")
    if cfg.snapshot_stride < 0:
        raise ConfigError(f"snapshot_stride must be >= 0, got {cfg.snapshot_stride}")
    if cfg.initial != "fourier" and (cfg.position_modes or cfg.velocity_modes):
        raise ConfigError("mode lists require 'initial = fourier'")
    lo, hi = cfg.fit_window()
    if not lo < hi:
        raise ConfigError(f"fit window [{lo}, {hi}] is empty")


def render_config(cfg: RunConfig) -> str:
    """Serialize a RunConfig so that parse_config(render_config(cfg)) == cfg."""
    lines = [f"preset = {cfg.preset}"]
    for name, value in cfg.overrides:
        lines.append(f"{name} = {value!r}")
    lines.append(f"I = {cfg.I}")
    lines.append(f"T = {cfg.T!r}")
    lines.append(f"c = {cfg.c!r}")
    lines.append(f"initial = {cfg.initial}")
    for which, modes in (("0", cfg.position_modes), ("1", cfg.velocity_modes)):
        by_field = _modes_by_field(modes)
        for field, pairs in by_field.items():
            entries = ", ".join(f"{k}:{amplitude!r}" for k, amplitude in pairs)
            lines.append(f"{field}{which}_modes = {entries}")
    lines.append(f"stride = {cfg.stride}")
    lines.append(f"snapshot_stride = {cfg.snapshot_stride}")
    if cfg.fit_lo is not None:
        lines.append(f"fit_lo = {cfg.fit_lo!r}")
    if cfg.fit_hi is not None:
        lines.append(f"fit_hi = {cfg.fit_hi!r}")
    lines.append(f"damping = {cfg.damping}")
    lines.append(f"series_out = {cfg.series_out}")
    lines.append(f"snapshots_out = {cfg.snapshots_out}")
    lines.append(f"summary_out = {cfg.summary_out}")
    return "\n".join(lines) + "\n"


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    return parse_config(Path(path).read_text())


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def write_series_csv(path: Path, series: TimeSeries) -> None:
    rows = [SERIES_HEADER]
    for i in range(len(series)):
        rows.append(
            ",".join(
                _fmt(column[i])
                for column in (
                    series.t,
                    series.energy,
                    series.max_abs_phi,
                    series.max_abs_psi,
                    series.max_abs_theta,
                    series.max_abs_q,
                )
            )
        )
    path.write_text("\n".join(rows) + "\n")


class SnapshotRecorder:
    """Observer collecting boundary-extended full-node fields per sample."""

    def __init__(self, mesh: Mesh):
        self.nodes = mesh.nodes
        self.frames: list[tuple[float, Fields]] = []

    def __call__(self, rec: StepRecord) -> None:
        self.frames.append((rec.t, apply_boundary_extension(rec.curr)))


def write_snapshots_csv(path: Path, recorder: SnapshotRecorder) -> None:
    rows = [SNAPSHOT_HEADER]
    for t, full in recorder.frames:
        for i, x in enumerate(recorder.nodes):
            rows.append(
                ",".join(
                    _fmt(v)
                    for v in (t, x, full.phi[i], full.psi[i], full.theta[i], full.q[i])
                )
            )
    path.write_text("\n".join(rows) + "\n")


def _summarize(cfg: RunConfig, series: TimeSeries, wall_time: float) -> str:
    p = cfg.physical_parameters()
    grid = cfg.grid_config()
    mu = stability_number(p)
    regime = classify_regime(mu)
    advisory = courant_advisory(p, grid)
    lines = [
        f"thermobeam {__version__} simulation summary",
        "parameters: "
        + " ".join(f"{name}={getattr(p, name):.17g}" for name in PARAMETER_KEYS),
        f"stability number: mu = {mu:.15g} ({regime.value})",
        f"grid: I={grid.I} h={grid.h:.17g} kappa={grid.kappa:.17g} N={grid.num_steps}"
        f" T={grid.T:.17g}",
        f"wave speeds: max={advisory.max_wave_speed:.6g}"
        f" c*max={advisory.speed_ratio:.6g}"
        + (" [WARNING: exceeds 1]" if advisory.warn else ""),
        f"samples: {len(series)} (stride {cfg.stride})",
        f"wall time: {wall_time:.2f} s",
    ]
    window = cfg.fit_window()
    try:
        exp_fit = fit_exponential(series, window)
        poly_fit = fit_polynomial(series, window)
        choice = select_decay_model(exp_fit, poly_fit)
        lines += [
            f"fit window: [{window[0]:.6g}, {window[1]:.6g}]",
            f"exponential fit: ln E = {exp_fit.intercept:.6g} + ({exp_fit.slope:.6g})*t"
            f"  residual {exp_fit.residual:.6g}",
            f"power-law fit:   ln E = {poly_fit.intercept:.6g} + ({poly_fit.slope:.6g})*ln t"
            f"  residual {poly_fit.residual:.6g}",
            f"selected decay model: {choice.model.value} (margin {choice.margin:.6g})",
        ]
    except NumericsError as exc:
        lines.append(f"decay fits unavailable: {exc}")
    return "\n".join(lines) + "\n"


def cmd_simulate(
    cfg: RunConfig,
    out: str | None = None,
    snapshots_stride: int | None = None,
) -> int:
    """Run one simulation; write series CSV, optional snapshots, summary."""
    if snapshots_stride is not None:
        cfg = dataclasses.replace(cfg, snapshot_stride=snapshots_stride)
    series_path = Path(out) if out is not None else Path(cfg.series_out)

    p = cfg.physical_parameters()
    grid = cfg.grid_config()
    mesh = build_mesh(grid)
    data = cfg.initial_data(p, mesh)

    recorder = TimeSeriesRecorder(p, mesh)
    observers = [Observer(recorder, stride=cfg.stride)]
    snapshots = None
    if cfg.snapshot_stride > 0:
        snapshots = SnapshotRecorder(mesh)
        observers.append(Observer(snapshots, stride=cfg.snapshot_stride))

    start = time.perf_counter()
    try:
        run(p, grid, data, observers=observers, damping=cfg.damping)
    except BlowUpError:
        write_series_csv(series_path, recorder.series)  # flush partial output
        print(f"partial series written to {series_path}", file=sys.stderr)
        raise
    wall_time = time.perf_counter() - start

    write_series_csv(series_path, recorder.series)
    if snapshots is not None:
        write_snapshots_csv(Path(cfg.snapshots_out), snapshots)
    summary = _summarize(cfg, recorder.series, wall_time)
    Path(cfg.summary_out).write_text(summary)
    print(summary, end="")
    return 0


def cmd_mu(cfg: RunConfig) -> int:
    """Print the stability number and its regime."""
    mu = stability_number(cfg.physical_parameters())
    print(f"mu = {mu:.15g} ({classify_regime(mu).value})")
    return 0


def cmd_convergence(cfg: RunConfig, levels: int, out: str | None = None) -> int:
    """Spatial operator-order and temporal self-convergence study."""
    if levels < 2:
        raise ConfigError(f"need at least 2 refinement levels, got {levels}")

    rows = ["study,level,resolution,error,order"]
    I_list = [SPATIAL_BASE_I * 2**j for j in range(levels)]
    f = lambda x: np.cos(np.pi * x)  # noqa: E731
    fxx = lambda x: -np.pi**2 * np.cos(np.pi * x)  # noqa: E731
    errors = [operator_error(f, fxx, I) for I in I_list]
    orders = estimate_operator_order(f, fxx, I_list)
    for j, (I, err) in enumerate(zip(I_list, errors)):
        order = _fmt(orders[j - 1]) if j > 0 else ""
        rows.append(f"spatial,{j},I={I},{_fmt(err)},{order}")

    p = cfg.physical_parameters()
    base = GridConfig(I=cfg.I, T=min(cfg.T, 1.0), c=cfg.c)
    mesh = build_mesh(base)
    data = cfg.initial_data(p, mesh)
    report = convergence_report(p, data, base, levels)
    for j, (steps, kappa) in enumerate(zip(report.step_counts, report.kappas)):
        err = _fmt(report.diffs[j - 1]) if j > 0 else ""
        order = _fmt(report.orders[j - 2]) if j > 1 else ""
        rows.append(f"temporal,{j},steps={steps},{err},{order}")

    text = "\n".join(rows) + "\n"
    if out is not None:
        Path(out).write_text(text)
    print(text, end="")
    return 0


def _read_series_csv(path: Path) -> dict[str, np.ndarray]:
    if not path.exists():
        raise FileNotFoundError(f"series file not found: {path}")
    lines = [line for line in path.read_text().splitlines() if line.strip()]
    if len(lines) < 2:
        raise OSError(f"series file {path} holds no data rows")
    header = lines[0].split(",")
    data = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    return {name: data[:, i] for i, name in enumerate(header)}


def cmd_plot(
    series: str, out: str, snapshots: str | None = None, cfg: RunConfig | None = None
) -> int:
    """Emit a self-contained gnuplot script for the standard figures."""
    cfg = cfg if cfg is not None else RunConfig()
    series_path = Path(series)
    columns = _read_series_csv(series_path)
    t = columns["t"]

    window = cfg.fit_window()
    window = (min(window[0], float(t[-1]) / 2.0), min(window[1], float(t[-1])))
    ts = TimeSeries(
        n=np.arange(len(t)),
        t=t,
        energy=columns["energy"],
        max_abs_phi=columns["max_abs_phi"],
        max_abs_psi=columns["max_abs_psi"],
        max_abs_theta=columns["max_abs_theta"],
        max_abs_q=columns["max_abs_q"],
    )
    try:
        exp_fit = fit_exponential(ts, window)
    except NumericsError:
        exp_fit = None

    stem = Path(out).stem
    script = [
        "# gnuplot script generated by thermobeam",
        "set datafile separator ','",
        "set terminal pngcairo size 960,600",
        "set grid",
        "",
        f"set output '{stem}_max_phi.png'",
        "set xlabel 't'",
        "set ylabel 'max |phi|'",
        f"plot '{series_path}' skip 1 using 1:3 with lines lw 2 title 'max |phi|'",
        "",
        f"set output '{stem}_energy.png'",
        "set xlabel 't'",
        "set ylabel 'ln E'",
    ]
    energy_plot = f"plot '{series_path}' skip 1 using 1:(log($2)) with lines lw 2 title 'ln E'"
    if exp_fit is not None:
        script += [
            f"fit_ln_e(x) = {exp_fit.intercept:.17g} + ({exp_fit.slope:.17g})*x",
            f"fit_lo = {window[0]:.17g}",
            f"fit_hi = {window[1]:.17g}",
        ]
        energy_plot += (
            ", \\\n     (x >= fit_lo && x <= fit_hi ? fit_ln_e(x) : 1/0)"
            " with lines lw 2 dashtype 2 title 'exponential fit'"
        )
    script.append(energy_plot)
    if snapshots is not None:
        snap_path = Path(snapshots)
        if not snap_path.exists():
            raise FileNotFoundError(f"snapshot file not found: {snap_path}")
        script += [
            "",
            f"set output '{stem}_surface.png'",
            "set xlabel 'x'",
            "set ylabel 't'",
            "set zlabel 'phi'",
            "set dgrid3d 60,30 qnorm 2",
            "set hidden3d",
            f"splot '{snap_path}' skip 1 using 2:1:3 with lines title 'phi(x,t)'",
        ]
    Path(out).write_text("\n".join(script) + "\n")
    print(f"plot script written to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thermobeam",
        description="Fourth-order compact finite-difference solver for a"
        " thermoelastic beam with second sound",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a simulation and write CSV outputs")
    sim.add_argument("--config", help="path to a key = value config file")
    sim.add_argument("--out", help="series CSV path (default from config)")
    sim.add_argument(
        "--snapshots", type=int, metavar="STRIDE",
        help="record full-field snapshots every STRIDE steps",
    )

    mu = sub.add_parser("mu", help="print the stability number and regime")
    mu.add_argument("--config", help="path to a key = value config file")

    conv = sub.add_parser("convergence", help="operator-order and self-convergence study")
    conv.add_argument("--config", help="path to a key = value config file")
    conv.add_argument("--levels", type=int, default=4, help="refinement levels (>= 2)")
    conv.add_argument("--out", help="CSV output path (default: stdout only)")

    plot = sub.add_parser("plot", help="emit a gnuplot script for the standard figures")
    plot.add_argument("--series", required=True, help="series CSV from a simulate run")
    plot.add_argument("--snapshots", help="snapshots CSV for the surface plot")
    plot.add_argument("--out", required=True, help="gnuplot script output path")
    plot.add_argument("--config", help="config (for the fit window override)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return cmd_simulate(
                load_config(args.config), out=args.out, snapshots_stride=args.snapshots
            )
        if args.command == "mu":
            return cmd_mu(load_config(args.config))
        if args.command == "convergence":
            return cmd_convergence(load_config(args.config), args.levels, out=args.out)
        if args.command == "plot":
            return cmd_plot(
                args.series,
                args.out,
                snapshots=args.snapshots,
                cfg=load_config(args.config),
            )
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except NumericsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
