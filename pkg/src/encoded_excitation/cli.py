"""Command-line front-end: figure presets, sweeps and link-budget reports.

Every run writes into its own directory: ``config.json`` (the resolved
configuration), ``summary.json`` (the run record) and comma-delimited data
files. PNG figures are added unless ``--no-plot`` is given.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import AtomParams
from .io import write_json, write_mode, write_table
from .network import crosstalk_scaling, design_report
from .overlap import bandwidth_match, optimal_bandwidth, optimality_residual
from .rng import trial_rng
from .scenarios import drive_mode, ensemble_peak, excite_band
from .signal import PhaseCode, default_time_grid, intensity_trace

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

FIG3_N0 = (3, 5, 7, 31, 63)
CROSSTALK_N0 = (7, 15, 31, 63)
MIN_SWEEP_TRIALS = 30


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    """Resolved parameters of one run. Rates are in units of ``gamma``."""

    gamma: float = 1.0
    W_over_gamma: float = 1.5
    N0: int = 31
    code: str | list = "random"
    seed: int = 0
    beta: float = 1.0
    delta_over_gamma: float = 0.0
    trials: int = 200
    n0_list: list = field(default_factory=lambda: list(FIG3_N0))
    seeds: int = 1
    K: int = 2
    sigma_phi: float = 0.0
    p: float = 0.0
    dt: float | None = None

    def validate(self) -> ScenarioConfig:
        for name in ("gamma", "W_over_gamma"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0 < self.beta <= 1:
            raise ConfigError(f"beta must lie in (0, 1], got {self.beta}")
        if self.N0 < 1 or self.trials < 1 or self.seeds < 1 or self.K < 1:
            raise ConfigError("N0, trials, seeds and K must be positive integers")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")
        if not self.sigma_phi >= 0 or not 0 <= self.p <= 1:
            raise ConfigError("sigma_phi must be >= 0 and p must lie in [0, 1]")
        if self.dt is not None and not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if any(int(n) < 1 for n in self.n0_list) or not self.n0_list:
            raise ConfigError(f"n0_list must hold positive integers, got {self.n0_list}")
        if isinstance(self.code, str):
            if self.code != "random":
                raise ConfigError(f"code must be 'random' or a list of phases, got {self.code!r}")
        elif len(self.code) != self.N0:
            raise ConfigError(f"explicit code has {len(self.code)} phases but N0 = {self.N0}")
        return self

    @property
    def bandwidth(self) -> float:
        return self.W_over_gamma * self.gamma

    @property
    def atom(self) -> AtomParams:
        return AtomParams.from_beta(self.gamma, self.beta, self.delta_over_gamma * self.gamma)

    def make_code(self, n0: int, index: int = 0) -> PhaseCode:
        """Explicit code if it fits ``n0``, otherwise a seeded random binary code."""
        if not isinstance(self.code, str) and len(self.code) == n0:
            return PhaseCode.for_bandwidth(self.code, self.bandwidth)
        return PhaseCode.random_binary(n0, self.bandwidth, trial_rng(self.seed, index, stream=n0))


PRESETS = {
    "fig2": {"W_over_gamma": 1.5},
    "fig3": {"W_over_gamma": 1.5, "n0_list": list(FIG3_N0)},
    "fig5": {"W_over_gamma": 1.5, "N0": 63, "seeds": 3},
    "fig4": {"W_over_gamma": 1.5, "N0": 31},
    "fig7": {"W_over_gamma": 1.5, "n0_list": list(FIG3_N0)},
}

_OVERRIDES = {f.name for f in fields(ScenarioConfig)}


def load_config(path: Path | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    unknown = set(data) - _OVERRIDES
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return data


def resolve_config(args: argparse.Namespace, preset: dict | None = None) -> ScenarioConfig:
    """Defaults, then preset, then config file, then flags."""
    values = dict(preset or {})
    values.update(load_config(args.config))
    for name in _OVERRIDES:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    try:
        cfg = ScenarioConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()


def prepare_out(path: Path, force: bool) -> Path:
    if path.exists() and any(path.iterdir()) and not force:
        raise ConfigError(f"output directory {path} is not empty; pass --force to overwrite")
    path.mkdir(parents=True, exist_ok=True)
    return path


class Run:
    """Collects outputs and summary scalars for one command."""

    def __init__(self, command: str, cfg: ScenarioConfig, out: Path, plots: bool, workers: int = 1):
        self.command = command
        self.cfg = cfg
        self.workers = workers
        self.out = out
        self.plots = plots
        self.outputs: list[str] = []
        self.summary: dict = {}
        self._plotting = None

    def table(self, name: str, header, columns) -> Path:
        path = write_table(self.out / name, header, columns)
        self.outputs.append(name)
        return path

    def plot(self, kind: str, name: str, *args, **kwargs):
        if not self.plots:
            return
        if self._plotting is None:
            from . import plotting

            self._plotting = plotting
        getattr(self._plotting, kind)(self.out / name, *args, **kwargs)
        self.outputs.append(name)

    def finish(self) -> dict:
        write_json(self.out / "config.json", asdict(self.cfg))
        record = {
            "command": self.command,
            "config": asdict(self.cfg),
            "outputs": sorted(self.outputs),
            "summary": self.summary,
            "seed": self.cfg.seed,
            "version": __version__,
        }
        write_json(self.out / "summary.json", record)
        return record


def _trace_summary(trace) -> dict:
    return {"peak_pe": trace.peak_value, "peak_time": trace.peak_time, "bound": trace.bound}


def run_excite(run: Run, preset: str | None):
    cfg = run.cfg
    atom = cfg.atom
    if preset == "fig3":
        lengths = list(cfg.n0_list)
    elif preset == "fig2":
        lengths = []
    else:
        lengths = [cfg.N0]
    uncoded_grid = default_time_grid(atom.gamma_tot, cfg.bandwidth, dt=cfg.dt)
    traces = {"uncoded": excite_band(cfg.bandwidth, atom, tgrid=uncoded_grid)}
    for n0 in lengths:
        for s in range(cfg.seeds):
            label = f"N{n0}" if cfg.seeds == 1 else f"N{n0}_s{s}"
            code = cfg.make_code(n0, s)
            tgrid = default_time_grid(atom.gamma_tot, cfg.bandwidth, n0, dt=cfg.dt)
            traces[label] = excite_band(cfg.bandwidth, atom, code, tgrid=tgrid)
    if preset == "fig5":
        traces.pop("uncoded")
    for label, trace in traces.items():
        run.table(f"pe_{label}.csv", ["t", "pe"], [trace.grid.t, trace.pe])
        run.summary[label] = _trace_summary(trace)
    t_lo, t_hi = -10 / cfg.gamma, 20 / cfg.gamma
    if run.plots:
        window = {}
        for label, trace in traces.items():
            keep = (trace.grid.t >= t_lo) & (trace.grid.t <= t_hi)
            window[label] = (trace.grid.t[keep], trace.pe[keep])
        run.plot("plot_traces", "pe.png", window, xlabel="gamma t", ylabel="P_e(t)")


def run_intensity(run: Run, preset: str | None):
    cfg = run.cfg
    lengths = list(cfg.n0_list) if preset == "fig7" else [cfg.N0]
    tgrid = default_time_grid(cfg.gamma, cfg.bandwidth, max(lengths), dt=cfg.dt)
    modes = {"uncoded": drive_mode(cfg.bandwidth, tgrid)}
    for n0 in lengths:
        modes[f"N{n0}"] = drive_mode(cfg.bandwidth, tgrid, cfg.make_code(n0))
    columns = {label: intensity_trace(mode) for label, mode in modes.items()}
    for label, mode in modes.items():
        write_mode(run.out / f"mode_{label}.csv", mode)
        run.outputs.append(f"mode_{label}.csv")
    for n0 in lengths:
        run.summary[f"N{n0}"] = {"peak_intensity": float(columns[f"N{n0}"].max())}
    run.summary["uncoded"] = {"peak_intensity": float(columns["uncoded"].max())}
    run.table("intensity.csv", ["t", *columns], [tgrid.t, *columns.values()])
    run.plot("plot_curves", "intensity.png", tgrid.t, columns, xlabel="gamma t", ylabel="|xi(t)|^2")


def run_sweep(run: Run):
    cfg = run.cfg
    lengths = [int(n) for n in cfg.n0_list]
    if any(n % 2 == 0 for n in lengths):
        raise ConfigError(f"sweep-codelength needs odd code lengths, got {lengths}")
    if cfg.trials < MIN_SWEEP_TRIALS:
        raise ConfigError(f"sweep-codelength needs trials >= {MIN_SWEEP_TRIALS}, got {cfg.trials}")
    points = [ensemble_peak(n, cfg.bandwidth, cfg.atom, cfg.trials, cfg.seed, workers=run.workers)
              for n in lengths]
    mean = [p.mean for p in points]
    err = [p.stderr for p in points]
    run.table("sweep_codelength.csv", ["N0", "mean_peak_pe", "stderr"], [lengths, mean, err])
    run.summary["points"] = [{"N0": p.n0, "mean_peak_pe": p.mean, "stderr": p.stderr} for p in points]
    run.plot("plot_errorbars", "sweep_codelength.png", lengths, mean, err, xlabel="N0",
             ylabel="mean peak P_e", logx=True)


def run_opt_bandwidth(run: Run):
    cfg = run.cfg
    w_star = optimal_bandwidth(cfg.gamma)
    x = w_star / cfg.gamma
    ratios = np.linspace(0.2, 8.0, 157)
    m2 = [bandwidth_match(r * cfg.gamma, cfg.gamma) for r in ratios]
    run.table("bandwidth_match.csv", ["W_over_gamma", "m_abs2"], [ratios, m2])
    run.summary.update({
        "W_opt_over_gamma": x,
        "residual": optimality_residual(x),
        "m_abs2": bandwidth_match(w_star, cfg.gamma),
    })
    run.plot("plot_curves", "bandwidth_match.png", ratios, {"|M|^2": m2}, xlabel="W / gamma", ylabel="|M|^2")
    print(f"W*/gamma = {x:.12g}  residual = {optimality_residual(x):.3e}  |M|^2 = {run.summary['m_abs2']:.6f}")


def run_budget(run: Run):
    cfg = run.cfg
    report = design_report(cfg.K, cfg.N0, cfg.sigma_phi, cfg.p, cfg.W_over_gamma, cfg.beta)
    run.summary.update(report.as_record())
    run.summary["sir"] = report.predicted_sir
    (run.out / "budget.txt").write_text(report.format_table() + "\n")
    run.outputs.append("budget.txt")
    print(report.format_table())


def run_crosstalk(run: Run):
    cfg = run.cfg
    lengths = [int(n) for n in cfg.n0_list]
    if any(n % 2 == 0 for n in lengths) or len(lengths) < 3:
        raise ConfigError(f"crosstalk needs at least three odd code lengths, got {lengths}")
    res = crosstalk_scaling(lengths, cfg.gamma, cfg.trials, cfg.seed, bandwidth=cfg.bandwidth, workers=run.workers)
    run.table("crosstalk.csv", ["N0", "mean_power", "stderr"], [res.n0, res.mean_power, res.stderr])
    run.summary.update({"slope": res.slope, "matched_power": 1.0})
    run.plot("plot_errorbars", "crosstalk.png", res.n0, res.mean_power, res.stderr, xlabel="N0",
             ylabel="normalized cross-talk power", logx=True, logy=True)
    print(f"log-log slope = {res.slope:.4f}")


FIGURE_RUNS = (
    ("excite", "fig2"),
    ("excite", "fig3"),
    ("intensity", "fig4"),
    ("excite", "fig5"),
    ("sweep-codelength", None),
    ("intensity", "fig7"),
    ("opt-bandwidth", None),
    ("crosstalk", None),
)


def dispatch(command: str, preset: str | None, args, out: Path, plots: bool) -> dict:
    base = dict(PRESETS.get(preset, {}))
    if command == "crosstalk":
        base.setdefault("n0_list", list(CROSSTALK_N0))
        base.setdefault("trials", 1000)
    cfg = resolve_config(args, base)
    if args.workers is not None and args.workers < 1:
        raise ConfigError(f"workers must be >= 1, got {args.workers}")
    run = Run(command, cfg, out, plots, args.workers or 1)
    if command == "excite":
        run_excite(run, preset)
    elif command == "intensity":
        run_intensity(run, preset)
    elif command == "sweep-codelength":
        run_sweep(run)
    elif command == "opt-bandwidth":
        run_opt_bandwidth(run)
    elif command == "budget":
        run_budget(run)
    elif command == "crosstalk":
        run_crosstalk(run)
    else:
        raise ConfigError(f"unknown command {command}")
    return run.finish()


def _n0_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _code(text: str):
    if text == "random":
        return text
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'random' or comma-separated phases, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML file of scenario parameters")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", type=Path, default=Path("runs"), help="output directory (default: runs/)")
    common.add_argument("--trials", type=int)
    common.add_argument("--workers", type=int, help="processes for Monte-Carlo trials")
    common.add_argument("--force", action="store_true", help="overwrite a non-empty output directory")
    common.add_argument("--no-plot", action="store_true", help="skip PNG figures")
    common.add_argument("--gamma", type=float)
    common.add_argument("--W-over-gamma", dest="W_over_gamma", type=float)
    common.add_argument("--N0", type=int)
    common.add_argument("--n0-list", dest="n0_list", type=_n0_list)
    common.add_argument("--code", type=_code, help="'random' or comma-separated chip phases")
    common.add_argument("--seeds", type=int, help="number of random codes per length")
    common.add_argument("--beta", type=float)
    common.add_argument("--delta-over-gamma", dest="delta_over_gamma", type=float)
    common.add_argument("--K", type=int)
    common.add_argument("--sigma-phi", dest="sigma_phi", type=float)
    common.add_argument("--p", type=float)
    common.add_argument("--dt", type=float, help="time step override")

    parser = argparse.ArgumentParser(prog="encoded-excitation", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("excite", parents=[common], help="P_e(t) traces")
    p.add_argument("--preset", choices=["fig2", "fig3", "fig5"])
    p = sub.add_parser("intensity", parents=[common], help="|xi(t)|^2 of uncoded vs encoded modes")
    p.add_argument("--preset", choices=["fig4", "fig7"])
    sub.add_parser("sweep-codelength", parents=[common], help="mean peak P_e vs code length")
    sub.add_parser("opt-bandwidth", parents=[common], help="optimal flat-band width")
    sub.add_parser("budget", parents=[common], help="link-budget design report")
    sub.add_parser("crosstalk", parents=[common], help="cross-talk power vs code length")
    sub.add_parser("figures", parents=[common], help="run every figure preset")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    plots = not args.no_plot
    try:
        if args.command == "figures":
            prepare_out(args.out, args.force)
            for command, preset in FIGURE_RUNS:
                name = preset or command
                dispatch(command, preset, args, prepare_out(args.out / name, True), plots)
        else:
            dispatch(args.command, getattr(args, "preset", None), args, prepare_out(args.out, args.force), plots)
    except (ConfigError, ValueError, ArithmeticError) as exc:
        print(f"error: {' '.join(str(exc).split())}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
