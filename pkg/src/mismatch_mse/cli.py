"""Configuration ingestion, presets, sweep orchestration, CSV/SVG emission.

One canonical JSON schema (documented in docs/schema.md) describes problem
instances, simulation runs, and parameter sweeps; validation is strict and
unknown keys are rejected.  Sweep output is deterministic: cells are keyed
by (param index, rate index) and the CSV bytes do not depend on the
parallelism level or evaluation order.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import ConfigError, MismatchMseError, ParseError, SchemaError
from .mse import (build_ep_chain, filter_mse, free_energy, mismatched_mse,
                  solve_glassy_system, LinearFilter, FilterKind)
from .rates import Phase, classify_phase, compute_rates
from .simulator import SimConfig, run_simulation
from .solvers import RootConfig
from .spectrum import (DEFAULT_GRID_SIZE, FrequencyResponse, ProblemInstance,
                       make_builtin_filter, omega_grid)

SWEEP_PARAMS = ("cutoff", "gain", "band_left", "zero_angle", "delay", "custom")
DEFAULT_OUTPUTS = ("rates", "phase", "mse")


# ---------------------------------------------------------------------------
# schema helpers
# ---------------------------------------------------------------------------

def _require_keys(obj: dict, required, optional, ctx: str):
    for key in obj:
        if key not in required and key not in optional:
            raise SchemaError(f"{ctx}.{key}", "unknown key")
    for key in required:
        if key not in obj:
            raise SchemaError(f"{ctx}.{key}", "missing required key")


def _positive_number(value, ctx: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool) \
            or not value > 0 or not math.isfinite(value):
        raise SchemaError(ctx, f"must be a positive finite number, got {value!r}")
    return float(value)


_FILTER_PARAM_KEYS = {
    "ideal_lpf": ({"cutoff"}, {"gain"}),
    "bandpass": ({"omega_left", "omega_right"}, {"gain"}),
    "multiband": ({"bands"}, {"gain"}),
    "fir_from_zeros": (set(), {"zeros", "zero_angles", "gain", "lead",
                           "normalize"}),
    "delayed_copy_of": ({"base", "delay"}, set()),
    "tabulated": ({"samples"}, set()),
}


def parse_filter_spec(spec, grid_size: int, ctx: str = "filter") -> FrequencyResponse:
    """Filter spec -> FrequencyResponse.  The string 'identity' is the
    all-pass unit-gain response."""
    if spec == "identity":
        return make_builtin_filter("ideal_lpf",
                                   {"cutoff": np.pi, "gain": 1.0}, grid_size)
    if not isinstance(spec, dict):
        raise SchemaError(ctx, f"expected an object or 'identity', got {spec!r}")
    _require_keys(spec, {"kind", "params"}, set(), ctx)
    kind = spec["kind"]
    if kind not in _FILTER_PARAM_KEYS:
        raise SchemaError(f"{ctx}.kind", f"unknown kind {kind!r}")
    required, optional = _FILTER_PARAM_KEYS[kind]
    params = dict(spec["params"])
    _require_keys(params, required, optional, f"{ctx}.params")
    if kind == "fir_from_zeros":
        if ("zeros" in params) == ("zero_angles" in params):
            raise SchemaError(f"{ctx}.params",
                              "need exactly one of zeros / zero_angles")
        if "zero_angles" in params:
            zeros = []
            for angle in params.pop("zero_angles"):
                zeros.append([math.cos(angle), math.sin(angle)])
                zeros.append([math.cos(angle), -math.sin(angle)])
            params["zeros"] = zeros
    if kind == "delayed_copy_of":
        params["base"] = parse_filter_spec(params["base"], grid_size,
                                           f"{ctx}.params.base")
    try:
        return make_builtin_filter(kind, params, grid_size)
    except MismatchMseError as exc:
        raise SchemaError(ctx, str(exc)) from exc


def parse_instance(cfg: dict, ctx: str = "instance",
                   grid_size: int | None = None) -> ProblemInstance:
    _require_keys(cfg, {"h_true", "h_assumed", "beta", "p_x"},
                  {"grid_size"}, ctx)
    n = grid_size if grid_size is not None \
        else int(cfg.get("grid_size", DEFAULT_GRID_SIZE))
    beta = _positive_number(cfg["beta"], f"{ctx}.beta")
    p_x = _positive_number(cfg["p_x"], f"{ctx}.p_x")
    h_true = parse_filter_spec(cfg["h_true"], n, f"{ctx}.h_true")
    h_assumed = parse_filter_spec(cfg["h_assumed"], n, f"{ctx}.h_assumed")
    return ProblemInstance(h_true=h_true, h_assumed=h_assumed,
                           beta=beta, p_x=p_x)


@dataclass(frozen=True)
class SweepSpec:
    """Declarative sweep: one template instance, one swept parameter."""
    instance_spec: dict
    param: str
    values: tuple
    rates: tuple
    outputs: tuple = DEFAULT_OUTPUTS
    grid_size: int = DEFAULT_GRID_SIZE
    name: str = "sweep"

    def __post_init__(self):
        if self.param not in SWEEP_PARAMS:
            raise SchemaError("sweep.param", f"expected one of {SWEEP_PARAMS}")
        if len(self.values) == 0:
            raise SchemaError("sweep.values", "empty grid")
        if len(self.rates) == 0:
            raise SchemaError("sweep.rates", "empty grid")
        if self.param != "custom":
            vals = [float(v) for v in self.values]
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise SchemaError("sweep.values", "must be strictly increasing")
        rates = [float(r) for r in self.rates]
        if any(b <= a for a, b in zip(rates, rates[1:])):
            raise SchemaError("sweep.rates", "must be strictly increasing")
        for out in self.outputs:
            if out not in ("rates", "phase", "mse", "free_energies"):
                raise SchemaError("sweep.outputs", f"unknown output {out!r}")

    def instance_at(self, value) -> ProblemInstance:
        spec = copy.deepcopy(self.instance_spec)
        target = spec["h_assumed"]
        if self.param == "custom":
            spec["h_assumed"] = value
        elif self.param == "cutoff":
            target["params"]["cutoff"] = float(value)
        elif self.param == "gain":
            target["params"]["gain"] = float(value)
        elif self.param == "band_left":
            width = target["params"]["omega_right"] \
                - target["params"]["omega_left"]
            target["params"]["omega_left"] = float(value)
            target["params"]["omega_right"] = float(value) + width
        elif self.param == "zero_angle":
            target["params"]["zero_angles"] = \
                [float(value)] + list(target["params"]["zero_angles"][1:])
        elif self.param == "delay":
            target["params"]["delay"] = int(value)
        return parse_instance(spec, "sweep.instance", self.grid_size)


@dataclass(frozen=True)
class SweepGrid:
    spec: SweepSpec
    cells: list = field(default_factory=list)   # cells[i][j]: value i, rate j
    metadata: dict = field(default_factory=dict)


def parse_sweep(cfg: dict, grid_size: int | None = None) -> SweepSpec:
    _require_keys(cfg, {"instance", "param", "values", "rates"},
                  {"outputs", "grid_size", "name"}, "sweep")
    rates = cfg["rates"]
    if isinstance(rates, dict):
        _require_keys(rates, {"min", "max", "count"}, {"spacing"},
                      "sweep.rates")
        lo = _positive_number(rates["min"], "sweep.rates.min")
        hi = _positive_number(rates["max"], "sweep.rates.max")
        count = int(rates["count"])
        if rates.get("spacing", "log") == "log":
            grid = np.geomspace(lo, hi, count)
        else:
            grid = np.linspace(lo, hi, count)
        rates = [float(r) for r in grid]
    n = grid_size if grid_size is not None \
        else int(cfg.get("grid_size", DEFAULT_GRID_SIZE))
    return SweepSpec(instance_spec=cfg["instance"], param=cfg["param"],
                     values=tuple(cfg["values"]), rates=tuple(rates),
                     outputs=tuple(cfg.get("outputs", DEFAULT_OUTPUTS)),
                     grid_size=n, name=cfg.get("name", "sweep"))


def parse_sim(cfg: dict, grid_size: int | None = None,
              seed: int | None = None) -> SimConfig:
    _require_keys(cfg, {"sim", "instance"}, set(), "config")
    sim = cfg["sim"]
    _require_keys(sim, {"n", "rate", "trials"},
                  {"codebooks", "seed", "max_elements", "keep_trials"}, "sim")
    inst = parse_instance(cfg["instance"], "instance", grid_size)
    if seed is None:
        env = os.environ.get("MMSE_SEED")
        seed = int(env) if env is not None else int(sim.get("seed", 0))
    try:
        return SimConfig(n=int(sim["n"]), rate=float(sim["rate"]), inst=inst,
                         trials=int(sim["trials"]),
                         codebooks=int(sim.get("codebooks", 1)), seed=seed,
                         max_elements=int(sim.get("max_elements", 2**26)),
                         keep_trials=bool(sim.get("keep_trials", False)))
    except MismatchMseError as exc:
        raise SchemaError("sim", str(exc)) from exc


def load_config(path: str, grid_size: int | None = None):
    """Parse a config file into ProblemInstance | SimConfig | SweepSpec."""
    try:
        with open(path) as fh:
            raw = fh.read()
        cfg = json.loads(raw)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise SchemaError("config", "top level must be an object")
    if "preset" in cfg:
        _require_keys(cfg, {"preset"}, {"grid_size"}, "config")
        n = grid_size if grid_size is not None \
            else int(cfg.get("grid_size", DEFAULT_GRID_SIZE))
        return preset_sweep(cfg["preset"], n)
    if "sweep" in cfg:
        _require_keys(cfg, {"sweep"}, set(), "config")
        return parse_sweep(cfg["sweep"], grid_size)
    if "sim" in cfg:
        return parse_sim(cfg, grid_size)
    return parse_instance(cfg, "instance", grid_size)


# ---------------------------------------------------------------------------
# presets: the four reference channel pairs
# ---------------------------------------------------------------------------

def _default_rate_grid():
    return [float(r) for r in np.geomspace(0.01, 1.2, 60)]


PRESET_DESCRIPTIONS = {
    "example1": "low-pass vs low-pass, sweep of the assumed cutoff",
    "example2": "two-band channel vs narrow bandpass, sweep of the band edge",
    "example3": "fourth-order FIR vs mismatched zero pair, sweep of the angle",
    "example4": "FIR channel vs delayed copy, sweep of the delay",
}


def preset_sweep(name: str, grid_size: int = DEFAULT_GRID_SIZE) -> SweepSpec:
    pi = math.pi
    if name == "example1":
        instance = {
            "h_true": {"kind": "ideal_lpf",
                       "params": {"cutoff": pi / 2, "gain": 1.0}},
            "h_assumed": {"kind": "ideal_lpf",
                          "params": {"cutoff": pi / 2, "gain": 1.0}},
            "beta": 1.0, "p_x": 1.0,
        }
        values = [j * pi / 20 for j in range(2, 19)]   # 0.1 pi .. 0.9 pi
        param = "cutoff"
    elif name == "example2":
        instance = {
            "h_true": {"kind": "multiband",
                       "params": {"bands": [[pi / 4, pi / 2],
                                            [3 * pi / 4, pi]], "gain": 1.0}},
            "h_assumed": {"kind": "bandpass",
                          "params": {"omega_left": 0.0,
                                     "omega_right": pi / 8, "gain": 1.0}},
            "beta": 1.0, "p_x": 1.0,
        }
        values = [j * pi / 16 for j in range(0, 15)]
        param = "band_left"
    elif name == "example3":
        instance = {
            "h_true": {"kind": "fir_from_zeros",
                       "params": {"zero_angles": [0.8 * pi, 0.8 * pi],
                                  "normalize": True}},
            "h_assumed": {"kind": "fir_from_zeros",
                          "params": {"zero_angles": [0.8 * pi, 0.8 * pi],
                                     "normalize": True}},
            "beta": 1.0, "p_x": 1.0,
        }
        values = [j * pi / 20 for j in range(1, 20)]   # 0.05 pi .. 0.95 pi
        param = "zero_angle"
    elif name == "example4":
        h = {"kind": "fir_from_zeros",
             "params": {"zero_angles": [0.8 * pi], "lead": 1,
                        "normalize": True}}
        instance = {
            "h_true": h,
            "h_assumed": {"kind": "delayed_copy_of",
                          "params": {"base": copy.deepcopy(h), "delay": 0}},
            "beta": 1.0, "p_x": 1.0,
        }
        values = list(range(0, 9))
        param = "delay"
        # the delay-1 column keeps a thin ordered band up to ~0.098; the
        # reference diagram's rate range sits above it, so start there
        rates = tuple(float(r) for r in np.geomspace(0.12, 1.2, 60))
        return SweepSpec(instance_spec=instance, param=param,
                         values=tuple(values), rates=rates,
                         outputs=DEFAULT_OUTPUTS, grid_size=grid_size,
                         name=name)
    else:
        raise SchemaError("preset", f"unknown preset {name!r}; "
                          f"known: {sorted(PRESET_DESCRIPTIONS)}")
    return SweepSpec(instance_spec=instance, param=param,
                     values=tuple(values), rates=tuple(_default_rate_grid()),
                     outputs=DEFAULT_OUTPUTS, grid_size=grid_size, name=name)


# ---------------------------------------------------------------------------
# sweep engine
# ---------------------------------------------------------------------------

def _sweep_column(spec: SweepSpec, value, cfg: RootConfig) -> list:
    """All cells for one swept value, warm-starting the glassy solve in R."""
    cells = []
    try:
        inst = spec.instance_at(value)
        rates = compute_rates(inst, cfg)
    except MismatchMseError as exc:
        return [{"param": value, "rate": r, "error": str(exc)}
                for r in spec.rates]
    want_mse = "mse" in spec.outputs
    want_fe = "free_energies" in spec.outputs
    xi1 = None
    for rate in spec.rates:
        cell = {"param": value, "rate": rate,
                "r_e": rates.r_e, "r_d": rates.r_d, "r_c": rates.r_c,
                "r_g": rates.r_g}
        try:
            label = classify_phase(inst, rate, rates)
            cell["phase"] = label.phase.value
            cell["boundary"] = label.boundary_flag
            glassy_sol = None
            if label.phase is Phase.GLASSY or (want_fe and rate <= rates.r_e):
                glassy_sol = solve_glassy_system(inst, rate, cfg)
            if want_mse:
                if label.phase is Phase.FERROMAGNETIC:
                    cell["mse"] = 0.0
                elif label.phase is Phase.GLASSY:
                    from .mse import build_eg_chain
                    filt = LinearFilter(build_eg_chain(inst, glassy_sol).xi2,
                                        FilterKind.XI2)
                    cell["mse"] = filter_mse(filt, inst)
                else:
                    if xi1 is None:
                        xi1 = LinearFilter(
                            build_ep_chain(inst, rates.gamma0).xi1,
                            FilterKind.XI1)
                    cell["mse"] = filter_mse(xi1, inst)
            if want_fe:
                cell["f_ferro"] = free_energy(inst, rate, "ferro", cfg)
                cell["f_error"] = (
                    -rate - inst.beta * glassy_sol.eps_s0
                    if rate <= rates.r_e
                    else free_energy(inst, rate, "para", cfg))
        except MismatchMseError as exc:
            cell["error"] = str(exc)
        cells.append(cell)
    return cells


def run_sweep(spec: SweepSpec, parallelism: int = 1,
              cfg: RootConfig = RootConfig()) -> SweepGrid:
    """Evaluate the grid; output is independent of the parallelism level."""
    if parallelism <= 1 or len(spec.values) == 1:
        columns = [_sweep_column(spec, v, cfg) for v in spec.values]
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            futures = [pool.submit(_sweep_column, spec, v, cfg)
                       for v in spec.values]
            columns = [f.result() for f in futures]
    metadata = {"name": spec.name, "param": spec.param,
                "grid_size": spec.grid_size, "version": __version__}
    return SweepGrid(spec=spec, cells=columns, metadata=metadata)


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    if x is None:
        return ""
    return f"{x:.12g}"


def emit_csv(grid: SweepGrid, path: str):
    lines = ["param,rate,phase,mse,r_e,r_d,r_c,r_g"]
    for column in grid.cells:
        for cell in column:
            if "error" in cell:
                lines.append(f"{_fmt(cell['param'])},{_fmt(cell['rate'])},"
                             f"ERR,,,,,")
                continue
            lines.append(",".join([
                _fmt(cell["param"]), _fmt(cell["rate"]), cell["phase"],
                _fmt(cell.get("mse")), _fmt(cell["r_e"]), _fmt(cell["r_d"]),
                _fmt(cell["r_c"]), _fmt(cell["r_g"]),
            ]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


_PHASE_RGB = {"F": (76, 114, 176), "G": (196, 78, 82), "P": (85, 168, 104),
              "ERR": (120, 120, 120)}


def _cell_color(phase: str, mse, mse_max: float) -> str:
    r, g, b = _PHASE_RGB.get(phase, (0, 0, 0))
    frac = 0.0 if (mse is None or mse_max <= 0) else min(mse / mse_max, 1.0)
    light = 0.75 * (1.0 - frac)
    mix = lambda c: int(round(c + (255 - c) * light))
    return f"#{mix(r):02x}{mix(g):02x}{mix(b):02x}"


def emit_plot(grid: SweepGrid, path: str, gnuplot_path: str | None = None):
    """Self-contained SVG heat map: phase as color class, MSE as luminance,
    threshold polylines overlaid.  Byte-stable for identical inputs."""
    spec = grid.spec
    ni, nj = len(spec.values), len(spec.rates)
    left, top, width, height = 60.0, 20.0, 720.0, 480.0
    cw, ch = width / ni, height / nj
    mse_max = 0.0
    for column in grid.cells:
        for cell in column:
            if cell.get("mse"):
                mse_max = max(mse_max, cell["mse"])

    def ypix(rate: float) -> float:
        # rate grids may be log spaced; place by index coordinate
        logs = np.log(np.asarray(spec.rates))
        pos = np.interp(math.log(max(rate, spec.rates[0] * 1e-9)),
                        logs, np.arange(nj))
        return top + height - (pos + 0.5) * ch

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" '
             f'width="{left + width + 40:.0f}" '
             f'height="{top + height + 60:.0f}">',
             f'<text x="{left:.1f}" y="{top + height + 40:.1f}" '
             f'font-size="13">{spec.name}: phase/MSE over '
             f'{spec.param} (x) and rate (y, log grid)</text>']
    for i, column in enumerate(grid.cells):
        for j, cell in enumerate(column):
            color = _cell_color(cell.get("phase", "ERR"), cell.get("mse"),
                                mse_max)
            x = left + i * cw
            y = top + height - (j + 1) * ch
            parts.append(f'<rect x="{x:.2f}" y="{y:.2f}" width="{cw:.2f}" '
                         f'height="{ch:.2f}" fill="{color}"/>')
    # threshold polylines: ferro boundary (solid) and r_e (dashed, r_d < 0)
    ferro_pts, re_pts = [], []
    for i, column in enumerate(grid.cells):
        head = column[0]
        if "error" in head:
            continue
        x = left + (i + 0.5) * cw
        boundary = head["r_c"] if head["r_d"] >= 0 else head["r_g"]
        if spec.rates[0] <= boundary <= spec.rates[-1]:
            ferro_pts.append(f"{x:.2f},{ypix(boundary):.2f}")
        if head["r_d"] < 0 and spec.rates[0] <= head["r_e"] <= spec.rates[-1]:
            re_pts.append(f"{x:.2f},{ypix(head['r_e']):.2f}")
    if len(ferro_pts) > 1:
        parts.append(f'<polyline points="{" ".join(ferro_pts)}" fill="none" '
                     f'stroke="black" stroke-width="1.5"/>')
    if len(re_pts) > 1:
        parts.append(f'<polyline points="{" ".join(re_pts)}" fill="none" '
                     f'stroke="black" stroke-width="1.5" '
                     f'stroke-dasharray="5,3"/>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
    if gnuplot_path is not None:
        csv_name = os.path.basename(path).rsplit(".", 1)[0] + ".csv"
        script = "\n".join([
            "set datafile separator comma",
            "set view map",
            "set logscale y",
            f'set xlabel "{spec.param}"',
            'set ylabel "rate"',
            f"splot '{csv_name}' using 1:2:4 with points pointtype 5 "
            "palette notitle",
        ])
        with open(gnuplot_path, "w") as fh:
            fh.write(script + "\n")


# ---------------------------------------------------------------------------
# command-line front end
# ---------------------------------------------------------------------------

def _rates_json(rates) -> dict:
    return {"gamma0": rates.gamma0, "r_e": rates.r_e, "r_d": rates.r_d,
            "r_c": rates.r_c, "r_g": rates.r_g, "eps_tilde": rates.eps_tilde,
            "alpha_tilde": list(rates.alpha_tilde)
            if rates.alpha_tilde else None}


def _cmd_rates(args, cfg: RootConfig) -> int:
    inst = load_config(args.config, args.grid_size)
    if not isinstance(inst, ProblemInstance):
        raise SchemaError("config", "rates needs a problem-instance config")
    rates = compute_rates(inst, cfg)
    out = _rates_json(rates)
    if args.rate is not None:
        label = classify_phase(inst, args.rate, rates)
        out["rate"] = args.rate
        out["phase"] = label.phase.value
        out["boundary"] = label.boundary_flag
    json.dump(out, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def _cmd_mse(args, cfg: RootConfig) -> int:
    inst = load_config(args.config, args.grid_size)
    if not isinstance(inst, ProblemInstance):
        raise SchemaError("config", "mse needs a problem-instance config")
    report = mismatched_mse(inst, args.rate, cfg)
    out = {"rate": args.rate, "phase": report.phase.phase.value,
           "boundary": report.phase.boundary_flag,
           "mse_per_symbol": report.mse_per_symbol,
           "rates": _rates_json(report.rates),
           "glassy": None}
    if report.glassy is not None:
        out["glassy"] = {"eps_s0": report.glassy.eps_s0,
                         "alpha1": report.glassy.alpha1,
                         "alpha2": report.glassy.alpha2,
                         "residuals": [float(r)
                                       for r in report.glassy.residuals]}
    if args.emit_filter:
        if report.filter is None:
            raise MismatchMseError(
                "no linear filter in the ferromagnetic phase; "
                "the estimator returns the codeword itself")
        w = omega_grid(inst.grid_size)
        with open(args.emit_filter, "w") as fh:
            fh.write("omega,re_xi,im_xi\n")
            for wj, xi in zip(w, report.filter.xi):
                fh.write(f"{wj:.12g},{xi.real:.12g},{xi.imag:.12g}\n")
    json.dump(out, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def _cmd_simulate(args, cfg: RootConfig) -> int:
    sim = load_config(args.config, args.grid_size)
    if not isinstance(sim, SimConfig):
        raise SchemaError("config", "simulate needs a sim config")
    if args.seed is not None:
        sim = SimConfig(n=sim.n, rate=sim.rate, inst=sim.inst,
                        trials=sim.trials, codebooks=sim.codebooks,
                        seed=args.seed, max_elements=sim.max_elements,
                        keep_trials=sim.keep_trials)
    if args.out:
        sim = SimConfig(n=sim.n, rate=sim.rate, inst=sim.inst,
                        trials=sim.trials, codebooks=sim.codebooks,
                        seed=sim.seed, max_elements=sim.max_elements,
                        keep_trials=True)
    result = run_simulation(sim)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("codebook_idx,trial_idx,sq_error_per_symbol,"
                     "log_partition_per_symbol\n")
            for c, t, err, lz in result.per_trial:
                fh.write(f"{c},{t},{err:.12g},{lz:.12g}\n")
    json.dump({
        "empirical_mse_per_symbol": result.empirical_mse_per_symbol,
        "mse_standard_error": result.mse_standard_error,
        "theory_mse_per_symbol": result.theory_mse_per_symbol,
        "empirical_log_partition_mean": result.empirical_log_partition_mean,
        "phase_predicted": result.phase_predicted.phase.value,
        "n": sim.n, "rate": sim.rate, "codebook_size": sim.codebook_size,
        "trials": sim.trials, "codebooks": sim.codebooks, "seed": sim.seed,
    }, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def _emit_sweep_outputs(grid: SweepGrid, args) -> int:
    if args.out:
        emit_csv(grid, args.out)
    if args.svg:
        emit_plot(grid, args.svg, args.gnuplot)
    elif args.gnuplot:
        raise SchemaError("gnuplot", "--gnuplot requires --svg")
    return 0


def _cmd_sweep(args, cfg: RootConfig) -> int:
    spec = load_config(args.config, args.grid_size)
    if not isinstance(spec, SweepSpec):
        raise SchemaError("config", "sweep needs a sweep or preset config")
    grid = run_sweep(spec, parallelism=args.parallelism, cfg=cfg)
    return _emit_sweep_outputs(grid, args)


def _cmd_phase_diagram(args, cfg: RootConfig) -> int:
    spec = preset_sweep(args.preset,
                        args.grid_size or DEFAULT_GRID_SIZE)
    grid = run_sweep(spec, parallelism=args.parallelism, cfg=cfg)
    return _emit_sweep_outputs(grid, args)


def _cmd_presets(args, cfg: RootConfig) -> int:
    if args.action != "list":
        raise SchemaError("presets", f"unknown action {args.action!r}")
    for name in sorted(PRESET_DESCRIPTIONS):
        sys.stdout.write(f"{name}: {PRESET_DESCRIPTIONS[name]}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mismatch-mse",
        description="critical rates, phase diagrams, asymptotic estimator "
                    "filters, and Monte-Carlo validation for codeword "
                    "estimation over Gaussian stationary channels")
    parser.add_argument("--grid-size", type=int, default=None,
                        help="override the frequency-grid size")
    parser.add_argument("--tol", type=float, default=1e-11,
                        help="solver absolute tolerance")
    parser.add_argument("--max-iters", type=int, default=200)
    parser.add_argument("--parallelism", type=int, default=1)
    parser.add_argument("--seed", type=int, default=None,
                        help="override the simulation seed")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rates", help="critical rates for one instance")
    p.add_argument("--config", required=True)
    p.add_argument("--rate", type=float, default=None)
    p.set_defaults(func=_cmd_rates)

    p = sub.add_parser("mse", help="asymptotic MSE report at one rate")
    p.add_argument("--config", required=True)
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--emit-filter", default=None)
    p.set_defaults(func=_cmd_mse)

    p = sub.add_parser("simulate", help="finite-n Monte-Carlo run")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="per-trial CSV path")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", help="evaluate a sweep config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="CSV path")
    p.add_argument("--svg", default=None)
    p.add_argument("--gnuplot", default=None)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("phase-diagram", help="run a named preset sweep")
    p.add_argument("--preset", required=True)
    p.add_argument("--out", default=None, help="CSV path")
    p.add_argument("--svg", default=None)
    p.add_argument("--gnuplot", default=None)
    p.set_defaults(func=_cmd_phase_diagram)

    p = sub.add_parser("presets", help="preset utilities")
    p.add_argument("action", choices=["list"])
    p.set_defaults(func=_cmd_presets)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RootConfig(abs_tol=args.tol, max_iters=args.max_iters)
    try:
        return args.func(args, cfg)
    except ConfigError as exc:
        json.dump({"error": "config", "detail": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    except MismatchMseError as exc:
        json.dump({"error": "numerical", "type": type(exc).__name__,
                   "detail": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
