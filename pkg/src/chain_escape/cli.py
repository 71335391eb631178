"""Command-line front end.

    chain-escape equilibrium
    chain-escape evolve --method verlet --t-end 50 --format json -o state.json
    chain-escape escape --ic zero
    chain-escape asymptotics --f 0 --bump-height 1 --times 25,50,100

Settings come from built-in defaults, then an optional ``--config`` file of
``key=value`` lines, then command-line flags.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import residual_scan
from .energy import escape_series, particle_energies
from .equilibrium import xi_profile
from .integrator import StabilityError, Trajectory, default_dt, evolve_verlet
from .model import BoundaryPolicy, LatticeParams, LatticeState, apply_V
from .spectral import spectral_trajectory

log = logging.getLogger("chain_escape")

SUBCOMMANDS = ("equilibrium", "evolve", "energy-scan", "asymptotics", "escape")
COLUMNS = {
    "equilibrium": ("k", "xi", "residual"),
    "evolve": ("t", "k", "q", "v"),
    "energy-scan": ("t", "k", "T_k", "U_k", "H_k"),
    "escape": ("t", "H_window", "tail", "H_total", "H_hom"),
    "asymptotics": ("t", "zeta_exact", "zeta_pred", "scaled_residual"),
}


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    params: LatticeParams = field(default_factory=LatticeParams)
    ic: str = "zero"
    state: str | None = None
    bump_site: int = 0
    bump_height: float = 0.0
    method: str = "spectral"
    half_width: int = 512
    t_end: float = 200.0
    dt: float | None = None
    stride: int = 100
    window_N: int = 10
    nodes: int | None = None
    site: int = 0
    times: tuple[float, ...] = (25.0, 50.0, 100.0, 200.0, 400.0)
    output: str = "-"
    format: str = "csv"

    @property
    def step(self) -> float:
        return default_dt(self.params) if self.dt is None else self.dt


# key -> (parser, owner); owner "params" keys go into LatticeParams
_KEYS = {
    "omega": (float, "params"),
    "omega0": (float, "params"),
    "f": (float, "params"),
    "a": (float, "params"),
    "ic": (str, "run"),
    "state": (str, "run"),
    "bump_site": (int, "run"),
    "bump_height": (float, "run"),
    "method": (str, "run"),
    "half_width": (int, "run"),
    "t_end": (float, "run"),
    "dt": (float, "run"),
    "stride": (int, "run"),
    "window_N": (int, "run"),
    "nodes": (int, "run"),
    "site": (int, "run"),
    "times": (lambda s: tuple(float(x) for x in s.split(",") if x.strip()), "run"),
    "output": (str, "run"),
    "format": (str, "run"),
}


def read_config_file(path) -> dict:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


EVOLVING = ("evolve", "energy-scan", "escape")


def build_config(values: dict, command: str | None = None) -> RunConfig:
    """Turn raw string/typed settings into a validated :class:`RunConfig`."""
    base = RunConfig()
    p = asdict(base.params)
    run = {f.name: getattr(base, f.name) for f in fields(RunConfig) if f.name != "params"}
    for key, value in values.items():
        if key not in _KEYS:
            raise UsageError(f"unknown key {key!r}")
        conv, owner = _KEYS[key]
        try:
            parsed = conv(value) if isinstance(value, str) else value
        except ValueError as exc:
            raise UsageError(f"bad value for {key}: {value!r}") from exc
        (p if owner == "params" else run)[key] = parsed
    try:
        params = LatticeParams(**p)
    except ValueError as exc:
        raise UsageError(f"invariant a, omega, omega0 > 0 violated: {exc}") from exc
    cfg = RunConfig(params=params, **run)
    validate(cfg, command)
    return cfg


def validate(cfg: RunConfig, command: str | None = None) -> None:
    """Check the run invariants; the padding rule only binds time-evolving commands."""
    if cfg.ic not in ("zero", "equilibrium", "file"):
        raise UsageError(f"ic must be zero, equilibrium or file, got {cfg.ic!r}")
    if cfg.ic == "file" and not cfg.state:
        raise UsageError("ic=file requires --state PATH")
    if cfg.method not in ("spectral", "verlet"):
        raise UsageError(f"method must be spectral or verlet, got {cfg.method!r}")
    if cfg.format not in ("csv", "json"):
        raise UsageError(f"format must be csv or json, got {cfg.format!r}")
    if cfg.t_end < 0 or not math.isfinite(cfg.t_end):
        raise UsageError("t_end must be finite and >= 0")
    if cfg.stride < 1:
        raise UsageError("stride must be >= 1")
    if cfg.window_N < 0:
        raise UsageError("window_N must be >= 0")
    limit = 2.0 / cfg.params.omega_max
    if cfg.dt is not None and not (0 < cfg.dt < limit):
        raise UsageError(f"invariant 0 < dt < 2/Omega_max = {limit!r} violated (dt={cfg.dt!r})")
    need = cfg.window_N + math.ceil(cfg.params.omega * cfg.t_end) + 8
    if (command is None or command in EVOLVING) and cfg.ic != "file" and cfg.half_width < need:
        raise UsageError(
            f"invariant half_width >= window_N + ceil(omega*t_end) + 8 = {need} violated "
            f"(half_width={cfg.half_width})"
        )
    if cfg.ic != "file" and abs(cfg.bump_site) > cfg.half_width:
        raise UsageError("bump_site outside the window")


def parse_config(argv=None) -> tuple[str, RunConfig]:
    parser = build_parser()
    ns = parser.parse_args(argv)
    values = {}
    if ns.config:
        values.update(read_config_file(ns.config))
    for key in _KEYS:
        flag = getattr(ns, key, None)
        if flag is not None:
            values[key] = flag
    return ns.command, build_config(values, ns.command)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="file of key=value lines; flags override it")
    g = common.add_argument_group("chain")
    g.add_argument("--omega", type=float, help="coupling frequency (default 1)")
    g.add_argument("--omega0", type=float, help="pinning frequency (default 1)")
    g.add_argument("--f", type=float, help="force on particle 0 (default 1)")
    g.add_argument("--a", type=float, help="lattice spacing (default 1)")
    g = common.add_argument_group("initial data")
    g.add_argument("--ic", choices=("zero", "equilibrium", "file"), help="default zero")
    g.add_argument("--state", help="JSON state file for --ic file")
    g.add_argument("--bump-site", dest="bump_site", type=int, help="site of an added displacement")
    g.add_argument("--bump-height", dest="bump_height", type=float, help="added displacement (default 0)")
    g = common.add_argument_group("run")
    g.add_argument("--method", choices=("spectral", "verlet"), help="default spectral")
    g.add_argument("--half-width", dest="half_width", type=int, help="window half-width (default 512)")
    g.add_argument("--t-end", dest="t_end", type=float, help="elapsed time (default 200)")
    g.add_argument("--dt", type=float, help="Verlet step, also sets sample spacing (default 0.1/Omega_max)")
    g.add_argument("--stride", type=int, help="steps between samples (default 100)")
    g.add_argument("--window-n", "--window-N", dest="window_N", type=int, help="escape window half-width (default 10)")
    g.add_argument("--nodes", type=int, help="spectral node count M (default: automatic power of two)")
    g.add_argument("--site", type=int, help="site k for asymptotics (default 0)")
    g.add_argument("--times", help="comma-separated scan times for asymptotics")
    g = common.add_argument_group("output")
    g.add_argument("-o", "--output", help="output path, '-' for stdout (default)")
    g.add_argument("--format", choices=("csv", "json"), help="default csv")

    parser = argparse.ArgumentParser(prog="chain-escape", description=__doc__.split("\n")[0], allow_abbrev=False)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], allow_abbrev=False)
    return parser


# -- state files -----------------------------------------------------------


def state_to_json(state: LatticeState, params: LatticeParams) -> dict:
    return {
        "lo": state.lo,
        "hi": state.hi,
        "t": state.t,
        "q": state.q.tolist(),
        "v": state.v.tolist(),
        "params": asdict(params),
    }


def load_state(path) -> LatticeState:
    data = json.loads(Path(path).read_text())
    missing = {"lo", "hi", "t", "q", "v"} - data.keys()
    if missing:
        raise ValueError(f"state file {path} lacks {sorted(missing)}")
    return LatticeState(int(data["lo"]), int(data["hi"]), data["q"], data["v"], float(data["t"]))


def initial_state(cfg: RunConfig) -> LatticeState:
    if cfg.ic == "file":
        state = load_state(cfg.state)
    elif cfg.ic == "equilibrium":
        prof = xi_profile(cfg.params, -cfg.half_width, cfg.half_width)
        state = LatticeState.symmetric(cfg.half_width, q=prof.xi)
    else:
        state = LatticeState.symmetric(cfg.half_width)
    if cfg.bump_height:
        q = state.q.copy()
        q[state.index(cfg.bump_site)] += cfg.bump_height
        state = state.replace(q=q)
    return state


# -- runs ------------------------------------------------------------------


def trajectory(cfg: RunConfig, initial: LatticeState) -> Trajectory:
    if cfg.method == "verlet":
        try:
            return evolve_verlet(cfg.params, initial, cfg.t_end, cfg.step, cfg.stride, observe=cfg.window_N)
        except StabilityError as exc:
            raise UsageError(str(exc)) from exc
    spacing = cfg.step * cfg.stride
    n = max(1, math.ceil(cfg.t_end / spacing - 1e-9))
    times = [0.0] if cfg.t_end == 0 else [cfg.t_end * j / n for j in range(n + 1)]
    return spectral_trajectory(cfg.params, initial, times, cfg.nodes)


def run_equilibrium(cfg):
    prof = xi_profile(cfg.params, -cfg.half_width, cfg.half_width)
    ghosts = BoundaryPolicy.default_for(cfg.params).ghosts(cfg.params, prof.lo, prof.hi)
    res = apply_V(cfg.params, prof.xi, ghosts)
    res[-prof.lo] -= cfg.params.f
    return [(int(k), x, r) for k, x, r in zip(prof.sites, prof.xi.tolist(), res.tolist())]


def run_evolve(cfg):
    traj = trajectory(cfg, initial_state(cfg))
    for w in traj.warnings:
        log.warning(w)
    if cfg.format == "json":
        return state_to_json(traj.final, cfg.params)
    rows = []
    for s in traj.samples:
        rows.extend((s.t, int(k), q, v) for k, q, v in zip(s.sites, s.q.tolist(), s.v.tolist()))
    return rows


def run_energy_scan(cfg):
    traj = trajectory(cfg, initial_state(cfg))
    N = cfg.window_N
    rows = []
    for s in traj.samples:
        T, U, H = particle_energies(cfg.params, s, traj.boundary)
        sl = slice(s.index(-N), s.index(N) + 1)
        rows.extend(
            (s.t, int(k), a, b, c)
            for k, a, b, c in zip(s.sites[sl], T[sl].tolist(), U[sl].tolist(), H[sl].tolist())
        )
    return rows


def run_escape(cfg):
    series = escape_series(cfg.params, trajectory(cfg, initial_state(cfg)), cfg.window_N)
    for w in series.warnings:
        log.warning(w)
    return list(
        zip(
            series.t.tolist(),
            series.H_window.tolist(),
            series.tail.tolist(),
            series.H_total.tolist(),
            series.H_hom.tolist(),
        )
    )


def run_asymptotics(cfg):
    scan = residual_scan(cfg.params, initial_state(cfg), cfg.site, cfg.times, cfg.nodes)
    return [(r.t, r.exact, r.predicted, float(r.scaled_residual)) for r in scan]


RUNNERS = {
    "equilibrium": run_equilibrium,
    "evolve": run_evolve,
    "energy-scan": run_energy_scan,
    "escape": run_escape,
    "asymptotics": run_asymptotics,
}


# -- output ----------------------------------------------------------------


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def render(command: str, result, output_format: str) -> str:
    if output_format == "json":
        if isinstance(result, dict):
            return json.dumps(result) + "\n"
        payload = {
            "schema": f"chain-escape v1 {command}",
            "columns": list(COLUMNS[command]),
            "rows": [list(r) for r in result],
        }
        return json.dumps(payload) + "\n"
    lines = [f"# chain-escape v1 {command}", ",".join(COLUMNS[command])]
    lines.extend(",".join(fmt(x) for x in row) for row in result)
    return "\n".join(lines) + "\n"


def write_atomic(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(command: str, cfg: RunConfig) -> int:
    result = RUNNERS[command](cfg)
    write_atomic(cfg.output, render(command, result, cfg.format))
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="chain-escape: warning: %(message)s")
    try:
        command, cfg = parse_config(argv)
    except UsageError as exc:
        print(f"chain-escape: error: usage: {exc}", file=sys.stderr)
        return 2
    try:
        return run(command, cfg)
    except UsageError as exc:
        print(f"chain-escape: error: usage: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"chain-escape: error: {command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
