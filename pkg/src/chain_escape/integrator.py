"""Velocity-Verlet evolution of a truncated chain."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import (
    CLAMP_TO_EQUILIBRIUM,
    CLAMP_TO_ZERO,
    BoundaryPolicy,
    LatticeParams,
    LatticeState,
    WindowError,
    apply_V,
)

__all__ = [
    "BoundaryPolicy",
    "CLAMP_TO_EQUILIBRIUM",
    "CLAMP_TO_ZERO",
    "Trajectory",
    "StabilityError",
    "default_dt",
    "max_group_speed",
    "verlet_step",
    "evolve_verlet",
]

PADDING_MARGIN = 8


class StabilityError(ValueError):
    pass


@dataclass(frozen=True)
class Trajectory:
    params: LatticeParams
    samples: tuple[LatticeState, ...]
    dt: float | None
    boundary: BoundaryPolicy
    warnings: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not self.samples:
            raise ValueError("trajectory needs at least one sample")
        first = self.samples[0]
        times = [s.t for s in self.samples]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("sample times must be strictly increasing")
        if any((s.lo, s.hi) != (first.lo, first.hi) for s in self.samples):
            raise WindowError("all samples must share one window")

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    @property
    def initial(self) -> LatticeState:
        return self.samples[0]

    @property
    def final(self) -> LatticeState:
        return self.samples[-1]


def default_dt(params: LatticeParams) -> float:
    return 0.1 / params.omega_max


def max_group_speed(params: LatticeParams) -> float:
    """Bound on |dOmega/dphi| in sites per unit time; equals omega."""
    return params.omega


def padding_warnings(params, lo, hi, t_span, observe=0):
    need = observe + math.ceil(max_group_speed(params) * t_span) + PADDING_MARGIN
    have = min(-lo, hi)
    if have < need:
        return (
            f"window half-width {have} below {need} needed to keep boundary "
            f"reflections out of |k| <= {observe} up to elapsed time {t_span:g}",
        )
    return ()


def _check_dt(params, dt):
    limit = 2.0 / params.omega_max
    if not (0 < dt < limit):
        raise StabilityError(f"dt={dt!r} outside stability range (0, {limit!r})")


def verlet_step(params: LatticeParams, state: LatticeState, dt: float, boundary=None) -> LatticeState:
    """One kick-drift-kick step."""
    _check_dt(params, dt)
    if boundary is None:
        boundary = BoundaryPolicy.default_for(params)
    q, v = _kdk(params, state.q.copy(), state.v.copy(), state.lo, dt, 1, boundary)
    return state.replace(q=q, v=v, t=state.t + dt)


def _kdk(params, q, v, lo, dt, nsteps, boundary):
    ghosts = boundary.ghosts(params, lo, lo + q.size - 1) if isinstance(boundary, BoundaryPolicy) else boundary
    i0 = -lo
    f = params.f
    half = 0.5 * dt

    def acc(x):
        a = -apply_V(params, x, ghosts)
        a[i0] += f
        return a

    a = acc(q)
    for _ in range(nsteps):
        v += half * a
        q += dt * v
        a = acc(q)
        v += half * a
    return q, v


def evolve_verlet(
    params: LatticeParams,
    initial: LatticeState,
    t_end: float,
    dt: float | None = None,
    stride: int = 1,
    boundary: BoundaryPolicy | None = None,
    observe: int = 0,
) -> Trajectory:
    """Integrate for ``t_end`` time units past ``initial.t``.

    Samples are taken every ``stride`` steps plus the last step. The step
    count is ``ceil(t_end / dt)`` with ``dt`` shrunk so the run lands on
    ``t_end`` exactly.
    """
    if dt is None:
        dt = default_dt(params)
    _check_dt(params, dt)
    if t_end < 0:
        raise ValueError("t_end must be >= 0")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if boundary is None:
        boundary = BoundaryPolicy.default_for(params)
    warnings = padding_warnings(params, initial.lo, initial.hi, t_end, observe)
    if t_end == 0:
        return Trajectory(params, (initial,), dt, boundary, warnings)

    nsteps = math.ceil(t_end / dt - 1e-9)
    dt = t_end / nsteps
    ghosts = boundary.ghosts(params, initial.lo, initial.hi)
    q = initial.q.copy()
    v = initial.v.copy()
    samples = [initial]
    done = 0
    while done < nsteps:
        n = min(stride, nsteps - done)
        q, v = _kdk(params, q, v, initial.lo, dt, n, ghosts)
        done += n
        t = initial.t + t_end if done == nsteps else initial.t + done * dt
        samples.append(LatticeState(initial.lo, initial.hi, q.copy(), v.copy(), t))
    return Trajectory(params, tuple(samples), dt, boundary, warnings)
