"""Pinned harmonic chain: parameters, window states, dispersion and the stencil V.

Displacements are measured from the reference lattice, ``q_k = x_k - k a``.
A state holds a finite window ``[lo, hi]`` that always contains the forced
particle ``k = 0``; neighbours outside the window come from a
:class:`BoundaryPolicy`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

CLAMP_TO_EQUILIBRIUM = "clamp_to_equilibrium"
CLAMP_TO_ZERO = "clamp_to_zero"


class WindowError(ValueError):
    """Raised when a lattice window is malformed or misses a required site."""


@dataclass(frozen=True)
class LatticeParams:
    a: float = 1.0
    omega: float = 1.0
    omega0: float = 1.0
    f: float = 1.0

    def __post_init__(self):
        for name in ("a", "omega", "omega0"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and > 0, got {value!r}")
        if not math.isfinite(self.f):
            raise ValueError(f"f must be finite, got {self.f!r}")

    @property
    def omega_max(self) -> float:
        """Upper band edge sqrt(4 omega^2 + omega0^2)."""
        return math.sqrt(4.0 * self.omega**2 + self.omega0**2)

    def with_force(self, f: float) -> "LatticeParams":
        return LatticeParams(a=self.a, omega=self.omega, omega0=self.omega0, f=f)


@dataclass(frozen=True)
class LatticeState:
    """Displacements and velocities on sites ``lo..hi`` at time ``t``."""

    lo: int
    hi: int
    q: np.ndarray
    v: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        if not (self.lo <= 0 <= self.hi):
            raise WindowError(f"window [{self.lo}, {self.hi}] must contain site 0")
        q = np.array(self.q, dtype=float)
        v = np.array(self.v, dtype=float)
        n = self.hi - self.lo + 1
        if q.shape != (n,) or v.shape != (n,):
            raise WindowError(
                f"q and v need length {n} for window [{self.lo}, {self.hi}], "
                f"got {q.shape} and {v.shape}"
            )
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(v)) and math.isfinite(self.t)):
            raise ValueError("state entries must be finite")
        q.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "t", float(self.t))

    @classmethod
    def zeros(cls, lo: int, hi: int, t: float = 0.0) -> "LatticeState":
        n = hi - lo + 1
        return cls(lo, hi, np.zeros(n), np.zeros(n), t)

    @classmethod
    def symmetric(cls, half_width: int, q=None, v=None, t: float = 0.0) -> "LatticeState":
        n = 2 * half_width + 1
        q = np.zeros(n) if q is None else q
        v = np.zeros(n) if v is None else v
        return cls(-half_width, half_width, q, v, t)

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    @property
    def width(self) -> int:
        return self.hi - self.lo + 1

    def index(self, k: int) -> int:
        if not (self.lo <= k <= self.hi):
            raise IndexError(f"site {k} outside window [{self.lo}, {self.hi}]")
        return k - self.lo

    def replace(self, q=None, v=None, t=None) -> "LatticeState":
        return LatticeState(
            self.lo,
            self.hi,
            self.q if q is None else q,
            self.v if v is None else v,
            self.t if t is None else t,
        )


@dataclass(frozen=True)
class BoundaryPolicy:
    """How the two out-of-window neighbours ``q_{lo-1}`` and ``q_{hi+1}`` are filled."""

    kind: str = CLAMP_TO_ZERO
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if self.kind not in (CLAMP_TO_EQUILIBRIUM, CLAMP_TO_ZERO):
            raise ValueError(f"unknown boundary policy {self.kind!r}")

    @classmethod
    def default_for(cls, params: LatticeParams) -> "BoundaryPolicy":
        return cls(CLAMP_TO_EQUILIBRIUM if params.f != 0 else CLAMP_TO_ZERO)

    def ghosts(self, params: LatticeParams, lo: int, hi: int) -> tuple[float, float]:
        if self.kind == CLAMP_TO_ZERO or params.f == 0:
            return 0.0, 0.0
        key = (params, lo, hi)
        if key not in self._cache:
            from .equilibrium import xi_coefficient

            self._cache[key] = (xi_coefficient(params, lo - 1), xi_coefficient(params, hi + 1))
        return self._cache[key]


ZERO_BOUNDARY = BoundaryPolicy(CLAMP_TO_ZERO)


def dispersion(params: LatticeParams, phi):
    """Mode frequency sqrt(4 omega^2 sin^2(phi/2) + omega0^2); accepts scalars or arrays."""
    s = np.sin(np.asarray(phi, dtype=float) / 2.0)
    out = np.sqrt(4.0 * params.omega**2 * s * s + params.omega0**2)
    return float(out) if out.ndim == 0 else out


def group_speed(params: LatticeParams, phi):
    """dOmega/dphi = omega^2 sin(phi) / Omega(phi)."""
    phi = np.asarray(phi, dtype=float)
    return params.omega**2 * np.sin(phi) / dispersion(params, phi)


def _padded(q, ghosts):
    q = np.asarray(q, dtype=float)
    out = np.empty(q.size + 2)
    out[0] = ghosts[0]
    out[1:-1] = q
    out[-1] = ghosts[1]
    return out


def apply_V(params: LatticeParams, q, boundary=ZERO_BOUNDARY, lo: int | None = None) -> np.ndarray:
    """(V q)_k = (2 omega^2 + omega0^2) q_k - omega^2 (q_{k+1} + q_{k-1}).

    ``boundary`` is either a :class:`BoundaryPolicy` (then ``lo`` locates the
    window, defaulting to a window centred on 0) or an explicit pair of
    ghost values.
    """
    q = np.asarray(q, dtype=float)
    ghosts = _resolve_ghosts(params, q.size, boundary, lo)
    p = _padded(q, ghosts)
    w2 = params.omega**2
    return (2.0 * w2 + params.omega0**2) * p[1:-1] - w2 * (p[2:] + p[:-2])


def _resolve_ghosts(params, n, boundary, lo):
    if isinstance(boundary, BoundaryPolicy):
        if lo is None:
            lo = -(n // 2)
        return boundary.ghosts(params, lo, lo + n - 1)
    left, right = boundary
    return float(left), float(right)


def acceleration(params: LatticeParams, state: LatticeState, boundary=ZERO_BOUNDARY) -> np.ndarray:
    """Right-hand side omega^2 (q_{k+1} - 2 q_k + q_{k-1}) - omega0^2 q_k + f [k = 0]."""
    if params.f != 0 and not (state.lo <= 0 <= state.hi):
        raise WindowError("force site 0 is outside the window")
    acc = -apply_V(params, state.q, boundary, state.lo)
    acc[-state.lo] += params.f
    return acc


def convert_frame(params: LatticeParams, x, lo: int) -> np.ndarray:
    """Absolute positions x_k on sites lo.. to displacements q_k = x_k - k a."""
    x = np.asarray(x, dtype=float)
    return x - params.a * np.arange(lo, lo + x.size)


def positions(params: LatticeParams, q, lo: int) -> np.ndarray:
    """Inverse of :func:`convert_frame`."""
    q = np.asarray(q, dtype=float)
    return q + params.a * np.arange(lo, lo + q.size)
