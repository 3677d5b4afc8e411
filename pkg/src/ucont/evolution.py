"""Propagation of d_t u = (a+ib)(L u + V u) on periodic tensor grids.

Strang splitting: the constant-coefficient part (box-average of A) is an
exact Fourier multiplier; the variable-coefficient remainder plus the
potential is integrated in physical space (exact pointwise exponential
when the remainder is a pure potential, classical RK4 otherwise).  The
scheme is second order overall.  Closed-form complex-Gaussian flows serve
as oracles for the free, heat, and dissipative cases.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field as dc_field
import numpy as np
import sympy as sp

from .coefficients import CoefficientField
from .expressions import X_SYMBOLS
from .grids import Grid, check_resolved, l2_norm_sq, spectral_derivative


class BlowUpError(RuntimeError):
    """Trajectory norm grew beyond the configured guard factor."""


class StabilityError(RuntimeError):
    """Requested step count violates the explicit-stage stability budget."""


@dataclass(frozen=True)
class DissipationParams:
    """Coefficients of d_t u = (a+ib)(L+V)u; a >= 0, a^2+b^2 != 0."""

    a: float
    b: float

    def __post_init__(self):
        if self.a < 0:
            raise ValueError("dissipation a must be >= 0")
        if self.a ** 2 + self.b ** 2 == 0:
            raise ValueError("a^2 + b^2 must be nonzero")

    @property
    def zeta(self) -> complex:
        return complex(self.a, self.b)


SCHRODINGER = DissipationParams(0.0, 1.0)
HEAT = DissipationParams(1.0, 0.0)


@dataclass(frozen=True)
class WaveState:
    t: float
    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        if not np.all(np.isfinite(self.values.real)) or \
                not np.all(np.isfinite(self.values.imag)):
            raise ValueError("state contains non-finite values")


def mass(u: WaveState) -> float:
    """Trapezoidal L^2 norm squared on the periodic box."""
    return l2_norm_sq(u.values, u.grid)


@dataclass
class Trajectory:
    grid: Grid
    times: np.ndarray
    frames: np.ndarray            # (T, *space), complex
    meta: dict = dc_field(default_factory=dict)

    def state(self, i: int) -> WaveState:
        return WaveState(float(self.times[i]), self.frames[i], self.grid)

    @property
    def initial(self) -> WaveState:
        return self.state(0)

    @property
    def final(self) -> WaveState:
        return self.state(len(self.times) - 1)


# ---------------------------------------------------------------------------
# complex-Gaussian closed forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GaussianPacket:
    """amplitude * exp(-|x - center|^2 / (4 s)), Re s > 0."""

    s: complex
    center: tuple[float, ...] = (0.0,)
    amplitude: complex = 1.0

    def __post_init__(self):
        if not complex(self.s).real > 0:
            raise ValueError("Re s must be positive")

    @property
    def dim(self) -> int:
        return len(self.center)

    def modulus_rate(self) -> float:
        """A with |packet| = O(e^{-A |x|^2})."""
        return (1.0 / (4 * complex(self.s))).real

    def sample(self, grid: Grid) -> np.ndarray:
        r2 = sum((m - c) ** 2 for m, c in zip(grid.meshes, self.center))
        return self.amplitude * np.exp(-r2 / (4 * complex(self.s)))

    def flow(self, zeta: complex, t: float) -> "GaussianPacket":
        """Evolution under e^{t zeta Laplacian}: s -> s + zeta t with the
        dimensional amplitude factor."""
        s_new = complex(self.s) + zeta * t
        scale = (complex(self.s) / s_new) ** (self.dim / 2.0)
        return GaussianPacket(s_new, self.center, self.amplitude * scale)


def free_flow_closed_form(p: GaussianPacket, t: float) -> GaussianPacket:
    """Free propagator closed form: s -> s + i t, amplitude times
    (s/(s+it))^{n/2}; the modulus is again a Gaussian."""
    return p.flow(1j, t)


def linear_potential_closed_form(p: GaussianPacket, c: float, t: float,
                                 grid: Grid) -> np.ndarray:
    """Exact solution of d_t u = i(Lap u + c x1 u) from packet data: the free
    solution boosted by the accelerating frame, sampled on the grid."""
    free = p.flow(1j, t)
    shifted = GaussianPacket(free.s,
                             (free.center[0] + c * t ** 2, *free.center[1:]),
                             free.amplitude)
    vals = shifted.sample(grid)
    x1 = grid.meshes[0]
    phase = np.exp(1j * (c * t * x1 - c ** 2 * t ** 3 / 3.0))
    return phase * vals


# ---------------------------------------------------------------------------
# the split-step propagator
# ---------------------------------------------------------------------------

def _field_arrays(fld: CoefficientField, grid: Grid):
    n = grid.dim
    mesh = grid.meshes
    syms = X_SYMBOLS[:n]
    entries = []
    for k in range(n):
        row = []
        for j in range(n):
            fn = sp.lambdify(syms, fld.entry(k, j), modules="numpy")
            row.append(np.broadcast_to(np.asarray(fn(*mesh), dtype=float),
                                       grid.points).copy())
        entries.append(row)
    vfn = sp.lambdify(syms, fld.potential.sym, modules="numpy")
    v = np.broadcast_to(np.asarray(vfn(*mesh), dtype=float), grid.points).copy()
    return entries, v


def _kinetic_symbol(abar: np.ndarray, grid: Grid) -> np.ndarray:
    kaxes = [grid.wavenumbers(i) for i in range(grid.dim)]
    kmesh = np.meshgrid(*kaxes, indexing="ij")
    sym = np.zeros(grid.points)
    for k in range(grid.dim):
        for j in range(grid.dim):
            sym -= abar[k, j] * kmesh[k] * kmesh[j]
    return sym


def propagate(u0: WaveState, fld: CoefficientField, d: DissipationParams,
              t_span: tuple[float, float] = (0.0, 1.0), steps: int = 256,
              n_frames: int = 2, *, blowup_factor: float = 1e3,
              resolution_budget: float = 1e-10,
              check_stability: bool = True) -> Trajectory:
    """Second-order Strang trajectory of d_t u = (a+ib)(L+V)u.

    Frames are stored at n_frames uniformly spaced times (endpoints
    included); steps must be a multiple of n_frames - 1.
    """
    if d.a < 0:
        raise ValueError("dissipation a must be >= 0 for forward propagation")
    if n_frames < 2 or steps % (n_frames - 1) != 0:
        raise ValueError("steps must be a positive multiple of n_frames - 1")
    grid = u0.grid
    if resolution_budget is not None:
        check_resolved(u0.values, resolution_budget)

    entries, v = _field_arrays(fld, grid)
    abar = np.array([[entries[k][j].mean() for j in range(grid.dim)]
                     for k in range(grid.dim)])
    delta = [[entries[k][j] - abar[k, j] for j in range(grid.dim)]
             for k in range(grid.dim)]
    delta_max = max(float(np.max(np.abs(delta[k][j])))
                    for k in range(grid.dim) for j in range(grid.dim))
    pure_potential = delta_max < 1e-14

    t0, t1 = t_span
    dt = (t1 - t0) / steps
    zeta = d.zeta
    sym = _kinetic_symbol(abar, grid)
    half_kin = np.exp(zeta * sym * (dt / 2.0))

    if check_stability and not pure_potential:
        k2 = -sym / max(abar.diagonal().mean(), 1e-30)
        radius = abs(dt * zeta) * (delta_max * grid.dim * float(np.max(np.abs(k2)))
                                   + float(np.max(np.abs(v))))
        if radius > 2.7:
            raise StabilityError(
                f"explicit remainder stage unstable: |dt * spectrum| ~ {radius:.2f} "
                f"> 2.7; increase steps to >= {int(steps * radius / 2.5) + 1}")

    def remainder_rhs(w: np.ndarray) -> np.ndarray:
        out = v * w.astype(complex)
        grads = [spectral_derivative(w, grid, j, 1) for j in range(grid.dim)]
        for k in range(grid.dim):
            flux = sum(delta[k][j] * grads[j] for j in range(grid.dim))
            out += spectral_derivative(flux, grid, k, 1)
        return zeta * out

    if pure_potential:
        pot_step = np.exp(zeta * v * dt)

        def remainder_step(w: np.ndarray) -> np.ndarray:
            return w * pot_step
    else:
        def remainder_step(w: np.ndarray) -> np.ndarray:
            k1 = remainder_rhs(w)
            k2_ = remainder_rhs(w + 0.5 * dt * k1)
            k3 = remainder_rhs(w + 0.5 * dt * k2_)
            k4 = remainder_rhs(w + dt * k3)
            return w + (dt / 6.0) * (k1 + 2 * k2_ + 2 * k3 + k4)

    frames = np.empty((n_frames, *grid.points), dtype=complex)
    times = np.linspace(t0, t1, n_frames)
    frames[0] = u0.values.astype(complex)
    m0 = l2_norm_sq(frames[0], grid)
    stride = steps // (n_frames - 1)

    u = frames[0].copy()
    uhat_pending = None
    for step in range(steps):
        # merge adjacent half kinetic steps except around stored frames
        if uhat_pending is None:
            u = np.fft.ifftn(np.fft.fftn(u) * half_kin)
        else:
            u = np.fft.ifftn(uhat_pending * half_kin)
        u = remainder_step(u)
        uhat = np.fft.fftn(u) * half_kin
        if (step + 1) % stride == 0:
            u = np.fft.ifftn(uhat)
            uhat_pending = None
            idx = (step + 1) // stride
            frames[idx] = u
            if m0 > 0 and l2_norm_sq(u, grid) > blowup_factor * m0:
                raise BlowUpError(
                    f"norm exceeded {blowup_factor:.0e} x initial at t={times[idx]:.4f}")
        else:
            uhat_pending = uhat
    meta = {"a": d.a, "b": d.b, "steps": steps, "t_span": (t0, t1)}
    return Trajectory(grid, times, frames, meta)


def regularized_flow(traj: Trajectory, fld: CoefficientField, eps: float,
                     steps: int | None = None) -> Trajectory:
    """Trajectory of e^{t (eps + i)(L+V)} from the same initial state, on the
    same sample times as ``traj``."""
    if not eps > 0:
        raise ValueError("regularization strength eps must be > 0")
    steps = steps or traj.meta.get("steps", 256)
    n_frames = len(traj.times)
    steps = steps - steps % (n_frames - 1) if steps % (n_frames - 1) else steps
    return propagate(traj.initial, fld, DissipationParams(eps, 1.0),
                     (float(traj.times[0]), float(traj.times[-1])),
                     steps, n_frames)


# ---------------------------------------------------------------------------
# trajectory container file + CSV export
# ---------------------------------------------------------------------------

_MAGIC = b"UCTJ"


def write_checkpoint(path, traj: Trajectory) -> None:
    """Binary container: header (n, N_i, L_i, times) + little-endian
    complex64 frames."""
    with open(path, "wb") as fh:
        n = traj.grid.dim
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", 1, n))
        fh.write(struct.pack(f"<{n}I", *traj.grid.points))
        fh.write(struct.pack(f"<{n}d", *traj.grid.extents))
        fh.write(struct.pack("<I", len(traj.times)))
        fh.write(np.asarray(traj.times, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(traj.frames.astype("<c8")).tobytes())


def read_checkpoint(path) -> Trajectory:
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError("not a trajectory container")
        _, n = struct.unpack("<II", fh.read(8))
        points = struct.unpack(f"<{n}I", fh.read(4 * n))
        extents = struct.unpack(f"<{n}d", fh.read(8 * n))
        (ntimes,) = struct.unpack("<I", fh.read(4))
        times = np.frombuffer(fh.read(8 * ntimes), dtype="<f8").copy()
        grid = Grid(tuple(extents), tuple(points))
        count = ntimes * int(np.prod(points))
        frames = np.frombuffer(fh.read(8 * count), dtype="<c8").astype(complex)
        frames = frames.reshape((ntimes, *points))
    return Trajectory(grid, times, frames)
