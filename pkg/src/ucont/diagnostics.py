"""Weighted quantities along trajectories: the exponential-weight energies
H(t), their log-convexity and derivative bounds, Gaussian decay schedules of
the dissipative flows, super-Gaussian persistence thresholds, and the
annulus mass profiles whose decay exponent separates the quadratic from the
cubic lower-bound regime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .coefficients import CoefficientField
from .evolution import DissipationParams, Trajectory, WaveState
from .grids import Grid, spectral_derivative, spectral_gradient


class BoundaryMassError(RuntimeError):
    """The weighted integrand is not negligible at the box boundary."""


def _weight_array(grid: Grid, beta: float, alpha: float) -> np.ndarray:
    r2 = grid.radius_sq
    return np.exp(2.0 * beta * r2 ** alpha)


def _boundary_fraction(values: np.ndarray) -> float:
    peak = float(np.max(values))
    if peak == 0.0:
        return 0.0
    worst = 0.0
    for ax in range(values.ndim):
        sl0 = [slice(None)] * values.ndim
        sl0[ax] = 0
        worst = max(worst, float(np.max(values[tuple(sl0)])))
    return worst / peak


def weighted_norm(u: WaveState, beta: float, alpha: float = 1.0, *,
                  strict: bool = True, boundary_budget: float = 1e-12) -> float:
    """int e^{2 beta |x|^{2 alpha}} |u|^2 dx on the box.

    With ``strict`` the weighted integrand must be below ``boundary_budget``
    (relative to its peak) on the box boundary, otherwise the box does not
    faithfully represent the whole-space integral.
    """
    integrand = _weight_array(u.grid, beta, alpha) * np.abs(u.values) ** 2
    if strict:
        frac = _boundary_fraction(integrand)
        if frac > boundary_budget:
            raise BoundaryMassError(
                f"weighted integrand boundary/peak fraction {frac:.2e} exceeds "
                f"{boundary_budget:.1e}; enlarge the box or reduce beta")
    return float(integrand.sum() * u.grid.cell_volume)


# ---------------------------------------------------------------------------
# log-convexity of H(t)
# ---------------------------------------------------------------------------

def _spatial_split_apply(fld: CoefficientField, beta: float, grid: Grid,
                         f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(S f, A f) for the fixed-time split of e^{beta|x|^2} L e^{-beta|x|^2},
    applied in divergence/antisymmetrized form (discretely exact adjoints)."""
    import sympy as sp
    from .expressions import X_SYMBOLS
    n = grid.dim
    mesh = grid.meshes
    syms = X_SYMBOLS[:n]
    a_vals = [[np.broadcast_to(np.asarray(
        sp.lambdify(syms, fld.entry(k, j), modules="numpy")(*mesh), dtype=float),
        grid.points) for j in range(n)] for k in range(n)]
    gphi = [2.0 * beta * mesh[i] for i in range(n)]

    grads = [spectral_derivative(f, grid, j, 1) for j in range(n)]
    sf = np.zeros_like(f, dtype=complex)
    for k in range(n):
        flux = sum(a_vals[k][j] * grads[j] for j in range(n))
        sf += spectral_derivative(flux, grid, k, 1)
    sf += sum(gphi[k] * gphi[j] * a_vals[k][j] for k in range(n) for j in range(n)) * f

    af = np.zeros_like(f, dtype=complex)
    for m in range(n):
        c = sum(a_vals[m][l] * gphi[l] for l in range(n))
        af -= c * spectral_derivative(f, grid, m, 1)
        af -= spectral_derivative(c * f, grid, m, 1)
    return sf, af


@dataclass
class ConvexityTrace:
    times: np.ndarray
    H: np.ndarray
    D: np.ndarray
    N: np.ndarray
    beta: float
    M1: float
    M2: float
    C_used: float
    max_interp_ratio_c1: float       # with C = 1, recorded separately
    max_interp_ratio: float          # with the configured C
    min_d2_logH: float
    violation: bool
    vacuous: bool = False

    def d2_logH(self) -> np.ndarray:
        dt = self.times[1] - self.times[0]
        logH = np.log(self.H)
        return (logH[2:] - 2 * logH[1:-1] + logH[:-2]) / dt ** 2


def logconvexity_check(traj: Trajectory, beta: float, M1: float,
                       fld: CoefficientField | None = None,
                       C: float = 1.0 + 1e-6, *, strict: bool = True,
                       boundary_budget: float = 1e-12) -> ConvexityTrace:
    """Weighted-energy trace with the interpolation-bound and discrete
    second-difference diagnostics.

    The bound checked is H(t) <= C e^{M1^2} H(0)^{1-t} H(1)^t; the max ratio
    with C = 1 is recorded separately.  D(t) = <(aS + ibA) f, f> is computed
    when the coefficient field is supplied.
    """
    grid = traj.grid
    times = np.asarray(traj.times, dtype=float)
    H = np.array([weighted_norm(traj.state(i), beta, strict=strict,
                                boundary_budget=boundary_budget)
                  for i in range(len(times))])
    vacuous = bool(H[0] <= 0.0 or H[-1] <= 0.0)

    D = np.zeros_like(H)
    if fld is not None:
        a = float(traj.meta.get("a", 0.0))
        b = float(traj.meta.get("b", 1.0))
        w = _weight_array(grid, beta, 1.0) ** 0.5
        for i in range(len(times)):
            f = w * traj.frames[i]
            sf, af = _spatial_split_apply(fld, beta, grid, f)
            val = np.sum((a * sf + 1j * b * af) * np.conj(f)) * grid.cell_volume
            D[i] = float(val.real)
    with np.errstate(divide="ignore", invalid="ignore"):
        N = np.where(H > 0, D / H, 0.0)

    if vacuous:
        return ConvexityTrace(times, H, D, N, beta, M1, 0.0, C,
                              math.inf, math.inf, -math.inf, False, True)

    tt = (times - times[0]) / (times[-1] - times[0])
    interp = H[0] ** (1 - tt) * H[-1] ** tt
    ratios_c1 = H / (math.exp(M1 ** 2) * interp)
    max_c1 = float(np.max(ratios_c1))
    max_conf = float(np.max(ratios_c1 / C))
    dt = tt[1] - tt[0]
    logH = np.log(H)
    d2 = (logH[2:] - 2 * logH[1:-1] + logH[:-2]) / dt ** 2
    return ConvexityTrace(times, H, D, N, beta, M1, 0.0, C, max_c1, max_conf,
                          float(np.min(d2)) if len(d2) else math.inf,
                          bool(max_conf > 1.0), False)


def derivative_bound_check(traj: Trajectory, beta: float, M1: float = 0.0,
                           C: float = 1.0, *, strict: bool = True) -> float:
    """Ratio of the time-weighted gradient/moment energy to the endpoint
    bound:

        [beta ||sqrt(t(1-t)) e^{b|x|^2} grad u||^2
         + beta^3 ||sqrt(t(1-t)) e^{b|x|^2} x u||^2]
        / [C e^{M1^2} (H(0) + H(1))]
    """
    grid = traj.grid
    times = np.asarray(traj.times, dtype=float)
    w2 = _weight_array(grid, beta, 1.0)
    if strict:
        for i in (0, len(times) - 1):
            weighted_norm(traj.state(i), beta, strict=True)
    rad2 = grid.radius_sq
    vals = np.empty_like(times)
    for i in range(len(times)):
        u = traj.frames[i]
        grads = spectral_gradient(u, grid)
        g2 = sum(np.abs(g) ** 2 for g in grads)
        integ = (beta * g2 + beta ** 3 * rad2 * np.abs(u) ** 2) * w2
        vals[i] = float(integ.sum() * grid.cell_volume) * times[i] * (1 - times[i])
    lhs = float(np.trapezoid(vals, times))
    H0 = weighted_norm(traj.state(0), beta, strict=strict)
    H1 = weighted_norm(traj.state(len(times) - 1), beta, strict=strict)
    rhs = C * math.exp(M1 ** 2) * (H0 + H1)
    return lhs / rhs


# ---------------------------------------------------------------------------
# Gaussian decay schedule of the dissipative flow
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecaySchedule:
    gamma: float
    times: np.ndarray
    alphas: np.ndarray
    params: dict
    degenerate: bool = False


def gaussian_decay_schedule(gamma: float, d: DissipationParams, lam: float,
                            Lam: float, normA: float, C_dim: float = 1.0,
                            times: np.ndarray | None = None) -> DecaySchedule:
    """Maintained Gaussian rate of the dissipative flow:

        alpha(t) = gamma lam a / (lam a + 4 gamma (lam a^2 Lam
                                                   + 4 b^2 normA^2 C_dim) t)

    Degenerate for a = 0 (no maintained rate for t > 0).
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    ts = np.linspace(0.0, 1.0, 65) if times is None else np.asarray(times, float)
    params = {"a": d.a, "b": d.b, "lam": lam, "Lam": Lam, "normA": normA,
              "C_dim": C_dim}
    if d.a == 0.0:
        alphas = np.where(ts == 0.0, gamma, 0.0)
        return DecaySchedule(gamma, ts, alphas, params, True)
    denom = lam * d.a + 4 * gamma * (lam * d.a ** 2 * Lam
                                     + 4 * d.b ** 2 * normA ** 2 * C_dim) * ts
    return DecaySchedule(gamma, ts, gamma * lam * d.a / denom, params, False)


def decay_schedule_companion(traj: Trajectory, schedule: DecaySchedule,
                             v_bound: float = 0.0, *, strict: bool = False
                             ) -> np.ndarray:
    """Margins of the maintained-decay bound along the trajectory:

        ||e^{alpha(t)|x|^2} u(t)|| <= e^{t v_bound} ||e^{gamma |x|^2} u(0)||

    returned as bound/actual per sample (>= 1 means the bound holds).  The
    schedule is typically critical (equality for the exact heat kernel), so
    the boundary-mass check is relaxed by default and the comparison is made
    on the common box.
    """
    ts = np.asarray(traj.times, dtype=float)
    alphas = np.interp(ts, schedule.times, schedule.alphas)
    rhs0 = math.sqrt(weighted_norm(traj.initial, schedule.gamma, strict=strict))
    margins = np.empty_like(ts)
    for i, (t, al) in enumerate(zip(ts, alphas)):
        lhs = math.sqrt(weighted_norm(traj.state(i), al, strict=strict))
        margins[i] = math.exp(t * v_bound) * rhs0 / max(lhs, 1e-300)
    return margins


# ---------------------------------------------------------------------------
# persistence of super-Gaussian decay
# ---------------------------------------------------------------------------

def persistence_threshold(beta0: float, alpha: float) -> float:
    """kappa_0 = (1/alpha) (4 beta0 (2/(q-2))^{1/q})^alpha with q the
    conjugate exponent of alpha; valid for alpha in (1, 2)."""
    if not 1.0 < alpha < 2.0:
        raise ValueError(
            "persistence threshold formula requires alpha in (1, 2); dyadic "
            "powers go through the square-completion route instead")
    if beta0 < 0:
        raise ValueError("beta0 must be nonnegative")
    if beta0 == 0.0:
        return 0.0
    q = alpha / (alpha - 1.0)
    return (1.0 / alpha) * (4.0 * beta0 * (2.0 / (q - 2.0)) ** (1.0 / q)) ** alpha


def square_completion_band(kappa: float, beta0: float,
                           radii: np.ndarray) -> dict:
    """Gaussian-in-beta integration of the quartic-weight route: checks that

        I(x) = int_{beta0}^inf e^{-(beta/kappa - kappa x^2)^2} d beta

    lies in the band (kappa/10, kappa sqrt(pi)] for kappa >= beta0, and
    returns the computed values with the band verdicts."""
    if kappa < beta0:
        raise ValueError("the band argument requires kappa >= beta0")
    vals = []
    for r in np.asarray(radii, dtype=float):
        lo = beta0 / kappa - kappa * r ** 2
        val, _ = quad(lambda g: math.exp(-g * g), lo, max(lo + 60.0, 60.0),
                      limit=200)
        vals.append(kappa * val)
    vals_arr = np.array(vals)
    upper = kappa * math.sqrt(math.pi)
    lower = kappa / 10.0
    return {"radii": np.asarray(radii, dtype=float), "values": vals_arr,
            "upper": upper, "lower": lower,
            "within_band": bool(np.all((vals_arr > lower) & (vals_arr <= upper + 1e-12)))}


# ---------------------------------------------------------------------------
# annulus mass profile delta(R)
# ---------------------------------------------------------------------------

class AnnulusResolutionError(RuntimeError):
    """Fewer than the required grid cells across an annulus."""


@dataclass
class LowerBoundProfile:
    radii: np.ndarray
    deltas: np.ndarray
    E1: float
    E2_required: float | None
    core_mass: float | None
    hypothesis_met: bool
    fits: dict               # p -> dict(c=..., C0=..., rel_residual=...)
    preferred_p: int | None
    label: str = "ok"


def annulus_mass_profile(traj: Trajectory, radii, t_window=(0.125, 0.875), *,
                         R0: float | None = None, E2: float | None = None,
                         min_cells: int = 8) -> LowerBoundProfile:
    """delta(R_j) = int over the time window and the shell B_R \\ B_{R-1} of
    |u|^2 + |grad u|^2, with least-squares fits of log delta against R^p for
    p in {2, 3}."""
    grid = traj.grid
    h = max(grid.spacings)
    if 1.0 / h < min_cells:
        raise AnnulusResolutionError(
            f"annulus width 1 spans only {1.0/h:.1f} cells (need >= {min_cells})")
    radii = np.asarray(radii, dtype=float)
    if np.any(radii > min(grid.extents)):
        raise ValueError("radii exceed the grid box")

    times = np.asarray(traj.times, dtype=float)
    sel = (times >= t_window[0] - 1e-12) & (times <= t_window[1] + 1e-12)
    if sel.sum() < 2:
        raise ValueError("trajectory has too few samples inside the window")
    tsel = times[sel]

    rad = np.sqrt(grid.radius_sq)
    dens = []
    for i in np.nonzero(sel)[0]:
        u = traj.frames[i]
        g2 = sum(np.abs(g) ** 2 for g in spectral_gradient(u, grid))
        dens.append(np.abs(u) ** 2 + g2)
    dens = np.array(dens)

    deltas = np.empty_like(radii)
    for j, R in enumerate(radii):
        mask = (rad > R - 1.0) & (rad <= R)
        shell = dens[:, mask].sum(axis=1) * grid.cell_volume
        deltas[j] = float(np.trapezoid(shell, tsel))

    E1 = math.sqrt(float(np.trapezoid(dens.sum(axis=tuple(range(1, dens.ndim)))
                                      * grid.cell_volume, tsel)))

    core_mass = None
    hypothesis_met = True
    if R0 is not None and E2 is not None:
        core_sel = (times >= 0.25 - 1e-12) & (times <= 0.75 + 1e-12)
        core_mask = rad <= R0
        vals = np.array([np.abs(traj.frames[i][core_mask]) ** 2
                         for i in np.nonzero(core_sel)[0]]).sum(axis=1) \
            * grid.cell_volume
        core_mass = float(np.trapezoid(vals, times[core_sel]))
        hypothesis_met = core_mass >= E2 ** 2

    fits = {}
    positive = deltas > 0
    preferred = None
    if positive.sum() >= 3:
        logd = np.log(deltas[positive])
        rr = radii[positive]
        spread = float(np.linalg.norm(logd - logd.mean()))
        for p in (2, 3):
            design = np.column_stack([np.ones_like(rr), -(rr ** p)])
            sol, *_ = np.linalg.lstsq(design, logd, rcond=None)
            resid = logd - design @ sol
            fits[p] = {"c": float(sol[0]), "C0": float(sol[1]),
                       "rel_residual": float(np.linalg.norm(resid) / spread)
                       if spread > 0 else 0.0}
        preferred = min(fits, key=lambda p: fits[p]["rel_residual"])

    label = "ok" if hypothesis_met else "hypothesis not met"
    return LowerBoundProfile(radii, deltas, E1, E2, core_mass, hypothesis_met,
                             fits, preferred, label)
