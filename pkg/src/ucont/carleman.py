"""Numeric instantiation of the two weighted a-priori inequalities.

Both inequalities bound gradient and moment energies of an admissible test
function by the conjugated-operator energy ||(S+A)f||^2, with the weight
scale beta admissible above a power of R: proportional to R^3 for the
radial (cubic-regime) weight and to R^2 for the x1-translated weight.

The right-hand side is always evaluated in conjugated form, so the
exponential weight itself is never instantiated and large beta causes no
overflow.  The admissibility frontier is measured on the commutator
quadratic form <[S,A]f, f> (computed exactly from the discrete adjoint
identity), whose sign change is what the beta thresholds gate; the
inequality itself holds with large slack well below threshold for generic
test functions, so its pass/fail carries no frontier information.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np
import sympy as sp

from .coefficients import CoefficientField, SamplingBox, TransversalField, \
    ellipticity_bounds
from .expressions import Expression, T_SYMBOL
from .grids import Grid, SpaceTimeGrid, band_limited_noise, check_resolved, \
    l2_norm_sq, spectral_derivative
from .operators import ConjugatedGridOps, WeightSpec

SMOOTHSTEP_D1_MAX = 15.0 / 8.0
SMOOTHSTEP_D2_MAX = 10.0 / math.sqrt(3.0)


def smoothstep5(u: np.ndarray) -> np.ndarray:
    """Quintic smoothstep: 0 below 0, 1 above 1, C^2 across the transition."""
    u = np.clip(u, 0.0, 1.0)
    return u * u * u * (10.0 + u * (-15.0 + 6.0 * u))


def smoothstep5_sym(u: sp.Expr) -> sp.Expr:
    return sp.Piecewise((0, u <= 0), (1, u >= 1),
                        (10 * u ** 3 - 15 * u ** 4 + 6 * u ** 5, True))


class SupportError(ValueError):
    """Requested support constraint unsatisfiable or violated on the grid."""


@dataclass(frozen=True)
class CutoffSpec:
    """Profiles used by the weighted inequalities and their test functions.

    The time profile rises from 0 to ``plateau`` between knots[0] and
    knots[1], stays flat through knots[2], and falls back to 0 at knots[3];
    transitions are quintic smoothsteps, so the derivative sup-norms are
    explicit.
    """

    r0: float = 1.0
    R: float = 1.0
    plateau: float = 3.0
    knots: tuple[float, float, float, float] = (0.125, 0.25, 0.75, 0.875)
    space_width: float = 0.5
    outer_pad: float = 0.5

    def __post_init__(self):
        if self.R < 1.0:
            raise ValueError("weight scale R must be >= 1")
        k = self.knots
        if not (0.0 <= k[0] < k[1] < k[2] < k[3] <= 1.0):
            raise ValueError("time knots must be increasing within [0, 1]")

    @property
    def rise_width(self) -> float:
        return self.knots[1] - self.knots[0]

    @property
    def fall_width(self) -> float:
        return self.knots[3] - self.knots[2]

    @property
    def profile_d1_max(self) -> float:
        w = min(self.rise_width, self.fall_width)
        return self.plateau * SMOOTHSTEP_D1_MAX / w

    @property
    def profile_d2_max(self) -> float:
        w = min(self.rise_width, self.fall_width)
        return self.plateau * SMOOTHSTEP_D2_MAX / w ** 2

    def profile_sym(self) -> sp.Expr:
        t = T_SYMBOL
        k = self.knots
        rise = smoothstep5_sym((t - k[0]) / (k[1] - k[0]))
        fall = smoothstep5_sym((k[3] - t) / (k[3] - k[2]))
        return self.plateau * rise * fall

    def profile_expression(self) -> Expression:
        return Expression(self.profile_sym())

    def profile_values(self, t: np.ndarray) -> np.ndarray:
        k = self.knots
        return self.plateau * smoothstep5((t - k[0]) / (k[1] - k[0])) \
            * smoothstep5((k[3] - t) / (k[3] - k[2]))

    def time_window(self, t: np.ndarray) -> np.ndarray:
        """[0,1]-valued window supported exactly on (knots[0], knots[3])."""
        k = self.knots
        return smoothstep5((t - k[0]) / (k[1] - k[0])) \
            * smoothstep5((k[3] - t) / (k[3] - k[2]))


def translated_shift(cutoff: CutoffSpec, st: SpaceTimeGrid) -> np.ndarray:
    """|x/R + profile(t) e1| on the space-time mesh."""
    prof = cutoff.profile_values(st.times)
    shape = (st.nt,) + (1,) * st.space.dim
    q2 = (st.space.meshes[0][None] / cutoff.R + prof.reshape(shape)) ** 2
    for m in st.space.meshes[1:]:
        q2 = q2 + (m[None] / cutoff.R) ** 2
    return np.sqrt(q2)


@dataclass
class TestField:
    """Admissible space-time test function with its support certificate."""

    values: np.ndarray
    st: SpaceTimeGrid
    mode: str
    seed: int
    cutoff: CutoffSpec
    params: dict = dc_field(default_factory=dict)


def make_test_function(mode: str, st: SpaceTimeGrid, cutoff: CutoffSpec,
                       seed: int, *, k_cut: float | None = None,
                       carrier: float = 0.0, t_center: float | None = None,
                       t_width: float = 0.1, x_center: float | None = None,
                       x_width: float | None = None,
                       resolution_budget: float | None = None) -> TestField:
    """Smooth compactly supported random field satisfying the mode's support
    constraint exactly on the grid (verified by exhaustive scan).

    mode 'annulus':    supp f within {|x| >= r0}, time support (1/8, 7/8)
    mode 'translated': supp f within {|x/R + profile(t) e1| >= 1}

    Optional knobs localize the band-limited noise: a plane-wave ``carrier``
    along x1, a Gaussian time window at ``t_center``, a spatial envelope at
    ``x_center`` (along x1).
    """
    if mode not in ("annulus", "translated"):
        raise ValueError(f"unknown test-function mode {mode!r}")
    if resolution_budget is None:
        # the moving support edge of the translated mode carries slow
        # C^2-cutoff harmonics in time; its quadratic forms converge anyway
        resolution_budget = 5e-4 if mode == "annulus" else 5e-3
    g = st.space
    h = max(g.spacings)
    w = cutoff.space_width
    if w / h < 8:
        raise SupportError(
            f"cutoff transition {w} spans {w/h:.1f} cells (< 8); refine grid")
    outer = min(g.extents) - cutoff.outer_pad
    rad = np.sqrt(g.radius_sq)
    if mode == "annulus" and cutoff.r0 + w >= outer - w:
        raise SupportError("empty admissible region: r0 too close to the box")

    k_cut_eff = k_cut if k_cut is not None else min(5.0, 0.15 * math.pi / h)
    k_nyq = math.pi / g.spacings[0]
    if abs(carrier) + k_cut_eff > 0.45 * k_nyq:
        raise SupportError(
            f"carrier {carrier:+.1f} + band {k_cut_eff:.1f} exceeds the "
            f"quadratic-form aliasing cap 0.45 * {k_nyq:.1f}")
    rng = np.random.default_rng(seed)
    noise = band_limited_noise(g, rng, k_cut_eff,
                               carrier=(carrier, *(0.0,) * (g.dim - 1))
                               if carrier else None)
    tau = cutoff.time_window(st.times)
    if t_center is not None:
        tau = tau * np.exp(-((st.times - t_center) / t_width) ** 2)
    shape_t = (st.nt,) + (1,) * g.dim

    outer_cut = smoothstep5((outer - rad) / w)
    if mode == "annulus":
        space_cut = smoothstep5((rad - cutoff.r0) / w) * outer_cut
        f = tau.reshape(shape_t) * (noise * space_cut)[None]
        q = None
    else:
        q = translated_shift(cutoff, st)
        moving = smoothstep5((q - 1.0) / w)
        f = tau.reshape(shape_t) * noise[None] * moving * outer_cut[None]
    if x_center is not None:
        xw = x_width if x_width is not None else 1.0
        env = np.exp(-((g.meshes[0] - x_center) / xw) ** 2)
        f = f * env[None]
    f = f.astype(complex)

    peak = np.abs(f).max()
    if peak == 0.0:
        raise SupportError("generated field is identically zero")
    f /= peak

    # exhaustive support scan
    if mode == "annulus":
        bad = rad[None] < cutoff.r0
    else:
        bad = q < 1.0
    if np.any(f[np.broadcast_to(bad, f.shape)] != 0):
        raise SupportError("support constraint violated on the grid")
    check_resolved(f, resolution_budget)
    return TestField(f, st, mode, seed, cutoff,
                     {"k_cut": k_cut, "carrier": carrier, "t_center": t_center,
                      "t_width": t_width, "x_center": x_center,
                      "x_width": x_width})


# ---------------------------------------------------------------------------
# the two sides
# ---------------------------------------------------------------------------

@dataclass
class CarlemanReport:
    mode: str
    beta: float
    R: float
    seed: int
    lhs: float
    rhs: float                # constant included (lambda^-2 or C)
    raw_rhs: float            # ||(S+A) f||^2
    constant: float
    threshold_beta: float
    admissible: bool
    slack: float
    comm_form: float          # <[S,A] f, f>
    comm_slack: float
    passed: bool

    def row(self) -> tuple:
        return (self.mode, self.beta, self.R, self.seed, self.lhs, self.rhs,
                self.slack, self.passed)


def beta_threshold_cubic(lam: float, cutoff: CutoffSpec, R: float,
                         C1: float = 1.0) -> float:
    """max(lam^-1 ||profile''||^{1/2} r0^-1 R^3, C1 (1 + r0^-1) R^2)."""
    return max(math.sqrt(cutoff.profile_d2_max) * R ** 3 / (lam * cutoff.r0),
               C1 * (1.0 + 1.0 / cutoff.r0) * R ** 2)


def beta_threshold_translated(c0: float, R: float) -> float:
    return c0 * R ** 2


def _sides(f: TestField, fld: CoefficientField, beta: float, cutoff: CutoffSpec,
           variant: str, lam: float, constant: float, threshold: float,
           tol: float = 1e-6) -> CarlemanReport:
    st = f.st
    g = st.space
    R = cutoff.R
    wspec = WeightSpec(variant, float(beta), R=float(R),
                       profile=cutoff.profile_expression())
    ops = ConjugatedGridOps.build(fld, wspec, st)
    vals = f.values
    grad_sq = sum(np.abs(spectral_derivative(vals, g, i, 1, time_offset=1)) ** 2
                  for i in range(g.dim))
    if variant == "translated":
        zero_factor = translated_shift(cutoff, st)
    else:
        zero_factor = np.broadcast_to(np.sqrt(g.radius_sq)[None], vals.shape)
    lhs = beta / R ** 2 * float(grad_sq.sum() * g.cell_volume * st.dt) \
        + beta ** 3 / R ** 6 * float(((zero_factor * np.abs(vals)) ** 2).sum()
                                     * g.cell_volume * st.dt)
    sf = ops.apply_S(vals)
    af = ops.apply_A(vals)
    raw = l2_norm_sq(sf + af, g, st.dt)
    comm = raw - l2_norm_sq(sf, g, st.dt) - l2_norm_sq(af, g, st.dt)
    rhs = constant * raw
    slack = rhs / lhs if lhs > 0 else math.inf
    comm_denom = lam ** 2 * lhs
    comm_slack = comm / comm_denom if comm_denom > 0 else math.inf
    return CarlemanReport(f.mode, float(beta), float(R), f.seed, lhs, rhs, raw,
                          constant, threshold, beta >= threshold - 1e-12,
                          slack, comm, comm_slack, slack >= 1.0 - tol)


def carleman_sides_cubic(f: TestField, fld: CoefficientField, beta: float,
                         cutoff: CutoffSpec, *, lam: float | None = None,
                         C1: float = 1.0) -> CarlemanReport:
    """Radial-weight inequality sides: the right-hand side carries the
    ellipticity constant lambda^{-2}."""
    if f.mode != "annulus":
        raise SupportError("cubic-regime sides need an annulus-mode field")
    if lam is None:
        lam, _ = ellipticity_bounds(
            fld, SamplingBox.cube(fld.dim, min(f.st.space.extents), 17))
    thr = beta_threshold_cubic(lam, cutoff, cutoff.R, C1)
    return _sides(f, fld, beta, cutoff, "scaled-time", lam, lam ** -2, thr)


def carleman_sides_translated(f: TestField, tfld: TransversalField, beta: float,
                              cutoff: CutoffSpec, *, c0: float = 4.0,
                              constant: float = 1.0,
                              lam: float | None = None) -> CarlemanReport:
    """Translated-weight inequality sides under the block assumption
    (constant a11 > 0); the right-hand constant is configurable and defaults
    to the raw conjugated energy."""
    if f.mode != "translated":
        raise SupportError("translated sides need a translated-mode field")
    if not tfld.is_assumption_61():
        raise ValueError("field must have constant a11 > 0 (block assumption)")
    fld = tfld.to_field()
    if lam is None:
        lam, _ = ellipticity_bounds(
            fld, SamplingBox.cube(fld.dim, min(f.st.space.extents), 17))
    thr = beta_threshold_translated(c0, cutoff.R)
    return _sides(f, fld, beta, cutoff, "translated", lam, constant, thr)


# ---------------------------------------------------------------------------
# parameter sweeps and the admissibility frontier
# ---------------------------------------------------------------------------

def worker_count() -> int:
    env = os.environ.get("UCONT_THREADS")
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


@dataclass(frozen=True)
class SweepConfig:
    mode: str                         # 'annulus' | 'translated'
    nt: int = 64
    extents: tuple[float, ...] = (8.0,)
    points: tuple[int, ...] = (512,)
    r0: float = 1.0
    R_values: tuple[float, ...] = (1.0, 1.5, 2.0)
    n_samples: int = 20
    seed0: int = 1
    C1: float = 1.0
    c0: float = 4.0
    constant: float = 1.0
    space_width: float = 0.5
    frontier_R_values: tuple[float, ...] | None = None
    frontier_probes: int = 8


@dataclass
class SweepReport:
    config: SweepConfig
    rows: list                     # CarlemanReport.row tuples
    min_slack: float
    failures: list
    frontier_R: np.ndarray | None = None
    frontier_beta: np.ndarray | None = None
    frontier_exponent: float | None = None
    frontier_coef: float | None = None
    fitted_c0: float | None = None


def _frontier_variants(mode: str, cutoff: CutoffSpec, R: float, n: int,
                       seed0: int) -> list[dict]:
    """Deterministic probe ensemble for the commutator sign change.

    Radial mode: plain noise localized where the time profile bends down and
    near the inner radius (weak moment term).  Translated mode: plane-wave
    probes with frequency comparable to R x (profile slope), time-localized
    on the rise/fall, both carrier signs.
    """
    k = cutoff.knots
    out = []
    if mode == "annulus":
        t_bend = k[0] + 0.79 * (k[1] - k[0])
        t_bend2 = k[3] - 0.79 * (k[3] - k[2])
        for i in range(n):
            out.append(dict(seed=seed0 + i, t_center=t_bend if i % 2 else t_bend2,
                            t_width=0.06,
                            x_center=(cutoff.r0 + 1.0) * (1 if i % 4 < 2 else -1),
                            x_width=1.0 + (i % 3) * 0.7,
                            resolution_budget=5e-3))
    else:
        slope = cutoff.profile_d1_max
        t_rise = k[0] + 0.6 * (k[1] - k[0])
        t_fall = k[3] - 0.6 * (k[3] - k[2])
        for i in range(n):
            scale = (0.5, 0.8, 1.1, 1.4)[i % 4]
            omega = 0.5 * slope * R * scale
            on_rise = i % 2 == 0
            # probes sit on the positive-x1 side late enough in the rise that
            # the moving support edge has already passed them
            out.append(dict(seed=seed0 + i,
                            carrier=-omega if on_rise else omega,
                            t_center=t_rise if on_rise else t_fall,
                            t_width=0.04,
                            x_center=(1.3 + 0.4 * (i % 3)) * R,
                            x_width=0.8 * R,
                            resolution_budget=5e-3))
    return out


def _min_comm_slack(cfg: SweepConfig, st: SpaceTimeGrid, fld, cutoff: CutoffSpec,
                    beta: float, variants: list[dict], lam: float) -> float:
    def one(kw):
        f = make_test_function(cfg.mode, st, cutoff, **kw)
        if cfg.mode == "annulus":
            rep = carleman_sides_cubic(f, fld, beta, cutoff, lam=lam, C1=cfg.C1)
        else:
            rep = carleman_sides_translated(f, fld, beta, cutoff, c0=cfg.c0,
                                            constant=cfg.constant, lam=lam)
        return rep.comm_slack
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        vals = list(pool.map(one, variants))
    return min(vals)


def _frontier_beta(cfg: SweepConfig, st: SpaceTimeGrid, fld, R: float,
                   lam: float) -> float:
    """Smallest beta (bisection in log beta) at which the commutator form is
    positive, with margin, for every probe in the ensemble."""
    cutoff = CutoffSpec(r0=cfg.r0, R=R, space_width=cfg.space_width)
    variants = _frontier_variants(cfg.mode, cutoff, R, cfg.frontier_probes,
                                  cfg.seed0 + 1000)
    ref = beta_threshold_cubic(lam, cutoff, R, cfg.C1) if cfg.mode == "annulus" \
        else beta_threshold_translated(cfg.c0, R)
    lo, hi = math.log(ref / 256.0), math.log(ref * 4.0)
    if _min_comm_slack(cfg, st, fld, cutoff, math.exp(lo), variants, lam) >= 1.0:
        return math.exp(lo)
    for _ in range(10):
        mid = 0.5 * (lo + hi)
        if _min_comm_slack(cfg, st, fld, cutoff, math.exp(mid), variants, lam) >= 1.0:
            hi = mid
        else:
            lo = mid
    return math.exp(hi)


def carleman_sweep(cfg: SweepConfig, fld=None) -> SweepReport:
    """Run the sides over all (R, seed) pairs at the mode's threshold beta,
    then fit the admissibility frontier exponent over the frontier R grid."""
    st = SpaceTimeGrid(cfg.nt, Grid(cfg.extents, cfg.points))
    if fld is None:
        if cfg.mode == "annulus":
            fld = CoefficientField.identity(len(cfg.extents))
        else:
            dim = len(cfg.extents)
            fld = TransversalField(
                dim, Expression(sp.Integer(1)),
                tuple(tuple(Expression(sp.Integer(1 if i == j else 0))
                            for j in range(dim - 1)) for i in range(dim - 1)))
    base_field = fld.to_field() if isinstance(fld, TransversalField) else fld
    lam, _ = ellipticity_bounds(
        base_field, SamplingBox.cube(base_field.dim, min(cfg.extents), 17))

    rows = []
    failures = []
    min_slack = math.inf

    def run_one(args):
        R, i = args
        cutoff = CutoffSpec(r0=cfg.r0, R=R, space_width=cfg.space_width)
        f = make_test_function(cfg.mode, st, cutoff, cfg.seed0 + i)
        if cfg.mode == "annulus":
            beta = beta_threshold_cubic(lam, cutoff, R, cfg.C1)
            return carleman_sides_cubic(f, fld, beta, cutoff, lam=lam, C1=cfg.C1)
        beta = beta_threshold_translated(cfg.c0, R)
        return carleman_sides_translated(f, fld, beta, cutoff, c0=cfg.c0,
                                         constant=cfg.constant, lam=lam)

    tasks = [(R, i) for R in cfg.R_values for i in range(cfg.n_samples)]
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        reports = list(pool.map(run_one, tasks))
    for rep in reports:
        rows.append(rep.row())
        min_slack = min(min_slack, rep.slack)
        if not rep.passed:
            failures.append(rep.row())

    frontier_R = frontier_beta = exponent = coef = fitted_c0 = None
    fr = cfg.frontier_R_values
    if fr:
        frontier_R = np.asarray(fr, dtype=float)
        frontier_beta = np.array(
            [_frontier_beta(cfg, st, fld, R, lam) for R in fr])
        design = np.column_stack([np.ones_like(frontier_R),
                                  np.log(frontier_R)])
        sol, *_ = np.linalg.lstsq(design, np.log(frontier_beta), rcond=None)
        coef, exponent = float(math.exp(sol[0])), float(sol[1])
        if cfg.mode == "translated":
            fitted_c0 = float(np.max(frontier_beta / frontier_R ** 2))
    return SweepReport(cfg, rows, min_slack, failures, frontier_R,
                       frontier_beta, exponent, coef, fitted_c0)
