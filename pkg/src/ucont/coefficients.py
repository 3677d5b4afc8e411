"""Elliptic operator data: the matrix A(x), the potential V(x), their
ellipticity and smallness metrics, and the one-dimensional gauge reduction
that normalizes a block coefficient a11(x1) to 1.

Metrics are numeric sups over a bounded sampling box; the analytic entries
come from the closed-form expression grammar so gradients up to third
order are exact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import sympy as sp
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from .expressions import Expression, X_SYMBOLS, const


class EllipticityError(ValueError):
    """A sampled coefficient matrix failed positive definiteness."""


class GaugeError(ValueError):
    """Gauge reduction preconditions violated (a11 not bounded below, etc.)."""


@dataclass(frozen=True)
class SamplingBox:
    """Cartesian sampling lattice prod_i [lo_i, hi_i] with pts_i points."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    pts: tuple[int, ...]

    @classmethod
    def cube(cls, dim: int, half_width: float, pts: int = 64) -> "SamplingBox":
        return cls((-half_width,) * dim, (half_width,) * dim, (pts,) * dim)

    def lattice(self) -> list[np.ndarray]:
        axes = [np.linspace(l, h, p) for l, h, p in zip(self.lo, self.hi, self.pts)]
        return [m.ravel() for m in np.meshgrid(*axes, indexing="ij")]


def _eval_on(expr: sp.Expr, coords: Sequence[np.ndarray],
             syms: Sequence[sp.Symbol] | None = None) -> np.ndarray:
    if syms is None:
        syms = X_SYMBOLS[:len(coords)]
    fn = sp.lambdify(tuple(syms), expr, modules="numpy")
    out = fn(*coords)
    return np.broadcast_to(np.asarray(out, dtype=float), coords[0].shape).copy()


@dataclass(frozen=True)
class FieldMetrics:
    lam: float
    Lam: float
    smallness: float
    c3_norm: float


@dataclass(frozen=True)
class CoefficientField:
    """Symmetric coefficient table A(x) = (a_kj) plus real potential V(x)."""

    dim: int
    entries: tuple[tuple[Expression, ...], ...]
    potential: Expression = field(default_factory=lambda: const(0))
    metrics: FieldMetrics | None = None

    def __post_init__(self):
        if not 1 <= self.dim <= 3:
            raise ValueError("dimension must be 1..3")
        if len(self.entries) != self.dim or any(len(r) != self.dim for r in self.entries):
            raise ValueError("entry table must be dim x dim")
        for k in range(self.dim):
            for j in range(k + 1, self.dim):
                if sp.simplify(self.entries[k][j].sym - self.entries[j][k].sym) != 0:
                    raise ValueError(f"entry table not symmetric at ({k},{j})")
        allowed = set(X_SYMBOLS[:self.dim])
        for row in self.entries:
            for e in row:
                if not e.sym.free_symbols <= allowed:
                    raise ValueError(f"entry {e} uses variables outside x1..x{self.dim}")
        if not self.potential.sym.free_symbols <= allowed:
            raise ValueError("potential uses variables outside the field dimension")

    @classmethod
    def identity(cls, dim: int, potential: Expression | None = None) -> "CoefficientField":
        rows = tuple(tuple(const(1 if k == j else 0) for j in range(dim))
                     for k in range(dim))
        return cls(dim, rows, potential or const(0))

    @classmethod
    def diagonal(cls, diag: Sequence[Expression],
                 potential: Expression | None = None) -> "CoefficientField":
        dim = len(diag)
        rows = tuple(tuple(diag[k] if k == j else const(0) for j in range(dim))
                     for k in range(dim))
        return cls(dim, rows, potential or const(0))

    def entry(self, k: int, j: int) -> sp.Expr:
        return self.entries[k][j].sym

    def matrix_at(self, coords: Sequence[np.ndarray]) -> np.ndarray:
        """Stacked matrices, shape (npts, dim, dim)."""
        npts = coords[0].size
        out = np.empty((npts, self.dim, self.dim))
        for k in range(self.dim):
            for j in range(self.dim):
                out[:, k, j] = _eval_on(self.entry(k, j), coords)
        return out

    def is_constant(self) -> bool:
        return all(e.is_constant() for row in self.entries for e in row)

    def m1_norm(self, box: SamplingBox) -> float:
        """sup |V| over the box (the bound called M1 in the convexity checks)."""
        return float(np.max(np.abs(_eval_on(self.potential.sym, box.lattice()))))

    def with_metrics(self, box: SamplingBox) -> "CoefficientField":
        lam, Lam = ellipticity_bounds(self, box)
        return CoefficientField(
            self.dim, self.entries, self.potential,
            FieldMetrics(lam, Lam, decay_smallness(self, box), c3_norm(self, box)))


@dataclass(frozen=True)
class TransversalField:
    """Block structure A = diag(a11(x1), Atilde(x')) of the anisotropic case."""

    dim: int
    a11: Expression
    atilde: tuple[tuple[Expression, ...], ...]
    potential: Expression = field(default_factory=lambda: const(0))

    def __post_init__(self):
        m = self.dim - 1
        if not (self.dim >= 1 and len(self.atilde) == m
                and all(len(r) == m for r in self.atilde)):
            raise ValueError("atilde must be (dim-1) x (dim-1)")
        if not self.a11.sym.free_symbols <= {X_SYMBOLS[0]}:
            raise ValueError("a11 must depend on x1 only")
        prim = set(X_SYMBOLS[1:self.dim])
        for row in self.atilde:
            for e in row:
                if not e.sym.free_symbols <= prim:
                    raise ValueError("atilde entries must depend on x' only")

    def is_assumption_61(self) -> bool:
        """Constant a11 > 0 (the translated-weight Carleman hypothesis)."""
        return self.a11.is_constant() and float(self.a11.sym) > 0

    def to_field(self) -> CoefficientField:
        n = self.dim
        rows = []
        for k in range(n):
            row = []
            for j in range(n):
                if k == 0 and j == 0:
                    row.append(self.a11)
                elif k == 0 or j == 0:
                    row.append(const(0))
                else:
                    row.append(self.atilde[k - 1][j - 1])
            rows.append(tuple(row))
        return CoefficientField(n, tuple(rows), self.potential)


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

def ellipticity_bounds(fld: CoefficientField, box: SamplingBox) -> tuple[float, float]:
    """(lambda, Lambda): extreme eigenvalues of A(x) over the sample lattice.

    Raises :class:`EllipticityError` with the offending location if any
    sampled matrix is not positive definite.
    """
    coords = box.lattice()
    mats = fld.matrix_at(coords)
    eigs = np.linalg.eigvalsh(mats)
    lam = float(eigs[:, 0].min())
    Lam = float(eigs[:, -1].max())
    if lam <= 0:
        idx = int(np.argmin(eigs[:, 0]))
        loc = tuple(float(c[idx]) for c in coords)
        raise EllipticityError(
            f"non-positive-definite sample (min eigenvalue {lam:.3e}) at x={loc}")
    return lam, Lam


def _grad_frobenius_sq(entries, dim: int, coords, wrt: Sequence[sp.Symbol]) -> np.ndarray:
    total = np.zeros_like(coords[0], dtype=float)
    for k in range(dim):
        for j in range(dim):
            for s in wrt:
                d = sp.diff(entries[k][j], s)
                if d == 0:
                    continue
                total += _eval_on(d, coords, wrt) ** 2
    return total


def decay_smallness(fld: CoefficientField | TransversalField, box: SamplingBox) -> float:
    """sup over the box of |x| |grad A| (|x'| |grad_{x'} Atilde| in the
    transversal case), with the Frobenius-style gradient norm."""
    if isinstance(fld, TransversalField):
        m = fld.dim - 1
        if m == 0:
            return 0.0
        sub = SamplingBox(box.lo[1:], box.hi[1:], box.pts[1:]) \
            if len(box.lo) == fld.dim else box
        coords = sub.lattice()
        entries = [[e.sym for e in row] for row in fld.atilde]
        grad_sq = _grad_frobenius_sq(entries, m, coords, X_SYMBOLS[1:fld.dim])
        rad = np.sqrt(sum(c ** 2 for c in coords))
        return float(np.max(rad * np.sqrt(grad_sq)))
    coords = box.lattice()
    entries = [[e.sym for e in row] for row in fld.entries]
    grad_sq = _grad_frobenius_sq(entries, fld.dim, coords, X_SYMBOLS[:fld.dim])
    rad = np.sqrt(sum(c ** 2 for c in coords))
    return float(np.max(rad * np.sqrt(grad_sq)))


def grad_order_norm(fld: CoefficientField, box: SamplingBox, order: int) -> float:
    """sup_x max_{|alpha|=order} |grad^alpha A|(x)."""
    coords = box.lattice()
    best = 0.0
    idx_sets = itertools.combinations_with_replacement(range(fld.dim), order)
    for combo in idx_sets:
        total = np.zeros_like(coords[0], dtype=float)
        for k in range(fld.dim):
            for j in range(fld.dim):
                d = fld.entry(k, j)
                for i in combo:
                    d = sp.diff(d, X_SYMBOLS[i])
                if d == 0:
                    continue
                total += _eval_on(d, coords) ** 2
        best = max(best, float(np.max(np.sqrt(total))))
    return best


def c3_norm(fld: CoefficientField, box: SamplingBox) -> float:
    """Numeric estimate of ||A||_{C^3} = sum_{i=1..3} sup_{x,|alpha|=i} |grad^alpha A|."""
    return sum(grad_order_norm(fld, box, i) for i in (1, 2, 3))


# ---------------------------------------------------------------------------
# gauge reduction (Liouville-type change of variables in x1)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GaugeReduction:
    """Tabulated reduction of a11(x1) d/dx1^2-type block to the flat one.

    y1(x1) is the arclength-type coordinate with dy1/dx1 = a11^{-1/2}; the
    gauge factor e^psi with psi = (1/4) log(a11/a11(0)) (in y-units) removes
    the first-order term, and the potential picks up -(psi')^2 - psi''.
    """

    original: TransversalField
    reduced: TransversalField
    x1_grid: np.ndarray
    y1_grid: np.ndarray
    psi: Callable[[np.ndarray], np.ndarray]
    x_of_y: Callable[[np.ndarray], np.ndarray]
    y_of_x: Callable[[np.ndarray], np.ndarray]
    reduced_potential: Callable[[np.ndarray], np.ndarray]   # of y1 (x'-part unchanged)

    def transport(self, u_of_x1: Callable[[np.ndarray], np.ndarray],
                  y1: np.ndarray) -> np.ndarray:
        """(e^psi u) composed with the coordinate map, sampled at y1."""
        return np.exp(self.psi(y1)) * u_of_x1(self.x_of_y(y1))


def verify_gauge_transport(gr: GaugeReduction, n_tests: int = 10,
                           seed: int = 0, n_grid: int = 2048) -> float:
    """Max relative error of the transport identity over random smooth test
    functions u(x1):

        [d^2/dy1^2 + V_red(y1)] (e^psi u)(x(y1))  ==  e^psi [(a11 u')' + V u](x(y1))

    The original side is evaluated from exact symbolic derivatives; the
    reduced side differentiates the transported samples spectrally.
    """
    x1 = X_SYMBOLS[0]
    rng = np.random.default_rng(seed)
    ymax = 0.88 * min(-gr.y1_grid[0], gr.y1_grid[-1])
    ys = -ymax + (2 * ymax / n_grid) * np.arange(n_grid)
    k = 2 * np.pi * np.fft.fftfreq(n_grid, d=ys[1] - ys[0])
    xv = np.asarray(gr.x_of_y(ys), dtype=float)
    a11 = gr.original.a11.sym
    if gr.original.dim == 1:
        vpot = gr.original.potential.sym
    else:
        vpot = gr.original.potential.sym.subs(
            {s: 0 for s in X_SYMBOLS[1:gr.original.dim]})
    worst = 0.0
    for _ in range(n_tests):
        c0, c1, c2 = rng.normal(size=3)
        ctr = rng.uniform(-1.5, 1.5)
        width = rng.uniform(0.6, 1.0)
        u = (c0 + c1 * x1 + c2 * x1 ** 2) * sp.exp(-(x1 - ctr) ** 2 / (2 * width ** 2))
        orig = sp.diff(a11 * sp.diff(u, x1), x1) + vpot * u
        u_fn = sp.lambdify(x1, u, modules="numpy")
        orig_fn = sp.lambdify(x1, orig, modules="numpy")
        w = np.exp(gr.psi(ys)) * u_fn(xv)
        wyy = np.fft.ifft(-(k ** 2) * np.fft.fft(w)).real
        lhs = wyy + gr.reduced_potential(ys) * w
        rhs = np.exp(gr.psi(ys)) * orig_fn(xv)
        scale = np.max(np.abs(rhs))
        worst = max(worst, float(np.max(np.abs(lhs - rhs)) / scale))
    return worst


def gauge_reduce(fld: TransversalField, x1_range: tuple[float, float] = (-12.0, 12.0),
                 npts: int = 4001) -> GaugeReduction:
    """Normalize a11 to 1 by the change of variables dy1/dx1 = a11(x1)^{-1/2}
    plus the quarter-log gauge; returns tabulated maps and the modified
    bounded potential."""
    a11 = fld.a11.sym
    x1 = X_SYMBOLS[0]
    xs = np.linspace(x1_range[0], x1_range[1], npts)
    a_fn = sp.lambdify(x1, a11, modules="numpy")
    avals = np.broadcast_to(np.asarray(a_fn(xs), dtype=float), xs.shape)
    if avals.min() <= 1e-10:
        raise GaugeError(f"a11 not bounded below on {x1_range} "
                         f"(min {avals.min():.3e})")

    integrand = lambda s: float(a_fn(s)) ** -0.5
    ys = np.empty_like(xs)
    i0 = int(np.argmin(np.abs(xs)))
    ys[i0] = quad(integrand, 0.0, xs[i0], limit=400)[0]
    for i in range(i0 + 1, len(xs)):
        val, err = quad(integrand, xs[i - 1], xs[i], limit=200)
        if not np.isfinite(val):
            raise GaugeError("quadrature failure building the coordinate map")
        ys[i] = ys[i - 1] + val
    for i in range(i0 - 1, -1, -1):
        val, err = quad(integrand, xs[i], xs[i + 1], limit=200)
        if not np.isfinite(val):
            raise GaugeError("quadrature failure building the coordinate map")
        ys[i] = ys[i + 1] - val
    if np.any(np.diff(ys) <= 0):
        raise GaugeError("coordinate map is not strictly increasing")

    x_of_y = CubicSpline(ys, xs)
    y_of_x = CubicSpline(xs, ys)

    a0 = float(a_fn(0.0))
    a11p = sp.diff(a11, x1)
    a11pp = sp.diff(a11, x1, 2)
    ap_fn = sp.lambdify(x1, a11p, modules="numpy")
    app_fn = sp.lambdify(x1, a11pp, modules="numpy")
    v_fn = sp.lambdify(X_SYMBOLS[:fld.dim], fld.potential.sym, modules="numpy")

    def _at_x(fn, xv):
        return np.broadcast_to(np.asarray(fn(xv), dtype=float), np.shape(xv))

    def psi(y1: np.ndarray) -> np.ndarray:
        xv = x_of_y(y1)
        return 0.25 * np.log(_at_x(a_fn, xv) / a0)

    def reduced_potential(y1: np.ndarray) -> np.ndarray:
        # psi' and psi'' with respect to y1, expressed through x1 derivatives:
        # psi'(y) = a11'/(4 sqrt(a11)),  psi''(y) = a11''/4 - a11'^2/(8 a11)
        xv = np.asarray(x_of_y(y1), dtype=float)
        a = _at_x(a_fn, xv)
        ap = _at_x(ap_fn, xv)
        app = _at_x(app_fn, xv)
        psip = 0.25 * ap / np.sqrt(a)
        psipp = 0.25 * app - 0.125 * ap ** 2 / a
        if fld.dim == 1:
            v = np.broadcast_to(np.asarray(v_fn(xv), dtype=float), xv.shape)
        else:
            v = np.broadcast_to(
                np.asarray(v_fn(xv, *([0.0] * (fld.dim - 1))), dtype=float), xv.shape)
        return v - psip ** 2 - psipp

    reduced = TransversalField(fld.dim, const(1), fld.atilde, fld.potential)
    return GaugeReduction(fld, reduced, xs, ys, psi, x_of_y, y_of_x,
                          reduced_potential)
