"""Quadrature engines and a discretized-mode emission oracle.

The oracle integrates the one-excitation amplitude equations against a finite
comb of field modes, with no pole approximation, so the closed-form
exponential decay law can be checked against it rather than against itself.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.integrate import DOP853, quad

from .model import ConfigurationError, HeightDensity, HorizonError, ROOT_PI

TWO_PI = 2.0 * math.pi


class AccuracyError(RuntimeError):
    """Quadrature did not converge; carries the best estimate and its bound."""

    def __init__(self, message: str, estimate: float = math.nan,
                 bound: float = math.inf):
        super().__init__(message)
        self.estimate = estimate
        self.bound = bound


class IntegrationError(RuntimeError):
    """Mode-equation integration failed or lost unitarity."""


class ValidityError(RuntimeError):
    """A result was requested outside the regime where it means anything."""


@dataclass(frozen=True)
class QuadratureSpec:
    """How to integrate against a height density."""

    method: str = "gauss-hermite"
    order: int = 80
    rel_tol: float = 1e-12
    abs_tol: float = 1e-14
    max_subdivisions: int = 200

    def __post_init__(self) -> None:
        if self.method not in ("gauss-hermite", "adaptive"):
            raise ConfigurationError(
                f"quadrature method must be gauss-hermite|adaptive, "
                f"got {self.method!r}")
        if not isinstance(self.order, int) or self.order < 2:
            raise ConfigurationError(f"order must be an int >= 2, "
                                     f"got {self.order!r}")
        if not (self.rel_tol > 0.0 and self.abs_tol > 0.0):
            raise ConfigurationError("tolerances must be > 0")
        if self.max_subdivisions < 10:
            raise ConfigurationError("max_subdivisions must be >= 10")


@lru_cache(maxsize=64)
def gauss_hermite_nodes(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights normalized so that sum(w * f(x)) integrates f
    against the standard Gaussian exp(-x^2)/sqrt(pi)."""
    x, w = hermgauss(order)
    return x, w / ROOT_PI


def gauss_moment(f, center: float, width: float,
                 quad_spec: QuadratureSpec = QuadratureSpec()) -> float:
    """Integral of f against one normalized Gaussian component
    exp(-(zeta-center)^2/width^2) / (sqrt(pi) width)."""
    if width <= 0.0:
        raise ConfigurationError(f"width must be > 0, got {width!r}")
    if quad_spec.method == "gauss-hermite":
        x, w = gauss_hermite_nodes(quad_spec.order)
        vals = np.asarray(f(center + width * x), dtype=float)
        return float(w @ vals)
    lo, hi = center - 12.0 * width, center + 12.0 * width
    norm = 1.0 / (ROOT_PI * width)

    def integrand(z: float) -> float:
        return float(f(z)) * norm * math.exp(-((z - center) / width) ** 2)

    return _adaptive(integrand, lo, hi, quad_spec)


def _adaptive(integrand, lo: float, hi: float, quad_spec: QuadratureSpec,
              points=None) -> float:
    result = quad(integrand, lo, hi, epsabs=quad_spec.abs_tol,
                  epsrel=quad_spec.rel_tol, limit=quad_spec.max_subdivisions,
                  points=points, full_output=1)
    val, err = result[0], result[1]
    if len(result) > 3:  # quadpack appended a warning message
        raise AccuracyError(f"adaptive quadrature did not converge: "
                            f"{result[3]}", estimate=val, bound=err)
    if err > 10.0 * max(quad_spec.abs_tol, quad_spec.rel_tol * abs(val)):
        raise AccuracyError(
            f"adaptive quadrature error bound {err:.3e} exceeds the requested "
            f"tolerance", estimate=val, bound=err)
    return val


def integrate_density(f, density: HeightDensity,
                      quad_spec: QuadratureSpec = QuadratureSpec()) -> float:
    """Integral of f(zeta) against a height density.

    Gauss-Hermite integrates each Gaussian component on its own nodes and is
    only defined for the analytic kinds; ``adaptive`` works for everything.
    """
    if density.is_analytic:
        if quad_spec.method == "gauss-hermite":
            x, w = gauss_hermite_nodes(quad_spec.order)
            total = 0.0
            for wt, mu in zip(density.weights, density.centers):
                vals = np.asarray(f(mu + density.width * x), dtype=float)
                total += wt * float(w @ vals)
            return total
        return math.fsum(
            wt * gauss_moment(f, mu, density.width, quad_spec)
            for wt, mu in zip(density.weights, density.centers))
    if quad_spec.method == "gauss-hermite":
        raise ConfigurationError(
            "gauss-hermite quadrature needs an analytic density; use "
            "method='adaptive' for sampled kinds")
    lo, hi = density.support
    return _adaptive(lambda z: f(z) * density(z), lo, hi, quad_spec)


# ---------------------------------------------------------------------------
# mode grid and oracle
# ---------------------------------------------------------------------------

_MAX_DNU = 0.05          # coarsest spacing that still resolves the line
_MIN_MARGIN_LW = 25.0    # window margin around the shifted line, in linewidths


@dataclass(frozen=True)
class ModeGrid:
    """Uniform comb of field modes, nu in linewidth units."""

    nu_min: float
    nu_max: float
    n_modes: int

    def __post_init__(self) -> None:
        if not isinstance(self.n_modes, int) or self.n_modes < 2:
            raise ConfigurationError(f"n_modes must be an int >= 2, "
                                     f"got {self.n_modes!r}")
        if not self.nu_max > self.nu_min:
            raise ConfigurationError("nu_max must exceed nu_min")
        if self.dnu > _MAX_DNU * (1.0 + 1e-12):
            raise ConfigurationError(
                f"mode spacing {self.dnu:.4g} exceeds {_MAX_DNU}; the comb is "
                "too coarse to resolve the natural line")

    @property
    def dnu(self) -> float:
        return (self.nu_max - self.nu_min) / (self.n_modes - 1)

    @property
    def nus(self) -> np.ndarray:
        return np.linspace(self.nu_min, self.nu_max, self.n_modes)

    @property
    def recurrence_s(self) -> float:
        """Poincare recurrence time of the discrete comb, 2*pi/dnu."""
        return TWO_PI / self.dnu

    def margin_linewidths(self, zeta: float, r: float) -> float:
        u = r * zeta
        return min(u - self.nu_min, self.nu_max - u) / (1.0 + zeta)

    def require_contains(self, zeta: float, r: float) -> None:
        m = self.margin_linewidths(zeta, r)
        if m < _MIN_MARGIN_LW:
            raise ConfigurationError(
                f"mode window margin around the shifted line is {m:.1f} local "
                f"linewidths; need >= {_MIN_MARGIN_LW}")

    @classmethod
    def for_line(cls, zeta: float, r: float, *,
                 halfwidth_linewidths: float | None = None,
                 dnu: float | None = None) -> "ModeGrid":
        """Window centered on the shifted line u = r*zeta.

        The default half-width is max(30, 0.1*r) *local* linewidths: wide
        enough that the hard-truncation rate shift gamma/(pi*W) stays under
        ~1.3% at the window floor, and growing with r so the residual shrinks
        as the pole approximation gets better.  Desk-scale r only; pass the
        width explicitly for r > 1e5 (the default would be absurd there).
        """
        if zeta <= -1.0:
            raise HorizonError(f"zeta={zeta!r} is at/below the horizon")
        gam = 1.0 + zeta
        if halfwidth_linewidths is None:
            if r > 1e5:
                raise ConfigurationError(
                    "no default window for r > 1e5; pass halfwidth_linewidths")
            halfwidth_linewidths = max(30.0, 0.1 * r)
        half = halfwidth_linewidths * gam
        if dnu is None:
            dnu = 0.025 if half <= 400.0 else _MAX_DNU
        n_intervals = math.ceil(2.0 * half / dnu)
        u = r * zeta
        return cls(nu_min=u - half, nu_max=u + half, n_modes=n_intervals + 1)


@dataclass(frozen=True)
class OracleRun:
    """Raw record of one mode-comb integration."""

    zeta: float
    r: float
    grid: ModeGrid
    coupling: str
    times: np.ndarray            # recorded s, starts at 0, ends at s_max
    alpha_sq: np.ndarray         # excited-state population at those times
    beta_sq_final: np.ndarray    # per-mode emission probability at s_max
    fitted_rate: float
    fit_residual: float
    max_unitarity_defect: float


def _coupling_sq(coupling: str, nus: np.ndarray, u: float, gam: float,
                 dnu: float, r: float) -> np.ndarray:
    # Golden-rule constraint at the line: 2*pi*g^2(u)/dnu = gam.
    base = gam * dnu / TWO_PI
    if coupling == "flat":
        return np.full(nus.shape, base)
    if coupling == "tilted":
        # Couplings growing like the mode frequency; same value at the line.
        scale = (r + nus) / (r + u)
        if np.any(scale <= 0.0):
            raise ConfigurationError(
                "tilted coupling needs all mode frequencies positive "
                "(r + nu_min must stay > 0)")
        return base * scale
    raise ConfigurationError(f"coupling must be flat|tilted, got {coupling!r}")


def ww_simulate(zeta: float, r: float, grid: ModeGrid, s_max: float, *,
                ode_tol: float = 1e-10, coupling: str = "flat",
                coupling_scale: float = 1.0,
                max_step: float = 0.05) -> OracleRun:
    """Integrate the one-excitation amplitude equations on a mode comb.

    In the frame rotating at the shifted line u = r*zeta the equations are

        d alpha/ds = - sum_j g_j b_j
        d b_j /ds  = - i (nu_j - u) b_j + g_j alpha

    with b_j the mode amplitude up to a phase (so |b_j|^2 = |beta_j|^2), and
    couplings normalized so sum_j 2*pi*g_j^2 * delta_dnu -> (1+zeta) at the
    line.  The system is Hermitian: |alpha|^2 + sum|b|^2 is conserved, and
    the run aborts if the integrator lets it drift past 1e-6.
    """
    if zeta <= -1.0:
        raise HorizonError(f"zeta={zeta!r} is at/below the horizon")
    if r <= 0.0:
        raise ConfigurationError(f"r must be > 0, got {r!r}")
    if s_max <= 0.0:
        raise ConfigurationError(f"s_max must be > 0, got {s_max!r}")
    if ode_tol <= 0.0:
        raise ConfigurationError(f"ode_tol must be > 0, got {ode_tol!r}")
    if coupling_scale < 0.0:
        raise ConfigurationError("coupling_scale must be >= 0")
    grid.require_contains(zeta, r)

    gam = 1.0 + zeta
    u = r * zeta
    nus = grid.nus
    g_arr = coupling_scale * np.sqrt(
        _coupling_sq(coupling, nus, u, gam, grid.dnu, r))
    rot = -1j * (nus - u)

    n = grid.n_modes
    y0 = np.zeros(n + 1, dtype=complex)
    y0[0] = 1.0

    def rhs(_t: float, y: np.ndarray) -> np.ndarray:
        out = np.empty_like(y)
        out[0] = -(g_arr @ y[1:])
        out[1:] = rot * y[1:]
        out[1:] += g_arr * y[0]
        return out

    solver = DOP853(rhs, 0.0, y0, s_max, max_step=max_step, rtol=ode_tol,
                    atol=min(1e-12, ode_tol))
    times = [0.0]
    alpha_sq = [1.0]
    defect_max = 0.0
    while solver.status == "running":
        solver.step()
        if solver.status == "failed":
            raise IntegrationError(
                f"mode-equation stepper failed at s={solver.t:.4g}")
        y = solver.y
        a2 = float(abs(y[0]) ** 2)
        norm = a2 + float(np.sum(np.abs(y[1:]) ** 2))
        defect_max = max(defect_max, abs(norm - 1.0))
        times.append(float(solver.t))
        alpha_sq.append(a2)
    if defect_max > 1e-6:
        raise IntegrationError(
            f"unitarity defect {defect_max:.3e} exceeds 1e-6; tighten ode_tol")

    t_arr = np.asarray(times)
    a_arr = np.asarray(alpha_sq)
    fit_hi = min(5.0, 0.8 * grid.recurrence_s, s_max)
    mask = (t_arr >= 0.5) & (t_arr <= fit_hi)
    if int(mask.sum()) >= 8:
        logs = np.log(a_arr[mask])
        slope, intercept = np.polyfit(t_arr[mask], logs, 1)
        resid = logs - (slope * t_arr[mask] + intercept)
        fitted = -float(slope)
        residual = float(np.sqrt(np.mean(resid**2)))
    else:
        fitted = math.nan
        residual = math.nan

    return OracleRun(zeta=zeta, r=r, grid=grid, coupling=coupling,
                     times=t_arr, alpha_sq=a_arr,
                     beta_sq_final=np.abs(solver.y[1:]) ** 2,
                     fitted_rate=fitted, fit_residual=residual,
                     max_unitarity_defect=defect_max)


def oracle_spectrum(run: OracleRun):
    """Emitted-line estimate from the final mode occupations.

    Needs the run to cover at least five local lifetimes, otherwise the
    leftover excited population (and its interference ripple across the comb)
    still distorts the line.
    """
    lifetimes = run.times[-1] * (1.0 + run.zeta)
    if lifetimes < 5.0 - 1e-9:
        raise ValidityError(
            f"run covers {lifetimes:.2f} local lifetimes; the emitted "
            "spectrum needs >= 5")
    from .analytic import SpectrumResult  # deferred: avoids an import cycle
    p = run.beta_sq_final / run.grid.dnu
    mass = float(np.sum(run.beta_sq_final))
    return SpectrumResult(nu_grid=run.grid.nus, p_values=p, total_mass=mass,
                          low_mass=bool(mass < 0.9))


def line_peak(nu: np.ndarray, p: np.ndarray) -> float:
    """Peak location with three-point parabolic refinement."""
    nu = np.asarray(nu, dtype=float)
    p = np.asarray(p, dtype=float)
    i = int(np.argmax(p))
    if i == 0 or i == len(p) - 1:
        return float(nu[i])
    y0, y1, y2 = p[i - 1], p[i], p[i + 1]
    denom = y0 - 2.0 * y1 + y2
    if denom == 0.0:
        return float(nu[i])
    shift = 0.5 * (y0 - y2) / denom
    return float(nu[i] + shift * (nu[i + 1] - nu[i]))


def line_fwhm(nu: np.ndarray, p: np.ndarray) -> float:
    """Full width at half maximum via linear interpolation of the crossings."""
    nu = np.asarray(nu, dtype=float)
    p = np.asarray(p, dtype=float)
    half = float(p.max()) / 2.0
    above = p >= half
    idx = np.nonzero(above)[0]
    if len(idx) < 2:
        raise ValidityError("line too narrow for the grid: no half-max span")
    lo_i, hi_i = int(idx[0]), int(idx[-1])

    def crossing(i_out: int, i_in: int) -> float:
        if i_out < 0 or i_out >= len(p):
            raise ValidityError("half-max crossing falls outside the grid")
        f = (half - p[i_out]) / (p[i_in] - p[i_out])
        return float(nu[i_out] + f * (nu[i_in] - nu[i_out]))

    return crossing(hi_i + 1, hi_i) - crossing(lo_i - 1, lo_i)


@dataclass(frozen=True)
class SinglePoleReport:
    """How well exp(-(1+zeta)s) tracks the mode-comb truth."""

    zeta: float
    r: float
    fitted_rate: float
    fit_residual: float
    max_rel_deviation: float
    compare_s_max: float
    truncated: bool
    run: OracleRun


def validate_single_pole(zeta: float | None = None, r: float | None = None,
                         grid: ModeGrid | None = None, s_max: float = 12.0,
                         ode_tol: float = 1e-10, *, coupling: str = "flat",
                         compare_up_to: float | None = None,
                         run: OracleRun | None = None) -> SinglePoleReport:
    """Compare |alpha|^2 against the exponential law.

    Either pass a finished ``run`` or the parameters to make one.  Comparison
    stops at 0.8 of the comb's recurrence time; if that cuts the requested
    horizon short the report says so via ``truncated``.
    """
    if run is None:
        if zeta is None or r is None:
            raise ConfigurationError("need either a run or (zeta, r)")
        if grid is None:
            grid = ModeGrid.for_line(zeta, r)
        run = ww_simulate(zeta, r, grid, s_max, ode_tol=ode_tol,
                          coupling=coupling)
    horizon = float(run.times[-1])
    if compare_up_to is not None:
        if compare_up_to <= 0.0:
            raise ConfigurationError("compare_up_to must be > 0")
        horizon = min(horizon, compare_up_to)
    cap = min(horizon, 0.8 * run.grid.recurrence_s)
    truncated = cap < horizon - 1e-12
    mask = run.times <= cap + 1e-12
    model = np.exp(-(1.0 + run.zeta) * run.times[mask])
    dev = float(np.max(np.abs(run.alpha_sq[mask] - model) / model))
    return SinglePoleReport(zeta=run.zeta, r=run.r,
                            fitted_rate=run.fitted_rate,
                            fit_residual=run.fit_residual,
                            max_rel_deviation=dev, compare_s_max=cap,
                            truncated=truncated, run=run)


def single_pole_summary(report: SinglePoleReport) -> dict:
    return {"zeta": report.zeta, "r": report.r,
            "fitted_rate": report.fitted_rate,
            "fit_residual": report.fit_residual,
            "max_deviation_single_pole": report.max_rel_deviation}
