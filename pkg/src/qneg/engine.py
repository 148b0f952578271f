"""Filtered quasiprobabilities, negative volumes, width sweeps with
convergence/divergence verdicts, and the robustness decomposition.

Pipeline: build the order-s characteristic function of a state (or take a
channel-composed evaluator), multiply by the filter, sample on a window,
transform, and integrate the negative part.  Every result carries the
resolved window and the numerical diagnostics that certify it: boundary
decay, imaginary residue, total mass, and the transform's Parseval residual.

Window policy ("auto").  The beta half-extent comes from a fixed 8-ray decay
probe of |chi_s * Omega|: the smallest radius beyond which the probed
magnitude stays below 1e-10 of its peak, with a 15% margin and a floor of 8.
The alpha half-extent is the state's quasiprobability support plus the
widening from the order parameter and from the filter transform.  N is the
next power of two covering both (N = 4 * R_beta * R_alpha), clamped to
[256, 2048].  The resolution is deterministic and recorded in every result.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import GuardError, ValidationError
from .filters import FilterSpec, eval_filter
from .grid import (
    ComplexGrid,
    Domain,
    GridSpec,
    Part,
    cross_fourier,
    integrate,
    parseval_residual,
    sample_function,
)
from .states import (
    PI2,
    DECAY_LOG,
    ChiFunction,
    StateSpec,
    char_evaluator,
    validate_order,
)

__all__ = [
    "BOUNDARY_GUARD",
    "MASS_TOL",
    "CONV_TOL",
    "DEFAULT_W_SCHEDULE",
    "Diagnostics",
    "NegativityResult",
    "SweepEntry",
    "Converged",
    "Diverging",
    "Inconclusive",
    "ConvergenceReport",
    "SPoint",
    "RobustnessDecomposition",
    "resolve_grid",
    "sampled_char",
    "filtered_quasiprob",
    "negativity",
    "sweep_w",
    "sweep_s",
    "robustness_decomposition",
]

# Sampled |chi_s * Omega| on the window frame must stay below this fraction of
# its grid maximum or the truncated transform is not trustworthy.
BOUNDARY_GUARD = 1e-10

# A filtered quasiprobability of a physical state integrates to chi(0) = 1
# exactly; larger deviation means float cancellation ate the result.
MASS_TOL = 1e-4

# Width-sweep verdict thresholds.
CONV_TOL = 1e-2            # pairwise relative spread of the last three values
DIVERGENCE_GROWTH = 0.10   # each-step growth marking divergence
DIVERGENCE_FLOOR = 10.0    # ... and the final value must exceed this

DEFAULT_W_SCHEDULE = (2.0, 4.0, 8.0, 16.0, 32.0)

AUTO_MIN_R = 8.0
AUTO_MIN_N = 256
AUTO_MAX_N = 2048

_PROBE_ANGLES = tuple(k * math.pi / 8.0 for k in range(8))
_PROBE_RADII = np.concatenate(
    [np.linspace(0.0, 24.0, 1201)[1:], np.geomspace(24.0, 2.0e4, 600)]
)


def _as_chi(state: "StateSpec | ChiFunction") -> ChiFunction:
    if isinstance(state, ChiFunction):
        return state
    return char_evaluator(state)


def _effective_eval(
    chi: ChiFunction, s: float, filt: Optional[FilterSpec]
) -> Callable[[np.ndarray], np.ndarray]:
    """chi_s * Omega as one vectorized evaluator."""

    def g(beta: np.ndarray) -> np.ndarray:
        b = np.asarray(beta, dtype=np.complex128)
        out = np.asarray(chi(b), dtype=np.complex128)
        if s != 1.0:
            b2 = b.real**2 + b.imag**2
            out = out * np.exp(-(1.0 - s) * PI2 * b2 / 2.0)
        if filt is not None:
            out = out * eval_filter(filt, b)
        return out

    return g


def _order_widening(s: float) -> float:
    # transform extent of the order factor exp(-(1-s)pi^2|beta|^2/2)
    return math.sqrt(max(1.0 - s, 0.0) * DECAY_LOG / 2.0)


def _filter_widening(filt: Optional[FilterSpec]) -> float:
    return 0.0 if filt is None else 1.7 / filt.width


def _next_pow2(x: float) -> int:
    return int(2 ** math.ceil(math.log2(max(x, 1.0))))


def resolve_grid(
    state: "StateSpec | ChiFunction",
    s: float,
    filt: Optional[FilterSpec] = None,
    *,
    guard: float = BOUNDARY_GUARD,
    min_half_extent: float = AUTO_MIN_R,
    max_samples: int = AUTO_MAX_N,
) -> GridSpec:
    """Deterministically size a window for (state, s, filter).

    Raises GuardError when no finite window works: the probed magnitude never
    decays below guard (apply or narrow a filter), overflows double precision,
    or the required N exceeds the auto clamp.
    """
    chi = _as_chi(state)
    s = validate_order(s)
    g = _effective_eval(chi, s, filt)

    # Walk the fixed ladder outward; accept a decay radius once the probed
    # magnitude has stayed below guard*peak over a 1.3x span of radii.  The
    # early stop keeps the probe out of the region where factor-wise
    # evaluation overflows even though the product is negligible there; the
    # engine's window (1.15 * rho_star) stays inside the verified span, and
    # the sampling-time boundary guard re-checks the actual frame.
    directions = np.array(
        [complex(math.cos(t), math.sin(t)) for t in _PROBE_ANGLES]
    )
    peak = float(np.abs(np.asarray(g(np.zeros(1, complex)))[0]))
    rho_star: Optional[float] = None
    run_start: Optional[float] = None
    for rho in _PROBE_RADII:
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            vals = np.abs(np.asarray(g(rho * directions)))
        if not np.isfinite(vals).all():
            raise GuardError(
                f"|chi_s*filter| for {chi.label} overflows double precision "
                f"near |beta|={rho:.4g}: use a narrower filter or a lower "
                f"order s"
            )
        v = float(vals.max())
        peak = max(peak, v)
        if v >= guard * peak:
            run_start = None
        elif run_start is None:
            run_start = float(rho)
        if run_start is not None and rho >= 1.3 * run_start + 0.5:
            rho_star = run_start
            break
    if rho_star is None:
        raise GuardError(
            f"|chi_s*filter| for {chi.label} does not decay below "
            f"{guard:g} x peak within |beta| <= {_PROBE_RADII[-1]:.0f}: "
            f"increase R or apply a filter"
        )
    r_beta = max(min_half_extent, 1.15 * rho_star)

    r_alpha = max(
        6.0, chi.alpha_support + _order_widening(s) + _filter_widening(filt) + 2.0
    )
    n = max(AUTO_MIN_N, _next_pow2(4.0 * r_beta * r_alpha))
    if n > max_samples:
        raise GuardError(
            f"auto grid for {chi.label} needs N={n} > {max_samples} "
            f"(R_beta={r_beta:.3g}, R_alpha={r_alpha:.3g}): pass an explicit "
            f"grid or use a narrower filter"
        )
    return GridSpec(half_extent=r_beta, samples_per_axis=n)


@dataclass(frozen=True)
class Diagnostics:
    imag_residue: float        # max|Im P| / max|Re P|
    boundary_ratio: float      # frame max of |chi_s*Omega| / grid max
    total_mass: float          # full integral of Re P
    parseval_residual: float   # relative L2 mismatch across the transform

    def to_dict(self) -> dict:
        return {
            "imag_residue": self.imag_residue,
            "boundary_ratio": self.boundary_ratio,
            "total_mass": self.total_mass,
            "parseval_residual": self.parseval_residual,
        }


@dataclass(frozen=True)
class NegativityResult:
    """One evaluated negative volume and the settings that produced it."""

    value: float
    label: str
    s: float
    filter: Optional[FilterSpec]
    grid: GridSpec
    diagnostics: Diagnostics

    def to_dict(self) -> dict:
        from .filters import filter_to_dict

        return {
            "value": self.value,
            "state": self.label,
            "s": self.s,
            "filter": filter_to_dict(self.filter),
            "grid": self.grid.to_dict(),
            "diagnostics": self.diagnostics.to_dict(),
        }


def _pipeline(
    state: "StateSpec | ChiFunction",
    s: float,
    filt: Optional[FilterSpec],
    grid: Optional[GridSpec],
    guard: float,
):
    chi = _as_chi(state)
    s = validate_order(s)
    if grid is None:
        grid = resolve_grid(chi, s, filt, guard=guard)
    sampled = sample_function(_effective_eval(chi, s, filt), grid, Domain.BETA)
    peak = sampled.max_magnitude()
    boundary_ratio = sampled.boundary_magnitude() / max(peak, np.finfo(float).tiny)
    if boundary_ratio > guard:
        raise GuardError(
            f"boundary magnitude {boundary_ratio:.3e} of |chi_s*filter| for "
            f"{chi.label} exceeds the guard {guard:g}: increase R or apply a filter"
        )
    out = cross_fourier(sampled)
    mass = integrate(out, Part.FULL)
    if abs(mass - 1.0) > MASS_TOL:
        raise GuardError(
            f"total mass {mass!r} deviates from 1 beyond {MASS_TOL:g} for "
            f"{chi.label}: dynamic range too large for double precision at "
            f"these settings"
        )
    re_max = max(float(np.abs(out.values.real).max()), np.finfo(float).tiny)
    diag = Diagnostics(
        imag_residue=float(np.abs(out.values.imag).max()) / re_max,
        boundary_ratio=boundary_ratio,
        total_mass=mass,
        parseval_residual=parseval_residual(sampled, out),
    )
    return chi, grid, out, diag


def sampled_char(
    state: "StateSpec | ChiFunction",
    s: float = 1.0,
    filt: Optional[FilterSpec] = None,
    grid: Optional[GridSpec] = None,
    *,
    guard: float = BOUNDARY_GUARD,
) -> ComplexGrid:
    """The sampled (filtered) order-s characteristic function, boundary-guarded."""
    chi = _as_chi(state)
    s = validate_order(s)
    if grid is None:
        grid = resolve_grid(chi, s, filt, guard=guard)
    sampled = sample_function(_effective_eval(chi, s, filt), grid, Domain.BETA)
    ratio = sampled.boundary_magnitude() / max(
        sampled.max_magnitude(), np.finfo(float).tiny
    )
    if ratio > guard:
        raise GuardError(
            f"boundary magnitude {ratio:.3e} of |chi_s*filter| for {chi.label} "
            f"exceeds the guard {guard:g}: increase R or apply a filter"
        )
    return sampled


def filtered_quasiprob(
    state: "StateSpec | ChiFunction",
    s: float = 1.0,
    filt: Optional[FilterSpec] = None,
    grid: Optional[GridSpec] = None,
    *,
    guard: float = BOUNDARY_GUARD,
) -> ComplexGrid:
    """The (filtered) order-s quasiprobability on an alpha-domain grid.

    With filt=None the characteristic function itself must decay below the
    boundary guard inside the window, otherwise GuardError asks for a filter.
    The returned grid is finite everywhere, real up to the imaginary-residue
    tolerance, and carries total mass 1 within MASS_TOL.
    """
    _, _, out, _ = _pipeline(state, s, filt, grid, guard)
    return out


def negativity(
    state: "StateSpec | ChiFunction",
    s: float = 1.0,
    filt: Optional[FilterSpec] = None,
    grid: Optional[GridSpec] = None,
    *,
    guard: float = BOUNDARY_GUARD,
) -> NegativityResult:
    """Negative volume of the (filtered) order-s quasiprobability."""
    chi, grid, out, diag = _pipeline(state, s, filt, grid, guard)
    value = integrate(out, Part.NEGATIVE_REAL)
    return NegativityResult(
        value=value, label=chi.label, s=s, filter=filt, grid=grid, diagnostics=diag
    )


# --- width sweep -------------------------------------------------------------


@dataclass(frozen=True)
class SweepEntry:
    w: float
    result: Optional[NegativityResult]
    error: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "w": self.w,
            "value": None if self.result is None else self.result.value,
            "error": self.error,
            "result": None if self.result is None else self.result.to_dict(),
        }


@dataclass(frozen=True)
class Converged:
    limit_estimate: float
    uncertainty: float

    kind = "converged"


@dataclass(frozen=True)
class Diverging:
    growth_rate: float

    kind = "diverging"


@dataclass(frozen=True)
class Inconclusive:
    reason: str = ""

    kind = "inconclusive"


Verdict = Union[Converged, Diverging, Inconclusive]


@dataclass(frozen=True)
class ConvergenceReport:
    """Width-sweep series with its deterministic verdict.

    Converged: the last three valid values agree pairwise within CONV_TOL
    relative; the limit estimate is the last value, the uncertainty their
    largest pairwise difference.  Diverging: the last three valid values each
    exceed their predecessor by more than 10% and the final one exceeds 10.
    Anything else is Inconclusive.  Failed entries are recorded and excluded.
    """

    entries: tuple
    verdict: Verdict
    label: str
    s: float

    def valid_values(self):
        return [(e.w, e.result.value) for e in self.entries if e.result is not None]

    def to_dict(self) -> dict:
        v: dict = {"kind": self.verdict.kind}
        if isinstance(self.verdict, Converged):
            v["limit_estimate"] = self.verdict.limit_estimate
            v["uncertainty"] = self.verdict.uncertainty
        elif isinstance(self.verdict, Diverging):
            v["growth_rate"] = self.verdict.growth_rate
        else:
            v["reason"] = self.verdict.reason
        return {
            "state": self.label,
            "s": self.s,
            "entries": [e.to_dict() for e in self.entries],
            "verdict": v,
        }


def _max_workers() -> int:
    try:
        return max(1, int(os.environ.get("QNEG_THREADS", "1")))
    except ValueError:
        return 1


def _map_indexed(fn: Callable, items: Sequence):
    """Map preserving order; thread pool only if QNEG_THREADS > 1.  Entries are
    pure functions of their inputs, so results are order-independent."""
    workers = _max_workers()
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _judge(values: Sequence[float]) -> Verdict:
    if len(values) >= 3:
        last3 = values[-3:]
        vmax = max(abs(v) for v in last3)
        spread = max(abs(a - b) for a in last3 for b in last3)
        if vmax == 0.0 or spread <= CONV_TOL * vmax:
            return Converged(limit_estimate=values[-1], uncertainty=spread)
    if len(values) >= 4:
        tail = values[-4:]
        growing = all(
            tail[i + 1] > (1.0 + DIVERGENCE_GROWTH) * tail[i] for i in range(3)
        )
        if growing and values[-1] > DIVERGENCE_FLOOR:
            rate = tail[-1] / tail[-2] if tail[-2] > 0 else math.inf
            return Diverging(growth_rate=rate)
    if len(values) < 3:
        return Inconclusive(reason="fewer than three valid entries")
    return Inconclusive(reason="no convergence or divergence pattern")


def sweep_w(
    state: "StateSpec | ChiFunction",
    s: float,
    filt: FilterSpec,
    w_schedule: Sequence[float] = DEFAULT_W_SCHEDULE,
    grid: Optional[GridSpec] = None,
    *,
    guard: float = BOUNDARY_GUARD,
) -> ConvergenceReport:
    """Evaluate the filtered negativity along an increasing width schedule.

    filt supplies the family (its own width is ignored); each entry runs at
    the schedule width on its own auto-resolved window unless grid is given.
    Per-width failures are recorded in the entries and excluded from the
    verdict; if every width fails, GuardError summarizes them.
    """
    ws = [float(w) for w in w_schedule]
    if len(ws) < 4 or any(b <= a for a, b in zip(ws, ws[1:])):
        raise ValidationError("w_schedule must be >= 4 strictly increasing widths")
    chi = _as_chi(state)
    s = validate_order(s)

    def one(w: float) -> SweepEntry:
        try:
            res = negativity(chi, s, filt.with_width(w), grid, guard=guard)
            return SweepEntry(w=w, result=res)
        except GuardError as exc:
            return SweepEntry(w=w, result=None, error=str(exc))

    entries = tuple(_map_indexed(one, ws))
    values = [e.result.value for e in entries if e.result is not None]
    if not values:
        raise GuardError(
            "every sweep entry failed: "
            + "; ".join(f"w={e.w:g}: {e.error}" for e in entries)
        )
    return ConvergenceReport(
        entries=entries, verdict=_judge(values), label=chi.label, s=s
    )


# --- order-parameter sweep ---------------------------------------------------


@dataclass(frozen=True)
class SPoint:
    """One order-parameter evaluation: direct (unfiltered) when the
    characteristic function decays on its own, otherwise a width sweep."""

    s: float
    estimate: Optional[float]
    method: str                 # "direct" | "w_sweep"
    verdict: str                # "finite" | "converged" | "diverging" | "inconclusive" | "failed"
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "s": self.s,
            "estimate": self.estimate,
            "method": self.method,
            "verdict": self.verdict,
            "detail": self.detail,
        }


def sweep_s(
    state: "StateSpec | ChiFunction",
    s_list: Sequence[float],
    filt: Optional[FilterSpec] = None,
    w_schedule: Sequence[float] = DEFAULT_W_SCHEDULE,
    grid: Optional[GridSpec] = None,
) -> list:
    """Estimate the order-s negativity for each s in ascending s_list."""
    ss = [validate_order(s) for s in s_list]
    if any(b <= a for a, b in zip(ss, ss[1:])):
        raise ValidationError("s_list must be strictly ascending")
    chi = _as_chi(state)
    fallback = filt if filt is not None else FilterSpec("power_exp", 1.0, 0.21)

    def one(s: float) -> SPoint:
        try:
            res = negativity(chi, s, None, grid)
            return SPoint(s=s, estimate=res.value, method="direct", verdict="finite")
        except GuardError:
            pass
        try:
            rep = sweep_w(chi, s, fallback, w_schedule, grid)
        except GuardError as exc:
            return SPoint(
                s=s, estimate=None, method="w_sweep", verdict="failed", detail=str(exc)
            )
        if isinstance(rep.verdict, Converged):
            return SPoint(
                s=s,
                estimate=rep.verdict.limit_estimate,
                method="w_sweep",
                verdict="converged",
                detail=f"uncertainty {rep.verdict.uncertainty:.3g}",
            )
        if isinstance(rep.verdict, Diverging):
            return SPoint(
                s=s,
                estimate=None,
                method="w_sweep",
                verdict="diverging",
                detail=f"growth rate {rep.verdict.growth_rate:.3g}",
            )
        return SPoint(
            s=s,
            estimate=None,
            method="w_sweep",
            verdict="inconclusive",
            detail=rep.verdict.reason,
        )

    return _map_indexed(one, ss)


# --- robustness decomposition --------------------------------------------------


@dataclass(frozen=True)
class RobustnessDecomposition:
    """Explicit classical-noise mixing that erases the negativity at this
    width: sigma = P^-/r_w is a normalized nonnegative distribution and
    (P + r_w*sigma)/(1+r_w) = P^+/(1+r_w) has no negative part."""

    r_w: float
    sigma_grid: ComplexGrid
    mixture_negativity: float


def robustness_decomposition(
    state: "StateSpec | ChiFunction",
    filt: Optional[FilterSpec],
    s: float = 1.0,
    grid: Optional[GridSpec] = None,
) -> RobustnessDecomposition:
    _, grid, out, _ = _pipeline(state, s, filt, grid, BOUNDARY_GUARD)
    neg_part = np.maximum(-out.values.real, 0.0)
    r_w = float(neg_part.sum() * out.spec.spacing**2)
    if r_w < 1e-10:
        raise GuardError("state already classical at this filter width")
    sigma = ComplexGrid(
        spec=out.spec, domain=Domain.ALPHA, values=(neg_part / r_w).astype(complex)
    )
    mixture = (out.values.real + neg_part) / (1.0 + r_w)
    mixture_grid = ComplexGrid(
        spec=out.spec, domain=Domain.ALPHA, values=mixture.astype(complex)
    )
    return RobustnessDecomposition(
        r_w=r_w,
        sigma_grid=sigma,
        mixture_negativity=integrate(mixture_grid, Part.NEGATIVE_REAL),
    )
