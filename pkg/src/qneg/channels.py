"""Single-mode reductions of linear optical maps acting on characteristic
functions, plus numeric monotonicity and convexity checks.

Channels act symbolically on s=1 characteristic-function evaluators (closure
composition), never on sampled grids, so exactness is preserved until the one
final transform:

    loss (transmissivity eta, classical thermal/vacuum ancilla traced out):
        chi'(b) = chi(sqrt(eta)*b) * exp(-(1-eta)*nbar_anc*pi^2*|b|^2)
    phase shift theta:   chi'(b) = chi(e^{i*theta}*b)
    displacement gamma:  chi'(b) = chi(b) * exp[2*pi*i*(b_i*Re g + b_r*Im g)]

Compose applies channels in sequence; ConvexCombine mixes outputs by weight.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import GuardError, ValidationError
from .engine import negativity, NegativityResult
from .filters import FilterSpec, filter_negativity_delta
from .grid import GridSpec
from .states import (
    PI2,
    DECAY_LOG,
    ChiFunction,
    Mixture,
    StateSpec,
    char_evaluator,
)

__all__ = [
    "Loss",
    "PhaseShift",
    "Displacement",
    "Compose",
    "ConvexCombine",
    "ChannelSpec",
    "apply_channel",
    "channel_to_dict",
    "channel_from_dict",
    "channel_label",
    "MarginReport",
    "check_weak_monotonicity",
    "BoundReport",
    "check_approx_monotonicity",
    "ConvexityReport",
    "check_convexity",
]


@dataclass(frozen=True)
class Loss:
    eta: float
    ancilla_nbar: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.eta <= 1.0:
            raise ValidationError(f"loss eta must lie in [0, 1], got {self.eta}")
        if not self.ancilla_nbar >= 0.0:
            raise ValidationError(
                f"ancilla_nbar must be >= 0, got {self.ancilla_nbar}"
            )


@dataclass(frozen=True)
class PhaseShift:
    theta: float


@dataclass(frozen=True)
class Displacement:
    gamma: complex

    def __post_init__(self) -> None:
        object.__setattr__(self, "gamma", complex(self.gamma))


@dataclass(frozen=True)
class Compose:
    channels: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "channels", tuple(self.channels))
        if not self.channels:
            raise ValidationError("compose needs at least one channel")


@dataclass(frozen=True)
class ConvexCombine:
    components: tuple

    def __post_init__(self) -> None:
        comps = tuple((float(w), ch) for w, ch in self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise ValidationError("convex combination needs at least one component")
        if any(w <= 0 for w, _ in comps):
            raise ValidationError("convex weights must be > 0")
        total = math.fsum(w for w, _ in comps)
        if abs(total - 1.0) > 1e-12:
            raise ValidationError(f"convex weights must sum to 1, got {total!r}")


ChannelSpec = Union[Loss, PhaseShift, Displacement, Compose, ConvexCombine]


def apply_channel(channel: ChannelSpec, chi: ChiFunction) -> ChiFunction:
    """Output-state characteristic function (s=1) of the channel acting on chi."""
    if isinstance(channel, Loss):
        eta, nb = channel.eta, channel.ancilla_nbar
        root = math.sqrt(eta)
        base = chi.fn

        def fn(beta: np.ndarray) -> np.ndarray:
            b = np.asarray(beta, dtype=np.complex128)
            out = np.asarray(base(root * b), dtype=np.complex128)
            if nb > 0.0 and eta < 1.0:
                b2 = b.real**2 + b.imag**2
                out = out * np.exp(-(1.0 - eta) * nb * PI2 * b2)
            return out

        support = root * chi.alpha_support + math.sqrt(
            max((1.0 - eta) * nb, 0.0) * DECAY_LOG
        )
        return ChiFunction(
            fn=fn,
            alpha_support=support,
            label=f"loss(eta={eta:g}, nbar={nb:g})[{chi.label}]",
        )
    if isinstance(channel, PhaseShift):
        rot = cmath.exp(1j * channel.theta)
        base = chi.fn
        return ChiFunction(
            fn=lambda beta: np.asarray(base(rot * np.asarray(beta, complex))),
            alpha_support=chi.alpha_support,
            label=f"phase(theta={channel.theta:g})[{chi.label}]",
        )
    if isinstance(channel, Displacement):
        g = channel.gamma
        base = chi.fn

        def fn(beta: np.ndarray) -> np.ndarray:
            b = np.asarray(beta, dtype=np.complex128)
            phase = np.exp(2j * np.pi * (b.imag * g.real + b.real * g.imag))
            return np.asarray(base(b), dtype=np.complex128) * phase

        return ChiFunction(
            fn=fn,
            alpha_support=chi.alpha_support + abs(g),
            label=f"displace(gamma={g})[{chi.label}]",
        )
    if isinstance(channel, Compose):
        out = chi
        for ch in channel.channels:
            out = apply_channel(ch, out)
        return out
    if isinstance(channel, ConvexCombine):
        parts = [(w, apply_channel(ch, chi)) for w, ch in channel.components]

        def fn(beta: np.ndarray) -> np.ndarray:
            b = np.asarray(beta, dtype=np.complex128)
            acc = np.zeros(b.shape, dtype=np.complex128)
            for w, part in parts:
                acc = acc + w * np.asarray(part(b), dtype=np.complex128)
            return acc

        return ChiFunction(
            fn=fn,
            alpha_support=max(p.alpha_support for _, p in parts),
            label="mix[" + ", ".join(f"{w:g}*{p.label}" for w, p in parts) + "]",
        )
    raise TypeError(f"not a ChannelSpec: {channel!r}")


def channel_label(channel: ChannelSpec) -> str:
    if isinstance(channel, Loss):
        return f"loss(eta={channel.eta:g}, nbar={channel.ancilla_nbar:g})"
    if isinstance(channel, PhaseShift):
        return f"phase(theta={channel.theta:g})"
    if isinstance(channel, Displacement):
        return f"displace(gamma={channel.gamma})"
    if isinstance(channel, Compose):
        return " o ".join(channel_label(c) for c in channel.channels)
    if isinstance(channel, ConvexCombine):
        return "mix[" + ", ".join(
            f"{w:g}*{channel_label(c)}" for w, c in channel.components
        ) + "]"
    raise TypeError(f"not a ChannelSpec: {channel!r}")


def channel_to_dict(channel: ChannelSpec) -> dict:
    if isinstance(channel, Loss):
        return {"type": "loss", "eta": channel.eta, "ancilla_nbar": channel.ancilla_nbar}
    if isinstance(channel, PhaseShift):
        return {"type": "phase_shift", "theta": channel.theta}
    if isinstance(channel, Displacement):
        return {
            "type": "displacement",
            "gamma": [channel.gamma.real, channel.gamma.imag],
        }
    if isinstance(channel, Compose):
        return {"type": "compose", "channels": [channel_to_dict(c) for c in channel.channels]}
    if isinstance(channel, ConvexCombine):
        return {
            "type": "convex",
            "components": [
                {"weight": w, "channel": channel_to_dict(c)}
                for w, c in channel.components
            ],
        }
    raise TypeError(f"not a ChannelSpec: {channel!r}")


def channel_from_dict(d, where: str = "channel") -> ChannelSpec:
    if not isinstance(d, dict) or "type" not in d:
        raise ValidationError(f"{where}: expected an object with a 'type' key")
    t = d["type"]
    try:
        if t == "loss":
            return Loss(float(d["eta"]), float(d.get("ancilla_nbar", 0.0)))
        if t == "phase_shift":
            return PhaseShift(float(d["theta"]))
        if t == "displacement":
            g = d["gamma"]
            gamma = complex(g) if isinstance(g, (int, float)) else complex(g[0], g[1])
            return Displacement(gamma)
        if t == "compose":
            return Compose(
                tuple(
                    channel_from_dict(c, f"{where}.channels[{i}]")
                    for i, c in enumerate(d["channels"])
                )
            )
        if t == "convex":
            return ConvexCombine(
                tuple(
                    (
                        float(c["weight"]),
                        channel_from_dict(c["channel"], f"{where}.components[{i}]"),
                    )
                    for i, c in enumerate(d["components"])
                )
            )
    except KeyError as exc:
        raise ValidationError(f"{where}: missing key {exc} for type '{t}'") from exc
    raise ValidationError(f"{where}: unknown channel type '{t}'")


# --- monotonicity / convexity checks ----------------------------------------


@dataclass(frozen=True)
class MarginReport:
    """Negativity drop across a channel: margin = N(before) - N(after).
    skipped is set (and passed meaningless) when either side was not
    evaluable at the given settings."""

    margin: Optional[float]
    n_before: Optional[float]
    n_after: Optional[float]
    passed: bool
    skipped: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "margin": self.margin,
            "n_before": self.n_before,
            "n_after": self.n_after,
            "passed": self.passed,
            "skipped": self.skipped,
            "detail": self.detail,
        }


def check_weak_monotonicity(
    state: "StateSpec | ChiFunction",
    channel: ChannelSpec,
    s: float,
    filt: Optional[FilterSpec] = None,
    grid: Optional[GridSpec] = None,
    tol: float = 1e-3,
) -> MarginReport:
    """Check that the order-s negativity does not grow across the channel."""
    chi = state if isinstance(state, ChiFunction) else char_evaluator(state)
    try:
        before = negativity(chi, s, filt, grid)
        after = negativity(apply_channel(channel, chi), s, filt, grid)
    except GuardError as exc:
        return MarginReport(
            margin=None,
            n_before=None,
            n_after=None,
            passed=False,
            skipped=True,
            detail=f"not evaluable at these settings: {exc}",
        )
    margin = before.value - after.value
    return MarginReport(
        margin=margin,
        n_before=before.value,
        n_after=after.value,
        passed=margin >= -tol,
        skipped=False,
    )


@dataclass(frozen=True)
class BoundReport:
    """The finite-width approximate-monotone bound
    (1 + 2*delta)*N_w(state) + delta >= N_w(channel(state)) at equal width."""

    lhs: Optional[float]
    rhs: Optional[float]
    delta: float
    slack: Optional[float]
    passed: bool
    skipped: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "delta": self.delta,
            "slack": self.slack,
            "passed": self.passed,
            "skipped": self.skipped,
            "detail": self.detail,
        }


def check_approx_monotonicity(
    state: "StateSpec | ChiFunction",
    channel: ChannelSpec,
    epsilon: float,
    w: float,
    grid: Optional[GridSpec] = None,
    tol: float = 1e-3,
    delta: Optional[float] = None,
) -> BoundReport:
    """Evaluate both sides of the approximate-monotone bound at the same w.

    delta may be passed in to reuse a precomputed filter error constant;
    otherwise it is computed at unit width on the default window.
    """
    filt = FilterSpec("power_exp", w, epsilon)
    if delta is None:
        delta = filter_negativity_delta(filt.with_width(1.0)).delta
    chi = state if isinstance(state, ChiFunction) else char_evaluator(state)
    try:
        before = negativity(chi, 1.0, filt, grid)
        after = negativity(apply_channel(channel, chi), 1.0, filt, grid)
    except GuardError as exc:
        return BoundReport(
            lhs=None,
            rhs=None,
            delta=delta,
            slack=None,
            passed=False,
            skipped=True,
            detail=f"not evaluable at these settings: {exc}",
        )
    lhs = (1.0 + 2.0 * delta) * before.value + delta
    slack = lhs - after.value
    return BoundReport(
        lhs=lhs,
        rhs=after.value,
        delta=delta,
        slack=slack,
        passed=slack >= -tol,
        skipped=False,
    )


@dataclass(frozen=True)
class ConvexityReport:
    """margin = sum_i p_i N(rho_i) - N(mixture), evaluated on one shared grid
    so the comparison is exact up to float addition."""

    mixture_value: float
    weighted_sum: float
    margin: float
    passed: bool
    grid: GridSpec

    def to_dict(self) -> dict:
        return {
            "mixture_value": self.mixture_value,
            "weighted_sum": self.weighted_sum,
            "margin": self.margin,
            "passed": self.passed,
            "grid": self.grid.to_dict(),
        }


def check_convexity(
    components: Sequence,
    s: float,
    filt: Optional[FilterSpec] = None,
    grid: Optional[GridSpec] = None,
    tol: float = 1e-3,
) -> ConvexityReport:
    """Check N(sum_i p_i rho_i) <= sum_i p_i N(rho_i) for weighted states."""
    from .engine import resolve_grid

    comps = tuple((float(w), st) for w, st in components)
    mixture = Mixture(comps)
    if grid is None:
        grid = resolve_grid(mixture, s, filt)
    mix_res = negativity(mixture, s, filt, grid)
    weighted = 0.0
    for wgt, st in comps:
        weighted += wgt * negativity(st, s, filt, grid).value
    margin = weighted - mix_res.value
    return ConvexityReport(
        mixture_value=mix_res.value,
        weighted_sum=weighted,
        margin=margin,
        passed=margin >= -tol,
        grid=grid,
    )
