"""Catalog of single-mode states with exactly evaluable characteristic
functions, plus closed-form quasiprobabilities where they exist (used as
oracles against the transform path).

With beta = x + i*y, the order-s characteristic function is
chi_s(beta) = chi(beta) * exp(-(1-s)*pi^2*|beta|^2/2), s <= 1, where chi is
the s=1 (P-function) characteristic function:

    coherent a0:            exp[2*pi*i*(y*Re a0 + x*Im a0)]
    thermal nbar:           exp(-nbar*pi^2*|beta|^2)
    fock n:                 L_n(pi^2*|beta|^2)
    squeezed vacuum r:      exp{(pi^2/2)[(s-e^{2r})x^2 + (s-e^{-2r})y^2]}
                            (the s dependence is already inside)
    photon-added thermal:   [1 - pi^2*(1+nbar)*|beta|^2] * exp(-nbar*pi^2*|beta|^2)

The photon-added-thermal exponent is the Fourier pair of its closed-form
quasiprobability P(a) = ((1+nbar)/(pi*nbar^3))(|a|^2 - nbar/(1+nbar))e^{-|a|^2/nbar};
the transform-consistency tests pin it down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .errors import ValidationError

__all__ = [
    "Coherent",
    "Thermal",
    "Fock",
    "SqueezedVacuum",
    "PhotonAddedThermal",
    "Mixture",
    "StateSpec",
    "validate_order",
    "laguerre",
    "char_fn",
    "char_evaluator",
    "ChiFunction",
    "analytic_quasiprob",
    "bound_check",
    "BoundReport",
    "state_to_dict",
    "state_from_dict",
    "state_label",
]

PI2 = math.pi**2

# |X| below which a sampled quasiprobability is considered fully decayed when
# sizing windows: exp(-DECAY_LOG) ~ 1e-12.
DECAY_LOG = 12.0 * math.log(10.0)

MAX_MIXTURE_DEPTH = 4


def validate_order(s: float) -> float:
    """Order parameter: s=1 P-function, s=0 Wigner, s=-1 Husimi. Must be <= 1."""
    s = float(s)
    if not s <= 1.0:
        raise ValidationError(f"order parameter must satisfy s <= 1, got {s}")
    return s


@dataclass(frozen=True)
class Coherent:
    alpha0: complex

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha0", complex(self.alpha0))


@dataclass(frozen=True)
class Thermal:
    nbar: float

    def __post_init__(self) -> None:
        if not self.nbar >= 0:
            raise ValidationError(f"thermal nbar must be >= 0, got {self.nbar}")


@dataclass(frozen=True)
class Fock:
    n: int

    def __post_init__(self) -> None:
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 0):
            raise ValidationError(f"fock n must be an integer >= 0, got {self.n}")


@dataclass(frozen=True)
class SqueezedVacuum:
    r: float


@dataclass(frozen=True)
class PhotonAddedThermal:
    nbar: float

    def __post_init__(self) -> None:
        if not self.nbar > 0:
            raise ValidationError(
                f"photon-added thermal nbar must be > 0, got {self.nbar}"
            )


@dataclass(frozen=True)
class Mixture:
    components: tuple

    def __post_init__(self) -> None:
        comps = tuple((float(w), st) for w, st in self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise ValidationError("mixture needs at least one component")
        if any(w <= 0 for w, _ in comps):
            raise ValidationError("mixture weights must be > 0")
        total = math.fsum(w for w, _ in comps)
        if abs(total - 1.0) > 1e-12:
            raise ValidationError(f"mixture weights must sum to 1, got {total!r}")
        if _depth(self) > MAX_MIXTURE_DEPTH:
            raise ValidationError(f"mixture nesting deeper than {MAX_MIXTURE_DEPTH}")


StateSpec = Union[Coherent, Thermal, Fock, SqueezedVacuum, PhotonAddedThermal, Mixture]


def _depth(state: StateSpec) -> int:
    if isinstance(state, Mixture):
        return 1 + max(_depth(st) for _, st in state.components)
    return 0


def laguerre(n: int, x: np.ndarray) -> np.ndarray:
    """Laguerre polynomial L_n by the three-term upward recurrence
    (k+1) L_{k+1} = (2k+1-x) L_k - k L_{k-1}; stable for the small n used here.
    """
    x = np.asarray(x)
    prev = np.ones_like(x)
    if n == 0:
        return prev
    cur = 1.0 - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 - x) * cur - k * prev) / (k + 1)
    return cur


def _base_char(state: StateSpec, beta: np.ndarray) -> np.ndarray:
    """chi at s=1 (squeezed vacuum handled separately in char_fn)."""
    b2 = beta.real**2 + beta.imag**2
    if isinstance(state, Coherent):
        a0 = state.alpha0
        return np.exp(2j * np.pi * (beta.imag * a0.real + beta.real * a0.imag))
    if isinstance(state, Thermal):
        return np.exp(-state.nbar * PI2 * b2)
    if isinstance(state, Fock):
        return laguerre(state.n, PI2 * b2).astype(np.complex128)
    if isinstance(state, PhotonAddedThermal):
        nb = state.nbar
        return (1.0 - PI2 * (1.0 + nb) * b2) * np.exp(-nb * PI2 * b2)
    if isinstance(state, Mixture):
        acc = np.zeros_like(b2, dtype=np.complex128)
        for w, st in state.components:
            acc = acc + w * _base_char_dispatch(st, beta)
        return acc
    raise TypeError(f"not a StateSpec: {state!r}")


def _base_char_dispatch(state: StateSpec, beta: np.ndarray) -> np.ndarray:
    if isinstance(state, SqueezedVacuum):
        return _squeezed_char(state.r, 1.0, beta)
    return _base_char(state, beta)


def _squeezed_char(r: float, s: float, beta: np.ndarray) -> np.ndarray:
    x, y = beta.real, beta.imag
    ex = (PI2 / 2.0) * ((s - math.exp(2 * r)) * x**2 + (s - math.exp(-2 * r)) * y**2)
    return np.exp(ex).astype(np.complex128)


def char_fn(state: StateSpec, s: float, beta) -> "np.ndarray | complex":
    """Evaluate chi_s(beta); beta may be a complex scalar or array."""
    s = validate_order(s)
    b = np.asarray(beta, dtype=np.complex128)
    if isinstance(state, SqueezedVacuum):
        out = _squeezed_char(state.r, s, b)
    elif isinstance(state, Mixture):
        out = np.zeros(b.shape, dtype=np.complex128)
        for w, st in state.components:
            out = out + w * np.asarray(char_fn(st, s, b))
    else:
        b2 = b.real**2 + b.imag**2
        out = _base_char(state, b) * np.exp(-(1.0 - s) * PI2 * b2 / 2.0)
    if np.isscalar(beta) or np.asarray(beta).ndim == 0:
        return complex(out)
    return out


@dataclass(frozen=True)
class ChiFunction:
    """A vectorized s=1 characteristic-function evaluator with the metadata the
    engine needs to size windows: an estimated radius in alpha enclosing the
    quasiprobability mass, and a display label.  Channel application composes
    these without losing exactness.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    alpha_support: float
    label: str

    def __call__(self, beta: np.ndarray) -> np.ndarray:
        return self.fn(beta)


def _alpha_support(state: StateSpec) -> float:
    # Radius (from the origin) outside which the s=1 quasiprobability mass is
    # negligible; order/filter widening is added by the engine.
    if isinstance(state, Coherent):
        return abs(state.alpha0) + 0.5
    if isinstance(state, Thermal):
        return math.sqrt(max(state.nbar, 0.05) * DECAY_LOG) + 0.5
    if isinstance(state, Fock):
        return math.sqrt(state.n) + 1.0
    if isinstance(state, PhotonAddedThermal):
        return math.sqrt(state.nbar * DECAY_LOG) + 1.0
    if isinstance(state, SqueezedVacuum):
        # widest quadratic decay coefficient of chi across s <= 1 sets the
        # extent of the (filtered) quasiprobability along the stretched axis
        a = (PI2 / 2.0) * math.exp(2 * abs(state.r))
        return math.sqrt(a * DECAY_LOG) / math.pi + 1.0
    if isinstance(state, Mixture):
        return max(_alpha_support(st) for _, st in state.components)
    raise TypeError(f"not a StateSpec: {state!r}")


def char_evaluator(state: StateSpec) -> ChiFunction:
    """Bundle the s=1 chi of a catalog state for the engine/channel layer."""
    fn = lambda beta: np.asarray(char_fn(state, 1.0, beta))  # noqa: E731
    return ChiFunction(fn=fn, alpha_support=_alpha_support(state), label=state_label(state))


# --- closed-form quasiprobabilities (oracles) -------------------------------


def analytic_quasiprob(state: StateSpec, s: float, alpha) -> Optional[float]:
    """Closed-form P_s(alpha) where available, else None.

    Available: Fock with -1 < s < 1; photon-added thermal at s=1; thermal at
    s <= 1; coherent at s < 1.  The coherent s=1 quasiprobability is a delta
    distribution and is not representable pointwise.
    """
    s = validate_order(s)
    a = complex(alpha)
    u = abs(a) ** 2
    if isinstance(state, Fock):
        if not (-1.0 < s < 1.0):
            return None
        pref = (2.0 / (math.pi * (1.0 - s))) * (-(1.0 + s) / (1.0 - s)) ** state.n
        return float(
            pref
            * math.exp(-2.0 * u / (1.0 - s))
            * laguerre(state.n, np.asarray(4.0 * u / (1.0 - s * s)))
        )
    if isinstance(state, PhotonAddedThermal):
        if s != 1.0:
            return None
        nb = state.nbar
        return float(
            (1.0 + nb) / (math.pi * nb**3) * (u - nb / (1.0 + nb)) * math.exp(-u / nb)
        )
    if isinstance(state, Thermal):
        v = state.nbar + (1.0 - s) / 2.0
        if v <= 0:  # nbar=0 at s=1: vacuum P is a delta
            return None
        return float(math.exp(-u / v) / (math.pi * v))
    if isinstance(state, Coherent):
        if s >= 1.0:
            return None
        d = abs(a - state.alpha0) ** 2
        return float(2.0 / (math.pi * (1.0 - s)) * math.exp(-2.0 * d / (1.0 - s)))
    return None


# --- physical bound check ----------------------------------------------------


@dataclass(frozen=True)
class BoundReport:
    """Result of checking |chi_s(beta)| <= exp(pi^2*|beta|^2/2) on a sample set."""

    max_ratio: float
    worst_beta: complex
    passed: bool


def bound_check(state: StateSpec, s: float, betas) -> BoundReport:
    """Check the physical-growth bound on the given sample points.

    At s=1 this is the bound every physical characteristic function obeys;
    for s < 1 the extra Gaussian factor only helps, so the same bound is used.
    """
    s = validate_order(s)
    b = np.asarray(betas, dtype=np.complex128).ravel()
    vals = np.abs(np.asarray(char_fn(state, s, b)))
    cap = np.exp((PI2 / 2.0) * (b.real**2 + b.imag**2))
    ratio = vals / cap
    i = int(np.argmax(ratio))
    return BoundReport(
        max_ratio=float(ratio[i]),
        worst_beta=complex(b[i]),
        passed=bool(ratio[i] <= 1.0 + 1e-12),
    )


# --- structured-text serialization ------------------------------------------


def _complex_to_json(z: complex):
    return [z.real, z.imag]


def _complex_from_json(v, where: str) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise ValidationError(f"{where}: expected a number or [re, im] pair, got {v!r}")


def state_to_dict(state: StateSpec) -> dict:
    if isinstance(state, Coherent):
        return {"type": "coherent", "alpha0": _complex_to_json(state.alpha0)}
    if isinstance(state, Thermal):
        return {"type": "thermal", "nbar": state.nbar}
    if isinstance(state, Fock):
        return {"type": "fock", "n": state.n}
    if isinstance(state, SqueezedVacuum):
        return {"type": "squeezed_vacuum", "r": state.r}
    if isinstance(state, PhotonAddedThermal):
        return {"type": "photon_added_thermal", "nbar": state.nbar}
    if isinstance(state, Mixture):
        return {
            "type": "mixture",
            "components": [
                {"weight": w, "state": state_to_dict(st)} for w, st in state.components
            ],
        }
    raise TypeError(f"not a StateSpec: {state!r}")


def state_from_dict(d: dict, where: str = "state") -> StateSpec:
    if not isinstance(d, dict) or "type" not in d:
        raise ValidationError(f"{where}: expected an object with a 'type' key")
    t = d["type"]
    try:
        if t == "coherent":
            return Coherent(_complex_from_json(d["alpha0"], f"{where}.alpha0"))
        if t == "thermal":
            return Thermal(float(d["nbar"]))
        if t == "fock":
            return Fock(int(d["n"]))
        if t == "squeezed_vacuum":
            return SqueezedVacuum(float(d["r"]))
        if t == "photon_added_thermal":
            return PhotonAddedThermal(float(d["nbar"]))
        if t == "mixture":
            comps = tuple(
                (
                    float(c["weight"]),
                    state_from_dict(c["state"], f"{where}.components[{i}]"),
                )
                for i, c in enumerate(d["components"])
            )
            return Mixture(comps)
    except KeyError as exc:
        raise ValidationError(f"{where}: missing key {exc} for type '{t}'") from exc
    raise ValidationError(f"{where}: unknown state type '{t}'")


def state_label(state: StateSpec) -> str:
    if isinstance(state, Coherent):
        return f"coherent(alpha0={state.alpha0:g})"
    if isinstance(state, Thermal):
        return f"thermal(nbar={state.nbar:g})"
    if isinstance(state, Fock):
        return f"fock(n={state.n})"
    if isinstance(state, SqueezedVacuum):
        return f"squeezed_vacuum(r={state.r:g})"
    if isinstance(state, PhotonAddedThermal):
        return f"photon_added_thermal(nbar={state.nbar:g})"
    if isinstance(state, Mixture):
        inner = " + ".join(f"{w:g}*{state_label(st)}" for w, st in state.components)
        return f"mixture({inner})"
    raise TypeError(f"not a StateSpec: {state!r}")
