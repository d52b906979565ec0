"""Radial potential wells and Aharonov-Bohm flux arithmetic.

A well is a compactly supported radial potential v with a unique
non-degenerate minimum at r = 0:

    supp v in [0, sigma],   k := min v = v(0) < 0,   v''(0) > 0,

and all odd derivatives of v vanish at 0 (v extends to an even smooth
function of r).  The flux enters every spectral formula only through

    e0 = e(alpha/h),    e(t) = inf_m |t - m|  (m integer),

the distance from alpha/h to the nearest integer.  e is 1-periodic and
even, so shifting alpha by h (at fixed h) changes nothing downstream.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "RadialPotential",
    "FluxParams",
    "WellPairConfig",
    "WellValidation",
    "make_bump_well",
    "make_quadratic_well",
    "flux_params",
    "validate_well",
    "flux_residue",
    "config_to_dict",
    "config_from_dict",
    "load_config",
    "dump_config",
]

#: tolerance below which alpha/h counts as an exact half-integer
HALF_INTEGER_TOL = 1e-12

#: finite-difference step for the fourth derivative at 0 (Richardson refined)
_V4_STEP = 1e-3


@dataclass(frozen=True)
class RadialPotential:
    """A radial well with certified derivatives at the origin.

    ``v``, ``dv``, ``d2v`` accept scalars or arrays.  ``beta`` is
    v''(0)/2 and ``v4_0`` is the fourth radial derivative at 0; both are
    consumed by the harmonic-approximation and transport formulas.
    """

    v: Callable[[np.ndarray], np.ndarray]
    dv: Callable[[np.ndarray], np.ndarray]
    d2v: Callable[[np.ndarray], np.ndarray]
    sigma: float
    k: float
    beta: float
    v4_0: float
    family: str = "custom"
    params: dict = field(default_factory=dict)

    @property
    def vpp0(self) -> float:
        """Second derivative v''(0)."""
        return 2.0 * self.beta


@dataclass(frozen=True)
class FluxParams:
    """Flux alpha, semiclassical h, and every derived flux quantity."""

    alpha: float
    h: float
    t: float            # alpha / h
    e0: float           # distance from t to the nearest integer, in [0, 1/2]
    m_star: int         # smallest integer with |m_star - t| = e0
    gamma0: float       # m_star - t, in {-e0, +e0}
    half_integer: bool


@dataclass(frozen=True)
class WellPairConfig:
    """Two copies of one well at (-L/2, 0) and (L/2, 0), plus the flux."""

    potential: RadialPotential
    L: float
    flux: FluxParams

    def __post_init__(self):
        if not self.L > 2.0 * self.potential.sigma:
            raise ValueError(
                f"well separation L={self.L} must exceed 2*sigma="
                f"{2.0 * self.potential.sigma} so the wells do not overlap"
            )


def make_bump_well(k: float, sigma: float) -> RadialPotential:
    """Reference well family: v(r) = k*exp(1 - sigma^2/(sigma^2 - r^2)).

    Smooth, identically zero for r >= sigma, minimum k at r = 0.
    Derivatives are analytic:

        v'  = -v * w',   v'' = v * (w'^2 - w''),   w(r) = sigma^2/(sigma^2 - r^2).
    """
    if k >= 0:
        raise ValueError(f"well depth k must be negative, got {k}")
    if sigma <= 0:
        raise ValueError(f"support radius sigma must be positive, got {sigma}")

    s2 = sigma * sigma

    def v(r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        inside = np.abs(r) < sigma
        q = s2 - r[inside] ** 2
        out[inside] = k * np.exp(1.0 - s2 / q)
        return out if out.ndim else float(out)

    def dv(r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        inside = np.abs(r) < sigma
        ri = r[inside]
        q = s2 - ri**2
        wp = 2.0 * ri * s2 / q**2
        out[inside] = -k * np.exp(1.0 - s2 / q) * wp
        return out if out.ndim else float(out)

    def d2v(r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        inside = np.abs(r) < sigma
        ri = r[inside]
        q = s2 - ri**2
        wp = 2.0 * ri * s2 / q**2
        wpp = 2.0 * s2 * (s2 + 3.0 * ri**2) / q**3
        out[inside] = k * np.exp(1.0 - s2 / q) * (wp**2 - wpp)
        return out if out.ndim else float(out)

    # Taylor at 0: v = k(1 - u - u^2/2 + O(u^3)), u = (r/sigma)^2, hence
    # v''(0) = -2k/sigma^2 and v''''(0) = -12k/sigma^4.
    return RadialPotential(
        v=v,
        dv=dv,
        d2v=d2v,
        sigma=float(sigma),
        k=float(k),
        beta=-k / s2,
        v4_0=-12.0 * k / (s2 * s2),
        family="bump",
        params={"k": float(k), "sigma": float(sigma)},
    )


def make_quadratic_well(beta: float, k: float = 0.0, sigma: float = math.inf) -> RadialPotential:
    """Pure quadratic model v(r) = k + beta*r^2 (not compactly supported).

    Useful as the local oscillator model: the transport phase vanishes
    identically for it.  Not a valid double-well ingredient.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")

    def v(r):
        r = np.asarray(r, dtype=float)
        out = k + beta * r**2
        return out if out.ndim else float(out)

    def dv(r):
        r = np.asarray(r, dtype=float)
        out = 2.0 * beta * r
        return out if out.ndim else float(out)

    def d2v(r):
        r = np.asarray(r, dtype=float)
        out = np.full_like(r, 2.0 * beta)
        return out if out.ndim else float(out)

    return RadialPotential(
        v=v, dv=dv, d2v=d2v, sigma=float(sigma), k=float(k),
        beta=float(beta), v4_0=0.0, family="quadratic",
        params={"beta": float(beta), "k": float(k)},
    )


def flux_residue(t: float) -> float:
    """e(t) = distance from t to the nearest integer, in [0, 1/2]."""
    frac = t - math.floor(t)
    return min(frac, 1.0 - frac)


def flux_params(alpha: float, h: float) -> FluxParams:
    """All flux arithmetic for a given (alpha, h).

    m_star is the smallest integer at distance e0 from t = alpha/h; at an
    exact half-integer t both floor(t) and floor(t)+1 qualify and the
    smaller one is taken, giving gamma0 = m_star - t = -1/2.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if h <= 0:
        raise ValueError(f"h must be positive, got {h}")
    t = alpha / h
    fl = math.floor(t)
    frac = t - fl
    half_integer = abs(frac - 0.5) < HALF_INTEGER_TOL
    if half_integer:
        m_star = fl
        e0 = 0.5
    elif frac < 0.5:
        m_star = fl
        e0 = frac
    else:
        m_star = fl + 1
        e0 = 1.0 - frac
    return FluxParams(
        alpha=float(alpha),
        h=float(h),
        t=t,
        e0=float(e0),
        m_star=int(m_star),
        gamma0=float(m_star - t) if not half_integer else -0.5,
        half_integer=half_integer,
    )


@dataclass
class WellValidation:
    """Per-invariant report from :func:`validate_well`."""

    ok: bool
    support_ok: bool
    min_ok: bool
    curvature_ok: bool
    derivatives_ok: bool
    measured_vpp0: float
    measured_v4_0: float
    messages: list

    def __bool__(self):
        return self.ok


def _fd_vpp0(v, step: float) -> float:
    """Central second difference at 0 with one Richardson sweep."""
    def d2(s):
        return (v(s) - 2.0 * v(0.0) + v(-s)) / s**2

    return (4.0 * d2(step) - d2(2.0 * step)) / 3.0


def _fd_v4_0(v, step: float) -> float:
    """Central fourth difference at 0 with one Richardson sweep."""
    def d4(s):
        return (v(2 * s) - 4 * v(s) + 6 * v(0.0) - 4 * v(-s) + v(-2 * s)) / s**4

    return (16.0 * d4(step) - d4(2.0 * step)) / 15.0


def validate_well(p: RadialPotential, grid_n: int = 512) -> WellValidation:
    """Check the admissibility conditions on a fine radial grid.

    Reports rather than raises: each violated condition appends a message
    and clears the corresponding flag.  Also returns finite-difference
    measurements of v''(0) and v''''(0) so user-supplied wells need only
    provide C^2 data.
    """
    if grid_n < 100:
        raise ValueError("grid_n must be at least 100")
    msgs = []
    sigma = p.sigma
    v = p.v

    # compact support
    support_ok = True
    if math.isfinite(sigma):
        r_out = np.linspace(sigma, 3.0 * sigma, grid_n)
        if np.max(np.abs(p.v(r_out))) > 1e-14:
            support_ok = False
            msgs.append("v does not vanish on [sigma, 3*sigma]")
    else:
        support_ok = False
        msgs.append("v is not compactly supported")

    # negative, unique minimum at 0
    min_ok = True
    if not p.k < 0 or abs(float(v(0.0)) - p.k) > 1e-12 * max(1.0, abs(p.k)):
        min_ok = False
        msgs.append(f"min v = v(0) = {float(v(0.0))} is not the declared negative depth {p.k}")
    r_in = np.linspace(0.0, min(sigma, 1e6), grid_n + 1)[1:]
    if np.min(v(r_in) - p.k) <= 0:
        min_ok = False
        msgs.append("v attains its minimum away from r = 0")

    # non-degenerate minimum, odd derivative vanishing
    curvature_ok = True
    measured_vpp0 = _fd_vpp0(v, 1e-4 * min(sigma, 1.0) if math.isfinite(sigma) else 1e-4)
    if measured_vpp0 <= 0:
        curvature_ok = False
        msgs.append(f"measured v''(0) = {measured_vpp0} is not positive")
    if abs(float(p.dv(0.0))) > 1e-10:
        curvature_ok = False
        msgs.append(f"dv(0) = {float(p.dv(0.0))} does not vanish")

    # derivative fields consistent with central finite differences
    derivatives_ok = True
    r_s = np.linspace(0.05 * min(sigma, 1.0), 0.9 * min(sigma, 1.0), 24)
    step = 1e-5 * min(sigma, 1.0)
    fd1 = (v(r_s + step) - v(r_s - step)) / (2 * step)
    fd2 = (v(r_s + step) - 2 * v(r_s) + v(r_s - step)) / step**2
    scale1 = np.maximum(np.abs(fd1), 1e-8)
    scale2 = np.maximum(np.abs(fd2), 1e-8)
    if np.max(np.abs(p.dv(r_s) - fd1) / scale1) > 1e-6:
        derivatives_ok = False
        msgs.append("dv disagrees with central differences of v beyond 1e-6 relative")
    if np.max(np.abs(p.d2v(r_s) - fd2) / scale2) > 1e-6:
        derivatives_ok = False
        msgs.append("d2v disagrees with central differences of v beyond 1e-6 relative")

    step4 = _V4_STEP * min(sigma, 1.0) if math.isfinite(sigma) else _V4_STEP
    measured_v4 = _fd_v4_0(v, step4)

    ok = support_ok and min_ok and curvature_ok and derivatives_ok
    return WellValidation(
        ok=ok,
        support_ok=support_ok,
        min_ok=min_ok,
        curvature_ok=curvature_ok,
        derivatives_ok=derivatives_ok,
        measured_vpp0=measured_vpp0,
        measured_v4_0=measured_v4,
        messages=msgs,
    )


# ---------------------------------------------------------------------------
# configuration documents


def well_from_dict(d: dict) -> RadialPotential:
    family = d.get("family", "bump")
    if family == "bump":
        return make_bump_well(k=float(d["k"]), sigma=float(d["sigma"]))
    if family == "quadratic":
        return make_quadratic_well(beta=float(d["beta"]), k=float(d.get("k", 0.0)))
    raise ValueError(f"unknown well family {family!r}")


def config_from_dict(d: dict) -> WellPairConfig:
    """Build a two-well configuration from a plain JSON-style document.

    Expected shape: ``{"well": {"family": "bump", "k": -1.0, "sigma": 1.0},
    "L": 2.5, "alpha": 0.3, "h": 0.1}``.
    """
    try:
        well = well_from_dict(d["well"])
        L = float(d["L"])
        flux = flux_params(float(d["alpha"]), float(d["h"]))
    except KeyError as exc:
        raise ValueError(f"configuration document missing key {exc}") from exc
    return WellPairConfig(potential=well, L=L, flux=flux)


def config_to_dict(cfg: WellPairConfig) -> dict:
    if cfg.potential.family not in ("bump", "quadratic"):
        raise ValueError("only named well families serialize; custom callables do not")
    return {
        "well": {"family": cfg.potential.family, **cfg.potential.params},
        "L": cfg.L,
        "alpha": cfg.flux.alpha,
        "h": cfg.flux.h,
    }


def load_config(path) -> WellPairConfig:
    with open(path, "r", encoding="utf-8") as f:
        return config_from_dict(json.load(f))


def dump_config(cfg: WellPairConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(config_to_dict(cfg), f, indent=2)
        f.write("\n")
