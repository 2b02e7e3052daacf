"""Closed-form rate/equivocation results for the binary source with erased side information.

Uninformed encoder: regions L1-L4 in the (d1, d2) plane. Informed encoder:
regimes G1-G5, which overlap, plus the parametric frontier used in G4/G5.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .model import DomainError, binary_entropy

UNINFORMED_REGIONS = ("L1", "L2", "L3", "L4")
INFORMED_REGIMES = ("G1", "G2", "G3", "G4", "G5")
DEFAULT_ALPHA_POINTS = 513

# slack used when checking h's operand after regioning
_EDGE = 1e-12


class RegimeError(ValueError):
    """Closed forms requested outside the regimes that have them."""


class ConsistencyError(RuntimeError):
    pass


def _validate(d1: float, d2: float | None, p: float) -> None:
    if not (0.0 < p < 1.0):
        raise DomainError(f"p must lie in (0, 1), got {p}")
    if d1 < 0 or not math.isfinite(d1):
        raise DomainError(f"d1 must be a nonnegative number, got {d1}")
    if d2 is not None and (d2 < 0 or not math.isfinite(d2)):
        raise DomainError(f"d2 must be a nonnegative number, got {d2}")


def h(a: float) -> float:
    return binary_entropy(min(max(a, 0.0), 1.0))


def side_info_entropy(p: float) -> float:
    """H(Y) = h(p) + 1 - p, the equivocation ceiling."""
    return h(p) + 1.0 - p


# -- uninformed encoder -----------------------------------------------------

def classify_uninformed(d1: float, d2: float, p: float) -> str:
    _validate(d1, d2, p)
    if d1 >= 0.5:
        return "L1" if d2 >= p / 2 else "L2"
    return "L3" if d2 >= p * d1 else "L4"


def _hcheck(arg: float) -> float:
    if arg < -_EDGE or arg > 0.5 + _EDGE:
        raise ConsistencyError(f"binary entropy operand {arg} outside [0, 1/2] after regioning")
    return h(min(max(arg, 0.0), 0.5))


def rate_uninformed_detail(d1: float, d2: float, p: float) -> tuple[str, float, bool]:
    """Return (region, rate, clamped) with distortions capped at (1/2, p/2)."""
    region = classify_uninformed(d1, d2, p)
    c1, c2 = min(d1, 0.5), min(d2, p / 2)
    clamped = (c1, c2) != (d1, d2)
    if region == "L1":
        rate = 0.0
    elif region == "L2":
        rate = p * (1.0 - _hcheck(c2 / p))
    elif region == "L3":
        rate = 1.0 - _hcheck(c1)
    else:
        rate = p * (1.0 - _hcheck(c2 / p)) + (1.0 - p) * (1.0 - _hcheck(c1))
    return region, max(rate, 0.0), clamped


def rate_uninformed(d1: float, d2: float, p: float) -> float:
    return rate_uninformed_detail(d1, d2, p)[1]


def equivocation_uninformed(d1: float, p: float) -> float:
    _validate(d1, None, p)
    if d1 <= 0.5:
        return h(p) + (1.0 - p) * h(d1)
    return h(p) + (1.0 - p)


# -- informed encoder -------------------------------------------------------

def classify_informed(d1: float, d2: float, p: float) -> tuple[str, ...]:
    """All regimes whose defining inequalities hold, in label order.

    G5 is taken as the residual region and additionally requires d1 < 1/2.
    """
    _validate(d1, d2, p)
    half_q = (1.0 - p) / 2
    labels = []
    if d1 >= 0.5 and d2 >= p / 2:
        labels.append("G1")
    if d1 >= 0.5 and d2 <= p / 2:
        labels.append("G2")
    if d1 >= d2 + half_q and d2 <= p / 2:
        labels.append("G3")
    if d1 <= 0.5 and d2 >= d1:
        labels.append("G4")
    if d1 < 0.5 and d1 <= d2 + half_q and d2 <= d1:
        labels.append("G5")
    return tuple(labels)


def rate_equivocation_informed_closed(d1: float, d2: float, p: float):
    from .model import RDEPoint

    labels = set(classify_informed(d1, d2, p))
    closed = labels & {"G1", "G2", "G3"}
    if not closed:
        raise RegimeError(
            f"({d1}, {d2}) at p={p} lies only in {sorted(labels)}; use frontier_informed"
        )
    rates = []
    if "G1" in closed:
        rates.append(0.0)
    if closed & {"G2", "G3"}:
        rates.append(p * (1.0 - h(min(d2, p / 2) / p)))
    return RDEPoint(rate=max(min(rates), 0.0), d1=d1, d2=d2, equivocation=side_info_entropy(p))


def perfect_privacy_achievable(d1: float, d2: float, p: float) -> bool:
    return bool(set(classify_informed(d1, d2, p)) & {"G1", "G2", "G3"})


@dataclass(frozen=True)
class FrontierPoint:
    alpha: float
    beta: float
    rate: float
    equivocation: float


@dataclass
class FrontierSweep:
    regime: str
    optimality: str
    alpha_max: float
    points: list[FrontierPoint] = field(default_factory=list)
    rejected: list[tuple[float, str]] = field(default_factory=list)


def frontier_value(d1: float, p: float, alpha: float) -> FrontierPoint:
    """Rate and equivocation of the two-crossover test channel at a given alpha."""
    beta = (d1 - p * alpha) / (1.0 - p)
    rate = 1.0 - (1.0 - p) * h(beta) - p * h(alpha)
    equiv = h(p) + (1.0 - p) * h(beta)
    return FrontierPoint(alpha=alpha, beta=beta, rate=max(rate, 0.0), equivocation=equiv)


def frontier_regime(d1: float, d2: float, p: float) -> tuple[str, float]:
    """Pick G4 (tight) or G5 (achievable only) and the admissible alpha upper end."""
    labels = classify_informed(d1, d2, p)
    if "G4" in labels:
        return "G4", d1 / p
    if "G5" in labels:
        return "G5", d2 / p
    raise RegimeError(f"({d1}, {d2}) at p={p} lies in {list(labels)}, not in G4 or G5")


def default_alpha_grid(alpha_max: float, points: int = DEFAULT_ALPHA_POINTS) -> list[float]:
    return [float(a) for a in np.linspace(0.0, alpha_max, points)]


def frontier_informed(d1: float, d2: float, p: float,
                      alpha_grid: Iterable[float] | None = None) -> FrontierSweep:
    regime, alpha_max = frontier_regime(d1, d2, p)
    sweep = FrontierSweep(regime=regime,
                          optimality="tight" if regime == "G4" else "achievable-only",
                          alpha_max=alpha_max)
    grid = default_alpha_grid(alpha_max) if alpha_grid is None else alpha_grid
    for alpha in grid:
        alpha = float(alpha)
        if alpha < -_EDGE or alpha > alpha_max + _EDGE:
            sweep.rejected.append((alpha, f"alpha outside [0, {alpha_max:.12g}]"))
            continue
        alpha = min(max(alpha, 0.0), alpha_max)
        beta = (d1 - p * alpha) / (1.0 - p)
        if beta < -_EDGE or beta > 0.5 + _EDGE:
            sweep.rejected.append((alpha, f"beta={beta:.12g} outside [0, 1/2]"))
            continue
        pt = frontier_value(d1, p, alpha)
        sweep.points.append(FrontierPoint(alpha, min(max(pt.beta, 0.0), 0.5), pt.rate, pt.equivocation))
    return sweep


def informed_envelope_equivocation(rate: float, d1: float, p: float, iters: int = 200) -> float:
    """Largest equivocation compatible with ``rate`` and decoder-1 distortion ``d1``.

    Scans the symmetric two-crossover family with beta at its largest value
    allowed by d1 (capped at 1/2). Returns -inf if no member has rate at most
    ``rate``.
    """
    if d1 < 0 or not (0.0 < p < 1.0):
        raise DomainError("invalid inputs to envelope")
    d1 = min(d1, 0.5)
    a_hi = min(0.5, d1 / p)

    def point(alpha):
        beta = min(0.5, max((d1 - p * alpha) / (1.0 - p), 0.0))
        return (1.0 - (1.0 - p) * h(beta) - p * h(alpha)), h(p) + (1.0 - p) * h(beta)

    # rate is non-increasing on [0, a_turn]; the turn is where alpha meets beta
    a_turn = min(a_hi, d1)
    r0, e0 = point(0.0)
    if r0 <= rate:
        return e0
    r_turn, _ = point(a_turn)
    if r_turn > rate:
        return -math.inf
    lo, hi = 0.0, a_turn
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if point(mid)[0] <= rate:
            hi = mid
        else:
            lo = mid
    return point(hi)[1]


# -- sweeps -----------------------------------------------------------------

@dataclass(frozen=True)
class CurveRow:
    d1: float
    d2: float
    p: float
    region: str
    rate: float
    equivocation: float
    clamped: bool = False
    admissible: bool = True
    alpha: float | None = None
    note: str = ""


def _uninformed_row(d1: float, d2: float, p: float) -> CurveRow:
    try:
        region, rate, clamped = rate_uninformed_detail(d1, d2, p)
        equiv = equivocation_uninformed(d1, p)
    except (DomainError, ConsistencyError) as exc:
        return CurveRow(d1, d2, p, "", math.nan, math.nan, admissible=False, note=str(exc))
    return CurveRow(d1, d2, p, region, rate, equiv, clamped=clamped)


def _informed_rows(d1: float, d2: float, p: float, alpha_grid) -> list[CurveRow]:
    try:
        labels = classify_informed(d1, d2, p)
    except DomainError as exc:
        return [CurveRow(d1, d2, p, "", math.nan, math.nan, admissible=False, note=str(exc))]
    label = ";".join(labels)
    if set(labels) & {"G1", "G2", "G3"}:
        pt = rate_equivocation_informed_closed(d1, d2, p)
        clamped = d2 > p / 2 and "G1" not in labels
        return [CurveRow(d1, d2, p, label, pt.rate, pt.equivocation, clamped=clamped)]
    sweep = frontier_informed(d1, d2, p, alpha_grid)
    rows = [CurveRow(d1, d2, p, label, fp.rate, fp.equivocation, alpha=fp.alpha)
            for fp in sweep.points]
    rows += [CurveRow(d1, d2, p, label, math.nan, math.nan, admissible=False, alpha=a, note=why)
             for a, why in sweep.rejected]
    return rows


def curve_sweep(case: str, p: float, fixed: str, fixed_value: float, grid: Sequence[float],
                alpha_grid: Sequence[float] | None = None) -> list[CurveRow]:
    """Rows over ``grid`` for the free distortion, the other held at ``fixed_value``.

    Informed points in G4/G5 expand into one row per alpha (grid order).
    Inadmissible points come back flagged rather than dropped.
    """
    if case not in ("uninformed", "informed"):
        raise ValueError(f"case must be 'uninformed' or 'informed', got {case!r}")
    if fixed not in ("d1", "d2"):
        raise ValueError(f"fixed must be 'd1' or 'd2', got {fixed!r}")
    rows: list[CurveRow] = []
    for g in grid:
        d1, d2 = (fixed_value, float(g)) if fixed == "d1" else (float(g), fixed_value)
        if case == "uninformed":
            rows.append(_uninformed_row(d1, d2, p))
        else:
            rows.extend(_informed_rows(d1, d2, p, alpha_grid))
    return rows
