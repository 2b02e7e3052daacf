"""Finite-alphabet probability machinery shared by the rest of the package.

All information quantities are in bits. Probability tables are numpy arrays;
the thin dataclasses below carry alphabets alongside them and validate on
construction.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

ERASURE = "E"

INPUT_TOL = 1e-9
BUILD_TOL = 1e-12
_TINY = 1e-300


class ValidationError(ValueError):
    """A probability table or distortion measure is malformed."""


class DomainError(ValueError):
    """A scalar parameter lies outside its admissible range."""


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple[str, ...]

    def __post_init__(self):
        syms = tuple(str(s) for s in self.symbols)
        object.__setattr__(self, "symbols", syms)
        if len(syms) < 1:
            raise ValidationError("alphabet must contain at least one symbol")
        if len(set(syms)) != len(syms):
            raise ValidationError(f"duplicate symbols in alphabet {syms}")

    @property
    def size(self) -> int:
        return len(self.symbols)

    def index(self, symbol: str) -> int:
        return self.symbols.index(str(symbol))

    @classmethod
    def of_size(cls, k: int, prefix: str = "w") -> "Alphabet":
        if k == 1:
            return cls(("phi",))
        return cls(tuple(f"{prefix}{i}" for i in range(k)))


BINARY = Alphabet(("0", "1"))
ERASED = Alphabet(("0", "1", ERASURE))


def _check_table(probs: np.ndarray, tol: float, what: str) -> None:
    if not np.all(np.isfinite(probs)):
        raise ValidationError(f"{what} has non-finite entries")
    if np.any(probs < 0):
        raise ValidationError(f"{what} has negative entries")


@dataclass(frozen=True)
class JointPMF:
    """Joint pmf p(row, col) over two finite alphabets."""

    row_alphabet: Alphabet
    col_alphabet: Alphabet
    probs: np.ndarray = field(repr=False)
    tol: float = field(default=INPUT_TOL, repr=False, compare=False)

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float)
        shape = (self.row_alphabet.size, self.col_alphabet.size)
        if probs.shape != shape:
            raise ValidationError(f"table shape {probs.shape} does not match alphabets {shape}")
        _check_table(probs, self.tol, "joint pmf")
        if abs(probs.sum() - 1.0) > self.tol:
            raise ValidationError(f"joint pmf sums to {probs.sum()!r}, not 1")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    def prob(self, row: str, col: str) -> float:
        return float(self.probs[self.row_alphabet.index(row), self.col_alphabet.index(col)])

    @property
    def row_marginal(self) -> np.ndarray:
        return self.probs.sum(axis=1)

    @property
    def col_marginal(self) -> np.ndarray:
        return self.probs.sum(axis=0)

    def transpose(self) -> "JointPMF":
        return JointPMF(self.col_alphabet, self.row_alphabet, self.probs.T, tol=self.tol)


@dataclass(frozen=True)
class ConditionalPMF:
    """Conditional pmf with array layout ``given sizes + out sizes``.

    For example ``p(w1, w2 | x, y)`` is stored with shape
    ``(|X|, |Y|, |W1|, |W2|)``.
    """

    given_alphabets: tuple[Alphabet, ...]
    out_alphabets: tuple[Alphabet, ...]
    probs: np.ndarray = field(repr=False)
    tol: float = field(default=INPUT_TOL, repr=False, compare=False)

    def __post_init__(self):
        given = tuple(self.given_alphabets)
        out = tuple(self.out_alphabets)
        object.__setattr__(self, "given_alphabets", given)
        object.__setattr__(self, "out_alphabets", out)
        probs = np.array(self.probs, dtype=float)
        shape = tuple(a.size for a in given + out)
        if probs.shape != shape:
            raise ValidationError(f"table shape {probs.shape} does not match alphabets {shape}")
        _check_table(probs, self.tol, "conditional pmf")
        out_axes = tuple(range(len(given), len(given) + len(out)))
        sums = probs.sum(axis=out_axes)
        if np.max(np.abs(sums - 1.0)) > self.tol:
            raise ValidationError("conditional pmf rows do not sum to 1")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)


@dataclass(frozen=True)
class ErasedSourceParams:
    p: float

    def __post_init__(self):
        if not (0.0 <= self.p <= 1.0) or not np.isfinite(self.p):
            raise DomainError(f"erasure probability must lie in [0, 1], got {self.p}")


@dataclass(frozen=True)
class DistortionMeasure:
    """Distortion table d(x, xhat), source alphabet by reconstruction alphabet."""

    table: np.ndarray = field(repr=False)

    def __post_init__(self):
        t = np.array(self.table, dtype=float)
        if t.ndim != 2:
            raise ValidationError("distortion table must be two-dimensional")
        if not np.all(np.isfinite(t)) or np.any(t < 0):
            raise ValidationError("distortion entries must be finite and nonnegative")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @classmethod
    def hamming(cls, k: int = 2) -> "DistortionMeasure":
        return cls(1.0 - np.eye(k))


@dataclass(frozen=True)
class RDEPoint:
    rate: float
    d1: float
    d2: float
    equivocation: float

    def __post_init__(self):
        for name in ("rate", "d1", "d2", "equivocation"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be nonnegative")

    def as_dict(self) -> dict:
        return {"rate": self.rate, "d1": self.d1, "d2": self.d2, "equivocation": self.equivocation}


def make_erased_source(params: ErasedSourceParams | float) -> JointPMF:
    """Uniform binary X observed through an erasure channel with probability p.

    Rows are X in {0, 1}; columns are Y in {0, 1, E}.
    """
    if not isinstance(params, ErasedSourceParams):
        params = ErasedSourceParams(float(params))
    p = params.p
    probs = np.array([[(1 - p) / 2, 0.0, p / 2], [0.0, (1 - p) / 2, p / 2]])
    return JointPMF(BINARY, ERASED, probs, tol=BUILD_TOL)


def binary_entropy(a: float) -> float:
    if not (0.0 <= a <= 1.0):
        raise DomainError(f"binary entropy argument must lie in [0, 1], got {a}")
    b = 1.0 - a
    out = 0.0
    if a > _TINY:
        out -= a * np.log2(a)
    if b > _TINY:
        out -= b * np.log2(b)
    return float(out)


def h2(a):
    """Vectorised binary entropy; no range checks beyond clipping to [0, 1]."""
    a = np.clip(np.asarray(a, dtype=float), 0.0, 1.0)
    b = 1.0 - a
    with np.errstate(divide="ignore", invalid="ignore"):
        ta = np.where(a > _TINY, -a * np.log2(np.where(a > _TINY, a, 1.0)), 0.0)
        tb = np.where(b > _TINY, -b * np.log2(np.where(b > _TINY, b, 1.0)), 0.0)
    out = ta + tb
    return float(out) if out.ndim == 0 else out


def table_entropy(probs: np.ndarray) -> float:
    """Entropy of an unvalidated table of probabilities, 0 log 0 = 0."""
    q = np.asarray(probs, dtype=float).ravel()
    q = q[q > _TINY]
    return float(-np.dot(q, np.log2(q)))


def entropy(pmf: Sequence[float] | np.ndarray) -> float:
    q = np.asarray(pmf, dtype=float)
    if np.any(q < 0):
        raise ValidationError("pmf has negative entries")
    if abs(q.sum() - 1.0) > INPUT_TOL:
        raise ValidationError(f"pmf sums to {q.sum()!r}, not 1")
    return table_entropy(q)


def _as_joint(joint) -> np.ndarray:
    if isinstance(joint, JointPMF):
        return joint.probs
    arr = np.asarray(joint, dtype=float)
    if np.any(arr < 0) or abs(arr.sum() - 1.0) > INPUT_TOL:
        raise ValidationError("invalid joint pmf")
    return arr


def conditional_entropy(joint: JointPMF | np.ndarray, target: str | int = "row") -> float:
    """H(target | other axis) for a two-axis joint pmf."""
    probs = _as_joint(joint)
    axis = {"row": 0, "col": 1, 0: 0, 1: 1}.get(target)
    if axis is None:
        raise ValueError(f"target must be 'row' or 'col', got {target!r}")
    other = probs.sum(axis=axis)
    return table_entropy(probs) - table_entropy(other)


def mutual_information(joint: JointPMF | np.ndarray) -> float:
    probs = _as_joint(joint)
    mi = table_entropy(probs.sum(axis=1)) + table_entropy(probs.sum(axis=0)) - table_entropy(probs)
    if mi < -1e-12:
        raise ValidationError(f"negative mutual information {mi}")
    return max(mi, 0.0)


def hamming(x, xhat) -> int:
    xs, xh = str(x), str(xhat)
    if xs not in ("0", "1") or xh not in ("0", "1"):
        raise DomainError(f"hamming distortion needs binary symbols, got {x!r}, {xhat!r}")
    return int(xs != xh)


# Multi-variable helpers on raw joint arrays. Axes are integer positions.

def marginal(joint: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    keep = tuple(sorted(keep))
    drop = tuple(i for i in range(joint.ndim) if i not in keep)
    return joint.sum(axis=drop) if drop else joint


def joint_entropy(joint: np.ndarray, axes: Sequence[int]) -> float:
    if len(axes) == 0:
        return 0.0
    return table_entropy(marginal(joint, axes))


def cond_entropy(joint: np.ndarray, target: Sequence[int], given: Sequence[int] = ()) -> float:
    """H(target | given) for variables laid out along the axes of ``joint``."""
    both = tuple(set(target) | set(given))
    return joint_entropy(joint, both) - joint_entropy(joint, given)


def cond_mutual_information(joint: np.ndarray, a: Sequence[int], b: Sequence[int],
                            given: Sequence[int] = ()) -> float:
    """I(a; b | given), clamped at zero from below."""
    g = tuple(given)
    val = (joint_entropy(joint, tuple(set(a) | set(g)))
           + joint_entropy(joint, tuple(set(b) | set(g)))
           - joint_entropy(joint, tuple(set(a) | set(b) | set(g)))
           - joint_entropy(joint, g))
    return max(val, 0.0)
