"""Single-letter evaluation of auxiliary test channels and randomized checks against the closed forms."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import closed_form as cf
from .model import (
    BINARY,
    Alphabet,
    ConditionalPMF,
    DistortionMeasure,
    DomainError,
    JointPMF,
    RDEPoint,
    ValidationError,
    cond_entropy,
    cond_mutual_information,
    make_erased_source,
    table_entropy,
)

# joint array axes: X, Y, W1, W2
AX_X, AX_Y, AX_W1, AX_W2 = 0, 1, 2, 3
FEAS_SLACK = 1e-9
_TIE = 1e-12


class RangeError(ValueError):
    """A named test channel was requested outside its parameter range."""


def _caps(n_x: int) -> tuple[int, int]:
    return n_x + 2, (n_x + 1) ** 2


@dataclass(frozen=True)
class UninformedCandidate:
    """Test channel p(w1, w2 | x); the Markov chain Y - X - (W1, W2) holds by construction."""

    channel: ConditionalPMF

    def __post_init__(self):
        if len(self.channel.given_alphabets) != 1 or len(self.channel.out_alphabets) != 2:
            raise ValidationError("uninformed channel must be p(w1, w2 | x)")
        cap1, cap2 = _caps(self.channel.given_alphabets[0].size)
        if self.w1_alphabet.size > cap1 or self.w2_alphabet.size > cap2:
            raise ValidationError(
                f"auxiliary alphabets ({self.w1_alphabet.size}, {self.w2_alphabet.size}) exceed caps ({cap1}, {cap2})"
            )

    @property
    def w1_alphabet(self) -> Alphabet:
        return self.channel.out_alphabets[0]

    @property
    def w2_alphabet(self) -> Alphabet:
        return self.channel.out_alphabets[1]

    @property
    def informed(self) -> bool:
        return False

    @classmethod
    def from_array(cls, probs, x_alphabet: Alphabet = BINARY, tol: float = 1e-9) -> "UninformedCandidate":
        probs = np.asarray(probs, dtype=float)
        w1 = Alphabet.of_size(probs.shape[1], "a")
        w2 = Alphabet.of_size(probs.shape[2], "b")
        return cls(ConditionalPMF((x_alphabet,), (w1, w2), probs, tol=tol))

    def joint(self, source: JointPMF) -> np.ndarray:
        return source.probs[:, :, None, None] * self.channel.probs[:, None, :, :]


@dataclass(frozen=True)
class InformedCandidate:
    """Test channel p(w1, w2 | x, y)."""

    channel: ConditionalPMF

    def __post_init__(self):
        if len(self.channel.given_alphabets) != 2 or len(self.channel.out_alphabets) != 2:
            raise ValidationError("informed channel must be p(w1, w2 | x, y)")
        cap1, cap2 = _caps(self.channel.given_alphabets[0].size)
        if self.w1_alphabet.size > cap1 or self.w2_alphabet.size > cap2:
            raise ValidationError(
                f"auxiliary alphabets ({self.w1_alphabet.size}, {self.w2_alphabet.size}) exceed caps ({cap1}, {cap2})"
            )

    @property
    def w1_alphabet(self) -> Alphabet:
        return self.channel.out_alphabets[0]

    @property
    def w2_alphabet(self) -> Alphabet:
        return self.channel.out_alphabets[1]

    @property
    def informed(self) -> bool:
        return True

    @classmethod
    def from_array(cls, probs, x_alphabet: Alphabet = BINARY, y_alphabet: Alphabet | None = None,
                   tol: float = 1e-9) -> "InformedCandidate":
        from .model import ERASED

        probs = np.asarray(probs, dtype=float)
        y_alphabet = ERASED if y_alphabet is None else y_alphabet
        w1 = Alphabet.of_size(probs.shape[2], "a")
        w2 = Alphabet.of_size(probs.shape[3], "b")
        return cls(ConditionalPMF((x_alphabet, y_alphabet), (w1, w2), probs, tol=tol))

    def joint(self, source: JointPMF) -> np.ndarray:
        return source.probs[:, :, None, None] * self.channel.probs


@dataclass(frozen=True)
class EvaluatedCandidate:
    point: RDEPoint
    decoder1: np.ndarray  # w1 -> xhat index
    decoder2: np.ndarray  # (w1, w2, y) -> xhat index
    candidate: UninformedCandidate | InformedCandidate | None = None


def _bayes_decoder(cost: np.ndarray) -> tuple[np.ndarray, float]:
    """Minimise expected cost over the last axis; near-ties go to the smallest index."""
    best = cost.min(axis=-1, keepdims=True)
    near = cost <= best + _TIE * np.maximum(1.0, np.abs(best))
    dec = np.argmax(near, axis=-1)
    achieved = float(np.take_along_axis(cost, dec[..., None], axis=-1).sum())
    return dec, achieved


def _decoders(q: np.ndarray, d1: np.ndarray, d2: np.ndarray):
    # q axes: X, Y, W1, W2
    p_x_w1 = q.sum(axis=(1, 3))
    cost1 = np.einsum("xw,xk->wk", p_x_w1, d1)
    f1, dist1 = _bayes_decoder(cost1)
    cost2 = np.einsum("xyab,xk->abyk", q, d2)
    f2, dist2 = _bayes_decoder(cost2)
    return f1, max(dist1, 0.0), f2, max(dist2, 0.0)


def _measure(m) -> np.ndarray:
    if m is None:
        return DistortionMeasure.hamming(2).table
    return m.table if isinstance(m, DistortionMeasure) else np.asarray(m, dtype=float)


def _check_alphabets(cand, source: JointPMF) -> None:
    gx = cand.channel.given_alphabets[0]
    if gx.size != source.row_alphabet.size:
        raise ValidationError("candidate input alphabet does not match the source X alphabet")
    if cand.informed and cand.channel.given_alphabets[1].size != source.col_alphabet.size:
        raise ValidationError("candidate side-information alphabet does not match the source Y alphabet")


def _evaluate(q: np.ndarray, informed: bool, d1m, d2m, cand=None) -> EvaluatedCandidate:
    if informed:
        r1 = cond_mutual_information(q, (AX_X, AX_Y), (AX_W1,))
    else:
        r1 = cond_mutual_information(q, (AX_X,), (AX_W1,))
    r2 = cond_mutual_information(q, (AX_X,), (AX_W2,), (AX_W1, AX_Y))
    equiv = max(cond_entropy(q, (AX_Y,), (AX_W1,)), 0.0)
    f1, dist1, f2, dist2 = _decoders(q, _measure(d1m), _measure(d2m))
    point = RDEPoint(rate=r1 + r2, d1=dist1, d2=dist2, equivocation=equiv)
    return EvaluatedCandidate(point, f1, f2, cand)


def evaluate_uninformed(cand: UninformedCandidate, source: JointPMF, d1_measure=None,
                        d2_measure=None) -> EvaluatedCandidate:
    """Rate I(X;W1) + I(X;W2|W1,Y), equivocation H(Y|W1), Bayes-optimal distortions."""
    _check_alphabets(cand, source)
    return _evaluate(cand.joint(source), False, d1_measure, d2_measure, cand)


def evaluate_informed(cand: InformedCandidate, source: JointPMF, d1_measure=None,
                      d2_measure=None) -> EvaluatedCandidate:
    """Rate I(X,Y;W1) + I(X;W2|W1,Y), equivocation H(Y|W1), Bayes-optimal distortions."""
    _check_alphabets(cand, source)
    return _evaluate(cand.joint(source), True, d1_measure, d2_measure, cand)


def evaluate(cand, source: JointPMF, d1_measure=None, d2_measure=None) -> EvaluatedCandidate:
    if cand.informed:
        return evaluate_informed(cand, source, d1_measure, d2_measure)
    return evaluate_uninformed(cand, source, d1_measure, d2_measure)


# -- named test channels ----------------------------------------------------

def _bsc(eps: float) -> np.ndarray:
    return np.array([[1.0 - eps, eps], [eps, 1.0 - eps]])


def _check_p(p: float) -> None:
    if not (0.0 < p < 1.0):
        raise RangeError(f"p must lie in (0, 1), got {p}")


def paper_channel_L2(p: float, d2: float) -> UninformedCandidate:
    """W1 empty, W2 = X xor Bernoulli(d2/p)."""
    _check_p(p)
    if not (0.0 <= d2 <= p / 2):
        raise RangeError(f"L2 channel needs 0 <= d2 <= p/2, got d2={d2}, p={p}")
    probs = _bsc(d2 / p)[:, None, :]
    return UninformedCandidate.from_array(probs)


def paper_channel_L3(p: float, d1: float) -> UninformedCandidate:
    """W1 = X xor Bernoulli(d1), W2 empty."""
    _check_p(p)
    if not (0.0 <= d1 <= 0.5):
        raise RangeError(f"L3 channel needs 0 <= d1 <= 1/2, got {d1}")
    probs = _bsc(d1)[:, :, None]
    return UninformedCandidate.from_array(probs)


def l4_inner_crossover(p: float, d1: float, d2: float) -> float:
    q = d2 / p
    num = d1 - q
    return 0.0 if num == 0.0 else num / (1.0 - 2.0 * q)


def paper_channel_L4(p: float, d1: float, d2: float) -> UninformedCandidate:
    """W2 = X xor Bernoulli(d2/p), W1 = W2 xor Bernoulli(alpha)."""
    _check_p(p)
    if not (0.0 <= d1 <= 0.5):
        raise RangeError(f"L4 channel needs d1 <= 1/2, got {d1}")
    if not (0.0 <= d2 <= p * d1):
        raise RangeError(f"L4 channel needs d2 <= p*d1, got d2={d2}, p*d1={p * d1}")
    if not d2 / p < 0.5:
        raise RangeError("L4 channel needs d2/p < 1/2")
    alpha = l4_inner_crossover(p, d1, d2)
    # p(w1, w2 | x) = p(w2 | x) p(w1 | w2)
    probs = np.einsum("xb,ba->xab", _bsc(d2 / p), _bsc(alpha))
    return UninformedCandidate.from_array(probs)


def paper_channel_G3(p: float, d2: float) -> InformedCandidate:
    """Unerased y: W1 uniform, independent of (x, y). Erased y: W1 = X xor Bernoulli(d2/p)."""
    _check_p(p)
    if not (0.0 <= d2 <= p / 2):
        raise RangeError(f"G3 channel needs 0 <= d2 <= p/2, got d2={d2}, p={p}")
    probs = np.zeros((2, 3, 2, 1))
    probs[:, 0:2, :, 0] = 0.5
    probs[:, 2, :, 0] = _bsc(d2 / p)
    return InformedCandidate.from_array(probs)


def paper_channel_G4(p: float, d1: float, alpha: float) -> InformedCandidate:
    """Unerased y: W1 = X xor Bernoulli(beta). Erased y: W1 = X xor Bernoulli(alpha)."""
    _check_p(p)
    if not (0.0 <= alpha <= d1 / p + 1e-15):
        raise RangeError(f"G4 channel needs 0 <= alpha <= d1/p, got alpha={alpha}")
    beta = (d1 - p * alpha) / (1.0 - p)
    if not (-1e-15 <= beta <= 0.5 + 1e-15):
        raise RangeError(f"G4 channel needs beta in [0, 1/2], got {beta}")
    beta = min(max(beta, 0.0), 0.5)
    alpha = min(alpha, 1.0)
    probs = np.zeros((2, 3, 2, 1))
    probs[:, 0:2, :, 0] = _bsc(beta)[:, None, :]
    probs[:, 2, :, 0] = _bsc(alpha)
    return InformedCandidate.from_array(probs)


# -- random exploration -----------------------------------------------------

@dataclass(frozen=True)
class SearchConfig:
    restarts: int = 8
    steps: int = 200
    step_scale: float = 0.3
    seed: int = 0
    d1: float = 0.5
    d2: float = 0.5
    e: float | None = None
    w1_size: int = 2
    w2_size: int = 2

    def __post_init__(self):
        if self.restarts < 1 or self.steps < 1:
            raise ValidationError("restarts and steps must be at least 1")
        if not self.step_scale > 0:
            raise ValidationError("step_scale must be positive")


@dataclass
class SearchResult:
    best: EvaluatedCandidate | None
    samples: int
    feasible: int
    best_restart: int | None = None

    @property
    def found(self) -> bool:
        return self.best is not None


def _dirichlet_channel(rng: np.random.Generator, given_shape: tuple, out_shape: tuple,
                       concentration: float = 1.0) -> np.ndarray:
    k = int(np.prod(out_shape))
    rows = rng.dirichlet(np.full(k, concentration), size=given_shape)
    return rows.reshape(given_shape + out_shape)


def _perturb(ch: np.ndarray, rng: np.random.Generator, scale: float, n_given: int) -> np.ndarray:
    noisy = ch * np.exp(scale * rng.standard_normal(ch.shape))
    noisy = np.maximum(noisy, 1e-300)
    axes = tuple(range(n_given, ch.ndim))
    return noisy / noisy.sum(axis=axes, keepdims=True)


def _violation(pt: RDEPoint, cfg: SearchConfig) -> float:
    v = max(pt.d1 - cfg.d1, 0.0) + max(pt.d2 - cfg.d2, 0.0)
    if cfg.e is not None:
        v += max(cfg.e - pt.equivocation, 0.0)
    return v


def _feasible(pt: RDEPoint, cfg: SearchConfig) -> bool:
    ok = pt.d1 <= cfg.d1 + FEAS_SLACK and pt.d2 <= cfg.d2 + FEAS_SLACK
    if cfg.e is not None:
        ok = ok and pt.equivocation >= cfg.e - FEAS_SLACK
    return ok


def random_search(case: str, source: JointPMF, config: SearchConfig, d1_measure=None,
                  d2_measure=None) -> SearchResult:
    """Penalised hill climbing over test channels; returns the lowest-rate feasible one.

    Restart 0 starts from an input-independent channel (rate zero); the rest
    from Dirichlet-uniform rows. Each restart draws from its own generator
    seeded by (seed, restart), so results do not depend on execution order.
    """
    if case not in ("uninformed", "informed"):
        raise ValueError(f"case must be 'uninformed' or 'informed', got {case!r}")
    informed = case == "informed"
    nx, ny = source.probs.shape
    cap1, cap2 = _caps(nx)
    if config.w1_size > cap1 or config.w2_size > cap2:
        raise ValidationError("search alphabet sizes exceed cardinality caps")
    given = (nx, ny) if informed else (nx,)
    out = (config.w1_size, config.w2_size)
    build = InformedCandidate.from_array if informed else UninformedCandidate.from_array
    penalty = 20.0

    best, best_restart, samples, feasible = None, None, 0, 0
    for r in range(config.restarts):
        rng = np.random.default_rng([config.seed, r])
        if r == 0:
            row = _dirichlet_channel(rng, (), out)
            ch = np.broadcast_to(row, given + out).copy()
        else:
            ch = _dirichlet_channel(rng, given, out)
        ev = evaluate(build(ch), source, d1_measure, d2_measure)
        score = ev.point.rate + penalty * _violation(ev.point, config)
        for step in range(config.steps + 1):
            samples += 1
            if _feasible(ev.point, config):
                feasible += 1
                if best is None or ev.point.rate < best.point.rate:
                    best, best_restart = ev, r
            if step == config.steps:
                break
            trial_ch = _perturb(ch, rng, config.step_scale, len(given))
            trial = evaluate(build(trial_ch), source, d1_measure, d2_measure)
            tscore = trial.point.rate + penalty * _violation(trial.point, config)
            if tscore <= score:
                ch, ev, score = trial_ch, trial, tscore
    return SearchResult(best=best, samples=samples, feasible=feasible, best_restart=best_restart)


def closed_form_bound(case: str, p: float, d1: float, d2: float, e: float | None = None) -> dict:
    """Minimal rate the closed forms allow at the given targets, for reporting."""
    if case == "uninformed":
        gamma = cf.equivocation_uninformed(d1, p)
        if e is not None and e > gamma + FEAS_SLACK:
            return {"rate": math.inf, "optimality": "tight", "note": "equivocation above ceiling"}
        return {"rate": cf.rate_uninformed(d1, d2, p), "optimality": "tight"}
    labels = cf.classify_informed(d1, d2, p)
    if e is not None and e > cf.side_info_entropy(p) + FEAS_SLACK:
        return {"rate": math.inf, "optimality": "tight", "note": "equivocation above H(Y)"}
    if set(labels) & {"G1", "G2", "G3"}:
        return {"rate": cf.rate_equivocation_informed_closed(d1, d2, p).rate, "optimality": "tight"}
    sweep = cf.frontier_informed(d1, d2, p)
    pts = [fp for fp in sweep.points if e is None or fp.equivocation >= e - FEAS_SLACK]
    rate = min((fp.rate for fp in pts), default=math.inf)
    return {"rate": rate, "optimality": sweep.optimality}


# -- converse stress tests --------------------------------------------------

@dataclass
class ConverseReport:
    case: str
    p: float
    samples: int
    violations: int = 0
    worst_margin: float = -math.inf
    examples: list = field(default_factory=list)


def _random_candidate_array(rng: np.random.Generator, given: tuple, cap1: int, cap2: int) -> np.ndarray:
    k1 = int(rng.integers(1, cap1 + 1))
    k2 = int(rng.integers(1, min(cap2, 4) + 1))
    conc = float(10 ** rng.uniform(-1.5, 0.5))
    if rng.random() < 0.3:
        # noisy structured channels land near the boundaries more often
        ch = _dirichlet_channel(rng, given, (k1, k2), conc)
        ch = _perturb(ch ** 3 / np.sum(ch ** 3, axis=tuple(range(len(given), len(given) + 2)),
                                        keepdims=True), rng, 0.1, len(given))
        return ch
    return _dirichlet_channel(rng, given, (k1, k2), conc)


def converse_stress_uninformed(p: float, samples: int, seed: int = 0, tol: float = 1e-9) -> ConverseReport:
    """Random channels never beat the closed-form rate or equivocation at their own distortions."""
    source = make_erased_source(p)
    rng = np.random.default_rng([seed, 1])
    rep = ConverseReport("uninformed", p, samples)
    for _ in range(samples):
        ch = _random_candidate_array(rng, (2,), 4, 9)
        ev = evaluate_uninformed(UninformedCandidate.from_array(ch), source)
        pt = ev.point
        r_min = cf.rate_uninformed(pt.d1, pt.d2, p)
        g_max = cf.equivocation_uninformed(pt.d1, p)
        margin = max(r_min - pt.rate, pt.equivocation - g_max)
        rep.worst_margin = max(rep.worst_margin, margin)
        if margin > tol:
            rep.violations += 1
            if len(rep.examples) < 5:
                rep.examples.append({"point": pt.as_dict(), "rate_bound": r_min, "equiv_bound": g_max})
    return rep


def converse_stress_informed(p: float, samples: int, seed: int = 0, tol: float = 1e-9) -> ConverseReport:
    """Random informed channels never land above-left of the decoder-1 frontier envelope.

    Each candidate with achieved (d1', d2') is feasible for the G4 target
    (d1', max(d1', d2')), so it is compared with the envelope at d1'.
    """
    source = make_erased_source(p)
    rng = np.random.default_rng([seed, 2])
    rep = ConverseReport("informed", p, samples)
    for _ in range(samples):
        ch = _random_candidate_array(rng, (2, 3), 4, 9)
        ev = evaluate_informed(InformedCandidate.from_array(ch), source)
        pt = ev.point
        e_max = cf.informed_envelope_equivocation(pt.rate + tol, pt.d1, p)
        margin = pt.equivocation - e_max
        rep.worst_margin = max(rep.worst_margin, margin)
        if margin > tol:
            rep.violations += 1
            if len(rep.examples) < 5:
                rep.examples.append({"point": pt.as_dict(), "envelope_equivocation": e_max})
    return rep


# -- symmetrisation ---------------------------------------------------------

@dataclass(frozen=True)
class SymmetrizationReport:
    params: tuple[float, float, float, float, float]
    values: dict
    equal_ok: bool
    rate_ok: bool
    equivocation_ok: bool

    @property
    def passed(self) -> bool:
        return self.equal_ok and self.rate_ok and self.equivocation_ok


def _decoder1_channel(a: float, b: float, c: float, d: float) -> np.ndarray:
    # p(xhat1 = 0 | x, y) for (x, y) in {(0,0), (1,1), (0,E), (1,E)}; unused cells never get mass
    ch = np.zeros((2, 3, 2))
    zero = {(0, 0): a, (1, 1): b, (0, 2): c, (1, 2): d, (0, 1): 0.5, (1, 0): 0.5}
    for (x, y), v in zero.items():
        ch[x, y] = (v, 1.0 - v)
    return ch


def _sym_values(ch: np.ndarray, source: np.ndarray) -> dict:
    q = source[:, :, None] * ch  # X, Y, Xhat
    dist = float(q[0, :, 1].sum() + q[1, :, 0].sum())
    rate = cond_mutual_information(q, (0, 1), (2,))
    equiv = cond_entropy(q, (1,), (2,))
    return {"distortion": dist, "rate": rate, "equivocation": equiv}


def symmetrize_check(a: float, b: float, c: float, d: float, p: float,
                     eq_tol: float = 1e-9, jensen_tol: float = 1e-12) -> SymmetrizationReport:
    for name, v in zip("abcd", (a, b, c, d)):
        if not (0.0 <= v <= 1.0):
            raise DomainError(f"{name} must lie in [0, 1], got {v}")
    if not (0.0 <= p <= 1.0):
        raise DomainError(f"p must lie in [0, 1], got {p}")
    src = make_erased_source(p).probs
    p1 = _decoder1_channel(a, b, c, d)
    p2 = _decoder1_channel(1 - b, 1 - a, 1 - d, 1 - c)
    p3 = 0.5 * (p1 + p2)
    v1, v2, v3 = (_sym_values(ch, src) for ch in (p1, p2, p3))
    equal_ok = all(abs(v1[k] - v2[k]) <= eq_tol for k in v1)
    rate_ok = v3["rate"] <= v1["rate"] + jensen_tol
    equiv_ok = v3["equivocation"] >= v1["equivocation"] - jensen_tol
    return SymmetrizationReport((a, b, c, d, p), {"P1": v1, "P2": v2, "P3": v3},
                                equal_ok, rate_ok, equiv_ok)


def symmetry_suite(samples: int, seed: int = 0, p: float | None = None) -> dict:
    rng = np.random.default_rng([seed, 3])
    passed = failed = 0
    failures = []
    for _ in range(samples):
        a, b, c, d = rng.random(4)
        pp = float(rng.random()) if p is None else p
        rep = symmetrize_check(float(a), float(b), float(c), float(d), pp)
        if rep.passed:
            passed += 1
        else:
            failed += 1
            if len(failures) < 5:
                failures.append({"params": list(rep.params), "values": rep.values})
    return {"samples": samples, "passed": passed, "failed": failed, "failures": failures}


def source_entropy_check(p: float) -> float:
    return table_entropy(make_erased_source(p).col_marginal)


def erasure_identity_gap(w1_given_x: np.ndarray, p: float) -> float:
    """|H(X|Y,W1) - p H(X|W1)| for a channel p(w1|x) on the erased source."""
    ch = np.asarray(w1_given_x, dtype=float)
    src = make_erased_source(p).probs
    joint = src[:, :, None] * ch[:, None, :]
    lhs = cond_entropy(joint, (0,), (1, 2))
    rhs = p * cond_entropy(joint, (0,), (2,))
    return abs(lhs - rhs)


def erasure_identity_suite(samples: int, ps=(0.25, 0.4), seed: int = 0) -> dict:
    """Largest identity gap over random channels with 1 to |X|+2 outputs, per p."""
    rng = np.random.default_rng([seed, 4])
    worst = {}
    for p in ps:
        gaps = []
        for _ in range(samples):
            k = int(rng.integers(1, 5))
            ch = rng.dirichlet(np.ones(k), size=2)
            gaps.append(erasure_identity_gap(ch, p))
        worst[p] = max(gaps) if gaps else 0.0
    return worst
