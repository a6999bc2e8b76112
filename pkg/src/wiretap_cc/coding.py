"""Two-layer random coding at small blocklengths.

Implements the executable half of the achievability story: sampling a
superposition codebook from an :class:`~wiretap_cc.capacity.AuxJoint`,
the stochastic encoder, a letter-typicality decoder, and measurement of
the four quantities a wiretap code is judged by (decoding error, input
cost, eavesdropper leakage, and the soft-covering deviation of the
eavesdropper's conditional output law from a product reference).

Leakage and the soft-covering deviation are computed exactly by
enumerating the eavesdropper's sequence space, never estimated; plug-in
mutual-information estimates are biased enough to drown the decay trends
these numbers exist to show.  The enumeration cap is a module constant.

Randomness is counter-based throughout: every stream is opened as
``default_rng([seed, purpose_tag, indices...])``, so codebook sampling,
encoding, channel noise, and cost trials are disjoint and reproducible
regardless of evaluation order or thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ._ascent import resolve_threads
from .capacity import AuxJoint
from .channel import WiretapChannel, marginal_kernels
from .errors import (
    DimensionMismatchError,
    MessageOutOfRangeError,
    SizeOverflowError,
    StateSpaceTooLargeError,
    ValidationError,
)
from .probability import JointPmf, conditional_mutual_information, mutual_information

__all__ = [
    "RateTriple",
    "SuperpositionCodebook",
    "ErrorEstimate",
    "RateRegionReport",
    "SimulationReport",
    "sample_codebook",
    "encode",
    "decode",
    "estimate_error",
    "exact_leakage",
    "exact_message_kl",
    "soft_covering_kl_bound",
    "theta",
    "check_rate_region",
    "measure_cost",
    "run_simulation",
    "simulation_report_to_dict",
]

MAX_CODEBOOK_CELLS = 1 << 24
MAX_EAVESDROPPER_STATES = 1 << 20

_TAG_CODEBOOK = 21
_TAG_ENCODER = 22
_TAG_TRIAL = 23
_TAG_COST = 24


@dataclass(frozen=True)
class RateTriple:
    """Message, inner-confusion, and outer-confusion rates in bits per use."""

    r: float
    r1: float
    r2: float

    def __post_init__(self):
        if min(self.r, self.r1, self.r2) < 0.0:
            raise ValidationError("rates must be nonnegative")


def _index_size(n: int, rate: float) -> int:
    # ceil of 2^(n r), nudged so float error in n*r cannot bump an exact
    # power of two up to the next integer
    return max(1, math.ceil(2.0 ** (n * rate) - 1e-9))


@dataclass(frozen=True)
class SuperpositionCodebook:
    """One sampled realization of the two-layer random code.

    ``u_words[i]`` is the inner word for confusion index i;
    ``v_words[i, j, m]`` refines it for outer index j and message m.  The
    generating distribution rides along because the encoder and decoder
    both need it.
    """

    n: int
    rates: RateTriple
    dist: AuxJoint
    u_words: np.ndarray
    v_words: np.ndarray
    seed: int

    @property
    def i_size(self) -> int:
        return self.v_words.shape[0]

    @property
    def j_size(self) -> int:
        return self.v_words.shape[1]

    @property
    def m_size(self) -> int:
        return self.v_words.shape[2]


def _conditional_rows(dist: AuxJoint) -> Tuple[np.ndarray, np.ndarray]:
    """(P_U, rows of P(V|U)); rows for zero-mass u are uniform placeholders."""
    theta = dist.p_uv.probs
    p_u = theta.sum(axis=1)
    rows = np.where(
        p_u[:, None] > 0.0,
        theta / np.where(p_u[:, None] > 0.0, p_u[:, None], 1.0),
        1.0 / theta.shape[1],
    )
    return p_u, rows


def sample_codebook(
    dist: AuxJoint,
    n: int,
    rates: RateTriple,
    seed: int,
    max_cells: int = MAX_CODEBOOK_CELLS,
) -> SuperpositionCodebook:
    """Draw inner words i.i.d. from P_U and outer words from P_{V|U}.

    Raises SizeOverflowError when the v-word tensor would exceed
    ``max_cells`` letters.
    """
    if n < 1:
        raise ValidationError("blocklength must be at least 1")
    i_size = _index_size(n, rates.r1)
    j_size = _index_size(n, rates.r2)
    m_size = _index_size(n, rates.r)
    cells = i_size * j_size * m_size * n
    if cells > max_cells:
        raise SizeOverflowError(
            f"codebook needs {cells} letters, cap is {max_cells}"
        )
    p_u, v_rows = _conditional_rows(dist)
    rng = np.random.default_rng([seed, _TAG_CODEBOOK])
    u_words = rng.choice(dist.u_size, size=(i_size, n), p=p_u)
    v_words = np.empty((i_size, j_size, m_size, n), dtype=np.int64)
    for i in range(i_size):
        for t in range(n):
            v_words[i, :, :, t] = rng.choice(
                dist.v_size, size=(j_size, m_size), p=v_rows[u_words[i, t]]
            )
    return SuperpositionCodebook(
        n=n, rates=rates, dist=dist,
        u_words=u_words, v_words=v_words, seed=seed,
    )


def _draw_input_word(cb: SuperpositionCodebook, m: int, rng) -> Tuple[int, int, np.ndarray]:
    i = int(rng.integers(cb.i_size))
    j = int(rng.integers(cb.j_size))
    q = cb.dist.p_x_given_v.rows
    x = np.empty(cb.n, dtype=np.int64)
    for t in range(cb.n):
        x[t] = rng.choice(q.shape[1], p=q[cb.v_words[i, j, m, t]])
    return i, j, x


def encode(cb: SuperpositionCodebook, m: int, seed: int) -> Tuple[int, int, np.ndarray]:
    """Pick (i, j) uniformly and pass v(i, j, m) letterwise through P(X|V)."""
    if not 0 <= m < cb.m_size:
        raise MessageOutOfRangeError(f"message {m} outside [0, {cb.m_size})")
    rng = np.random.default_rng([seed, _TAG_ENCODER, m])
    return _draw_input_word(cb, m, rng)


def _uvy_pmf(cb: SuperpositionCodebook, ch: WiretapChannel) -> np.ndarray:
    w_y, _ = marginal_kernels(ch)
    k_y = cb.dist.p_x_given_v.rows @ w_y.rows
    return cb.dist.p_uv.probs[:, :, None] * k_y[None, :, :]


def decode(
    cb: SuperpositionCodebook,
    ch: WiretapChannel,
    y_sequence: Sequence[int],
    delta: float = 0.2,
) -> int:
    """Unique-typical-tuple decoding; falls back to the first message.

    Scans every (i, j, m) and tests the empirical joint law of
    (u(i), v(i,j,m), y) against the code's design law with multiplicative
    letter-typicality margin ``delta``.  When exactly one tuple passes,
    its message index is returned; with zero or several, message 0.
    Uniqueness is over full tuples: two passing tuples that agree on m
    still fall back, matching the stated decoding rule.
    """
    y = np.asarray(y_sequence, dtype=np.int64)
    if y.shape != (cb.n,):
        raise DimensionMismatchError(f"y must have length {cb.n}")
    if y.min() < 0 or y.max() >= ch.y_size:
        raise ValidationError("y contains symbols outside the output alphabet")
    u_n, v_n, y_n = cb.dist.u_size, cb.dist.v_size, ch.y_size
    p = _uvy_pmf(cb, ch).reshape(-1)

    pair = cb.u_words[:, None, None, :] * v_n + cb.v_words  # (I, J, M, n)
    bins = (pair * y_n + y[None, None, None, :]).reshape(-1, cb.n)
    tuples = bins.shape[0]
    width = u_n * v_n * y_n
    offsets = np.arange(tuples, dtype=np.int64)[:, None] * width
    counts = np.bincount(
        (bins + offsets).reshape(-1), minlength=tuples * width
    ).reshape(tuples, width)
    freq = counts / cb.n
    typical = np.all(np.abs(freq - p[None, :]) <= delta * p[None, :], axis=1)
    if typical.sum() != 1:
        return 0
    flat = int(np.flatnonzero(typical)[0])
    return flat % cb.m_size


@dataclass(frozen=True)
class ErrorEstimate:
    """Monte Carlo decoding-error rates with binomial 95% half-widths."""

    avg_error: float
    max_error: float
    per_message: np.ndarray
    half_widths: np.ndarray
    trials: int

    @property
    def avg_half_width(self) -> float:
        p = self.per_message
        var_sum = float((p * (1.0 - p)).sum()) / self.trials
        return 1.96 * math.sqrt(var_sum) / p.size

    @property
    def max_half_width(self) -> float:
        return float(self.half_widths[int(np.argmax(self.per_message))])


def _transmit_y(ch: WiretapChannel, x: np.ndarray, rng) -> np.ndarray:
    w_y, _ = marginal_kernels(ch)
    y = np.empty(x.size, dtype=np.int64)
    for t in range(x.size):
        y[t] = rng.choice(ch.y_size, p=w_y.rows[x[t]])
    return y


def _message_error(cb, ch, m, trials, delta, seed) -> float:
    wrong = 0
    for t in range(trials):
        rng = np.random.default_rng([seed, _TAG_TRIAL, m, t])
        _, _, x = _draw_input_word(cb, m, rng)
        y = _transmit_y(ch, x, rng)
        if decode(cb, ch, y, delta) != m:
            wrong += 1
    return wrong / trials


def estimate_error(
    cb: SuperpositionCodebook,
    ch: WiretapChannel,
    trials: int,
    delta: float = 0.2,
    seed: int = 0,
    threads: Optional[int] = None,
) -> ErrorEstimate:
    """Per-message decoding-error estimates from ``trials`` runs each.

    Every (message, trial) pair owns a derived seed, so the estimate is
    independent of evaluation order and thread count.
    """
    if trials < 1:
        raise ValidationError("trials must be at least 1")
    workers = resolve_threads(threads)
    msgs = range(cb.m_size)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rates = list(pool.map(
                lambda m: _message_error(cb, ch, m, trials, delta, seed), msgs
            ))
    else:
        rates = [_message_error(cb, ch, m, trials, delta, seed) for m in msgs]
    per = np.array(rates)
    hw = 1.96 * np.sqrt(per * (1.0 - per) / trials)
    return ErrorEstimate(
        avg_error=float(per.mean()),
        max_error=float(per.max()),
        per_message=per,
        half_widths=hw,
        trials=trials,
    )


def _check_state_space(ch: WiretapChannel, n: int, max_states: int) -> None:
    if ch.z_size ** n > max_states:
        raise StateSpaceTooLargeError(
            f"{ch.z_size}^{n} eavesdropper sequences exceed cap {max_states}"
        )


def _product_rows(rows: np.ndarray) -> np.ndarray:
    """Product distribution over sequences from per-letter rows (n, k)."""
    out = np.ones(1)
    for row in rows:
        out = (out[:, None] * row[None, :]).reshape(-1)
    return out


def _z_law_given_mi(cb, k_zv, m, i) -> np.ndarray:
    """P(z-sequence | message m, inner index i), averaged over j."""
    acc = np.zeros(k_zv.shape[1] ** cb.n)
    for j in range(cb.j_size):
        acc += _product_rows(k_zv[cb.v_words[i, j, m]])
    return acc / cb.j_size


def _entropy_bits(p: np.ndarray) -> float:
    nz = p[p > 0.0]
    return float(-(nz * np.log2(nz)).sum())


def exact_leakage(
    cb: SuperpositionCodebook,
    ch: WiretapChannel,
    message_pmf: Optional[np.ndarray] = None,
    max_states: int = MAX_EAVESDROPPER_STATES,
) -> float:
    """I(M; Z-sequence) in bits, computed exactly by enumerating sequences.

    The conditional law of the eavesdropper's sequence given a message is
    the uniform (i, j) mixture of per-letter products; the mutual
    information then follows from exact entropies.  ``message_pmf``
    defaults to uniform.
    """
    _check_state_space(ch, cb.n, max_states)
    if message_pmf is None:
        p_m = np.full(cb.m_size, 1.0 / cb.m_size)
    else:
        p_m = np.asarray(message_pmf, dtype=np.float64)
        if p_m.shape != (cb.m_size,):
            raise DimensionMismatchError(
                f"message_pmf must have length {cb.m_size}"
            )
        if p_m.min() < 0 or abs(p_m.sum() - 1.0) > 1e-9:
            raise ValidationError("message_pmf must be a probability vector")
    _, w_z = marginal_kernels(ch)
    k_zv = cb.dist.p_x_given_v.rows @ w_z.rows
    mix = np.zeros(ch.z_size ** cb.n)
    cond_entropy = 0.0
    for m in range(cb.m_size):
        law = np.zeros_like(mix)
        for i in range(cb.i_size):
            law += _z_law_given_mi(cb, k_zv, m, i)
        law /= cb.i_size
        mix += p_m[m] * law
        cond_entropy += p_m[m] * _entropy_bits(law)
    return _entropy_bits(mix) - cond_entropy


def _reference_z_rows(cb: SuperpositionCodebook, ch: WiretapChannel) -> np.ndarray:
    """Rows of P(Z|U): the code-design eavesdropper letter law per u."""
    _, w_z = marginal_kernels(ch)
    k_zv = cb.dist.p_x_given_v.rows @ w_z.rows
    _, v_rows = _conditional_rows(cb.dist)
    return v_rows @ k_zv


def theta(
    cb: SuperpositionCodebook,
    ch: WiretapChannel,
    m: int,
    max_states: int = MAX_EAVESDROPPER_STATES,
) -> float:
    """Average total variation between the eavesdropper's conditional law
    and the product reference, taken over the inner index.

    Zero means the outer-index mixture has soft-covered the reference
    exactly; one is the TV ceiling.
    """
    if not 0 <= m < cb.m_size:
        raise MessageOutOfRangeError(f"message {m} outside [0, {cb.m_size})")
    _check_state_space(ch, cb.n, max_states)
    _, w_z = marginal_kernels(ch)
    k_zv = cb.dist.p_x_given_v.rows @ w_z.rows
    ref_rows = _reference_z_rows(cb, ch)
    total = 0.0
    for i in range(cb.i_size):
        law = _z_law_given_mi(cb, k_zv, m, i)
        ref = _product_rows(ref_rows[cb.u_words[i]])
        total += 0.5 * float(np.abs(law - ref).sum())
    return total / cb.i_size


def exact_message_kl(
    cb: SuperpositionCodebook,
    ch: WiretapChannel,
    m: int,
    max_states: int = MAX_EAVESDROPPER_STATES,
) -> float:
    """KL divergence (bits) of the per-message eavesdropper law from the
    product reference, averaged over the inner index.

    Finite by construction: any sequence the codebook can induce has
    positive probability under the reference built from the same design
    distribution.
    """
    if not 0 <= m < cb.m_size:
        raise MessageOutOfRangeError(f"message {m} outside [0, {cb.m_size})")
    _check_state_space(ch, cb.n, max_states)
    _, w_z = marginal_kernels(ch)
    k_zv = cb.dist.p_x_given_v.rows @ w_z.rows
    ref_rows = _reference_z_rows(cb, ch)
    total = 0.0
    for i in range(cb.i_size):
        law = _z_law_given_mi(cb, k_zv, m, i)
        ref = _product_rows(ref_rows[cb.u_words[i]])
        mask = law > 0.0
        total += float((law[mask] * np.log2(law[mask] / ref[mask])).sum())
    return total / cb.i_size


def soft_covering_kl_bound(theta_value: float, n: int, z_size: int, p_min: float) -> float:
    """Upper bound on the per-message KL term as a function of its TV.

    For distributions on length-n eavesdropper sequences whose reference
    is a product law with smallest positive letter probability ``p_min``:
    ``theta * (n log|Z| - log theta - n log p_min)`` bits, and zero at
    theta = 0 where both sides vanish.
    """
    if theta_value <= 0.0:
        return 0.0
    if not 0.0 < p_min <= 1.0:
        raise ValidationError("p_min must be in (0, 1]")
    return theta_value * (
        n * math.log2(z_size) - math.log2(theta_value) - n * math.log2(p_min)
    )


@dataclass(frozen=True)
class RateRegionReport:
    """Strict-inequality check of a rate triple against a design joint."""

    ok: bool
    violated: List[str]
    slacks: Dict[str, float]


def check_rate_region(
    dist: AuxJoint, ch: WiretapChannel, rates: RateTriple
) -> RateRegionReport:
    """Slack of the three strict design inequalities at ``dist`` and ``ch``.

    ``inner_reliability``: I(V;Y|U) - (r2 + r) must be positive;
    ``outer_reliability``: I(U,V;Y) - (r1 + r2 + r) must be positive;
    ``covering``: r2 - I(V;Z|U) must be positive.  Boundary points are
    violations: the inequalities are strict.
    """
    w_y, w_z = marginal_kernels(ch)
    k_y = dist.p_x_given_v.rows @ w_y.rows
    k_z = dist.p_x_given_v.rows @ w_z.rows
    thet = dist.p_uv.probs
    u_n, v_n = thet.shape
    p_uvy = thet[:, :, None] * k_y[None, :, :]
    p_uvz = thet[:, :, None] * k_z[None, :, :]
    i_v_y_u = conditional_mutual_information(JointPmf(p_uvy, ("u", "v", "y")), given="u")
    i_v_z_u = conditional_mutual_information(JointPmf(p_uvz, ("u", "v", "z")), given="u")
    i_uv_y = mutual_information(
        JointPmf(p_uvy.reshape(u_n * v_n, -1), ("w", "y"))
    )
    slacks = {
        "inner_reliability": i_v_y_u - (rates.r2 + rates.r),
        "outer_reliability": i_uv_y - (rates.r1 + rates.r2 + rates.r),
        "covering": rates.r2 - i_v_z_u,
    }
    violated = [name for name, s in slacks.items() if s <= 0.0]
    return RateRegionReport(ok=not violated, violated=violated, slacks=slacks)


def measure_cost(
    cb: SuperpositionCodebook,
    ch: WiretapChannel,
    trials: int,
    seed: int = 0,
) -> Tuple[np.ndarray, float]:
    """Monte Carlo per-message average input cost and the worst sampled word."""
    if trials < 1:
        raise ValidationError("trials must be at least 1")
    per_message = np.zeros(cb.m_size)
    word_max = -np.inf
    for m in range(cb.m_size):
        acc = 0.0
        for t in range(trials):
            rng = np.random.default_rng([seed, _TAG_COST, m, t])
            _, _, x = _draw_input_word(cb, m, rng)
            word_cost = float(ch.cost[x].mean())
            acc += word_cost
            word_max = max(word_max, word_cost)
        per_message[m] = acc / trials
    return per_message, word_max


@dataclass(frozen=True)
class SimulationReport:
    """Everything one codebook realization reveals at one blocklength."""

    n: int
    rates: RateTriple
    avg_error: float
    max_error: float
    avg_error_half_width: float
    max_error_half_width: float
    per_message_error: np.ndarray
    per_message_error_half_width: np.ndarray
    per_message_cost: np.ndarray
    per_codeword_max_cost: float
    leakage_weak: float
    leakage_strong: float
    theta_max: float
    trials: int
    seed: int


def run_simulation(
    dist: AuxJoint,
    ch: WiretapChannel,
    n: int,
    rates: RateTriple,
    trials: int,
    delta: float = 0.2,
    seed: int = 0,
    threads: Optional[int] = None,
) -> SimulationReport:
    """Sample one codebook and measure error, cost, leakage, and covering."""
    cb = sample_codebook(dist, n, rates, seed)
    err = estimate_error(cb, ch, trials, delta, seed, threads=threads)
    leak = exact_leakage(cb, ch)
    theta_max = max(theta(cb, ch, m) for m in range(cb.m_size))
    cost_vec, cost_max = measure_cost(cb, ch, trials, seed)
    return SimulationReport(
        n=n,
        rates=rates,
        avg_error=err.avg_error,
        max_error=err.max_error,
        avg_error_half_width=err.avg_half_width,
        max_error_half_width=err.max_half_width,
        per_message_error=err.per_message,
        per_message_error_half_width=err.half_widths,
        per_message_cost=cost_vec,
        per_codeword_max_cost=cost_max,
        leakage_weak=leak / n,
        leakage_strong=leak,
        theta_max=theta_max,
        trials=trials,
        seed=seed,
    )


def simulation_report_to_dict(rep: SimulationReport) -> dict:
    return {
        "n": rep.n,
        "rates": {"r": rep.rates.r, "r1": rep.rates.r1, "r2": rep.rates.r2},
        "avg_error": rep.avg_error,
        "max_error": rep.max_error,
        "avg_error_half_width": rep.avg_error_half_width,
        "max_error_half_width": rep.max_error_half_width,
        "per_message_error": [float(e) for e in rep.per_message_error],
        "per_message_error_half_width": [float(h) for h in rep.per_message_error_half_width],
        "per_message_cost": [float(c) for c in rep.per_message_cost],
        "per_codeword_max_cost": rep.per_codeword_max_cost,
        "leakage_weak": rep.leakage_weak,
        "leakage_strong": rep.leakage_strong,
        "theta_max": rep.theta_max,
        "trials": rep.trials,
        "seed": rep.seed,
    }
