"""Finite probability primitives: PMFs, conditional kernels, joint tensors.

All information quantities are measured in bits (base-2 logarithms) and the
convention ``0 * log 0 = 0`` applies throughout.  Distributions are dense
``float64`` arrays over integer alphabets ``{0, ..., k-1}``.

Validation contract
-------------------
Constructors accept arrays whose total mass is within ``1e-9`` of one,
renormalize them exactly, and reject anything else.  After construction a
PMF sums to one within ``1e-12`` and is immutable.
"""

from __future__ import annotations

from typing import Iterable, Sequence, Union

import numpy as np

from .errors import (
    AbsoluteContinuityError,
    UnknownSymbolError,
    ValidationError,
)

__all__ = [
    "Pmf",
    "CondPmf",
    "JointPmf",
    "entropy",
    "mutual_information",
    "conditional_mutual_information",
    "kl_divergence",
    "total_variation",
    "empirical_pmf",
    "is_typical",
]

_SUM_SLACK = 1e-9  # accepted deviation of input mass from one
_NEG_SLACK = 1e-12  # entries above -_NEG_SLACK are clipped to zero

LOG2 = np.log(2.0)


def _as_clean_array(values: Iterable[float], name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    if np.any(arr < -_NEG_SLACK):
        raise ValidationError(f"{name} contains negative entries")
    return np.clip(arr, 0.0, None)


def _normalize_mass(arr: np.ndarray, name: str) -> np.ndarray:
    total = arr.sum()
    if abs(total - 1.0) > _SUM_SLACK:
        raise ValidationError(f"{name} sums to {total!r}, expected 1 within {_SUM_SLACK}")
    out = arr / total
    out.setflags(write=False)
    return out


class Pmf:
    """Probability mass function on ``{0, ..., k-1}``.

    Parameters
    ----------
    probs:
        Nonnegative weights summing to one within ``1e-9``; they are
        renormalized to machine precision on construction.
    """

    __slots__ = ("probs",)

    def __init__(self, probs: Iterable[float]):
        arr = _as_clean_array(probs, "pmf")
        if arr.ndim != 1:
            raise ValidationError(f"pmf must be 1-dimensional, got shape {arr.shape}")
        if arr.size == 0:
            raise ValidationError("pmf over an empty alphabet")
        object.__setattr__(self, "probs", _normalize_mass(arr, "pmf"))

    def __setattr__(self, name, value):  # immutability guard
        raise AttributeError("Pmf is immutable")

    def __len__(self) -> int:
        return self.probs.shape[0]

    def __getitem__(self, x: int) -> float:
        return float(self.probs[x])

    def __repr__(self) -> str:
        return f"Pmf({np.array2string(self.probs, precision=6)})"

    @classmethod
    def uniform(cls, k: int) -> "Pmf":
        return cls(np.full(k, 1.0 / k))

    @classmethod
    def bernoulli(cls, p: float) -> "Pmf":
        """Distribution of a bit that is one with probability ``p``."""
        if not 0.0 <= p <= 1.0:
            raise ValidationError(f"bernoulli parameter {p} outside [0, 1]")
        return cls(np.array([1.0 - p, p]))

    @classmethod
    def point_mass(cls, x: int, k: int) -> "Pmf":
        arr = np.zeros(k)
        arr[x] = 1.0
        return cls(arr)


class CondPmf:
    """Row-stochastic kernel: one PMF over the output alphabet per input.

    ``rows[i]`` is the output distribution given input ``i``.  Rows are
    validated and renormalized exactly like :class:`Pmf`.
    """

    __slots__ = ("rows",)

    def __init__(self, rows: Iterable[Iterable[float]]):
        arr = _as_clean_array(rows, "kernel")
        if arr.ndim != 2:
            raise ValidationError(f"kernel must be 2-dimensional, got shape {arr.shape}")
        if arr.size == 0:
            raise ValidationError("kernel with an empty alphabet")
        sums = arr.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > _SUM_SLACK):
            worst = int(np.argmax(np.abs(sums - 1.0)))
            raise ValidationError(
                f"kernel row {worst} sums to {sums[worst]!r}, expected 1 within {_SUM_SLACK}"
            )
        out = arr / sums[:, None]
        out.setflags(write=False)
        object.__setattr__(self, "rows", out)

    def __setattr__(self, name, value):
        raise AttributeError("CondPmf is immutable")

    @property
    def n_inputs(self) -> int:
        return self.rows.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.rows.shape[1]

    def row(self, i: int) -> Pmf:
        return Pmf(self.rows[i])

    def compose(self, other: "CondPmf") -> "CondPmf":
        """Kernel of the cascade ``self`` followed by ``other``."""
        if self.n_outputs != other.n_inputs:
            raise ValidationError(
                f"cannot cascade kernels with {self.n_outputs} outputs into {other.n_inputs} inputs"
            )
        return CondPmf(self.rows @ other.rows)

    def push(self, p: Pmf) -> Pmf:
        """Output distribution when the input is drawn from ``p``."""
        if len(p) != self.n_inputs:
            raise ValidationError(
                f"input pmf has {len(p)} symbols, kernel expects {self.n_inputs}"
            )
        return Pmf(p.probs @ self.rows)

    @classmethod
    def identity(cls, k: int) -> "CondPmf":
        return cls(np.eye(k))


AxisName = str


class JointPmf:
    """Dense joint distribution over two or three named axes."""

    __slots__ = ("probs", "axes")

    def __init__(self, probs: np.ndarray, axes: Sequence[AxisName]):
        arr = _as_clean_array(probs, "joint pmf")
        axes = tuple(axes)
        if arr.ndim not in (2, 3):
            raise ValidationError(f"joint pmf must have 2 or 3 axes, got {arr.ndim}")
        if len(axes) != arr.ndim:
            raise ValidationError(f"{len(axes)} axis names for a {arr.ndim}-way tensor")
        if len(set(axes)) != len(axes):
            raise ValidationError(f"duplicate axis names in {axes}")
        object.__setattr__(self, "probs", _normalize_mass(arr, "joint pmf"))
        object.__setattr__(self, "axes", axes)

    def __setattr__(self, name, value):
        raise AttributeError("JointPmf is immutable")

    def axis_index(self, name: AxisName) -> int:
        try:
            return self.axes.index(name)
        except ValueError:
            raise ValidationError(f"no axis named {name!r}; have {self.axes}") from None

    def marginal(self, name: AxisName) -> Pmf:
        """One-dimensional marginal of the named axis."""
        keep = self.axis_index(name)
        drop = tuple(i for i in range(self.probs.ndim) if i != keep)
        return Pmf(self.probs.sum(axis=drop))

    def marginalize_out(self, name: AxisName) -> "JointPmf":
        """Sum the named axis away (only for three-way tensors)."""
        if self.probs.ndim != 3:
            raise ValidationError("marginalize_out needs a three-way tensor")
        drop = self.axis_index(name)
        return JointPmf(
            self.probs.sum(axis=drop),
            tuple(a for a in self.axes if a != name),
        )

    def permuted(self, order: Sequence[AxisName]) -> "JointPmf":
        idx = tuple(self.axis_index(a) for a in order)
        if len(idx) != self.probs.ndim:
            raise ValidationError(f"permutation {order} does not cover axes {self.axes}")
        return JointPmf(np.transpose(self.probs, idx), tuple(order))

    @classmethod
    def from_marginal_and_kernel(
        cls, p: Pmf, kernel: CondPmf, axes: Sequence[AxisName]
    ) -> "JointPmf":
        """Joint ``P(a, b) = p(a) * kernel(b | a)``."""
        if len(p) != kernel.n_inputs:
            raise ValidationError(
                f"marginal has {len(p)} symbols, kernel expects {kernel.n_inputs}"
            )
        return cls(p.probs[:, None] * kernel.rows, axes)


def _entropy_bits(arr: np.ndarray) -> float:
    """Shannon entropy in bits of a (possibly unnormalized-by-eps) mass array."""
    flat = arr.reshape(-1)
    nz = flat[flat > 0.0]
    return float(-np.dot(nz, np.log2(nz)))


def entropy(p: Union[Pmf, JointPmf]) -> float:
    """Shannon entropy ``H(p)`` in bits, with ``0 log 0 = 0``.

    Accepts a :class:`Pmf` or a :class:`JointPmf` (entropy of the whole
    tuple of axes).
    """
    return _entropy_bits(p.probs)


def mutual_information(joint: JointPmf) -> float:
    """``I(A; B)`` in bits of a two-way joint, via ``H(A) + H(B) - H(A, B)``."""
    if joint.probs.ndim != 2:
        raise ValidationError("mutual_information expects a two-way joint")
    h_a = _entropy_bits(joint.probs.sum(axis=1))
    h_b = _entropy_bits(joint.probs.sum(axis=0))
    return h_a + h_b - _entropy_bits(joint.probs)


def conditional_mutual_information(joint: JointPmf, given: AxisName) -> float:
    """``I(A; B | U)`` in bits for a three-way joint with conditioning axis ``given``.

    Computed as ``sum_u P(u) I(A; B | U = u)`` over the slices of the tensor,
    skipping conditioning symbols of probability zero.
    """
    if joint.probs.ndim != 3:
        raise ValidationError("conditional_mutual_information expects a three-way joint")
    u_axis = joint.axis_index(given)
    tensor = np.moveaxis(joint.probs, u_axis, 0)
    total = 0.0
    for slab in tensor:
        mass = slab.sum()
        if mass <= 0.0:
            continue
        cond = slab / mass
        h_a = _entropy_bits(cond.sum(axis=1))
        h_b = _entropy_bits(cond.sum(axis=0))
        total += mass * (h_a + h_b - _entropy_bits(cond))
    return float(total)


def kl_divergence(p: Pmf, q: Pmf) -> float:
    """``D(p || q)`` in bits.

    Raises
    ------
    AbsoluteContinuityError
        If some symbol has ``p(x) > 0`` but ``q(x) = 0``.
    """
    if len(p) != len(q):
        raise ValidationError("kl_divergence needs matching alphabets")
    pp, qq = p.probs, q.probs
    support = pp > 0.0
    if np.any(qq[support] == 0.0):
        bad = int(np.argmax(support & (qq == 0.0)))
        raise AbsoluteContinuityError(
            f"p({bad}) = {pp[bad]} > 0 but q({bad}) = 0"
        )
    return float(np.dot(pp[support], np.log2(pp[support] / qq[support])))


def total_variation(p: Pmf, q: Pmf) -> float:
    """Total-variation distance ``max_A |p(A) - q(A)| = 0.5 * sum_x |p - q|``."""
    if len(p) != len(q):
        raise ValidationError("total_variation needs matching alphabets")
    return float(0.5 * np.abs(p.probs - q.probs).sum())


def _empirical_counts(seq: Sequence[int], alphabet_size: int) -> np.ndarray:
    arr = np.asarray(seq)
    if arr.ndim != 1 or arr.size == 0:
        raise ValidationError("sequence must be a non-empty 1-D array of symbols")
    if not np.issubdtype(arr.dtype, np.integer):
        if np.any(arr != np.floor(arr)):
            raise UnknownSymbolError("sequence contains non-integer symbols")
        arr = arr.astype(np.int64)
    if arr.min() < 0 or arr.max() >= alphabet_size:
        bad = arr[(arr < 0) | (arr >= alphabet_size)][0]
        raise UnknownSymbolError(
            f"symbol {bad} outside alphabet of size {alphabet_size}"
        )
    return np.bincount(arr, minlength=alphabet_size).astype(np.float64)


def empirical_pmf(seq: Sequence[int], alphabet_size: int) -> Pmf:
    """Empirical distribution (type) of an integer sequence."""
    counts = _empirical_counts(seq, alphabet_size)
    return Pmf(counts / counts.sum())


def is_typical(seq: Sequence[int], p: Pmf, delta: float) -> bool:
    """Letter-typicality of ``seq`` against ``p`` with multiplicative slack.

    ``seq`` is typical when ``|nu(x) - p(x)| <= delta * p(x)`` for every
    symbol ``x``, where ``nu`` is the empirical distribution.  Symbols with
    ``p(x) = 0`` must therefore not occur at all.
    """
    if delta < 0.0:
        raise ValidationError("delta must be nonnegative")
    counts = _empirical_counts(seq, len(p))
    nu = counts / counts.sum()
    return bool(np.all(np.abs(nu - p.probs) <= delta * p.probs))
