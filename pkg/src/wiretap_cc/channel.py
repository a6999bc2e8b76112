"""Cost-constrained discrete memoryless wiretap channels.

A channel couples one input alphabet to a legitimate-receiver output Y and an
eavesdropper output Z through a single joint kernel ``P(y, z | x)``, and
carries a per-letter cost together with an average-cost budget.  The kernel
rows are stored flattened over (y, z) with y as the major axis.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ._ascent import maximize_multistart
from .errors import (
    BudgetBelowMinCostError,
    MalformedChannelFileError,
    ValidationError,
)
from .probability import CondPmf, JointPmf, Pmf, mutual_information
from .projection import project_simplex

__all__ = [
    "WiretapChannel",
    "marginal_kernels",
    "expected_cost",
    "LessNoisyReport",
    "check_less_noisy",
    "channel_to_dict",
    "channel_from_dict",
    "load_channel",
    "save_channel",
]

_ROW_SUM_SLACK = 1e-9


@dataclass(frozen=True)
class WiretapChannel:
    """Wiretap channel with an input cost and an average-cost budget.

    Attributes
    ----------
    x_size, y_size, z_size:
        Alphabet sizes of the input, the receiver output and the
        eavesdropper output.
    kernel:
        Row-stochastic ``x_size`` by ``y_size * z_size`` kernel; column
        ``y * z_size + z`` is the probability of the pair (y, z).
    cost:
        Nonnegative per-letter input cost.
    budget:
        Average-cost bound; must be at least the cheapest letter.
    """

    x_size: int
    y_size: int
    z_size: int
    kernel: CondPmf
    cost: np.ndarray
    budget: float

    def __post_init__(self):
        if min(self.x_size, self.y_size, self.z_size) < 1:
            raise ValidationError("alphabet sizes must be positive")
        if self.kernel.n_inputs != self.x_size:
            raise ValidationError(
                f"kernel has {self.kernel.n_inputs} rows, expected {self.x_size}"
            )
        if self.kernel.n_outputs != self.y_size * self.z_size:
            raise ValidationError(
                f"kernel rows have {self.kernel.n_outputs} entries, "
                f"expected {self.y_size} * {self.z_size}"
            )
        cost = np.asarray(self.cost, dtype=np.float64)
        if cost.shape != (self.x_size,):
            raise ValidationError(f"cost must have shape ({self.x_size},)")
        if not np.all(np.isfinite(cost)) or np.any(cost < 0):
            raise ValidationError("cost letters must be finite and nonnegative")
        cost = cost.copy()
        cost.setflags(write=False)
        object.__setattr__(self, "cost", cost)
        budget = float(self.budget)
        if not np.isfinite(budget):
            raise ValidationError("budget must be finite")
        if budget < cost.min() - 1e-12:
            raise BudgetBelowMinCostError(
                f"budget {budget} below cheapest letter cost {cost.min()}"
            )
        object.__setattr__(self, "budget", budget)

    @property
    def min_cost(self) -> float:
        return float(self.cost.min())

    def with_budget(self, budget: float) -> "WiretapChannel":
        return dataclasses.replace(self, budget=budget)

    def kernel_tensor(self) -> np.ndarray:
        """Kernel reshaped to (x, y, z)."""
        return self.kernel.rows.reshape(self.x_size, self.y_size, self.z_size)


def marginal_kernels(ch: WiretapChannel) -> Tuple[CondPmf, CondPmf]:
    """Per-output kernels ``(P(y|x), P(z|x))`` of the joint kernel."""
    t = ch.kernel_tensor()
    return CondPmf(t.sum(axis=2)), CondPmf(t.sum(axis=1))


def expected_cost(ch: WiretapChannel, px: Pmf) -> float:
    """Average cost of the input distribution ``px``; linear in ``px``."""
    if len(px) != ch.x_size:
        raise ValidationError(f"input pmf has {len(px)} letters, channel expects {ch.x_size}")
    return float(np.dot(px.probs, ch.cost))


# ---------------------------------------------------------------------------
# less-noisy ordering
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LessNoisyReport:
    """Outcome of a randomized search for a violation of a less-noisy claim.

    ``holds`` is True when no violating auxiliary was found; it is evidence,
    not proof.  When a violation is found, ``counterexample`` is the joint
    distribution over (U, X) with binary U and ``gap`` the re-evaluated
    information difference it achieves.
    """

    holds: bool
    gap: float
    counterexample: Optional[np.ndarray]
    starts_run: int


def _information_difference(s: np.ndarray, w_a: np.ndarray, w_b: np.ndarray) -> float:
    """I(U;A) - I(U;B) for a joint s over (u, x), recomputed from first principles."""
    j_a = JointPmf(s @ w_a, ("u", "a"))
    j_b = JointPmf(s @ w_b, ("u", "b"))
    return mutual_information(j_a) - mutual_information(j_b)


def check_less_noisy(
    ch: WiretapChannel,
    direction: str = "y_less_noisy",
    starts: int = 200,
    seed: int = 0,
    max_iters: int = 400,
    tol: float = 1e-10,
) -> LessNoisyReport:
    """Search for a counterexample to a less-noisy ordering claim.

    ``direction="y_less_noisy"`` tests the claim that the receiver output Y
    is less noisy than the eavesdropper output Z, i.e. ``I(U;Y) >= I(U;Z)``
    for every joint over (U, X).  A binary auxiliary U suffices for this
    falsifier, which maximizes the violating difference by projected gradient
    ascent from ``starts`` random joints.  Any candidate with a re-evaluated
    violation above ``1e-9`` is returned as a counterexample.
    """
    if direction not in ("y_less_noisy", "z_less_noisy"):
        raise ValidationError(f"unknown direction {direction!r}")
    w_y, w_z = (k.rows for k in marginal_kernels(ch))
    # maximize I(U;B) - I(U;A) where A is claimed less noisy
    w_a, w_b = (w_y, w_z) if direction == "y_less_noisy" else (w_z, w_y)
    tiny = 1e-300

    def value(params):
        s = params[0]
        p_ub = s @ w_b
        p_ua = s @ w_a
        h = lambda a: -np.sum(a[a > 0] * np.log2(a[a > 0]))
        p_u = s.sum(axis=1)
        i_b = h(p_u) + h(p_ub.sum(axis=0)) - h(p_ub)
        i_a = h(p_u) + h(p_ua.sum(axis=0)) - h(p_ua)
        return float(i_b - i_a)

    def grad(params):
        s = params[0]
        p_ub = s @ w_b
        p_ua = s @ w_a
        lb = np.log2(np.maximum(p_ub, tiny)) - np.log2(np.maximum(p_ub.sum(axis=0), tiny))[None, :]
        la = np.log2(np.maximum(p_ua, tiny)) - np.log2(np.maximum(p_ua.sum(axis=0), tiny))[None, :]
        return [lb @ w_b.T - la @ w_a.T]

    def project_block(i, params, cand):
        flat = project_simplex(cand.reshape(1, -1))
        return flat.reshape(cand.shape)

    rngs = [np.random.default_rng([seed, 71, i]) for i in range(starts)]
    inits = [[r.dirichlet(np.ones(2 * ch.x_size)).reshape(2, ch.x_size)] for r in rngs]
    res = maximize_multistart(inits, value, grad, project_block, max_iters=max_iters, tol=tol)

    s_best = res.params[0]
    gap = _information_difference(s_best, w_b, w_a)
    if gap > 1e-9:
        return LessNoisyReport(holds=False, gap=gap, counterexample=s_best, starts_run=res.starts_run)
    return LessNoisyReport(holds=True, gap=max(gap, 0.0), counterexample=None, starts_run=res.starts_run)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def channel_to_dict(ch: WiretapChannel) -> dict:
    return {
        "x_size": ch.x_size,
        "y_size": ch.y_size,
        "z_size": ch.z_size,
        "kernel": [list(map(float, row)) for row in ch.kernel.rows],
        "cost": [float(c) for c in ch.cost],
        "budget": ch.budget,
    }


def channel_from_dict(data: dict) -> WiretapChannel:
    if not isinstance(data, dict):
        raise MalformedChannelFileError("channel description must be a JSON object")
    required = ("x_size", "y_size", "z_size", "kernel", "cost", "budget")
    missing = [k for k in required if k not in data]
    if missing:
        raise MalformedChannelFileError(f"channel file missing keys: {missing}")
    try:
        x_size, y_size, z_size = (int(data[k]) for k in ("x_size", "y_size", "z_size"))
        kernel_rows = np.asarray(data["kernel"], dtype=np.float64)
        cost = np.asarray(data["cost"], dtype=np.float64)
        budget = float(data["budget"])
    except (TypeError, ValueError) as exc:
        raise MalformedChannelFileError(f"channel file has non-numeric fields: {exc}") from exc
    if kernel_rows.ndim != 2 or kernel_rows.shape != (x_size, y_size * z_size):
        raise MalformedChannelFileError(
            f"kernel shape {kernel_rows.shape} does not match "
            f"({x_size}, {y_size} * {z_size})"
        )
    if np.any(np.abs(kernel_rows.sum(axis=1) - 1.0) > _ROW_SUM_SLACK):
        raise MalformedChannelFileError("kernel rows must each sum to 1 within 1e-9")
    try:
        kernel = CondPmf(kernel_rows)
        return WiretapChannel(
            x_size=x_size, y_size=y_size, z_size=z_size,
            kernel=kernel, cost=cost, budget=budget,
        )
    except ValidationError as exc:
        raise MalformedChannelFileError(str(exc)) from exc


def load_channel(path: str) -> WiretapChannel:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MalformedChannelFileError(f"{path}: not valid JSON ({exc})") from exc
    return channel_from_dict(data)


def save_channel(ch: WiretapChannel, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(channel_to_dict(ch), fh, indent=2, sort_keys=True)
        fh.write("\n")
