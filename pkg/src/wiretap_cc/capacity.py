"""Secrecy-rate objectives and their constrained maximizers.

Two optimization problems are covered, both over distributions that factor
through the channel input:

* the two-auxiliary objective ``I(V;Y|U) - I(V;Z|U)`` over joints
  ``P(u,v) P(x|v)`` with average input cost at most the budget, and
* the single-auxiliary benchmark ``I(V;Y) - I(V;Z)`` over joints ``P(v,x)``
  under the same cost constraint.

Both are maximized by multi-start projected gradient ascent with analytic
gradients, Euclidean simplex projections, and a bisection on the dual
multiplier of the cost half-space (see :mod:`wiretap_cc.projection`).

The ``eval_*`` functions are the optimizer's computational kernels.  They
take raw parameter arrays, extend the objectives smoothly off the simplex,
and return value and gradient together; central finite differences of the
value agree with the gradient at interior points.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from ._ascent import AscentResult, _zero_small, maximize_multistart
from .channel import WiretapChannel, marginal_kernels
from .errors import (
    BudgetBelowMinCostError,
    DimensionMismatchError,
    ValidationError,
)
from .probability import (
    CondPmf,
    JointPmf,
    Pmf,
    conditional_mutual_information,
    mutual_information,
)
from .projection import project_budgeted_blocks, project_budgeted_rows, project_simplex

__all__ = [
    "OptimizerOptions",
    "AuxJoint",
    "SingleAuxJoint",
    "CapacityResult",
    "objective_two_aux",
    "objective_single_aux",
    "eval_two_aux",
    "eval_single_aux",
    "eval_input_only",
    "is_feasible",
    "expected_cost_of",
    "maximize_two_aux",
    "maximize_single_aux",
    "less_noisy_capacity",
    "sweep_budget",
    "aux_joint_to_dict",
    "aux_joint_from_dict",
    "single_aux_to_dict",
    "capacity_result_to_dict",
]

_TINY = 1e-30  # floor under logarithms in gradients; keeps boundary pushes finite
_TAG_TWO_AUX = 11
_TAG_SINGLE_AUX = 12
_TAG_INPUT_ONLY = 13
_TAG_SWEEP = 14
_FACE_EPS = 1e-12


# ---------------------------------------------------------------------------
# distribution containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OptimizerOptions:
    """Tuning knobs shared by all maximizers.

    ``u_size``/``v_size`` default to the input alphabet size and its square
    for the two-auxiliary problem (cardinalities that suffice for the
    optimum), and to the input alphabet size for the single-auxiliary
    benchmark.
    """

    starts: int = 64
    max_iters: int = 2000
    tol: float = 1e-8
    seed: int = 0
    u_size: Optional[int] = None
    v_size: Optional[int] = None
    threads: Optional[int] = None

    def __post_init__(self):
        if self.starts < 1:
            raise ValidationError("starts must be at least 1")
        if self.max_iters < 1:
            raise ValidationError("max_iters must be at least 1")
        if self.tol <= 0:
            raise ValidationError("tol must be positive")


@dataclass(frozen=True)
class AuxJoint:
    """Two-layer input distribution ``P(u,v) P(x|v)``."""

    p_uv: JointPmf
    p_x_given_v: CondPmf

    def __post_init__(self):
        if self.p_uv.probs.ndim != 2:
            raise ValidationError("p_uv must be a two-way joint")
        if self.p_uv.probs.shape[1] != self.p_x_given_v.n_inputs:
            raise DimensionMismatchError(
                f"p_uv has {self.p_uv.probs.shape[1]} v-symbols but p_x_given_v "
                f"expects {self.p_x_given_v.n_inputs}"
            )

    @property
    def u_size(self) -> int:
        return self.p_uv.probs.shape[0]

    @property
    def v_size(self) -> int:
        return self.p_uv.probs.shape[1]

    @property
    def x_size(self) -> int:
        return self.p_x_given_v.n_outputs

    @classmethod
    def from_arrays(cls, p_uv: np.ndarray, p_x_given_v: np.ndarray) -> "AuxJoint":
        return cls(JointPmf(np.asarray(p_uv, dtype=np.float64), ("u", "v")),
                   CondPmf(p_x_given_v))

    def p_u(self) -> Pmf:
        return self.p_uv.marginal("u")

    def p_v(self) -> Pmf:
        return self.p_uv.marginal("v")

    def p_x(self) -> Pmf:
        return Pmf(self.p_v().probs @ self.p_x_given_v.rows)


@dataclass(frozen=True)
class SingleAuxJoint:
    """Single-layer input distribution ``P(v,x)``."""

    p_vx: JointPmf

    def __post_init__(self):
        if self.p_vx.probs.ndim != 2:
            raise ValidationError("p_vx must be a two-way joint")

    @property
    def v_size(self) -> int:
        return self.p_vx.probs.shape[0]

    @property
    def x_size(self) -> int:
        return self.p_vx.probs.shape[1]

    @classmethod
    def from_arrays(cls, p_vx: np.ndarray) -> "SingleAuxJoint":
        return cls(JointPmf(np.asarray(p_vx, dtype=np.float64), ("v", "x")))

    def p_x(self) -> Pmf:
        return self.p_vx.marginal("x")


Distribution = Union[AuxJoint, SingleAuxJoint]


@dataclass(frozen=True)
class CapacityResult:
    """Outcome of one maximization run."""

    value: float
    argmax: Distribution
    starts_run: int
    best_start_index: int
    converged: bool
    iterations: int
    final_gradient_norm: float


# ---------------------------------------------------------------------------
# objectives (reference implementations on validated distributions)
# ---------------------------------------------------------------------------

def _check_x_size(dist_x: int, ch: WiretapChannel) -> None:
    if dist_x != ch.x_size:
        raise DimensionMismatchError(
            f"distribution emits {dist_x} input letters, channel has {ch.x_size}"
        )


def objective_two_aux(dist: AuxJoint, ch: WiretapChannel) -> float:
    """``I(V;Y|U) - I(V;Z|U)`` in bits under ``dist`` and the channel."""
    _check_x_size(dist.x_size, ch)
    w_y, w_z = marginal_kernels(ch)
    k_y = dist.p_x_given_v.compose(w_y)
    k_z = dist.p_x_given_v.compose(w_z)
    theta = dist.p_uv.probs
    j_y = JointPmf(theta[:, :, None] * k_y.rows[None, :, :], ("u", "v", "y"))
    j_z = JointPmf(theta[:, :, None] * k_z.rows[None, :, :], ("u", "v", "z"))
    return conditional_mutual_information(j_y, given="u") - conditional_mutual_information(
        j_z, given="u"
    )


def objective_single_aux(dist: SingleAuxJoint, ch: WiretapChannel) -> float:
    """``I(V;Y) - I(V;Z)`` in bits under ``dist`` and the channel."""
    _check_x_size(dist.x_size, ch)
    w_y, w_z = marginal_kernels(ch)
    s = dist.p_vx.probs
    j_y = JointPmf(s @ w_y.rows, ("v", "y"))
    j_z = JointPmf(s @ w_z.rows, ("v", "z"))
    return mutual_information(j_y) - mutual_information(j_z)


def expected_cost_of(dist: Distribution, ch: WiretapChannel) -> float:
    """Average input cost of the distribution; linear in its parameters."""
    _check_x_size(dist.x_size, ch)
    if isinstance(dist, AuxJoint):
        return float(dist.p_v().probs @ dist.p_x_given_v.rows @ ch.cost)
    return float(dist.p_vx.probs.sum(axis=0) @ ch.cost)


def is_feasible(dist: Distribution, ch: WiretapChannel, slack: float = 1e-9) -> bool:
    """Whether the distribution respects the cost budget within ``slack``."""
    return expected_cost_of(dist, ch) <= ch.budget + slack


# ---------------------------------------------------------------------------
# computational kernels: ambient value + analytic gradient
# ---------------------------------------------------------------------------

def _h2(a: np.ndarray) -> float:
    flat = a.reshape(-1)
    nz = flat[flat > 0.0]
    return float(-np.dot(nz, np.log2(nz)))


def _log2c(a: np.ndarray) -> np.ndarray:
    return np.log2(np.maximum(a, _TINY))


def eval_two_aux(
    theta: np.ndarray, q: np.ndarray, ch: WiretapChannel
) -> Tuple[float, np.ndarray, np.ndarray]:
    """Two-auxiliary objective with its gradient in ``(theta, q)``.

    ``theta`` is the (u, v) joint and ``q`` the rows of ``P(x|v)``.
    """
    w_y, w_z = (k.rows for k in marginal_kernels(ch))
    return _eval_two_aux_arrays(theta, q, w_y, w_z)


def _eval_two_aux_arrays(theta, q, w_y, w_z):
    k_y = q @ w_y
    k_z = q @ w_z
    p_uy = theta @ k_y
    p_uz = theta @ k_z
    p_v = theta.sum(axis=0)

    lky = _log2c(k_y)
    lkz = _log2c(k_z)
    row_y = np.einsum("vy,vy->v", k_y, lky)  # sum_y K log K per v
    row_z = np.einsum("vz,vz->v", k_z, lkz)

    value = (
        _h2(p_uy) + np.dot(p_v, row_y)
        - _h2(p_uz) - np.dot(p_v, row_z)
    )

    lp_uy = _log2c(p_uy)
    lp_uz = _log2c(p_uz)
    g_theta = (row_y - row_z)[None, :] - lp_uy @ k_y.T + lp_uz @ k_z.T

    m_y = p_v[:, None] * lky - theta.T @ lp_uy
    m_z = p_v[:, None] * lkz - theta.T @ lp_uz
    g_q = m_y @ w_y.T - m_z @ w_z.T
    return float(value), g_theta, g_q


def eval_single_aux(s: np.ndarray, ch: WiretapChannel) -> Tuple[float, np.ndarray]:
    """Single-auxiliary objective with its gradient in the (v, x) joint."""
    w_y, w_z = (k.rows for k in marginal_kernels(ch))
    return _eval_single_aux_arrays(s, w_y, w_z)


def _eval_single_aux_arrays(s, w_y, w_z):
    p_vy = s @ w_y
    p_vz = s @ w_z
    p_y = p_vy.sum(axis=0)
    p_z = p_vz.sum(axis=0)
    value = _h2(p_y) - _h2(p_vy) - _h2(p_z) + _h2(p_vz)
    l_y = _log2c(p_vy) - _log2c(p_y)[None, :]
    l_z = _log2c(p_vz) - _log2c(p_z)[None, :]
    grad = l_y @ w_y.T - l_z @ w_z.T
    return float(value), grad


def eval_input_only(p: np.ndarray, ch: WiretapChannel) -> Tuple[float, np.ndarray]:
    """``I(X;Y) - I(X;Z)`` with its gradient in the input distribution."""
    w_y, w_z = (k.rows for k in marginal_kernels(ch))
    p_xy = p[:, None] * w_y
    p_xz = p[:, None] * w_z
    p_y = p_xy.sum(axis=0)
    p_z = p_xz.sum(axis=0)
    value = _h2(p_y) - _h2(p_xy) - _h2(p_z) + _h2(p_xz)
    l_y = _log2c(p_xy) - _log2c(p_y)[None, :]
    l_z = _log2c(p_xz) - _log2c(p_z)[None, :]
    grad = np.einsum("xy,xy->x", w_y, l_y) - np.einsum("xz,xz->x", w_z, l_z)
    return float(value), grad


# ---------------------------------------------------------------------------
# maximizers
# ---------------------------------------------------------------------------

def _cheap_face(cost: np.ndarray) -> np.ndarray:
    return np.flatnonzero(cost <= cost.min() + _FACE_EPS)


def _dirichlet_rows(rng, rows: int, cols: int, face: Optional[np.ndarray] = None) -> np.ndarray:
    if face is None:
        return rng.dirichlet(np.ones(cols), size=rows)
    out = np.zeros((rows, cols))
    out[:, face] = rng.dirichlet(np.ones(face.size), size=rows)
    return out


def _cheapest_rows(ch: WiretapChannel, rows: int) -> np.ndarray:
    q = np.zeros((rows, ch.x_size))
    q[:, int(np.argmin(ch.cost))] = 1.0
    return q


def _two_aux_inits(ch: WiretapChannel, u: int, v: int, seed_words: Sequence[int], starts: int):
    face = _cheap_face(ch.cost) if ch.budget <= ch.min_cost + _FACE_EPS else None
    # one deterministic start of objective exactly zero (all v rows identical,
    # cheapest letter) keeps the reported value nonnegative at any budget
    inits = [[np.full((u, v), 1.0 / (u * v)), _cheapest_rows(ch, v)]]
    for i in range(starts):
        rng = np.random.default_rng([*seed_words, i])
        theta = rng.dirichlet(np.ones(u * v)).reshape(u, v)
        q = _dirichlet_rows(rng, v, ch.x_size, face)
        inits.append([theta, q])
    return inits


def _two_aux_engine_fns(ch: WiretapChannel, u: int, v: int):
    """Value, gradient, per-block projection, and initial feasibility map.

    The cost constraint is bilinear in ``(theta, q)`` but linear in each
    block alone, so each block update projects onto a convex slice: the
    ``theta`` slice uses the per-``v`` costs induced by the current ``q``,
    and the ``q`` slice weighs its rows by the current ``v`` marginal.  From
    a feasible pair either block projection lands on a feasible pair again.
    """
    w_y, w_z = (k.rows for k in marginal_kernels(ch))
    cost, budget = ch.cost, ch.budget

    def value(params):
        return _eval_two_aux_arrays(params[0], params[1], w_y, w_z)[0]

    def grad(params):
        _, g_theta, g_q = _eval_two_aux_arrays(params[0], params[1], w_y, w_z)
        return [g_theta, g_q]

    def project_block(i, params, cand):
        if i == 0:
            c_eff = params[1] @ cost
            return project_budgeted_rows(
                cand.reshape(1, -1), np.tile(c_eff, u)[None, :], budget
            ).reshape(u, v)
        p_v = params[0].sum(axis=0)
        return project_budgeted_rows(cand, p_v[:, None] * cost[None, :], budget)

    def feasible(params):
        # order matters only here: a raw theta is made stochastic first, the
        # q projection under its v-marginal then guarantees the final theta
        # slice is nonempty
        theta = project_simplex(params[0].reshape(1, -1)).reshape(u, v)
        q = project_block(1, [theta, None], params[1])
        theta = project_block(0, [None, q], theta)
        return [theta, q]

    def snap(params, level):
        # sparser candidate: renormalize within the surviving support (theta
        # is one simplex, q is stochastic row by row), then repair the budget
        # through the theta slice if the face landed outside it
        theta, hit_t = _zero_small(params[0], level)
        q, hit_q = _zero_small(params[1], level)
        if not (hit_t or hit_q):
            return None
        theta = theta / theta.sum()
        row_sums = q.sum(axis=1, keepdims=True)
        good = row_sums[:, 0] > 0.0
        q = np.where(good[:, None], np.divide(q, row_sums, where=row_sums > 0.0), params[1])
        c_eff = q @ cost
        if float(theta.sum(axis=0) @ c_eff) > budget:
            try:
                theta = project_block(0, [theta, q], theta)
            except BudgetBelowMinCostError:
                return None
        return [theta, q]

    def joint(params, cand):
        # the cost constraint is linear in the stacked candidate when its
        # coefficients are frozen at the current point, so one multiplier
        # serves both blocks; the leftover bilinear error is repaired through
        # the theta slice
        theta, q = params
        c_eff = q @ cost
        p_v = theta.sum(axis=0)
        cost_cur = float(p_v @ c_eff)
        th2, q2 = project_budgeted_blocks(
            [cand[0].reshape(1, -1), cand[1]],
            [np.tile(c_eff, u)[None, :], p_v[:, None] * cost[None, :]],
            budget + cost_cur,
        )
        th2 = th2.reshape(u, v)
        if float(th2.sum(axis=0) @ (q2 @ cost)) > budget:
            try:
                th2 = project_block(0, [th2, q2], th2)
            except BudgetBelowMinCostError:
                return None
        return [th2, q2]

    return value, grad, project_block, feasible, snap, joint


def _result_from_ascent(res: AscentResult, argmax: Distribution) -> CapacityResult:
    return CapacityResult(
        value=res.value,
        argmax=argmax,
        starts_run=res.starts_run,
        best_start_index=res.best_start_index,
        converged=res.converged,
        iterations=res.iterations,
        final_gradient_norm=res.grad_norm,
    )


def maximize_two_aux(
    ch: WiretapChannel,
    opts: Optional[OptimizerOptions] = None,
    extra_inits: Sequence[List[np.ndarray]] = (),
    _seed_words: Optional[Sequence[int]] = None,
) -> CapacityResult:
    """Maximize ``I(V;Y|U) - I(V;Z|U)`` over budget-feasible two-layer joints."""
    opts = opts or OptimizerOptions()
    u = opts.u_size or ch.x_size
    v = opts.v_size or ch.x_size ** 2
    if ch.budget < ch.min_cost - 1e-12:
        raise BudgetBelowMinCostError(f"budget {ch.budget} below {ch.min_cost}")
    value, grad, project_block, feasible, snap, joint = _two_aux_engine_fns(ch, u, v)
    words = list(_seed_words) if _seed_words is not None else [opts.seed, _TAG_TWO_AUX]
    inits = list(extra_inits) + _two_aux_inits(ch, u, v, words, opts.starts)
    res = maximize_multistart(
        inits, value, grad, project_block,
        max_iters=opts.max_iters, tol=opts.tol, threads=opts.threads,
        feasible_fn=feasible, snap_fn=snap, project_joint=joint,
    )
    argmax = AuxJoint.from_arrays(res.params[0], res.params[1])
    return _result_from_ascent(res, argmax)


def maximize_single_aux(
    ch: WiretapChannel, opts: Optional[OptimizerOptions] = None
) -> CapacityResult:
    """Maximize ``I(V;Y) - I(V;Z)`` over budget-feasible single-layer joints."""
    opts = opts or OptimizerOptions()
    v = opts.v_size or ch.x_size
    x = ch.x_size
    w_y, w_z = (k.rows for k in marginal_kernels(ch))
    coeff = np.tile(ch.cost, v)[None, :]
    face = _cheap_face(ch.cost) if ch.budget <= ch.min_cost + _FACE_EPS else None

    def value(params):
        return _eval_single_aux_arrays(params[0], w_y, w_z)[0]

    def grad(params):
        return [_eval_single_aux_arrays(params[0], w_y, w_z)[1]]

    def project_block(i, params, cand):
        flat = project_budgeted_rows(cand.reshape(1, -1), coeff, ch.budget)
        return flat.reshape(v, x)

    inits = [[_cheapest_rows(ch, v) / v]]
    for i in range(opts.starts):
        rng = np.random.default_rng([opts.seed, _TAG_SINGLE_AUX, i])
        if face is None:
            inits.append([rng.dirichlet(np.ones(v * x)).reshape(v, x)])
        else:
            s = np.zeros((v, x))
            s[:, face] = rng.dirichlet(np.ones(v * face.size)).reshape(v, face.size)
            inits.append([s])

    res = maximize_multistart(
        inits, value, grad, project_block,
        max_iters=opts.max_iters, tol=opts.tol, threads=opts.threads,
    )
    return _result_from_ascent(res, SingleAuxJoint.from_arrays(res.params[0]))


def less_noisy_capacity(
    ch: WiretapChannel,
    opts: Optional[OptimizerOptions] = None,
    z_less_noisy: bool = False,
) -> CapacityResult:
    """Secrecy capacity when one output dominates the other.

    When the receiver output is less noisy than the eavesdropper output the
    two-layer optimum collapses to ``max I(X;Y) - I(X;Z)`` over feasible
    input distributions, which this solves directly.  Passing
    ``z_less_noisy=True`` asserts the opposite ordering, under which the
    capacity is zero; the call then returns immediately.
    """
    opts = opts or OptimizerOptions()
    x = ch.x_size
    if z_less_noisy:
        cheapest = int(np.argmin(ch.cost))
        s = np.zeros((1, x))
        s[0, cheapest] = 1.0
        return CapacityResult(
            value=0.0,
            argmax=SingleAuxJoint.from_arrays(s),
            starts_run=0,
            best_start_index=0,
            converged=True,
            iterations=0,
            final_gradient_norm=0.0,
        )

    coeff = ch.cost[None, :]
    face = _cheap_face(ch.cost) if ch.budget <= ch.min_cost + _FACE_EPS else None

    def value(params):
        return eval_input_only(params[0], ch)[0]

    def grad(params):
        return [eval_input_only(params[0], ch)[1]]

    def project_block(i, params, cand):
        return project_budgeted_rows(cand[None, :], coeff, ch.budget)[0]

    inits = [[_cheapest_rows(ch, 1)[0]]]
    for i in range(opts.starts):
        rng = np.random.default_rng([opts.seed, _TAG_INPUT_ONLY, i])
        if face is None:
            inits.append([rng.dirichlet(np.ones(x))])
        else:
            p = np.zeros(x)
            p[face] = rng.dirichlet(np.ones(face.size))
            inits.append([p])

    res = maximize_multistart(
        inits, value, grad, project_block,
        max_iters=opts.max_iters, tol=opts.tol, threads=opts.threads,
    )
    return _result_from_ascent(res, SingleAuxJoint.from_arrays(np.diag(res.params[0])))


def sweep_budget(
    ch: WiretapChannel,
    budgets: Sequence[float],
    opts: Optional[OptimizerOptions] = None,
) -> List[Tuple[float, CapacityResult]]:
    """Two-auxiliary maximization across a budget grid.

    Returns one ``(budget, result)`` pair per grid point.  Each point
    warm-starts from the previous argmax (always feasible when budgets are
    nondecreasing) in addition to its own fresh random starts, which makes
    the reported curve nondecreasing by construction up to arithmetic noise.
    """
    opts = opts or OptimizerOptions()
    results: List[Tuple[float, CapacityResult]] = []
    prev: Optional[AuxJoint] = None
    for idx, b in enumerate(budgets):
        ch_b = ch.with_budget(float(b))
        extra = []
        if prev is not None and prev.u_size == (opts.u_size or ch.x_size) \
                and prev.v_size == (opts.v_size or ch.x_size ** 2):
            extra.append([prev.p_uv.probs.copy(), prev.p_x_given_v.rows.copy()])
        res = maximize_two_aux(
            ch_b, opts, extra_inits=extra,
            _seed_words=[opts.seed, _TAG_SWEEP, idx],
        )
        results.append((float(b), res))
        prev = res.argmax
    return results


# ---------------------------------------------------------------------------
# serialization of distributions
# ---------------------------------------------------------------------------

def aux_joint_to_dict(dist: AuxJoint) -> dict:
    return {
        "u_size": dist.u_size,
        "v_size": dist.v_size,
        "p_uv": [float(w) for w in dist.p_uv.probs.reshape(-1)],
        "p_x_given_v": [list(map(float, row)) for row in dist.p_x_given_v.rows],
    }


def aux_joint_from_dict(data: dict) -> AuxJoint:
    if not isinstance(data, dict):
        raise ValidationError("distribution description must be a JSON object")
    missing = [k for k in ("u_size", "v_size", "p_uv", "p_x_given_v") if k not in data]
    if missing:
        raise ValidationError(f"distribution file missing keys: {missing}")
    try:
        u, v = int(data["u_size"]), int(data["v_size"])
        p_uv = np.asarray(data["p_uv"], dtype=np.float64)
        q = np.asarray(data["p_x_given_v"], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"distribution file has non-numeric fields: {exc}") from exc
    if p_uv.ndim != 1 or p_uv.size != u * v:
        raise ValidationError(
            f"p_uv must be a flat row-major list of length {u * v}, got {p_uv.shape}"
        )
    if q.ndim != 2 or q.shape[0] != v:
        raise ValidationError(f"p_x_given_v must have {v} rows")
    return AuxJoint.from_arrays(p_uv.reshape(u, v), q)


def single_aux_to_dict(dist: SingleAuxJoint) -> dict:
    return {
        "v_size": dist.v_size,
        "x_size": dist.x_size,
        "p_vx": [list(map(float, row)) for row in dist.p_vx.probs],
    }


def capacity_result_to_dict(res: CapacityResult) -> dict:
    if isinstance(res.argmax, AuxJoint):
        argmax = {"kind": "two_aux", **aux_joint_to_dict(res.argmax)}
    else:
        argmax = {"kind": "single_aux", **single_aux_to_dict(res.argmax)}
    return {
        "value": res.value,
        "argmax": argmax,
        "starts_run": res.starts_run,
        "best_start_index": res.best_start_index,
        "converged": res.converged,
        "iterations": res.iterations,
        "final_gradient_norm": res.final_gradient_norm,
    }
