"""Multi-start projected gradient ascent over blocks of simplex variables.

Parameters are a list of ndarray blocks.  The cost constraint of the
enclosing problem is linear in each block once the others are frozen, so
every block has a well-defined Euclidean projection onto its own convex
feasible slice.  One sweep updates each block in turn by backtracking line
search along its projected-gradient arc; feasibility of the full parameter
list is maintained after every block update.  For single-block problems
this is plain projected gradient ascent.

Objectives here are entropy-like: gradients blow up logarithmically at the
boundary of the simplex, so the line search accepts on plain monotone
improvement, and stationarity is measured as the displacement of one
projected gradient step whose length is capped at 1/||g||.  That number is
the feasible share of the gradient relative to its overall size; it is
reported as the final gradient norm and compared against the tolerance.
Maximizers tend to sit on faces of the simplex, which plain ascent
approaches only geometrically; when a sweep stalls, a polish step therefore
tries snapping relatively tiny coordinates to exact zero and keeps the
result if the objective improves.

Every start draws from its own seeded generator and the reduction across
starts is index-ordered, so results are bitwise identical no matter how
many worker threads run them.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

Params = List[np.ndarray]
# project block i of params, given the other blocks at their current values
BlockProject = Callable[[int, Params, np.ndarray], np.ndarray]
# produce a feasible candidate with coordinates below a relative level zeroed
SnapFn = Callable[[Params, float], Optional[Params]]
# map a raw candidate onto the feasible set near the current point, moving
# all blocks together; None when the candidate cannot be repaired
JointProject = Callable[[Params, Params], Optional[Params]]

_MIN_STEP = 1e-14
_MAX_STEP = 64.0
_F_IMPROVE = 1e-14  # minimum accepted objective gain
_SNAP_LEVELS = (1e-12, 1e-9, 1e-6, 1e-3, 1e-2)  # relative face-snap thresholds
_SNAP_PERIOD = 32  # also try snapping every this many sweeps


def resolve_threads(explicit: Optional[int] = None) -> int:
    """Worker-thread count: explicit argument, else WIRETAP_CC_THREADS, else 1."""
    if explicit is not None:
        return max(1, int(explicit))
    env = os.environ.get("WIRETAP_CC_THREADS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


@dataclass
class StartResult:
    params: Params
    value: float
    iterations: int
    converged: bool
    grad_norm: float


@dataclass
class AscentResult:
    params: Params
    value: float
    best_start_index: int
    starts_run: int
    iterations: int
    converged: bool
    grad_norm: float


def _norm(blocks: Sequence[np.ndarray]) -> float:
    return float(np.sqrt(sum(float(np.sum(b * b)) for b in blocks)))


def _zero_small(b: np.ndarray, level: float) -> tuple:
    cut = level * float(b.max())
    small = (b < cut) & (b > 0.0)
    return np.where(small, 0.0, b), bool(small.any())


def _default_snap(project_block: BlockProject) -> SnapFn:
    """Snap for blocks that are plain simplices: rescale mass within the
    surviving support, then restore any remaining constraint by projection."""

    def snap(params: Params, level: float) -> Optional[Params]:
        trial = []
        snapped_any = False
        for b in params:
            s, hit = _zero_small(b, level)
            snapped_any = snapped_any or hit
            total = float(s.sum())
            if total > 0.0:
                s = s * (float(b.sum()) / total)
            trial.append(s)
        if not snapped_any:
            return None
        for i in range(len(trial)):
            trial[i] = project_block(i, trial, trial[i])
        return trial

    return snap


def _try_snap(
    x: Params,
    fx: float,
    value_fn: Callable[[Params], float],
    snap_fn: SnapFn,
) -> Optional[tuple]:
    """Try sparser candidates; return (point, value) on improvement else None."""
    for level in _SNAP_LEVELS:
        trial = snap_fn(x, level)
        if trial is None:
            continue
        fc = value_fn(trial)
        if fc > fx + _F_IMPROVE:
            return trial, fc
    return None


def _ascend_one(
    init: Params,
    value_fn: Callable[[Params], float],
    grad_fn: Callable[[Params], Params],
    project_block: BlockProject,
    feasible_fn: Callable[[Params], Params],
    snap_fn: SnapFn,
    project_joint: Optional[JointProject],
    max_iters: int,
    tol: float,
) -> StartResult:
    x = feasible_fn([np.array(b, dtype=np.float64) for b in init])
    fx = value_fn(x)
    steps = [1.0] * len(x)
    joint_step = 1.0
    iterations = 0
    converged = False
    grad_norm = np.inf

    for iterations in range(1, max_iters + 1):
        any_improved = False
        gnorm_sq = 0.0
        for i in range(len(x)):
            g = grad_fn(x)[i]
            probe = 1.0 / max(1.0, float(np.sqrt(np.sum(g * g))))
            mapped = project_block(i, x, x[i] + probe * g)
            block_norm = float(np.sqrt(np.sum((mapped - x[i]) ** 2)))
            gnorm_sq += block_norm * block_norm
            if block_norm <= tol:
                continue

            alpha = min(steps[i] * 4.0, _MAX_STEP)
            while alpha >= _MIN_STEP:
                cand = project_block(i, x, x[i] + alpha * g)
                trial = list(x)
                trial[i] = cand
                fc = value_fn(trial)
                if fc > fx + _F_IMPROVE:
                    x[i] = cand
                    fx = fc
                    steps[i] = alpha
                    any_improved = True
                    break
                alpha *= 0.5

        if project_joint is not None and len(x) > 1:
            # blocks can jam each other on a shared binding constraint; a
            # move of all blocks together can still ascend along it
            g = grad_fn(x)
            probe = 1.0 / max(1.0, _norm(g))
            mapped = project_joint(x, [b + probe * gi for b, gi in zip(x, g)])
            if mapped is not None:
                joint_norm = _norm([m - b for m, b in zip(mapped, x)])
                gnorm_sq += joint_norm * joint_norm
                if joint_norm > tol:
                    alpha = min(joint_step * 4.0, _MAX_STEP)
                    while alpha >= _MIN_STEP:
                        cand = project_joint(x, [b + alpha * gi for b, gi in zip(x, g)])
                        if cand is not None:
                            fc = value_fn(cand)
                            if fc > fx + _F_IMPROVE:
                                x, fx = cand, fc
                                joint_step = alpha
                                any_improved = True
                                break
                        alpha *= 0.5

        grad_norm = float(np.sqrt(gnorm_sq))
        stuck = grad_norm <= tol or not any_improved
        if stuck or iterations % _SNAP_PERIOD == 0:
            snapped = _try_snap(x, fx, value_fn, snap_fn)
            if snapped is not None:
                x, fx = snapped
                continue
            if stuck:
                converged = grad_norm <= tol
                break

    return StartResult(params=x, value=fx, iterations=iterations, converged=converged, grad_norm=grad_norm)


def maximize_multistart(
    inits: Sequence[Params],
    value_fn: Callable[[Params], float],
    grad_fn: Callable[[Params], Params],
    project_block: BlockProject,
    max_iters: int,
    tol: float,
    threads: Optional[int] = None,
    feasible_fn: Optional[Callable[[Params], Params]] = None,
    snap_fn: Optional[SnapFn] = None,
    project_joint: Optional[JointProject] = None,
) -> AscentResult:
    """Run one ascent per initial point and keep the best final value.

    ``feasible_fn`` maps an arbitrary initial point into the feasible set
    once, before the ascent; by default each block is projected in turn.
    ``snap_fn`` builds the sparser candidates for the polish step; the
    default treats every block as one plain simplex.  ``project_joint``, when
    given, enables an extra line search per sweep that moves all blocks at
    once.  Ties are broken toward the lowest start index, and the reduction
    order is fixed, so the outcome does not depend on the execution schedule.
    """
    if not inits:
        raise ValueError("need at least one start")

    if feasible_fn is None:
        def feasible_fn(params: Params) -> Params:
            for i in range(len(params)):
                params[i] = project_block(i, params, params[i])
            return params

    if snap_fn is None:
        snap_fn = _default_snap(project_block)

    workers = resolve_threads(threads)
    runner = lambda init: _ascend_one(
        init, value_fn, grad_fn, project_block, feasible_fn, snap_fn,
        project_joint, max_iters, tol,
    )
    if workers == 1 or len(inits) == 1:
        results = [runner(init) for init in inits]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(runner, inits))

    best_i = 0
    for i in range(1, len(results)):
        if results[i].value > results[best_i].value:
            best_i = i
    best = results[best_i]
    return AscentResult(
        params=best.params,
        value=best.value,
        best_start_index=best_i,
        starts_run=len(results),
        iterations=best.iterations,
        converged=best.converged,
        grad_norm=best.grad_norm,
    )
