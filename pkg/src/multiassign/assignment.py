"""Label assignment: one-to-one bipartite matching and a score-threshold
one-to-many family.

The one-to-one route builds a classification + box cost matrix and solves it
exactly with a potentials-based shortest-augmenting-path algorithm.  Among
equal-cost optima the solver returns the lexicographically smallest pair
list, which it achieves by minimizing an exact integer tie objective as a
secondary component of the cost (tuple arithmetic, no epsilon hacks).

The one-to-many route scores every (prediction, ground truth) pair with a
convex combination of the ground-truth-class probability and box IoU, binds
each query to its best ground truth, and keeps per ground truth the top k
candidates above a threshold.  Quality targets differ per flavor: matched
IoU for one-to-one, the matching score itself for one-to-many.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, ConfigError, ValidationError
from .geometry import BoxCXCYWH, cxcywh_to_xyxy_array, giou, iou_matrix, l1_box
from .numerics import Tensor2D

DEFAULT_ALPHA = 0.5
DEFAULT_TAU = 0.4

# k values per auxiliary-branch count.
IDENTICAL_K_SETS = {1: (6,), 2: (6, 6), 3: (6, 6, 6)}
DIVERSE_K_SETS = {1: (6,), 2: (3, 6), 3: (2, 4, 6), 5: (2, 3, 4, 5, 6)}


@dataclass(frozen=True)
class Prediction:
    """Per-query output: post-sigmoid class probabilities and a center-form box."""

    class_scores: np.ndarray
    box: BoxCXCYWH

    def __post_init__(self):
        scores = np.asarray(self.class_scores, dtype=np.float64)
        object.__setattr__(self, "class_scores", scores)
        if scores.ndim != 1 or scores.size < 1:
            raise ValidationError("Prediction.class_scores must be a nonempty vector")
        if not np.isfinite(scores).all():
            raise ValidationError("Prediction.class_scores must be finite")


@dataclass(frozen=True)
class GroundTruth:
    class_index: int
    box: BoxCXCYWH

    def __post_init__(self):
        if self.class_index < 0:
            raise ValidationError(f"GroundTruth.class_index must be >= 0, got {self.class_index}")


@dataclass(frozen=True)
class MatchConfig:
    """One one-to-many strategy: score weight alpha, threshold tau, cap k."""

    alpha: float = DEFAULT_ALPHA
    tau: float = DEFAULT_TAU
    k: int = 6

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"MatchConfig.alpha must be in [0, 1], got {self.alpha}")
        if not 0.0 <= self.tau <= 1.0:
            raise ConfigError(f"MatchConfig.tau must be in [0, 1], got {self.tau}")
        if self.k < 1:
            raise ConfigError(f"MatchConfig.k must be >= 1, got {self.k}")


@dataclass(frozen=True)
class CostWeights:
    lambda_cls: float = 2.0
    lambda_l1: float = 5.0
    lambda_giou: float = 2.0

    def __post_init__(self):
        for name in ("lambda_cls", "lambda_l1", "lambda_giou"):
            if getattr(self, name) < 0:
                raise ConfigError(f"CostWeights.{name} must be >= 0")
        if self.lambda_cls == 0 and self.lambda_l1 == 0 and self.lambda_giou == 0:
            raise ConfigError("CostWeights: at least one weight must be positive")


@dataclass
class AssignmentResult:
    """Matched (query, gt, quality target) triples for one branch."""

    pairs: list[tuple[int, int, float]] = field(default_factory=list)
    flavor: str = "one-to-one"


def hungarian(cost: Tensor2D) -> list[tuple[int, int]]:
    """Minimum-cost matching of every column (gt) to a distinct row (query).

    Requires rows >= cols and finite costs.  Among equal-cost optima the
    returned pair list, sorted by query index, is lexicographically smallest.
    """
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2:
        raise ValidationError(f"hungarian: cost must be 2-D, got ndim={cost.ndim}")
    n_q, n_g = cost.shape
    if n_g > n_q:
        raise CapacityError(f"hungarian: {n_g} ground truths exceed {n_q} queries")
    if n_g == 0:
        return []
    if not np.isfinite(cost).all():
        raise ValidationError("hungarian: cost matrix has non-finite entries")

    # Secondary integer objective: minimizing sum of tie weights over matched
    # pairs is equivalent to lexicographic minimality of the sorted pair
    # list.  Queries are digits (most significant first); an unmatched query
    # ranks above any match, and smaller gt indices rank lower.
    base = n_g + 2
    tie = [[base ** (n_q - 1 - q) * (g - n_g) for q in range(n_q)] for g in range(n_g)]

    # Shortest-augmenting-path assignment with potentials, run over
    # (float cost, int tie) pairs compared lexicographically.  1-indexed;
    # rows of `a` are ground truths, columns are queries.
    inf = (math.inf, 0)
    zero = (0.0, 0)
    a = [[(float(cost[q, g]), tie[g][q]) for q in range(n_q)] for g in range(n_g)]
    u = [zero] * (n_g + 1)
    v = [zero] * (n_q + 1)
    p = [0] * (n_q + 1)
    way = [0] * (n_q + 1)
    for i in range(1, n_g + 1):
        p[0] = i
        j0 = 0
        minv = [inf] * (n_q + 1)
        used = [False] * (n_q + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = inf
            j1 = 0
            row = a[i0 - 1]
            u0, u1 = u[i0]
            for j in range(1, n_q + 1):
                if used[j]:
                    continue
                c0, c1 = row[j - 1]
                v0, v1 = v[j]
                cur = (c0 - u0 - v0, c1 - u1 - v1)
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            d0, d1 = delta
            for j in range(n_q + 1):
                if used[j]:
                    pu0, pu1 = u[p[j]]
                    u[p[j]] = (pu0 + d0, pu1 + d1)
                    v0, v1 = v[j]
                    v[j] = (v0 - d0, v1 - d1)
                else:
                    m0, m1 = minv[j]
                    minv[j] = (m0 - d0, m1 - d1)
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1

    pairs = [(j - 1, p[j] - 1) for j in range(1, n_q + 1) if p[j] != 0]
    pairs.sort()
    return pairs


def match_score(p: Prediction, y: GroundTruth, alpha: float) -> float:
    """Convex combination of the gt-class probability and box IoU."""
    if y.class_index >= p.class_scores.size:
        raise ValidationError(
            f"gt class {y.class_index} out of range for {p.class_scores.size} classes"
        )
    m = match_score_matrix([p], [y], alpha)
    return float(m[0, 0])


def match_score_matrix(
    preds: list[Prediction], gts: list[GroundTruth], alpha: float
) -> np.ndarray:
    """(num_preds, num_gts) matrix of matching scores."""
    if not preds or not gts:
        return np.zeros((len(preds), len(gts)))
    scores = np.stack([p.class_scores for p in preds])
    for y in gts:
        if y.class_index >= scores.shape[1]:
            raise ValidationError(
                f"gt class {y.class_index} out of range for {scores.shape[1]} classes"
            )
    cls_part = scores[:, [y.class_index for y in gts]]
    pred_xyxy = cxcywh_to_xyxy_array(
        np.array([[p.box.cx, p.box.cy, p.box.w, p.box.h] for p in preds])
    )
    gt_xyxy = cxcywh_to_xyxy_array(
        np.array([[y.box.cx, y.box.cy, y.box.w, y.box.h] for y in gts])
    )
    ious = iou_matrix(pred_xyxy, gt_xyxy)
    return alpha * cls_part + (1.0 - alpha) * ious


def o2o_cost(
    preds: list[Prediction], gts: list[GroundTruth], w: CostWeights
) -> Tensor2D:
    """Hungarian cost: class miss + L1 box distance + (1 - GIoU), weighted."""
    if not preds:
        raise ValidationError("o2o_cost: preds must be nonempty")
    cost = np.zeros((len(preds), len(gts)))
    if not gts:
        return cost
    for i, p in enumerate(preds):
        p_xyxy = p.box.to_xyxy()
        for j, y in enumerate(gts):
            if y.class_index >= p.class_scores.size:
                raise ValidationError(
                    f"gt class {y.class_index} out of range for {p.class_scores.size} classes"
                )
            cost[i, j] = (
                w.lambda_cls * (1.0 - p.class_scores[y.class_index])
                + w.lambda_l1 * l1_box(p.box, y.box)
                + w.lambda_giou * (1.0 - giou(p_xyxy, y.box.to_xyxy()))
            )
    return cost


def o2o_assign(
    preds: list[Prediction], gts: list[GroundTruth], w: CostWeights
) -> AssignmentResult:
    """One-to-one assignment; quality target is the matched pair's IoU."""
    if len(gts) > len(preds):
        raise CapacityError(f"o2o_assign: {len(gts)} ground truths exceed {len(preds)} queries")
    if not gts:
        return AssignmentResult(pairs=[], flavor="one-to-one")
    matched = hungarian(o2o_cost(preds, gts, w))
    pred_xyxy = cxcywh_to_xyxy_array(
        np.array([[p.box.cx, p.box.cy, p.box.w, p.box.h] for p in preds])
    )
    gt_xyxy = cxcywh_to_xyxy_array(
        np.array([[y.box.cx, y.box.cy, y.box.w, y.box.h] for y in gts])
    )
    ious = iou_matrix(pred_xyxy, gt_xyxy)
    pairs = [(q, g, float(ious[q, g])) for q, g in matched]
    return AssignmentResult(pairs=pairs, flavor="one-to-one")


def o2m_assign(
    preds: list[Prediction], gts: list[GroundTruth], cfg: MatchConfig
) -> AssignmentResult:
    """One-to-many assignment: up to k queries per ground truth above tau.

    Each query is first bound to its argmax-score ground truth (ties toward
    the lower gt index), so a query is positive for at most one ground
    truth.  Per ground truth, bound candidates scoring strictly above tau
    are ranked score-descending (ties toward the lower query index) and the
    top k kept; the quality target is the matching score.
    """
    if not preds or not gts:
        return AssignmentResult(pairs=[], flavor="one-to-many")
    m = match_score_matrix(preds, gts, cfg.alpha)
    best_gt = np.argmax(m, axis=1)  # first max wins, i.e. lower gt index
    pairs: list[tuple[int, int, float]] = []
    for g in range(len(gts)):
        candidates = [
            (q, float(m[q, g]))
            for q in range(len(preds))
            if best_gt[q] == g and m[q, g] > cfg.tau
        ]
        candidates.sort(key=lambda qs: (-qs[1], qs[0]))
        pairs.extend((q, g, s) for q, s in candidates[: cfg.k])
    return AssignmentResult(pairs=pairs, flavor="one-to-many")


def strategy_set(n_aux: int, diverse: bool) -> list[MatchConfig]:
    """Per-branch match configs with the documented k sets and default alpha/tau."""
    table = DIVERSE_K_SETS if diverse else IDENTICAL_K_SETS
    if n_aux not in table:
        kind = "diverse" if diverse else "identical"
        raise ConfigError(
            f"strategy_set: unsupported n_aux={n_aux} for {kind} strategies "
            f"(supported: {sorted(table)})"
        )
    return [MatchConfig(alpha=DEFAULT_ALPHA, tau=DEFAULT_TAU, k=k) for k in table[n_aux]]


def build_strategies(
    n_aux: int,
    diverse: bool,
    alpha: float = DEFAULT_ALPHA,
    tau: float = DEFAULT_TAU,
    tau_set: list[float] | None = None,
    alpha_set: list[float] | None = None,
) -> list[MatchConfig]:
    """Strategy list with optional per-branch alpha/tau overrides.

    ``tau_set`` / ``alpha_set`` must match ``n_aux`` in length when given;
    they perturb the respective parameter per branch while k values still
    come from the identical/diverse tables.
    """
    if n_aux == 0:
        return []
    table = DIVERSE_K_SETS if diverse else IDENTICAL_K_SETS
    if n_aux not in table:
        kind = "diverse" if diverse else "identical"
        raise ConfigError(
            f"build_strategies: unsupported n_aux={n_aux} for {kind} strategies "
            f"(supported: {sorted(table)})"
        )
    ks = table[n_aux]
    taus = list(tau_set) if tau_set is not None else [tau] * n_aux
    alphas = list(alpha_set) if alpha_set is not None else [alpha] * n_aux
    if len(taus) != n_aux:
        raise ConfigError(f"tau_set must have {n_aux} entries, got {len(taus)}")
    if len(alphas) != n_aux:
        raise ConfigError(f"alpha_set must have {n_aux} entries, got {len(alphas)}")
    return [MatchConfig(alpha=al, tau=t, k=k) for al, t, k in zip(alphas, taus, ks)]
