"""Statistical layer: two-sample testing and convergence tables.

The two-sample test is justified by the fact that two spaces are
equivalent exactly when their full sampling laws agree; a fixed sample
order n probes the order-n marginal of that law, so n is an explicit
knob.  The permutation scheme gives exact finite-sample level with no
distributional assumptions.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .core import FiniteMmmSpace, canonicalize
from .dmat import EXACT_TUPLE_LIMIT
from .errors import ParameterError
from .poly import Polynomial, evaluate_exact, evaluate_mc
from .serialize import dumps, mark_space_to_obj, upper_triangle

__all__ = [
    "TwoSampleResult",
    "ConvergenceTable",
    "two_sample_test",
    "convergence_table",
]


# ---------------------------------------------------------------------------
# canonical atom order and digests
# ---------------------------------------------------------------------------

def _canonical_order(space: FiniteMmmSpace) -> list:
    """Deterministic atom order stable under relabeling.

    Atoms are partitioned by (mark, weight) and the partition is refined
    with distance profiles until stable, then sorted.  Atoms that remain
    tied after refinement are ordered by input position; relabeled copies
    of a space therefore sort identically unless they contain atoms that
    profile-refinement cannot separate (symmetric twins, for which any
    order yields the same matrix, or degenerate regular configurations).
    """
    n = space.n
    d = space.distances
    keys = [(repr(space.marks[i]), float(space.weights[i])) for i in range(n)]
    groups = len(set(keys))
    for _ in range(n):
        rank = {k: t for t, k in enumerate(sorted(set(keys)))}
        keys = [
            (
                rank[keys[i]],
                tuple(
                    sorted((float(d[i, j]), rank[keys[j]]) for j in range(n) if j != i)
                ),
            )
            for i in range(n)
        ]
        new_groups = len(set(keys))
        if new_groups == groups:
            break
        groups = new_groups
    return sorted(range(n), key=lambda i: (keys[i], i))


def _sorted_copy(space: FiniteMmmSpace) -> FiniteMmmSpace:
    order = _canonical_order(space)
    return FiniteMmmSpace(
        distances=space.distances[np.ix_(order, order)],
        marks=tuple(space.marks[i] for i in order),
        weights=space.weights[order],
        mark_space=space.mark_space,
        label=space.label,
    )


def _digest(space: FiniteMmmSpace) -> str:
    obj = {
        "mark_space": mark_space_to_obj(space.mark_space),
        "weights": space.weights,
        "marks": [
            list(m) if space.mark_space.kind == "euclidean" else m
            for m in space.marks
        ],
        "distances": upper_triangle(space.distances),
    }
    return hashlib.sha256(dumps(obj).encode()).hexdigest()


# ---------------------------------------------------------------------------
# feature map
# ---------------------------------------------------------------------------

def _mark_embedding(space: FiniteMmmSpace):
    ms = space.mark_space
    if ms.kind == "discrete":
        table = {lab: (float(pos),) for pos, lab in enumerate(ms.labels)}
        return lambda mark: table[mark]
    return lambda mark: tuple(float(x) for x in mark)


def _features(space: FiniteMmmSpace, idx: np.ndarray, embed) -> np.ndarray:
    """Permutation-invariant feature rows for order-n index samples.

    Each row: the n(n-1)/2 sampled distances sorted, then each mark
    embedding coordinate sorted across the n sampled atoms (coordinates
    sorted independently: invariant, at the price of decoupling
    multi-dimensional marks).
    """
    m, n = idx.shape
    iu = np.triu_indices(n, k=1)
    block = space.distances[idx[:, :, None], idx[:, None, :]]
    dcols = np.sort(block[:, iu[0], iu[1]], axis=1)
    marks = np.array([[embed(space.marks[t]) for t in row] for row in idx])
    mcols = np.sort(marks, axis=1).reshape(m, -1)
    return np.concatenate([dcols, mcols], axis=1)


def _draw_indices(space: FiniteMmmSpace, n: int, m: int, rng) -> np.ndarray:
    p = space.weights / math.fsum(space.weights.tolist())
    return rng.choice(space.n, size=(m, n), p=p)


# ---------------------------------------------------------------------------
# two-sample test
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TwoSampleResult:
    statistic: float
    p_value: float
    order: int
    samples: int
    permutations: int
    feature: str = "sorted-distances+sorted-mark-embeddings"

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise ParameterError("p_value escaped [0, 1]")


def _energy(dmat: np.ndarray, first_mask: np.ndarray) -> float:
    a = dmat[np.ix_(first_mask, ~first_mask)].mean()
    aa = dmat[np.ix_(first_mask, first_mask)].mean()
    bb = dmat[np.ix_(~first_mask, ~first_mask)].mean()
    return 2.0 * a - aa - bb


def two_sample_test(
    a: FiniteMmmSpace,
    b: FiniteMmmSpace,
    n: int = 2,
    m: int = 400,
    permutations: int = 199,
    seed: int = 0,
) -> TwoSampleResult:
    """Permutation test of the hypothesis that two spaces are equivalent.

    Draws m order-n samples per side, maps them through the sorted
    feature rows of `_features`, and compares the two clouds with the
    energy statistic; the p-value comes from ``permutations`` random
    relabelings of the pooled rows, so the level is exact for any m.

    Determinism and symmetry: both spaces are canonicalized and their
    atoms put in the profile-sorted order, and the side whose canonical
    serialization has the smaller SHA-256 digest is drawn first from the
    single seeded stream.  Hence test(a, b) and test(b, a) agree bit for
    bit, and the result is invariant under relabeling either input.
    """
    if n < 2:
        raise ParameterError("sample order must be at least 2")
    if m < 20:
        raise ParameterError("need at least 20 samples per side")
    if permutations < 99:
        raise ParameterError("need at least 99 permutations")
    if a.mark_space != b.mark_space:
        raise ParameterError("both spaces must share the mark space")

    ca = _sorted_copy(canonicalize(a))
    cb = _sorted_copy(canonicalize(b))
    if _digest(cb) < _digest(ca):
        ca, cb = cb, ca

    rng = np.random.default_rng(seed)
    idx1 = _draw_indices(ca, n, m, rng)
    idx2 = _draw_indices(cb, n, m, rng)
    embed = _mark_embedding(ca)
    pooled = np.vstack([_features(ca, idx1, embed), _features(cb, idx2, embed)])
    dmat = cdist(pooled, pooled)

    base = np.zeros(2 * m, dtype=bool)
    base[:m] = True
    observed = _energy(dmat, base)
    hits = 0
    for _ in range(permutations):
        mask = np.zeros(2 * m, dtype=bool)
        mask[rng.permutation(2 * m)[:m]] = True
        if _energy(dmat, mask) >= observed - 1e-12:
            hits += 1
    return TwoSampleResult(
        statistic=float(observed),
        p_value=(1 + hits) / (permutations + 1),
        order=n,
        samples=m,
        permutations=permutations,
    )


# ---------------------------------------------------------------------------
# convergence tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvergenceTable:
    """Panel evaluations along a sequence, optionally against a target.

    ``estimates[k, c]`` is panel member c on space k with ``stderrs`` 0
    for exact cells.  With a target: ``target_values`` per column,
    ``gaps[k, c] = |estimate - target|``, and ``trends[c]`` compares the
    first row's gap with the last ("decreasing"/"increasing"/"flat").
    """

    row_labels: tuple
    column_labels: tuple
    estimates: np.ndarray
    stderrs: np.ndarray
    target_values: np.ndarray | None = None
    gaps: np.ndarray | None = None
    trends: tuple | None = None


def _evaluate_cell(phi: Polynomial, space: FiniteMmmSpace, m: int, seed: int):
    cheap_product = phi.has_product_form and phi.order <= 3
    if cheap_product or space.n**phi.order <= EXACT_TUPLE_LIMIT:
        return evaluate_exact(phi, space), 0.0
    return evaluate_mc(phi, space, m, seed)


def convergence_table(
    sequence,
    target: FiniteMmmSpace | None,
    panel,
    m: int = 2000,
    seed: int = 0,
) -> ConvergenceTable:
    """Evaluate a polynomial panel along a sequence of spaces.

    Cells are exact whenever the enumeration or product fast path fits
    the budget, Monte Carlo with m draws otherwise (per-cell derived
    seeds keep everything reproducible).  With a target space, per-column
    absolute gaps and a first-versus-last trend summary are attached.
    """
    sequence = list(sequence)
    if not sequence:
        raise ParameterError("sequence must be nonempty")
    panel = list(panel)
    if not panel:
        raise ParameterError("panel must be nonempty")

    rows = len(sequence)
    cols = len(panel)
    estimates = np.zeros((rows, cols))
    stderrs = np.zeros((rows, cols))
    for k, space in enumerate(sequence):
        for c, phi in enumerate(panel):
            estimates[k, c], stderrs[k, c] = _evaluate_cell(
                phi, space, m, seed + 1000003 * k + 101 * c
            )

    target_values = gaps = None
    trends = None
    if target is not None:
        target_values = np.zeros(cols)
        for c, phi in enumerate(panel):
            target_values[c], _ = _evaluate_cell(phi, target, m, seed + 7919 * (c + 1))
        gaps = np.abs(estimates - target_values[None, :])
        trends = tuple(
            "decreasing"
            if gaps[-1, c] < gaps[0, c] - 1e-12
            else ("increasing" if gaps[-1, c] > gaps[0, c] + 1e-12 else "flat")
            for c in range(cols)
        )

    row_labels = tuple(
        s.label if s.label else f"space-{k}" for k, s in enumerate(sequence)
    )
    return ConvergenceTable(
        row_labels=row_labels,
        column_labels=tuple(phi.description for phi in panel),
        estimates=estimates,
        stderrs=stderrs,
        target_values=target_values,
        gaps=gaps,
        trends=trends,
    )
