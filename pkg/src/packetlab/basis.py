"""Basis selection over packet index intervals.

A node (n, j) stands for the index block [a^j n, a^j (n+1) - 1].  A node set
is admissible for exponent J exactly when its blocks tile [0, a^J); those are
the selections for which packet reconstruction is defined.
"""

from dataclasses import dataclass

import numpy as np

from .errors import IncompleteTreeError

__all__ = [
    "BasisSpec",
    "PartitionReport",
    "interval",
    "check_partition",
    "wavelet_basis",
    "level_basis",
    "best_basis",
    "make_cost",
    "node_costs",
]

_ENDPOINT_LIMIT = 2**63


def interval(n: int, j: int, a: int) -> tuple[int, int]:
    """Inclusive index block [a^j n, a^j (n+1) - 1] covered by node (n, j)."""
    if a < 2:
        raise ValueError("a must be >= 2")
    if n < 0 or j < 0:
        raise ValueError("n and j must be >= 0")
    lo = a**j * n
    hi = a**j * (n + 1) - 1
    if hi >= _ENDPOINT_LIMIT:
        raise OverflowError("interval endpoint exceeds 2^63")
    return lo, hi


@dataclass(frozen=True)
class BasisSpec:
    """Ordered node set with target exponent J; nodes sorted by block start."""

    a: int
    J: int
    nodes: tuple[tuple[int, int], ...]
    provenance: str = ""

    def __post_init__(self):
        if self.a < 2:
            raise ValueError("a must be >= 2")
        if self.J < 0:
            raise ValueError("J must be >= 0")
        norm = []
        for node in self.nodes:
            n, j = (int(node[0]), int(node[1]))
            if n < 0 or j < 0:
                raise ValueError(f"bad node {node}")
            norm.append((n, j))
        norm.sort(key=lambda nj: (interval(nj[0], nj[1], self.a)[0], nj[1]))
        object.__setattr__(self, "nodes", tuple(norm))

    def intervals(self) -> list[tuple[int, int]]:
        return [interval(n, j, self.a) for n, j in self.nodes]


@dataclass(frozen=True)
class PartitionReport:
    """What check_partition found; admissible means a perfect tiling."""

    admissible: bool
    exact_cover: bool
    overlaps: tuple[tuple[tuple[int, int], tuple[int, int]], ...]
    gaps: tuple[tuple[int, int], ...]
    out_of_range: tuple[tuple[int, int], ...]
    covered: int
    expected: int


def check_partition(spec: BasisSpec) -> PartitionReport:
    """Deterministic tiling check of spec.nodes against [0, a^J)."""
    total = spec.a**spec.J
    out_of_range = tuple(
        (n, j) for (n, j) in spec.nodes if interval(n, j, spec.a)[1] >= total
    )
    in_range = [(interval(n, j, spec.a), (n, j)) for (n, j) in spec.nodes
                if (n, j) not in set(out_of_range)]
    in_range.sort(key=lambda t: (t[0][0], t[0][1]))
    overlaps: list = []
    gaps: list = []
    covered = 0
    cursor = 0  # next uncovered index
    prev_node = None
    prev_hi = -1
    for (lo, hi), node in in_range:
        if lo > cursor:
            gaps.append((cursor, lo - 1))
        if lo <= prev_hi:
            overlaps.append((prev_node, node))
        covered += hi - lo + 1
        if hi > prev_hi:
            prev_hi = hi
            prev_node = node
        cursor = max(cursor, hi + 1)
    if cursor < total:
        gaps.append((cursor, total - 1))
    exact = covered == total and not overlaps and not gaps
    admissible = exact and not out_of_range
    return PartitionReport(
        admissible=admissible,
        exact_cover=exact,
        overlaps=tuple(overlaps),
        gaps=tuple(gaps),
        out_of_range=out_of_range,
        covered=covered,
        expected=total,
    )


def wavelet_basis(a: int, J: int) -> BasisSpec:
    """Root approximation node plus one detail node per channel per level."""
    nodes = [(0, 0)]
    for j in range(J):
        for r in range(1, a):
            nodes.append((r, j))
    return BasisSpec(a=a, J=J, nodes=tuple(nodes), provenance="wavelet")


def level_basis(a: int, J: int, depth: int) -> BasisSpec:
    """All a^depth packets at a single depth; depth = J reaches the leaves."""
    if not 0 <= depth <= J:
        raise ValueError("need 0 <= depth <= J")
    nodes = tuple((n, J - depth) for n in range(a**depth))
    return BasisSpec(a=a, J=J, nodes=nodes, provenance=f"level-{depth}")


def make_cost(cost, total_energy: float):
    """Build an additive node-cost callable from an identifier.

    Identifiers: "entropy" (alias "shannon-entropy"), "l1", "lp:P" (sum of
    |v|^P), "threshold:T" (count above T).  Tuples ("lp", p) and
    ("threshold", t) are accepted too, as is any callable, which is used
    unchanged.  total_energy normalizes the entropy distribution globally so
    the cost stays additive across nodes.
    """
    if callable(cost):
        return cost
    if isinstance(cost, tuple):
        kind, arg = cost
    else:
        kind, _, arg = str(cost).partition(":")
    kind = kind.strip().lower()
    if kind in ("entropy", "shannon-entropy", "shannon"):
        n = float(total_energy)

        def entropy(values):
            if n <= 0.0:
                return 0.0
            q = np.abs(np.asarray(values).ravel()) ** 2 / n
            q = q[q > 0.0]
            return float(-(q * np.log(q)).sum())

        return entropy
    if kind == "l1":
        return lambda values: float(np.abs(values).sum())
    if kind == "lp":
        p = float(arg)
        if p <= 0:
            raise ValueError("lp cost needs p > 0")
        return lambda values: float((np.abs(values) ** p).sum())
    if kind in ("threshold", "threshold-count"):
        t = float(arg)
        if t < 0:
            raise ValueError("threshold cost needs t >= 0")
        return lambda values: float((np.abs(values) > t).sum())
    raise ValueError(f"unknown cost identifier: {cost!r}")


def node_costs(tree, cost) -> dict[tuple[int, int], float]:
    """Cost of every tree node keyed by (n, depth); requires a complete tree."""
    tree.ensure_complete()
    root_energy = float((np.abs(tree.node(0, 0).values) ** 2).sum())
    fn = make_cost(cost, total_energy=root_energy)
    out = {}
    for dep in range(tree.depth + 1):
        for n in range(tree.a**dep):
            out[(n, dep)] = fn(tree.node(n, dep).values)
    return out


def _select_from_costs(costs: dict[tuple[int, int], float], a: int, depth: int):
    """Bottom-up split/merge decisions; ties keep the parent (coarser) node."""
    best: dict[tuple[int, int], float] = {}
    keep: dict[tuple[int, int], bool] = {}
    for dep in range(depth, -1, -1):
        for n in range(a**dep):
            c = costs[(n, dep)]
            if dep == depth:
                best[(n, dep)] = c
                keep[(n, dep)] = True
            else:
                child_sum = sum(best[(a * n + s, dep + 1)] for s in range(a))
                if c <= child_sum:
                    best[(n, dep)] = c
                    keep[(n, dep)] = True
                else:
                    best[(n, dep)] = child_sum
                    keep[(n, dep)] = False
    selected = []
    stack = [(0, 0)]
    while stack:
        n, dep = stack.pop()
        if keep[(n, dep)]:
            selected.append((n, dep))
        else:
            stack.extend((a * n + s, dep + 1) for s in range(a))
    return selected, best[(0, 0)]


def best_basis(tree, cost) -> BasisSpec:
    """Minimal-cost admissible selection from a complete packet tree.

    The cost may be an identifier (see make_cost) or a callable on coefficient
    arrays; identifiers build additive costs, for which the bottom-up dynamic
    program is exactly optimal over all admissible selections.
    """
    costs = node_costs(tree, cost)
    selected, _ = _select_from_costs(costs, tree.a, tree.depth)
    nodes = tuple((n, tree.depth - dep) for n, dep in selected)
    spec = BasisSpec(a=tree.a, J=tree.depth, nodes=nodes, provenance="best-basis")
    report = check_partition(spec)
    if not report.admissible:
        raise IncompleteTreeError("internal selection is not a tiling")
    return spec
