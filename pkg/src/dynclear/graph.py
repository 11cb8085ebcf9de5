"""Digraph structure of nonnegative matrices.

Node ``i`` has an arc to ``j`` whenever ``M[i, j] > 0`` (exact comparison).
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np


def successors(matrix) -> list:
    M = np.asarray(matrix)
    return [list(np.flatnonzero(M[i] > 0)) for i in range(M.shape[0])]


def tarjan(succ) -> list:
    """Strong components of an adjacency list, in reverse topological order.

    Iterative version of Tarjan's algorithm, so deep graphs do not hit the
    recursion limit.  Sink components come out first.
    """
    n = len(succ)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack = []
    comps = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pos = work.pop()
            if pos == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            recurse = False
            nbrs = succ[v]
            while pos < len(nbrs):
                w = nbrs[pos]
                pos += 1
                if index[w] == -1:
                    work.append((v, pos))
                    work.append((w, 0))
                    recurse = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
    return comps


@dataclass(frozen=True)
class Component:
    nodes: tuple
    is_sink: bool
    is_source: bool
    has_self_loop: bool

    @property
    def is_trivial(self) -> bool:
        return len(self.nodes) == 1

    @property
    def is_isolated(self) -> bool:
        return self.is_sink and self.is_source

    @property
    def is_cyclic(self) -> bool:
        return not self.is_trivial or self.has_self_loop


@dataclass(frozen=True)
class Condensation:
    components: tuple
    membership: tuple  # node -> component index

    @property
    def sinks(self) -> list:
        return [c for c in self.components if c.is_sink]

    def component_of(self, node: int) -> Component:
        return self.components[self.membership[node]]

    @property
    def is_acyclic(self) -> bool:
        return not any(c.is_cyclic for c in self.components)


def strong_components(matrix) -> Condensation:
    M = np.asarray(matrix)
    n = M.shape[0]
    if n == 0:
        raise ValueError("graph has no nodes")
    succ = successors(M)
    comps = sorted(tarjan(succ))
    member = [0] * n
    for k, comp in enumerate(comps):
        for v in comp:
            member[v] = k
    has_out = [False] * len(comps)
    has_in = [False] * len(comps)
    for v in range(n):
        for w in succ[v]:
            if member[v] != member[w]:
                has_out[member[v]] = True
                has_in[member[w]] = True
    components = tuple(
        Component(tuple(int(v) for v in comp), not has_out[k], not has_in[k],
                  any(M[v, v] > 0 for v in comp))
        for k, comp in enumerate(comps))
    return Condensation(components, tuple(member))


def reachable(matrix, from_node: int, targets: Iterable[int]) -> bool:
    """True iff ``from_node`` is in ``targets`` or a walk leads into it."""
    targets = set(int(t) for t in targets)
    if from_node in targets:
        return True
    succ = successors(matrix)
    seen = {from_node}
    queue = deque([from_node])
    while queue:
        v = queue.popleft()
        for w in succ[v]:
            if w in targets:
                return True
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return False


def globally_reachable(matrix, targets: Iterable[int]) -> bool:
    targets = list(targets)
    n = np.asarray(matrix).shape[0]
    return all(reachable(matrix, i, targets) for i in range(n))


def has_globally_reachable_sink_node(matrix) -> bool:
    """One sink component, a single node, reachable from everywhere."""
    sinks = strong_components(matrix).sinks
    return len(sinks) == 1 and sinks[0].is_trivial and globally_reachable(matrix, sinks[0].nodes)


def spectral_radius_estimate(M, iters: int = 10_000) -> float:
    """Power-iteration estimate of the spectral radius of a nonnegative matrix.

    Iterates on ``(I + M) / 2`` so that periodic (cyclic) structure does not
    stall convergence; the lazy matrix has radius ``(1 + rho) / 2``.  The
    ``iters`` steps are taken by repeated squaring (rounded up to a power of
    two), rescaling each square; entries are nonnegative so nothing cancels.
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    if n == 0:
        return 0.0
    lazy = 0.5 * (np.eye(n) + M)
    B = lazy.copy()
    for _ in range(max(0, int(np.ceil(np.log2(max(iters, 1)))))):
        B = B @ B
        top = B.max()
        if top == 0.0:
            return 0.0
        B /= top
    x = B.sum(axis=1) / n
    s = x.sum()
    if s == 0.0:
        return 0.0
    ratio = (lazy @ x).sum() / s
    return max(0.0, 2.0 * ratio - 1.0)


@dataclass(frozen=True)
class StabilityResult:
    stable: bool
    witness: Optional[tuple]
    spectral_radius: float


def submatrix_schur_stable(A, subset, iters: int = 10_000) -> StabilityResult:
    """Schur stability of the principal submatrix of a stochastic ``A``.

    The submatrix on a proper subset of nodes fails to be Schur stable exactly
    when the subset swallows a whole sink component of the graph of ``A``;
    that component is returned as the witness.  The power-iteration radius is
    attached as a diagnostic.
    """
    A = np.asarray(A, dtype=float)
    subset = sorted(set(int(i) for i in subset))
    if len(subset) >= A.shape[0]:
        raise ValueError("subset must be a proper subset of the nodes")
    inside = set(subset)
    witness = None
    for comp in strong_components(A).sinks:
        if inside.issuperset(comp.nodes):
            witness = comp.nodes
            break
    rho = spectral_radius_estimate(A[np.ix_(subset, subset)], iters) if subset else 0.0
    return StabilityResult(witness is None, witness, rho)
