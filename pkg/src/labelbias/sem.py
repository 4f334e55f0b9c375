"""Linear structural equation models over a labeled DAG.

A model is a set of directed edges with structural coefficients, bidirected
edges carrying exogenous noise covariances, and exogenous noise variances.
Implied covariances are available two ways: a matrix solve of the structural
system, and Wright's path-tracing rule for standardized models.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

from .data import Dataset
from .errors import InvalidParamsError, NotStandardizedError, SingularSystemError
from .gaussian import GaussianSystem
from .seeding import rng

PARAM_TOL = 1e-12
STANDARDIZED_TOL = 1e-9
STYLIZED_NODES = ("Z", "B0", "B1", "A0", "A1")


@dataclass(frozen=True)
class StylizedParams:
    """Edge weights of the arrest/behavior model.

    alpha: neighborhood -> arrests, beta: neighborhood -> behavior,
    gamma: behavior -> arrests, delta: covariance of the two behavior noises.
    """

    alpha: float
    beta: float
    gamma: float
    delta: float

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "gamma", "delta"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < -PARAM_TOL or v > 1 + PARAM_TOL:
                raise InvalidParamsError(f"{name}={v} is outside [0, 1]")
        if self.behavior_noise_variance < -PARAM_TOL:
            raise InvalidParamsError(
                f"sigma_B^2 = 1 - beta^2 = {self.behavior_noise_variance:.6g} < 0"
            )
        if self.delta > self.behavior_noise_variance + PARAM_TOL:
            raise InvalidParamsError(
                f"delta={self.delta} exceeds sigma_B^2 = 1 - beta^2 = {self.behavior_noise_variance:.6g}"
                " (requires beta^2 + delta <= 1)"
            )
        if self.arrest_noise_variance < -PARAM_TOL:
            raise InvalidParamsError(
                "sigma_A^2 = 1 - alpha^2 - gamma^2 - 2*alpha*beta*gamma = "
                f"{self.arrest_noise_variance:.6g} < 0"
            )

    @property
    def behavior_noise_variance(self) -> float:
        return 1.0 - self.beta**2

    @property
    def arrest_noise_variance(self) -> float:
        a, b, g = self.alpha, self.beta, self.gamma
        return 1.0 - a * a - g * g - 2.0 * a * b * g

    @classmethod
    def is_valid(cls, alpha: float, beta: float, gamma: float, delta: float) -> bool:
        try:
            cls(alpha, beta, gamma, delta)
        except InvalidParamsError:
            return False
        return True


@dataclass(frozen=True)
class LinearSem:
    nodes: tuple[str, ...]
    directed_edges: tuple[tuple[str, str, float], ...] = ()
    bidirected_edges: tuple[tuple[str, str, float], ...] = ()
    exo_variances: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "directed_edges", tuple((a, b, float(w)) for a, b, w in self.directed_edges))
        object.__setattr__(self, "bidirected_edges", tuple((a, b, float(c)) for a, b, c in self.bidirected_edges))
        variances = {n: float(self.exo_variances.get(n, 1.0)) for n in self.nodes}
        object.__setattr__(self, "exo_variances", variances)

        if len(set(self.nodes)) != len(self.nodes):
            raise InvalidParamsError("duplicate node names")
        known = set(self.nodes)
        for a, b, _ in self.directed_edges + self.bidirected_edges:
            if a not in known or b not in known:
                raise InvalidParamsError(f"edge ({a}, {b}) references an unknown node")
            if a == b:
                raise InvalidParamsError(f"self-loop on {a}")
        extra = set(self.exo_variances) - known
        if extra:
            raise InvalidParamsError(f"variances given for unknown nodes {sorted(extra)}")
        for n, v in variances.items():
            if v < -PARAM_TOL:
                raise InvalidParamsError(f"exogenous variance of {n} is negative ({v})")
        for a, b, c in self.bidirected_edges:
            bound = math.sqrt(max(variances[a], 0.0) * max(variances[b], 0.0))
            if abs(c) > bound + PARAM_TOL:
                raise InvalidParamsError(
                    f"|Cov(U_{a}, U_{b})| = {abs(c)} exceeds sqrt(var*var) = {bound}"
                )
        self.topological_order  # raises on cycles

    @cached_property
    def topological_order(self) -> tuple[str, ...]:
        # Kahn's algorithm, ties broken by declaration order.
        pos = {n: i for i, n in enumerate(self.nodes)}
        indegree = {n: 0 for n in self.nodes}
        children: dict[str, list[str]] = {n: [] for n in self.nodes}
        for a, b, _ in self.directed_edges:
            indegree[b] += 1
            children[a].append(b)
        ready = sorted((n for n in self.nodes if indegree[n] == 0), key=pos.get)
        order: list[str] = []
        while ready:
            n = ready.pop(0)
            order.append(n)
            for c in children[n]:
                indegree[c] -= 1
                if indegree[c] == 0:
                    ready.append(c)
            ready.sort(key=pos.get)
        if len(order) != len(self.nodes):
            raise InvalidParamsError("directed edges contain a cycle")
        return tuple(order)

    @cached_property
    def weight_matrix(self) -> np.ndarray:
        """W[i, j] is the coefficient of node i in the equation for node j."""
        idx = {n: i for i, n in enumerate(self.nodes)}
        W = np.zeros((len(self.nodes), len(self.nodes)))
        for a, b, w in self.directed_edges:
            W[idx[a], idx[b]] += w
        return W

    @cached_property
    def exogenous_covariance(self) -> np.ndarray:
        idx = {n: i for i, n in enumerate(self.nodes)}
        S = np.diag([max(self.exo_variances[n], 0.0) for n in self.nodes])
        for a, b, c in self.bidirected_edges:
            S[idx[a], idx[b]] += c
            S[idx[b], idx[a]] += c
        return S

    @cached_property
    def _implied(self) -> GaussianSystem:
        k = len(self.nodes)
        A = np.eye(k) - self.weight_matrix.T
        try:
            inv = np.linalg.inv(A)
        except np.linalg.LinAlgError as exc:
            raise SingularSystemError("I - W^T is singular") from exc
        cov = inv @ self.exogenous_covariance @ inv.T
        cov = 0.5 * (cov + cov.T)
        return GaussianSystem(self.nodes, np.zeros(k), cov)

    @cached_property
    def is_standardized(self) -> bool:
        return bool(np.all(np.abs(np.diag(self._implied.cov) - 1.0) <= STANDARDIZED_TOL))


def build_stylized(params: StylizedParams) -> LinearSem:
    """The five-node neighborhood/behavior/arrest model with unit node variances."""
    a, b, g, d = params.alpha, params.beta, params.gamma, params.delta
    sigma_b = max(params.behavior_noise_variance, 0.0)
    sigma_a = max(params.arrest_noise_variance, 0.0)
    return LinearSem(
        nodes=STYLIZED_NODES,
        directed_edges=(
            ("Z", "B0", b),
            ("Z", "B1", b),
            ("Z", "A0", a),
            ("Z", "A1", a),
            ("B0", "A0", g),
            ("B1", "A1", g),
        ),
        bidirected_edges=(("B0", "B1", min(d, sigma_b)),),
        exo_variances={"Z": 1.0, "B0": sigma_b, "B1": sigma_b, "A0": sigma_a, "A1": sigma_a},
    )


def implied_covariance(sem: LinearSem) -> GaussianSystem:
    """Solve X = W^T X + U for the joint covariance of all nodes."""
    return sem._implied


def stylized_pairwise_covariances(params: StylizedParams) -> dict[tuple[str, str], float]:
    """Closed-form covariances of the stylized model from path tracing."""
    a, b, g, d = params.alpha, params.beta, params.gamma, params.delta
    return {
        ("A0", "Z"): a + b * g,
        ("A1", "Z"): a + b * g,
        ("B1", "Z"): b,
        ("A1", "A0"): a * a + 2 * a * b * g + b * b * g * g + g * g * d,
        ("B1", "A0"): a * b + b * b * g + g * d,
    }


def _adjacency(sem: LinearSem) -> dict[str, list[tuple[str, float, bool, bool]]]:
    # neighbor, weight, is_bidirected, arrowhead at the current node
    adj: dict[str, list[tuple[str, float, bool, bool]]] = {n: [] for n in sem.nodes}
    for a, b, w in sem.directed_edges:
        adj[a].append((b, w, False, False))
        adj[b].append((a, w, False, True))
    for a, b, c in sem.bidirected_edges:
        adj[a].append((b, c, True, True))
        adj[b].append((a, c, True, True))
    return adj


def d_connected_paths(sem: LinearSem, a: str, b: str) -> list[tuple[list[str], float]]:
    """Simple paths from a to b with no collider and at most one bidirected edge.

    Returns each path with the product of its edge weights.
    """
    if a not in sem.exo_variances or b not in sem.exo_variances:
        raise KeyError(f"unknown node in ({a}, {b})")
    if a == b:
        return [([a], 1.0)]
    adj = _adjacency(sem)
    out: list[tuple[list[str], float]] = []

    def walk(node: str, path: list[str], product: float, head_in: bool, used_bidirected: bool) -> None:
        for nxt, w, bidirected, head_at_node in adj[node]:
            if nxt in path:
                continue
            if bidirected and used_bidirected:
                continue
            # collider: arrowheads meet at `node` from both sides
            if len(path) > 1 and head_in and head_at_node:
                continue
            # arrowhead at `nxt` for the edge just traversed
            head_at_next = True if bidirected else not head_at_node
            if nxt == b:
                out.append((path + [nxt], product * w))
                continue
            walk(nxt, path + [nxt], product * w, head_at_next, used_bidirected or bidirected)

    walk(a, [a], 1.0, False, False)
    return out


def trek_covariance(sem: LinearSem, a: str, b: str) -> float:
    """Covariance of a and b by Wright's path-tracing rule.

    Only valid for standardized models (every node has unit variance).
    """
    if not sem.is_standardized:
        diag = dict(zip(sem.nodes, np.diag(sem._implied.cov)))
        off = {n: v for n, v in diag.items() if abs(v - 1.0) > STANDARDIZED_TOL}
        raise NotStandardizedError(f"node variances differ from 1: {off}")
    return math.fsum(w for _, w in d_connected_paths(sem, a, b))


def sample(sem: LinearSem, n: int, seed: int) -> Dataset:
    """Draw n i.i.d. rows, computing nodes in topological order."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    order = list(sem.topological_order)
    idx = {name: i for i, name in enumerate(sem.nodes)}
    perm = [idx[name] for name in order]
    S = sem.exogenous_covariance[np.ix_(perm, perm)]
    L = psd_cholesky(S)
    gen = rng(seed, "sem-sample")
    U = gen.standard_normal((n, len(order))) @ L.T

    parents: dict[str, list[tuple[int, float]]] = {name: [] for name in order}
    pos = {name: i for i, name in enumerate(order)}
    for a, b, w in sem.directed_edges:
        parents[b].append((pos[a], w))
    X = np.empty_like(U)
    for j, name in enumerate(order):
        col = U[:, j].copy()
        for p, w in parents[name]:
            col += w * X[:, p]
        X[:, j] = col
    return Dataset(order, X)


def psd_cholesky(S: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Lower-triangular L with L L^T = S, tolerating zero pivots."""
    S = np.asarray(S, dtype=float)
    k = S.shape[0]
    L = np.zeros_like(S)
    for j in range(k):
        d = S[j, j] - L[j, :j] @ L[j, :j]
        if d < -tol * max(1.0, abs(S[j, j])):
            raise InvalidParamsError("exogenous covariance is not positive semidefinite")
        if d <= tol * max(1.0, abs(S[j, j])):
            continue
        L[j, j] = math.sqrt(d)
        for i in range(j + 1, k):
            L[i, j] = (S[i, j] - L[i, :j] @ L[j, :j]) / L[j, j]
    return L


def random_standardized_sem(
    n_nodes: int, gen: np.random.Generator, edge_prob: float = 0.6, n_bidirected: int = 1
) -> LinearSem:
    """Random DAG whose exogenous variances are calibrated to unit node variances.

    Bidirected edges are only placed between pairs where neither node is an
    ancestor of the other, which keeps the calibration a forward pass.
    """
    nodes = tuple(f"V{i}" for i in range(n_nodes))
    while True:
        edges = []
        for j in range(n_nodes):
            for i in range(j):
                if gen.random() < edge_prob:
                    edges.append((nodes[i], nodes[j], float(gen.uniform(-0.6, 0.6))))
        ancestors = _ancestors(nodes, edges)
        candidates = [
            (nodes[i], nodes[j])
            for j in range(n_nodes)
            for i in range(j)
            if nodes[i] not in ancestors[nodes[j]]
        ]
        gen.shuffle(candidates)
        chosen = candidates[:n_bidirected]
        corr = {pair: float(gen.uniform(-0.9, 0.9)) / max(1, n_bidirected) for pair in chosen}
        variances: dict[str, float] = {}
        ok = True
        for j, name in enumerate(nodes):
            partial = LinearSem(
                nodes[: j + 1],
                tuple(e for e in edges if e[1] in nodes[: j + 1]),
                tuple(
                    (a, b, r * math.sqrt(variances[a] * variances[b]))
                    for (a, b), r in corr.items()
                    if a in variances and b in variances
                ),
                {**variances, name: 0.0},
            )
            explained = float(implied_covariance(partial).cov[j, j])
            if explained >= 0.95:
                ok = False
                break
            variances[name] = 1.0 - explained
        if not ok:
            continue
        bidirected = tuple((a, b, r * math.sqrt(variances[a] * variances[b])) for (a, b), r in corr.items())
        return LinearSem(nodes, tuple(edges), bidirected, variances)


def _ancestors(nodes: Iterable[str], edges: Iterable[tuple[str, str, float]]) -> dict[str, set[str]]:
    parents: dict[str, set[str]] = {n: set() for n in nodes}
    for a, b, _ in edges:
        parents[b].add(a)
    out: dict[str, set[str]] = {}

    def visit(n: str) -> set[str]:
        if n not in out:
            acc: set[str] = set()
            for p in parents[n]:
                acc |= {p} | visit(p)
            out[n] = acc
        return out[n]

    for n in parents:
        visit(n)
    return out
