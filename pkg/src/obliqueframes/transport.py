"""Discrete optimal transport with quadratic cost.

Couplings are finitely supported joint measures with declared marginals,
validated at construction.  The exact 2-Wasserstein distance is computed
by a transportation simplex on the dense cost matrix (Bland's entering
rule for anti-cycling), which certifies optimality through the LP dual.
The gluing construction composes two couplings over a shared marginal.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, MarginalMismatch
from .linalg import _as_float_array, _freeze
from .measures import (
    DiscreteMeasure,
    POSITION_TOL,
    _signed_aggregate,
    weak_equal,
)

MARGINAL_TOL = 1e-9


def _marginal(points: np.ndarray, weights: np.ndarray) -> DiscreteMeasure:
    pts, w = _signed_aggregate(points, weights, POSITION_TOL)
    keep = w > 0
    w = w[keep]
    return DiscreteMeasure(pts[keep], w / np.sum(w))


@dataclass(frozen=True)
class Coupling:
    """Joint measure on pairs (x, y) with declared marginals."""

    x: np.ndarray        # (m, n) first coordinates
    y: np.ndarray        # (m, n) second coordinates
    weights: np.ndarray  # (m,)
    marginal_x: DiscreteMeasure
    marginal_y: DiscreteMeasure

    def __post_init__(self):
        x = _as_float_array(np.atleast_2d(self.x), "x")
        y = _as_float_array(np.atleast_2d(self.y), "y")
        w = _as_float_array(self.weights, "weights").reshape(-1)
        if not (x.shape[0] == y.shape[0] == w.shape[0]):
            raise ValueError("pair coordinates and weights disagree in length")
        if np.any(w < 0):
            raise ValueError("coupling weights must be nonnegative")
        if abs(float(np.sum(w)) - 1.0) > MARGINAL_TOL:
            raise ValueError(f"coupling weights sum to {float(np.sum(w)):.17g}")
        object.__setattr__(self, "x", _freeze(x))
        object.__setattr__(self, "y", _freeze(y))
        object.__setattr__(self, "weights", _freeze(w))
        if not weak_equal(_marginal(x, w), aggregate_declared(self.marginal_x)):
            raise MarginalMismatch("first-coordinate marginal mismatch")
        if not weak_equal(_marginal(y, w), aggregate_declared(self.marginal_y)):
            raise MarginalMismatch("second-coordinate marginal mismatch")

    @property
    def num_pairs(self) -> int:
        return self.weights.shape[0]

    def moment_matrix(self) -> np.ndarray:
        """sum_k w_k x_k y_k^T, the mixed second moment of the coupling."""
        return np.einsum("k,ki,kj->ij", self.weights, self.x, self.y)

    def swap(self) -> "Coupling":
        return Coupling(self.y, self.x, self.weights,
                        self.marginal_y, self.marginal_x)


def aggregate_declared(mu: DiscreteMeasure) -> DiscreteMeasure:
    pts, w = _signed_aggregate(np.asarray(mu.points), np.asarray(mu.weights),
                               POSITION_TOL)
    keep = w > 0
    return DiscreteMeasure(pts[keep], w[keep] / np.sum(w[keep]))


def product_coupling(mu: DiscreteMeasure, nu: DiscreteMeasure) -> Coupling:
    """Independent coupling: every atom pair with weight w_mu * w_nu."""
    xs = np.repeat(mu.points, nu.num_atoms, axis=0)
    ys = np.tile(nu.points, (mu.num_atoms, 1))
    w = np.outer(mu.weights, nu.weights).reshape(-1)
    return Coupling(xs, ys, w, mu, nu)


def graph_coupling(mu: DiscreteMeasure, T) -> Coupling:
    """Coupling supported on the graph of an atom-wise map."""
    images = np.array([np.asarray(T(x), dtype=float) for x in mu.points])
    nu = DiscreteMeasure(images, mu.weights)
    return Coupling(mu.points, images, mu.weights, mu, nu)


def identity_coupling(mu: DiscreteMeasure) -> Coupling:
    return graph_coupling(mu, lambda x: x)


def coupling_cost(gamma: Coupling) -> float:
    """Quadratic transport cost sum_k w_k ||x_k - y_k||^2."""
    diff = gamma.x - gamma.y
    return float(np.sum(gamma.weights * np.einsum("ki,ki->k", diff, diff)))


# ---------------------------------------------------------------------------
# Transportation simplex


def _northwest_corner(supply: np.ndarray, demand: np.ndarray):
    m, k = supply.shape[0], demand.shape[0]
    flows = np.zeros((m, k))
    basis: list[tuple[int, int]] = []
    ra = supply.copy()
    rb = demand.copy()
    i = j = 0
    while True:
        t = min(ra[i], rb[j])
        flows[i, j] = t
        basis.append((i, j))
        ra[i] = max(ra[i] - t, 0.0)
        rb[j] = max(rb[j] - t, 0.0)
        if i == m - 1 and j == k - 1:
            break
        if ra[i] <= rb[j] and i < m - 1:
            i += 1
        elif j < k - 1:
            j += 1
        else:
            i += 1
    return flows, basis


def _tree_duals(cost: np.ndarray, basis: list[tuple[int, int]], m: int, k: int):
    rows_of: list[list[int]] = [[] for _ in range(k)]
    cols_of: list[list[int]] = [[] for _ in range(m)]
    for (i, j) in basis:
        cols_of[i].append(j)
        rows_of[j].append(i)
    u = np.full(m, np.nan)
    v = np.full(k, np.nan)
    u[0] = 0.0
    stack = [(True, 0)]
    while stack:
        is_row, idx = stack.pop()
        if is_row:
            for j in cols_of[idx]:
                if np.isnan(v[j]):
                    v[j] = cost[idx, j] - u[idx]
                    stack.append((False, j))
        else:
            for i in rows_of[idx]:
                if np.isnan(u[i]):
                    u[i] = cost[i, idx] - v[idx]
                    stack.append((True, i))
    return u, v


def _basis_cycle(basis: set[tuple[int, int]], enter: tuple[int, int],
                 m: int, k: int) -> list[tuple[int, int]]:
    """Unique cycle created by adding the entering cell to the basis tree,
    returned as the cell sequence starting with the entering cell."""
    # Path from the entering column node back to the entering row node.
    adj: dict[tuple[str, int], list[tuple[str, int]]] = {}
    for (i, j) in basis:
        adj.setdefault(("r", i), []).append(("c", j))
        adj.setdefault(("c", j), []).append(("r", i))
    start, goal = ("c", enter[1]), ("r", enter[0])
    prev: dict[tuple[str, int], tuple[str, int]] = {start: start}
    queue = [start]
    while queue:
        node = queue.pop(0)
        if node == goal:
            break
        for nxt in adj.get(node, ()):
            if nxt not in prev:
                prev[nxt] = node
                queue.append(nxt)
    path_nodes = [goal]
    while path_nodes[-1] != start:
        path_nodes.append(prev[path_nodes[-1]])
    path_nodes.reverse()
    cells = [enter]
    for a, b in zip(path_nodes, path_nodes[1:]):
        (ka, ia), (kb, ib) = a, b
        cells.append((ia, ib) if ka == "r" else (ib, ia))
    return cells


@dataclass(frozen=True)
class TransportCertificate:
    cost: float
    dual_gap: float
    iterations: int


def solve_transport(cost: np.ndarray, supply: np.ndarray, demand: np.ndarray,
                    pivot_tol: float = 1e-12):
    """Minimize sum c_ij x_ij over the transportation polytope.

    Bland's least-index entering rule plus a least-index leaving rule keep
    the simplex from cycling on degenerate instances.  Returns the optimal
    flows and a duality certificate.
    """
    cost = np.asarray(cost, dtype=float)
    supply = np.asarray(supply, dtype=float).copy()
    demand = np.asarray(demand, dtype=float).copy()
    m, k = cost.shape
    if supply.shape[0] != m or demand.shape[0] != k:
        raise DimensionMismatch("cost matrix shape disagrees with marginals")
    if abs(float(np.sum(supply) - np.sum(demand))) > MARGINAL_TOL:
        raise MarginalMismatch("total supply and demand differ")

    flows, basis_list = _northwest_corner(supply, demand)
    basis = set(basis_list)
    scale = pivot_tol * (1.0 + float(np.max(np.abs(cost))))

    iterations = 0
    max_pivots = 200 * (m * k + 10)
    while True:
        u, v = _tree_duals(cost, sorted(basis), m, k)
        if np.isnan(u).any() or np.isnan(v).any():
            raise RuntimeError("basis tree lost connectivity")
        reduced = cost - u[:, None] - v[None, :]
        entering = None
        for i in range(m):
            for j in range(k):
                if (i, j) not in basis and reduced[i, j] < -scale:
                    entering = (i, j)
                    break
            if entering is not None:
                break
        if entering is None:
            break
        iterations += 1
        if iterations > max_pivots:
            raise RuntimeError("transportation simplex exceeded pivot budget")
        cycle = _basis_cycle(basis, entering, m, k)
        minus = cycle[1::2]
        theta = min(flows[c] for c in minus)
        leaving = min(c for c in minus if flows[c] <= theta)
        for idx, c in enumerate(cycle):
            if idx % 2 == 0:
                flows[c] += theta
            else:
                flows[c] = max(flows[c] - theta, 0.0)
        basis.remove(leaving)
        basis.add(entering)

    primal = float(np.sum(flows * cost))
    dual = float(np.dot(u, supply) + np.dot(v, demand))
    return flows, TransportCertificate(cost=primal,
                                       dual_gap=abs(primal - dual),
                                       iterations=iterations)


def exact_w2(mu: DiscreteMeasure, nu: DiscreteMeasure
             ) -> tuple[float, Coupling, TransportCertificate]:
    """Exact 2-Wasserstein distance with an optimal coupling.

    The returned certificate carries the LP cost, duality gap, and pivot
    count of the underlying transportation simplex.
    """
    if mu.ambient_dim != nu.ambient_dim:
        raise DimensionMismatch("measures live in different ambient spaces")
    diff = mu.points[:, None, :] - nu.points[None, :, :]
    cost = np.einsum("ijk,ijk->ij", diff, diff)
    flows, cert = solve_transport(cost, np.asarray(mu.weights),
                                  np.asarray(nu.weights))
    ii, jj = np.nonzero(flows > 0)
    gamma = Coupling(mu.points[ii], nu.points[jj], flows[ii, jj], mu, nu)
    # Quadratic costs are nonnegative; clamp round-off dust before the root.
    total = cert.cost if cert.cost > 0.0 else 0.0
    return float(np.sqrt(total)), gamma, cert


# ---------------------------------------------------------------------------
# Gluing


@dataclass(frozen=True)
class TriCoupling:
    """Joint measure on triples (x, y, z) with declared pair marginals."""

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    weights: np.ndarray
    gamma_xy: Coupling
    gamma_yz: Coupling

    def __post_init__(self):
        for name in ("x", "y", "z"):
            object.__setattr__(self, name,
                               _freeze(np.atleast_2d(getattr(self, name))))
        object.__setattr__(self, "weights",
                           _freeze(np.asarray(self.weights, dtype=float)))
        xy = DiscreteMeasure(np.hstack([self.x, self.y]), self.weights)
        declared_xy = DiscreteMeasure(
            np.hstack([self.gamma_xy.x, self.gamma_xy.y]), self.gamma_xy.weights)
        if not weak_equal(xy, declared_xy):
            raise MarginalMismatch("xy-marginal of the gluing is off")
        yz = DiscreteMeasure(np.hstack([self.y, self.z]), self.weights)
        declared_yz = DiscreteMeasure(
            np.hstack([self.gamma_yz.x, self.gamma_yz.y]), self.gamma_yz.weights)
        if not weak_equal(yz, declared_yz):
            raise MarginalMismatch("yz-marginal of the gluing is off")

    def xz_coupling(self) -> Coupling:
        """Projection onto the outer coordinates."""
        return Coupling(self.x, self.z, self.weights,
                        self.gamma_xy.marginal_x, self.gamma_yz.marginal_y)


def glue(gamma_xy: Coupling, gamma_yz: Coupling,
         pos_tol: float = POSITION_TOL) -> TriCoupling:
    """Compose two couplings over their shared middle marginal.

    Conditional independence given the shared atom: each y of positive mass
    contributes triples weighted gamma_xy(x,y) * gamma_yz(y,z) / mass(y).
    Middle atoms must match by position (same atom list on both sides).
    """
    def key(p: np.ndarray) -> bytes:
        return np.round(p / max(pos_tol, 1e-300)).astype(np.int64).tobytes()

    left: dict[bytes, list[int]] = {}
    left_mass: dict[bytes, float] = {}
    for idx, p in enumerate(gamma_xy.y):
        kk = key(p)
        left.setdefault(kk, []).append(idx)
        left_mass[kk] = left_mass.get(kk, 0.0) + float(gamma_xy.weights[idx])
    right: dict[bytes, list[int]] = {}
    right_mass: dict[bytes, float] = {}
    for idx, p in enumerate(gamma_yz.x):
        kk = key(p)
        right.setdefault(kk, []).append(idx)
        right_mass[kk] = right_mass.get(kk, 0.0) + float(gamma_yz.weights[idx])

    for kk in set(left_mass) | set(right_mass):
        lm = left_mass.get(kk, 0.0)
        rm = right_mass.get(kk, 0.0)
        if abs(lm - rm) > pos_tol:
            raise MarginalMismatch(
                f"shared marginal masses differ by {abs(lm - rm):.3e}"
            )

    xs, ys, zs, ws = [], [], [], []
    for kk, lidx in left.items():
        mass = left_mass[kk]
        if mass <= 0:
            continue
        for a in lidx:
            wa = float(gamma_xy.weights[a])
            if wa <= 0:
                continue
            for b in right.get(kk, ()):
                wb = float(gamma_yz.weights[b])
                if wb <= 0:
                    continue
                xs.append(gamma_xy.x[a])
                ys.append(gamma_xy.y[a])
                zs.append(gamma_yz.y[b])
                ws.append(wa * wb / mass)
    return TriCoupling(np.array(xs), np.array(ys), np.array(zs),
                       np.array(ws), gamma_xy, gamma_yz)
