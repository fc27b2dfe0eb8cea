"""Finite node sets standing in for a closed region and its boundary.

Three constructors are provided: a uniform 1D interval grid, a 2D rectangle
grid with the 5-point stencil, and an arbitrary weighted graph with a
designated boundary. All of them return an immutable :class:`Domain`.

Scaling conventions
-------------------
The interval uses conductance ``1/h``, lumped mass ``h`` (``h/2`` at the two
endpoints) and unit boundary weight, so that ``M^{-1} A`` approximates the
negative Laplacian with the correct Robin condition. The rectangle uses the
lumped P1 finite-element stencil of a uniformly triangulated grid: interior
edges carry ``hy/hx`` (horizontal) or ``hx/hy`` (vertical), edges lying on the
perimeter carry half of that, masses are ``hx*hy`` scaled by 1/2 on sides and
1/4 at corners, and the boundary weight of a node is half the length of the
perimeter segments touching it. Abstract graphs default every weight to 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import InvalidDomain

__all__ = [
    "Domain",
    "build_interval",
    "build_rectangle",
    "build_graph",
]


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Domain:
    """Immutable weighted node set with an interior/boundary partition.

    ``sigma`` is aligned with ``boundary`` (``sigma[k]`` belongs to node
    ``boundary[k]``); ``conductance`` is aligned with the rows of ``edges``.
    """

    kind: str
    coords: np.ndarray
    interior: tuple[int, ...]
    boundary: tuple[int, ...]
    edges: np.ndarray
    conductance: np.ndarray
    mass: np.ndarray
    sigma: np.ndarray
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        n = self.n
        nodes = set(self.interior) | set(self.boundary)
        if len(self.boundary) == 0:
            raise InvalidDomain("boundary must be nonempty")
        if set(self.interior) & set(self.boundary):
            raise InvalidDomain("interior and boundary overlap")
        if nodes != set(range(n)) or len(self.interior) + len(self.boundary) != n:
            raise InvalidDomain("interior and boundary must partition the node set")
        if self.edges.ndim != 2 or self.edges.shape[1] != 2:
            raise InvalidDomain("edges must be an (m, 2) index array")
        if self.edges.size:
            if np.any(self.edges[:, 0] == self.edges[:, 1]):
                raise InvalidDomain("self-loop in edge list")
            if self.edges.min() < 0 or self.edges.max() >= n:
                raise InvalidDomain("edge index out of range")
        if len(self.conductance) != len(self.edges):
            raise InvalidDomain("one conductance per edge required")
        if np.any(~(self.conductance > 0)) or not np.all(np.isfinite(self.conductance)):
            raise InvalidDomain("conductances must be finite and strictly positive")
        if len(self.mass) != n or np.any(~(self.mass > 0)) or not np.all(np.isfinite(self.mass)):
            raise InvalidDomain("masses must be finite and strictly positive, one per node")
        if len(self.sigma) != len(self.boundary) or np.any(~(self.sigma > 0)):
            raise InvalidDomain("boundary weights must be strictly positive, one per boundary node")
        keys = {(int(i), int(j)) for i, j in self.edges}
        if len(keys) != len(self.edges):
            raise InvalidDomain("duplicate edge")

    @property
    def n(self) -> int:
        return int(self.coords.shape[0])

    @property
    def edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset((int(i), int(j)) for i, j in self.edges)

    def is_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edge_set

    def boundary_position(self, node: int) -> int:
        """Index of ``node`` inside ``boundary`` (and hence inside ``sigma``)."""
        try:
            return self.boundary.index(node)
        except ValueError:
            raise InvalidDomain(f"node {node} is not a boundary node") from None

    def adjacency(self) -> np.ndarray:
        """Dense symmetric conductance matrix with zero diagonal."""
        W = np.zeros((self.n, self.n))
        i, j = self.edges[:, 0], self.edges[:, 1]
        W[i, j] = self.conductance
        W[j, i] = self.conductance
        return W

    def __eq__(self, other):
        if not isinstance(other, Domain):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.interior == other.interior
            and self.boundary == other.boundary
            and np.array_equal(self.coords, other.coords)
            and np.array_equal(self.edges, other.edges)
            and np.array_equal(self.conductance, other.conductance)
            and np.array_equal(self.mass, other.mass)
            and np.array_equal(self.sigma, other.sigma)
        )

    def __hash__(self):
        return hash((self.kind, self.n, self.boundary, self.edges.tobytes(), self.conductance.tobytes()))

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"kind": self.kind}
        if self.kind == "interval":
            d["n"] = self.params["n"]
            d["length"] = self.params["length"]
        elif self.kind == "rectangle":
            d.update(nx=self.params["nx"], ny=self.params["ny"], lx=self.params["lx"], ly=self.params["ly"])
        else:
            d["n"] = self.n
            d["edges"] = [[int(i), int(j)] for i, j in self.edges]
        d["boundary"] = list(self.boundary)
        d["mass"] = [float(x) for x in self.mass]
        d["sigma"] = [float(x) for x in self.sigma]
        d["conductance"] = [float(x) for x in self.conductance]
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Domain":
        if not isinstance(d, dict) or "kind" not in d:
            raise InvalidDomain("domain JSON must be an object with a 'kind' key")
        kind = d["kind"]
        allowed = {
            "interval": {"kind", "n", "length"},
            "rectangle": {"kind", "nx", "ny", "lx", "ly"},
            "graph": {"kind", "n", "edges"},
        }
        if kind not in allowed:
            raise InvalidDomain(f"unknown domain kind {kind!r}")
        extra = set(d) - allowed[kind] - {"boundary", "mass", "sigma", "conductance"}
        if extra:
            raise InvalidDomain(f"unknown domain keys: {sorted(extra)}")
        try:
            if kind == "interval":
                dom = build_interval(int(d["n"]), float(d.get("length", 1.0)))
            elif kind == "rectangle":
                dom = build_rectangle(int(d["nx"]), int(d["ny"]), float(d.get("lx", 1.0)), float(d.get("ly", 1.0)))
            else:
                return build_graph(
                    d["edges"],
                    d["boundary"],
                    n=d.get("n"),
                    conductance=d.get("conductance"),
                    mass=d.get("mass"),
                    sigma=d.get("sigma"),
                )
        except KeyError as exc:
            raise InvalidDomain(f"missing domain key {exc}") from None
        # derived arrays are optional for grids but must agree when present
        for key in ("boundary", "mass", "sigma", "conductance"):
            if key in d and not np.array_equal(np.asarray(d[key], dtype=float), np.asarray(dom.to_dict()[key], dtype=float)):
                raise InvalidDomain(f"'{key}' does not match the {kind} construction")
        return dom


def build_interval(n: int, length: float = 1.0) -> Domain:
    """Uniform grid on ``[0, length]`` with ``n`` nodes; the two ends form the boundary."""
    if int(n) != n or n < 3:
        raise InvalidDomain(f"interval needs n >= 3 nodes, got {n}")
    if not length > 0 or not np.isfinite(length):
        raise InvalidDomain(f"length must be positive, got {length}")
    n = int(n)
    h = length / (n - 1)
    edges = np.column_stack([np.arange(n - 1), np.arange(1, n)])
    mass = np.full(n, h)
    mass[0] = mass[-1] = h / 2
    return Domain(
        kind="interval",
        coords=_frozen((np.arange(n) * h)[:, None]),
        interior=tuple(range(1, n - 1)),
        boundary=(0, n - 1),
        edges=_frozen(edges, dtype=np.int64),
        conductance=_frozen(np.full(n - 1, 1.0 / h)),
        mass=_frozen(mass),
        sigma=_frozen([1.0, 1.0]),
        params={"n": n, "length": float(length)},
    )


def build_rectangle(nx: int, ny: int, lx: float = 1.0, ly: float = 1.0) -> Domain:
    """Grid on ``[0, lx] x [0, ly]``; node ``(i, j)`` has index ``j * nx + i``."""
    if int(nx) != nx or int(ny) != ny or nx < 3 or ny < 3:
        raise InvalidDomain(f"rectangle needs nx, ny >= 3, got ({nx}, {ny})")
    if not (lx > 0 and ly > 0):
        raise InvalidDomain("side lengths must be positive")
    nx, ny = int(nx), int(ny)
    hx, hy = lx / (nx - 1), ly / (ny - 1)
    idx = np.arange(nx * ny).reshape(ny, nx)
    ii, jj = np.meshgrid(np.arange(nx), np.arange(ny))

    on_x_side = (ii == 0) | (ii == nx - 1)
    on_y_side = (jj == 0) | (jj == ny - 1)

    edges, cond = [], []
    for j in range(ny):
        half = 0.5 if j in (0, ny - 1) else 1.0
        for i in range(nx - 1):
            edges.append((idx[j, i], idx[j, i + 1]))
            cond.append(half * hy / hx)
    for j in range(ny - 1):
        for i in range(nx):
            half = 0.5 if i in (0, nx - 1) else 1.0
            edges.append((idx[j, i], idx[j + 1, i]))
            cond.append(half * hx / hy)
    order = np.lexsort((np.array(edges)[:, 1], np.array(edges)[:, 0]))
    edges = np.array(edges, dtype=np.int64)[order]
    cond = np.array(cond)[order]

    mass = hx * hy * np.where(on_x_side, 0.5, 1.0) * np.where(on_y_side, 0.5, 1.0)
    is_bnd = (on_x_side | on_y_side).ravel()
    boundary = tuple(int(k) for k in np.flatnonzero(is_bnd))
    interior = tuple(int(k) for k in np.flatnonzero(~is_bnd))
    sigma = []
    for k in boundary:
        i, j = k % nx, k // nx
        corner = i in (0, nx - 1) and j in (0, ny - 1)
        if corner:
            sigma.append(0.5 * (hx + hy))
        elif j in (0, ny - 1):
            sigma.append(hx)
        else:
            sigma.append(hy)
    coords = np.column_stack([ii.ravel() * hx, jj.ravel() * hy])
    return Domain(
        kind="rectangle",
        coords=_frozen(coords),
        interior=interior,
        boundary=boundary,
        edges=_frozen(edges, dtype=np.int64),
        conductance=_frozen(cond),
        mass=_frozen(mass.ravel()),
        sigma=_frozen(sigma),
        params={"nx": nx, "ny": ny, "lx": float(lx), "ly": float(ly)},
    )


def build_graph(
    edges: Iterable[Sequence[float]],
    boundary: Iterable[int],
    n: int | None = None,
    conductance: Sequence[float] | None = None,
    mass: Sequence[float] | None = None,
    sigma: Sequence[float] | None = None,
) -> Domain:
    """Abstract weighted graph.

    ``edges`` holds pairs ``(i, j)`` or triples ``(i, j, w)``; an explicit
    ``conductance`` sequence overrides inline weights. Node count defaults to
    one more than the largest index mentioned.
    """
    pairs, inline = [], []
    for e in edges:
        e = list(e)
        if len(e) not in (2, 3):
            raise InvalidDomain(f"edge {e} must be (i, j) or (i, j, w)")
        i, j = int(e[0]), int(e[1])
        if i == j:
            raise InvalidDomain(f"self-loop at node {i}")
        pairs.append((min(i, j), max(i, j)))
        inline.append(float(e[2]) if len(e) == 3 else 1.0)
    boundary = sorted({int(b) for b in boundary})
    if n is None:
        mentioned = [k for p in pairs for k in p] + boundary
        n = max(mentioned) + 1 if mentioned else 0
    n = int(n)
    if any(k < 0 or k >= n for p in pairs for k in p) or any(b < 0 or b >= n for b in boundary):
        raise InvalidDomain("node index out of range")
    if not boundary or len(boundary) == n:
        raise InvalidDomain("boundary must be a nonempty proper subset of the nodes")
    w = np.array(inline if conductance is None else conductance, dtype=float)
    if len(w) != len(pairs):
        raise InvalidDomain("one conductance per edge required")
    if pairs:
        order = sorted(range(len(pairs)), key=lambda k: pairs[k])
        E = np.array([pairs[k] for k in order], dtype=np.int64)
        w = w[order]
    else:
        E = np.zeros((0, 2), dtype=np.int64)
    mass = np.ones(n) if mass is None else np.asarray(mass, dtype=float)
    sigma = np.ones(len(boundary)) if sigma is None else np.asarray(sigma, dtype=float)
    bset = set(boundary)
    return Domain(
        kind="graph",
        coords=_frozen(np.arange(n, dtype=float)[:, None]),
        interior=tuple(k for k in range(n) if k not in bset),
        boundary=tuple(boundary),
        edges=_frozen(E, dtype=np.int64),
        conductance=_frozen(w),
        mass=_frozen(mass),
        sigma=_frozen(sigma),
    )
