"""Symmetric bilinear forms ``a(u, v) = u^T A v`` over a :class:`Domain`.

Four families are assembled here: Neumann, Dirichlet, Robin with a boundary
measure ``mu`` (entries may be ``+inf``), and nonlocal Robin with a symmetric
boundary operator ``B``. Infinite measure values pin the node to zero; the
pinned rows and columns of ``A`` are identically zero and the pinned set is
stored explicitly, never emulated by a large penalty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .domain import Domain
from .errors import AsymmetricForm, DomainMismatch, EmptyInterior, InvalidMeasure

__all__ = [
    "FormMatrix",
    "BoundaryMeasure",
    "BoundaryOperator",
    "Verdict",
    "GapReport",
    "SIGN_RTOL",
    "sign_tol",
    "row_sums",
    "neumann_form",
    "dirichlet_form",
    "robin_form",
    "nonlocal_robin_form",
    "add_jump",
    "is_markovian",
    "ouhabaz_gap",
    "cross_form_energy",
]

SIGN_RTOL = 1e-12


def sign_tol(*mats: np.ndarray) -> float:
    """Scale-invariant slack ``1e-12 * max|A|`` used by every sign test."""
    scale = max((float(np.max(np.abs(m))) if m.size else 0.0) for m in mats)
    return SIGN_RTOL * scale


def row_sums(A: np.ndarray) -> np.ndarray:
    # exact-then-rounded sums keep the killing measure within 1 ulp
    return np.array([math.fsum(row) for row in A])


@dataclass(frozen=True, eq=False)
class FormMatrix:
    domain: Domain
    A: np.ndarray
    pinned: frozenset[int] = frozenset()

    def __post_init__(self):
        A = np.array(self.A, dtype=float, copy=True)
        n = self.domain.n
        if A.shape != (n, n):
            raise DomainMismatch(f"matrix shape {A.shape} does not match domain size {n}")
        if np.max(np.abs(A - A.T), initial=0.0) > sign_tol(A):
            raise AsymmetricForm("form matrix is not symmetric")
        pinned = frozenset(int(p) for p in self.pinned)
        if any(p < 0 or p >= n for p in pinned):
            raise DomainMismatch("pinned index out of range")
        idx = sorted(pinned)
        if idx and (np.any(A[idx, :] != 0) or np.any(A[:, idx] != 0)):
            raise AsymmetricForm("pinned rows/columns must be identically zero")
        A.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "pinned", pinned)

    @property
    def n(self) -> int:
        return self.domain.n

    @property
    def free(self) -> np.ndarray:
        """Indices not pinned to zero, in increasing order."""
        return np.array([k for k in range(self.n) if k not in self.pinned], dtype=np.int64)

    def effective(self) -> np.ndarray:
        """Principal submatrix on the free indices."""
        f = self.free
        return self.A[np.ix_(f, f)]

    def with_matrix(self, A: np.ndarray) -> "FormMatrix":
        return FormMatrix(self.domain, A, self.pinned)

    def __eq__(self, other):
        if not isinstance(other, FormMatrix):
            return NotImplemented
        return self.domain == other.domain and self.pinned == other.pinned and np.array_equal(self.A, other.A)

    def to_dict(self) -> dict[str, Any]:
        return {
            "domain": self.domain.to_dict(),
            "matrix": [[float(x) for x in row] for row in self.A],
            "pinned": sorted(self.pinned),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "FormMatrix":
        extra = set(d) - {"domain", "matrix", "pinned"}
        if extra:
            raise DomainMismatch(f"unknown form keys: {sorted(extra)}")
        domain = Domain.from_dict(d["domain"])
        return cls(domain, np.asarray(d["matrix"], dtype=float), frozenset(d.get("pinned", [])))


@dataclass(frozen=True, eq=False)
class BoundaryMeasure:
    """Atom masses ``mu_i`` in ``[0, inf]`` on the boundary nodes, in boundary order."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True).ravel()
        if np.any(np.isnan(v)) or np.any(v < 0):
            raise InvalidMeasure(f"measure values must lie in [0, inf], got {v.tolist()}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)

    @property
    def finite_mask(self) -> np.ndarray:
        return np.isfinite(self.values)

    def finite_part(self, domain: Domain) -> tuple[int, ...]:
        """Boundary nodes carrying a finite atom."""
        return tuple(b for b, ok in zip(domain.boundary, self.finite_mask) if ok)

    def pinned_nodes(self, domain: Domain) -> frozenset[int]:
        return frozenset(b for b, ok in zip(domain.boundary, self.finite_mask) if not ok)

    def to_json(self) -> list:
        return [float(x) if math.isfinite(x) else "inf" for x in self.values]

    @classmethod
    def from_json(cls, data: Sequence) -> "BoundaryMeasure":
        out = []
        for x in data:
            if isinstance(x, str):
                if x.strip().lower() not in ("inf", "+inf", "infinity"):
                    raise InvalidMeasure(f"unrecognised measure entry {x!r}")
                out.append(math.inf)
            else:
                out.append(float(x))
        return cls(np.array(out))


@dataclass(frozen=True, eq=False)
class BoundaryOperator:
    """Symmetric matrix acting on functions of the boundary nodes."""

    B: np.ndarray

    def __post_init__(self):
        B = np.array(self.B, dtype=float, copy=True)
        if B.ndim != 2 or B.shape[0] != B.shape[1]:
            raise AsymmetricForm("boundary operator must be square")
        if np.max(np.abs(B - B.T), initial=0.0) > sign_tol(B):
            raise AsymmetricForm("non-symmetric boundary operators are not supported")
        B.setflags(write=False)
        object.__setattr__(self, "B", B)


@dataclass(frozen=True)
class Verdict:
    """Outcome of a sign test; ``witness`` is the first violating index pair."""

    ok: bool
    witness: tuple[int, int] | None = None
    value: float | None = None

    def __bool__(self):
        return self.ok


@dataclass(frozen=True, eq=False)
class GapReport:
    G: np.ndarray
    verdict: Verdict


def _as_measure(mu) -> BoundaryMeasure:
    if isinstance(mu, BoundaryMeasure):
        return mu
    if isinstance(mu, (list, tuple)) and any(isinstance(x, str) for x in mu):
        return BoundaryMeasure.from_json(mu)
    return BoundaryMeasure(np.asarray(mu, dtype=float))


def _laplacian(domain: Domain) -> np.ndarray:
    W = domain.adjacency()
    A = -W + 0.0  # no negative zeros in serialized output
    A[np.diag_indices_from(A)] = row_sums(W)
    return A


def _pin(A: np.ndarray, nodes) -> np.ndarray:
    idx = sorted(nodes)
    A[idx, :] = 0.0
    A[:, idx] = 0.0
    return A


def neumann_form(domain: Domain) -> FormMatrix:
    """Weighted graph Laplacian: zero killing, nothing pinned."""
    return FormMatrix(domain, _laplacian(domain))


def dirichlet_form(domain: Domain) -> FormMatrix:
    """Neumann matrix with every boundary node pinned (zero extension of the interior block)."""
    if not domain.interior:
        raise EmptyInterior("Dirichlet form needs at least one interior node")
    return FormMatrix(domain, _pin(_laplacian(domain), domain.boundary), frozenset(domain.boundary))


def robin_form(domain: Domain, mu) -> FormMatrix:
    """Neumann matrix plus ``diag(mu)`` on the boundary; ``mu_i = inf`` pins node ``i``.

    Parameters
    ----------
    domain : Domain
    mu : BoundaryMeasure or sequence
        One value per boundary node, in ``domain.boundary`` order. Strings
        ``"inf"`` are accepted.
    """
    mu = _as_measure(mu)
    if len(mu) != len(domain.boundary):
        raise InvalidMeasure(f"expected {len(domain.boundary)} measure values, got {len(mu)}")
    A = _laplacian(domain)
    pinned = mu.pinned_nodes(domain)
    for b, m in zip(domain.boundary, mu.values):
        if math.isfinite(m):
            A[b, b] += m
    return FormMatrix(domain, _pin(A, pinned), pinned)


def nonlocal_robin_form(domain: Domain, B) -> FormMatrix:
    """Neumann matrix plus the boundary block ``S_ij = sigma_i * B_ij``.

    The block must come out symmetric, which holds for constant ``sigma`` or
    diagonal ``B``; anything else raises :class:`AsymmetricForm` rather than
    being silently symmetrised.
    """
    if not isinstance(B, BoundaryOperator):
        B = BoundaryOperator(np.asarray(B, dtype=float))
    nb = len(domain.boundary)
    if B.B.shape != (nb, nb):
        raise DomainMismatch(f"boundary operator must be {nb}x{nb}, got {B.B.shape}")
    S = domain.sigma[:, None] * B.B
    if np.max(np.abs(S - S.T), initial=0.0) > sign_tol(S):
        raise AsymmetricForm("sigma-weighted boundary block is not symmetric")
    A = _laplacian(domain)
    bnd = np.array(domain.boundary)
    A[np.ix_(bnd, bnd)] += S
    return FormMatrix(domain, A)


def add_jump(form: FormMatrix, i: int, j: int, J: float) -> FormMatrix:
    """Add the pure jump term ``J (u_i - u_j)(v_i - v_j)`` to a form."""
    if i == j:
        raise ValueError("jump needs two distinct nodes")
    A = np.array(form.A)
    A[i, j] -= J
    A[j, i] -= J
    A[i, i] += J
    A[j, j] += J
    return form.with_matrix(A)


def is_markovian(form: FormMatrix) -> Verdict:
    """First Beurling-Deny criterion in matrix form.

    True iff every off-diagonal entry is ``<= tol`` and every row sum is
    ``>= -tol`` with ``tol = 1e-12 max|A|``. On failure the witness is the
    first offending off-diagonal pair in row-major order, or ``(i, i)`` with
    the row sum when only a row sum is negative.
    """
    A = form.A
    tol = sign_tol(A)
    off = A.copy()
    np.fill_diagonal(off, -np.inf)
    bad = np.argwhere(off > tol)
    if len(bad):
        i, j = (int(x) for x in bad[0])
        return Verdict(False, (i, j), float(A[i, j]))
    rs = row_sums(A)
    neg = np.flatnonzero(rs < -tol)
    if len(neg):
        i = int(neg[0])
        return Verdict(False, (i, i), float(rs[i]))
    return Verdict(True)


def _check_same(a: FormMatrix, b: FormMatrix):
    if a.domain != b.domain:
        raise DomainMismatch("forms live on different domains")


def ouhabaz_gap(form_a: FormMatrix, form_b: FormMatrix) -> GapReport:
    """``G = A - B`` and whether ``G >= -tol`` entrywise.

    ``u^T G v >= 0`` for all nonnegative ``u, v`` is the same as ``G >= 0``
    entrywise. The witness is the first violating entry in row-major order.
    """
    _check_same(form_a, form_b)
    if form_a.pinned != form_b.pinned:
        raise DomainMismatch("forms have different pinned sets")
    G = form_a.A - form_b.A
    tol = sign_tol(form_a.A, form_b.A)
    bad = np.argwhere(G < -tol)
    if len(bad):
        i, j = (int(x) for x in bad[0])
        return GapReport(G, Verdict(False, (i, j), float(G[i, j])))
    return GapReport(G, Verdict(True))


def cross_form_energy(form: FormMatrix, u) -> float:
    """``a(u+, u-)`` with ``u+ = max(u, 0)`` and ``u- = max(-u, 0)``."""
    u = np.asarray(u, dtype=float)
    if u.shape != (form.n,):
        raise DomainMismatch(f"vector of length {form.n} expected, got shape {u.shape}")
    return float(np.maximum(u, 0) @ form.A @ np.maximum(-u, 0))
