"""Discrete Beurling-Deny-LeJan decomposition.

On a finite set every symmetric form splits uniquely as

    a(u, v) = sum_x k_x u_x v_x + sum_{x<y} J_xy (u_x - u_y)(v_x - v_y)

with ``J_xy = -A_xy`` and ``k_x`` the row sum of ``A``. The strongly local
part vanishes on a finite set, so the discretised gradient energy shows up as
jumps along the mesh edges. Those are reported as ``stencil`` jumps; jumps
between non-adjacent nodes are ``nonlocal``. A form is called stencil-local
when its nonlocal jumps are all zero up to ``1e-12 max|A|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .domain import Domain
from .errors import AsymmetricForm, DomainMismatch
from .forms import FormMatrix, sign_tol, row_sums

__all__ = ["BdlParts", "Locality", "bdl_decompose", "bdl_reconstruct", "classify_locality"]


@dataclass(frozen=True, eq=False)
class BdlParts:
    stencil: np.ndarray  # aligned with domain.edges
    nonlocal_: dict[tuple[int, int], float]
    killing: np.ndarray
    markovian: bool = field(default=True)

    def to_dict(self, domain: Domain) -> dict[str, Any]:
        return {
            "stencil": [
                {"i": int(i), "j": int(j), "J": float(v)} for (i, j), v in zip(domain.edges, self.stencil)
            ],
            "nonlocal": [{"i": i, "j": j, "J": float(v)} for (i, j), v in sorted(self.nonlocal_.items())],
            "killing": [float(x) for x in self.killing],
            "markovian": bool(self.markovian),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any], domain: Domain) -> "BdlParts":
        by_edge = {(min(e["i"], e["j"]), max(e["i"], e["j"])): float(e["J"]) for e in d["stencil"]}
        stencil = np.array([by_edge.get((int(i), int(j)), 0.0) for i, j in domain.edges])
        nl = {(min(e["i"], e["j"]), max(e["i"], e["j"])): float(e["J"]) for e in d["nonlocal"]}
        return cls(stencil, nl, np.asarray(d["killing"], dtype=float), bool(d.get("markovian", True)))


@dataclass(frozen=True)
class Locality:
    local: bool
    witness: tuple[int, int] | None = None
    J: float | None = None

    def __bool__(self):
        return self.local


def bdl_decompose(form: FormMatrix) -> BdlParts:
    """Split a symmetric form into stencil jumps, nonlocal jumps and killing.

    Exact and closed form: ``J_ij = -A_ij`` for ``i != j`` and ``k_i`` is the
    ``i``-th row sum. Nonzero off-stencil jumps are stored without
    thresholding so that :func:`bdl_reconstruct` inverts this map.
    """
    A = np.asarray(form.A)
    if np.max(np.abs(A - A.T), initial=0.0) > sign_tol(A):
        raise AsymmetricForm("BDL decomposition needs a symmetric form")
    dom = form.domain
    stencil = np.array([-A[i, j] for i, j in dom.edges]) + 0.0
    edges = dom.edge_set
    nonlocal_ = {}
    iu, ju = np.triu_indices(dom.n, k=1)
    for i, j in zip(iu[A[iu, ju] != 0], ju[A[iu, ju] != 0]):
        key = (int(i), int(j))
        if key not in edges:
            nonlocal_[key] = float(-A[i, j])
    killing = row_sums(A)
    tol = sign_tol(A)
    markovian = bool(
        np.all(stencil >= -tol) and all(v >= -tol for v in nonlocal_.values()) and np.all(killing >= -tol)
    )
    return BdlParts(stencil, nonlocal_, killing, markovian)


def bdl_reconstruct(parts: BdlParts, domain: Domain, pinned=frozenset()) -> FormMatrix:
    """Inverse of :func:`bdl_decompose`: ``A_ij = -J_ij`` and ``A_ii = k_i + sum_j J_ij``."""
    n = domain.n
    if len(parts.killing) != n or len(parts.stencil) != len(domain.edges):
        raise DomainMismatch("BDL parts are not indexed like the domain")
    A = np.zeros((n, n))
    for (i, j), v in zip(domain.edges, parts.stencil):
        A[i, j] = A[j, i] = -v
    for (i, j), v in parts.nonlocal_.items():
        if not (0 <= i < n and 0 <= j < n) or i == j:
            raise DomainMismatch(f"nonlocal pair ({i}, {j}) out of range")
        A[i, j] = A[j, i] = -v
    for i in range(n):
        off = -np.delete(A[i], i)
        A[i, i] = math.fsum([parts.killing[i], *off])
    return FormMatrix(domain, A, frozenset(pinned))


def classify_locality(form: FormMatrix) -> Locality:
    """Stencil-local iff no off-stencil jump exceeds ``1e-12 max|A|`` in magnitude.

    Otherwise the largest-magnitude off-stencil pair is returned as witness.
    """
    parts = bdl_decompose(form)
    tol = sign_tol(form.A)
    big = {k: v for k, v in parts.nonlocal_.items() if abs(v) > tol}
    if not big:
        return Locality(True)
    key = max(sorted(big), key=lambda k: abs(big[k]))
    return Locality(False, key, big[key])
