"""Semigroups ``T(t) = exp(-t M^{-1} A)`` of symmetric forms and their order properties.

The generator ``L = M^{-1} A`` is similar to the symmetric matrix
``M^{-1/2} A M^{-1/2}``. One eigendecomposition of the latter gives every
snapshot as ``M^{-1/2} V exp(-t lam) V^T M^{1/2}``. Pinned nodes are removed
before the decomposition and their rows and columns of each snapshot are
zero (zero extension), so semigroups of forms with different pinned sets are
compared on one space.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainMismatch, InvalidTime
from .forms import FormMatrix, Verdict, ouhabaz_gap, sign_tol

__all__ = [
    "DEFAULT_TIMES",
    "SemigroupSnapshot",
    "Spectral",
    "spectral",
    "expm",
    "generator",
    "PositivityReport",
    "is_positivity_preserving",
    "DominationReport",
    "dominates",
    "form_level_domination",
    "EventualPositivity",
    "eventually_positive",
    "min_entry_profile",
    "profile_csv",
    "short_times",
]

log = logging.getLogger(__name__)

DEFAULT_TIMES = (0.0, 1e-3, 1e-2, 1e-1, 1.0, 10.0)
DOMINATION_RTOL = 1e-10


def _check_time(t) -> float:
    t = float(t)
    if not t >= 0 or not math.isfinite(t):
        raise InvalidTime(f"time must be finite and >= 0, got {t}")
    return t


@dataclass(frozen=True, eq=False)
class SemigroupSnapshot:
    t: float
    S: np.ndarray


def _components(A: np.ndarray) -> list[np.ndarray]:
    """Connected components of the off-diagonal sparsity graph of ``A``."""
    n = A.shape[0]
    adj = (A != 0) & ~np.eye(n, dtype=bool)
    label = np.full(n, -1)
    comps = []
    for s in range(n):
        if label[s] >= 0:
            continue
        label[s] = len(comps)
        stack, members = [s], [s]
        while stack:
            for v in np.flatnonzero(adj[stack.pop()] & (label < 0)):
                label[v] = len(comps)
                stack.append(int(v))
                members.append(int(v))
        comps.append(np.sort(np.array(members)))
    return comps


def _eigh_deflated(A: np.ndarray, Ahat: np.ndarray, sqrt_m: np.ndarray):
    """``eigh(Ahat)`` with exact null vectors of zero-killing components split off first.

    On a component whose row sums of ``A`` vanish to rounding, ``sqrt(m)``
    restricted to it is an exact null vector of ``Ahat``. A plain ``eigh``
    only finds it to ``eps * ||Ahat||``, which breaks mass conservation at
    large times on fine grids.
    """
    n = A.shape[0]
    if n == 0:
        return np.zeros(0), np.zeros((0, 0))
    eps = np.finfo(float).eps
    rs = np.array([math.fsum(r) for r in A])
    null = []
    for c in _components(A):
        if np.all(np.abs(rs[c]) <= 8 * eps * np.max(np.abs(A[c]))):
            q = np.zeros(n)
            q[c] = sqrt_m[c] / np.linalg.norm(sqrt_m[c])
            null.append(q)
    if not null:
        return np.linalg.eigh(Ahat)
    k = len(null)
    Q, _ = np.linalg.qr(np.column_stack(null), mode="complete")
    Q[:, :k] = np.column_stack(null)  # qr may flip signs
    rest = Q[:, k:]
    B = rest.T @ Ahat @ rest
    mu, W = np.linalg.eigh(0.5 * (B + B.T))
    lam = np.concatenate([np.zeros(k), mu])
    V = np.column_stack([Q[:, :k], rest @ W])
    order = np.argsort(lam, kind="stable")
    return lam[order], V[:, order]


class Spectral:
    """Eigen-data of the mass-symmetrised generator on the free nodes."""

    def __init__(self, form: FormMatrix):
        self.form = form
        self.n = form.n
        self.free = form.free
        m = form.domain.mass[self.free]
        self.sqrt_m = np.sqrt(m)
        Ahat = form.effective() / np.outer(self.sqrt_m, self.sqrt_m)
        Ahat = 0.5 * (Ahat + Ahat.T)
        self.eigenvalues, self.eigenvectors = _eigh_deflated(form.effective(), Ahat, self.sqrt_m)
        # left and right factors of the similarity transform
        self._left = self.eigenvectors / self.sqrt_m[:, None]
        self._right = (self.eigenvectors * self.sqrt_m[:, None]).T

    def free_block(self, t: float) -> np.ndarray:
        if t == 0:
            return np.eye(len(self.free))  # exact, not V V^T
        return (self._left * np.exp(-t * self.eigenvalues)) @ self._right

    def snapshot(self, t: float) -> np.ndarray:
        t = _check_time(t)
        S = np.zeros((self.n, self.n))
        S[np.ix_(self.free, self.free)] = self.free_block(t)
        return S

    @property
    def scale(self) -> float:
        """Largest diagonal entry of the generator; ``1/scale`` is its shortest time scale."""
        A = self.form.effective()
        if A.size == 0:
            return 0.0
        return float(np.max(np.abs(np.diag(A)) / self.sqrt_m**2))


def spectral(form: FormMatrix) -> Spectral:
    return Spectral(form)


def expm(form: FormMatrix, t: float) -> SemigroupSnapshot:
    """``exp(-t M^{-1} A)`` zero-extended over pinned nodes."""
    t = _check_time(t)
    return SemigroupSnapshot(t, Spectral(form).snapshot(t))


def generator(form: FormMatrix) -> np.ndarray:
    """``M^{-1} A`` on the free nodes, zero elsewhere."""
    L = np.zeros((form.n, form.n))
    f = form.free
    L[np.ix_(f, f)] = form.effective() / form.domain.mass[f][:, None]
    return L


def _grid(times: Iterable[float], positive: bool = False) -> list[float]:
    ts = sorted({_check_time(t) for t in times})
    if positive:
        ts = [t for t in ts if t > 0]
    if not ts:
        raise InvalidTime("time grid is empty")
    return ts


def short_times(*forms: FormMatrix, decades: int = 3) -> list[float]:
    """Times ``10^-k / rho`` (k = 1..decades) resolving the fastest generator scale ``rho``."""
    rho = max(Spectral(f).scale for f in forms)
    if rho <= 0:
        return []
    return [10.0 ** (-k) / rho for k in range(1, decades + 1)]


def _map(fn, items, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


@dataclass(frozen=True)
class PositivityReport:
    algebraic: Verdict
    numerical: bool
    min_entry: float
    t_min: float
    witness: tuple[int, int]
    times: tuple[float, ...]

    @property
    def consistent(self) -> bool:
        return self.algebraic.ok == self.numerical

    @property
    def verdict(self) -> bool:
        return self.algebraic.ok and self.numerical

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "algebraic": self.algebraic.ok,
            "algebraic_witness": list(self.algebraic.witness) if self.algebraic.witness else None,
            "algebraic_value": self.algebraic.value,
            "numerical": self.numerical,
            "min_entry": self.min_entry,
            "t_min": self.t_min,
            "witness": list(self.algebraic.witness or self.witness),
            "numerical_witness": list(self.witness),
            "times": list(self.times),
            "consistent": self.consistent,
        }


def metzler_verdict(form: FormMatrix) -> Verdict:
    """Off-diagonal sign test on ``A``: ``exp(-tL) >= 0`` for all ``t`` iff ``A_ij <= 0`` (``i != j``)."""
    A = form.A
    off = A.copy()
    np.fill_diagonal(off, -np.inf)
    bad = np.argwhere(off > sign_tol(A))
    if len(bad):
        i, j = (int(x) for x in bad[0])
        return Verdict(False, (i, j), float(A[i, j]))
    return Verdict(True)


def is_positivity_preserving(
    form: FormMatrix, times: Sequence[float] = DEFAULT_TIMES, rtol: float = DOMINATION_RTOL, workers: int | None = None
) -> PositivityReport:
    """Algebraic (Metzler) and sampled verdicts on positivity of the semigroup.

    The sampled verdict holds when ``min S(t) >= -rtol * max|S(t)|`` at every
    positive grid time. A disagreement between the two is logged as an
    internal error and exposed through :attr:`PositivityReport.consistent`.
    """
    ts = _grid(times, positive=True)
    sp = Spectral(form)

    def one(t):
        S = sp.snapshot(t)
        k = int(np.argmin(S))
        return S.flat[k], np.max(np.abs(S)), divmod(k, form.n)

    res = _map(one, ts, workers)
    numerical = all(m >= -rtol * s for m, s, _ in res)
    k = min(range(len(ts)), key=lambda q: res[q][0])
    alg = metzler_verdict(form)
    rep = PositivityReport(alg, numerical, float(res[k][0]), ts[k], tuple(int(x) for x in res[k][2]), tuple(ts))
    if not rep.consistent:
        log.error("positivity verdicts disagree: algebraic=%s numerical=%s", alg.ok, numerical)
    return rep


@dataclass(frozen=True)
class DominationReport:
    verdict: bool
    times: tuple[float, ...]
    worst_t: float
    worst_entry: tuple[int, int]
    worst_value: float
    form_level: Verdict
    positivity: bool

    def __bool__(self):
        return self.verdict

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "times": list(self.times),
            "worst": {"t": self.worst_t, "i": self.worst_entry[0], "j": self.worst_entry[1], "value": self.worst_value},
            "form_level": self.form_level.ok,
            "positivity": self.positivity,
        }


def form_level_domination(lower: FormMatrix, upper: FormMatrix) -> Verdict:
    """Matrix version of the Ouhabaz criterion for ``exp(-tL_lower) <= exp(-tL_upper)``.

    The lower semigroup's space must be an ideal of the upper one (pinned
    set of ``lower`` contains that of ``upper``) and ``A_lower - A_upper``
    must be entrywise nonnegative on the free nodes of ``lower``. Note the
    order reversal: the larger form generates the smaller semigroup.
    """
    if lower.domain != upper.domain:
        raise DomainMismatch("forms live on different domains")
    if lower.pinned == upper.pinned:
        return ouhabaz_gap(lower, upper).verdict
    if not upper.pinned <= lower.pinned:
        extra = min(upper.pinned - lower.pinned)
        return Verdict(False, (extra, extra), None)
    f = lower.free
    G = (lower.A - upper.A)[np.ix_(f, f)]
    bad = np.argwhere(G < -sign_tol(lower.effective(), upper.effective()))
    if len(bad):
        a, b = bad[0]
        return Verdict(False, (int(f[a]), int(f[b])), float(G[a, b]))
    return Verdict(True)


def dominates(
    lower: FormMatrix,
    upper: FormMatrix,
    times: Sequence[float] = DEFAULT_TIMES,
    rtol: float = DOMINATION_RTOL,
    refine: bool = False,
    workers: int | None = None,
) -> DominationReport:
    """Check ``exp(-tL_lower) <= exp(-tL_upper)`` entrywise on a time grid.

    Parameters
    ----------
    lower, upper : FormMatrix
        Forms on the same domain. Pinned nodes compare through zero extension.
    times : sequence of float
        Grid of nonnegative times.
    rtol : float
        Per-time absolute slack is ``rtol`` times the largest entry of the
        two snapshots.
    refine : bool
        Also check the generator-scaled short times of :func:`short_times`.
        Grid-only evidence can miss small off-stencil jumps on fine meshes,
        whose violations only show for ``t`` below the fastest time scale.
    workers : int, optional
        Evaluate time points on a thread pool; results do not depend on it.

    Returns
    -------
    DominationReport
        ``worst_*`` locate the largest ``S_lower - S_upper`` seen, whether or
        not it exceeds the tolerance.
    """
    if lower.domain != upper.domain:
        raise DomainMismatch("forms live on different domains")
    ts = list(times)
    if refine:
        ts += short_times(lower, upper)
    ts = _grid(ts)
    lo, up = Spectral(lower), Spectral(upper)

    def one(t):
        Sl, Su = lo.snapshot(t), up.snapshot(t)
        tol = rtol * max(np.max(np.abs(Sl)), np.max(np.abs(Su)))
        D = Sl - Su
        k = int(np.argmax(D))
        return D.flat[k], D.flat[k] - tol, divmod(k, lower.n)

    res = _map(one, ts, workers)
    q = max(range(len(ts)), key=lambda r: (res[r][1], -r))
    verdict = all(excess <= 0 for _, excess, _ in res)
    return DominationReport(
        verdict=verdict,
        times=tuple(ts),
        worst_t=ts[q],
        worst_entry=tuple(int(x) for x in res[q][2]),
        worst_value=float(res[q][0]),
        form_level=form_level_domination(lower, upper),
        positivity=metzler_verdict(lower).ok,
    )


@dataclass(frozen=True)
class EventualPositivity:
    verdict: bool
    t_star: float | None
    certificate: bool
    ground_eigenvalue: float
    spectral_gap: float
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "t_star": self.t_star,
            "perron_certificate": self.certificate,
            "ground_eigenvalue": self.ground_eigenvalue,
            "spectral_gap": self.spectral_gap,
            "reason": self.reason,
        }


def _perron(sp: Spectral, tol: float = 1e-10) -> tuple[bool, float, float, str]:
    lam, V = sp.eigenvalues, sp.eigenvectors
    if len(lam) == 0:
        return False, math.nan, math.nan, "no free nodes"
    gap = float(lam[1] - lam[0]) if len(lam) > 1 else math.inf
    scale = max(1.0, float(np.max(np.abs(lam))))
    if gap <= tol * scale:
        return False, float(lam[0]), gap, "ground eigenvalue is not simple"
    v = V[:, 0] * np.sign(np.sum(V[:, 0]))
    v = v / np.max(np.abs(v))
    if np.min(v) <= tol:
        return False, float(lam[0]), gap, "ground eigenvector is not strictly positive"
    return True, float(lam[0]), gap, ""


def eventually_positive(form: FormMatrix, t_max: float = 10.0, tol: float = 1e-8, scan: int = 161) -> EventualPositivity:
    """Decide eventual positivity and locate the onset time ``t*``.

    The verdict is the Perron certificate: the ground eigenvalue of the
    symmetrised generator is simple and its eigenvector is strictly positive
    (tolerance ``1e-10``), checked on the free nodes. ``t*`` is found by a
    geometric scan of ``(0, t_max]`` followed by bisection to width ``tol``
    on the sign of the smallest entry; it is the time after which every
    scanned snapshot is strictly positive. A positivity preserving form that
    passes the certificate is irreducible, hence positive for all ``t > 0``,
    and gets ``t* = 0``.
    """
    t_max = float(t_max)
    if not t_max > 0:
        raise InvalidTime(f"t_max must be positive, got {t_max}")
    sp = Spectral(form)
    ok, lam0, gap, reason = _perron(sp)
    if not ok:
        return EventualPositivity(False, None, False, lam0, gap, reason)
    if metzler_verdict(form).ok:
        return EventualPositivity(True, 0.0, True, lam0, gap)

    def positive(t):
        S = sp.free_block(t)
        return np.min(S) > 1e-13 * np.max(np.abs(S))

    if not positive(t_max):
        return EventualPositivity(False, None, True, lam0, gap, f"not positive by t_max={t_max}")
    ts = t_max * np.logspace(-8, 0, scan)
    flags = [positive(t) for t in ts]
    last_bad = max((k for k, f in enumerate(flags) if not f), default=None)
    if last_bad is None:
        return EventualPositivity(True, float(ts[0]), True, lam0, gap, "positive from the first scanned time")
    a, b = float(ts[last_bad]), float(ts[last_bad + 1])
    while b - a > tol:
        mid = 0.5 * (a + b)
        if positive(mid):
            b = mid
        else:
            a = mid
    return EventualPositivity(True, b, True, lam0, gap)


def min_entry_profile(form: FormMatrix, times: Sequence[float] = DEFAULT_TIMES, workers: int | None = None) -> list[tuple[float, float]]:
    """``(t, min_ij S(t)_ij)`` for each grid time, in the order given."""
    ts = [_check_time(t) for t in times]
    if not ts:
        raise InvalidTime("time grid is empty")
    sp = Spectral(form)
    mins = _map(lambda t: float(np.min(sp.snapshot(t))), ts, workers)
    return list(zip(ts, mins))


def profile_csv(rows: Sequence[tuple[float, float]]) -> str:
    lines = ["t,min_entry"]
    lines += [f"{t!r},{m!r}" for t, m in rows]
    return "\n".join(lines) + "\n"
