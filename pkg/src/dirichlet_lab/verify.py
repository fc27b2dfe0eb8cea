"""Executable checks of the sandwich, locality and positivity statements.

Everything here is finite-dimensional evidence: entrywise semigroup order on
a time grid, exact algebraic decompositions, randomized sweeps, and
convergence of the discrete generator spectrum to the continuum one on the
unit interval.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .bdl import Locality, classify_locality
from .domain import Domain, build_graph, build_interval, build_rectangle
from .errors import DirichletLabError, InvalidMeasure
from .forms import (
    BoundaryMeasure,
    FormMatrix,
    Verdict,
    add_jump,
    dirichlet_form,
    is_markovian,
    neumann_form,
    nonlocal_robin_form,
    robin_form,
    sign_tol,
)
from .semigroup import (
    DEFAULT_TIMES,
    DOMINATION_RTOL,
    DominationReport,
    EventualPositivity,
    PositivityReport,
    Spectral,
    dominates,
    eventually_positive,
    is_positivity_preserving,
    min_entry_profile,
)

__all__ = [
    "SandwichReport",
    "check_sandwich",
    "MeasureExtraction",
    "extract_boundary_measure",
    "CharacterizationReport",
    "verify_characterization",
    "LocalityReport",
    "locality_from_domination",
    "AW45Report",
    "example_aw45",
    "GENERATORS",
    "SweepReport",
    "sweep_random",
    "robin_characteristic",
    "robin_roots",
    "eigen_convergence",
    "convergence_csv",
]

EPSILON = 0.1  # size of adversarial off-stencil jumps


# ---------------------------------------------------------------- sandwich


@dataclass(frozen=True)
class SandwichReport:
    verdict: bool
    lower: DominationReport
    upper: DominationReport

    def __bool__(self):
        return self.verdict

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "lower": self.lower.to_dict(), "upper": self.upper.to_dict()}


def check_sandwich(
    form: FormMatrix,
    times: Sequence[float] = DEFAULT_TIMES,
    rtol: float = DOMINATION_RTOL,
    refine: bool = True,
    workers: int | None = None,
) -> SandwichReport:
    """Dirichlet semigroup <= T(t) <= Neumann semigroup, entrywise on the grid."""
    dom = form.domain
    lower = dominates(dirichlet_form(dom), form, times, rtol, refine=refine, workers=workers)
    upper = dominates(form, neumann_form(dom), times, rtol, refine=refine, workers=workers)
    return SandwichReport(lower.verdict and upper.verdict, lower, upper)


# ------------------------------------------------------- measure extraction


@dataclass(frozen=True, eq=False)
class MeasureExtraction:
    """Result of reading a boundary measure off a form.

    ``verdict`` is one of ``Success``, ``NonMarkovian``, ``NonlocalCoupling``,
    ``InteriorPerturbation`` or ``NegativeMeasure``, tested in that order.
    """

    verdict: str
    witness: tuple[int, ...] | None = None
    mu: BoundaryMeasure | None = None
    beta: np.ndarray | None = None
    pinned: frozenset[int] = frozenset()

    @property
    def success(self) -> bool:
        return self.verdict == "Success"

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "witness": list(self.witness) if self.witness is not None else None,
            "mu": self.mu.to_json() if self.mu is not None else None,
            "beta": [float(b) if math.isfinite(b) else "inf" for b in self.beta] if self.beta is not None else None,
            "pinned": sorted(self.pinned),
        }


def extract_boundary_measure(form: FormMatrix) -> MeasureExtraction:
    """Recover ``mu`` from ``A = A_Neumann + diag(mu)`` or name the obstruction.

    With ``D = A - A_Neumann`` on the free nodes the checks run in this order:

    * ``NonMarkovian(i, j)``: a stencil edge with ``A_ij > 0`` (negative jump);
    * ``NonlocalCoupling(i, j)``: a nonzero entry between non-adjacent nodes;
    * ``InteriorPerturbation(node)``: ``D`` touches an interior node, a stencil
      conductance was changed, or an interior node is pinned;
    * ``NegativeMeasure(node)``: ``D_ii < 0`` at a boundary node.

    Sign conditions on the killing part are left to ``NegativeMeasure`` so
    that a form whose only defect is an off-stencil coupling is reported as
    such. On success ``mu_i = D_ii``, pinned nodes carry ``inf`` and the
    density ``beta = mu / sigma`` is returned alongside.
    """
    dom = form.domain
    A = form.A
    N = neumann_form(dom).A
    tol = sign_tol(A, N)
    pinned = form.pinned

    for i, j in dom.edges:
        if A[i, j] > tol:
            return MeasureExtraction("NonMarkovian", (int(i), int(j)), pinned=pinned)

    edges = dom.edge_set
    iu, ju = np.triu_indices(dom.n, k=1)
    for i, j in zip(iu, ju):
        if abs(A[i, j]) > tol and (int(i), int(j)) not in edges:
            return MeasureExtraction("NonlocalCoupling", (int(i), int(j)), pinned=pinned)

    free = set(int(k) for k in form.free)
    bset = set(dom.boundary)
    suspects = [p for p in pinned if p not in bset]
    for i, j in dom.edges:
        i, j = int(i), int(j)
        if i in free and j in free and abs(A[i, j] - N[i, j]) > tol:
            suspects.append(j if i in bset and j not in bset else i)
    for i in free - bset:
        if abs(A[i, i] - N[i, i]) > tol:
            suspects.append(i)
    if suspects:
        return MeasureExtraction("InteriorPerturbation", (min(suspects),), pinned=pinned)

    mu = []
    for b in dom.boundary:
        if b in pinned:
            mu.append(math.inf)
            continue
        d = A[b, b] - N[b, b]
        if d < -tol:
            return MeasureExtraction("NegativeMeasure", (b,), pinned=pinned)
        mu.append(max(d, 0.0))
    mu = np.array(mu)
    return MeasureExtraction("Success", None, BoundaryMeasure(mu), mu / dom.sigma, pinned)


@dataclass(frozen=True)
class CharacterizationReport:
    forward: SandwichReport
    reverse: MeasureExtraction
    mu_error: float
    pinned_match: bool

    @property
    def forward_ok(self) -> bool:
        return self.forward.verdict

    @property
    def reverse_ok(self) -> bool:
        return self.reverse.success and self.pinned_match and self.mu_error <= 1e-12

    @property
    def passed(self) -> bool:
        return self.forward_ok and self.reverse_ok

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "forward": self.forward.to_dict(),
            "reverse": self.reverse.to_dict(),
            "mu_error": self.mu_error,
            "pinned_match": self.pinned_match,
        }


def verify_characterization(
    domain: Domain, mu, times: Sequence[float] = DEFAULT_TIMES, rtol: float = DOMINATION_RTOL, workers=None
) -> CharacterizationReport:
    """Both directions of the Robin characterization for one planted measure.

    Forward: the Robin form is sandwiched. Reverse: extraction returns the
    planted finite values (absolute error at most ``1e-12``) and the pinned
    set ``{mu = inf}``.
    """
    mu = mu if isinstance(mu, BoundaryMeasure) else BoundaryMeasure.from_json(list(mu))
    form = robin_form(domain, mu)
    fwd = check_sandwich(form, times, rtol, workers=workers)
    ext = extract_boundary_measure(form)
    if ext.success:
        fin = mu.finite_mask
        got = ext.mu.values
        err = float(np.max(np.abs(got[fin] - mu.values[fin]), initial=0.0))
        pinned_match = ext.pinned == mu.pinned_nodes(domain) and bool(np.all(np.isinf(got[~fin])))
    else:
        err, pinned_match = math.inf, False
    return CharacterizationReport(fwd, ext, err, pinned_match)


# ------------------------------------------------------------------ locality


@dataclass(frozen=True)
class LocalityReport:
    """``verdict`` is ``Local``, ``NotApplicable`` or ``TheoremViolation``."""

    verdict: str
    failed_premise: str | None = None
    certificate: dict[str, Any] | None = None
    witness: tuple[int, int] | None = None
    J: float | None = None

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "failed_premise": self.failed_premise,
            "certificate": self.certificate,
            "witness": list(self.witness) if self.witness else None,
            "J": self.J,
        }


def locality_from_domination(
    form: FormMatrix, times: Sequence[float] = DEFAULT_TIMES, rtol: float = DOMINATION_RTOL, refine: bool = True
) -> LocalityReport:
    """Markovian and dominated by the Neumann semigroup implies stencil-local.

    When both premises hold the certificate records, over all off-stencil
    pairs, the smallest Ouhabaz gap entry (``>= 0`` from domination) and the
    largest matrix entry (``<= 0`` from Markovianity); together they force
    every off-stencil entry to vanish.
    """
    mk = is_markovian(form)
    if not mk.ok:
        return LocalityReport("NotApplicable", "markovian", witness=mk.witness, J=mk.value)
    neu = neumann_form(form.domain)
    dom_rep = dominates(form, neu, times, rtol, refine=refine)
    if not dom_rep.verdict:
        return LocalityReport("NotApplicable", "domination", witness=dom_rep.worst_entry, J=dom_rep.worst_value)
    loc = classify_locality(form)
    if not loc.local:
        return LocalityReport("TheoremViolation", witness=loc.witness, J=loc.J)
    edges = form.domain.edge_set
    iu, ju = np.triu_indices(form.n, k=1)
    off = [(i, j) for i, j in zip(iu.tolist(), ju.tolist()) if (i, j) not in edges]
    G = form.A - neu.A
    vals = [form.A[i, j] for i, j in off]
    cert = {
        "off_stencil_pairs": len(off),
        "min_gap": float(min((G[i, j] for i, j in off), default=0.0)),
        "max_entry": float(max(vals, default=0.0)),
        "tol": sign_tol(form.A),
        "form_level_gap": dom_rep.form_level.ok,
    }
    return LocalityReport("Local", certificate=cert)


# ------------------------------------------------------- nonlocal Robin case

COUNTEREXAMPLE_B = ((1.0, 1.0), (1.0, 1.0))


@dataclass(frozen=True)
class AW45Report:
    n: int
    B: tuple[tuple[float, ...], ...]
    positivity: PositivityReport
    profile: list[tuple[float, float]]
    eventual: EventualPositivity
    sandwich: SandwichReport
    locality: Locality
    extraction: MeasureExtraction
    endpoints: tuple[int, int]
    endpoint_entry: float
    first_order: float
    t_first: float

    def expectations(self) -> dict[str, bool]:
        """Observed verdicts versus those expected for ``B = [[1, 1], [1, 1]]``."""
        ends = tuple(sorted(self.endpoints))
        return {
            "positivity_false": not self.positivity.verdict,
            "profile_negative": any(m < 0 for t, m in self.profile if t > 0),
            "eventually_positive": self.eventual.verdict and self.eventual.t_star is not None,
            "sandwich_false_lower": (not self.sandwich.verdict) and not self.sandwich.lower.verdict,
            "nonlocal_at_endpoints": (not self.locality.local) and self.locality.witness == ends,
            "extraction_nonlocal": self.extraction.verdict == "NonlocalCoupling"
            and tuple(self.extraction.witness) == ends,
        }

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "B": [list(r) for r in self.B],
            "positivity": self.positivity.to_dict(),
            "profile": [{"t": t, "min_entry": m} for t, m in self.profile],
            "eventual_positivity": self.eventual.to_dict(),
            "sandwich": self.sandwich.to_dict(),
            "locality": {
                "local": self.locality.local,
                "witness": list(self.locality.witness) if self.locality.witness else None,
                "J": self.locality.J,
            },
            "extraction": self.extraction.to_dict(),
            "endpoint_entry": {"t": self.t_first, "value": self.endpoint_entry, "first_order": self.first_order},
            "expected": self.expectations(),
        }


def example_aw45(
    n: int = 33,
    times: Sequence[float] = DEFAULT_TIMES,
    B=COUNTEREXAMPLE_B,
    t_max: float = 10.0,
    domain: Domain | None = None,
) -> AW45Report:
    """Run every check on the nonlocal Robin form on ``(0, 1)`` with ``n`` nodes.

    ``domain`` replaces the interval by any domain with exactly two boundary
    nodes (e.g. the unit-weight 3-path).
    """
    dom = domain if domain is not None else build_interval(n, 1.0)
    if len(dom.boundary) != 2:
        raise InvalidMeasure("the two-point boundary operator needs exactly two boundary nodes")
    form = nonlocal_robin_form(dom, np.asarray(B, dtype=float))
    pos = is_positivity_preserving(form, times)
    profile = min_entry_profile(form, times)
    a, b = dom.boundary
    t1 = min(t for t in times if t > 0)
    S = Spectral(form).snapshot(t1)
    L01 = form.A[a, b] / dom.mass[a]
    return AW45Report(
        n=dom.n,
        B=tuple(tuple(float(x) for x in r) for r in np.asarray(B, dtype=float)),
        positivity=pos,
        profile=profile,
        eventual=eventually_positive(form, t_max),
        sandwich=check_sandwich(form, times),
        locality=classify_locality(form),
        extraction=extract_boundary_measure(form),
        endpoints=(a, b),
        endpoint_entry=float(S[a, b]),
        first_order=float(-t1 * L01),
        t_first=t1,
    )


# -------------------------------------------------------------------- sweeps

GENERATORS = ("planted-measure", "markovian-random", "off-stencil-perturbed")


@dataclass(frozen=True)
class TrialOutcome:
    trial: int
    status: str  # pass | expected-falsified | unexpected
    stage: str
    witness: tuple[int, ...] | None = None
    flags: dict[str, bool] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "trial": self.trial,
            "status": self.status,
            "stage": self.stage,
            "witness": list(self.witness) if self.witness is not None else None,
            "flags": dict(sorted(self.flags.items())),
        }


@dataclass(frozen=True)
class SweepReport:
    seed: int
    trials: int
    generator: str
    outcomes: tuple[TrialOutcome, ...]

    @property
    def passes(self) -> int:
        return sum(o.status != "unexpected" for o in self.outcomes)

    @property
    def expected_falsifications(self) -> int:
        return sum(o.status == "expected-falsified" for o in self.outcomes)

    @property
    def failures(self) -> list[TrialOutcome]:
        return [o for o in self.outcomes if o.status == "unexpected"]

    def count(self, flag: str) -> int:
        return sum(bool(o.flags.get(flag)) for o in self.outcomes)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "trials": self.trials,
            "generator": self.generator,
            "passes": self.passes,
            "expected_falsifications": self.expected_falsifications,
            "failures": [{"trial": o.trial, "stage": o.stage, "witness": list(o.witness) if o.witness else None}
                         for o in self.failures],
            "outcomes": [o.to_dict() for o in self.outcomes],
        }


def random_grid(rng: np.random.Generator, max_n: int = 65, max_side: int = 15) -> Domain:
    """Interval with 3..max_n nodes or rectangle up to max_side x max_side, random lengths."""
    if rng.random() < 0.5:
        return build_interval(int(rng.integers(3, max_n + 1)), float(rng.uniform(0.5, 2.0)))
    nx, ny = (int(v) for v in rng.integers(3, max_side + 1, size=2))
    lx, ly = (float(v) for v in rng.uniform(0.5, 2.0, size=2))
    return build_rectangle(nx, ny, lx, ly)


def random_measure(rng: np.random.Generator, nb: int, p_inf: float = 0.15, p_zero: float = 0.15) -> np.ndarray:
    r = rng.random(nb)
    vals = rng.uniform(0.0, 2.0, nb)
    vals[r < p_zero + p_inf] = 0.0
    vals[r < p_inf] = math.inf
    return vals


def _off_stencil_pairs(dom: Domain, nodes=None) -> list[tuple[int, int]]:
    keep = set(range(dom.n)) if nodes is None else set(nodes)
    edges = dom.edge_set
    return [(i, j) for i in range(dom.n) for j in range(i + 1, dom.n)
            if i in keep and j in keep and (i, j) not in edges]


def _trial_planted(k, rng, dom, times, rtol):
    mu = random_measure(rng, len(dom.boundary))
    rep = verify_characterization(dom, mu, times, rtol)
    flags = {"forward": rep.forward_ok, "reverse": rep.reverse_ok}
    if not rep.forward_ok:
        bad = rep.forward.lower if not rep.forward.lower.verdict else rep.forward.upper
        return TrialOutcome(k, "unexpected", "sandwich", bad.worst_entry, flags)
    if not rep.reverse_ok:
        return TrialOutcome(k, "unexpected", "extraction", rep.reverse.witness, flags)
    return TrialOutcome(k, "pass", "characterization", None, flags)


def _trial_markovian(k, rng, dom, times, rtol):
    # the random stencil jumps become the conductances of the reference domain
    jumps = 1.0 - rng.random(len(dom.edges))
    gdom = build_graph(dom.edges.tolist(), dom.boundary, n=dom.n, conductance=jumps, mass=dom.mass, sigma=dom.sigma)
    form = robin_form(gdom, rng.uniform(0.0, 2.0, len(gdom.boundary)))
    jumped = False
    pairs = _off_stencil_pairs(gdom)
    if pairs and rng.random() < 0.5:
        i, j = pairs[int(rng.integers(len(pairs)))]
        form = add_jump(form, i, j, float(rng.uniform(EPSILON, 1.0)))
        jumped = True
    pos = is_positivity_preserving(form, times, rtol)
    loc = locality_from_domination(form, times, rtol)
    sandwich = check_sandwich(form, times, rtol)
    success = extract_boundary_measure(form).success
    flags = {
        "jump_added": jumped,
        "dominated": loc.verdict != "NotApplicable",
        "theorem_violation": loc.verdict == "TheoremViolation",
        "sandwich": sandwich.verdict,
        "extraction": success,
    }
    if not pos.consistent:
        return TrialOutcome(k, "unexpected", "positivity-equivalence", pos.witness, flags)
    if loc.verdict == "TheoremViolation":
        return TrialOutcome(k, "unexpected", "locality", loc.witness, flags)
    if sandwich.verdict != success:
        return TrialOutcome(k, "unexpected", "characterization-equivalence", None, flags)
    return TrialOutcome(k, "pass", "locality" if flags["dominated"] else "premises", None, flags)


def _trial_perturbed(k, rng, dom, times, rtol):
    pairs = _off_stencil_pairs(dom)
    i, j = pairs[int(rng.integers(len(pairs)))]
    mu = random_measure(rng, len(dom.boundary))
    for node in (i, j):
        if node in dom.boundary and not math.isfinite(mu[dom.boundary_position(node)]):
            mu[dom.boundary_position(node)] = float(rng.uniform(0.0, 2.0))
    sign = 1.0 if rng.random() < 0.5 else -1.0
    form = add_jump(robin_form(dom, mu), i, j, sign * EPSILON)
    mk = is_markovian(form)
    upper = dominates(form, neumann_form(dom), times, rtol, refine=True)
    flags = {"markovian": mk.ok, "dominated": upper.verdict, "positive_jump": sign > 0}
    if mk.ok and upper.verdict:
        return TrialOutcome(k, "unexpected", "premises-survived", (i, j), flags)
    return TrialOutcome(k, "expected-falsified", "markovian" if not mk.ok else "domination", (i, j), flags)


_TRIALS = {
    "planted-measure": _trial_planted,
    "markovian-random": _trial_markovian,
    "off-stencil-perturbed": _trial_perturbed,
}


def sweep_random(
    trials: int,
    seed: int,
    generator: str = "planted-measure",
    domain: Domain | None = None,
    times: Sequence[float] = DEFAULT_TIMES,
    rtol: float = DOMINATION_RTOL,
    workers: int | None = None,
) -> SweepReport:
    """Randomized exercise of the domination, characterization and locality checks.

    Trial ``k`` draws everything from ``SeedSequence([seed, k])``, so the
    report depends only on the arguments; ``workers`` only changes wall time.
    ``domain=None`` draws a fresh random 1D or 2D grid per trial.
    """
    if int(trials) < 1:
        raise DirichletLabError(f"trials must be >= 1, got {trials}")
    if generator not in _TRIALS:
        raise DirichletLabError(f"unknown generator {generator!r}; choose from {GENERATORS}")
    fn = _TRIALS[generator]
    times = tuple(times)

    def run(k):
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), k]))
        dom = domain if domain is not None else random_grid(rng)
        return fn(k, rng, dom, times, rtol)

    ks = range(int(trials))
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            outcomes = list(ex.map(run, ks))
    else:
        outcomes = [run(k) for k in ks]
    outcomes.sort(key=lambda o: o.trial)
    return SweepReport(int(seed), int(trials), generator, tuple(outcomes))


# ------------------------------------------------------ continuum anchoring


def robin_characteristic(kappa: float, beta: float) -> float:
    """Zero exactly at ``sqrt(lambda)`` for Robin eigenvalues of ``-u''`` on ``(0, 1)``."""
    return (kappa * kappa - beta * beta) * math.sin(kappa) - 2.0 * beta * kappa * math.cos(kappa)


def _bisect(f, a: float, b: float, xtol: float = 1e-12) -> float:
    fa = f(a)
    while b - a > xtol:
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0.0:
            return m
        if (fm < 0) == (fa < 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def robin_roots(beta: float, count: int, step: float = math.pi / 100) -> list[float]:
    """First ``count`` positive roots of :func:`robin_characteristic`.

    Sign changes are bracketed on a uniform scan of spacing ``step`` starting
    at ``step`` (which skips the trivial root at 0), then bisected to 1e-12.
    """
    f = lambda x: robin_characteristic(x, beta)  # noqa: E731
    roots: list[float] = []
    a, fa = step, f(step)
    while len(roots) < count:
        b = a + step
        fb = f(b)
        if fa == 0.0:
            roots.append(a)
        elif fa * fb < 0:
            roots.append(_bisect(f, a, b))
        a, fa = b, fb
    return roots


def continuum_eigenvalue(kind: str, k: int, beta: float = 1.0) -> float:
    if kind == "neumann":
        return (k * math.pi) ** 2
    if kind == "dirichlet":
        return (k * math.pi) ** 2
    return robin_roots(beta, k)[-1] ** 2


def _discrete_eigenvalue(kind: str, n: int, k: int, beta: float) -> float:
    dom = build_interval(n, 1.0)
    if kind == "neumann":
        form, idx = neumann_form(dom), k
    elif kind == "dirichlet":
        form, idx = dirichlet_form(dom), k - 1
    else:
        form, idx = robin_form(dom, beta * dom.sigma), k - 1
    lam = Spectral(form).eigenvalues
    if idx >= len(lam):
        raise DirichletLabError(f"grid with n={n} has only {len(lam)} eigenvalues")
    return float(lam[idx])


def eigen_convergence(kind: str, sizes: Sequence[int], k: int = 1, beta: float = 1.0) -> list[dict[str, float]]:
    """Discrete versus continuum eigenvalue on ``(0, 1)`` over a sequence of grids.

    ``k`` counts from 0 for Neumann (``lambda_0 = 0``) and from 1 for
    Dirichlet and Robin. ``observed_order`` is ``log(e_prev/e)/log(h_prev/h)``
    and is NaN on the first row or when an error vanishes.
    """
    if kind not in ("neumann", "dirichlet", "robin"):
        raise DirichletLabError(f"unknown boundary kind {kind!r}")
    sizes = [int(s) for s in sizes]
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise DirichletLabError("grid sizes must be strictly increasing")
    if k < (0 if kind == "neumann" else 1):
        raise DirichletLabError(f"k={k} is out of range for {kind}")
    if kind == "robin" and not beta > 0:
        raise DirichletLabError("Robin coefficient must be positive")
    ref = continuum_eigenvalue(kind, k, beta)
    rows: list[dict[str, float]] = []
    for n in sizes:
        h = 1.0 / (n - 1)
        lam = _discrete_eigenvalue(kind, n, k, beta)
        err = abs(lam - ref)
        order = math.nan
        if rows and rows[-1]["abs_error"] > 0 and err > 0:
            order = math.log(rows[-1]["abs_error"] / err) / math.log(rows[-1]["h"] / h)
        rows.append({"n": n, "h": h, "lambda_k": lam, "reference": ref, "abs_error": err, "observed_order": order})
    return rows


def convergence_csv(rows: Sequence[dict[str, float]]) -> str:
    cols = ("n", "h", "lambda_k", "reference", "abs_error", "observed_order")
    out = [",".join(cols)]
    out += [",".join(repr(r[c]) for c in cols) for r in rows]
    return "\n".join(out) + "\n"
