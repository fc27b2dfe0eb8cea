"""Finite-dimensional Dirichlet forms with Dirichlet, Neumann, Robin and nonlocal Robin boundaries.

The subpackages build forms on grids and graphs (:mod:`.domain`,
:mod:`.forms`), split them into jump and killing parts (:mod:`.bdl`),
exponentiate their generators (:mod:`.semigroup`) and check sandwich,
locality and positivity statements on them (:mod:`.verify`).
"""

from .bdl import BdlParts, bdl_decompose, bdl_reconstruct, classify_locality
from .domain import Domain, build_graph, build_interval, build_rectangle
from .errors import (
    AsymmetricForm,
    ConfigError,
    DirichletLabError,
    DomainMismatch,
    EmptyInterior,
    InvalidDomain,
    InvalidMeasure,
    InvalidTime,
)
from .forms import (
    BoundaryMeasure,
    BoundaryOperator,
    FormMatrix,
    add_jump,
    cross_form_energy,
    dirichlet_form,
    is_markovian,
    neumann_form,
    nonlocal_robin_form,
    ouhabaz_gap,
    robin_form,
)
from .semigroup import (
    DEFAULT_TIMES,
    dominates,
    eventually_positive,
    expm,
    is_positivity_preserving,
    min_entry_profile,
)
from .verify import (
    check_sandwich,
    eigen_convergence,
    example_aw45,
    extract_boundary_measure,
    locality_from_domination,
    sweep_random,
    verify_characterization,
)

__version__ = "0.1.0"
