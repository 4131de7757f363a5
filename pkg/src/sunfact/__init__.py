"""Ground-state factorization of n-level lattice models with U/V/W pair couplings."""

from .errors import (
    CapExceededError,
    ConfigError,
    EmptySectorError,
    FactorizationError,
    InvariantError,
    SunfactError,
)
from .model import (
    BasisConfig,
    CouplingGraph,
    ModelSpec,
    SectorLabel,
    config_roundtrip,
    load_model,
    make_graph,
    sector_of,
)
from .hamiltonian import HamiltonianMatrix, alternating_gauge, apply, build_full, build_sector
from .factorization import (
    FactorizationSolution,
    build_M,
    check_gs_conditions,
    degeneracy_count,
    factorization_v0,
    parity_flip_family,
    product_state,
    solve_onsite_energies_n3,
    solve_uniform,
    verify_eigenstate,
    xyz_factorizing_field,
)
from .meanfield import MeanFieldSolution, mf_energy, mf_solve, mf_transition_points
from .spectra import (
    SpectrumResult,
    SweepResult,
    eigensolve,
    excitation_energies,
    find_crossings,
    sector_spectrum,
)
from .entanglement import (
    DensityMatrix,
    entropy,
    mutual_information,
    negativity,
    occupations,
    reduce,
)
from .projection import (
    ProjectedState,
    number_projected_family,
    parity_project,
    perturbative_splitting,
    projected_occupations_n3,
    symmetric_state,
)

__version__ = "0.1.0"
