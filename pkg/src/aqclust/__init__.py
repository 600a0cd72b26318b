"""Binary clustering via Ising models and simulated adiabatic evolution."""

from aqclust.clustering import (
    ClusterAssignment,
    DataSet,
    DegenerateAssignmentError,
    LloydResult,
    ScatterStats,
    anova_residual,
    center,
    centroids,
    gen_blobs,
    lloyd_kmeans,
    read_csv,
    scatter_stats,
    write_csv,
)
from aqclust.ising import (
    GramMatrix,
    GroundStateSet,
    IsingModel,
    assignment_from_spins,
    brute_force,
    decode,
    encode,
    energy,
    gram,
    ising_full,
    ising_reduced,
)
from aqclust.qsim import (
    AnnealSpec,
    EvolutionTrace,
    NormDriftError,
    apply_hamiltonian,
    build_spec,
    evolve,
    initial_state,
    probabilities,
    top_states,
)

__version__ = "0.1.0"

__all__ = [
    "AnnealSpec",
    "ClusterAssignment",
    "DataSet",
    "DegenerateAssignmentError",
    "EvolutionTrace",
    "GramMatrix",
    "GroundStateSet",
    "IsingModel",
    "LloydResult",
    "NormDriftError",
    "ScatterStats",
    "anova_residual",
    "apply_hamiltonian",
    "assignment_from_spins",
    "brute_force",
    "build_spec",
    "center",
    "centroids",
    "decode",
    "encode",
    "energy",
    "evolve",
    "gen_blobs",
    "gram",
    "initial_state",
    "ising_full",
    "ising_reduced",
    "lloyd_kmeans",
    "probabilities",
    "read_csv",
    "scatter_stats",
    "top_states",
    "write_csv",
]
