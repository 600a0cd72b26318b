"""End-to-end runs: data -> Gram matrix -> Ising model -> anneal -> clustering."""

from __future__ import annotations

import json
import platform
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from aqclust import clustering as cl
from aqclust import ising as im
from aqclust import qsim

SCHEMA_VERSION = 1
ORACLE_MAX_SPINS = 20


class ConfigError(ValueError):
    pass


class DegenerateClusteringError(cl.DegenerateAssignmentError):
    """The measured state puts every point in one cluster."""

    def __init__(self, message: str, diagnostics: dict[str, Any]):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class BlobSpec:
    n1: int = 2
    n2: int = 6
    centers: tuple[tuple[float, ...], tuple[float, ...]] = ((-3.0, 0.0), (1.0, 0.0))
    spread: float = 0.3
    seed: int = 7

    def generate(self) -> cl.DataSet:
        return cl.gen_blobs(self.n1, self.n2, self.centers, self.spread, self.seed)


@dataclass(frozen=True)
class RunConfig:
    """One pipeline run. ``fixed_index`` is 0-based."""

    input: str | None = None
    header: bool = False
    blobs: BlobSpec = field(default_factory=BlobSpec)
    model: str = "full"
    fixed_index: int | None = None
    kernel: str = "linear"
    tau: float = 75.0
    steps: int | None = None
    sample_count: int = qsim.DEFAULT_SAMPLES
    normalize_energy: bool = True
    seed: int = 0
    out: str | None = None
    trace: str | None = None
    oracle: bool = True

    def __post_init__(self) -> None:
        if self.model not in ("full", "reduced"):
            raise ConfigError(f"model must be 'full' or 'reduced', got {self.model!r}")
        if self.model == "full" and self.fixed_index is not None:
            raise ConfigError("the full model takes no fixed index")
        if self.model == "reduced" and self.fixed_index is None:
            raise ConfigError("the reduced model needs a fixed index")
        try:
            im.Kernel.parse(self.kernel)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not self.tau > 0:
            raise ConfigError("tau must be positive")
        if self.steps is not None and self.steps < 1:
            raise ConfigError("steps must be >= 1")
        if self.sample_count < 2:
            raise ConfigError("sample_count must be >= 2")

    def load_data(self) -> cl.DataSet:
        data = cl.read_csv(self.input, header=self.header) if self.input else self.blobs.generate()
        return cl.center(data)

    def echo(self) -> dict[str, Any]:
        d = asdict(self)
        d["blobs"] = None if self.input else asdict(self.blobs)
        if self.fixed_index is not None:
            d["fixed_index"] = self.fixed_index + 1  # 1-based, as on the command line
        return d


@dataclass
class RunResult:
    assignment: cl.ClusterAssignment
    point_ids: tuple[str, ...]
    top_states: list[tuple[int, float]]
    num_qubits: int
    model: im.IsingModel
    spec: qsim.AnnealSpec
    trace: qsim.EvolutionTrace
    stats: cl.ScatterStats
    lloyd: cl.LloydResult
    lloyd_stats: cl.ScatterStats
    anova_residual: float
    measured_energy: float
    ground: im.GroundStateSet | None
    config: RunConfig

    @property
    def oracle_agreement(self) -> bool | None:
        if self.ground is None:
            return None
        return self.top_states[0][0] in self.ground.states

    def to_dict(self) -> dict[str, Any]:
        q = self.num_qubits
        top = [
            {"index": z, "ket": im.ket(z, q), "probability": p} for z, p in self.top_states
        ]
        oracle = None
        if self.ground is not None:
            oracle = {
                "min_energy": self.ground.min_energy,
                "states": [
                    {"index": z, "ket": im.ket(z, q), "final_probability": float(self.trace.final_probabilities[z])}
                    for z in self.ground.states
                ],
                "ground_probability_start": float(self.trace.probabilities[0][list(self.ground.states)].sum()),
                "ground_probability_end": float(self.trace.final_probabilities[list(self.ground.states)].sum()),
                "agreement": self.oracle_agreement,
            }
        result: dict[str, Any] = {
            "schema": SCHEMA_VERSION,
            "model": self.config.model,
            "num_qubits": q,
            "point_ids": list(self.point_ids),
            "assignment": self.assignment.labels.tolist(),
            "cluster_sizes": list(self.assignment.sizes),
            "measured_energy": self.measured_energy,
            "top_states": top,
            "oracle": oracle,
            "scatter": _stats_dict(self.stats),
            "anova_residual": self.anova_residual,
            "lloyd": {
                "assignment": self.lloyd.assignment.labels.tolist(),
                "s_w": self.lloyd_stats.s_w,
                "iterations": self.lloyd.n_iter,
                "converged": self.lloyd.converged,
                "same_partition": self.lloyd.assignment.same_partition(self.assignment),
            },
            "evolution": {
                "tau": self.spec.tau,
                "steps": self.spec.steps,
                "sample_count": self.spec.sample_count,
                "normalize_energy": self.spec.normalized,
                "energy_scale": self.spec.energy_scale,
                "max_norm_drift": float(self.trace.norm_drift.max()),
            },
            "config": self.config.echo(),
            "versions": _versions(),
        }
        if self.config.model == "full":
            z = self.top_states[0][0]
            partner = (1 << q) - 1 - z
            result["complementary_pair"] = {
                "kets": sorted([im.ket(z, q), im.ket(partner, q)]),
                "top2_complementary": len(self.top_states) > 1 and self.top_states[1][0] == partner,
            }
        else:
            result["fixed_index"] = self.model.fixed_index + 1
        return result

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _stats_dict(st: cl.ScatterStats) -> dict[str, Any]:
    return {
        "s_w": st.s_w,
        "s_b": st.s_b,
        "s_t": st.s_t,
        "sizes": list(st.sizes),
        "centroids": st.centroids.T.tolist(),
    }


def _versions() -> dict[str, str]:
    from aqclust import __version__

    return {"aqclust": __version__, "numpy": np.__version__, "python": platform.python_version()}


def build_model(data: cl.DataSet, config: RunConfig) -> im.IsingModel:
    G = im.gram(data, config.kernel)
    if config.model == "full":
        return im.ising_full(G)
    if not 0 <= config.fixed_index < data.n:
        raise ConfigError(f"fixed index must be a point of 1..{data.n}")
    return im.ising_reduced(G, config.fixed_index)


def decode_assignment(model: im.IsingModel, z: int) -> cl.ClusterAssignment:
    """Clustering induced by basis state ``z``, with point 1 (full) or the
    fixed point (reduced) in cluster 1."""
    s = im.decode(z, model.num_spins)
    if model.fixed_index is None:
        if s[0] < 0:
            s = -s
        return im.assignment_from_spins(s)
    return im.assignment_from_spins(s, fixed=(model.fixed_index, 1))


def run(config: RunConfig) -> RunResult:
    """Execute the whole pipeline and write the requested artifacts."""
    data = config.load_data()
    model = build_model(data, config)
    try:
        spec = qsim.build_spec(
            model,
            tau=config.tau,
            steps=config.steps,
            sample_count=config.sample_count,
            normalize_energy=config.normalize_energy,
            seed=config.seed,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    trace = qsim.evolve(spec)
    top = qsim.top_states(trace, 4 if spec.dim >= 4 else spec.dim)
    z = top[0][0]
    try:
        assignment = decode_assignment(model, z)
    except cl.DegenerateAssignmentError as exc:
        raise DegenerateClusteringError(
            str(exc),
            {"ket": im.ket(z, model.num_spins), "probability": top[0][1], "top_states": top},
        ) from None

    ground = None
    if config.oracle and model.num_spins <= ORACLE_MAX_SPINS:
        ground = im.brute_force(model)

    lloyd = cl.lloyd_kmeans(data, init=config.seed)
    result = RunResult(
        assignment=assignment,
        point_ids=data.point_ids,
        top_states=top,
        num_qubits=model.num_spins,
        model=model,
        spec=spec,
        trace=trace,
        stats=cl.scatter_stats(data, assignment),
        lloyd=lloyd,
        lloyd_stats=cl.scatter_stats(data, lloyd.assignment),
        anova_residual=cl.anova_residual(data, assignment),
        measured_energy=im.energy(model, im.decode(z, model.num_spins)),
        ground=ground,
        config=config,
    )
    if config.out:
        Path(config.out).write_text(result.to_json(), encoding="utf-8")
    if config.trace:
        qsim.write_trace_csv(trace, config.trace)
    return result


def oracle_report(config: RunConfig) -> dict[str, Any]:
    data = config.load_data()
    model = build_model(data, config)
    ground = im.brute_force(model)
    q = model.num_spins
    states = []
    for z in ground.states:
        entry: dict[str, Any] = {"index": z, "ket": im.ket(z, q)}
        try:
            entry["assignment"] = decode_assignment(model, z).labels.tolist()
        except cl.DegenerateAssignmentError:
            entry["assignment"] = None
        states.append(entry)
    return {
        "schema": SCHEMA_VERSION,
        "model": config.model,
        "num_spins": q,
        "fixed_index": None if model.fixed_index is None else model.fixed_index + 1,
        "min_energy": ground.min_energy,
        "num_ground_states": len(ground.states),
        "states": states,
    }


def random_assignment(n: int, rng: np.random.Generator) -> cl.ClusterAssignment:
    """Uniform random labels, with one point flipped if a cluster came out empty."""
    labels = rng.integers(1, 3, size=n)
    if (labels == labels[0]).all():
        labels[rng.integers(n)] = 3 - labels[0]
    return cl.ClusterAssignment(labels)


def verify_anova(data: cl.DataSet | None, trials: int, seed: int = 0) -> dict[str, Any]:
    """Sweep random assignments and report the worst relative ANOVA residual.

    With ``data`` given, all trials use it; otherwise each trial draws a fresh
    data set with ``n <= 64`` points in ``m <= 8`` dimensions.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_abs = 0.0
    for _ in range(trials):
        d = data
        if d is None:
            n = int(rng.integers(2, 65))
            m = int(rng.integers(1, 9))
            scale = 10.0 ** rng.uniform(-3, 3)
            shift = rng.normal(scale=10 * scale, size=(m, 1))
            d = cl.DataSet(shift + scale * rng.standard_normal((m, n)))
        a = random_assignment(d.n, rng)
        st = cl.scatter_stats(d, a)
        r = abs(st.s_t - st.s_w - st.s_b / (2 * d.n))
        worst_abs = max(worst_abs, r)
        worst = max(worst, r / max(st.s_t, 1.0))
    return {"trials": trials, "max_abs_residual": worst_abs, "max_rel_residual": worst, "passed": worst <= 1e-9}
