"""Matrix-free state-vector simulation of a linearly interpolated anneal.

The register evolves under ``H(t) = (1 - t/tau) H_B + (t/tau) H_P`` with the
diagonal problem Hamiltonian ``H_P`` and the transverse-field mixer
``H_B = -sum_i sigma_x^i``. States are 1-D ``complex128`` arrays of length
``2^q`` indexed as in :mod:`aqclust.ising` (qubit 1 is the most significant
bit). Neither Hamiltonian is ever assembled as a matrix: ``H_P`` acts as an
elementwise product with its diagonal and ``H_B`` as a sum of single-bit
flips.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from aqclust.ising import IsingModel, energies

log = logging.getLogger(__name__)

MAX_QUBITS = 22
STEPS_PER_UNIT_TIME = 40
DRIFT_BUDGET = 1e-6
DEFAULT_SAMPLES = 301


class NormDriftError(RuntimeError):
    """The integrator lost unitarity beyond the drift budget."""

    def __init__(self, steps: int, drift: float, steps_needed: int | None):
        self.steps = steps
        self.drift = drift
        self.steps_needed = steps_needed
        hint = (
            f"; about {steps_needed} steps keep it within budget"
            if steps_needed
            else "; no stable step count found while doubling"
        )
        super().__init__(f"norm drift {drift:.3e} exceeds {DRIFT_BUDGET:g} with {steps} steps{hint}")


@dataclass(frozen=True)
class AnnealSpec:
    """Everything the integrator needs.

    ``hp_diag`` holds the (possibly rescaled) problem energies; the raw
    energy of basis state ``z`` is ``hp_diag[z] * energy_scale``.
    """

    q: int
    hp_diag: np.ndarray
    tau: float
    steps: int
    sample_count: int = DEFAULT_SAMPLES
    mixer_strength: float = 1.0
    energy_scale: float = 1.0
    normalized: bool = False

    def __post_init__(self) -> None:
        if self.hp_diag.shape != (1 << self.q,):
            raise ValueError(f"hp_diag must have 2^{self.q} entries")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if self.sample_count < 2:
            raise ValueError(f"sample_count must be >= 2, got {self.sample_count}")
        if self.sample_count > self.steps + 1:
            raise ValueError(
                f"sample_count {self.sample_count} exceeds the {self.steps + 1} integrator grid points"
            )

    @property
    def dim(self) -> int:
        return 1 << self.q


@dataclass(frozen=True)
class EvolutionTrace:
    times: np.ndarray
    probabilities: np.ndarray  # sample_count x 2^q
    norm_drift: np.ndarray
    final_state: np.ndarray
    steps: int

    @property
    def q(self) -> int:
        return int(self.probabilities.shape[1]).bit_length() - 1

    @property
    def final_probabilities(self) -> np.ndarray:
        return self.probabilities[-1]


def problem_diagonal(model: IsingModel) -> np.ndarray:
    """Energy of every basis state, built one qubit at a time.

    Appending qubit ``k`` doubles the table: each prefix energy gains
    ``-J_kk - h_k s_k - 2 s_k sum_{j<k} J_kj s_j``. The coupling sum over the
    prefix is itself built by doubling, so the whole table costs ``O(2^q)``
    per qubit level, ``O(q 2^q)`` at worst.
    """
    J, h = model.couplings, model.fields
    q = model.num_spins
    E = np.array([-model.offset])
    for k in range(q):
        F = np.zeros(1)
        for j in range(k):
            F = np.stack([F + J[k, j], F - J[k, j]], axis=-1).ravel()
        up = E - J[k, k] - h[k] - 2.0 * F
        down = E - J[k, k] + h[k] + 2.0 * F
        E = np.stack([up, down], axis=-1).ravel()
    return E


def build_spec(
    model: IsingModel,
    tau: float = 75.0,
    steps: int | None = None,
    sample_count: int = DEFAULT_SAMPLES,
    normalize_energy: bool = True,
    max_qubits: int = MAX_QUBITS,
    seed: int = 0,
) -> AnnealSpec:
    """Tabulate the problem diagonal and package the schedule.

    ``steps`` defaults to 40 per unit of time. With ``normalize_energy`` the
    diagonal is divided by its largest magnitude so that schedule lengths
    mean the same thing regardless of data scale. The table is spot-checked
    against :func:`aqclust.ising.energy` at 100 random basis states.
    """
    q = model.num_spins
    if q > max_qubits:
        need = 16 * (1 << q) * 6
        raise ValueError(
            f"{q} qubits exceeds the cap of {max_qubits}; "
            f"the integrator would need about {need / 2**30:.1f} GiB of state buffers"
        )
    if steps is None:
        steps = max(1, int(round(STEPS_PER_UNIT_TIME * tau)))
    raw = problem_diagonal(model)

    rng = np.random.default_rng(seed)
    probe = rng.integers(0, 1 << q, size=100)
    ref = energies(model, probe)
    scale_ref = max(np.abs(ref).max(), 1.0)
    if np.abs(raw[probe] - ref).max() > 1e-9 * scale_ref * max(q, 1) ** 2:
        raise AssertionError("problem diagonal disagrees with direct energy evaluation")

    scale = 1.0
    if normalize_energy:
        peak = float(np.abs(raw).max())
        if peak > 0:
            scale = peak
    diag = raw / scale
    diag.flags.writeable = False
    return AnnealSpec(
        q=q,
        hp_diag=diag,
        tau=float(tau),
        steps=int(steps),
        sample_count=int(sample_count),
        energy_scale=scale,
        normalized=normalize_energy,
    )


def initial_state(q: int) -> np.ndarray:
    """Uniform superposition, the ground state of ``-sum_i sigma_x^i``."""
    if q < 1:
        raise ValueError("need at least one qubit")
    dim = 1 << q
    return np.full(dim, dim**-0.5, dtype=complex)


def apply_mixer(psi: np.ndarray, q: int, out: np.ndarray | None = None) -> np.ndarray:
    """``(H_B psi)[z] = -sum_i psi[z ^ bit_i]``."""
    if out is None:
        out = np.zeros_like(psi)
    else:
        out[:] = 0
    for i in range(q):
        src = psi.reshape(1 << i, 2, -1)
        dst = out.reshape(1 << i, 2, -1)
        dst -= src[:, ::-1, :]
    return out


def apply_hamiltonian(spec: AnnealSpec, t: float, psi: np.ndarray) -> np.ndarray:
    """``H(t) psi`` in ``O(q 2^q)`` without forming any matrix."""
    if not 0.0 <= t <= spec.tau:
        raise ValueError(f"t = {t} outside the schedule [0, {spec.tau}]")
    s = t / spec.tau
    out = apply_mixer(psi, spec.q)
    out *= (1.0 - s) * spec.mixer_strength
    out += s * spec.hp_diag * psi
    return out


def probabilities(psi: np.ndarray) -> np.ndarray:
    return psi.real**2 + psi.imag**2


def _shift_phase(spec: AnnealSpec, t: float) -> float:
    """Integral of the level shift from 0 to t."""
    half = t * t / (2 * spec.tau)
    return -spec.q * spec.mixer_strength * (t - half) + float(spec.hp_diag.min()) * half


def _integrate(spec: AnnealSpec, psi0: np.ndarray, steps: int, sample_at: np.ndarray | None):
    """Classical RK4 on ``d psi/dt = -i (H(t) - e(t)) psi``.

    ``e(t)`` interpolates the ground energies of the two endpoint
    Hamiltonians. Subtracting it only rotates the global phase, which is
    restored analytically at the end, but it keeps the phase velocity of the
    populated low-lying states small and with it the RK4 norm error.
    """
    dt = spec.tau / steps
    q = spec.q
    diag = spec.hp_diag
    mix = spec.mixer_strength
    emin = float(diag.min())
    psi = np.array(psi0, dtype=complex)
    tmp = np.empty_like(psi)
    acc = np.empty_like(psi)
    mbuf = np.empty_like(psi)

    def rhs(t: float, x: np.ndarray, out: np.ndarray) -> np.ndarray:
        s = t / spec.tau
        apply_mixer(x, q, mbuf)
        shift = (1.0 - s) * (-q * mix) + s * emin
        np.multiply(x, s * diag - shift, out=out)
        out += ((1.0 - s) * mix) * mbuf
        out *= -1j
        return out

    rows = []
    drift = []
    k = np.empty_like(psi)
    next_sample = 0
    if sample_at is not None and sample_at[0] == 0:
        rows.append(probabilities(psi))
        drift.append(abs(float(np.vdot(psi, psi).real) - 1.0))
        next_sample = 1
    max_drift = 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(steps):
            t = n * dt
            rhs(t, psi, k)
            acc[:] = k
            np.multiply(k, dt / 2, out=tmp)
            tmp += psi
            rhs(t + dt / 2, tmp, k)
            acc += 2 * k
            np.multiply(k, dt / 2, out=tmp)
            tmp += psi
            rhs(t + dt / 2, tmp, k)
            acc += 2 * k
            np.multiply(k, dt, out=tmp)
            tmp += psi
            rhs(t + dt, tmp, k)
            acc += k
            acc *= dt / 6
            psi += acc
            if sample_at is not None and next_sample < len(sample_at) and sample_at[next_sample] == n + 1:
                p = probabilities(psi)
                d = abs(float(p.sum()) - 1.0)
                if not np.isfinite(d):
                    d = np.inf
                rows.append(p)
                drift.append(d)
                max_drift = max(max_drift, d)
                next_sample += 1
    if sample_at is None:
        max_drift = abs(float(np.vdot(psi, psi).real) - 1.0)
        if not np.isfinite(max_drift):
            max_drift = np.inf
    psi *= np.exp(-1j * _shift_phase(spec, spec.tau))
    return psi, rows, drift, max_drift


def _sample_steps(steps: int, count: int) -> np.ndarray:
    idx = np.rint(np.linspace(0, steps, count)).astype(np.int64)
    if np.any(np.diff(idx) <= 0):
        raise ValueError(f"{count} samples cannot be snapped to distinct points of {steps} steps")
    return idx


def evolve(spec: AnnealSpec, psi0: np.ndarray | None = None, estimate_on_failure: bool = True) -> EvolutionTrace:
    """Integrate the anneal over ``[0, tau]`` with fixed-step RK4.

    Probabilities are recorded at ``sample_count`` evenly spaced steps. The
    state is never renormalized: if ``| ||psi||^2 - 1 |`` exceeds 1e-6 at
    any sample a :class:`NormDriftError` is raised, carrying a step count
    found by repeatedly doubling ``steps`` until the final drift fits.
    """
    if psi0 is None:
        psi0 = initial_state(spec.q)
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (spec.dim,):
        raise ValueError(f"state has {psi0.shape} amplitudes, expected {spec.dim}")
    if abs(float(np.vdot(psi0, psi0).real) - 1.0) > DRIFT_BUDGET:
        raise ValueError("initial state is not normalized")

    sample_at = _sample_steps(spec.steps, spec.sample_count)
    psi, rows, drift, max_drift = _integrate(spec, psi0, spec.steps, sample_at)
    if max_drift > DRIFT_BUDGET:
        needed = None
        if estimate_on_failure:
            trial = spec.steps
            for _ in range(8):
                trial *= 2
                _, _, _, d = _integrate(spec, psi0, trial, None)
                if d <= DRIFT_BUDGET / 2:
                    needed = trial
                    break
        raise NormDriftError(spec.steps, max_drift, needed)
    log.debug("evolved q=%d over tau=%g in %d steps, max drift %.2e", spec.q, spec.tau, spec.steps, max_drift)
    return EvolutionTrace(
        times=sample_at * (spec.tau / spec.steps),
        probabilities=np.array(rows),
        norm_drift=np.array(drift),
        final_state=psi,
        steps=spec.steps,
    )


def top_states(trace: EvolutionTrace, k: int = 2) -> list[tuple[int, float]]:
    """Final-sample probabilities, highest first, ties by ascending index."""
    if k < 1:
        raise ValueError("k must be >= 1")
    p = trace.final_probabilities
    order = np.lexsort((np.arange(len(p)), -p))[:k]
    return [(int(z), float(p[z])) for z in order]


def write_trace_csv(trace: EvolutionTrace, path: str | Path) -> None:
    """Header ``t,state_0,...,state_{2^q-1},norm_drift``, one row per sample."""
    dim = trace.probabilities.shape[1]
    header = ",".join(["t", *(f"state_{z}" for z in range(dim)), "norm_drift"])
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for t, row, d in zip(trace.times, trace.probabilities, trace.norm_drift):
            fh.write(",".join([repr(float(t)), *(f"{v:.17g}" for v in row), f"{d:.17g}"]) + "\n")


def read_trace_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    arr = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return arr[:, 0], arr[:, 1:-1], arr[:, -1]
