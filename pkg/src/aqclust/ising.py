"""Gram matrices, Ising models for two-means clustering and the exhaustive oracle.

Energy convention used throughout::

    E(s) = -sum_ij J_ij s_i s_j - sum_j h_j s_j - c,   s in {-1, +1}^q

Basis index ``z`` of a q-qubit register reads qubit 1 as the most
significant bit; bit value 0 is spin +1 and bit value 1 is spin -1, so the
ket ``|00111111>`` is the spin vector ``(+, +, -, -, -, -, -, -)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from aqclust.clustering import ClusterAssignment, DataSet, DegenerateAssignmentError

BRUTE_FORCE_MAX_SPINS = 26
TIE_RTOL = 1e-9

_CHUNK_BITS = 16


@dataclass(frozen=True)
class Kernel:
    name: str = "linear"
    gamma: float = 1.0
    degree: int = 2
    c0: float = 1.0

    def __post_init__(self) -> None:
        if self.name not in ("linear", "rbf", "poly"):
            raise ValueError(f"unknown kernel {self.name!r}")
        if self.name == "rbf" and not self.gamma > 0:
            raise ValueError(f"rbf gamma must be positive, got {self.gamma}")
        if self.name == "poly":
            if int(self.degree) != self.degree or self.degree < 1:
                raise ValueError(f"polynomial degree must be an integer >= 1, got {self.degree}")
            if not np.isfinite(self.c0):
                raise ValueError("polynomial offset must be finite")

    @classmethod
    def parse(cls, text: str) -> "Kernel":
        """Parse ``linear``, ``rbf:GAMMA`` or ``poly:DEGREE:C0``."""
        parts = text.strip().split(":")
        try:
            if parts[0] == "linear" and len(parts) == 1:
                return cls("linear")
            if parts[0] == "rbf" and len(parts) == 2:
                return cls("rbf", gamma=float(parts[1]))
            if parts[0] == "poly" and len(parts) == 3:
                return cls("poly", degree=int(parts[1]), c0=float(parts[2]))
        except ValueError as exc:
            raise ValueError(f"bad kernel spec {text!r}: {exc}") from None
        raise ValueError(f"bad kernel spec {text!r}; use linear, rbf:GAMMA or poly:D:C0")

    def __str__(self) -> str:
        if self.name == "rbf":
            return f"rbf:{self.gamma!r}"
        if self.name == "poly":
            return f"poly:{self.degree}:{self.c0!r}"
        return "linear"


@dataclass(frozen=True)
class GramMatrix:
    q: np.ndarray
    kernel: Kernel = Kernel()

    @property
    def n(self) -> int:
        return self.q.shape[0]


def gram(data: DataSet, kernel: Kernel | str = "linear") -> GramMatrix:
    """Kernel matrix ``Q_ij = k(x_i, x_j)``, symmetric by construction."""
    if isinstance(kernel, str):
        kernel = Kernel.parse(kernel)
    X = data.values
    G = X.T @ X
    if kernel.name == "linear":
        K = G
    elif kernel.name == "rbf":
        sq = np.diag(G)
        d2 = np.maximum(sq[:, None] + sq[None, :] - 2 * G, 0.0)
        K = np.exp(-kernel.gamma * d2)
        np.fill_diagonal(K, 1.0)
    else:
        K = (G + kernel.c0) ** kernel.degree
    upper = np.triu(K)
    Q = upper + np.triu(K, 1).T
    Q.flags.writeable = False
    return GramMatrix(Q, kernel)


@dataclass(frozen=True)
class IsingModel:
    """Ising energy over ``num_spins`` spins.

    ``free_indices`` maps spin positions to point indices of the data set.
    For a reduced model ``fixed_index`` is the point pinned to spin +1.
    """

    couplings: np.ndarray
    fields: np.ndarray
    offset: float = 0.0
    free_indices: tuple[int, ...] = ()
    fixed_index: int | None = None

    def __post_init__(self) -> None:
        J = np.array(self.couplings, dtype=float)
        h = np.array(self.fields, dtype=float)
        if J.ndim != 2 or J.shape[0] != J.shape[1] or h.shape != (J.shape[0],):
            raise ValueError(f"inconsistent shapes J{J.shape}, h{h.shape}")
        if np.abs(J - J.T).max(initial=0.0) > 1e-12 * max(np.abs(J).max(initial=0.0), 1.0):
            raise ValueError("couplings must be symmetric")
        J.flags.writeable = False
        h.flags.writeable = False
        object.__setattr__(self, "couplings", J)
        object.__setattr__(self, "fields", h)
        object.__setattr__(self, "offset", float(self.offset))
        free = tuple(self.free_indices) or tuple(range(J.shape[0]))
        if len(free) != J.shape[0]:
            raise ValueError("free_indices length must equal num_spins")
        object.__setattr__(self, "free_indices", free)

    @property
    def num_spins(self) -> int:
        return self.couplings.shape[0]

    @property
    def num_points(self) -> int:
        return self.num_spins + (self.fixed_index is not None)

    def embed(self, s: Sequence[int] | np.ndarray) -> np.ndarray:
        """Spin vector over all points, with the fixed point (if any) at +1."""
        s = np.asarray(s, dtype=np.int64)
        full = np.ones(self.num_points, dtype=np.int64)
        full[list(self.free_indices)] = s
        return full


def ising_full(q: GramMatrix) -> IsingModel:
    """``J = Q``, no fields, no offset; ground states maximize ``s^T Q s``."""
    n = q.n
    return IsingModel(q.q, np.zeros(n), 0.0)


def ising_reduced(q: GramMatrix, fixed_index: int | None = None) -> IsingModel:
    """Pin point ``fixed_index`` (0-based, default the last point) to +1.

    Energies of the reduced model equal the full-model energies of the
    embedded spin vectors exactly, offset included.
    """
    n = q.n
    if n < 2:
        raise ValueError("need at least two points")
    f = n - 1 if fixed_index is None else int(fixed_index)
    if not 0 <= f < n:
        raise ValueError(f"fixed_index {fixed_index} out of range 0..{n - 1}")
    free = [i for i in range(n) if i != f]
    Q = q.q
    return IsingModel(
        Q[np.ix_(free, free)],
        2.0 * Q[f, free],
        float(Q[f, f]),
        free_indices=tuple(free),
        fixed_index=f,
    )


def energy(model: IsingModel, s: Sequence[int] | np.ndarray) -> float:
    s = np.asarray(s, dtype=float)
    if s.shape != (model.num_spins,):
        raise ValueError(f"spin vector of length {s.shape} for {model.num_spins} spins")
    J, h = model.couplings, model.fields
    return float(-(s @ J @ s) - h @ s - model.offset)


def encode(s: Sequence[int] | np.ndarray) -> int:
    """Basis index of a spin vector (first spin is the most significant bit)."""
    z = 0
    for v in np.asarray(s):
        if v not in (1, -1):
            raise ValueError(f"spins must be +1 or -1, got {v}")
        z = (z << 1) | (v == -1)
    return int(z)


def decode(index: int, q: int) -> np.ndarray:
    index = int(index)
    if not 0 <= index < (1 << q):
        raise ValueError(f"index {index} out of range for {q} qubits")
    bits = (index >> np.arange(q - 1, -1, -1)) & 1
    return (1 - 2 * bits).astype(np.int64)


def ket(index: int, q: int) -> str:
    return format(int(index), f"0{q}b")


def spin_matrix(indices: np.ndarray, q: int) -> np.ndarray:
    """Rows are the spin vectors of the given basis indices."""
    bits = (np.asarray(indices)[:, None] >> np.arange(q - 1, -1, -1)) & 1
    return (1 - 2 * bits).astype(float)


def energies(model: IsingModel, indices: np.ndarray) -> np.ndarray:
    """Direct ``O(q^2)``-per-state energy evaluation for a batch of indices."""
    S = spin_matrix(indices, model.num_spins)
    return -np.einsum("zi,zi->z", S @ model.couplings, S) - S @ model.fields - model.offset


@dataclass(frozen=True)
class GroundStateSet:
    min_energy: float
    states: tuple[int, ...]
    num_spins: int

    def spins(self) -> list[np.ndarray]:
        return [decode(z, self.num_spins) for z in self.states]


def brute_force(model: IsingModel) -> GroundStateSet:
    """Evaluate every basis state and return the minimum and all its minimizers.

    States within ``1e-9 * max(|E_min|, 1)`` of the minimum count as ties.
    Refuses models with more than 26 spins.
    """
    q = model.num_spins
    if q > BRUTE_FORCE_MAX_SPINS:
        raise ValueError(
            f"refusing exhaustive search over 2^{q} states (limit {BRUTE_FORCE_MAX_SPINS} spins)"
        )
    total = 1 << q
    chunk = 1 << min(q, _CHUNK_BITS)
    best = np.inf
    cand_idx: list[np.ndarray] = []
    cand_e: list[np.ndarray] = []
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        e = energies(model, idx)
        best = min(best, float(e.min()))
        keep = e <= best + TIE_RTOL * max(abs(best), 1.0)
        cand_idx.append(idx[keep])
        cand_e.append(e[keep])
    idx = np.concatenate(cand_idx)
    e = np.concatenate(cand_e)
    tol = TIE_RTOL * max(abs(best), 1.0)
    states = tuple(int(z) for z in np.sort(idx[e <= best + tol]))
    return GroundStateSet(best, states, q)


def assignment_from_spins(
    s: Sequence[int] | np.ndarray, fixed: tuple[int, int] | None = None
) -> ClusterAssignment:
    """Cluster 1 where the spin is +1, cluster 2 where it is -1.

    ``fixed`` is ``(index, +1)``: the pinned point is inserted at ``index``
    (0-based, in the full point order) with label 1.
    """
    s = np.asarray(s, dtype=np.int64)
    if fixed is not None:
        idx, spin = fixed
        if spin != 1:
            raise ValueError("the fixed point is pinned to spin +1")
        if not 0 <= idx <= len(s):
            raise ValueError(f"fixed index {idx} out of range")
        s = np.insert(s, idx, 1)
    if np.all(s == s[0]):
        raise DegenerateAssignmentError(
            f"all {len(s)} spins equal {int(s[0]):+d}; one cluster would be empty"
        )
    return ClusterAssignment.from_spins(s)


def dump_model(model: IsingModel, path: str | Path | None = None) -> str:
    """Plain-text dump: ``ising v1``, q, J rows, h, c."""
    fmt = lambda row: " ".join(repr(float(v)) for v in row)  # noqa: E731
    lines = ["ising v1", str(model.num_spins)]
    lines += [fmt(row) for row in model.couplings]
    lines.append(fmt(model.fields))
    lines.append(repr(model.offset))
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def load_model(text: str) -> IsingModel:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != "ising v1":
        raise ValueError("not an 'ising v1' dump")
    q = int(lines[1])
    if len(lines) != q + 4:
        raise ValueError(f"expected {q + 4} lines, got {len(lines)}")
    row = lambda ln: [float(v) for v in ln.split()]  # noqa: E731
    J = np.array([row(ln) for ln in lines[2 : 2 + q]]).reshape(q, q)
    h = np.array(row(lines[2 + q])) if q else np.zeros(0)
    return IsingModel(J, h, float(lines[3 + q]))
