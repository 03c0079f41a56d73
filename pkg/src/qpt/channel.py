"""Quantum channels in Kraus, Choi, and process-matrix form.

Conventions
-----------
The canonical representation is the Choi state of the channel with *unit
trace*: rho_E = (I ⊗ E)|Phi><Phi| where |Phi> = (1/sqrt d) sum_i |ii>.
Subsystem order is (input copy, output).  With this normalization the
channel acts on a state as

    E(rho) = d * Tr_in[(rho^T ⊗ I) rho_E],

i.e. the partial-trace readout carries an explicit factor d.

The process matrix chi is defined by E(rho) = sum_mn chi_mn A_m rho A_n^†
over an operator basis {A_m} with Tr(A_m^† A_n) = d delta_mn and A_0 = I.
The default basis is the Weyl-Heisenberg set {X^j Z^k} indexed m = j*d + k.
Because the columns of the Choi<->chi change of basis are orthonormal,
chi is unitarily equivalent to the Choi matrix and inherits unit trace;
for a diagonal chi in this unitary basis, trace preservation is exactly
"the diagonal sums to one".
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import mub as _mub
from .errors import (
    DimensionMismatch,
    EmptySubset,
    FidelityOutOfRange,
    IndexOutOfRange,
    NotPositive,
    WeightsNotNormalized,
)
from .linalg import hermitize, max_abs, partial_trace


@dataclass(frozen=True)
class OperatorBasis:
    """A complete set of d^2 operators, Hilbert-Schmidt orthogonal with norm d."""

    dim: int
    operators: np.ndarray  # (d*d, d, d); operators[0] is the identity
    name: str = "weyl"

    def __post_init__(self):
        self.operators.setflags(write=False)


@dataclass(frozen=True)
class KrausSet:
    dim: int
    operators: np.ndarray  # (k, d, d)


@dataclass(frozen=True)
class ChoiMatrix:
    """Unit-trace Choi state, subsystem order (input copy, output)."""

    dim: int
    matrix: np.ndarray  # (d^2, d^2)


@dataclass(frozen=True)
class ProcessMatrix:
    dim: int
    basis: OperatorBasis
    matrix: np.ndarray  # (d^2, d^2)


@lru_cache(maxsize=None)
def weyl_basis(d):
    """The Weyl-Heisenberg unitary operator basis {X^j Z^k}, m = j*d + k.

    X|n> = |n+1 mod d>, Z|n> = w^n |n> with w = exp(2 pi i / d); A_0 = I.
    """
    if d < 2:
        raise DimensionMismatch(f"dimension must be >= 2, got {d}")
    omega = np.exp(2j * np.pi / d)
    n = np.arange(d)
    ops = np.empty((d * d, d, d), dtype=complex)
    for j in range(d):
        xj = np.roll(np.eye(d, dtype=complex), j, axis=0)
        for k in range(d):
            ops[j * d + k] = xj @ np.diag(omega ** ((k * n) % d))
    return OperatorBasis(dim=d, operators=ops, name="weyl")


def maximally_entangled_ket(d):
    """|Phi> = (1/sqrt d) sum_i |ii> as a flat vector of length d^2."""
    return np.eye(d, dtype=complex).reshape(d * d) / np.sqrt(d)


class Channel:
    """A CPTP map held canonically as its unit-trace Choi matrix.

    Kraus and process-matrix views are computed on first access and cached.
    Instances are treated as immutable.
    """

    def __init__(self, choi, label=""):
        if isinstance(choi, np.ndarray):
            n = choi.shape[0]
            d = int(round(np.sqrt(n)))
            if choi.shape != (n, n) or d * d != n:
                raise DimensionMismatch(f"Choi matrix shape {choi.shape} is not (d^2, d^2)")
            choi = ChoiMatrix(dim=d, matrix=choi)
        self.choi = ChoiMatrix(dim=choi.dim, matrix=hermitize(choi.matrix))
        self.choi.matrix.setflags(write=False)
        self.label = label
        self._kraus = None
        self._chi = None

    @property
    def dim(self):
        return self.choi.dim

    @property
    def kraus(self):
        if self._kraus is None:
            self._kraus = choi_to_kraus(self.choi)
        return self._kraus

    def chi(self, basis=None):
        """Process matrix in the given operator basis (default Weyl)."""
        if basis is None or basis is weyl_basis(self.dim):
            if self._chi is None:
                self._chi = choi_to_chi(self.choi, weyl_basis(self.dim))
            return self._chi
        return choi_to_chi(self.choi, basis)

    def __repr__(self):
        return f"Channel(dim={self.dim}, label={self.label!r})"


# ---------------------------------------------------------------------------
# representation conversions


def kraus_to_choi(kraus):
    """Choi matrix of sum_s K_s rho K_s^† (unit-trace normalization)."""
    d = kraus.dim
    vecs = kraus.operators.transpose(0, 2, 1).reshape(-1, d * d)
    choi = vecs.T @ vecs.conj() / d
    return ChoiMatrix(dim=d, matrix=hermitize(choi))


def choi_to_kraus(choi, tol=1e-12):
    """Kraus operators from the eigendecomposition of the Choi matrix.

    Eigenvalues below tol are dropped; each operator's global phase is
    fixed by making its largest-magnitude entry real positive.  Raises
    NotPositive if the Choi matrix has an eigenvalue below -1e-8.
    """
    d = choi.dim
    vals, vecs = np.linalg.eigh(hermitize(choi.matrix))
    if vals[0] < -1e-8:
        raise NotPositive(f"Choi eigenvalue {vals[0]:.3e} < -1e-8")
    ops = []
    for idx in range(len(vals) - 1, -1, -1):
        lam = vals[idx]
        if lam <= tol:
            continue
        k = np.sqrt(d * lam) * vecs[:, idx].reshape(d, d).T
        pivot = k.flat[int(np.argmax(np.abs(k)))]
        ops.append(k * (abs(pivot) / pivot))
    return KrausSet(dim=d, operators=np.array(ops))


def _basis_frame(basis):
    # Columns m are vec(A_m^T)/sqrt(d); orthonormal for a HS-orthogonal basis.
    d = basis.dim
    rows = basis.operators.transpose(0, 2, 1).reshape(d * d, d * d)
    return rows.T / np.sqrt(d)


def choi_to_chi(choi, basis):
    """Process matrix of a Choi state in the given operator basis."""
    if basis.dim != choi.dim:
        raise DimensionMismatch(f"basis dim {basis.dim} != Choi dim {choi.dim}")
    w = _basis_frame(basis)
    chi = w.conj().T @ choi.matrix @ w
    return ProcessMatrix(dim=choi.dim, basis=basis, matrix=hermitize(chi))


def chi_to_choi(proc):
    """Choi state of a process matrix (inverse of choi_to_chi)."""
    w = _basis_frame(proc.basis)
    return ChoiMatrix(dim=proc.dim, matrix=hermitize(w @ proc.matrix @ w.conj().T))


def apply(channel, rho_in):
    """Send a density matrix through the channel: d * Tr_in[(rho^T ⊗ I) rho_E]."""
    d = channel.dim
    rho = np.asarray(rho_in, dtype=complex)
    if rho.shape != (d, d):
        raise DimensionMismatch(f"state shape {rho.shape} does not match dim {d}")
    c4 = channel.choi.matrix.reshape(d, d, d, d)
    return d * np.einsum("ab,akbl->kl", rho, c4)


# ---------------------------------------------------------------------------
# channel builders


def identity_channel(d):
    """The ideal channel E(rho) = rho; chi_ij = delta_0i delta_0j."""
    kraus = KrausSet(dim=d, operators=np.eye(d, dtype=complex)[None, :, :])
    return Channel(kraus_to_choi(kraus), label=f"identity (d={d})")


def depolarizing_with_fidelity(d, fidelity, label=None):
    """Isotropic noise with pure-state output fidelity F for every pure input.

    E(rho) = p rho + (1-p) I/d with p = (dF-1)/(d-1).  The Weyl-basis chi
    is diagonal with chi_00 = (F(d+1)-1)/d and weight (1-F)/(d(d-1)) on
    every other diagonal entry, so the diagonal sums to one.
    """
    if not (1.0 / d - 1e-12 <= fidelity <= 1.0 + 1e-12):
        raise FidelityOutOfRange(f"fidelity {fidelity} outside [1/{d}, 1]")
    p = (d * fidelity - 1.0) / (d - 1.0)
    phi = maximally_entangled_ket(d)
    choi = p * np.outer(phi, phi.conj()) + (1.0 - p) * np.eye(d * d) / (d * d)
    return Channel(
        ChoiMatrix(dim=d, matrix=choi),
        label=label or f"depolarizing (d={d}, F={fidelity})",
    )


def optimal_cloning_channel(d):
    """Symmetric universal cloning attack: depolarizing at F = 1/2 + 1/(1+d)."""
    f = 0.5 + 1.0 / (1.0 + d)
    return depolarizing_with_fidelity(d, f, label=f"optimal-cloning attack (d={d})")


def intercept_resend_channel(d, bases=None, family=None):
    """Measure-and-resend attack over a subset of MUBs.

    Kraus operators are the projectors of every state in the chosen bases,
    scaled by 1/sqrt(|S|).  With all d+1 bases the matched-basis fidelity
    is 2/(1+d) for every MUB input state.  Basis indices are 1-based; the
    subset is sorted internally so the channel does not depend on ordering.
    """
    if family is None:
        family = _mub.generate_mubs(d)
    if family.dim != d:
        raise DimensionMismatch(f"MUB family dim {family.dim} != {d}")
    if bases is None:
        subset = tuple(range(1, d + 2))
    else:
        subset = tuple(sorted(set(int(a) for a in bases)))
        if not subset:
            raise EmptySubset("intercept-resend needs at least one basis")
        for a in subset:
            if not 1 <= a <= d + 1:
                raise IndexOutOfRange(f"basis index {a} not in 1..{d + 1}")
    ops = []
    scale = 1.0 / np.sqrt(len(subset))
    for a in subset:
        for m in range(1, d + 1):
            ops.append(scale * _mub.projector(family, a, m))
    kraus = KrausSet(dim=d, operators=np.array(ops))
    name = "all" if len(subset) == d + 1 else ",".join(str(a) for a in subset)
    return Channel(kraus_to_choi(kraus), label=f"intercept-resend (d={d}, bases={name})")


def diagonal_chi_channel(d, weights, label=None):
    """Random-unitary noise with a diagonal Weyl-basis process matrix.

    weights maps operator indices (0-based, m = j*d + k) to nonnegative
    reals summing to one; the rank of chi equals the number of nonzero
    weights.
    """
    total = 0.0
    diag = np.zeros(d * d)
    for idx, w in weights.items():
        idx = int(idx)
        if not 0 <= idx < d * d:
            raise IndexOutOfRange(f"operator index {idx} not in 0..{d * d - 1}")
        if w < -1e-15:
            raise WeightsNotNormalized(f"negative weight {w} at index {idx}")
        diag[idx] += w
        total += w
    if abs(total - 1.0) > 1e-12:
        raise WeightsNotNormalized(f"weights sum to {total!r}, expected 1")
    proc = ProcessMatrix(dim=d, basis=weyl_basis(d), matrix=np.diag(diag).astype(complex))
    rank = int(np.count_nonzero(diag))
    return Channel(chi_to_choi(proc), label=label or f"diagonal chi (d={d}, rank={rank})")


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class ChannelValidation:
    """CP/TP diagnostics: min Choi eigenvalue and ||d*Tr_out(rho_E) - I||_max."""

    min_choi_eigenvalue: float
    tp_deviation: float
    cp_ok: bool
    tp_ok: bool


def validate_channel(channel, cp_tol=1e-10, tp_tol=1e-8):
    d = channel.dim
    vals = np.linalg.eigvalsh(channel.choi.matrix)
    tr_out = partial_trace(channel.choi.matrix, d, d, keep=0)
    tp_dev = max_abs(d * tr_out - np.eye(d))
    return ChannelValidation(
        min_choi_eigenvalue=float(vals[0]),
        tp_deviation=tp_dev,
        cp_ok=bool(vals[0] >= -cp_tol),
        tp_ok=bool(tp_dev <= tp_tol),
    )


# ---------------------------------------------------------------------------
# diagonal noise-model families (Fig.-5-style sweeps)


@dataclass(frozen=True)
class NoiseModel:
    """A one-parameter diagonal-chi family: weight F on the identity index
    and (1-F)/len(indices) on each listed operator index."""

    dim: int
    indices: tuple
    name: str

    @property
    def rank(self):
        return len(self.indices) + 1

    def weights(self, f):
        w = {0: float(f)}
        share = (1.0 - f) / len(self.indices)
        for idx in self.indices:
            w[int(idx)] = share
        return w

    def channel(self, f):
        return diagonal_chi_channel(
            self.dim, self.weights(f), label=f"{self.name} (d={self.dim}, F={f})"
        )


def full_rank_model(d):
    """The completely symmetric family: uniform weight on all d^2-1 indices."""
    return NoiseModel(dim=d, indices=tuple(range(1, d * d)), name=f"rank{d * d}")


# Default index sets for the reduced-rank families, expressed in the Weyl
# ordering m = j*d + k.  The sets are configuration, not physics: any
# HS-orthogonal unitary basis relabels them.
_RANK_MODEL_INDICES = {
    2: (("rank2", (1,)), ("rank3", (1, 2))),
    3: (("rank7", tuple(range(1, 7))), ("rank4", (1, 2, 3)), ("rank3", (1, 8))),
    4: (("rank13", tuple(range(1, 13))), ("rank7", tuple(range(1, 7))), ("rank3", (1, 12))),
    5: (("rank11", tuple(range(1, 11))), ("rank5", (21, 22, 23, 24))),
}


def rank_models(d):
    """The built-in reduced-rank noise models for dimension d, plus rank d^2."""
    reduced = _RANK_MODEL_INDICES.get(d, ())
    models = [NoiseModel(dim=d, indices=idx, name=name) for name, idx in reduced]
    models.append(full_rank_model(d))
    return tuple(models)
