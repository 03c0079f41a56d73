"""Secret key rates: analytic two-basis and (d+1)-basis formulas, and the
Devetak-Winter rate computed from a fully characterized channel.

The full-characterization rate treats the unit-trace Choi state of the
channel as the bipartite state rho_AB shared by the honest parties
(source-replacement picture) and gives the eavesdropper the purifying
system E, the collective-attack worst case:

    K = H(Z_A | E) - H(Z_A | Z_B),

with Z_A the computational sorting measurement on Alice's half.  For a
filter-type receiver (single post-selected projector) the per-signal rate
is the sorting rate scaled by the 1/d post-selection efficiency; the two
reports differ by exactly that factor.
"""

from dataclasses import dataclass

import numpy as np

from .channel import Channel
from .errors import (
    DimensionMismatch,
    NotAState,
    OutOfRange,
    PovmInvalid,
)
from .linalg import (
    EIG_FLOOR,
    hermitize,
    max_abs,
    shannon_entropy_bits,
)
from .metrics import error_rate
from .tomo import forward_probabilities


def shannon_entropy_d(x, d):
    """Generalized entropy -x log2(x/(d-1)) - (1-x) log2(1-x) on [0, 1]."""
    if not -1e-15 <= x <= 1.0 + 1e-15:
        raise OutOfRange(f"argument {x} outside [0, 1]")
    x = min(max(x, 0.0), 1.0)
    out = 0.0
    if x > 0.0:
        out -= x * np.log2(x / (d - 1.0))
    if x < 1.0:
        out -= (1.0 - x) * np.log2(1.0 - x)
    return float(out)


def bb84_rate(d, q):
    """Two-basis protocol rate log2(d) - 2 h_d(Q); may be negative."""
    return float(np.log2(d) - 2.0 * shannon_entropy_d(q, d))


def mub_full_rate(d, q):
    """All-(d+1)-bases protocol rate as a function of the error rate Q.

    Defined for 0 <= Q <= d/(d+1) (the argument of the entropy term stays
    in [0, 1]); may be negative.
    """
    scaled = (d + 1.0) * q / d
    if not -1e-15 <= scaled <= 1.0 + 1e-15:
        raise OutOfRange(f"error rate {q} outside [0, {d / (d + 1.0)}]")
    return float(
        np.log2(d) - shannon_entropy_d(scaled, d) - scaled * np.log2(d + 1.0)
    )


# ---------------------------------------------------------------------------
# measurement models


@dataclass(frozen=True)
class PovmSet:
    """Computational-basis detection: a full sorter or a single filter."""

    dim: int
    elements: np.ndarray  # (k, d, d)
    kind: str  # "sort" or "filter"
    index: int | None = None

    def __post_init__(self):
        self.elements.setflags(write=False)


def sort_povm(d):
    eye = np.eye(d, dtype=complex)
    els = np.array([np.outer(eye[i], eye[i]) for i in range(d)])
    return PovmSet(dim=d, elements=els, kind="sort")


def filter_povm(d, index=0):
    if not 0 <= index < d:
        raise PovmInvalid(f"filter index {index} not in 0..{d - 1}")
    eye = np.eye(d, dtype=complex)
    els = np.array([np.outer(eye[index], eye[index])])
    return PovmSet(dim=d, elements=els, kind="filter", index=index)


def _check_povm(povm):
    tot = povm.elements.sum(axis=0)
    if povm.kind == "sort":
        if max_abs(tot - np.eye(povm.dim)) > 1e-10:
            raise PovmInvalid("sort POVM elements do not sum to the identity")
    elif povm.kind == "filter":
        if len(povm.elements) != 1:
            raise PovmInvalid("filter POVM must hold a single projector")
        el = povm.elements[0]
        if max_abs(el @ el - el) > 1e-10 or abs(np.trace(el) - 1.0) > 1e-10:
            raise PovmInvalid("filter element is not a rank-1 projector")
    else:
        raise PovmInvalid(f"unknown POVM kind {povm.kind!r}")


# ---------------------------------------------------------------------------
# source-replacement state and purification


def choi_to_rho_ab(channel):
    """The unit-trace Choi state as the shared bipartite state rho_AB."""
    return channel.choi.matrix.copy()


def purify(rho, tol=EIG_FLOOR):
    """A pure state on system ⊗ ancilla whose system marginal is rho.

    Built from the eigendecomposition; the ancilla dimension equals the
    rank of rho (eigenvalues above tol).  Returned flat with the system
    index major: v[i * r + s].
    """
    rho = np.asarray(rho, dtype=complex)
    vals, vecs = np.linalg.eigh(hermitize(rho))
    if vals[0] < -1e-10:
        raise NotAState(f"eigenvalue {vals[0]:.3e} too negative to purify")
    keep = np.where(vals > tol)[0][::-1]  # descending
    amps = np.sqrt(vals[keep])
    return (vecs[:, keep] * amps).reshape(-1)


def _psi_tensor(rho_ab, d):
    """Purification of rho_AB reshaped to indices (A, B, environment)."""
    psi = purify(rho_ab)
    r = psi.size // (d * d)
    return psi.reshape(d, d, r)


def _entropy_za_given_e(psi_abe):
    """H(Z_A|E) from a tripartite pure state, Z_A the computational sorter.

    Measuring A in the computational basis leaves the block-diagonal
    classical-quantum state oplus_j M_j on (Z_A, E) with
    M_j = sum_b |<j b s|psi>|^2-type Gram blocks; the conditional entropy
    is the pooled block entropy minus the entropy of rho_E (whose spectrum
    equals that of rho_AB).
    """
    d_a = psi_abe.shape[0]
    blocks = [psi_abe[j].T @ psi_abe[j].conj() for j in range(d_a)]
    pooled = np.concatenate(
        [np.clip(np.linalg.eigvalsh(hermitize(m)), 0.0, None) for m in blocks]
    )
    rho_e = sum(blocks)
    env_spectrum = np.clip(np.linalg.eigvalsh(hermitize(rho_e)), 0.0, None)
    return shannon_entropy_bits(pooled) - shannon_entropy_bits(env_spectrum)


def _validate_rho_ab(rho_ab, d):
    rho_ab = np.asarray(rho_ab, dtype=complex)
    if rho_ab.shape != (d * d, d * d):
        raise DimensionMismatch(
            f"rho_AB shape {rho_ab.shape} does not match POVM dim {d}"
        )
    if abs(np.trace(rho_ab).real - 1.0) > 1e-8 or abs(np.trace(rho_ab).imag) > 1e-10:
        raise NotAState(f"trace {np.trace(rho_ab)} != 1")
    if max_abs(rho_ab - rho_ab.conj().T) > 1e-8:
        raise NotAState("rho_AB is not Hermitian")
    if np.linalg.eigvalsh(hermitize(rho_ab))[0] < -1e-10:
        raise NotAState("rho_AB has a significantly negative eigenvalue")
    return hermitize(rho_ab)


def devetak_winter_rate(rho_ab, z_a, z_b):
    """K = H(Z_A|E) - H(Z_A|Z_B) for a fully reconstructed rho_AB.

    z_a must be the sorting POVM (Alice prepares every symbol); z_b selects
    the receiver model.  Eve holds the purifying system of rho_AB, so the
    spectra of rho_E and rho_AB agree.  H(Z_A|Z_B) comes from the classical
    joint distribution Tr[(Z_A^j ⊗ Z_B^k) rho_AB] of the sorting readout;
    for a filter receiver the sorting rate is scaled by the post-selection
    efficiency 1/d, making K_filter = K_sort / d exactly.
    """
    _check_povm(z_a)
    _check_povm(z_b)
    if z_a.kind != "sort":
        raise PovmInvalid("Alice's POVM must be the sorting measurement")
    if z_a.dim != z_b.dim:
        raise DimensionMismatch("POVM dimensions differ")
    d = z_a.dim
    rho_ab = _validate_rho_ab(rho_ab, d)

    psi = _psi_tensor(rho_ab, d)
    h_za_e = _entropy_za_given_e(psi)

    sorter = z_b if z_b.kind == "sort" else sort_povm(d)
    rho4 = rho_ab.reshape(d, d, d, d)
    joint = np.empty((d, len(sorter.elements)))
    for j in range(d):
        for k, el in enumerate(sorter.elements):
            block = rho4[j, :, j, :]
            joint[j, k] = np.real(np.trace(el @ block))
    joint = np.clip(joint, 0.0, None)
    h_joint = shannon_entropy_bits(joint.reshape(-1))
    h_b = shannon_entropy_bits(joint.sum(axis=0))
    h_za_zb = h_joint - h_b

    k_sort = h_za_e - h_za_zb
    if z_b.kind == "filter":
        return k_sort / d
    return k_sort


# ---------------------------------------------------------------------------
# reports and sweeps


@dataclass(frozen=True)
class KeyRateReport:
    """One protocol's rate for one channel and detection model."""

    protocol: str  # "bb84", "mub_full_analytic", or "devetak_winter"
    dim: int
    error_rate: float | None
    key_rate: float
    detection: str  # "sort" or "filter"
    efficiency: float


def channel_key_rates(channel, mubs, protocols=("bb84", "mub", "dw"), detection="sort"):
    """Key-rate reports for a channel under every requested protocol.

    The two-basis analytic rate uses the error rate over bases {1, 2}; the
    (d+1)-basis rate and the Devetak-Winter rate use all bases.  Filter
    detection multiplies every rate by the 1/d post-selection efficiency.
    """
    if detection not in ("sort", "filter"):
        raise PovmInvalid(f"unknown detection model {detection!r}")
    d = channel.dim
    eff = 1.0 / d if detection == "filter" else 1.0
    table = forward_probabilities(channel, mubs)
    q_bb84 = error_rate(table, bases=(1, 2))
    q_full = error_rate(table)
    reports = []
    for proto in protocols:
        if proto == "bb84":
            k, q = bb84_rate(d, q_bb84), q_bb84
            name = "bb84"
        elif proto == "mub":
            k, q = mub_full_rate(d, q_full), q_full
            name = "mub_full_analytic"
        elif proto == "dw":
            k = devetak_winter_rate(choi_to_rho_ab(channel), sort_povm(d), sort_povm(d))
            q = q_full
            name = "devetak_winter"
        else:
            raise OutOfRange(f"unknown protocol {proto!r}")
        reports.append(
            KeyRateReport(
                protocol=name,
                dim=d,
                error_rate=q,
                key_rate=eff * k,
                detection=detection,
                efficiency=eff,
            )
        )
    return reports


@dataclass(frozen=True)
class SweepPoint:
    f: float
    q: float
    k_bb84: float
    k_mub: float
    k_dw: float


def sweep_noise_model(model, f_grid, mubs, protocols=("bb84", "mub", "dw")):
    """Rates along a diagonal-chi noise family, one row per F value.

    Each row carries the channel's coarse-grained error rate over all
    bases (the Q column) plus the requested per-signal sorting rates;
    protocols left out are reported as NaN.
    """
    if model.dim != mubs.dim:
        raise DimensionMismatch(f"model dim {model.dim} != MUB dim {mubs.dim}")
    d = model.dim
    z_a, z_b = sort_povm(d), sort_povm(d)
    rows = []
    for f in f_grid:
        ch = model.channel(float(f))
        table = forward_probabilities(ch, mubs)
        q_full = error_rate(table)
        k_bb = bb84_rate(d, error_rate(table, bases=(1, 2))) if "bb84" in protocols else np.nan
        k_mub = mub_full_rate(d, q_full) if "mub" in protocols else np.nan
        k_dw = (
            devetak_winter_rate(choi_to_rho_ab(ch), z_a, z_b)
            if "dw" in protocols
            else np.nan
        )
        rows.append(SweepPoint(f=float(f), q=q_full, k_bb84=k_bb, k_mub=k_mub, k_dw=k_dw))
    return rows
