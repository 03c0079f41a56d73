"""Figures of merit for processes and coarse-grained channel error rates."""

from dataclasses import dataclass

import numpy as np

from .channel import weyl_basis
from .errors import BasisMismatch, DimensionMismatch, MissingEntries, OutOfRange
from .linalg import clipped_eigvalsh, hermitize
from .tomo import forward_probabilities


def process_fidelity(chi_exp, chi_target):
    """Overlap Tr(chi_exp chi_target) of two process matrices.

    Both must share the dimension and operator basis.  For a rank-1 target
    (a unitary-like channel) this is the usual process fidelity in [0, 1];
    against the identity process it reduces to chi_exp[0, 0].
    """
    if chi_exp.dim != chi_target.dim:
        raise DimensionMismatch(
            f"process dims differ: {chi_exp.dim} vs {chi_target.dim}"
        )
    if chi_exp.basis.name != chi_target.basis.name or not np.allclose(
        chi_exp.basis.operators, chi_target.basis.operators, atol=1e-12
    ):
        raise BasisMismatch("process matrices use different operator bases")
    return float(np.real(np.trace(chi_exp.matrix @ chi_target.matrix)))


def average_fidelity_from_process(f_p, d):
    """Average output-state fidelity over pure inputs: (d F_P + 1)/(d + 1)."""
    if not -1e-12 <= f_p <= 1.0 + 1e-12:
        raise OutOfRange(f"process fidelity {f_p} outside [0, 1]")
    return (d * f_p + 1.0) / (d + 1.0)


def average_purity_from_fidelity(f_avg, d):
    """Average output purity from the average fidelity: (1 - 2F + dF^2)/(d - 1)."""
    if not -1e-12 <= f_avg <= 1.0 + 1e-12:
        raise OutOfRange(f"average fidelity {f_avg} outside [0, 1]")
    return (1.0 - 2.0 * f_avg + d * f_avg**2) / (d - 1.0)


def error_rate(table, bases=None):
    """Coarse-grained error rate over matched-basis diagonals.

    Q = 1 - mean over alpha in bases, m of p^(alpha,alpha)_(m,m).  The
    default uses every basis present for both preparation and measurement.
    """
    matched = tuple(sorted(set(table.prep_bases) & set(table.meas_bases)))
    if bases is None:
        bases = matched
    else:
        bases = tuple(sorted(set(int(a) for a in bases)))
        missing = [a for a in bases if a not in matched]
        if missing:
            raise MissingEntries(
                f"bases {missing} lack matched prepare/measure entries"
            )
    if not bases:
        raise MissingEntries("no matched bases available")
    d = table.dim
    hits = [table.probs[a - 1, m, a - 1, m] for a in bases for m in range(d)]
    return 1.0 - float(np.mean(hits))


def state_fidelity(rho, sigma):
    """Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.

    Reduces to <psi|sigma|psi> when rho is pure.  Symmetric, in [0, 1],
    and 1 exactly when the states coincide.
    """
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape or rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionMismatch(f"incompatible shapes {rho.shape} and {sigma.shape}")
    vals, vecs = np.linalg.eigh(hermitize(rho))
    vals = np.clip(vals, 0.0, None)
    sq = (vecs * np.sqrt(vals)) @ vecs.conj().T
    inner = clipped_eigvalsh(sq @ sigma @ sq, neg_tol=1e-9)
    return float(np.sum(np.sqrt(inner)) ** 2)


def choi_fidelity(channel_a, channel_b):
    """Fidelity between two channels' unit-trace Choi states.

    Unlike the raw Tr(chi chi') overlap this is 1 exactly when the two
    channels coincide, whatever their purity; it is the yardstick used for
    "reconstruction quality against a known noisy truth".
    """
    if channel_a.dim != channel_b.dim:
        raise DimensionMismatch("channel dimensions differ")
    return state_fidelity(channel_a.choi.matrix, channel_b.choi.matrix)


@dataclass(frozen=True)
class ChannelMetrics:
    """One summary row: fidelities, purity, and both error-rate flavours."""

    dim: int
    process_fidelity: float
    average_fidelity: float
    average_purity: float
    error_rate_bb84: float
    error_rate_full: float
    label: str = ""


def summarize_channel(channel, mubs, label=None):
    """Figures of merit of a channel against the ideal (identity) process.

    F_P is the (0,0) element of the Weyl-basis process matrix; the error
    rates are coarse-grained over bases {1, 2} (two-basis protocols) and
    over all d+1 bases.
    """
    if channel.dim != mubs.dim:
        raise DimensionMismatch(f"channel dim {channel.dim} != MUB dim {mubs.dim}")
    d = channel.dim
    chi = channel.chi(weyl_basis(d))
    f_p = float(np.real(chi.matrix[0, 0]))
    f_avg = average_fidelity_from_process(min(max(f_p, 0.0), 1.0), d)
    p_avg = average_purity_from_fidelity(f_avg, d)
    table = forward_probabilities(channel, mubs)
    return ChannelMetrics(
        dim=d,
        process_fidelity=f_p,
        average_fidelity=f_avg,
        average_purity=p_avg,
        error_rate_bb84=error_rate(table, bases=(1, 2)),
        error_rate_full=error_rate(table),
        label=channel.label if label is None else label,
    )
