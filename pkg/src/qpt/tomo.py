"""Forward Born-rule model, synthetic count sampling, and maximum-likelihood
Choi reconstruction.

The measurement set is the tensor-product family
Pi_j = (Pi_m^(alpha))^T ⊗ Pi_n^(beta) over prepared MUB states (alpha, m)
and measured projectors (beta, n).  With the unit-trace Choi convention the
physical detection probability is p = d * Tr[Pi_j rho_E]; each POVM element
is rank one, so everything reduces to quadratic forms u^† rho u with
u = conj(psi_m^alpha) ⊗ psi_n^beta.

Reconstruction maximizes sum_j f_j log p_j over unit-trace positive
matrices with the symmetric fixed-point iteration

    rho <- mu * R rho R,     R = sum_j (f_j / p_j) Pi_j,

started from the maximally mixed state.  Frequencies are normalized within
each (prepared state, measured basis) group, so absolute count rates carry
no weight, matching filter-type acquisition.  Trace preservation is NOT
enforced during the iteration; the residual deviation is reported.
"""

import re
from dataclasses import dataclass, field

import numpy as np

from .channel import Channel, ChoiMatrix
from .errors import (
    DimensionMismatch,
    IncompleteData,
    IndexOutOfRange,
    InvalidModel,
)
from .linalg import hermitize, max_abs, partial_trace

PROB_CLAMP = 1e-300


@dataclass(frozen=True)
class ProbabilityTable:
    """Detection probabilities p[alpha-1, m-1, beta-1, n-1].

    Entries for basis pairs outside (prep_bases x meas_bases) are zero and
    carry no meaning; the basis tuples (1-based) say which rows are real.
    """

    dim: int
    probs: np.ndarray  # (d+1, d, d+1, d)
    prep_bases: tuple
    meas_bases: tuple

    def __post_init__(self):
        self.probs.setflags(write=False)


@dataclass(frozen=True)
class TomographyData:
    """Counts with the same layout as ProbabilityTable plus sampling metadata.

    Counts are integers for the stochastic models; the "exact" model stores
    the probabilities themselves as float pseudo-counts.
    """

    dim: int
    counts: np.ndarray
    prep_bases: tuple
    meas_bases: tuple
    model: str
    seed: int | None = None

    def __post_init__(self):
        self.counts.setflags(write=False)


@dataclass(frozen=True)
class MleOptions:
    max_iter: int = 20000
    stop_tol: float = 1e-10
    dilution: float | None = None
    enforce_tp: bool = False
    allow_incomplete: bool = False


@dataclass(frozen=True)
class MleResult:
    estimate: ChoiMatrix
    iterations: int
    loglikelihood: float
    loglikelihood_trace: np.ndarray
    stop_reason: str  # "converged" or "max_iter"
    tp_deviation: float


def _normalize_bases(d, bases):
    if bases is None:
        return tuple(range(1, d + 2))
    out = tuple(sorted(set(int(a) for a in bases)))
    for a in out:
        if not 1 <= a <= d + 1:
            raise IndexOutOfRange(f"basis index {a} not in 1..{d + 1}")
    if not out:
        raise IndexOutOfRange("basis set must not be empty")
    return out


def _povm_vectors(mubs, prep_bases, meas_bases):
    """Stacked rank-1 POVM vectors u_j and their (alpha, m, beta, n) labels.

    Ordering is alpha-major, then m, beta, n; outcomes n are contiguous, so
    each (alpha, m, beta) normalization group is a run of length d.
    """
    d = mubs.dim
    cols = []
    labels = []
    for a in prep_bases:
        for m in range(d):
            prep = mubs.bases[a - 1, m].conj()
            for b in meas_bases:
                for n in range(d):
                    cols.append(np.kron(prep, mubs.bases[b - 1, n]))
                    labels.append((a, m + 1, b, n + 1))
    return np.array(cols).T.copy(), labels


def forward_probabilities(channel, mubs, prep_bases=None, meas_bases=None):
    """Detection probabilities p^(alpha,beta)_(m,n) = Tr[Pi_n^b E(Pi_m^a)].

    Evaluated through the Choi quadratic form with the factor d of the
    unit-trace convention; identical (to 1e-10) to applying the channel and
    projecting, which the tests exercise as an independent oracle.
    """
    if channel.dim != mubs.dim:
        raise DimensionMismatch(f"channel dim {channel.dim} != MUB dim {mubs.dim}")
    d = channel.dim
    prep = _normalize_bases(d, prep_bases)
    meas = _normalize_bases(d, meas_bases)
    u, labels = _povm_vectors(mubs, prep, meas)
    vals = d * np.real(np.einsum("ij,ik,kj->j", u.conj(), channel.choi.matrix, u))
    probs = np.zeros((d + 1, d, d + 1, d))
    for val, (a, m, b, n) in zip(vals, labels):
        probs[a - 1, m - 1, b - 1, n - 1] = val
    return ProbabilityTable(dim=d, probs=probs, prep_bases=prep, meas_bases=meas)


_MODEL_RE = re.compile(r"^\s*(poisson|multinomial)\s*\(\s*([0-9eE+.]+)\s*\)\s*$")


def _parse_model(model):
    if model.strip() == "exact":
        return "exact", None
    m = _MODEL_RE.match(model)
    if not m:
        raise InvalidModel(
            f"model {model!r} not understood; use 'poisson(MEAN)', "
            "'multinomial(TOTAL)', or 'exact'"
        )
    size = float(m.group(2))
    if size <= 0:
        raise InvalidModel(f"model size must be positive, got {size}")
    return m.group(1), size


def sample_counts(table, model, seed):
    """Draw synthetic counts from a probability table.

    Models: 'poisson(MEAN)' draws an independent Poisson with mean MEAN*p
    per setting; 'multinomial(TOTAL)' distributes TOTAL shots over the d
    outcomes of each (prepared state, measured basis) group; 'exact' copies
    the probabilities as float pseudo-counts (infinite-statistics limit).
    Output is reproducible for a fixed seed.
    """
    kind, size = _parse_model(model)
    d = table.dim
    rng = np.random.default_rng(seed)
    counts = np.zeros_like(table.probs)
    for a in table.prep_bases:
        for m in range(d):
            for b in table.meas_bases:
                row = np.clip(table.probs[a - 1, m, b - 1], 0.0, None)
                if kind == "exact":
                    counts[a - 1, m, b - 1] = row
                elif kind == "poisson":
                    counts[a - 1, m, b - 1] = rng.poisson(size * row)
                else:  # multinomial
                    total = row.sum()
                    if total <= 0:
                        continue
                    counts[a - 1, m, b - 1] = rng.multinomial(int(size), row / total)
    return TomographyData(
        dim=d,
        counts=counts,
        prep_bases=table.prep_bases,
        meas_bases=table.meas_bases,
        model=model,
        seed=seed,
    )


def _frequencies(data):
    """Counts normalized within each (prepared state, measured basis) group."""
    d = data.dim
    freqs = np.zeros_like(data.counts, dtype=float)
    for a in data.prep_bases:
        for m in range(d):
            for b in data.meas_bases:
                row = data.counts[a - 1, m, b - 1].astype(float)
                total = row.sum()
                if total > 0:
                    freqs[a - 1, m, b - 1] = row / total
    return freqs


def _flatten_for_mle(data, mubs):
    u, labels = _povm_vectors(mubs, data.prep_bases, data.meas_bases)
    freqs = _frequencies(data)
    f = np.array([freqs[a - 1, m - 1, b - 1, n - 1] for (a, m, b, n) in labels])
    return u, f


def loglikelihood(data, mubs, choi):
    """sum_j f_j log p_j(choi) with detection probabilities clamped at 1e-300."""
    u, f = _flatten_for_mle(data, mubs)
    d = data.dim
    p = d * np.real(np.einsum("ij,ik,kj->j", u.conj(), choi.matrix, u))
    return float(np.sum(f * np.log(np.clip(p, PROB_CLAMP, None))))


def mle_reconstruct(data, mubs, opts=MleOptions()):
    """Maximum-likelihood Choi estimate via the symmetric R rho R fixed point.

    Requires data over all d+1 preparation and measurement bases unless
    opts.allow_incomplete is set.  Iterates from the maximally mixed state
    until the elementwise change falls below opts.stop_tol or opts.max_iter
    is reached; the log-likelihood trace is recorded per iteration.  With
    opts.dilution = eps the damped map (I + eps R) rho (I + eps R) is used
    instead of the plain R rho R step.  opts.enforce_tp applies a final
    orthogonal projection onto trace-preserving Choi matrices (off by
    default; the reported tp_deviation refers to the raw estimate).
    """
    if data.dim != mubs.dim:
        raise DimensionMismatch(f"data dim {data.dim} != MUB dim {mubs.dim}")
    d = data.dim
    full = tuple(range(1, d + 2))
    if (data.prep_bases != full or data.meas_bases != full) and not opts.allow_incomplete:
        raise IncompleteData(
            f"prep bases {data.prep_bases} / meas bases {data.meas_bases} do not "
            "cover all d+1 bases; pass allow_incomplete to proceed anyway"
        )

    u, f = _flatten_for_mle(data, mubs)
    groups = max(1, int(round(f.sum())))  # groups with counts each sum to 1
    f_scaled = f / groups  # makes R -> I at the fixed point

    n = d * d
    rho = np.eye(n, dtype=complex) / n
    loglik_trace = np.empty(opts.max_iter)
    stop_reason = "max_iter"
    iterations = opts.max_iter
    eye = np.eye(n)

    for it in range(opts.max_iter):
        t = rho @ u
        p_unit = np.real(np.einsum("ij,ij->j", u.conj(), t))
        p_phys = np.clip(d * p_unit, PROB_CLAMP, None)
        loglik_trace[it] = np.sum(f * np.log(p_phys))

        w = f_scaled / np.clip(p_unit, PROB_CLAMP / d, None)
        r = (u * w) @ u.conj().T
        if opts.dilution is not None:
            r = eye + opts.dilution * r
        new = r @ rho @ r
        new = hermitize(new)
        new /= np.trace(new).real

        delta = max_abs(new - rho)
        rho = new
        if delta < opts.stop_tol:
            stop_reason = "converged"
            iterations = it + 1
            break

    estimate = ChoiMatrix(dim=d, matrix=rho)
    if opts.enforce_tp:
        estimate = project_trace_preserving(estimate)
    tr_out = partial_trace(rho, d, d, keep=0)
    tp_dev = max_abs(d * tr_out - np.eye(d))
    final = loglikelihood(data, mubs, estimate)
    return MleResult(
        estimate=estimate,
        iterations=iterations,
        loglikelihood=final,
        loglikelihood_trace=loglik_trace[:iterations].copy(),
        stop_reason=stop_reason,
        tp_deviation=tp_dev,
    )


def project_trace_preserving(choi):
    """Orthogonal projection onto the affine subspace Tr_out(rho_E) = I/d.

    May push small eigenvalues slightly negative; intended as an optional
    post-processing step, not part of the default reconstruction.
    """
    d = choi.dim
    gap = np.eye(d) / d - partial_trace(choi.matrix, d, d, keep=0)
    fixed = choi.matrix + np.kron(gap, np.eye(d) / d)
    return ChoiMatrix(dim=d, matrix=hermitize(fixed))


def reconstructed_channel(result, label="mle reconstruction"):
    """Wrap an MLE estimate as a Channel for downstream analysis."""
    return Channel(result.estimate, label=label)
