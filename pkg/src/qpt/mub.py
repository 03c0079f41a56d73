"""Mutually unbiased bases (MUBs) for prime dimensions and for d = 4.

A family holds the full set of d+1 orthonormal bases of C^d in which any
two states drawn from *different* bases satisfy |<a|b>|^2 = 1/d.  Basis 1
is always the computational basis.  Basis 2 is the discrete Fourier basis
(1/sqrt d) sum_j w^(kj) |j> for prime d; the d = 4 set is built from the
two-qubit commuting-operator classes, whose second basis is the
finite-field Fourier analogue (a real Hadamard pattern).

Basis indices alpha run 1..d+1 and state indices m run 1..d in the public
API, matching the usual MUB labelling; the underlying arrays are 0-based.
"""

from dataclasses import dataclass

import numpy as np

from .errors import IndexOutOfRange, UnsupportedDimension

_NONPRIME_SUPPORTED = (4,)


def _is_prime(n):
    if n < 2:
        return False
    k = 2
    while k * k <= n:
        if n % k == 0:
            return False
        k += 1
    return True


def _phase_fix(v, tol=1e-12):
    """Rotate a state so its first non-negligible amplitude is real positive."""
    for x in v:
        if abs(x) > tol:
            return v * (abs(x) / x)
    return v


@dataclass(frozen=True)
class MubFamily:
    """The d+1 mutually unbiased bases of a d-dimensional space.

    bases[a, m] is the amplitude vector of state m+1 of basis a+1.
    Instances are immutable; the array is marked read-only.
    """

    dim: int
    bases: np.ndarray

    def __post_init__(self):
        self.bases.setflags(write=False)

    @property
    def n_bases(self):
        return self.dim + 1

    def state(self, alpha, m):
        """Amplitudes of state m of basis alpha (both 1-based)."""
        _check_indices(self.dim, alpha, m)
        return self.bases[alpha - 1, m - 1]


def _check_indices(d, alpha, m=None):
    if not 1 <= alpha <= d + 1:
        raise IndexOutOfRange(f"basis index {alpha} not in 1..{d + 1}")
    if m is not None and not 1 <= m <= d:
        raise IndexOutOfRange(f"state index {m} not in 1..{d}")


def _mubs_dim2():
    s = 1.0 / np.sqrt(2.0)
    return np.array(
        [
            [[1, 0], [0, 1]],
            [[s, s], [s, -s]],
            [[s, 1j * s], [s, -1j * s]],
        ],
        dtype=complex,
    )


def _mubs_odd_prime(d):
    # Quadratic Gauss-sum construction: state m of extra basis a has
    # amplitudes w^(a j^2 + m j)/sqrt(d).  a = 0 is the Fourier basis.
    omega = np.exp(2j * np.pi / d)
    j = np.arange(d)
    bases = [np.eye(d, dtype=complex)]
    for a in range(d):
        basis = [omega ** ((a * j * j + m * j) % d) / np.sqrt(d) for m in range(d)]
        bases.append(np.array(basis))
    return np.array(bases)


_PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# Commuting two-qubit operator pairs whose joint eigenbases, together with
# the computational basis, form the complete set of 5 MUBs in d = 4.
_DIM4_CLASSES = (("XI", "IX"), ("YI", "IY"), ("XZ", "ZY"), ("XY", "YZ"))


def _two_qubit(label):
    return np.kron(_PAULI_1Q[label[0]], _PAULI_1Q[label[1]])


def _mubs_dim4():
    eye = np.eye(4, dtype=complex)
    bases = [eye.copy()]
    for pair in _DIM4_CLASSES:
        p, q = (_two_qubit(lbl) for lbl in pair)
        basis = []
        for s in (1, -1):
            for t in (1, -1):
                proj = (eye + s * p) @ (eye + t * q) / 4.0
                col = int(np.argmax(np.abs(np.diagonal(proj)).real))
                v = proj[:, col]
                basis.append(v / np.linalg.norm(v))
        bases.append(np.array(basis))
    return np.array(bases)


def generate_mubs(d):
    """Build the complete family of d+1 mutually unbiased bases.

    Supported dimensions are the primes and d = 4.  Raises
    UnsupportedDimension otherwise (prime powers above 4 are rejected).
    """
    if not isinstance(d, (int, np.integer)) or d < 2:
        raise UnsupportedDimension(f"dimension must be an integer >= 2, got {d!r}")
    if d == 2:
        raw = _mubs_dim2()
    elif d in _NONPRIME_SUPPORTED:
        raw = _mubs_dim4()
    elif _is_prime(d):
        raw = _mubs_odd_prime(d)
    else:
        raise UnsupportedDimension(
            f"no MUB construction for d={d}; supported: prime d and d=4"
        )
    fixed = np.array([[_phase_fix(v) for v in basis] for basis in raw])
    return MubFamily(dim=int(d), bases=fixed)


def projector(family, alpha, m):
    """Rank-1 projector |psi_m^(alpha)><psi_m^(alpha)| (1-based indices)."""
    v = family.state(alpha, m)
    return np.outer(v, v.conj())


@dataclass(frozen=True)
class MubReport:
    """Worst-case deviations of a family from the MUB defining relations."""

    orthonormality: float
    unbiasedness: float
    completeness: float
    tol: float
    passed: bool


def verify_mubs(family, tol=1e-10):
    """Check orthonormality, cross-basis unbiasedness, and completeness.

    Returns a MubReport with the maximum absolute deviation of each
    relation and a pass flag at the given tolerance.
    """
    d = family.dim
    flat = family.bases.reshape((d + 1) * d, d)
    overlap = np.abs(flat @ flat.conj().T) ** 2

    ortho_dev = 0.0
    unbias_dev = 0.0
    for a in range(d + 1):
        for b in range(d + 1):
            block = overlap[a * d : (a + 1) * d, b * d : (b + 1) * d]
            if a == b:
                ortho_dev = max(ortho_dev, np.max(np.abs(block - np.eye(d))))
            else:
                unbias_dev = max(unbias_dev, np.max(np.abs(block - 1.0 / d)))

    resolution = flat.T @ flat.conj() / (d + 1)
    comp_dev = float(np.max(np.abs(resolution - np.eye(d))))

    passed = max(ortho_dev, unbias_dev, comp_dev) < tol
    return MubReport(
        orthonormality=float(ortho_dev),
        unbiasedness=float(unbias_dev),
        completeness=comp_dev,
        tol=tol,
        passed=passed,
    )


def computational_labels(d):
    """Display labels for the computational basis, symmetric around zero.

    Odd d: -(d-1)/2 .. (d-1)/2.  Even d: -d/2 .. d/2 skipping 0.  Purely
    cosmetic; nothing in the package computes with these.
    """
    if d % 2:
        half = (d - 1) // 2
        return tuple(range(-half, half + 1))
    half = d // 2
    return tuple(v for v in range(-half, half + 1) if v != 0)
