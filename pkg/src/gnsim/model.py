"""Jordan-Wigner-transformed lattice Gross-Neveu Hamiltonian and observables.

The model lives on L staggered sites (L = 2 L_D, two staggered sites per Dirac
site) with N fermion flavors; fermionic site (j, b) maps to qubit j*N + b, so
the register holds L*N qubits.  With hbar = 1 and dimensionless lattice
spacing a and coupling g:

- quadratic (hopping) part, open boundaries::

      sum_{j=0}^{L-2} sum_b (1/4a) (X_{j,b} Y_{j+1,b} - Y_{j,b} X_{j+1,b})

  The Jordan-Wigner Z strings cancel for nearest-site hops in this flavor
  ordering and are not emitted.

- quartic part in ZZ form, per Dirac site n (sites 2n, 2n+1)::

      (g^2/4a) [ sum_b Z_{2n,b} Z_{2n+1,b}
                 - sum_{b<c} (Z_{2n,b} Z_{2n,c} + Z_{2n+1,b} Z_{2n+1,c}
                              - Z_{2n,b} Z_{2n+1,c} - Z_{2n+1,b} Z_{2n,c}) ]
      - (g^2/4a) L_D N

  The scalar offset is carried explicitly on ``Hamiltonian.constant``.

- density-density correlator::

      (1/4a^2) sum_b (-1)^{j+j'} (I - Z)_{j,b} (I - Z)_{j',b}
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

_AXES = ("X", "Y", "Z")
_PAULI = {
    "X": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}


@dataclass(frozen=True)
class LatticeParams:
    """Lattice geometry and couplings.  L staggered sites, N flavors."""

    L: int
    N: int
    g: float
    a: float = 1.0

    def __post_init__(self) -> None:
        if self.L < 2 or self.L % 2 != 0:
            raise ValueError(f"L must be even and >= 2, got {self.L}")
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if not self.a > 0:
            raise ValueError(f"lattice spacing must be positive, got {self.a}")

    @property
    def L_D(self) -> int:
        """Number of Dirac sites (staggered-site pairs)."""
        return self.L // 2

    @property
    def n_qubits(self) -> int:
        return self.L * self.N


def qubit_index(j: int, b: int, N: int) -> int:
    """Qubit carrying fermionic site (j, b): j*N + b."""
    if b < 0 or b >= N:
        raise ValueError(f"flavor {b} outside [0, {N})")
    if j < 0:
        raise ValueError(f"negative site index {j}")
    return j * N + b


@dataclass(frozen=True)
class PauliString:
    """coefficient * product of single-qubit Paulis on strictly increasing qubits."""

    coefficient: float
    factors: tuple[tuple[int, str], ...]

    def __post_init__(self) -> None:
        if not np.isfinite(self.coefficient):
            raise ValueError("non-finite coefficient")
        qubits = [q for q, _ in self.factors]
        if qubits != sorted(set(qubits)):
            raise ValueError(f"factor qubits must be strictly increasing: {qubits}")
        for _, ax in self.factors:
            if ax not in _AXES:
                raise ValueError(f"unknown Pauli axis {ax!r}")

    def label(self) -> str:
        return " ".join(f"{ax}{q}" for q, ax in self.factors)


@dataclass
class Hamiltonian:
    """Real-weighted sum of Pauli strings plus a scalar offset (Hermitian)."""

    width: int
    terms: list[PauliString] = field(default_factory=list)
    constant: float = 0.0

    def add(self, coefficient: float, factors) -> None:
        self.terms.append(PauliString(coefficient, tuple(factors)))

    def __iadd__(self, other: "Hamiltonian") -> "Hamiltonian":
        if other.width != self.width:
            raise ValueError("width mismatch")
        self.terms.extend(other.terms)
        self.constant += other.constant
        return self


# An observable has the same shape as a Hamiltonian.
Observable = Hamiltonian


def build_quadratic(params: LatticeParams) -> Hamiltonian:
    """Hopping part: two strings (+-1/4a) XY / YX per bond (j, j+1) and flavor."""
    h = Hamiltonian(params.n_qubits)
    w = 1.0 / (4.0 * params.a)
    for j in range(params.L - 1):
        for b in range(params.N):
            p = qubit_index(j, b, params.N)
            q = qubit_index(j + 1, b, params.N)
            h.add(+w, [(p, "X"), (q, "Y")])
            h.add(-w, [(p, "Y"), (q, "X")])
    return h


def build_quartic(params: LatticeParams) -> Hamiltonian:
    """Quartic part in ZZ form: N(2N-1) ZZ strings per Dirac site plus offset."""
    h = Hamiltonian(params.n_qubits)
    w = params.g**2 / (4.0 * params.a)
    N = params.N

    def zz(coeff: float, p: int, q: int) -> None:
        h.add(coeff, [(min(p, q), "Z"), (max(p, q), "Z")])

    for n in range(params.L_D):
        lo, hi = 2 * n, 2 * n + 1
        for b in range(N):
            zz(+w, qubit_index(lo, b, N), qubit_index(hi, b, N))
        for b, c in itertools.combinations(range(N), 2):
            zz(-w, qubit_index(lo, b, N), qubit_index(lo, c, N))
            zz(-w, qubit_index(hi, b, N), qubit_index(hi, c, N))
            zz(+w, qubit_index(lo, b, N), qubit_index(hi, c, N))
            zz(+w, qubit_index(hi, b, N), qubit_index(lo, c, N))
    h.constant = -w * params.L_D * N
    return h


def build_hamiltonian(params: LatticeParams) -> Hamiltonian:
    h = build_quadratic(params)
    h += build_quartic(params)
    return h


def density_correlator(j: int, jp: int, params: LatticeParams) -> Observable:
    """Density-density correlator between staggered sites j and j', expanded
    into I/Z/ZZ strings.  For j = j' the projector is idempotent and the
    observable reduces to the summed site occupation (over flavors) / a^2."""
    if not (0 <= j < params.L and 0 <= jp < params.L):
        raise ValueError(f"sites ({j}, {jp}) outside [0, {params.L})")
    obs = Observable(params.n_qubits)
    sign = -1.0 if (j + jp) % 2 else 1.0
    pref = sign / (4.0 * params.a**2)
    for b in range(params.N):
        p = qubit_index(j, b, params.N)
        q = qubit_index(jp, b, params.N)
        if j == jp:
            # (I - Z)^2 = 2 (I - Z)
            obs.constant += 2.0 * pref
            obs.add(-2.0 * pref, [(p, "Z")])
        else:
            obs.constant += pref
            obs.add(-pref, [(p, "Z")])
            obs.add(-pref, [(q, "Z")])
            obs.add(+pref, [(min(p, q), "Z"), (max(p, q), "Z")])
    return obs


def total_occupation(width: int) -> Observable:
    """sum_k (I - Z_k)/2: total fermion number."""
    obs = Observable(width)
    obs.constant = width / 2.0
    for q in range(width):
        obs.add(-0.5, [(q, "Z")])
    return obs


def dense_matrix(h: Hamiltonian, max_qubits: int = 14) -> np.ndarray:
    """Dense 2^n x 2^n matrix by Kronecker products (little-endian: qubit 0 is
    the rightmost factor).  Intended for oracles and small-system checks."""
    if h.width > max_qubits:
        raise ValueError(f"dense matrix limited to {max_qubits} qubits, got {h.width}")
    dim = 2**h.width
    out = np.zeros((dim, dim), dtype=complex)
    for term in h.terms:
        m = np.eye(1, dtype=complex)
        fac = dict(term.factors)
        for q in range(h.width):
            op = _PAULI[fac[q]] if q in fac else np.eye(2, dtype=complex)
            m = np.kron(op, m)
        out += term.coefficient * m
    out += h.constant * np.eye(dim)
    return out


def hamiltonian_to_csv(h: Hamiltonian) -> str:
    """CSV dump: one ``coefficient,pauli_string`` row per term (e.g. ``0.25,X6 Y8``),
    plus a ``CONST,value`` row when the offset is nonzero."""
    lines = ["coefficient,pauli_string"]
    for term in h.terms:
        lines.append(f"{term.coefficient:.17g},{term.label()}")
    if h.constant != 0.0:
        lines.append(f"CONST,{h.constant:.17g}")
    return "\n".join(lines) + "\n"
