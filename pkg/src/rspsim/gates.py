"""Constructors for every operator the protocols use.

Shift/clock operators and generalized controlled shifts for qudits, the
entanglement-concentration controlled-U, encoding operators (the printed
non-unitary 2x2 form and its unitary repair), modular negation
permutations, receiver-side correction operators, and the measurement
bases of the ancilla-assisted deterministic qubit baseline.

Every constructor returns an immutable :class:`GateMatrix` whose
unitarity defect is computed once at build time.  All constructors except
:func:`encoding_unitary_literal` produce gates with defect <= 1e-10.
"""

from __future__ import annotations

import functools
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidState, NonUnitaryGate
from .linalg import STRUCT_TOL, as_cvec, complete_to_unitary, dagger, unitarity_defect

# A gate is applied in strict mode only if its defect stays below this.
UNITARY_TOL = 1e-8


@dataclass(frozen=True)
class GateMatrix:
    """Dense gate acting on one or more named subsystems.

    ``dims`` holds the per-subsystem dimensions in application order;
    ``defect`` caches the unitarity defect measured at construction.
    """

    matrix: np.ndarray = field(repr=False)
    dims: tuple[int, ...]
    name: str
    defect: float
    literal: bool = False

    @property
    def arity(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def is_unitary(self, tol: float = UNITARY_TOL) -> bool:
        return self.defect <= tol

    def daggered(self) -> "GateMatrix":
        return make_gate(dagger(self.matrix), self.dims, f"{self.name}^dag")


def make_gate(
    matrix: np.ndarray, dims: Sequence[int], name: str, literal: bool = False
) -> GateMatrix:
    """Freeze a matrix into a GateMatrix, recording its unitarity defect."""
    m = np.asarray(matrix, dtype=complex)
    dims = tuple(int(d) for d in dims)
    expected = int(np.prod(dims))
    if m.shape != (expected, expected):
        raise InvalidState(f"gate {name}: matrix shape {m.shape} != product of dims {dims}")
    m = m.copy()
    m.flags.writeable = False
    return GateMatrix(matrix=m, dims=dims, name=name, defect=unitarity_defect(m), literal=literal)


@functools.lru_cache(maxsize=None)
def identity(d: int) -> GateMatrix:
    return make_gate(np.eye(d, dtype=complex), (d,), f"I{d}")


@functools.lru_cache(maxsize=None)
def pauli_x(d: int) -> GateMatrix:
    """Cyclic shift |j> -> |j+1 mod d>; the Pauli X at d=2."""
    if d < 2:
        raise InvalidState("pauli_x needs d >= 2")
    m = np.zeros((d, d), dtype=complex)
    for j in range(d):
        m[(j + 1) % d, j] = 1.0
    return make_gate(m, (d,), f"X{d}")


@functools.lru_cache(maxsize=None)
def pauli_z(d: int) -> GateMatrix:
    """Clock gate |j> -> w^j |j> with w = exp(2 pi i / d); the Pauli Z at d=2."""
    if d < 2:
        raise InvalidState("pauli_z needs d >= 2")
    omega = np.exp(2j * np.pi / d)
    return make_gate(np.diag(omega ** np.arange(d)), (d,), f"Z{d}")


def shift_power(d: int, k: int) -> np.ndarray:
    """Permutation matrix for |j> -> |j+k mod d>."""
    m = np.zeros((d, d), dtype=complex)
    for j in range(d):
        m[(j + k) % d, j] = 1.0
    return m


def controlled_shift(d: int, table: Sequence[int], name: str | None = None) -> GateMatrix:
    """Two-subsystem gate |i>|j> -> |i>|j + k_i mod d> for k_i = table[i]."""
    table = tuple(int(k) for k in table)
    if len(table) != d or any(not 0 <= k < d for k in table):
        raise InvalidState(f"shift table must hold d={d} entries in [0, d)")
    m = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        block = shift_power(d, table[i])
        m[i * d : (i + 1) * d, i * d : (i + 1) * d] = block
    return make_gate(m, (d, d), name or f"CSHIFT{d}{table}")


@functools.lru_cache(maxsize=None)
def cadd(d: int) -> GateMatrix:
    """Controlled modular addition, k_i = i.  Standard CNOT at d=2."""
    return controlled_shift(d, tuple(range(d)), name=f"CADD{d}")


@functools.lru_cache(maxsize=None)
def csub(d: int) -> GateMatrix:
    """Controlled modular subtraction, k_i = -i mod d.  Standard CNOT at d=2."""
    return controlled_shift(d, tuple((-i) % d for i in range(d)), name=f"CSUB{d}")


def cu_concentration(alpha: float, beta: float) -> GateMatrix:
    """Controlled-U that concentrates a partial qubit channel.

    Identity when the control is |0>; when |1>, the target block sends
    |0> -> (a/b)|0> - sqrt(1 - a^2/b^2)|1> and |1> -> (a/b)|1> +
    sqrt(1 - a^2/b^2)|0>.  Requires 0 < |alpha| <= |beta| and
    alpha^2 + beta^2 = 1.
    """
    alpha, beta = float(alpha), float(beta)
    if abs(alpha**2 + beta**2 - 1.0) > STRUCT_TOL:
        raise InvalidState("cu_concentration needs alpha^2 + beta^2 = 1")
    if alpha == 0.0:
        raise InvalidState("cu_concentration needs alpha != 0")
    if abs(alpha) > abs(beta):
        raise InvalidState("cu_concentration needs |alpha| <= |beta|")
    r = alpha / beta
    t = np.sqrt(max(0.0, 1.0 - r * r))
    block = np.array([[r, t], [-t, r]], dtype=complex)
    m = np.eye(4, dtype=complex)
    m[2:, 2:] = block
    return make_gate(m, (2, 2), f"CU({alpha:.6g},{beta:.6g})")


def encoding_unitary_literal(x0: float, x1mag: float, theta: float) -> GateMatrix:
    """The printed 2x2 encoding operator, kept verbatim.

    [[x0, -|x1| e^{i theta}], [|x1| e^{i theta}, x0]].  Column 0 is the
    target state.  Not unitary when x0*|x1|*sin(theta) != 0; the defect
    (2*sqrt(2)*x0*|x1|*|sin theta|) is recorded, not rejected, and the
    gate is flagged literal.
    """
    x0, x1mag = float(x0), float(x1mag)
    if abs(x0 * x0 + x1mag * x1mag - 1.0) > STRUCT_TOL:
        raise InvalidState("encoding_unitary_literal needs x0^2 + |x1|^2 = 1")
    p = x1mag * np.exp(1j * float(theta))
    m = np.array([[x0, -p], [p, x0]], dtype=complex)
    return make_gate(m, (2,), "U_literal", literal=True)


def encoding_unitary(target: Sequence[complex] | np.ndarray) -> GateMatrix:
    """Unitary encoder whose column 0 is exactly the target amplitudes."""
    amps = as_cvec(getattr(target, "amplitudes", target))
    u = complete_to_unitary(amps)
    return make_gate(u, (amps.size,), f"U_enc(d={amps.size})")


def negation_shift(d: int, m: int) -> GateMatrix:
    """Self-inverse permutation |l> -> |m - l mod d>.  I at (2,0), X at (2,1)."""
    if not 0 <= m < d:
        raise InvalidState(f"negation_shift needs 0 <= m < d, got m={m}, d={d}")
    mat = np.zeros((d, d), dtype=complex)
    for l in range(d):
        mat[(m - l) % d, l] = 1.0
    return make_gate(mat, (d,), f"N[{m}]")


def correction_unitary(u: GateMatrix, m: int) -> GateMatrix:
    """Receiver correction V_m = U Pi_0m U^dag N_m for branch outcome m.

    Pi_0m transposes basis states 0 and m.  V_m maps the raw branch state
    b_m = sum_n U[n, m] |m - n mod d> to U|0>, the encoded target, exactly.
    """
    if u.arity != 1:
        raise InvalidState("correction_unitary expects a single-subsystem encoder")
    if u.defect > UNITARY_TOL:
        raise NonUnitaryGate(f"encoder defect {u.defect:.3e} exceeds {UNITARY_TOL:.0e}")
    d = u.dim
    if not 0 <= m < d:
        raise InvalidState(f"correction_unitary needs 0 <= m < d, got m={m}")
    swap = np.eye(d, dtype=complex)
    if m != 0:
        swap[[0, m]] = swap[[m, 0]]
    v = u.matrix @ swap @ dagger(u.matrix) @ negation_shift(d, m).matrix
    return make_gate(v, (d,), f"V[{m}]")


def nguyen_bases(a: float, b: float, gamma: float) -> tuple[np.ndarray, np.ndarray, GateMatrix]:
    """Measurement bases and phase gate of the ancilla-assisted qubit baseline.

    Returns the mu-basis (columns a|0>+b|1>, b|0>-a|1>), the nu-basis
    (columns (|0>+e^{i gamma}|1>)/sqrt2, (e^{-i gamma}|0>-|1>)/sqrt2,
    normalized here because measurement bases must be orthonormal), and
    the phase gate P = diag(1, e^{2 i gamma}).
    """
    a, b = float(a), float(b)
    if abs(a * a + b * b - 1.0) > STRUCT_TOL:
        raise InvalidState("nguyen_bases needs a^2 + b^2 = 1")
    g = float(gamma)
    mu = np.array([[a, b], [b, -a]], dtype=complex)
    nu = np.array([[1.0, np.exp(-1j * g)], [np.exp(1j * g), -1.0]], dtype=complex) / np.sqrt(2.0)
    phase = make_gate(np.diag([1.0, np.exp(2j * g)]), (2,), "P_C")
    return mu, nu, phase
