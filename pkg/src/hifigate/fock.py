"""Sparse, exact Fock-space state algebra over a fixed set of optical modes.

A state is a sparse map from occupation tuples (photon count per mode) to
complex amplitudes. Mode unitaries act on creation operators and are lifted
to multi-photon states by exact multinomial expansion of the transformed
creation-operator polynomial, so every operation here is exact up to
floating-point roundoff; there is no truncation and no sampling.

Everything is immutable after construction and every operation is a pure
function returning a new state. The module is desk-scale by design (of order
eight modes and eight photons in a transformed register); a configurable
term cap converts runaway basis growth into a BasisSizeError instead of
memory exhaustion.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

Occupation = tuple[int, ...]

PRUNE_THRESHOLD = 1e-14
NORM_ATOL = 1e-10
UNITARY_ATOL = 1e-12
DEFAULT_BASIS_CAP = 10_000_000

# Loose gate used when an operation requires a normalized input. Catches
# misuse without tripping on roundoff accumulated across chains of ops.
_NORM_PRECONDITION_ATOL = 1e-8


class BasisSizeError(RuntimeError):
    """Raised when an operation would exceed the configured term cap."""


class FockState:
    """Sparse superposition over occupation tuples on ``mode_count`` modes.

    Amplitudes with magnitude below ``prune`` are dropped on construction.
    The amplitude map should be treated as read-only; operations never
    mutate an existing state.
    """

    __slots__ = ("mode_count", "_amps")

    def __init__(
        self,
        mode_count: int,
        amplitudes: Mapping[Occupation, complex] | Iterable[tuple[Occupation, complex]],
        *,
        prune: float = PRUNE_THRESHOLD,
    ) -> None:
        mode_count = int(mode_count)
        if mode_count < 0:
            raise ValueError("mode_count must be nonnegative")
        items = amplitudes.items() if isinstance(amplitudes, Mapping) else amplitudes
        amps: dict[Occupation, complex] = {}
        for occ, amp in items:
            occ = tuple(occ)
            if len(occ) != mode_count:
                raise ValueError(f"occupation {occ} does not have {mode_count} entries")
            if occ and min(occ) < 0:
                raise ValueError(f"occupation {occ} has a negative photon count")
            a = complex(amp)
            if abs(a) >= prune and a != 0:
                amps[occ] = a
        self.mode_count = mode_count
        self._amps = amps

    @property
    def amplitudes(self) -> Mapping[Occupation, complex]:
        return MappingProxyType(self._amps)

    def amplitude(self, occupation: Sequence[int]) -> complex:
        return self._amps.get(tuple(occupation), 0j)

    def norm(self) -> float:
        return math.sqrt(math.fsum(a.real * a.real + a.imag * a.imag for a in self._amps.values()))

    def normalized(self) -> "FockState":
        n = self.norm()
        if n == 0:
            raise ValueError("cannot normalize the zero state")
        return FockState(self.mode_count, {k: v / n for k, v in self._amps.items()}, prune=0.0)

    def scaled(self, factor: complex) -> "FockState":
        return FockState(self.mode_count, {k: v * factor for k, v in self._amps.items()}, prune=0.0)

    def __len__(self) -> int:
        return len(self._amps)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        head = ", ".join(f"{occ}: {amp:.4g}" for occ, amp in sorted(self._amps.items())[:4])
        more = "" if len(self._amps) <= 4 else f", ... ({len(self._amps)} terms)"
        return f"FockState({self.mode_count} modes, {{{head}{more}}})"


def basis_state(occupation: Sequence[int]) -> FockState:
    """Single occupation pattern with amplitude one."""
    occ = tuple(int(c) for c in occupation)
    if any(c < 0 for c in occ):
        raise ValueError("photon counts must be nonnegative")
    return FockState(len(occ), {occ: 1.0 + 0j})


def vacuum(mode_count: int) -> FockState:
    return basis_state((0,) * mode_count)


def _require_normalized(state: FockState) -> None:
    if abs(state.norm() - 1.0) > _NORM_PRECONDITION_ATOL:
        raise ValueError(f"expected a normalized state, got norm {state.norm():.6g}")


def _require_positions(positions: Sequence[int], mode_count: int) -> tuple[int, ...]:
    out = tuple(int(i) for i in positions)
    if len(set(out)) != len(out):
        raise ValueError(f"duplicate mode indices in {out}")
    for i in out:
        if not 0 <= i < mode_count:
            raise ValueError(f"mode index {i} out of range for {mode_count} modes")
    return out


def tensor(a: FockState, b: FockState, *, basis_cap: int = DEFAULT_BASIS_CAP) -> FockState:
    """Tensor product, concatenating mode registers (a's modes first)."""
    _require_normalized(a)
    _require_normalized(b)
    if len(a) * len(b) > basis_cap:
        raise BasisSizeError(f"tensor product would hold {len(a) * len(b)} terms (cap {basis_cap})")
    out: dict[Occupation, complex] = {}
    for ka, va in a._amps.items():
        for kb, vb in b._amps.items():
            out[ka + kb] = va * vb
    return FockState(a.mode_count + b.mode_count, out)


def permute_modes(state: FockState, order: Sequence[int]) -> FockState:
    """Reorder modes: entry i of the result is the occupation of mode order[i]."""
    perm = tuple(int(i) for i in order)
    if sorted(perm) != list(range(state.mode_count)):
        raise ValueError("order must be a permutation of all mode indices")
    out = {tuple(occ[i] for i in perm): amp for occ, amp in state._amps.items()}
    return FockState(state.mode_count, out)


@dataclass(frozen=True)
class ModeUnitary:
    """Unitary matrix acting on creation operators of equally many modes.

    Entry (p, l) is the coefficient with which input mode l feeds output
    mode p. Unitarity is checked on construction.
    """

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise ValueError("mode unitary must be a square matrix over at least one mode")
        dev = float(np.max(np.abs(m @ m.conj().T - np.eye(m.shape[0]))))
        if dev > UNITARY_ATOL:
            raise ValueError(f"matrix is not unitary (max deviation {dev:.3e})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        columns = tuple(tuple(complex(x) for x in m[:, col]) for col in range(m.shape[0]))
        object.__setattr__(self, "_columns", columns)
        object.__setattr__(self, "_lift_cache", {})

    @property
    def dimension(self) -> int:
        return int(self.matrix.shape[0])

    def dagger(self) -> "ModeUnitary":
        return ModeUnitary(self.matrix.conj().T)

    def _lift(self, selected: Occupation) -> dict[Occupation, complex]:
        """Output amplitudes for photons entering with counts ``selected``.

        Expands prod_l (sum_p u[p,l] a_p^dag)^{s_l} / sqrt(prod_l s_l!)
        against the vacuum by repeated multiplication with one linear form
        per photon; the multinomial weights accumulate automatically and
        the result carries the sqrt(t_p!) factors of the output kets.
        """
        cached = self._lift_cache.get(selected)
        if cached is not None:
            return cached
        dim = self.dimension
        poly: dict[Occupation, complex] = {(0,) * dim: 1.0 + 0j}
        for col, count in enumerate(selected):
            column = self._columns[col]
            for _ in range(count):
                nxt: dict[Occupation, complex] = {}
                for pattern, coeff in poly.items():
                    for p in range(dim):
                        u = column[p]
                        if u == 0:
                            continue
                        bumped = pattern[:p] + (pattern[p] + 1,) + pattern[p + 1 :]
                        nxt[bumped] = nxt.get(bumped, 0j) + coeff * u
                poly = nxt
        denom = math.sqrt(math.prod(math.factorial(s) for s in selected))
        out: dict[Occupation, complex] = {}
        for pattern, coeff in poly.items():
            if coeff == 0:
                continue
            scale = math.sqrt(math.prod(math.factorial(t) for t in pattern)) / denom
            out[pattern] = coeff * scale
        self._lift_cache[selected] = out
        return out


@lru_cache(maxsize=128)
def dft_unitary(m: int) -> ModeUnitary:
    """Discrete-Fourier mode mixer: entry (p, l) is exp(2 pi i p l / m) / sqrt(m)."""
    if m < 1:
        raise ValueError("the transform needs at least one mode")
    grid = np.outer(np.arange(m), np.arange(m))
    return ModeUnitary(np.exp(2j * np.pi * grid / m) / np.sqrt(m))


def apply_mode_unitary(
    state: FockState,
    unitary: ModeUnitary,
    modes: Sequence[int],
    *,
    basis_cap: int = DEFAULT_BASIS_CAP,
) -> FockState:
    """Apply a mode unitary to the listed modes of a normalized state.

    Mode ``modes[l]`` of the state feeds input column l of the matrix.
    Photon number on the transformed subset is conserved term by term.
    """
    positions = _require_positions(modes, state.mode_count)
    if len(positions) != unitary.dimension:
        raise ValueError(
            f"unitary acts on {unitary.dimension} modes but {len(positions)} were given"
        )
    _require_normalized(state)
    out: dict[Occupation, complex] = {}
    for occ, amp in state._amps.items():
        selected = tuple(occ[i] for i in positions)
        template = list(occ)
        for pattern, coeff in unitary._lift(selected).items():
            for i, pos in enumerate(positions):
                template[pos] = pattern[i]
            key = tuple(template)
            out[key] = out.get(key, 0j) + amp * coeff
        if len(out) > basis_cap:
            raise BasisSizeError(f"transformed state exceeds the term cap ({basis_cap})")
    return FockState(state.mode_count, out)


def phase_shift(state: FockState, mode: int, phase: float) -> FockState:
    """Phase shifter on one mode: each term gains exp(i * phase * photon count)."""
    (position,) = _require_positions([mode], state.mode_count)
    out = {
        occ: amp * cmath.exp(1j * phase * occ[position])
        for occ, amp in state._amps.items()
    }
    return FockState(state.mode_count, out, prune=0.0)


def cyclic_shift(state: FockState, modes: Sequence[int]) -> FockState:
    """Translate occupations one position rightward along the listed modes, wrapping."""
    positions = _require_positions(modes, state.mode_count)
    span = len(positions)
    out: dict[Occupation, complex] = {}
    for occ, amp in state._amps.items():
        new = list(occ)
        for i, src in enumerate(positions):
            new[positions[(i + 1) % span]] = occ[src]
        out[tuple(new)] = amp
    return FockState(state.mode_count, out, prune=0.0)


@dataclass(frozen=True)
class MeasurementOutcome:
    """One photon-counting result: the pattern seen, its probability, and the
    normalized state left on the unmeasured modes (in their original order)."""

    pattern: Occupation
    probability: float
    post_state: FockState


def measure_photon_numbers(state: FockState, modes: Sequence[int]) -> list[MeasurementOutcome]:
    """Exhaustive photon-number measurement on a subset of modes.

    Returns one outcome per observed pattern with probability above 1e-14,
    sorted lexicographically by pattern. Probabilities over the full support
    sum to one.
    """
    positions = _require_positions(modes, state.mode_count)
    _require_normalized(state)
    chosen = set(positions)
    rest = [i for i in range(state.mode_count) if i not in chosen]
    groups: dict[Occupation, dict[Occupation, complex]] = {}
    for occ, amp in state._amps.items():
        pat = tuple(occ[i] for i in positions)
        rest_occ = tuple(occ[i] for i in rest)
        groups.setdefault(pat, {})[rest_occ] = amp
    outcomes: list[MeasurementOutcome] = []
    for pat in sorted(groups):
        sub = groups[pat]
        prob = math.fsum(a.real * a.real + a.imag * a.imag for a in sub.values())
        if prob <= 1e-14:
            continue
        scale = 1.0 / math.sqrt(prob)
        post = FockState(len(rest), {k: v * scale for k, v in sub.items()}, prune=0.0)
        outcomes.append(MeasurementOutcome(pat, prob, post))
    return outcomes


def inner_product(a: FockState, b: FockState) -> complex:
    """Hilbert-space inner product, conjugate-linear in the first argument."""
    if a.mode_count != b.mode_count:
        raise ValueError("states live on different mode counts")
    small, large = (a._amps, b._amps) if len(a) <= len(b) else (b._amps, a._amps)
    total = 0j
    for occ in small:
        va = a._amps.get(occ)
        vb = b._amps.get(occ)
        if va is not None and vb is not None:
            total += va.conjugate() * vb
    return total


@dataclass(frozen=True)
class DensityMatrix:
    """Reduced density matrix over an explicit occupation basis.

    ``basis[i]`` labels row/column i with the kept-mode occupation pattern.
    Hermiticity, unit trace, and positivity are validated on construction.
    """

    basis: tuple[Occupation, ...]
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=complex)
        d = len(self.basis)
        if m.shape != (d, d):
            raise ValueError("matrix shape does not match the basis")
        if float(np.max(np.abs(m - m.conj().T))) > 1e-12:
            raise ValueError("density matrix is not Hermitian")
        if abs(float(np.trace(m).real) - 1.0) > NORM_ATOL:
            raise ValueError(f"density matrix trace {np.trace(m).real:.6g} is not 1")
        if d and float(np.min(np.linalg.eigvalsh(m))) < -1e-10:
            raise ValueError("density matrix has a significantly negative eigenvalue")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "basis", tuple(tuple(b) for b in self.basis))

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def purity(self) -> float:
        # tr(rho^2) equals the squared Frobenius norm for a Hermitian matrix
        return float(np.sum(np.abs(self.matrix) ** 2))


def reduced_density_matrix(
    state: FockState,
    keep: Sequence[int],
    *,
    basis_cap: int = DEFAULT_BASIS_CAP,
) -> DensityMatrix:
    """Trace out all modes except ``keep`` (basis rows follow the given order)."""
    positions = _require_positions(keep, state.mode_count)
    _require_normalized(state)
    chosen = set(positions)
    rest = [i for i in range(state.mode_count) if i not in chosen]
    by_rest: dict[Occupation, list[tuple[Occupation, complex]]] = {}
    kept_patterns: set[Occupation] = set()
    for occ, amp in state._amps.items():
        kp = tuple(occ[i] for i in positions)
        rp = tuple(occ[i] for i in rest)
        by_rest.setdefault(rp, []).append((kp, amp))
        kept_patterns.add(kp)
    if len(kept_patterns) > basis_cap:
        raise BasisSizeError(f"kept subsystem needs {len(kept_patterns)} basis states (cap {basis_cap})")
    basis = tuple(sorted(kept_patterns))
    index = {b: i for i, b in enumerate(basis)}
    rho = np.zeros((len(basis), len(basis)), dtype=complex)
    for entries in by_rest.values():
        vec = np.zeros(len(basis), dtype=complex)
        for kp, amp in entries:
            vec[index[kp]] += amp
        rho += np.outer(vec, vec.conj())
    return DensityMatrix(basis, rho)


def max_amplitude_difference(
    a: FockState, b: FockState, *, up_to_global_phase: bool = True
) -> float:
    """Largest absolute amplitude difference, optionally after aligning the
    global phase on a's largest-magnitude term."""
    if a.mode_count != b.mode_count:
        raise ValueError("states live on different mode counts")
    factor = 1.0 + 0j
    if up_to_global_phase and a._amps:
        ref = max(a._amps, key=lambda k: abs(a._amps[k]))
        ra = a._amps[ref]
        rb = b._amps.get(ref, 0j)
        if abs(ra) > 0 and abs(rb) > 0:
            factor = rb / ra
            factor /= abs(factor)
    keys = set(a._amps) | set(b._amps)
    return max(
        (abs(factor * a._amps.get(k, 0j) - b._amps.get(k, 0j)) for k in keys),
        default=0.0,
    )


def states_allclose(
    a: FockState, b: FockState, atol: float = NORM_ATOL, *, up_to_global_phase: bool = True
) -> bool:
    """Amplitude-wise equality, by default insensitive to one global phase."""
    return max_amplitude_difference(a, b, up_to_global_phase=up_to_global_phase) <= atol
