"""Coefficient profiles and the entangled ancilla states built from them.

A profile assigns a real coefficient f(j) to each of the n+1 terms of the
teleportation ancilla; f is zero outside 0..n. The single-qubit ancilla on
2n modes (registers x then y) superposes, for j = 0..n, the pattern with
the first j x-modes occupied and the last n-j y-modes occupied:

    sum_j f(j) |1>^j |0>^(n-j) (x)  |0>^j |1>^(n-j) (y)

Two-qubit variants live on 4n modes (x, y, x', y'). The controlled-sign
ancilla weights term (j, j') by (-1)^(j j') f(j) f(j'); the direct-CNOT
ancilla instead XORs the y' pattern with the y pattern (controls in y,
targets in y'), which is the construction whose residual entanglement
breaks the gate.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .fock import FockState, Occupation

PROFILE_LABELS = ("uniform", "linear", "sine", "custom", "optimized")
CNOT_PAIRINGS = ("matched", "all_pairs")


@dataclass(frozen=True)
class CoefficientProfile:
    """Normalized ancilla coefficients f(0)..f(n) plus the label of the
    builder that produced them."""

    n: int
    values: tuple[float, ...]
    label: str = "custom"

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("a profile needs n >= 1")
        if self.label not in PROFILE_LABELS:
            raise ValueError(f"unknown profile label {self.label!r}")
        vals = tuple(float(v) for v in self.values)
        if len(vals) != self.n + 1:
            raise ValueError(f"expected {self.n + 1} coefficients, got {len(vals)}")
        norm_sq = math.fsum(v * v for v in vals)
        if abs(norm_sq - 1.0) > 1e-12:
            raise ValueError(f"profile is not normalized (sum of squares {norm_sq:.15g})")
        object.__setattr__(self, "values", vals)

    def f(self, j: int) -> float:
        """Coefficient at index j, zero outside 0..n."""
        if 0 <= j <= self.n:
            return self.values[j]
        return 0.0

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=float)


def profile_uniform(n: int) -> CoefficientProfile:
    """Equal weights 1/sqrt(n+1); all accepted branches are then exact."""
    if n < 1:
        raise ValueError("uniform profile needs n >= 1")
    v = 1.0 / math.sqrt(n + 1)
    return CoefficientProfile(n, (v,) * (n + 1), "uniform")


def profile_linear(n: int) -> CoefficientProfile:
    """Triangle profile: proportional to min(j, n-j), zero at both ends.

    Even n gives a single apex at n/2; odd n gives the natural two-point
    plateau at (n-1)/2 and (n+1)/2.
    """
    if n < 2:
        raise ValueError("linear profile needs n >= 2")
    raw = np.minimum(np.arange(n + 1), n - np.arange(n + 1)).astype(float)
    raw /= np.linalg.norm(raw)
    return CoefficientProfile(n, tuple(raw), "linear")


def profile_sine(n: int) -> CoefficientProfile:
    """Half-period sine sampled with one empty point beyond each end:
    f(j) proportional to sin(pi (j+1) / (n+2))."""
    if n < 1:
        raise ValueError("sine profile needs n >= 1")
    raw = np.sin(np.pi * (np.arange(n + 1) + 1) / (n + 2))
    raw /= np.linalg.norm(raw)
    return CoefficientProfile(n, tuple(raw), "sine")


def custom_profile(values: Sequence[float], *, label: str = "custom") -> CoefficientProfile:
    """Profile from raw coefficients, renormalizing and warning when the
    input is off normalization by more than 1e-6."""
    raw = np.asarray(list(values), dtype=float)
    if raw.ndim != 1 or raw.size < 2:
        raise ValueError("a profile needs at least two coefficients")
    norm = float(np.linalg.norm(raw))
    if norm == 0.0:
        raise ValueError("profile coefficients are all zero")
    if abs(norm * norm - 1.0) > 1e-6:
        warnings.warn(
            f"profile renormalized (sum of squares was {norm * norm:.6g})",
            stacklevel=2,
        )
    raw = raw / norm
    return CoefficientProfile(raw.size - 1, tuple(raw), label)


def load_profile(path: str | Path) -> CoefficientProfile:
    """Read a profile from a JSON array of n+1 reals."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, list) or not all(isinstance(x, (int, float)) for x in data):
        raise ValueError(f"{path}: expected a JSON array of numbers")
    return custom_profile(data)


def save_profile(profile: CoefficientProfile, path: str | Path) -> None:
    """Write the coefficients as a JSON array (round-trips through load_profile)."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(list(profile.values), fh)
        fh.write("\n")


def _x_pattern(n: int, j: int) -> Occupation:
    return (1,) * j + (0,) * (n - j)


def _y_pattern(n: int, j: int) -> Occupation:
    return (0,) * j + (1,) * (n - j)


def single_ancilla_state(profile: CoefficientProfile) -> FockState:
    """Teleportation ancilla on 2n modes (x register then y register)."""
    n = profile.n
    amps = {
        _x_pattern(n, j) + _y_pattern(n, j): profile.f(j)
        for j in range(n + 1)
    }
    return FockState(2 * n, amps)


def cz_ancilla_state(p: CoefficientProfile, p2: CoefficientProfile) -> FockState:
    """Controlled-sign ancilla on 4n modes (x, y, x', y'), with the sign
    (-1)^(j j') multiplying term (j, j')."""
    if p.n != p2.n:
        raise ValueError("both profiles must share the same n")
    n = p.n
    amps: dict[Occupation, complex] = {}
    for j in range(n + 1):
        left = _x_pattern(n, j) + _y_pattern(n, j)
        for j2 in range(n + 1):
            sign = -1.0 if (j * j2) % 2 else 1.0
            amps[left + _x_pattern(n, j2) + _y_pattern(n, j2)] = sign * p.f(j) * p2.f(j2)
    return FockState(4 * n, amps)


def cnot_ancilla_state(
    p: CoefficientProfile,
    p2: CoefficientProfile,
    pairing: str = "matched",
) -> FockState:
    """Direct-CNOT ancilla on 4n modes: pairwise CNOTs with y controls and
    y' targets applied to the sign-free product ancilla.

    pairing "matched" pairs y position i with y' position i (one CNOT per
    position). pairing "all_pairs" applies a CNOT for every (control,
    target) pair, so each y' bit flips by the parity of the y photon count.
    Both readings leave the residual y' register correlated with the
    measured branches, which is what spoils the gate.
    """
    if p.n != p2.n:
        raise ValueError("both profiles must share the same n")
    if pairing not in CNOT_PAIRINGS:
        raise ValueError(f"pairing must be one of {CNOT_PAIRINGS}")
    n = p.n
    amps: dict[Occupation, complex] = {}
    for j in range(n + 1):
        y = _y_pattern(n, j)
        for j2 in range(n + 1):
            y2 = _y_pattern(n, j2)
            if pairing == "matched":
                flipped = tuple(b ^ c for b, c in zip(y2, y))
            else:
                parity = (n - j) % 2
                flipped = tuple(b ^ parity for b in y2)
            key = _x_pattern(n, j) + y + _x_pattern(n, j2) + flipped
            amps[key] = p.f(j) * p2.f(j2)
    return FockState(4 * n, amps)
