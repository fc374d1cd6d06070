"""Gauge-coupling matrix families h(Psi), k(Psi) and their derivatives.

Both couplings depend on the scalars only through the amplitude
``Psi = |phi|**2``, so every evaluator takes a nonnegative scalar (or array)
``psi``.  The shipped nontrivial family is saturating,

    h(psi) = h_base + amp * tanh(psi) * h_mod ,

which is smooth, bounded with bounded derivatives on [0, inf), and collapses
to the constant family at amplitude zero.  Definiteness of h is certified
once, on construction, from ``lambda_min(h_base) > amp * ||h_mod||_2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import IndefiniteCoupling


class CouplingKind(Enum):
    CONSTANT = "constant"
    SATURATING = "saturating"


def _sym(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


@dataclass(frozen=True)
class MatrixFamily:
    """One matrix-valued function base + amp * tanh(psi) * mod."""

    kind: CouplingKind
    base: np.ndarray
    mod: np.ndarray
    amplitude: float = 1.0

    def value(self, psi):
        if self.kind is CouplingKind.CONSTANT:
            return self._broadcast(self.base, psi)
        s = self.amplitude * np.tanh(psi)
        return self.base + self._scale(s, psi)

    def prime(self, psi):
        if self.kind is CouplingKind.CONSTANT:
            return self._broadcast(np.zeros_like(self.base), psi)
        s = self.amplitude / np.cosh(psi) ** 2
        return self._scale(s, psi)

    def second(self, psi):
        if self.kind is CouplingKind.CONSTANT:
            return self._broadcast(np.zeros_like(self.base), psi)
        s = -2.0 * self.amplitude * np.tanh(psi) / np.cosh(psi) ** 2
        return self._scale(s, psi)

    def _scale(self, s, psi):
        if np.ndim(psi):
            return np.multiply.outer(np.asarray(s), self.mod).reshape(
                np.shape(psi) + self.base.shape)
        return s * self.mod

    @staticmethod
    def _broadcast(m, psi):
        if np.ndim(psi):
            return np.broadcast_to(m, np.shape(psi) + m.shape).copy()
        return m.copy()


@dataclass
class CouplingFamily:
    """The pair (h, k) of gauge-coupling matrix functions."""

    n_gauge: int
    h: MatrixFamily
    k: MatrixFamily

    def __post_init__(self):
        n = self.n_gauge
        for fam, name in ((self.h, "h"), (self.k, "k")):
            if fam.base.shape != (n, n) or fam.mod.shape != (n, n):
                raise ValueError(f"{name} matrices must be {n}x{n}")
            if not np.allclose(fam.base, fam.base.T) or not np.allclose(fam.mod, fam.mod.T):
                raise ValueError(f"{name} matrices must be symmetric")
        lam_min = float(np.linalg.eigvalsh(self.h.base)[0])
        mod_norm = abs(self.h.amplitude) * float(np.linalg.norm(self.h.mod, 2))
        if self.h.kind is CouplingKind.CONSTANT:
            mod_norm = 0.0
        if lam_min <= mod_norm:
            raise IndefiniteCoupling(
                f"lambda_min(h_base) = {lam_min:.6g} does not dominate "
                f"amp*||h_mod|| = {mod_norm:.6g}")


def constant_couplings(n_gauge: int, h: np.ndarray | None = None,
                       k: np.ndarray | None = None) -> CouplingFamily:
    hb = _sym(np.asarray(h, dtype=float)) if h is not None else np.eye(n_gauge)
    kb = _sym(np.asarray(k, dtype=float)) if k is not None else np.zeros((n_gauge, n_gauge))
    z = np.zeros((n_gauge, n_gauge))
    return CouplingFamily(
        n_gauge,
        MatrixFamily(CouplingKind.CONSTANT, hb, z),
        MatrixFamily(CouplingKind.CONSTANT, kb, z))


def saturating_couplings(n_gauge: int, h_base=None, h_mod=None, h_amplitude=1.0,
                         k_base=None, k_mod=None, k_amplitude=1.0) -> CouplingFamily:
    n = n_gauge
    hb = _sym(np.asarray(h_base, dtype=float)) if h_base is not None else np.eye(n)
    hm = _sym(np.asarray(h_mod, dtype=float)) if h_mod is not None else np.zeros((n, n))
    kb = _sym(np.asarray(k_base, dtype=float)) if k_base is not None else np.zeros((n, n))
    km = _sym(np.asarray(k_mod, dtype=float)) if k_mod is not None else np.zeros((n, n))
    return CouplingFamily(
        n,
        MatrixFamily(CouplingKind.SATURATING, hb, hm, h_amplitude),
        MatrixFamily(CouplingKind.SATURATING, kb, km, k_amplitude))


# -- flat evaluator API ------------------------------------------------------

def eval_h(family: CouplingFamily, psi):
    return family.h.value(psi)


def eval_h_inverse(family: CouplingFamily, psi):
    return np.linalg.inv(eval_h(family, psi))


def eval_h_prime(family: CouplingFamily, psi):
    return family.h.prime(psi)


def eval_h_second(family: CouplingFamily, psi):
    return family.h.second(psi)


def eval_k(family: CouplingFamily, psi):
    return family.k.value(psi)


def eval_k_prime(family: CouplingFamily, psi):
    return family.k.prime(psi)


def eval_k_second(family: CouplingFamily, psi):
    return family.k.second(psi)
