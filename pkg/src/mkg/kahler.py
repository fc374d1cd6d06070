"""Radial Kahler target-space geometry.

The scalar target metric is generated by a radial potential ``Phi(r)`` of the
field amplitude ``r = |phi|``.  For such a potential the complex Hessian of
``K(phi, conj phi) = Phi(|phi|)`` takes the rank-one-corrected form

    g[a, b]    = alpha(r) * delta_ab + q(r) * conj(phi)[a] * phi[b]
    alpha(r)   = Phi'(r) / (2 r)
    q(r)       = (Phi''(r) - Phi'(r)/r) / (4 r**2)

Two candidate normalizations of the rank-one coefficient circulate in the
literature (prefactor ``1/(4r)`` versus ``1/(4r**2)``); the implementation
fixes the choice by direct comparison against a finite-difference Hessian of
``K`` (see :func:`resolve_q_normalization`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateMetric, HypothesisViolated, RadiusExceeded

R_EPS = 1e-8
DEFAULT_R_MAX = 10.0


class KahlerKind(Enum):
    FLAT = "flat"
    POLYNOMIAL_RADIAL = "polynomial_radial"
    CUSTOM = "custom"


def _poly_eval(coeffs: dict[int, float], r: np.ndarray | float):
    """Evaluate sum_k coeffs[k] * r**k (integer powers >= 0 only)."""
    out = np.zeros_like(np.asarray(r, dtype=float))
    for k, c in coeffs.items():
        if c != 0.0:
            out = out + c * np.asarray(r, dtype=float) ** k
    return out


def _poly_shift(coeffs: dict[int, float], factor, shift: int) -> dict[int, float]:
    """Map coeffs[k] r**k -> factor(k) coeffs[k] r**(k+shift), dropping zeros."""
    out: dict[int, float] = {}
    for k, c in coeffs.items():
        f = factor(k)
        if c * f != 0.0:
            out[k + shift] = out.get(k + shift, 0.0) + c * f
    return out


@dataclass
class KahlerFamily:
    """Radial Kahler potential with closed-form derivatives and bound constants.

    ``coefficients[k]`` is the coefficient of ``r**k`` in ``Phi(r)`` for the
    polynomial kinds.  Odd powers are rejected: they would make the metric
    coefficients singular at the origin.  For ``CUSTOM``, supply the callables
    ``phi_fn`` .. ``phi_ppp_fn`` instead.
    """

    kind: KahlerKind = KahlerKind.FLAT
    coefficients: tuple[float, ...] = (0.0, 0.0, 1.0)  # Phi = r**2
    bound_b: tuple[float, ...] = ()
    bound_c1: float = 0.0
    bound_c2: float = 0.0
    bound_c3: float = 0.0
    lower_c1: float | None = None
    lower_c2: float | None = None
    r_max: float = DEFAULT_R_MAX
    phi_fn: Callable | None = None
    phi_p_fn: Callable | None = None
    phi_pp_fn: Callable | None = None
    phi_ppp_fn: Callable | None = None
    _alpha_poly: dict[int, float] = field(init=False, repr=False, default_factory=dict)
    _q_poly: dict[int, float] = field(init=False, repr=False, default_factory=dict)
    _qp2r_poly: dict[int, float] = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self):
        if self.r_max <= 0:
            raise ValueError("r_max must be positive")
        if any(b < 0 for b in self.bound_b):
            raise ValueError("bound constants b_n must be nonnegative")
        if min(self.bound_c1, self.bound_c2, self.bound_c3) < 0:
            raise ValueError("bound constants C1..C3 must be nonnegative")
        if self.kind is KahlerKind.CUSTOM:
            if not all((self.phi_fn, self.phi_p_fn, self.phi_pp_fn, self.phi_ppp_fn)):
                raise ValueError("CUSTOM family needs phi_fn..phi_ppp_fn callables")
            return
        if self.kind is KahlerKind.FLAT:
            self.coefficients = (0.0, 0.0, 1.0)
        poly = {k: c for k, c in enumerate(self.coefficients) if c != 0.0}
        if any(k % 2 for k in poly):
            raise ValueError("odd powers of r are not smooth at the origin")
        # alpha = Phi'/(2r): coeff k -> k/2 * r**(k-2)
        self._alpha_poly = _poly_shift(poly, lambda k: k / 2.0, -2)
        # q = (Phi'' - Phi'/r)/(4 r**2): coeff k -> k(k-2)/4 * r**(k-4)
        self._q_poly = _poly_shift(poly, lambda k: k * (k - 2) / 4.0, -4)
        # q'/(2r): q coeff m -> m/2 * r**(m-2)
        self._qp2r_poly = _poly_shift(self._q_poly, lambda m: m / 2.0, -2)
        # smoothness already guarantees no negative exponents survive for
        # even polynomials; guard anyway for pathological inputs
        for p in (self._alpha_poly, self._q_poly, self._qp2r_poly):
            if any(k < 0 for k in p):
                raise ValueError("potential leaves metric coefficients singular at r=0")

    # -- scalar radial functions (vectorized over r) --

    def phi(self, r):
        if self.kind is KahlerKind.CUSTOM:
            return self.phi_fn(r)
        return _poly_eval({k: c for k, c in enumerate(self.coefficients)}, r)

    def phi_p(self, r):
        if self.kind is KahlerKind.CUSTOM:
            return self.phi_p_fn(r)
        poly = {k: c for k, c in enumerate(self.coefficients)}
        return _poly_eval(_poly_shift(poly, lambda k: float(k), -1), r)

    def phi_pp(self, r):
        if self.kind is KahlerKind.CUSTOM:
            return self.phi_pp_fn(r)
        poly = {k: c for k, c in enumerate(self.coefficients)}
        return _poly_eval(_poly_shift(poly, lambda k: float(k * (k - 1)), -2), r)

    def phi_ppp(self, r):
        if self.kind is KahlerKind.CUSTOM:
            return self.phi_ppp_fn(r)
        poly = {k: c for k, c in enumerate(self.coefficients)}
        return _poly_eval(_poly_shift(poly, lambda k: float(k * (k - 1) * (k - 2)), -3), r)

    def alpha(self, r):
        """Phi'/(2r), evaluated through its regular series at small r."""
        if self.kind is KahlerKind.CUSTOM:
            rr = np.maximum(np.asarray(r, dtype=float), R_EPS)
            return self.phi_p_fn(rr) / (2.0 * rr)
        return _poly_eval(self._alpha_poly, r)

    def q(self, r):
        """(Phi'' - Phi'/r)/(4 r**2), the rank-one metric coefficient."""
        if self.kind is KahlerKind.CUSTOM:
            rr = np.maximum(np.asarray(r, dtype=float), R_EPS)
            return (self.phi_pp_fn(rr) - self.phi_p_fn(rr) / rr) / (4.0 * rr**2)
        return _poly_eval(self._q_poly, r)

    def q_prime_over_2r(self, r):
        if self.kind is KahlerKind.CUSTOM:
            rr = np.maximum(np.asarray(r, dtype=float), R_EPS)
            return (self.phi_ppp_fn(rr) - 3.0 * self.phi_pp_fn(rr) / rr
                    + 3.0 * self.phi_p_fn(rr) / rr**2) / (8.0 * rr**3)
        return _poly_eval(self._qp2r_poly, r)


def flat_family(**kw) -> KahlerFamily:
    return KahlerFamily(kind=KahlerKind.FLAT, lower_c1=2.0, lower_c2=0.0, **kw)


def quartic_family(strength: float = 0.25, **kw) -> KahlerFamily:
    """Phi = r**2 + strength * r**4."""
    return KahlerFamily(kind=KahlerKind.POLYNOMIAL_RADIAL,
                        coefficients=(0.0, 0.0, 1.0, 0.0, strength),
                        lower_c1=2.0, lower_c2=0.0, **kw)


def sextic_family(strength: float = 0.1, **kw) -> KahlerFamily:
    """Phi = r**2 + strength * r**6."""
    return KahlerFamily(kind=KahlerKind.POLYNOMIAL_RADIAL,
                        coefficients=(0.0, 0.0, 1.0, 0.0, 0.0, 0.0, strength),
                        lower_c1=2.0, lower_c2=0.0, **kw)


class HermitianMatrixField:
    """Dense Hermitian matrix; storage symmetrizes so hermiticity is exact."""

    def __init__(self, entries: np.ndarray):
        m = np.asarray(entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("expected a square matrix")
        self.entries = 0.5 * (m + m.conj().T)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)

    def __matmul__(self, other):
        o = other.entries if isinstance(other, HermitianMatrixField) else other
        return self.entries @ o


def _radius(phi: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.abs(phi) ** 2)))


def _check_radius(family: KahlerFamily, r: float):
    if r > family.r_max:
        raise RadiusExceeded(f"|phi| = {r:.6g} exceeds r_max = {family.r_max:.6g}")


def kahler_metric(family: KahlerFamily, phi: Sequence[complex]) -> HermitianMatrixField:
    """Target-space metric g[a, b] at the point phi."""
    v = np.asarray(phi, dtype=complex)
    r = _radius(v)
    _check_radius(family, r)
    a = float(family.alpha(r))
    q = float(family.q(r))
    if a <= 0.0 or a + q * r**2 <= 0.0:
        raise DegenerateMetric(
            f"metric not positive definite at r = {r:.6g} (alpha = {a:.6g})")
    g = a * np.eye(v.size, dtype=complex) + q * np.outer(v.conj(), v)
    return HermitianMatrixField(g)


def kahler_metric_inverse(family: KahlerFamily, phi: Sequence[complex]) -> HermitianMatrixField:
    """Closed-form inverse metric (rank-one downdate of the diagonal)."""
    v = np.asarray(phi, dtype=complex)
    r = _radius(v)
    _check_radius(family, r)
    a = float(family.alpha(r))
    q = float(family.q(r))
    denom = a + q * r**2  # (Phi'' + Phi'/r)/4
    if a <= 0.0 or denom <= 0.0:
        raise DegenerateMetric(f"metric degenerate at r = {r:.6g}")
    ginv = np.eye(v.size, dtype=complex) / a - (q / (a * denom)) * np.outer(v.conj(), v)
    return HermitianMatrixField(ginv)


def kahler_metric_holomorphic_derivative(family: KahlerFamily,
                                         phi: Sequence[complex]) -> np.ndarray:
    """d g[a, b] / d phi[c], returned with index order [c, a, b]."""
    v = np.asarray(phi, dtype=complex)
    r = _radius(v)
    _check_radius(family, r)
    n = v.size
    q = float(family.q(r))
    qp = float(family.q_prime_over_2r(r))
    vb = v.conj()
    eye = np.eye(n)
    out = np.zeros((n, n, n), dtype=complex)
    for c in range(n):
        out[c] += q * vb[c] * eye      # delta_ab conj(phi)[c]
        out[c, :, c] += q * vb         # delta_cb conj(phi)[a]
    out += qp * vb[:, None, None] * vb[None, :, None] * v[None, None, :]
    return out


# -- finite-difference oracle ------------------------------------------------

# nested second differences lose ~eps/h^2 to roundoff, so the step is kept
# large enough that truncation and roundoff balance near 1e-12
FD_STEP = 1e-2
_FD4 = (1.0, -8.0, 8.0, -1.0)
_FD4_OFF = (-2, -1, 1, 2)


def _fd4(fun, x0: np.ndarray, i: int, h: float):
    acc = 0.0
    for w, o in zip(_FD4, _FD4_OFF):
        x = x0.copy()
        x[i] += o * h
        acc = acc + w * fun(x)
    return acc / (12.0 * h)


def hessian_oracle(family: KahlerFamily, phi: Sequence[complex],
                   step: float = FD_STEP) -> np.ndarray:
    """Complex Hessian d^2 K / (d phi[a] d conj(phi)[b]) of K = Phi(|phi|).

    Fourth-order central differences on the real coordinates, combined with
    the Wirtinger convention d/dphi = (d/dx - i d/dy)/2.  Independent of every
    closed-form path above: it only ever calls ``family.phi``.
    """
    v = np.asarray(phi, dtype=complex)
    n = v.size

    def kfun(x: np.ndarray) -> float:
        w = x[:n] + 1j * x[n:]
        return float(family.phi(np.sqrt(np.sum(np.abs(w) ** 2))))

    x0 = np.concatenate([v.real, v.imag])
    hess = np.empty((n, n), dtype=complex)
    for a in range(n):
        for b in range(n):
            dxx = _fd4(lambda x: _fd4(kfun, x, b, step), x0, a, step)
            dyy = _fd4(lambda x: _fd4(kfun, x, n + b, step), x0, n + a, step)
            dxy = _fd4(lambda x: _fd4(kfun, x, n + b, step), x0, a, step)
            dyx = _fd4(lambda x: _fd4(kfun, x, b, step), x0, n + a, step)
            hess[a, b] = 0.25 * ((dxx + dyy) + 1j * (dxy - dyx))
    return hess


def resolve_q_normalization(family: KahlerFamily, probes: Sequence[Sequence[complex]]):
    """Decide between the 1/(4r) and 1/(4r**2) rank-one prefactors.

    Returns ``(winner, report)`` where winner is the string naming the
    prefactor whose metric matches the finite-difference Hessian at every
    probe point.
    """
    errs = {"1/(4r)": 0.0, "1/(4r^2)": 0.0}
    for p in probes:
        v = np.asarray(p, dtype=complex)
        r = _radius(v)
        if r < 1e-3 or r > family.r_max:
            continue
        h = hessian_oracle(family, v)
        a = float(family.alpha(r))
        q2 = float(family.q(r))       # 1/(4 r^2) normalization
        q1 = q2 * r                   # 1/(4 r) normalization
        for name, q in (("1/(4r)", q1), ("1/(4r^2)", q2)):
            g = a * np.eye(v.size) + q * np.outer(v.conj(), v)
            scale = max(1.0, float(np.max(np.abs(h))))
            errs[name] = max(errs[name], float(np.max(np.abs(g - h))) / scale)
    winner = min(errs, key=errs.get)
    return winner, errs


# -- Radial bound report ------------------------------------------------

@dataclass
class BoundReport:
    radii: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    holds: np.ndarray
    lower_lhs: np.ndarray | None
    lower_rhs: np.ndarray | None
    lower_holds: np.ndarray | None
    b: tuple[float, ...]
    c1: float
    c2: float
    c3: float
    fitted: bool

    @property
    def all_hold(self) -> bool:
        ok = bool(np.all(self.holds))
        if self.lower_holds is not None:
            ok = ok and bool(np.all(self.lower_holds))
        return ok


def upper_bound_rhs(r, b: Sequence[float], c1: float, c2: float, c3: float):
    """Right-hand side of the potential bound built from the b_n chain."""
    r = np.asarray(r, dtype=float)
    out = 2.0 * c1 * r**3 + 0.5 * c2 * r**2 + c3
    for n, bn in enumerate(b):
        out = out + 8.0 * bn * r ** (n + 6) / ((n + 4) * (n + 5) * (n + 6))
        out = out + 12.0 * bn * r ** (n + 4) / ((n + 2) * (n + 3) * (n + 4))
    return out


def fit_bound_constants(family: KahlerFamily, radii: Sequence[float]):
    """Fit (b0,), C1, C2 with C3 = 0 from a scan of the same radii.

    b0 caps |Q'/(2r)|; C1 absorbs the slack in the first integrated bound on
    |Q|; C2 is then the smallest constant closing the potential bound on the
    scan grid.
    """
    r = np.asarray(radii, dtype=float)
    b0 = float(np.max(np.abs(family.q_prime_over_2r(r))))
    q_env = b0 * r / 1.0  # integral of b0 * r**0 -> b0 r^1 / 1
    c1 = float(max(0.0, np.max(np.abs(family.q(r)) - q_env)))
    poly = upper_bound_rhs(r, (b0,), c1, 0.0, 0.0)
    c2 = float(max(0.0, np.max(2.0 * (np.abs(family.phi(r)) - poly) / r**2)))
    return (b0,), c1, c2, 0.0


def radial_bound_check(family: KahlerFamily, radii: Sequence[float],
                       fit: bool = False) -> BoundReport:
    """Check |Phi(r)| against the integrated b_n bound at the given radii.

    Raises :class:`HypothesisViolated` when |Q'/(2r)| exceeds sum b_n r**n at
    a sampled radius.  When the family carries lower-bound constants, the
    quadratic lower bound on |Phi| is checked as well.
    """
    r = np.asarray(radii, dtype=float)
    if np.any(r <= 0) or np.any(r > family.r_max):
        raise ValueError("radii must lie in (0, r_max]")
    unconfigured = (not family.bound_b and family.bound_c1 == 0.0
                    and family.bound_c2 == 0.0 and family.bound_c3 == 0.0)
    if fit or unconfigured:
        b, c1, c2, c3 = fit_bound_constants(family, r)
        fitted = True
    else:
        b, c1, c2, c3 = family.bound_b, family.bound_c1, family.bound_c2, family.bound_c3
        fitted = False

    hyp_lhs = np.abs(family.q_prime_over_2r(r))
    hyp_rhs = np.zeros_like(r)
    for n, bn in enumerate(b):
        hyp_rhs = hyp_rhs + bn * r**n
    bad = hyp_lhs > hyp_rhs * (1.0 + 1e-12) + 1e-300
    if np.any(bad) and np.any(hyp_lhs[bad] > 0):
        i = int(np.argmax(hyp_lhs - hyp_rhs))
        raise HypothesisViolated(
            f"|Q'/(2r)| = {hyp_lhs[i]:.6g} > {hyp_rhs[i]:.6g} at r = {r[i]:.6g}")

    lhs = np.abs(family.phi(r))
    rhs = upper_bound_rhs(r, b, c1, c2, c3)
    holds = lhs <= rhs * (1.0 + 1e-12)

    lo_lhs = lo_rhs = lo_holds = None
    if family.lower_c1 is not None:
        lo_lhs = lhs
        lo_rhs = 0.5 * family.lower_c1 * r**2 + (family.lower_c2 or 0.0)
        lo_holds = lo_lhs >= lo_rhs * (1.0 - 1e-12)
    return BoundReport(r, lhs, rhs, holds, lo_lhs, lo_rhs, lo_holds,
                       tuple(b), c1, c2, c3, fitted)
