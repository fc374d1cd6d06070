"""Spherical means for the linear part of the wave-equation representation.

The solution of the free wave equation at a spacetime point (t, x) can be
written as an average over the backward light cone's sphere of radius r0:

    u(t, x) = (1/4pi) Int_{S^2} dOmega [ r0 du/dt + r0 du/dr + u ]

with the integrand evaluated at the retarded time t - r0 on the sphere
x + r0 n.  This module discretizes the sphere average with a product
quadrature and validates the representation against analytic free waves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SphereQuadrature:
    """Unit-sphere quadrature: Gauss-Legendre in the polar angle crossed
    with a trapezoid rule in azimuth.  Weights sum to 4pi."""

    nodes: np.ndarray     # (n_nodes, 3) unit vectors
    weights: np.ndarray   # (n_nodes,) positive, sum 4pi
    order: int

    @classmethod
    def build(cls, order: int) -> "SphereQuadrature":
        if order < 1:
            raise ValueError("quadrature order must be >= 1")
        mu, wmu = np.polynomial.legendre.leggauss(order)   # mu = cos(theta)
        n_az = 2 * order
        phi = 2.0 * np.pi * np.arange(n_az) / n_az
        w_az = 2.0 * np.pi / n_az
        sin_t = np.sqrt(1.0 - mu**2)
        nodes = np.empty((order * n_az, 3))
        weights = np.empty(order * n_az)
        k = 0
        for i in range(order):
            for j in range(n_az):
                nodes[k] = (sin_t[i] * np.cos(phi[j]),
                            sin_t[i] * np.sin(phi[j]), mu[i])
                weights[k] = wmu[i] * w_az
                k += 1
        return cls(nodes=nodes, weights=weights, order=order)


class AnalyticField:
    """Scalar field u(t, x) with analytic time derivative and gradient."""

    def value(self, t: float, x: np.ndarray) -> float:
        raise NotImplementedError

    def d_t(self, t: float, x: np.ndarray) -> float:
        raise NotImplementedError

    def grad(self, t: float, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class Constant(AnalyticField):
    def __init__(self, c: float):
        self.c = float(c)

    def value(self, t, x):
        return self.c

    def d_t(self, t, x):
        return 0.0

    def grad(self, t, x):
        return np.zeros(3)


class LinearTime(AnalyticField):
    """u = t, a polynomial solution of the wave equation."""

    def value(self, t, x):
        return float(t)

    def d_t(self, t, x):
        return 1.0

    def grad(self, t, x):
        return np.zeros(3)


class PlaneWave(AnalyticField):
    """u = amp * cos(k.x - |k| t + phase), a free wave for any k."""

    def __init__(self, k, amplitude: float = 1.0, phase: float = 0.0):
        self.k = np.asarray(k, dtype=float)
        self.omega = float(np.linalg.norm(self.k))
        self.amplitude = float(amplitude)
        self.phase = float(phase)

    def _arg(self, t, x):
        return float(self.k @ np.asarray(x, dtype=float)) - self.omega * t + self.phase

    def value(self, t, x):
        return self.amplitude * np.cos(self._arg(t, x))

    def d_t(self, t, x):
        return self.amplitude * self.omega * np.sin(self._arg(t, x))

    def grad(self, t, x):
        return -self.amplitude * np.sin(self._arg(t, x)) * self.k


class Superposition(AnalyticField):
    def __init__(self, *parts: AnalyticField):
        self.parts = parts

    def value(self, t, x):
        return sum(p.value(t, x) for p in self.parts)

    def d_t(self, t, x):
        return sum(p.d_t(t, x) for p in self.parts)

    def grad(self, t, x):
        return sum((p.grad(t, x) for p in self.parts), np.zeros(3))


class SampledField(AnalyticField):
    """Adapter for fields only available as callables u(t, x); derivatives
    by 4th-order central differences with step h."""

    def __init__(self, fn, h: float = 1e-3):
        self.fn = fn
        self.h = float(h)

    def value(self, t, x):
        return float(self.fn(t, x))

    def d_t(self, t, x):
        h, f = self.h, self.fn
        return float(-f(t + 2 * h, x) + 8 * f(t + h, x)
                     - 8 * f(t - h, x) + f(t - 2 * h, x)) / (12.0 * h)

    def grad(self, t, x):
        h, f = self.h, self.fn
        x = np.asarray(x, dtype=float)
        out = np.zeros(3)
        for i in range(3):
            e = np.zeros(3)
            e[i] = 1.0
            out[i] = (-f(t, x + 2 * h * e) + 8 * f(t, x + h * e)
                      - 8 * f(t, x - h * e) + f(t, x - 2 * h * e)) / (12.0 * h)
        return out


def kirchhoff_lin(u: AnalyticField, p, r0: float, quad: SphereQuadrature) -> float:
    """Sphere-average representation value at the spacetime point p = (t, x).

    Evaluates (1/4pi) sum_q w_q [r0 du/dt + r0 n.grad u + u] at the retarded
    time t - r0 on the sphere x + r0 n_q.  For u solving the free wave
    equation the result equals u(t, x) up to quadrature error.
    """
    t_p = float(p[0])
    x_p = np.asarray(p[1], dtype=float)
    if r0 <= 0:
        raise ValueError("sphere radius r0 must be positive")
    t0 = t_p - r0
    total = 0.0
    for n, w in zip(quad.nodes, quad.weights):
        y = x_p + r0 * n
        total += w * (r0 * u.d_t(t0, y) + r0 * float(n @ u.grad(t0, y))
                      + u.value(t0, y))
    return total / (4.0 * np.pi)


def kirchhoff_residual_scan(u: AnalyticField, points, r0_list,
                            quad: SphereQuadrature):
    """Max |representation - exact| over a grid of points and radii.

    Returns (max_residual, rows) with one (point, r0, residual) row each.
    """
    rows = []
    worst = 0.0
    for p in points:
        for r0 in r0_list:
            approx = kirchhoff_lin(u, p, r0, quad)
            exact = u.value(float(p[0]), np.asarray(p[1], dtype=float))
            res = abs(approx - exact)
            rows.append((p, r0, res))
            worst = max(worst, res)
    return worst, rows
