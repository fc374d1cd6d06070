"""Shipped initial-data scenarios.

Every scenario returns a fully constructed model plus a band-limited initial
state (only lattice-resolvable wavenumbers), so dx-refinement studies of the
same scenario converge at the stencil order.
"""

from __future__ import annotations

import numpy as np

from .couplings import constant_couplings, saturating_couplings
from .dynamics import ModelSpec
from .errors import ValidationError
from .kahler import flat_family, quartic_family
from .lattice import FieldState, LatticeSpec, zero_state
from .potentials import polynomial

SCENARIOS = ("vacuum", "free_maxwell_wave", "free_scalar_wave",
             "gaussian_pulse", "interacting_demo")


def _free_model(stencil_order: int = 2) -> ModelSpec:
    """Uncharged flat-target model with identity couplings and V = 0."""
    return ModelSpec(charges=np.zeros(1), couplings=constant_couplings(1),
                     kahler=flat_family(), potential=polynomial(0.0),
                     n_gauge=1, n_scalar=1, stencil_order=stencil_order)


def _interacting_model(stencil_order: int = 2) -> ModelSpec:
    """Two gauge fields, two scalars, saturating h, nonzero k, quartic
    target correction, quartic potential."""
    return ModelSpec(
        charges=np.array([1.0, -0.5]),
        couplings=saturating_couplings(
            2, h_base=[[2.0, 0.3], [0.3, 1.5]], h_mod=[[0.2, 0.1], [0.1, 0.3]],
            h_amplitude=0.5, k_base=[[0.1, 0.05], [0.05, -0.1]],
            k_mod=[[0.05, 0.0], [0.0, 0.05]], k_amplitude=0.3),
        kahler=quartic_family(),
        potential=polynomial(0.0, 0.0, 1.0),
        n_gauge=2, n_scalar=2, stencil_order=stencil_order)


def make_model(name: str, stencil_order: int = 2) -> ModelSpec:
    if name not in SCENARIOS:
        raise ValidationError(f"unknown scenario {name!r}; choose from {SCENARIOS}")
    if name == "interacting_demo":
        return _interacting_model(stencil_order)
    return _free_model(stencil_order)


def make_state(name: str, lattice: LatticeSpec, model: ModelSpec,
               params: dict | None = None, seed: int = 0) -> FieldState:
    params = dict(params or {})
    amp = float(params.pop("amplitude", _default_amplitude(name)))
    mode = int(params.pop("mode", 1))
    width = float(params.pop("width", 0.1))
    if params:
        raise ValidationError(f"unknown scenario parameters {sorted(params)}")

    length = lattice.dims[0] * lattice.dx
    k = 2.0 * np.pi * mode / length
    x = lattice.axis_coordinates(0)[:, None, None]
    st = zero_state(lattice, model.n_gauge, model.n_scalar)

    if name == "vacuum":
        return st

    if name == "free_maxwell_wave":
        # traveling wave A_y(t,x) = amp sin(k(x - t)), E = -dA/dt
        st.A[0, 1] = amp * np.sin(k * x)
        st.E[0, 1] = amp * k * np.cos(k * x)
        return st

    if name == "free_scalar_wave":
        # standing wave phi(t,x) = amp cos(kx) cos(kt)
        st.phi[0] = amp * np.cos(k * x) * np.ones(lattice.dims)
        return st

    if name == "gaussian_pulse":
        # band-limited pulse: gaussian spectral envelope, seeded phases
        rng = np.random.default_rng(seed)
        m_max = max(lattice.dims[0] // 4, 2)
        field = np.zeros(lattice.dims)
        for m in range(1, m_max + 1):
            c = np.exp(-((m * width) ** 2))
            if c < 1e-14:
                break
            theta = rng.uniform(0.0, 2.0 * np.pi)
            field = field + c * np.cos(2.0 * np.pi * m * x / length + theta)
        field *= amp / max(np.max(np.abs(field)), 1e-300)
        st.phi[0] = field * np.ones(lattice.dims)
        return st

    # interacting_demo
    st.A[0, 1] = amp * np.sin(k * x)
    st.A[1, 2] = 0.6 * amp * np.cos(2 * k * x)
    st.E[0, 1] = 0.8 * amp * k * np.cos(k * x)
    st.E[1, 2] = -0.4 * amp * k * np.sin(k * x)
    ones = np.ones(lattice.dims)
    st.phi[0] = 2 * amp * np.exp(1j * k * x) * ones
    st.phi[1] = amp * (np.cos(k * x) + 0.5j * np.sin(2 * k * x)) * ones
    st.pi[0] = 1j * amp * np.exp(1j * k * x) * ones
    st.pi[1] = 0.4 * amp * ones.astype(complex)
    return st


def _default_amplitude(name: str) -> float:
    return {"vacuum": 0.0, "free_maxwell_wave": 0.01, "free_scalar_wave": 0.01,
            "gaussian_pulse": 0.05, "interacting_demo": 0.05}[name]


def build(name: str, lattice: LatticeSpec, params: dict | None = None,
          seed: int = 0, stencil_order: int = 2):
    model = make_model(name, stencil_order)
    state = make_state(name, lattice, model, params, seed)
    return model, state
