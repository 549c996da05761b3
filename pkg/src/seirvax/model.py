"""SEIR dynamics with demographic turnover and a vaccination input.

State layout is (S, E, I, R): susceptible, latent, infectious, and immune
populations, with derived total N = S + E + I + R. All rates are per day.
Transmission uses the density-scaled incidence beta*S*I/N, which makes the
vector field degree-1 homogeneous in the state.

The vaccination input V routes the newborn stream nu*N: a fraction V goes
straight to the immune compartment, the rest enters the susceptibles. V may
leave [0, 1] (the laws upstream decide whether to clamp it).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, SingularStateError

# Total population at or below this is treated as extinct rather than
# letting the incidence term divide toward infinity.
N_FLOOR = 1e-12

# Component order used everywhere a state is spelled out.
COMPONENT_NAMES = ("S", "E", "I", "R")


class StateVec(NamedTuple):
    """Population state (counts)."""

    S: float
    E: float
    I: float
    R: float

    @property
    def N(self) -> float:
        """Total population."""
        return self.S + self.E + self.I + self.R

    def as_array(self) -> np.ndarray:
        return np.array(self, dtype=float)


class StateRate(NamedTuple):
    """Time derivative of a StateVec (counts per day).

    Kept distinct from StateVec so counts and rates do not mix silently.
    """

    dS: float
    dE: float
    dI: float
    dR: float

    @property
    def dN(self) -> float:
        return self.dS + self.dE + self.dI + self.dR

    def as_array(self) -> np.ndarray:
        return np.array(self, dtype=float)


@dataclass(frozen=True)
class ModelParams:
    """Epidemiological rates (all per day) plus decomposition references.

    mu      death rate unrelated to the infection
    omega   rate of immunity loss
    beta    transmission constant
    sigma   inverse latent period
    gamma   inverse infective period
    rho     per-capita probability of death from the infection
    nu      newborn/vaccination stream rate

    I0_ref / N0_ref are the constant references used by the
    constant-plus-varying matrix split (``decompose_star``). When left unset
    the split uses a reference infectious fraction of 1, the worst case, so
    any admissible state satisfies the feasibility constraint.
    """

    mu: float
    omega: float
    beta: float
    sigma: float
    gamma: float
    rho: float
    nu: float
    I0_ref: float | None = None
    N0_ref: float | None = None

    def __post_init__(self):
        for name in ("mu", "omega", "beta", "sigma", "gamma", "rho", "nu"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ConfigError(f"{name} must be finite, got {v!r}")
            if name != "rho" and v < 0:
                raise ConfigError(f"{name} must be >= 0, got {v!r}")
        if not 0.0 <= self.rho <= 1.0:
            raise ConfigError(f"rho must be in [0, 1], got {self.rho!r}")
        if (self.I0_ref is None) != (self.N0_ref is None):
            raise ConfigError("I0_ref and N0_ref must be set together")
        if self.I0_ref is not None:
            if not (self.N0_ref >= self.I0_ref > 0):
                raise ConfigError(
                    "references must satisfy N0_ref >= I0_ref > 0, got "
                    f"I0_ref={self.I0_ref!r}, N0_ref={self.N0_ref!r}"
                )

    @property
    def immune_recovery_rate(self) -> float:
        """Rate at which infectious individuals survive into immunity."""
        return self.gamma * (1.0 - self.rho)

    @property
    def reference_infectious_fraction(self) -> float:
        """I0_ref/N0_ref, defaulting to the worst case 1."""
        if self.I0_ref is None:
            return 1.0
        return self.I0_ref / self.N0_ref

    def with_references(self, I0_ref: float, N0_ref: float) -> "ModelParams":
        return replace(self, I0_ref=I0_ref, N0_ref=N0_ref)


def _total(x) -> float:
    S, E, I, R = x
    return S + E + I + R


def _require_population(x) -> float:
    N = _total(x)
    if not N > N_FLOOR:
        raise SingularStateError(f"total population {N!r} at or below floor {N_FLOOR}")
    return N


def derivative(params: ModelParams, x: StateVec, V: float) -> StateRate:
    """Vector field of the vaccinated SEIR system.

    V is the applied vaccination signal; it is used as given and may lie
    outside [0, 1]. Raises SingularStateError when the total population is
    at or below the extinction floor.
    """
    S, E, I, R = x
    N = _require_population(x)
    incidence = params.beta * S * I / N
    births = params.nu * N
    vaccinated = births * V
    dS = -params.mu * S + params.omega * R - incidence + births - vaccinated
    dE = incidence - (params.mu + params.sigma) * E
    dI = -(params.mu + params.gamma) * I + params.sigma * E
    dR = -(params.mu + params.omega) * R + params.immune_recovery_rate * I + vaccinated
    return StateRate(dS, dE, dI, dR)


def total_population_rate(params: ModelParams, x: StateVec) -> float:
    """dN/dt = (nu - mu)*N - rho*gamma*I.

    The vaccination input cancels out of the total: it only moves the
    newborn stream between compartments.
    """
    S, E, I, R = x
    N = S + E + I + R
    return (params.nu - params.mu) * N - params.rho * params.gamma * I


def make_rate_fn(params: ModelParams):
    """Plain-float closure over the vector field for integration hot loops.

    Returns rate(S, E, I, R, V) -> (dS, dE, dI, dR), numerically identical
    to ``derivative`` but without NamedTuple construction per call. Raises
    SingularStateError at or below the extinction floor, same as
    ``derivative``.
    """
    mu = params.mu
    omega = params.omega
    beta = params.beta
    sigma = params.sigma
    gamma = params.gamma
    nu = params.nu
    g1r = params.immune_recovery_rate
    mu_sigma = mu + sigma
    mu_gamma = mu + gamma
    mu_omega = mu + omega

    def rate(S: float, E: float, I: float, R: float, V: float):
        N = S + E + I + R
        if not N > N_FLOOR:
            raise SingularStateError(
                f"total population {N!r} at or below floor {N_FLOOR}"
            )
        incidence = beta * S * I / N
        births = nu * N
        vaccinated = births * V
        return (
            -mu * S + omega * R - incidence + births - vaccinated,
            incidence - mu_sigma * E,
            -mu_gamma * I + sigma * E,
            -mu_omega * R + g1r * I + vaccinated,
        )

    return rate


class MatrixVariant(enum.Enum):
    """The eight ways the dynamics factor into matrix * state + forcing.

    The transmission bilinearity beta*S*I/N can be attributed to the S
    column (coefficient beta*I/N) or the I column (coefficient beta*S/N),
    independently for the susceptible drain and the latent gain; that gives
    four base variants. Each has a sibling with the newborn inflow folded
    into the matrix as a rank-one first-row shift (+nu in every column of
    row S) instead of living in the forcing vector.

    Enum values are the stable ids used in configs and reports.
    """

    BILINEAR_VIA_S = "A1"
    BILINEAR_VIA_I = "A2"
    SPLIT_DRAIN_I_GAIN_S = "A3"
    SPLIT_DRAIN_S_GAIN_I = "A4"
    BILINEAR_VIA_S_WITH_BIRTH = "A1_0"
    BILINEAR_VIA_I_WITH_BIRTH = "A2_0"
    SPLIT_DRAIN_I_GAIN_S_WITH_BIRTH = "A3_0"
    SPLIT_DRAIN_S_GAIN_I_WITH_BIRTH = "A4_0"

    @property
    def includes_birth_term(self) -> bool:
        return self.value.endswith("_0")

    @property
    def base(self) -> "MatrixVariant":
        """The sibling without the birth term (self if already base)."""
        return MatrixVariant(self.value[:2])


# Canonical representation used internally; the others exist for analysis
# and cross-checks.
CANONICAL_VARIANT = MatrixVariant.SPLIT_DRAIN_S_GAIN_I
CANONICAL_VARIANT_WITH_BIRTH = MatrixVariant.SPLIT_DRAIN_S_GAIN_I_WITH_BIRTH


class ForcingForm(enum.Enum):
    """How the input enters alongside a matrix variant.

    VACCINE_PLUS_BIRTH_VECTOR   affine: (-nu, 0, 0, nu)*N*V + (nu, 0, 0, 0)*N
    BIRTH_ROUTED_CONTROL        nu*N*(1-V, 0, 0, V), a nonnegative control
                                vector whenever V is in [0, 1]
    BIRTH_INSIDE_MATRIX         (-nu, 0, 0, nu)*N*V only; pairs with the
                                _WITH_BIRTH matrix variants
    """

    VACCINE_PLUS_BIRTH_VECTOR = "vaccine-plus-birth-vector"
    BIRTH_ROUTED_CONTROL = "birth-routed-control"
    BIRTH_INSIDE_MATRIX = "birth-inside-matrix"


@dataclass(frozen=True)
class DynamicsMatrix:
    """A 4x4 state matrix instance with the variant that produced it."""

    variant: MatrixVariant
    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        if e.shape != (4, 4):
            raise ConfigError(f"entries must be 4x4, got shape {e.shape}")
        object.__setattr__(self, "entries", e)


def build_matrix(params: ModelParams, x: StateVec, variant: MatrixVariant) -> DynamicsMatrix:
    """Instantaneous state matrix for the given factoring variant.

    Row/column order is (S, E, I, R).
    """
    S, E, I, R = x
    N = _require_population(x)
    foi = params.beta * I / N  # force of infection, multiplies S
    contact = params.beta * S / N  # contact drain, multiplies I
    mu = params.mu

    m = np.zeros((4, 4))
    m[2] = (0.0, params.sigma, -(mu + params.gamma), 0.0)
    m[3] = (0.0, 0.0, params.immune_recovery_rate, -(mu + params.omega))

    base = variant.base
    if base is MatrixVariant.BILINEAR_VIA_S:
        m[0] = (-(mu + foi), 0.0, 0.0, params.omega)
        m[1] = (foi, -(mu + params.sigma), 0.0, 0.0)
    elif base is MatrixVariant.BILINEAR_VIA_I:
        m[0] = (-mu, 0.0, -contact, params.omega)
        m[1] = (0.0, -(mu + params.sigma), contact, 0.0)
    elif base is MatrixVariant.SPLIT_DRAIN_I_GAIN_S:
        m[0] = (-mu, 0.0, -contact, params.omega)
        m[1] = (foi, -(mu + params.sigma), 0.0, 0.0)
    else:  # SPLIT_DRAIN_S_GAIN_I
        m[0] = (-(mu + foi), 0.0, 0.0, params.omega)
        m[1] = (0.0, -(mu + params.sigma), contact, 0.0)

    if variant.includes_birth_term:
        m[0] += params.nu

    return DynamicsMatrix(variant=variant, entries=m)


def forcing_vector(params: ModelParams, x: StateVec, V: float, form: ForcingForm) -> np.ndarray:
    """Input vector matching a forcing form (see ForcingForm)."""
    N = _require_population(x)
    births = params.nu * N
    vaccinated = births * V
    if form is ForcingForm.VACCINE_PLUS_BIRTH_VECTOR:
        return np.array([births - vaccinated, 0.0, 0.0, vaccinated])
    if form is ForcingForm.BIRTH_ROUTED_CONTROL:
        return births * np.array([1.0 - V, 0.0, 0.0, V])
    return np.array([-vaccinated, 0.0, 0.0, vaccinated])


def reconstruct_derivative(
    params: ModelParams,
    x: StateVec,
    V: float,
    variant: MatrixVariant,
    form: ForcingForm,
) -> StateRate:
    """Rebuild the vector field as matrix*state + forcing.

    The birth inflow must live in exactly one place, so the matrix variant
    and the forcing form have to agree on who carries it.
    """
    wants_birth_matrix = form is ForcingForm.BIRTH_INSIDE_MATRIX
    if variant.includes_birth_term != wants_birth_matrix:
        raise ConfigError(
            f"forcing form {form.value!r} does not pair with variant {variant.value!r}: "
            "the birth inflow would be dropped or double-counted"
        )
    m = build_matrix(params, x, variant).entries
    rate = m @ np.asarray(x, dtype=float) + forcing_vector(params, x, V, form)
    return StateRate(*rate)
