"""Fixed-step simulation engine.

Classic fourth-order Runge-Kutta on a uniform grid t_k = k*dt. The
vaccination signal is evaluated once per step boundary from the current
state and held constant across the step (zero-order hold), so control
values line up exactly with recorded samples. Negative state components
are clamped to zero at every boundary before the control is evaluated;
under the clamped law these resets never fire in practice, under the
unclamped law they are the positivity mechanism.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Iterator

import numpy as np

from .control import (
    ControlConfig,
    ControlSample,
    ReferenceSample,
    VaccinationLaw,
    gain_schedule,
    modulation_identity_residual,
    reference,
    vaccination_saturated,
    vaccination_unsaturated,
)
from .errors import ConfigError, SingularStateError
from .model import (
    COMPONENT_NAMES,
    N_FLOOR,
    ModelParams,
    StateRate,
    StateVec,
    make_rate_fn,
    total_population_rate,
)
from .positivity import ResetEvent

# Days of sustained near-zero rates required before a run counts as settled.
STEADY_STATE_WINDOW_DAYS = 30.0


class RunStatus(enum.Enum):
    OK = "ok"
    EXTINCT = "extinct"
    BLOWUP = "blowup"


@dataclass(frozen=True)
class ScenarioConfig:
    """A full simulation setup: parameters, initial state, controller, grid.

    horizon and dt are in days. The recorded grid is t_k = k*dt for
    k = 0..round(horizon/dt); a horizon that is not an exact multiple of dt
    is snapped to the nearest step count.
    """

    params: ModelParams
    x0: StateVec
    control: ControlConfig = field(default_factory=ControlConfig)
    horizon: float = 600.0
    dt: float = 0.01
    steady_state_tol: float = 1e-6
    name: str = "custom"

    def resolved(self) -> "ScenarioConfig":
        """Validate and fill derived defaults.

        Unset decomposition references default to the initial total
        population (reference infectious fraction 1, the worst case), and
        the controller resolves eps0 and checks its guards.
        """
        if not (math.isfinite(self.dt) and self.dt > 0.0):
            raise ConfigError(f"dt must be a positive number, got {self.dt!r}")
        if not (math.isfinite(self.horizon) and self.horizon >= self.dt):
            raise ConfigError(
                f"horizon must be at least one step, got horizon={self.horizon!r} "
                f"with dt={self.dt!r}"
            )
        if not (math.isfinite(self.steady_state_tol) and self.steady_state_tol > 0.0):
            raise ConfigError(
                f"steady_state_tol must be > 0, got {self.steady_state_tol!r}"
            )
        x0 = StateVec(*(float(v) for v in self.x0))
        for name, v in zip(COMPONENT_NAMES, x0):
            if not math.isfinite(v) or v < 0.0:
                raise ConfigError(f"initial {name} must be finite and >= 0, got {v!r}")
        if not x0.N > N_FLOOR:
            raise ConfigError(f"initial population {x0.N!r} is at or below the floor")
        params = self.params
        if params.I0_ref is None:
            params = params.with_references(x0.N, x0.N)
        control = self.control.validated(params)
        return replace(self, params=params, x0=x0, control=control)

    def step_count(self) -> int:
        return max(1, int(round(self.horizon / self.dt)))


@dataclass(frozen=True)
class TrajectoryRecord:
    """One recorded boundary, in object form (columns are primary storage)."""

    t: float
    state: StateVec
    rate: StateRate
    control: ControlSample
    dN: float
    identity_residual: float
    reset_count: int


@dataclass
class Trajectory:
    """Columnar record of one run.

    states[k] is the state the step was taken from (post-reset), and all
    control columns were evaluated on exactly that state at t[k]. status
    explains early truncation; halt_time is the first grid time that could
    not be recorded (None for a complete run).
    """

    scenario: ScenarioConfig
    status: RunStatus
    halt_time: float | None
    t: np.ndarray
    states: np.ndarray
    rates: np.ndarray
    dn: np.ndarray
    va: np.ndarray
    v: np.ndarray
    g: np.ndarray
    h: np.ndarray
    h_dot: np.ndarray
    r_star: np.ndarray
    r_star_dot: np.ndarray
    k_n: np.ndarray
    k_i: np.ndarray
    theta0: np.ndarray
    theta1: np.ndarray
    identity_residual: np.ndarray
    reset_counts: np.ndarray
    reset_events: tuple[ResetEvent, ...]

    def __len__(self) -> int:
        return self.t.size

    @property
    def S(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def E(self) -> np.ndarray:
        return self.states[:, 1]

    @property
    def I(self) -> np.ndarray:
        return self.states[:, 2]

    @property
    def R(self) -> np.ndarray:
        return self.states[:, 3]

    @property
    def N(self) -> np.ndarray:
        return self.states.sum(axis=1)

    @property
    def dt(self) -> float:
        return self.scenario.dt

    def state(self, k: int) -> StateVec:
        return StateVec(*(float(v) for v in self.states[k]))

    def terminal_state(self) -> StateVec:
        return self.state(len(self) - 1)

    def record(self, k: int) -> TrajectoryRecord:
        if not -len(self) <= k < len(self):
            raise IndexError(f"record index {k} out of range for {len(self)} samples")
        sample = ControlSample(
            t=float(self.t[k]),
            V_a=float(self.va[k]),
            V=float(self.v[k]),
            theta0=bool(self.theta0[k]),
            theta1=bool(self.theta1[k]),
            g=float(self.g[k]),
            h=float(self.h[k]),
            h_dot=float(self.h_dot[k]),
            R_star=float(self.r_star[k]),
            R_star_dot=float(self.r_star_dot[k]),
            K_N=float(self.k_n[k]),
            K_I=float(self.k_i[k]),
        )
        return TrajectoryRecord(
            t=float(self.t[k]),
            state=self.state(k),
            rate=StateRate(*self.rates[k]),
            control=sample,
            dN=float(self.dn[k]),
            identity_residual=float(self.identity_residual[k]),
            reset_count=int(self.reset_counts[k]),
        )

    def records(self) -> Iterator[TrajectoryRecord]:
        for k in range(len(self)):
            yield self.record(k)


def _none_law_sample(
    cfg: ControlConfig, params: ModelParams, t: float, ref: ReferenceSample
) -> ControlSample:
    # Gains are still recorded (with g = 0) so the schedule is observable
    # even when no vaccination is applied.
    k_n, k_i = gain_schedule(cfg, params, t, ref.h, ref.h_dot, 0.0)
    return ControlSample(
        t=t, V_a=0.0, V=0.0, theta0=False, theta1=False, g=0.0,
        h=ref.h, h_dot=ref.h_dot, R_star=ref.R_star, R_star_dot=ref.R_star_dot,
        K_N=k_n, K_I=k_i,
    )


def integrate(scenario: ScenarioConfig) -> Trajectory:
    """Run one scenario to its horizon (or early truncation).

    Truncation rules, checked at each boundary before recording:
    population at or below the extinction floor ends the run with status
    EXTINCT; a non-finite component ends it with BLOWUP. A population
    collapse inside a step (stage evaluation) also truncates as EXTINCT,
    keeping everything recorded so far.
    """
    sc = scenario.resolved()
    p = sc.params
    cc = sc.control
    law = cc.law
    dt = sc.dt
    n_steps = sc.step_count()
    rate = make_rate_fn(p)

    size = n_steps + 1
    t_col = np.empty(size)
    states = np.empty((size, 4))
    rates = np.empty((size, 4))
    dn = np.empty(size)
    va = np.empty(size)
    v_col = np.empty(size)
    g_col = np.empty(size)
    h_col = np.empty(size)
    h_dot_col = np.empty(size)
    r_star = np.empty(size)
    r_star_dot = np.empty(size)
    k_n_col = np.empty(size)
    k_i_col = np.empty(size)
    theta0 = np.zeros(size, dtype=bool)
    theta1 = np.zeros(size, dtype=bool)
    resid = np.zeros(size)
    reset_counts = np.zeros(size, dtype=np.int64)
    reset_events: list[ResetEvent] = []

    S, E, I, R = sc.x0
    r0_immune = sc.x0.R
    status = RunStatus.OK
    halt_time: float | None = None
    recorded = 0
    half = 0.5 * dt
    sixth = dt / 6.0

    for k in range(size):
        t = k * dt
        if not (
            math.isfinite(S) and math.isfinite(E)
            and math.isfinite(I) and math.isfinite(R)
        ):
            status = RunStatus.BLOWUP
            halt_time = t
            break
        if not S + E + I + R > N_FLOOR:
            status = RunStatus.EXTINCT
            halt_time = t
            break

        raw_min = min(S, E, I, R)
        n_reset = 0
        if raw_min < 0.0:
            comps = [S, E, I, R]
            for i, val in enumerate(comps):
                if val < 0.0:
                    reset_events.append(
                        ResetEvent(t=t, component=COMPONENT_NAMES[i], index=i,
                                   value_before=val)
                    )
                    comps[i] = 0.0
                    n_reset += 1
            S, E, I, R = comps

        sv = StateVec(S, E, I, R)
        ref = reference(cc, p, t, sv, r0_immune)
        if law is VaccinationLaw.NONE:
            sample = _none_law_sample(cc, p, t, ref)
            residual = 0.0
        elif law is VaccinationLaw.SATURATED:
            sample = vaccination_saturated(cc, p, t, sv, ref, r0=r0_immune)
            residual = modulation_identity_residual(cc, p, sv, sample)
        else:
            sample = vaccination_unsaturated(
                cc, p, t, sv, ref, r0=r0_immune, raw_min=raw_min
            )
            residual = modulation_identity_residual(cc, p, sv, sample)

        V = sample.V
        d = rate(S, E, I, R, V)

        t_col[k] = t
        states[k, 0] = S
        states[k, 1] = E
        states[k, 2] = I
        states[k, 3] = R
        rates[k] = d
        dn[k] = total_population_rate(p, sv)
        va[k] = sample.V_a
        v_col[k] = V
        g_col[k] = sample.g
        h_col[k] = sample.h
        h_dot_col[k] = sample.h_dot
        r_star[k] = sample.R_star
        r_star_dot[k] = sample.R_star_dot
        k_n_col[k] = sample.K_N
        k_i_col[k] = sample.K_I
        theta0[k] = sample.theta0
        theta1[k] = sample.theta1
        resid[k] = residual
        reset_counts[k] = n_reset
        recorded = k + 1

        if k == n_steps:
            break

        d1S, d1E, d1I, d1R = d
        try:
            d2S, d2E, d2I, d2R = rate(
                S + half * d1S, E + half * d1E, I + half * d1I, R + half * d1R, V
            )
            d3S, d3E, d3I, d3R = rate(
                S + half * d2S, E + half * d2E, I + half * d2I, R + half * d2R, V
            )
            d4S, d4E, d4I, d4R = rate(
                S + dt * d3S, E + dt * d3E, I + dt * d3I, R + dt * d3R, V
            )
        except SingularStateError:
            status = RunStatus.EXTINCT
            halt_time = t + dt
            break
        S += sixth * (d1S + 2.0 * (d2S + d3S) + d4S)
        E += sixth * (d1E + 2.0 * (d2E + d3E) + d4E)
        I += sixth * (d1I + 2.0 * (d2I + d3I) + d4I)
        R += sixth * (d1R + 2.0 * (d2R + d3R) + d4R)

    sl = slice(0, recorded)
    return Trajectory(
        scenario=sc,
        status=status,
        halt_time=halt_time,
        t=t_col[sl],
        states=states[sl],
        rates=rates[sl],
        dn=dn[sl],
        va=va[sl],
        v=v_col[sl],
        g=g_col[sl],
        h=h_col[sl],
        h_dot=h_dot_col[sl],
        r_star=r_star[sl],
        r_star_dot=r_star_dot[sl],
        k_n=k_n_col[sl],
        k_i=k_i_col[sl],
        theta0=theta0[sl],
        theta1=theta1[sl],
        identity_residual=resid[sl],
        reset_counts=reset_counts[sl],
        reset_events=tuple(reset_events),
    )


@dataclass(frozen=True)
class SteadyState:
    """Outcome of the settled-regime search."""

    found: bool
    t_ss: float | None
    x_ss: StateVec | None

    @property
    def infected_fraction(self) -> float | None:
        """(E + I)/N at the settled state, None when not found."""
        if not self.found:
            return None
        return (self.x_ss.E + self.x_ss.I) / self.x_ss.N


def detect_steady_state(
    traj: Trajectory,
    tol: float | None = None,
    window_days: float = STEADY_STATE_WINDOW_DAYS,
) -> SteadyState:
    """First window of sustained stillness, measured against population size.

    Scans for the earliest t_ss such that every recorded sample in
    [t_ss, t_ss + window_days] has max_i |dx_i/dt| <= tol * N at that
    sample. Returns the window start and the window time-average state.
    tol defaults to the scenario's steady_state_tol. A horizon shorter
    than the window can never qualify.
    """
    n = len(traj)
    if n == 0:
        raise ValueError("cannot scan an empty trajectory")
    if tol is None:
        tol = traj.scenario.steady_state_tol
    w = int(round(window_days / traj.dt))
    if w < 1:
        w = 1
    if n < w + 1:
        return SteadyState(found=False, t_ss=None, x_ss=None)
    still = np.abs(traj.rates).max(axis=1) <= tol * traj.N
    # Windowed all-true via prefix sums of violations.
    bad = np.concatenate(([0], np.cumsum(~still, dtype=np.int64)))
    window_bad = bad[w + 1:] - bad[: n - w]
    hits = np.nonzero(window_bad == 0)[0]
    if hits.size == 0:
        return SteadyState(found=False, t_ss=None, x_ss=None)
    k = int(hits[0])
    x_ss = StateVec(*(float(v) for v in traj.states[k : k + w + 1].mean(axis=0)))
    return SteadyState(found=True, t_ss=float(traj.t[k]), x_ss=x_ss)


@dataclass(frozen=True)
class ConvergenceRow:
    dt: float
    terminal: StateVec
    diff_from_finest: float


def convergence_study(
    scenario: ScenarioConfig, dts
) -> tuple[ConvergenceRow, ...]:
    """Re-run one scenario over a ladder of step sizes.

    Rows come back ordered coarse to fine; diff_from_finest is the max-abs
    componentwise distance of the terminal state from the finest run's
    (0 for the finest row itself). Needs at least two distinct step sizes.
    Runs that truncate early make the comparison meaningless, so any
    non-OK status raises.
    """
    ladder = sorted({float(d) for d in dts}, reverse=True)
    if len(ladder) < 2:
        raise ConfigError(
            f"a convergence study needs at least two distinct step sizes, got {dts!r}"
        )
    for d in ladder:
        if not (math.isfinite(d) and d > 0.0):
            raise ConfigError(f"step sizes must be positive, got {d!r}")
    terminals: list[StateVec] = []
    for d in ladder:
        traj = integrate(replace(scenario, dt=d))
        if traj.status is not RunStatus.OK:
            raise ConfigError(
                f"run at dt={d!r} ended early with status {traj.status.value!r}; "
                "convergence comparison needs complete runs"
            )
        terminals.append(traj.terminal_state())
    finest = terminals[-1].as_array()
    return tuple(
        ConvergenceRow(
            dt=d,
            terminal=term,
            diff_from_finest=float(np.max(np.abs(term.as_array() - finest))),
        )
        for d, term in zip(ladder, terminals)
    )
