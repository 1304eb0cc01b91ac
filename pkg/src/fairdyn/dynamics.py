"""Influence-dynamics engine: DT stepping, CT integration, trajectories.

A dynamics is the pair (f0, f1): maps from the per-group selection rates
(beta0, beta1) to the change-for-the-better and retention-at-the-top rates.
Outputs are clamped to [0, 1] before use; clamp events are counted so test
dynamics can assert none occurred on reachable states.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .core import PopulationState, QualificationProfile, UtilitySpec, clamp01
from .expr import compile_expression
from .policy import CASE_TAGS, MODE_CODES, policy_entries

MERGE_TOL = 1e-10

POLICY_MODES = ("UN", "AA", "AA1", "AA2")


class CaseSwitchError(RuntimeError):
    """Raised under strict mode when the AA case flips mid-run."""


class StepHalvingError(RuntimeError):
    """Raised under strict mode when the integrator self-check fails."""


@dataclass(frozen=True)
class DynamicsSpec:
    """Evaluable dynamics pair with optional declared Lipschitz constants.

    affine, when set, is (a0, c0, d0, a1, c1, d1) describing
    f0 = a0 + c0*b0 + d0*b1 and f1 = a1 + c1*b0 + d1*b1; the trajectory
    kernels then evaluate the maps inline instead of calling back into
    Python.
    """

    f0: Callable[[float, float], float]
    f1: Callable[[float, float], float]
    name: str = "custom"
    declared_l0: float | None = None
    declared_l1: float | None = None
    affine: tuple[float, float, float, float, float, float] | None = None

    def f0_clamped(self, b0: float, b1: float) -> float:
        return clamp01(self.f0(b0, b1))

    def f1_clamped(self, b0: float, b1: float) -> float:
        return clamp01(self.f1(b0, b1))

    def validate_declared(self, resolution: int = 256) -> None:
        """Check declared Lipschitz constants against sampled finite
        differences on a resolution^2 grid; raises ValueError on excess."""
        if self.declared_l0 is None and self.declared_l1 is None:
            return
        xs = np.linspace(0.0, 1.0, resolution)
        step = xs[1] - xs[0]
        for which, fn, declared in (
            ("f0", self.f0_clamped, self.declared_l0),
            ("f1", self.f1_clamped, self.declared_l1),
        ):
            if declared is None:
                continue
            grid = np.array([[fn(x, y) for y in xs] for x in xs])
            worst = max(
                np.max(np.abs(np.diff(grid, axis=0))) / step,
                np.max(np.abs(np.diff(grid, axis=1))) / step,
            )
            if worst > declared + 1e-6:
                raise ValueError(
                    f"{which} of dynamics {self.name!r}: sampled slope {worst:.6g} "
                    f"exceeds declared Lipschitz constant {declared:.6g}"
                )


def constant_dynamics(f0_value: float, f1_value: float, name: str | None = None) -> DynamicsSpec:
    name = name if name is not None else f"constant({f0_value},{f1_value})"
    return affine_dynamics(f0_value, 0.0, 0.0, f1_value, 0.0, 0.0, name=name)


def affine_dynamics(
    a0: float,
    c0: float,
    d0: float,
    a1: float,
    c1: float,
    d1: float,
    name: str | None = None,
) -> DynamicsSpec:
    """f0 = a0 + c0*b0 + d0*b1, f1 = a1 + c1*b0 + d1*b1."""

    def f0(b0: float, b1: float, _a=a0, _c=c0, _d=d0) -> float:
        return _a + _c * b0 + _d * b1

    def f1(b0: float, b1: float, _a=a1, _c=c1, _d=d1) -> float:
        return _a + _c * b0 + _d * b1

    return DynamicsSpec(
        f0=f0,
        f1=f1,
        name=name if name is not None else f"affine({a0},{c0},{d0},{a1},{c1},{d1})",
        declared_l0=max(abs(c0), abs(d0)),
        declared_l1=max(abs(c1), abs(d1)),
        affine=(a0, c0, d0, a1, c1, d1),
    )


def appendix_c_dynamics() -> DynamicsSpec:
    """Built-in three-equilibrium example dynamics."""

    def f1(b0: float, b1: float) -> float:
        s = b0 + b1
        return 0.5 * (b1 + b1 / 5.0) / 1.4 + math.exp(-1e-9 * s) * math.sin(18.0 * s) + 0.1

    def f0(b0: float, b1: float) -> float:
        return (b1 + b1 / 5.0) / 1.2 + 0.01

    return DynamicsSpec(f0=f0, f1=f1, name="appendixC")


def make_builtin(name: str, params: dict | None = None) -> DynamicsSpec:
    params = dict(params or {})
    if name == "constant":
        return constant_dynamics(float(params["f0"]), float(params["f1"]))
    if name == "affine":
        return affine_dynamics(
            float(params.get("a0", 0.0)),
            float(params.get("c0", 0.0)),
            float(params.get("d0", 0.0)),
            float(params.get("a1", 0.0)),
            float(params.get("c1", 0.0)),
            float(params.get("d1", 0.0)),
        )
    if name == "appendixC":
        return appendix_c_dynamics()
    raise KeyError(f"unknown builtin dynamics {name!r}")


BUILTIN_NAMES = ("constant", "affine", "appendixC")


def parse_dynamics(
    expr_f0: str,
    expr_f1: str,
    name: str = "expression",
    declared_l0: float | None = None,
    declared_l1: float | None = None,
) -> DynamicsSpec:
    """Build a DynamicsSpec from two expression sources over b0, b1."""
    return DynamicsSpec(
        f0=compile_expression(expr_f0),
        f1=compile_expression(expr_f1),
        name=name,
        declared_l0=declared_l0,
        declared_l1=declared_l1,
    )


@dataclass
class TrajectoryRecord:
    """Time-indexed states, policies and utilities of one run."""

    mode: str
    time_mode: str  # "DT" | "CT"
    times: np.ndarray
    pi_a: np.ndarray
    pi_b: np.ndarray
    tau1_a: np.ndarray
    tau0_a: np.ndarray
    tau1_b: np.ndarray
    tau0_b: np.ndarray
    beta_a: np.ndarray  # aggregate selection rate per group
    beta_b: np.ndarray
    step_utility: np.ndarray
    running_utility: np.ndarray
    cumulative_utility: float
    case_tags: list[str]
    flags: list[str]  # per-sample event flags for serialization
    events: list[tuple[float, str]]
    clamp_count: int
    g_a: float
    extras: dict = field(default_factory=dict)

    @property
    def delta(self) -> np.ndarray:
        return self.pi_a - self.pi_b

    def final_state(self) -> PopulationState:
        return PopulationState.of(float(self.pi_a[-1]), float(self.pi_b[-1]), self.g_a)


def dt_step(
    profile: QualificationProfile,
    rates: tuple[float, float],
    dyn: DynamicsSpec,
) -> QualificationProfile:
    """One DT update of a single group's profile given its (beta0, beta1)."""
    p1, _ = _dt_step_raw(profile.p1, rates[0], rates[1], dyn)
    return QualificationProfile(p1)


def _dt_step_raw(p1: float, b0: float, b1: float, dyn: DynamicsSpec) -> tuple[float, int]:
    raw1 = dyn.f1(b0, b1)
    raw0 = dyn.f0(b0, b1)
    clamps = int(raw1 < 0.0 or raw1 > 1.0) + int(raw0 < 0.0 or raw0 > 1.0)
    nxt = p1 * clamp01(raw1) + (1.0 - p1) * clamp01(raw0)
    return clamp01(nxt), clamps


PolicyFn = Callable[[float, float, int], tuple[float, float, float, float, int]]
# (pi_a, pi_b, step) -> (tau1_a, tau0_a, tau1_b, tau0_b, case_code)


def _default_policy_fn(mode: str, g_a: float, u: UtilitySpec) -> PolicyFn:
    code = MODE_CODES[mode]

    def fn(pa: float, pb: float, step: int) -> tuple[float, float, float, float, int]:
        return policy_entries(code, pa, pb, g_a, u.u0, u.u1)

    return fn


def dt_trajectory(
    state0: PopulationState,
    mode: str,
    u: UtilitySpec,
    dyn: DynamicsSpec,
    steps: int,
    strict: bool = False,
    policy_fn: PolicyFn | None = None,
) -> TrajectoryRecord:
    """Iterate the DT dynamics, recomputing the one-step policy each step.

    The policy recorded at the final time is the one that would be applied
    next; cumulative utility sums the utilities of applied policies only.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if policy_fn is None:
        policy_fn = _default_policy_fn(mode, state0.g_a, u)

    ga, gb = state0.g_a, state0.g_b
    pa, pb = state0.pi_a.p1, state0.pi_b.p1

    n = steps + 1
    arr = lambda: np.empty(n)
    times, pas, pbs = arr(), arr(), arr()
    t1as, t0as, t1bs, t0bs = arr(), arr(), arr(), arr()
    betas_a, betas_b, utils = arr(), arr(), arr()
    case_tags: list[str] = []
    flags: list[str] = []
    events: list[tuple[float, str]] = []
    clamp_count = 0
    prev_case = None
    prev_delta = pa - pb

    for t in range(n):
        t1a, t0a, t1b, t0b, case = policy_fn(pa, pb, t)
        b0a, b1a = t0a * (1.0 - pa), t1a * pa
        b0b, b1b = t0b * (1.0 - pb), t1b * pb
        step_u = ga * (u.u1 * b1a + u.u0 * b0a) + gb * (u.u1 * b1b + u.u0 * b0b)

        step_flags = []
        if prev_case is not None and case != prev_case and prev_case != 0 and case != 0:
            events.append((float(t), "case_switch"))
            step_flags.append("case_switch")
            if strict:
                raise CaseSwitchError(f"AA case switched at step {t}")
            warnings.warn(f"AA case switched at step {t}", RuntimeWarning, stacklevel=2)
        delta = pa - pb
        if prev_delta * delta < 0.0:
            events.append((float(t), "advantage_swap"))
            step_flags.append("advantage_swap")
        prev_case, prev_delta = case, delta

        times[t], pas[t], pbs[t] = float(t), pa, pb
        t1as[t], t0as[t], t1bs[t], t0bs[t] = t1a, t0a, t1b, t0b
        betas_a[t], betas_b[t] = b0a + b1a, b0b + b1b
        utils[t] = step_u
        case_tags.append(CASE_TAGS[case])

        if t < steps:
            pa, ca = _dt_step_raw(pa, b0a, b1a, dyn)
            pb, cb = _dt_step_raw(pb, b0b, b1b, dyn)
            if ca or cb:
                events.append((float(t), "clamp"))
                step_flags.append("clamp")
                clamp_count += ca + cb
        flags.append("|".join(step_flags))

    running = np.cumsum(utils)
    cumulative = float(running[-1] - utils[-1]) if steps >= 0 else 0.0
    return TrajectoryRecord(
        mode=mode,
        time_mode="DT",
        times=times,
        pi_a=pas,
        pi_b=pbs,
        tau1_a=t1as,
        tau0_a=t0as,
        tau1_b=t1bs,
        tau0_b=t0bs,
        beta_a=betas_a,
        beta_b=betas_b,
        step_utility=utils,
        running_utility=running,
        cumulative_utility=cumulative,
        case_tags=case_tags,
        flags=flags,
        events=events,
        clamp_count=clamp_count,
        g_a=ga,
    )


def ct_integrate(
    state0: PopulationState,
    mode: str,
    u: UtilitySpec,
    dyn: DynamicsSpec,
    t_end: float,
    h: float = 1e-3,
    sample_every: int | None = None,
    check_step_halving: bool = False,
    stop_tol: float = 0.0,
    strict: bool = False,
) -> TrajectoryRecord:
    """Integrate the CT dynamics with fixed-step RK4.

    The closed-form policy is recomputed at every stage evaluation. Once the
    groups come within 1e-10 of each other they are merged onto a shared
    trajectory. Cumulative utility is the composite trapezoid over stored
    samples. With check_step_halving, the run is repeated at h/2 and the
    endpoint difference above 1e-6 is flagged (or raised under strict).
    """
    if t_end < 0.0:
        raise ValueError("t_end must be >= 0")
    if h <= 0.0:
        raise ValueError("step size h must be > 0")
    mode_code = MODE_CODES[mode]
    n_steps = int(round(t_end / h))
    if sample_every is None:
        sample_every = max(1, n_steps // 2000)

    samples, clamp_count, merge_step, stop_step = _kernels.ct_loop(
        state0.pi_a.p1,
        state0.pi_b.p1,
        state0.g_a,
        u.u0,
        u.u1,
        mode_code,
        dyn.f0,
        dyn.f1,
        dyn.affine,
        h,
        n_steps,
        sample_every,
        MERGE_TOL,
        stop_tol,
    )

    ga, gb = state0.g_a, state0.g_b
    n = len(samples)
    arr = lambda: np.empty(n)
    times, pas, pbs = arr(), arr(), arr()
    t1as, t0as, t1bs, t0bs = arr(), arr(), arr(), arr()
    betas_a, betas_b, utils = arr(), arr(), arr()
    case_tags: list[str] = []
    flags: list[str] = []
    events: list[tuple[float, str]] = []
    if merge_step >= 0:
        events.append((merge_step * h, "merge"))
    if stop_step >= 0:
        events.append((stop_step * h, "stationary_stop"))

    prev_case = None
    prev_delta = None
    for i, (step, pa, pb) in enumerate(samples):
        t1a, t0a, t1b, t0b, case = policy_entries(mode_code, pa, pb, ga, u.u0, u.u1)
        b0a, b1a = t0a * (1.0 - pa), t1a * pa
        b0b, b1b = t0b * (1.0 - pb), t1b * pb
        step_flags = []
        if prev_case is not None and case != prev_case and prev_case != 0 and case != 0:
            events.append((step * h, "case_switch"))
            step_flags.append("case_switch")
            if strict:
                raise CaseSwitchError(f"AA case switched near t={step * h}")
            warnings.warn(
                f"AA case switched near t={step * h}", RuntimeWarning, stacklevel=2
            )
        delta = pa - pb
        if prev_delta is not None and prev_delta * delta < 0.0 and (
            merge_step < 0 or step <= merge_step
        ):
            events.append((step * h, "advantage_swap"))
            step_flags.append("advantage_swap")
        prev_case, prev_delta = case, delta

        times[i], pas[i], pbs[i] = step * h, pa, pb
        t1as[i], t0as[i], t1bs[i], t0bs[i] = t1a, t0a, t1b, t0b
        betas_a[i], betas_b[i] = b0a + b1a, b0b + b1b
        utils[i] = ga * (u.u1 * b1a + u.u0 * b0a) + gb * (u.u1 * b1b + u.u0 * b0b)
        case_tags.append(CASE_TAGS[case])
        flags.append("|".join(step_flags))

    if n > 1:
        increments = 0.5 * (utils[1:] + utils[:-1]) * np.diff(times)
        running = np.concatenate(([0.0], np.cumsum(increments)))
    else:
        running = np.zeros(n)
    record = TrajectoryRecord(
        mode=mode,
        time_mode="CT",
        times=times,
        pi_a=pas,
        pi_b=pbs,
        tau1_a=t1as,
        tau0_a=t0as,
        tau1_b=t1bs,
        tau0_b=t0bs,
        beta_a=betas_a,
        beta_b=betas_b,
        step_utility=utils,
        running_utility=running,
        cumulative_utility=float(running[-1]),
        case_tags=case_tags,
        flags=flags,
        events=events,
        clamp_count=clamp_count,
        g_a=ga,
    )

    if check_step_halving:
        fine = ct_integrate(
            state0, mode, u, dyn, t_end, h=h / 2.0, sample_every=None,
            check_step_halving=False, stop_tol=0.0,
        )
        diff = max(
            abs(float(record.pi_a[-1]) - float(fine.pi_a[-1])),
            abs(float(record.pi_b[-1]) - float(fine.pi_b[-1])),
        )
        record.extras["step_halving_diff"] = diff
        record.extras["step_halving_ok"] = diff <= 1e-6
        if diff > 1e-6:
            if strict:
                raise StepHalvingError(
                    f"step-halving check failed: endpoint difference {diff:.3g}"
                )
            warnings.warn(
                f"step-halving check failed: endpoint difference {diff:.3g}",
                RuntimeWarning,
                stacklevel=2,
            )
    return record


def ct_gradient(
    pa: float, pb: float, g_a: float, mode: str, u: UtilitySpec, dyn: DynamicsSpec
) -> tuple[float, float]:
    """CT derivative (dpi_a/dt, dpi_b/dt) at one point under a policy mode."""
    pa, pb = clamp01(pa), clamp01(pb)
    t1a, t0a, t1b, t0b, _ = policy_entries(MODE_CODES[mode], pa, pb, g_a, u.u0, u.u1)
    b0a, b1a = t0a * (1.0 - pa), t1a * pa
    b0b, b1b = t0b * (1.0 - pb), t1b * pb
    da = pa * (dyn.f1_clamped(b0a, b1a) - 1.0) + (1.0 - pa) * dyn.f0_clamped(b0a, b1a)
    db = pb * (dyn.f1_clamped(b0b, b1b) - 1.0) + (1.0 - pb) * dyn.f0_clamped(b0b, b1b)
    return da, db


@dataclass(frozen=True)
class TailBracket:
    """Infinite-horizon cumulative-utility bracket for an equalizing CT run."""

    finite: float
    delta_tail: tuple[float, float]
    interval: tuple[float, float]


def cumulative_utility_with_tail(
    record: TrajectoryRecord,
    contraction: float,
    u: UtilitySpec,
    g_a: float,
) -> TailBracket:
    """Bracket the infinite-horizon integral of the utility.

    The finite-horizon part is the record's trapezoid integral. Past t_end,
    only the gap-dependent utility terms are bracketed, using the two-sided
    exponential envelopes on the group gap integrated analytically; the
    gap-independent baseline is common across modes once both groups sit at
    the shared limit and is excluded from the tail.
    """
    if not (0.0 <= contraction < 1.0):
        raise ValueError("tail bounds require a contraction estimate in [0, 1)")
    final_delta = float(record.delta[-1])
    d = abs(final_delta)
    lo = d / (1.0 + contraction)
    hi = d / (1.0 - contraction)

    tag = record.case_tags[-1]
    g_adv = g_a if final_delta >= 0.0 else 1.0 - g_a
    if tag == "UN":
        coeff = g_adv * u.u1
    elif tag == "AA1":
        coeff = 0.0
    else:  # AA2
        coeff = g_adv * u.u1 + (1.0 - g_adv) * u.u0
    finite = record.cumulative_utility
    if coeff >= 0.0:
        interval = (finite + coeff * lo, finite + coeff * hi)
    else:
        interval = (finite + coeff * hi, finite + coeff * lo)
    return TailBracket(finite=finite, delta_tail=(lo, hi), interval=interval)
