"""Phase reconstruction of generalized Loschmidt amplitudes.

The amplitude G(t) = <psi'| exp(-iHt) |psi> is treated as a function of
complex time z = t - i*beta.  Where G is nonzero, ln G is holomorphic and
the Cauchy-Riemann equations give

    d(phi)/dt = d(ln r)/d(beta),      G = r * exp(i*phi),

so the *phase derivative* is accessible from *magnitude* measurements at
complex times.  The pipeline per grid point t_k:

1. measure p_+(t_k) and p_-(t_k), the survival probabilities of the circuits
   that apply the rescaled imaginary-time step exp(+-hH) ~= c_+- V_+- before
   the real-time evolution; then r(t_k +- ih)^2 = p_+-(t_k) * c_+-^2,
2. estimate d(phi)/dt by the mid-point formula
   [ln r(t-ih) - ln r(t+ih)] / (2h),
3. integrate the estimates over the uniform grid (composite Simpson by
   default) starting from an anchored phase,
4. optionally detect near-zeros of r(t) and repair the phase jumps the
   integration picks up there,
5. assemble G = r * exp(i*phi) together with the running statistical factor
   I used by the shot-noise error model.

``reconstruct_trace`` is the purely classical part (it consumes measured
probability series and works equally for external data); dispatching the
simulation backends that produce those series is ``run_phase_experiment``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigError, NumericsError
from .ite import apply_ite, build_ite_plan_general, build_ite_plan_tfim
from .model import amplitude_series
from .noise import mitigate_rescale, sample_shots, trajectory_survivals
from .statevector import inner_product
from .trotter import build_plan, evolve

_P_FLOOR = 1e-30

#: spawn keys for the per-family shot-sampling streams
_FAMILY_R, _FAMILY_PLUS, _FAMILY_MINUS = 0, 1, 2


@dataclass
class PhaseTrace:
    """Per-time-step record of the reconstruction.

    ``p_plus``/``p_minus`` are the measured (possibly sampled and mitigated)
    probabilities; ``r`` is the real-time magnitude; ``g_complex`` is
    ``r * exp(i*phi)`` so its magnitude is the ``r`` channel by construction.
    The noisy backend additionally fills the ``*_raw`` fields (pre-
    mitigation) and ``clamped`` flags.
    """

    times: np.ndarray
    r: np.ndarray
    p_plus: np.ndarray
    p_minus: np.ndarray
    dphi_dt: np.ndarray
    phi: np.ndarray
    g_complex: np.ndarray
    i_factor: np.ndarray
    h: float
    anchor: float = 0.0
    shots: int | None = None
    zero_threshold: float | None = None
    crossings: list[int] = field(default_factory=list)
    correction_phases: list[float] = field(default_factory=list)
    r_squared_raw: np.ndarray | None = None
    p_plus_raw: np.ndarray | None = None
    p_minus_raw: np.ndarray | None = None
    p_plus_mitigated: np.ndarray | None = None
    p_minus_mitigated: np.ndarray | None = None
    clamped: np.ndarray | None = None

    def __len__(self):
        return len(self.times)


def finite_difference_log(r_minus: float, r_plus: float, h: float) -> float:
    """Mid-point estimate [ln r(t-ih) - ln r(t+ih)] / (2h) of d(phi)/dt."""
    if h <= 0:
        raise ValueError("h must be positive")
    if r_minus <= 0 or r_plus <= 0:
        raise NumericsError("zero-region: use zero-correction path")
    return (np.log(r_minus) - np.log(r_plus)) / (2.0 * h)


def integrate_phase(derivatives, tau: float, rule: str = "simpson", anchor: float = 0.0):
    """Cumulative integral of uniformly spaced derivative samples.

    "simpson" applies the composite rule on even-interval prefixes and
    closes a trailing odd interval with a trapezoid; "trapezoid" is the
    plain composite rule.  The first entry equals ``anchor`` exactly.
    """
    d = np.asarray(derivatives, dtype=float)
    if d.ndim != 1 or len(d) < 2:
        raise ValueError("need at least 2 derivative samples")
    if tau <= 0:
        raise ValueError("tau must be positive")
    if rule not in ("simpson", "trapezoid"):
        raise ValueError(f"unknown integration rule {rule!r}")
    phi = np.empty_like(d)
    phi[0] = anchor
    if rule == "trapezoid":
        phi[1:] = anchor + np.cumsum(tau * (d[1:] + d[:-1]) / 2.0)
        return phi
    for k in range(1, len(d)):
        if k % 2 == 0:
            phi[k] = phi[k - 2] + tau / 3.0 * (d[k - 2] + 4.0 * d[k - 1] + d[k])
        else:
            phi[k] = phi[k - 1] + tau / 2.0 * (d[k - 1] + d[k])
    return phi


def detect_zeros(trace: PhaseTrace, threshold: float | None = None) -> list[int]:
    """Indices where the real-time magnitude dips below ``threshold`` at a
    local minimum (one index per below-threshold run).

    Default threshold: max(1e-3, 10/sqrt(shots)) when the trace was shot
    sampled, else 1e-3.
    """
    if threshold is None:
        threshold = trace.zero_threshold
    if threshold is None:
        threshold = 1e-3 if trace.shots is None else max(1e-3, 10.0 / np.sqrt(trace.shots))
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    r = trace.r
    below = r < threshold
    crossings = []
    k = 0
    while k < len(r):
        if below[k]:
            end = k
            while end + 1 < len(r) and below[end + 1]:
                end += 1
            run = np.arange(k, end + 1)
            dip = int(run[np.argmin(r[run])])
            # a crossing is an interior local minimum; the argmin of a run
            # that just decays into the series boundary is not one
            if 0 < dip < len(r) - 1 and r[dip] <= r[dip - 1] and r[dip] <= r[dip + 1]:
                crossings.append(dip)
            k = end + 1
        else:
            k += 1
    return crossings


def _one_sided_derivative(
    g: np.ndarray, tau: float, order: int, k: int, side: int, omega: float
):
    """Finite-difference derivative of given order anchored at a crossing
    index k, taken just before (side=-1) or just after (side=+1) it.

    The stencil points are de-rotated by the locally measured phase velocity
    ``omega`` first (g -> g * exp(-i omega (t - t_k))): the plain ratio of
    one-sided derivatives picks up a bias equal to the smooth phase advance
    across the stencil gap, which is order one when omega*tau is, as it is
    on coarse grids.  De-rotation removes that bias and reduces to the plain
    stencil when omega*tau -> 0.  Returns None when the stencil leaves the
    series.
    """
    pts = [k + side * j for j in range(order + 1)]
    if min(pts) < 0 or max(pts) >= len(g):
        return None
    vals = [g[p] * np.exp(-1j * omega * (p - k) * tau) for p in pts]
    if order == 1:
        return side * (vals[1] - vals[0]) / tau
    # order == 2, symmetric stencil weights
    return (vals[0] - 2.0 * vals[1] + vals[2]) / tau**2


def correct_phase_jumps(trace: PhaseTrace, crossings, derivative_threshold: float | None = None) -> PhaseTrace:
    """Repair the phase branch after each near-zero of r(t).

    Crossing a zero of order n0, the true amplitude changes sign like
    (t - t0)^{n0} while the mid-point magnitude estimator is blind to it, so
    the integrated phase misses n0*pi plus a discretization shift delta.
    Both are recovered at once from the ratio of one-sided n0-th derivatives
    of the reconstructed amplitude evaluated at the closest grid points on
    either side of the crossing: the post-crossing branch is multiplied by
    the conjugate phase of that ratio, which equals (-1)^{n0} e^{-i delta}.
    The stencils are de-rotated by the phase velocity measured two grid
    points away from the crossing (where the derivative data is clean), see
    :func:`_one_sided_derivative`.

    n0 defaults to 1; n0 = 2 is selected when both one-sided first
    derivatives fall below the detection threshold.  Higher orders raise.
    """
    if len(crossings) == 0:
        return trace
    if derivative_threshold is None:
        derivative_threshold = trace.zero_threshold if trace.zero_threshold else 1e-3
    tau = float(trace.times[1] - trace.times[0]) if len(trace) > 1 else 0.0
    g = trace.g_complex.copy()
    phi = trace.phi.copy()
    dphi = trace.dphi_dt
    applied: list[float] = []
    kept: list[int] = []
    for k in sorted(crossings):
        omega_l = float(dphi[max(k - 2, 0)])
        omega_r = float(dphi[min(k + 2, len(g) - 1)])
        d_minus = _one_sided_derivative(g, tau, 1, k, -1, omega_l)
        d_plus = _one_sided_derivative(g, tau, 1, k, +1, omega_r)
        if d_minus is None or d_plus is None:
            warnings.warn(f"skipping zero crossing at boundary index {k}", stacklevel=2)
            continue
        if abs(d_minus) < derivative_threshold and abs(d_plus) < derivative_threshold:
            d_minus = _one_sided_derivative(g, tau, 2, k, -1, omega_l)
            d_plus = _one_sided_derivative(g, tau, 2, k, +1, omega_r)
            if d_minus is None or d_plus is None:
                warnings.warn(f"skipping zero crossing at boundary index {k}", stacklevel=2)
                continue
            if abs(d_minus) < derivative_threshold and abs(d_plus) < derivative_threshold:
                raise NumericsError(
                    f"zero of order > 2 at index {k}: correction unsupported"
                )
        if d_minus == 0:
            raise NumericsError(f"vanishing pre-crossing derivative at index {k}")
        ratio = d_plus / d_minus
        shift = -np.angle(ratio)
        g[k + 1 :] *= np.exp(1j * shift)
        phi[k + 1 :] += shift
        applied.append(float(shift))
        kept.append(int(k))
    out = PhaseTrace(
        times=trace.times,
        r=trace.r,
        p_plus=trace.p_plus,
        p_minus=trace.p_minus,
        dphi_dt=trace.dphi_dt,
        phi=phi,
        g_complex=g,
        i_factor=trace.i_factor,
        h=trace.h,
        anchor=trace.anchor,
        shots=trace.shots,
        zero_threshold=trace.zero_threshold,
        crossings=kept,
        correction_phases=applied,
        r_squared_raw=trace.r_squared_raw,
        p_plus_raw=trace.p_plus_raw,
        p_minus_raw=trace.p_minus_raw,
        p_plus_mitigated=trace.p_plus_mitigated,
        p_minus_mitigated=trace.p_minus_mitigated,
        clamped=trace.clamped,
    )
    return out


def _running_i_factor(times, p_plus, p_minus) -> np.ndarray:
    integrand = 1.0 / np.sqrt(p_plus) + 1.0 / np.sqrt(p_minus)
    out = np.empty_like(integrand)
    out[0] = integrand[0]
    if len(times) > 1:
        steps = np.diff(times)
        cum = np.cumsum(steps * (integrand[1:] + integrand[:-1]) / 2.0)
        out[1:] = cum / times[1:]
    return out


def reconstruct_trace(
    times,
    r,
    p_plus,
    p_minus,
    log_c_plus: float,
    log_c_minus: float,
    h: float,
    *,
    rule: str = "simpson",
    anchor: float = 0.0,
    zero_correction: bool = True,
    threshold: float | None = None,
    shots: int | None = None,
) -> PhaseTrace:
    """Classical post-processing: measured probability series to PhaseTrace.

    ``p_plus``/``p_minus`` are the survival probabilities of the two
    imaginary-time-shifted circuits and ``log_c_plus``/``log_c_minus`` the
    log rescaling constants of their plans; ``r`` is the real-time
    magnitude series.  The phase channel never reads ``r`` except for zero
    detection.
    """
    times = np.asarray(times, dtype=float)
    r = np.asarray(r, dtype=float)
    p_plus = np.asarray(p_plus, dtype=float)
    p_minus = np.asarray(p_minus, dtype=float)
    n = len(times)
    if not (len(r) == len(p_plus) == len(p_minus) == n):
        raise ValueError("series lengths differ")
    if h <= 0:
        raise ValueError("h must be positive")
    if n > 1:
        steps = np.diff(times)
        if np.max(np.abs(steps - steps[0])) > 1e-9 * max(1.0, abs(steps[0])):
            raise ValueError("time grid must be uniform")

    bad = (p_plus <= 0) | (p_minus <= 0)
    if np.any(bad):
        if not zero_correction:
            where = ", ".join(f"{t:g}" for t in times[bad])
            raise NumericsError(
                f"vanishing probability at t = {where}; enable zero correction"
            )
        p_plus = np.maximum(p_plus, _P_FLOOR)
        p_minus = np.maximum(p_minus, _P_FLOOR)

    log_r_plus = 0.5 * np.log(p_plus) + log_c_plus
    log_r_minus = 0.5 * np.log(p_minus) + log_c_minus
    dphi = (log_r_minus - log_r_plus) / (2.0 * h)

    if n == 1:
        phi = np.array([anchor])
    else:
        tau = float(times[1] - times[0])
        phi = integrate_phase(dphi, tau, rule, anchor)

    trace = PhaseTrace(
        times=times,
        r=r,
        p_plus=p_plus,
        p_minus=p_minus,
        dphi_dt=dphi,
        phi=phi,
        g_complex=r * np.exp(1j * phi),
        i_factor=_running_i_factor(times, p_plus, p_minus),
        h=h,
        anchor=anchor,
        shots=shots,
        zero_threshold=threshold,
    )
    if zero_correction and n > 1:
        crossings = detect_zeros(trace, threshold)
        if crossings:
            trace = correct_phase_jumps(trace, crossings)
    return trace


def _shot_rng(seed: int, family: int, index: int):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(family, index)))


def _sample_series(p, shots, seed, family) -> np.ndarray:
    out = np.empty_like(p)
    for k, value in enumerate(p):
        clamped = min(max(float(value), 0.0), 1.0)
        out[k] = sample_shots(clamped, shots, _shot_rng(seed, family, k))
    return out


def run_phase_experiment(config) -> PhaseTrace:
    """Produce a PhaseTrace from an :class:`~loschmidt.config.ExperimentConfig`.

    Backends:

    * ``exact_oracle`` — amplitudes from the dense eigendecomposition
      (imaginary-time constants still come from the configured ITE plan so
      the recorded probabilities match what an experiment would see),
    * ``statevector_trotter`` — ITE plan gates plus Trotter evolution with
      exact overlap probabilities,
    * ``noisy`` — same circuits with depolarizing trajectories, optional
      shot sampling, and rescaling mitigation.

    Optional shot sampling applies to the first two backends through
    ``config.shots``.
    """
    spec = config.spec
    psi = config.psi
    bra = config.bra_state if config.bra_state is not None else (
        config.psi_final if config.psi_final is not None else psi
    )
    if config.h <= 0:
        raise ConfigError("h must be positive")
    if config.tau <= 0:
        raise ConfigError("tau must be positive")
    if config.t_max < 0:
        raise ConfigError("t_max must be nonnegative")

    n_points = int(np.floor(config.t_max / config.tau + 1e-9)) + 1
    times = np.arange(n_points) * config.tau

    builder = {
        "tfim_closed_form": build_ite_plan_tfim,
        "general_bj": build_ite_plan_general,
    }.get(config.ite_mode)
    if builder is None:
        raise ConfigError(f"unknown ite_mode {config.ite_mode!r}")
    plan_plus = builder(spec, psi, config.h, +1)
    plan_minus = builder(spec, psi, config.h, -1)

    if config.anchor is not None:
        anchor = float(config.anchor)
    else:
        overlap = inner_product(bra, psi) if config.prefix_steps == 0 else None
        if overlap is None:
            raise ConfigError(
                "anchor must be supplied when the grid does not start at t = 0"
            )
        if abs(overlap) == 0:
            raise ConfigError("anchor undefined: <psi'|psi> vanishes at t = 0")
        anchor = float(np.angle(overlap))

    extras: dict = {}
    if config.backend == "exact_oracle":
        t_eval = times + config.prefix_steps * config.tau
        g_real = amplitude_series(spec, bra, psi, t_eval + 0j)
        g_plus = amplitude_series(spec, bra, psi, t_eval + 1j * config.h)
        g_minus = amplitude_series(spec, bra, psi, t_eval - 1j * config.h)
        p_r = np.abs(g_real) ** 2
        p_plus = np.exp(2.0 * (np.log(np.abs(g_plus)) - plan_plus.log_c_total))
        p_minus = np.exp(2.0 * (np.log(np.abs(g_minus)) - plan_minus.log_c_total))
    elif config.backend in ("statevector_trotter", "noisy"):
        step = build_plan(
            spec, config.tau, config.tau, config.order,
            merge_half_layers=config.merge_half_layers,
        )
        total_steps = config.prefix_steps + n_points - 1
        if config.backend == "statevector_trotter":
            states = {
                _FAMILY_R: psi,
                _FAMILY_PLUS: apply_ite(plan_plus, psi),
                _FAMILY_MINUS: apply_ite(plan_minus, psi),
            }
            series = {}
            for fam, state in states.items():
                probs = np.empty(n_points)
                current = evolve(state, step, n_steps=config.prefix_steps)
                probs[0] = abs(inner_product(bra, current)) ** 2
                for k in range(1, n_points):
                    current = evolve(current, step, n_steps=1)
                    probs[k] = abs(inner_product(bra, current)) ** 2
                series[fam] = probs
            p_r, p_plus, p_minus = (
                series[_FAMILY_R], series[_FAMILY_PLUS], series[_FAMILY_MINUS]
            )
        else:
            if config.noise is None:
                raise ConfigError("noisy backend requires a noise block")
            layers_per_step = step.layers_per_step
            step_layers = step.step_layers * total_steps
            record_r = [
                (config.prefix_steps + k) * layers_per_step for k in range(n_points)
            ]
            p_r = trajectory_survivals(
                psi, step_layers, record_r, bra, config.noise, config.threads
            )
            depth_r = np.array(record_r)
            results = {}
            depths = {}
            for fam, plan in ((_FAMILY_PLUS, plan_plus), (_FAMILY_MINUS, plan_minus)):
                layers = list(plan.layers) + step_layers
                record = [plan.n_layers + d for d in record_r]
                results[fam] = trajectory_survivals(
                    psi, layers, record, bra, config.noise, config.threads
                )
                depths[fam] = np.array(record)
            p_plus, p_minus = results[_FAMILY_PLUS], results[_FAMILY_MINUS]
    else:
        raise ConfigError(f"unknown backend {config.backend!r}")

    if config.backend == "noisy":
        shots = config.noise.shots
        if shots is not None:
            p_r = _sample_series(p_r, shots, config.noise.master_seed, _FAMILY_R)
            p_plus = _sample_series(p_plus, shots, config.noise.master_seed, _FAMILY_PLUS)
            p_minus = _sample_series(p_minus, shots, config.noise.master_seed, _FAMILY_MINUS)
        extras["r_squared_raw"] = p_r.copy()
        extras["p_plus_raw"] = p_plus.copy()
        extras["p_minus_raw"] = p_minus.copy()
        gamma, n_sites = config.noise.gamma, spec.n_sites
        clamp_flags = np.zeros(n_points, dtype=bool)
        mitigated = []
        for probs, depth in (
            (p_r, depth_r), (p_plus, depths[_FAMILY_PLUS]), (p_minus, depths[_FAMILY_MINUS])
        ):
            out = np.empty_like(probs)
            for k in range(n_points):
                out[k], clamped = mitigate_rescale(
                    float(probs[k]), gamma, n_sites, int(depth[k])
                )
                clamp_flags[k] |= clamped
            mitigated.append(out)
        p_r, p_plus, p_minus = mitigated
        extras["p_plus_mitigated"] = p_plus.copy()
        extras["p_minus_mitigated"] = p_minus.copy()
        extras["clamped"] = clamp_flags
        effective_shots = shots
    else:
        effective_shots = config.shots
        if effective_shots is not None:
            p_r = _sample_series(p_r, effective_shots, config.seed, _FAMILY_R)
            p_plus = _sample_series(p_plus, effective_shots, config.seed, _FAMILY_PLUS)
            p_minus = _sample_series(p_minus, effective_shots, config.seed, _FAMILY_MINUS)

    if effective_shots is not None or config.backend == "noisy":
        # probabilities are physical after sampling / mitigation clamping
        assert np.all((p_plus >= 0) & (p_plus <= 1)), "p_plus outside [0, 1]"
        assert np.all((p_minus >= 0) & (p_minus <= 1)), "p_minus outside [0, 1]"

    trace = reconstruct_trace(
        times,
        np.sqrt(np.maximum(p_r, 0.0)),
        p_plus,
        p_minus,
        plan_plus.log_c_total,
        plan_minus.log_c_total,
        config.h,
        rule=config.rule,
        anchor=anchor,
        zero_correction=config.zero_correction,
        threshold=config.threshold,
        shots=effective_shots,
    )
    for key, value in extras.items():
        setattr(trace, key, value)
    return trace
