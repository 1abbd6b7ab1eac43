"""Monte-Carlo simulation harness for the bearing/range tracking filters.

Ground truth integrates the continuous kinematics pdot = v, vdot = a(t) with
forward Euler at a fine step and samples it at the filter rate.  Filters see
a piecewise-constant accelerometer input (true acceleration at the sample
instant plus noise held constant over the interval) and noisy bearing/range
measurements.  Everything is driven by one integer seed: run i of a config
with seed s uses numpy's default_rng seeded with [s, i], so any run of any
batch can be reproduced in isolation.

Per-run draw order (fixed for reproducibility): initial position offset (3),
initial velocity offset (3), then the measurement blocks of
corrupt_measurements in the order acceleration noise, bearing axes, bearing
angles, range noise.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from . import baselines, filter as flt
from .filter import ChartDomainError, ConcentratedGaussian, chart_sensitivity
from .groups import DomainError, Sim3
from .kinematics import KinematicInput, KinematicState, make_model, state_action

FILTER_NAMES = ("eqf", "eqf-noreset", "ekf")

# ridge keeping filter noise matrices invertible when a true sigma is zero
COV_FLOOR = 1e-9
PROCESS_RIDGE = 1e-12

# chart-step guard for the harness: initial errors of several meters per
# second produce legitimate corrections above the conservative library
# default of 1.0, so give the transient ~10 sigma of headroom while still
# aborting genuinely exploding runs
MAX_CHART_STEP = 25.0


class ConfigError(ValueError):
    """Raised for unknown keys or inconsistent values in a run configuration."""


def _cosine_profile(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape + (3,))
    out[..., 1] = np.cos(t)
    return out


def _zero_profile(t):
    t = np.asarray(t, dtype=float)
    return np.zeros(t.shape + (3,))


PROFILES = {"cosine": _cosine_profile, "zero": _zero_profile}


@dataclass(frozen=True)
class SimConfig:
    """Experiment parameters; all noise scales are true-noise parameters.

    The filters' gain matrices are derived from the same values: process
    noise from sigma_a and the step length, measurement covariance from
    sigma_bearing_deg / sigma_range_m, initial covariance from sigma_p0_m /
    sigma_v0_mps.
    """

    duration_s: float = 10.0
    truth_step_s: float = 1e-4
    sample_rate_hz: float = 100.0
    p0: tuple = (0.0, 0.0, 50.0)
    v0: tuple = (0.0, 0.0, 0.0)
    profile: str = "cosine"
    sigma_a: float = math.sqrt(0.05)  # m/s^2 per axis, held constant per interval
    sigma_bearing_deg: float = 1.0
    sigma_range_m: float = 1.0
    sigma_p0_m: float = 7.5
    sigma_v0_mps: float = 2.0
    seed: int = 0
    filters: tuple = FILTER_NAMES

    def __post_init__(self):
        if self.duration_s <= 0 or self.truth_step_s <= 0 or self.sample_rate_hz <= 0:
            raise ConfigError("duration, truth step and sample rate must be positive")
        interval = 1.0 / self.sample_rate_hz
        ratio = interval / self.truth_step_s
        if abs(ratio - round(ratio)) > 1e-9 * ratio:
            raise ConfigError("truth step must divide the sample interval")
        for name in ("sigma_a", "sigma_bearing_deg", "sigma_range_m",
                     "sigma_p0_m", "sigma_v0_mps"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be nonnegative")
        if self.profile not in PROFILES:
            raise ConfigError(f"unknown acceleration profile {self.profile!r}; "
                              f"choose from {sorted(PROFILES)}")
        unknown = [f for f in self.filters if f not in FILTER_NAMES]
        if unknown:
            raise ConfigError(f"unknown filters {unknown}; choose from {list(FILTER_NAMES)}")
        object.__setattr__(self, "p0", tuple(float(x) for x in self.p0))
        object.__setattr__(self, "v0", tuple(float(x) for x in self.v0))
        if len(self.p0) != 3 or len(self.v0) != 3:
            raise ConfigError("p0 and v0 must have three components")
        object.__setattr__(self, "filters", tuple(self.filters))
        object.__setattr__(self, "seed", int(self.seed))

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def from_toml(cls, path):
        try:
            import tomllib
        except ModuleNotFoundError:  # python < 3.11
            import tomli as tomllib
        with open(path, "rb") as f:
            try:
                data = tomllib.load(f)
            except tomllib.TOMLDecodeError as exc:
                raise ConfigError(f"invalid TOML in {path}: {exc}") from None
        return cls.from_dict(data)

    @property
    def dt(self):
        return 1.0 / self.sample_rate_hz

    @property
    def steps_per_sample(self):
        return round(self.dt / self.truth_step_s)

    @property
    def n_samples(self):
        return round(self.duration_s * self.sample_rate_hz)

    @property
    def sigma_bearing_rad(self):
        return math.radians(self.sigma_bearing_deg)


@dataclass(frozen=True)
class TruthTrajectory:
    """Sampled ground truth: arrays indexed by sample (0 .. n_samples)."""

    t: np.ndarray
    p: np.ndarray
    v: np.ndarray
    accel: np.ndarray  # true acceleration at each sample instant; length n_samples

    @property
    def n_samples(self):
        return len(self.accel)

    def state(self, k):
        return KinematicState(self.p[k], self.v[k])


def simulate_truth(cfg):
    """Euler-integrate the continuous kinematics and sample at the filter rate."""
    h = cfg.truth_step_s
    n_fine = cfg.n_samples * cfg.steps_per_sample
    ts = np.arange(n_fine + 1) * h
    a = PROFILES[cfg.profile](ts[:-1])  # left endpoint of each fine step
    v = np.empty((n_fine + 1, 3))
    v[0] = cfg.v0
    v[1:] = cfg.v0 + h * np.cumsum(a, axis=0)
    p = np.empty((n_fine + 1, 3))
    p[0] = cfg.p0
    p[1:] = cfg.p0 + h * np.cumsum(v[:-1], axis=0)
    stride = cfg.steps_per_sample
    t_s = ts[::stride]
    accel = PROFILES[cfg.profile](t_s[:-1])
    return TruthTrajectory(t_s, p[::stride].copy(), v[::stride].copy(), accel)


@dataclass(frozen=True)
class MeasurementSet:
    """Noisy filter inputs/outputs; index k covers the step from sample k to k+1."""

    accel: np.ndarray    # accelerometer input over each interval, (n, 3)
    bearing: np.ndarray  # unit bearing measured at sample k+1, (n, 3)
    range: np.ndarray    # range measured at sample k+1, (n,)


def corrupt_measurements(truth, cfg, rng):
    """Apply the configured noise to inputs and outputs of one run."""
    n = truth.n_samples
    accel = truth.accel + rng.normal(size=(n, 3)) * cfg.sigma_a

    p_next = truth.p[1:]
    dist = np.linalg.norm(p_next, axis=1)
    y1 = p_next / dist[:, None]
    raw_axis = rng.normal(size=(n, 3))
    raw_axis -= (np.sum(raw_axis * y1, axis=1))[:, None] * y1
    axis = raw_axis / np.linalg.norm(raw_axis, axis=1)[:, None]
    ang = rng.normal(size=n) * cfg.sigma_bearing_rad
    # rotate y1 by ang about an orthogonal axis: unit norm is preserved exactly
    bearing = np.cos(ang)[:, None] * y1 + np.sin(ang)[:, None] * np.cross(axis, y1)
    rng_noise = rng.normal(size=n) * cfg.sigma_range_m
    return MeasurementSet(accel, bearing, dist + rng_noise)


def measurement_covariance(yhat, cfg):
    """4x4 noise covariance fed to the symmetry-based filters.

    Isotropic tangent-plane bearing model built around the predicted bearing
    (its radial ridge is then exactly annihilated by the output matrix), plus
    the scalar range variance.  The corruption rotates the bearing by a
    Gaussian angle about a random tangent axis, which spreads the angle
    variance isotropically over the two tangent directions, so the per-axis
    variance is half the angle variance.
    """
    var_b = max(cfg.sigma_bearing_rad ** 2 / 2.0, COV_FLOOR)
    Q = np.zeros((4, 4))
    Q[:3, :3] = var_b * (np.eye(3) - np.outer(yhat, yhat)) \
        + COV_FLOOR * np.outer(yhat, yhat)
    Q[3, 3] = max(cfg.sigma_range_m ** 2, COV_FLOOR)
    return Q


def process_noise_physical(cfg):
    """Covariance of one step's state disturbance from the accelerometer noise."""
    dt = cfg.dt
    L = np.zeros((6, 3))
    L[:3] = 0.5 * dt * dt * np.eye(3)
    L[3:] = dt * np.eye(3)
    return cfg.sigma_a ** 2 * (L @ L.T) + PROCESS_RIDGE * np.eye(6)


def initial_covariance_physical(cfg):
    var_p = max(cfg.sigma_p0_m ** 2, COV_FLOOR)
    var_v = max(cfg.sigma_v0_mps ** 2, COV_FLOOR)
    return np.diag([var_p] * 3 + [var_v] * 3)


@dataclass
class FilterTrack:
    """Per-sample metrics for one filter in one run."""

    name: str
    p_est: np.ndarray
    v_est: np.ndarray
    pos_err: np.ndarray
    vel_err: np.ndarray
    energy: np.ndarray
    diverged_at: Optional[float] = None


@dataclass
class RunRecord:
    run: int
    t: np.ndarray
    tracks: dict


class _EqfRunner:
    """Symmetry-based filter over one run; origin = initial estimate."""

    def __init__(self, cfg, est0, transport):
        self.cfg = cfg
        self.transport = transport
        self.origin = est0
        self.model = make_model(est0, cfg.dt)
        J = chart_sensitivity(self.model, Sim3.identity())
        cov0 = J @ initial_covariance_physical(cfg) @ J.T
        self.belief = ConcentratedGaussian(Sim3.identity(), np.zeros(6), cov0)
        self.P_phys = process_noise_physical(cfg)

    def _chart_noise(self, ref_next):
        J = chart_sensitivity(self.model, ref_next)
        return J @ self.P_phys @ J.T

    def step(self, accel, y1, y2):
        model = self.model
        u = KinematicInput(np.zeros(3), accel)
        belief = flt.predict(self.belief, model, u, self._chart_noise)
        yhat = model.output(state_action(belief.ref, self.origin))
        Q = measurement_covariance(yhat[:3], self.cfg)
        y = np.concatenate([y1, [y2]])
        belief = flt.update(belief, model, y, Q)
        self.belief = flt.reset(belief, model, transport=self.transport,
                                max_step=MAX_CHART_STEP)

    def estimate(self):
        est = state_action(self.belief.ref, self.origin)
        return est.p, est.v

    def energy(self, true_state):
        err = flt.equivariant_error(self.model, self.belief.ref, true_state)
        eps = self.model.chart_inv(err)
        return flt.filter_energy(eps, self.belief.cov)


class _EkfRunner:
    """Classical EKF that linearizes the bearing/range outputs at its mean."""

    def __init__(self, cfg, est0):
        self.cfg = cfg
        self.belief = baselines.EkfBelief(est0.as_vector(),
                                          initial_covariance_physical(cfg))
        self.P = process_noise_physical(cfg)
        # per-tangent-axis bearing variance, see measurement_covariance
        self.var_b = max(cfg.sigma_bearing_rad ** 2 / 2.0, COV_FLOOR)
        self.var_r = max(cfg.sigma_range_m ** 2, COV_FLOOR)

    def step(self, accel, y1, y2):
        belief = baselines.ekf_predict(self.belief, accel, self.cfg.dt, self.P)
        self.belief = baselines.ekf_update_bearing_range(belief, y1, y2,
                                                         self.var_b, self.var_r)

    def estimate(self):
        return self.belief.p.copy(), self.belief.v.copy()

    def energy(self, true_state):
        return baselines.ekf_energy(self.belief, true_state)


def _make_runner(name, cfg, est0):
    if name == "eqf":
        return _EqfRunner(cfg, est0, transport=True)
    if name == "eqf-noreset":
        return _EqfRunner(cfg, est0, transport=False)
    if name == "ekf":
        return _EkfRunner(cfg, est0)
    raise ConfigError(f"unknown filter {name!r}")


def run_experiment(cfg, run_index=0):
    """Simulate one seeded run of every configured filter.

    A filter that leaves its chart domain (divergence) stops producing
    samples; the abort time is recorded on its track and the run carries on
    for the other filters.
    """
    rng = np.random.default_rng([cfg.seed, run_index])
    truth = simulate_truth(cfg)
    est0 = KinematicState(np.asarray(cfg.p0) + rng.normal(size=3) * cfg.sigma_p0_m,
                          np.asarray(cfg.v0) + rng.normal(size=3) * cfg.sigma_v0_mps)
    meas = corrupt_measurements(truth, cfg, rng)

    n = truth.n_samples
    tracks = {}
    runners = {}
    for name in cfg.filters:
        runners[name] = _make_runner(name, cfg, est0)
        tracks[name] = FilterTrack(name,
                                   np.full((n + 1, 3), np.nan),
                                   np.full((n + 1, 3), np.nan),
                                   np.full(n + 1, np.nan),
                                   np.full(n + 1, np.nan),
                                   np.full(n + 1, np.nan))

    def record(name, k):
        runner, track = runners[name], tracks[name]
        p_est, v_est = runner.estimate()
        track.p_est[k] = p_est
        track.v_est[k] = v_est
        track.pos_err[k] = np.linalg.norm(p_est - truth.p[k])
        track.vel_err[k] = np.linalg.norm(v_est - truth.v[k])
        track.energy[k] = runner.energy(truth.state(k))

    for name in cfg.filters:
        record(name, 0)
    live = set(cfg.filters)
    for k in range(n):
        for name in list(live):
            try:
                runners[name].step(meas.accel[k], meas.bearing[k], meas.range[k])
                record(name, k + 1)
            except (ChartDomainError, DomainError, np.linalg.LinAlgError):
                tracks[name].diverged_at = truth.t[k + 1]
                live.discard(name)
    return RunRecord(run_index, truth.t, tracks)


@dataclass
class Aggregate:
    """Cross-run mean/median curves per filter, plus divergence counts."""

    t: np.ndarray
    n_runs: int
    filters: tuple
    mean_pos_err: dict
    mean_vel_err: dict
    mean_energy: dict
    median_pos_err: dict
    median_vel_err: dict
    divergences: dict


def monte_carlo(cfg, n_runs):
    """Run n_runs seeded experiments and aggregate; returns (records, aggregate)."""
    records = [run_experiment(cfg, i) for i in range(n_runs)]
    t = records[0].t
    agg = Aggregate(t, n_runs, tuple(cfg.filters), {}, {}, {}, {}, {}, {})
    for name in cfg.filters:
        pos = np.stack([r.tracks[name].pos_err for r in records])
        vel = np.stack([r.tracks[name].vel_err for r in records])
        en = np.stack([r.tracks[name].energy for r in records])
        with warnings.catch_warnings():
            # all-NaN samples (every run diverged) aggregate to NaN silently
            warnings.simplefilter("ignore", RuntimeWarning)
            agg.mean_pos_err[name] = np.nanmean(pos, axis=0)
            agg.mean_vel_err[name] = np.nanmean(vel, axis=0)
            agg.mean_energy[name] = np.nanmean(en, axis=0)
            agg.median_pos_err[name] = np.nanmedian(pos, axis=0)
            agg.median_vel_err[name] = np.nanmedian(vel, axis=0)
        agg.divergences[name] = sum(1 for r in records
                                    if r.tracks[name].diverged_at is not None)
    return records, agg
