"""Reflexive coordination loop between a market price and an outcome.

Per step, with p_bar the neutral anchor:

    beta_i = polarity_i * sigma_i * (p_t - p_bar)
    B_t    = sum_i omega_i * beta_i
    O_t    = clamp01(X_t + kappa * B_t + eps_t)
    p_t+1  = clamp01(p_t + alpha * (O_t - p_t) + eta * dI_t + nu_t)
    X_t+1  = X_t + x_drift + x_vol * xi_t

In the interior dO/dp = kappa * sum_i polarity_i * omega_i * sigma_i.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import ConfigInvalid, PerturbationOutOfRange


@dataclass(frozen=True)
class AudienceSpec:
    name: str
    omega: float
    sigma: float
    # -1 marks a counter-mobilising audience (reacts against the signal)
    polarity: int = 1

    def __post_init__(self):
        if not (self.omega >= 0 and self.sigma >= 0):
            raise ConfigInvalid(f"audience {self.name!r}: omega and sigma must be >= 0")
        if self.polarity not in (1, -1):
            raise ConfigInvalid(f"audience {self.name!r}: polarity must be +1 or -1")


@dataclass(frozen=True)
class SimConfig:
    horizon: int = 200
    p0: float = 0.5
    x0: float | None = None  # defaults to p0
    x_drift: float = 0.0
    x_vol: float = 0.0
    audiences: tuple[AudienceSpec, ...] = ()
    kappa: float = 0.0
    alpha: float = 0.2
    info_shocks: tuple[tuple[int, float], ...] = ()
    eta: float = 1.0
    noise_eps: float = 0.0
    noise_nu: float = 0.0
    anchor: float = 0.5
    delta: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.horizon, int) or self.horizon < 1:
            raise ConfigInvalid(f"horizon must be an integer >= 1, got {self.horizon!r}")
        if not (0 <= self.p0 <= 1):
            raise ConfigInvalid(f"p0 must lie in [0, 1], got {self.p0}")
        if not (0 <= self.anchor <= 1):
            raise ConfigInvalid("anchor must lie in [0, 1]")
        if min(self.x_vol, self.noise_eps, self.noise_nu) < 0:
            raise ConfigInvalid("standard deviations must be >= 0")
        if not self.delta > 0:
            raise ConfigInvalid("delta must be > 0")
        if self.kappa != 0 and self.audiences and sum(a.omega for a in self.audiences) <= 0:
            raise ConfigInvalid("audience weights sum to zero with nonzero kappa")
        for step, _ in self.info_shocks:
            if not 0 <= step < self.horizon:
                raise ConfigInvalid(f"info shock step {step} outside [0, horizon)")

    @property
    def start_fundamental(self) -> float:
        return self.p0 if self.x0 is None else self.x0

    @property
    def response_gain(self) -> float:
        """sum_i polarity_i * omega_i * sigma_i."""
        return math.fsum(a.polarity * a.omega * a.sigma for a in self.audiences)

    @property
    def analytic_sensitivity(self) -> float:
        return self.kappa * self.response_gain

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        d = dict(d)
        try:
            d["audiences"] = tuple(AudienceSpec(**a) for a in d.get("audiences", ()))
            d["info_shocks"] = tuple((int(s), float(v)) for s, v in d.get("info_shocks", ()))
        except (TypeError, ValueError) as exc:
            raise ConfigInvalid(f"bad audience or shock entry: {exc}") from None
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigInvalid(f"unknown sim config keys {sorted(unknown)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigInvalid(str(exc)) from None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["info_shocks"] = [list(s) for s in self.info_shocks]
        return d


def load_sim_config(path) -> SimConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigInvalid(f"cannot read sim config {path}: {exc}") from None
    if not isinstance(obj, dict):
        raise ConfigInvalid("sim config must be a JSON object")
    return SimConfig.from_dict(obj)


@dataclass(frozen=True)
class SimTrajectory:
    t: np.ndarray
    p: np.ndarray
    x: np.ndarray
    b: np.ndarray
    o: np.ndarray
    config: SimConfig = field(repr=False)

    @property
    def sigma_p(self) -> float:
        return float(np.std(self.p))

    @property
    def terminal_displacement(self) -> float:
        return float(self.p[-1] - self.p[0])

    def to_csv(self) -> str:
        lines = ["t,p,X,B,O"]
        for row in zip(self.t, self.p, self.x, self.b, self.o):
            lines.append(f"{int(row[0])},{row[1]!r},{row[2]!r},{row[3]!r},{row[4]!r}")
        return "\n".join(lines) + "\n"


def _clamp01(v: float) -> float:
    return 0.0 if v < 0.0 else 1.0 if v > 1.0 else v


def simulate(config: SimConfig) -> SimTrajectory:
    """One seeded run; T + 1 states, all randomness drawn up front."""
    n = config.horizon + 1
    rng = np.random.default_rng(config.seed)
    # same draws regardless of noise scales, so paired runs share randomness
    xi, eps, nu = rng.standard_normal((3, n))
    shocks = np.zeros(n)
    for step, d_info in config.info_shocks:
        shocks[step] += d_info

    coeffs = [(a.polarity * a.omega, a.sigma) for a in config.audiences]
    kappa, alpha, eta, anchor = config.kappa, config.alpha, config.eta, config.anchor
    s_eps, s_nu = config.noise_eps, config.noise_nu
    drift, vol = config.x_drift, config.x_vol

    p_arr, x_arr, b_arr, o_arr = (np.empty(n) for _ in range(4))
    p, x = config.p0, config.start_fundamental
    for t in range(n):
        gap = p - anchor
        b = math.fsum(w * (s * gap) for w, s in coeffs)
        o = _clamp01(x + kappa * b + s_eps * eps[t])
        p_arr[t], x_arr[t], b_arr[t], o_arr[t] = p, x, b, o
        p = _clamp01(p + alpha * (o - p) + eta * shocks[t] + s_nu * nu[t])
        x = x + drift + vol * xi[t]
    return SimTrajectory(np.arange(n), p_arr, x_arr, b_arr, o_arr, config)


def estimate_outcome_sensitivity(config: SimConfig, dp: float = 1e-4) -> float:
    """Common-random-number estimate of dO/dp.

    Runs the model from p0 + dp and p0 - dp with the same seed and returns the
    ratio of mean outcome difference to mean price difference across the path.
    """
    if not dp > 0 or config.p0 - dp < 0 or config.p0 + dp > 1:
        raise PerturbationOutOfRange(f"p0 +/- dp = {config.p0} +/- {dp} leaves [0, 1]")
    up = simulate(replace(config, p0=config.p0 + dp, x0=config.start_fundamental))
    down = simulate(replace(config, p0=config.p0 - dp, x0=config.start_fundamental))
    d_o = math.fsum(up.o - down.o)
    d_p = math.fsum(up.p - down.p)
    if d_o == 0.0 or d_p == 0.0:
        return 0.0
    return d_o / d_p


def _seeds(config: SimConfig, n_seeds: int) -> list[int]:
    return [config.seed + i for i in range(n_seeds)]


@dataclass(frozen=True)
class CoordinationResult:
    effect: float
    consequential: bool
    mean_sensitivity: float
    mean_sigma_p: float


def coordination_check(config: SimConfig, dp: float = 1e-4, n_seeds: int = 30) -> CoordinationResult:
    """|mean dO/dp| * mean sigma(p) across seeds, compared against delta."""
    if n_seeds < 1:
        raise ConfigInvalid("n_seeds must be >= 1")
    sens, sig = [], []
    for s in _seeds(config, n_seeds):
        cfg = replace(config, seed=s)
        sens.append(estimate_outcome_sensitivity(cfg, dp))
        sig.append(simulate(cfg).sigma_p)
    mean_sens = math.fsum(sens) / n_seeds
    mean_sig = math.fsum(sig) / n_seeds
    effect = abs(mean_sens) * mean_sig
    return CoordinationResult(effect, effect > config.delta, mean_sens, mean_sig)


class Regime(str, Enum):
    SELF_FULFILLING = "SELF_FULFILLING"
    SELF_DEFEATING = "SELF_DEFEATING"
    NEUTRAL = "NEUTRAL"


MIN_SIGN_SEEDS = 30


def regime_classify(
    config: SimConfig, dp: float = 1e-4, n_seeds: int = MIN_SIGN_SEEDS, sign_tolerance: float = 1e-3
) -> Regime:
    """Sign of the seed-averaged outcome sensitivity."""
    if n_seeds < MIN_SIGN_SEEDS:
        raise ConfigInvalid(f"sign testing needs n_seeds >= {MIN_SIGN_SEEDS}, got {n_seeds}")
    sens = [estimate_outcome_sensitivity(replace(config, seed=s), dp) for s in _seeds(config, n_seeds)]
    mean_sens = math.fsum(sens) / n_seeds
    if mean_sens > sign_tolerance:
        return Regime.SELF_FULFILLING
    if mean_sens < -sign_tolerance:
        return Regime.SELF_DEFEATING
    return Regime.NEUTRAL


def regime_sweep(
    config: SimConfig,
    kappas: Sequence[float],
    n_runs: int,
    dp: float = 1e-4,
    n_seeds: int = MIN_SIGN_SEEDS,
    sign_tolerance: float = 1e-3,
) -> list[dict]:
    """Classify ``n_runs`` independently seeded runs at each kappa.

    Run j uses base seed ``config.seed + j * n_seeds`` so the inner seed blocks
    never overlap.
    """
    rows = []
    for kappa in kappas:
        counts = {r: 0 for r in Regime}
        for j in range(n_runs):
            cfg = replace(config, kappa=float(kappa), seed=config.seed + j * n_seeds)
            counts[regime_classify(cfg, dp, n_seeds, sign_tolerance)] += 1
        majority = max(Regime, key=lambda r: (counts[r], r is Regime.NEUTRAL))
        rows.append(
            {
                "kappa": float(kappa),
                "n_runs": n_runs,
                "self_fulfilling": counts[Regime.SELF_FULFILLING],
                "self_defeating": counts[Regime.SELF_DEFEATING],
                "neutral": counts[Regime.NEUTRAL],
                "regime": majority.value,
            }
        )
    return rows

