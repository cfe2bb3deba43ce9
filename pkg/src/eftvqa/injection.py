"""Rotation-state injection: closed-form statistics and repeat-until-success simulation.

A logical Rz(theta) consumes an injected |m_theta> state.  Consumption succeeds
with probability 1/2; on failure Rz(-theta) was applied instead and a fresh
state for 2*theta is consumed next, so after g attempts the net rotation is
-(2^(g-1) - 1) theta + 2^(g-1) theta = theta.

Injection itself is post-selected: one trial takes 2 stabilizer rounds and
passes with probability p_pass, so its latency in trials is geometric(p_pass).
One consumption attempt takes 2d rounds (two lattice-surgery steps).
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, asdict
from fractions import Fraction

import numpy as np

from .noise import CodeParams

ROUNDS_PER_TRIAL = 2


@dataclass(frozen=True)
class InjectionAnalytics:
    p_phys: float
    d: int
    p_pass: float
    expected_trials: float
    stddev_trials: float
    n_trials: float
    p_within: float
    p_within_window: float
    c: float
    alpha: float
    beta: float
    shuffle_feasible: bool


def analytics(p_phys: float, d: int) -> InjectionAnalytics:
    """Post-selection statistics and the patch-shuffling feasibility window.

    ``n_trials = E[X] + sigma[X]``; ``p_within = 1 - (1 - p_pass)^n_trials``;
    shuffling is feasible when ``n_trials <= 2d``, i.e. ``p^2 - p + c >= 0``
    with ``c = (4d^2 - 4d + 1) / (8 d^2 (d^2 - 1))``, i.e. p <= alpha.
    """
    if not 0 <= p_phys < 1:
        raise ValueError("p_phys must be in [0, 1)")
    if d < 3:
        raise ValueError("d must be >= 3")
    p_pass = 1 - 2 * p_phys * (1 - p_phys) * (d * d - 1)
    if p_pass <= 0:
        raise ValueError("post-selection never passes at this (p, d)")
    q = 1 - p_pass
    ex = 1 / p_pass
    sd = math.sqrt(q) / p_pass
    n_trials = ex + sd
    p_within = 1 - q ** n_trials
    window = 1 - q ** math.floor(2 * d)  # P[X <= 2d]
    c = (4 * d * d - 4 * d + 1) / (8 * d * d * (d * d - 1))
    disc = math.sqrt(1 - 4 * c)
    alpha, beta = (1 - disc) / 2, (1 + disc) / 2
    return InjectionAnalytics(
        p_phys, d, p_pass, ex, sd, n_trials, p_within, window, c, alpha, beta,
        n_trials <= 2 * d,
    )


def rus_multipliers(g: int) -> list[int]:
    """Angle multipliers consumed by attempts 1..g: 1, 2, 4, ..."""
    if g < 1:
        raise ValueError("need at least one attempt")
    return [1 << j for j in range(g)]


def net_rotation(g: int, theta: Fraction | int = 1) -> Fraction:
    """Net rotation after g attempts (g-1 failures then a success), exactly.

    ``theta`` is a rational multiple of pi; the result is reduced mod 2 (i.e.
    mod 2 pi) in the same units.
    """
    theta = Fraction(theta)
    mults = rus_multipliers(g)
    applied = sum(-m * theta for m in mults[:-1]) + mults[-1] * theta
    return applied % 2


@dataclass(frozen=True)
class ShufflePolicy:
    kind: str  # wait_and_inject | naive | patch_shuffling
    b: int = 0

    def __post_init__(self):
        if self.kind not in ("wait_and_inject", "naive", "patch_shuffling"):
            raise ValueError(f"unknown policy {self.kind!r}")
        if self.kind == "naive" and self.b < 1:
            raise ValueError("naive policy needs b >= 1")

    @property
    def magic_patches(self) -> int:
        return {"wait_and_inject": 1, "naive": self.b, "patch_shuffling": 2}[self.kind]

    @property
    def label(self) -> str:
        return f"naive({self.b})" if self.kind == "naive" else self.kind

    @classmethod
    def parse(cls, text: str) -> "ShufflePolicy":
        text = text.strip()
        if text.startswith("naive"):
            b = int(text[text.index("(") + 1:text.index(")")]) if "(" in text else 1
            return cls("naive", b)
        return cls(text)


@dataclass(frozen=True)
class PipelineStats:
    policy: str
    b: int
    p_phys: float
    d: int
    trials: int
    mean_attempts: float
    mean_stall_cycles: float
    mean_volume: float
    stall_free_fraction: float
    on_time_fraction: float
    magic_patches: int

    def to_dict(self) -> dict:
        return asdict(self)


def _rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def simulate_rus(theta: float, policy: ShufflePolicy, code: CodeParams | None = None,
                 trials: int = 100_000, seed: int = 0, p_phys: float | None = None,
                 ) -> PipelineStats:
    """Monte Carlo of one logical Rz per trial under a provisioning policy.

    Times are in clock cycles (1 cycle = d rounds).  ``p_phys`` overrides the
    code's error rate (allows p = 0).  ``theta`` only enters the angle
    bookkeeping, which is exact; timing does not depend on it.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    code = code or CodeParams()
    d = code.d
    p = code.p_phys if p_phys is None else p_phys
    ana = analytics(p, d)
    rng = _rng(seed)
    g = rng.geometric(0.5, size=trials)
    gmax = int(g.max())
    # injection latency (rounds) of the state for attempt j (column j-1)
    lat = ROUNDS_PER_TRIAL * rng.geometric(ana.p_pass, size=(trials, gmax))
    window = 2 * d  # rounds per consumption attempt
    later = np.arange(gmax)[None, :] < g[:, None]  # attempts actually made
    later[:, 0] = False  # first state is ready before the Rz is reached

    if policy.kind == "wait_and_inject":
        stall = np.where(later, lat, 0).sum(axis=1)
    elif policy.kind == "naive":
        needs = later & (np.arange(gmax)[None, :] >= policy.b)
        stall = np.where(needs, lat, 0).sum(axis=1)
    else:
        # idle patch prepares the next state during the current window
        stall = np.where(later, np.maximum(lat - window, 0), 0).sum(axis=1)
    total_rounds = g * window + stall
    volume = policy.magic_patches * total_rounds / d
    if policy.kind == "patch_shuffling":
        made = later.sum()
        on = (later & (lat <= window)).sum()
        on_time_frac = float(on / made) if made else 1.0
    else:
        on_time_frac = float((stall == 0).mean())
    return PipelineStats(
        policy.label, policy.b, p, d, trials,
        float(g.mean()), float(stall.mean() / d), float(volume.mean()),
        float((stall == 0).mean()), on_time_frac, policy.magic_patches,
    )


def policy_spacetime(code: CodeParams | None = None, trials: int = 100_000, seed: int = 0,
                     max_b: int = 4, p_phys: float | None = None) -> list[PipelineStats]:
    """Compare naive(1..max_b), patch shuffling and wait-and-inject on the same seed."""
    policies = [ShufflePolicy("naive", b) for b in range(1, max_b + 1)]
    policies += [ShufflePolicy("patch_shuffling"), ShufflePolicy("wait_and_inject")]
    return [simulate_rus(0.1, pol, code, trials, seed, p_phys) for pol in policies]


def stats_csv(rows: list[PipelineStats]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["policy", "b", "p_phys", "d", "mean_attempts", "stall_free_fraction",
                "mean_volume"])
    for r in rows:
        w.writerow([r.policy, r.b, r.p_phys, r.d, f"{r.mean_attempts:.6f}",
                    f"{r.stall_free_fraction:.6f}", f"{r.mean_volume:.6f}"])
    return buf.getvalue()
