"""Order parameters and phase classification for a swarm snapshot.

Injected agents never enter a herd metric: interventions are judged by
what they do to the original population.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.spatial.distance import pdist

from .dynamics import SwarmState, visibility

ZERO_SPEED = 1e-12


class Phase(str, Enum):
    NOMADIC = "Nomadic"
    FLOCKING = "Flocking"
    STAMPEDE = "Stampede"


@dataclass(frozen=True)
class PhaseThresholds:
    phi_hi: float = 0.9
    phi_lo: float = 0.3
    density_hi: float = 0.5
    window: int = 10

    def __post_init__(self):
        if not (0.0 <= self.phi_lo < self.phi_hi <= 1.0):
            raise ValueError(f"need 0 <= phi_lo < phi_hi <= 1, got {self.phi_lo}, {self.phi_hi}")
        if not 0.0 <= self.density_hi <= 1.0:
            raise ValueError("density_hi must lie in [0, 1]")
        if int(self.window) != self.window or self.window < 1:
            raise ValueError("window must be a positive integer")


@dataclass(frozen=True)
class PhaseReport:
    t: int
    phi: float
    phi_window: float
    velocity_diameter: float
    participation_ratio: float
    mean_degree_fraction: float
    phase: Phase
    peeled_count: int = 0


# --- array-level metrics --------------------------------------------------

def polarization_of(v: np.ndarray) -> tuple:
    """Return ``(phi, degenerate)`` for a stack of velocities."""
    v = np.asarray(v, dtype=float)
    speed = np.sqrt(np.sum(v * v, axis=1))
    moving = speed > ZERO_SPEED
    m = int(np.count_nonzero(moving))
    if m == 0:
        return 0.0, True
    units = v[moving] / speed[moving, None]
    phi = float(np.sqrt(np.sum(np.sum(units, axis=0) ** 2)) / m)
    return min(phi, 1.0), False


def velocity_diameter_of(v: np.ndarray) -> float:
    v = np.asarray(v, dtype=float)
    if len(v) < 2:
        return 0.0
    return float(np.max(pdist(v)))


def participation_ratio_of(x: np.ndarray) -> float:
    """Effective dimensionality (sum l)^2 / sum l^2 of the positional covariance."""
    x = np.asarray(x, dtype=float)
    if len(x) < 2:
        raise ValueError("participation ratio needs at least two agents")
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered / len(x)
    eig = np.clip(np.linalg.eigvalsh(cov), 0.0, None)
    total = float(np.sum(eig))
    if total < 1e-12:
        return 1.0
    pr = total ** 2 / float(np.sum(eig ** 2))
    return float(min(max(pr, 1.0), x.shape[1]))


# --- state-level metrics --------------------------------------------------

def polarization(state: SwarmState) -> float:
    return polarization_of(state.v[state.regular])[0]


def polarization_degenerate(state: SwarmState) -> bool:
    return polarization_of(state.v[state.regular])[1]


def velocity_diameter(state: SwarmState) -> float:
    return velocity_diameter_of(state.v[state.regular])


def participation_ratio(state: SwarmState) -> float:
    return participation_ratio_of(state.x[state.regular])


def mean_degree_fraction(state: SwarmState) -> float:
    """Mean count of regular effective neighbors over (n_regular - 1)."""
    reg = state.regular
    m = int(np.count_nonzero(reg))
    if m < 2:
        return 0.0
    vis = visibility(state)[np.ix_(reg, reg)]
    return float(np.mean(np.sum(vis, axis=1)) / (m - 1))


def classify_phase(phi: float, density: float, thresholds: PhaseThresholds = PhaseThresholds()) -> Phase:
    """Label from a (window-averaged) polarization and the mean degree fraction."""
    if phi >= thresholds.phi_hi and density >= thresholds.density_hi:
        return Phase.STAMPEDE
    if phi <= thresholds.phi_lo:
        return Phase.NOMADIC
    return Phase.FLOCKING


# --- peel-off -------------------------------------------------------------

def herd_direction(state: SwarmState) -> np.ndarray:
    mean_v = np.mean(state.v[state.regular], axis=0)
    norm = float(np.linalg.norm(mean_v))
    if norm <= ZERO_SPEED:
        raise ValueError("herd has zero mean velocity; no direction to capture")
    return mean_v / norm


def _exceeds(v: np.ndarray, direction: np.ndarray, theta: float) -> np.ndarray:
    speed = np.linalg.norm(v, axis=1)
    cos = np.divide(v @ direction, speed, out=np.ones(len(v)), where=speed > ZERO_SPEED)
    # a stopped agent has no heading and is never counted as turned away
    return np.arccos(np.clip(cos, -1.0, 1.0)) > theta


def peel_flags(history, direction, theta_peel: float = math.radians(60), t_peel: int = 20) -> np.ndarray:
    """Per-agent peel flags at the end of a velocity history.

    ``history`` is a sequence of ``(n, k)`` velocity arrays, one per step.
    An agent is peeled when its heading has been more than ``theta_peel``
    away from ``direction`` for the last ``t_peel`` consecutive steps.
    """
    direction = np.asarray(direction, dtype=float)
    if np.linalg.norm(direction) <= ZERO_SPEED:
        raise ValueError("zero herd direction")
    direction = direction / np.linalg.norm(direction)
    streak = None
    for v in history:
        hit = _exceeds(np.asarray(v, dtype=float), direction, theta_peel)
        streak = np.zeros(len(hit), dtype=int) if streak is None else streak
        streak = np.where(hit, streak + 1, 0)
    if streak is None:
        return np.zeros(0, dtype=bool)
    return streak >= t_peel


def peel_count(history, direction, theta_peel: float = math.radians(60), t_peel: int = 20) -> int:
    return int(np.count_nonzero(peel_flags(history, direction, theta_peel, t_peel)))


class PeelTracker:
    """Streak counter over the regular agents present at capture time."""

    def __init__(self, state: SwarmState, theta_peel: float = math.radians(60), t_peel: int = 20):
        self.direction = herd_direction(state)
        self.ids = np.flatnonzero(state.regular)
        self.rigidity = state.rigidity[self.ids].copy()
        self.theta_peel = theta_peel
        self.t_peel = t_peel
        self.streak = np.zeros(len(self.ids), dtype=int)

    def update(self, state: SwarmState) -> int:
        hit = _exceeds(state.v[self.ids], self.direction, self.theta_peel)
        self.streak = np.where(hit, self.streak + 1, 0)
        return self.count

    @property
    def flags(self) -> np.ndarray:
        return self.streak >= self.t_peel

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.flags))

    def rates(self, split: float = 0.5) -> tuple:
        """Peel rates among (rigidity < split, rigidity >= split); nan for an empty stratum."""
        low = self.rigidity < split
        out = []
        for mask in (low, ~low):
            out.append(float(np.mean(self.flags[mask])) if mask.any() else math.nan)
        return tuple(out)


class PhaseRecorder:
    """Metric sink for :func:`stampede.dynamics.run`.

    Keeps the trailing window of polarization values used to classify
    the phase, and an optional peel tracker installed at injection time.
    """

    def __init__(self, thresholds: PhaseThresholds = PhaseThresholds()):
        self.thresholds = thresholds
        self.window = deque(maxlen=thresholds.window)
        self.peel: Optional[PeelTracker] = None

    def __call__(self, state: SwarmState) -> PhaseReport:
        phi = polarization(state)
        self.window.append(phi)
        phi_w = float(np.mean(self.window))
        density = mean_degree_fraction(state)
        pr = participation_ratio(state) if np.count_nonzero(state.regular) >= 2 else 1.0
        peeled = self.peel.update(state) if self.peel is not None else 0
        return PhaseReport(
            t=state.t,
            phi=phi,
            phi_window=phi_w,
            velocity_diameter=velocity_diameter(state),
            participation_ratio=pr,
            mean_degree_fraction=density,
            phase=classify_phase(phi_w, density, self.thresholds),
            peeled_count=peeled,
        )
