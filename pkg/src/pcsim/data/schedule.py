"""Smooth zero -> peak -> zero force schedules for the loaded beam edge."""

from dataclasses import dataclass

import numpy as np

from .params import ParamRanges


def _smoothstep(x):
    x = np.clip(x, 0.0, 1.0)
    return x * x * (3.0 - 2.0 * x)


@dataclass
class ForceSchedule:
    """Total force on the loaded edge over normalized time.

    Two cubic Hermite segments with zero end slopes ramp the force from zero
    to `magnitude` at `t_peak` and back to zero at `t_zero`; the force stays
    zero afterwards. The peak therefore equals the sampled magnitude exactly.
    """

    magnitude: np.ndarray  # (2,) peak (horizontal, vertical) force
    t_peak: float = 0.4
    t_zero: float = 0.8

    def __post_init__(self):
        self.magnitude = np.asarray(self.magnitude, dtype=np.float64)
        if not 0.0 < self.t_peak < self.t_zero:
            raise ValueError("need 0 < t_peak < t_zero")

    def scalar(self, frac):
        """Dimensionless multiplier in [0, 1] at normalized time(s) `frac`."""
        frac = np.asarray(frac, dtype=np.float64)
        up = _smoothstep(frac / self.t_peak)
        down = 1.0 - _smoothstep((frac - self.t_peak) / (self.t_zero - self.t_peak))
        return np.where(frac <= self.t_peak, up, np.where(frac < self.t_zero, down, 0.0))

    def tabulate(self, internal_steps: int) -> np.ndarray:
        """(S + 1, 2) total edge force at the internal time grid 0..1."""
        fracs = np.arange(internal_steps + 1, dtype=np.float64) / internal_steps
        return self.scalar(fracs)[:, None] * self.magnitude[None, :]


def sample_schedule(rng, ranges: ParamRanges) -> ForceSchedule:
    fh = rng.uniform(-ranges.force_horizontal, ranges.force_horizontal)
    fv = rng.uniform(-ranges.force_vertical, ranges.force_vertical)
    return ForceSchedule(magnitude=np.array([fh, fv]))
