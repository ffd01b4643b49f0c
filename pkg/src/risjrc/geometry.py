"""Array steering vectors and direction-cosine transforms.

Conventions used throughout the package:

* ULAs (base station and user) are half-wavelength spaced, so the phase
  step per element is ``pi * sin(theta)``.
* The RIS is a square planar array indexed row-major: the full steering
  vector factors as ``kron(r_x(vx), r_y(vy))`` with the horizontal axis
  as the outer Kronecker factor.  RIS phase profiles share this ordering.
* Angles cross API boundaries in degrees; everything internal is radians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DirectionCosine:
    """Point (vx, vy) on the unit disk of direction cosines."""

    vx: float
    vy: float

    def __post_init__(self):
        if not (math.isfinite(self.vx) and math.isfinite(self.vy)):
            raise ValueError("direction cosines must be finite")
        if abs(self.vx) > 1.0 or abs(self.vy) > 1.0:
            raise ValueError(f"direction cosines must lie in [-1, 1], got ({self.vx}, {self.vy})")

    def as_array(self) -> np.ndarray:
        return np.array([self.vx, self.vy])


def ula_steering(theta_deg: float, n_elems: int) -> np.ndarray:
    """Steering vector of a half-wavelength ULA toward angle ``theta_deg``.

    Entry n (1-based) is exp(1j * (n-1) * pi * sin(theta)).
    """
    if not math.isfinite(theta_deg):
        raise ValueError("steering angle must be finite")
    if n_elems < 1:
        raise ValueError("n_elems must be >= 1")
    theta = math.radians(theta_deg)
    n = np.arange(n_elems)
    return np.exp(1j * n * np.pi * math.sin(theta))


def direction_cosines(azimuth_deg: float, elevation_deg: float) -> DirectionCosine:
    """Direction cosines (sin(el)*sin(az), sin(el)*cos(az)) of a direction."""
    if not (math.isfinite(azimuth_deg) and math.isfinite(elevation_deg)):
        raise ValueError("angles must be finite")
    az = math.radians(azimuth_deg)
    el = math.radians(elevation_deg)
    return DirectionCosine(math.sin(el) * math.sin(az), math.sin(el) * math.cos(az))


def ris_axis_steering(v: float, n_axis: int, spacing_wavelengths: float = 0.25) -> np.ndarray:
    """Steering vector along one RIS axis for direction cosine ``v``.

    Entry n (1-based) is exp(1j * 2*pi * spacing * (n-1) * v).  Spacing is
    in wavelengths and must be in (0, 0.5] to avoid grating lobes.
    """
    if not (0.0 < spacing_wavelengths <= 0.5):
        raise ValueError(f"spacing must be in (0, 0.5] wavelengths, got {spacing_wavelengths}")
    if not math.isfinite(v) or abs(v) > 1.0:
        raise ValueError(f"direction cosine must be in [-1, 1], got {v}")
    if n_axis < 1:
        raise ValueError("n_axis must be >= 1")
    n = np.arange(n_axis)
    return np.exp(2j * np.pi * spacing_wavelengths * n * v)


def ris_full_steering(v: DirectionCosine, n_ris: int, spacing_wavelengths: float = 0.25) -> np.ndarray:
    """Full RIS steering vector, Kronecker of the two axis vectors."""
    n_axis = axis_size(n_ris)
    rx = ris_axis_steering(v.vx, n_axis, spacing_wavelengths)
    ry = ris_axis_steering(v.vy, n_axis, spacing_wavelengths)
    return np.kron(rx, ry)


def axis_size(n_ris: int) -> int:
    """Side length of the square RIS; rejects non-square element counts."""
    n_axis = math.isqrt(n_ris)
    if n_axis * n_axis != n_ris:
        raise ValueError(f"RIS element count must be a perfect square, got {n_ris}")
    return n_axis


def direction_grid(d: int) -> np.ndarray:
    """Cell-centered grid of ``d`` equally spaced direction cosines in [-1, 1].

    Point j (1-based) sits at -1 + (2j-1)/d, the center of the j-th of the
    d equal cells tiling [-1, 1].
    """
    if d < 1:
        raise ValueError("grid size must be >= 1")
    j = np.arange(1, d + 1)
    return -1.0 + (2.0 * j - 1.0) / d


def nearest_grid_index(v: float, d: int) -> int:
    """1-based index of the grid cell whose center is nearest to ``v``."""
    grid = direction_grid(d)
    return int(np.argmin(np.abs(grid - v))) + 1
