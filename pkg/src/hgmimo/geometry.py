"""Uniform planar arrays, 3D rotations and the beam-steering transform.

Rotations are right-handed about the coordinate axes. A tilt (theta_x,
theta_y) rotates first about X by theta_x and then about Y by theta_y, so
the composite matrix is ``R_Y(theta_y) @ R_X(theta_x)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class ArrayGeometry:
    """(2 nx + 1) x (2 ny + 1) grid with spacing ``spacing`` on the plane z = plane_z."""

    nx: int
    ny: int
    spacing: float
    plane_z: float = 0.0

    def __post_init__(self):
        if self.nx < 0 or self.ny < 0:
            raise DomainError("half counts must be non-negative")
        if not self.spacing > 0:
            raise DomainError("element spacing must be positive")

    @classmethod
    def square(cls, n, spacing, plane_z=0.0):
        return cls(n, n, spacing, plane_z)

    @property
    def shape(self):
        return (2 * self.nx + 1, 2 * self.ny + 1)

    @property
    def size(self):
        return self.shape[0] * self.shape[1]

    @property
    def center(self):
        return np.array([0.0, 0.0, self.plane_z])

    @property
    def span(self):
        return (2 * self.nx * self.spacing, 2 * self.ny * self.spacing)

    def index_of(self, i, j):
        """Flat position of element (i, j), with -nx <= i <= nx and j fastest."""
        return (i + self.nx) * (2 * self.ny + 1) + (j + self.ny)


@dataclass(frozen=True)
class Tilt:
    theta_x: float = 0.0
    theta_y: float = 0.0

    @classmethod
    def from_degrees(cls, theta_x_deg, theta_y_deg):
        return cls(math.radians(theta_x_deg), math.radians(theta_y_deg))

    @property
    def degrees(self):
        return (math.degrees(self.theta_x), math.degrees(self.theta_y))

    def inverse(self):
        return Tilt(-self.theta_x, -self.theta_y)

    @property
    def is_zero(self):
        return self.theta_x == 0.0 and self.theta_y == 0.0

    def faces_forward(self):
        return abs(self.theta_x) < math.pi / 2 and abs(self.theta_y) < math.pi / 2


def rot_x(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rotation_matrix(tilt):
    return rot_y(tilt.theta_y) @ rot_x(tilt.theta_x)


def rotate(tilt, p, pivot=None):
    """Rotate point(s) ``p`` (..., 3) by ``tilt`` about ``pivot`` (origin by default)."""
    p = np.asarray(p, dtype=np.float64)
    r = rotation_matrix(tilt)
    if pivot is None:
        return p @ r.T
    pivot = np.asarray(pivot, dtype=np.float64)
    return (p - pivot) @ r.T + pivot


def unrotate(tilt, p, pivot=None):
    """Inverse of :func:`rotate`: R_X(-theta_x) applied after R_Y(-theta_y)."""
    p = np.asarray(p, dtype=np.float64)
    r_inv = rot_x(-tilt.theta_x) @ rot_y(-tilt.theta_y)
    if pivot is None:
        return p @ r_inv.T
    pivot = np.asarray(pivot, dtype=np.float64)
    return (p - pivot) @ r_inv.T + pivot


def element_positions(array):
    """(size, 3) element coordinates in canonical order (row-major, j fastest)."""
    i = np.arange(-array.nx, array.nx + 1) * array.spacing
    j = np.arange(-array.ny, array.ny + 1) * array.spacing
    xx, yy = np.meshgrid(i, j, indexing="ij")
    return np.column_stack([xx.ravel(), yy.ravel(), np.full(xx.size, float(array.plane_z))])


def steered_sample_points(array, tilt, pivot="center"):
    """Points at which the beam field is sampled to steer an array by ``tilt``.

    Each element position is rotated by the inverse tilt R(-theta_x, -theta_y).
    With ``pivot="center"`` (the default) the plane turns about the array
    center, so the array stays on the beam axis and its footprint in the beam
    is stretched; with ``pivot="origin"`` it turns about the beam focus.
    In the beam frame these points are also the physical positions of the
    tilted array's elements.
    """
    pts = element_positions(array)
    if tilt.is_zero:
        return pts
    if pivot == "center":
        centre = array.center
    elif pivot == "origin":
        centre = None
    else:
        raise DomainError(f"unknown pivot {pivot!r}")
    return rotate(tilt.inverse(), pts, pivot=centre)


def array_frame(tilt=Tilt(), facing=+1):
    """Rows: local horizontal axis, local vertical axis, boresight.

    ``facing=+1`` points the boresight along +Z before tilting (a TX array
    sending toward +Z), ``-1`` along -Z (an RX array looking back at it). The
    frame is rotated by the inverse tilt to match :func:`steered_sample_points`.
    """
    base = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, float(facing)]])
    if facing < 0:
        base[0, 0] = -1.0  # keep the local frame right-handed
    return rotate(tilt.inverse(), base)
