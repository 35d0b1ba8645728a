"""Lattice geometry: points, storage windows, regions, interface pairs.

Spacetime is the integer lattice Z^2 (time, space) with a circle fiber; the
configuration carries angle 0 everywhere. A Window is the finite box used for
array storage, a Region is a subset of a window, and stencil_pairs enumerates
the nearest-neighbor pairs coupling a region to its in-window complement.
Everything downstream stores fields as (n_t, n_x) float arrays over a window,
row-major in (t, x).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RangeError

# Offsets (dt, dx) on which the interaction is supported, lexicographic.
STENCIL_OFFSETS = ((-1, 0), (0, -1), (0, 0), (0, 1), (1, 0))
NEIGHBOR_OFFSETS = tuple(o for o in STENCIL_OFFSETS if o != (0, 0))


@dataclass(frozen=True, order=True)
class LatticePoint:
    """A point (t, x, phi); base points of the configuration have phi = 0."""

    t: int
    x: int
    phi: float = 0.0


@dataclass(frozen=True)
class Window:
    """Closed box [t_min, t_max] x [x_min, x_max] of lattice sites."""

    t_min: int
    t_max: int
    x_min: int
    x_max: int

    def __post_init__(self):
        if self.t_min > self.t_max or self.x_min > self.x_max:
            raise RangeError(f"empty window {self}")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.t_max - self.t_min + 1, self.x_max - self.x_min + 1)

    def contains(self, t: int, x: int) -> bool:
        return self.t_min <= t <= self.t_max and self.x_min <= x <= self.x_max

    def index(self, t: int, x: int) -> tuple[int, int]:
        if not self.contains(t, x):
            raise RangeError(f"point ({t}, {x}) outside window {self}")
        return (t - self.t_min, x - self.x_min)

    def t_coords(self) -> np.ndarray:
        return np.arange(self.t_min, self.t_max + 1)

    def x_coords(self) -> np.ndarray:
        return np.arange(self.x_min, self.x_max + 1)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)

    def interior_mask(self, margin: int = 1) -> np.ndarray:
        """Boolean mask of sites at least `margin` sites from every edge."""
        mask = np.zeros(self.shape, dtype=bool)
        n_t, n_x = self.shape
        if 2 * margin < n_t and 2 * margin < n_x:
            mask[margin:n_t - margin, margin:n_x - margin] = True
        return mask

    def shifted(self, arr: np.ndarray, dt: int, dx: int) -> np.ndarray:
        """Array whose value at (t, x) is arr at (t + dt, x + dx), zero-filled."""
        out = np.zeros_like(arr)
        n_t, n_x = arr.shape
        t_dst = slice(max(0, -dt), min(n_t, n_t - dt))
        x_dst = slice(max(0, -dx), min(n_x, n_x - dx))
        t_src = slice(max(0, dt), n_t + min(0, dt))
        x_src = slice(max(0, dx), n_x + min(0, dx))
        out[t_dst, x_dst] = arr[t_src, x_src]
        return out

    def valid_shift_mask(self, dt: int, dx: int) -> np.ndarray:
        """Boolean mask of sites whose (dt, dx)-neighbor lies in the window."""
        return self.shifted(np.ones(self.shape, dtype=bool), dt, dx)


@dataclass(frozen=True, eq=False)
class Region:
    """A subset of a window's sites, stored as a boolean mask."""

    window: Window
    mask: np.ndarray

    def __post_init__(self):
        if self.mask.shape != self.window.shape:
            raise RangeError("region mask shape does not match window")
        if self.mask.dtype != np.bool_:
            object.__setattr__(self, "mask", self.mask.astype(bool))

    @classmethod
    def from_box(cls, window: Window, t_lo: int, t_hi: int,
                 x_lo: int, x_hi: int) -> "Region":
        for (t, x) in ((t_lo, x_lo), (t_hi, x_hi)):
            if not window.contains(t, x):
                raise RangeError(f"box corner ({t}, {x}) outside window {window}")
        mask = np.zeros(window.shape, dtype=bool)
        i0, j0 = window.index(t_lo, x_lo)
        i1, j1 = window.index(t_hi, x_hi)
        mask[i0:i1 + 1, j0:j1 + 1] = True
        return cls(window, mask)

    @classmethod
    def from_sites(cls, window: Window, sites) -> "Region":
        mask = np.zeros(window.shape, dtype=bool)
        for (t, x) in sites:
            mask[window.index(t, x)] = True
        return cls(window, mask)

    def site_count(self) -> int:
        return int(self.mask.sum())

    def sites(self):
        """Sites of the region in lexicographic (t, x) order."""
        for i, j in np.argwhere(self.mask):
            yield (int(i) + self.window.t_min, int(j) + self.window.x_min)


def past_region(window: Window, t: int) -> Region:
    """All window sites with time coordinate at most t.

    Requires t_min <= t < t_max so that both the region and its in-window
    complement are nonempty.
    """
    if not window.t_min <= t < window.t_max:
        raise RangeError(
            f"slice time {t} not in [{window.t_min}, {window.t_max})")
    mask = np.zeros(window.shape, dtype=bool)
    mask[:t - window.t_min + 1, :] = True
    return Region(window, mask)


def pair_masks(omega: Region) -> dict[tuple[int, int], np.ndarray]:
    """Per-offset masks of interface pairs.

    For each neighbor offset u, the returned mask marks sites x in omega whose
    neighbor y = x + u lies in the window but outside omega. Such (x, y) are
    exactly the pairs on which the interaction couples the region to its
    complement.
    """
    window = omega.window
    outside = ~omega.mask
    masks = {}
    for (dt, dx) in NEIGHBOR_OFFSETS:
        masks[(dt, dx)] = omega.mask & window.shifted(outside, dt, dx)
    return masks


def stencil_pairs(omega: Region, window: Window | None = None):
    """Interface pairs (x, y) in lexicographic order.

    x runs over omega, y over the in-window complement, with x - y restricted
    to the interaction stencil. The center offset never yields a pair. Points
    are returned with angle 0.
    """
    if window is not None and window != omega.window:
        raise RangeError("window argument does not match the region's window")
    window = omega.window
    masks = pair_masks(omega)
    pairs = []
    for i, j in np.argwhere(omega.mask):
        t = int(i) + window.t_min
        x = int(j) + window.x_min
        for (dt, dx) in NEIGHBOR_OFFSETS:
            if masks[(dt, dx)][i, j]:
                pairs.append((LatticePoint(t, x), LatticePoint(t + dt, x + dx)))
    return pairs
