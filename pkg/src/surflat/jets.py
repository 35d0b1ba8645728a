"""Jet spaces and the linearized operators built from slot derivatives.

A Jet is a linearized variation of the configuration: a scalar weight field a
and an angle field u_phi over a window, plus an inert constant component kept
only so that its irrelevance is visible in the API. A DualJet pairs a scalar
density b with an angular density w_phi; operator outputs live there.

The derivative del_{slot, jet} acts on the interaction as multiplication by
the jet's scalar weight at the slot's point plus the jet's angle value times
the angular partial at that slot. Slot derivatives commute, and a jet sitting
inside another derivative is never differentiated, so a product of slot
derivatives expands into a finite sum of mixed angular derivatives weighted by
field values. The engine below performs that expansion with arrays over the
whole window at once, one stencil offset at a time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InvalidJetError, RangeError, UnsupportedOrderError
from .lagrangian import ModelParams, lag_phi_deriv, stencil_deriv_table
from .space import (LatticePoint, Region, STENCIL_OFFSETS, Window,
                    pair_masks)

MAX_VARIATION_ORDER = 4


def _as_field(window: Window, values) -> np.ndarray:
    if values is None:
        return window.zeros()
    arr = np.asarray(values, dtype=float)
    if arr.shape != window.shape:
        raise RangeError(
            f"field shape {arr.shape} does not match window {window.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class Jet:
    """A linearized variation (a, u_phi) over a window.

    The constant component is carried along untouched; every operator in this
    package ignores it, and the test space pins it to (0, 0).
    """

    window: Window
    a: np.ndarray
    u_phi: np.ndarray
    const: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "a", _as_field(self.window, self.a))
        object.__setattr__(self, "u_phi", _as_field(self.window, self.u_phi))

    @classmethod
    def zero(cls, window: Window) -> "Jet":
        return cls(window, window.zeros(), window.zeros())

    def a_at(self, point: LatticePoint) -> float:
        return float(self.a[self.window.index(point.t, point.x)])

    def phi_at(self, point: LatticePoint) -> float:
        return float(self.u_phi[self.window.index(point.t, point.x)])

    def is_test(self) -> bool:
        return self.const == (0.0, 0.0)

    def has_zero_scalar(self) -> bool:
        return not self.a.any()

    def __add__(self, other: "Jet") -> "Jet":
        if other.window != self.window:
            raise RangeError("jet windows differ")
        return Jet(self.window, self.a + other.a, self.u_phi + other.u_phi,
                   (self.const[0] + other.const[0],
                    self.const[1] + other.const[1]))

    def __sub__(self, other: "Jet") -> "Jet":
        return self + (-1.0) * other

    def __rmul__(self, c: float) -> "Jet":
        return Jet(self.window, c * self.a, c * self.u_phi,
                   (c * self.const[0], c * self.const[1]))


@dataclass(frozen=True, eq=False)
class DualJet:
    """A dual pairing (b, w_phi) over a window."""

    window: Window
    b: np.ndarray
    w_phi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "b", _as_field(self.window, self.b))
        object.__setattr__(self, "w_phi", _as_field(self.window, self.w_phi))

    @classmethod
    def zero(cls, window: Window) -> "DualJet":
        return cls(window, window.zeros(), window.zeros())

    def b_at(self, point: LatticePoint) -> float:
        return float(self.b[self.window.index(point.t, point.x)])

    def phi_at(self, point: LatticePoint) -> float:
        return float(self.w_phi[self.window.index(point.t, point.x)])

    def max_abs(self) -> float:
        return max(float(np.abs(self.b).max()),
                   float(np.abs(self.w_phi).max()))

    def __add__(self, other: "DualJet") -> "DualJet":
        if other.window != self.window:
            raise RangeError("dual jet windows differ")
        return DualJet(self.window, self.b + other.b,
                       self.w_phi + other.w_phi)

    def __rmul__(self, c: float) -> "DualJet":
        return DualJet(self.window, c * self.b, c * self.w_phi)


class DualValue(NamedTuple):
    """Value of a dual jet at a single point."""

    scalar: float
    phi: float


@dataclass(frozen=True)
class PointDeriv:
    """A slot derivative: slot 1 acts at the first interaction argument,
    slot 2 at the second."""

    slot: int
    jet: Jet

    def __post_init__(self):
        if self.slot not in (1, 2):
            raise InvalidJetError(f"slot must be 1 or 2, got {self.slot}")


def nabla_L(derivs: Sequence[PointDeriv], x: LatticePoint, y: LatticePoint,
            p: ModelParams) -> float:
    """Product of slot derivatives applied to the interaction at (x, y).

    Expands every derivative into its multiplication and angular parts and
    contracts against the mixed angular derivatives of the interaction.
    """
    terms = {(0, 0): 1.0}
    for d in derivs:
        point = x if d.slot == 1 else y
        weight = d.jet.a_at(point)
        angle = d.jet.phi_at(point)
        new: dict[tuple[int, int], float] = {}
        for (kx, ky), c in terms.items():
            new[(kx, ky)] = new.get((kx, ky), 0.0) + c * weight
            key = (kx + 1, ky) if d.slot == 1 else (kx, ky + 1)
            new[key] = new.get(key, 0.0) + c * angle
        terms = new
    total = 0.0
    for (kx, ky), c in sorted(terms.items()):
        if c != 0.0:
            total += c * lag_phi_deriv(p, x, y, kx, ky)
    return total


# --- vectorized expansion over a window ---

def slot_factor_maps(window: Window, factors, offset):
    """Expansion of a product of signed slot derivatives at one offset.

    factors is a sequence of (jet, s1, s2) triples, each standing for the
    operator s1 * del_1 + s2 * del_2 applied with that jet. The return value
    maps (kx, ky) to the coefficient field of the mixed angular derivative of
    that order, where slot 2 is evaluated at y = x + offset. Shifted fields
    are zero-filled, so contributions at sites whose offset partner leaves the
    window must be masked off by the caller.
    """
    dt, dx = offset
    maps: dict[tuple[int, int], np.ndarray] = {
        (0, 0): np.ones(window.shape)}
    for (jet, s1, s2) in factors:
        a_y = window.shifted(jet.a, dt, dx)
        phi_y = window.shifted(jet.u_phi, dt, dx)
        base = s1 * jet.a + s2 * a_y
        new: dict[tuple[int, int], np.ndarray] = {}

        def acc(key, arr):
            if key in new:
                new[key] += arr
            else:
                new[key] = arr

        for (kx, ky), coeff in maps.items():
            acc((kx, ky), coeff * base)
            if s1 != 0.0:
                acc((kx + 1, ky), coeff * (s1 * jet.u_phi))
            if s2 != 0.0:
                acc((kx, ky + 1), coeff * (s2 * phi_y))
        maps = new
    return maps


def stencil_contraction(p: ModelParams, window: Window, factors,
                        *, phi_extra: int = 0,
                        offsets=STENCIL_OFFSETS):
    """Field of the stencil-summed slot-derivative product.

    Returns sum over y in the windowed configuration of the product of the
    signed slot derivatives applied to the interaction, as a field over x.
    With phi_extra = 1 an additional angular derivative acts at slot 1, which
    yields the angular component of dual-jet valued operators.
    """
    table = stencil_deriv_table(p)
    out = window.zeros()
    for offset in offsets:
        valid = window.valid_shift_mask(*offset)
        maps = slot_factor_maps(window, factors, offset)
        # the base offset entering the interaction is x - y = -offset; the
        # stencil data is even, so this only matters for bookkeeping
        idx = STENCIL_OFFSETS.index((-offset[0], -offset[1]))
        contrib = window.zeros()
        for (kx, ky), coeff in sorted(maps.items()):
            d = table[(kx + phi_extra, ky)][idx]
            if d != 0.0:
                contrib += coeff * d
        out += np.where(valid, contrib, 0.0)
    return out


def pair_product_sum(p: ModelParams, omega: Region, factors) -> float:
    """Sum of a signed slot-derivative product over the interface pairs.

    factors is a sequence of (jet, s1, s2) triples as in slot_factor_maps;
    the product is applied to the interaction and summed over the pairs
    enumerated by stencil_pairs(omega), using the per-offset masks directly.
    """
    window = omega.window
    table = stencil_deriv_table(p)
    masks = pair_masks(omega)
    total = 0.0
    for offset, mask in masks.items():
        if not mask.any():
            continue
        maps = slot_factor_maps(window, factors, offset)
        idx = STENCIL_OFFSETS.index((-offset[0], -offset[1]))
        acc = window.zeros()
        for (kx, ky), coeff in sorted(maps.items()):
            d = table[(kx, ky)][idx]
            if d != 0.0:
                acc += coeff * d
        total += float(acc[mask].sum())
    return total


def region_product_sum(omega: Region, jets: Sequence[Jet]) -> float:
    """Sum over the region of the product of the jets' scalar weights."""
    prod = np.ones(omega.window.shape)
    for jet in jets:
        prod = prod * jet.a
    return float(prod[omega.mask].sum())


def _check_variation_inputs(ell_order: int, jets: Sequence[Jet],
                            window: Window):
    if ell_order < 1 or ell_order > MAX_VARIATION_ORDER:
        raise UnsupportedOrderError(
            f"variation order {ell_order} outside 1..{MAX_VARIATION_ORDER}")
    if len(jets) != ell_order:
        raise InvalidJetError(
            f"expected {ell_order} jets, got {len(jets)}")
    for jet in jets:
        if jet.window != window:
            raise RangeError("jet window does not match the given window")


def delta_ell_field(ell_order: int, jets: Sequence[Jet], p: ModelParams,
                    window: Window) -> DualJet:
    """Multilinear variation of the field equation functional, as fields.

    Computes (1 / ell_order!) times the stencil sum of the product of
    del_1 + del_2 over the given jets applied to the interaction, minus the
    volume counterterm (nu / 2) times the product of the scalar weights,
    which enters the scalar component only. Sites near the window edge use
    the clipped stencil of the windowed configuration.
    """
    _check_variation_inputs(ell_order, jets, window)
    factors = [(jet, 1.0, 1.0) for jet in jets]
    scalar = stencil_contraction(p, window, factors)
    phi = stencil_contraction(p, window, factors, phi_extra=1)
    weights = np.ones(window.shape)
    for jet in jets:
        weights = weights * jet.a
    scale = 1.0 / math.factorial(ell_order)
    return DualJet(window, scale * (scalar - 0.5 * p.nu * weights),
                   scale * phi)


def delta_ell(ell_order: int, jets: Sequence[Jet], x: LatticePoint,
              p: ModelParams, window: Window) -> DualValue:
    """Multilinear variation of the field equation functional at one point.

    x must sit at least one site inside the window so the stencil sum is the
    full one. Returns the scalar and angular components of the dual jet.
    """
    _check_variation_inputs(ell_order, jets, window)
    if not (window.t_min < x.t < window.t_max
            and window.x_min < x.x < window.x_max):
        raise RangeError(
            f"point ({x.t}, {x.x}) needs margin 1 inside window {window}")
    scalar = 0.0
    phi = 0.0
    for (dt, dx) in STENCIL_OFFSETS:
        y = LatticePoint(x.t + dt, x.x + dx)
        terms = {(0, 0): 1.0}
        for jet in jets:
            a_sum = jet.a_at(x) + jet.a_at(y)
            new: dict[tuple[int, int], float] = {}
            for key, c in terms.items():
                kx, ky = key
                new[key] = new.get(key, 0.0) + c * a_sum
                new[(kx + 1, ky)] = new.get((kx + 1, ky), 0.0) \
                    + c * jet.phi_at(x)
                new[(kx, ky + 1)] = new.get((kx, ky + 1), 0.0) \
                    + c * jet.phi_at(y)
            terms = new
        base = LatticePoint(-dt, -dx, x.phi)
        origin = LatticePoint(0, 0)
        for (kx, ky), c in sorted(terms.items()):
            if c != 0.0:
                scalar += c * lag_phi_deriv(p, base, origin, kx, ky)
                phi += c * lag_phi_deriv(p, base, origin, kx + 1, ky)
    counter = 0.5 * p.nu
    for jet in jets:
        counter *= jet.a_at(x)
    scale = 1.0 / math.factorial(ell_order)
    return DualValue(scale * (scalar - counter), scale * phi)


def delta_op(v: Jet, x: LatticePoint, p: ModelParams,
             window: Window) -> DualValue:
    """Linearized field operator at a point; equals delta_ell of order one."""
    return delta_ell(1, [v], x, p, window)


def delta_op_field(v: Jet, p: ModelParams, window: Window) -> DualJet:
    """Linearized field operator over the whole window."""
    return delta_ell_field(1, [v], p, window)
