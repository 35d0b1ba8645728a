"""Surface-layer functionals over window regions.

All quantities here are double sums over interface pairs: a site inside the
region and a stencil neighbor outside it. The first-order balance pairs a
single signed slot factor with the counterterm volume; the symplectic form
antisymmetrizes a cross-slot second derivative; the symmetric bilinear form
carries a Green-constructed scalar field whose region sum gives the volume
identity. The closed forms for past regions, a single row of products at the
cut, are derived directly from the interface sums with the base interaction
table; they are what the conservation sweeps check against.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import InvalidJetError, RangeError, UnsupportedOrderError
from .jets import Jet, delta_ell_field, pair_product_sum, region_product_sum
from .lagrangian import ModelParams
from .linear import GreensChoice, RankOneModifier, greens_apply
from .perturb import build_hierarchy, family_taylor_I
from .space import Region, Window, past_region

MAX_FAMILY_ORDER = 3


def _check_region(omega: Region, window: Window, *jets: Jet):
    if omega.window != window:
        raise RangeError("region window does not match")
    for jet in jets:
        if jet.window != window:
            raise RangeError("jet window does not match")


def i1(u: Jet, omega: Region, p: ModelParams, window: Window
       ) -> tuple[float, float]:
    """First-order surface balance: (interface sum, counterterm volume).

    The conservation statement is surface = volume for solutions. For jets
    with vanishing scalar component every pair term is individually zero,
    because the first angular derivative of the interaction vanishes on the
    base configuration.
    """
    _check_region(omega, window, u)
    surface = pair_product_sum(p, omega, [(u, 1.0, -1.0)])
    volume = 0.5 * p.nu * region_product_sum(omega, [u])
    return surface, volume


def sigma(u: Jet, v: Jet, omega: Region, p: ModelParams,
          window: Window) -> float:
    """Symplectic form: antisymmetrized cross-slot interface sum."""
    _check_region(omega, window, u, v)
    return (pair_product_sum(p, omega, [(u, 1.0, 0.0), (v, 0.0, 1.0)])
            - pair_product_sum(p, omega, [(v, 1.0, 0.0), (u, 0.0, 1.0)]))


def sympl_closed_form(u: Jet, v: Jet, t: int, p: ModelParams,
                      window: Window) -> float:
    """Symplectic form across the cut between rows t and t + 1.

    One row of cross products: the scalar parts couple through the timelike
    interaction weight, the angular parts through the mixed second
    derivative, which is +1 at the timelike offsets.
    """
    if not window.t_min <= t < window.t_max:
        raise RangeError(f"slice {t} leaves no row above it in {window}")
    row, _ = window.index(t, window.x_min)
    au, av = u.a[row], v.a[row]
    au1, av1 = u.a[row + 1], v.a[row + 1]
    fu, fv = u.u_phi[row], v.u_phi[row]
    fu1, fv1 = u.u_phi[row + 1], v.u_phi[row + 1]
    scalar = p.lambda_i * float(au @ av1 - au1 @ av)
    angular = float(fu @ fv1 - fu1 @ fv)
    return scalar + angular


def symm_bilinear(u: Jet, v: Jet, omega: Region, greens: GreensChoice,
                  p: ModelParams, window: Window, *, edge_check: bool = True
                  ) -> tuple[float, float, np.ndarray]:
    """Symmetric bilinear form: (surface, volume, scalar Green field).

    Restricted to jets with vanishing scalar components, for which the
    second variation has an exactly vanishing angular part. Its scalar part
    is pushed through the chosen scalar Green's operator to produce the
    field s; the surface sum carries u, v and s on both slots, and the
    volume identity states surface = nu * sum of s over the region.
    """
    _check_region(omega, window, u, v)
    for name, jet in (("u", u), ("v", v)):
        if not jet.has_zero_scalar():
            raise InvalidJetError(
                f"jet {name} has a scalar component; the closed-form route "
                f"assumes it vanishes (use the hierarchy path instead)")
    d2 = delta_ell_field(2, [u, v], p, window)
    s = greens_apply(greens, d2, p, window, edge_check=edge_check).a
    s_jet = Jet(window, s, np.zeros(window.shape))
    surface = (pair_product_sum(p, omega, [(u, 1.0, 0.0), (v, 1.0, 0.0)])
               - pair_product_sum(p, omega, [(u, 0.0, 1.0), (v, 0.0, 1.0)])
               + 2.0 * pair_product_sum(p, omega, [(s_jet, 1.0, -1.0)]))
    volume = p.nu * float(s[omega.mask].sum())
    return surface, volume, s


def symm_closed_form(u: Jet, v: Jet, s: np.ndarray, t: int, p: ModelParams,
                     window: Window) -> float:
    """Symmetric-form surface across the cut between rows t and t + 1.

    Difference of the same one-row expression on the two sides of the cut:
    angular products minus twice the timelike weight times the Green field.
    """
    if not window.t_min <= t < window.t_max:
        raise RangeError(f"slice {t} leaves no row above it in {window}")
    row, _ = window.index(t, window.x_min)

    def layer(r):
        return float(u.u_phi[r] @ v.u_phi[r] - 2.0 * p.lambda_i * s[r].sum())

    return layer(row + 1) - layer(row)


def i_m(u: Jet, v: Jet, omega: Region, m: int, choices: GreensChoice,
        p: ModelParams, window: Window) -> float:
    """Full order-m family derivative of the surface-layer balance.

    Builds the perturbation hierarchy seeded by (u, v) up to order m and
    evaluates the combinatorial route at matching grading. The conservation
    theorem says the value vanishes for genuine solutions, up to window
    truncation effects.
    """
    if not 1 <= m <= MAX_FAMILY_ORDER:
        raise UnsupportedOrderError(
            f"family order {m} outside 1..{MAX_FAMILY_ORDER}")
    hier = build_hierarchy(u, v, m, choices, p, window)
    return family_taylor_I(hier, omega, m, m)


def greens_dependence_check(u: Jet, v: Jet, omega: Region,
                            kernel: RankOneModifier, p: ModelParams,
                            window: Window,
                            choices: GreensChoice | None = None
                            ) -> tuple[float, float]:
    """How the second-order balance shifts under a Green's-kernel change.

    lhs evaluates the order-2 family derivative with the kernel modifier
    installed minus the plain evaluation; rhs is twice the first-order
    balance of the modifier applied to the second variation of (u, v). The
    two agree exactly: only the mixed second-order coefficient feels the
    modified kernel, and the first-order balance is linear.
    """
    base = choices if choices is not None else GreensChoice()
    if base.kernel_modifier is not None:
        raise InvalidJetError(
            "pass the kernel through the dedicated argument, not inside the "
            "baseline choices")
    modified = dataclasses.replace(base, kernel_modifier=kernel)
    lhs = (i_m(u, v, omega, 2, modified, p, window)
           - i_m(u, v, omega, 2, base, p, window))
    moved = kernel.apply(delta_ell_field(2, [u, v], p, window))
    surface, volume = i1(moved, omega, p, window)
    return lhs, 2.0 * (surface - volume)


@dataclass(frozen=True)
class SliceValues:
    """Surface-layer quantities at one past-region cut."""

    slice_t: int
    i1_surface: float
    i1_volume: float
    sympl: float
    sympl_closed: float
    symm_surface: float
    symm_surface_closed: float
    symm_volume: float

    @property
    def i1_residual(self) -> float:
        return abs(self.i1_surface - self.i1_volume)

    @property
    def sympl_residual(self) -> float:
        return abs(self.sympl - self.sympl_closed)

    @property
    def symm_closed_residual(self) -> float:
        return abs(self.symm_surface - self.symm_surface_closed)

    @property
    def symm_volume_residual(self) -> float:
        return abs(self.symm_surface - self.symm_volume)


@dataclass(frozen=True)
class SlayerReport:
    window: Window
    params: ModelParams
    slices: tuple[SliceValues, ...]

    def values(self, name: str) -> np.ndarray:
        return np.array([getattr(s, name) for s in self.slices])

    def relative_spread(self, name: str) -> float:
        """Spread of a per-slice quantity relative to its largest size."""
        vals = self.values(name)
        scale = np.abs(vals).max()
        if scale == 0.0:
            return 0.0
        return float((vals.max() - vals.min()) / scale)

    def max_residual(self) -> float:
        names = ("i1_residual", "sympl_residual", "symm_closed_residual",
                 "symm_volume_residual")
        return max(float(self.values(n).max()) for n in names)


def slayer_sweep(u: Jet, v: Jet, slices, greens: GreensChoice,
                 p: ModelParams, window: Window,
                 scalar_probe: Jet | None = None) -> SlayerReport:
    """Evaluate all surface-layer quantities over a range of past regions.

    u and v must have vanishing scalar components (they feed the symplectic
    and symmetric forms); the first-order balance row uses scalar_probe when
    given, falling back to u. The Green field of the symmetric form does not
    depend on the cut, so it is computed once.
    """
    probe = scalar_probe if scalar_probe is not None else u
    first = True
    rows = []
    for t in slices:
        omega = past_region(window, t)
        if first:
            surf, vol, s = symm_bilinear(u, v, omega, greens, p, window)
            first = False
        else:
            surf = (pair_product_sum(p, omega, [(u, 1.0, 0.0), (v, 1.0, 0.0)])
                    - pair_product_sum(p, omega,
                                       [(u, 0.0, 1.0), (v, 0.0, 1.0)])
                    + 2.0 * pair_product_sum(
                        p, omega, [(Jet(window, s, np.zeros(window.shape)),
                                    1.0, -1.0)]))
            vol = p.nu * float(s[omega.mask].sum())
        i1_s, i1_v = i1(probe, omega, p, window)
        rows.append(SliceValues(
            slice_t=t,
            i1_surface=i1_s,
            i1_volume=i1_v,
            sympl=sigma(u, v, omega, p, window),
            sympl_closed=sympl_closed_form(u, v, t, p, window),
            symm_surface=surf,
            symm_surface_closed=symm_closed_form(u, v, s, t, p, window),
            symm_volume=vol))
    return SlayerReport(window, p, tuple(rows))
