"""Null forms on first-order jets, and the decay-ratio diagnostic.

The classical null form q0(u, v) = (d_t u)(d_t v) - grad u . grad v and the
antisymmetrised forms q_ab = (d_a u)(d_b v) - (d_b u)(d_a v) gain one extra
power of decay in <t + |x|> over generic quadratic products; the ratio
diagnostic measures that gain along a simulation.

Jets carry analytic time derivatives (from the evolution equations), never
finite differences: the cancellation the forms encode is only visible when
the derivatives are consistent to spectral accuracy.
"""

from dataclasses import dataclass

import numpy as np

from .fields import Grid, derivative_values

__all__ = [
    "Jet1",
    "jet_from_values",
    "matmul_jet",
    "q0",
    "qab",
    "z_apply",
    "strong_null_ratio",
]

#: regulariser added to the denominator of pointwise ratios (far below any
#: physical field scale; keeps 0/0 off outside supports)
RATIO_FLOOR = 1e-14


@dataclass
class Jet1:
    """First-order jet (f, d_t f, d_1 f, d_2 f) of one field on one grid.

    Entries are bare arrays, (n, n) for scalars or (n, n, 2) for spinors;
    complex scalars are allowed (plane-wave test data uses them).
    """

    grid: Grid
    f: np.ndarray
    f_t: np.ndarray
    f_x1: np.ndarray
    f_x2: np.ndarray

    def __post_init__(self):
        shape = np.shape(self.f)
        for name in ("f_t", "f_x1", "f_x2"):
            if np.shape(getattr(self, name)) != shape:
                raise ValueError(f"jet entry {name} has mismatched shape")

    def parts(self):
        """Derivatives indexed the spacetime way: (d_0, d_1, d_2) = (t, x1, x2)."""
        return (self.f_t, self.f_x1, self.f_x2)


def jet_from_values(values: np.ndarray, f_t: np.ndarray, grid: Grid) -> Jet1:
    """Build a jet from a field array and its analytic time derivative.

    Spatial derivatives are filled in spectrally.
    """
    return Jet1(
        grid,
        values,
        f_t,
        derivative_values(values, grid, 1),
        derivative_values(values, grid, 2),
    )


def matmul_jet(mat: np.ndarray, jet: Jet1) -> Jet1:
    """Apply a constant 2x2 matrix to every slot of a spinor jet."""

    def mul(v):
        return np.einsum("ab,xyb->xya", mat, v)

    return Jet1(jet.grid, mul(jet.f), mul(jet.f_t), mul(jet.f_x1), mul(jet.f_x2))


def _mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pointwise product, broadcasting a scalar slot against a spinor slot."""
    if a.ndim < b.ndim:
        a = a[..., None]
    elif b.ndim < a.ndim:
        b = b[..., None]
    return a * b


def q0(u: Jet1, v: Jet1) -> np.ndarray:
    """(d_t u)(d_t v) - (d_1 u)(d_1 v) - (d_2 u)(d_2 v), pointwise."""
    if u.grid != v.grid:
        raise ValueError("jets must share one grid")
    return _mul(u.f_t, v.f_t) - _mul(u.f_x1, v.f_x1) - _mul(u.f_x2, v.f_x2)


def qab(a: int, b: int, u: Jet1, v: Jet1) -> np.ndarray:
    """(d_a u)(d_b v) - (d_b u)(d_a v) with spacetime indices a, b in {0,1,2}."""
    if a not in (0, 1, 2) or b not in (0, 1, 2):
        raise ValueError("indices must be in {0, 1, 2}")
    if u.grid != v.grid:
        raise ValueError("jets must share one grid")
    du, dv = u.parts(), v.parts()
    return _mul(du[a], dv[b]) - _mul(du[b], dv[a])


def z_apply(j: int, jet: Jet1, t: float) -> np.ndarray:
    """The j-th commuting vector field applied to a jet, j in 1..6.

    Same family as fields.vectorfield_apply, but taking every needed
    derivative from the jet (no warning machinery; callers check the
    boundary themselves).
    """
    g = jet.grid

    def coord(c):
        x = g.x1 if c == 1 else g.x2
        return x[..., None] if jet.f.ndim == 3 else x

    if j == 1:
        return jet.f_t
    if j == 2:
        return jet.f_x1
    if j == 3:
        return jet.f_x2
    if j == 4:
        return -t * jet.f_x1 - coord(1) * jet.f_t
    if j == 5:
        return -t * jet.f_x2 - coord(2) * jet.f_t
    if j == 6:
        return coord(1) * jet.f_x2 - coord(2) * jet.f_x1
    raise ValueError("vector field index must be in 1..6")


def _pointwise_abs(values: np.ndarray) -> np.ndarray:
    a = np.abs(values)
    if a.ndim == 3:
        a = np.sqrt((a**2).sum(axis=-1))
    return a


def first_order_weight(jet: Jet1, t: float) -> np.ndarray:
    """|u|_1 = |u| + sum_j |Z_j u| pointwise (all six vector fields)."""
    total = _pointwise_abs(jet.f)
    for j in range(1, 7):
        total = total + _pointwise_abs(z_apply(j, jet, t))
    return total


def gradient_weight(jet: Jet1) -> np.ndarray:
    """|du| = sqrt(|d_t u|^2 + |d_1 u|^2 + |d_2 u|^2) pointwise."""
    return np.sqrt(sum(_pointwise_abs(d) ** 2 for d in jet.parts()))


def strong_null_ratio(a: int, b: int, u: Jet1, v: Jet1, t: float) -> float:
    """Largest pointwise value of |q_ab(u,v)| <t+|x|> / (|u|_1 |dv| + |du| |v|_1).

    A bounded time series of this ratio along a run witnesses the extra
    <t+|x|>^-1 decay of the antisymmetrised forms.  The result is only
    meaningful while the fields stay clear of the seam; callers should gate
    it on fields.boundary_mass_fraction.
    """
    g = u.grid
    r = np.sqrt(g.x1**2 + g.x2**2)
    bracket = np.sqrt(1.0 + (abs(t) + r) ** 2)
    numer = _pointwise_abs(qab(a, b, u, v)) * bracket
    denom = (
        first_order_weight(u, t) * gradient_weight(v)
        + gradient_weight(u) * first_order_weight(v, t)
        + RATIO_FLOOR
    )
    return float((numer / denom).max())
