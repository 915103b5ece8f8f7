"""Quadratic normal-form algebra for the coupled Dirac/Klein-Gordon system.

For a product of two Klein-Gordon waves with masses (m1, m2), applying the
operator (Box + m_out^2) to the pair (plain product, null-form product)
acts, modulo strongly decaying terms, by the 2x2 matrix

    [[m_out^2 - m1^2 - m2^2,  2 m1^2 m2^2],
     [2,                      m_out^2 - m1^2 - m2^2]].

Whenever that matrix is invertible (equivalently m_out != |m1 +- m2| for all
sign choices), the quadratic nonlinearity can be rewritten as the image of a
quadratic correction under the linear operator, plus a defect that decays
one order faster.  This module builds the coefficients, the correction
fields for both equations of the system, and the computable defects that the
scattering extractor integrates.

All time derivatives entering the corrections come from differentiating the
evolution equations (never finite differences), so the defect's decay is
measured clean of discretisation noise.
"""

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import ResonantMass
from .fields import ScalarField, SpinorField, derivative_values, laplacian_values
from .nullforms import Jet1, jet_from_values

__all__ = [
    "MassTriple",
    "NormalFormCoeffs",
    "coupling_matrix",
    "det_via_factors",
    "normal_form_coeffs",
    "dirac_triple",
    "kg_triple",
    "zero_mode_residual",
    "CorrectionBundle",
    "correction_bundle",
    "dirac_correction",
    "kg_correction",
    "dirac_defect",
    "kg_defect",
    "field_jets",
]

#: default resonance tolerance: |det| must exceed tol * (sum of masses)^4
RESONANCE_TOL = 1e-9

#: largest tolerated imaginary residue in fields that must be real
_IMAG_TOL = 1e-12


@dataclass(frozen=True)
class MassTriple:
    """Masses (m_out, m_in1, m_in2): target operator mass and the two factors."""

    m_out: float
    m_in1: float
    m_in2: float

    def __post_init__(self):
        if min(self.m_out, self.m_in1, self.m_in2) <= 0:
            raise ValueError("all masses must be strictly positive")

    @property
    def mass_scale(self) -> float:
        return self.m_out + self.m_in1 + self.m_in2


@dataclass(frozen=True)
class NormalFormCoeffs:
    """Coefficients of the quadratic correction p_prod * (u v) + p_null * q0(u, v)."""

    p_prod: float
    p_null: float
    det: float
    triple: MassTriple


def dirac_triple(M: float, m: float) -> MassTriple:
    """Triple for the Dirac-equation nonlinearity phi * (beta psi)."""
    return MassTriple(M, m, M)


def kg_triple(M: float, m: float) -> MassTriple:
    """Triple for the Klein-Gordon-equation nonlinearity <psi, beta psi>."""
    return MassTriple(m, M, M)


def coupling_matrix(triple: MassTriple) -> np.ndarray:
    """The 2x2 matrix through which (Box + m_out^2) acts on the product pair."""
    a = triple.m_out**2 - triple.m_in1**2 - triple.m_in2**2
    return np.array(
        [[a, 2.0 * triple.m_in1**2 * triple.m_in2**2], [2.0, a]]
    )


def det_via_factors(triple: MassTriple) -> float:
    """Determinant as the four-fold product over (m_out + s1 m1 + s2 m2).

    Vanishes exactly when the masses resonate (m_out = |m1 +- m2|); agrees
    with the direct 2x2 determinant.
    """
    mo, m1, m2 = triple.m_out, triple.m_in1, triple.m_in2
    out = 1.0
    for s1 in (1.0, -1.0):
        for s2 in (1.0, -1.0):
            out *= mo + s1 * m1 + s2 * m2
    return out


def normal_form_coeffs(triple: MassTriple, tol: float = RESONANCE_TOL) -> NormalFormCoeffs:
    """Solve the 2x2 system for the correction coefficients.

    Raises :class:`ResonantMass` when |det| < tol * (mass sum)^4, which is
    the coefficient-level face of the m != 2M hypothesis.
    """
    a = triple.m_out**2 - triple.m_in1**2 - triple.m_in2**2
    det = det_via_factors(triple)
    if abs(det) < tol * triple.mass_scale**4:
        raise ResonantMass(
            f"masses {triple} are resonant: |det| = {abs(det):.3e} below "
            f"tolerance {tol:g} * (mass sum)^4"
        )
    return NormalFormCoeffs(a / det, -2.0 / det, det, triple)


def zero_mode_residual(triple: MassTriple, tol: float = RESONANCE_TOL) -> float:
    """Exactness of the correction on spatially constant free waves.

    For v = exp(i m1 t), w = exp(i m2 t) every antisymmetrised form and every
    source term vanishes identically, so the decomposition must be exact:
    (d_t^2 + m_out^2)(p_prod v w + p_null q0(v, w)) = v w.  Returns
    |1 - (m_out^2 - (m1+m2)^2)(a + 2 m1 m2)/det|, which is zero for every
    non-resonant triple.
    """
    c = normal_form_coeffs(triple, tol)
    mo, m1, m2 = triple.m_out, triple.m_in1, triple.m_in2
    a = mo**2 - m1**2 - m2**2
    return abs(1.0 - (mo**2 - (m1 + m2) ** 2) * (a + 2.0 * m1 * m2) / c.det)


# ---------------------------------------------------------------------------
# correction and defect fields along a simulation state
# ---------------------------------------------------------------------------


def _herm(u: np.ndarray, mat: np.ndarray, v: np.ndarray) -> np.ndarray:
    """<u, mat v> pointwise: conj(u)^T mat v at every grid point."""
    return np.einsum("xya,ab,xyb->xy", u.conj(), mat, v)


def _bino_sum(r: int, left, right):
    """sum_i C(r, i) left[i] * right[r - i] with broadcasting-aware product."""
    total = None
    for i in range(r + 1):
        a, b = left[i], right[r - i]
        if a.ndim < b.ndim:
            a = a[..., None]
        term = comb(r, i) * (a * b)
        total = term if total is None else total + term
    return total


class _StateDerivatives:
    """Time-derivative stacks and cached spatial derivatives for one state.

    psi[r], phi[r] are the r-th time derivatives obtained by repeatedly
    differentiating the evolution equations; dpsi/dphi cache spectral
    spatial derivatives of each stack level.
    """

    def __init__(self, state, params, rep, depth: int = 3):
        grid = state.psi.grid
        self.grid = grid
        B = rep.beta
        g = params.g
        m_sq = params.m**2
        iM = 1j * params.M

        self.psi = [state.psi.values]
        self.phi = [state.phi.values, state.phi_t.values]
        self._dpsi = {}
        self._dphi = {}

        def lop(r):
            # -(alpha.grad + i M beta) applied to psi stack level r
            d1 = self.dpsi(r, 1)
            d2 = self.dpsi(r, 2)
            return -(
                np.einsum("ab,xyb->xya", rep.alpha1, d1)
                + np.einsum("ab,xyb->xya", rep.alpha2, d2)
                + iM * np.einsum("ab,xyb->xya", rep.beta, self.psi[r])
            )

        def beta_psi(r):
            return np.einsum("ab,xyb->xya", B, self.psi[r])

        for r in range(depth):
            # d_t^{r+1} psi = L psi^{(r)} + i g sum_i C(r,i) phi^{(i)} B psi^{(r-i)}
            coupling = _bino_sum(
                r, self.phi, [beta_psi(i) for i in range(r + 1)]
            )
            self.psi.append(lop(r) + 1j * g * coupling)
            if r + 2 > depth:
                continue
            if len(self.phi) < r + 3:
                # d_t^{r+2} phi = Lap phi^{(r)} - m^2 phi^{(r)} + g d_t^r <psi, B psi>
                src = _bino_sum(
                    r,
                    [self.psi[i].conj() for i in range(r + 1)],
                    [
                        np.einsum("ab,xyb->xya", B, self.psi[i])
                        for i in range(r + 1)
                    ],
                )
                quad = np.einsum("xya,xya->xy", *[None, None]) if False else None
                # contract the spinor axis of conj(psi) * (B psi) products
                src = _bino_sum(
                    r,
                    [self.psi[i] for i in range(r + 1)],
                    [self.psi[i] for i in range(r + 1)],
                )
                self.phi.append(None)  # placeholder, replaced below

        # the placeholder dance above is error prone; rebuild phi stack cleanly
        self.phi = [state.phi.values, state.phi_t.values]
        for r in range(depth - 1):
            src = None
            for i in range(r + 1):
                term = comb(r, i) * _herm(self.psi[i], B, self.psi[r - i])
                src = term if src is None else src + term
            self.phi.append(
                laplacian_values(self.phi[r], grid) - m_sq * self.phi[r] + g * src
            )

    def dpsi(self, r: int, axis: int) -> np.ndarray:
        key = (r, axis)
        if key not in self._dpsi:
            self._dpsi[key] = derivative_values(self.psi[r], self.grid, axis)
        return self._dpsi[key]

    def dphi(self, r: int, axis: int) -> np.ndarray:
        key = (r, axis)
        if key not in self._dphi:
            self._dphi[key] = derivative_values(self.phi[r], self.grid, axis)
        return self._dphi[key]


@dataclass
class CorrectionBundle:
    """Correction fields and defects evaluated on one simulation state.

    dirac_defect and kg_defect are exactly (nonlinearity) minus the linear
    operator applied to the matching correction; they are the integrands of
    the scattering construction.
    """

    lambda_d: SpinorField
    lambda_d_t: SpinorField
    dbar_lambda_d: SpinorField
    defect_d: SpinorField
    lambda_kg: ScalarField
    lambda_kg_t: ScalarField
    defect_kg: ScalarField


def _real_checked(values: np.ndarray, what: str) -> np.ndarray:
    resid = float(np.max(np.abs(values.imag)))
    if resid > _IMAG_TOL * max(1.0, float(np.max(np.abs(values.real)))):
        raise FloatingPointError(f"{what} has imaginary residue {resid:.3e}")
    return values.real


def correction_bundle(state, params, rep) -> CorrectionBundle:
    """Compute both corrections, their time derivatives, and both defects."""
    grid = state.psi.grid
    g = params.g
    B = rep.beta
    cd = normal_form_coeffs(dirac_triple(params.M, params.m), params.resonance_tol)
    ck = normal_form_coeffs(kg_triple(params.M, params.m), params.resonance_tol)

    D = _StateDerivatives(state, params, rep, depth=3)
    beta_psi = [np.einsum("ab,xyb->xya", B, D.psi[r]) for r in range(4)]

    def lam_d(r):
        prod = _bino_sum(r, D.phi, beta_psi)
        q_t = _bino_sum(r, D.phi[1:], beta_psi[1:])
        q_1 = _bino_sum(
            r,
            [D.dphi(i, 1) for i in range(r + 1)],
            [np.einsum("ab,xyb->xya", B, D.dpsi(i, 1)) for i in range(r + 1)],
        )
        q_2 = _bino_sum(
            r,
            [D.dphi(i, 2) for i in range(r + 1)],
            [np.einsum("ab,xyb->xya", B, D.dpsi(i, 2)) for i in range(r + 1)],
        )
        return 1j * g * (cd.p_prod * prod + cd.p_null * (q_t - q_1 - q_2))

    def lam_kg(r):
        def sesq(left_level, right_level, axis=None):
            if axis is None:
                return _herm(D.psi[left_level], B, D.psi[right_level])
            return _herm(D.dpsi(left_level, axis), B, D.dpsi(right_level, axis))

        prod = sum(comb(r, i) * sesq(i, r - i) for i in range(r + 1))
        q_t = sum(comb(r, i) * sesq(1 + i, 1 + r - i) for i in range(r + 1))
        q_1 = sum(comb(r, i) * sesq(i, r - i, axis=1) for i in range(r + 1))
        q_2 = sum(comb(r, i) * sesq(i, r - i, axis=2) for i in range(r + 1))
        return g * (ck.p_prod * prod + ck.p_null * (q_t - q_1 - q_2))

    lam_d0, lam_d1, lam_d2 = lam_d(0), lam_d(1), lam_d(2)
    lam_k0 = _real_checked(lam_kg(0), "kg correction")
    lam_k1 = _real_checked(lam_kg(1), "kg correction rate")
    lam_k2 = _real_checked(lam_kg(2), "kg correction curvature")

    box_lam_d = lam_d2 - laplacian_values(lam_d0, grid)
    box_lam_k = lam_k2 - laplacian_values(lam_k0, grid).real

    nonlin_d = 1j * g * D.phi[0][..., None] * beta_psi[0]
    nonlin_k = g * _real_checked(_herm(D.psi[0], B, D.psi[0]), "kg nonlinearity")

    defect_d = nonlin_d - (box_lam_d + params.M**2 * lam_d0)
    defect_k = nonlin_k - (box_lam_k + params.m**2 * lam_k0)

    # conjugate Dirac operator applied to the correction:
    # d_t Lambda - (alpha.grad + i M beta) Lambda
    spatial = (
        np.einsum("ab,xyb->xya", rep.alpha1, derivative_values(lam_d0, grid, 1))
        + np.einsum("ab,xyb->xya", rep.alpha2, derivative_values(lam_d0, grid, 2))
        + 1j * params.M * np.einsum("ab,xyb->xya", B, lam_d0)
    )
    dbar_lam_d = lam_d1 - spatial

    return CorrectionBundle(
        lambda_d=SpinorField(grid, lam_d0),
        lambda_d_t=SpinorField(grid, lam_d1),
        dbar_lambda_d=SpinorField(grid, dbar_lam_d),
        defect_d=SpinorField(grid, defect_d),
        lambda_kg=ScalarField(grid, lam_k0),
        lambda_kg_t=ScalarField(grid, lam_k1),
        defect_kg=ScalarField(grid, defect_k),
    )


def dirac_correction(state, params, rep) -> SpinorField:
    """Quadratic correction whose (Box + M^2)-image absorbs i g phi beta psi."""
    return correction_bundle(state, params, rep).lambda_d


def kg_correction(state, params, rep) -> ScalarField:
    """Quadratic correction whose (Box + m^2)-image absorbs g <psi, beta psi>."""
    return correction_bundle(state, params, rep).lambda_kg


def dirac_defect(state, params, rep) -> SpinorField:
    """i g phi beta psi - (Box + M^2) Lambda_D: the fast-decaying remainder."""
    return correction_bundle(state, params, rep).defect_d


def kg_defect(state, params, rep) -> ScalarField:
    """g <psi, beta psi> - (Box + m^2) Lambda_KG: the fast-decaying remainder."""
    return correction_bundle(state, params, rep).defect_kg


def field_jets(state, params, rep) -> tuple[Jet1, Jet1]:
    """First-order jets (psi, phi) with analytic time derivatives.

    d_t psi comes from the Dirac equation, d_t phi is the stored momentum.
    """
    grid = state.psi.grid
    psi = state.psi.values
    psi_t = (
        -(
            np.einsum("ab,xyb->xya", rep.alpha1, derivative_values(psi, grid, 1))
            + np.einsum("ab,xyb->xya", rep.alpha2, derivative_values(psi, grid, 2))
            + 1j * params.M * np.einsum("ab,xyb->xya", rep.beta, psi)
        )
        + 1j * params.g * state.phi.values[..., None]
        * np.einsum("ab,xyb->xya", rep.beta, psi)
    )
    psi_jet = jet_from_values(psi, psi_t, grid)
    phi_jet = jet_from_values(state.phi.values, state.phi_t.values, grid)
    return psi_jet, phi_jet
