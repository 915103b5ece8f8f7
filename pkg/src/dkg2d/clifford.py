"""Dirac algebra in two space dimensions.

A representation is a triple of 2x2 Hermitian matrices (alpha1, alpha2, beta)
squaring to the identity and pairwise anticommuting.  Those relations force
the first-order Dirac operator times its conjugate to act as the
Klein-Gordon operator, which every downstream module relies on; this module
holds the matrices, the Fourier-side generator H(xi), and residual checks
that certify the relations numerically.
"""

from dataclasses import InitVar, dataclass

import numpy as np

__all__ = [
    "CliffordRep",
    "default_rep",
    "dirac_spatial_symbol",
    "squaring_residual",
]

_IDENTITY = np.eye(2, dtype=complex)


def _maxabs(m) -> float:
    return float(np.max(np.abs(m)))


@dataclass(frozen=True)
class CliffordRep:
    """Immutable triple (alpha1, alpha2, beta) of 2x2 Hermitian matrices.

    Construction validates hermiticity, unit squares and vanishing
    anticommutators to machine precision (pass ``validate=False`` only to
    build a deliberately broken triple for residual diagnostics).  Use
    :func:`default_rep` for the canonical Pauli choice with diagonal beta.
    """

    alpha1: np.ndarray
    alpha2: np.ndarray
    beta: np.ndarray
    validate: InitVar[bool] = True

    def __post_init__(self, validate):
        for name in ("alpha1", "alpha2", "beta"):
            m = np.asarray(getattr(self, name), dtype=complex)
            if m.shape != (2, 2):
                raise ValueError(f"{name} must be a 2x2 matrix, got {m.shape}")
            m = m.copy()
            m.setflags(write=False)
            object.__setattr__(self, name, m)
        if validate:
            err = self.relations_residual()
            if err > 1e-12:
                raise ValueError(
                    f"matrices violate the Dirac algebra (residual {err:.3e})"
                )

    def relations_residual(self) -> float:
        """Max-norm residual over all defining relations (0 for a valid rep)."""
        mats = (self.alpha1, self.alpha2, self.beta)
        err = 0.0
        for m in mats:
            err = max(err, _maxabs(m - m.conj().T))
            err = max(err, _maxabs(m @ m - _IDENTITY))
        for i in range(3):
            for j in range(i + 1, 3):
                err = max(err, _maxabs(mats[i] @ mats[j] + mats[j] @ mats[i]))
        return err

    @property
    def beta_is_diagonal(self) -> bool:
        return _maxabs(self.beta - np.diag(np.diag(self.beta))) == 0.0


def default_rep() -> CliffordRep:
    """Pauli representation: alpha1 = sigma_x, alpha2 = sigma_y, beta = sigma_z.

    beta is diagonal, which makes the pointwise nonlinear substep of the
    solver an exact per-component phase rotation.
    """
    return CliffordRep(
        alpha1=np.array([[0, 1], [1, 0]], dtype=complex),
        alpha2=np.array([[0, -1j], [1j, 0]], dtype=complex),
        beta=np.array([[1, 0], [0, -1]], dtype=complex),
    )


def dirac_spatial_symbol(rep: CliffordRep, M: float, xi) -> np.ndarray:
    """Fourier symbol H(xi) = xi1*alpha1 + xi2*alpha2 + M*beta.

    Under the convention d/dx_j -> i*xi_j the free Dirac equation reads
    d/dt psi_hat = -i H(xi) psi_hat, so H generates the free flow.
    """
    xi1, xi2 = float(xi[0]), float(xi[1])
    return xi1 * rep.alpha1 + xi2 * rep.alpha2 + M * rep.beta


def squaring_residual(rep: CliffordRep, M: float, xi) -> float:
    """Max-entry deviation of H(xi)^2 from (M^2 + |xi|^2) I.

    Zero certifies, on the symbol level, that the Dirac operator squares to
    the Klein-Gordon operator with the same mass; a broken triple gives a
    strictly positive residual.
    """
    h = dirac_spatial_symbol(rep, M, xi)
    omega_sq = M * M + float(xi[0]) ** 2 + float(xi[1]) ** 2
    return _maxabs(h @ h - omega_sq * _IDENTITY)
