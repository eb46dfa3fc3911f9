"""Fluid-antenna port geometry and spatial correlation model.

A UT exposes N = n1*n2 ports on a 2D grid spanning w1 x w2 wavelengths.
Under rich isotropic scattering the port gains are jointly Gaussian with
covariance sigma^2 * Sigma, where Sigma depends only on the normalized port
displacements through J0(2*pi*d).  Channels are synthesized in the eigen
basis of Sigma so one set of i.i.d. draws maps to any port set.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .bessel import j0

__all__ = [
    "FasGeometry",
    "SpatialModel",
    "build_covariance",
    "eigendecompose",
    "sample_correlated",
    "sample_correlated_batch",
]

# Eigenvalues of the J0 covariance are >= 0 up to rounding; anything below
# -1e-6 indicates a construction bug rather than noise.
_EIG_CLAMP = -1e-6


@dataclass(frozen=True)
class FasGeometry:
    """Port grid: n1 x n2 ports over an aperture of w1 x w2 wavelengths."""

    n1: int
    n2: int
    w1: float
    w2: float

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError("port grid dimensions must be >= 1")
        for n, w, name in ((self.n1, self.w1, "w1"), (self.n2, self.w2, "w2")):
            if not np.isfinite(w) or w < 0:
                raise ValueError(f"{name} must be finite and nonnegative")
            if n > 1 and w <= 0:
                raise ValueError(f"{name} must be positive when its axis has multiple ports")

    @property
    def n_ports(self) -> int:
        return self.n1 * self.n2

    def port_index(self, k1: int, k2: int) -> int:
        """Flatten 2D port coordinates row-major: k = k1*n2 + k2."""
        if not (0 <= k1 < self.n1 and 0 <= k2 < self.n2):
            raise ValueError("port coordinates out of range")
        return k1 * self.n2 + k2

    def port_coords(self, k: int):
        if not (0 <= k < self.n_ports):
            raise ValueError("port index out of range")
        return divmod(k, self.n2)


@dataclass
class SpatialModel:
    """Covariance (and optionally its eigen basis) for one port geometry."""

    geometry: FasGeometry
    sigma: np.ndarray
    gain: float = 1.0
    eigvals: np.ndarray = field(default=None)
    eigvecs: np.ndarray = field(default=None)


def build_covariance(geometry: FasGeometry, gain: float = 1.0) -> SpatialModel:
    """Port covariance [Sigma]_{k,l} = J0(2*pi*sqrt(d1^2 + d2^2)).

    d_i is the displacement along axis i in wavelengths: |k_i - l_i| / (n_i - 1)
    * w_i, zero on degenerate (single-port) axes.  The result is exactly
    symmetric with unit diagonal.
    """
    n1, n2 = geometry.n1, geometry.n2
    k = np.arange(geometry.n_ports)
    k1, k2 = k // n2, k % n2
    d1 = (k1[:, None] - k1[None, :]) * (geometry.w1 / (n1 - 1) if n1 > 1 else 0.0)
    d2 = (k2[:, None] - k2[None, :]) * (geometry.w2 / (n2 - 1) if n2 > 1 else 0.0)
    sigma = j0(2.0 * np.pi * np.sqrt(d1 * d1 + d2 * d2))
    np.fill_diagonal(sigma, 1.0)
    return SpatialModel(geometry=geometry, sigma=sigma, gain=gain)


def eigendecompose(model: SpatialModel) -> SpatialModel:
    """Attach the eigen basis of Sigma, eigenvalues descending.

    Tiny negative eigenvalues from rounding are clamped to zero; anything
    below -1e-6 raises, since Sigma is PSD by construction.
    """
    vals, vecs = np.linalg.eigh(model.sigma)
    if vals.min() < _EIG_CLAMP:
        raise ValueError(f"covariance not PSD: min eigenvalue {vals.min():.3e}")
    vals = np.clip(vals, 0.0, None)
    order = np.argsort(vals)[::-1]
    return replace(model, eigvals=vals[order], eigvecs=vecs[:, order])


def _require_basis(model: SpatialModel):
    if model.eigvals is None or model.eigvecs is None:
        raise ValueError("model has no eigen basis; call eigendecompose first")


def sample_correlated(model: SpatialModel, rng: np.random.Generator) -> np.ndarray:
    """One correlated port-gain vector g = gain * U sqrt(lambda) alpha.

    alpha has i.i.d. CN(0,1) entries built from exactly 2N standard normal
    draws (real parts first in each pair), so replay is deterministic.
    """
    return sample_correlated_batch(model, 1, rng)[0]


def sample_correlated_batch(model: SpatialModel, count: int, rng: np.random.Generator) -> np.ndarray:
    """`count` independent correlated vectors; row i matches the i-th sequential call."""
    _require_basis(model)
    n = model.geometry.n_ports
    z = rng.standard_normal((count, 2 * n))
    alpha = (z[:, 0::2] + 1j * z[:, 1::2]) / np.sqrt(2.0)
    coloring = model.eigvecs * np.sqrt(model.eigvals)  # U sqrt(Lambda)
    return model.gain * (alpha @ coloring.T)
