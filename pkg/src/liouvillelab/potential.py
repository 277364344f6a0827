"""Coefficient functions ``V(x) = 1 + (g1 x1^2 + g2 x2^2)/2 + higher terms``."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Potential", "diagonalize_hessian"]


@dataclass(frozen=True)
class Potential:
    """Polynomial potential normalized by ``V(0) = 1`` and ``grad V(0) = 0``.

    Parameters
    ----------
    gamma1, gamma2 : float
        Eigenvalues of the Hessian of ``V`` at the origin, in the frame
        where the Hessian is diagonal.
    higher : dict
        Extra monomials ``{(i, j): c}`` adding ``c x1^i x2^j``, with total
        degree ``i + j >= 3``.
    """

    gamma1: float
    gamma2: float
    higher: dict = field(default_factory=dict)
    positivity_samples: int = 96

    def __post_init__(self):
        for key, val in self.higher.items():
            i, j = key
            if int(i) != i or int(j) != j or i < 0 or j < 0 or i + j < 3:
                raise ValueError(f"higher-order term {key} must have total degree >= 3")
            if not np.isfinite(val):
                raise ValueError(f"coefficient of {key} is not finite")
        object.__setattr__(self, "higher", {(int(i), int(j)): float(c) for (i, j), c in sorted(self.higher.items())})
        vmin = self.min_on_disk()
        if not vmin > 0:
            raise ValueError(f"V must be positive on the closed disk; sampled minimum {vmin:.4g}")

    @property
    def gammas(self) -> tuple[float, float]:
        return float(self.gamma1), float(self.gamma2)

    @property
    def is_radial(self) -> bool:
        return self.gamma1 == self.gamma2 and not self.higher

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        x1, x2 = z.real, z.imag
        v = 1.0 + 0.5 * (self.gamma1 * x1**2 + self.gamma2 * x2**2)
        for (i, j), c in self.higher.items():
            v = v + c * x1**i * x2**j
        return v

    def gradient(self, z) -> tuple[np.ndarray, np.ndarray]:
        z = np.asarray(z, dtype=complex)
        x1, x2 = z.real, z.imag
        d1 = self.gamma1 * x1
        d2 = self.gamma2 * x2
        for (i, j), c in self.higher.items():
            if i:
                d1 = d1 + c * i * x1 ** (i - 1) * x2**j
            if j:
                d2 = d2 + c * j * x1**i * x2 ** (j - 1)
        return d1, d2

    def min_on_disk(self) -> float:
        n = self.positivity_samples
        r = np.linspace(0.0, 1.0, n + 1)
        t = np.linspace(0.0, 2.0 * np.pi, 4 * n, endpoint=False)
        return float(self(r[:, None] * np.exp(1j * t[None, :])).min())

    def to_dict(self) -> dict:
        return {"gamma1": self.gamma1, "gamma2": self.gamma2,
                "higher": [[i, j, c] for (i, j), c in self.higher.items()]}


def diagonalize_hessian(hessian) -> tuple[float, float, float]:
    """Eigenvalues (ascending) and rotation angle of a symmetric 2x2 Hessian.

    The angle is that of the first eigenvector, in ``(-pi/2, pi/2]``;
    rotating coordinates by it brings the Hessian to ``diag(g1, g2)``.
    """
    h = np.asarray(hessian, dtype=float)
    if h.shape != (2, 2):
        raise ValueError("Hessian must be 2x2")
    if not np.allclose(h, h.T, rtol=0, atol=1e-14):
        raise ValueError("Hessian must be symmetric")
    vals, vecs = np.linalg.eigh(h)
    v = vecs[:, 0]
    angle = float(np.arctan2(v[1], v[0]))
    if angle <= -np.pi / 2:
        angle += np.pi
    elif angle > np.pi / 2:
        angle -= np.pi
    return float(vals[0]), float(vals[1]), angle
