"""C^2 cosine regularization of the absolute value / Euclidean norm.

For ``r = |z|``::

    rho(r) = r - (1 - 2/pi) eps                    r >= eps
    rho(r) = (2 eps/pi) (1 - cos(pi r / (2 eps)))   r <= eps

``alpha`` is the gradient and ``beta`` the Hessian. Scalar inputs are
treated elementwise; with ``vector=True`` the last axis is the vector axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Regularizer:
    epsilon: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")

    # radial profile and its first two derivatives
    def _profile(self, r):
        eps = self.epsilon
        k = np.pi / (2.0 * eps)
        inner = r < eps
        rc = np.where(inner, r, 0.0)
        # 1 - cos(2a) = 2 sin(a)^2 avoids cancellation near zero
        val = np.where(inner, (4.0 * eps / np.pi) * np.sin(0.5 * k * rc) ** 2, r - (1.0 - 2.0 / np.pi) * eps)
        d1 = np.where(inner, np.sin(k * rc), 1.0)
        d2 = np.where(inner, k * np.cos(k * rc), 0.0)
        return val, d1, d2

    def rho(self, z, vector: bool = False):
        z = np.asarray(z, dtype=float)
        r = np.linalg.norm(z, axis=-1) if vector else np.abs(z)
        return self._profile(r)[0]

    def alpha(self, z, vector: bool = False):
        z = np.asarray(z, dtype=float)
        if not vector:
            return np.sign(z) * self._profile(np.abs(z))[1]
        r = np.linalg.norm(z, axis=-1)
        _, d1, _ = self._profile(r)
        scale = np.divide(d1, r, out=np.zeros_like(r), where=r > 0)
        return scale[..., None] * z

    def beta(self, z, vector: bool = False):
        z = np.asarray(z, dtype=float)
        if not vector:
            return self._profile(np.abs(z))[2]
        r = np.linalg.norm(z, axis=-1)
        _, d1, d2 = self._profile(r)
        k = np.pi / (2.0 * self.epsilon)
        pos = r > 0
        # radial limit at the origin: beta(0) = (pi / (2 eps)) I
        tang = np.divide(d1, r, out=np.full_like(r, k), where=pos)
        zhat = np.divide(z, r[..., None], out=np.zeros_like(z), where=pos[..., None])
        d = z.shape[-1]
        outer = zhat[..., :, None] * zhat[..., None, :]
        eye = np.eye(d)
        radial = np.where(pos, d2, k)
        return radial[..., None, None] * outer + tang[..., None, None] * (eye - outer)


def rho(reg: Regularizer, z, vector: bool = False):
    return reg.rho(z, vector)


def alpha(reg: Regularizer, z, vector: bool = False):
    return reg.alpha(z, vector)


def beta(reg: Regularizer, z, vector: bool = False):
    return reg.beta(z, vector)


def property_report(
    epsilons=(1e-1, 1e-2, 1e-3), n_samples: int = 10_000, dim: int = 2, seed: int = 0
) -> list[tuple[str, bool, float]]:
    """Sampled check of convexity, |rho - |z|| <= eps, |alpha| <= 1,
    alpha . z >= 0, PSD Hessian and the finite-difference gradient.

    Returns ``(name, passed, worst_value)`` rows.
    """
    rng = np.random.default_rng(seed)
    rows = []
    for eps in epsilons:
        reg = Regularizer(eps)
        scales = eps * 10.0 ** rng.uniform(-3, 1.5, size=n_samples)
        z = rng.standard_normal((n_samples, dim))
        z *= (scales / np.linalg.norm(z, axis=1))[:, None]
        zs = rng.uniform(-5 * eps, 5 * eps, size=n_samples)
        tag = f"eps={eps:g}"

        gap = max(
            np.max(np.abs(reg.rho(z, vector=True) - np.linalg.norm(z, axis=1))),
            np.max(np.abs(reg.rho(zs) - np.abs(zs))),
        )
        rows.append((f"{tag} |rho-|z||<=eps", bool(gap <= eps), float(gap)))

        a = reg.alpha(z, vector=True)
        amax = max(np.max(np.linalg.norm(a, axis=1)), np.max(np.abs(reg.alpha(zs))))
        rows.append((f"{tag} |alpha|<=1", bool(amax <= 1 + 1e-12), float(amax)))
        amin = min(np.min(np.sum(a * z, axis=1)), np.min(reg.alpha(zs) * zs))
        rows.append((f"{tag} alpha.z>=0", bool(amin >= -1e-14), float(amin)))

        eig = np.linalg.eigvalsh(reg.beta(z, vector=True))
        emin = min(float(eig.min()), float(reg.beta(zs).min()))
        rows.append((f"{tag} beta PSD", bool(emin >= -1e-10), emin))

        b = rng.standard_normal((n_samples, dim)) * scales[:, None]
        lam = rng.uniform(0, 1, size=n_samples)[:, None]
        lhs = reg.rho(lam * z + (1 - lam) * b, vector=True)
        rhs = lam[:, 0] * reg.rho(z, vector=True) + (1 - lam[:, 0]) * reg.rho(b, vector=True)
        worst = float(np.max(lhs - rhs))
        rows.append((f"{tag} convex", bool(worst <= 1e-12), worst))

        h = 1e-6 * eps
        fd = np.empty_like(z)
        for i in range(dim):
            e = np.zeros(dim)
            e[i] = h
            fd[:, i] = (reg.rho(z + e, vector=True) - reg.rho(z - e, vector=True)) / (2 * h)
        err = float(np.max(np.linalg.norm(fd - a, axis=1) / np.maximum(np.linalg.norm(a, axis=1), 1e-3)))
        rows.append((f"{tag} FD gradient", bool(err <= 1e-6), err))
    return rows
