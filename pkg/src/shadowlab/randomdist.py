"""Seeded random streams, Gaussian and Laplace-Gaussian distributions.

Streams come from the counter-based Philox generator keyed by a 64-bit seed.
Child streams are derived from ``(seed, label)`` by hashing, so every trial of
an experiment can be replayed from the seed recorded next to its result.
Normal deviates use the Marsaglia polar transform on Philox uniforms.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

MASK64 = (1 << 64) - 1


def derive_seed(seed: int, label: str) -> int:
    digest = hashlib.blake2b(f"{int(seed) & MASK64}:{label}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


class SeededRng:
    """Single-owner random stream.  Create one per thread via :meth:`stream`."""

    def __init__(self, seed: int):
        self.seed = int(seed) & MASK64
        self._gen = np.random.Generator(np.random.Philox(key=self.seed))

    def stream(self, label: str) -> "SeededRng":
        return SeededRng(derive_seed(self.seed, label))

    def uniform(self, size=None) -> np.ndarray:
        return self._gen.random(size)

    def normal(self, size=None):
        shape = () if size is None else (size if isinstance(size, tuple) else (int(size),))
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        out = np.empty(count)
        filled = 0
        while filled < count:
            need = count - filled
            pairs = need // 2 + 8 + int(0.3 * need)
            w = 2.0 * self._gen.random((pairs, 2)) - 1.0
            s = np.einsum("ij,ij->i", w, w)
            keep = (s > 0.0) & (s < 1.0)
            w, s = w[keep], s[keep]
            z = (w * np.sqrt(-2.0 * np.log(s) / s)[:, None]).ravel()
            take = min(z.size, need)
            out[filled:filled + take] = z[:take]
            filled += take
        if size is None:
            return float(out[0])
        return out.reshape(shape)

    def unit_vectors(self, count: int, d: int) -> np.ndarray:
        g = self.normal((count, d))
        return g / np.linalg.norm(g, axis=1, keepdims=True)


def as_rng(rng) -> SeededRng:
    if isinstance(rng, SeededRng):
        return rng
    return SeededRng(int(rng))


@dataclass(frozen=True)
class GaussianSpec:
    mean: np.ndarray
    sigma: float

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        if self.sigma < 0 or not np.isfinite(mean).all():
            raise ValueError("need sigma >= 0 and a finite mean")
        object.__setattr__(self, "mean", mean)


@dataclass(frozen=True)
class LaplaceGaussianSpec:
    """Gaussian core inside radius ``r * sigma``, exponential radial tail outside."""

    mean: np.ndarray
    sigma: float
    r: float

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        if not (self.sigma > 0 and self.r > 0):
            raise ValueError("Laplace-Gaussian needs sigma > 0 and r > 0")
        object.__setattr__(self, "mean", mean)

    @property
    def d(self) -> int:
        return self.mean.size


def sample_gaussian(spec: GaussianSpec, rng, size=None) -> np.ndarray:
    rng = as_rng(rng)
    shape = spec.mean.shape if size is None else (size,) + spec.mean.shape
    if spec.sigma == 0:
        return np.broadcast_to(spec.mean, shape).copy()
    return spec.mean + spec.sigma * rng.normal(shape)


def lg_log_density(spec: LaplaceGaussianSpec, x) -> np.ndarray:
    """Log of the unnormalized Laplace-Gaussian density."""
    rho = np.linalg.norm(np.asarray(x, dtype=float) - spec.mean, axis=-1)
    s, r = spec.sigma, spec.r
    return np.where(rho <= r * s, -rho**2 / (2 * s * s), -rho * r / s + r * r / 2)


def lg_density_unnormalized(spec: LaplaceGaussianSpec, x):
    return np.exp(lg_log_density(spec, x))


def lg_radial_masses(spec: LaplaceGaussianSpec) -> tuple[float, float]:
    """Log-masses of the core (radius <= r sigma) and tail pieces."""
    d, s, r = spec.d, spec.sigma, spec.r
    core = (d * math.log(s) + (d / 2 - 1) * math.log(2) + special.gammaln(d / 2)
            + math.log(special.gammainc(d / 2, r * r / 2)))
    q = special.gammaincc(d, r * r)
    tail = -math.inf if q == 0 else (r * r / 2 + d * math.log(s / r) + special.gammaln(d) + math.log(q))
    return core, tail


def sample_laplace_gaussian(spec: LaplaceGaussianSpec, rng, size=None) -> np.ndarray:
    """Draw from the Laplace-Gaussian by composition.

    The radius is drawn from whichever radial piece is selected (probability
    proportional to its mass) by inverting the truncated chi / gamma CDF;
    the direction is uniform on the sphere.
    """
    rng = as_rng(rng)
    count = 1 if size is None else int(size)
    d, s, r = spec.d, spec.sigma, spec.r
    core, tail = lg_radial_masses(spec)
    p_tail = 0.0 if tail == -math.inf else 1.0 / (1.0 + math.exp(core - tail))
    pick = rng.uniform(count)
    u = rng.uniform(count)
    rho = np.empty(count)
    in_tail = pick < p_tail
    if (~in_tail).any():
        g = special.gammaincinv(d / 2, u[~in_tail] * special.gammainc(d / 2, r * r / 2))
        rho[~in_tail] = s * np.sqrt(2 * g)
    if in_tail.any():
        g = special.gammainccinv(d, u[in_tail] * special.gammaincc(d, r * r))
        rho[in_tail] = g * s / r
    out = spec.mean + rho[:, None] * rng.unit_vectors(count, d)
    return out[0] if size is None else out


def cutoff_radius(n: int, d: int, sigma: float) -> float:
    """``4 sigma sqrt(d log n)``."""
    return 4.0 * sigma * math.sqrt(d * math.log(n))


def empirical_global_diameter(n: int, d: int, sigma: float, trials: int, rng) -> float:
    """Fraction of trials in which the largest of ``n`` Gaussian(0, sigma^2 I_d)
    norms exceeds ``4 sigma sqrt(d log n)``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    rng = as_rng(rng)
    if sigma == 0:
        return 0.0
    threshold = cutoff_radius(n, d, sigma)
    exceed = 0
    for _ in range(trials):
        norms = np.linalg.norm(sigma * rng.normal((n, d)), axis=1)
        exceed += bool(norms.max() > threshold)
    return exceed / trials


def lg_projected_max_norm_ratio(n: int, d: int, k: int, sigma: float, trials: int, rng) -> float:
    """Mean over trials of ``max_i |pi_H(a_i - mean)|`` for ``n`` draws from
    ``LG_d(0, sigma, 4 sqrt(d log n))`` and a uniformly random ``k``-plane H,
    divided by ``4 sigma sqrt(k log n)``.  Reported, not bounded."""
    if not (1 <= k <= d) or n < 2:
        raise ValueError("need 1 <= k <= d and n >= 2")
    rng = as_rng(rng)
    spec = LaplaceGaussianSpec(np.zeros(d), sigma, 4.0 * math.sqrt(d * math.log(n)))
    total = 0.0
    for _ in range(trials):
        basis, _ = np.linalg.qr(rng.normal((d, k)))
        x = sample_laplace_gaussian(spec, rng, size=n)
        total += float(np.linalg.norm(x @ basis, axis=1).max())
    return total / trials / (4.0 * sigma * math.sqrt(k * math.log(n)))
