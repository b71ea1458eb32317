"""Classic base functions with shift and optional rotation.

Every function is evaluated as ``f(R (x - shift))`` and is normalized so that
its global minimum value is 0, attained at ``x == shift``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NATIVE_BOUNDS = {
    "sphere": (-100.0, 100.0),
    "rosenbrock": (-2.048, 2.048),
    "ackley": (-32.0, 32.0),
    "rastrigin": (-5.12, 5.12),
    "griewank": (-600.0, 600.0),
    "weierstrass": (-0.5, 0.5),
    "schwefel": (-500.0, 500.0),
}

_SCHWEFEL_SHIFT = 420.9687462275036
_WEIERSTRASS_A = 0.5
_WEIERSTRASS_B = 3.0
_WEIERSTRASS_K = 20


def _sphere(z):
    return np.sum(z * z, axis=1)


def _rosenbrock(z):
    y = z + 1.0
    if y.shape[1] < 2:
        return (y[:, 0] - 1.0) ** 2
    return np.sum(100.0 * (y[:, 1:] - y[:, :-1] ** 2) ** 2 + (y[:, :-1] - 1.0) ** 2, axis=1)


def _ackley(z):
    d = z.shape[1]
    a = -20.0 * np.exp(-0.2 * np.sqrt(np.sum(z * z, axis=1) / d))
    b = -np.exp(np.sum(np.cos(2.0 * np.pi * z), axis=1) / d)
    return np.maximum(a + b + 20.0 + np.e, 0.0)


def _rastrigin(z):
    return np.sum(z * z - 10.0 * np.cos(2.0 * np.pi * z) + 10.0, axis=1)


def _griewank(z):
    i = np.sqrt(np.arange(1, z.shape[1] + 1))
    return 1.0 + np.sum(z * z, axis=1) / 4000.0 - np.prod(np.cos(z / i), axis=1)


def _weierstrass(z):
    k = np.arange(_WEIERSTRASS_K + 1)
    ak = _WEIERSTRASS_A ** k
    bk = _WEIERSTRASS_B ** k
    inner = np.sum(ak * np.cos(2.0 * np.pi * bk * (z[:, :, None] + 0.5)), axis=2)
    offset = z.shape[1] * np.sum(ak * np.cos(np.pi * bk))
    return np.maximum(np.sum(inner, axis=1) - offset, 0.0)


def _schwefel_g(y, d):
    # penalised variant: smooth wrap outside [-500, 500] keeps the optimum at y = 420.97
    out = y * np.sin(np.sqrt(np.abs(y)))
    hi = y > 500.0
    lo = y < -500.0
    if hi.any():
        w = 500.0 - np.mod(y[hi], 500.0)
        out[hi] = w * np.sin(np.sqrt(np.abs(w))) - (y[hi] - 500.0) ** 2 / (10000.0 * d)
    if lo.any():
        w = np.mod(np.abs(y[lo]), 500.0) - 500.0
        out[lo] = w * np.sin(np.sqrt(np.abs(w))) - (y[lo] + 500.0) ** 2 / (10000.0 * d)
    return out


_SCHWEFEL_PEAK = float(_SCHWEFEL_SHIFT * np.sin(np.sqrt(_SCHWEFEL_SHIFT)))


def _schwefel(z):
    d = z.shape[1]
    return np.maximum(np.sum(_SCHWEFEL_PEAK - _schwefel_g(z + _SCHWEFEL_SHIFT, d), axis=1), 0.0)


KERNELS = {
    "sphere": _sphere,
    "rosenbrock": _rosenbrock,
    "ackley": _ackley,
    "rastrigin": _rastrigin,
    "griewank": _griewank,
    "weierstrass": _weierstrass,
    "schwefel": _schwefel,
}


def random_rotation(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix from the QR factorization of a Gaussian matrix."""
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


@dataclass(frozen=True, eq=False)
class BaseFunction:
    kind: str
    shift: np.ndarray
    rotation: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in KERNELS:
            raise ValueError(f"unknown base function {self.kind!r}")
        object.__setattr__(self, "shift", np.asarray(self.shift, dtype=float))
        if self.rotation is not None:
            rot = np.asarray(self.rotation, dtype=float)
            if rot.shape != (self.dim, self.dim):
                raise ValueError("rotation must be a dim x dim matrix")
            object.__setattr__(self, "rotation", rot)

    @property
    def dim(self) -> int:
        return self.shift.shape[0]

    @property
    def bounds(self) -> tuple[float, float]:
        return NATIVE_BOUNDS[self.kind]

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        x = np.atleast_2d(x)
        if x.shape[1] != self.dim:
            raise ValueError(f"{self.kind} expects {self.dim} coordinates, got {x.shape[1]}")
        z = x - self.shift
        if self.rotation is not None:
            z = z @ self.rotation.T
        with np.errstate(over="ignore", invalid="ignore"):
            f = KERNELS[self.kind](z)
        f = np.where(np.isfinite(f), f, np.inf)
        return f[0] if single else f


def eval_base(fn: BaseFunction, x) -> float | np.ndarray:
    return fn(x)
