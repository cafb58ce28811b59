"""Kernelized correlation filter: DFT-domain ridge regression, detection and update."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .features import FeatureMap

IMAG_TOLERANCE = 1e-6


class InternalConsistencyError(RuntimeError):
    """A real-valued computation produced a significant imaginary part."""


@dataclass(frozen=True, eq=False)
class ResponseMap:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if not np.all(np.isfinite(v)):
            raise ValueError("response map contains non-finite values")
        object.__setattr__(self, "values", v)

    @property
    def shape(self):
        return self.values.shape

    def peak(self):
        """Return ``(value, (row, col))`` of the maximum; first index wins ties."""
        idx = int(np.argmax(self.values))
        r, c = np.unravel_index(idx, self.values.shape)
        return float(self.values[r, c]), (int(r), int(c))

    def peak_displacement(self):
        """Circular displacement ``(dy, dx)`` of the peak, wrapped to the signed range."""
        _, (r, c) = self.peak()
        rows, cols = self.values.shape
        dy = r - rows if r > rows // 2 else r
        dx = c - cols if c > cols // 2 else c
        return dy, dx


@dataclass(frozen=True, eq=False)
class FilterModel:
    alpha_hat: np.ndarray
    template: FeatureMap
    lam: float = 1e-4
    kernel_sigma: float = 0.5
    label_sigma: float = 1.0
    eta: float = 0.02
    kernel: str = "gaussian"

    def __post_init__(self):
        if self.alpha_hat.shape != self.template.values.shape[1:]:
            raise ValueError("alpha_hat and template spatial shapes differ")
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")

    @property
    def shape(self):
        return self.alpha_hat.shape


def real_ifft2(spectrum: np.ndarray) -> np.ndarray:
    """Inverse 2-D DFT of a spectrum that must correspond to a real signal."""
    out = np.fft.ifft2(spectrum)
    scale = max(1.0, float(np.max(np.abs(out.real))))
    if np.max(np.abs(out.imag)) > IMAG_TOLERANCE * scale:
        raise InternalConsistencyError(
            f"inverse DFT has imaginary part {np.max(np.abs(out.imag)):.3g}")
    return out.real


def gaussian_labels(w: int, h: int, label_sigma: float) -> np.ndarray:
    """Gaussian regression target of shape ``(h, w)`` peaking at index (0, 0)."""
    if w < 1 or h < 1 or not label_sigma > 0:
        raise ValueError("invalid label parameters")
    dr = np.arange(h)
    dr = np.minimum(dr, h - dr)
    dc = np.arange(w)
    dc = np.minimum(dc, w - dc)
    d2 = dr[:, None] ** 2 + dc[None, :] ** 2
    return np.exp(-d2 / (2.0 * label_sigma ** 2))


def _as_features(f) -> np.ndarray:
    v = f.values if isinstance(f, FeatureMap) else np.asarray(f, dtype=np.float64)
    return v[None] if v.ndim == 2 else v


def cross_correlation(x, z) -> np.ndarray:
    """Channel-summed circular cross-correlation ``c[r, s] = sum x[m, n] z[m + r, n + s]``."""
    xv, zv = _as_features(x), _as_features(z)
    if xv.shape != zv.shape:
        raise ValueError(f"shape mismatch: {xv.shape} vs {zv.shape}")
    xf = np.fft.fft2(xv, axes=(-2, -1))
    zf = np.fft.fft2(zv, axes=(-2, -1))
    return real_ifft2(np.sum(np.conj(xf) * zf, axis=0))


def kernel_correlation(x, z, kernel_sigma: float = 0.5, kernel: str = "gaussian") -> np.ndarray:
    """Kernel values between ``x`` and every circular shift of ``z``.

    The Gaussian kernel is normalised by the number of feature elements; its
    exponent is clamped at zero so all outputs lie in (0, 1]. ``kernel="linear"``
    returns the plain cross-correlation.
    """
    xv, zv = _as_features(x), _as_features(z)
    ccs = cross_correlation(xv, zv)
    if kernel == "linear":
        return ccs
    if kernel != "gaussian":
        raise ValueError(f"unknown kernel {kernel!r}")
    d2 = np.sum(xv ** 2) + np.sum(zv ** 2) - 2.0 * ccs
    return np.exp(-np.maximum(d2, 0.0) / (kernel_sigma ** 2 * xv.size))


def train(features, labels: np.ndarray, lam: float, kernel_sigma: float = 0.5,
          kernel: str = "gaussian") -> np.ndarray:
    """Dual coefficients in the DFT domain: ``alpha_hat = y_hat / (k_hat^xx + lam)``."""
    xv = _as_features(features)
    labels = np.asarray(labels, dtype=np.float64)
    if labels.shape != xv.shape[1:]:
        raise ValueError(f"labels shape {labels.shape} != feature shape {xv.shape[1:]}")
    if not lam > 0:
        raise ValueError("lambda must be positive")
    kxx = kernel_correlation(xv, xv, kernel_sigma, kernel)
    return np.fft.fft2(labels) / (np.fft.fft2(kxx) + lam)


def train_linear(features, labels: np.ndarray, lam: float) -> np.ndarray:
    """Primal single-channel filter ``w_hat = x_hat * y_hat / (x_hat * conj(x_hat) + lam)``."""
    xv = _as_features(features)
    if xv.shape[0] != 1:
        raise ValueError("linear closed form is single-channel")
    labels = np.asarray(labels, dtype=np.float64)
    if labels.shape != xv.shape[1:]:
        raise ValueError(f"labels shape {labels.shape} != feature shape {xv.shape[1:]}")
    if not lam > 0:
        raise ValueError("lambda must be positive")
    xf = np.fft.fft2(xv[0])
    return xf * np.fft.fft2(labels) / (xf * np.conj(xf) + lam)


def new_model(features: FeatureMap, labels: np.ndarray, lam: float = 1e-4,
              kernel_sigma: float = 0.5, eta: float = 0.02,
              label_sigma: float = 1.0, kernel: str = "gaussian") -> FilterModel:
    alpha_hat = train(features, labels, lam, kernel_sigma, kernel)
    return FilterModel(alpha_hat, features, lam, kernel_sigma, label_sigma, eta, kernel)


def detect(model: FilterModel, z: FeatureMap) -> ResponseMap:
    if z.values.shape != model.template.values.shape:
        raise ValueError(f"patch features {z.values.shape} != template {model.template.values.shape}")
    kxz = kernel_correlation(model.template, z, model.kernel_sigma, model.kernel)
    return ResponseMap(real_ifft2(np.fft.fft2(kxz) * model.alpha_hat))


def response_at_zero(model: FilterModel, z: FeatureMap) -> float:
    """Response for the aligned (zero-displacement) placement of ``z``."""
    return float(detect(model, z).values[0, 0])


def update(model: FilterModel, new_template: FeatureMap, new_alpha_hat: np.ndarray) -> FilterModel:
    """Blend the model toward a freshly trained one with learning rate ``eta``."""
    if new_template.values.shape != model.template.values.shape:
        raise ValueError("template shape mismatch")
    if new_alpha_hat.shape != model.alpha_hat.shape:
        raise ValueError("alpha_hat shape mismatch")
    eta = model.eta
    template = FeatureMap((1.0 - eta) * model.template.values + eta * new_template.values)
    alpha_hat = (1.0 - eta) * model.alpha_hat + eta * new_alpha_hat
    return replace(model, alpha_hat=alpha_hat, template=template)
