"""FFT helpers for L-periodic sample vectors on uniform grids.

All routines assume samples f_j = f(j*h), j = 0..n-1, h = period/n, and treat
the data as a band-limited trigonometric polynomial (exact for data that came
out of truncated Fourier series, spectrally accurate for smooth data).
"""

import numpy as np


def wavenumbers(n, period):
    """Angular wavenumbers matching numpy.fft.rfft layout."""
    return 2.0 * np.pi * np.fft.rfftfreq(n, d=period / n)


def derivative(samples, period, order=1):
    """Spectral derivative of the trigonometric interpolant."""
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    fh = np.fft.rfft(samples)
    k = wavenumbers(n, period)
    fh = fh * (1j * k) ** order
    if order % 2 == 1 and n % 2 == 0:
        fh[-1] = 0.0  # odd derivative of the Nyquist mode is not representable
    return np.fft.irfft(fh, n)


def resample(samples, factor):
    """Trigonometric interpolation onto a grid refined by an integer factor."""
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    if factor == 1:
        return samples.copy()
    m = n * int(factor)
    fh = np.fft.rfft(samples)
    if n % 2 == 0:
        fh[-1] *= 0.5  # Nyquist energy splits between +/- modes once unaliased
    out = np.zeros(m // 2 + 1, dtype=complex)
    out[: fh.size] = fh
    return np.fft.irfft(out, m) * factor


def shifted(samples, period, shift):
    """Samples of x -> f(x + shift) on the same grid."""
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    fh = np.fft.rfft(samples)
    k = wavenumbers(n, period)
    fh = fh * np.exp(1j * k * shift)
    if n % 2 == 0:
        fh[-1] = fh[-1].real  # keep the interpolant real
    return np.fft.irfft(fh, n)


def evaluator(samples, period):
    """Callable evaluating the trigonometric interpolant at arbitrary points."""
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    fh = np.fft.rfft(samples) / n
    k = wavenumbers(n, period)
    # Interior modes carry weight 2; mode 0 (and Nyquist for even n) weight 1.
    weights = np.full(fh.size, 2.0)
    weights[0] = 1.0
    if n % 2 == 0:
        weights[-1] = 1.0
    a = weights * fh.real  # cosine coefficients
    b = -weights * fh.imag  # sine coefficients

    def _eval(x):
        x = np.asarray(x, dtype=float)
        phase = np.multiply.outer(x, k)
        out = np.cos(phase) @ a + np.sin(phase) @ b
        return out if out.ndim else float(out)

    return _eval
