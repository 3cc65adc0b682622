"""Estimators and observables: correlations, spectra, reorganization
energy, transport efficiency, transfer time, localization measures, and
intensity-image readout.

Correlation estimators divide by the full series length n (not n - lag)
and remove the sample mean, so they match the biased sample definition
used for characterizing the writing-speed sequences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PhysicsError
from .dynamics import EvolutionTrace, site_probabilities

__all__ = ["SpectrumEstimate", "LinearFitResult", "sample_acf", "sample_ccf",
           "psd_periodogram", "reorganization_energy", "variance",
           "fit_reorganization_law", "transport_efficiency", "transfer_time",
           "ipr", "eigen_site_distribution", "most_probable_site",
           "efficiency_from_intensity_image", "read_pixel_matrix",
           "EllipseMask", "RectMask"]


@dataclass(frozen=True)
class SpectrumEstimate:
    """One-sided power spectral density on an ascending frequency grid."""

    frequencies: np.ndarray   # mm^-1 (ordinary frequency grid)
    density: np.ndarray       # power per unit frequency
    sampling_frequency: float
    nfft: int
    site: int = -1

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        d = np.asarray(self.density, dtype=float)
        if f.shape != d.shape:
            raise PhysicsError("frequency and density grids differ in length")
        if np.any(f < 0) or np.any(np.diff(f) <= 0):
            raise PhysicsError("frequencies must be nonnegative and ascending")
        if np.any(d < -1e-12):
            raise PhysicsError("spectral density must be nonnegative")
        f.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "density", np.maximum(d, 0.0))


@dataclass(frozen=True)
class LinearFitResult:
    """Ordinary least-squares line with goodness of fit."""

    slope: float
    intercept: float
    r_squared: float

    def __post_init__(self):
        if not -1e-12 <= self.r_squared <= 1 + 1e-12:
            raise PhysicsError("r_squared must lie in [0, 1]")


def _autocovariance(x: np.ndarray, lag: int) -> float:
    n = len(x)
    xc = x - x.mean()
    return float(np.dot(xc[lag:], xc[: n - lag]) / n)


def sample_acf(seq, lag: int) -> float:
    """Normalized sample autocorrelation at the given lag.

    Uses the length-n denominator with the sample mean removed:
    Acov(tau) = (1/n) sum_{t} (x_{t+tau} - xbar)(x_t - xbar).
    """
    x = np.asarray(seq, dtype=float)
    if not 0 <= lag < len(x):
        raise PhysicsError("lag must satisfy 0 <= lag < n")
    c0 = _autocovariance(x, 0)
    if c0 == 0:
        raise PhysicsError("constant series has undefined autocorrelation")
    return _autocovariance(x, lag) / c0


def sample_ccf(x, y, lag: int) -> float:
    """Normalized sample cross-correlation of two equal-length series."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise PhysicsError("series must have equal length")
    n = len(x)
    if not 0 <= lag < n:
        raise PhysicsError("lag must satisfy 0 <= lag < n")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = np.sqrt(np.dot(xc, xc) / n)
    sy = np.sqrt(np.dot(yc, yc) / n)
    if sx == 0 or sy == 0:
        raise PhysicsError("constant series has undefined cross-correlation")
    return float(np.dot(xc[lag:], yc[: n - lag]) / n) / (sx * sy)


def psd_periodogram(seq, f_s: float, nfft: int = 128, site: int = -1) -> SpectrumEstimate:
    """One-sided rectangular-window periodogram of a mean-removed sequence.

    The sequence is zero-padded to ``nfft`` points.  The density is
    scaled so that sum(J) * df equals the sample variance of the input
    (Parseval-consistent), with the one-sided folding applied to all
    interior bins.
    """
    x = np.asarray(seq, dtype=float)
    n = len(x)
    if n == 0:
        raise PhysicsError("empty sequence has no spectrum")
    if n > nfft:
        raise PhysicsError("sequence longer than nfft")
    if nfft & (nfft - 1):
        raise PhysicsError("nfft must be a power of two")
    if f_s <= 0:
        raise PhysicsError("sampling frequency must be positive")
    xc = x - x.mean()
    spec = np.fft.rfft(xc, n=nfft)
    # Two-sided density |X|^2 / (n f_s); folding doubles interior bins.
    dens = (np.abs(spec) ** 2) / (n * f_s)
    if nfft % 2 == 0:
        dens[1:-1] *= 2.0
    else:
        dens[1:] *= 2.0
    freqs = np.fft.rfftfreq(nfft, d=1.0 / f_s)
    return SpectrumEstimate(freqs, dens, f_s, nfft, site)


def reorganization_energy(spec: SpectrumEstimate) -> float:
    """(1/pi) * sum_{w>0} J(w)/w * dw over the positive angular-frequency bins.

    The zero-frequency bin is excluded: mean removal makes it an
    estimation artifact and the 1/w weight is singular there.
    """
    if len(spec.frequencies) == 0:
        raise PhysicsError("empty spectrum")
    omega = 2.0 * np.pi * spec.frequencies
    # Density per unit angular frequency; d_omega = 2 pi df.
    j_omega = spec.density / (2.0 * np.pi)
    if len(omega) < 2:
        return 0.0
    d_omega = omega[1] - omega[0]
    pos = omega > 0
    return float(np.sum(j_omega[pos] / omega[pos]) * d_omega / np.pi)


def variance(seq) -> float:
    """Population variance of a sequence."""
    x = np.asarray(seq, dtype=float)
    if len(x) == 0:
        raise PhysicsError("empty sequence has no variance")
    return float(np.var(x))


def fit_reorganization_law(points) -> LinearFitResult:
    """Least-squares line through (variance, reorganization energy) pairs."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise PhysicsError("need at least 3 (variance, energy) pairs")
    x, y = pts[:, 0], pts[:, 1]
    if np.ptp(x) == 0:
        raise PhysicsError("degenerate fit: all variances equal")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid ** 2)) / ss_tot
    return LinearFitResult(float(slope), float(intercept), max(0.0, min(1.0, r2)))


def _index_at(tr: EvolutionTrace, z: float) -> int:
    j = z / tr.fine_step
    if abs(j - round(j)) > 1e-9 or not 0 <= round(j) < len(tr.positions):
        raise PhysicsError(f"z={z:g} mm is not on the trace grid")
    return int(round(j))


def transport_efficiency(tr: EvolutionTrace, mode: str = "intensity",
                         z: float | None = None,
                         site_energies: tuple | None = None) -> float:
    """Fraction of intensity that has reached the sink chain at z.

    ``intensity`` mode returns sum_sink p / sum_all p.  The
    ``energy_weighted`` mode multiplies by eps_drain/eps_source using
    caller-supplied absolute site energies (eps_source, eps_drain).
    """
    sink = tr.sink_indices
    if not sink:
        raise PhysicsError("trace has no sink waveguides")
    j = len(tr.positions) - 1 if z is None else _index_at(tr, z)
    p = np.abs(tr.amplitudes[j]) ** 2
    eta = float(p[list(sink)].sum() / p.sum())
    if mode == "intensity":
        return eta
    if mode == "energy_weighted":
        if site_energies is None:
            raise PhysicsError("energy_weighted mode needs (source, drain) energies")
        eps_source, eps_drain = site_energies
        if eps_source == 0:
            raise PhysicsError("source energy must be nonzero")
        return eta * eps_drain / eps_source
    raise PhysicsError(f"unknown efficiency mode {mode!r}")


def transfer_time(tr: EvolutionTrace, total_length: float | None = None) -> float:
    """Mean arrival distance of the intensity that reaches the sink by T.

    tau = -(dt/eta_N) * sum_{j=1}^{N-1} P_sink(j dt) + (T - dt/2), where
    eta_N is the sink fraction at T and dt the trace sampling step.
    """
    sink = list(tr.sink_indices)
    if not sink:
        raise PhysicsError("trace has no sink waveguides")
    t_total = tr.positions[-1] if total_length is None else total_length
    n = _index_at(tr, t_total)
    if n < 1:
        raise PhysicsError("trace too short for a transfer time")
    dt = tr.fine_step
    p_sink = (np.abs(tr.amplitudes[: n + 1, sink]) ** 2).sum(axis=1)
    norm = (np.abs(tr.amplitudes[n]) ** 2).sum()
    eta_n = p_sink[n] / norm
    if eta_n <= 0:
        raise PhysicsError("zero terminal efficiency: transfer time undefined")
    return float(-(dt / eta_n) * p_sink[1:n].sum() + (t_total - dt / 2.0))


def ipr(h, site_subset=None) -> float:
    """Inverse participation ratio of the eigenstates on a site block.

    The Hamiltonian is restricted to the subset's principal submatrix
    (the 7-site network block by default) and IPR = 1 / sum |<i|E_a>|^4.
    """
    from .model import Hamiltonian
    if isinstance(h, Hamiltonian):
        matrix = h.matrix
        if site_subset is None:
            site_subset = h.fmo_indices
    else:
        matrix = np.asarray(h)
        if site_subset is None:
            site_subset = range(matrix.shape[0])
    idx = list(site_subset)
    block = matrix[np.ix_(idx, idx)]
    if np.abs(block - block.conj().T).max() > 1e-10:
        raise PhysicsError("Hamiltonian block is not Hermitian")
    _, v = np.linalg.eigh(block)
    return float(1.0 / np.sum(np.abs(v) ** 4))


def eigen_site_distribution(h, site_subset=None):
    """Eigenvalues (ascending) and the |<i|E_a>|^2 weight matrix.

    Returns (eigenvalues, weights) where weights[i, a] is site i's
    probability in eigenstate a; every row sums to 1 by completeness.
    """
    from .model import Hamiltonian
    if isinstance(h, Hamiltonian):
        matrix = h.matrix
        if site_subset is None:
            site_subset = h.fmo_indices
    else:
        matrix = np.asarray(h)
        if site_subset is None:
            site_subset = range(matrix.shape[0])
    idx = list(site_subset)
    block = matrix[np.ix_(idx, idx)]
    if np.abs(block - block.conj().T).max() > 1e-10:
        raise PhysicsError("Hamiltonian block is not Hermitian")
    w, v = np.linalg.eigh(block)
    return w, np.abs(v) ** 2


def most_probable_site(tr: EvolutionTrace) -> np.ndarray:
    """Per-sample 1-based network site with the largest renormalized
    probability; ties break toward the lowest site number."""
    fmo = list(tr.fmo_indices)
    if len(fmo) < 7:
        raise PhysicsError("trace does not cover the seven network sites")
    p = site_probabilities(tr, fmo, renormalize=True)
    return np.argmax(p, axis=1) + 1


@dataclass(frozen=True)
class EllipseMask:
    """Ellipse in pixel units: center (cx, cy), semi-axes (rx, ry)."""

    cx: float
    cy: float
    rx: float
    ry: float

    def select(self, shape):
        ny, nx = shape
        if self.rx <= 0 or self.ry <= 0:
            raise PhysicsError("ellipse semi-axes must be positive")
        y, x = np.mgrid[0:ny, 0:nx]
        return ((x - self.cx) / self.rx) ** 2 + ((y - self.cy) / self.ry) ** 2 <= 1.0


@dataclass(frozen=True)
class RectMask:
    """Axis-aligned rectangle: corner (x, y), extent (w, h), in pixels."""

    x: float
    y: float
    w: float
    h: float

    def select(self, shape):
        ny, nx = shape
        if self.w <= 0 or self.h <= 0:
            raise PhysicsError("rectangle extent must be positive")
        y, x = np.mgrid[0:ny, 0:nx]
        return (x >= self.x) & (x < self.x + self.w) & (y >= self.y) & (y < self.y + self.h)


def read_pixel_matrix(path) -> np.ndarray:
    """Parse a whitespace-separated ASCII matrix, one row per line."""
    rows = []
    width = None
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                row = [float(tok) for tok in line.split()]
            except ValueError as exc:
                raise PhysicsError(f"line {lineno}: non-numeric pixel value") from exc
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise PhysicsError(
                    f"line {lineno}: ragged row ({len(row)} values, expected {width})")
            rows.append(row)
    if not rows:
        raise PhysicsError("empty pixel matrix")
    return np.asarray(rows)


def efficiency_from_intensity_image(pixels, fmo_mask: EllipseMask,
                                    sink_mask: RectMask,
                                    background: float = 0.0) -> float:
    """Sink fraction of masked intensity after background subtraction."""
    img = np.asarray(pixels, dtype=float)
    if img.ndim != 2:
        raise PhysicsError("pixel matrix must be two-dimensional")
    m_fmo = fmo_mask.select(img.shape)
    m_sink = sink_mask.select(img.shape)
    if not m_fmo.any() or not m_sink.any():
        raise PhysicsError("mask lies outside the image")
    if (m_fmo & m_sink).any():
        raise PhysicsError("network and sink masks overlap")
    net = img - background
    s_fmo = float(net[m_fmo].sum())
    s_sink = float(net[m_sink].sum())
    total = s_fmo + s_sink
    if total <= 0:
        raise PhysicsError("zero total masked intensity")
    return s_sink / total
