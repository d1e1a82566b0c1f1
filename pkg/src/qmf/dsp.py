"""Classical matched-filtering engine.

Spectra, Welch noise estimates, normalized templates and the
whitened-correlation SNR series that the search oracle thresholds.
Conventions, fixed once here and relied on everywhere else:

* forward transform is the plain unnormalized DFT, kept one-sided with
  the originating length ``m_time`` for exact inversion;
* the analysis band excludes the DC bin and, for even lengths, the
  Nyquist bin; custom band masks may widen the exclusions but the
  defaults apply when no mask is given;
* template normalization divides by sigma with
  sigma^2 = sum_band |s(f_k)|^2 / S_n(f_k) * df, and the SNR series is
  rho(t_j) = 2/(M dt) * |sum_band conj(Qc(f_k)) h(f_k) / S_n(f_k)
  exp(2 pi i j k / M)|.

All operations are pure functions of value-like inputs and are safe to
call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import welch

from .errors import ValidationError

_GRID_RTOL = 1e-9


@dataclass(eq=False)
class TimeSeries:
    """Uniformly sampled strain, ``samples[j]`` at time ``t0 + j*dt``."""

    samples: np.ndarray
    dt: float
    t0: float = 0.0

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1 or self.samples.size < 2:
            raise ValidationError("time series needs at least 2 samples")
        if not self.dt > 0.0:
            raise ValidationError(f"dt must be positive, got {self.dt}")
        bad = np.flatnonzero(~np.isfinite(self.samples))
        if bad.size:
            raise ValidationError(f"non-finite sample at index {bad[0]}")

    @property
    def m(self) -> int:
        return self.samples.size

    @property
    def fs(self) -> float:
        return 1.0 / self.dt


@dataclass(eq=False)
class FrequencySeries:
    """One-sided spectrum: bins k = 0..floor(m_time/2), spacing df."""

    bins: np.ndarray
    df: float
    m_time: int

    def __post_init__(self) -> None:
        self.bins = np.asarray(self.bins, dtype=np.complex128)
        if self.bins.ndim != 1:
            raise ValidationError("spectrum must be one-dimensional")
        if self.bins.size != self.m_time // 2 + 1:
            raise ValidationError(
                f"{self.bins.size} bins inconsistent with m_time={self.m_time}"
            )
        if not self.df > 0.0:
            raise ValidationError(f"df must be positive, got {self.df}")
        if not np.isfinite(self.bins).all():
            raise ValidationError("non-finite spectrum bin")


@dataclass(eq=False)
class Psd:
    """One-sided noise power spectral density (strain^2/Hz)."""

    values: np.ndarray
    df: float

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1 or self.values.size < 2:
            raise ValidationError("PSD needs at least 2 bins")
        if not self.df > 0.0:
            raise ValidationError(f"df must be positive, got {self.df}")
        if not np.isfinite(self.values).all() or (self.values < 0).any():
            raise ValidationError("PSD values must be finite and non-negative")


@dataclass(eq=False)
class SnrSeries:
    """Matched-filter SNR magnitude at every time offset."""

    rho: np.ndarray
    dt: float

    def __post_init__(self) -> None:
        self.rho = np.asarray(self.rho, dtype=np.float64)
        if self.rho.ndim != 1 or self.rho.size == 0:
            raise ValidationError("SNR series must be non-empty")


def band_mask(m_time: int, df: float | None = None,
              f_lo: float | None = None, f_hi: float | None = None) -> np.ndarray:
    """Boolean mask of analysis bins over the one-sided grid.

    DC is always excluded, as is the Nyquist bin when ``m_time`` is
    even.  Optional band edges (requires ``df``) additionally exclude
    bins strictly below ``f_lo`` or above ``f_hi``.
    """
    n_bins = m_time // 2 + 1
    mask = np.ones(n_bins, dtype=bool)
    mask[0] = False
    if m_time % 2 == 0:
        mask[-1] = False
    if f_lo is not None or f_hi is not None:
        if df is None:
            raise ValidationError("band edges in Hz require df")
        f = np.arange(n_bins) * df
        if f_lo is not None:
            mask &= f >= f_lo
        if f_hi is not None:
            mask &= f <= f_hi
    return mask


def forward_fft(ts: TimeSeries) -> FrequencySeries:
    """One-sided DFT, bins[k] = sum_j samples[j] exp(-2 pi i j k / M)."""
    return FrequencySeries(
        bins=np.fft.rfft(ts.samples), df=1.0 / (ts.m * ts.dt), m_time=ts.m
    )


def inverse_fft(fs: FrequencySeries) -> TimeSeries:
    """Invert :func:`forward_fft` back to the real time series."""
    dt = 1.0 / (fs.df * fs.m_time)
    return TimeSeries(samples=np.fft.irfft(fs.bins, n=fs.m_time), dt=dt)


def estimate_psd(ts: TimeSeries, seg_len: int, overlap_frac: float = 0.5,
                 average: str = "mean") -> Psd:
    """Welch PSD with Hann windows.

    Normalized so white Gaussian noise of variance sigma^2 averages to
    2 sigma^2 dt across the band.  ``average`` may be ``"mean"`` or
    ``"median"`` (median-of-periodograms, robust to loud transients).
    """
    if seg_len > ts.m:
        raise ValidationError(f"seg_len={seg_len} exceeds series length {ts.m}")
    if seg_len < 2:
        raise ValidationError("seg_len must be at least 2")
    if not 0.0 <= overlap_frac < 1.0:
        raise ValidationError(f"overlap_frac must be in [0, 1), got {overlap_frac}")
    if average not in ("mean", "median"):
        raise ValidationError(f"average must be 'mean' or 'median', got {average!r}")
    noverlap = int(seg_len * overlap_frac)
    step = seg_len - noverlap
    n_segments = 1 + (ts.m - seg_len) // step
    if n_segments < 2:
        raise ValidationError("need at least 2 segments to average")
    freqs, pxx = welch(
        ts.samples, fs=ts.fs, window="hann", nperseg=seg_len,
        noverlap=noverlap, average=average,
    )
    psd = Psd(values=pxx, df=float(freqs[1] - freqs[0]))
    interior = psd.values[1:-1] if seg_len % 2 == 0 else psd.values[1:]
    if not (interior > 0.0).all():
        raise ValidationError("estimated PSD is not positive on the analysis band")
    return psd


def white_psd(m_time: int, dt: float, sigma: float = 1.0) -> Psd:
    """Flat one-sided PSD of white noise with per-sample deviation sigma."""
    if not sigma > 0.0:
        raise ValidationError(f"sigma must be positive, got {sigma}")
    n_bins = m_time // 2 + 1
    return Psd(values=np.full(n_bins, 2.0 * sigma * sigma * dt), df=1.0 / (m_time * dt))


def interpolate_psd(psd: Psd, m_time: int, dt: float) -> Psd:
    """Resample a PSD onto the one-sided grid of an M-point analysis."""
    df = 1.0 / (m_time * dt)
    f_new = np.arange(m_time // 2 + 1) * df
    f_old = np.arange(psd.values.size) * psd.df
    return Psd(values=np.interp(f_new, f_old, psd.values), df=df)


def _check_grids(*series, psd: Psd) -> None:
    n_bins = series[0].bins.size
    df = series[0].df
    for s in series[1:]:
        if s.bins.size != n_bins or not math.isclose(s.df, df, rel_tol=_GRID_RTOL):
            raise ValidationError("frequency series are on different grids")
    if psd.values.size != n_bins or not math.isclose(psd.df, df, rel_tol=_GRID_RTOL):
        raise ValidationError("PSD grid does not match the spectra")


def normalize_template(s: FrequencySeries, psd: Psd,
                       band: np.ndarray | None = None) -> FrequencySeries:
    """Scale a template spectrum to unit noise-weighted norm.

    Divides by sigma with sigma^2 = sum_band |s_k|^2 / S_n(f_k) * df.
    Invariant under positive rescaling of the input; rejects templates
    with no energy in the band and PSDs that vanish inside it.
    """
    _check_grids(s, psd=psd)
    if band is None:
        band = band_mask(s.m_time)
    if band.size != s.bins.size:
        raise ValidationError("band mask length does not match the grid")
    if (psd.values[band] <= 0.0).any():
        raise ValidationError("PSD vanishes inside the analysis band")
    sigma_sq = float(np.sum(np.abs(s.bins[band]) ** 2 / psd.values[band]) * s.df)
    if sigma_sq <= 0.0:
        raise ValidationError("template has zero energy in the analysis band")
    return FrequencySeries(bins=s.bins / math.sqrt(sigma_sq), df=s.df, m_time=s.m_time)


def complex_template(params, fs: float, m: int, psd: Psd,
                     band: np.ndarray | None = None) -> FrequencySeries:
    """Phase-maximizing complex template from a quadrature pair.

    Generates the chirp at its reference phase and a quarter cycle
    later, normalizes each, and combines them as (Q0 - i Qq)/2.  Under
    exact quadrature this collapses to Q0 alone, and in general |z|
    of the filtered output is independent of the signal phase while
    Re z recovers the phase-0 filter output.
    """
    from .bank import ChirpParams, waveform  # deferred: bank depends on dsp

    q_params = ChirpParams(params.f0, params.f1, params.dur,
                           params.phi0 + math.pi / 2.0)
    q0 = normalize_template(forward_fft(waveform(params, fs, m)), psd, band)
    qq = normalize_template(forward_fft(waveform(q_params, fs, m)), psd, band)
    return FrequencySeries(
        bins=0.5 * (q0.bins - 1j * qq.bins), df=q0.df, m_time=m
    )


def filter_series(data: FrequencySeries, template: FrequencySeries, psd: Psd,
                  band: np.ndarray | None = None) -> np.ndarray:
    """Complex matched-filter output at every time offset.

    z(t_j) = 2/(M dt) * sum_band conj(Q_k) (dt h_k) / S_n(f_k) e^{2 pi i jk/M},
    where dt*h_k calibrates the raw DFT of the data to the continuum
    transform; the dt factors cancel into an overall 2/M on raw bins.
    With this calibration pure unit-variance noise gives E[|z|^2] = 2,
    so z is on the conventional SNR scale.  For a real template's
    spectrum, Re z is the signed phase-0 filter output and |z| the
    phase-maximized SNR.
    """
    _check_grids(data, template, psd=psd)
    if band is None:
        band = band_mask(data.m_time)
    if band.size != data.bins.size:
        raise ValidationError("band mask length does not match the grid")
    if (psd.values[band] <= 0.0).any():
        raise ValidationError("PSD vanishes inside the analysis band")
    m = data.m_time
    integrand = np.zeros(m, dtype=np.complex128)
    idx = np.flatnonzero(band)
    integrand[idx] = np.conj(template.bins[idx]) * data.bins[idx] / psd.values[idx]
    z = np.fft.ifft(integrand) * m  # ifft carries 1/M; the sum does not
    return 2.0 / m * z


def snr_series(data: FrequencySeries, qc: FrequencySeries, psd: Psd,
               band: np.ndarray | None = None) -> SnrSeries:
    """Matched-filter SNR series rho(t_j) = |filter_series(...)|."""
    z = filter_series(data, qc, psd, band)
    dt = 1.0 / (data.df * data.m_time)
    return SnrSeries(rho=np.abs(z), dt=dt)


def max_snr(snr: SnrSeries) -> tuple[float, int]:
    """Peak SNR and the first index attaining it."""
    j = int(np.argmax(snr.rho))
    return float(snr.rho[j]), j


def match_predicate(rho_max: float, rho_thr: float) -> int:
    """1 iff the peak SNR reaches the threshold (inclusive), else 0."""
    if not rho_thr > 0.0:
        raise ValidationError(f"threshold must be positive, got {rho_thr}")
    return int(rho_max >= rho_thr)
