"""Local density of states from time series of the Loschmidt amplitude.

The LDOS d(E) = <psi| delta(E - H) |psi> is the Fourier transform of
G(t) = <psi| exp(-iHt) |psi>.  With samples g_k = G(k tau), k = 0..K-1, the
discrete transform

    d_l = (tau / 2 pi) sum_k g_k exp(i E_l t_k)

approximates the density on an energy grid of resolution eta = 2 pi / t_max.
When psi' = psi the symmetry G(-t) = G(t)* doubles the effective evolution
time (eta = pi / t_max).  The spectrum is periodic with period 2 pi / tau;
the reported window is shifted so that it covers the mean energy of the
initial state (a pure bin relabeling).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import HamiltonianSpec, dense_matrix
from .statevector import StateVector


@dataclass
class LdosSpectrum:
    """Energy grid with density values.

    ``eta`` is the grid spacing (energy resolution), ``window_offset`` the
    center energy the periodic window was shifted to, and
    ``max_imag_residue`` the largest imaginary part discarded when taking
    the real densities (tiny for Hermitian-symmetric input).
    """

    energies: np.ndarray
    densities: np.ndarray
    eta: float
    window_offset: float = 0.0
    max_imag_residue: float = 0.0

    def total_weight(self) -> float:
        """eta * sum(densities); approximates the LDOS normalization 1."""
        return float(self.eta * np.sum(self.densities))


def ldos_dft(
    g_samples,
    tau: float,
    hermitian_extend: bool = True,
    center_energy: float = 0.0,
    times=None,
    taper_width: float | None = None,
) -> LdosSpectrum:
    """Discrete Fourier transform of amplitude samples into an LDOS.

    ``g_samples[k]`` is G(k tau) starting at t = 0.  With
    ``hermitian_extend`` (valid only when psi' = psi) the series is extended
    to negative times via G(-t) = G(t)*.  ``times`` may be passed for
    validation; the grid must be uniform with spacing tau starting at 0.
    ``taper_width`` optionally multiplies the samples by a Gaussian
    exp(-(t/w)^2/2) before transforming (off by default).
    """
    g = np.asarray(g_samples, dtype=complex)
    if g.ndim != 1 or len(g) < 2:
        raise ValueError("need at least 2 amplitude samples")
    if tau <= 0:
        raise ValueError("tau must be positive")
    if times is not None:
        times = np.asarray(times, dtype=float)
        if len(times) != len(g):
            raise ValueError("times and samples differ in length")
        steps = np.diff(times)
        if abs(times[0]) > 1e-12 or np.max(np.abs(steps - tau)) > 1e-9 * max(1.0, tau):
            raise ValueError("non-uniform grid: samples must sit at t = k tau")

    if taper_width is not None:
        t_grid = np.arange(len(g)) * tau
        g = g * np.exp(-0.5 * (t_grid / taper_width) ** 2)

    if hermitian_extend:
        t_k = np.concatenate([-np.arange(len(g) - 1, 0, -1) * tau, np.arange(len(g)) * tau])
        series = np.concatenate([np.conj(g[:0:-1]), g])
    else:
        t_k = np.arange(len(g)) * tau
        series = g

    n_bins = len(series)
    eta = 2.0 * np.pi / (n_bins * tau)
    base = np.arange(n_bins) * eta
    period = 2.0 * np.pi / tau
    energies = base - period * np.round((base - center_energy) / period)
    order = np.argsort(energies)
    energies = energies[order]

    phases = np.exp(1j * np.outer(energies, t_k))
    densities = (tau / (2.0 * np.pi)) * (phases @ series)
    residue = float(np.max(np.abs(densities.imag)))
    return LdosSpectrum(
        energies=energies,
        densities=densities.real,
        eta=eta,
        window_offset=center_energy,
        max_imag_residue=residue,
    )


def exact_ldos(spec: HamiltonianSpec, psi: StateVector, width: float) -> LdosSpectrum:
    """Gaussian-broadened exact LDOS from dense diagonalization.

    d(E) = sum_k |<E_k|psi>|^2 N(E - E_k; width) on a grid extending a few
    widths past the spectrum edges; normalized to unit integral.
    """
    if width <= 0:
        raise ValueError("width must be positive")
    energies, vectors = np.linalg.eigh(dense_matrix(spec))
    weights = np.abs(vectors.conj().T @ psi.amplitudes) ** 2
    lo = energies[0] - 6 * width
    hi = energies[-1] + 6 * width
    step = width / 8.0
    grid = np.arange(lo, hi + step, step)
    gauss = np.exp(-0.5 * ((grid[:, None] - energies[None, :]) / width) ** 2)
    gauss /= width * np.sqrt(2.0 * np.pi)
    densities = gauss @ weights
    return LdosSpectrum(energies=grid, densities=densities, eta=float(step))
