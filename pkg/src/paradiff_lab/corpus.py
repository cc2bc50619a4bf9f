"""Seeded random fields and symbols with exactly sparse spectra.

Generators used by both the experiment runner and the test suite.  All
random content is placed on explicit frequency lists with hard zeros
elsewhere, so spectral-support statements about generated objects are exact
set statements rather than threshold judgements.
"""

from __future__ import annotations

import numpy as np

from .symbols import ChingProfile, DiscreteSymbol, ching_symbol
from .torus import SpectralField, TorusGrid


def rng_for(seed: int, *stream) -> np.random.Generator:
    """Deterministic child generator for a labelled stream."""
    return np.random.default_rng(np.random.SeedSequence((seed,) + stream))


def random_band_limited_field(grid: TorusGrid, rng, max_freq: float,
                              modes: int = 12) -> SpectralField:
    """Field with ``modes`` random coefficients inside |eta| <= max_freq."""
    norms = grid.freq_norms()
    candidates = np.argwhere(norms <= max_freq)
    take = min(modes, len(candidates))
    sel = candidates[rng.choice(len(candidates), size=take, replace=False)]
    coeffs = np.zeros(grid.shape, dtype=np.complex128)
    amps = rng.standard_normal(take) + 1j * rng.standard_normal(take)
    for row, amp in zip(sel, amps):
        coeffs[tuple(row)] = amp
    peak = np.max(np.abs(coeffs))
    if peak > 0:
        coeffs /= peak
    return SpectralField.from_coeffs(grid, coeffs)


def random_sparse_symbol(grid: TorusGrid, rng, d: float = 0.0,
                         x_band: float | None = None,
                         eta_band: float | None = None,
                         eta_min: float = 0.0,
                         entries: int = 40) -> DiscreteSymbol:
    """Symbol with a sparse partial transform: random mass on ``entries``
    (xi, eta) pairs with |xi| <= x_band, eta_min <= |eta| <= eta_band,
    weighted by (1 + |eta|)^d so the declared order is realized."""
    ny = grid.nyquist
    if x_band is None:
        x_band = ny / 4
    if eta_band is None:
        eta_band = ny / 2
    norms = grid.freq_norms()
    xi_ok = np.argwhere(norms <= x_band)
    eta_ok = np.argwhere((norms <= eta_band) & (norms >= eta_min))
    pft = np.zeros(grid.shape + grid.shape, dtype=np.complex128)
    k = grid.axis_freqs().astype(float)
    for _ in range(entries):
        xi = tuple(xi_ok[rng.integers(len(xi_ok))])
        eta = tuple(eta_ok[rng.integers(len(eta_ok))])
        eta_norm = float(np.sqrt(sum(k[i] ** 2 for i in eta)))
        amp = rng.standard_normal() + 1j * rng.standard_normal()
        pft[xi + eta] = amp * (1.0 + eta_norm) ** d
    peak = np.max(np.abs(pft))
    if peak > 0:
        pft /= peak
    return DiscreteSymbol.from_partial_ft(grid, d, pft, class_tag="custom")


def lacunary_stack(grid: TorusGrid, theta, J: int, weights) -> SpectralField:
    """sum_j w_j e^{i 2^j theta . x} on the lattice."""
    theta = tuple(int(t) for t in (theta if hasattr(theta, "__len__") else (theta,)))
    coeffs = np.zeros(grid.shape, dtype=np.complex128)
    for j, w in zip(range(J + 1), weights):
        pt = tuple(2**j * t for t in theta)
        coeffs[grid.index_of(pt)] += w
    return SpectralField.from_coeffs(grid, coeffs)


def optimal_stack_weights(J: int, source_smoothness: float) -> np.ndarray:
    """Coherent-stack weights maximizing output mass at frequency zero per
    unit of source norm: w_j proportional to 2^{-2 j s}."""
    return 2.0 ** (-2.0 * source_smoothness * np.arange(J + 1))


def single_band_input(grid: TorusGrid, theta, j: int,
                      offset: int = 0) -> SpectralField:
    """One mode at 2^j theta (+ offset along the first axis)."""
    theta = tuple(int(t) for t in (theta if hasattr(theta, "__len__") else (theta,)))
    pt = tuple(2**j * t for t in theta)
    pt = (pt[0] + offset,) + pt[1:]
    coeffs = np.zeros(grid.shape, dtype=np.complex128)
    coeffs[grid.index_of(pt)] = 1.0
    return SpectralField.from_coeffs(grid, coeffs)


def offset_stack(grid: TorusGrid, theta, J: int, weights, delta: int = 1,
                 j_start: int = 2) -> SpectralField | None:
    """Coherent stack on the shifted lacunary points 2^j theta + delta e_1,
    probing symbols whose profile vanishes exactly at theta."""
    theta = tuple(int(t) for t in (theta if hasattr(theta, "__len__") else (theta,)))
    coeffs = np.zeros(grid.shape, dtype=np.complex128)
    placed = False
    for j in range(j_start, J + 1):
        pt = tuple(2**j * t for t in theta)
        pt = (pt[0] + delta,) + pt[1:]
        w = weights[j - j_start]
        if w == 0.0:
            continue
        coeffs[grid.index_of(pt)] += w
        placed = True
    if not placed:
        return None
    return SpectralField.from_coeffs(grid, coeffs)


def boundedness_corpus(grid: TorusGrid, theta, J: int, source_s: float,
                       seed: int, profile=None, n_random: int = 3,
                       random_band: float = 10.0) -> list:
    """Inputs probing the operator norm of a lacunary symbol truncated at J:
    coherent stacks on and off the lacunary ray, single bands, and seeded
    random fields band-limited below the first unresolved annulus.

    With the symbol's annular ``profile`` given, the off-ray stack is
    amplitude-adapted: weights b_j 2^{-2 j s} with b_j the profile value at
    the shifted point, which maximizes the coherent output per unit of
    source norm."""
    items = [
        ("optimal_stack", lacunary_stack(grid, theta, J,
                                         optimal_stack_weights(J, source_s))),
        ("uniform_stack", lacunary_stack(grid, theta, J, np.ones(J + 1))),
        ("single_low", single_band_input(grid, theta, 0)),
        ("single_mid", single_band_input(grid, theta, max(1, J // 2))),
        ("single_top", single_band_input(grid, theta, J)),
    ]
    j_start = 2
    if profile is not None and J >= j_start:
        th = tuple(int(t) for t in (theta if hasattr(theta, "__len__") else (theta,)))
        b = []
        for j in range(j_start, J + 1):
            shifted = tuple((2**j * t + (1 if ax == 0 else 0)) / 2**j
                            for ax, t in enumerate(th))
            b.append(abs(complex(np.asarray(profile(*shifted)))))
        w = np.array(b) * 2.0 ** (-2.0 * source_s * np.arange(j_start, J + 1))
        off = offset_stack(grid, th, J, w, delta=1, j_start=j_start)
        if off is not None:
            items.append(("adapted_offset_stack", off))
    for i in range(n_random):
        rng = rng_for(seed, 7, i)
        items.append((f"random_{i}",
                      random_band_limited_field(grid, rng, random_band)))
    return items


def standard_ching(grid: TorusGrid, d: float = 0.0, J: int = 4,
                   zero_order: int = 0, one_sided: bool = False) -> DiscreteSymbol:
    """The canonical lacunary counterexample symbol on this grid."""
    theta = (1,) + (0,) * (grid.n - 1)
    profile = ChingProfile(zero_order=zero_order,
                           theta_hat=tuple(float(t) for t in theta),
                           one_sided=one_sided)
    return ching_symbol(grid, d, theta, profile, J)
