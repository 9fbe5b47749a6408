"""Deterministic synthetic flow-pattern dataset.

Samples are drawn on a log-log superficial-velocity map for a set of pipe
inclinations and two pipe diameters. Labels come from a fixed region
function with one contiguous region per pattern; inside a thin band around
region boundaries a seeded share of labels is moved to the class across the
boundary, so perfect classification is impossible.

The region thresholds are calibrated so the class mix is roughly
I 51%, A 18%, SW 15%, DB 11%, SS 2.5%, B 2.3%.
"""
from __future__ import annotations

import numpy as np

from .dataset import Dataset, FlowPattern, FlowSample
from .errors import DataError

MIN_SAMPLES = 60
DIAMETERS = (0.0254, 0.0508)
ANGLES = (-90, -80, -70, -60, -45, -30, -20, -10, 0, 10, 20, 30, 45, 60, 70, 80, 90)
LOG_VSL = (-1.7, 0.4)
LOG_VSG = (-0.8, 1.4)
# share of boundary-band labels moved to a neighbouring class
FLIP_FRACTION = 0.03
# half-width of the boundary band, in decades of velocity / degrees of angle;
# angle thresholds sit between grid angles, so the angle probe rarely fires
BAND_LOG = 0.05
BAND_ANGLE = 2.0

# test facility per diameter: water/air near room temperature
#   visc_l, visc_g, dens_l, dens_g, surface_tension
FLUIDS = {
    0.0254: (1.002e-3, 1.81e-5, 998.2, 1.204, 0.0728),
    0.0508: (0.890e-3, 1.85e-5, 997.0, 1.184, 0.0720),
}

PATTERNS = tuple(FlowPattern)
_CODE = {p: k for k, p in enumerate(PATTERNS)}

TARGET_MIX = {
    FlowPattern.I: 0.51, FlowPattern.A: 0.18, FlowPattern.SW: 0.15,
    FlowPattern.DB: 0.11, FlowPattern.SS: 0.025, FlowPattern.B: 0.023,
}


def region(log_vsl, log_vsg, angle):
    """Noise-free pattern for points on the map (vectorized).

    Returns an integer array indexing into :data:`PATTERNS`.
    """
    u = np.asarray(log_vsl, dtype=float)
    v = np.asarray(log_vsg, dtype=float)
    a = np.asarray(angle, dtype=float)
    u, v, a = np.broadcast_arrays(u, v, a)

    annular = v > 0.87 - 0.2 * u
    dispersed = u > 0.12 + 0.1 * v
    # stratified only for horizontal and downward pipes; it reaches larger
    # liquid rates the steeper the downward inclination
    strat_edge = -1.17 + 0.006 * np.clip(-a, 0, None)
    stratified = (a <= 5) & (u < strat_edge)
    smooth = stratified & (v < 0.3) & (a >= -15)
    bubble = (a >= 40) & (v < -0.4) & (u > -0.7)

    out = np.full(u.shape, _CODE[FlowPattern.I])
    out[bubble] = _CODE[FlowPattern.B]
    out[dispersed] = _CODE[FlowPattern.DB]
    out[stratified] = _CODE[FlowPattern.SW]
    out[smooth] = _CODE[FlowPattern.SS]
    out[annular] = _CODE[FlowPattern.A]
    return out


def _neighbour_classes(u, v, a):
    """Region label at small offsets around each point (k x n array)."""
    shifts = [(BAND_LOG, 0, 0), (-BAND_LOG, 0, 0), (0, BAND_LOG, 0), (0, -BAND_LOG, 0),
              (0, 0, BAND_ANGLE), (0, 0, -BAND_ANGLE)]
    return np.stack([region(u + du, v + dv, np.clip(a + da, -90, 90)) for du, dv, da in shifts])


def synth_arrays(seed: int, n: int, flip_fraction: float = FLIP_FRACTION):
    """Raw draws: (log_vsl, log_vsg, angle, diameter, clean labels, noisy labels)."""
    rng = np.random.default_rng(seed)
    u = rng.uniform(*LOG_VSL, size=n)
    v = rng.uniform(*LOG_VSG, size=n)
    a = rng.choice(np.array(ANGLES, dtype=float), size=n)
    d = rng.choice(np.array(DIAMETERS), size=n)
    clean = region(u, v, a)
    labels = clean.copy()

    neighbours = _neighbour_classes(u, v, a)
    differs = neighbours != clean[None, :]
    band = np.flatnonzero(differs.any(axis=0))
    n_flip = int(round(flip_fraction * len(band)))
    if n_flip:
        chosen = np.sort(rng.choice(band, size=n_flip, replace=False))
        for idx in chosen:
            options = np.flatnonzero(differs[:, idx])
            labels[idx] = neighbours[options[rng.integers(len(options))], idx]
    return u, v, a, d, clean, labels


def _ensure_min_per_class(u, v, a, d, clean, labels, rng, per_class=10):
    """Top up rare classes by redrawing points inside their regions."""
    for pattern in FlowPattern:
        missing = per_class - int(np.sum(labels == _CODE[pattern]))
        if missing <= 0:
            continue
        # rejection-sample inside the region, overwriting a sample of the
        # currently most common class
        found = 0
        for _ in range(1000):
            if found >= missing:
                break
            uu = rng.uniform(*LOG_VSL, size=4096)
            vv = rng.uniform(*LOG_VSG, size=4096)
            aa = rng.choice(np.array(ANGLES, dtype=float), size=4096)
            hit = np.flatnonzero(region(uu, vv, aa) == _CODE[pattern])
            for h in hit[: missing - found]:
                counts = np.bincount(labels, minlength=len(PATTERNS))
                counts[_CODE[pattern]] = -1
                donor = int(np.argmax(counts))
                k = int(np.flatnonzero(labels == donor)[0])
                u[k], v[k], a[k] = uu[h], vv[h], aa[h]
                clean[k] = labels[k] = _CODE[pattern]
                found += 1
        if found < missing:
            raise DataError(f"could not place {per_class} samples in region {pattern}")
    return u, v, a, d, clean, labels


def synth_generate(seed: int = 7, n: int = 5676, flip_fraction: float = FLIP_FRACTION) -> Dataset:
    """Generate ``n`` labelled samples; identical output for identical arguments."""
    if n < MIN_SAMPLES:
        raise DataError(f"n must be at least {MIN_SAMPLES}, got {n}")
    u, v, a, d, clean, labels = synth_arrays(seed, n, flip_fraction)
    rng = np.random.default_rng([seed, 1])
    u, v, a, d, clean, labels = _ensure_min_per_class(u, v, a, d, clean, labels, rng)
    samples = []
    for k in range(n):
        visc_l, visc_g, dens_l, dens_g, sigma = FLUIDS[float(d[k])]
        samples.append(FlowSample(
            vsl=float(10.0 ** u[k]), vsg=float(10.0 ** v[k]),
            visc_l=visc_l, visc_g=visc_g, dens_l=dens_l, dens_g=dens_g,
            surface_tension=sigma, angle=float(a[k]), diameter=float(d[k]),
            label=PATTERNS[labels[k]],
        ))
    return Dataset(tuple(samples), f"synth:seed={seed},n={n}")
