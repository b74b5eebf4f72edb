"""Cascade filter-bank decomposition with the 12-tap Daubechies-6 pair.

Two boundary modes are provided. The default half-sample symmetric
extension is what feature extraction uses; it avoids edge artifacts but is
redundant. The periodic mode is a square orthonormal transform (exact
Parseval, exact inverse) and backs the reconstruction and energy checks.
"""

from __future__ import annotations

import numpy as np

from ctxclf.errors import SignalTooShort

# Orthonormal Daubechies-6 scaling (low-pass) filter, 12 taps.
# Satisfies sum(h) = sqrt(2), sum(h^2) = 1 and the even-shift
# orthogonality sum_n h[n] h[n+2k] = 0 for k != 0.
DB6_LOWPASS = np.array(
    [
        0.11154074335008017,
        0.4946238903983854,
        0.7511339080215775,
        0.3152503517092432,
        -0.22626469396516913,
        -0.12976686756709563,
        0.09750160558707936,
        0.02752286553001629,
        -0.031582039318031156,
        0.0005538422009938016,
        0.004777257511010651,
        -0.00107730108499558,
    ]
)

# Quadrature-mirror high-pass: g[n] = (-1)^n h[L-1-n].
DB6_HIGHPASS = (DB6_LOWPASS[::-1] * np.where(np.arange(12) % 2 == 0, 1.0, -1.0)).copy()

TAPS = len(DB6_LOWPASS)


def _analysis_symmetric(x: np.ndarray, filt: np.ndarray) -> np.ndarray:
    pad = TAPS - 1
    ext = np.pad(x, pad, mode="symmetric")
    full = np.correlate(ext, filt, mode="valid")  # length n + pad
    return full[::2]


def _analysis_periodic(x: np.ndarray, filt: np.ndarray) -> np.ndarray:
    n = len(x)
    if n % 2:
        raise SignalTooShort("periodic mode requires even length at every level")
    k = np.arange(n // 2)
    idx = (2 * k[:, None] + np.arange(TAPS)[None, :]) % n
    return x[idx] @ filt


def dwt_db6(samples, levels: int = 3, mode: str = "symmetric") -> list[np.ndarray]:
    """Decompose into subbands ordered [A_levels, D_levels, ..., D2, D1]."""
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("expected a 1-D sample vector")
    if levels < 1:
        raise ValueError("levels must be >= 1")
    if len(x) < 2**levels:
        raise SignalTooShort(f"need >= {2 ** levels} samples for {levels} levels, got {len(x)}")
    if mode not in ("symmetric", "periodic"):
        raise ValueError(f"unknown boundary mode {mode!r}")
    analyze = _analysis_symmetric if mode == "symmetric" else _analysis_periodic
    details = []
    approx = x
    for _ in range(levels):
        details.append(analyze(approx, DB6_HIGHPASS))
        approx = analyze(approx, DB6_LOWPASS)
    return [approx] + details[::-1]


def idwt_db6_periodic(subbands: list[np.ndarray]) -> np.ndarray:
    """Invert a periodic-mode decomposition (synthesis bank)."""
    approx = np.asarray(subbands[0], dtype=np.float64)
    for detail in subbands[1:]:
        d = np.asarray(detail, dtype=np.float64)
        if len(d) != len(approx):
            raise ValueError("subband lengths inconsistent with a periodic cascade")
        n = 2 * len(approx)
        k = np.arange(len(approx))
        x = np.zeros(n)
        for coeffs, filt in ((approx, DB6_LOWPASS), (d, DB6_HIGHPASS)):
            idx = (2 * k[:, None] + np.arange(TAPS)[None, :]) % n
            np.add.at(x, idx.ravel(), (coeffs[:, None] * filt[None, :]).ravel())
        approx = x
    return approx
