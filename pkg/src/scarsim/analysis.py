"""Post-processing: lifetime fits, decay-plane regression, and spectra.

The spectral pipeline computes the in-phase transform of the mean-subtracted
imbalance over the full window,

    S~(w) = (2/T) * integral_0^T [I(t) - Ibar] cos(w t) dt,

normalizes by the total integrated intensity, and finally rescales so the
identical pipeline applied to a reference cosine yields a peak of exactly 1.
By default the reference frequency is the dominant grid peak; drive-aware
callers pass ``calibration_omega`` (usually half the modulation frequency).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .errors import ConfigError, NumericalError
from .evolve import QuenchResult
from .hilbert import MicrostateOrdering

# The fixed modulation-frequency grid (units of Omega) over which subharmonic
# weights are summed into the rigidity; other grids are rejected.
RIGIDITY_GRID = tuple(0.75 + 0.1 * k for k in range(11))


@dataclass(frozen=True)
class DampedCosineFit:
    """Parameters of y0 + C cos(omega_tilde t) exp(-t / tau)."""

    y0: float
    c: float
    omega_tilde: float
    tau: float
    converged: bool
    param_errors: tuple[float, float, float, float] | None = None
    residual: float = math.nan


@dataclass(frozen=True)
class PlaneFit:
    """Affine decay-rate model 1/tau = alpha x + beta y + inv_tau0 (MHz)."""

    alpha: float
    beta: float
    inv_tau0: float
    alpha_err: float
    beta_err: float
    inv_tau0_err: float
    residual: float
    r_squared: float


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Normalized in-phase intensity on a uniform angular-frequency grid."""

    omegas: np.ndarray
    s2: np.ndarray
    window: float
    stilde: np.ndarray

    def peak_omega(self) -> float:
        return float(self.omegas[int(np.argmax(self.s2))])


def imbalance(result: QuenchResult) -> np.ndarray:
    """Sublattice population difference <n>_A - <n>_B per snapshot."""
    return result.n_a - result.n_b


def _check_uniform(times: np.ndarray) -> float:
    if len(times) < 2:
        raise ConfigError("need at least two samples")
    steps = np.diff(times)
    dt = float(steps[0])
    if dt <= 0 or not np.allclose(steps, dt, rtol=1e-9, atol=1e-12):
        raise ConfigError("samples must be uniformly spaced in time")
    return dt


def _model(t: np.ndarray, p: np.ndarray) -> np.ndarray:
    y0, c, w, tau = p
    return y0 + c * np.cos(w * t) * np.exp(-t / tau)


def _jacobian(t: np.ndarray, p: np.ndarray) -> np.ndarray:
    y0, c, w, tau = p
    damp = np.exp(-t / tau)
    cos_ = np.cos(w * t)
    sin_ = np.sin(w * t)
    j = np.empty((len(t), 4))
    j[:, 0] = 1.0
    j[:, 1] = cos_ * damp
    j[:, 2] = -c * t * sin_ * damp
    j[:, 3] = c * cos_ * damp * t / tau**2
    return j


def _initial_guess(times: np.ndarray, values: np.ndarray) -> np.ndarray:
    dt = times[1] - times[0]
    span = times[-1] - times[0]
    f = values - values.mean()
    spec = np.abs(np.fft.rfft(f))
    freqs = math.tau * np.fft.rfftfreq(len(f), d=dt)
    k = 1 + int(np.argmax(spec[1:]))
    if 1 < k < len(spec) - 1:  # parabolic peak refinement
        a, b, c = spec[k - 1], spec[k], spec[k + 1]
        denom = a - 2 * b + c
        shift = 0.5 * (a - c) / denom if denom != 0 else 0.0
        omega0 = freqs[k] + shift * (freqs[1] - freqs[0])
    else:
        omega0 = freqs[k]
    # envelope decay from block maxima of |f| over one-period windows
    period = math.tau / omega0 if omega0 > 0 else span
    block = max(1, int(round(period / dt)))
    n_blocks = max(2, len(f) // block)
    env_t, env_v = [], []
    for b0 in range(n_blocks):
        seg = slice(b0 * block, min((b0 + 1) * block, len(f)))
        if seg.start >= len(f):
            break
        peak = np.abs(f[seg]).max()
        if peak > 1e-3 * np.abs(f).max():
            env_t.append(times[seg].mean())
            env_v.append(peak)
    tau0 = span
    if len(env_v) >= 2:
        slope = np.polyfit(env_t, np.log(env_v), 1)[0]
        if slope < -1e-12:
            tau0 = min(-1.0 / slope, 100.0 * span)
    return np.array([values.mean(), f[0] if abs(f[0]) > 1e-12 else np.abs(f).max(),
                     omega0, max(tau0, dt)])


def fit_damped_cosine(values: np.ndarray, times: np.ndarray) -> DampedCosineFit:
    """Nonlinear least squares for y0 + C cos(w t) exp(-t/tau).

    The frequency is initialized from the discrete-spectrum peak and the
    decay time from a log-envelope regression; refinement then runs to a
    relative parameter tolerance of 1e-8.  Degenerate (constant) input
    returns converged=False.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    dt = _check_uniform(times)
    if len(times) < 20:
        raise ConfigError("need at least 20 samples for a damped-cosine fit")
    if np.ptp(values) < 1e-14 * max(1.0, np.abs(values).max()):
        return DampedCosineFit(y0=float(values.mean()), c=0.0, omega_tilde=0.0,
                               tau=math.inf, converged=False)
    t0 = times[0]
    tt = times - t0
    p0 = _initial_guess(tt, values)
    if tt[-1] < 2 * math.tau / max(p0[2], 1e-12):
        raise ConfigError("window must span at least two oscillation periods")

    res = least_squares(
        lambda p: _model(tt, p) - values, p0,
        jac=lambda p: _jacobian(tt, p),
        bounds=([-np.inf, -np.inf, 0.0, 1e-9], np.inf),
        xtol=1e-12, ftol=1e-12, gtol=None, max_nfev=2000,
    )
    y0, c, w, tau = res.x
    converged = bool(res.success and tau > 0 and np.isfinite(res.cost))
    errors = None
    try:
        jt = res.jac
        cov = np.linalg.inv(jt.T @ jt) * 2 * res.cost / max(len(tt) - 4, 1)
        errors = tuple(float(e) for e in np.sqrt(np.clip(np.diag(cov), 0, None)))
    except np.linalg.LinAlgError:
        converged = False
    return DampedCosineFit(y0=float(y0), c=float(c), omega_tilde=float(w),
                           tau=float(tau), converged=converged,
                           param_errors=errors, residual=float(res.cost))


def fit_decay_plane(points: np.ndarray | list[tuple[float, float, float]]) -> PlaneFit:
    """Ordinary least squares for 1/tau = alpha x + beta y + 1/tau0.

    points holds rows (x, y, inv_tau) in MHz; at least three non-collinear
    rows are required.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) < 3:
        raise ConfigError("need at least 3 rows of (x, y, inv_tau)")
    design = np.column_stack([pts[:, 0], pts[:, 1], np.ones(len(pts))])
    if np.linalg.matrix_rank(design) < 3:
        raise NumericalError("design matrix is rank deficient (collinear points)")
    coef, rss_arr, *_ = np.linalg.lstsq(design, pts[:, 2], rcond=None)
    fitted = design @ coef
    rss = float(((pts[:, 2] - fitted) ** 2).sum())
    tss = float(((pts[:, 2] - pts[:, 2].mean()) ** 2).sum())
    dof = max(len(pts) - 3, 1)
    cov = np.linalg.inv(design.T @ design) * rss / dof
    err = np.sqrt(np.clip(np.diag(cov), 0, None))
    return PlaneFit(alpha=float(coef[0]), beta=float(coef[1]),
                    inv_tau0=float(coef[2]), alpha_err=float(err[0]),
                    beta_err=float(err[1]), inv_tau0_err=float(err[2]),
                    residual=rss,
                    r_squared=1.0 - rss / tss if tss > 0 else 1.0)


def _inphase_transform(values: np.ndarray, times: np.ndarray,
                       omegas: np.ndarray) -> np.ndarray:
    f = values - values.mean()
    window = times[-1] - times[0]
    # chunk the frequency axis to bound the cos-table memory
    out = np.empty(len(omegas))
    chunk = 512
    for k0 in range(0, len(omegas), chunk):
        w = omegas[k0:k0 + chunk, None]
        table = np.cos(w * times[None, :])
        out[k0:k0 + chunk] = np.trapezoid(table * f[None, :], times, axis=1)
    return (2.0 / window) * out


def _normalized_intensity(values: np.ndarray, times: np.ndarray,
                          omegas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    window = times[-1] - times[0]
    stilde = _inphase_transform(values, times, omegas)
    total = np.trapezoid(stilde**2, omegas)
    if total <= 0:
        return np.zeros_like(stilde), stilde
    return stilde**2 / (2.0 * total * window / math.tau), stilde


def fourier_spectrum(values: np.ndarray, times: np.ndarray, *,
                     calibration_omega: float | None = None,
                     grid_points_per_bin: int = 8) -> Spectrum:
    """Normalized in-phase power spectrum of a uniformly sampled series.

    The grid spans 0 to the sampling Nyquist frequency with spacing
    2 pi / (grid_points_per_bin * T).  ``calibration_omega`` selects the
    reference-cosine frequency; by default the dominant peak is used, so a
    pure cosine at any grid frequency comes out with peak exactly 1.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    dt = _check_uniform(times)
    window = times[-1] - times[0]
    if window <= 0:
        raise ConfigError("window must have positive duration")
    tt = times - times[0]
    domega = math.tau / (grid_points_per_bin * window)
    nyquist = math.pi / dt
    omegas = np.arange(0.0, nyquist + 0.5 * domega, domega)

    if np.ptp(values) < 1e-12 * max(1.0, float(np.abs(values).max())):
        zero = np.zeros_like(omegas)
        return Spectrum(omegas=omegas, s2=zero, window=window, stilde=zero)
    s2, stilde = _normalized_intensity(values, tt, omegas)
    if s2.max() <= 0:
        return Spectrum(omegas=omegas, s2=s2, window=window, stilde=stilde)

    omega_ref = calibration_omega
    if omega_ref is None:
        omega_ref = float(omegas[int(np.argmax(s2))])
    if omega_ref <= 0:
        return Spectrum(omegas=omegas, s2=s2, window=window, stilde=stilde)
    ref_values = np.cos(omega_ref * tt)
    ref_s2, _ = _normalized_intensity(ref_values, tt, omegas)
    ref_peak = float(np.interp(omega_ref, omegas, ref_s2))
    if ref_peak <= 0:
        raise NumericalError("spectral calibration failed: zero reference peak")
    return Spectrum(omegas=omegas, s2=s2 / ref_peak, window=window, stilde=stilde)


def weight_at(spectrum: Spectrum, omega: float) -> float:
    """Linearly interpolated intensity at an arbitrary frequency."""
    if not (spectrum.omegas[0] <= omega <= spectrum.omegas[-1]):
        raise ConfigError(f"frequency {omega} outside the spectral grid")
    return float(np.interp(omega, spectrum.omegas, spectrum.s2))


def subharmonic_weight(spectrum: Spectrum, omegam: float, order: int = 2) -> float:
    """Intensity at omegam/order (order 2 for the main subharmonic, 4 for the 4th)."""
    if order not in (2, 4):
        raise ConfigError("order must be 2 or 4")
    return weight_at(spectrum, omegam / order)


def subharmonic_rigidity(omegam_over_omega: np.ndarray | list[float],
                         weights: np.ndarray | list[float]) -> float:
    """Sum of the subharmonic weights over the fixed 11-point drive grid."""
    grid = np.asarray(omegam_over_omega, dtype=float)
    w = np.asarray(weights, dtype=float)
    expected = np.asarray(RIGIDITY_GRID)
    if grid.shape != expected.shape or not np.allclose(grid, expected, atol=1e-9):
        raise ConfigError(
            "rigidity is defined on the 11-point modulation grid 0.75..1.75"
        )
    if w.shape != grid.shape:
        raise ConfigError("weights and grid lengths differ")
    return float(w.sum())


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def spectrum_to_csv(spectrum: Spectrum) -> str:
    lines = ["omega,s2"]
    for w, v in zip(spectrum.omegas, spectrum.s2):
        lines.append(f"{_g17(w)},{_g17(v)}")
    return "\r\n".join(lines) + "\r\n"


def fit_to_json(fit: DampedCosineFit) -> str:
    import json

    doc = {
        "y0": fit.y0, "c": fit.c, "omega_tilde": fit.omega_tilde,
        "tau": fit.tau, "converged": fit.converged, "residual": fit.residual,
    }
    if fit.param_errors is not None:
        doc["param_errors"] = list(fit.param_errors)
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def plane_to_json(fit: PlaneFit) -> str:
    import json

    doc = {
        "alpha": fit.alpha, "beta": fit.beta, "inv_tau0": fit.inv_tau0,
        "alpha_err": fit.alpha_err, "beta_err": fit.beta_err,
        "inv_tau0_err": fit.inv_tau0_err, "residual": fit.residual,
        "r_squared": fit.r_squared,
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def microstate_matrix_to_csv(times: np.ndarray, matrix: np.ndarray) -> str:
    """Wide CSV keyed by 1-based presentation-order class index."""
    header = ["t"] + [f"c{k + 1}" for k in range(matrix.shape[1])]
    lines = [",".join(header)]
    for t, row in zip(times, matrix):
        lines.append(",".join([_g17(t)] + [_g17(v) for v in row]))
    return "\r\n".join(lines) + "\r\n"


def microstate_matrix(result: QuenchResult, ordering: MicrostateOrdering) -> np.ndarray:
    """Snapshot-by-class probability matrix in presentation order."""
    if result.probs is None:
        raise ConfigError("quench was run without microstate probabilities")
    dim = result.probs.shape[1]
    covered = sum(len(c) for c in ordering.classes)
    if covered != dim:
        raise ConfigError("ordering does not partition this basis")
    out = np.empty((result.probs.shape[0], ordering.n_classes))
    for k, members in enumerate(ordering.classes):
        out[:, k] = result.probs[:, list(members)].sum(axis=1)
    sums = out.sum(axis=1)
    if not np.allclose(sums, 1.0, atol=1e-9):
        raise NumericalError("class probabilities do not sum to 1")
    return out
