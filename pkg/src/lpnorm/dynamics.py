"""Equations of motion with P-R drag, trajectory integration and spectra.

The inner loop lives in :mod:`lpnorm._kernels`; this module wraps it with
typed inputs, error handling and a periodogram used to read libration
frequencies off a trajectory.
"""

import math
from dataclasses import dataclass

import numpy as np

from lpnorm import _kernels
from lpnorm._backend import HAVE_NUMBA
from lpnorm.errors import IntegrationError, ParameterError, SingularConfigurationError
from lpnorm.params import derive


@dataclass(frozen=True)
class State:
    """Position and velocity in the rotating frame."""

    x: float
    y: float
    vx: float
    vy: float

    def __post_init__(self):
        for name in ("x", "y", "vx", "vy"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ParameterError(f"state component {name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)

    def as_array(self):
        return np.array([self.x, self.y, self.vx, self.vy])

    @classmethod
    def from_array(cls, arr):
        return cls(*(float(v) for v in arr))


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled trajectory.

    Attributes
    ----------
    t : ndarray, shape (m,)
        Sample times, strictly monotone with constant step.
    states : ndarray, shape (m, 4)
        Columns ``x, y, vx, vy``.
    params : DerivedParams
    """

    t: np.ndarray
    states: np.ndarray
    params: object

    @property
    def x(self):
        return self.states[:, 0]

    @property
    def y(self):
        return self.states[:, 1]

    @property
    def dt(self):
        return float(self.t[1] - self.t[0]) if self.t.size > 1 else 0.0

    def __len__(self):
        return self.t.size


def accel(s, p):
    """Acceleration ``(ax, ay)`` at state ``s``.

    Raises
    ------
    SingularConfigurationError
        When either primary distance falls below ``1e-9``.
    """
    d = derive(p)
    ax, ay, rmin = _kernels.accel_py(s.x, s.y, s.vx, s.vy, d.mu, d.q1, d.A2, d.W1, d.n)
    if rmin < _kernels.R_SINGULAR:
        raise SingularConfigurationError(f"state within {_kernels.R_SINGULAR} of a primary")
    return ax, ay


def potential(x, y, p):
    """Effective potential ``U1`` (rotation plus gravity plus oblateness)."""
    d = derive(p)
    r1 = math.hypot(x + d.mu, y)
    r2 = math.hypot(x + d.mu - 1.0, y)
    if min(r1, r2) < _kernels.R_SINGULAR:
        raise SingularConfigurationError(f"point ({x!r}, {y!r}) coincides with a primary")
    return (
        d.n * d.n * (x * x + y * y) / 2.0
        + (1.0 - d.mu) * d.q1 / r1
        + d.mu / r2
        + d.mu * d.A2 / (2.0 * r2 ** 3)
    )


def jacobi_like(s, p):
    """Conservative energy ``v^2/2 - U1``; constant along orbits when ``W1 = 0``."""
    return 0.5 * (s.vx * s.vx + s.vy * s.vy) - potential(s.x, s.y, p)


_STATUS_MESSAGES = {
    _kernels.STATUS_MAX_STEPS: "step budget exhausted",
    _kernels.STATUS_STEP_UNDERFLOW: "step size underflow",
    _kernels.STATUS_SINGULAR: "trajectory reached a primary",
}


def integrate(s0, p, t_end, dt_out, tol=1e-12, max_steps=50_000_000, backend=None):
    """Integrate from ``s0`` at ``t = 0`` and sample every ``dt_out``.

    Parameters
    ----------
    s0 : State
    p : PerturbationParams or DerivedParams
    t_end : float
        Final time; negative values integrate backwards.  The last sample
        is the last multiple of ``dt_out`` not beyond ``t_end``.
    dt_out : float
        Positive sampling step.
    tol : float
        Absolute and relative local error tolerance of the 5(4) pair.
    backend : {None, "numba", "python"}
        Kernel override; ``None`` follows the ``LPNORM_DISABLE_NUMBA`` flag.

    Raises
    ------
    IntegrationError
        On collision, step underflow or step budget exhaustion; ``partial``
        holds the samples produced so far.
    """
    t_end = float(t_end)
    if t_end == 0.0 or not math.isfinite(t_end):
        raise ParameterError(f"t_end must be finite and non-zero, got {t_end!r}")
    if not dt_out > 0.0 or not tol > 0.0:
        raise ParameterError("dt_out and tol must be positive")
    d = derive(p)
    count = int(math.floor(abs(t_end) / dt_out + 1e-9))
    if count < 1:
        raise ParameterError("t_end is shorter than one output step")
    t = math.copysign(dt_out, t_end) * np.arange(count + 1)
    kernel = _select_kernel(backend)
    h0 = min(dt_out, 1e-2)
    out, filled, status, _, _ = kernel(
        s0.as_array(), t, d.mu, d.q1, d.A2, d.W1, d.n, tol, tol, h0, 1e-14 * max(1.0, abs(t_end)), max_steps
    )
    if status != _kernels.STATUS_OK:
        partial = Trajectory(t[:filled].copy(), out[:filled].copy(), d)
        raise IntegrationError(
            f"{_STATUS_MESSAGES.get(status, 'integration failed')} near t={t[filled - 1]!r}",
            partial=partial,
        )
    return Trajectory(t, out, d)


def _select_kernel(backend):
    if backend is None:
        return _kernels.dopri5
    if backend == "python":
        return _kernels.dopri5_py
    if backend == "numba":
        if not HAVE_NUMBA:
            raise ParameterError("numba backend requested but numba is unavailable or disabled")
        return _kernels.dopri5
    raise ParameterError(f"unknown backend {backend!r}")


def dominant_frequencies(traj, k=2, component="x", pad_factor=8, min_samples=64):
    """Strongest ``k`` spectral lines of one trajectory coordinate.

    The mean is removed, a Hann window applied and the series zero-padded to
    ``pad_factor`` times the next power of two.  Each local maximum of the
    magnitude spectrum is refined by a parabola through the log magnitudes
    of the three bins around it.

    Returns
    -------
    list of (float, float)
        ``(frequency, amplitude)`` pairs, frequency in radians per time unit,
        sorted by decreasing amplitude.

    Raises
    ------
    ParameterError
        Fewer than ``min_samples`` samples or non-uniform sampling.
    """
    values = {"x": traj.states[:, 0], "y": traj.states[:, 1]}.get(component)
    if values is None:
        raise ParameterError(f"component must be 'x' or 'y', got {component!r}")
    m = values.size
    if m < min_samples:
        raise ParameterError(f"need at least {min_samples} samples, got {m}")
    steps = np.diff(traj.t)
    dt = abs(float(steps[0]))
    if not np.allclose(np.abs(steps), dt, rtol=1e-9, atol=0.0):
        raise ParameterError("spectral analysis needs uniform sampling")

    window = np.hanning(m)
    signal = (values - values.mean()) * window
    nfft = pad_factor * (1 << (m - 1).bit_length())
    mag = np.abs(np.fft.rfft(signal, nfft))
    # amplitude of a unit cosine after windowing is sum(window)/2
    scale = 2.0 / window.sum()

    inner = mag[1:-1]
    is_peak = (inner > mag[:-2]) & (inner >= mag[2:])
    peaks = np.nonzero(is_peak)[0] + 1
    peaks = peaks[np.argsort(-mag[peaks], kind="stable")][:k]

    out = []
    tiny = np.finfo(float).tiny
    for i in peaks:
        la, lb, lc = np.log(np.maximum(mag[i - 1 : i + 2], tiny))
        curvature = la - 2.0 * lb + lc
        shift = 0.5 * (la - lc) / curvature if curvature < 0.0 else 0.0
        peak_log = lb - 0.25 * (la - lc) * shift
        freq = 2.0 * math.pi * (i + shift) / (nfft * dt)
        out.append((float(freq), float(np.exp(peak_log) * scale)))
    return out
