"""Cayley-Klein parameters for the independent Morris-Shore two-state channels.

Each channel obeys ``i dC/dt = [[0, lam f(t)], [lam f(t), Delta]] C``.
Its propagator is ``[[a, b], [-b* e^{-i delta}, a* e^{-i delta}]]`` with
``delta`` the detuning phase accumulated over the integration window.

Times are measured in units of the pulse scale ``T``, couplings and
detunings in units of ``1/T``.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import (
    DomainError,
    FarOffValidityWarning,
    NoSolutionError,
    UnsupportedModeError,
    ValidationError,
)
from .linalg_core import log_gamma, wrap_phase

__all__ = [
    "PulseSpec",
    "DetuningSpec",
    "CayleyKlein",
    "Realization",
    "pulse_area",
    "resonant_ck",
    "resonant_ck_from_area",
    "rosen_zener_ck",
    "rz_phase",
    "far_off_phase",
    "far_off_validity",
    "design_realization",
]

SHAPES = ("sech", "gaussian", "constant")
FAR_OFF_RATIO = 5.0


@dataclass(frozen=True)
class PulseSpec:
    """Shared pulse envelope ``f(t)`` with time scale ``T``.

    ``window`` is the integration interval in units of T. ``sech`` is
    ``sech(t/T)``, ``gaussian`` is ``exp(-t^2/T^2)``, ``constant`` is 1
    inside the window.
    """

    shape: str = "sech"
    T: float = 1.0
    window: tuple = (-40.0, 40.0)

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValidationError(f"unknown pulse shape {self.shape!r}; expected one of {SHAPES}")
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ValidationError(f"pulse scale T must be positive, got {self.T}")
        ti, tf = (float(x) for x in self.window)
        if not (math.isfinite(ti) and math.isfinite(tf) and ti < tf):
            raise ValidationError(f"window must satisfy t_i < t_f, got {self.window}")
        object.__setattr__(self, "window", (ti, tf))

    @property
    def t_start(self):
        return self.window[0] * self.T

    @property
    def t_end(self):
        return self.window[1] * self.T

    @property
    def duration(self):
        return self.t_end - self.t_start

    def envelope(self, t):
        """f(t) for scalar or array t in absolute time units."""
        x = np.asarray(t, dtype=float) / self.T
        if self.shape == "sech":
            out = 1.0 / np.cosh(x)
        elif self.shape == "gaussian":
            out = np.exp(-x * x)
        else:
            out = np.ones_like(x)
        return float(out) if out.ndim == 0 else out

    def envelope_integral(self):
        """Integral of f over the window, by adaptive quadrature."""
        if self.shape == "constant":
            return self.duration
        val, _ = integrate.quad(
            self.envelope, self.t_start, self.t_end, points=[0.0] if self.t_start < 0 < self.t_end else None,
            epsabs=1e-13, epsrel=1e-13, limit=200,
        )
        return val

    def square_integral(self):
        """Integral of f^2 over the whole pulse.

        The infinite-time values 2T (sech) and sqrt(pi/2) T (gaussian) are
        used; a constant pulse contributes its window length.
        """
        if self.shape == "sech":
            return 2.0 * self.T
        if self.shape == "gaussian":
            return math.sqrt(math.pi / 2.0) * self.T
        return self.duration


@dataclass(frozen=True)
class DetuningSpec:
    """Common detuning ``Delta`` (1/T); only constant detunings are supported."""

    value: float = 0.0
    kind: str = "constant"

    def __post_init__(self):
        if self.kind != "constant":
            raise ValidationError(f"unsupported detuning kind {self.kind!r}")
        if not math.isfinite(self.value):
            raise ValidationError("detuning must be finite")

    def __call__(self, t):
        return self.value

    def phase(self, pulse):
        """Accumulated detuning phase over the pulse window."""
        return self.value * pulse.duration


@dataclass(frozen=True)
class CayleyKlein:
    """Two-state propagator parameters; ``|a|^2 + |b|^2 = 1``."""

    a: complex
    b: complex
    delta: float = 0.0

    def __post_init__(self):
        a, b = complex(self.a), complex(self.b)
        if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > 1e-10:
            raise ValidationError(f"|a|^2 + |b|^2 = {abs(a) ** 2 + abs(b) ** 2} != 1")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "delta", float(self.delta))

    @property
    def phase(self):
        """arg a; the reflection phase when b vanishes."""
        return math.atan2(self.a.imag, self.a.real)

    def matrix(self):
        e = np.exp(-1j * self.delta)
        return np.array([[self.a, self.b], [-self.b.conjugate() * e, self.a.conjugate() * e]])


def pulse_area(pulse, lam):
    """Pulse area ``A = 2 lam * integral of f`` over the window."""
    if lam < 0:
        raise ValidationError("coupling must be nonnegative")
    if lam == 0:
        return 0.0
    return 2.0 * lam * pulse.envelope_integral()


def resonant_ck_from_area(area):
    return CayleyKlein(math.cos(area / 2.0), -1j * math.sin(area / 2.0), 0.0)


def resonant_ck(pulse, lam):
    """Exact resonant propagator: ``a = cos(A/2)``, ``b = -i sin(A/2)``."""
    return resonant_ck_from_area(pulse_area(pulse, lam))


def rosen_zener_ck(lambdaT, DeltaT, window=None):
    """Cayley-Klein parameters of the sech pulse with constant detuning.

    ``a = Gamma(1/2 + i D/2)^2 / (Gamma(1/2 + L + i D/2) Gamma(1/2 - L + i D/2))``
    with ``L = lambda T`` and ``D = Delta T``. The off-diagonal element is
    ``b = -i sin(pi L) sech(pi D / 2) exp(i D t_i / T)``; its phase follows
    from the time-reversal symmetry of the pulse about t = 0, and with no
    window (``t_i = 0``) it reduces to the resonant ``-i sin(A/2)``.

    Args:
        lambdaT: channel coupling in units of 1/T.
        DeltaT: detuning in units of 1/T.
        window: optional ``(t_i, t_f)`` in units of T. Sets ``delta`` and the
            phase of b for that Schrodinger-picture interval; the pulse must
            be negligible outside it.
    """
    if lambdaT < 0:
        raise ValidationError("lambda T must be nonnegative")
    L, D = float(lambdaT), float(DeltaT)
    if L == 0.0:
        a = 1.0 + 0j
    elif D == 0.0:
        a = complex(math.cos(math.pi * L))
    else:
        half = 0.5j * D
        a = np.exp(2.0 * log_gamma(0.5 + half) - log_gamma(0.5 + L + half) - log_gamma(0.5 - L + half))
        a = complex(a)
    b_mag = math.sin(math.pi * L) / math.cosh(0.5 * math.pi * D)
    if window is None:
        ti, delta = 0.0, 0.0
    else:
        ti, tf = window
        delta = D * (tf - ti)
    b = -1j * b_mag * complex(math.cos(D * ti), math.sin(D * ti))
    return CayleyKlein(a, b, delta)


def rz_phase(l, DeltaT):
    """Reflection phase of a sech pulse with ``lambda T = l``.

    ``phi = 2 arg prod_{k<l} (Delta T + i(2k+1))``, reduced to (-pi, pi].
    """
    if l < 0 or int(l) != l:
        raise ValidationError("l must be a nonnegative integer")
    total = sum(math.atan2(2 * k + 1, DeltaT) for k in range(int(l)))
    return wrap_phase(2.0 * total)


def _rz_phase_unwrapped(l, DeltaT):
    return 2.0 * sum(math.atan2(2 * k + 1, DeltaT) for k in range(l))


def far_off_validity(lambdas, Delta):
    """True when ``|Delta| >= 5 max(lambda)``, the adiabatic-elimination regime."""
    lam_max = max((abs(x) for x in np.atleast_1d(lambdas)), default=0.0)
    return abs(Delta) >= FAR_OFF_RATIO * lam_max


def far_off_phase(pulse, lam, Delta):
    """Adiabatic-elimination phase ``phi = (lam^2 / Delta) * integral f^2``.

    Emits :class:`FarOffValidityWarning` when ``|Delta| < 5 lam``.

    Raises:
        DomainError: ``Delta == 0``.
    """
    if Delta == 0:
        raise DomainError("far-off-resonant phase needs nonzero detuning")
    if not far_off_validity([lam], Delta):
        warnings.warn(
            f"|Delta|={abs(Delta)} < {FAR_OFF_RATIO} * lambda={lam}; adiabatic elimination is unreliable",
            FarOffValidityWarning,
            stacklevel=2,
        )
    return lam * lam / Delta * pulse.square_integral()


@dataclass(frozen=True)
class Realization:
    """Pulse parameters that realize a set of reflection phases.

    Attributes:
        mode: ``"rosen_zener"`` or ``"far_off"``.
        targets: requested phases.
        lambdas: MS couplings (1/T), one per target.
        Delta: common detuning (1/T).
        l: integer ``lambda T`` for the Rosen-Zener mode, else None.
    """

    mode: str
    targets: tuple
    lambdas: np.ndarray
    Delta: float
    pulse: PulseSpec = field(default_factory=PulseSpec)
    l: int = None

    @property
    def lambda_squared(self):
        return np.asarray(self.lambdas) ** 2

    def predicted_phases(self):
        """Phases the design produces according to its own analytic model."""
        if self.mode == "rosen_zener":
            return np.array([rz_phase(self.l, self.Delta * self.pulse.T) for _ in self.targets])
        if self.Delta == 0:
            return np.zeros(len(self.targets))
        return np.array([lam * lam / self.Delta * self.pulse.square_integral() for lam in self.lambdas])


def _solve_rz_detuning(l, target, tol=1e-13):
    # phi(D) decreases monotonically from l*pi at D = 0 towards 0 as D -> inf
    lo, hi = 0.0, 1.0
    while _rz_phase_unwrapped(l, hi) > target:
        hi *= 2.0
        if hi > 1e300:
            raise NoSolutionError(f"no detuning reaches phase {target}")
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if _rz_phase_unwrapped(l, mid) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def design_realization(targets, mode, pulse=None, *, l=1, Delta=None, lambda_max=None):
    """Choose couplings and detuning that produce the requested reflection phases.

    Args:
        targets: phases phi_n, one per Morris-Shore channel.
        mode: ``"rosen_zener"`` (sech pulse, every ``lambda_n T = l``, one
            common phase set by the detuning) or ``"far_off"`` (phases set by
            the couplings at a fixed large detuning).
        pulse: envelope; defaults to a sech pulse.
        l: integer coupling for the Rosen-Zener mode.
        Delta: detuning for the far-off mode.
        lambda_max: alternative far-off budget; the detuning is chosen so
            the largest target uses this coupling.

    Raises:
        UnsupportedModeError: unequal Rosen-Zener targets or wrong pulse shape.
        NoSolutionError: target outside the reachable range.
    """
    pulse = pulse or PulseSpec("sech")
    targets = tuple(float(t) for t in targets)
    if not targets:
        raise ValidationError("at least one target phase is required")
    if all(wrap_phase(t) == 0.0 for t in targets):
        return Realization(mode, targets, np.zeros(len(targets)), 0.0 if Delta is None else float(Delta), pulse, 0)

    if mode == "rosen_zener":
        if pulse.shape != "sech":
            raise UnsupportedModeError("the Rosen-Zener realization requires a sech pulse")
        if max(targets) - min(targets) > 1e-12:
            raise UnsupportedModeError("a sech pulse gives every channel the same phase; targets differ")
        l = int(l)
        if l < 1:
            raise ValidationError("l must be a positive integer")
        phi = targets[0]
        if not 0.0 < phi <= l * math.pi:
            raise NoSolutionError(f"phase {phi} is outside (0, {l}*pi] for l={l}")
        DeltaT = 0.0 if phi == l * math.pi else _solve_rz_detuning(l, phi)
        return Realization(
            mode, targets, np.full(len(targets), l / pulse.T), DeltaT / pulse.T, pulse, l
        )

    if mode == "far_off":
        norm = pulse.square_integral()
        if Delta is None:
            if lambda_max is None:
                raise ValidationError("far-off design needs Delta or lambda_max")
            big = max(targets, key=abs)
            Delta = lambda_max**2 * norm / big
        Delta = float(Delta)
        if Delta == 0:
            raise DomainError("far-off design needs nonzero detuning")
        lam2 = np.array([t * Delta / norm for t in targets])
        if np.any(lam2 < 0):
            raise NoSolutionError("far-off phases must share the sign of the detuning")
        lambdas = np.sqrt(lam2)
        if not far_off_validity(lambdas, Delta):
            warnings.warn(
                "designed couplings violate |Delta| >= 5 lambda; adiabatic elimination is unreliable",
                FarOffValidityWarning,
                stacklevel=2,
            )
        return Realization(mode, targets, lambdas, Delta, pulse, None)

    raise UnsupportedModeError(f"unknown realization mode {mode!r}")
