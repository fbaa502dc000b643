"""System parameters, the bare product basis and the Jaynes-Cummings dressed basis.

Units: hbar = 1, every energy shares the unit of ``omega_c`` (``omega_c = 1`` is the
usual normalization, but cm^-1 inputs work unchanged).

Truncated bare basis layout (fixed, interleaved per photon number)::

    index(g, n) = 2 n        index(e, n) = 2 n + 1

so a cutoff ``n_max`` gives dimension ``2 (n_max + 1)``.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, NamedTuple, Optional, Union

import numpy as np

from .errors import DegenerateCouplingError, InvalidParameterError, TruncationError


@dataclass(frozen=True)
class SystemParams:
    """Parameters of ``H = w_c a+a + w_0 sz/2 - lam (alpha sz + sx)(a+ + a)``.

    ``delta`` and ``f`` are derived, never stored, so they stay consistent with the
    primary fields after :meth:`replace`.
    """

    omega_c: float = 1.0
    omega_0: float = 1.0
    lam: float = 0.0
    alpha: float = 0.0

    def __post_init__(self):
        for name in ("omega_c", "omega_0", "lam", "alpha"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidParameterError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.omega_c <= 0:
            raise InvalidParameterError(f"omega_c must be > 0, got {self.omega_c}")
        if self.omega_0 <= 0:
            raise InvalidParameterError(f"omega_0 must be > 0, got {self.omega_0}")
        if self.lam < 0:
            raise InvalidParameterError(f"lam must be >= 0, got {self.lam}")

    @classmethod
    def from_f(cls, f: float, alpha: float = 0.0, delta: float = 0.0,
               omega_c: float = 1.0) -> "SystemParams":
        """Build from normalized coupling ``f = lam/omega_c`` and detuning ``delta``."""
        return cls(omega_c=omega_c, omega_0=omega_c + delta, lam=f * omega_c, alpha=alpha)

    @property
    def delta(self) -> float:
        return self.omega_0 - self.omega_c

    @property
    def f(self) -> float:
        return self.lam / self.omega_c

    def replace(self, **changes) -> "SystemParams":
        return dataclasses.replace(self, **changes)


class BareState(NamedTuple):
    electronic: str  # "g" or "e"
    photons: int

    @property
    def index(self) -> int:
        return 2 * self.photons + (1 if self.electronic == "e" else 0)

    @classmethod
    def from_index(cls, i: int) -> "BareState":
        return cls("e" if i % 2 else "g", i // 2)

    def __str__(self):
        return f"{self.electronic},{self.photons}"


def basis_dim(n_max: int) -> int:
    return 2 * (n_max + 1)


@dataclass(frozen=True)
class Ground:
    """The isolated ground state |g,0> of the Jaynes-Cummings part."""

    def __str__(self):
        return "g0"

    @property
    def photon_reach(self) -> int:
        return 0

    @property
    def order_key(self):
        return (-1, 0)


@dataclass(frozen=True)
class Dressed:
    """Dressed state |phi_n^branch> built from |e,n> and |g,n+1>."""

    n: int
    branch: str

    def __post_init__(self):
        branch = {"+": "+", "-": "-", "p": "+", "m": "-", 1: "+", -1: "-"}.get(self.branch)
        if branch is None:
            raise InvalidParameterError(f"branch must be '+' or '-', got {self.branch!r}")
        if int(self.n) != self.n or self.n < 0:
            raise InvalidParameterError(f"dressed index must be an integer >= 0, got {self.n!r}")
        object.__setattr__(self, "branch", branch)
        object.__setattr__(self, "n", int(self.n))

    def __str__(self):
        return f"{self.n}{self.branch}"

    @property
    def sign(self) -> int:
        return 1 if self.branch == "+" else -1

    @property
    def photon_reach(self) -> int:
        return self.n + 1

    @property
    def order_key(self):
        return (self.n, 0 if self.branch == "-" else 1)


LevelLabel = Union[Ground, Dressed]
GROUND = Ground()


def parse_level(text: str) -> LevelLabel:
    """Parse ``g0`` / ``g`` / ``ground`` or ``<n><+|->`` such as ``0-`` or ``2+``."""
    s = text.strip().lower().replace(" ", "")
    if s in ("g", "g0", "g,0", "ground"):
        return GROUND
    if len(s) >= 2 and s[-1] in "+-" and s[:-1].isdigit():
        return Dressed(int(s[:-1]), s[-1])
    raise InvalidParameterError(f"cannot parse level label {text!r}")


def lowest_labels(count: int = 7) -> list:
    """``[g0, 0-, 0+, 1-, 1+, ...]``: the resonant ordering of the unperturbed levels."""
    labels = [GROUND]
    n = 0
    while len(labels) < count:
        labels.append(Dressed(n, "-"))
        if len(labels) < count:
            labels.append(Dressed(n, "+"))
        n += 1
    return labels


@dataclass(frozen=True)
class DressedData:
    n: int
    theta: float
    rabi: float
    e_plus: float
    e_minus: float

    def energy(self, branch: str) -> float:
        return self.e_plus if branch == "+" else self.e_minus


def rabi_frequency(n: int, p: SystemParams) -> float:
    return math.sqrt(p.delta ** 2 + 4.0 * p.lam ** 2 * (n + 1))


def mixing_angle(n: int, p: SystemParams) -> float:
    """Mixing angle of manifold ``n``, on the branch (pi/2, pi).

    ``tan(theta) = 2 lam sqrt(n+1) / (delta - Omega)`` fixes theta only modulo pi;
    the atan2 branch makes ``sin(theta)|e,n> + cos(theta)|g,n+1>`` the upper
    eigenvector of the 2x2 block.
    """
    if n < 0:
        raise InvalidParameterError(f"n must be >= 0, got {n}")
    if p.lam == 0:
        raise DegenerateCouplingError(
            "mixing angle undefined at lam = 0; use bare states directly")
    return math.atan2(2.0 * p.lam * math.sqrt(n + 1), p.delta - rabi_frequency(n, p))


def dressed_data(n: int, p: SystemParams) -> DressedData:
    theta = mixing_angle(n, p)
    rabi = rabi_frequency(n, p)
    center = p.omega_c * (n + 0.5)
    return DressedData(n=n, theta=theta, rabi=rabi,
                       e_plus=center + 0.5 * rabi, e_minus=center - 0.5 * rabi)


def unperturbed_energy(label: LevelLabel, p: SystemParams) -> float:
    """Eigenvalue of the Jaynes-Cummings part; also defined at lam = 0 (Omega = |delta|)."""
    if isinstance(label, Ground):
        return -0.5 * p.omega_0
    return p.omega_c * (label.n + 0.5) + 0.5 * label.sign * rabi_frequency(label.n, p)


def _check_reach(label: LevelLabel, n_max: int):
    if label.photon_reach > n_max:
        raise TruncationError(
            f"level {label} needs photon number {label.photon_reach} > n_max={n_max}")


def dressed_vector(label: LevelLabel, p: SystemParams, n_max: int) -> np.ndarray:
    """Bare-basis amplitudes of an unperturbed level (unit norm)."""
    _check_reach(label, n_max)
    v = np.zeros(basis_dim(n_max))
    if isinstance(label, Ground):
        v[BareState("g", 0).index] = 1.0
        return v
    theta = mixing_angle(label.n, p)
    s, c = math.sin(theta), math.cos(theta)
    ie = BareState("e", label.n).index
    ig = BareState("g", label.n + 1).index
    if label.branch == "+":
        v[ie], v[ig] = s, c
    else:
        v[ie], v[ig] = c, -s
    return v


def bare_limit_vector(label: LevelLabel, p: SystemParams, n_max: int) -> np.ndarray:
    """Zero-coupling stand-in for :func:`dressed_vector`.

    At lam = 0 the upper level of manifold n is |e,n> for delta >= 0 and
    |g,n+1> otherwise.
    """
    _check_reach(label, n_max)
    v = np.zeros(basis_dim(n_max))
    if isinstance(label, Ground):
        v[0] = 1.0
        return v
    excited_on_top = p.delta >= 0
    upper = ("e", label.n) if excited_on_top else ("g", label.n + 1)
    lower = ("g", label.n + 1) if excited_on_top else ("e", label.n)
    v[BareState(*(upper if label.branch == "+" else lower)).index] = 1.0
    return v


class Channel(str, Enum):
    RWA = "RWA"
    PDM = "PDM"
    CRT = "CRT"
    MIXED = "PDMxCRT"


@dataclass(frozen=True)
class StateExpansion:
    """Perturbative state as dressed-basis coefficients, split by order and channel.

    ``terms[(r, channel)][level]`` is the order-``r`` amplitude on ``level``.
    Coefficients are kept unnormalized; :meth:`to_bare` normalizes on request.
    """

    label: LevelLabel
    order: int
    terms: Mapping = field(default_factory=dict)

    def coefficients(self, order: Optional[int] = None, channel=None) -> dict:
        """Sum of coefficients, optionally restricted to one order and/or channel."""
        out: dict = {}
        for (r, ch), coeffs in self.terms.items():
            if order is not None and r != order:
                continue
            if channel is not None and Channel(ch) is not Channel(channel):
                continue
            for lvl, amp in coeffs.items():
                out[lvl] = out.get(lvl, 0.0) + amp
        return out

    @property
    def photon_reach(self) -> int:
        return max((lvl.photon_reach for lvl in self.coefficients()), default=0)

    def to_bare(self, p: SystemParams, n_max: Optional[int] = None,
                normalize: bool = False) -> np.ndarray:
        if n_max is None:
            n_max = self.photon_reach
        v = np.zeros(basis_dim(n_max))
        for lvl, amp in self.coefficients().items():
            v += amp * dressed_vector(lvl, p, n_max)
        if normalize:
            v /= np.linalg.norm(v)
        return v
