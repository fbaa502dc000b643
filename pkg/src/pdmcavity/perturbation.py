"""Dressed-state perturbation theory beyond the rotating-wave approximation.

The perturbation on top of the Jaynes-Cummings part is

    V = -lam [alpha sz (a+ + a) + s+ a+ + s- a]
        `------ PDM ------'   `-- CRT --'

Two independent routes are provided:

* closed forms for second-order energies, ground-state wavefunction to second order
  and excited-state wavefunctions to first order (:func:`e2_ground`,
  :func:`e2_excited`, :func:`psi_ground`, :func:`psi1_excited`);
* :func:`generic_rs`, plain Rayleigh-Schroedinger summation over numerically
  evaluated matrix elements :func:`vmat`, which serves as the oracle for the above.

Orders are reported with the bookkeeping parameter set to one.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import InvalidParameterError, NearDegeneracyError, TruncationError
from .model import (
    GROUND,
    Channel,
    Dressed,
    Ground,
    LevelLabel,
    StateExpansion,
    SystemParams,
    basis_dim,
    dressed_data,
    dressed_vector,
    mixing_angle,
    unperturbed_energy,
)

#: Energy denominators below this fraction of ``omega_c`` are refused.
DEGENERACY_TOL = 1e-9

_CHANNEL_NAMES = ("pdm", "crt")


# --------------------------------------------------------------------------
# matrix elements
# --------------------------------------------------------------------------

def apply_v(vec: np.ndarray, p: SystemParams, channels: Iterable[str] = _CHANNEL_NAMES) -> np.ndarray:
    """Act with V on bare-basis amplitudes (columns allowed).

    The result lives on a basis one photon larger than the input, so no
    component is lost to truncation.
    """
    vec = np.asarray(vec, dtype=float)
    dim_in = vec.shape[0]
    n_in = dim_in // 2 - 1
    out = np.zeros((basis_dim(n_in + 1),) + vec.shape[1:])
    channels = set(channels)
    for n in range(n_in + 1):
        g, e = vec[2 * n], vec[2 * n + 1]
        if "pdm" in channels and p.alpha != 0.0:
            # sz (a+ + a): |s,n> -> z_s (sqrt(n+1)|s,n+1> + sqrt(n)|s,n-1>)
            up, down = math.sqrt(n + 1), math.sqrt(n)
            amp = -p.lam * p.alpha
            out[2 * (n + 1)] += amp * (-up) * g
            out[2 * (n + 1) + 1] += amp * up * e
            if n > 0:
                out[2 * (n - 1)] += amp * (-down) * g
                out[2 * (n - 1) + 1] += amp * down * e
        if "crt" in channels:
            # s+ a+ |g,n> = sqrt(n+1)|e,n+1>,  s- a |e,n> = sqrt(n)|g,n-1>
            out[2 * (n + 1) + 1] += -p.lam * math.sqrt(n + 1) * g
            if n > 0:
                out[2 * (n - 1)] += -p.lam * math.sqrt(n) * e
    return out


def _channels_arg(channel) -> tuple:
    if channel is None or channel == "all":
        return _CHANNEL_NAMES
    if isinstance(channel, str):
        channel = (channel,)
    names = tuple(c.value.lower() if isinstance(c, Channel) else str(c).lower()
                  for c in channel)
    for name in names:
        if name not in _CHANNEL_NAMES:
            raise InvalidParameterError(f"unknown perturbation channel {name!r}")
    return names


def vmat(bra: LevelLabel, ket: LevelLabel, p: SystemParams, channel=None) -> float:
    """``<bra|V|ket>`` between unperturbed levels, by explicit operator action.

    ``channel`` restricts V to ``"pdm"`` or ``"crt"``; default is the full V.
    """
    n_max = max(bra.photon_reach, ket.photon_reach)
    v_ket = apply_v(dressed_vector(ket, p, n_max), p, _channels_arg(channel))
    v_bra = dressed_vector(bra, p, n_max + 1)
    return float(v_bra @ v_ket)


def dressed_basis(n_cut: int) -> list:
    """``[g0, 0-, 0+, 1-, 1+, ..., n_cut-, n_cut+]``."""
    labels = [GROUND]
    for m in range(n_cut + 1):
        labels += [Dressed(m, "-"), Dressed(m, "+")]
    return labels


def coupling_matrices(p: SystemParams, n_cut: int):
    """Unperturbed energies and the PDM/CRT parts of V in the truncated dressed basis.

    Matrix elements between retained levels are exact: truncation only drops
    levels, never components of the retained ones. Blocks are built in chunks of
    eight manifolds, cached per parameter set, and sliced; returned arrays are
    read-only.
    """
    if n_cut < 0:
        raise InvalidParameterError(f"n_cut must be >= 0, got {n_cut}")
    labels, energies, v_pdm, v_crt = _coupling_block(p, 8 * (n_cut // 8 + 1) - 1)
    m = 1 + 2 * (n_cut + 1)
    return labels[:m], energies[:m], v_pdm[:m, :m], v_crt[:m, :m]


@functools.lru_cache(maxsize=256)
def _coupling_block(p: SystemParams, n_cut: int):
    labels = dressed_basis(n_cut)
    n_max = n_cut + 1
    U = np.column_stack([dressed_vector(lvl, p, n_max) for lvl in labels])
    U_big = np.vstack([U, np.zeros((2, U.shape[1]))])
    v_pdm = U_big.T @ apply_v(U, p, ("pdm",))
    v_crt = U_big.T @ apply_v(U, p, ("crt",))
    energies = np.array([unperturbed_energy(lvl, p) for lvl in labels])
    for arr in (v_pdm, v_crt, energies):
        arr.flags.writeable = False
    return tuple(labels), energies, v_pdm, v_crt


def _check_gap(gap: float, p: SystemParams, pair) -> float:
    if abs(gap) < DEGENERACY_TOL * p.omega_c:
        raise NearDegeneracyError(
            f"energy denominator {gap:.3e} between {pair[0]} and {pair[1]} "
            f"is below {DEGENERACY_TOL:g}*omega_c; perturbation theory is invalid here",
            pair=tuple(str(x) for x in pair), gap=gap)
    return gap


# --------------------------------------------------------------------------
# generic Rayleigh-Schroedinger engine (oracle)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RSResult:
    label: LevelLabel
    energies: tuple  # (E0, E1, E2)
    e2_pdm: float
    e2_crt: float
    e2_mixed: float
    expansion: StateExpansion
    n_cut: int

    @property
    def total(self) -> float:
        return float(sum(self.energies))


def required_cut(label: LevelLabel, order: int) -> int:
    """Highest dressed index reached by an order-``order`` correction of ``label``.

    V moves the dressed index by at most 2, and the ground state connects to
    manifold 1 at most.
    """
    if order == 0:
        return label.n if isinstance(label, Dressed) else 0
    if isinstance(label, Ground):
        return 2 * order - 1
    return label.n + 2 * order


def generic_rs(label: LevelLabel, p: SystemParams, order: int = 2,
               n_cut: Optional[int] = None, channels=None,
               normalization: str = "unit") -> RSResult:
    """Non-degenerate Rayleigh-Schroedinger perturbation theory to ``order`` <= 2.

    Parameters
    ----------
    label : unperturbed level to correct.
    order : 0, 1 or 2.
    n_cut : highest dressed index kept; defaults to the exact reach of ``order``.
    channels : restrict V to ``("pdm",)`` or ``("crt",)``.
    normalization : ``"unit"`` puts ``-1/2 sum |c1|^2`` on the reference level at
        second order (state normalized to second order); ``"intermediate"`` keeps
        that coefficient at zero.
    """
    if order not in (0, 1, 2):
        raise InvalidParameterError(f"order must be 0, 1 or 2, got {order}")
    if normalization not in ("unit", "intermediate"):
        raise InvalidParameterError(f"unknown normalization {normalization!r}")
    need = required_cut(label, order)
    if n_cut is None:
        n_cut = need
    if n_cut < need:
        raise TruncationError(f"n_cut={n_cut} below the reach {need} of order {order} for {label}")
    chans = _channels_arg(channels)

    labels, energies, v_pdm, v_crt = coupling_matrices(p, n_cut)
    if "pdm" not in chans:
        v_pdm = np.zeros_like(v_pdm)
    if "crt" not in chans:
        v_crt = np.zeros_like(v_crt)
    k = labels.index(label)
    e_k = energies[k]
    terms = {(0, Channel.RWA): {label: 1.0}}
    e1 = float(v_pdm[k, k] + v_crt[k, k])
    if order == 0:
        return RSResult(label, (e_k, 0.0, 0.0), 0.0, 0.0, 0.0,
                        StateExpansion(label, 0, terms), n_cut)

    gaps = e_k - energies
    coupled = (v_pdm[:, k] != 0) | (v_crt[:, k] != 0)
    coupled[k] = False
    for m in np.flatnonzero(coupled):
        _check_gap(gaps[m], p, (label, labels[m]))
    inv = np.zeros_like(gaps)
    mask = np.arange(len(labels)) != k
    safe = mask & (np.abs(gaps) >= DEGENERACY_TOL * p.omega_c)
    inv[safe] = 1.0 / gaps[safe]

    c1_pdm = v_pdm[:, k] * inv
    c1_crt = v_crt[:, k] * inv
    terms[(1, Channel.PDM)] = _sparse(labels, c1_pdm)
    terms[(1, Channel.CRT)] = _sparse(labels, c1_crt)

    e2_pdm = float(v_pdm[:, k] @ c1_pdm)
    e2_crt = float(v_crt[:, k] @ c1_crt)
    e2_mixed = float(v_pdm[:, k] @ c1_crt + v_crt[:, k] @ c1_pdm)
    e2 = e2_pdm + e2_crt + e2_mixed if order == 2 else 0.0

    if order == 2:
        def second(va, c1b):
            num = va @ c1b - va[k, k] * c1b
            num[k] = 0.0
            for m in np.flatnonzero((num != 0) & ~safe & mask):
                _check_gap(gaps[m], p, (label, labels[m]))
            return num * inv

        c2_pdm = second(v_pdm, c1_pdm)
        c2_crt = second(v_crt, c1_crt)
        c2_mix = second(v_pdm, c1_crt) + second(v_crt, c1_pdm)
        if normalization == "unit":
            c2_pdm[k] = -0.5 * c1_pdm @ c1_pdm
            c2_crt[k] = -0.5 * c1_crt @ c1_crt
            c2_mix[k] = -(c1_pdm @ c1_crt)
        terms[(2, Channel.PDM)] = _sparse(labels, c2_pdm)
        terms[(2, Channel.CRT)] = _sparse(labels, c2_crt)
        terms[(2, Channel.MIXED)] = _sparse(labels, c2_mix)
        pdm_out, crt_out, mix_out = e2_pdm, e2_crt, e2_mixed
    else:
        pdm_out = crt_out = mix_out = 0.0

    return RSResult(label, (float(e_k), e1, float(e2)), pdm_out, crt_out, mix_out,
                    StateExpansion(label, order, terms), n_cut)


def _sparse(labels, values) -> dict:
    return {lvl: float(v) for lvl, v in zip(labels, values) if v != 0.0}


# --------------------------------------------------------------------------
# closed forms
# --------------------------------------------------------------------------

class _Dressed:
    """sin/cos/energies of the dressed manifolds, evaluated lazily and cached."""

    def __init__(self, p: SystemParams):
        self.p = p
        self._cache = {}

    def __getitem__(self, n):
        if n not in self._cache:
            self._cache[n] = dressed_data(n, self.p)
        return self._cache[n]

    def s(self, n):
        return math.sin(self[n].theta)

    def c(self, n):
        return math.cos(self[n].theta)

    def e(self, n, branch):
        return self[n].energy(branch)


def _gap(value, p, pair):
    return _check_gap(value, p, pair)


def e2_ground(p: SystemParams) -> tuple:
    """Second-order ground-state shift as ``(pdm, crt)``."""
    mixing_angle(0, p)  # raises at lam == 0
    d = _Dressed(p)
    lam, alpha, h = p.lam, p.alpha, 0.5 * p.omega_0
    s0, c0, s1, c1 = d.s(0), d.c(0), d.s(1), d.c(1)
    D0p = _gap(h + d.e(0, "+"), p, (GROUND, Dressed(0, "+")))
    D0m = _gap(h + d.e(0, "-"), p, (GROUND, Dressed(0, "-")))
    D1p = _gap(h + d.e(1, "+"), p, (GROUND, Dressed(1, "+")))
    D1m = _gap(h + d.e(1, "-"), p, (GROUND, Dressed(1, "-")))
    pdm = -lam ** 2 * alpha ** 2 * (c0 ** 2 / D0p + s0 ** 2 / D0m)
    crt = -lam ** 2 * (s1 ** 2 / D1p + c1 ** 2 / D1m)
    return pdm, crt


def e2_excited(k: int, branch: str, p: SystemParams) -> tuple:
    """Second-order shift of the dressed level ``(k, branch)`` as ``(pdm, crt)``.

    Terms referring to manifolds k-1 or k-2 that do not exist are dropped; their
    role is taken by the coupling to |g,0> (k = 0 for PDM, k = 1 for CRT).
    """
    label = Dressed(k, branch)
    k, branch = label.n, label.branch
    mixing_angle(k, p)
    d = _Dressed(p)
    lam, alpha, h = p.lam, p.alpha, 0.5 * p.omega_0
    sk, ck = d.s(k), d.c(k)
    ek = d.e(k, branch)
    r = math.sqrt

    def den(m, b):
        return _gap(ek - d.e(m, b), p, (label, Dressed(m, b)))

    def den_g():
        return _gap(ek + h, p, (label, GROUND))

    s1, c1 = d.s(k + 1), d.c(k + 1)
    s2, c2 = d.s(k + 2), d.c(k + 2)
    if branch == "+":
        pdm = ((r(k + 1) * sk * s1 - r(k + 2) * ck * c1) ** 2 / den(k + 1, "+")
               + (r(k + 1) * sk * c1 + r(k + 2) * ck * s1) ** 2 / den(k + 1, "-"))
        if k >= 1:
            sm, cm = d.s(k - 1), d.c(k - 1)
            pdm += ((r(k) * sk * sm - r(k + 1) * ck * cm) ** 2 / den(k - 1, "+")
                    + (r(k) * sk * cm + r(k + 1) * ck * sm) ** 2 / den(k - 1, "-"))
        else:
            pdm += (r(k + 1) * ck) ** 2 / den_g()
        crt = (k + 2) * ck ** 2 * (s2 ** 2 / den(k + 2, "+") + c2 ** 2 / den(k + 2, "-"))
        if k >= 2:
            sm, cm = d.s(k - 2), d.c(k - 2)
            crt += k * sk ** 2 * (cm ** 2 / den(k - 2, "+") + sm ** 2 / den(k - 2, "-"))
        elif k == 1:
            crt += (r(k) * sk) ** 2 / den_g()
    else:
        pdm = ((r(k + 1) * ck * s1 + r(k + 2) * sk * c1) ** 2 / den(k + 1, "+")
               + (r(k + 1) * ck * c1 - r(k + 2) * sk * s1) ** 2 / den(k + 1, "-"))
        if k >= 1:
            sm, cm = d.s(k - 1), d.c(k - 1)
            pdm += ((r(k) * sm * ck + r(k + 1) * cm * sk) ** 2 / den(k - 1, "+")
                    + (r(k) * cm * ck - r(k + 1) * sm * sk) ** 2 / den(k - 1, "-"))
        else:
            pdm += (r(k + 1) * sk) ** 2 / den_g()
        crt = (k + 2) * sk ** 2 * (s2 ** 2 / den(k + 2, "+") + c2 ** 2 / den(k + 2, "-"))
        if k >= 2:
            sm, cm = d.s(k - 2), d.c(k - 2)
            crt += k * ck ** 2 * (cm ** 2 / den(k - 2, "+") + sm ** 2 / den(k - 2, "-"))
        elif k == 1:
            crt += (r(k) * ck) ** 2 / den_g()
    return lam ** 2 * alpha ** 2 * pdm, lam ** 2 * crt


@dataclass(frozen=True)
class EnergyBreakdown:
    label: LevelLabel
    e0: float
    e1: float
    e2_pdm: float
    e2_crt: float

    @property
    def e2(self) -> float:
        return self.e2_pdm + self.e2_crt

    @property
    def total(self) -> float:
        return self.e0 + self.e1 + self.e2_pdm + self.e2_crt


def energy(label: LevelLabel, p: SystemParams) -> EnergyBreakdown:
    """Closed-form energy of ``label`` through second order."""
    if isinstance(label, Ground):
        pdm, crt = e2_ground(p)
    else:
        pdm, crt = e2_excited(label.n, label.branch, p)
    return EnergyBreakdown(label, unperturbed_energy(label, p), 0.0, pdm, crt)


def psi_ground(p: SystemParams, order: int = 2) -> StateExpansion:
    """Closed-form ground-state correction through ``order`` (unnormalized).

    The second-order |g,0> coefficient carries the ``-1/2 sum |c1|^2`` term that
    keeps the state normalized to second order.
    """
    if order not in (0, 1, 2):
        raise InvalidParameterError(f"order must be 0, 1 or 2, got {order}")
    terms = {(0, Channel.RWA): {GROUND: 1.0}}
    if order == 0:
        return StateExpansion(GROUND, 0, terms)
    mixing_angle(0, p)
    d = _Dressed(p)
    lam, a, h = p.lam, p.alpha, 0.5 * p.omega_0
    s = {n: d.s(n) for n in range(4)}
    c = {n: d.c(n) for n in range(4)}
    D = {(n, b): _gap(h + d.e(n, b), p, (GROUND, Dressed(n, b)))
         for n in range(4) for b in "+-"}
    r2, r3 = math.sqrt(2.0), math.sqrt(3.0)

    terms[(1, Channel.PDM)] = {
        Dressed(0, "+"): -lam * a * c[0] / D[0, "+"],
        Dressed(0, "-"): lam * a * s[0] / D[0, "-"],
    }
    terms[(1, Channel.CRT)] = {
        Dressed(1, "+"): lam * s[1] / D[1, "+"],
        Dressed(1, "-"): lam * c[1] / D[1, "-"],
    }
    if order == 1:
        return StateExpansion(GROUND, 1, terms)

    pre = -lam ** 2 * a ** 2
    terms[(2, Channel.PDM)] = {
        Dressed(1, "+"): pre / D[1, "+"] * (
            c[0] * (s[0] * s[1] - r2 * c[0] * c[1]) / D[0, "+"]
            - s[0] * (c[0] * s[1] + r2 * s[0] * c[1]) / D[0, "-"]),
        Dressed(1, "-"): pre / D[1, "-"] * (
            c[0] * (s[0] * c[1] + r2 * c[0] * s[1]) / D[0, "+"]
            - s[0] * (c[0] * c[1] - r2 * s[0] * s[1]) / D[0, "-"]),
        GROUND: pre * 0.5 * ((c[0] / D[0, "+"]) ** 2 + (s[0] / D[0, "-"]) ** 2),
    }

    pre = -lam ** 2
    split = 1.0 / D[1, "+"] - 1.0 / D[1, "-"]
    terms[(2, Channel.CRT)] = {
        Dressed(3, "+"): pre * (-r3 * s[1] * c[1]) * s[3] / D[3, "+"] * split,
        Dressed(3, "-"): pre * (-r3 * s[1] * c[1]) * c[3] / D[3, "-"] * split,
        GROUND: pre * 0.5 * ((s[1] / D[1, "+"]) ** 2 + (c[1] / D[1, "-"]) ** 2),
    }

    pre = -lam ** 2 * a
    pdm0 = c[0] ** 2 / D[0, "+"] + s[0] ** 2 / D[0, "-"]
    terms[(2, Channel.MIXED)] = {
        Dressed(0, "+"): pre * (-1.0 / D[0, "+"]) * (
            s[1] / D[1, "+"] * (s[1] * s[0] - r2 * c[1] * c[0])
            + c[1] / D[1, "-"] * (c[1] * s[0] + r2 * s[1] * c[0])),
        Dressed(0, "-"): pre * (-1.0 / D[0, "-"]) * (
            s[1] / D[1, "+"] * (s[1] * c[0] + r2 * c[1] * s[0])
            + c[1] / D[1, "-"] * (c[1] * c[0] - r2 * s[1] * s[0])),
        Dressed(2, "+"): pre / D[2, "+"] * (
            r2 * s[2] * pdm0
            - (s[1] * (r2 * s[1] * s[2] - r3 * c[1] * c[2]) / D[1, "+"]
               + c[1] * (r2 * c[1] * s[2] + r3 * s[1] * c[2]) / D[1, "-"])),
        Dressed(2, "-"): pre / D[2, "-"] * (
            r2 * c[2] * pdm0
            - (s[1] * (r2 * s[1] * c[2] + r3 * c[1] * s[2]) / D[1, "+"]
               + c[1] * (r2 * c[1] * c[2] - r3 * s[1] * s[2]) / D[1, "-"])),
    }
    return StateExpansion(GROUND, 2, terms)


def psi1_excited(k: int, branch: str, p: SystemParams) -> StateExpansion:
    """Closed-form first-order correction of the dressed level ``(k, branch)``.

    Photon-number overlaps are Kronecker deltas, so every sum over the dressed
    index collapses onto m in {k-2, ..., k+2}; only those are visited.
    """
    label = Dressed(k, branch)
    k = label.n
    mixing_angle(k, p)
    d = _Dressed(p)
    lam, a, h = p.lam, p.alpha, 0.5 * p.omega_0
    sk, ck = d.s(k), d.c(k)
    ek = d.e(k, label.branch)
    r = math.sqrt

    def delta(i, j):
        return 1.0 if i == j else 0.0

    pdm, crt = {}, {}

    def add(store, target, bracket, gap_value, prefactor):
        if bracket == 0.0:
            return
        gap = _gap(gap_value, p, (label, target))
        store[target] = store.get(target, 0.0) + prefactor * bracket / gap

    for m in range(max(0, k - 2), k + 3):
        sm, cm = d.s(m), d.c(m)
        # photon-number selection factors shared by the PDM brackets
        same_e = r(k + 1) * delta(m, k + 1) + r(k) * delta(m, k - 1)
        same_g = r(k + 2) * delta(m + 1, k + 2) + r(k + 1) * delta(m + 1, k)
        up = r(k + 2) * delta(m, k + 2)
        down = r(k) * delta(m + 1, k - 1)
        if label.branch == "+":
            if m != k:
                add(pdm, Dressed(m, "+"), sm * sk * same_e - cm * ck * same_g,
                    ek - d.e(m, "+"), -lam * a)
                add(crt, Dressed(m, "+"), sm * ck * up + cm * sk * down,
                    ek - d.e(m, "+"), -lam)
            add(pdm, Dressed(m, "-"), cm * sk * same_e + sm * ck * same_g,
                ek - d.e(m, "-"), -lam * a)
            add(crt, Dressed(m, "-"), cm * ck * up - sm * sk * down,
                ek - d.e(m, "-"), -lam)
        else:
            add(pdm, Dressed(m, "+"), sm * ck * same_e + cm * sk * same_g,
                ek - d.e(m, "+"), -lam * a)
            add(crt, Dressed(m, "+"), -sm * sk * up + cm * ck * down,
                ek - d.e(m, "+"), -lam)
            if m != k:
                add(pdm, Dressed(m, "-"), cm * ck * same_e - sm * sk * same_g,
                    ek - d.e(m, "-"), -lam * a)
                add(crt, Dressed(m, "-"), cm * sk * up + sm * ck * down,
                    ek - d.e(m, "-"), lam)

    if label.branch == "+":
        add(pdm, GROUND, -r(k + 1) * ck * delta(0, k), ek + h, -lam * a)
        add(crt, GROUND, r(k) * sk * delta(0, k - 1), ek + h, -lam)
    else:
        add(pdm, GROUND, r(k + 1) * sk * delta(0, k), ek + h, -lam * a)
        add(crt, GROUND, r(k) * ck * delta(0, k - 1), ek + h, -lam)

    terms = {(0, Channel.RWA): {label: 1.0},
             (1, Channel.PDM): pdm,
             (1, Channel.CRT): crt}
    return StateExpansion(label, 1, terms)


# --------------------------------------------------------------------------
# validity
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ValidityReport:
    max_ratio: float
    worst_pair: tuple
    f: float
    alpha: float
    alpha_bound: float
    coupling_ok: bool
    alpha_ok: bool
    k_max: int


def alpha_bound(f: float) -> float:
    """Resonant-case heuristic upper bound on |alpha|: ``2/((2+sqrt 3) f) - 2``."""
    return 2.0 / ((2.0 + math.sqrt(3.0)) * f) - 2.0


def validity_metrics(p: SystemParams, k_max: int = 5) -> ValidityReport:
    """Largest ``|V_mn / (E_m - E_n)|`` over coupled pairs of levels up to ``k_max``.

    The two heuristic flags are plain strict inequalities ``f < 0.4`` and
    ``|alpha| < alpha_bound(f)``; how much smaller counts as "much smaller" is left
    to the caller, who gets the raw numbers.
    """
    mixing_angle(0, p)
    labels, energies, v_pdm, v_crt = coupling_matrices(p, k_max)
    v = v_pdm + v_crt
    worst, pair = 0.0, ()
    for i in range(len(labels)):
        for j in range(i + 1, len(labels)):
            if v[i, j] == 0.0:
                continue
            gap = energies[i] - energies[j]
            ratio = math.inf if gap == 0 else abs(v[i, j] / gap)
            if ratio > worst:
                worst, pair = ratio, (str(labels[i]), str(labels[j]))
    bound = alpha_bound(p.f)
    return ValidityReport(max_ratio=float(worst), worst_pair=pair, f=p.f, alpha=p.alpha,
                          alpha_bound=bound, coupling_ok=p.f < 0.4,
                          alpha_ok=abs(p.alpha) < bound, k_max=k_max)
