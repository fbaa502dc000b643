"""Reported quantities: bare-state populations, Bloch-Siegert shifts, parameter sweeps."""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Optional, Sequence

import numpy as np

from .errors import InvalidParameterError, PdmCavityError
from .exact import SpectrumResult, converged_spectrum, match_levels
from .model import (
    GROUND,
    BareState,
    Dressed,
    Ground,
    LevelLabel,
    SystemParams,
    bare_limit_vector,
    lowest_labels,
    unperturbed_energy,
)
from .perturbation import (
    energy,
    generic_rs,
    psi1_excited,
    psi_ground,
    required_cut,
    validity_metrics,
)

VALIDITY_WARN = 0.1


@dataclass(frozen=True)
class PopulationTable:
    level: LevelLabel
    entries: dict  # BareState -> probability
    order: int
    normalized: bool = True
    method: str = "DSP"

    def __getitem__(self, state) -> float:
        if isinstance(state, str):
            e, n = state.split(",")
            state = BareState(e.strip(), int(n))
        return self.entries.get(BareState(*state), 0.0)


def corrected_state(level: LevelLabel, p: SystemParams, order: int = 2):
    """Perturbative expansion of ``level``: closed forms where they exist, else the generic engine."""
    if isinstance(level, Ground):
        return psi_ground(p, order)
    if order == 1:
        return psi1_excited(level.n, level.branch, p)
    return generic_rs(level, p, order=order).expansion


def _table(level, amplitudes, order, method) -> PopulationTable:
    probs = np.abs(amplitudes) ** 2
    probs /= probs.sum()
    entries = {BareState.from_index(i): float(x) for i, x in enumerate(probs)}
    return PopulationTable(level, entries, order, True, method)


def populations(level: LevelLabel, p: SystemParams, order: int = 2) -> PopulationTable:
    """Bare-basis populations of the perturbatively corrected ``level``.

    Warns (does not refuse) when the largest coupling-to-gap ratio exceeds 0.1.
    """
    if p.lam == 0:
        return _table(level, bare_limit_vector(level, p, level.photon_reach), order, "DSP")
    report = validity_metrics(p, max(required_cut(level, order), 1))
    if report.max_ratio > VALIDITY_WARN:
        warnings.warn(
            f"coupling/gap ratio {report.max_ratio:.3f} between {report.worst_pair} "
            f"exceeds {VALIDITY_WARN}; perturbative populations may be inaccurate",
            RuntimeWarning, stacklevel=2)
    state = corrected_state(level, p, order)
    return _table(level, state.to_bare(p), order, "DSP")


def exact_populations(level: LevelLabel, p: SystemParams,
                      spectrum: Optional[SpectrumResult] = None) -> PopulationTable:
    """Populations of the exact eigenvector matched to ``level``."""
    if spectrum is None or level not in spectrum.matched_labels:
        spectrum = _matched_spectrum(p, [level])
    return _table(level, spectrum.vector(level), -1, "Exact")


@dataclass(frozen=True)
class BsShift:
    upper: LevelLabel
    lower: LevelLabel
    total: float
    pdm_part: Optional[float]
    crt_part: Optional[float]
    method: str


def bs_shift_dsp(k: int, branch: str, p: SystemParams) -> BsShift:
    """Second-order shift of the ``(k, branch) -> g0`` transition from ``eps_k + omega_0/2``."""
    upper = Dressed(k, branch)
    e_up = energy(upper, p)
    e_g = energy(GROUND, p)
    pdm = e_up.e2_pdm - e_g.e2_pdm
    crt = e_up.e2_crt - e_g.e2_crt
    return BsShift(upper, GROUND, pdm + crt, pdm, crt, "DSP")


def _matched_spectrum(p: SystemParams, labels: Sequence[LevelLabel], **kw) -> SpectrumResult:
    need = list(labels)
    if GROUND not in need:
        need.append(GROUND)
    n_levels = max(len(need), 7) + 2
    return match_levels(converged_spectrum(p, n_levels=n_levels, **kw), p, need)


def bs_shift_exact(k: int, branch: str, p: SystemParams,
                   spectrum: Optional[SpectrumResult] = None) -> BsShift:
    """Transition shift from exact diagonalization; no PDM/CRT attribution."""
    upper = Dressed(k, branch)
    if spectrum is None or upper not in spectrum.matched_labels \
            or GROUND not in spectrum.matched_labels:
        spectrum = _matched_spectrum(p, lowest_labels(2 * k + 3))
    transition = spectrum.energy(upper) - spectrum.energy(GROUND)
    unperturbed = unperturbed_energy(upper, p) + 0.5 * p.omega_0
    return BsShift(upper, GROUND, transition - unperturbed, None, None, "Exact")


# --------------------------------------------------------------------------
# sweeps
# --------------------------------------------------------------------------

class SweepRow(NamedTuple):
    f: float
    alpha: float
    delta: float
    level: str
    quantity: str
    engine: str
    value: float
    error: str = ""


QUANTITIES = ("energy", "e2_pdm", "e2_crt", "bs_shift", "bs_shift_pdm", "bs_shift_crt",
              "population")
ENGINES = ("dsp", "exact")
_DSP_ONLY = {"e2_pdm", "e2_crt", "bs_shift_pdm", "bs_shift_crt"}
POPULATION_PHOTONS = 3


def _point_rows(f, alpha, delta, make_params, levels, quantities, engines, order,
                spectrum_options):
    coords = (float(f), float(alpha), float(delta))
    plan = []
    for level in levels:
        for q in quantities:
            if q.startswith("bs_shift") and isinstance(level, Ground):
                continue
            for eng in engines:
                if eng == "exact" and q in _DSP_ONLY:
                    continue
                plan.append((level, q, eng))
    try:
        p = make_params(f, alpha, delta)
    except PdmCavityError as exc:
        return [SweepRow(*coords, str(lvl), q, eng, math.nan, exc.code) for lvl, q, eng in plan]

    cache = {}

    def exact_spec():
        if "spec" not in cache:
            cache["spec"] = _matched_spectrum(p, levels, **spectrum_options)
        return cache["spec"]

    rows = []
    for level, q, eng in plan:
        try:
            rows.extend(_evaluate(p, coords, level, q, eng, order, exact_spec))
        except PdmCavityError as exc:
            rows.append(SweepRow(*coords, str(level), q, eng, math.nan, exc.code))
    return rows


def _evaluate(p, coords, level, q, eng, order, exact_spec):
    lbl = str(level)
    if q == "population":
        if eng == "dsp":
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                table = populations(level, p, order)
        else:
            table = exact_populations(level, p, exact_spec())
        return [SweepRow(*coords, lbl, f"P({e},{n})", eng, table[(e, n)])
                for n in range(POPULATION_PHOTONS + 1) for e in ("g", "e")]
    if q == "energy":
        value = energy(level, p).total if eng == "dsp" else exact_spec().energy(level)
    elif q in ("e2_pdm", "e2_crt"):
        br = energy(level, p)
        value = br.e2_pdm if q == "e2_pdm" else br.e2_crt
    elif q == "bs_shift":
        if eng == "dsp":
            value = bs_shift_dsp(level.n, level.branch, p).total
        else:
            value = bs_shift_exact(level.n, level.branch, p, exact_spec()).total
    elif q in ("bs_shift_pdm", "bs_shift_crt"):
        shift = bs_shift_dsp(level.n, level.branch, p)
        value = shift.pdm_part if q == "bs_shift_pdm" else shift.crt_part
    else:
        raise InvalidParameterError(f"unknown quantity {q!r}")
    return [SweepRow(*coords, lbl, q, eng, float(value))]


def sweep(f: Iterable[float], alpha: Iterable[float], delta: Iterable[float],
          quantities: Sequence[str] = ("energy",), levels: Optional[Sequence] = None,
          engines: Sequence[str] = ENGINES, omega_c: float = 1.0, order: int = 2,
          make_params: Optional[Callable] = None,
          spectrum_options: Optional[dict] = None) -> list:
    """Evaluate ``quantities`` on the Cartesian grid ``f x alpha x delta``.

    By default ``delta`` is in units of ``omega_c``; pass ``make_params(f, alpha,
    delta) -> SystemParams`` to interpret the coordinates differently. Rows come out
    in lexicographic grid order, then level, quantity and engine. Failures at a grid
    point become rows with ``value=nan`` and the error code; the sweep never aborts.
    ``spectrum_options`` is forwarded to :func:`~pdmcavity.exact.converged_spectrum`.
    """
    for q in quantities:
        if q not in QUANTITIES:
            raise InvalidParameterError(f"unknown quantity {q!r}; choose from {QUANTITIES}")
    for e in engines:
        if e not in ENGINES:
            raise InvalidParameterError(f"unknown engine {e!r}")
    if make_params is None:
        def make_params(fv, av, dv):
            return SystemParams.from_f(fv, alpha=av, delta=dv * omega_c, omega_c=omega_c)
    levels = lowest_labels(7) if levels is None else list(levels)
    rows = []
    for fv, av, dv in itertools.product(list(f), list(alpha), list(delta)):
        rows.extend(_point_rows(fv, av, dv, make_params, levels, quantities, engines, order,
                                spectrum_options or {}))
    return rows


class Table1Row(NamedTuple):
    molecule: str
    transition: str
    mu_gg: float
    mu_ee: float
    mu_ge: float
    alpha: float
    omega0_cm: float
    f: float
    pdm_shift_cm: float
    crt_shift_cm: float
    total_shift_cm: float
    error: str = ""


def table1(records=None, f: float = 0.05) -> list:
    """Bloch-Siegert shift of the ``0- -> g0`` transition for catalog molecules, in cm^-1.

    Evaluated at resonance in units of ``omega_0`` and scaled by ``omega_0`` [cm^-1].
    """
    from .molecules import default_catalog

    if records is None:
        records = default_catalog()
    rows = []
    for r in records:
        base = (r.name, r.transition, r.mu_gg, r.mu_ee, r.mu_ge, r.alpha, r.omega0, f)
        try:
            shift = bs_shift_dsp(0, "-", SystemParams.from_f(f, alpha=r.alpha))
        except PdmCavityError as exc:
            rows.append(Table1Row(*base, math.nan, math.nan, math.nan, exc.code))
            continue
        rows.append(Table1Row(*base, shift.pdm_part * r.omega0, shift.crt_part * r.omega0,
                              shift.total * r.omega0))
    return rows
