"""Molecule catalog, dipole-moment algebra and unit conversions (Debye, cm^-1)."""
from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Union

from .errors import InvalidParameterError, InvalidRecordError
from .model import SystemParams

DEBYE = 3.33564e-30        # C m
WAVENUMBER = 1.986445e-23  # J per cm^-1
EPSILON_0 = 8.8541878128e-12  # F/m

CATALOG_ENV = "PDMCAVITY_CATALOG"
FIELDS = ("name", "transition", "mu_gg", "mu_ee", "mu_ge", "omega0_cm")


@dataclass(frozen=True)
class MoleculeRecord:
    """One electronic transition; dipoles in Debye, ``omega0`` in cm^-1."""

    name: str
    transition: str
    mu_gg: float
    mu_ee: float
    mu_ge: float
    omega0: float

    def __post_init__(self):
        if not self.mu_ge > 0:
            raise InvalidRecordError(f"{self.name}: mu_ge must be > 0, got {self.mu_ge}")
        if not self.omega0 > 0:
            raise InvalidRecordError(f"{self.name}: omega0 must be > 0, got {self.omega0}")

    @property
    def alpha(self) -> float:
        return derive_alpha(self)

    @property
    def key(self) -> str:
        return f"{self.name}:{self.transition}"


def derive_alpha(r: MoleculeRecord) -> float:
    """Normalized permanent-dipole difference ``(mu_ee - mu_gg) / (2 mu_ge)``."""
    if not r.mu_ge > 0:
        raise InvalidRecordError(f"mu_ge must be > 0, got {r.mu_ge}")
    return (r.mu_ee - r.mu_gg) / (2.0 * r.mu_ge)


def coupling_from_cavity(mu_ge: float, omega_c: float, volume: float) -> float:
    """Vacuum coupling ``mu_ge * sqrt(hbar omega_c / (2 eps0 V))`` in cm^-1.

    ``mu_ge`` in Debye, ``omega_c`` in cm^-1, ``volume`` in m^3. A zero transition
    dipole is allowed and gives zero coupling.
    """
    if mu_ge < 0:
        raise InvalidParameterError(f"mu_ge must be >= 0, got {mu_ge}")
    if omega_c <= 0 or volume <= 0:
        raise InvalidParameterError("omega_c and volume must be > 0")
    field_si = math.sqrt(omega_c * WAVENUMBER / (2.0 * EPSILON_0 * volume))
    return mu_ge * DEBYE * field_si / WAVENUMBER


def params_for(r: MoleculeRecord, f: float, delta: float = 0.0) -> SystemParams:
    """Model parameters in cm^-1: ``omega_c = omega0 - delta`` and ``lam = f omega_c``."""
    if f <= 0:
        raise InvalidParameterError(f"f must be > 0, got {f}")
    omega_c = r.omega0 - delta
    if omega_c <= 0:
        raise InvalidParameterError(f"detuning {delta} leaves omega_c = {omega_c} <= 0")
    return SystemParams(omega_c=omega_c, omega_0=r.omega0, lam=f * omega_c, alpha=derive_alpha(r))


def _parse(text: str, source: str) -> list:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    reader = csv.DictReader(lines)
    if reader.fieldnames is None or tuple(h.strip() for h in reader.fieldnames) != FIELDS:
        raise InvalidRecordError(f"{source}: header must be {','.join(FIELDS)}")
    records = []
    for i, row in enumerate(reader, start=1):
        try:
            records.append(MoleculeRecord(
                name=row["name"].strip(), transition=row["transition"].strip(),
                mu_gg=float(row["mu_gg"]), mu_ee=float(row["mu_ee"]),
                mu_ge=float(row["mu_ge"]), omega0=float(row["omega0_cm"])))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InvalidRecordError):
                raise
            raise InvalidRecordError(f"{source}: record {i}: {exc}") from exc
    return records


def read_catalog(path: Union[str, Path]) -> list:
    path = Path(path)
    return _parse(path.read_text(encoding="utf-8"), str(path))


def format_catalog(records: Iterable[MoleculeRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIELDS)
    for r in records:
        w.writerow([r.name, r.transition, repr(r.mu_gg), repr(r.mu_ee), repr(r.mu_ge),
                    repr(r.omega0)])
    return buf.getvalue()


def write_catalog(records: Iterable[MoleculeRecord], path: Union[str, Path]) -> None:
    Path(path).write_text(format_catalog(records), encoding="utf-8")


def default_catalog() -> list:
    """Catalog from ``$PDMCAVITY_CATALOG`` if set, else the bundled ``molecules.csv``."""
    env = os.environ.get(CATALOG_ENV)
    if env:
        return read_catalog(env)
    text = resources.files("pdmcavity").joinpath("data", "molecules.csv").read_text(encoding="utf-8")
    return _parse(text, "molecules.csv")


def find(records: Iterable[MoleculeRecord], name: str,
         transition: Optional[str] = None) -> MoleculeRecord:
    """Look up by ``name`` (plus ``transition``) or by a ``name:transition`` key."""
    if transition is None and ":" in name:
        name, transition = name.split(":", 1)
    hits = [r for r in records if r.name.lower() == name.lower()
            and (transition is None or r.transition.lower() == transition.lower())]
    if not hits:
        raise InvalidParameterError(f"no molecule {name!r} transition {transition!r} in catalog")
    if len(hits) > 1:
        raise InvalidParameterError(
            f"{name!r} is ambiguous; pick one of {[r.key for r in hits]}")
    return hits[0]
