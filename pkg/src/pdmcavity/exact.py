"""Full Hamiltonian on a truncated Fock space and its dense diagonalization."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import AmbiguousMatchError, ConvergenceError, InvalidParameterError
from .model import (
    BareState,
    LevelLabel,
    SystemParams,
    bare_limit_vector,
    basis_dim,
    dressed_vector,
    unperturbed_energy,
)

MAX_DIM = 4096
ALL_TERMS = frozenset({"rwa", "pdm", "crt"})


@dataclass(frozen=True)
class TruncatedHamiltonian:
    params: SystemParams
    n_max: int
    matrix: np.ndarray
    terms: frozenset = ALL_TERMS

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def build(p: SystemParams, n_max: int, terms: Iterable[str] = ALL_TERMS) -> TruncatedHamiltonian:
    """Dense matrix of ``H`` in the interleaved bare basis up to ``n_max`` photons.

    ``terms`` selects the coupling pieces: ``"rwa"`` (-lam (a s+ + a+ s-)),
    ``"crt"`` (-lam (a+ s+ + a s-)) and ``"pdm"`` (-lam alpha sz (a+ + a)).
    ``terms={"rwa"}`` gives the Jaynes-Cummings part alone.
    """
    if n_max < 1:
        raise InvalidParameterError(f"n_max must be >= 1, got {n_max}")
    terms = frozenset(terms)
    unknown = terms - ALL_TERMS
    if unknown:
        raise InvalidParameterError(f"unknown Hamiltonian terms {sorted(unknown)}")
    dim = basis_dim(n_max)
    h = np.zeros((dim, dim))
    lam, alpha = p.lam, p.alpha

    def put(i, j, value):
        h[i, j] = value
        h[j, i] = value

    for n in range(n_max + 1):
        g, e = BareState("g", n).index, BareState("e", n).index
        h[g, g] = n * p.omega_c - 0.5 * p.omega_0
        h[e, e] = n * p.omega_c + 0.5 * p.omega_0
        if n == n_max:
            continue
        root = math.sqrt(n + 1)
        g1, e1 = BareState("g", n + 1).index, BareState("e", n + 1).index
        if "pdm" in terms:
            put(g1, g, lam * alpha * root)
            put(e1, e, -lam * alpha * root)
        if "rwa" in terms:
            put(e, g1, -lam * root)
        if "crt" in terms:
            put(e1, g, -lam * root)
    return TruncatedHamiltonian(p, n_max, h, terms)


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns, bare basis
    n_max_used: int
    params: Optional[SystemParams] = None
    converged: bool = False
    matched_labels: dict = field(default_factory=dict)
    overlaps: dict = field(default_factory=dict)
    last_delta: float = math.nan

    def energy(self, label: LevelLabel) -> float:
        return float(self.eigenvalues[self.matched_labels[label]])

    def vector(self, label: LevelLabel) -> np.ndarray:
        return self.eigenvectors[:, self.matched_labels[label]]


def jacobi_eigh(a: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100):
    """Cyclic Jacobi diagonalization of a real symmetric matrix.

    Sweeps until the off-diagonal Frobenius norm is below ``tol`` times the
    Frobenius norm of ``a``. Returns ascending eigenvalues and column eigenvectors.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n), v

    def off_norm(m):
        return float(np.linalg.norm(m - np.diag(np.diag(m))))

    for _ in range(max_sweeps):
        if off_norm(a) <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(tau) > 1e150:
                    t = 0.5 / tau
                else:
                    t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap, aq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        if off_norm(a) > tol * scale:
            raise ConvergenceError(
                f"Jacobi did not converge in {max_sweeps} sweeps",
                residual=off_norm(a) / scale)
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def residuals(h: np.ndarray, w: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``||H v_i - w_i v_i||`` per eigenpair."""
    return np.linalg.norm(h @ v - v * w, axis=0)


def eigensolve(h: TruncatedHamiltonian, method: str = "lapack",
               residual_tol: float = 1e-10) -> SpectrumResult:
    """Full symmetric eigendecomposition with a residual check.

    ``method="lapack"`` uses :func:`numpy.linalg.eigh`; ``method="jacobi"`` the
    pure cyclic Jacobi scheme (slow, for cross-checks on small matrices).
    Every pair must satisfy ``||Hv - Ev|| <= residual_tol * ||H||``.
    """
    if h.dim > MAX_DIM:
        raise InvalidParameterError(f"dimension {h.dim} exceeds {MAX_DIM}")
    if method == "lapack":
        w, v = np.linalg.eigh(h.matrix)
    elif method == "jacobi":
        w, v = jacobi_eigh(h.matrix)
    else:
        raise InvalidParameterError(f"unknown eigensolver {method!r}")
    res = residuals(h.matrix, w, v)
    norm = max(np.linalg.norm(h.matrix), np.finfo(float).tiny)
    if res.max() > residual_tol * norm:
        raise ConvergenceError(
            f"eigen-residual {res.max():.3e} exceeds {residual_tol:g}*||H||",
            residual=float(res.max() / norm))
    return SpectrumResult(eigenvalues=w, eigenvectors=v, n_max_used=h.n_max, params=h.params)


def converged_spectrum(p: SystemParams, n_levels: int = 7, tol: Optional[float] = None,
                       n_max_start: int = 16, method: str = "lapack") -> SpectrumResult:
    """Double the photon cutoff until the lowest ``n_levels`` eigenvalues settle.

    Accepts the smaller cutoff of the first pair whose lowest levels differ by
    less than ``tol`` (default ``1e-10 * omega_c``).
    """
    if n_levels < 1:
        raise InvalidParameterError("n_levels must be >= 1")
    if tol is None:
        tol = 1e-10 * p.omega_c
    if tol <= 0:
        raise InvalidParameterError("tol must be > 0")
    n_max = max(n_max_start, (n_levels + 1) // 2)
    current = eigensolve(build(p, n_max), method)
    delta = math.inf
    while True:
        nxt_n = 2 * n_max
        if basis_dim(nxt_n) > MAX_DIM:
            raise ConvergenceError(
                f"no convergence below dimension {MAX_DIM}; last delta {delta:.3e}",
                residual=delta)
        nxt = eigensolve(build(p, nxt_n), method)
        delta = float(np.max(np.abs(nxt.eigenvalues[:n_levels] - current.eigenvalues[:n_levels])))
        if delta < tol:
            return replace(current, converged=True, last_delta=delta)
        n_max, current = nxt_n, nxt


def match_levels(s: SpectrumResult, p: SystemParams, labels: Sequence[LevelLabel],
                 min_overlap: float = 0.5, tie_tol: float = 1e-9) -> SpectrumResult:
    """Attach unperturbed labels to eigenvectors by maximum overlap.

    Labels are assigned one at a time in ascending unperturbed energy; each takes
    the unclaimed eigenvector with the largest ``|<v|phi_label>|`` (ties within
    ``tie_tol`` go to the lower eigenvalue).
    """
    n_max = s.n_max_used
    vec = bare_limit_vector if p.lam == 0 else dressed_vector
    ordered = sorted(labels, key=lambda lvl: (unperturbed_energy(lvl, p), lvl.order_key))
    taken: set = set()
    matched, overlaps = {}, {}
    for label in ordered:
        ov = np.abs(s.eigenvectors.T @ vec(label, p, n_max))
        best, best_ov = -1, -1.0
        for i in np.argsort(-ov, kind="stable"):
            if i in taken:
                continue
            if best < 0:
                best, best_ov = int(i), float(ov[i])
            elif best_ov - ov[i] <= tie_tol:
                if s.eigenvalues[i] < s.eigenvalues[best]:
                    best = int(i)
            else:
                break
        if best_ov < min_overlap:
            raise AmbiguousMatchError(
                f"level {label}: best overlap {best_ov:.3f} < {min_overlap}")
        taken.add(best)
        matched[label] = best
        overlaps[label] = best_ov
    return replace(s, matched_labels=matched, overlaps=overlaps)
