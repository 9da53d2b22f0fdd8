"""Interpolating Hamiltonian, dispersion, group velocity and diffusion tensor.

Convention: the coin is ``A = exp(-i H)``, so particle states (positive
frequency omega) pick up ``exp(-i omega t)`` per step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from qca.automata import AutomatonSpec, unitarity_residual

GRADIENT_STEP = 1e-5
HESSIAN_STEP = 1e-3
UNITARITY_TOL = 1e-10
DEGENERACY_TOL = 1e-10


class DegeneracyError(ValueError):
    """Raised at band-touching points (omega = 0 or pi) where branches are undefined."""


@dataclass(frozen=True)
class DispersionPoint:
    omega: float
    v: np.ndarray
    D: np.ndarray
    branch: str = "particle"
    degeneracy: int = 1


@dataclass(frozen=True)
class BranchEigenstate:
    vector: np.ndarray
    frequency: float
    branch: str
    degeneracy: int


def _require_unitary(coin: np.ndarray, tol: float = UNITARITY_TOL) -> np.ndarray:
    coin = np.asarray(coin, dtype=complex)
    res = float(np.max(unitarity_residual(coin)))
    if res > tol:
        raise ValueError(f"coin is not unitary (residual {res:.3e} > {tol:.1e})")
    return coin


def _schur_phases(coin: np.ndarray):
    t, z = scipy.linalg.schur(coin, output="complex")
    lam = np.diag(t)
    freq = -np.angle(lam)
    # keep frequencies in (-pi, pi]
    freq = np.where(freq <= -np.pi + 1e-15, np.pi, freq)
    return freq, z


def interpolating_hamiltonian(coin) -> np.ndarray:
    """Hermitian ``H`` with eigenvalues in (-pi, pi] and ``coin == expm(-1j * H)``."""
    coin = _require_unitary(coin)
    freq, z = _schur_phases(coin)
    h = (z * freq) @ np.conj(z.T)
    return (h + np.conj(h.T)) / 2


def dispersion(spec: AutomatonSpec, k) -> np.ndarray:
    """Positive frequency ``omega(k)``; equals arccos(n cos k) for Dirac1D."""
    out = spec.omega(k)
    return out if np.ndim(out) else float(out)


def _unit(dim, i):
    e = np.zeros(dim)
    e[i] = 1.0
    return e


def _omega_at(spec, k):
    if spec.dimension == 1:
        return float(spec.omega(float(k[0])))
    return float(spec.omega(k))


def _check_nondegenerate(spec, kv):
    w = _omega_at(spec, kv)
    if w < DEGENERACY_TOL or np.pi - w < DEGENERACY_TOL:
        raise DegeneracyError(f"band degeneracy at k={kv.tolist()} (omega={w:.3e})")
    return w


def group_velocity(spec: AutomatonSpec, k, h: float = GRADIENT_STEP) -> np.ndarray:
    """Drift vector grad_k omega by central differences, shape ``(dim,)``."""
    kv = np.atleast_1d(np.asarray(k, dtype=float))
    dim = spec.dimension
    _check_nondegenerate(spec, kv)
    grad = np.empty(dim)
    for i in range(dim):
        e = h * _unit(dim, i)
        grad[i] = (_omega_at(spec, kv + e) - _omega_at(spec, kv - e)) / (2 * h)
    return grad


def diffusion_tensor(spec: AutomatonSpec, k, h: float = HESSIAN_STEP) -> np.ndarray:
    """Hessian of omega, fourth-order central differences, symmetrized."""
    kv = np.atleast_1d(np.asarray(k, dtype=float))
    dim = spec.dimension
    w0 = _check_nondegenerate(spec, kv)

    def f(*shifts):
        dk = np.zeros(dim)
        for axis, s in shifts:
            dk[axis] += s * h
        return _omega_at(spec, kv + dk)

    hess = np.empty((dim, dim))
    for i in range(dim):
        hess[i, i] = (
            -f((i, 2)) + 16 * f((i, 1)) - 30 * w0 + 16 * f((i, -1)) - f((i, -2))
        ) / (12 * h * h)
        for j in range(i):
            acc = 0.0
            for a, wa in ((1, 8), (-1, -8), (2, -1), (-2, 1)):
                for b, wb in ((1, 8), (-1, -8), (2, -1), (-2, 1)):
                    acc += wa * wb * f((i, a), (j, b))
            hess[i, j] = hess[j, i] = acc / (144 * h * h)
    return hess


def dirac1d_velocity(mass: float, k) -> np.ndarray:
    """Closed form ``v = n sin k / sin omega`` of the 1D Dirac automaton."""
    n = np.sqrt(1 - mass * mass)
    k = np.asarray(k, dtype=float)
    return n * np.sin(k) / np.hypot(mass, n * np.sin(k))


def dirac1d_diffusion(mass: float, k) -> np.ndarray:
    """Closed form ``d^2 omega / dk^2 = n cos k (1 - v^2) / sin omega``."""
    n = np.sqrt(1 - mass * mass)
    k = np.asarray(k, dtype=float)
    sin_w = np.hypot(mass, n * np.sin(k))
    v = n * np.sin(k) / sin_w
    return n * np.cos(k) * (1 - v * v) / sin_w


def dispersion_point(spec: AutomatonSpec, k, branch: int = 1) -> DispersionPoint:
    w = _omega_at(spec, np.atleast_1d(np.asarray(k, dtype=float)))
    v = group_velocity(spec, k)
    d = diffusion_tensor(spec, k)
    sign = 1 if branch > 0 else -1
    return DispersionPoint(
        omega=w,
        v=sign * v,
        D=sign * d,
        branch="particle" if sign > 0 else "antiparticle",
        degeneracy=spec.internal_dim // 2,
    )


def branch_projectors(coin, strict: bool = True):
    """Projectors ``(P_plus, P_minus)`` onto positive/negative frequency.

    Works on a single coin or a batch ``(..., s, s)``. Positive frequency
    means eigenvalue ``exp(-i omega)`` with ``0 < omega < pi``, i.e. negative
    imaginary part, so the split is read off the Hermitian part
    ``(U - U^dagger) / 2i``. At band degeneracies (omega = 0 or pi) the split
    is undefined: ``strict`` raises, otherwise the whole space goes to
    ``P_plus`` there (harmless for evolution, since the coin is +-I).
    """
    coin = np.asarray(coin, dtype=complex)
    herm = (coin - np.conj(np.swapaxes(coin, -1, -2))) / 2j
    vals, vecs = np.linalg.eigh(herm)
    degenerate = np.abs(vals) < DEGENERACY_TOL
    if strict and np.any(degenerate):
        raise DegeneracyError("coin has eigenvalue +-1: branches are not defined")
    weight = (vals < 0) | degenerate
    p_plus = np.einsum("...ij,...j,...kj->...ik", vecs, weight, np.conj(vecs))
    p_minus = np.eye(coin.shape[-1]) - p_plus
    return p_plus, p_minus


def branch_basis(projector: np.ndarray, rank: int | None = None) -> np.ndarray:
    """Orthonormal basis of ``range(P)`` by Gram-Schmidt of ``P e_1, P e_2, ...``.

    The reference order makes the phase convention deterministic: each basis
    vector has a real positive overlap with the unit vector it was built
    from. Batched over leading axes; returns ``(..., s, rank)``.
    """
    projector = np.asarray(projector, dtype=complex)
    s = projector.shape[-1]
    if rank is None:
        rank = int(round(float(np.real(np.trace(projector.reshape(-1, s, s)[0])))))
    batch = projector.shape[:-2]
    basis = np.zeros(batch + (s, rank), dtype=complex)
    count = np.zeros(batch, dtype=int)
    # a well-conditioned pass first, then accept anything non-null
    for threshold in (0.5 / s, 1e-8):
        for j in range(s):
            cand = projector[..., :, j]
            cand = cand - np.einsum("...ir,...r->...i", basis, np.einsum("...ir,...i->...r", np.conj(basis), cand))
            norm = np.linalg.norm(cand, axis=-1)
            take = (count < rank) & (norm**2 > threshold)
            if not np.any(take):
                continue
            vec = cand / np.where(take, norm, 1.0)[..., None]
            for r in range(rank):
                slot = take & (count == r)
                basis[..., :, r] = np.where(slot[..., None], vec, basis[..., :, r])
            count = count + take
        if np.all(count == rank):
            return basis
    raise DegeneracyError("could not build a branch basis from the reference order")


def eigenbranches(coin) -> list[BranchEigenstate]:
    """Full eigen-decomposition grouped by frequency, particles first.

    Degenerate eigenspaces are given a deterministic basis (Gram-Schmidt
    against the unit vectors in order).
    """
    coin = _require_unitary(coin)
    freq, z = _schur_phases(coin)
    order = np.argsort(-freq, kind="stable")
    groups: list[list[int]] = []
    for idx in order:
        if groups and abs(freq[groups[-1][0]] - freq[idx]) < 1e-9:
            groups[-1].append(idx)
        else:
            groups.append([idx])
    out = []
    for g in groups:
        proj = z[:, g] @ np.conj(z[:, g]).T
        basis = branch_basis(proj, rank=len(g))
        w = float(np.mean(freq[g]))
        branch = "particle" if w > DEGENERACY_TOL else ("antiparticle" if w < -DEGENERACY_TOL else "degenerate")
        for r in range(len(g)):
            out.append(BranchEigenstate(basis[:, r], w, branch, len(g)))
    return out
