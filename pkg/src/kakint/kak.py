"""KAK factorization g = k1 exp(H) k2^{-1} with H in the closed positive chamber.

GL/SL families use the singular value decomposition (complex SVD on the
derealified matrix for the realified-complex family).  The Lorentz family uses
a polar-type extraction: the boost magnitude comes from arcsinh of the spatial
part of the first column (well conditioned for every boost size), the first
compact factor aligns the boost axis, and the second is solved from the exact
recomposition equation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .exceptions import DomainError
from .liecore import (
    CartanFrame,
    GroupFamily,
    RootSystem,
    algebra_element,
    derealify,
    exp_a,
    group_residual,
    realify,
)

CHAMBER_TOL = 1e-10
ILL_CONDITIONED_TOL = 1e-12


@dataclass(eq=False)
class KAKFactors:
    """Factors of g = k1 exp(H) k2^{-1}; H in basis_a coordinates."""

    k1: np.ndarray
    k2: np.ndarray
    H: np.ndarray
    warning: str | None = None


def _diag_coords(frame: CartanFrame, log_diag: np.ndarray) -> np.ndarray:
    # project a diagonal log onto the orthonormal diagonal basis of a
    diags = np.array([np.diag(h) for h in frame.basis_a])
    return diags @ log_diag


def _rotation_to_first_axis(u: np.ndarray) -> np.ndarray:
    """Q in SO(n) with Q e1 = u (n >= 2), deterministic Householder form."""
    n = u.shape[0]
    e1 = np.eye(n)[0]
    v = u - e1
    if np.linalg.norm(v) < 1e-13:
        return np.eye(n)
    house = np.eye(n) - 2.0 * np.outer(v, v) / np.dot(v, v)  # e1 <-> u, det -1
    flip = np.eye(n)
    flip[-1, -1] = -1.0
    return house @ flip


def _boost(t: float, size: int) -> np.ndarray:
    a = np.eye(size)
    a[0, 0] = a[1, 1] = np.cosh(t)
    a[0, 1] = a[1, 0] = np.sinh(t)
    return a


def kak_decompose(
    family: GroupFamily,
    frame: CartanFrame,
    system: RootSystem,
    g: np.ndarray,
) -> KAKFactors:
    """Factor a group element; H is chamber-canonical by construction.

    Elements within ~1e-12 of the singular set are still decomposed but the
    returned factors carry a ``warning`` (the compact factors are arbitrary
    within the stated tolerance there).
    """
    g = np.asarray(g, dtype=float)
    res = group_residual(family, g)
    if res > 1e-8:
        raise DomainError(
            f"matrix is not in {family.tag}({family.n}) (residual {res:.3e})")

    if family.tag in ("GL-real", "SL-real"):
        u, s, vt = np.linalg.svd(g)
        if family.tag == "SL-real" and np.linalg.det(u) < 0:
            # det u = det v = -1 here; flip the last column of both
            u = u.copy()
            u[:, -1] *= -1.0
            vt = vt.copy()
            vt[-1, :] *= -1.0
        h = _diag_coords(frame, np.log(s))
        k1, k2 = u, vt.T
    elif family.tag == "GL-complex-as-real":
        z = derealify(g)
        u, s, vh = np.linalg.svd(z)
        # the realified exponential repeats each log-singular-value in both
        # diagonal blocks; project that diagonal onto basis_a
        h = _diag_coords(frame, np.concatenate([np.log(s), np.log(s)]))
        k1 = realify(u)
        k2 = realify(vh.conj().T)
    else:  # LorentzSO0
        k1, h, k2 = _kak_lorentz(family, g)

    factors = KAKFactors(k1=k1, k2=k2, H=h)
    if system.num_positive:
        margin = float(np.abs(system.positive_values(h)).min())
        if margin < ILL_CONDITIONED_TOL:
            factors.warning = (
                f"near-singular element (chamber margin {margin:.2e}); "
                "compact factors are only determined up to the stabilizer")
    return factors


def _kak_lorentz(family: GroupFamily, g: np.ndarray):
    size = family.size
    n = family.n
    spatial = g[1:, 0]
    sh = float(np.linalg.norm(spatial))
    if n == 1:
        t = float(np.arcsinh(g[1, 0]))
        k1 = np.eye(size)
    else:
        t = float(np.arcsinh(sh))
        k1 = np.eye(size)
        if sh > 0.0:
            k1[1:, 1:] = _rotation_to_first_axis(spatial / sh)
    k2inv = _boost(-t, size) @ k1.T @ g
    h = np.array([t * np.sqrt(2.0)])
    return k1, h, k2inv.T


def recompose(family: GroupFamily, frame: CartanFrame, factors: KAKFactors) -> np.ndarray:
    """k1 exp(H) k2^{-1}; the compact factors are orthogonal, so k2^{-1} = k2^T."""
    return factors.k1 @ exp_a(frame, factors.H) @ factors.k2.T


def chamber_reduce(system: RootSystem, h) -> tuple[np.ndarray, np.ndarray]:
    """Weyl element w and H_c = w(H) in the closed positive chamber.

    Scans the stored Weyl elements in enumeration order; boundary ties
    resolve to the first hit.
    """
    h = np.asarray(h, dtype=float)
    if system.num_positive == 0:
        return np.eye(system.rank), h
    for w in system.weyl_elements:
        cand = w @ h
        if system.positive_values(cand).min() >= -CHAMBER_TOL:
            return w, cand
    raise RuntimeError("no Weyl image in the chamber; root system inconsistent")


def regularity(system: RootSystem, h) -> tuple[bool, float]:
    """Whether every root is nonzero on h, and the minimal |root value|."""
    h = np.asarray(h, dtype=float)
    if system.num_positive == 0:
        return True, np.inf
    margin = float(np.abs(system.positive_values(h)).min())
    return margin > CHAMBER_TOL, margin


def random_group_element(
    family: GroupFamily, rng: np.random.Generator, scale: float
) -> np.ndarray:
    """exp(scale * X) for a standard Gaussian algebra element X."""
    if scale < 0:
        raise DomainError("scale must be >= 0")
    coords = rng.standard_normal(family.d_G)
    if scale == 0.0:
        return np.eye(family.size)
    return expm(scale * algebra_element(family, coords))
