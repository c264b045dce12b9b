"""Reduction Jacobian J(a) and its determinant cross-check.

``log_jacobian`` evaluates sum_{positive roots} multiplicity * log|sinh(root(H))|
in log-space (products of sinh underflow quickly at higher rank).  The same
quantity is validated against the absolute determinant of the numerically
assembled linearization (zeta1, zeta2) -> Ad(a^{-1}) zeta1 - zeta2 of the
two-sided compact action, expressed in the orthonormal frame bases; the
conjugation is computed with explicit matrices so the cosh/sinh coefficient
pattern is tested rather than assumed.

All functions here are stateless and parallel-safe.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import SingularityError
from .kak import regularity
from .liecore import CartanFrame, GroupFamily, RootSystem, exp_a, frobenius


def log_jacobian(system: RootSystem, h) -> float | np.ndarray:
    """Log of prod |sinh(root(H))|^multiplicity over the positive roots.

    Returns ``-inf`` where some root vanishes on H.  Accepts a single
    coordinate vector ``(rank,)`` or a batch ``(..., rank)``.
    """
    h = np.asarray(h, dtype=float)
    single = h.ndim == 1
    vals = system.positive_values(h)                      # (..., num_pos)
    if system.num_positive == 0:
        out = np.zeros(h.shape[:-1])
        return float(out) if single else out
    with np.errstate(divide="ignore"):
        terms = np.log(np.abs(np.sinh(vals)))
    out = terms @ system.positive_multiplicities.astype(float)
    return float(out) if single else out


def jacobian(system: RootSystem, h) -> float | np.ndarray:
    """exp of :func:`log_jacobian`; zero on the singular set."""
    out = np.exp(log_jacobian(system, h))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(eq=False)
class PsiMatrix:
    """Linearized two-sided action in orthonormal bases.

    Rows follow ``codomain_labels`` (centralizer directions, then the
    symmetrized and antisymmetrized root directions); columns follow
    ``domain_labels`` (pairs: left centralizer, left root, right root).
    """

    entries: np.ndarray
    domain_labels: list[str]
    codomain_labels: list[str]


def _codomain(frame: CartanFrame) -> tuple[np.ndarray, list[str]]:
    mats = np.concatenate([frame.basis_m, frame.basis_l, frame.basis_b])
    labels = [f"m{i}" for i in range(len(frame.basis_m))]
    labels += [f"l{i}" for i in range(len(frame.basis_l))]
    labels += [f"b{i}" for i in range(len(frame.basis_b))]
    return mats, labels


def psi_matrix(family: GroupFamily, frame: CartanFrame, h) -> PsiMatrix:
    """Assemble the map (zeta1, zeta2) -> Ad(a^{-1}) zeta1 - zeta2 at a = exp(H).

    Domain basis: (eta_i, 0) for the centralizer part, (l_j, 0) and (0, l_j)
    for the symmetrized root directions; codomain as in :func:`_codomain`.
    Ad(a^{-1}) X is evaluated as the matrix conjugation a^{-1} X a.
    """
    a = exp_a(frame, h)
    a_inv = exp_a(frame, -np.asarray(h, dtype=float))
    cod, cod_labels = _codomain(frame)
    columns, dom_labels = [], []

    def ad_conj(x):
        return a_inv @ x @ a

    for i, eta in enumerate(frame.basis_m):
        columns.append(ad_conj(eta))
        dom_labels.append(f"(m{i},0)")
    for j, xi in enumerate(frame.basis_l):
        columns.append(ad_conj(xi))
        dom_labels.append(f"(l{j},0)")
    for j, xi in enumerate(frame.basis_l):
        columns.append(-xi)
        dom_labels.append(f"(0,l{j})")

    flat_cod = cod.reshape(len(cod), -1)
    flat_cols = np.array([c.ravel() for c in columns])
    entries = flat_cod @ flat_cols.T    # rows: codomain, cols: domain
    return PsiMatrix(entries=entries, domain_labels=dom_labels, codomain_labels=cod_labels)


def psi_det_check(
    family: GroupFamily,
    frame: CartanFrame,
    system: RootSystem,
    h,
) -> tuple[float, float, float]:
    """(|det Psi|, J(a) with unit constant, their ratio); ratio = 1 in exact math."""
    regular, margin = regularity(system, h)
    if not regular:
        raise SingularityError(f"element is singular (margin {margin:.2e})")
    psi = psi_matrix(family, frame, h)
    det_abs = abs(float(np.linalg.det(psi.entries))) if psi.entries.size else 1.0
    jac = jacobian(system, h)
    return det_abs, jac, det_abs / jac


def ad_action_coefficients(
    family: GroupFamily,
    frame: CartanFrame,
    h,
    root_index: int,
    j: int,
) -> tuple[float, float]:
    """Expand Ad(a^{-1}) applied to a symmetrized root vector.

    Returns the coefficients on the symmetrized (+) and antisymmetrized (-)
    directions of the same root vector; they equal cosh and -sinh of the root
    value, and every other frame coefficient vanishes.
    """
    a = exp_a(frame, h)
    a_inv = exp_a(frame, -np.asarray(h, dtype=float))
    offset = sum(len(frame.root_vectors[p]) for p in range(root_index))
    xi_plus = frame.basis_l[offset + j]
    xi_minus = frame.basis_b[offset + j]
    w = a_inv @ xi_plus @ a
    return frobenius(xi_plus, w), frobenius(xi_minus, w)


def transversality_condition(family: GroupFamily, frame: CartanFrame, h) -> float:
    """Condition number of the tangent frame [abelian slice | orbit directions] at a.

    Both pieces are translated to the point a = exp(H); a moderate condition
    number witnesses that the group tangent space splits into the two parts.
    """
    a = exp_a(frame, h)
    cod, _ = _codomain(frame)
    mats = np.concatenate([frame.basis_a, cod])
    translated = a[None] @ mats
    flat = translated.reshape(len(mats), -1)
    sv = np.linalg.svd(flat, compute_uv=False)
    return float(sv[0] / sv[-1])
