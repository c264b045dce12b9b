"""Independent brute-force oracles used by the tests.

The root oracle clusters the eigenvalues of ad(H*) for a single random
generic element H* (instead of the library's fixed-combination joint
diagonalization) and reads the root functionals off the cluster subspaces.
"""

import numpy as np


def brute_force_roots(family, frame, rng, tol=1e-8):
    """Set of (root coordinate tuple, multiplicity) from one dense eigensolve."""
    basis = family.basis_g
    d = family.d_G

    def ad_matrix(h):
        br = h[None] @ basis - basis @ h[None]
        return np.tensordot(basis, br, axes=([1, 2], [1, 2]))

    ads = [ad_matrix(h) for h in frame.basis_a]
    coeffs = rng.uniform(0.5, 1.5, size=len(ads)) * (1 + rng.uniform(0, 1, len(ads)))
    hstar = sum(c * m for c, m in zip(coeffs, ads))
    vals, vecs = np.linalg.eigh(hstar)

    clusters, start = [], 0
    for i in range(1, d + 1):
        if i == d or vals[i] - vals[i - 1] > tol:
            clusters.append((start, i))
            start = i

    out = set()
    for lo, hi in clusters:
        block = vecs[:, lo:hi]
        lam = np.array([np.trace(block.T @ m @ block) / (hi - lo) for m in ads])
        if np.linalg.norm(lam) <= tol:
            continue
        out.add((tuple(np.round(lam, 9)), hi - lo))
    return out


def roots_as_set(system):
    return {
        (tuple(np.round(system.roots[i], 9)), int(system.multiplicities[i]))
        for i in range(len(system.roots))
    }
