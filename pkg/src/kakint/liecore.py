"""Cartan data for concrete reductive matrix-group families.

Supported families (real matrix representations throughout):

* ``GL-real``             GL(n, R),  K = O(n)
* ``SL-real``             SL(n, R),  K = SO(n)
* ``GL-complex-as-real``  GL(n, C) realified to 2n x 2n real matrices, K = U(n)
* ``LorentzSO0``          SO0(1, n) with metric diag(-1, 1, ..., 1), K = SO(n)

The Cartan involution is X -> -X^T in every representation, and the invariant
bilinear form is B(X, Y) = trace(XY).  With these choices the inner product
that is -B on the compact part and +B on the symmetric part coincides with the
Frobenius inner product, so "orthonormal under +/-B" means Frobenius
orthonormal everywhere below.

All products of this module are immutable after construction and safe to share
across threads.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    ConfigurationError,
    DegeneracyError,
    DomainError,
    InternalError,
)

FAMILY_TAGS = ("GL-real", "SL-real", "GL-complex-as-real", "LorentzSO0")

# absolute tolerance for grouping ad-eigenvalues into restricted roots;
# structure constants are exact small rationals for n <= 5
CLUSTER_TOL = 1e-8
MEMBERSHIP_TOL = 1e-8
WEYL_CLOSURE_BOUND = 10**6


# ---------------------------------------------------------------------------
# small linear-algebra helpers
# ---------------------------------------------------------------------------

def frobenius(x: np.ndarray, y: np.ndarray) -> float:
    """Frobenius inner product <x, y> = sum_ij x_ij y_ij."""
    return float(np.sum(x * y))


def realify(z: np.ndarray) -> np.ndarray:
    """Real 2n x 2n representation [[A, -B], [B, A]] of a complex matrix A + iB."""
    n = z.shape[0]
    out = np.zeros((2 * n, 2 * n))
    out[:n, :n] = z.real
    out[n:, n:] = z.real
    out[:n, n:] = -z.imag
    out[n:, :n] = z.imag
    return out


def derealify(x: np.ndarray) -> np.ndarray:
    """Inverse of :func:`realify` (does not check the block structure)."""
    n = x.shape[0] // 2
    return x[:n, :n] + 1j * x[n:, :n]


def complex_structure(n: int) -> np.ndarray:
    """The realification of i * identity; commuting with it tests complexity."""
    return realify(1j * np.eye(n))


def minkowski_metric(size: int) -> np.ndarray:
    eta = np.eye(size)
    eta[0, 0] = -1.0
    return eta


def orthonormalize(mats: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Modified Gram-Schmidt with one re-orthogonalization pass.

    Operates on a stack of matrices under the Frobenius inner product and
    drops vectors that become numerically dependent.
    """
    out = []
    for m in np.asarray(mats, dtype=float):
        w = m.copy()
        for _ in range(2):
            for u in out:
                w = w - frobenius(u, w) * u
        nrm = np.linalg.norm(w)
        if nrm > tol:
            out.append(w / nrm)
    return np.array(out) if out else np.zeros((0,) + mats.shape[1:])


def _unit(e: np.ndarray) -> np.ndarray:
    return e / np.linalg.norm(e)


# ---------------------------------------------------------------------------
# family descriptors
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GroupFamily:
    """Descriptor of one concrete reductive matrix-group family.

    ``basis_k`` and ``basis_p`` are Frobenius-orthonormal bases of the
    compact (skew) and symmetric parts of the Lie algebra; their
    concatenation is the working basis of the full algebra.
    """

    tag: str
    n: int
    size: int      # real matrix size of the representation
    d_G: int
    d_K: int
    basis_k: np.ndarray
    basis_p: np.ndarray

    @property
    def basis_g(self) -> np.ndarray:
        return np.concatenate([self.basis_k, self.basis_p], axis=0)

    def __repr__(self):  # pragma: no cover - cosmetic
        return f"GroupFamily({self.tag}, n={self.n}, d_G={self.d_G}, d_K={self.d_K})"


def _basis_gl(n: int) -> tuple[list, list]:
    ks, ps = [], []
    for i, j in itertools.combinations(range(n), 2):
        e = np.zeros((n, n))
        e[i, j] = 1.0
        ks.append((e - e.T) / np.sqrt(2.0))
        ps.append((e + e.T) / np.sqrt(2.0))
    for i in range(n):
        e = np.zeros((n, n))
        e[i, i] = 1.0
        ps.append(e)
    return ks, ps


def _traceless_diagonals(n: int) -> list[np.ndarray]:
    # "corner" vectors diag(0,..,0, n-k, -1,..,-1): orthogonal, traceless, and
    # lexicographic positivity in this basis makes the positive chamber the
    # descending-diagonal cone (so sorted singular values are chamber-canonical)
    out = []
    for k in range(1, n):
        v = np.zeros(n)
        v[k - 1] = n - k
        v[k:] = -1.0
        out.append(np.diag(v / np.linalg.norm(v)))
    return out


def _basis_sl(n: int) -> tuple[list, list]:
    ks, ps = _basis_gl(n)
    ps = ps[: n * (n - 1) // 2] + _traceless_diagonals(n)
    return ks, ps


def _basis_gl_complex(n: int) -> tuple[list, list]:
    ks, ps = [], []
    for i, j in itertools.combinations(range(n), 2):
        z = np.zeros((n, n), complex)
        z[i, j] = 1.0
        zt = z.T.copy()
        ks.append(realify(z - zt))
        ks.append(realify(1j * (z + zt)))
        ps.append(realify(z + zt))
        ps.append(realify(1j * (z - zt)))
    for i in range(n):
        z = np.zeros((n, n), complex)
        z[i, i] = 1.0
        ks.append(realify(1j * z))
        ps.append(realify(z))
    return [_unit(m) for m in ks], [_unit(m) for m in ps]


def _basis_lorentz(n: int) -> tuple[list, list]:
    s = n + 1
    ks, ps = [], []
    for i, j in itertools.combinations(range(1, s), 2):
        e = np.zeros((s, s))
        e[i, j] = 1.0
        ks.append((e - e.T) / np.sqrt(2.0))
    for i in range(1, s):
        e = np.zeros((s, s))
        e[0, i] = 1.0
        e[i, 0] = 1.0
        ps.append(e / np.sqrt(2.0))
    return ks, ps


_BUILDERS = {
    "GL-real": (_basis_gl, lambda n: n, 2),
    "SL-real": (_basis_sl, lambda n: n, 2),
    "GL-complex-as-real": (_basis_gl_complex, lambda n: 2 * n, 2),
    "LorentzSO0": (_basis_lorentz, lambda n: n + 1, 1),
}


def make_family(tag: str, n: int) -> GroupFamily:
    """Build the descriptor and orthonormal algebra basis for a family."""
    if tag not in _BUILDERS:
        raise ConfigurationError(f"unsupported family tag {tag!r}; choose from {FAMILY_TAGS}")
    builder, size_fn, n_min = _BUILDERS[tag]
    if not isinstance(n, (int, np.integer)) or n < n_min:
        raise ConfigurationError(f"family {tag} requires integer n >= {n_min}, got {n!r}")
    ks, ps = builder(n)
    basis_k = np.array(ks) if ks else np.zeros((0, size_fn(n), size_fn(n)))
    basis_p = np.array(ps)
    return GroupFamily(
        tag=tag,
        n=int(n),
        size=size_fn(n),
        d_G=len(ks) + len(ps),
        d_K=len(ks),
        basis_k=basis_k,
        basis_p=basis_p,
    )


# ---------------------------------------------------------------------------
# membership tests
# ---------------------------------------------------------------------------

def algebra_residual(family: GroupFamily, x: np.ndarray) -> float:
    """How far a matrix is from the family's Lie algebra (0 = member)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (family.size, family.size):
        raise DomainError(f"expected shape {(family.size, family.size)}, got {x.shape}")
    scale = max(1.0, float(np.linalg.norm(x)))
    if family.tag == "GL-real":
        return 0.0
    if family.tag == "SL-real":
        return abs(float(np.trace(x))) / scale
    if family.tag == "GL-complex-as-real":
        j = complex_structure(family.n)
        return float(np.linalg.norm(j @ x - x @ j)) / scale
    eta = minkowski_metric(family.size)
    return float(np.linalg.norm(x.T @ eta + eta @ x)) / scale


def group_residual(family: GroupFamily, g: np.ndarray) -> float:
    """How far a matrix is from the group (0 = member)."""
    g = np.asarray(g, dtype=float)
    if g.shape != (family.size, family.size):
        raise DomainError(f"expected shape {(family.size, family.size)}, got {g.shape}")
    if not np.all(np.isfinite(g)):
        return np.inf
    det = float(np.linalg.det(g))
    if family.tag == "GL-real":
        return 0.0 if abs(det) > 1e-300 else np.inf
    if family.tag == "SL-real":
        return abs(det - 1.0)
    if family.tag == "GL-complex-as-real":
        if abs(det) < 1e-300:
            return np.inf
        j = complex_structure(family.n)
        return float(np.linalg.norm(j @ g - g @ j)) / max(1.0, float(np.linalg.norm(g)))
    eta = minkowski_metric(family.size)
    res = float(np.linalg.norm(g.T @ eta @ g - eta)) / max(1.0, float(np.linalg.norm(g)))
    res = max(res, abs(det - 1.0) / max(1.0, abs(det)))
    res = max(res, max(0.0, 1.0 - float(g[0, 0])))  # orthochronous sheet
    return res


def compact_residual(family: GroupFamily, k: np.ndarray) -> float:
    """Distance of a matrix from the maximal compact subgroup K."""
    k = np.asarray(k, dtype=float)
    res = float(np.linalg.norm(k.T @ k - np.eye(family.size)))
    if family.tag == "SL-real":
        res = max(res, abs(float(np.linalg.det(k)) - 1.0))
    elif family.tag == "GL-complex-as-real":
        j = complex_structure(family.n)
        res = max(res, float(np.linalg.norm(j @ k - k @ j)))
    elif family.tag == "LorentzSO0":
        res = max(res, abs(k[0, 0] - 1.0), float(np.linalg.norm(k[0, 1:])),
                  float(np.linalg.norm(k[1:, 0])), abs(float(np.linalg.det(k)) - 1.0))
    return res


def _require_algebra(family: GroupFamily, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    res = algebra_residual(family, x)
    if res > MEMBERSHIP_TOL:
        raise DomainError(f"matrix is not in the {family.tag}({family.n}) Lie algebra "
                          f"(residual {res:.3e})")
    return x


# ---------------------------------------------------------------------------
# Cartan involution, bilinear form, splits
# ---------------------------------------------------------------------------

def cartan_involution(family: GroupFamily, x: np.ndarray) -> np.ndarray:
    """theta(X) = -X^T; fixes the compact part, negates the symmetric part."""
    return -_require_algebra(family, x).T


def bilinear_form(family: GroupFamily, x: np.ndarray, y: np.ndarray) -> float:
    """Invariant trace form B(X, Y) = trace(XY)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (family.size, family.size) or y.shape != x.shape:
        raise DomainError(f"shape mismatch: {x.shape} vs {y.shape} for size {family.size}")
    return float(np.trace(x @ y))


def cartan_split(family: GroupFamily, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split X into compact and symmetric parts, X = X_k + X_p."""
    x = _require_algebra(family, x)
    xk = (x - x.T) / 2.0
    xp = (x + x.T) / 2.0
    return xk, xp


def maximal_abelian(family: GroupFamily) -> np.ndarray:
    """Orthonormal basis of a maximal abelian subspace of the symmetric part.

    Diagonal matrices for the GL/SL families (traceless "corner" combinations
    for SL), the single normalized boost generator for the Lorentz family.
    """
    n = family.n
    if family.tag == "GL-real":
        return np.array([np.diag(np.eye(n)[i]) for i in range(n)])
    if family.tag == "SL-real":
        return orthonormalize(np.array(_traceless_diagonals(n)))
    if family.tag == "GL-complex-as-real":
        return np.array([realify(np.diag(np.eye(n)[i]).astype(complex)) / np.sqrt(2.0)
                         for i in range(n)])
    s = family.size
    e = np.zeros((s, s))
    e[0, 1] = 1.0
    e[1, 0] = 1.0
    return np.array([e / np.sqrt(2.0)])


# ---------------------------------------------------------------------------
# frame and root system containers
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class CartanFrame:
    """Orthonormal bases adapted to the Cartan and restricted-root structure.

    ``root_vectors[p]`` holds a Frobenius-orthonormal basis of the root space
    of the p-th positive root (shape ``(multiplicity, size, size)``).
    ``basis_l``/``basis_b`` hold the normalized theta-symmetrized combinations
    (xi + theta xi)/sqrt(2) and (xi - theta xi)/sqrt(2) in matching order.
    Mutated only while :func:`cartan_frame` assembles it; treat as immutable
    afterwards.
    """

    basis_k: np.ndarray
    basis_p: np.ndarray
    basis_a: np.ndarray
    basis_m: np.ndarray | None = None
    basis_l: np.ndarray | None = None
    basis_b: np.ndarray | None = None
    root_vectors: dict[int, np.ndarray] = field(default_factory=dict)
    a_is_diagonal: bool = True

    @property
    def rank(self) -> int:
        return len(self.basis_a)


@dataclass(eq=False)
class RootSystem:
    """Restricted roots as coordinate vectors in the dual basis of basis_a.

    ``roots[:num_positive]`` are the positive roots (lexicographic convention),
    followed by their negatives in the same order.  ``weyl_elements`` are
    orthogonal rank x rank matrices acting on basis_a coordinates.
    """

    roots: np.ndarray            # (num_roots, rank)
    multiplicities: np.ndarray   # (num_roots,) positive ints
    num_positive: int
    weyl_elements: np.ndarray    # (weyl_order, rank, rank)
    weyl_order: int

    @property
    def rank(self) -> int:
        return self.roots.shape[1] if self.roots.size else self.weyl_elements.shape[1]

    @property
    def positive_roots(self) -> np.ndarray:
        """Indices of the positive roots within ``roots``."""
        return np.arange(self.num_positive)

    @property
    def positive_coords(self) -> np.ndarray:
        return self.roots[: self.num_positive]

    @property
    def positive_multiplicities(self) -> np.ndarray:
        return self.multiplicities[: self.num_positive]

    def positive_values(self, h) -> np.ndarray:
        """Evaluate every positive root on coordinate vector(s) h."""
        h = np.asarray(h, dtype=float)
        return h @ self.positive_coords.T  # (..., num_positive)

    @property
    def sum_multiplicity(self) -> int:
        return int(self.positive_multiplicities.sum())


# ---------------------------------------------------------------------------
# restricted roots via joint ad-eigendecomposition
# ---------------------------------------------------------------------------

def _ad_matrices(family: GroupFamily, basis_a: np.ndarray) -> np.ndarray:
    """ad(H_i) as symmetric matrices in the orthonormal algebra basis."""
    basis = family.basis_g
    d = len(basis)
    out = np.empty((len(basis_a), d, d))
    for i, h in enumerate(basis_a):
        br = h[None] @ basis - basis @ h[None]  # (d, s, s)
        out[i] = np.tensordot(basis, br, axes=([1, 2], [1, 2]))
    return out


def _generic_combination(rank: int) -> np.ndarray:
    # fixed irrational ratios keep distinct roots from colliding on H*
    return 1.0 / (np.arange(rank) + np.sqrt(2.0))


def _cluster(sorted_vals: np.ndarray, tol: float) -> list[tuple[int, int]]:
    spans, start = [], 0
    for i in range(1, len(sorted_vals) + 1):
        if i == len(sorted_vals) or sorted_vals[i] - sorted_vals[i - 1] > tol:
            spans.append((start, i))
            start = i
    return spans


def restricted_roots(family: GroupFamily, frame: CartanFrame) -> RootSystem:
    """Joint eigendecomposition of {ad(H_i)} into restricted root spaces.

    Populates ``frame.root_vectors`` with orthonormal bases of the positive
    root spaces and returns the full root system (including the Weyl group
    closure).  Raises :class:`DegeneracyError` if an eigenvalue cluster of the
    generic combination fails to be a joint eigenspace of every ad(H_i).
    """
    ads = _ad_matrices(family, frame.basis_a)
    rank, d = len(frame.basis_a), family.d_G
    hstar = np.tensordot(_generic_combination(rank), ads, axes=(0, 0))
    vals, vecs = np.linalg.eigh(hstar)

    roots, mults, vector_blocks = [], [], []
    for lo, hi in _cluster(vals, CLUSTER_TOL):
        block = vecs[:, lo:hi]
        beta = hi - lo
        lam = np.empty(rank)
        for i in range(rank):
            r = block.T @ ads[i] @ block
            lam[i] = np.trace(r) / beta
            residual = np.linalg.norm(r - lam[i] * np.eye(beta))
            if residual > CLUSTER_TOL:
                raise DegeneracyError(
                    "ad-eigenvalue cluster is not a joint eigenspace "
                    "(two distinct roots within clustering tolerance)",
                    diagnostics={
                        "cluster_eigenvalue": float(vals[lo]),
                        "cluster_dim": beta,
                        "direction": i,
                        "residual": float(residual),
                    },
                )
        if np.linalg.norm(lam) <= CLUSTER_TOL:
            continue  # centralizer of a: handled by centralizer_m
        roots.append(lam)
        mults.append(beta)
        vector_blocks.append(np.tensordot(block.T, family.basis_g, axes=(1, 0)))

    # positive = first nonzero coordinate positive (lexicographic)
    pos_idx = []
    for i, lam in enumerate(roots):
        nz = lam[np.abs(lam) > CLUSTER_TOL]
        if nz.size and nz[0] > 0:
            pos_idx.append(i)
    neg_of = {}
    for p in pos_idx:
        matches = [i for i, lam in enumerate(roots)
                   if np.linalg.norm(lam + roots[p]) < CLUSTER_TOL]
        if len(matches) != 1 or mults[matches[0]] != mults[p]:
            raise InternalError("root negation symmetry violated")
        neg_of[p] = matches[0]
    if 2 * len(pos_idx) != len(roots):
        raise InternalError("positive system does not split the root set in half")

    ordered = sorted(pos_idx, key=lambda i: tuple(-np.round(roots[i], 12)))
    all_roots = [roots[i] for i in ordered] + [roots[neg_of[i]] for i in ordered]
    all_mults = [mults[i] for i in ordered] + [mults[neg_of[i]] for i in ordered]

    system = RootSystem(
        roots=np.array(all_roots) if all_roots else np.zeros((0, rank)),
        multiplicities=np.array(all_mults, dtype=int),
        num_positive=len(ordered),
        weyl_elements=np.zeros((0, rank, rank)),
        weyl_order=0,
    )
    system.weyl_elements, system.weyl_order = weyl_group(family, system)

    frame.root_vectors.clear()
    for p, i in enumerate(ordered):
        frame.root_vectors[p] = vector_blocks[i]
    return system


def centralizer_m(family: GroupFamily, frame: CartanFrame) -> np.ndarray:
    """Orthonormal basis of the a-centralizer inside the compact part."""
    if family.d_K == 0:
        return np.zeros((0, family.size, family.size))
    rows = []
    for h in frame.basis_a:
        br = frame.basis_k @ h[None] - h[None] @ frame.basis_k  # (d_K, s, s)
        rows.append(br.reshape(family.d_K, -1).T)               # map k -> g entries
    stacked = np.concatenate(rows, axis=0)                      # (rank*s^2, d_K)
    u, s, vt = np.linalg.svd(stacked)
    null = vt[s.size:].tolist() if stacked.shape[0] < family.d_K else []
    null.extend(vt[i] for i in range(s.size) if s[i] < 1e-10)
    if not null:
        return np.zeros((0, family.size, family.size))
    coords = np.array(null)
    return np.tensordot(coords, frame.basis_k, axes=(1, 0))


def root_space_split(frame: CartanFrame, root_index: int, j: int) -> tuple[np.ndarray, np.ndarray]:
    """Theta-symmetrized pair (xi + theta xi, xi - theta xi) of a root vector."""
    try:
        xi = frame.root_vectors[root_index][j]
    except (KeyError, IndexError) as exc:
        raise ConfigurationError(f"no stored root vector at ({root_index}, {j})") from exc
    theta_xi = -xi.T
    return xi + theta_xi, xi - theta_xi


def weyl_group(family: GroupFamily, system: RootSystem) -> tuple[np.ndarray, int]:
    """Close the set of root reflections under composition.

    Reflections act on basis_a coordinates; the trace form is positive
    definite there, so the dual of a root is its own coordinate vector.
    """
    rank = system.rank
    gens = []
    for lam in system.positive_coords:
        c = lam / np.linalg.norm(lam)
        gens.append(np.eye(rank) - 2.0 * np.outer(c, c))
    elements = [np.eye(rank)]
    seen = {tuple(np.round(np.eye(rank), 8).ravel())}
    queue = [np.eye(rank)]
    while queue:
        w = queue.pop(0)
        for s in gens:
            cand = s @ w
            key = tuple(np.round(cand, 8).ravel())
            if key not in seen:
                seen.add(key)
                elements.append(cand)
                queue.append(cand)
                if len(elements) > WEYL_CLOSURE_BOUND:
                    raise InternalError("Weyl closure exceeded safety bound")
    return np.array(elements), len(elements)


def cartan_frame(family: GroupFamily) -> tuple[CartanFrame, RootSystem]:
    """Assemble the full frame (k, p, a, m, l, b + root vectors) and root system."""
    basis_a = maximal_abelian(family)
    frame = CartanFrame(
        basis_k=family.basis_k,
        basis_p=family.basis_p,
        basis_a=basis_a,
        a_is_diagonal=bool(np.all([np.allclose(h, np.diag(np.diag(h))) for h in basis_a])),
    )
    system = restricted_roots(family, frame)
    frame.basis_m = centralizer_m(family, frame)
    ls, bs = [], []
    for p in range(system.num_positive):
        for j in range(len(frame.root_vectors[p])):
            plus, minus = root_space_split(frame, p, j)
            ls.append(plus / np.sqrt(2.0))
            bs.append(minus / np.sqrt(2.0))
    shape = (0, family.size, family.size)
    frame.basis_l = np.array(ls) if ls else np.zeros(shape)
    frame.basis_b = np.array(bs) if bs else np.zeros(shape)
    return frame, system


# ---------------------------------------------------------------------------
# exponentials on the abelian slice
# ---------------------------------------------------------------------------

def exp_a(frame: CartanFrame, h) -> np.ndarray:
    """exp of the abelian element with coordinates h (exact on diagonals)."""
    h = np.asarray(h, dtype=float)
    x = np.tensordot(h, frame.basis_a, axes=(0, 0))
    if frame.a_is_diagonal:
        return np.diag(np.exp(np.diag(x)))
    if frame.rank == 1:
        # single boost generator: exp(t B) = I + sinh(t) B + (cosh(t)-1) B^2
        # with B the unnormalized generator, B^3 = B
        u = frame.basis_a[0]
        t = float(h[0]) / np.sqrt(2.0)
        b = u * np.sqrt(2.0)
        return np.eye(x.shape[0]) + np.sinh(t) * b + (np.cosh(t) - 1.0) * (b @ b)
    from scipy.linalg import expm  # pragma: no cover - no such family yet

    return expm(x)  # pragma: no cover


def algebra_element(family: GroupFamily, coords) -> np.ndarray:
    """Algebra element with the given coordinates in the orthonormal basis."""
    coords = np.asarray(coords, dtype=float)
    return np.tensordot(coords, family.basis_g, axes=(-1, 0))


# ---------------------------------------------------------------------------
# structure checks
# ---------------------------------------------------------------------------

def _all_root_vectors(frame: CartanFrame, system: RootSystem):
    """(coords, vectors) for every root, negatives realized via theta."""
    coords, vecs = [], []
    for p in range(system.num_positive):
        for v in frame.root_vectors[p]:
            coords.append(system.roots[p])
            vecs.append(v)
    for p in range(system.num_positive):
        for v in frame.root_vectors[p]:
            coords.append(-system.roots[p])
            vecs.append(-v.T)
    return np.array(coords), np.array(vecs)


def structure_checks(
    family: GroupFamily,
    frame: CartanFrame,
    system: RootSystem,
    samples: int = 200,
    rng: np.random.Generator | None = None,
) -> dict[str, float]:
    """Numeric residuals for the classical root-space structure facts.

    Returns a dict of max residuals: orthonormal completeness of the
    root-space decomposition, bracket grading [g_l, g_m] in g_{l+m},
    trace-form orthogonality of non-opposite root spaces, theta mapping
    g_l onto g_{-l}, and the orthogonal split of the ad-kernel into a + m.
    """
    rng = rng or np.random.default_rng(0)
    coords, vecs = _all_root_vectors(frame, system)
    report: dict[str, float] = {}

    # (i) g = (a + m) + sum of root spaces, orthonormally
    full = np.concatenate([frame.basis_m, frame.basis_a, vecs]) if len(vecs) else \
        np.concatenate([frame.basis_m, frame.basis_a])
    flat = full.reshape(len(full), -1)
    gram = flat @ flat.T
    res = float(np.abs(gram - np.eye(len(full))).max()) if len(full) == family.d_G else 1.0
    report["decomposition"] = res

    # span lookup for projections
    zero_span = np.concatenate([frame.basis_m, frame.basis_a]).reshape(-1, family.size ** 2)

    def project_residual(w, target_coords):
        wf = w.ravel()
        if target_coords is None:           # must vanish
            return float(np.linalg.norm(wf))
        if np.linalg.norm(target_coords) < CLUSTER_TOL:
            span = zero_span
        else:
            mask = np.linalg.norm(coords - target_coords, axis=1) < CLUSTER_TOL
            if not mask.any():
                return float(np.linalg.norm(wf))
            span = vecs[mask].reshape(-1, family.size ** 2)
        return float(np.linalg.norm(wf - span.T @ (span @ wf)))

    # (ii) bracket grading on sampled pairs + trace-form orthogonality
    n_vec = len(vecs)
    bracket_res, b_orth = 0.0, 0.0
    if n_vec:
        pairs = [(a, b) for a in range(n_vec) for b in range(n_vec)]
        if len(pairs) > samples:
            pick = rng.choice(len(pairs), size=samples, replace=False)
            pairs = [pairs[i] for i in pick]
        is_root = lambda c: bool((np.linalg.norm(coords - c, axis=1) < CLUSTER_TOL).any())
        for a, b in pairs:
            lam, gam = coords[a], coords[b]
            w = vecs[a] @ vecs[b] - vecs[b] @ vecs[a]
            target = lam + gam
            if np.linalg.norm(target) < CLUSTER_TOL:
                bracket_res = max(bracket_res, project_residual(w, np.zeros_like(lam)))
            elif is_root(target):
                bracket_res = max(bracket_res, project_residual(w, target))
            else:
                bracket_res = max(bracket_res, project_residual(w, None))
            if np.linalg.norm(lam + gam) > CLUSTER_TOL:  # non-opposite pair
                b_orth = max(b_orth, abs(float(np.trace(vecs[a] @ vecs[b]))))
    report["bracket"] = bracket_res
    report["b_orthogonality"] = b_orth

    # (iii) theta maps each root space onto the negated root's space
    ads = _ad_matrices(family, frame.basis_a)
    theta_res = 0.0
    for p in range(system.num_positive):
        lam = system.roots[p]
        for v in frame.root_vectors[p]:
            tv = -v.T
            for i, h in enumerate(frame.basis_a):
                lhs = h @ tv - tv @ h
                theta_res = max(theta_res, float(np.linalg.norm(lhs + lam[i] * tv)))
    report["theta_flip"] = theta_res

    # (iv) ad-kernel = a + m orthogonally
    rank = len(frame.basis_a)
    dim0 = rank + len(frame.basis_m)
    sv = np.linalg.svd(ads.reshape(-1, family.d_G), compute_uv=False)
    null_count = int(np.sum(sv < 1e-10))
    g0 = np.concatenate([frame.basis_a, frame.basis_m]).reshape(dim0, -1)
    gram0 = g0 @ g0.T
    res0 = float(np.abs(gram0 - np.eye(dim0)).max())
    if null_count != dim0:
        res0 = max(res0, 1.0)
    report["g0_split"] = res0
    return report


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def roots_to_json(family: GroupFamily, frame: CartanFrame, system: RootSystem) -> dict:
    """JSON document with the root table and dimension ledger."""
    return {
        "schema": 1,
        "family": family.tag,
        "n": family.n,
        "roots": [
            {
                "coords": [float(c) for c in system.roots[p]],
                "multiplicity": int(system.multiplicities[p]),
            }
            for p in range(system.num_positive)
        ],
        "weyl_order": int(system.weyl_order),
        "dims": {
            "g": family.d_G,
            "k": family.d_K,
            "p": family.d_G - family.d_K,
            "a": int(frame.rank),
            "m": int(len(frame.basis_m)),
            "l": int(len(frame.basis_l)),
            "b": int(len(frame.basis_b)),
        },
    }
