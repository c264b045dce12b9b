"""Invariant-measure machinery: Haar sampling on K, chamber quadrature,
and a chart-based direct-integration oracle for the group volume.

Two charts are provided.  ``chart`` is a product of one-parameter
exponentials over the whole orthonormal algebra frame (coordinates of the
second kind); its volume density ``chart_volume_density`` realizes the
left-invariant volume element locally.  The direct integration oracle uses
the *polar* chart (k, y) -> k exp(sum y_i P_i) over K x R^{dim p}, which is a
bijection onto the group: the compact factor is sampled exactly from Haar
measure and only the symmetric coordinates need importance weights, so the
estimator has finite variance for decaying integrands (a Gaussian proposal
on all frame coordinates would see the compact directions' translation
invariance and diverge).  In both charts the density is sqrt(det Gram) of
the left-translated coordinate frame with central finite-difference
derivatives; neither touches the KAK reduction, so they are the independent
side of every verification.

Sampling and quadrature evaluation are embarrassingly parallel; callers that
parallelize must use independent generator streams per worker.  Within one
call, chunked reduction order is fixed so results are reproducible bit for
bit from the seed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigurationError, RangeError
from .liecore import CartanFrame, GroupFamily, RootSystem, exp_a

FD_STEP = 1e-6          # central-difference step for the chart frame pullbacks
CHUNK = 32768           # fixed chunk size; part of the determinism contract
TAIL_RATIO = 1e-8       # default truncation solves the calibrator tail below this


# ---------------------------------------------------------------------------
# Haar sampling on the maximal compact subgroup
# ---------------------------------------------------------------------------

def _haar_orthogonal(rng: np.random.Generator, m: int, n: int, special: bool) -> np.ndarray:
    a = rng.standard_normal((m, n, n))
    q, r = np.linalg.qr(a)
    d = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    d[d == 0] = 1.0
    q = q * d[:, None, :]
    if special:
        neg = np.linalg.det(q) < 0
        q[neg, :, -1] *= -1.0
    return q


def _haar_unitary(rng: np.random.Generator, m: int, n: int) -> np.ndarray:
    a = rng.standard_normal((m, n, n)) + 1j * rng.standard_normal((m, n, n))
    q, r = np.linalg.qr(a)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    ph = d / np.abs(d)
    return q * ph[:, None, :]


def _realify_batch(z: np.ndarray) -> np.ndarray:
    m, n = z.shape[0], z.shape[1]
    out = np.zeros((m, 2 * n, 2 * n))
    out[:, :n, :n] = z.real
    out[:, n:, n:] = z.real
    out[:, :n, n:] = -z.imag
    out[:, n:, :n] = z.imag
    return out


def haar_sample_compact(
    family: GroupFamily, rng: np.random.Generator, size: int | None = None
) -> np.ndarray:
    """Haar-distributed element(s) of K via sign-normalized QR.

    Returns one matrix, or a stack of ``size`` matrices.
    """
    m = 1 if size is None else int(size)
    if family.tag == "GL-real":
        k = _haar_orthogonal(rng, m, family.n, special=False)
    elif family.tag == "SL-real":
        k = _haar_orthogonal(rng, m, family.n, special=True)
    elif family.tag == "GL-complex-as-real":
        k = _realify_batch(_haar_unitary(rng, m, family.n))
    else:  # LorentzSO0: rotations fixing the time axis
        k = np.zeros((m, family.size, family.size))
        k[:, 0, 0] = 1.0
        if family.n >= 2:
            k[:, 1:, 1:] = _haar_orthogonal(rng, m, family.n, special=True)
        else:
            k[:, 1, 1] = 1.0  # SO(1) is trivial
    return k[0] if size is None else k


# ---------------------------------------------------------------------------
# chamber quadrature
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class ChamberQuadrature:
    """Tensor Gauss-Legendre nodes filtered to the closed positive chamber."""

    nodes: np.ndarray       # (count, rank)
    weights: np.ndarray     # (count,)
    truncation: np.ndarray  # (rank, 2) per-coordinate bounds
    order: int

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"h{i}" for i in range(self.nodes.shape[1])] + ["weight"])
            for node, w in zip(self.nodes, self.weights):
                writer.writerow([repr(float(c)) for c in node] + [repr(float(w))])


def _normalize_truncation(truncation, rank: int) -> np.ndarray:
    arr = np.asarray(truncation, dtype=float)
    if arr.ndim == 0:
        if not np.isfinite(arr) or arr <= 0:
            raise ConfigurationError("scalar truncation must be finite and positive")
        return np.array([[-float(arr), float(arr)]] * rank)
    if arr.shape != (rank, 2):
        raise ConfigurationError(f"truncation must be a scalar or shape ({rank}, 2)")
    if not np.all(np.isfinite(arr)) or np.any(arr[:, 0] >= arr[:, 1]):
        raise ConfigurationError("truncation bounds must be finite with lo < hi")
    return arr


def _tensor_rule(box: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(int(order))
    axes_x, axes_w = [], []
    for lo, hi in box:
        axes_x.append(0.5 * (hi - lo) * x + 0.5 * (hi + lo))
        axes_w.append(0.5 * (hi - lo) * w)
    grids = np.meshgrid(*axes_x, indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    wgrids = np.meshgrid(*axes_w, indexing="ij")
    weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
    return nodes, weights


def chamber_quadrature(system: RootSystem, truncation, order: int) -> ChamberQuadrature:
    """Gauss-Legendre grid on the truncation box, filtered to the chamber.

    Filtering makes the effective integrand discontinuous across chamber
    walls interior to the box, so convergence is only algebraic there; use
    :func:`chamber_cone_quadrature` when spectral accuracy matters.
    """
    if order < 2:
        raise ConfigurationError("quadrature order must be >= 2")
    rank = system.rank
    box = _normalize_truncation(truncation, rank)
    nodes, weights = _tensor_rule(box, order)
    if system.num_positive:
        keep = system.positive_values(nodes).min(axis=1) >= 0.0
        nodes, weights = nodes[keep], weights[keep]
    if nodes.shape[0] == 0:
        raise ConfigurationError("truncation box does not meet the positive chamber")
    return ChamberQuadrature(nodes=nodes, weights=weights, truncation=box, order=int(order))


def _simple_root_indices(system: RootSystem) -> list[int]:
    """Positive roots that are not sums of two positive roots."""
    pos = system.positive_coords
    out = []
    for i, lam in enumerate(pos):
        decomposable = False
        for j in range(len(pos)):
            for k in range(j, len(pos)):
                if np.linalg.norm(pos[j] + pos[k] - lam) < 1e-9:
                    decomposable = True
        if not decomposable:
            out.append(i)
    return out


def cone_coordinate_map(system: RootSystem) -> tuple[np.ndarray, int]:
    """Linear map from cone coordinates onto the chamber.

    Returns (M, k): columns of M are first the k dual directions of the
    simple roots (so u_i >= 0 keeps every positive root nonnegative), then an
    orthonormal basis of the root-orthogonal center.  For a single simple
    root the dual column is normalized, so cone and natural coordinates agree.
    """
    rank = system.rank
    if system.num_positive == 0:
        return np.eye(rank), 0
    simple = _simple_root_indices(system)
    a = system.positive_coords[simple]                 # (k, rank)
    duals = a.T @ np.linalg.inv(a @ a.T)               # (rank, k)
    if len(simple) == 1:
        duals = duals / np.linalg.norm(duals[:, 0])
    _, sv, vt = np.linalg.svd(a)
    center = vt[len(simple):].T                        # (rank, rank - k)
    m = np.concatenate([duals, center], axis=1)
    return m, len(simple)


def chamber_cone_quadrature(system: RootSystem, truncation, order: int) -> ChamberQuadrature:
    """Gauss-Legendre rule on a chamber-adapted parallelepiped (no filtering).

    Tensor grid in cone coordinates: [0, T_i] along each simple-root dual
    direction, [-T_j, T_j] along the center directions; nodes are mapped
    linearly into the chamber and weights carry the map's volume factor.
    Integrands smooth on the chamber integrate at spectral accuracy, which
    the box-filtered rule cannot achieve across interior walls.
    """
    if order < 2:
        raise ConfigurationError("quadrature order must be >= 2")
    rank = system.rank
    m, n_simple = cone_coordinate_map(system)
    box = _normalize_truncation(truncation, rank)
    if np.isscalar(truncation) or np.ndim(truncation) == 0:
        # scalar half-width: extent T along every cone direction
        scale = np.linalg.norm(m, axis=0)
        box = np.array([[0.0, float(truncation) / scale[i]] if i < n_simple
                        else [-float(truncation) / scale[i], float(truncation) / scale[i]]
                        for i in range(rank)])
    else:
        box = box.copy()
        box[:n_simple, 0] = np.maximum(box[:n_simple, 0], 0.0)
    u_nodes, weights = _tensor_rule(box, order)
    nodes = u_nodes @ m.T
    weights = weights * abs(float(np.linalg.det(m)))
    if system.num_positive:
        worst = float(system.positive_values(nodes).min())
        if worst < -1e-12:
            raise ConfigurationError("cone construction left the chamber")
    return ChamberQuadrature(nodes=nodes, weights=weights, truncation=box,
                             order=int(order))


# ---------------------------------------------------------------------------
# chart and volume density
# ---------------------------------------------------------------------------

class _ChartCache:
    """Per-family eigendecompositions for batched one-parameter exponentials."""

    def __init__(self, family: GroupFamily):
        self.size = family.size
        self.eig = []
        for x in family.basis_g:
            # basis elements are symmetric or skew, hence normal; diagonalize
            # i*X or X as Hermitian and keep a unified complex form
            if np.allclose(x, x.T):
                vals, vecs = np.linalg.eigh(x)
                self.eig.append((vecs.astype(complex), vals.astype(complex)))
            else:
                vals, vecs = np.linalg.eigh(1j * x)
                self.eig.append((vecs, -1j * vals))
        self.step_plus = [self._one(i, FD_STEP) for i in range(len(self.eig))]
        self.step_minus = [self._one(i, -FD_STEP) for i in range(len(self.eig))]

    def _one(self, i: int, t: float) -> np.ndarray:
        u, ev = self.eig[i]
        return np.real(u @ np.diag(np.exp(t * ev)) @ u.conj().T)

    def one_param(self, i: int, t: np.ndarray) -> np.ndarray:
        """exp(t_n * X_i) for a batch of scalars t."""
        u, ev = self.eig[i]
        with np.errstate(over="ignore"):  # overflow -> inf, caught by callers
            phases = np.exp(t[:, None] * ev[None, :])
        return np.real(np.einsum("ab,nb,cb->nac", u, phases, u.conj()))


_CHART_CACHES: dict[tuple[str, int], _ChartCache] = {}


def _chart_cache(family: GroupFamily) -> _ChartCache:
    key = (family.tag, family.n)
    if key not in _CHART_CACHES:
        _CHART_CACHES[key] = _ChartCache(family)
    return _CHART_CACHES[key]


def chart(family: GroupFamily, x) -> np.ndarray:
    """Product of one-parameter exponentials over the frame, in fixed order."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    xs = x[None] if single else x
    cache = _chart_cache(family)
    g = np.broadcast_to(np.eye(family.size), (xs.shape[0], family.size, family.size)).copy()
    for i in range(family.d_G):
        g = g @ cache.one_param(i, xs[:, i])
    return g[0] if single else g


def _volume_from_frame(frame_vectors: np.ndarray) -> np.ndarray:
    """sqrt(det Gram) via singular values (no condition-number squaring)."""
    m = frame_vectors.shape[0]
    density = np.full(m, np.nan)
    finite = np.isfinite(frame_vectors).all(axis=(1, 2))
    if finite.any():
        sv = np.linalg.svd(frame_vectors[finite], compute_uv=False)
        with np.errstate(divide="ignore"):
            density[finite] = np.exp(np.sum(np.log(sv), axis=1))
    return density


def _chart_and_density(family: GroupFamily, xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Chart points and left-invariant volume density for a batch of coordinates."""
    cache = _chart_cache(family)
    d, s = family.d_G, family.size
    m = xs.shape[0]
    factors = [cache.one_param(i, xs[:, i]) for i in range(d)]
    prefixes = [np.broadcast_to(np.eye(s), (m, s, s)).copy()]
    for i in range(d):
        prefixes.append(prefixes[-1] @ factors[i])
    suffixes = [None] * d
    suffixes[d - 1] = np.broadcast_to(np.eye(s), (m, s, s)).copy()
    for i in range(d - 2, -1, -1):
        suffixes[i] = factors[i + 1] @ suffixes[i + 1]
    g = prefixes[d]
    g_inv = np.linalg.inv(g)
    frame_vectors = np.empty((m, d, s * s))
    for i in range(d):
        # exp((x_i +/- eps) X_i) = exp(x_i X_i) exp(+/- eps X_i): one-parameter
        # factors of the same generator commute, so the stepped factor reuses
        # the precomputed constant exponentials
        stepped_plus = factors[i] @ cache.step_plus[i]
        stepped_minus = factors[i] @ cache.step_minus[i]
        gp = prefixes[i] @ stepped_plus @ suffixes[i]
        gm = prefixes[i] @ stepped_minus @ suffixes[i]
        v = g_inv @ ((gp - gm) / (2.0 * FD_STEP))
        frame_vectors[:, i, :] = v.reshape(m, s * s)
    return g, _volume_from_frame(frame_vectors)


def chart_volume_density(family: GroupFamily, x) -> float | np.ndarray:
    """sqrt(det Gram) of the left-translated chart frame; 1 at the origin."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    xs = x[None] if single else x
    _, density = _chart_and_density(family, xs)
    if not np.all(np.isfinite(density)):
        raise RangeError("volume density overflowed at an extreme chart coordinate")
    return float(density[0]) if single else density


# ---------------------------------------------------------------------------
# polar chart: Haar on K times a single exponential of the symmetric part
# ---------------------------------------------------------------------------

class _PolarCache:
    """Constant exponentials of the compact generators for the frame pullback."""

    def __init__(self, family: GroupFamily):
        from scipy.linalg import expm

        self.step_k = [
            (expm(FD_STEP * eta), expm(-FD_STEP * eta)) for eta in family.basis_k
        ]


_POLAR_CACHES: dict[tuple[str, int], _PolarCache] = {}


def _polar_cache(family: GroupFamily) -> _PolarCache:
    key = (family.tag, family.n)
    if key not in _POLAR_CACHES:
        _POLAR_CACHES[key] = _PolarCache(family)
    return _POLAR_CACHES[key]


def _expm_sym(x: np.ndarray) -> np.ndarray:
    """Batched exponential of symmetric matrices via eigendecomposition."""
    vals, vecs = np.linalg.eigh(x)
    with np.errstate(over="ignore"):  # overflow -> inf, caught by callers
        return np.einsum("nab,nb,ncb->nac", vecs, np.exp(vals), vecs)


def polar_point(family: GroupFamily, k: np.ndarray, y: np.ndarray) -> np.ndarray:
    """g = k exp(sum y_i P_i) over the symmetric frame; bijective in (k, y)."""
    x = np.tensordot(np.atleast_2d(y), family.basis_p, axes=(-1, 0))
    return k @ _expm_sym(x)


def polar_density(family: GroupFamily, y) -> np.ndarray:
    """Volume density of the invariant measure in polar coordinates.

    Density of dg relative to (probability Haar on K) x (Lebesgue in y);
    independent of k by left invariance.  Computed as sqrt(det Gram) of the
    left-translated coordinate frame, with all derivatives taken by central
    finite differences of the chart map.
    """
    y = np.atleast_2d(np.asarray(y, dtype=float))
    m, d_p = y.shape
    if d_p != len(family.basis_p):
        raise ConfigurationError(f"expected {len(family.basis_p)} polar coordinates")
    cache = _polar_cache(family)
    s = family.size
    x = np.tensordot(y, family.basis_p, axes=(-1, 0))
    e_pos = _expm_sym(x)
    e_neg = _expm_sym(-x)
    d = family.d_G
    frame_vectors = np.empty((m, d, s * s))
    for j, (cp, cm) in enumerate(cache.step_k):
        v = e_neg @ ((cp - cm) / (2.0 * FD_STEP)) @ e_pos
        frame_vectors[:, j, :] = v.reshape(m, s * s)
    for i in range(d_p):
        xp = x + FD_STEP * family.basis_p[i]
        xm = x - FD_STEP * family.basis_p[i]
        v = e_neg @ ((_expm_sym(xp) - _expm_sym(xm)) / (2.0 * FD_STEP))
        frame_vectors[:, family.d_K + i, :] = v.reshape(m, s * s)
    return _volume_from_frame(frame_vectors)


# ---------------------------------------------------------------------------
# direct Monte Carlo integration over the group
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class MCEstimate:
    """Importance-sampling estimate with its standard error."""

    value: float
    stderr: float
    n_samples: int
    ess: float
    warning: str | None = None


def mc_direct_integral(
    family: GroupFamily,
    f,
    proposal_scale: float,
    n_samples: int,
    rng: np.random.Generator,
) -> MCEstimate | list[MCEstimate]:
    """Estimate the invariant-measure integral of f over the group.

    Samples the compact factor exactly (Haar via QR) and the symmetric-part
    coordinates from an isotropic Gaussian of width ``proposal_scale``; the
    importance weight is the polar volume density over the Gaussian density.
    ``f`` may be one vectorized callable ``(m, size, size) -> (m,)`` or a
    sequence of them; a sequence is evaluated on shared samples and returns
    one estimate per callable.  The effective sample size is reported per
    integrand (weights |f| * density / proposal).
    """
    estimates, _ = mc_direct_suite(
        family, f if isinstance(f, (list, tuple)) else [f],
        proposal_scale, n_samples, rng)
    return estimates if isinstance(f, (list, tuple)) else estimates[0]


def mc_direct_suite(
    family: GroupFamily,
    fs,
    proposal_scale: float,
    n_samples: int,
    rng: np.random.Generator,
) -> tuple[list[MCEstimate], np.ndarray]:
    """Shared-sample direct estimates plus the covariance matrix of the means.

    The covariance is what shared sampling buys: downstream ratio statistics
    can account for the (typically strong) positive correlation between
    estimates of related integrands.
    """
    if n_samples < 1000:
        raise ConfigurationError("need at least 1e3 samples")
    if proposal_scale <= 0:
        raise ConfigurationError("proposal scale must be positive")
    d_p = len(family.basis_p)
    log_norm = -0.5 * d_p * np.log(2.0 * np.pi) - d_p * np.log(proposal_scale)

    count = len(fs)
    sums = np.zeros(count)
    cross = np.zeros((count, count))
    abs_sums = np.zeros(count)
    done = 0
    while done < n_samples:
        m = min(CHUNK, n_samples - done)
        k = haar_sample_compact(family, rng, m)
        y = rng.standard_normal((m, d_p)) * proposal_scale
        density = polar_density(family, y)
        if not np.all(np.isfinite(density)):
            raise RangeError("volume density overflowed during direct integration")
        g = polar_point(family, k, y)
        log_phi = -0.5 * np.sum(y * y, axis=1) / proposal_scale**2 + log_norm
        w = np.exp(np.log(density) - log_phi)
        vals = np.stack([np.asarray(fn(g), dtype=float) * w for fn in fs])
        sums += vals.sum(axis=1)
        cross += vals @ vals.T
        abs_sums += np.abs(vals).sum(axis=1)
        done += m

    means = sums / n_samples
    second = cross / n_samples
    cov_means = (second - np.outer(means, means)) / n_samples
    out = []
    for idx in range(count):
        var = max(float(second[idx, idx] - means[idx] ** 2), 0.0)
        denom = second[idx, idx]
        ess = abs_sums[idx] ** 2 / (denom * n_samples) if denom > 0 else float(n_samples)
        warning = None
        if ess < n_samples / 100:
            warning = f"poor proposal: effective sample size {ess:.1f} of {n_samples}"
        out.append(MCEstimate(
            value=float(means[idx]),
            stderr=float(np.sqrt(var / n_samples)),
            n_samples=n_samples,
            ess=float(ess),
            warning=warning,
        ))
    return out, cov_means


def write_samples_csv(path, coords: np.ndarray, density: np.ndarray) -> None:
    """One row per sample: chart coordinates and volume density."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{i}" for i in range(coords.shape[1])] + ["density"])
        for row, rho in zip(coords, density):
            writer.writerow([repr(float(c)) for c in row] + [repr(float(rho))])


# ---------------------------------------------------------------------------
# default truncation from the calibrator tail
# ---------------------------------------------------------------------------

def _calibrator_profile(frame: CartanFrame, h) -> float:
    a = exp_a(frame, np.asarray(h, dtype=float))
    a_inv = exp_a(frame, -np.asarray(h, dtype=float))
    return float(np.sum(a * a) + np.sum(a_inv * a_inv))


def default_truncation(frame: CartanFrame, system: RootSystem) -> float:
    """Smallest half-width where the calibrator boundary mass is negligible.

    Scans the scalar truncation parameter of the cone region and checks
    exp(-(S(h) - S(0))) * (1 + J(h)) on a deterministic sample of the region
    shell, where S is the squared Frobenius size of a and its inverse (the
    decay profile of the default calibrator).
    """
    from .density import jacobian  # local import avoids a cycle

    rank = len(frame.basis_a)
    base = _calibrator_profile(frame, np.zeros(rank))
    m, n_simple = cone_coordinate_map(system)
    rng = np.random.default_rng(0)
    shell = rng.uniform(0.0, 1.0, size=(64, rank))
    shell[:, n_simple:] = 2.0 * shell[:, n_simple:] - 1.0
    corners = np.array(np.meshgrid(
        *([[0.0, 1.0]] * n_simple + [[-1.0, 1.0]] * (rank - n_simple)),
        indexing="ij")).reshape(rank, -1).T
    probes = np.concatenate([corners, shell])
    # push onto the outer shell (some coordinate at its bound); the origin
    # corner is interior, not a boundary probe
    sup = np.abs(probes).max(axis=1)
    probes = probes[sup > 1e-12] / sup[sup > 1e-12, None]
    scale = np.linalg.norm(m, axis=0)

    for half_width in np.arange(0.75, 8.001, 0.25):
        worst = 0.0
        for p in probes:
            h = m @ (half_width * p / scale)
            ratio = np.exp(-(_calibrator_profile(frame, h) - base)) * (1.0 + jacobian(system, h))
            worst = max(worst, ratio)
        if worst < TAIL_RATIO:
            return float(half_width)
    return 8.0
