"""Random coherence-block perturbations of the sender states and the
Monte-Carlo study of their effect on the concurrence.

Each sample perturbs the three coherence blocks independently:
off-diagonal entries get modulus uniform in [0, 1] and phase uniform in
[0, 2*pi); the zero-order diagonal gets uniform [-1, 1] draws recentered
to zero trace.  The perturbed sender is kept only if it remains positive
semidefinite (rejection sampling with reported rejection counts).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .concurrence import wootters_concurrence
from .errors import BlockscaleError, OutOfDomainError
from .family import grid_points, receiver_matrix, sender_matrix
from .qmat import PSD_TOL

# total-draw budget per grid point, as a multiple of n_samples; points
# where positivity rejects more than ~99.8% of draws come back short
ATTEMPT_FACTOR = 500

# order-(+1) positions of a two-qubit matrix, drawn in this fixed order
_ORDER1_POSITIONS = ((0, 1), (0, 2), (1, 3), (2, 3))


@dataclass(frozen=True)
class PerturbationSample:
    """One random perturbation: zero-order Hermitian traceless block and
    the Hermitian +-1 and +-2 order pair blocks."""

    sigma0: np.ndarray
    sigma1_pair: np.ndarray
    sigma2_pair: np.ndarray


def _random_entry(rng):
    modulus = rng.uniform(0.0, 1.0)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    return modulus * np.exp(1j * phase)


def sample_perturbation(rng):
    """Draw one PerturbationSample from ``rng`` (a numpy Generator)."""
    sigma0 = np.zeros((4, 4), dtype=complex)
    e = _random_entry(rng)
    sigma0[1, 2] = e
    sigma0[2, 1] = np.conj(e)
    diag = rng.uniform(-1.0, 1.0, size=4)
    sigma0[np.arange(4), np.arange(4)] = diag - diag.mean()

    sigma1 = np.zeros((4, 4), dtype=complex)
    for r, c in _ORDER1_POSITIONS:
        sigma1[r, c] = _random_entry(rng)
    sigma1_pair = sigma1 + sigma1.conj().T

    sigma2 = np.zeros((4, 4), dtype=complex)
    sigma2[0, 3] = _random_entry(rng)
    sigma2_pair = sigma2 + sigma2.conj().T

    return PerturbationSample(
        sigma0=sigma0, sigma1_pair=sigma1_pair, sigma2_pair=sigma2_pair
    )


def perturbation_matrix(f, c1, c2, p):
    """The combined sender perturbation for a family: the zero-order
    block plus the order-pair blocks weighted by the transferred
    parameters (blocks absent from the case are dropped)."""
    sigma = p.sigma0.copy()
    if f.has_order1:
        sigma += c1 * p.sigma1_pair
    if f.has_order2:
        sigma += c2 * p.sigma2_pair
    return sigma


def perturbed_sender(f, c1, c2, p, eps):
    """Perturbed sender state; raises OutOfDomainError when the draw
    breaks positivity (callers resample)."""
    m = sender_matrix(f, c1, c2) + eps * perturbation_matrix(f, c1, c2, p)
    w = np.linalg.eigvalsh(m)
    if w[0] < -PSD_TOL:
        raise OutOfDomainError(
            "perturbed sender lost positivity", min_eigenvalue=float(w[0])
        )
    return m


def perturbed_receiver(transfer, f, c1, c2, p, eps):
    """Image of the perturbed sender under the transfer supermatrix."""
    return transfer.apply(perturbed_sender(f, c1, c2, p, eps))


@dataclass(frozen=True)
class MCStudyConfig:
    """Settings of one Monte-Carlo perturbation study."""

    family: object
    epsilon_set: tuple
    n_samples: int
    resolution: int
    seed: int
    shared_sigma: bool = False

    def __post_init__(self):
        if self.n_samples < 1:
            raise BlockscaleError("n_samples must be >= 1")
        if any(e < 0 for e in self.epsilon_set):
            raise BlockscaleError("epsilons must be nonnegative")


DEFAULT_EPSILONS_1D = (0.0125, 0.025, 0.05, 0.1, 0.2, 1.0)
DEFAULT_EPSILONS_2D = (0.0125, 0.025, 0.05, 0.1, 0.2, 0.5)
DEFAULT_SAMPLES_1D = 5000
DEFAULT_SAMPLES_2D = 1000


def default_epsilons(f):
    return DEFAULT_EPSILONS_2D if (f.has_order1 and f.has_order2) else DEFAULT_EPSILONS_1D


def default_samples(f):
    return DEFAULT_SAMPLES_2D if (f.has_order1 and f.has_order2) else DEFAULT_SAMPLES_1D


@dataclass
class MCGrid:
    """Mean concurrences over the parameter grid for one perturbation
    amplitude."""

    epsilon: float
    c1: np.ndarray
    c2: np.ndarray
    mean_sender: np.ndarray
    stderr_sender: np.ndarray
    mean_receiver: np.ndarray
    stderr_receiver: np.ndarray
    rejections: np.ndarray
    accepted: np.ndarray


@dataclass
class MCResult:
    config: MCStudyConfig
    grids: list


def _sample_rng(seed, eps_index, point_index, sample_index):
    return np.random.default_rng(
        np.random.SeedSequence((seed, eps_index, point_index, sample_index))
    )


def _point_stats(cfg, transfer, pts, ei, eps, k):
    """Per-point Monte-Carlo accumulation; pure function of the config
    and indices, so the threaded and serial paths agree bit-for-bit.

    Collects up to n_samples accepted draws within a total budget of
    ATTEMPT_FACTOR * n_samples attempts.  Points that come back short
    report the mean over the accepted draws; points with no accepted
    draw at all report NaN means.  Returns
    (mean_s, err_s, mean_r, err_r, rejections, accepted).
    """
    f = cfg.family
    c1, c2 = pts[k]
    budget = ATTEMPT_FACTOR * cfg.n_samples
    cs = []
    cr = []
    n_rej = 0
    for s in range(cfg.n_samples):
        if cfg.shared_sigma:
            rng = _sample_rng(cfg.seed, ei, 0, s)
            check = pts
        else:
            rng = _sample_rng(cfg.seed, ei, k, s)
            check = ((c1, c2),)
        rho_s = None
        while n_rej + len(cs) < budget:
            p = sample_perturbation(rng)
            try:
                for pc1, pc2 in check:
                    perturbed_sender(f, pc1, pc2, p, eps)
                rho_s = perturbed_sender(f, c1, c2, p, eps)
                break
            except OutOfDomainError:
                n_rej += 1
        if rho_s is None:
            break
        cs.append(wootters_concurrence(rho_s))
        cr.append(wootters_concurrence(transfer.apply(rho_s)))
    n_acc = len(cs)
    if n_acc == 0:
        return np.nan, np.nan, np.nan, np.nan, n_rej, 0
    cs = np.asarray(cs)
    cr = np.asarray(cr)
    stderr = 1.0 / np.sqrt(n_acc) if n_acc > 1 else 0.0
    return (
        cs.mean(),
        cs.std(ddof=1) * stderr if n_acc > 1 else 0.0,
        cr.mean(),
        cr.std(ddof=1) * stderr if n_acc > 1 else 0.0,
        n_rej,
        n_acc,
    )


def mc_mean_concurrence(cfg, transfer, threads=1):
    """Mean concurrence (mean of per-sample concurrences) of the
    perturbed sender and receiver over the family grid, per epsilon.

    Deterministic for a fixed seed: every (epsilon, point, sample) draws
    from its own seeded substream and results are written back in fixed
    index order, so the output is independent of ``threads``.  Heavily
    rejecting points exhaust their draw budget and come back with fewer
    accepted samples (see ``MCGrid.accepted``); fully rejecting points
    report NaN means.
    """
    f = cfg.family
    pts = grid_points(f, cfg.resolution)
    grids = []
    for ei, eps in enumerate(cfg.epsilon_set):
        n_pts = len(pts)
        mean_s = np.zeros(n_pts)
        err_s = np.zeros(n_pts)
        mean_r = np.zeros(n_pts)
        err_r = np.zeros(n_pts)
        rej = np.zeros(n_pts, dtype=int)
        acc = np.zeros(n_pts, dtype=int)
        if eps == 0.0:
            acc[:] = cfg.n_samples
            for k, (c1, c2) in enumerate(pts):
                mean_s[k] = wootters_concurrence(sender_matrix(f, c1, c2))
                mean_r[k] = wootters_concurrence(receiver_matrix(f, c1, c2))
        elif threads > 1:
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(max_workers=threads) as ex:
                results = list(
                    ex.map(
                        lambda k: _point_stats(cfg, transfer, pts, ei, eps, k),
                        range(n_pts),
                    )
                )
            for k, row in enumerate(results):
                mean_s[k], err_s[k], mean_r[k], err_r[k], rej[k], acc[k] = row
        else:
            for k in range(n_pts):
                mean_s[k], err_s[k], mean_r[k], err_r[k], rej[k], acc[k] = _point_stats(
                    cfg, transfer, pts, ei, eps, k
                )
        grids.append(
            MCGrid(
                epsilon=eps,
                c1=np.array([p[0] for p in pts]),
                c2=np.array([p[1] for p in pts]),
                mean_sender=mean_s,
                stderr_sender=err_s,
                mean_receiver=mean_r,
                stderr_receiver=err_r,
                rejections=rej,
                accepted=acc,
            )
        )
    return MCResult(config=cfg, grids=grids)


@dataclass(frozen=True)
class Extrema:
    epsilon: float
    side: str
    c_min: float
    c_max: float
    argmin: tuple
    argmax: tuple


def extrema_scan(result):
    """Extrema of the mean concurrence over the grid, per epsilon and
    per side, with their (c1, c2) locations."""
    out = []
    for g in result.grids:
        for side, values in (("sender", g.mean_sender), ("receiver", g.mean_receiver)):
            if np.all(np.isnan(values)):
                raise BlockscaleError(
                    f"no point of the eps = {g.epsilon} grid has accepted samples"
                )
            i_min = int(np.nanargmin(values))
            i_max = int(np.nanargmax(values))
            out.append(
                Extrema(
                    epsilon=g.epsilon,
                    side=side,
                    c_min=float(values[i_min]),
                    c_max=float(values[i_max]),
                    argmin=(float(g.c1[i_min]), float(g.c2[i_min])),
                    argmax=(float(g.c1[i_max]), float(g.c2[i_max])),
                )
            )
    return out
