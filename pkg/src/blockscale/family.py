"""Embedded two-qubit state families and their parameter domains.

Each family record holds the 4x4 coherence-block templates, the block
scale factors, the transfer time and background field for one
(case, chain length) combination.  Sender states are
``e4 + T0 + c1*T1 + c2*T2`` and receiver states apply the scale factors
``lambda0, lambda1, lambda2`` to the respective blocks; ``e4`` is
diag(0,0,0,1), the fixed part of the zero-order block.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import numpy as np

from .concurrence import wootters_concurrence
from .errors import BlockscaleError, OutOfDomainError, UnknownFamilyError
from .qmat import PSD_TOL, ChainSpec, DensityMatrix

E4 = np.diag([0.0, 0.0, 0.0, 1.0]).astype(complex)
E4.setflags(write=False)

CASES = ("I", "II", "III", "IV")
CHAIN_LENGTHS = (6, 42)

_BOUNDARY_TOL = 1e-6
_RADIUS_CAP = 10.0


@dataclass(frozen=True)
class ScalableFamily:
    case_id: str
    n_sites: int
    template_fixed: np.ndarray
    template0: np.ndarray
    template1: np.ndarray | None
    template2: np.ndarray | None
    lambda0: float
    lambda1: float | None
    lambda2: float | None
    transfer_time: float
    b_field: float
    c1_max: float | None = None
    c2_max: float | None = None

    @property
    def chain_spec(self):
        return ChainSpec(
            n_sites=self.n_sites,
            coupling=1.0,
            b_field=self.b_field,
            transfer_time=self.transfer_time,
        )

    @property
    def has_order1(self):
        return self.template1 is not None

    @property
    def has_order2(self):
        return self.template2 is not None

    def scales(self):
        """Block scale factors as {order: factor}, absent orders omitted."""
        out = {}
        if self.lambda1 is not None:
            out[1] = self.lambda1
        if self.lambda2 is not None:
            out[2] = self.lambda2
        return out


def _template0_from_record(rec):
    d1, d2, d3 = rec["diag"]
    t = np.zeros((4, 4), dtype=complex)
    t[0, 0], t[1, 1], t[2, 2] = d1, d2, d3
    t[3, 3] = -(d1 + d2 + d3)
    a = rec["e23_imag"]
    t[1, 2] = 1j * a
    t[2, 1] = -1j * a
    return t


def _template1_from_record(rec):
    t = np.zeros((4, 4), dtype=complex)
    t[0, 1] = t[1, 0] = rec["e12"]
    t[0, 2] = 1j * rec["e13_imag"]
    t[2, 0] = -1j * rec["e13_imag"]
    t[1, 3] = 1j * rec["e24_imag"]
    t[3, 1] = -1j * rec["e24_imag"]
    t[2, 3] = t[3, 2] = rec["e34"]
    return t


def _template2():
    t = np.zeros((4, 4), dtype=complex)
    t[0, 3] = t[3, 0] = 1.0
    return t


@lru_cache(maxsize=None)
def _records():
    text = resources.files("blockscale.data").joinpath("families.json").read_text()
    return {(r["case"], r["n_sites"]): r for r in json.loads(text)}


@lru_cache(maxsize=None)
def load_family(case_id, n_sites):
    """Family data for one of the eight published (case, N) combinations."""
    rec = _records().get((case_id, n_sites))
    if rec is None:
        raise UnknownFamilyError(
            f"no data for case {case_id!r} with {n_sites} sites; "
            f"available: cases {CASES} at N in {CHAIN_LENGTHS}"
        )
    t1 = _template1_from_record(rec["template1"]) if rec["template1"] else None
    t2 = _template2() if rec["template2"] else None
    fam = ScalableFamily(
        case_id=case_id,
        n_sites=n_sites,
        template_fixed=E4,
        template0=_template0_from_record(rec["template0"]),
        template1=t1,
        template2=t2,
        lambda0=rec["lambda0"],
        lambda1=rec["lambda1"],
        lambda2=rec["lambda2"],
        transfer_time=rec["transfer_time"],
        b_field=rec["b_field"],
    )
    c1m = domain_boundary(fam, 0.0) if fam.has_order1 else None
    c2m = domain_boundary(fam, np.pi / 2) if fam.has_order2 else None
    object.__setattr__(fam, "c1_max", c1m)
    object.__setattr__(fam, "c2_max", c2m)
    return fam


def all_families():
    return [load_family(c, n) for c in CASES for n in CHAIN_LENGTHS]


def _combine(f, c1, c2, scale0, scale1, scale2):
    m = E4 + scale0 * f.template0
    if c1:
        if f.template1 is None:
            raise BlockscaleError(f"Case {f.case_id} has no order-1 block; c1 must be 0")
        m = m + scale1 * c1 * f.template1
    if c2:
        if f.template2 is None:
            raise BlockscaleError(f"Case {f.case_id} has no order-2 block; c2 must be 0")
        m = m + scale2 * c2 * f.template2
    return m


def sender_matrix(f, c1, c2):
    """Sender state as a raw ndarray, without positivity validation."""
    return _combine(f, c1, c2, 1.0, 1.0, 1.0)


def receiver_matrix(f, c1, c2):
    """Receiver (block-scaled) state as a raw ndarray."""
    return _combine(f, c1, c2, f.lambda0, f.lambda1 or 0.0, f.lambda2 or 0.0)


def _validated(m, what, c1, c2):
    try:
        return DensityMatrix(m)
    except Exception as exc:
        min_eig = getattr(exc, "min_eigenvalue", None)
        raise OutOfDomainError(
            f"{what} state at (c1, c2) = ({c1}, {c2}) is not a valid density "
            f"matrix: {exc}",
            min_eigenvalue=min_eig,
        ) from exc


def sender_state(f, c1, c2):
    """Validated sender state at (c1, c2); raises OutOfDomainError with
    the offending minimum eigenvalue outside the admissible domain."""
    if c1 < 0 or c2 < 0:
        raise BlockscaleError("c1 and c2 must be nonnegative")
    return _validated(sender_matrix(f, c1, c2), "sender", c1, c2)


def receiver_state(f, c1, c2):
    """Validated block-scaled receiver state at (c1, c2)."""
    if c1 < 0 or c2 < 0:
        raise BlockscaleError("c1 and c2 must be nonnegative")
    return _validated(receiver_matrix(f, c1, c2), "receiver", c1, c2)


def _sender_psd(f, c1, c2):
    w = np.linalg.eigvalsh(sender_matrix(f, c1, c2))
    return w[0] >= -PSD_TOL


def domain_boundary(f, theta):
    """Largest radius r such that the sender state at
    (r cos(theta), r sin(theta)) is positive semidefinite, by bisection
    to 1e-6.  theta = 0 recovers c1_max, theta = pi/2 recovers c2_max.
    """
    if not 0.0 <= theta <= np.pi / 2 + 1e-12:
        raise BlockscaleError("theta must lie in [0, pi/2]")
    ct = 0.0 if abs(theta - np.pi / 2) < 1e-15 else np.cos(theta)
    st = np.sin(theta)
    if f.template1 is None:
        ct = 0.0
    if f.template2 is None:
        st = 0.0

    def ok(r):
        return _sender_psd(f, r * ct, r * st)

    if not ok(0.0):
        raise BlockscaleError("origin is not admissible; inconsistent family data")
    lo, hi = 0.0, 0.1
    while ok(hi):
        lo, hi = hi, 2.0 * hi
        if hi > _RADIUS_CAP:
            raise BlockscaleError(
                f"domain unbounded along theta = {theta}; direction has no "
                "positivity constraint"
            )
    while hi - lo > _BOUNDARY_TOL:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


@dataclass
class SweepResult:
    """Concurrence of sender and receiver states over the admissible
    parameter domain."""

    family: ScalableFamily
    c1: np.ndarray
    c2: np.ndarray
    conc_sender: np.ndarray
    conc_receiver: np.ndarray

    def __len__(self):
        return len(self.c1)


def grid_points(f, resolution):
    """Deterministic list of (c1, c2) grid points over the admissible
    domain: a 1-D ray for Cases I/II, a polar (r, theta) grid of the
    quarter domain for Cases III/IV."""
    if resolution < 2:
        raise BlockscaleError("resolution must be >= 2")
    pts = []
    if f.has_order1 and f.has_order2:
        thetas = np.linspace(0.0, np.pi / 2, resolution)
        fracs = np.linspace(0.0, 1.0, resolution)
        seen = set()
        for th in thetas:
            rmax = domain_boundary(f, th)
            for fr in fracs:
                c1 = rmax * fr * np.cos(th)
                c2 = rmax * fr * np.sin(th)
                c1 = 0.0 if c1 < 1e-15 else c1
                c2 = 0.0 if c2 < 1e-15 else c2
                key = (round(c1, 12), round(c2, 12))
                if key in seen:
                    continue
                seen.add(key)
                pts.append((c1, c2))
    elif f.has_order2:
        for c2 in np.linspace(0.0, f.c2_max, resolution):
            pts.append((0.0, float(c2)))
    else:
        for c1 in np.linspace(0.0, f.c1_max, resolution):
            pts.append((float(c1), 0.0))
    return pts


def grid_sweep(f, resolution):
    """Concurrences of the unperturbed sender/receiver states over the
    grid of :func:`grid_points`."""
    pts = grid_points(f, resolution)
    c1 = np.array([p[0] for p in pts])
    c2 = np.array([p[1] for p in pts])
    cs = np.array([wootters_concurrence(sender_matrix(f, a, b)) for a, b in pts])
    cr = np.array([wootters_concurrence(receiver_matrix(f, a, b)) for a, b in pts])
    return SweepResult(family=f, c1=c1, c2=c2, conc_sender=cs, conc_receiver=cr)
