"""Projections that tame products of matrices in operator norm.

All ``norm2`` values use the normalized trace, ``||x||_2 = (tr_k |x|^2)^{1/2}``;
``tr`` is normalized as well, so ``tr(I) = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .repn import norm2

__all__ = [
    "ProjectionCert", "cheb_projection", "range_fit_projection",
    "product_projection", "meet", "proj_from_basis", "ntrace", "opnorm",
    "MEET_SIN_CUTOFF",
]

# principal angles with sin(theta) below this count as shared directions
MEET_SIN_CUTOFF = 1e-8
RANK_RTOL = 1e-10
CHECK_TOL = 1e-10


def ntrace(p: np.ndarray) -> float:
    return float(np.real(np.trace(p)) / p.shape[0])


def opnorm(x: np.ndarray) -> float:
    return float(np.linalg.norm(x, 2)) if x.size else 0.0


def proj_from_basis(B: np.ndarray, k: int) -> np.ndarray:
    if B.size == 0:
        return np.zeros((k, k), dtype=complex)
    return B @ B.conj().T


def _basis(p: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((p + p.conj().T) / 2)
    return v[:, w > 0.5]


def _orth(A: np.ndarray, k: int) -> np.ndarray:
    if A.size == 0:
        return np.zeros((k, 0), dtype=complex)
    u, s, _ = np.linalg.svd(A, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((k, 0), dtype=complex)
    return u[:, s > RANK_RTOL * s[0]]


def meet(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Projection onto ``range(p) & range(q)`` via principal angles.

    The sines of the angles between ``range(p)`` and ``range(q)`` are the
    singular values of ``(I - q) A`` for an orthonormal basis ``A`` of
    ``range(p)``; these stay accurate near zero, unlike the cosines.
    """
    k = p.shape[0]
    A, B = _basis(p), _basis(q)
    if A.shape[1] == 0 or B.shape[1] == 0:
        return np.zeros((k, k), dtype=complex)
    resid = A - B @ (B.conj().T @ A)
    _, s, vh = np.linalg.svd(resid)
    sines = np.zeros(A.shape[1])
    sines[:s.size] = s
    common = A @ vh[sines <= MEET_SIN_CUTOFF].conj().T
    return proj_from_basis(_orth(common, k), k)


@dataclass
class ProjectionCert:
    """A projection with the inequalities it is meant to satisfy.

    ``bound_achieved`` is the measured operator norm, ``bound`` its target;
    ``trace_bound`` is the promised lower bound on ``trace``.
    """

    p: np.ndarray
    trace: float
    bound_achieved: float
    bound: float
    trace_bound: float
    extra: dict = field(default_factory=dict)
    note: str = ""

    def is_projection(self, tol: float = CHECK_TOL) -> bool:
        p = self.p
        return bool(np.allclose(p @ p, p, atol=tol) and np.allclose(p, p.conj().T, atol=tol))

    def holds(self, tol: float = CHECK_TOL) -> bool:
        ok = self.bound_achieved <= self.bound * (1 + tol) + tol
        ok &= self.trace >= self.trace_bound - tol
        for key, (val, lim) in self.extra.items():
            ok &= val <= lim * (1 + tol) + tol
        return bool(ok and self.is_projection())

    def to_json(self, include_matrix: bool = False) -> dict:
        out = {"trace": self.trace, "bound_achieved": self.bound_achieved, "bound": self.bound,
               "trace_bound": self.trace_bound, "holds": self.holds(), "note": self.note,
               "extra": {k: list(v) for k, v in self.extra.items()}}
        if include_matrix:
            out["p"] = {"re": self.p.real.tolist(), "im": self.p.imag.tolist()}
        return out


def cheb_projection(z: np.ndarray, C: float) -> ProjectionCert:
    """Spectral projection ``1_{[0, C||z||_2]}(|z|)``.

    Guarantees ``||z p|| <= C ||z||_2`` and ``tr p >= 1 - C^-2``.

    Examples
    --------
    >>> c = cheb_projection(np.diag([0.1, 10.0]), 1.0)
    >>> round(c.trace, 3), round(c.bound_achieved, 3)
    (0.5, 0.1)
    """
    if C <= 0:
        raise ValueError("C must be positive")
    z = np.asarray(z, dtype=complex)
    k = z.shape[1]
    nz = norm2(z)
    if nz == 0:
        return ProjectionCert(np.eye(k, dtype=complex), 1.0, 0.0, 0.0, 1.0 - C ** -2,
                              note="zero input, identity returned")
    _, s, vh = np.linalg.svd(z)
    s_full = np.zeros(k)
    s_full[:s.size] = s
    if vh.shape[0] < k:
        raise ValueError("expected a matrix with at least as many rows as columns")
    keep = s_full <= C * nz * (1 + 1e-12)
    V = vh[keep].conj().T
    p = proj_from_basis(V, k)
    return ProjectionCert(p, ntrace(p), opnorm(z @ p), C * nz, 1.0 - C ** -2)


def range_fit_projection(x: np.ndarray, q: np.ndarray) -> ProjectionCert:
    """Projection ``p`` with ``x p H`` inside ``q H`` and ``tr p >= tr q``.

    ``p`` is the kernel projection of ``x`` plus the preimage, inside the
    support of ``x``, of ``range(q) & range(x)``. The preimage is the null
    space of ``(I - q) x`` restricted to the support, so no angle cutoff is
    involved.
    """
    x = np.asarray(x, dtype=complex)
    q = np.asarray(q, dtype=complex)
    k = x.shape[1]
    u, s, vh = np.linalg.svd(x)
    r = int(np.count_nonzero(s > RANK_RTOL * s[0])) if s.size and s[0] > 0 else 0
    ker = vh[r:].conj().T
    qperp = np.eye(q.shape[0]) - q
    if r:
        supp = vh[:r].conj().T
        m = qperp @ x @ supp
        _, sm, wh = np.linalg.svd(m)
        sv = np.zeros(r)
        sv[:sm.size] = sm
        pre = supp @ wh[sv <= RANK_RTOL * max(1.0, s[0])].conj().T
        V = _orth(np.hstack([ker, pre]), k)
    else:
        V = ker
    p = proj_from_basis(V, k)
    resid = opnorm(qperp @ x @ p)
    scale = max(1.0, opnorm(x))
    return ProjectionCert(p, ntrace(p), resid, 1e-10 * scale, ntrace(q) - 1e-9)


def _right(zs: Sequence[np.ndarray], C: float) -> tuple[np.ndarray, list]:
    """Inductive construction for ``||z_1 ... z_n p||``; returns ``p`` and meet checks."""
    if len(zs) == 1:
        return cheb_projection(zs[0], C).p, []
    p0, checks = _right(zs[1:], C)
    p1 = cheb_projection(zs[0], C).p
    tail = zs[1]
    for z in zs[2:]:
        tail = tail @ z
    q = range_fit_projection(tail, p1).p
    p = meet(q, p0)
    checks.append((ntrace(p), ntrace(q) + ntrace(p0) - 1.0))
    return p, checks


def _prod(zs):
    out = zs[0]
    for z in zs[1:]:
        out = out @ z
    return out


def product_projection(zs: Sequence[np.ndarray], C: float, side: str = "right",
                       split: int | None = None) -> ProjectionCert:
    """Projection controlling a product of matrices.

    Parameters
    ----------
    zs : sequence of (k, k) arrays
    C : float
    side : {"right", "left", "two_sided"}
        ``right`` bounds ``||z_1...z_n p||``, ``left`` bounds ``||p z_1...z_n||``.
        ``two_sided`` treats ``zs[:split]`` as the right-controlled product and
        ``zs[split:]`` as the left-controlled one and meets the two projections.

    Returns
    -------
    ProjectionCert
        ``bound`` is ``C^n prod ||z_i||_2`` (for ``two_sided`` the left part is
        in ``extra``) and ``trace_bound`` is ``1 - n C^-2``.
    """
    if C <= 0:
        raise ValueError("C must be positive")
    zs = [np.asarray(z, dtype=complex) for z in zs]
    if side == "two_sided":
        if split is None:
            raise ValueError("two_sided needs split")
        xs, ys = zs[:split], zs[split:]
        k = zs[0].shape[0]
        p = np.eye(k, dtype=complex)
        extra = {}
        parts = []
        if xs:
            cx = product_projection(xs, C, "right")
            parts.append(cx.p)
            extra["right_norm"] = (cx.bound_achieved, cx.bound)
        if ys:
            cy = product_projection(ys, C, "left")
            parts.append(cy.p)
            extra["left_norm"] = (cy.bound_achieved, cy.bound)
        for part in parts:
            p = meet(p, part)
        if xs:
            extra["right_norm"] = (opnorm(_prod(xs) @ p), extra["right_norm"][1])
        if ys:
            extra["left_norm"] = (opnorm(p @ _prod(ys)), extra["left_norm"][1])
        tb = 1.0 - len(zs) * C ** -2
        return ProjectionCert(p, ntrace(p), 0.0, 0.0, tb, extra)
    if not zs:
        raise ValueError("need at least one matrix")
    if side == "left":
        c = product_projection([z.conj().T for z in reversed(zs)], C, "right")
        return ProjectionCert(c.p, c.trace, opnorm(c.p @ _prod(zs)), c.bound, c.trace_bound,
                              c.extra, c.note)
    if side != "right":
        raise ValueError(f"unknown side {side!r}")
    p, checks = _right(zs, C)
    bound = C ** len(zs) * float(np.prod([norm2(z) for z in zs]))
    extra = {}
    if checks:
        worst = min(checks, key=lambda t: t[0] - t[1])
        # meet law: tr(p & q) >= tr p + tr q - 1, stored as (lhs_deficit, 0)
        extra["meet_deficit"] = (max(0.0, worst[1] - worst[0]), 0.0)
    return ProjectionCert(p, ntrace(p), opnorm(_prod(zs) @ p), bound,
                          1.0 - len(zs) * C ** -2, extra)
