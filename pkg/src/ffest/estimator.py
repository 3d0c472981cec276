"""Synthesis of the minimum-error-variance estimator and causal filtering.

The estimator of y from past/present w is assembled from the triangular
blocks as

    Atil = [[A11, A12 - (K12 + K11 D0) C22], [0, A22 - K22 C22]]
    Ktil = [K12 + K11 D0; K22]
    Ctil = [C11, C12 - D0 C22],        D0 = Q12 Q22^-1

with output yhat = Ctil xhat + D0 w (plus sign on the direct term).
"""

import numpy as np
from scipy.signal import lfilter

from .errors import IndefiniteCovarianceError
from .models import EstimatorModel, InnovationJointModel, TriangularJointModel
from .realization import triangularize

__all__ = [
    "synthesize",
    "synthesize_from_joint",
    "filter_signal",
    "joint_one_step_prediction",
]


def compute_d0(Q12, Q22):
    """Static gain mapping the input innovation to the direct correction."""
    Q12 = np.atleast_2d(np.asarray(Q12, dtype=float))
    Q22 = np.atleast_2d(np.asarray(Q22, dtype=float))
    if Q22.size:
        lam_min = float(np.min(np.linalg.eigvalsh(0.5 * (Q22 + Q22.T))))
        if lam_min <= 1e-12 * (1.0 + np.linalg.norm(Q22)):
            raise IndefiniteCovarianceError(
                f"input innovation covariance is singular "
                f"(smallest eigenvalue {lam_min:.3g})"
            )
    return np.linalg.solve(Q22.T, Q12.T).T


def synthesize(t: TriangularJointModel, D0=None) -> EstimatorModel:
    """Estimator of y given past/present w from triangular blocks.

    ``D0`` overrides Q12 Q22^-1; identification uses this to plug in a
    data-estimated direct gain when Q12 is not part of the model.
    """
    if D0 is None:
        D0 = compute_d0(t.Q12, t.Q22)
    else:
        D0 = np.atleast_2d(np.asarray(D0, dtype=float))
    KD = t.K12 + t.K11 @ D0
    p1, p2, n = t.p1, t.p2, t.p1 + t.p2
    Atil = np.zeros((n, n))
    Atil[:p1, :p1] = t.A11
    Atil[:p1, p1:] = t.A12 - KD @ t.C22
    Atil[p1:, p1:] = t.A22 - t.K22 @ t.C22
    Ktil = np.vstack([KD, t.K22])
    Ctil = np.hstack([t.C11, t.C12 - D0 @ t.C22])
    return EstimatorModel(Atil=Atil, Ktil=Ktil, Ctil=Ctil, D0=D0)


def synthesize_from_joint(
    m: InnovationJointModel,
    rank_tol=1e-6,
    tol_fb=1e-6,
    p2=None,
    on_violation="raise",
) -> EstimatorModel:
    """Triangularize then synthesize; raises on feedback violation."""
    t = triangularize(m, rank_tol=rank_tol, tol_fb=tol_fb, p2=p2,
                      on_violation=on_violation)
    return synthesize(t)


def _convolved_state(A, K, w):
    """Zero-initial state path x(t) = sum_{k=1}^{t} A^(k-1) K w(t-k).

    Computed exactly through per-mode first-order recursions in the
    eigenbasis (C-speed via ``lfilter``); falls back to the plain time loop
    when A is too far from diagonalizable.
    """
    N = w.shape[0]
    n = A.shape[0]
    try:
        lam, W = np.linalg.eig(A)
        cond = np.linalg.cond(W)
        if np.isfinite(cond) and cond < 1e8:
            u = w @ np.linalg.solve(W, K.astype(complex)).T
            f = np.empty_like(u)
            for i in range(n):
                f[:, i] = lfilter([1.0], [1.0, -lam[i]], u[:, i])
            # the recursion output lags the driven sum by one step
            m = np.zeros_like(u)
            m[1:] = f[:-1]
            return (m @ W.T).real
    except np.linalg.LinAlgError:
        pass
    x = np.zeros((N, n))
    v = np.zeros(n)
    for t in range(N):
        x[t] = v
        v = A @ v + K @ w[t]
    return x


def filter_signal(e: EstimatorModel, w, x0=None):
    """Run the causal recursion xhat+ = Atil xhat + Ktil w over a signal.

    Returns the N x p prediction yhat(t) = Ctil xhat(t) + D0 w(t); a
    nonzero initial state adds the homogeneous transient.
    """
    w = np.atleast_2d(np.asarray(w, dtype=float))
    if w.shape[1] != e.q:
        raise ValueError(f"w has {w.shape[1]} columns, estimator expects {e.q}")
    N = w.shape[0]
    yhat = w @ e.D0.T
    if e.n:
        yhat += _convolved_state(e.Atil, e.Ktil, w) @ e.Ctil.T
        if x0 is not None:
            v = np.asarray(x0, dtype=float).reshape(e.n)
            for t in range(N):
                yhat[t] += e.Ctil @ v
                v = e.Atil @ v
    return yhat


def joint_one_step_prediction(t: TriangularJointModel, traj, x0=None, D0=None):
    """Best one-step prediction of y from the joint past plus current w.

    Runs the joint innovation filter x+ = A x + K (z - C x) over the stacked
    observations z = [y; w] and returns

        yhat(t) = C_y x(t) + D0 (w(t) - C_w x(t)).

    Started from the true initial state this reproduces the state exactly,
    and y - yhat equals e1 - D0 e2 (the innovation of the stochastic part of
    y) to machine precision.
    """
    A, K, C = t.A, t.K, t.C
    if D0 is None:
        D0 = compute_d0(t.Q12, t.Q22)
    p = t.p
    z = np.hstack([traj.y, traj.w])
    N = z.shape[0]
    x = np.zeros(t.n) if x0 is None else np.asarray(x0, dtype=float).reshape(t.n)
    yhat = np.zeros((N, p))
    for k in range(N):
        innov = z[k] - C @ x
        yhat[k] = t.C11 @ x[: t.p1] + t.C12 @ x[t.p1 :] + D0 @ innov[p:]
        x = A @ x + K @ innov
    return yhat
