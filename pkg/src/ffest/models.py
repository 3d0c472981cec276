"""Model types for every system form in the pipeline, plus validation and
the JSON model-document format.

Constructors check structure only (shapes, finiteness); the deeper
invariants (stability, positive definiteness, triangularity) are checked by
:func:`validate`, which returns a report instead of raising so that invalid
models can be inspected.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ModelFormatError, ValidationError
from .matkernel import spectral_radius

__all__ = [
    "StateSpaceModel",
    "InnovationJointModel",
    "TriangularJointModel",
    "EstimatorModel",
    "Trajectory",
    "ValidationReport",
    "validate",
    "assemble",
    "extract",
    "flip_state_signs",
    "model_to_dict",
    "model_from_dict",
    "save_model",
    "load_model",
]


def _arr(x):
    a = np.asarray(x, dtype=float)
    if a.ndim != 2:
        a = np.atleast_2d(a)
    return a


def _check_finite(name, a):
    # a finite-entry matrix has a finite sum; any nan/inf poisons it
    if not np.isfinite(a.sum()):
        raise ValidationError(f"{name} contains non-finite entries")


@dataclass
class StateSpaceModel:
    """Driven model x+ = Ax + Bv, [y; w] = Cx + Dv with v ~ N(0, I)."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    p: int
    q: int

    def __post_init__(self):
        self.A, self.B, self.C, self.D = map(_arr, (self.A, self.B, self.C, self.D))
        n, m = self.A.shape[0], self.B.shape[1]
        if self.A.shape != (n, n):
            raise ValidationError(f"A must be square, got {self.A.shape}")
        if self.B.shape != (n, m):
            raise ValidationError(f"B shape {self.B.shape} inconsistent with A")
        if self.C.shape != (self.p + self.q, n):
            raise ValidationError(
                f"C shape {self.C.shape}, expected {(self.p + self.q, n)}"
            )
        if self.D.shape != (self.p + self.q, m):
            raise ValidationError(
                f"D shape {self.D.shape}, expected {(self.p + self.q, m)}"
            )
        for name in ("A", "B", "C", "D"):
            _check_finite(name, getattr(self, name))

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.B.shape[1]


@dataclass
class InnovationJointModel:
    """Joint forward innovation form x+ = Ax + Ke, [y; w] = Cx + e."""

    A: np.ndarray
    K: np.ndarray
    C: np.ndarray
    Q: np.ndarray
    p: int
    q: int

    def __post_init__(self):
        self.A, self.K, self.C, self.Q = map(_arr, (self.A, self.K, self.C, self.Q))
        n = self.A.shape[0]
        r = self.p + self.q
        if self.A.shape != (n, n):
            raise ValidationError(f"A must be square, got {self.A.shape}")
        if self.K.shape != (n, r):
            raise ValidationError(f"K shape {self.K.shape}, expected {(n, r)}")
        if self.C.shape != (r, n):
            raise ValidationError(f"C shape {self.C.shape}, expected {(r, n)}")
        if self.Q.shape != (r, r):
            raise ValidationError(f"Q shape {self.Q.shape}, expected {(r, r)}")
        for name in ("A", "K", "C", "Q"):
            _check_finite(name, getattr(self, name))

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def C_y(self):
        return self.C[: self.p, :]

    @property
    def C_w(self):
        return self.C[self.p :, :]


@dataclass
class TriangularJointModel:
    """Block upper-triangular joint innovation form with partition (p1, p2).

    The assembled matrices are

        A = [[A11, A12], [0, A22]],   K = [[K11, K12], [0, K22]],
        C = [[C11, C12], [0, C22]],   Q = [[Q11, Q12], [Q12^T, Q22]]

    with the zero blocks placed exactly, and ``T`` the similarity that maps
    the originating joint model into these coordinates.
    """

    A11: np.ndarray
    A12: np.ndarray
    A22: np.ndarray
    K11: np.ndarray
    K12: np.ndarray
    K22: np.ndarray
    C11: np.ndarray
    C12: np.ndarray
    C22: np.ndarray
    Q11: np.ndarray
    Q12: np.ndarray
    Q22: np.ndarray
    T: np.ndarray
    p1: int
    p2: int
    p: int
    q: int

    def __post_init__(self):
        p1, p2, p, q = self.p1, self.p2, self.p, self.q
        n = p1 + p2
        shapes = {
            "A11": (p1, p1), "A12": (p1, p2), "A22": (p2, p2),
            "K11": (p1, p), "K12": (p1, q), "K22": (p2, q),
            "C11": (p, p1), "C12": (p, p2), "C22": (q, p2),
            "Q11": (p, p), "Q12": (p, q), "Q22": (q, q),
            "T": (n, n),
        }
        for name, shape in shapes.items():
            a = _arr(getattr(self, name))
            a = a.reshape(shape) if a.size == int(np.prod(shape)) else a
            if a.shape != shape:
                raise ValidationError(
                    f"{name} shape {a.shape}, expected {shape}"
                )
            _check_finite(name, a)
            setattr(self, name, a)

    @property
    def n(self):
        return self.p1 + self.p2

    @property
    def A(self):
        return np.block([
            [self.A11, self.A12],
            [np.zeros((self.p2, self.p1)), self.A22],
        ])

    @property
    def K(self):
        return np.block([
            [self.K11, self.K12],
            [np.zeros((self.p2, self.p)), self.K22],
        ])

    @property
    def C(self):
        return np.block([
            [self.C11, self.C12],
            [np.zeros((self.q, self.p1)), self.C22],
        ])

    @property
    def Q(self):
        return np.block([[self.Q11, self.Q12], [self.Q12.T, self.Q22]])


@dataclass
class EstimatorModel:
    """Causal predictor x+ = Atil x + Ktil w, yhat = Ctil x + D0 w."""

    Atil: np.ndarray
    Ktil: np.ndarray
    Ctil: np.ndarray
    D0: np.ndarray

    def __post_init__(self):
        self.Atil, self.Ktil, self.Ctil, self.D0 = map(
            _arr, (self.Atil, self.Ktil, self.Ctil, self.D0)
        )
        n = self.Atil.shape[0]
        if self.Atil.shape != (n, n):
            raise ValidationError(f"Atil must be square, got {self.Atil.shape}")
        q = self.Ktil.shape[1] if n else self.D0.shape[1]
        p = self.Ctil.shape[0] if n else self.D0.shape[0]
        if self.Ktil.shape != (n, q):
            raise ValidationError(f"Ktil shape {self.Ktil.shape}")
        if self.Ctil.shape != (p, n):
            raise ValidationError(f"Ctil shape {self.Ctil.shape}")
        if self.D0.shape != (p, q):
            raise ValidationError(
                f"D0 shape {self.D0.shape}, expected {(p, q)}"
            )
        for name in ("Atil", "Ktil", "Ctil", "D0"):
            _check_finite(name, getattr(self, name))

    @property
    def n(self):
        return self.Atil.shape[0]

    @property
    def p(self):
        return self.D0.shape[0]

    @property
    def q(self):
        return self.D0.shape[1]


@dataclass
class Trajectory:
    """Time-indexed samples of y and w, optionally with state and noise."""

    y: np.ndarray
    w: np.ndarray
    x: np.ndarray | None = None
    e: np.ndarray | None = None
    seed: int | None = None

    def __post_init__(self):
        self.y = np.atleast_2d(np.asarray(self.y, dtype=float))
        self.w = np.atleast_2d(np.asarray(self.w, dtype=float))
        if self.y.shape[0] != self.w.shape[0]:
            raise ValidationError(
                f"y has {self.y.shape[0]} samples but w has {self.w.shape[0]}"
            )
        for name in ("x", "e"):
            v = getattr(self, name)
            if v is not None:
                v = np.atleast_2d(np.asarray(v, dtype=float))
                if v.shape[0] != self.y.shape[0]:
                    raise ValidationError(f"{name} sample count mismatch")
                _check_finite(name, v)
                setattr(self, name, v)
        _check_finite("y", self.y)
        _check_finite("w", self.w)

    @property
    def N(self):
        return self.y.shape[0]


@dataclass
class ValidationReport:
    ok: bool
    violations: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def _pd_defect(Q, tol):
    """Most negative eigenvalue if Q is not PD within tol, else None."""
    Qs = 0.5 * (Q + Q.T)
    if np.linalg.norm(Q - Q.T) > tol * (1 + np.linalg.norm(Q)):
        return ("asymmetric", float(np.linalg.norm(Q - Q.T)))
    lam = float(np.min(np.linalg.eigvalsh(Qs))) if Q.size else 1.0
    if lam <= tol:
        return ("eigenvalue", lam)
    return None


def validate(model):
    """Check the deep invariants of any model type; returns a report."""
    v = []
    if isinstance(model, StateSpaceModel):
        rho = spectral_radius(model.A)
        if rho >= 1.0:
            v.append(f"spectral radius of A is {rho:.6g} >= 1")
    elif isinstance(model, InnovationJointModel):
        rho = spectral_radius(model.A)
        if rho >= 1.0:
            v.append(f"spectral radius of A is {rho:.6g} >= 1")
        defect = _pd_defect(model.Q, 1e-9)
        if defect is not None:
            kind, val = defect
            v.append(f"Q not positive definite ({kind}: {val:.6g})")
    elif isinstance(model, TriangularJointModel):
        rho = spectral_radius(model.A)
        if rho >= 1.0:
            v.append(f"spectral radius of assembled A is {rho:.6g} >= 1")
        defect = _pd_defect(model.Q22, 1e-9)
        if defect is not None:
            kind, val = defect
            v.append(f"Q22 not positive definite ({kind}: {val:.6g})")
    elif isinstance(model, EstimatorModel):
        rho = spectral_radius(model.Atil)
        if rho >= 1.0 + 1e-8:
            v.append(f"spectral radius of Atil is {rho:.6g} >= 1")
    elif isinstance(model, Trajectory):
        pass  # structural checks already ran in the constructor
    else:
        raise TypeError(f"cannot validate object of type {type(model).__name__}")
    return ValidationReport(ok=not v, violations=v)


def assemble(t):
    """Full joint innovation model from triangular blocks (zeros placed)."""
    return InnovationJointModel(A=t.A, K=t.K, C=t.C, Q=t.Q, p=t.p, q=t.q)


def extract(m, p1, T=None):
    """Split a joint model with exact lower-left zeros back into blocks.

    Inverse of :func:`assemble`; the lower-left blocks must already be zero.
    """
    n = m.n
    p2 = n - p1
    p, q = m.p, m.q
    for name, block in (
        ("A", m.A[p1:, :p1]),
        ("K", m.K[p1:, :p]),
        ("C", m.C[p:, :p1]),
    ):
        if block.size and np.any(block != 0.0):
            raise ValidationError(f"lower-left block of {name} is not zero")
    return TriangularJointModel(
        A11=m.A[:p1, :p1], A12=m.A[:p1, p1:], A22=m.A[p1:, p1:],
        K11=m.K[:p1, :p], K12=m.K[:p1, p:], K22=m.K[p1:, p:],
        C11=m.C[:p, :p1], C12=m.C[:p, p1:], C22=m.C[p:, p1:],
        Q11=m.Q[:p, :p], Q12=m.Q[:p, p:], Q22=m.Q[p:, p:],
        T=np.eye(n) if T is None else T,
        p1=p1, p2=p2, p=p, q=q,
    )


def flip_state_signs(t: TriangularJointModel, signs) -> TriangularJointModel:
    """Similarity x -> S x with S = diag(signs in {-1, +1}).

    The triangular structure is preserved; useful for matching an external
    sign convention (each state of a balanced form is determined up to
    sign).
    """
    s = np.asarray(signs, dtype=float).reshape(t.n)
    if not np.all(np.abs(s) == 1.0):
        raise ValidationError("signs must be +-1")
    s1, s2 = s[: t.p1], s[t.p1 :]
    return TriangularJointModel(
        A11=s1[:, None] * t.A11 * s1, A12=s1[:, None] * t.A12 * s2,
        A22=s2[:, None] * t.A22 * s2,
        K11=s1[:, None] * t.K11, K12=s1[:, None] * t.K12,
        K22=s2[:, None] * t.K22,
        C11=t.C11 * s1, C12=t.C12 * s2, C22=t.C22 * s2,
        Q11=t.Q11, Q12=t.Q12, Q22=t.Q22,
        T=s[:, None] * t.T, p1=t.p1, p2=t.p2, p=t.p, q=t.q,
    )


# --- JSON model documents -------------------------------------------------

_KINDS = {
    "state_space": (
        StateSpaceModel,
        {"n", "p", "q"},
        ["A", "B", "C", "D"],
    ),
    "innovation_joint": (
        InnovationJointModel,
        {"n", "p", "q"},
        ["A", "K", "C", "Q"],
    ),
    "triangular_joint": (
        TriangularJointModel,
        {"n", "p", "q", "p1", "p2"},
        ["A11", "A12", "A22", "K11", "K12", "K22",
         "C11", "C12", "C22", "Q11", "Q12", "Q22", "T"],
    ),
    "estimator": (
        EstimatorModel,
        {"n", "p", "q"},
        ["Atil", "Ktil", "Ctil", "D0"],
    ),
}


def _kind_of(model):
    for kind, (cls, _, _) in _KINDS.items():
        if type(model) is cls:
            return kind
    raise TypeError(f"no JSON kind for {type(model).__name__}")


def model_to_dict(model):
    kind = _kind_of(model)
    _, dims, mats = _KINDS[kind]
    doc = {"kind": kind}
    for d in sorted(dims):
        doc[d] = int(getattr(model, d))
    for name in mats:
        doc[name] = np.asarray(getattr(model, name)).tolist()
    return doc


def model_from_dict(doc):
    if not isinstance(doc, dict):
        raise ModelFormatError("model document must be a JSON object")
    kind = doc.get("kind")
    if kind not in _KINDS:
        raise ModelFormatError(f"unknown model kind {kind!r}")
    cls, dims, mats = _KINDS[kind]
    allowed = {"kind"} | dims | set(mats)
    unknown = set(doc) - allowed
    if unknown:
        raise ModelFormatError(f"unknown fields in model document: {sorted(unknown)}")
    missing = (dims | set(mats)) - set(doc)
    if missing:
        raise ModelFormatError(f"missing fields in model document: {sorted(missing)}")
    try:
        dim_vals = {d: int(doc[d]) for d in dims}
        mat_vals = {}
        for name in mats:
            rows = doc[name]
            a = np.asarray(rows, dtype=float)
            if a.ndim != 2:
                raise ModelFormatError(
                    f"matrix {name!r} must be an array of row arrays"
                )
            mat_vals[name] = a
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed model document: {exc}") from exc

    kwargs = dict(mat_vals)
    kwargs["p"] = dim_vals["p"]
    kwargs["q"] = dim_vals["q"]
    if kind == "triangular_joint":
        kwargs["p1"] = dim_vals["p1"]
        kwargs["p2"] = dim_vals["p2"]
    if kind == "estimator":
        # n is implied by Atil; accept it for symmetry, verify consistency
        if mat_vals["Atil"].shape[0] != dim_vals["n"]:
            raise ModelFormatError("declared n inconsistent with Atil")
        kwargs = {k: kwargs[k] for k in ("Atil", "Ktil", "Ctil", "D0")}
    try:
        model = cls(**kwargs)
    except ValidationError as exc:
        raise ModelFormatError(str(exc)) from exc
    if kind != "estimator" and model.n != dim_vals["n"]:
        raise ModelFormatError("declared n inconsistent with matrices")
    return model


def save_model(model, path):
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, indent=2)
        fh.write("\n")


def load_model(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"invalid JSON in {path}: {exc}") from exc
    return model_from_dict(doc)
