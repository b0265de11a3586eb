"""Plant, reference model, exogenous signals and the linear-in-parameters form.

The plant ``x' = A x + B u + d`` is rewritten as ``x' = Phi(x) Theta + B u + d``
with ``Phi(x) = I_n kron x^T`` and ``Theta = vec(A^T)``, i.e. the rows of ``A``
stacked one after another.
"""

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from ._linalg import is_hurwitz, numerical_rank
from .exceptions import InvalidInputError


def _as_matrix(a, name):
    a = np.array(a, dtype=float, ndmin=2)
    if a.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-D, got shape {a.shape}")
    return a


def _as_vector(v, name, size=None):
    v = np.array(v, dtype=float).reshape(-1)
    if size is not None and v.shape[0] != size:
        raise InvalidInputError(f"{name} must have length {size}, got {v.shape[0]}")
    return v


@dataclass(frozen=True)
class SineTerm:
    """``amplitude * sin(omega * t + phase)`` switched on for ``t >= t_on``."""

    amplitude: float
    omega: float
    phase: float = 0.0
    t_on: float = 0.0
    channel: int = 0


@dataclass(frozen=True)
class SignalSpec:
    """Sum of a constant offset and gated sinusoids, one entry per channel."""

    offset: tuple = (0.0,)
    terms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "offset", tuple(float(v) for v in np.atleast_1d(self.offset)))
        object.__setattr__(self, "terms", tuple(self.terms))
        for term in self.terms:
            if not 0 <= term.channel < len(self.offset):
                raise InvalidInputError(
                    f"sine term channel {term.channel} outside 0..{len(self.offset) - 1}")

    @classmethod
    def zero(cls, channels=1):
        return cls(offset=(0.0,) * channels)

    @property
    def channels(self):
        return len(self.offset)

    def as_arrays(self):
        """Return ``(offset, terms)`` arrays in the layout the kernel expects."""
        offset = np.array(self.offset, dtype=float)
        terms = np.zeros((len(self.terms), 5))
        for i, t in enumerate(self.terms):
            terms[i] = (t.channel, t.amplitude, t.omega, t.phase, t.t_on)
        return offset, terms

    def __call__(self, t):
        offset, terms = self.as_arrays()
        return eval_signal(offset, terms, float(t))

    def channel_bounds(self):
        """Per-channel supremum bound: |offset| plus the sum of |amplitude|."""
        bound = np.abs(np.array(self.offset, dtype=float))
        for t in self.terms:
            bound[t.channel] += abs(t.amplitude)
        return bound

    def sup_bound(self):
        """Euclidean combination of the per-channel bounds (``d_bar``)."""
        return float(np.linalg.norm(self.channel_bounds()))


@njit(cache=True)
def eval_signal(offset, terms, t):
    out = offset.copy()
    for i in range(terms.shape[0]):
        # closed activation: the step U(t - t_on) is 1 at t == t_on
        if t >= terms[i, 4]:
            out[int(terms[i, 0])] += terms[i, 1] * np.sin(terms[i, 2] * t + terms[i, 3])
    return out


@njit(cache=True)
def _regressor(x):
    n = x.shape[0]
    out = np.zeros((n, n * n))
    for i in range(n):
        out[i, i * n:(i + 1) * n] = x
    return out


def regressor(x, n=None):
    """Regressor ``Phi(x) = I_n kron x^T`` of shape ``(n, n**2)``."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or (n is not None and x.shape[0] != n):
        raise InvalidInputError(f"state must be a vector of length {n or 'n'}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("state must be finite")
    return _regressor(np.ascontiguousarray(x))


def vectorize_params(a):
    """``Theta = vec(A^T)``: the rows of ``A`` stacked into one vector."""
    a = _as_matrix(a, "A")
    if a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"A must be square, got shape {a.shape}")
    return a.reshape(-1).copy()


def unvectorize_params(theta):
    theta = _as_vector(theta, "theta")
    n = int(round(np.sqrt(theta.size)))
    if n * n != theta.size:
        raise InvalidInputError(f"parameter vector length {theta.size} is not a square")
    return theta.reshape(n, n).copy()


def controllability_matrix(a, b):
    n = a.shape[0]
    cols = [b]
    for _ in range(n - 1):
        cols.append(a @ cols[-1])
    return np.column_stack(cols)


@dataclass(frozen=True)
class PlantModel:
    """Single-input LTI plant ``x' = A x + B u + d(t)``.

    ``A`` is unknown to the controller; only the simulator reads it.
    """

    A: np.ndarray
    B: np.ndarray
    disturbance: SignalSpec = None
    controllable: bool = field(init=False)

    def __post_init__(self):
        a = _as_matrix(self.A, "A")
        if a.shape[0] != a.shape[1]:
            raise InvalidInputError(f"A must be square, got shape {a.shape}")
        b = _as_vector(self.B, "B", a.shape[0])
        if not np.any(b != 0.0):
            raise InvalidInputError("B must have at least one nonzero entry")
        dist = self.disturbance if self.disturbance is not None else SignalSpec.zero(a.shape[0])
        if dist.channels != a.shape[0]:
            raise InvalidInputError(f"disturbance has {dist.channels} channels, plant has {a.shape[0]} states")
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "B", b)
        object.__setattr__(self, "disturbance", dist)
        ctrb = controllability_matrix(a, b)
        object.__setattr__(self, "controllable", numerical_rank(ctrb, 1e-9) == a.shape[0])

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def theta(self):
        return vectorize_params(self.A)

    def d(self, t):
        return self.disturbance(t)

    def derivative(self, x, u, t):
        x = _as_vector(x, "x", self.n)
        return self.A @ x + self.B * float(u) + self.d(t)

    def derivative_lip(self, x, u, t):
        """Same derivative evaluated through ``Phi(x) Theta``."""
        x = _as_vector(x, "x", self.n)
        return regressor(x) @ self.theta + self.B * float(u) + self.d(t)


def plant_derivative(plant, x, u, t):
    return plant.derivative(x, u, t)


@dataclass(frozen=True)
class ReferenceModel:
    """``x_m' = A_m x_m + B r(t)`` with Hurwitz ``A_m``."""

    A_m: np.ndarray
    B: np.ndarray
    r: SignalSpec = None
    hurwitz: bool = field(init=False)

    def __post_init__(self):
        am = _as_matrix(self.A_m, "A_m")
        if am.shape[0] != am.shape[1]:
            raise InvalidInputError(f"A_m must be square, got shape {am.shape}")
        b = _as_vector(self.B, "B", am.shape[0])
        r = self.r if self.r is not None else SignalSpec.zero(1)
        if r.channels != 1:
            raise InvalidInputError("reference input r must be scalar")
        object.__setattr__(self, "A_m", am)
        object.__setattr__(self, "B", b)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "hurwitz", is_hurwitz(am))

    @property
    def n(self):
        return self.A_m.shape[0]

    def r_value(self, t):
        return float(self.r(t)[0])

    def derivative(self, x_m, t):
        x_m = _as_vector(x_m, "x_m", self.n)
        return self.A_m @ x_m + self.B * self.r_value(t)


def reference_derivative(ref, x_m, t):
    return ref.derivative(x_m, t)
