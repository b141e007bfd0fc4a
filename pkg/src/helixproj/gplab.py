"""Covariance kernels, conditioning identities and sampling.

Processes
---------
``helix``      stationary X with covariance ``1 / cosh(t - s)``, t real
``taylor``     random Taylor series f, covariance ``1 / (1 - s t)``, |t| < 1
``laplace``    random Laplace transform g, covariance ``1 / (s + t)``, t > 0
``quadruple``  four-point process Y_{x,y} on labels A, B, C, D
``explicit``   any correlation matrix, times are its labels

Conditioning a unit-variance process on ``Z(s0) = 0`` leaves the residual
``Z(t) - K(t, s0) Z(s0)``. For the helix its covariance is
``tanh(s - s0) tanh(t - s0) K(s, t)``.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .classify import quadruple_gram
from .correlation import TOL_PSD, CorrelationMatrix, spectral_factor
from .errors import DegenerateConditioning, DomainError, InsufficientSamples, InvalidInput

KINDS = ("helix", "taylor", "laplace", "quadruple", "explicit")
BLOCK_ROWS = 4096
_VAR_EPS = 1e-14


@dataclass(frozen=True)
class ProcessSpec:
    kind: str
    x: float | None = None
    y: float | None = None
    matrix: CorrelationMatrix | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInput(f"unknown process kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "quadruple":
            if self.x is None or self.y is None:
                raise InvalidInput("quadruple process needs x and y")
            object.__setattr__(self, "matrix", quadruple_gram(self.x, self.y))
        if self.kind == "explicit" and not isinstance(self.matrix, CorrelationMatrix):
            raise InvalidInput("explicit process needs a CorrelationMatrix")

    @classmethod
    def helix(cls):
        return cls("helix")

    @classmethod
    def taylor(cls):
        return cls("taylor")

    @classmethod
    def laplace(cls):
        return cls("laplace")

    @classmethod
    def quadruple(cls, x, y):
        return cls("quadruple", x=x, y=y)

    @classmethod
    def explicit(cls, matrix):
        return cls("explicit", matrix=matrix)

    @property
    def unit_variance(self) -> bool:
        return self.kind in ("helix", "quadruple", "explicit")

    def check_time(self, t):
        if self.kind in ("quadruple", "explicit"):
            if t not in self.matrix.labels:
                raise DomainError(f"{t!r} is not a label of the {self.kind} process")
            return
        t = float(t)
        if not math.isfinite(t):
            raise DomainError("times must be finite")
        if self.kind == "taylor" and not abs(t) < 1:
            raise DomainError(f"taylor process is defined on (-1, 1), got {t}")
        if self.kind == "laplace" and not t > 0:
            raise DomainError(f"laplace process is defined on (0, inf), got {t}")


def kernel_eval(spec: ProcessSpec, s, t) -> float:
    """Covariance ``E[Z(s) Z(t)]``."""
    spec.check_time(s)
    spec.check_time(t)
    if spec.kind == "helix":
        return 1.0 / math.cosh(float(t) - float(s))
    if spec.kind == "taylor":
        return 1.0 / (1.0 - float(s) * float(t))
    if spec.kind == "laplace":
        return 1.0 / (float(s) + float(t))
    return spec.matrix[s, t]


def kernel_matrix(spec: ProcessSpec, times: Sequence) -> np.ndarray:
    return np.array([[kernel_eval(spec, s, t) for t in times] for s in times])


def standardized_kernel(spec: ProcessSpec, s, t) -> float:
    """Kernel of ``Z(t) / sqrt(Var Z(t))``."""
    vs, vt = kernel_eval(spec, s, s), kernel_eval(spec, t, t)
    if vs <= 0 or vt <= 0:
        raise DomainError("zero-variance point")
    return kernel_eval(spec, s, t) / math.sqrt(vs * vt)


def standardized_matrix(spec: ProcessSpec, times: Sequence) -> np.ndarray:
    k = kernel_matrix(spec, times)
    sd = np.sqrt(np.diag(k))
    if np.any(sd <= 0):
        raise DomainError("zero-variance point")
    return k / np.outer(sd, sd)


# ---------------------------------------------------------------------------
# time changes

def time_change_discrepancy(times: Sequence[float]) -> float:
    """Largest deviation from ``sech(s - t)`` over the four time-changed kernels.

    Checked: f(tanh t)/cosh t and sqrt(2 e^{2t}) g(e^{2t}), each both with the
    explicit scaling and after standardization.
    """
    taylor, laplace = ProcessSpec.taylor(), ProcessSpec.laplace()
    worst = 0.0
    for s in times:
        for t in times:
            target = 1.0 / math.cosh(s - t)
            u, v = math.tanh(s), math.tanh(t)
            p, q = math.exp(2 * s), math.exp(2 * t)
            values = (
                kernel_eval(taylor, u, v) / (math.cosh(s) * math.cosh(t)),
                standardized_kernel(taylor, u, v),
                math.sqrt(2 * p) * math.sqrt(2 * q) * kernel_eval(laplace, p, q),
                standardized_kernel(laplace, p, q),
            )
            worst = max(worst, *(abs(w - target) for w in values))
    return worst


def check_time_change(times: Sequence[float], tol: float = 1e-12) -> bool:
    return time_change_discrepancy(times) <= tol


# ---------------------------------------------------------------------------
# conditioning

def _as_list(s0):
    if isinstance(s0, (list, tuple, np.ndarray)):
        return list(s0)
    return [s0]


def _conditioned(spec, times, s0):
    times = list(times)
    cond = _as_list(s0)
    if set(cond) & set(times):
        raise InvalidInput("conditioning points must not be among the times")
    points = times + cond
    k = standardized_matrix(spec, points)
    n = len(times)
    for c in range(n, len(points)):
        pivot = k[c, c]
        if pivot <= _VAR_EPS:
            raise DegenerateConditioning(f"conditioning point {points[c]!r} is already determined")
        k = k - np.outer(k[:, c], k[c, :]) / pivot
    k = k[:n, :n]
    var = np.diag(k)
    if np.any(var <= _VAR_EPS):
        t = times[int(np.argmin(var))]
        raise DegenerateConditioning(f"|K({t!r}, s0)| = 1: residual at {t!r} vanishes")
    return k


def residual_covariance(spec: ProcessSpec, times: Sequence, s0) -> np.ndarray:
    """Covariance of the standardized process conditioned on zero at ``s0``.

    ``s0`` may be a single point or a sequence; several points are handled by
    conditioning one after another.
    """
    return _conditioned(spec, times, s0)


def condition_residual(spec: ProcessSpec, times: Sequence, s0) -> CorrelationMatrix:
    """Correlation matrix of the conditioned process."""
    k = _conditioned(spec, times, s0)
    sd = np.sqrt(np.diag(k))
    return CorrelationMatrix(k / np.outer(sd, sd), list(times), check_psd=False)


class ConditioningCheck(NamedTuple):
    """Outcome of the conditioning check.

    ``passed`` and ``max_discrepancy`` refer to the signed identity.
    ``projective_discrepancy`` compares absolute values only, which is the
    statement about projective distances; the exceptional quadruple satisfies
    that one but never the signed one.
    """

    passed: bool
    max_discrepancy: float
    multipliers: dict
    projective_discrepancy: float = 0.0


def conditioning_multipliers(spec: ProcessSpec, times: Sequence, s0) -> dict:
    """``phi(t)`` with residual covariance ``phi(s) phi(t) K(s, t)``.

    For the helix ``phi(t) = prod_i tanh(t - s_i)``. Otherwise ``|phi(t)|`` is
    the residual standard deviation and its sign is propagated through each
    non-orthogonal block from the block's first time, which gets ``+``.
    """
    times = list(times)
    if spec.kind == "helix":
        return {t: float(np.prod([math.tanh(float(t) - float(s)) for s in _as_list(s0)]))
                for t in times}
    res = _conditioned(spec, times, s0)
    k = standardized_matrix(spec, times)
    sd = np.sqrt(np.diag(res))
    r = res / np.outer(sd, sd)
    n = len(times)
    sign = [0] * n
    for root in range(n):
        if sign[root]:
            continue
        sign[root] = 1
        queue = deque([root])
        while queue:
            i = queue.popleft()
            for j in range(n):
                if not sign[j] and abs(k[i, j]) > 1e-12 and abs(r[i, j]) > 1e-12:
                    sign[j] = sign[i] * (1 if r[i, j] * k[i, j] > 0 else -1)
                    queue.append(j)
    return {t: float(sign[i] * sd[i]) for i, t in enumerate(times)}


def check_conditioning_identity(spec: ProcessSpec, s0, times: Sequence,
                                tol: float = 1e-12) -> ConditioningCheck:
    """Compare the residual covariance with ``phi(s) phi(t) K(s, t)`` entrywise."""
    times = list(times)
    res = _conditioned(spec, times, s0)
    phi = conditioning_multipliers(spec, times, s0)
    f = np.array([phi[t] for t in times])
    target = np.outer(f, f) * standardized_matrix(spec, times)
    worst = float(np.max(np.abs(res - target), initial=0.0))
    proj = float(np.max(np.abs(np.abs(res) - np.abs(target)), initial=0.0))
    return ConditioningCheck(worst <= tol, worst, phi, proj)


# ---------------------------------------------------------------------------
# simulation

@dataclass(frozen=True)
class SamplePaths:
    times: tuple
    samples: np.ndarray
    seed: int


def _normals(n: int, m: int, seed: int) -> np.ndarray:
    # one Philox stream per block of rows: the layout does not depend on how
    # blocks are scheduled
    if not 0 <= seed < 2 ** 64:
        raise InvalidInput("seed must be in [0, 2**64)")
    out = np.empty((n, m))
    for b, start in enumerate(range(0, n, BLOCK_ROWS)):
        stop = min(start + BLOCK_ROWS, n)
        gen = np.random.Generator(np.random.Philox(key=(seed << 64) | b))
        out[start:stop] = gen.standard_normal((stop - start, m))
    return out


def sample(spec: ProcessSpec, times: Sequence, n: int, seed: int = 0,
           tol_psd: float = TOL_PSD) -> SamplePaths:
    """Draw ``n`` zero-mean Gaussian paths with the process covariance on ``times``."""
    if n < 0:
        raise InvalidInput("sample count must be non-negative")
    times = tuple(times)
    f = spectral_factor(kernel_matrix(spec, times), tol_psd=tol_psd, drop_null=False)
    z = _normals(n, len(times), seed)
    samples = z @ f.T
    samples.setflags(write=False)
    return SamplePaths(times, samples, seed)


def sample_residual(spec: ProcessSpec, times: Sequence, s0, n: int, seed: int = 0) -> SamplePaths:
    """Samples of ``Z(t) - K(t, s0) Z(s0)`` built from joint samples of the standardized process."""
    times = tuple(times)
    cond = _as_list(s0)
    points = times + tuple(cond)
    k = standardized_matrix(spec, points)
    paths = sample(ProcessSpec.explicit(CorrelationMatrix(k, [str(p) for p in points])),
                   [str(p) for p in points], n, seed).samples.copy()
    m = len(times)
    for c in range(m, len(points)):
        pivot = k[c, c]
        if pivot <= _VAR_EPS:
            raise DegenerateConditioning(f"conditioning point {points[c]!r} is already determined")
        coef = k[:, c] / pivot
        paths = paths - np.outer(paths[:, c], coef)
        k = k - np.outer(k[:, c], k[c, :]) / pivot
    out = paths[:, :m]
    out.setflags(write=False)
    return SamplePaths(times, out, seed)


def empirical_covariance(paths: SamplePaths) -> tuple[np.ndarray, np.ndarray]:
    """Unbiased sample covariance and per-entry standard errors."""
    x = np.asarray(paths.samples, dtype=float)
    n = x.shape[0]
    if n < 2:
        raise InsufficientSamples("need at least two samples")
    xc = x - x.mean(axis=0)
    cov = xc.T @ xc / (n - 1)
    se = np.empty_like(cov)
    for i in range(x.shape[1]):
        se[i] = (xc[:, i:i + 1] * xc).std(axis=0, ddof=1) / math.sqrt(n)
    return cov, se
