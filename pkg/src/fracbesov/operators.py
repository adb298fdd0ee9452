"""Non-negative operator handles on finite-dimensional complex spaces.

A handle bundles the action of an operator A (matvec + shifted-resolvent
solve), optional spectral data (eigenvalues plus a diagonalizing transform
pair), and cached non-negativity constants

    M_A = sup_{l>0} ||l (l+A)^{-1}||,     L_A = sup_{l>0} ||A (l+A)^{-1}||.

Supported kinds: diagonal, dense, torus_laplacian, shifted, inverse and
frac_power (real exponent). Handles are immutable after construction and
all operations are pure.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

_INJECTIVITY_RTOL = 1e-10
_POWER_ITERS = 50
_POWER_TOL = 1e-10


# --------------------------------------------------------------------------
# ambient norms
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class NormKind:
    """Ambient vector norm: euclidean (default), p-norm, or weighted euclidean."""
    kind: str = "euclidean"
    p: Optional[float] = None
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in ("euclidean", "p", "weighted"):
            raise ValueError(f"unknown norm kind {self.kind!r}")
        if self.kind == "p" and (self.p is None or self.p <= 0):
            raise ValueError("p-norm needs p > 0")
        if self.kind == "weighted":
            w = np.asarray(self.weights, dtype=float)
            if w.ndim != 1 or np.any(w <= 0):
                raise ValueError("weighted norm needs positive weights")
            object.__setattr__(self, "weights", w)

    @property
    def quasi_triangle_constant(self) -> float:
        if self.kind == "p" and self.p < 1:
            return 2.0 ** (1.0 / self.p - 1.0)
        return 1.0


EUCLIDEAN = NormKind()


def vector_norm(x: np.ndarray, norm: NormKind = EUCLIDEAN) -> float:
    x = np.asarray(x)
    if norm.kind == "euclidean":
        return float(np.linalg.norm(x.ravel()))
    if norm.kind == "p":
        a = np.abs(x.ravel())
        if math.isinf(norm.p):
            return float(a.max(initial=0.0))
        return float((a ** norm.p).sum() ** (1.0 / norm.p))
    return float(np.sqrt((norm.weights * np.abs(x.ravel()) ** 2).sum()))


@dataclass(frozen=True, eq=False)
class VectorElement:
    """A vector of the ambient space together with its norm convention."""
    values: np.ndarray
    norm_kind: NormKind = EUCLIDEAN

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != 1 or v.size < 1:
            raise ValueError("vector must be 1-d with dimension >= 1")
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.size

    def norm(self) -> float:
        return vector_norm(self.values, self.norm_kind)


def as_array(x) -> np.ndarray:
    if isinstance(x, VectorElement):
        return x.values
    return np.asarray(x, dtype=complex)


# --------------------------------------------------------------------------
# spectral data
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SpectralData:
    """Eigenvalues plus a diagonalizing transform pair acting on the last axis."""
    eigenvalues: np.ndarray                      # (n,), real
    to_coeff: Callable[[np.ndarray], np.ndarray]
    from_coeff: Callable[[np.ndarray], np.ndarray]
    orthonormal: bool = True                     # transform preserves euclidean norm
    self_adjoint: bool = True


class SingularResolventError(np.linalg.LinAlgError):
    """(l + A) not solvable for l > 0: the operator is not non-negative."""


# --------------------------------------------------------------------------
# the handle
# --------------------------------------------------------------------------

class OperatorHandle:
    kind: str
    dim: int

    def __init__(self, kind, dim, *, spectral=None, matrix=None, base=None, param=None):
        self.kind = kind
        self.dim = dim
        self.spectral = spectral
        self._matrix = matrix
        self.base = base
        self.param = param
        self._constants_cache: dict = {}
        self._scale_cache: Optional[tuple[float, float]] = None

    # ---- constructors ----

    @staticmethod
    def diagonal(values) -> "OperatorHandle":
        eig = np.asarray(values, dtype=float)
        if eig.ndim != 1 or eig.size < 1:
            raise ValueError("diagonal operator needs a 1-d eigenvalue list")
        if np.any(eig < 0):
            raise ValueError("diagonal entries must be >= 0 for a non-negative operator")
        ident = lambda x: np.asarray(x, dtype=complex)
        sd = SpectralData(eig, ident, ident)
        return OperatorHandle("diagonal", eig.size, spectral=sd)

    @staticmethod
    def dense(matrix) -> "OperatorHandle":
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("dense operator needs a square matrix")
        spectral = None
        scale = np.abs(m).max() or 1.0
        if np.allclose(m, m.conj().T, atol=1e-13 * scale):
            eig, vecs = np.linalg.eigh(m)
            to = lambda x: np.asarray(x, dtype=complex) @ vecs.conj()
            fr = lambda c: np.asarray(c, dtype=complex) @ vecs.T
            spectral = SpectralData(eig.astype(float), to, fr)
        return OperatorHandle("dense", m.shape[0], spectral=spectral, matrix=m)

    @staticmethod
    def torus_laplacian(n: int, dims: int = 1) -> "OperatorHandle":
        """Discrete negative Laplacian on the periodic grid {0, 1/n, ..., (n-1)/n}^dims.

        Fourier multipliers 4 n^2 sin^2(pi k / n) per axis (grid-scaled).
        """
        if n < 2:
            raise ValueError("grid size must be >= 2")
        if dims not in (1, 2):
            raise ValueError("only 1-d and 2-d tori are supported")
        k = np.arange(n)
        mult = 4.0 * n * n * np.sin(np.pi * k / n) ** 2
        if dims == 1:
            eig = mult
            to = lambda x: np.fft.fft(np.asarray(x, dtype=complex), norm="ortho", axis=-1)
            fr = lambda c: np.fft.ifft(np.asarray(c, dtype=complex), norm="ortho", axis=-1)
            return OperatorHandle("torus_laplacian", n, spectral=SpectralData(eig, to, fr), param=(n, dims))
        eig = (mult[:, None] + mult[None, :]).ravel()

        def to2(x):
            x = np.asarray(x, dtype=complex)
            shp = x.shape[:-1] + (n, n)
            return np.fft.fft2(x.reshape(shp), norm="ortho").reshape(x.shape)

        def fr2(c):
            c = np.asarray(c, dtype=complex)
            shp = c.shape[:-1] + (n, n)
            return np.fft.ifft2(c.reshape(shp), norm="ortho").reshape(c.shape)

        return OperatorHandle("torus_laplacian", n * n, spectral=SpectralData(eig, to2, fr2), param=(n, dims))

    @staticmethod
    def shifted(base: "OperatorHandle", eps: float) -> "OperatorHandle":
        if eps < 0:
            raise ValueError("shift must be >= 0")
        spectral = None
        if base.spectral is not None:
            s = base.spectral
            spectral = SpectralData(s.eigenvalues + eps, s.to_coeff, s.from_coeff,
                                    s.orthonormal, s.self_adjoint)
        return OperatorHandle("shifted", base.dim, spectral=spectral, base=base, param=float(eps))

    @staticmethod
    def inverse(base: "OperatorHandle") -> "OperatorHandle":
        if not base.injective():
            raise ValueError("inverse(...) requires an injective base operator")
        spectral = None
        if base.spectral is not None:
            s = base.spectral
            spectral = SpectralData(1.0 / s.eigenvalues, s.to_coeff, s.from_coeff,
                                    s.orthonormal, s.self_adjoint)
        return OperatorHandle("inverse", base.dim, spectral=spectral, base=base)

    @staticmethod
    def frac_power(base: "OperatorHandle", exponent: float) -> "OperatorHandle":
        exponent = float(exponent)
        if exponent <= 0:
            raise ValueError("frac_power handle needs a positive real exponent")
        spectral = None
        if base.spectral is not None:
            s = base.spectral
            eig = np.where(s.eigenvalues > 0, s.eigenvalues, 0.0) ** exponent
            spectral = SpectralData(eig, s.to_coeff, s.from_coeff, s.orthonormal, s.self_adjoint)
        return OperatorHandle("frac_power", base.dim, spectral=spectral, base=base, param=exponent)

    # ---- core actions ----

    def apply(self, x) -> np.ndarray:
        """A x. Exact multiplier action for spectral kinds, matvec otherwise."""
        x = as_array(x)
        if x.shape[-1] != self.dim:
            raise ValueError(f"dimension mismatch: operator dim {self.dim}, vector dim {x.shape[-1]}")
        s = self.spectral
        if s is not None:
            return s.from_coeff(s.to_coeff(x) * s.eigenvalues)
        if self.kind == "shifted":
            return self.base.apply(x) + self.param * x
        if self.kind == "inverse":
            return self.base.solve(x)
        return as_array(x) @ self.matrix().T

    def solve(self, x) -> np.ndarray:
        """A^{-1} x (requires injectivity)."""
        s = self.spectral
        x = as_array(x)
        if s is not None:
            if np.any(s.eigenvalues == 0):
                raise SingularResolventError("operator has a kernel; cannot solve")
            return s.from_coeff(s.to_coeff(x) / s.eigenvalues)
        return np.linalg.solve(self.matrix(), x[..., None])[..., 0]

    def l_compose_batch(self, lams: np.ndarray, rows: np.ndarray) -> np.ndarray:
        """Per-row A (lam_i + A)^{-1} row_i, computed without the cancellation
        of the identity-decomposition form x - lam (lam+A)^{-1} x."""
        lams = np.asarray(lams, dtype=float)
        rows = np.asarray(rows, dtype=complex)
        s = self.spectral
        if s is not None:
            denom = lams[:, None] + s.eigenvalues[None, :]
            return s.from_coeff(s.to_coeff(rows) * (s.eigenvalues[None, :] / denom))
        return self.apply(self.resolvent_batch(lams, rows))

    def resolvent(self, lam: float, x) -> np.ndarray:
        """(lam + A)^{-1} x for lam > 0."""
        return self.resolvent_many(np.asarray([lam], dtype=float), x)[0]

    def resolvent_many(self, lams: np.ndarray, x) -> np.ndarray:
        """Batched shifted solves: rows (lam_i + A)^{-1} x."""
        lams = np.asarray(lams, dtype=float)
        x = as_array(x)
        return self.resolvent_batch(lams, np.tile(x, (len(lams), 1)))

    def resolvent_batch(self, lams: np.ndarray, rows: np.ndarray) -> np.ndarray:
        """Per-row shifted solves: row_i -> (lam_i + A)^{-1} row_i."""
        lams = np.asarray(lams, dtype=float)
        rows = np.asarray(rows, dtype=complex)
        if rows.shape != (len(lams), self.dim):
            raise ValueError("rows must be (len(lams), dim)")
        if np.any(lams <= 0):
            raise ValueError("resolvent is defined here for lam > 0 only")
        s = self.spectral
        if s is not None:
            denom = lams[:, None] + s.eigenvalues[None, :]
            if np.any(denom == 0):
                raise SingularResolventError("lam in the spectrum of -A")
            return s.from_coeff(s.to_coeff(rows) / denom)
        if self.kind == "shifted":
            return self.base.resolvent_batch(lams + self.param, rows)
        if self.kind == "inverse":
            inner = self.base.resolvent_batch(1.0 / lams, rows)
            return (rows - inner / lams[:, None]) / lams[:, None]
        m = self.matrix()
        out = np.empty_like(rows)
        eye = np.eye(self.dim)
        chunk = max(1, (1 << 22) // (self.dim * self.dim))
        for i0 in range(0, len(lams), chunk):
            ls = lams[i0:i0 + chunk]
            stack = ls[:, None, None] * eye[None, :, :] + m[None, :, :]
            try:
                out[i0:i0 + chunk] = np.linalg.solve(stack, rows[i0:i0 + chunk, :, None])[..., 0]
            except np.linalg.LinAlgError as exc:
                raise SingularResolventError(
                    "shifted solve failed: operator not non-negative?") from exc
        return out

    # ---- derived data ----

    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            self._matrix = self._materialize()
        return self._matrix

    def _materialize(self) -> np.ndarray:
        s = self.spectral
        if s is not None:
            basis = np.eye(self.dim, dtype=complex)
            return np.stack([self.apply(basis[i]) for i in range(self.dim)], axis=1)
        if self.kind == "shifted":
            return self.base.matrix() + self.param * np.eye(self.dim)
        if self.kind == "inverse":
            return np.linalg.inv(self.base.matrix())
        if self.kind == "frac_power":
            from .fractional import frac_power  # local import: fractional builds on this module
            basis = np.eye(self.dim, dtype=complex)
            cols = [frac_power(self.base, self.param, basis[i]) for i in range(self.dim)]
            return np.stack(cols, axis=1)
        raise RuntimeError(f"no materialization path for kind {self.kind!r}")

    def scales(self) -> tuple[float, float]:
        """(smallest nonzero spectral scale, largest spectral scale) estimates."""
        if self._scale_cache is None:
            s = self.spectral
            if s is not None:
                eig = np.abs(s.eigenvalues)
                hi = float(eig.max()) or 1.0
                nz = eig[eig > _INJECTIVITY_RTOL * hi]
                lo = float(nz.min()) if nz.size else hi
            else:
                sv = np.linalg.svd(self.matrix(), compute_uv=False)
                hi = float(sv.max()) or 1.0
                nz = sv[sv > _INJECTIVITY_RTOL * hi]
                lo = float(nz.min()) if nz.size else hi
            self._scale_cache = (lo, hi)
        return self._scale_cache

    def injective(self) -> bool:
        s = self.spectral
        if s is not None:
            eig = np.abs(s.eigenvalues)
            return bool(eig.min() > _INJECTIVITY_RTOL * max(eig.max(), 1e-300))
        sv = np.linalg.svd(self.matrix(), compute_uv=False)
        return bool(sv.min() > _INJECTIVITY_RTOL * max(sv.max(), 1e-300))

    def is_self_adjoint_spectral(self) -> bool:
        return self.spectral is not None and self.spectral.orthonormal and self.spectral.self_adjoint

    def constants(self, norm: NormKind = EUCLIDEAN) -> tuple[float, float]:
        """(M_A, L_A), exact for self-adjoint spectral kinds, estimated otherwise."""
        key = (norm.kind, norm.p)
        if key not in self._constants_cache:
            if self.is_self_adjoint_spectral() and norm.kind == "euclidean" \
                    and np.all(self.spectral.eigenvalues >= 0):
                self._constants_cache[key] = (1.0, 1.0)
            else:
                est = estimate_nonnegativity_constants(self, norm=norm)
                self._constants_cache[key] = (est.M, est.L)
        return self._constants_cache[key]

    def spectral_angle_bound(self, norm: NormKind = EUCLIDEAN) -> float:
        """Upper bound pi - arcsin(1/M_A) on the sectoriality angle."""
        m_const, _ = self.constants(norm)
        if self.is_self_adjoint_spectral():
            return 0.0
        return math.pi - math.asin(min(1.0, 1.0 / max(m_const, 1.0)))

    def __repr__(self):
        return f"OperatorHandle(kind={self.kind!r}, dim={self.dim})"


# --------------------------------------------------------------------------
# non-negativity constants
# --------------------------------------------------------------------------

def _induced_norm(matrix: np.ndarray, norm: NormKind) -> float:
    """Induced operator norm: power iteration for euclidean, exact sums for p in {1, inf}."""
    if norm.kind == "euclidean" or norm.kind == "weighted":
        m = matrix
        if norm.kind == "weighted":
            d = np.sqrt(norm.weights)
            m = (d[:, None] * matrix) / d[None, :]
        n = m.shape[0]
        v = np.ones(n, dtype=complex) + 1e-3 * np.arange(n)
        v /= np.linalg.norm(v)
        mh = m.conj().T
        sigma = 0.0
        for _ in range(_POWER_ITERS):
            w = mh @ (m @ v)
            nw = np.linalg.norm(w)
            if nw == 0.0:
                return 0.0
            new_sigma = math.sqrt(nw)
            v = w / nw
            if abs(new_sigma - sigma) <= _POWER_TOL * max(new_sigma, 1e-300):
                sigma = new_sigma
                break
            sigma = new_sigma
        return float(sigma)
    if norm.p == 1:
        return float(np.abs(matrix).sum(axis=0).max())
    if math.isinf(norm.p):
        return float(np.abs(matrix).sum(axis=1).max())
    raise NotImplementedError("induced norm estimation supports euclidean and p in {1, inf}")


@dataclass
class ConstantsEstimate:
    M: float
    L: float
    diverging: bool
    lam_at_M: float
    lam_at_L: float


def default_lambda_grid(handle: OperatorHandle, points: int = 61) -> np.ndarray:
    _, hi = handle.scales()
    return np.geomspace(1e-6 * hi, 1e6 * hi, points)


def estimate_nonnegativity_constants(
    handle: OperatorHandle,
    lam_grid: Optional[np.ndarray] = None,
    norm: NormKind = EUCLIDEAN,
    refine: bool = False,
) -> ConstantsEstimate:
    """Grid estimates of M_A and L_A over log-spaced lambda.

    Divergence (values still growing at the grid endpoints) signals that the
    operator is not non-negative; it is reported via the ``diverging`` flag,
    never clamped. ``refine=True`` sharpens the grid maxima by golden-section
    around the peak.
    """
    if lam_grid is None:
        lam_grid = default_lambda_grid(handle)
    lam_grid = np.asarray(lam_grid, dtype=float)
    a = handle.matrix()
    eye = np.eye(handle.dim)

    def at(lam: float) -> tuple[float, float]:
        res = np.linalg.solve(lam * eye + a, eye)
        return _induced_norm(lam * res, norm), _induced_norm(a @ res, norm)

    m_vals = np.empty(len(lam_grid))
    l_vals = np.empty(len(lam_grid))
    for i, lam in enumerate(lam_grid):
        m_vals[i], l_vals[i] = at(lam)
    i_m = int(np.argmax(m_vals))
    i_l = int(np.argmax(l_vals))
    m_best, lam_m = float(m_vals[i_m]), float(lam_grid[i_m])
    l_best, lam_l = float(l_vals[i_l]), float(lam_grid[i_l])
    if refine:
        m_best, lam_m = _refine_grid_peak(lambda lam: at(lam)[0], lam_grid, i_m)
        l_best, lam_l = _refine_grid_peak(lambda lam: at(lam)[1], lam_grid, i_l)
    # boundary limits the grid cannot attain: lam (lam+A)^{-1} -> I as
    # lam -> inf, and A (lam+A)^{-1} -> I as lam -> 0 for injective A
    m_best = max(m_best, 1.0)
    if handle.injective():
        l_best = max(l_best, 1.0)
    edge = (i_m in (0, len(lam_grid) - 1) and m_vals[i_m] > 1.5 * np.median(m_vals)) or \
           (i_l in (0, len(lam_grid) - 1) and l_vals[i_l] > 1.5 * np.median(l_vals))
    return ConstantsEstimate(m_best, l_best, bool(edge), lam_m, lam_l)


def _refine_grid_peak(f, grid: np.ndarray, i: int) -> tuple[float, float]:
    lo = math.log(grid[max(0, i - 1)])
    hi = math.log(grid[min(len(grid) - 1, i + 1)])
    if hi <= lo:
        return f(grid[i]), float(grid[i])
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc, fd = f(math.exp(c)), f(math.exp(d))
    for _ in range(60):
        if hi - lo < 1e-12:
            break
        if fc > fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = f(math.exp(c))
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = f(math.exp(d))
    lam = math.exp(0.5 * (lo + hi))
    return max(f(lam), fc, fd), lam


# --------------------------------------------------------------------------
# plain-text operator grammar
# --------------------------------------------------------------------------

_CALL_RE = re.compile(r"^\s*(shifted|inverse|frac_power)\s*\((.*)\)\s*$", re.S)
_LEAF_RE = re.compile(r"^\s*(diagonal|dense|torus_laplacian)\s*(.*)$", re.S)


def _split_top_level(body: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in body:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [p.strip() for p in parts if p.strip()]


def build_operator(spec: str) -> OperatorHandle:
    """Parse a plain-text operator description.

    Examples: "diagonal [1,2,4]", "torus_laplacian n=16",
    "torus_laplacian n=8 dims=2", "dense [[2,1],[0,3]]",
    "inverse(diagonal [1,2,4])", "shifted(diagonal [1,4], eps=1)",
    "frac_power(torus_laplacian n=64, 0.5)".
    """
    call = _CALL_RE.match(spec)
    if call:
        name, body = call.group(1), call.group(2)
        args = _split_top_level(body)
        if not args:
            raise ValueError(f"{name}(...) needs arguments")
        base = build_operator(args[0])
        if name == "inverse":
            if len(args) != 1:
                raise ValueError("inverse(...) takes exactly one operator argument")
            return OperatorHandle.inverse(base)
        if len(args) != 2:
            raise ValueError(f"{name}(...) takes an operator and one parameter")
        parm = args[1]
        value = float(parm.split("=", 1)[1] if "=" in parm else parm)
        if name == "shifted":
            return OperatorHandle.shifted(base, value)
        return OperatorHandle.frac_power(base, value)

    leaf = _LEAF_RE.match(spec)
    if not leaf:
        raise ValueError(f"unknown operator kind in {spec!r}")
    name, rest = leaf.group(1), leaf.group(2).strip()
    if name == "diagonal":
        try:
            values = json.loads(rest)
        except json.JSONDecodeError as exc:
            raise ValueError(f"diagonal needs a JSON list, got {rest!r}") from exc
        return OperatorHandle.diagonal(values)
    if name == "dense":
        try:
            values = json.loads(rest)
        except json.JSONDecodeError as exc:
            raise ValueError(f"dense needs a JSON matrix, got {rest!r}") from exc
        return OperatorHandle.dense(values)
    kv = dict(re.findall(r"(\w+)\s*=\s*([\w.+-]+)", rest))
    unknown = set(kv) - {"n", "dims"}
    if unknown:
        raise ValueError(f"unknown torus_laplacian parameters {sorted(unknown)}")
    if "n" not in kv:
        raise ValueError("torus_laplacian needs n=<grid size>")
    return OperatorHandle.torus_laplacian(int(kv["n"]), int(kv.get("dims", 1)))
