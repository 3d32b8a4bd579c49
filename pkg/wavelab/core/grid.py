"""Periodic-box discretization, transforms and Fourier multipliers.

Two layouts share one interface:

* ``full3d`` -- an n^3 periodic box [-L/2, L/2)^3 transformed with ``fftn``.
* ``radial1d`` -- the symmetric line [-L/2, L/2) holding the even profile
  u(|x|) of a radial function on R^3. The transform is the 1-D FFT of the
  odd function w = x*u, so a radial multiplier m(|xi|) on R^3 acts on w as the
  1-D multiplier m(|k|). The inverse divides by x and recovers the origin
  value from u(0) = w'(0). Integrals over R^3 carry the weight 2*pi*x^2*h.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from .errors import DomainError

logger = logging.getLogger(__name__)


class GridMode(str, Enum):
    FULL3D = "full3d"
    RADIAL1D = "radial1d"


_MODE_CODES = {GridMode.FULL3D: 0, GridMode.RADIAL1D: 1}


@dataclass(frozen=True)
class GridSpec:
    mode: GridMode
    n_points: int
    box_length: float

    def __post_init__(self):
        object.__setattr__(self, "mode", GridMode(self.mode))
        n = self.n_points
        if n < 8 or n & (n - 1):
            raise DomainError(f"n_points must be a power of two >= 8, got {n}")
        if not self.box_length > 0:
            raise DomainError(f"box_length must be positive, got {self.box_length}")

    @property
    def d(self) -> int:
        return 3 if self.mode is GridMode.FULL3D else 1

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.n_points,) * self.d

    @property
    def spacing(self) -> float:
        return self.box_length / self.n_points


@dataclass
class Field:
    """Real samples of u or u_t on the grid."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise DomainError(f"field shape {self.values.shape} does not match grid {self.grid.shape}")

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    def __add__(self, other: "Field") -> "Field":
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        return Field(self.grid, self.values - other.values)

    def __neg__(self) -> "Field":
        return Field(self.grid, -self.values)

    def scaled(self, factor: float) -> "Field":
        return Field(self.grid, factor * self.values)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "Field":
        return cls(grid, np.zeros(grid.shape))


@dataclass
class SpectralField:
    grid: GridSpec
    coeffs: np.ndarray


@dataclass
class Trajectory:
    """Fields sampled on a time grid; ``ut`` is optional."""

    grid: GridSpec
    times: np.ndarray
    u: np.ndarray
    ut: Optional[np.ndarray] = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        expected = (len(self.times),) + self.grid.shape
        if self.u.shape != expected:
            raise DomainError(f"trajectory shape {self.u.shape}, expected {expected}")
        if self.ut is not None and self.ut.shape != expected:
            raise DomainError(f"trajectory velocity shape {self.ut.shape}, expected {expected}")

    def __len__(self) -> int:
        return len(self.times)

    def field(self, m: int) -> Field:
        return Field(self.grid, self.u[m])

    def velocity(self, m: int) -> Field:
        if self.ut is None:
            raise DomainError("trajectory carries no velocity")
        return Field(self.grid, self.ut[m])

    def __sub__(self, other: "Trajectory") -> "Trajectory":
        ut = None
        if self.ut is not None and other.ut is not None:
            ut = self.ut - other.ut
        return Trajectory(self.grid, self.times, self.u - other.u, ut)

    def scaled(self, factor: float) -> "Trajectory":
        ut = None if self.ut is None else factor * self.ut
        return Trajectory(self.grid, self.times, factor * self.u, ut)

    def shifted(self, offset: float) -> "Trajectory":
        return Trajectory(self.grid, self.times + offset, self.u, self.ut)

    def is_finite(self) -> bool:
        ok = bool(np.all(np.isfinite(self.u)))
        if self.ut is not None:
            ok = ok and bool(np.all(np.isfinite(self.ut)))
        return ok

    @classmethod
    def frozen(cls, f: Field, times: np.ndarray) -> "Trajectory":
        times = np.asarray(times, dtype=float)
        return cls(f.grid, times, np.broadcast_to(f.values, (len(times),) + f.grid.shape).copy())

    @classmethod
    def concatenate(cls, pieces: "list[Trajectory]") -> "Trajectory":
        """Join consecutive pieces, dropping each repeated junction node."""
        times = [pieces[0].times]
        u = [pieces[0].u]
        ut = [pieces[0].ut]
        for piece in pieces[1:]:
            times.append(piece.times[1:])
            u.append(piece.u[1:])
            ut.append(None if piece.ut is None else piece.ut[1:])
        velocity = None if any(v is None for v in ut) else np.concatenate(ut)
        return cls(pieces[0].grid, np.concatenate(times), np.concatenate(u), velocity)


def littlewood_paley_bump(rho: np.ndarray) -> np.ndarray:
    """phi(rho) = 1 on rho <= 1, exp(1 - 1/(1 - (rho-1)^2)) on (1, 2), 0 beyond."""
    rho = np.asarray(rho, dtype=float)
    out = np.zeros_like(rho)
    out[rho <= 1] = 1.0
    mid = (rho > 1) & (rho < 2)
    t = rho[mid] - 1.0
    out[mid] = np.exp(1.0 - 1.0 / (1.0 - t * t))
    return out


class SpectralGrid:
    """Transforms, multipliers and quadrature on a :class:`GridSpec`."""

    def __init__(self, spec: GridSpec, dealias: bool = False):
        self.spec = spec
        self.dealias_enabled = dealias
        n, h = spec.n_points, spec.spacing
        axis = -spec.box_length / 2 + h * np.arange(n)
        k = 2 * np.pi * np.fft.fftfreq(n, d=h)
        k_deriv = k.copy()
        k_deriv[n // 2] = 0.0  # Nyquist mode has no odd counterpart
        self.axis = axis
        self.k_axis = k
        if spec.mode is GridMode.FULL3D:
            self.coords = np.meshgrid(axis, axis, axis, indexing="ij")
            self.wavenumbers = np.meshgrid(k, k, k, indexing="ij")
            self._deriv = np.meshgrid(k_deriv, k_deriv, k_deriv, indexing="ij")
            self.radius = np.sqrt(sum(c * c for c in self.coords))
            self.xi_abs = np.sqrt(sum(kk * kk for kk in self.wavenumbers))
            self.weights = np.full(spec.shape, h**3)
            self.spectral_weight = h**3 / n**3
        else:
            self.coords = [axis]
            self.wavenumbers = [k]
            self._deriv = [k_deriv]
            self.radius = np.abs(axis)
            self.xi_abs = np.abs(k)
            self.weights = 2 * np.pi * axis**2 * h
            self.spectral_weight = 2 * np.pi * h / n
            self.origin = n // 2
            self._nonzero = axis != 0
        cutoff = (2.0 / 3.0) * np.pi * n / spec.box_length
        self._dealias_mask = np.ones(spec.shape, dtype=bool)
        for kk in self.wavenumbers:
            self._dealias_mask &= np.abs(kk) <= cutoff

    @property
    def xi_max(self) -> float:
        return float(self.xi_abs.max())

    @property
    def xi_min(self) -> float:
        return 2 * np.pi / self.spec.box_length

    def _check(self, f: Union[Field, SpectralField]) -> None:
        if f.grid != self.spec:
            raise DomainError(f"field grid {f.grid} does not match {self.spec}")

    # transforms

    def forward(self, f: Field) -> SpectralField:
        self._check(f)
        if self.spec.mode is GridMode.FULL3D:
            return SpectralField(self.spec, np.fft.fftn(f.values))
        return SpectralField(self.spec, np.fft.fft(self.axis * f.values))

    def inverse(self, F: SpectralField) -> Field:
        self._check(F)
        if self.spec.mode is GridMode.FULL3D:
            return Field(self.spec, np.fft.ifftn(F.coeffs).real)
        w = np.fft.ifft(F.coeffs).real
        values = np.empty_like(w)
        values[self._nonzero] = w[self._nonzero] / self.axis[self._nonzero]
        values[self.origin] = np.fft.ifft(1j * self._deriv[0] * F.coeffs).real[self.origin]
        return Field(self.spec, values)

    def is_conjugate_symmetric(self, F: SpectralField, rtol: float = 1e-12) -> bool:
        c = F.coeffs
        axes = tuple(range(c.ndim))
        mirrored = np.roll(np.flip(c, axis=axes), shift=1, axis=axes)
        scale = max(float(np.abs(c).max()), np.finfo(float).tiny)
        return float(np.abs(c - np.conj(mirrored)).max()) <= rtol * scale

    # multipliers

    def apply_multiplier(self, f: Field, symbol: np.ndarray) -> Field:
        F = self.forward(f)
        return self.inverse(SpectralField(self.spec, F.coeffs * symbol))

    def fractional_symbol(self, s: float) -> np.ndarray:
        """|xi|^s with the zero mode set to 0."""
        if s < 0:
            raise DomainError(f"fractional order must be >= 0, got {s}")
        out = np.zeros(self.spec.shape)
        nz = self.xi_abs > 0
        out[nz] = self.xi_abs[nz] ** s
        return out

    def fractional_derivative(self, f: Field, s: float) -> Field:
        """D^s f with symbol |xi|^s; the zero mode is annihilated for every s."""
        return self.apply_multiplier(f, self.fractional_symbol(s))

    def laplacian(self, f: Field) -> Field:
        """Spectral Laplacian, symbol -|xi|^2."""
        return self.apply_multiplier(f, -self.xi_abs**2)

    def dyad_range(self) -> Tuple[int, int]:
        """Dyadic exponents j whose annulus [2^(j-1), 2^(j+1)] meets the resolved band."""
        j_min = math.floor(math.log2(self.xi_min)) - 1
        while 2.0 ** (j_min + 1) <= self.xi_min:
            j_min += 1
        j_max = math.ceil(math.log2(self.xi_max)) + 1
        while 2.0 ** (j_max - 1) >= self.xi_max:
            j_max -= 1
        return j_min, j_max

    def lp_symbol(self, N: float) -> np.ndarray:
        """Littlewood-Paley annulus symbol for the dyad N, supported on N/2 <= |xi| <= 2N."""
        return littlewood_paley_bump(self.xi_abs / N) - littlewood_paley_bump(2 * self.xi_abs / N)

    def lp_project(self, f: Field, N: float) -> Field:
        """Dyadic annulus projection P_N."""
        j = math.log2(N)
        if abs(j - round(j)) > 1e-12:
            raise DomainError(f"N = {N} is not dyadic")
        j_min, j_max = self.dyad_range()
        if not j_min <= round(j) <= j_max:
            logger.warning(f"Dyad N = {N} outside resolvable range [2^{j_min}, 2^{j_max}]; returning zero field")
            return Field.zeros(self.spec)
        return self.apply_multiplier(f, self.lp_symbol(N))

    def dealias(self, f: Field) -> Field:
        """2/3-rule truncation; identity when dealiasing is off."""
        if not self.dealias_enabled:
            return f
        return self.apply_multiplier(f, self._dealias_mask.astype(float))

    # quadrature

    def integrate(self, density: np.ndarray) -> float:
        """Quadrature of a density over R^3 (radial weights 2 pi x^2 h on the line)."""
        return float(np.sum(self.weights * density))

    def lp_norm(self, f: Field, p: float) -> float:
        """L^p norm over R^3; p may be math.inf."""
        if math.isinf(p):
            return float(np.abs(f.values).max())
        return self.integrate(np.abs(f.values) ** p) ** (1.0 / p)

    def spectral_sum(self, F: SpectralField, symbol: Optional[np.ndarray] = None) -> float:
        """Weighted sum of |coeffs|^2 (times symbol), the Parseval side of an L^2 integral."""
        power = np.abs(F.coeffs) ** 2
        if symbol is not None:
            power = power * symbol
        return float(self.spectral_weight * np.sum(power))

    def sobolev_norm(self, f: Field, s: float) -> float:
        """Homogeneous Ḣ^s norm; the zero mode is excluded."""
        return math.sqrt(self.spectral_sum(self.forward(f), self.fractional_symbol(2 * s)))

    def gradient_energy(self, f: Field) -> float:
        """Integral of |grad u|^2, consistent with the spectral Laplacian."""
        return self.spectral_sum(self.forward(f), self.xi_abs**2)


def write_snapshot(path: Union[str, Path], f: Field, t: float) -> None:
    """Binary snapshot: int64 mode, int64 n, float64 L, float64 t, then row-major float64 values.

    Everything little-endian.
    """
    header = np.array([_MODE_CODES[f.grid.mode], f.grid.n_points], dtype="<i8").tobytes()
    header += np.array([f.grid.box_length, t], dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes(order="C"))


def read_snapshot(path: Union[str, Path]) -> Tuple[Field, float]:
    raw = Path(path).read_bytes()
    mode_code, n = np.frombuffer(raw[:16], dtype="<i8")
    box_length, t = np.frombuffer(raw[16:32], dtype="<f8")
    mode = {code: m for m, code in _MODE_CODES.items()}[int(mode_code)]
    spec = GridSpec(mode, int(n), float(box_length))
    values = np.frombuffer(raw[32:], dtype="<f8").reshape(spec.shape).astype(float)
    return Field(spec, values), float(t)
