"""Gram matrices, normalized spectra and the spectral bound quantities.

The eigenvalues of K/n come from LAPACK's symmetric divide-and-conquer
solver (``numpy.linalg.eigvalsh``), which is accurate to a small multiple of
machine epsilon times the largest eigenvalue.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, InvalidArgumentError, InvalidKernelError, NumericError

CLAMP_REL = 1e-8
FAMILIES = ("linear", "gaussian", "dot_product_power")


@dataclass(frozen=True)
class KernelSpec:
    """A kernel family with its parameters.

    ``linear``: x.y.  ``gaussian``: exp(-|x-y|^2 / (2 width^2)).
    ``dot_product_power``: (1 + x.y)^exponent.  ``tau0_sq`` is an optional
    bound on K(x, x) that is checked against the data.
    """

    family: str
    exponent: float = 2.0
    width: float = 1.0
    tau0_sq: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidArgumentError(f"unknown kernel family {self.family!r}; expected one of {FAMILIES}")
        if self.family == "gaussian" and not self.width > 0:
            raise InvalidArgumentError("gaussian width must be positive")
        if self.family == "dot_product_power" and not (self.exponent >= 1 and float(self.exponent).is_integer()):
            raise InvalidArgumentError("dot_product_power exponent must be a positive integer")

    @classmethod
    def parse(cls, text: str) -> "KernelSpec":
        """Parse ``family`` or ``family:param`` (``gaussian:0.5``, ``dot_product_power:3``)."""
        family, _, param = text.strip().partition(":")
        try:
            if family == "gaussian":
                return cls(family, width=float(param) if param else 1.0)
            if family == "dot_product_power":
                return cls(family, exponent=float(param) if param else 2.0)
            if param:
                raise InvalidArgumentError(f"kernel {family!r} takes no parameter")
            return cls(family)
        except ValueError as exc:
            raise InvalidArgumentError(f"bad kernel spec {text!r}: {exc}") from exc

    def gram(self, data) -> np.ndarray:
        x = np.asarray(data, dtype=np.float64)
        if x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2 or x.shape[0] < 1:
            raise InvalidArgumentError("data must be an n x d grid with n >= 1")
        dots = x @ x.T
        if self.family == "linear":
            k = dots
        elif self.family == "dot_product_power":
            k = (1.0 + dots) ** int(self.exponent)
        else:
            sq = np.diag(dots)
            dist = np.maximum(sq[:, None] + sq[None, :] - 2 * dots, 0.0)
            k = np.exp(-dist / (2 * self.width**2))
        k = (k + k.T) / 2
        if self.tau0_sq is not None and np.max(np.diag(k)) > self.tau0_sq * (1 + 1e-12):
            raise InvalidKernelError(f"K(x,x) = {np.max(np.diag(k)):.6g} exceeds tau0^2 = {self.tau0_sq}")
        return k


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    tail_sums: np.ndarray = field(init=False)

    def __post_init__(self):
        lam = np.array(self.eigenvalues, dtype=np.float64)
        if lam.ndim != 1 or lam.size == 0:
            raise InvalidArgumentError("spectrum needs at least one eigenvalue")
        if np.any(lam < 0) or np.any(np.diff(lam) > 0):
            raise InvalidArgumentError("eigenvalues must be nonnegative and descending")
        # accumulate from the small end for accuracy
        tail = np.zeros(lam.size + 1)
        tail[:-1] = np.cumsum(lam[::-1])[::-1]
        lam.setflags(write=False)
        tail.setflags(write=False)
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "tail_sums", tail)

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    def rows(self):
        return [(q, float(self.eigenvalues[q - 1]), float(self.tail_sums[q])) for q in range(1, self.n + 1)]

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["q", "lambda_hat", "tail_sum"])
            for q, lam, tail in self.rows():
                w.writerow([q, repr(lam), repr(tail)])


def spectrum_from_matrix(k) -> Spectrum:
    """Spectrum of an already normalized symmetric PSD matrix."""
    k = np.asarray(k, dtype=np.float64)
    try:
        eig = np.linalg.eigvalsh(k)[::-1].copy()
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigensolver failed: {exc}") from exc
    top = max(float(eig[0]), 0.0)
    floor = -CLAMP_REL * top
    if eig[-1] < floor:
        raise InvalidKernelError(f"eigenvalue {eig[-1]:.6g} below -{CLAMP_REL}*lambda_1; kernel is not PSD")
    return Spectrum(np.maximum(eig, 0.0))


def gram_and_spectrum(data, kernel: KernelSpec) -> Spectrum:
    k = kernel.gram(data)
    return spectrum_from_matrix(k / k.shape[0])


def synthetic_spectrum(n: int, alpha: float) -> Spectrum:
    """Power-law spectrum q^(-2 alpha), q = 1..n."""
    if not alpha > 0:
        raise InvalidArgumentError("alpha must be positive")
    if n < 1:
        raise InvalidArgumentError("n must be at least 1")
    return Spectrum(np.arange(1, n + 1, dtype=np.float64) ** (-2.0 * alpha))


def _check_q(spectrum: Spectrum, Q: int):
    if not 0 <= Q <= spectrum.n:
        raise InvalidArgumentError(f"Q={Q} outside [0, {spectrum.n}]")


def r_umQ(spectrum: Spectrum, u: int, m: int, Q: int) -> float:
    """Q (1/u + 1/m) + sqrt(tail_Q / u) + sqrt(tail_Q / m)."""
    if u < 1 or m < 1:
        raise InvalidArgumentError("u and m must be at least 1")
    _check_q(spectrum, Q)
    tail = float(spectrum.tail_sums[Q])
    return Q * (1.0 / u + 1.0 / m) + math.sqrt(tail / u) + math.sqrt(tail / m)


def _all_r(spectrum: Spectrum, u: int, m: int) -> np.ndarray:
    q = np.arange(spectrum.n + 1, dtype=np.float64)
    tail = spectrum.tail_sums
    return q * (1.0 / u + 1.0 / m) + np.sqrt(tail / u) + np.sqrt(tail / m)


def min_r_umQ(spectrum: Spectrum, u: int, m: int) -> tuple[float, int]:
    """Minimum over Q in [0, n] of r(u, m, Q); ties go to the smallest Q."""
    if u < 1 or m < 1:
        raise InvalidArgumentError("u and m must be at least 1")
    vals = _all_r(spectrum, u, m)
    q = int(np.argmin(vals))
    return float(vals[q]), q


def local_kernel_complexity(spectrum: Spectrum, r: float, side_size: int, mu: float) -> float:
    """min over Q of sqrt(r Q / size) + mu sqrt(tail_Q / size)."""
    if r < 0 or mu < 0 or side_size < 1:
        raise InvalidArgumentError("need r >= 0, mu >= 0 and side_size >= 1")
    q = np.arange(spectrum.n + 1, dtype=np.float64)
    vals = np.sqrt(r * q / side_size) + mu * np.sqrt(spectrum.tail_sums / side_size)
    return float(np.min(vals))


def prior_fixed_point_formula(spectrum: Spectrum, s: int, theta: float = 1.0) -> float:
    """theta * min over 0 <= Q <= min(s, n) of Q/s + sqrt(tail_Q / s)."""
    if s < 1:
        raise InvalidArgumentError("s must be at least 1")
    if not theta > 0:
        raise InvalidArgumentError("theta must be positive")
    top = min(s, spectrum.n)
    q = np.arange(top + 1, dtype=np.float64)
    vals = q / s + np.sqrt(spectrum.tail_sums[: top + 1] / s)
    return theta * float(np.min(vals))


def rate_slope(alpha: float, sizes) -> float:
    """Least-squares log-log slope of min_Q (Q/n + sqrt(tail_Q/n)) against n."""
    sizes = np.asarray(sizes, dtype=np.float64)
    vals = [prior_fixed_point_formula(synthetic_spectrum(int(n), alpha), int(n)) for n in sizes]
    return float(np.polyfit(np.log(sizes), np.log(vals), 1)[0])


def load_data(path) -> np.ndarray:
    """Numeric CSV, one point per line; ``#`` lines and a non-numeric header are skipped."""
    rows = []
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    with fh:
        for lineno, cells in enumerate(csv.reader(fh), start=1):
            if not cells or not "".join(cells).strip() or cells[0].lstrip().startswith("#"):
                continue
            try:
                vals = [float(c) for c in cells]
            except ValueError:
                if not rows and lineno == 1:
                    continue
                raise InputError(f"{path}:{lineno}: non-numeric value in {cells!r}") from None
            if not all(math.isfinite(v) for v in vals):
                raise InputError(f"{path}:{lineno}: non-finite value")
            if rows and len(vals) != len(rows[0]):
                raise InputError(f"{path}:{lineno}: expected {len(rows[0])} columns, found {len(vals)}")
            rows.append(vals)
    if not rows:
        raise InputError(f"{path}: no data rows")
    return np.array(rows)


def load_spectrum(path) -> Spectrum:
    """Read a spectrum CSV with a ``lambda_hat`` column (or one bare value per line)."""
    data = load_data(path)
    with open(path, newline="") as fh:
        header = next(csv.reader(fh), [])
    col = header.index("lambda_hat") if "lambda_hat" in header else (1 if data.shape[1] > 1 else 0)
    lam = np.sort(data[:, col])[::-1]
    try:
        return Spectrum(lam)
    except InvalidArgumentError as exc:
        raise InputError(f"{path}: {exc}") from exc
