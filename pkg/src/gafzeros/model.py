"""Model specification shared by every module."""

from __future__ import annotations

from dataclasses import dataclass

FAMILIES = ("iid", "tridiag", "kms", "fgn", "fgn0")
MODES = ("inverse", "direct")


class DomainError(ValueError):
    """A parameter lies outside the range where a formula is valid."""


class NotPositiveDefiniteError(ValueError):
    """Raised when a Cholesky pivot is not strictly positive."""

    def __init__(self, index: int, pivot: float):
        self.index = index
        self.pivot = pivot
        super().__init__(
            f"matrix is not positive definite: pivot {pivot!r} at index {index}"
        )


class IllConditionedError(ValueError):
    """Raised when a computation would divide by a numerically zero quantity."""


@dataclass(frozen=True)
class ModelSpec:
    """Toeplitz family plus coefficient-covariance mode.

    Parameters
    ----------
    family : {'iid', 'tridiag', 'kms', 'fgn', 'fgn0'}
        ``iid`` is the identity matrix; ``tridiag`` has gamma(+-1) = q with
        real ``|q| < 1/2``; ``kms`` has gamma(k) = q^k for k >= 0 with complex
        ``|q| < 1``; ``fgn`` is fractional Gaussian noise with Hurst index
        ``0 < h < 1``; ``fgn0`` is the h = 0 limit matrix (gamma(+-1) = -1/2).
    q, h : float
        Family parameters; ignored where irrelevant.
    mode : {'inverse', 'direct'}
        Coefficients have covariance G^-1 (``inverse``) or G (``direct``).
    """

    family: str = "iid"
    q: complex = 0.0
    h: float = 0.5
    mode: str = "inverse"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.mode not in MODES:
            raise DomainError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.family == "tridiag":
            if complex(self.q).imag != 0:
                raise DomainError("tridiag requires real q")
            q = float(complex(self.q).real)
            if not abs(q) < 0.5:
                raise DomainError(f"tridiag requires |q| < 1/2, got q={q}")
            object.__setattr__(self, "q", q)
        elif self.family == "kms":
            q = complex(self.q)
            if not abs(q) < 1:
                raise DomainError(f"kms requires |q| < 1, got |q|={abs(q)}")
            object.__setattr__(self, "q", q.real if q.imag == 0 else q)
        elif self.family == "fgn":
            if not 0 < self.h < 1:
                raise DomainError(f"fgn requires 0 < h < 1, got h={self.h}")

    @property
    def is_real(self) -> bool:
        return complex(self.q).imag == 0

    def describe(self) -> str:
        if self.family == "tridiag":
            par = f"q={self.q!r}"
        elif self.family == "kms":
            par = f"q={self.q!r}"
        elif self.family == "fgn":
            par = f"h={self.h!r}"
        else:
            par = ""
        return f"{self.family}({par}) mode={self.mode}"
