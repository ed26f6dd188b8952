from __future__ import annotations

from dataclasses import dataclass

from .errors import ArgumentError, UnsupportedRegimeError


@dataclass(frozen=True)
class ProblemDims:
    """Degree ``k`` of the leading homogeneous part and half-dimension ``n``.

    ``k > 2`` is enforced (the critical point is totally degenerate). The
    regime ``k < 2n`` can be represented but every trace assembly rejects it.
    """

    k: int
    n: int

    def __post_init__(self):
        if int(self.k) != self.k or int(self.n) != self.n:
            raise ArgumentError("k and n must be integers")
        if self.k <= 2:
            raise ArgumentError(f"degree k = {self.k} violates hypothesis (H2): need k > 2")
        if self.n < 1:
            raise ArgumentError("half-dimension n must be >= 1")

    @property
    def regime(self) -> str:
        if self.k > 2 * self.n:
            return "k>2n"
        if self.k == 2 * self.n:
            return "k=2n"
        return "k<2n"

    @property
    def dim(self) -> int:
        return 2 * self.n

    def require_trace_regime(self) -> None:
        if self.regime == "k<2n":
            raise UnsupportedRegimeError(f"k = {self.k} < 2n = {2 * self.n} is not covered")


def as_kn(dims) -> tuple[int, int]:
    """Accept a ProblemDims or a plain ``(k, n)`` pair.

    The model integrals are also meaningful for k = 2 (the logarithmic
    example), so the quadrature layer takes bare pairs without the k > 2 check.
    """
    if isinstance(dims, ProblemDims):
        return dims.k, dims.n
    k, n = dims
    if int(k) != k or int(n) != n or k < 1 or n < 1:
        raise ArgumentError(f"bad (k, n) = {dims!r}")
    return int(k), int(n)
