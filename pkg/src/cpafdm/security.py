"""Security analysis: random-guess combinatorics and exhaustive-search attack costs.

A guessed permutation is "``l`` elements close" to the secret one when the two
agree at exactly ``l`` positions. The number of such permutations is
``C(N, l) * D(N - l)`` with ``D`` the derangement numbers, so the guess
probability is ``P_l = C(N, l) D(N-l) / N! = (1/l!) sum_{n<=N-l} (-1)^n / n!``.
"""

from __future__ import annotations

import math
import threading
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Union

import mpmath
import numpy as np

from .transforms import PermutationKey

#: Guess probabilities are exact rationals up to this N and 50-digit mpmath floats above it.
EXACT_MODE_MAX_N = 512
HIGH_PRECISION_DPS = 50

Probability = Union[Fraction, mpmath.mpf]


class SecurityError(ValueError):
    pass


class _DerangementTable:
    """Grow-only table of derangement numbers, safe for concurrent readers."""

    def __init__(self) -> None:
        self._values = [1, 0]
        self._lock = threading.Lock()

    def __call__(self, n: int) -> int:
        if n < 0:
            raise SecurityError(f"derangement index must be >= 0, got {n}")
        values = self._values
        if n < len(values):
            return values[n]
        with self._lock:
            values = self._values
            while len(values) <= n:
                m = len(values)
                values.append((m - 1) * (values[-1] + values[-2]))
            return values[n]


derangement_count = _DerangementTable()
derangement_count.__doc__ = "Exact derangement number ``D_n = (n-1)(D_{n-1} + D_{n-2})``."


def _check(N: int, l: int) -> None:
    if N < 1:
        raise SecurityError(f"N must be >= 1, got {N}")
    if not 0 <= l <= N:
        raise SecurityError(f"l must lie in [0, {N}], got {l}")


def _exact_mode(N: int, exact: bool | None) -> bool:
    return N <= EXACT_MODE_MAX_N if exact is None else exact


def guess_pmf_counting(N: int, l: int) -> Fraction:
    """``C(N, l) D_{N-l} / N!`` as an exact rational."""
    _check(N, l)
    return Fraction(math.comb(N, l) * derangement_count(N - l), math.factorial(N))


def guess_pmf_series(N: int, l: int) -> Fraction:
    """``(1/l!) sum_{n=0}^{N-l} (-1)^n / n!`` as an exact rational."""
    _check(N, l)
    m = N - l
    # common denominator m!: sum_n (-1)^n m!/n!
    acc, term = 0, 1
    for n in range(m, -1, -1):
        acc += term if n % 2 == 0 else -term
        term *= n if n else 1
    return Fraction(acc, math.factorial(m) * math.factorial(l))


def _series_mp(N: int, l: int) -> mpmath.mpf:
    m = N - l
    total = mpmath.mpf(0)
    term = mpmath.mpf(1)
    eps = mpmath.mpf(10) ** (-(mpmath.mp.dps + 10))
    for n in range(m + 1):
        total += term if n % 2 == 0 else -term
        term /= n + 1
        if term < eps:
            break
    return total / mpmath.factorial(l)


def _counting_mp(N: int, l: int) -> mpmath.mpf:
    # exact big integers, converted once; mpf exponents cannot underflow
    return mpmath.mpf(math.comb(N, l) * derangement_count(N - l)) / mpmath.mpf(math.factorial(N))


def guess_pmf(N: int, l: int, exact: bool | None = None) -> Probability:
    """Probability that a uniformly random key agrees with the secret one at exactly ``l`` positions.

    Returns a :class:`~fractions.Fraction` in exact mode (default for
    ``N <= 512``) and a 50-digit ``mpmath.mpf`` otherwise. Both closed forms
    are evaluated and must agree.
    """
    _check(N, l)
    if _exact_mode(N, exact):
        a, b = guess_pmf_counting(N, l), guess_pmf_series(N, l)
        if a != b:
            raise AssertionError(f"P_{l} forms disagree for N={N}: {a} vs {b}")
        return a
    with mpmath.workdps(HIGH_PRECISION_DPS):
        a, b = _counting_mp(N, l), _series_mp(N, l)
        if abs(a - b) > mpmath.mpf(10) ** -40 * max(abs(a), abs(b)):
            raise AssertionError(f"P_{l} forms disagree for N={N}")
        return +a


def guess_cdf_wrong(N: int, l_max: int, exact: bool | None = None) -> Probability:
    """Probability of at most ``l_max`` correct positions, i.e. at least ``N - l_max`` wrong ones."""
    _check(N, l_max)
    if _exact_mode(N, exact):
        return sum((guess_pmf(N, l, True) for l in range(l_max + 1)), Fraction(0))
    with mpmath.workdps(HIGH_PRECISION_DPS):
        return mpmath.fsum(guess_pmf(N, l, False) for l in range(l_max + 1))


@dataclass(frozen=True)
class GuessDistribution:
    N: int
    pmf: tuple
    cdf_wrong: tuple

    @property
    def exact(self) -> bool:
        return isinstance(self.pmf[0], Fraction)


def guess_distribution(N: int, l_max: int | None = None, exact: bool | None = None) -> GuessDistribution:
    """PMF and cumulative distribution for ``l = 0..l_max`` (all of ``0..N`` by default)."""
    l_max = N if l_max is None else l_max
    _check(N, l_max)
    exact = _exact_mode(N, exact)
    pmf = [guess_pmf(N, l, exact) for l in range(l_max + 1)]
    cdf, acc = [], Fraction(0) if exact else mpmath.mpf(0)
    with mpmath.workdps(HIGH_PRECISION_DPS):
        for p in pmf:
            acc = acc + p
            cdf.append(acc)
    return GuessDistribution(N=N, pmf=tuple(pmf), cdf_wrong=tuple(cdf))


# ---------------------------------------------------------------------------
# attack costs


def log10_factorial(N: int) -> float:
    return math.lgamma(N + 1) / math.log(10)


def log2_factorial(N: int) -> float:
    """``log2(N!)`` as a compensated sum of ``log2(k)``."""
    return math.fsum(math.log2(k) for k in range(2, N + 1))


def stirling_log2_factorial(N: int) -> float:
    """Truncated Stirling form ``N log2 N - N log2 e`` (no ``O(log N)`` term)."""
    return N * math.log2(N) - N * math.log2(math.e)


def sci_from_log10(x: float, digits: int = 1) -> str:
    """Format ``10**x`` as ``"<mantissa>e<exponent>"`` without overflowing floats."""
    exponent = math.floor(x)
    mantissa = round(10 ** (x - exponent), digits)
    if mantissa >= 10:
        mantissa /= 10
        exponent += 1
    return f"{mantissa:.{digits}f}e{exponent}"


@dataclass(frozen=True)
class ClassicalCost:
    N: int
    per_eval_cost_order: str
    log10_per_eval: float
    classical_log10_evals: float
    log10_total: float
    permutations_exact: int | None


def classical_cost(N: int, lambda_order: float | None = None, exact_upto: int = 170) -> ClassicalCost:
    """Exhaustive-search cost ``lambda * N!``, in log10.

    ``lambda_order`` defaults to ``N**2`` complex operations per candidate.
    """
    if N < 2:
        raise SecurityError(f"N must be >= 2, got {N}")
    if lambda_order is None:
        label, lam = "N^2", float(N) ** 2
    else:
        label, lam = repr(lambda_order), float(lambda_order)
    evals = log10_factorial(N)
    return ClassicalCost(
        N=N,
        per_eval_cost_order=label,
        log10_per_eval=math.log10(lam),
        classical_log10_evals=evals,
        log10_total=evals + math.log10(lam),
        permutations_exact=math.factorial(N) if N <= exact_upto else None,
    )


@dataclass(frozen=True)
class AttackCostReport:
    N: int
    per_eval_cost_order: str
    classical_log10_evals: float
    classical_log10_total: float
    gas_log10_queries: float
    gas_log10_queries_closed_form: float
    logical_qubits: float
    logical_qubits_stirling: float
    physical_qubits_range: tuple[float, float]
    overheads: tuple[float, float]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["classical_evals_display"] = sci_from_log10(self.classical_log10_evals)
        d["gas_queries_display"] = sci_from_log10(self.gas_log10_queries)
        return d

    def meets_qubit_budget(self, available_qubits: float) -> bool:
        """Whether a machine with ``available_qubits`` physical qubits covers the low estimate."""
        return available_qubits >= self.physical_qubits_range[0]


def quantum_cost(N: int, overhead_low: float = 1e3, overhead_high: float = 1e4,
                 lambda_order: float | None = None) -> AttackCostReport:
    """Grover-adaptive-search cost for searching all ``N!`` keys.

    Queries scale as ``sqrt(N!)``; the register needs ``log2(N!)`` logical
    qubits, each backed by ``overhead_low..overhead_high`` physical ones.
    """
    if overhead_low <= 0 or overhead_high < overhead_low:
        raise SecurityError(f"bad overhead range ({overhead_low}, {overhead_high})")
    c = classical_cost(N, lambda_order)
    logical = log2_factorial(N)
    closed = 0.25 * math.log10(2 * math.pi * N) + (N / 2) * math.log10(N / math.e)
    return AttackCostReport(
        N=N,
        per_eval_cost_order=c.per_eval_cost_order,
        classical_log10_evals=c.classical_log10_evals,
        classical_log10_total=c.log10_total,
        gas_log10_queries=0.5 * c.classical_log10_evals,
        gas_log10_queries_closed_form=closed,
        logical_qubits=logical,
        logical_qubits_stirling=stirling_log2_factorial(N),
        physical_qubits_range=(logical * overhead_low, logical * overhead_high),
        overheads=(overhead_low, overhead_high),
    )


# ---------------------------------------------------------------------------
# sampling guesses with a prescribed number of correct positions


def random_derangement(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform derangement of ``0..n-1`` by rejection (about ``e`` draws on average)."""
    if n == 1:
        raise SecurityError("no derangement of a single element exists")
    idx = np.arange(n)
    while True:
        p = rng.permutation(n)
        if not np.any(p == idx):
            return p


def perm_with_fixed_points(truth: np.ndarray, l: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform permutation agreeing with ``truth`` at exactly ``l`` positions."""
    truth = np.asarray(truth)
    N = truth.shape[0]
    if not 0 <= l <= N:
        raise SecurityError(f"l must lie in [0, {N}], got {l}")
    if l == N - 1:
        raise SecurityError(f"exactly N-1 = {l} matching positions is impossible")
    if l == N:
        return truth.copy()
    free = np.sort(rng.choice(N, size=N - l, replace=False))
    out = truth.copy()
    out[free] = truth[free[random_derangement(N - l, rng)]]
    return out


def sample_perm_with_fixed_points(N: int, l: int, truth: PermutationKey,
                                  rng: np.random.Generator) -> PermutationKey:
    if truth.N != N:
        raise SecurityError(f"truth key has N={truth.N}, expected {N}")
    return PermutationKey(perm=tuple(perm_with_fixed_points(truth.array, l, rng).tolist()))


def truncated_pmf(N: int, l_max: int) -> np.ndarray:
    """Float PMF of the number of correct positions conditioned on ``l <= l_max``."""
    p = np.array([float(guess_pmf(N, l)) for l in range(l_max + 1)])
    return p / p.sum()


def sample_fixed_point_count(pmf: np.ndarray, rng: np.random.Generator) -> int:
    cdf = np.cumsum(pmf)
    return int(min(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"), len(pmf) - 1))


def count_fixed_points(a: np.ndarray, b: np.ndarray) -> int:
    return int(np.sum(np.asarray(a) == np.asarray(b)))
