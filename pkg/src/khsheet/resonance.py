"""Super-action-preserving classification of multi-indices, small-divisor
computation, and Weber-number scans.

A multi-index is a tuple of nonzero modes j_a with signs sigma_a.  Its
multiplicity vectors count (j, +) and (j, -) occurrences; the index is
super-action preserving (SAP) when the +/- multiplicities balance within
every pair {n, -n}.  The small divisor is sum_a sigma_a * omega(|j_a|); it
vanishes identically on SAP indices and is scanned for near-zeros on the
momentum-preserving non-SAP classes.
"""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .linear import omega
from .state import PhysParams

MAX_P = 6
MAX_J = 60
BETA_PLUS_CONTINUOUS = 4.0 * (2.0 + np.sqrt(3.0))


@dataclass(frozen=True)
class MultiIndex:
    js: tuple
    sigmas: tuple

    def __post_init__(self):
        if len(self.js) != len(self.sigmas) or not self.js:
            raise ValueError("js and sigmas must be nonempty and equally long")
        if any(not isinstance(j, int) or j == 0 for j in self.js):
            raise ValueError("modes must be nonzero integers")
        if any(s not in (1, -1) for s in self.sigmas):
            raise ValueError("signs must be +1 or -1")

    @property
    def length(self) -> int:
        return len(self.js)

    @property
    def momentum(self) -> int:
        return sum(s * j for j, s in zip(self.js, self.sigmas))

    @property
    def max_abs_j(self) -> int:
        return max(abs(j) for j in self.js)

    def multiplicities(self) -> tuple[Counter, Counter]:
        """(alpha, alpha_prime): counts of (j, +) and (j, -) occurrences."""
        alpha: Counter = Counter()
        alpha_prime: Counter = Counter()
        for j, s in zip(self.js, self.sigmas):
            (alpha if s > 0 else alpha_prime)[j] += 1
        return alpha, alpha_prime

    def canonical(self) -> "MultiIndex":
        """Representative under permutation and global sign flip."""
        straight = tuple(sorted(zip(self.js, self.sigmas)))
        flipped = tuple(sorted((j, -s) for j, s in zip(self.js, self.sigmas)))
        best = min(straight, flipped)
        return MultiIndex(js=tuple(j for j, _ in best), sigmas=tuple(s for _, s in best))

    def serialize(self) -> str:
        return ",".join(f"{j}:{'+' if s > 0 else '-'}" for j, s in zip(self.js, self.sigmas))


def classify_sap(index: MultiIndex) -> bool:
    """True iff alpha_n + alpha_{-n} = alpha'_n + alpha'_{-n} for every n."""
    alpha, alpha_prime = index.multiplicities()
    for n in {abs(j) for j in index.js}:
        if alpha[n] + alpha[-n] != alpha_prime[n] + alpha_prime[-n]:
            return False
    return True


def divisor(index: MultiIndex, params: PhysParams) -> float:
    """sum_a sigma_a * omega(|j_a|); exactly zero on paired SAP structure
    since omega is even in j."""
    return float(sum(s * omega(abs(j), params) for j, s in zip(index.js, index.sigmas)))


def _check_budget(p_max: int, j_max: int) -> None:
    if p_max < 2 or p_max > MAX_P:
        raise ValueError(f"p_max must be in 2..{MAX_P}, got {p_max} (budget exceeded)")
    if j_max < 1 or j_max > MAX_J:
        raise ValueError(f"j_max must be in 1..{MAX_J}, got {j_max} (budget exceeded)")


_class_cache: dict = {}


def enumerate_nonsap_classes(p_max: int, j_max: int) -> list[MultiIndex]:
    """All momentum-preserving non-SAP indices of length <= p_max with
    |j| <= j_max, deduplicated up to permutation and global sign flip,
    in deterministic order."""
    _check_budget(p_max, j_max)
    key = (p_max, j_max)
    if key in _class_cache:
        return _class_cache[key]

    # symbols (j, s) sorted; sequences are chosen nondecreasing in symbol index
    symbols = [(j, s) for j in range(-j_max, j_max + 1) if j != 0 for s in (-1, 1)]
    momenta = [s * j for j, s in symbols]
    by_momentum: dict = {}
    for idx, m in enumerate(momenta):
        by_momentum.setdefault(m, []).append(idx)

    seen = set()
    classes = []

    def emit(chosen):
        js = tuple(symbols[i][0] for i in chosen)
        sigmas = tuple(symbols[i][1] for i in chosen)
        index = MultiIndex(js=js, sigmas=sigmas).canonical()
        key_ser = (index.js, index.sigmas)
        if key_ser in seen:
            return
        seen.add(key_ser)
        if not classify_sap(index):
            classes.append(index)

    def extend(chosen, start, mom, remaining):
        if remaining == 1:
            for idx in by_momentum.get(-mom, ()):
                if idx >= start:
                    emit(chosen + (idx,))
            return
        for idx in range(start, len(symbols)):
            new_mom = mom + momenta[idx]
            if abs(new_mom) > (remaining - 1) * j_max:
                continue
            extend(chosen + (idx,), idx, new_mom, remaining - 1)

    for p in range(2, p_max + 1):
        extend((), 0, 0, p)

    classes.sort(key=lambda ix: (ix.length, ix.js, ix.sigmas))
    _class_cache[key] = classes
    return classes


def _count_matrix(classes, j_max: int) -> np.ndarray:
    """C[c, n-1] = sum of signs over entries with |j| = n, so that the
    divisor vector is C @ omega(1..j_max)."""
    count = np.zeros((len(classes), j_max))
    for row, index in enumerate(classes):
        for j, s in zip(index.js, index.sigmas):
            count[row, abs(j) - 1] += s
    return count


@dataclass(frozen=True)
class DivisorRecord:
    index: MultiIndex
    divisor: float
    max_j: int
    is_sap: bool = False


@dataclass(frozen=True)
class DivisorScan:
    records: tuple
    shell_minima: dict
    tau_hat: float | None

    @property
    def min_abs_divisor(self) -> float:
        return abs(self.records[0].divisor) if self.records else float("inf")


def scan_divisors(params: PhysParams, p_max: int, j_max: int) -> DivisorScan:
    """Evaluate every non-SAP momentum-preserving class, sorted by |divisor|;
    the tau estimate regresses log(min |divisor| per max_j shell) on
    log(max_j) and is reported, never asserted."""
    classes = enumerate_nonsap_classes(p_max, j_max)
    omegas = omega(np.arange(1, j_max + 1), params)
    divisors = _count_matrix(classes, j_max) @ omegas

    records = [DivisorRecord(index=ix, divisor=float(d), max_j=ix.max_abs_j)
               for ix, d in zip(classes, divisors)]
    records.sort(key=lambda r: (abs(r.divisor), r.index.js, r.index.sigmas))

    shell_minima: dict = {}
    for rec in records:
        best = shell_minima.get(rec.max_j)
        if best is None or abs(rec.divisor) < best:
            shell_minima[rec.max_j] = abs(rec.divisor)

    tau_hat = None
    positive = [(j, d) for j, d in sorted(shell_minima.items()) if d > 0]
    if len(positive) >= 2:
        xs = np.log([j for j, _ in positive])
        ys = np.log([d for _, d in positive])
        slope, _ = np.polyfit(xs, ys, 1)
        tau_hat = float(-slope)

    return DivisorScan(records=tuple(records), shell_minima=shell_minima, tau_hat=tau_hat)


@dataclass(frozen=True)
class BetaScanRow:
    beta: float
    min_abs_divisor: float
    argmin_index: MultiIndex | None
    flagged: bool


@dataclass(frozen=True)
class BetaScan:
    rows: tuple
    eps: float
    identity_max_dev: float

    @property
    def flagged_fraction(self) -> float:
        if not self.rows:
            return 0.0
        return sum(r.flagged for r in self.rows) / len(self.rows)


def scan_beta(beta_lo: float, beta_hi: float, samples: int, gamma: float,
              p_max: int, j_max: int, eps: float, workers: int = 1) -> BetaScan:
    """Sample the Weber number uniformly on [beta_lo, beta_hi]; for each
    sample record the minimum non-SAP |divisor| and flag dips below eps.

    The exact relations omega(2)^2 = 3*gamma and omega(5)^2 = 5*omega(3)^2
    are spot-checked at every sample; the worst deviation is reported.
    """
    if not 0.0 < beta_lo < beta_hi < BETA_PLUS_CONTINUOUS:
        raise ValueError("need 0 < beta_lo < beta_hi < 4(2+sqrt(3))")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    classes = enumerate_nonsap_classes(p_max, j_max)
    count = _count_matrix(classes, j_max)
    betas = np.linspace(beta_lo, beta_hi, samples)
    ks = np.arange(1, j_max + 1)

    def eval_one(beta: float):
        params = PhysParams.from_beta(gamma, beta)
        w = omega(ks, params)
        dev = max(abs(omega(2, params) ** 2 - 3.0 * gamma),
                  abs(omega(5, params) ** 2 - 5.0 * omega(3, params) ** 2))
        if len(classes) == 0:
            return BetaScanRow(beta=float(beta), min_abs_divisor=float("inf"),
                               argmin_index=None, flagged=False), dev
        divisors = count @ w
        pos = np.abs(divisors)
        arg = int(np.argmin(pos))
        dmin = float(pos[arg])
        return BetaScanRow(beta=float(beta), min_abs_divisor=dmin,
                           argmin_index=classes[arg], flagged=dmin < eps), dev

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(eval_one, betas))
    else:
        results = [eval_one(b) for b in betas]

    rows = tuple(r for r, _ in results)
    identity_max_dev = max((d for _, d in results), default=0.0)
    return BetaScan(rows=rows, eps=eps, identity_max_dev=float(identity_max_dev))


def arithmetic_resonant_pairs(n_hi: int = 200) -> list:
    """Brute force over 2 <= n_a < n_b <= n_hi for solutions of
    (2-n_a)(n_b^2-1) = (2-n_b)(n_a^2-1); exact integer arithmetic."""
    hits = []
    for na in range(2, n_hi + 1):
        for nb in range(na + 1, n_hi + 1):
            if (2 - na) * (nb**2 - 1) == (2 - nb) * (na**2 - 1):
                hits.append((na, nb))
    return hits
