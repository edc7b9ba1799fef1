"""Randomized response, the debiased mean estimator, and an exact auditor.

The auditor computes, per user, the worst-case log-likelihood ratio of the
transcript distribution between the user's actual datum and each alternative
datum. Responses are conditionally independent given the datum, so the
worst case over realizations decomposes into a sum of per-query terms and is
computed analytically from the recorded Bernoulli parameters, never estimated
from samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Sequence, TextIO

import numpy as np

from .engine import SENTINEL_DATUM, Datum, LdpSimError, Population, Transcript


class AuditError(LdpSimError):
    """The transcript cannot be audited (missing query, bad predicate)."""


def _check_epsilon(epsilon: float) -> float:
    epsilon = float(epsilon)
    if not (epsilon > 0 and math.isfinite(epsilon)):
        raise ValueError(f"epsilon must be positive and finite, got {epsilon}")
    return epsilon


def rr_param(vote: int, epsilon: float) -> float:
    """Bernoulli parameter of randomized response for a 0/1 vote.

    Returns e^eps / (e^eps + 1) for a 1-vote and 1 / (e^eps + 1) for a
    0-vote, evaluated in overflow-safe form.
    """
    _check_epsilon(epsilon)
    if vote:
        return 1.0 / (1.0 + math.exp(-epsilon))
    return math.exp(-epsilon) / (1.0 + math.exp(-epsilon))


@dataclass(frozen=True)
class RRResponse:
    """A single randomized-response bit plus the parameter that produced it."""

    bit: int
    bernoulli_param: float


def rr_sample(vote: int, epsilon: float, rng: np.random.Generator) -> RRResponse:
    """Draw one randomized-response bit for ``vote`` at budget ``epsilon``."""
    param = rr_param(vote, epsilon)
    return RRResponse(bit=int(rng.random() < param), bernoulli_param=param)


def debias(sum_y: int, n: int, epsilon: float) -> float:
    """Unbiased estimate of the true 1-vote fraction from a response sum.

    Inverts the randomized-response mean:
        (1/n) * (e^eps + 1)/(e^eps - 1) * (sum_y - n/(e^eps + 1)).
    The result may fall outside [0, 1].
    """
    _check_epsilon(epsilon)
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0 <= sum_y <= n:
        raise ValueError(f"sum_y must lie in [0, {n}], got {sum_y}")
    e = math.exp(epsilon)
    return (e + 1.0) / (e - 1.0) / n * (sum_y - n / (e + 1.0))


def estimation_halfwidth(epsilon: float, n: int, beta: float) -> float:
    """High-probability half-width of the debiased estimate:
    (eps+2)/(eps*sqrt(2)) * sqrt(ln(4/beta)/n), valid with prob >= 1-beta."""
    _check_epsilon(epsilon)
    return (epsilon + 2.0) / (epsilon * math.sqrt(2.0)) * math.sqrt(math.log(4.0 / beta) / n)


@dataclass(frozen=True)
class RRQuery:
    """A randomized-response call: boolean predicate plus per-call budget.

    ``predicate`` must be a hashable callable mapping a Datum to bool and
    exposing a whitespace-free ``descriptor`` string.
    """

    epsilon: float
    predicate: Any

    def __post_init__(self):
        _check_epsilon(self.epsilon)

    @property
    def descriptor(self) -> str:
        return self.predicate.descriptor

    def vote(self, datum: Datum) -> bool:
        return bool(self.predicate(datum))

    def law(self, datum: Datum) -> float:
        return rr_param(self.vote(datum), self.epsilon)

    def max_log_ratio(self, datum: Datum, other: Datum) -> float:
        """Worst-case |log P(bit|datum) - log P(bit|other)|, exactly.

        The two response laws are identical when the predicate agrees on
        both data and differ by a factor e^eps otherwise.
        """
        return self.epsilon if self.vote(datum) != self.vote(other) else 0.0


@dataclass(frozen=True)
class LawQuery:
    """A single-bit randomizer given directly by its response law.

    ``epsilon`` is the declared budget cap used in audit reports; the audit
    value itself is computed from the law.
    """

    epsilon: float
    descriptor: str
    law_fn: Callable[[Datum], float]

    def __post_init__(self):
        _check_epsilon(self.epsilon)

    def law(self, datum: Datum) -> float:
        param = float(self.law_fn(datum))
        if not 0.0 <= param <= 1.0:
            raise ValueError(f"response law returned {param}, outside [0, 1]")
        return param

    def max_log_ratio(self, datum: Datum, other: Datum) -> float:
        p, q = self.law(datum), self.law(other)
        if p == q:
            return 0.0
        terms = []
        for a, b in ((p, q), (1.0 - p, 1.0 - q)):
            if a == b:
                continue
            if a == 0.0 or b == 0.0:
                return math.inf
            terms.append(abs(math.log(a / b)))
        return max(terms)


def audit_user(
    responses: Sequence[tuple[Any, int]],
    datum: Datum,
    neighbor_data: Iterable[Datum],
) -> float:
    """Worst-case transcript log-likelihood ratio for one user.

    ``responses`` lists (query, realized bit) pairs; realized bits do not
    affect the worst case, which maximizes over response realizations. The
    result is max over neighbors of the sum of per-query worst-case terms.
    """
    worst = 0.0
    for other in neighbor_data:
        total = 0.0
        for query, _bit in responses:
            try:
                total += query.max_log_ratio(datum, other)
            except Exception as exc:  # noqa: BLE001 - surfaced as audit failure
                raise AuditError(f"query {query.descriptor!r} not evaluable: {exc}") from exc
        worst = max(worst, total)
    return worst


@dataclass
class AuditReport:
    """Per-user worst-case log-likelihood ratios for one execution."""

    per_user: dict[int, float]
    worst_user: int | None

    def max_ratio(self) -> float:
        return max(self.per_user.values(), default=0.0)

    def __post_init__(self):
        if self.per_user:
            if self.worst_user not in self.per_user:
                raise ValueError("worst_user must appear in the report")
            if self.per_user[self.worst_user] != self.max_ratio():
                raise ValueError("worst_user must attain the per-user maximum")
        elif self.worst_user is not None:
            raise ValueError("empty report cannot name a worst user")


def audit_transcript(
    transcript: Transcript,
    population: Population,
    query_log: dict[str, Any],
    extra_neighbors: Sequence[Datum] = (),
) -> AuditReport:
    """Audit every user appearing in ``transcript``.

    The alternative-datum set is both instance payloads, the sentinel datum,
    and any ``extra_neighbors``. Response laws depend on a datum only through
    the recorded queries, so this set is exhaustive for the protocols here.
    """
    data: list[Datum] = [population.alice_datum, population.bob_datum, SENTINEL_DATUM]
    for extra in extra_neighbors:
        if extra not in data:
            data.append(extra)
    n_data = len(data)

    matrices: dict[str, np.ndarray] = {}

    def matrix_for(descriptor: str) -> np.ndarray:
        mat = matrices.get(descriptor)
        if mat is None:
            query = query_log.get(descriptor)
            if query is None:
                raise AuditError(f"descriptor {descriptor!r} missing from the query log")
            mat = np.zeros((n_data, n_data))
            for i, di in enumerate(data):
                for j, dj in enumerate(data):
                    if i == j:
                        continue
                    try:
                        mat[i, j] = query.max_log_ratio(di, dj)
                    except Exception as exc:  # noqa: BLE001
                        raise AuditError(f"query {descriptor!r} not evaluable: {exc}") from exc
            matrices[descriptor] = mat
        return mat

    sums = np.zeros((population.size, n_data))
    appeared = np.zeros(population.size, dtype=bool)
    for record in transcript.rounds:
        users = np.asarray(record.users, dtype=np.int64)
        if users.min() < 0 or users.max() >= population.size:
            raise AuditError("transcript names a user outside the population")
        appeared[users] = True
        own = population.side_codes[users].astype(np.int64)  # 0 Alice, 1 Bob
        ids = record.randomizer_ids
        if len(set(ids)) == 1:
            mat = matrix_for(ids[0])
            for j in range(n_data):
                sums[users, j] += mat[own, j]
        else:
            for pos, descriptor in enumerate(ids):
                mat = matrix_for(descriptor)
                sums[users[pos], :] += mat[own[pos], :]

    per_user = {int(uid): float(sums[uid].max()) for uid in np.nonzero(appeared)[0]}
    if not per_user:
        return AuditReport(per_user={}, worst_user=None)
    worst_user = max(per_user, key=lambda uid: (per_user[uid], -uid))
    return AuditReport(per_user=per_user, worst_user=worst_user)


def write_audit_report(
    report: AuditReport,
    declared_epsilon: float,
    stream: TextIO,
    slack: float = 1e-9,
) -> None:
    """Tabular text form: user id, max log ratio, declared budget, pass/fail."""
    stream.write("user_id\tmax_log_ratio\tbudget\tstatus\n")
    for uid in sorted(report.per_user):
        value = report.per_user[uid]
        status = "pass" if value <= declared_epsilon + slack else "FAIL"
        stream.write(f"{uid}\t{value!r}\t{declared_epsilon!r}\t{status}\n")
