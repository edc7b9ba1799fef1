"""Transcript data model and execution engine for locally private protocols.

An execution is a loop between a :class:`ProtocolDriver` (the analyst) and a
:class:`Population` of users. Each round the driver names a set of users and
a single-bit randomizer per user; the engine evaluates the randomizers on the
users' private data, publishes the bits, and appends a :class:`RoundRecord`.
The engine enforces the declared interactivity mode and accounts sample and
round complexity.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable, Sequence, TextIO

import numpy as np

from ._rng import response_uniform, response_uniforms, substream

DEFAULT_MAX_ROUNDS = 10_000_000


class LdpSimError(RuntimeError):
    """Base class for engine-level runtime failures."""


class InteractivityViolation(LdpSimError):
    """A driver broke the constraints of the declared interactivity mode."""

    def __init__(self, message: str, user_id: int, round_index: int):
        super().__init__(message)
        self.user_id = user_id
        self.round_index = round_index


class DivergenceError(LdpSimError):
    """A driver failed to halt within the configured round bound."""


class Side(Enum):
    """Which of the two problem payloads a user holds."""

    ALICE = "alice"
    BOB = "bob"

    @property
    def other(self) -> "Side":
        return Side.BOB if self is Side.ALICE else Side.ALICE


@dataclass(frozen=True)
class Datum:
    """One user's private input: a side marker and the payload for that side.

    ``Datum(None, None)`` is the sentinel datum: every predicate in this
    package evaluates to False on it, and every response law is uninformative
    about it. The auditor uses it as a universal "matches nothing"
    alternative.
    """

    side: Side | None
    payload: Any


SENTINEL_DATUM = Datum(None, None)


class Population:
    """Users 0..n-1, each holding the Alice or Bob payload of an instance.

    Sides are fixed at construction; payload objects are shared between all
    users on the same side.
    """

    def __init__(self, side_codes: np.ndarray, alice_payload, bob_payload, seed: int):
        codes = np.asarray(side_codes, dtype=np.uint8)
        if codes.ndim != 1 or codes.size < 1:
            raise ValueError("population needs at least one user")
        self._codes = codes
        self._codes.setflags(write=False)
        self._alice = Datum(Side.ALICE, alice_payload)
        self._bob = Datum(Side.BOB, bob_payload)
        self.seed = seed

    @property
    def size(self) -> int:
        return int(self._codes.size)

    @property
    def side_codes(self) -> np.ndarray:
        """0 where the user holds the Alice payload, 1 for Bob."""
        return self._codes

    @property
    def alice_datum(self) -> Datum:
        return self._alice

    @property
    def bob_datum(self) -> Datum:
        return self._bob

    def datum(self, user_id: int) -> Datum:
        if not 0 <= user_id < self.size:
            raise ValueError(f"unknown user id {user_id}")
        return self._bob if self._codes[user_id] else self._alice

    @property
    def users(self) -> list[tuple[int, Datum]]:
        return [(uid, self.datum(uid)) for uid in range(self.size)]

    def alice_fraction(self) -> float:
        return float(np.mean(self._codes == 0))


def sample_population(n: int, alice_payload, bob_payload, seed: int) -> Population:
    """Draw a population of ``n`` users, each side an independent fair coin."""
    if n < 1:
        raise ValueError("population size must be at least 1")
    coins = substream(seed, "population").random(n)
    return Population((coins >= 0.5).astype(np.uint8), alice_payload, bob_payload, seed)


@dataclass(frozen=True)
class RoundRecord:
    """One transcript round: users queried, randomizers, budgets, outputs."""

    round_index: int
    users: tuple[int, ...]
    randomizer_ids: tuple[str, ...]
    epsilons: tuple[float, ...]
    outputs: tuple[int, ...]

    def __post_init__(self):
        n = len(self.users)
        if n < 1:
            raise ValueError("a round must query at least one user")
        if not (len(self.randomizer_ids) == len(self.epsilons) == len(self.outputs) == n):
            raise ValueError("users, randomizer_ids, epsilons, outputs must have equal length")
        # min/max are cheap guards; the engine validates budgets per query too
        if min(self.epsilons) <= 0 or not math.isfinite(max(self.epsilons)):
            raise ValueError("epsilons must be strictly positive and finite")


@dataclass(frozen=True)
class Transcript:
    """Ordered rounds of a single execution."""

    rounds: tuple[RoundRecord, ...] = ()

    def __post_init__(self):
        for i, record in enumerate(self.rounds):
            if record.round_index != i:
                raise ValueError(f"round {i} carries index {record.round_index}")

    def extended(self, record: RoundRecord) -> "Transcript":
        return Transcript(self.rounds + (record,))


def sample_complexity(transcript: Transcript) -> int:
    """Number of distinct users appearing anywhere in the transcript."""
    seen: set[int] = set()
    for record in transcript.rounds:
        seen.update(record.users)
    return len(seen)


def round_complexity(transcript: Transcript) -> int:
    """Number of rounds."""
    return len(transcript.rounds)


class InteractivityMode(Enum):
    """How often users may speak.

    NONINTERACTIVE: at most one round of simultaneous responses.
    SEQUENTIAL: every user answers at most one randomizer call, ever.
    FULL: users may be re-queried without restriction.
    """

    NONINTERACTIVE = "noninteractive"
    SEQUENTIAL = "sequential"
    FULL = "full"


@dataclass
class RoundSpec:
    """A driver's request for one round.

    ``queries`` is either a single query object applied to every listed user
    (the common batched case) or a sequence with one query per user. A query
    exposes ``descriptor`` (str), ``epsilon`` (float) and ``law(datum)``
    (the Bernoulli parameter of its output on that datum); predicate-based
    queries additionally expose ``vote(datum)``.
    """

    users: Sequence[int]
    queries: Any


@dataclass(frozen=True)
class Halt:
    """Driver signal: stop and report ``answer``."""

    answer: Any


class ProtocolDriver(ABC):
    """Maps the transcript so far to the next round request or a halt.

    Drivers may keep internal state but must be deterministic given the
    transcript prefix and the public randomness stream. A driver instance
    is good for one execution.
    """

    @abstractmethod
    def next_round(self, transcript: Transcript, public_rng: np.random.Generator) -> RoundSpec | Halt:
        raise NotImplementedError


@dataclass
class ExecutionResult:
    """Transcript, answer and audit inputs from one execution.

    ``query_log`` maps each randomizer descriptor appearing in the transcript
    to its query object; ``one_vote_counts[u]`` counts the rounds in which
    user ``u``'s predicate evaluated true (predicate-based queries only).
    """

    transcript: Transcript
    answer: Any
    query_log: dict[str, Any]
    one_vote_counts: np.ndarray


def _validate_descriptor(descriptor: str) -> str:
    if not descriptor or any(ch.isspace() for ch in descriptor):
        raise ValueError(f"randomizer descriptor must be non-empty and whitespace-free: {descriptor!r}")
    return descriptor


def execute(
    driver: ProtocolDriver,
    population: Population,
    mode: InteractivityMode,
    seed: int,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
) -> ExecutionResult:
    """Run ``driver`` against ``population`` under ``mode``.

    Deterministic given (driver state, population, mode, seed). Raises
    :class:`InteractivityViolation` when the driver breaks the mode,
    :class:`DivergenceError` after ``max_rounds`` rounds without a halt.
    """
    public_rng = substream(seed, "public")
    rounds: list[RoundRecord] = []
    transcript = Transcript()
    seen_users: set[int] = set()
    query_log: dict[str, Any] = {}
    one_votes = np.zeros(population.size, dtype=np.int64)

    while True:
        action = driver.next_round(transcript, public_rng)
        if isinstance(action, Halt):
            return ExecutionResult(transcript, action.answer, query_log, one_votes)
        if not isinstance(action, RoundSpec):
            raise TypeError(f"driver returned {type(action).__name__}, expected RoundSpec or Halt")
        if len(rounds) >= max_rounds:
            raise DivergenceError(f"driver did not halt within {max_rounds} rounds")

        round_index = len(rounds)
        users = np.asarray(list(action.users), dtype=np.int64)
        if users.size < 1:
            raise ValueError("round must query at least one user")
        if users.min() < 0 or users.max() >= population.size:
            raise ValueError("round names a user outside the population")
        if len(np.unique(users)) != users.size:
            counts = np.bincount(users.astype(np.intp))
            dup = int(np.argmax(counts > 1))
            raise ValueError(f"user {dup} queried twice within round {round_index}")

        if mode is InteractivityMode.NONINTERACTIVE and round_index >= 1:
            raise InteractivityViolation(
                f"noninteractive mode allows a single round; round {round_index} queried user {int(users[0])}",
                user_id=int(users[0]),
                round_index=round_index,
            )
        if mode is InteractivityMode.SEQUENTIAL:
            reused = [int(u) for u in users if int(u) in seen_users]
            if reused:
                raise InteractivityViolation(
                    f"sequential mode reuses user {reused[0]} in round {round_index}",
                    user_id=reused[0],
                    round_index=round_index,
                )
        seen_users.update(int(u) for u in users)

        shared = not isinstance(action.queries, (list, tuple))
        if shared:
            record = _respond_shared(population, users, action.queries, seed, round_index, one_votes, query_log)
        else:
            if len(action.queries) != users.size:
                raise ValueError("per-user query list must match the user list length")
            record = _respond_per_user(population, users, action.queries, seed, round_index, one_votes, query_log)
        rounds.append(record)
        transcript = transcript.extended(record)


def _log_query(query_log: dict[str, Any], query) -> str:
    descriptor = _validate_descriptor(query.descriptor)
    known = query_log.get(descriptor)
    if known is None:
        query_log[descriptor] = query
    elif known != query:
        raise ValueError(f"descriptor {descriptor!r} reused for a different query")
    return descriptor


def _respond_shared(population, users, query, seed, round_index, one_votes, query_log) -> RoundRecord:
    descriptor = _log_query(query_log, query)
    p_alice = float(query.law(population.alice_datum))
    p_bob = float(query.law(population.bob_datum))
    is_bob = population.side_codes[users].astype(bool)
    params = np.where(is_bob, p_bob, p_alice)
    draws = response_uniforms(seed, users, round_index)
    bits = draws < params
    if hasattr(query, "vote"):
        vote_alice = bool(query.vote(population.alice_datum))
        vote_bob = bool(query.vote(population.bob_datum))
        votes = np.where(is_bob, vote_bob, vote_alice)
        np.add.at(one_votes, users, votes.astype(np.int64))
    n = users.size
    return RoundRecord(
        round_index=round_index,
        users=tuple(users.tolist()),
        randomizer_ids=(descriptor,) * n,
        epsilons=(float(query.epsilon),) * n,
        outputs=tuple(int(b) for b in bits),
    )


def _respond_per_user(population, users, queries, seed, round_index, one_votes, query_log) -> RoundRecord:
    descriptors = []
    epsilons = []
    outputs = []
    for uid, query in zip(users.tolist(), queries):
        descriptors.append(_log_query(query_log, query))
        epsilons.append(float(query.epsilon))
        datum = population.datum(uid)
        param = float(query.law(datum))
        bit = int(response_uniform(seed, uid, round_index) < param)
        outputs.append(bit)
        if hasattr(query, "vote") and query.vote(datum):
            one_votes[uid] += 1
    return RoundRecord(
        round_index=round_index,
        users=tuple(users.tolist()),
        randomizer_ids=tuple(descriptors),
        epsilons=tuple(epsilons),
        outputs=tuple(outputs),
    )


# ---------------------------------------------------------------------------
# Transcript serialization: one round per line, tab-separated columns
#   round_index <TAB> user ids <TAB> randomizer descriptors <TAB> budgets <TAB> bits
# with space-separated entries inside each column. Descriptors are
# whitespace-free by construction.
# ---------------------------------------------------------------------------


def write_transcript(transcript: Transcript, stream: TextIO) -> None:
    for r in transcript.rounds:
        stream.write(
            "\t".join(
                (
                    str(r.round_index),
                    " ".join(map(str, r.users)),
                    " ".join(r.randomizer_ids),
                    " ".join(repr(e) for e in r.epsilons),
                    " ".join(map(str, r.outputs)),
                )
            )
            + "\n"
        )


def read_transcript(lines: Iterable[str]) -> Transcript:
    rounds = []
    for line in lines:
        line = line.rstrip("\n")
        if not line:
            continue
        index_s, users_s, ids_s, eps_s, outs_s = line.split("\t")
        rounds.append(
            RoundRecord(
                round_index=int(index_s),
                users=tuple(int(u) for u in users_s.split(" ")),
                randomizer_ids=tuple(ids_s.split(" ")),
                epsilons=tuple(float(e) for e in eps_s.split(" ")),
                outputs=tuple(int(b) for b in outs_s.split(" ")),
            )
        )
    return Transcript(tuple(rounds))
