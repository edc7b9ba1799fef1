"""Two-party protocols over bit channels and their conversions to and from
sequentially interactive one-bit locally private protocols.

Conversions provided:

* lift: a deterministic two-party protocol over a BSC whose advantage equals
  :func:`~ldpsim.channels.lift_crossover` of the budget becomes a sequential
  driver in which each channel bit is answered by one fresh user -- the
  sender-side user applies randomized response to the bit the sender would
  send, any other user answers uniformly. The transcript distributions are
  identical.
* lower: a one-bit-per-user sequential protocol becomes a two-party protocol
  over a BSC with advantage :func:`~ldpsim.channels.lower_crossover` of the
  budget. A public coin assigns each simulated user to a player; the player
  sends a bias-corrected bit, and a public keep/skip coin decides whether the
  received bit or a fixed default enters the transcript. Entered-bit
  distributions match the source exactly.
* round reschedule: a simultaneous-rounds protocol becomes an alternating
  one with Bob speaking first and one extra round, preserving the joint
  output distribution.

Exact transcript distributions for all of these are computed by depth-first
enumeration over message bits, channel flips, and the public partition and
keep/skip coins.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Iterable, Sequence, TextIO

from ._rng import substream
from .channels import ChannelKind, ChannelSpec, lift_crossover, lower_channel, lower_crossover
from .engine import Datum, DivergenceError, Halt, LdpSimError, ProtocolDriver, RoundSpec, Side, Transcript
from .randomizers import LawQuery, rr_param

ENUMERATION_GUARD = 2**20
_PROB_SLACK = 1e-9


class ReductionError(LdpSimError):
    """A protocol conversion produced an invalid probability or was misused."""


class RoundMode(Enum):
    ALTERNATING = "alternating"
    SIMULTANEOUS = "simultaneous"


@dataclass(frozen=True)
class Answer:
    """Halting action of a two-party protocol; ``fn`` maps the final
    transcript to the announced answer."""

    fn: Callable[[tuple[int, ...]], Any]


@dataclass(frozen=True)
class CapAborted:
    """Answer marker produced when a bit cap cut the protocol short."""


CAP_ABORTED = CapAborted()


@dataclass(frozen=True)
class SendStep:
    """One channel use.

    ``send_param`` maps the sender's input to the probability of sending 1.
    With probability ``use_prob`` (a public coin) the received bit enters the
    transcript; otherwise ``skip_bit`` is entered.
    """

    sender: Side
    send_param: Callable[[Any], float]
    use_prob: float = 1.0
    skip_bit: int = 0
    label: str = ""


class TwoPartyProtocol(ABC):
    """A protocol between Alice and Bob over a bit channel.

    ``action(prefix)`` maps the entered-bit transcript so far to either an
    :class:`Answer` or a public lottery over :class:`SendStep`, given as a
    tuple of (probability, step) pairs. Shared randomness beyond the
    structured per-step coins is not modeled; the protocols in scope do not
    need it.
    """

    channel: ChannelSpec
    max_bits: int
    round_mode: RoundMode = RoundMode.ALTERNATING

    @abstractmethod
    def action(self, prefix: tuple[int, ...]) -> Answer | tuple[tuple[float, SendStep], ...]:
        raise NotImplementedError


@dataclass
class TableProtocol(TwoPartyProtocol):
    """Two-party protocol given by explicit sender and next-bit functions.

    ``sender_fn(prefix)`` names the speaker; ``param_fn(input, prefix)`` is
    the probability that the speaker sends 1. Runs for exactly ``num_bits``
    bits, then halts with ``answer_fn(transcript)``.
    """

    num_bits: int
    sender_fn: Callable[[tuple[int, ...]], Side]
    param_fn: Callable[[Any, tuple[int, ...]], float]
    channel: ChannelSpec
    answer_fn: Callable[[tuple[int, ...]], Any] = field(default=lambda transcript: transcript)
    round_mode: RoundMode = RoundMode.ALTERNATING

    def __post_init__(self):
        if self.num_bits < 0:
            raise ValueError("num_bits must be nonnegative")
        self.max_bits = self.num_bits

    def action(self, prefix: tuple[int, ...]) -> Answer | tuple[tuple[float, SendStep], ...]:
        if len(prefix) >= self.num_bits:
            return Answer(self.answer_fn)
        sender = self.sender_fn(prefix)
        step = SendStep(sender=sender, send_param=lambda inp, p=prefix: self.param_fn(inp, p))
        return ((1.0, step),)


class TranscriptDistribution:
    """Exact distribution over bit-string transcripts."""

    def __init__(self, probs: dict[str, float], tol: float = 1e-9):
        total = math.fsum(probs.values())
        if abs(total - 1.0) > tol:
            raise ValueError(f"probabilities sum to {total}, not 1")
        self.probs = dict(probs)

    def total(self) -> float:
        return math.fsum(self.probs.values())

    def __getitem__(self, key: str) -> float:
        return self.probs.get(key, 0.0)

    def tv_distance(self, other: "TranscriptDistribution") -> float:
        keys = set(self.probs) | set(other.probs)
        return 0.5 * math.fsum(abs(self[k] - other[k]) for k in keys)

    def serialize(self, stream: TextIO) -> None:
        for key in sorted(self.probs):
            stream.write(f"{key if key else '-'} {self.probs[key]!r}\n")

    @classmethod
    def parse(cls, lines: Iterable[str]) -> "TranscriptDistribution":
        probs: dict[str, float] = {}
        for line in lines:
            line = line.strip()
            if not line:
                continue
            key, value = line.split(" ")
            probs["" if key == "-" else key] = float(value)
        return cls(probs)


def _key(prefix: tuple[int, ...]) -> str:
    return "".join(map(str, prefix))


def _check_prob(x: float, context: str) -> float:
    if -_PROB_SLACK <= x < 0.0:
        return 0.0
    if 1.0 < x <= 1.0 + _PROB_SLACK:
        return 1.0
    if 0.0 <= x <= 1.0:
        return float(x)
    raise ReductionError(f"{context}: probability {x} outside [0, 1]")


def enumerate_transcript_distribution(
    protocol: TwoPartyProtocol,
    alice_input,
    bob_input,
    max_paths: int = ENUMERATION_GUARD,
) -> TranscriptDistribution:
    """Exact entered-bit transcript distribution of a two-party protocol.

    Depth-first traversal branching over the step lottery, the sent bit, the
    channel flip, and the keep/skip coin; zero-probability branches are
    pruned.
    """
    probs: dict[str, float] = {}
    paths = 0

    def recurse(prefix: tuple[int, ...], prob: float) -> None:
        nonlocal paths
        paths += 1
        if paths > max_paths:
            raise ValueError(f"enumeration exceeds {max_paths} paths")
        if len(prefix) > protocol.max_bits:
            raise ReductionError("protocol exceeded its own max_bits without halting")
        act = protocol.action(prefix)
        if isinstance(act, Answer):
            probs[_key(prefix)] = probs.get(_key(prefix), 0.0) + prob
            return
        crossover = protocol.channel.crossover
        for branch_prob, step in act:
            if branch_prob == 0.0:
                continue
            inp = alice_input if step.sender is Side.ALICE else bob_input
            p_send = _check_prob(float(step.send_param(inp)), f"step {step.label or len(prefix)}")
            for sent, p_s in ((1, p_send), (0, 1.0 - p_send)):
                if p_s == 0.0:
                    continue
                if protocol.channel.kind is ChannelKind.BSC and crossover > 0.0:
                    received_branches = ((sent, 1.0 - crossover), (1 - sent, crossover))
                else:
                    received_branches = ((sent, 1.0),)
                for received, p_r in received_branches:
                    if step.use_prob < 1.0:
                        entered_branches = ((received, step.use_prob), (step.skip_bit, 1.0 - step.use_prob))
                    else:
                        entered_branches = ((received, 1.0),)
                    for entered, p_e in entered_branches:
                        weight = prob * branch_prob * p_s * p_r * p_e
                        if weight == 0.0:
                            continue
                        recurse(prefix + (int(entered),), weight)

    recurse((), 1.0)
    return TranscriptDistribution(probs)


def simulate_two_party(
    protocol: TwoPartyProtocol,
    alice_input,
    bob_input,
    seed: int,
) -> tuple[tuple[int, ...], Any]:
    """Run one execution; returns (entered transcript, answer)."""
    rng = substream(seed, "two-party")
    prefix: tuple[int, ...] = ()
    for _ in range(protocol.max_bits + 1):
        act = protocol.action(prefix)
        if isinstance(act, Answer):
            return prefix, act.fn(prefix)
        draw = rng.random()
        acc = 0.0
        step = act[-1][1]
        for branch_prob, candidate in act:
            acc += branch_prob
            if draw < acc:
                step = candidate
                break
        inp = alice_input if step.sender is Side.ALICE else bob_input
        p_send = _check_prob(float(step.send_param(inp)), f"step {step.label or len(prefix)}")
        sent = int(rng.random() < p_send)
        if protocol.channel.kind is ChannelKind.BSC:
            received = sent ^ int(rng.random() < protocol.channel.crossover)
        else:
            received = sent
        if step.use_prob >= 1.0 or rng.random() < step.use_prob:
            entered = received
        else:
            entered = step.skip_bit
        prefix = prefix + (int(entered),)
    raise DivergenceError("two-party protocol did not halt within max_bits")


# ---------------------------------------------------------------------------
# One-bit-per-user sequential protocols
# ---------------------------------------------------------------------------


class OneBitLDPProtocol(ABC):
    """A sequential protocol in which every user answers one single-bit call.

    ``action(prefix)`` maps the published bits so far to the next user's
    query (an object with ``law(datum)``) or an :class:`Answer`. The per-user
    response law is exposed analytically; conversions never estimate it.
    ``data_pair`` holds the (Alice, Bob) data of the underlying instance.
    """

    epsilon: float
    data_pair: tuple[Datum, Datum]
    max_users: int

    @abstractmethod
    def action(self, prefix: tuple[int, ...]) -> Answer | Any:
        raise NotImplementedError


@dataclass
class OneBitSequence(OneBitLDPProtocol):
    """One-bit protocol driven by ``step_fn(prefix) -> query | Answer``."""

    epsilon: float
    data_pair: tuple[Datum, Datum]
    step_fn: Callable[[tuple[int, ...]], Any]
    max_users: int

    def action(self, prefix: tuple[int, ...]) -> Answer | Any:
        return self.step_fn(prefix)


def fixed_onebit(epsilon: float, data_pair: tuple[Datum, Datum], queries: Sequence[Any]) -> OneBitSequence:
    """Nonadaptive one-bit protocol asking ``queries`` in order, answering
    with the full transcript."""
    queries = tuple(queries)

    def step_fn(prefix: tuple[int, ...]):
        if len(prefix) >= len(queries):
            return Answer(lambda transcript: transcript)
        return queries[len(prefix)]

    return OneBitSequence(epsilon=epsilon, data_pair=data_pair, step_fn=step_fn, max_users=len(queries))


def enumerate_onebit_distribution(
    protocol: OneBitLDPProtocol,
    max_paths: int = ENUMERATION_GUARD,
) -> TranscriptDistribution:
    """Exact published-bit distribution of a one-bit protocol, with each
    user's datum an independent fair draw from ``data_pair``."""
    probs: dict[str, float] = {}
    paths = 0

    def recurse(prefix: tuple[int, ...], prob: float) -> None:
        nonlocal paths
        paths += 1
        if paths > max_paths:
            raise ValueError(f"enumeration exceeds {max_paths} paths")
        if len(prefix) > protocol.max_users:
            raise ReductionError("one-bit protocol exceeded max_users without halting")
        act = protocol.action(prefix)
        if isinstance(act, Answer):
            probs[_key(prefix)] = probs.get(_key(prefix), 0.0) + prob
            return
        p_one = 0.0
        for datum in protocol.data_pair:
            p_one += 0.5 * _check_prob(float(act.law(datum)), f"law at bit {len(prefix)}")
        for bit, p_b in ((1, p_one), (0, 1.0 - p_one)):
            if p_b == 0.0:
                continue
            recurse(prefix + (bit,), prob * p_b)

    recurse((), 1.0)
    return TranscriptDistribution(probs)


# ---------------------------------------------------------------------------
# Lift: two-party over a BSC  ->  sequential one-bit LDP driver
# ---------------------------------------------------------------------------


class LiftedDriver(ProtocolDriver, OneBitLDPProtocol):
    """Sequential driver replaying a two-party BSC protocol with one fresh
    user per channel bit.

    If the user's side matches the bit's sender they answer randomized
    response on the bit the sender would send; otherwise they publish an
    unbiased bit. Bit ``i`` is answered by user ``i``.
    """

    def __init__(self, protocol: TwoPartyProtocol, epsilon: float, data_pair: tuple[Datum, Datum]):
        if protocol.channel.kind is not ChannelKind.BSC:
            raise ValueError("lift needs a protocol over a BSC")
        expected = lift_crossover(epsilon)
        if abs(protocol.channel.advantage - expected) > 1e-12:
            raise ValueError(
                f"channel advantage {protocol.channel.advantage} does not match "
                f"the lift value {expected} for epsilon={epsilon}"
            )
        self.protocol = protocol
        self.epsilon = epsilon
        self.data_pair = data_pair
        self.max_users = protocol.max_bits

    def action(self, prefix: tuple[int, ...]) -> Answer | LawQuery:
        act = self.protocol.action(prefix)
        if isinstance(act, Answer):
            return act
        if len(act) != 1 or act[0][0] != 1.0:
            raise ValueError("lift requires protocols without public step lotteries")
        step = act[0][1]
        if step.use_prob != 1.0:
            raise ValueError("lift requires protocols that enter every received bit")

        def law(datum: Datum, step=step) -> float:
            if datum.side is step.sender and datum.payload is not None:
                value = float(step.send_param(datum.payload))
                if value not in (0.0, 1.0):
                    raise ValueError("lift requires deterministic next-bit functions")
                return rr_param(int(value), self.epsilon)
            return 0.5

        descriptor = f"lift-bit({len(prefix)},{step.sender.value},{_key(prefix) or '-'})"
        return LawQuery(epsilon=self.epsilon, descriptor=descriptor, law_fn=law)

    def next_round(self, transcript: Transcript, public_rng) -> RoundSpec | Halt:
        prefix = tuple(record.outputs[0] for record in transcript.rounds)
        act = self.action(prefix)
        if isinstance(act, Answer):
            return Halt(act.fn(prefix))
        return RoundSpec(users=[len(prefix)], queries=act)


def lift_two_party_to_ldp(
    protocol: TwoPartyProtocol,
    epsilon: float,
    data_pair: tuple[Datum, Datum],
) -> LiftedDriver:
    """Build the sequential locally private driver simulating ``protocol``.

    ``protocol`` must be deterministic and run over a BSC whose advantage is
    exactly ``lift_crossover(epsilon)``; ``data_pair`` carries the players'
    inputs as user payloads.
    """
    return LiftedDriver(protocol, epsilon, data_pair)


# ---------------------------------------------------------------------------
# Lower: sequential one-bit LDP protocol  ->  two-party over a BSC
# ---------------------------------------------------------------------------


class LoweredProtocol(TwoPartyProtocol):
    """Two-party BSC protocol simulating a one-bit LDP protocol bit for bit.

    Public randomness assigns each simulated user to a player by fair coin.
    With the user's response law p over the data universe and s = p_min +
    p_max, the assigned player sends a bias-corrected bit and the received
    bit is entered with probability s (skipping enters 0). When s > 1 the
    same construction runs on the complement laws, with skips entering 1.
    """

    round_mode = RoundMode.ALTERNATING

    def __init__(self, source: OneBitLDPProtocol, epsilon: float, max_bits: int | None = None):
        self.source = source
        self.epsilon = epsilon
        self.channel = lower_channel(epsilon)
        self._advantage = lower_crossover(epsilon)
        self.max_bits = source.max_users if max_bits is None else int(max_bits)
        self.cases_used: set[str] = set()

    def _universe(self) -> tuple[Datum, ...]:
        extra = getattr(self.source, "data_universe", ())
        universe = list(self.source.data_pair)
        for datum in extra:
            if datum not in universe:
                universe.append(datum)
        return tuple(universe)

    def action(self, prefix: tuple[int, ...]) -> Answer | tuple[tuple[float, SendStep], ...]:
        act = self.source.action(prefix)
        if isinstance(act, Answer):
            return act
        if len(prefix) >= self.max_bits:
            return Answer(lambda _transcript: CAP_ABORTED)
        query = act
        laws = {datum: _check_prob(float(query.law(datum)), "source law") for datum in self._universe()}
        p_min = min(laws.values())
        p_max = max(laws.values())
        p_sum = p_min + p_max
        adv = self._advantage

        if p_sum <= 1.0:
            case = "case1"
            use_prob, skip_bit = p_sum, 0

            def send_param(input_datum: Datum, query=query, p_sum=p_sum) -> float:
                if p_sum == 0.0:
                    return 0.5  # never used: the keep coin always skips
                p_holder = _check_prob(float(query.law(input_datum)), "holder law")
                return _check_prob(
                    0.5 + p_holder / (2.0 * adv * p_sum) - 1.0 / (4.0 * adv),
                    "lowered send probability",
                )

        else:
            case = "case2"
            comp_sum = 2.0 - p_sum
            use_prob, skip_bit = comp_sum, 1

            def send_param(input_datum: Datum, query=query, comp_sum=comp_sum) -> float:
                if comp_sum == 0.0:
                    return 0.5
                comp_holder = 1.0 - _check_prob(float(query.law(input_datum)), "holder law")
                send_zero = _check_prob(
                    0.5 + comp_holder / (2.0 * adv * comp_sum) - 1.0 / (4.0 * adv),
                    "lowered send probability",
                )
                return 1.0 - send_zero

        self.cases_used.add(case)
        steps = tuple(
            (0.5, SendStep(sender=side, send_param=send_param, use_prob=use_prob, skip_bit=skip_bit, label=case))
            for side in (Side.ALICE, Side.BOB)
        )
        return steps


def lower_multi_to_two_party(
    source: OneBitLDPProtocol,
    epsilon: float,
    eta: float | None = None,
) -> LoweredProtocol:
    """Build the two-party BSC protocol equivalent to ``source``.

    When ``eta`` is given, the bit budget is capped at
    ceil(e^epsilon * expected_users / eta); executions cut short by the cap
    halt with :data:`CAP_ABORTED`, which harnesses count as an error.
    """
    max_bits = None
    if eta is not None:
        if not 0.0 < eta < 1.0:
            raise ValueError("eta must lie in (0, 1)")
        expected = getattr(source, "expected_users", source.max_users)
        max_bits = math.ceil(math.exp(epsilon) * expected / eta)
    return LoweredProtocol(source, epsilon, max_bits=max_bits)


# ---------------------------------------------------------------------------
# Simultaneous -> alternating round reschedule
# ---------------------------------------------------------------------------


@dataclass
class SimultaneousProtocol:
    """Noiseless protocol where both players publish one bit per round.

    ``alice_param(input, pairs)`` / ``bob_param(input, pairs)`` give each
    player's next-bit probability from the pairs published so far. Answer
    functions map (input, pairs) to the player's final output; the default
    announces the transcript itself.
    """

    num_rounds: int
    alice_param: Callable[[Any, tuple[tuple[int, int], ...]], float]
    bob_param: Callable[[Any, tuple[tuple[int, int], ...]], float]
    alice_answer: Callable[[Any, tuple[tuple[int, int], ...]], Any] = field(
        default=lambda _inp, pairs: pairs
    )
    bob_answer: Callable[[Any, tuple[tuple[int, int], ...]], Any] = field(
        default=lambda _inp, pairs: pairs
    )
    round_mode: RoundMode = RoundMode.SIMULTANEOUS

    def __post_init__(self):
        if self.num_rounds < 1:
            raise ValueError("num_rounds must be at least 1")


@dataclass
class AlternatingProtocol:
    """Reschedule of a simultaneous protocol into alternating rounds.

    ``rounds`` lists (speaker, bit count) per alternating round;
    ``positions`` maps each flat bit position to (speaker, index in that
    speaker's original sequence). Answer functions are the source's,
    unchanged.
    """

    source: SimultaneousProtocol
    rounds: tuple[tuple[Side, int], ...]
    positions: tuple[tuple[Side, int], ...]
    round_mode: RoundMode = RoundMode.ALTERNATING

    def __post_init__(self):
        flat = [speaker for speaker, count in self.rounds for _ in range(count)]
        if flat != [speaker for speaker, _ in self.positions]:
            raise ValueError("rounds and positions disagree")
        self._pos_of = {key: pos for pos, key in enumerate(self.positions)}
        for pos, (speaker, t) in enumerate(self.positions):
            for i in range(t):
                for side in (Side.ALICE, Side.BOB):
                    if self._pos_of[(side, i)] >= pos:
                        raise ValueError("schedule violates a data dependency")

    @property
    def num_rounds(self) -> int:
        return len(self.rounds)

    def pairs_from(self, alt_bits: Sequence[int], upto: int | None = None) -> tuple[tuple[int, int], ...]:
        """Reconstruct the source's round pairs from an alternating prefix."""
        limit = self.source.num_rounds if upto is None else upto
        return tuple(
            (alt_bits[self._pos_of[(Side.ALICE, t)]], alt_bits[self._pos_of[(Side.BOB, t)]])
            for t in range(limit)
        )

    def param_at(self, position: int, alice_input, bob_input, alt_prefix: Sequence[int]) -> float:
        speaker, t = self.positions[position]
        pairs = self.pairs_from(alt_prefix, upto=t)
        if speaker is Side.ALICE:
            return self.source.alice_param(alice_input, pairs)
        return self.source.bob_param(bob_input, pairs)

    def answers(self, alt_bits: Sequence[int], alice_input, bob_input) -> tuple[Any, Any]:
        pairs = self.pairs_from(alt_bits)
        return (
            self.source.alice_answer(alice_input, pairs),
            self.source.bob_answer(bob_input, pairs),
        )


def simultaneous_to_alternating(protocol) -> AlternatingProtocol:
    """Reschedule: Bob opens, then players alternate publishing two bits per
    round, adding exactly one round overall and preserving outputs."""
    if getattr(protocol, "round_mode", None) is not RoundMode.SIMULTANEOUS:
        raise ValueError("input protocol must be simultaneous")
    total = protocol.num_rounds
    rounds: list[tuple[Side, int]] = [(Side.BOB, 1)]
    positions: list[tuple[Side, int]] = [(Side.BOB, 0)]
    next_index = {Side.ALICE: 0, Side.BOB: 1}
    speaker = Side.ALICE
    while next_index[Side.ALICE] < total or next_index[Side.BOB] < total:
        start = next_index[speaker]
        count = min(2, total - start)
        if count > 0:
            rounds.append((speaker, count))
            positions.extend((speaker, start + i) for i in range(count))
            next_index[speaker] = start + count
        speaker = speaker.other
    return AlternatingProtocol(source=protocol, rounds=tuple(rounds), positions=tuple(positions))


def enumerate_simultaneous(
    protocol: SimultaneousProtocol,
    alice_input,
    bob_input,
    max_paths: int = ENUMERATION_GUARD,
) -> TranscriptDistribution:
    """Distribution over flattened pair transcripts (a1 b1 a2 b2 ...)."""
    probs: dict[str, float] = {}
    paths = 0

    def recurse(pairs: tuple[tuple[int, int], ...], prob: float) -> None:
        nonlocal paths
        paths += 1
        if paths > max_paths:
            raise ValueError(f"enumeration exceeds {max_paths} paths")
        if len(pairs) == protocol.num_rounds:
            key = "".join(f"{a}{b}" for a, b in pairs)
            probs[key] = probs.get(key, 0.0) + prob
            return
        p_a = _check_prob(float(protocol.alice_param(alice_input, pairs)), "alice bit")
        p_b = _check_prob(float(protocol.bob_param(bob_input, pairs)), "bob bit")
        for a_bit, pa in ((1, p_a), (0, 1.0 - p_a)):
            if pa == 0.0:
                continue
            for b_bit, pb in ((1, p_b), (0, 1.0 - p_b)):
                if pb == 0.0:
                    continue
                recurse(pairs + ((a_bit, b_bit),), prob * pa * pb)

    recurse((), 1.0)
    return TranscriptDistribution(probs)


def enumerate_alternating(
    protocol: AlternatingProtocol,
    alice_input,
    bob_input,
    max_paths: int = ENUMERATION_GUARD,
) -> TranscriptDistribution:
    """Distribution over the alternating protocol's flat bit transcript."""
    probs: dict[str, float] = {}
    total_bits = len(protocol.positions)
    paths = 0

    def recurse(prefix: tuple[int, ...], prob: float) -> None:
        nonlocal paths
        paths += 1
        if paths > max_paths:
            raise ValueError(f"enumeration exceeds {max_paths} paths")
        if len(prefix) == total_bits:
            probs[_key(prefix)] = probs.get(_key(prefix), 0.0) + prob
            return
        p_one = _check_prob(
            float(protocol.param_at(len(prefix), alice_input, bob_input, prefix)), "alternating bit"
        )
        for bit, p_b in ((1, p_one), (0, 1.0 - p_one)):
            if p_b == 0.0:
                continue
            recurse(prefix + (bit,), prob * p_b)

    recurse((), 1.0)
    return TranscriptDistribution(probs)


def alternating_pairs_distribution(
    protocol: AlternatingProtocol,
    alice_input,
    bob_input,
    max_paths: int = ENUMERATION_GUARD,
) -> TranscriptDistribution:
    """The alternating transcript distribution mapped back onto the source's
    flattened pair representation, directly comparable with
    :func:`enumerate_simultaneous`."""
    flat = enumerate_alternating(protocol, alice_input, bob_input, max_paths)
    probs: dict[str, float] = {}
    for bits, prob in flat.probs.items():
        pairs = protocol.pairs_from(tuple(int(b) for b in bits))
        key = "".join(f"{a}{b}" for a, b in pairs)
        probs[key] = probs.get(key, 0.0) + prob
    return TranscriptDistribution(probs)
