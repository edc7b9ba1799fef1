"""Simulation and verification toolkit for locally private interactive
protocols: transcript engine, randomized-response solvers, exact privacy
auditing, channel reductions, and a Monte Carlo harness."""

from .channels import (
    ChannelKind,
    ChannelSpec,
    bsc,
    bsc_transmit,
    lift_channel,
    lift_crossover,
    lower_channel,
    lower_crossover,
    majority_amplify,
    majority_flip_probability,
)
from .engine import (
    SENTINEL_DATUM,
    Datum,
    DivergenceError,
    ExecutionResult,
    Halt,
    InteractivityMode,
    InteractivityViolation,
    LdpSimError,
    Population,
    ProtocolDriver,
    RoundRecord,
    RoundSpec,
    Side,
    Transcript,
    execute,
    read_transcript,
    round_complexity,
    sample_complexity,
    sample_population,
    write_transcript,
)
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    HLShape,
    PCShape,
    run_experiment,
    sweep,
    wilson_interval,
)
from .problems import (
    HLEdgePredicate,
    HLInstance,
    HLPayload,
    PCBitPredicate,
    PCInstance,
    chase_pointers,
    gen_hl_instance,
    gen_pc_instance,
    hl_consistent,
    hl_count_consistent,
    read_instance,
    write_instance,
)
from .randomizers import (
    AuditError,
    AuditReport,
    LawQuery,
    RRQuery,
    RRResponse,
    audit_transcript,
    audit_user,
    debias,
    estimation_halfwidth,
    rr_param,
    rr_sample,
    write_audit_report,
)
from .reductions import (
    CAP_ABORTED,
    Answer,
    AlternatingProtocol,
    LiftedDriver,
    LoweredProtocol,
    OneBitLDPProtocol,
    OneBitSequence,
    ReductionError,
    RoundMode,
    SendStep,
    SimultaneousProtocol,
    TableProtocol,
    TranscriptDistribution,
    TwoPartyProtocol,
    alternating_pairs_distribution,
    enumerate_alternating,
    enumerate_onebit_distribution,
    enumerate_simultaneous,
    enumerate_transcript_distribution,
    fixed_onebit,
    lift_two_party_to_ldp,
    lower_multi_to_two_party,
    simulate_two_party,
    simultaneous_to_alternating,
)
from .solvers import (
    DecodeFailure,
    HLBaselineDriver,
    HLSolverConfig,
    HLSolverDriver,
    PCSolverConfig,
    PCSolverDriver,
    hl_sample_bound,
    pc_group_bound,
    pc_one_bit_view,
)

__all__ = [name for name in dir() if not name.startswith("_")]
