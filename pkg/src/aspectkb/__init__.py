"""Interpreter and analysis toolkit for aspect-guarded tuple-space nets.

Located processes exchange tuples with out/in/read; every interaction
is gated by four-valued aspect policies over a security lattice, and
each location carries a history component that records what it has
absorbed.  The package bundles a Bell-LaPadula policy preset, an
independent audit model to test the policy against, a state-space
explorer and a small CLI (``akb``).
"""

from .belnap import Four, band, bnot, bor, grant, implies, oplus, otimes, parse_four, priority
from .blp import (
    GlobalState,
    HarnessReport,
    blp_policy,
    candidate_violations,
    lemma_harness,
    list_builtin_scenarios,
    load_builtin_scenario,
    oracle_check,
    preset_lattice,
    state_from_trace,
    verify_history_agreement,
)
from .engine import (
    FixedScript,
    ReachGraph,
    ScriptMismatch,
    SeededRandom,
    Trace,
    TraceEvent,
    apply,
    canonical_key,
    enumerate_redexes,
    explore,
    normalize,
    run,
)
from .lattice import Lattice, LatticeError, Level, chain
from .parser import (
    ParseError,
    parse_policy,
    parse_process_text,
    parse_scenario,
    render_policy,
    render_process,
    render_scenario,
)
from .policy_eval import InteractionView, LevelBinding, eval_policy
from .syntax import Net, validate

__version__ = "0.1.0"
