"""Time-step Petri net modeling and simulation.

>>> net = PetriNet()
>>> net.add_place("bowl", {"beans": 10})
>>> net.add_place("pot", {"beans": 0})
>>> _ = net.add_rule("pour", "step", ["bowl.beans -> pot.beans; 3"])
>>> [r.values for r in net.simulate(4, 1, 2)]
[[10.0, 0.0], [4.0, 6.0], [0.0, 10.0]]
"""

from .dsl import eval_condition, parse_arc, parse_condition, parse_rule_spec
from .engine import apply_plan, compute_step_plan, simulate, simulate_stream
from .errors import (
    ArityError,
    ConfigError,
    DivisionByZero,
    DocumentSyntaxError,
    DuplicateFunction,
    DuplicatePlace,
    DuplicateRule,
    EmptyHistory,
    InvalidName,
    ModelError,
    NegativeInitialCount,
    NegativeTransfer,
    NonFiniteTransfer,
    ParseError,
    PetriNetError,
    SimulationError,
    UnknownKind,
    UnknownOperator,
    UnknownPlaceOrToken,
    UnresolvedFunction,
)
from .expressions import eval_expression, format_expression, parse_expression
from .model_io import (
    ModelDocument,
    build_net,
    builtin_bread,
    builtin_sirs,
    builtin_sis,
    load_model,
    load_model_file,
    parse_document,
    serialize,
)
from .net import PetriNet, PlaceView, new_net
from .reporting import SimulationRecord, read_csv, report_tokens, write_csv, write_json
from .rules import OUROBOROS, Condition, TransitionArc

__all__ = [name for name in dir() if not name.startswith("_")]
