"""symchain: symbolic equation-chain reasoning toolkit.

Generate seeded equation questions with exact depth control, produce gold
reasoning traces under several chaining strategies, render supervision pairs
at three output granularities, verify predicted chains mathematically, and
drive external models through the matching iterative decoding protocols.
"""

from .chaining import (
    ChainingStrategy,
    backward_trace,
    exhaustive_trace,
    gold_traces,
    none_trace,
    shortest_trace,
    trace_for,
)
from .generator import GenConfig, Instance, gen_instance, gen_pretraining, gen_split
from .harness import (
    Report,
    RunConfig,
    drive_all_at_once,
    drive_step_by_step,
    drive_token_by_token,
    evaluate_pair,
    run_evaluation,
)
from .lang import (
    Add,
    Direct,
    Equation,
    Num,
    Question,
    Trace,
    Var,
    parse_line,
    parse_question,
    parse_trace,
    render,
    tokenize,
)
from .refmodels import FaultConfig, faulty_model, perfect_model
from .rendering import (
    OutputStrategy,
    TrainingExample,
    read_instances,
    render_examples,
    write_instances,
)
from .semantics import answer, build_graph, depth_of, fixpoint_eval, necessary_set
from .verifier import ErrorClass, Verdict, check_answer, check_chain, classify

__version__ = "0.1.0"
