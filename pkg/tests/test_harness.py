"""Drivers, caps, protocol failure handling, evaluation, and reports."""

import pytest

from symchain import parse_question, render
from symchain.chaining import ChainingStrategy
from symchain.errors import TransportError
from symchain.generator import gen_split
from symchain.harness import (
    RunConfig,
    aggregate,
    dataset_hash,
    drive_all_at_once,
    drive_step_by_step,
    drive_token_by_token,
    evaluate_pair,
    run_evaluation,
)
from symchain.ports import ModelRequest, ModelResponse
from symchain.refmodels import perfect_model
from symchain.rendering import OutputStrategy, render_step_by_step, render_token_by_token
from symchain.verifier import ErrorClass

from conftest import DISTRACTOR_QUESTION, TWO_EQ_QUESTION


def _instance_for(text: str):
    from symchain.chaining import gold_traces
    from symchain.generator import Instance
    from symchain.semantics import answer, depth_of

    q = parse_question(text)
    return Instance(id="fx", question=q, answer=answer(q), depth=depth_of(q),
                    gold=gold_traces(q))


class _ScriptedPort:
    """Replays canned outputs; records every request it sees."""

    def __init__(self, outputs):
        self.outputs = list(outputs)
        self.requests: list[ModelRequest] = []

    def request(self, req: ModelRequest) -> ModelResponse:
        self.requests.append(req)
        out = self.outputs[0] if len(self.outputs) == 1 else self.outputs.pop(0)
        return ModelResponse(req.id, out)

    def close(self):
        pass


class _WrongIdPort(_ScriptedPort):
    def request(self, req):
        return ModelResponse("nope", "A=1")


class TestStepDriver:
    def test_perfect_call_count_equals_line_count(self, distractor_question):
        port = perfect_model(ChainingStrategy.SHORTEST)
        result = drive_step_by_step(port, distractor_question)
        assert result.calls == 7  # seven-line gold
        assert not result.capped
        assert ", ".join(pl.text for pl in result.plines) == (
            "A=1, B=2+A, B=2+1, B=3, C=5+B, C=5+3, C=8"
        )

    def test_depth_one_single_call(self):
        q = parse_question("A=1, A?")
        result = drive_step_by_step(perfect_model(ChainingStrategy.SHORTEST), q)
        assert result.calls == 1 and not result.capped

    def test_cap_on_never_answering_model(self, distractor_question):
        port = _ScriptedPort(["D=3+A"])  # forever repeats a non-answer line
        result = drive_step_by_step(port, distractor_question, max_steps=100)
        assert result.calls == 100 and result.capped
        assert len(result.plines) == 100

    def test_multi_line_response_is_malformed(self, distractor_question):
        port = _ScriptedPort(["A=1, B=2+A"])
        result = drive_step_by_step(port, distractor_question)
        assert result.plines[-1].line is None
        assert result.calls == 1

    def test_empty_response_is_malformed(self, distractor_question):
        port = _ScriptedPort([""])
        result = drive_step_by_step(port, distractor_question)
        assert result.plines[-1].line is None

    def test_context_matches_training_inputs(self, distractor_question):
        """Drivers and renderers share one accretion law: the context sent at
        step k equals the k-th rendered supervision input."""
        inst = _instance_for(DISTRACTOR_QUESTION)
        recorder = _Recorder(perfect_model(ChainingStrategy.SHORTEST))
        drive_step_by_step(recorder, distractor_question)
        expected = render_step_by_step(inst, ChainingStrategy.SHORTEST)
        assert [r.input for r in recorder.log] == [e.input_text for e in expected]

    def test_token_context_matches_training_inputs(self, distractor_question):
        inst = _instance_for(DISTRACTOR_QUESTION)
        recorder = _Recorder(perfect_model(ChainingStrategy.SHORTEST))
        drive_token_by_token(recorder, distractor_question)
        expected = render_token_by_token(inst, ChainingStrategy.SHORTEST)
        assert [r.input for r in recorder.log] == [e.input_text for e in expected]


class _Recorder:
    def __init__(self, inner):
        self.inner = inner
        self.log = []

    def request(self, req):
        self.log.append(req)
        return self.inner.request(req)

    def close(self):
        pass


class TestTokenDriver:
    def test_perfect_completes_within_gold_token_count(self):
        inst = _instance_for(TWO_EQ_QUESTION)
        port = perfect_model(ChainingStrategy.SHORTEST)
        result = drive_token_by_token(port, inst.question)
        gold_tokens = render_token_by_token(inst, ChainingStrategy.SHORTEST)
        assert result.calls == len(gold_tokens)
        assert not result.capped
        assert ", ".join(pl.text for pl in result.plines) == render(
            inst.gold[ChainingStrategy.SHORTEST]
        )

    def test_two_digit_answer_not_truncated(self):
        # Answer 97 begins with the digit 9; the driver must not stop at B=9.
        q = parse_question("A=90, B=7+A, B?")
        port = perfect_model(ChainingStrategy.SHORTEST)
        result = drive_token_by_token(port, q)
        assert not result.capped
        assert result.plines[-1].text == "B=97"

    def test_substitution_prefix_collision(self):
        # Gold: E=92, Y=E+0, Y=92+0, Y=92.  The substitution line starts with
        # the final answer text `Y=92`; the driver must keep accreting.
        q = parse_question("E=92, Y=E+0, Y?")
        port = perfect_model(ChainingStrategy.SHORTEST)
        result = drive_token_by_token(port, q)
        assert not result.capped
        assert ", ".join(pl.text for pl in result.plines) == "E=92, Y=E+0, Y=92+0, Y=92"

    def test_backward_copy_prefix_collision(self):
        # Backward gold starts with the copy `C=5+B`, whose prefix `C=5`
        # already spells the final answer (B is 0).
        q = parse_question("B=0, C=5+B, C?")
        port = perfect_model(ChainingStrategy.BACKWARD)
        result = drive_token_by_token(port, q, chaining=ChainingStrategy.BACKWARD)
        assert not result.capped
        assert ", ".join(pl.text for pl in result.plines) == "C=5+B, B=0, C=5+0, C=5"

    def test_none_chaining_bare_claim_stops(self):
        q = parse_question("A=1, B=2+A, B?")
        port = perfect_model(ChainingStrategy.NONE)
        result = drive_token_by_token(port, q, chaining=ChainingStrategy.NONE)
        assert not result.capped and result.calls == 3
        assert [pl.text for pl in result.plines] == ["B=3"]

    def test_non_token_response_rejected(self, distractor_question):
        port = _ScriptedPort(["B="])
        result = drive_token_by_token(port, distractor_question)
        assert result.calls == 1
        assert result.plines and result.plines[-1].line is None

    def test_cap_drops_partial_line(self, distractor_question):
        port = _ScriptedPort(["A"])  # endless stream of variable tokens
        result = drive_token_by_token(port, distractor_question, max_steps=10)
        assert result.capped and result.calls == 10
        assert result.plines == []  # one never-completed line, dropped

    def test_cap_keeps_completed_lines(self, distractor_question):
        # A=1 then an endless tail: the completed first line survives.
        outputs = ["A", "=", "1", ","] + ["B"]
        port = _ScriptedPort(outputs)
        result = drive_token_by_token(port, distractor_question, max_steps=12)
        assert result.capped
        assert [pl.text for pl in result.plines] == ["A=1"]


class TestAllAtOnceDriver:
    def test_single_call(self, distractor_question):
        port = perfect_model(ChainingStrategy.BACKWARD)
        result = drive_all_at_once(port, distractor_question)
        assert result.calls == 1
        assert ", ".join(pl.text for pl in result.plines) == (
            "C=5+B, B=2+A, A=1, B=2+1, B=3, C=5+3, C=8"
        )

    def test_empty_output_scores_malformed(self, distractor_question):
        inst = _instance_for(DISTRACTOR_QUESTION)
        result = drive_all_at_once(_ScriptedPort([""]), distractor_question)
        from symchain.harness import score_instance

        outcome = score_instance(inst, ChainingStrategy.SHORTEST, result)
        assert not outcome.verdict.answer_correct
        assert ErrorClass.MALFORMED in outcome.verdict.errors

    def test_unparseable_tail_preserved(self, distractor_question):
        inst = _instance_for(DISTRACTOR_QUESTION)
        gold_text = render(inst.gold[ChainingStrategy.SHORTEST])
        result = drive_all_at_once(_ScriptedPort([gold_text + ", ???"]), distractor_question)
        assert result.plines[-1].line is None
        assert result.plines[-1].text == "???"


class TestEvaluate:
    def test_id_mismatch_is_transport_error(self, distractor_question):
        with pytest.raises(TransportError):
            drive_all_at_once(_WrongIdPort([]), distractor_question)

    def test_transport_error_flags_incomplete(self):
        cfg = RunConfig(outputs=[OutputStrategy.ALL_AT_ONCE],
                        chainings=[ChainingStrategy.SHORTEST],
                        depths=[1, 2], per_depth=2, seeds=[5])
        report = run_evaluation(lambda: _WrongIdPort([]), cfg)
        assert report.meta["incomplete"] is True
        assert "transport_error" in report.meta

    def test_aggregate_arithmetic(self):
        insts = gen_split(31, [1, 2], 5)
        outcomes = evaluate_pair(lambda: perfect_model(ChainingStrategy.SHORTEST),
                                 insts, OutputStrategy.STEP_BY_STEP, ChainingStrategy.SHORTEST)
        stats = aggregate(outcomes)
        for depth, entry in stats.items():
            assert entry["n"] == 5
            assert entry["chain_correct"] == entry["answer_correct"] == 5
            assert sum(entry["chain_length_hist"].values()) == entry["n"]
            assert entry["capped"] == 0

    def test_jobs_parallelism_matches_serial(self):
        insts = gen_split(32, [1, 3], 6)
        serial = evaluate_pair(lambda: perfect_model(ChainingStrategy.BACKWARD),
                               insts, OutputStrategy.STEP_BY_STEP, ChainingStrategy.BACKWARD, jobs=1)
        parallel = evaluate_pair(lambda: perfect_model(ChainingStrategy.BACKWARD),
                                 insts, OutputStrategy.STEP_BY_STEP, ChainingStrategy.BACKWARD, jobs=3)
        assert [o.instance_id for o in serial] == [o.instance_id for o in parallel]
        assert [o.verdict for o in serial] == [o.verdict for o in parallel]

    def test_multi_seed_means(self):
        cfg = RunConfig(outputs=[OutputStrategy.ALL_AT_ONCE],
                        chainings=[ChainingStrategy.SHORTEST],
                        depths=[1, 2], per_depth=3, seeds=[5, 6, 7])
        report = run_evaluation(lambda: perfect_model(ChainingStrategy.SHORTEST), cfg)
        entry = report.pairs["all/shortest"]["per_depth"]["1"]
        assert entry["n"] == 9
        assert len(entry["per_seed"]) == 3
        assert entry["chain_accuracy"] == pytest.approx(
            sum(s["chain_accuracy"] for s in entry["per_seed"].values()) / 3
        )

    def test_dataset_hash_stable(self):
        a = gen_split(33, [1, 2], 4)
        b = gen_split(33, [1, 2], 4)
        assert dataset_hash(a) == dataset_hash(b)
        assert dataset_hash(a) != dataset_hash(gen_split(34, [1, 2], 4))

    def test_report_round_trip(self):
        from symchain.harness import Report

        cfg = RunConfig(outputs=[OutputStrategy.ALL_AT_ONCE],
                        chainings=[ChainingStrategy.NONE],
                        depths=[1], per_depth=2, seeds=[1])
        report = run_evaluation(lambda: perfect_model(ChainingStrategy.NONE), cfg)
        again = Report.from_json(report.to_json())
        assert again.pairs == report.pairs and again.meta == report.meta


class TestCappedScoring:
    def test_capped_outcome_scored_on_partial(self):
        inst = _instance_for(DISTRACTOR_QUESTION)
        port = _ScriptedPort(["D=3+A"])
        outcomes = evaluate_pair(lambda: port, [inst], OutputStrategy.STEP_BY_STEP,
                                 ChainingStrategy.SHORTEST, step_cap=20)
        (outcome,) = outcomes
        assert outcome.capped and outcome.calls == 20
        assert not outcome.verdict.answer_correct
        assert not outcome.verdict.chain_correct
