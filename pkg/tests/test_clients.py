import json

import httpx
import pytest

from modulobench.clients import (
    ORACLE_ANSWER, AuthError, GeneratorConfig, GeneratorError, GeneratorUsage, OracleGenerator, RemoteGenerator,
    ReplayGenerator, ReplayMiss, RetryPolicy, ScriptedGenerator, Transcript, TransportError, build_generator,
    make_translator, prompt_hash,
)
from modulobench.extraction import extract_plan
from modulobench.pddl import render_plan
from modulobench.tasks import PLANNING, PlanningInstance, Task, evaluate, first_prompt, oracle_answer
from modulobench.validator import validate_plan

ENDPOINT = "https://example.invalid/v1/chat/completions"


@pytest.fixture
def task(bw, h1):
    return Task("h1", PLANNING, PlanningInstance(bw, h1))


def _completion(text="(pick-up a)", usage=None):
    return {"choices": [{"message": {"content": text}}],
            "usage": usage if usage is not None else {"prompt_tokens": 10, "completion_tokens": 5}}


def _remote(handler, monkeypatch, **cfg):
    monkeypatch.setenv("TEST_KEY", "secret")
    config = GeneratorConfig("remote", model="m", endpoint=ENDPOINT, api_key_env="TEST_KEY", **cfg)
    sleeps = []
    gen = RemoteGenerator(config, client=httpx.Client(transport=httpx.MockTransport(handler)), sleep=sleeps.append)
    return gen, sleeps


def test_scripted_plays_in_order(task):
    gen = ScriptedGenerator(["wrong 1", "wrong 2", ORACLE_ANSWER])
    texts = [gen.propose("p", task)[0] for _ in range(4)]
    assert texts[:2] == ["wrong 1", "wrong 2"]
    assert texts[2] == texts[3] == oracle_answer(task)


def test_scripted_counts_attempts_per_task(bw, h1):
    gen = ScriptedGenerator(["a", "b"])
    t1, t2 = Task("1", PLANNING, PlanningInstance(bw, h1)), Task("2", PLANNING, PlanningInstance(bw, h1))
    assert [gen.propose("p", t1)[0], gen.propose("p", t2)[0], gen.propose("p", t1)[0]] == ["a", "a", "b"]


def test_scripted_callables_and_usage(task):
    gen = ScriptedGenerator(lambda t, attempt: (lambda prompt, tk: f"{tk.id}:{attempt}:{prompt}"),
                            usage=lambda prompt, text: GeneratorUsage(len(prompt), len(text)))
    text, usage = gen.propose("xy", task)
    assert text == "h1:1:xy" and usage == GeneratorUsage(2, 7)
    with pytest.raises(ValueError):
        ScriptedGenerator([])


def test_oracle_answers_validate(task, bw, h1):
    gen = OracleGenerator()
    text, usage = gen.propose(first_prompt(task), task)
    assert validate_plan(bw, h1, extract_plan(text, bw, h1)).valid
    assert usage.input_tokens == usage.output_tokens == usage.reasoning_tokens == 0
    with pytest.raises(GeneratorError):
        gen.propose("prompt only")


def test_extraction_idempotent_on_oracle_plans(task, bw, h1):
    text = oracle_answer(task)
    once = extract_plan(text, bw, h1)
    assert extract_plan(render_plan(once), bw, h1) == once


def test_transcript_and_replay(tmp_path, task):
    path = tmp_path / "t.jsonl"
    gen = ScriptedGenerator(["first", "second"], usage=GeneratorUsage(3, 4, 1), transcript=Transcript(path))
    gen.propose("p1", task)
    gen.propose("p2", task)
    entries = Transcript.read(path)
    assert [e.response for e in entries] == ["first", "second"]
    assert entries[0].prompt_hash == prompt_hash("p1") and entries[0].task_id == "h1"
    replay = ReplayGenerator(path)
    assert replay.propose("p2", task) == ("second", GeneratorUsage(3, 4, 1))
    assert replay.propose("p1", task) == ("first", GeneratorUsage(3, 4, 1))
    with pytest.raises(ReplayMiss):
        replay.propose("never asked", task)


def test_replay_repeated_prompt_in_order(tmp_path, task):
    path = tmp_path / "t.jsonl"
    gen = ScriptedGenerator(["a", "b"], transcript=Transcript(path))
    gen.propose("same", task)
    gen.propose("same", task)
    replay = ReplayGenerator(path)
    assert [replay.propose("same", task)[0] for _ in range(3)] == ["a", "b", "b"]


def test_replay_identical_results(tmp_path, task):
    path = tmp_path / "t.jsonl"
    OracleGenerator(transcript=Transcript(path)).propose("q", task)
    a = ReplayGenerator(path).propose("q", task)
    b = ReplayGenerator(path).propose("q", task)
    assert a == b


def test_remote_usage_mapping(monkeypatch):
    seen = []

    def handler(request):
        seen.append(json.loads(request.content))
        assert request.headers["authorization"] == "Bearer secret"
        return httpx.Response(200, json=_completion("ok", {"prompt_tokens": 1000, "completion_tokens": 2500,
                                                           "completion_tokens_details": {"reasoning_tokens": 2000}}))

    gen, _ = _remote(handler, monkeypatch)
    text, usage = gen.propose("hello")
    assert text == "ok"
    assert (usage.input_tokens, usage.output_tokens, usage.reasoning_tokens) == (1000, 500, 2000)
    assert seen[0]["messages"] == [{"role": "user", "content": "hello"}] and seen[0]["model"] == "m"


def test_remote_custom_usage_fields(monkeypatch):
    def handler(request):
        return httpx.Response(200, json=_completion("ok", {"input_tokens": 7, "output_tokens": 9, "thinking": 4}))

    gen, _ = _remote(handler, monkeypatch, usage_fields={"input": "input_tokens", "output": "output_tokens",
                                                         "reasoning": "thinking"}, reasoning_in_output=False)
    _, usage = gen.propose("x")
    assert (usage.input_tokens, usage.output_tokens, usage.reasoning_tokens) == (7, 9, 4)


def test_remote_retries_then_succeeds(monkeypatch):
    codes = iter([429, 503, 200])

    def handler(request):
        code = next(codes)
        return httpx.Response(code, json=_completion() if code == 200 else {})

    gen, sleeps = _remote(handler, monkeypatch, retry=RetryPolicy(max_attempts=4, backoff_s=1.0))
    assert gen.propose("x")[0] == "(pick-up a)"
    assert gen.requests_sent == 3 and sleeps == [1.0, 2.0]


def test_remote_gives_up(monkeypatch):
    def handler(request):
        raise httpx.ConnectError("down")

    gen, sleeps = _remote(handler, monkeypatch, retry=RetryPolicy(max_attempts=3, backoff_s=1.0, max_backoff_s=1.5))
    with pytest.raises(TransportError):
        gen.propose("x")
    assert gen.requests_sent == 3 and sleeps == [1.0, 1.5]


def test_remote_auth_failures(monkeypatch):
    gen, _ = _remote(lambda r: httpx.Response(401), monkeypatch)
    with pytest.raises(AuthError):
        gen.propose("x")
    assert gen.requests_sent == 1
    monkeypatch.delenv("TEST_KEY")
    with pytest.raises(AuthError):
        RemoteGenerator(GeneratorConfig("remote", model="m", endpoint=ENDPOINT, api_key_env="TEST_KEY"))


def test_remote_hard_error_and_malformed(monkeypatch):
    gen, _ = _remote(lambda r: httpx.Response(400, text="bad"), monkeypatch)
    with pytest.raises(GeneratorError):
        gen.propose("x")
    gen, _ = _remote(lambda r: httpx.Response(200, json={"choices": []}), monkeypatch)
    with pytest.raises(GeneratorError):
        gen.propose("x")


def test_config_validation():
    with pytest.raises(ValueError):
        GeneratorConfig("psychic")
    with pytest.raises(ValueError):
        GeneratorConfig("remote", model="m")
    with pytest.raises(ValueError):
        GeneratorConfig("replay")
    cfg = GeneratorConfig.from_dict({"kind": "oracle", "retry": {"max_attempts": 2}})
    assert cfg.retry.max_attempts == 2
    assert GeneratorConfig.from_dict(cfg.to_dict()) == cfg


def test_build_generator(tmp_path):
    assert isinstance(build_generator(GeneratorConfig("oracle")), OracleGenerator)
    with pytest.raises(ValueError):
        build_generator(GeneratorConfig("scripted"))
    assert isinstance(build_generator(GeneratorConfig("scripted"), script=["x"]), ScriptedGenerator)


def test_retry_delays():
    r = RetryPolicy(backoff_s=2, max_backoff_s=10)
    assert [r.delay(i) for i in range(1, 5)] == [2, 4, 8, 10]


def test_translator_feeds_extraction(task, bw, h1):
    gen = ScriptedGenerator(["(unstack b c)\n(put-down b)\n(pick-up c)\n(stack c b)"])
    translate = make_translator(gen, bw)
    ev = evaluate(task, "I would lift the second block off and then rebuild.", translator=translate)
    assert ev.valid
