"""Prompt construction, gating, and remote consolidation through an
OpenAI-compatible completion endpoint.

The default token counter is deliberately simple and fully reproducible:
pieces are word runs (\\w+) and individual punctuation characters; word runs
are inflated for subword splitting by a factor of exactly 1.3, rounded up
using integer arithmetic (ceil(13·words/10)), and each punctuation character
counts as one token. A pluggable exact tokenizer can replace it when a model
vocabulary is available.
"""
from __future__ import annotations

import json
import logging
import os
import re
import time
from dataclasses import dataclass
from typing import Callable, Sequence

import requests

from .model import ConsolidationTriplet, GateOutcome, _require

logger = logging.getLogger(__name__)

PROMPT_LAYOUT = "### Instruction\n{instruction}\n\n### Input\n{input}\n\n### Response\n"
RESPONSE_HEADER = "### Response"

_WORD_PIECES = re.compile(r"\w+")
_PUNCT_PIECES = re.compile(r"[^\w\s]")


class LlmError(Exception):
    pass


class RequestTimeout(LlmError):
    """The completion endpoint did not answer within the configured timeout."""


class ServiceError(LlmError):
    def __init__(self, status: int, body_excerpt: str):
        super().__init__(f"completion endpoint returned {status}: {body_excerpt}")
        self.status = status
        self.body_excerpt = body_excerpt


class EmptyCompletion(LlmError):
    """The service answered but produced no usable text."""


def count_tokens(text: str) -> int:
    """Deterministic token estimate: ceil(1.3 × word runs) + punctuation chars."""
    words = len(_WORD_PIECES.findall(text))
    punct = len(_PUNCT_PIECES.findall(text))
    return -(-13 * words // 10) + punct


Tokenizer = Callable[[str], int]


@dataclass(frozen=True)
class Prompt:
    text: str
    token_count: int
    few_shot: bool = False

    def __post_init__(self) -> None:
        _require(self.token_count >= 0, "token_count must be non-negative")


@dataclass(frozen=True)
class BackendConfig:
    """Connection and budget settings for a text-generation service.

    Credentials are read from the environment variable named by
    ``api_key_env``; they never appear in config files or logs.
    """

    endpoint: str
    model: str
    max_prompt_tokens: int = 1024
    max_completion_tokens: int = 1024
    timeout_seconds: float = 30.0
    max_retries: int = 3
    concurrency: int = 1
    api_key_env: str = "CONSOLAW_API_KEY"

    def __post_init__(self) -> None:
        _require(self.max_prompt_tokens >= 1, "max_prompt_tokens must be at least 1")
        _require(self.concurrency >= 1, "concurrency must be at least 1")
        _require(self.max_retries >= 0, "max_retries must be non-negative")


def _filled_block(triplet: ConsolidationTriplet) -> str:
    if triplet.response is None:
        raise ValueError("few-shot examples must carry a response")
    return PROMPT_LAYOUT.format(instruction=triplet.instruction, input=triplet.input) + triplet.response + "\n\n"


def build_prompt(
    triplet: ConsolidationTriplet,
    few_shot_examples: Sequence[ConsolidationTriplet] = (),
    *,
    tokenizer: Tokenizer = count_tokens,
) -> Prompt:
    """Instruction-tuning layout; few-shot examples are prepended as complete
    filled blocks so the bare prompt is always a suffix."""
    blocks = [_filled_block(example) for example in few_shot_examples]
    blocks.append(PROMPT_LAYOUT.format(instruction=triplet.instruction, input=triplet.input))
    text = "".join(blocks)
    return Prompt(text=text, token_count=tokenizer(text), few_shot=bool(few_shot_examples))


def has_table(text: str) -> bool:
    """Two consecutive lines, each with at least two column separators."""
    previous = False
    for line in text.split("\n"):
        current = (line.count("|") + line.count("\t")) >= 2
        if current and previous:
            return True
        previous = current
    return False


TableDetector = Callable[[str], bool]


def evaluate_gate(
    token_count: int,
    instruction: str,
    input_text: str,
    max_prompt_tokens: int | None,
    table_detector: TableDetector = has_table,
) -> GateOutcome:
    """Pure gating rule: tables exclude outright; token budgets are exclusive
    (a prompt of exactly the budget is already too long)."""
    if table_detector(instruction) or table_detector(input_text):
        return GateOutcome.excluded_table()
    if max_prompt_tokens is not None and token_count >= max_prompt_tokens:
        return GateOutcome.excluded_length(token_count)
    return GateOutcome.possible()


def gate(
    prompt: Prompt,
    triplet: ConsolidationTriplet,
    config: BackendConfig,
    *,
    table_detector: TableDetector = has_table,
) -> GateOutcome:
    return evaluate_gate(
        prompt.token_count, triplet.instruction, triplet.input, config.max_prompt_tokens, table_detector
    )


def _strip_prompt_echo(completion: str) -> str:
    if RESPONSE_HEADER in completion:
        completion = completion[completion.rindex(RESPONSE_HEADER) + len(RESPONSE_HEADER) :]
    return completion.lstrip("\n").rstrip()


def consolidate_remote(
    prompt: Prompt,
    config: BackendConfig,
    *,
    session: requests.Session | None = None,
    sleep: Callable[[float], None] = time.sleep,
) -> str:
    """One consolidation from the remote service (call only after the gate
    returned possible). Deterministic generation settings: temperature 0,
    single sample. Retries on 429/5xx/timeouts up to ``max_retries``."""
    session = session or requests.Session()
    payload = {
        "model": config.model,
        "prompt": prompt.text,
        "max_tokens": config.max_completion_tokens,
        "temperature": 0,
        "n": 1,
    }
    headers = {"Content-Type": "application/json"}
    api_key = os.environ.get(config.api_key_env, "")
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"

    logger.debug(
        "completion request to %s: %s",
        config.endpoint,
        json.dumps({**payload, "prompt": f"<{prompt.token_count} tokens>"}, ensure_ascii=False),
    )

    last_error: LlmError | None = None
    for attempt in range(config.max_retries + 1):
        if attempt:
            sleep(min(2.0 ** (attempt - 1), 30.0))
        try:
            response = session.post(
                config.endpoint, json=payload, headers=headers, timeout=config.timeout_seconds
            )
        except requests.Timeout:
            last_error = RequestTimeout(f"no answer within {config.timeout_seconds}s")
            continue
        except requests.RequestException as exc:
            last_error = ServiceError(0, str(exc)[:200])
            continue

        if response.status_code == 429 or response.status_code >= 500:
            last_error = ServiceError(response.status_code, response.text[:200])
            continue
        if response.status_code != 200:
            raise ServiceError(response.status_code, response.text[:200])

        logger.debug("completion response: %s", response.text[:500])
        try:
            data = response.json()
            choice = data["choices"][0]
            text = choice.get("text")
            if text is None:
                text = choice["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ServiceError(response.status_code, f"malformed body: {response.text[:160]}") from exc

        stripped = _strip_prompt_echo(text)
        if not stripped:
            raise EmptyCompletion("service returned an empty completion")
        return stripped

    raise last_error if last_error is not None else EmptyCompletion("no attempt succeeded")
