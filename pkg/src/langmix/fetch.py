"""Generation collection from an HTTP inference endpoint.

The endpoint contract is POST JSON {"prompt", "temperature", "seed"} ->
{"text"}. One record is requested per (prompt, temperature, repeat) and
appended to the output JSONL as soon as it arrives, so an interrupted run
can resume: records already present (by unique key) are never re-fetched.

Transport failures and malformed bodies are retried up to `max_attempts`
times per record. A record that stays malformed is skipped with a reason;
a record that stays unreachable aborts the run (partial progress is kept).
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Set, Tuple

import httpx

from .errors import EndpointUnreachable, InputDataError, MalformedResponse
from .harness import GenerationRecord, generation_to_obj, record_from_obj
from .rng import derive_seed

logger = logging.getLogger(__name__)

AUTH_TOKEN_ENV = "LANGMIX_AUTH_TOKEN"


@dataclass(frozen=True)
class PromptRecord:
    prompt_id: str
    text: str


def read_prompts(path) -> List[PromptRecord]:
    """Read prompts JSONL: {"prompt_id", "text"} per line."""
    prompts = []
    seen = set()
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            rec = PromptRecord(prompt_id=str(obj["prompt_id"]), text=obj["text"])
        except (json.JSONDecodeError, KeyError, TypeError) as err:
            raise InputDataError(f"{path}:{lineno}: bad prompt record ({err})") from err
        if rec.prompt_id in seen:
            raise InputDataError(f"{path}:{lineno}: duplicate prompt_id {rec.prompt_id!r}")
        seen.add(rec.prompt_id)
        prompts.append(rec)
    return prompts


@dataclass
class FetchSettings:
    endpoint: str
    model: str
    method: str = "base"
    temperatures: Sequence[float] = (0.7, 1.0, 1.2)
    repeats: int = 3
    concurrency: int = 4
    seed: int = 0
    timeout: float = 30.0
    max_attempts: int = 4  # one initial request plus up to three retries
    backoff: float = 0.25
    auth_token: Optional[str] = None

    def resolved_token(self) -> Optional[str]:
        return self.auth_token or os.environ.get(AUTH_TOKEN_ENV)


@dataclass
class FetchSummary:
    fetched: int = 0
    resumed: int = 0
    failed: List[Tuple[Tuple, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failed


def _existing_keys(out_path: Path) -> Set[Tuple]:
    keys: Set[Tuple] = set()
    if not out_path.exists():
        return keys
    for lineno, line in enumerate(out_path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        rec = record_from_obj(json.loads(line), f"{out_path}:{lineno}")
        keys.add(rec.key)
    return keys


def _request_one(
    client: httpx.Client,
    settings: FetchSettings,
    prompt: PromptRecord,
    temperature: float,
    repeat: int,
) -> str:
    """Fetch one generation, retrying; returns the generated text."""
    payload = {
        "prompt": prompt.text,
        "temperature": temperature,
        "seed": derive_seed(settings.seed, f"{prompt.prompt_id}|{temperature}|{repeat}") >> 1,
    }
    headers = {}
    token = settings.resolved_token()
    if token:
        headers["Authorization"] = f"Bearer {token}"

    last_error: Exception = MalformedResponse("no attempt made")
    for attempt in range(1, settings.max_attempts + 1):
        try:
            response = client.post(
                settings.endpoint, json=payload, headers=headers, timeout=settings.timeout
            )
            if response.status_code >= 500:
                raise MalformedResponse(f"server error {response.status_code}")
            if response.status_code != 200:
                raise MalformedResponse(f"unexpected status {response.status_code}")
            body = response.json()
            text = body["text"]
            if not isinstance(text, str):
                raise MalformedResponse("'text' field is not a string")
            return text
        except httpx.TransportError as err:
            last_error = EndpointUnreachable(f"{settings.endpoint}: {err}")
        except (json.JSONDecodeError, ValueError, KeyError, TypeError) as err:
            last_error = MalformedResponse(str(err))
        except MalformedResponse as err:
            last_error = err
        if attempt < settings.max_attempts:
            logger.warning(
                "retry %d/%d for %s T=%s r=%d: %s",
                attempt,
                settings.max_attempts,
                prompt.prompt_id,
                temperature,
                repeat,
                last_error,
            )
            if settings.backoff:
                time.sleep(settings.backoff * attempt)
    raise last_error


def fetch_generations(
    settings: FetchSettings,
    prompts: Sequence[PromptRecord],
    out_path,
    client: Optional[httpx.Client] = None,
) -> FetchSummary:
    """Collect one record per (prompt, temperature, repeat) into out_path.

    Requests run in a bounded thread pool; the output file has a single
    writer. Raises EndpointUnreachable if any record exhausts its retries
    at the transport level (whatever has been written stays on disk).
    """
    out_path = Path(out_path)
    existing = _existing_keys(out_path)
    summary = FetchSummary()

    pending = []
    for prompt in prompts:
        for temperature in settings.temperatures:
            for repeat in range(1, settings.repeats + 1):
                key = (prompt.prompt_id, settings.model, settings.method, float(temperature), repeat)
                if key in existing:
                    summary.resumed += 1
                    continue
                pending.append((prompt, float(temperature), repeat))

    own_client = client is None
    if own_client:
        client = httpx.Client()
    write_lock = threading.Lock()
    unreachable: List[EndpointUnreachable] = []

    try:
        with open(out_path, "a", encoding="utf-8") as out, ThreadPoolExecutor(
            max_workers=max(1, settings.concurrency)
        ) as pool:
            futures = {
                pool.submit(_request_one, client, settings, prompt, temperature, repeat): (
                    prompt,
                    temperature,
                    repeat,
                )
                for prompt, temperature, repeat in pending
            }
            for future in as_completed(futures):
                prompt, temperature, repeat = futures[future]
                key = (prompt.prompt_id, settings.model, settings.method, temperature, repeat)
                try:
                    text = future.result()
                except MalformedResponse as err:
                    logger.error("skipping %s: %s", key, err)
                    summary.failed.append((key, str(err)))
                    continue
                except EndpointUnreachable as err:
                    unreachable.append(err)
                    continue
                record = GenerationRecord(
                    prompt_id=prompt.prompt_id,
                    model=settings.model,
                    method=settings.method,
                    temperature=temperature,
                    repeat=repeat,
                    text=text,
                )
                with write_lock:
                    out.write(json.dumps(generation_to_obj(record), ensure_ascii=False) + "\n")
                    out.flush()
                summary.fetched += 1
    finally:
        if own_client:
            client.close()

    if unreachable:
        raise unreachable[0]
    return summary
