"""Hosted-LLM teacher speaking the common chat-completions wire format.

The prompt file is plain UTF-8 with named sections ([zero_shot],
[few_shot_exemplars]); a packaged default ships with the library.  Replies
are parsed as one JSON object per candidate, with a pattern fallback that
extracts "Problem:" / "Equation:" pairs from prose.  Transport and 5xx
failures retry with exponential backoff; every run is capped by a request
budget so a misconfigured loop cannot burn through an API allowance.
"""

from __future__ import annotations

import json
import os
import re
import time
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable

from ..errors import AuthError, BudgetExceededError, ConfigError, TransportError
from ..problem import MappedProblem
from .. import expr
from .base import Candidate, GenerationMode

API_KEY_ENV = "TUTORLOOP_API_KEY"

_SECTION_RE = re.compile(r"^\[(?P<name>[a-z_]+)\]\s*$", re.MULTILINE)
_FALLBACK_PAIR = re.compile(
    r"Problem:\s*(?P<text>.+?)\s*Equation:\s*(?P<equation>[^\n]+)", re.DOTALL
)


@dataclass
class TeacherHttpConfig:
    base_url: str
    model: str = "gpt-3.5-turbo"
    temperature: float = 1.25
    max_tokens: int = 600
    timeout_s: float = 30.0
    retries: int = 3
    backoff_base_s: float = 1.0
    request_budget: int = 200
    prompt_path: str | None = None
    api_key_env: str = API_KEY_ENV


def load_prompt_sections(path: str | Path | None = None) -> dict[str, str]:
    """Parse the sectioned prompt file into {section: template}."""
    if path is None:
        text = resources.files("tutorloop.teacher").joinpath("prompts.txt").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    sections: dict[str, str] = {}
    matches = list(_SECTION_RE.finditer(text))
    if not matches:
        raise ConfigError("prompt file has no [section] headers")
    for i, m in enumerate(matches):
        end = matches[i + 1].start() if i + 1 < len(matches) else len(text)
        sections[m.group("name")] = text[m.end() : end].strip()
    return sections


def parse_reply_content(content: str, limit: int) -> list[tuple[str, str]]:
    """Extract up to `limit` (text, equation) pairs from a model reply."""
    pairs: list[tuple[str, str]] = []

    def push(obj) -> None:
        if isinstance(obj, dict) and "text" in obj and "equation" in obj:
            pairs.append((str(obj["text"]), str(obj["equation"])))

    stripped = content.strip()
    if stripped.startswith("```"):
        stripped = re.sub(r"^```[a-z]*\s*|\s*```$", "", stripped, flags=re.IGNORECASE)
    try:
        whole = json.loads(stripped)
        if isinstance(whole, list):
            for obj in whole:
                push(obj)
        else:
            push(whole)
    except json.JSONDecodeError:
        for line in stripped.splitlines():
            line = line.strip().rstrip(",")
            if not line.startswith("{"):
                continue
            try:
                push(json.loads(line))
            except json.JSONDecodeError:
                continue
    if not pairs:
        for m in _FALLBACK_PAIR.finditer(content):
            pairs.append((" ".join(m.group("text").split()), m.group("equation").strip()))
    return pairs[:limit]


class LlmTeacher:
    """TeacherClient that calls a chat-completions endpoint.

    The API key is read from the environment (TUTORLOOP_API_KEY by default)
    on first use; construction stays offline-safe.
    """

    def __init__(
        self,
        cfg: TeacherHttpConfig,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.cfg = cfg
        self.prompts = load_prompt_sections(cfg.prompt_path)
        self.requests_made = 0
        self._sleep = sleep

    # -- wire plumbing ------------------------------------------------------

    def _api_key(self) -> str:
        key = os.environ.get(self.cfg.api_key_env, "")
        if not key:
            raise AuthError(f"no API key in ${self.cfg.api_key_env}")
        return key

    def _endpoint(self) -> str:
        base = self.cfg.base_url.rstrip("/")
        if base.endswith("/chat/completions"):
            return base
        return base + "/chat/completions"

    def _post(self, body: dict) -> dict:
        if self.requests_made >= self.cfg.request_budget:
            raise BudgetExceededError(
                f"request budget of {self.cfg.request_budget} exhausted"
            )
        self.requests_made += 1
        data = json.dumps(body).encode("utf-8")
        headers = {
            "Content-Type": "application/json",
            "Authorization": f"Bearer {self._api_key()}",
        }
        last_error: Exception | None = None
        for attempt in range(self.cfg.retries):
            request = urllib.request.Request(self._endpoint(), data=data, headers=headers)
            try:
                with urllib.request.urlopen(request, timeout=self.cfg.timeout_s) as resp:
                    return json.loads(resp.read().decode("utf-8"))
            except urllib.error.HTTPError as exc:
                if exc.code in (401, 403):
                    raise AuthError(f"endpoint rejected credentials ({exc.code})") from exc
                if exc.code >= 500 or exc.code == 429:
                    last_error = exc
                else:
                    raise TransportError(f"HTTP {exc.code} from teacher endpoint") from exc
            except (urllib.error.URLError, TimeoutError, json.JSONDecodeError) as exc:
                last_error = exc
            if attempt + 1 < self.cfg.retries:
                self._sleep(self.cfg.backoff_base_s * 2**attempt)
        raise TransportError(f"teacher endpoint failed after {self.cfg.retries} attempts: {last_error}")

    # -- TeacherClient --------------------------------------------------------

    def _prompt_for(self, source: MappedProblem, mode: GenerationMode, count: int) -> str:
        section = "zero_shot" if mode is GenerationMode.ZERO_SHOT_SIMILAR else "few_shot_exemplars"
        template = self.prompts[section]
        values = {q.index: expr.format_value(q.value) for q in source.quantities}
        numeric_text = re.sub(
            r"\bN(\d+)\b", lambda m: values[int(m.group(1))], source.mapped_text
        )
        numeric_equation = expr.to_pretty_infix(
            expr.substitute_values(source.template, source.bindings())
        )
        return template.format(
            count=count, source_text=numeric_text, source_equation=numeric_equation
        )

    def generate(
        self, source: MappedProblem, mode: GenerationMode, count: int
    ) -> list[Candidate]:
        if count <= 0:
            return []
        body = {
            "model": self.cfg.model,
            "temperature": self.cfg.temperature,
            "max_tokens": self.cfg.max_tokens,
            "messages": [
                {"role": "user", "content": self._prompt_for(source, mode, count)},
            ],
        }
        reply = self._post(body)
        try:
            content = reply["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            return []
        return [
            Candidate(text, equation, mode, source.id, raw_payload=content)
            for text, equation in parse_reply_content(content, count)
        ]
