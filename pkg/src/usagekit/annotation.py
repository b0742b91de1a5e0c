"""Label generation with prompted chat models.

Holds the four built-in prompt templates (plain and chain-of-thought, each
with a 2-shot and a 6-shot variant), strict response parsing into
usage-option sets, and a resumable client for chat-completion endpoints.
"""

from __future__ import annotations

import json
import string
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ContractViolation, RemoteError
from .set_metrics import UsageOptionSet, option_set

PLAIN = "plain"
CHAIN_OF_THOUGHT = "chain-of-thought"

REVIEW_PLACEHOLDER = "[review_body]"
RESULT_MARKER = "Result:"
NO_USAGE_SENTINEL = "no usage options"

PARSE_OK = "ok"
PARSE_FORMAT_VIOLATION = "format_violation"
PARSE_ERROR = "error"

# Answers longer than this many whitespace tokens are treated as prose that
# ignored the output format (the long-sentence failure mode of weaker chat
# models). Configurable via parse_response.
MAX_OPTION_TOKENS = 15

_SYSTEM_PLAIN = (
    "You are a data labeler, tasked with extracting usage options from product reviews. "
    "I will give you a customer review for an e-commerce product. You should answer the "
    "question “What can this product be used for?” by only using information from "
    "the review author. Reply only and strictly with the list of usage options separated "
    "by a semicolon. If the review author does not mention any usage option, output "
    "“No usage options”. Do not output negative usage options or further product "
    "information like product quality, attributes, target audiences, etc."
)

_SYSTEM_COT = (
    "You are a data labeler, tasked with extracting usage options from product reviews. "
    "I will give you a customer review for an e-commerce product. You should answer the "
    "question “What can this product be used for?” by only using information from "
    "the review author. You should first explain your thought process step-by-step, "
    "followed by the actual result (“Result:”). Your result may only be a list of "
    "usage options separated by a semicolon. If the review author does not mention any "
    "usage option, your result should be “No usage options”. Do not output "
    "negative usage options or further product information like product quality, "
    "attributes, target audiences, etc."
)

_EXAMPLE_REVIEWS = (
    "This grill is perfect for home BBQs and was suprisingly also able to smoke "
    "vegetables. Apparently it can also be used for camping trips but I found it to be "
    "too big.",
    "This was a perfect gift for my 10 year old daughter.",
    "Love love love them they offer such storage for lip sticks and concealers. And they "
    "make your make up counter look very well kept",
    "Very pretty and feminine. This blouse is made of sort of voile, so a camisole under "
    "it will be needed, but it is lovely by design and everything else. Very nice!",
    "helps alleviate pressure from pregnancy. I like its squishyness! :)",
    "The printer arrived on time and was easy to set up. It prints very fast and the "
    "quality is great. It is perfect for printing pictures. I am very happy with this "
    "purchase.\n\nUpdate: After two weeks the quality has dedeteriorated enormously. "
    "Don't buy this",
)

_PLAIN_ANSWERS = (
    "home BBQs; smoke vegetables",
    "No usage options",
    "storage for lip sticks; storage for concealers; organize make up counter",
    "No usage options",
    "alleviate pressure from pregnancy",
    "No usage options",
)

_COT_ANSWERS = (
    "The review author first mentions that the grill is perfect for home BBQs. Then, the "
    "author mentions that they used it to smoke vegetables. Finally, the author mentions "
    "that the product can not be used for camping trips because it is too big.\n\n"
    "Result: home BBQs; smoke vegetables",
    "The review author mentions that the product can be used as a gift for their "
    "daughter, but gifting does not count as an usage option.\n\nResult: No usage options",
    "The review author first mentions that the product can be used for storing lipsticks "
    "and concealers. Then, the author mentions that they also use it to make their make "
    "up counter look well kept.\n\nResult: storage for lip sticks; storage for "
    "concealers; organize make up counter",
    "The review author mentions that the product is pretty and voile which is a personal "
    "opinion of the product and not a usage option.\n\nResult: No usage options",
    "The review author mentions that the product was helpful in alleviating pressure "
    "from pregnancy.\n\nResult: alleviate pressure from pregnancy",
    "Initially, the review author was happy with his printer and used it for printing "
    "pictures. However, after two weeks the quality deteriorated and therfore "
    "“printing pictures” is not a valid usage options.\n\nResult: No usage "
    "options",
)


@dataclass(frozen=True)
class PromptTemplate:
    name: str
    style: str  # plain | chain-of-thought
    shots: int  # 2 | 6
    system_text: str
    example_turns: tuple[tuple[str, str], ...]


def builtin_template(style: str, shots: int) -> PromptTemplate:
    """One of the four built-in templates."""
    if style not in (PLAIN, CHAIN_OF_THOUGHT):
        raise ContractViolation(f"unknown prompt style {style!r}")
    if shots not in (2, 6):
        raise ContractViolation(f"shots must be 2 or 6, got {shots}")
    answers = _COT_ANSWERS if style == CHAIN_OF_THOUGHT else _PLAIN_ANSWERS
    system_text = _SYSTEM_COT if style == CHAIN_OF_THOUGHT else _SYSTEM_PLAIN
    short = "cot" if style == CHAIN_OF_THOUGHT else "plain"
    return PromptTemplate(
        name=f"{short}-{shots}shot",
        style=style,
        shots=shots,
        system_text=system_text,
        example_turns=tuple(zip(_EXAMPLE_REVIEWS[:shots], answers[:shots])),
    )


BUILTIN_TEMPLATE_NAMES = ("plain-2shot", "plain-6shot", "cot-2shot", "cot-6shot")


def builtin_templates() -> dict[str, PromptTemplate]:
    return {
        "plain-2shot": builtin_template(PLAIN, 2),
        "plain-6shot": builtin_template(PLAIN, 6),
        "cot-2shot": builtin_template(CHAIN_OF_THOUGHT, 2),
        "cot-6shot": builtin_template(CHAIN_OF_THOUGHT, 6),
    }


@dataclass(frozen=True)
class ChatMessage:
    role: str  # system | user | assistant
    content: str


@dataclass
class ChatRequest:
    messages: tuple[ChatMessage, ...]
    temperature: float = 0.2
    model_id: str = ""

    def to_payload(self) -> dict:
        return {
            "model": self.model_id,
            "messages": [{"role": m.role, "content": m.content} for m in self.messages],
            "temperature": self.temperature,
        }


def template_messages(template: PromptTemplate) -> tuple[ChatMessage, ...]:
    """The template's message sequence with the placeholder left in place."""
    messages = [ChatMessage("system", template.system_text)]
    for user_text, assistant_text in template.example_turns:
        messages.append(ChatMessage("user", user_text))
        messages.append(ChatMessage("assistant", assistant_text))
    messages.append(ChatMessage("user", REVIEW_PLACEHOLDER))
    return tuple(messages)


def build_prompt(
    template: PromptTemplate,
    review_body: str,
    *,
    temperature: float = 0.2,
    model_id: str = "",
) -> ChatRequest:
    """Instantiate the template for one review body."""
    if not review_body:
        raise ContractViolation("review body must be non-empty")
    messages = list(template_messages(template))
    final = messages[-1]
    messages[-1] = ChatMessage(final.role, final.content.replace(REVIEW_PLACEHOLDER, review_body))
    return ChatRequest(tuple(messages), temperature=temperature, model_id=model_id)


def render_dialogue(messages: Sequence[ChatMessage]) -> str:
    """Plain-text rendering used for the golden prompt files."""
    blocks = [f"[{m.role}]\n{m.content}" for m in messages]
    return "\n\n".join(blocks) + "\n"


_STRIP_CHARS = string.punctuation + string.whitespace + "“”‘’"


def parse_response(
    raw: str, style: str = PLAIN, *, max_option_tokens: int = MAX_OPTION_TOKENS
) -> tuple[UsageOptionSet, str]:
    """Parse a model response into a usage-option set plus a parse status.

    Chain-of-thought responses are reduced to the text after the last
    "Result:" marker (missing marker: format violation). The sentinel for
    no usage options matches case-insensitively with surrounding punctuation
    stripped. Otherwise the text splits on semicolons; an empty result or
    any option longer than ``max_option_tokens`` whitespace tokens is a
    format violation. Violations never raise, they are statuses.
    """
    text = raw
    if style == CHAIN_OF_THOUGHT:
        marker_at = text.rfind(RESULT_MARKER)
        if marker_at < 0:
            return (), PARSE_FORMAT_VIOLATION
        text = text[marker_at + len(RESULT_MARKER):]
    text = text.strip()
    if text.strip(_STRIP_CHARS).lower() == NO_USAGE_SENTINEL:
        return (), PARSE_OK
    options = option_set(text.split(";"))
    if not options:
        return (), PARSE_FORMAT_VIOLATION
    if any(len(opt.split()) > max_option_tokens for opt in options):
        return (), PARSE_FORMAT_VIOLATION
    return options, PARSE_OK


def render_options(options: UsageOptionSet) -> str:
    """Canonical textual form of a parsed set (inverse of parse_response)."""
    return "; ".join(options) if options else "No usage options"


@dataclass
class LabelRecord:
    review_id: str
    source: str
    usage_options: UsageOptionSet
    raw_response: str
    parse_status: str
    timestamp: str

    def to_dict(self) -> dict:
        return {
            "review_id": self.review_id,
            "source": self.source,
            "usage_options": list(self.usage_options),
            "raw_response": self.raw_response,
            "parse_status": self.parse_status,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LabelRecord":
        return cls(
            review_id=data["review_id"],
            source=data["source"],
            usage_options=option_set(data["usage_options"]),
            raw_response=data.get("raw_response", ""),
            parse_status=data.get("parse_status", PARSE_OK),
            timestamp=data.get("timestamp", ""),
        )


@dataclass
class EndpointConfig:
    """Chat endpoint settings. The auth token is only ever read from the
    environment (``token_env``), never from config files."""

    url: str | None = None
    model_id: str = "gpt-4"
    temperature: float = 0.2
    token_env: str = "USAGEKIT_CHAT_TOKEN"
    max_retries: int = 5
    parallelism: int = 4
    requests_per_second: float | None = None
    timeout: float = 60.0
    retry_base_delay: float = 0.5
    dry_run: bool = False


class TokenBucket:
    """Rate limiter shared by the request workers: ``rate`` tokens per
    second, one token per request, bounded burst."""

    def __init__(self, rate: float, burst: int = 1):
        self.rate = rate
        self.capacity = max(1, burst)
        self._tokens = float(self.capacity)
        self._updated = time.monotonic()
        self._lock = threading.Lock()

    def acquire(self):
        while True:
            with self._lock:
                now = time.monotonic()
                self._tokens = min(self.capacity, self._tokens + (now - self._updated) * self.rate)
                self._updated = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) / self.rate
            time.sleep(wait)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def read_label_records(path) -> list[LabelRecord]:
    records = []
    path = Path(path)
    if not path.exists():
        return records
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                records.append(LabelRecord.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise ContractViolation(f"{path}:{lineno}: bad label record ({exc})") from exc
    return records


class ChatClient:
    """Thin chat-completions client with bounded retries."""

    def __init__(self, cfg: EndpointConfig, *, transport=None):
        import httpx

        self.cfg = cfg
        headers = {}
        import os

        token = os.environ.get(cfg.token_env)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        self._client = httpx.Client(timeout=cfg.timeout, headers=headers, transport=transport)
        self._bucket = (
            TokenBucket(cfg.requests_per_second, burst=cfg.parallelism)
            if cfg.requests_per_second
            else None
        )

    def complete(self, request: ChatRequest) -> str:
        """Return the assistant text, retrying transient faults with
        exponential backoff up to cfg.max_retries attempts."""
        import httpx

        last: RemoteError | None = None
        for attempt in range(self.cfg.max_retries):
            if attempt:
                time.sleep(self.cfg.retry_base_delay * 2 ** (attempt - 1))
            if self._bucket is not None:
                self._bucket.acquire()
            try:
                response = self._client.post(self.cfg.url, json=request.to_payload())
            except httpx.TransportError as exc:
                last = RemoteError(f"chat endpoint unreachable: {exc}", retriable=True)
                continue
            if response.status_code == 429 or response.status_code >= 500:
                last = RemoteError(f"chat endpoint returned {response.status_code}", retriable=True)
                continue
            if response.status_code != 200:
                raise RemoteError(f"chat endpoint returned {response.status_code}", retriable=False)
            try:
                return response.json()["choices"][0]["message"]["content"]
            except (KeyError, IndexError, ValueError) as exc:
                raise RemoteError(f"malformed chat response: {exc}", retriable=False) from exc
        raise last  # type: ignore[misc]

    def close(self):
        self._client.close()


def annotate_corpus(
    reviews: Iterable,
    template: PromptTemplate,
    cfg: EndpointConfig,
    out_path=None,
    *,
    transport=None,
) -> list[LabelRecord]:
    """Label every review with the template, one LabelRecord per review.

    Reviews need ``review_id`` and ``review_body`` attributes. Records are
    appended to ``out_path`` as they complete (in input order), and reviews
    already present in that file are skipped so interrupted runs resume.
    Dry-run mode produces empty format-violation records without touching
    the network. A non-retriable endpoint error aborts the run; everything
    written so far stays on disk. Reviews whose retries are exhausted get a
    record with parse_status "error".
    """
    reviews = list(reviews)
    ids = [r.review_id for r in reviews]
    if len(set(ids)) != len(ids):
        raise ContractViolation("duplicate review_ids in the annotation input")
    existing: dict[str, LabelRecord] = {}
    if out_path is not None:
        existing = {rec.review_id: rec for rec in read_label_records(out_path)}

    source = f"{cfg.model_id}:{template.name}"
    todo = [r for r in reviews if r.review_id not in existing]

    fresh: dict[str, LabelRecord] = {}

    def emit(record: LabelRecord):
        fresh[record.review_id] = record
        if out_path is not None:
            _append_record(out_path, record)

    if cfg.dry_run:
        for review in todo:
            emit(LabelRecord(review.review_id, source, (), "", PARSE_FORMAT_VIOLATION, _now()))
    elif todo:
        if not cfg.url:
            raise ContractViolation("no chat endpoint configured (and not a dry run)")
        client = ChatClient(cfg, transport=transport)

        def one(review) -> LabelRecord:
            request = build_prompt(
                template,
                review.review_body,
                temperature=cfg.temperature,
                model_id=cfg.model_id,
            )
            try:
                raw = client.complete(request)
            except RemoteError as exc:
                if not exc.retriable:
                    raise
                return LabelRecord(review.review_id, source, (), "", PARSE_ERROR, _now())
            options, status = parse_response(raw, template.style)
            return LabelRecord(review.review_id, source, options, raw, status, _now())

        try:
            with ThreadPoolExecutor(max_workers=cfg.parallelism) as pool:
                for review, record in zip(todo, pool.map(one, todo)):
                    emit(record)
        except RemoteError as exc:
            raise RemoteError(
                f"annotation aborted after {len(fresh) + len(existing)} records "
                f"(partial output kept): {exc}",
                retriable=exc.retriable,
            ) from exc
        finally:
            client.close()

    return [existing.get(r.review_id) or fresh[r.review_id] for r in reviews]


def _append_record(path, record: LabelRecord):
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(record.to_dict()) + "\n")
