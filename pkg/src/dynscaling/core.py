"""Shared domain types, answer canonicalization, extraction, and majority voting.

Every other module builds on these types. All value types are immutable after
construction and all operations here are pure functions, so they are safe to
use from concurrent samplers without coordination.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path


class AnswerDomain(str, Enum):
    """Answer space of a query; drives extraction patterns and canonical form."""

    MULTIPLE_CHOICE = "multiple_choice"
    INTEGER = "integer"
    FREE_TEXT = "free_text"


class Provenance(str, Enum):
    """How a response was obtained."""

    INITIAL_PARALLEL = "initial_parallel"
    CHAIN_CONDITIONED = "chain_conditioned"
    BASELINE = "baseline"


class DatasetError(ValueError):
    """A query file failed schema validation."""


@dataclass(frozen=True)
class Query:
    """One task instance.

    Attributes:
        id:            Unique identifier within a query set.
        prompt:        The question text sent to the backend.
        answer_domain: Kind of answer expected.
        choices:       Choice labels; required for multiple_choice, absent otherwise.
        gold_answer:   Optional ground-truth answer in canonical form
                       (evaluation only, never shown to the sampling policy).
    """

    id: str
    prompt: str
    answer_domain: AnswerDomain
    choices: tuple[str, ...] | None = None
    gold_answer: str | None = None

    def __post_init__(self) -> None:
        if self.answer_domain is AnswerDomain.MULTIPLE_CHOICE:
            if not self.choices:
                raise ValueError(f"query {self.id!r}: multiple_choice requires choices")
        elif self.choices is not None:
            raise ValueError(f"query {self.id!r}: choices only valid for multiple_choice")
        if self.gold_answer is not None:
            canonical = normalize_answer(self.gold_answer, self.answer_domain, self.choices)
            if canonical != self.gold_answer:
                raise ValueError(
                    f"query {self.id!r}: gold_answer {self.gold_answer!r} is not canonical"
                    + (f" (expected {canonical!r})" if canonical is not None else "")
                )


@dataclass(frozen=True)
class CanonicalAnswer:
    """A normalized answer string together with its domain."""

    value: str
    domain: AnswerDomain


@dataclass(frozen=True)
class ResponseRecord:
    """One sampled completion.

    Attributes:
        id:               Unique record id (stable across replays).
        query_id:         Owning query.
        text:             Full completion text.
        extracted_answer: Canonical answer string, or None on extraction failure.
        output_tokens:    Completion cost in output tokens.
        round:            0-based allocation round that funded this sample
                          (0 = the uniform initial round).
        provenance:       How the sample was generated.
        chain_member_ids: Record ids used to build the conditioning chain;
                          non-empty iff provenance is chain_conditioned.
        backend_seed:     Seed of the backend call that produced this record.
        fallback:         True when a chain-conditioned slot fell back to a
                          bare-query sample (e.g. prompt exceeded the context).
    """

    id: str
    query_id: str
    text: str
    extracted_answer: str | None
    output_tokens: int
    round: int
    provenance: Provenance
    chain_member_ids: tuple[str, ...] = ()
    backend_seed: int | None = None
    fallback: bool = False

    def __post_init__(self) -> None:
        is_chained = self.provenance is Provenance.CHAIN_CONDITIONED
        if is_chained != bool(self.chain_member_ids):
            raise ValueError(
                f"record {self.id!r}: chain_member_ids must be non-empty exactly "
                f"for chain_conditioned provenance"
            )
        if self.output_tokens < 0:
            raise ValueError(f"record {self.id!r}: output_tokens must be >= 0")


@dataclass
class QueryState:
    """Accumulated evidence and spend for one query (one bandit arm).

    responses keeps sampling order; spent_samples counts materialized
    responses and can fall short of spent_units * unit_size after backend
    failures.
    """

    query: Query
    responses: list[ResponseRecord] = field(default_factory=list)
    spent_units: int = 0
    spent_samples: int = 0
    spent_tokens: int = 0


# ---------------------------------------------------------------------------
# Canonicalization
# ---------------------------------------------------------------------------

_WHITESPACE = re.compile(r"\s+")
_INTEGER = re.compile(r"[+-]?\d+")


def normalize_answer(
    value: str, domain: AnswerDomain, choices: tuple[str, ...] | None = None
) -> str | None:
    """Map a raw answer string to its canonical form, or None when invalid.

    Canonical forms: uppercase choice labels, decimal integers without
    leading zeros or an explicit plus sign, lowercase whitespace-collapsed
    free text. Idempotent: normalizing a canonical value returns it unchanged.
    """
    if domain is AnswerDomain.MULTIPLE_CHOICE:
        candidate = value.strip().upper()
        if not candidate:
            return None
        if choices is not None and candidate not in {c.strip().upper() for c in choices}:
            return None
        return candidate
    if domain is AnswerDomain.INTEGER:
        candidate = value.strip()
        if not _INTEGER.fullmatch(candidate):
            return None
        return str(int(candidate))
    candidate = _WHITESPACE.sub(" ", value.strip()).lower()
    return candidate or None


# ---------------------------------------------------------------------------
# Answer extraction
# ---------------------------------------------------------------------------

# Placeholder substituted with the alternation of a query's choice labels.
LABEL_SLOT = "<LABELS>"

# Default extraction patterns per domain, scanned with IGNORECASE | MULTILINE.
# Group 1 of each pattern captures the answer candidate. The table is data:
# callers may pass their own table to extract_answer (e.g. loaded from a run
# configuration file).
DEFAULT_PATTERNS: dict[AnswerDomain, tuple[str, ...]] = {
    AnswerDomain.MULTIPLE_CHOICE: (
        r"\\boxed\s*\{\s*\(?(<LABELS>)\)?\s*\}",
        r"answer\s*:\s*\(?(<LABELS>)(?!\w)\)?",
        r"answer\s+is\s+\(?(<LABELS>)(?!\w)\)?",
        r"\b(<LABELS>)\b\s*[.!)]?\s*\Z",
    ),
    AnswerDomain.INTEGER: (
        r"\\boxed\s*\{\s*([+-]?\d+)\s*\}",
        r"answer\s*:\s*\$?\(?([+-]?\d+)\)?",
        r"answer\s+is\s+\$?\(?([+-]?\d+)\)?",
        r"([+-]?\d+)",
    ),
    AnswerDomain.FREE_TEXT: (
        r"\\boxed\s*\{\s*(.+?)\s*\}",
        r"answer\s*:\s*(.+?)[.!?]*\s*$",
        r"answer\s+is\s+(.+?)[.!?]*\s*$",
    ),
}

PatternTable = dict[AnswerDomain, tuple[str, ...]]


def _compiled_patterns(
    domain: AnswerDomain,
    choices: tuple[str, ...] | None,
    patterns: PatternTable | None,
) -> list[re.Pattern]:
    table = patterns if patterns is not None else DEFAULT_PATTERNS
    raw = table.get(domain, ())
    compiled = []
    for pattern in raw:
        if LABEL_SLOT in pattern:
            if not choices:
                continue
            labels = sorted((c.strip() for c in choices), key=len, reverse=True)
            pattern = pattern.replace(LABEL_SLOT, "|".join(re.escape(c) for c in labels))
        compiled.append(re.compile(pattern, re.IGNORECASE | re.MULTILINE))
    return compiled


def extract_answer(
    text: str,
    domain: AnswerDomain,
    choices: tuple[str, ...] | None = None,
    patterns: PatternTable | None = None,
) -> CanonicalAnswer | None:
    """Pull the final answer out of a completion, or None when nothing matches.

    All patterns are scanned over the whole text and the match occurring last
    wins; candidates that fail canonicalization (e.g. a token that is not a
    listed choice label) are skipped in favor of earlier matches. Extraction
    failure is a normal outcome, never an error.
    """
    candidates: list[tuple[int, int, str]] = []
    for index, pattern in enumerate(_compiled_patterns(domain, choices, patterns)):
        for match in pattern.finditer(text):
            candidates.append((match.start(1), index, match.group(1)))
    candidates.sort(key=lambda item: (-item[0], item[1]))
    for _, _, raw in candidates:
        value = normalize_answer(raw, domain, choices)
        if value is not None:
            return CanonicalAnswer(value=value, domain=domain)
    return None


# ---------------------------------------------------------------------------
# Voting
# ---------------------------------------------------------------------------


def answer_counts(responses: list[ResponseRecord]) -> tuple[dict[str, int], int]:
    """Multiplicity map over extracted answers, plus the number counted.

    Responses without an extracted answer carry no answer evidence and are
    excluded from both the map and the count. Keys keep first-occurrence
    (sampling) order.
    """
    counts: dict[str, int] = {}
    for record in responses:
        if record.extracted_answer is not None:
            counts[record.extracted_answer] = counts.get(record.extracted_answer, 0) + 1
    return counts, sum(counts.values())


def majority_vote(responses: list[ResponseRecord]) -> str | None:
    """Most frequent extracted answer, or None when nothing was extractable.

    Ties are broken in favor of the answer sampled first, which keeps the
    result deterministic and replayable from run records.
    """
    counts, _ = answer_counts(responses)
    if not counts:
        return None
    return max(counts, key=counts.get)


def make_response_record(
    query: Query,
    *,
    record_id: str,
    text: str,
    output_tokens: int,
    round_index: int,
    provenance: Provenance,
    chain_member_ids: tuple[str, ...] = (),
    backend_seed: int | None = None,
    fallback: bool = False,
    patterns: PatternTable | None = None,
) -> ResponseRecord:
    """Build a ResponseRecord, running answer extraction on the text."""
    extracted = extract_answer(text, query.answer_domain, query.choices, patterns)
    return ResponseRecord(
        id=record_id,
        query_id=query.id,
        text=text,
        extracted_answer=extracted.value if extracted else None,
        output_tokens=output_tokens,
        round=round_index,
        provenance=provenance,
        chain_member_ids=chain_member_ids,
        backend_seed=backend_seed,
        fallback=fallback,
    )


# ---------------------------------------------------------------------------
# Query set ingestion
# ---------------------------------------------------------------------------

_DOMAIN_VALUES = {d.value for d in AnswerDomain}


def query_from_dict(obj: dict, *, context: str = "query") -> Query:
    """Validate one raw query record and build a Query from it."""
    if not isinstance(obj, dict):
        raise DatasetError(f"{context}: expected an object, got {type(obj).__name__}")
    for key in ("id", "prompt", "answer_domain"):
        if key not in obj:
            raise DatasetError(f"{context}: missing required field {key!r}")
    unknown = set(obj) - {"id", "prompt", "answer_domain", "choices", "gold_answer"}
    if unknown:
        raise DatasetError(f"{context}: unknown fields {sorted(unknown)}")
    if not isinstance(obj["id"], str) or not obj["id"]:
        raise DatasetError(f"{context}: id must be a non-empty string")
    if not isinstance(obj["prompt"], str) or not obj["prompt"]:
        raise DatasetError(f"{context}: prompt must be a non-empty string")
    if obj["answer_domain"] not in _DOMAIN_VALUES:
        raise DatasetError(
            f"{context}: answer_domain {obj['answer_domain']!r} not one of "
            f"{sorted(_DOMAIN_VALUES)}"
        )
    domain = AnswerDomain(obj["answer_domain"])
    choices = obj.get("choices")
    if choices is not None:
        if not isinstance(choices, list) or not all(isinstance(c, str) and c for c in choices):
            raise DatasetError(f"{context}: choices must be a list of non-empty strings")
        if len(set(choices)) != len(choices):
            raise DatasetError(f"{context}: choices contain duplicates")
        choices = tuple(choices)
    gold = obj.get("gold_answer")
    if gold is not None and not isinstance(gold, str):
        raise DatasetError(f"{context}: gold_answer must be a string")
    try:
        return Query(
            id=obj["id"],
            prompt=obj["prompt"],
            answer_domain=domain,
            choices=choices,
            gold_answer=gold,
        )
    except ValueError as exc:
        raise DatasetError(f"{context}: {exc}") from exc


def query_to_dict(query: Query) -> dict:
    obj: dict = {
        "id": query.id,
        "prompt": query.prompt,
        "answer_domain": query.answer_domain.value,
    }
    if query.choices is not None:
        obj["choices"] = list(query.choices)
    if query.gold_answer is not None:
        obj["gold_answer"] = query.gold_answer
    return obj


def load_queries(path: str | Path) -> list[Query]:
    """Load a query set from a JSONL file (one query object per line).

    Schema per line: {"id", "prompt", "answer_domain", "choices"?, "gold_answer"?};
    see the README for the full description. Raises DatasetError with the
    offending line number on any violation, including duplicate ids.
    """
    path = Path(path)
    queries: list[Query] = []
    seen: set[str] = set()
    with path.open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                obj = json.loads(stripped)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            query = query_from_dict(obj, context=f"{path}:{lineno}")
            if query.id in seen:
                raise DatasetError(f"{path}:{lineno}: duplicate query id {query.id!r}")
            seen.add(query.id)
            queries.append(query)
    if not queries:
        raise DatasetError(f"{path}: no queries found")
    return queries
