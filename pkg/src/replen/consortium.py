"""Ensemble decision synthesis.

Each agent decision can be fanned out to several reasoner backends; the
synthesizer reduces their proposals to one value plus a dispersion score,
and flags the decision for human attention when the backends disagree too
much. The bundled reasoners are deterministic stand-ins — the baseline one
echoes the calling module's own computation, the perturbed one nudges numeric
answers by a seeded epsilon — and a remote HTTP adapter lets an actual model
server join the pool.
"""

from __future__ import annotations

import hashlib
import json
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Protocol

from .domain import PolicyParams
from .jsonutil import canonical_json


class TaskKind(str, Enum):
    ORDER_QUANTITY = "order_quantity"
    SUPPLIER_CHOICE = "supplier_choice"
    ALLOCATION_WEIGHTS = "allocation_weights"
    ALERT_ACTION_TEXT = "alert_action_text"


NUMERIC_KINDS = {TaskKind.ORDER_QUANTITY}
VECTOR_KINDS = {TaskKind.ALLOCATION_WEIGHTS}
CATEGORICAL_KINDS = {TaskKind.SUPPLIER_CHOICE}


@dataclass(frozen=True)
class ReasonerTask:
    kind: TaskKind
    context: dict
    baseline_hint: Any

    def fingerprint(self) -> str:
        return canonical_json({"kind": self.kind.value, "context": self.context})


@dataclass
class Proposal:
    reasoner_id: str
    value: Any
    rationale: str = ""
    score: float | None = None  # proposer-reported strength, used in tie-breaks

    def summary(self) -> dict:
        return {
            "reasoner_id": self.reasoner_id,
            "value": self.value,
            "rationale": self.rationale,
            "score": self.score,
        }


@dataclass
class ReasoningTrace:
    kind: TaskKind
    proposals: list[dict]
    value: Any
    dispersion: float
    synthesis_note: str
    flagged: bool
    failures: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "proposals": self.proposals,
            "value": self.value,
            "dispersion": self.dispersion,
            "synthesis_note": self.synthesis_note,
            "flagged": self.flagged,
            "failures": self.failures,
        }


class Reasoner(Protocol):
    id: str

    def propose(self, task: ReasonerTask) -> Proposal: ...


class BaselineReasoner:
    """Echoes the deterministic module computation handed in as baseline_hint."""

    def __init__(self, reasoner_id: str = "baseline"):
        self.id = reasoner_id

    def propose(self, task: ReasonerTask) -> Proposal:
        return Proposal(
            reasoner_id=self.id,
            value=task.baseline_hint,
            rationale="deterministic policy computation",
            score=task.context.get("baseline_score"),
        )


class PerturbedReasoner:
    """Baseline nudged by a seeded epsilon — reproducible non-trivial dispersion.

    epsilon is derived from (reasoner id, task fingerprint), so the same
    reasoner gives the same answer to the same task in any run.
    """

    def __init__(self, reasoner_id: str, max_epsilon: float = 0.1):
        self.id = reasoner_id
        self.max_epsilon = max_epsilon

    def _epsilon(self, task: ReasonerTask, salt: str = "") -> float:
        h = hashlib.sha256(f"{self.id}:{salt}:{task.fingerprint()}".encode()).digest()
        unit = int.from_bytes(h[:8], "big") / 2**64  # [0, 1)
        return (2.0 * unit - 1.0) * self.max_epsilon

    def propose(self, task: ReasonerTask) -> Proposal:
        hint = task.baseline_hint
        if task.kind in NUMERIC_KINDS and isinstance(hint, (int, float)):
            eps = self._epsilon(task)
            value: Any = type(hint)(round(hint * (1.0 + eps))) if isinstance(hint, int) else hint * (1.0 + eps)
            note = f"baseline scaled by {1.0 + eps:.4f}"
        elif task.kind in VECTOR_KINDS and isinstance(hint, (list, tuple)):
            scaled = [v * (1.0 + self._epsilon(task, salt=str(i))) for i, v in enumerate(hint)]
            total = sum(scaled) or 1.0
            value = [v / total for v in scaled]
            note = "componentwise perturbation, renormalized"
        else:
            value = hint
            note = "non-numeric task: defers to baseline"
        return Proposal(reasoner_id=self.id, value=value, rationale=note,
                        score=task.context.get("baseline_score"))


class RemoteReasoner:
    """POSTs the task to an external model server; timeouts become failures."""

    def __init__(self, reasoner_id: str, url: str, timeout_s: float = 5.0):
        self.id = reasoner_id
        self.url = url.rstrip("/")
        self.timeout_s = timeout_s

    def propose(self, task: ReasonerTask) -> Proposal:
        body = json.dumps({
            "kind": task.kind.value,
            "context": task.context,
            "baseline_hint": task.baseline_hint,
        }).encode("utf-8")
        req = urllib.request.Request(
            f"{self.url}/propose", data=body, headers={"Content-Type": "application/json"}
        )
        with urllib.request.urlopen(req, timeout=self.timeout_s) as resp:
            payload = json.loads(resp.read().decode("utf-8"))
        return Proposal(
            reasoner_id=self.id,
            value=payload["value"],
            rationale=payload.get("rationale", ""),
            score=payload.get("score"),
        )


class AllReasonersFailed(RuntimeError):
    pass


def fan_out(task: ReasonerTask, reasoners: list[Reasoner]) -> tuple[list[Proposal], list[str]]:
    """Invoke every reasoner independently; failures become notes, not errors,
    unless nobody answers at all."""
    if not reasoners:
        raise ValueError("at least one reasoner is required")
    proposals: list[Proposal] = []
    failures: list[str] = []
    for r in reasoners:
        try:
            proposals.append(r.propose(task))
        except (urllib.error.URLError, OSError, ValueError, KeyError, TimeoutError) as exc:
            failures.append(f"{r.id}: {exc.__class__.__name__}: {exc}")
    if not proposals:
        raise AllReasonersFailed("; ".join(failures))
    return proposals, failures


def lower_median(values: list) -> Any:
    """Median, taking the lower of the two middles for even counts — keeps
    integer-valued inputs integer."""
    ordered = sorted(values)
    return ordered[(len(ordered) - 1) // 2]


def synthesize(
    proposals: list[Proposal],
    kind: TaskKind,
    policy: PolicyParams,
    baseline_hint: Any = None,
    failures: list[str] | None = None,
) -> tuple[Any, ReasoningTrace]:
    """Reduce proposals to one value, a dispersion score, and a trace."""
    if not proposals:
        raise ValueError("no proposals to synthesize")
    values = [p.value for p in proposals]

    if kind in NUMERIC_KINDS:
        value = lower_median(values)
        spread = max(values) - min(values)
        dispersion = spread / max(abs(value), 1)
        note = f"median of {len(values)} proposals"
    elif kind in VECTOR_KINDS:
        width = len(values[0])
        comps = [lower_median([v[i] for v in values]) for i in range(width)]
        dispersion = 0.0
        for i in range(width):
            col = [v[i] for v in values]
            dispersion = max(dispersion, (max(col) - min(col)) / max(abs(comps[i]), 1))
        value = comps
        note = f"componentwise median of {len(values)} weight vectors"
    elif kind in CATEGORICAL_KINDS:
        counts: dict[Any, int] = {}
        scores: dict[Any, float] = {}
        for p in proposals:
            counts[p.value] = counts.get(p.value, 0) + 1
            scores[p.value] = scores.get(p.value, 0.0) + (p.score or 0.0)
        top = max(counts.values())
        tied = [v for v, c in counts.items() if c == top]
        # plurality; ties by summed proposer score, then ascending id
        tied.sort(key=lambda v: (-scores[v], str(v)))
        value = tied[0]
        dispersion = 1.0 - top / len(proposals)
        note = f"plurality {top}/{len(proposals)}"
    else:  # text tasks keep the deterministic template
        value = baseline_hint if baseline_hint is not None else values[0]
        dispersion = 0.0
        note = "text synthesis uses the baseline template"

    flagged = dispersion > policy.dispersion_flag_threshold
    trace = ReasoningTrace(
        kind=kind,
        proposals=[p.summary() for p in proposals],
        value=value,
        dispersion=dispersion,
        synthesis_note=note,
        flagged=flagged,
        failures=list(failures or []),
    )
    return value, trace


def decide(
    task: ReasonerTask, reasoners: list[Reasoner], policy: PolicyParams
) -> tuple[Any, ReasoningTrace]:
    """fan_out + synthesize in one call."""
    proposals, failures = fan_out(task, reasoners)
    return synthesize(proposals, task.kind, policy,
                      baseline_hint=task.baseline_hint, failures=failures)
