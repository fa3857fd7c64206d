"""Layout-adherence metrics and the control-adherence judge harness.

The judge protocol ships four fixed system prompts (one per task kind,
stored under c2i/prompts/ and pinned by checksum tests), an abstract
client so backends stay pluggable, and a parser that extracts the 1-5
score each prompt's output format demands.
"""

from __future__ import annotations

import base64
import enum
import json
import os
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .canvas_spec import TaskKind
from .errors import ArityError, InvariantError, ParseError, TransportError

JUDGE_URL_ENV = "C2I_JUDGE_URL"
JUDGE_KEY_ENV = "C2I_JUDGE_KEY"


# --- geometry ----------------------------------------------------------------

def _check_rect(r):
    x0, y0, x1, y1 = r
    if not (x0 < x1 and y0 < y1):
        raise InvariantError("rect must satisfy x0<x1 and y0<y1")
    return r


def box_iou(a, b) -> float:
    """Intersection over union of two (x0, y0, x1, y1) rects."""
    _check_rect(a)
    _check_rect(b)
    iw = min(a[2], b[2]) - max(a[0], b[0])
    ih = min(a[3], b[3]) - max(a[1], b[1])
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    area_a = (a[2] - a[0]) * (a[3] - a[1])
    area_b = (b[2] - b[0]) * (b[3] - b[1])
    return inter / (area_a + area_b - inter)


@dataclass(frozen=True)
class BoxScore:
    label: str
    iou: float
    matched_index: int | None  # index into the detected list


def layout_adherence(spec_boxes, detected) -> tuple:
    """Greedy same-label IoU matching; unmatched spec boxes score zero.

    Returns (mean_iou_over_spec_boxes, per-box scores). Empty spec input
    yields 0.0 by convention.
    """
    spec_boxes = list(spec_boxes)
    detected = list(detected)
    if not spec_boxes:
        return 0.0, []
    candidates = []
    for si, (s_label, s_rect) in enumerate(spec_boxes):
        for di, (d_label, d_rect) in enumerate(detected):
            if s_label != d_label:
                continue
            iou = box_iou(s_rect, d_rect)
            if iou > 0.0:
                candidates.append((iou, si, di))
    candidates.sort(key=lambda c: (-c[0], c[1], c[2]))
    spec_taken = [False] * len(spec_boxes)
    det_taken = [False] * len(detected)
    scores = [BoxScore(label, 0.0, None) for label, _ in spec_boxes]
    for iou, si, di in candidates:
        if spec_taken[si] or det_taken[di]:
            continue
        spec_taken[si] = True
        det_taken[di] = True
        scores[si] = BoxScore(spec_boxes[si][0], iou, di)
    mean_iou = sum(s.iou for s in scores) / len(scores)
    return mean_iou, scores


# --- judge protocol ----------------------------------------------------------

_PROMPT_FILES = {
    TaskKind.SPATIAL: "spatial.txt",
    TaskKind.POSE: "pose.txt",
    TaskKind.BOX: "box.txt",
    TaskKind.MULTI: "multi.txt",
}

SCORE_LABELS = {
    TaskKind.SPATIAL: "Composition Fidelity Score",
    TaskKind.POSE: "Composition Fidelity Score",
    TaskKind.BOX: "Spatial Alignment Score",
    TaskKind.MULTI: "Joint Control Fidelity Score",
}

# images each task's protocol expects (pose compares prior + canvas + output)
IMAGE_COUNTS = {
    TaskKind.SPATIAL: 2,
    TaskKind.POSE: 3,
    TaskKind.BOX: 2,
    TaskKind.MULTI: 2,
}


def controlqa_prompt_for(task: TaskKind) -> str:
    """The full system prompt for a task; byte-stable across calls."""
    ref = resources.files("c2i.prompts") / _PROMPT_FILES[task]
    return ref.read_text(encoding="utf-8")


@dataclass(frozen=True)
class ControlQaVerdict:
    score: int
    reasoning: str
    task: TaskKind
    raw: str

    def __post_init__(self):
        if self.score not in (1, 2, 3, 4, 5):
            raise InvariantError("score must be an integer in 1..5")

    def to_doc(self) -> dict:
        return {
            "score": self.score,
            "reasoning": self.reasoning,
            "task": self.task.value,
            "raw": self.raw,
        }


class JudgeClient:
    """Abstract multimodal judge transport; implementations are stateless."""

    def send(self, system_prompt: str, images: list, user_text: str) -> str:
        raise NotImplementedError


class ReplayJudgeClient(JudgeClient):
    """Replays canned responses in order; the test double for the harness."""

    def __init__(self, responses):
        self._responses = list(responses)
        self._cursor = 0
        self.calls = []

    def send(self, system_prompt, images, user_text):
        self.calls.append((system_prompt, tuple(images), user_text))
        if self._cursor >= len(self._responses):
            raise TransportError("replay exhausted")
        response = self._responses[self._cursor]
        self._cursor += 1
        return response


class HttpJudgeClient(JudgeClient):
    """POSTs JSON {system, images (base64), text} and reads {response}.

    Endpoint and credential come from C2I_JUDGE_URL / C2I_JUDGE_KEY unless
    given explicitly. Retries transient failures with exponential backoff.
    """

    def __init__(self, url: str | None = None, api_key: str | None = None,
                 timeout: float = 60.0, retries: int = 3, backoff: float = 1.0):
        self.url = url or os.environ.get(JUDGE_URL_ENV)
        self.api_key = api_key or os.environ.get(JUDGE_KEY_ENV)
        if not self.url:
            raise TransportError(f"no judge endpoint; set {JUDGE_URL_ENV}")
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff

    def send(self, system_prompt, images, user_text):
        import httpx

        payload = {
            "system": system_prompt,
            "images": [base64.b64encode(Path(p).read_bytes()).decode("ascii")
                       for p in images],
            "text": user_text,
        }
        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last_error = None
        for attempt in range(self.retries):
            try:
                response = httpx.post(self.url, json=payload, headers=headers,
                                      timeout=self.timeout)
                if response.status_code >= 500:
                    raise TransportError(f"judge returned {response.status_code}")
                response.raise_for_status()
                return response.json()["response"]
            except (httpx.HTTPError, TransportError, KeyError, ValueError) as exc:
                last_error = exc
                if attempt + 1 < self.retries:
                    time.sleep(self.backoff * 2**attempt)
        raise TransportError(f"judge unreachable after {self.retries} attempts: {last_error}")


def parse_verdict(task: TaskKind, raw: str) -> ControlQaVerdict:
    """Extract the task's score line and the Reasoning remainder."""
    label = SCORE_LABELS[task]
    pattern = re.compile(
        r"^\s*(?:\*\*)?" + re.escape(label) + r"(?:\*\*)?\s*:\s*(\d+)\s*$"
    )
    score = None
    for line in raw.splitlines():
        m = pattern.match(line)
        if m:
            score = int(m.group(1))
            break
    if score is None:
        raise ParseError(f"no '{label}: <1-5>' line in judge response", raw=raw)
    if score not in (1, 2, 3, 4, 5):
        raise ParseError(f"score {score} outside 1..5", raw=raw)
    reasoning = ""
    m = re.search(r"^\s*(?:\*\*)?Reasoning(?:\*\*)?\s*:\s*(.*)$", raw,
                  flags=re.MULTILINE | re.DOTALL)
    if m:
        reasoning = m.group(1).strip()
    return ControlQaVerdict(score=score, reasoning=reasoning, task=task, raw=raw)


def run_controlqa(task: TaskKind, images, client: JudgeClient,
                  user_text: str = "") -> ControlQaVerdict:
    """One judge call: system prompt + ordered images, parsed verdict out."""
    images = list(images)
    expected = IMAGE_COUNTS[task]
    if len(images) != expected:
        raise ArityError(
            f"{task.value} protocol wants {expected} images, got {len(images)}"
        )
    raw = client.send(controlqa_prompt_for(task), images, user_text)
    return parse_verdict(task, raw)


def run_controlqa_batch(requests, client: JudgeClient, max_workers: int = 4) -> list:
    """Judge many (task, images) requests; results in input order."""
    requests = list(requests)

    def one(req):
        task, images = req
        return run_controlqa(task, images, client)

    if max_workers <= 1:
        return [one(r) for r in requests]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(one, requests))


def mean_score(verdicts) -> float:
    verdicts = list(verdicts)
    if not verdicts:
        raise InvariantError("no verdicts to average")
    return sum(v.score for v in verdicts) / len(verdicts)


def write_verdicts_jsonl(verdicts, path) -> int:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for v in verdicts:
            fh.write(json.dumps(v.to_doc(), separators=(",", ":"), ensure_ascii=True))
            fh.write("\n")
    return len(verdicts)
