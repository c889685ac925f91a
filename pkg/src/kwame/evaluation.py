"""Offline evaluation: top-k accuracy and seconds-per-question grids.

One evaluation run produces a report with a cell per (backend x language x
question type): hit counts and accuracies for each requested k, plus the
mean wall-clock duration of a full ask call. The text rendering mirrors
the two result-table layouts the service is judged against; json and csv
renderings are lossless.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import platform
from dataclasses import dataclass, field
from statistics import mean
from time import perf_counter

from .corpus import AnswerBank, QASet
from .engine import AskRequest, QAEngine

SCHEMA_VERSION = 1

_LANG_NAMES = {"en": "English", "fr": "French"}


class EvaluationError(ValueError):
    pass


@dataclass
class EvalConfig:
    backends: list[str]
    languages: list[str]
    qtypes: list[str] = field(default_factory=lambda: ["quiz", "student"])
    k_values: list[int] = field(default_factory=lambda: [1, 3, 5])
    timing_repeats: int = 3
    warmup_queries: int = 1

    def __post_init__(self) -> None:
        if not self.k_values:
            raise EvaluationError("k_values must not be empty")
        if sorted(set(self.k_values)) != self.k_values:
            raise EvaluationError(f"k_values must be sorted ascending without duplicates: {self.k_values}")
        if any(k < 1 for k in self.k_values):
            raise EvaluationError(f"k_values must be positive: {self.k_values}")
        if self.timing_repeats < 1:
            raise EvaluationError("timing_repeats must be >= 1")
        if self.warmup_queries < 0:
            raise EvaluationError("warmup_queries must be >= 0")


@dataclass
class EvalCell:
    backend: str
    lang: str
    qtype: str
    n_questions: int
    top_k_hits: dict[int, int]
    top_k_accuracy: dict[int, float | None]
    mean_seconds_per_question: float | None
    timing_spread: float | None = None


@dataclass
class EvalReport:
    cells: list[EvalCell]
    environment: str
    bank_digest: str
    config: EvalConfig

    def cell(self, backend: str, lang: str, qtype: str) -> EvalCell:
        for c in self.cells:
            if (c.backend, c.lang, c.qtype) == (backend, lang, qtype):
                return c
        raise KeyError(f"no cell for ({backend}, {lang}, {qtype})")


def random_baseline(n_answers: int) -> float:
    """Expected top-1 accuracy (percent) of uniform random answer picking."""
    if n_answers < 1:
        raise EvaluationError(f"n_answers must be >= 1, got {n_answers}")
    return 100.0 / n_answers


def format_pct(value: float) -> str:
    return f"{value:.1f}%"


def bank_content_digest(bank: AnswerBank) -> str:
    """Stable digest over the bank's records (independent of file layout)."""
    h = hashlib.sha256()
    for p in bank.paragraphs:
        h.update(json.dumps(p.to_record(), ensure_ascii=False, sort_keys=True).encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()


def _environment_descriptor(engine: QAEngine, config: EvalConfig) -> str:
    lines = [
        f"machine: {platform.platform()} ({platform.processor() or platform.machine()})",
        f"python: {platform.python_version()}",
        "timing: wall-clock of the full ask call, "
        f"{config.timing_repeats} repeats per question after {config.warmup_queries} warmup call(s), sequential",
    ]
    for lang in config.languages:
        n = len(engine.bank.subset(lang))
        if n:
            lines.append(f"random top-1 baseline {lang}: {format_pct(random_baseline(n))} ({n} answers)")
    return "\n".join(lines)


def evaluate(qaset: QASet, engine: QAEngine, config: EvalConfig) -> EvalReport:
    """Run every requested (backend x language x question type) cell.

    A question is a top-k hit when any of its gold ids appears in the
    first k ranked answers. Questions are asked with k = max(k_values),
    no threshold and no tag filter; hits for smaller k are read off the
    same ranking, since top-k lists are prefixes of top-(k+1).
    """
    for backend in config.backends:
        for lang in config.languages:
            engine.entry(lang, backend)

    k_max = max(config.k_values)
    cells = []
    for backend in config.backends:
        for lang in config.languages:
            for qtype in config.qtypes:
                pairs = qaset.filter(lang=lang, qtype=qtype)
                hits = {k: 0 for k in config.k_values}
                question_means: list[float] = []
                worst_spread: float | None = None
                for pair in pairs:
                    req = AskRequest(
                        question=pair.question,
                        top_k=k_max,
                        lang_override=lang,
                        backend=backend,
                    )
                    repeats: list[float] = []
                    ranked: list[str] | None = None
                    for call in range(config.warmup_queries + config.timing_repeats):
                        start = perf_counter()
                        response = engine.ask(req)
                        elapsed = perf_counter() - start
                        if ranked is None:
                            ranked = [h.id for h in response.answers]
                        if call >= config.warmup_queries:
                            repeats.append(elapsed)
                    for k in config.k_values:
                        if any(g in ranked[:k] for g in pair.gold_ids):
                            hits[k] += 1
                    question_means.append(mean(repeats))
                    if len(repeats) > 1 and min(repeats) > 0:
                        spread = max(repeats) / min(repeats)
                        worst_spread = spread if worst_spread is None else max(worst_spread, spread)
                n = len(pairs)
                cells.append(
                    EvalCell(
                        backend=backend,
                        lang=lang,
                        qtype=qtype,
                        n_questions=n,
                        top_k_hits=dict(hits),
                        top_k_accuracy={
                            k: (100.0 * hits[k] / n if n else None) for k in config.k_values
                        },
                        mean_seconds_per_question=(float(mean(question_means)) if n else None),
                        timing_spread=worst_spread,
                    )
                )
    return EvalReport(
        cells=cells,
        environment=_environment_descriptor(engine, config),
        bank_digest=bank_content_digest(engine.bank),
        config=config,
    )


# -- rendering ---------------------------------------------------------------


def _lang_name(lang: str) -> str:
    return _LANG_NAMES.get(lang, lang)


def _fmt_acc(value: float | None) -> str:
    return format_pct(value) if value is not None else "n/a"


def _fmt_num(value: float | None) -> str:
    return f"{value:.1f}" if value is not None else "n/a"


def _fmt_secs(value: float | None) -> str:
    return f"{value:.4f}" if value is not None else "n/a"


def _render_text(report: EvalReport) -> str:
    cfg = report.config
    by_key = {(c.backend, c.lang, c.qtype): c for c in report.cells}
    backend_width = max(len("Backend"), *(len(b) for b in cfg.backends)) + 2

    # Table A: top-1 accuracy per (language x question type) + per-language duration.
    acc_captions = [f"{_lang_name(l)} {q.capitalize()}" for l in cfg.languages for q in cfg.qtypes]
    dur_captions = [f"Duration {_lang_name(l)}" for l in cfg.languages]
    captions = acc_captions + dur_captions
    widths = [max(len(cap), 8) + 2 for cap in captions]

    lines = ["Top-1 Accuracy and Duration (secs per question)"]
    header = "Backend".ljust(backend_width) + "".join(
        cap.rjust(w) for cap, w in zip(captions, widths)
    )
    lines.append(header)
    lines.append("-" * len(header))
    for backend in cfg.backends:
        values = []
        for lang in cfg.languages:
            for qtype in cfg.qtypes:
                cell = by_key[(backend, lang, qtype)]
                values.append(_fmt_acc(cell.top_k_accuracy.get(1)))
        for lang in cfg.languages:
            durations = [
                by_key[(backend, lang, qtype)] for qtype in cfg.qtypes
            ]
            weighted = [
                (c.mean_seconds_per_question, c.n_questions)
                for c in durations
                if c.mean_seconds_per_question is not None and c.n_questions
            ]
            total = sum(n for _, n in weighted)
            value = sum(s * n for s, n in weighted) / total if total else None
            values.append(_fmt_secs(value))
        lines.append(
            backend.ljust(backend_width)
            + "".join(v.rjust(w) for v, w in zip(values, widths))
        )

    # Table B: top-k accuracy grid per (language x question type).
    lines.append("")
    lines.append(f"Top {', '.join(str(k) for k in cfg.k_values)} Accuracy (%)")
    group_captions = acc_captions
    sub_width = 8
    group_width = max(len(cfg.k_values) * sub_width, max(len(g) for g in group_captions) + 2)
    header1 = " " * backend_width + "".join(g.rjust(group_width) for g in group_captions)
    sub = "".join(f"Top {k}".rjust(sub_width) for k in cfg.k_values).rjust(group_width)
    header2 = "Backend".ljust(backend_width) + sub * len(group_captions)
    lines.append(header1)
    lines.append(header2)
    lines.append("-" * len(header1))
    for backend in cfg.backends:
        row = backend.ljust(backend_width)
        for lang in cfg.languages:
            for qtype in cfg.qtypes:
                cell = by_key[(backend, lang, qtype)]
                group = "".join(
                    _fmt_num(cell.top_k_accuracy.get(k)).rjust(sub_width) for k in cfg.k_values
                ).rjust(group_width)
                row += group
        lines.append(row)

    lines.append("")
    lines.append(f"bank digest: {report.bank_digest}")
    lines.extend(report.environment.splitlines())
    return "\n".join(lines) + "\n"


def report_to_dict(report: EvalReport) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "environment": report.environment,
        "bank_digest": report.bank_digest,
        "config": {
            "backends": report.config.backends,
            "languages": report.config.languages,
            "qtypes": report.config.qtypes,
            "k_values": report.config.k_values,
            "timing_repeats": report.config.timing_repeats,
            "warmup_queries": report.config.warmup_queries,
        },
        "cells": [
            {
                "backend": c.backend,
                "lang": c.lang,
                "qtype": c.qtype,
                "n_questions": c.n_questions,
                "top_k_hits": {str(k): v for k, v in c.top_k_hits.items()},
                "top_k_accuracy": {str(k): v for k, v in c.top_k_accuracy.items()},
                "mean_seconds_per_question": c.mean_seconds_per_question,
                "timing_spread": c.timing_spread,
            }
            for c in report.cells
        ],
    }


def report_from_dict(data: dict) -> EvalReport:
    if data.get("schema_version") != SCHEMA_VERSION:
        raise EvaluationError(f"unsupported report schema {data.get('schema_version')!r}")
    cfg = EvalConfig(
        backends=list(data["config"]["backends"]),
        languages=list(data["config"]["languages"]),
        qtypes=list(data["config"]["qtypes"]),
        k_values=list(data["config"]["k_values"]),
        timing_repeats=data["config"]["timing_repeats"],
        warmup_queries=data["config"]["warmup_queries"],
    )
    cells = [
        EvalCell(
            backend=c["backend"],
            lang=c["lang"],
            qtype=c["qtype"],
            n_questions=c["n_questions"],
            top_k_hits={int(k): v for k, v in c["top_k_hits"].items()},
            top_k_accuracy={int(k): v for k, v in c["top_k_accuracy"].items()},
            mean_seconds_per_question=c["mean_seconds_per_question"],
            timing_spread=c.get("timing_spread"),
        )
        for c in data["cells"]
    ]
    return EvalReport(
        cells=cells, environment=data["environment"], bank_digest=data["bank_digest"], config=cfg
    )


def _render_csv(report: EvalReport) -> str:
    ks = report.config.k_values
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    header = (
        ["backend", "lang", "qtype", "n_questions"]
        + [f"hits_{k}" for k in ks]
        + [f"accuracy_{k}" for k in ks]
        + ["mean_seconds_per_question", "timing_spread", "schema_version", "bank_digest", "environment", "config_json"]
    )
    writer.writerow(header)
    config_json = json.dumps(report_to_dict(report)["config"], sort_keys=True)
    for c in report.cells:
        writer.writerow(
            [c.backend, c.lang, c.qtype, c.n_questions]
            + [c.top_k_hits[k] for k in ks]
            + [("" if c.top_k_accuracy[k] is None else repr(c.top_k_accuracy[k])) for k in ks]
            + [
                "" if c.mean_seconds_per_question is None else repr(c.mean_seconds_per_question),
                "" if c.timing_spread is None else repr(c.timing_spread),
                SCHEMA_VERSION,
                report.bank_digest,
                report.environment,
                config_json,
            ]
        )
    return out.getvalue()


def report_from_csv(text: str) -> EvalReport:
    rows = list(csv.reader(io.StringIO(text)))
    header, data_rows = rows[0], rows[1:]
    if not data_rows:
        raise EvaluationError("csv report has no cells")
    ks = [int(name.split("_", 1)[1]) for name in header if name.startswith("hits_")]
    idx = {name: i for i, name in enumerate(header)}
    cells = []
    for row in data_rows:
        cells.append(
            EvalCell(
                backend=row[idx["backend"]],
                lang=row[idx["lang"]],
                qtype=row[idx["qtype"]],
                n_questions=int(row[idx["n_questions"]]),
                top_k_hits={k: int(row[idx[f"hits_{k}"]]) for k in ks},
                top_k_accuracy={
                    k: (float(row[idx[f"accuracy_{k}"]]) if row[idx[f"accuracy_{k}"]] else None)
                    for k in ks
                },
                mean_seconds_per_question=(
                    float(row[idx["mean_seconds_per_question"]])
                    if row[idx["mean_seconds_per_question"]]
                    else None
                ),
                timing_spread=(
                    float(row[idx["timing_spread"]]) if row[idx["timing_spread"]] else None
                ),
            )
        )
    first = data_rows[0]
    cfg = json.loads(first[idx["config_json"]])
    return EvalReport(
        cells=cells,
        environment=first[idx["environment"]],
        bank_digest=first[idx["bank_digest"]],
        config=EvalConfig(
            backends=cfg["backends"],
            languages=cfg["languages"],
            qtypes=cfg["qtypes"],
            k_values=cfg["k_values"],
            timing_repeats=cfg["timing_repeats"],
            warmup_queries=cfg["warmup_queries"],
        ),
    )


def render_report(report: EvalReport, fmt: str = "text") -> str:
    """Render as 'text' (two result tables), 'json', or 'csv'."""
    if fmt == "text":
        return _render_text(report)
    if fmt == "json":
        return json.dumps(report_to_dict(report), indent=2, ensure_ascii=False) + "\n"
    if fmt == "csv":
        return _render_csv(report)
    raise EvaluationError(f"unknown report format {fmt!r}")
