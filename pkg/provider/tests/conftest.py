from __future__ import annotations

import json
from pathlib import Path

import pytest


def write_bank(path: Path, n: int, lang: str = "en") -> list[dict]:
    """Bank file in the engine's JSON-lines format, n paragraphs."""
    records = []
    for i in range(n):
        records.append(
            {
                "id": f"{lang}-L1-P{i:02d}",
                "lang": lang,
                "lesson": 1,
                "ordinal": i,
                "text": f"Paragraph {i} explains concept number {i}. It has two sentences.",
                "figure_refs": [],
            }
        )
    path.write_text(
        "\n".join(json.dumps(r, ensure_ascii=False) for r in records) + "\n", encoding="utf-8"
    )
    return records


@pytest.fixture()
def bank_file(tmp_path) -> Path:
    path = tmp_path / "bank.jsonl"
    write_bank(path, 39)
    return path
