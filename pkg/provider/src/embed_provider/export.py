"""Batch export of answer-bank embeddings to the engine's vector format."""

from __future__ import annotations

import json
from pathlib import Path

from .service import BATCH_CHUNK


def export_bank_embeddings(bank_path: str | Path, out_path: str | Path, encoder) -> int:
    """Embed every bank paragraph and write {"id", "vector"} JSON lines.

    Output order follows the bank file. On any failure the partial output
    file is removed. Returns the number of records written; re-running on
    an unchanged bank and model produces a byte-identical file.
    """
    records = []
    with open(bank_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                records.append((rec["id"], rec["text"]))
            except (json.JSONDecodeError, KeyError) as exc:
                raise ValueError(f"{bank_path}: malformed bank record on line {lineno}: {exc}") from exc

    out_path = Path(out_path)
    try:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            for start in range(0, len(records), BATCH_CHUNK):
                chunk = records[start : start + BATCH_CHUNK]
                vectors = encoder.encode([text for _, text in chunk])
                for (pid, _), vector in zip(chunk, vectors):
                    fh.write(
                        json.dumps({"id": pid, "vector": [float(x) for x in vector]}) + "\n"
                    )
    except Exception:
        out_path.unlink(missing_ok=True)
        raise
    return len(records)
