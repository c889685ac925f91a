#!/usr/bin/env python3
"""Run the shipped language profiles over the routing fixture and record the
result next to it. The recorded accuracy and confidence floor back the
frozen thresholds in the detection tests; re-run after any profile change.
"""

import json
from pathlib import Path

from kwame.language import STOPWORD_BONUS, detect_language

FIXTURE = Path(__file__).resolve().parent.parent / "tests" / "data" / "language_questions.jsonl"
OUT = FIXTURE.parent / "language_calibration.json"


def main() -> None:
    rows = [json.loads(line) for line in FIXTURE.read_text(encoding="utf-8").splitlines() if line.strip()]
    results = []
    correct = 0
    for row in rows:
        lang, confidence = detect_language(row["question"])
        hit = lang == row["lang"]
        correct += hit
        results.append(
            {
                "question": row["question"],
                "expected": row["lang"],
                "detected": lang,
                "confidence": round(confidence, 4),
                "correct": hit,
            }
        )
    accuracy = 100.0 * correct / len(rows)
    record = {
        "fixture": FIXTURE.name,
        "n_questions": len(rows),
        "accuracy_pct": round(accuracy, 1),
        "min_confidence_correct": round(
            min(r["confidence"] for r in results if r["correct"]), 4
        ),
        "stopword_bonus": STOPWORD_BONUS,
        "results": results,
    }
    OUT.write_text(json.dumps(record, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    print(f"accuracy: {accuracy:.1f}% over {len(rows)} questions")
    for r in results:
        if not r["correct"]:
            print(f"  MISS [{r['expected']} -> {r['detected']}] {r['question']}")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
