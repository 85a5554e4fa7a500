"""Machine-readable verification reports with optional Markdown rendering.

Reports are deterministic for a fixed input and seed: keys are sorted and
wall-clock timing is only included on request (it is excluded from the
byte-identity contract).
"""

from __future__ import annotations

import hashlib
import json

SCHEMA = "extricat-report/1"
TOOL_VERSION = "0.1.0"


def input_digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def make_report(command: str, digest: str, seed: int, verdicts: dict,
                error: str | None = None, timing: float | None = None) -> dict:
    return {
        "schema": SCHEMA,
        "tool_version": TOOL_VERSION,
        "command": command,
        "input_digest": digest,
        "seed": seed,
        "passed": error is None and all(
            v.get("passed", False) if isinstance(v, dict) else bool(v)
            for v in verdicts.values()
        ),
        "verdicts": verdicts,
        "error": error,
        "timing_seconds": timing,
    }


def to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def render_markdown(report: dict) -> str:
    lines = [f"# Verification report ({report['command']})", ""]
    lines.append(f"- schema: `{report['schema']}`  tool: `{report['tool_version']}`")
    lines.append(f"- input digest: `{report['input_digest']}`")
    lines.append(f"- seed: {report['seed']}")
    lines.append(f"- overall: {'PASS' if report['passed'] else 'FAIL'}")
    if report.get("error"):
        lines.append(f"- error: {report['error']}")
    lines.append("")
    lines.append("| check | verdict | detail |")
    lines.append("|---|---|---|")
    for name in sorted(report["verdicts"]):
        v = report["verdicts"][name]
        if isinstance(v, dict) and "passed" in v:
            ok = v["passed"]
            detail = v.get("detail") or ""
            if "axioms" in v:
                detail = "; ".join(
                    f"{k}:{'ok' if a['passed'] else 'FAIL'}" for k, a in sorted(v["axioms"].items())
                )
            if "sections" in v:
                detail = "; ".join(
                    f"{k}:{'ok' if a['passed'] else 'FAIL'}" for k, a in sorted(v["sections"].items())
                )
        else:
            ok = bool(v)
            detail = ""
        lines.append(f"| {name} | {'pass' if ok else 'FAIL'} | {detail} |")
    lines.append("")
    return "\n".join(lines)
