"""Analysis reports rendered as a key=value text block and as JSON.

Every value is tagged ``exact`` (integers, fractions, booleans, strings) or
``approx`` (floats).  Timing is never part of a report, so reports are
byte-stable across runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

APPROX_DIGITS = 12


def tag(value) -> tuple[str, str]:
    """Render ``value`` and classify it as exact or approximate."""
    if isinstance(value, bool):
        return ("true" if value else "false"), "exact"
    if isinstance(value, int):
        return str(value), "exact"
    if isinstance(value, Fraction):
        return (str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"), "exact"
    if isinstance(value, float):
        return format(value, f".{APPROX_DIGITS}g"), "approx"
    if isinstance(value, (list, tuple)):
        parts = [tag(v) for v in value]
        kind = "approx" if any(k == "approx" for _, k in parts) else "exact"
        return "[" + ",".join(p for p, _ in parts) + "]", kind
    return str(value), "exact"


@dataclass
class CheckResult:
    name: str
    anchor: str
    relation: str
    passed: bool
    values: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        vals = {}
        for key, v in self.values.items():
            text, kind = tag(v)
            vals[key] = {"value": text, "kind": kind}
        return {
            "name": self.name,
            "anchor": self.anchor,
            "relation": self.relation,
            "passed": self.passed,
            "values": vals,
        }


@dataclass
class AnalysisReport:
    command: str
    config: dict
    checks: list[CheckResult] = field(default_factory=list)
    results: dict = field(default_factory=dict)

    def add(self, name, anchor, relation, passed, **values) -> CheckResult:
        c = CheckResult(name, anchor, relation, bool(passed), values)
        self.checks.append(c)
        return c

    def record(self, key: str, value) -> None:
        self.results[key] = value

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        res = {}
        for key, v in self.results.items():
            text, kind = tag(v)
            res[key] = {"value": text, "kind": kind}
        return {
            "command": self.command,
            "config": {k: tag(v)[0] for k, v in self.config.items()},
            "results": res,
            "checks": [c.as_dict() for c in self.checks],
            "summary": {
                "checks": len(self.checks),
                "failed": sum(not c.passed for c in self.checks),
                "status": "pass" if self.passed else "fail",
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, ensure_ascii=False) + "\n"

    def to_text(self) -> str:
        doc = self.as_dict()
        lines = [f"command={doc['command']}"]
        lines += [f"config.{k}={v}" for k, v in doc["config"].items()]
        lines += [f"result.{k}={v['value']} ({v['kind']})" for k, v in doc["results"].items()]
        for c in doc["checks"]:
            head = f"check.{c['name']}"
            lines.append(f"{head}.status={'pass' if c['passed'] else 'fail'}")
            lines.append(f"{head}.anchor={c['anchor']}")
            lines.append(f"{head}.relation={c['relation']}")
            lines += [f"{head}.{k}={v['value']} ({v['kind']})" for k, v in c["values"].items()]
        s = doc["summary"]
        lines.append(f"summary.checks={s['checks']}")
        lines.append(f"summary.failed={s['failed']}")
        lines.append(f"summary.status={s['status']}")
        return "\n".join(lines) + "\n"
