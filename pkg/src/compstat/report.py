"""Versioned JSON run reports."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

from compstat import __version__

SCHEMA_VERSION = "1.0"


@dataclass
class RunReport:
    command: str
    config: dict
    result: dict
    inputs: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    timings: dict | None = None
    tool: dict = field(default_factory=lambda: {"name": "compstat", "version": __version__})
    schema_version: str = SCHEMA_VERSION

    def to_dict(self) -> dict:
        d = {
            "schema_version": self.schema_version,
            "tool": self.tool,
            "command": self.command,
            "config": self.config,
            "inputs": self.inputs,
            "warnings": self.warnings,
            "result": self.result,
        }
        if self.timings is not None:
            d["timings"] = self.timings
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        d = json.loads(text)
        return cls(d["command"], d["config"], d["result"], d.get("inputs", []), d.get("warnings", []),
                   d.get("timings"), d["tool"], d["schema_version"])


def load_schema() -> dict:
    return json.loads(resources.files("compstat.schema").joinpath("report.schema.json").read_text())


def error_document(code: str, message: str) -> str:
    return json.dumps({"error": {"code": code, "message": message}}, sort_keys=True) + "\n"
