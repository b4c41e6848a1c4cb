"""Structured pass/fail reports for the randomized property suites."""

import json
from dataclasses import dataclass, field as dc_field


@dataclass
class CheckResult:
    name: str
    samples: int = 0
    passed: bool = True
    first_failing_seed: int | None = None

    def record(self, seed, ok):
        self.samples += 1
        if not ok and self.passed:
            self.passed = False
            self.first_failing_seed = seed

    def merge(self, other):
        self.samples += other.samples
        if not other.passed and self.passed:
            self.passed = False
            self.first_failing_seed = other.first_failing_seed


@dataclass
class Report:
    command: str
    config: dict = dc_field(default_factory=dict)
    checks: list = dc_field(default_factory=list)

    def check(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        c = CheckResult(name)
        self.checks.append(c)
        return c

    @property
    def ok(self):
        return all(c.passed for c in self.checks)

    def merge(self, other):
        for c in other.checks:
            self.check(c.name).merge(c)
        return self

    def render_text(self):
        lines = [f"pglue {self.command} report"]
        cfg = "  ".join(f"{k}={v}" for k, v in self.config.items())
        if cfg:
            lines.append(cfg)
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            extra = "" if c.first_failing_seed is None else f"  first_failing_seed={c.first_failing_seed}"
            lines.append(f"[{status}] {c.name:<36} samples={c.samples}{extra}")
        lines.append(f"result: {'PASS' if self.ok else 'FAIL'}")
        return "\n".join(lines) + "\n"

    def render_json(self):
        payload = {
            "command": self.command,
            "config": self.config,
            "checks": [
                {
                    "name": c.name,
                    "samples": c.samples,
                    "passed": c.passed,
                    "first_failing_seed": c.first_failing_seed,
                }
                for c in self.checks
            ],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"
