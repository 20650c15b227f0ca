from dataclasses import dataclass, field

from Utilities.Log import Log


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class ValidationReport:
    """Ordered record of named pass/fail checks; never raises."""

    subject: str
    checks: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    # ------------------------------------------------------------------ #
    #  RECORDING
    # ------------------------------------------------------------------ #

    def check(self, name, passed, detail=""):
        """Records one check and logs failures."""
        self.checks.append(Check(name, bool(passed), detail))
        if passed:
            Log.logger.debug(f"[{self.subject}] check passed: {name}")
        else:
            Log.logger.warning(f"[{self.subject}] check FAILED: {name} ({detail})")
        return bool(passed)

    def note(self, text):
        """Attaches free text (e.g. what a partial check covered)."""
        self.notes.append(text)
        Log.logger.info(f"[{self.subject}] {text}")

    # ------------------------------------------------------------------ #
    #  STATE
    # ------------------------------------------------------------------ #

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    @property
    def first_failure(self):
        for c in self.checks:
            if not c.passed:
                return c
        return None

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def as_dict(self):
        return {
            "subject": self.subject,
            "passed": self.passed,
            "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in self.checks],
            "notes": list(self.notes),
        }
