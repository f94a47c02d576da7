from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Diagnostic:
    subject: str
    message: str
    severity: str = "error"

    def __str__(self) -> str:
        return f"{self.subject}: {self.message}"


@dataclass
class Report:
    items: list[Diagnostic] = field(default_factory=list)

    def error(self, subject: str, message: str) -> None:
        self.items.append(Diagnostic(subject, message))

    def warn(self, subject: str, message: str) -> None:
        self.items.append(Diagnostic(subject, message, "warning"))

    def extend(self, other: "Report") -> None:
        self.items.extend(other.items)

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.items if d.severity == "error"]

    @property
    def warnings(self) -> list[Diagnostic]:
        return [d for d in self.items if d.severity == "warning"]

    @property
    def ok(self) -> bool:
        return not self.errors
