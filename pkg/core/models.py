from dataclasses import dataclass


@dataclass(frozen=True)
class Check:
    """Resultado de una verificación: nombre, estado y testigo de la falla."""

    STATUSES = (
        ("pass", "Pasa"),
        ("fail", "Falla"),
    )

    name: str
    passed: bool
    witness: object = None
    detail: str = ""

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def __str__(self):
        label = dict(self.STATUSES)[self.status]
        return f"{label} · {self.name}"


def all_passed(checks) -> bool:
    return all(check.passed for check in checks)


def failed(checks) -> list:
    return [check for check in checks if not check.passed]
