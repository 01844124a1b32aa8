"""Shared PASS/FAIL lines collected by the acceptance tests."""
LINES: list[str] = []


def report(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
    LINES.append(line)
    print(line)
