"""Collects per-criterion sub-check outcomes for the terminal summary."""

RESULTS = {}


def check(criterion: int, name: str, ok: bool, detail: str = "") -> bool:
    RESULTS.setdefault(criterion, []).append((name, bool(ok), detail))
    return bool(ok)


def summary_lines() -> list:
    lines = []
    for k in sorted(RESULTS):
        rows = RESULTS[k]
        failed = [n for n, ok, _ in rows if not ok]
        status = "PASS" if not failed else "FAIL"
        tail = f" (failing: {', '.join(failed)})" if failed else ""
        lines.append(f"CRITERION {k:>2}: {status}{tail}")
        for n, ok, det in rows:
            lines.append(f"    [{'ok' if ok else 'XX'}] {n}: {det}")
    return lines
