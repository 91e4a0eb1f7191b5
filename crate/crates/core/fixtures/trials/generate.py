"""Regenerates the golden trial files in this directory.

Only the aggregate counts are taken from published results; problem ids,
prompt lengths, error messages and the assignment of outcomes to problems
are synthetic and seeded. Every record carries model = "synthetic".
"""
import json
import random

RNG = random.Random(20240611)
MODEL = "synthetic"

OTHER_ERRORS = [
    "TypeError: unsupported operand type(s) for +: 'int' and 'str'",
    "IndexError: list index out of range",
    "TimeoutError: execution exceeded 10 seconds",
    "ValueError: invalid literal for int() with base 10: 'a'",
    "KeyError: 'total'",
]


def record(pid, task, ratio, length, passed, **extra):
    rec = {
        "problem_id": pid,
        "task": task,
        "ratio": ratio,
        "prompt_length": length,
        "passed": passed,
    }
    rec.update({k: v for k, v in extra.items() if v is not None})
    rec["model"] = MODEL
    return rec


def error_text(kind, pid):
    if kind == "name":
        return f"NameError: name '{pid.replace('-', '_')}' is not defined"
    if kind == "assertion":
        return "AssertionError"
    if kind == "syntax":
        return "SyntaxError: invalid syntax"
    return RNG.choice(OTHER_ERRORS)


def write(name, records):
    with open(name, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, separators=(",", ":")) + "\n")


def pass_rates():
    counts = {1.0: 164, 0.7: 128, 0.6: 97, 0.5: 70, 0.4: 34, 0.3: 11}
    lengths = [RNG.randint(40, 420) for _ in range(300)]
    out = []
    for ratio, k in counts.items():
        winners = set(RNG.sample(range(300), k))
        for i in range(300):
            pid = f"mbpp-{i:03d}"
            ok = i in winners
            kind = RNG.choice(["name", "assertion", "syntax", "other"])
            out.append(record(pid, "code", ratio, round(lengths[i] * ratio), ok,
                              error_text=None if ok else error_text(kind, pid)))
    return out


def signature():
    # Per ratio: trials, baseline passes, injection passes.
    cells = {0.3: (82, 3, 31), 0.4: (81, 5, 33), 0.5: (81, 5, 32)}
    failures = {
        "baseline": ["name"] * 199 + ["assertion"] * 3 + ["syntax"] * 12 + ["other"] * 17,
        "signature_injection": ["name"] * 9 + ["assertion"] * 69 + ["other"] * 70,
    }
    for kinds in failures.values():
        RNG.shuffle(kinds)
    out = []
    for cond, slot in (("baseline", 1), ("signature_injection", 2)):
        kinds = iter(failures[cond])
        for ratio, cell in cells.items():
            n, k = cell[0], cell[slot]
            winners = set(RNG.sample(range(n), k))
            for i in range(n):
                pid = f"mbpp-{int(ratio * 10)}{i:03d}"
                ok = i in winners
                out.append(record(pid, "code", ratio, RNG.randint(30, 160), ok,
                                  condition=cond,
                                  error_text=None if ok else error_text(next(kinds), pid)))
        assert next(kinds, None) is None
    return out


def quality_curve():
    anchors = {
        "code": {0.3: 701, 0.4: 740, 0.5: 947, 0.6: 993, 1.0: 1000},
        "cot": {0.3: 100, 0.4: 350, 0.5: 883, 0.6: 1000, 0.7: 883, 1.0: 1000},
    }
    out = []
    for task, row in anchors.items():
        for ratio, k in row.items():
            winners = set(RNG.sample(range(1000), k))
            for i in range(1000):
                ok = i in winners
                out.append(record(f"{task}-{i:04d}", task, ratio, RNG.randint(30, 400), ok,
                                  quality=1.0 if ok else 0.0))
    return out


if __name__ == "__main__":
    write("pass_rates.jsonl", pass_rates())
    write("signature.jsonl", signature())
    write("quality_curve.jsonl", quality_curve())
