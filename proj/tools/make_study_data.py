#!/usr/bin/env python3
"""Generate the study fixture datasets under tests/data/study.

Values are drawn from a seeded RNG and then nudged so each group mean lands
exactly on its target after rounding. Re-running produces identical files.
"""

import argparse
import random
from pathlib import Path

HEADER = "student_id,group,semester,phase,assignment,line,branch,cond,redundant,total,grade"
SURVEY_HEADER = "respondent,group," + ",".join(f"q{i}" for i in range(1, 10))

# (semester, group) -> students
ROSTER = {("S1", "A"): 15, ("S1", "B"): 16, ("S2", "A"): 13, ("S2", "B"): 15}

PHASES = {
    "PRETEST": ["a1"],
    "TREATMENT": ["a2", "a3", "a4"],
    "POSTTEST": ["a5"],
}

# phase -> group -> (line, branch, cond, redundant, grade)
TARGETS = {
    "PRETEST": {"A": (35.0, 35.3, 35.1, 4.86, 57.95), "B": (35.7, 34.9, 36.6, 4.90, 58.42)},
    "TREATMENT": {"A": (43.4, 43.1, 45.4, 4.86, 60.37), "B": (55.1, 52.7, 57.5, 3.33, 68.27)},
    "POSTTEST": {"A": (37.9, 38.6, 44.8, 4.29, 60.31), "B": (68.8, 69.4, 72.6, 2.29, 78.95)},
}

SURVEY_TARGETS = {
    "A": (3.57, 4.25, 3.75, 3.18, 3.43, 3.82, 3.89, 5.14, 3.40),
    "B": (5.82, 5.21, 5.52, 4.85, 5.61, 5.97, 5.79, 6.21, 6.21),
}

COVERAGE_SD = 11.0
GRADE_SD = 9.0
REDUNDANT_SD = 1.6
RATING_SD = 1.0


def exact_integers(rng, n, target_sum, centre, sd, lo, hi):
    """n integers in [lo, hi] summing to target_sum, scattered around centre."""
    values = [min(hi, max(lo, round(rng.gauss(centre, sd)))) for _ in range(n)]
    diff = target_sum - sum(values)
    while diff != 0:
        i = rng.randrange(n)
        step = 1 if diff > 0 else -1
        if lo <= values[i] + step <= hi:
            values[i] += step
            diff -= step
    return values


def scaled_values(rng, n, target, decimals, sd, lo, hi):
    """n values with `decimals` places whose mean rounds to target."""
    scale = 10 ** decimals
    total = round(target * n * scale)
    ints = exact_integers(rng, n, total, target * scale, sd * scale, lo * scale, hi * scale)
    values = [v / scale for v in ints]
    assert round(total / (n * scale), decimals) == target, (target, total / (n * scale))
    return values


def count_values(rng, n, target, sd, lo, hi):
    total = round(target * n)
    values = exact_integers(rng, n, total, target, sd, lo, hi)
    assert round(total / n, 2) == target, (target, total / n)
    return values


def students(group):
    out = []
    for semester in ("S1", "S2"):
        for i in range(1, ROSTER[(semester, group)] + 1):
            out.append((f"{group.lower()}{semester[1]}{i:02d}", semester))
    return out


def fmt(value):
    text = f"{value:.2f}".rstrip("0").rstrip(".")
    return text if text else "0"


def records(rng):
    rows = []
    for phase, assignments in PHASES.items():
        for group in ("A", "B"):
            roster = students(group)
            slots = [(sid, sem, a) for sid, sem in roster for a in assignments]
            n = len(slots)
            line_t, branch_t, cond_t, red_t, grade_t = TARGETS[phase][group]
            line = scaled_values(rng, n, line_t, 1, COVERAGE_SD, 0, 100)
            branch = scaled_values(rng, n, branch_t, 1, COVERAGE_SD, 0, 100)
            cond = scaled_values(rng, n, cond_t, 1, COVERAGE_SD, 0, 100)
            redundant = count_values(rng, n, red_t, REDUNDANT_SD, 0, 12)
            grade = scaled_values(rng, n, grade_t, 2, GRADE_SD, 0, 100)
            for k, (sid, sem, assignment) in enumerate(slots):
                total = redundant[k] + rng.randint(4, 10)
                rows.append((sid, group, sem, phase, assignment, line[k], branch[k], cond[k], redundant[k], total, grade[k]))
    rows.sort(key=lambda r: (r[0], r[4]))
    return rows


def respondent_count(target, limit):
    """Largest n <= limit for which the target mean is reachable with 1..7 ratings."""
    for n in range(limit, 1, -1):
        if any(round(s / n, 2) == target for s in range(n, 7 * n + 1)):
            return n
    raise SystemExit(f"no respondent count reaches {target}")


def survey(rng):
    """Not every respondent answers every question: the per-question counts
    are the largest ones that can produce the target mean."""
    rows = []
    for group in ("A", "B"):
        size = sum(v for (s, g), v in ROSTER.items() if g == group)
        columns = []
        for target in SURVEY_TARGETS[group]:
            n = respondent_count(target, size)
            total = next(s for s in range(n, 7 * n + 1) if round(s / n, 2) == target)
            answers = exact_integers(rng, n, total, target, RATING_SD, 1, 7)
            skipped = set(rng.sample(range(size), size - n))
            it = iter(answers)
            columns.append([None if i in skipped else next(it) for i in range(size)])
        for i in range(size):
            rows.append((f"r{group.lower()}{i + 1:02d}", group, [c[i] for c in columns]))
    return rows


def symmetric(rng):
    """Group B mirrors Group A value for value."""
    rows = []
    for phase, assignments in PHASES.items():
        for i in range(1, 13):
            for assignment in assignments:
                values = (
                    round(rng.uniform(20, 90), 1),
                    round(rng.uniform(20, 90), 1),
                    round(rng.uniform(20, 90), 1),
                    rng.randint(0, 6),
                )
                total = values[3] + rng.randint(3, 8)
                grade = round(rng.uniform(40, 95), 2)
                semester = "S1" if i <= 6 else "S2"
                for group in ("A", "B"):
                    sid = f"{group.lower()}{i:02d}"
                    rows.append((sid, group, semester, phase, assignment, *values, total, grade))
    rows.sort(key=lambda r: (r[0], r[4]))
    return rows


def write_records(path, rows):
    lines = [HEADER]
    for sid, group, sem, phase, a, line, branch, cond, red, total, grade in rows:
        lines.append(",".join([sid, group, sem, phase, a, fmt(line), fmt(branch), fmt(cond), str(red), str(total), fmt(grade)]))
    path.write_text("\n".join(lines) + "\n")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "tests" / "data" / "study")
    parser.add_argument("--seed", type=int, default=2024)
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    rng = random.Random(args.seed)
    write_records(args.out / "records.csv", records(rng))
    lines = [SURVEY_HEADER] + [",".join([r, g] + ["" if a is None else str(a) for a in answers]) for r, g, answers in survey(rng)]
    (args.out / "survey.csv").write_text("\n".join(lines) + "\n")
    write_records(args.out / "symmetric.csv", symmetric(rng))


if __name__ == "__main__":
    main()
