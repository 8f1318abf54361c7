#!/usr/bin/env python3
"""Generate the bundled 40-vertex email fixture.

Four groups of ten users each. Group members exchange mail amongst
themselves with group-characteristic message statistics (subject
length, body size, attachment size, time of day), so each group lands
in its own attribute bins and forms a dense weighted clique. Four
weight-1 "bridge" mails connect the groups into a ring.

The output is deterministic: no randomness, only index arithmetic.
Run from the repository root:

    python3 scripts/gen_fixture.py
"""

import csv
import os

GROUPS = 4
SIZE = 10
DOMAIN = "corp.example"
OUT_DIR = os.path.join(os.path.dirname(__file__), "..", "fixtures")

# per-group attribute bases; jitter keeps every value inside one bin
SUBJECT_BASE = [10, 30, 50, 70]  # + 0..5
TEXT_BASE = [100, 400, 700, 1000]  # + 0..60
ATTACH_BASE = [20, 120, 220, 320]  # + 0..20
HOUR = [6, 13, 18, 22]  # morning / afternoon / evening / night


def user(group: int, member: int) -> str:
    return f"g{group}m{member}@{DOMAIN}"


def record(seq, sender, recipient, group, i, j):
    subject = SUBJECT_BASE[group] + (i + j) % 6
    text = TEXT_BASE[group] + (i * 13 + j * 7) % 61
    attach = ATTACH_BASE[group] + (i * 5 + j * 3) % 21
    day = 1 + (i + j) % 28
    minute = (i * 17 + j * 11) % 60
    stamp = f"2001-05-{day:02d}T{HOUR[group]:02d}:{minute:02d}:00+00:00"
    return [
        f"fx{seq:04d}",
        sender,
        recipient,
        "",
        "",
        stamp,
        subject,
        text,
        attach,
    ]


def main():
    rows = []
    seq = 1
    for g in range(GROUPS):
        for i in range(SIZE):
            for j in range(i + 1, SIZE):
                # 1-3 mails per pair, direction alternating
                for n in range(1 + (i + j) % 3):
                    a, b = (i, j) if n % 2 == 0 else (j, i)
                    rows.append(record(seq, user(g, a), user(g, b), g, i, j))
                    seq += 1
    # ring of single bridge mails between neighboring groups
    for g in range(GROUPS):
        h = (g + 1) % GROUPS
        rows.append(record(seq, user(g, SIZE - 1), user(h, 0), g, SIZE - 1, 0))
        seq += 1

    os.makedirs(OUT_DIR, exist_ok=True)
    csv_path = os.path.join(OUT_DIR, "emails40.csv")
    with open(csv_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(
            [
                "msg_id",
                "from",
                "to",
                "cc",
                "bcc",
                "timestamp",
                "subject_len",
                "text_size",
                "attach_size",
            ]
        )
        w.writerows(rows)

    alias_path = os.path.join(OUT_DIR, "aliases40.txt")
    everyone = ";".join(user(g, m) for g in range(GROUPS) for m in range(SIZE))
    with open(alias_path, "w") as f:
        f.write("# one host set covering the whole dump\n")
        f.write(f"everyone = {everyone}\n")

    print(f"wrote {len(rows)} records to {csv_path}")
    print(f"wrote host set to {alias_path}")


if __name__ == "__main__":
    main()
