#!/usr/bin/env python3
"""Convert a maildir tree of RFC-822 messages into the metadata CSV
schema the pipeline ingests:

    msg_id,from,to,cc,bcc,timestamp,subject_len,text_size,attach_size

Usage:

    python3 scripts/extract_maildir.py <maildir-root> <out.csv>

Typical use is one custodian mailbox per output file, e.g. the EDRM
Enron corpus's `beck-s/` or `kitchen-l/` directory. Only message
metadata is kept: no subject text or body content is copied, just
their sizes. Rough recipient counts and the most frequent sender are
printed at the end to help pick the host address.
"""

import csv
import email
import email.utils
import os
import sys
from collections import Counter


def addresses(msg, header):
    """All addresses from every instance of `header`, normalized."""
    values = msg.get_all(header) or []
    found = []
    for _, addr in email.utils.getaddresses(values):
        addr = addr.strip().lower()
        if addr and "@" in addr:
            found.append(addr)
    return found


def sizes(msg):
    """(text_bytes, attachment_bytes) over the MIME tree."""
    text = 0
    attach = 0
    for part in msg.walk():
        if part.is_multipart():
            continue
        try:
            payload = part.get_payload(decode=True) or b""
        except Exception:
            payload = part.get_payload() or ""
            payload = payload.encode("utf-8", "replace") if isinstance(payload, str) else payload
        if part.get_content_maintype() == "text" and not part.get_filename():
            text += len(payload)
        else:
            attach += len(payload)
    return text, attach


def main():
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    root, out_path = sys.argv[1], sys.argv[2]
    rows = []
    senders = Counter()
    skipped = 0
    for dirpath, _dirnames, filenames in os.walk(root):
        for name in sorted(filenames):
            path = os.path.join(dirpath, name)
            try:
                with open(path, "rb") as f:
                    msg = email.message_from_binary_file(f)
            except OSError:
                skipped += 1
                continue

            froms = addresses(msg, "from")
            tos = addresses(msg, "to")
            ccs = addresses(msg, "cc")
            bccs = addresses(msg, "bcc")
            if not froms or not (tos or ccs or bccs):
                skipped += 1
                continue

            date = msg.get("date")
            try:
                stamp = email.utils.parsedate_to_datetime(date)
            except (TypeError, ValueError):
                skipped += 1
                continue
            if stamp.tzinfo is None:
                continue_without_tz = stamp.isoformat() + "+00:00"
                stamp_text = continue_without_tz
            else:
                stamp_text = stamp.isoformat()

            msg_id = (msg.get("message-id") or "").strip()
            if not msg_id:
                msg_id = os.path.relpath(path, root)
            subject = msg.get("subject") or ""
            text_size, attach_size = sizes(msg)

            senders[froms[0]] += 1
            rows.append(
                [
                    msg_id,
                    froms[0],
                    ";".join(tos),
                    ";".join(ccs),
                    ";".join(bccs),
                    stamp_text,
                    len(subject),
                    text_size,
                    attach_size,
                ]
            )

    with open(out_path, "w", newline="") as f:
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

    print(f"wrote {len(rows)} records to {out_path} ({skipped} skipped)")
    for addr, count in senders.most_common(3):
        print(f"  frequent sender: {addr} ({count})")


if __name__ == "__main__":
    main()
