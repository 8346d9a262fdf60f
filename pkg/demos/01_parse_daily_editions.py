"""Parse a small daily-edition transcript into attributed speeches.

Walks through segmentation, speaker attribution, filtering, citation
extraction, and name masking on an in-memory example.
"""

import datetime as dt

from legisrgcn.corpus import Legislator, Party
from legisrgcn.recordparse import (
    DailyEdition,
    mask_citation,
    parse_editions,
    segment_edition,
)

roster = [
    Legislator("P001", "Ted", "Poe", "M", 62, Party.REPUBLICAN, "TX", "2", 112),
    Legislator("P002", "John", "Boehner", "M", 61, Party.REPUBLICAN, "OH", "8", 112),
    Legislator("P003", "Maxine", "Waters", "F", 72, Party.DEMOCRAT, "CA", "43", 112),
]

body_a = " ".join(
    f"This body must address flood insurance, item number {i}." for i in range(12)
)
body_b = (
    "I thank my colleague Mr. POE of Texas for his leadership. "
    + " ".join(f"The committee has reviewed section {i} carefully." for i in range(11))
)

edition = DailyEdition(
    dt.date(2011, 6, 1),
    "The House met at 10 a.m. and was called to order.\n"
    f"Mr. POE of Texas. Mr. Speaker. {body_a}\n"
    f"Ms. WATERS of California. Madam President. {body_b}\n",
)

# Step 1: segmentation. Openings follow "SAL PERSON (of State)? SAL ROLE".
for seg in segment_edition(edition):
    who = seg.speaker_surname or "<preamble>"
    print(f"segment by {who:12s} opening={seg.opening!r}")

# Step 2: the full pipeline adds attribution, filters, and citations.
speeches, citations, report = parse_editions([edition], roster, congress=112)
print(f"\nkept {report.kept}, dropped: no-author={report.no_author} "
      f"too-short={report.too_short} too-long={report.too_long}")
for s in speeches:
    print(f"{s.speech_id}: author={s.author_id} cites={list(s.cited_ids)}")

# Step 3: mask the cited name before the citation head ever sees the text.
citing = next(s for s in speeches if s.cited_ids)
masked = mask_citation(citing, citing.cited_ids[0], roster)
print("\nmasked text starts:", masked.text[:80], "...")
