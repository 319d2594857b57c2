"""From grade rows to model inputs: bucketing, one-hot terms, examples.

Grades collapse to four categories (Withdraw / NotApproved / Bad /
Excellent); a student-term becomes a C*4 multi-label one-hot vector; a
student's chronological terms minus the last form the history, and the
last term becomes the query whose all-passed outcome is the label.

Run:  python demos/02_encode_terms.py
"""

import numpy as np

from coursecast import build_catalog, build_examples, bucket_grade, generate
from coursecast.synth import SynthConfig

for grade in [9, 10, 12, 13, 20, "R"]:
    print(f"grade {grade!r:>4} -> {bucket_grade(grade).name}")

records, _ = generate(SynthConfig(num_students=120, catalog_size=15, seed=1))
catalog = build_catalog(records)
examples, skipped = build_examples(records, catalog)

print(f"\n{len(records)} rows -> {len(examples)} examples (one per multi-term student)")
print(f"skipped single-period students: {len(skipped)}")

steps = sum(ex.history.shape[0] for ex in examples)
print(f"term steps across histories: {steps} (each step is one student-term)")

ex = examples[0]
print(f"\nstudent {ex.student_id}:")
print(f"  history: {ex.history.shape[0]} terms, each a {ex.history.shape[1]}-dim 0/1 vector")
print(f"  ones per term: {[int(t.sum()) for t in ex.history]} (one per course taken)")
queried = [catalog.courses[i] for i in np.flatnonzero(ex.query)]
print(f"  query: {queried}")
print(f"  label: {ex.label} (1 iff every queried course was passed)")
