"""Generate a synthetic transcript corpus and walk through parsing it.

The generator plants a known ground truth: each student has a latent
ability, each course a latent difficulty, and an enrollment passes with
sigmoid(ability - difficulty - load penalty). Because the truth is known,
later demos can score the trained model against an exact oracle.

Run:  python demos/01_synthesize_and_parse.py
"""

import collections

from coursecast import build_catalog, generate, parse_transcript, serialize_transcript
from coursecast.synth import SynthConfig, true_success_probability

config = SynthConfig(num_students=200, catalog_size=20, seed=0)
records, truth = generate(config)
print(f"generated {len(records)} grade rows for {config.num_students} students")

csv_text = serialize_transcript(records)
print("\nfirst transcript lines:")
for line in csv_text.splitlines()[:6]:
    print(f"  {line}")

# the CSV is the interchange format: parsing it back is lossless
assert parse_transcript(csv_text) == records
print("\nCSV round-trip: exact")

catalog = build_catalog(records)
print(f"catalog: {len(catalog)} distinct courses, indexed lexicographically")

grades = collections.Counter(
    "R" if r.grade == "R" else ("pass" if r.grade >= 10 else "fail") for r in records
)
print(f"outcomes: {dict(grades)}")

# the planted truth answers any what-if exactly
student = records[0].student_id
easy = min(truth.difficulties, key=truth.difficulties.get)
hard = max(truth.difficulties, key=truth.difficulties.get)
print(f"\nstudent {student} (ability {truth.abilities[student]:+.2f}):")
for combo in ([easy], [hard], [easy, hard]):
    p = true_success_probability(truth, student, combo)
    print(f"  P(pass all of {combo}) = {p:.3f}")
