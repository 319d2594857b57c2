"""Interactive what-if planning flow, in-process and over HTTP.

A trained checkpoint answers: "given this grade history, which of these
candidate course combinations am I most likely to fully pass?" The same
query runs through the library call and through the HTTP service the
browser UI talks to.

Run:  python demos/05_what_if_planning.py
"""

import json
import urllib.request

from coursecast import build_catalog, build_examples, generate, split_dataset
from coursecast.metrics import course_failure_rates
from coursecast.planner import PlanQuery, score_plans
from coursecast.service import PlannerApp, build_server, start_in_background
from coursecast.synth import SynthConfig
from coursecast.training import TrainConfig, train

records, _ = generate(SynthConfig(num_students=150, catalog_size=12, seed=2))
catalog = build_catalog(records)
examples, _ = build_examples(records, catalog)
split = split_dataset(examples, validation_fraction=0.2, seed=2)
params, report = train(split, TrainConfig(seed=2, max_epochs=40))

rates = course_failure_rates(records)
by_difficulty = sorted(catalog.courses, key=rates.get)
easiest, hardest = by_difficulty[:3], by_difficulty[-3:]

history = [
    ("2020-1", [(by_difficulty[0], 14), (by_difficulty[4], 12), (by_difficulty[6], 9)]),
    ("2020-2", [(by_difficulty[1], 15), (by_difficulty[5], 11)]),
]
candidates = [easiest, hardest, easiest[:2] + hardest[:1], by_difficulty[3:7]]

response = score_plans(params, catalog, PlanQuery(history, candidates), checkpoint="demo")
print("candidate combinations, best first:")
for rank, idx in enumerate(response.ranking, start=1):
    combo = candidates[idx]
    print(f"  {rank}. p={response.probabilities[idx]:.3f}  {combo}")

# the same contract over HTTP
app = PlannerApp(params, catalog, checkpoint="demo", failure_rates=rates)
server = build_server(app, port=0)
start_in_background(server)
host, port = server.server_address[:2]
base = f"http://{host}:{port}"

body = {
    "history": [
        {"period": p, "grades": [{"course": c, "grade": g} for c, g in grades]}
        for p, grades in history
    ],
    "candidates": candidates,
}
request = urllib.request.Request(
    f"{base}/v1/score",
    data=json.dumps(body).encode(),
    headers={"Content-Type": "application/json"},
)
with urllib.request.urlopen(request) as http_response:
    served = json.loads(http_response.read())
print(f"\nHTTP /v1/score agrees: {served['probabilities'] == response.probabilities}")

with urllib.request.urlopen(f"{base}/healthz") as http_response:
    print(f"GET /healthz -> {json.loads(http_response.read())}")
server.shutdown()
server.server_close()
