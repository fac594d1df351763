#!/usr/bin/env python3
"""Writes scenarios/high-workload.jsonl."""
import json
import random
import sys

rng = random.Random(7)
low = [f"low{i:02d}" for i in range(15)]
gb = ["gb-a", "gb-b"]
lines = ["# 15 low-memory apps and 2 GB-scale apps on a 6 GiB device."]
for i, app in enumerate(low + gb):
    cls = "gb" if app in gb else "low"
    lines.append(json.dumps({"type": "generate", "app_id": app, "class": cls,
                             "seed_offset": i + 1}))

events = []
t = 0
# Load phase: every app once.
for app in low[:8] + [gb[0]] + low[8:] + [gb[1]]:
    events.append({"t_ms": t, "action": "launch", "app": app})
    t += 5000
# Daily use: a small active set; the rest of the apps go idle.
active = gb + low[:4]
end = t + 60 * 60 * 1000
while t < end:
    app = rng.choice(active)
    events.append({"t_ms": t, "action": "switch", "app": app})
    t += rng.randint(20, 60) * 1000
# Revisit everything.
for app in low + gb:
    events.append({"t_ms": t, "action": "switch", "app": app})
    t += 5000
lines.append(json.dumps({"type": "timeline", "name": "high-workload", "seed": 1,
                         "device": "pixel-6g", "events": events}))
with open(sys.argv[1] if len(sys.argv) > 1 else "scenarios/high-workload.jsonl", "w") as f:
    f.write("\n".join(lines) + "\n")
