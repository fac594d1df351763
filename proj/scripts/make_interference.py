#!/usr/bin/env python3
"""Writes scenarios/interference.jsonl."""
import json
import sys

KIB = 1024
MIB = 1024 * KIB
GIB = 1024 * MIB


def profile(app_id, files, phases, total_alloc, baseline):
    file_bytes = sum(p["length"] for p in phases if "file" in p)
    return {"type": "profile", "app_id": app_id, "class": "low",
            "total_alloc": total_alloc,
            "anon_file_split": (total_alloc - file_bytes) / total_alloc,
            "baseline_footprint": baseline,
            "files": files, "phases": phases}


def read(fid, size):
    return {"file": fid, "offset": 0, "length": size}


lines = ["# A launch whose small files were preloaded, then squeezed by a hog."]

# Target: 300 small files of 64 KiB read back to back, then CPU work.
files = [{"id": f"s{i}", "size": 64 * KIB} for i in range(300)]
phases = [read(f["id"], f["size"]) for f in files] + [{"cpu_ms": 20}]
lines.append(json.dumps(profile("target", files, phases, 48 * MIB, 32 * MIB)))

# Background app that leaves clean file pages behind.
files = [{"id": f"b{i}", "size": 16 * MIB} for i in range(16)]
phases = [{"cpu_ms": 10}] + [read(f["id"], f["size"]) for f in files]
lines.append(json.dumps(profile("bg", files, phases, 512 * MIB, 448 * MIB)))

# Hog: one big file and a large anonymous heap.
files = [{"id": "h0", "size": 64 * MIB}]
phases = [{"cpu_ms": 10}, read("h0", 64 * MIB), {"cpu_ms": 200}]
lines.append(json.dumps(profile("hog", files, phases, 960 * MIB, 256 * MIB)))

device = {"dram_total": 2 * GIB, "sys_reserved": 512 * MIB,
          "swap_capacity": 2 * GIB, "free_threshold": 160 * MIB}
events = [{"t_ms": 500, "action": "launch", "app": "bg"},
          {"t_ms": 3000, "action": "launch", "app": "hog"},
          {"t_ms": 8000, "action": "launch", "app": "target"}]
lines.append(json.dumps({"type": "timeline", "name": "interference", "seed": 0,
                         "device": device, "events": events}))

out = sys.argv[1] if len(sys.argv) > 1 else "scenarios/interference.jsonl"
with open(out, "w") as fh:
    fh.write("\n".join(lines) + "\n")
