#!/usr/bin/env python3
# Copyright 2026 The vidrag Authors
# SPDX-License-Identifier: Apache-2.0
"""Derives the expected corpus statistics for a catalog without the C++ code.

Aligned transcript length is computed arithmetically: every rendered line is
"[HH:MM:SS.mmm --> HH:MM:SS.mmm] VISUAL: " (40 chars, SPEECH is the same
width) plus the caption, and lines are joined by one newline. Order does not
matter for a length, so no sorting happens here.
"""
import json
import sys


def lower_median(values):
    s = sorted(values)
    return s[(len(s) - 1) // 2]


def stat(values):
    return {"total": sum(values), "median": lower_median(values)}


def joined(items):
    return sum(len(i["text"]) for i in items) + max(len(items) - 1, 0)


def main(path):
    videos = [json.loads(line) for line in open(path, encoding="utf-8") if line.strip()]
    rows = []
    for v in videos:
        scenes, cues = v.get("scenes", []), v.get("cues", [])
        title, desc = v.get("title", ""), v.get("description", "")
        items = scenes + cues
        end = max([i["end_ms"] for i in items], default=0)
        assert end < 100 * 3600 * 1000, "two-digit hours assumed"
        rows.append({
            "scenes": len(scenes),
            "duration": end // 1000,
            "title": len(title),
            "description": len(desc),
            "title_description": len(title) + 1 + len(desc),
            "visual_captions": joined(scenes),
            "subtitles": joined(cues),
            "aligned_transcript": sum(40 + len(i["text"]) for i in items) + max(len(items) - 1, 0),
        })
    col = lambda k: [r[k] for r in rows]
    out = {
        "video_count": len(rows),
        "scene_count": stat(col("scenes")),
        "duration_s": stat(col("duration")),
        "chars": {k: stat(col(k)) for k in ("title", "description", "title_description",
                                            "visual_captions", "subtitles", "aligned_transcript")},
    }
    json.dump(out, sys.stdout, indent=2)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main(sys.argv[1])
