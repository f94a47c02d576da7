"""Run deeply recursive work on a thread with a large C stack.

Normalizing unary numerals recurses once per successor. CPython 3.10 keeps
Python frames on the C stack, so the main thread's default stack is too small.
"""

from __future__ import annotations

import sys
import threading

STACK_BYTES = 1 << 30
RECURSION_LIMIT = 2_000_000


def run_deep(fn, *args, **kwargs):
    box: dict = {}

    def target():
        try:
            box["value"] = fn(*args, **kwargs)
        except BaseException as e:  # re-raised in the caller
            box["error"] = e

    old_limit = sys.getrecursionlimit()
    old_size = threading.stack_size()
    sys.setrecursionlimit(max(old_limit, RECURSION_LIMIT))
    threading.stack_size(STACK_BYTES)
    try:
        t = threading.Thread(target=target, name="complf-deep")
        t.start()
    finally:
        threading.stack_size(old_size)
    t.join()
    sys.setrecursionlimit(old_limit)
    if "error" in box:
        raise box["error"]
    return box.get("value")
