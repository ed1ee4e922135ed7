import os
import sys
import json
import hashlib
from pathlib import Path
from multiprocessing.pool import ThreadPool

import numpy as np

from projection_lab.utils.errors import InputError


def step(msg):
    print(f"→ {msg}", file=sys.stderr)


def success(msg):
    print(f"✅ {msg}", file=sys.stderr)


def warn(msg):
    print(f"⚠️  {msg}", file=sys.stderr)


def fail(msg):
    print(f"❌ {msg}", file=sys.stderr)


def banner(title, icon="🧪"):
    print(f"\n{icon} {title}\n" + ("=" * 40), file=sys.stderr)


def detail(msg, verbose=False):
    """Print a detail line only when verbose output is enabled."""
    if verbose:
        print(f"   {msg}", file=sys.stderr)


def check_file_exists(file_path):
    """Raise InputError if the given file is missing."""
    if not Path(file_path).exists():
        raise InputError(f"File not found: {file_path}")
    return Path(file_path)


def resolve_threads(threads):
    """0 or None means one worker per CPU."""
    if threads is None or threads == 0:
        return os.cpu_count() or 1
    if threads < 0:
        raise InputError(f"--threads must be >= 0, got {threads}")
    return threads


def task_rng(seed, index):
    """Generator for task `index` of a run seeded with `seed`.

    Tasks never share a stream, and a task's stream depends only on
    (seed, index), never on which worker picks it up.
    """
    return np.random.default_rng([int(seed), int(index)])


def task_seed(seed, index):
    """Integer seed for task `index`, for APIs that take a plain seed."""
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1)[0])


def parallel_map(func, items, threads=0):
    """Map `func` over `items` on a thread pool, preserving input order."""
    items = list(items)
    workers = min(resolve_threads(threads), max(len(items), 1))
    if workers <= 1:
        return [func(item) for item in items]
    with ThreadPool(workers) as pool:
        return pool.map(func, items)


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_json_default)


def content_hash(obj):
    """sha256 of the canonical JSON form of `obj`."""
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(obj, f, indent=2, sort_keys=True, default=_json_default)
        f.write("\n")
    return path


def read_json(path):
    check_file_exists(path)
    with open(path, encoding="utf-8") as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as e:
            raise InputError(f"{path}: invalid JSON ({e})") from e


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")
