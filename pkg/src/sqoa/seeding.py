"""Deterministic seed derivation.

A single master seed is expanded into independent per-stage seeds by hashing
the stage path with SHA-256. Unlike ``numpy.random.SeedSequence.spawn`` the
derivation depends only on the path strings, so the same (master, path) pair
yields the same seed on any platform and library version.
"""

import hashlib


def derive_seed(master: int, *path) -> int:
    """Return a 64-bit seed for the stage identified by ``path``.

    Path components may be ints or strings; they are joined with '/' so that
    e.g. ``derive_seed(7, "instance", 3)`` and ``derive_seed(7, "instance3")``
    differ.
    """
    text = "/".join([str(int(master))] + [str(p) for p in path])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")
