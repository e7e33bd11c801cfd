# errors.py
"""Shared error and warning types.

Numerical guards raise :class:`GuardError` with a short machine-readable
``guard`` label (stable strings, used by the CLI for exit-code mapping and
error JSON).  Soft quality problems (tail mass leaking off the grid, a
nonmonotone scaling ladder) emit :class:`ToolkitWarning` instead of failing.
"""

from __future__ import annotations


class GuardError(ValueError):
    """A validated numerical precondition failed.

    Parameters
    ----------
    guard : str
        Stable label naming the violated guard, e.g. ``"resolution"``,
        ``"tail not free"``, ``"blowup guard"``.
    detail : str, optional
        Human-readable context (offending values, the rule that failed).
    """

    def __init__(self, guard: str, detail: str = ""):
        self.guard = guard
        self.detail = detail
        msg = guard if not detail else f"{guard}: {detail}"
        super().__init__(msg)


class ToolkitWarning(UserWarning):
    """Soft diagnostic warning (computation continues)."""
