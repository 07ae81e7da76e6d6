import os
import sys
import time
import traceback
from typing import Optional, TextIO


def debug_enabled(flag: bool = False) -> bool:
    return flag or os.environ.get("PBF_DEBUG", "") not in ("", "0")


def note(tag: str, message: str, file: Optional[TextIO] = None) -> None:
    """Tagged diagnostic line on stderr; stdout stays machine-readable."""
    print(f"[{tag}] {message}", file=file or sys.stderr, flush=True)


def report_failure(what: str, stage: str, exc: BaseException, debug: bool = False, **context: object) -> None:
    """The [Error] block every script prints before exiting nonzero."""
    err = sys.stderr
    print(f"[Error] {what} failed.", file=err)
    print(f"  stage = {stage}", file=err)
    for key, value in context.items():
        print(f"  {key} = {value}", file=err)
    print(f"  error = {type(exc).__name__}", file=err)
    print(f"  message = {exc}", file=err)
    if debug_enabled(debug):
        traceback.print_exc(file=err)


class _NoopProgress:
    def update(self, n: int = 1, positives: int = 0) -> None:
        pass

    def close(self) -> None:
        pass


class Progress:
    """Trial counter bar; also shows the running positive fraction."""

    def __init__(
        self,
        total: Optional[int],
        desc: str = "",
        width: int = 30,
        min_interval: float = 0.1,
        file: Optional[TextIO] = None,
    ) -> None:
        self.total = total or 0
        self.desc = desc
        self.width = max(10, int(width))
        self.min_interval = max(0.05, float(min_interval))
        self.file = file or sys.stderr
        self.count = 0
        self.positives = 0
        self._last_print = 0.0

    def _render(self) -> None:
        rate = f" p={self.positives / self.count:.6f}" if self.count else ""
        if self.total <= 0:
            print(f"\r{self.desc} {self.count}{rate}", end="", file=self.file, flush=True)
            return
        ratio = min(1.0, self.count / self.total)
        filled = int(ratio * self.width)
        if filled <= 0:
            bar = ">" + " " * (self.width - 1)
        elif filled >= self.width:
            bar = "=" * self.width
        else:
            bar = "=" * (filled - 1) + ">" + " " * (self.width - filled)
        msg = f"{self.desc} [{bar}] {ratio * 100:5.1f}% ({self.count}/{self.total}){rate}"
        print(f"\r{msg}", end="", file=self.file, flush=True)

    def update(self, n: int = 1, positives: int = 0) -> None:
        self.count += int(n)
        self.positives += int(positives)
        t = time.time()
        if (t - self._last_print) >= self.min_interval or (self.total and self.count >= self.total):
            self._render()
            self._last_print = t

    def close(self) -> None:
        print("", file=self.file)


def get_progress(enabled: bool, total: Optional[int], desc: str = "") -> "Progress | _NoopProgress":
    if not enabled:
        return _NoopProgress()
    return Progress(total=total, desc=desc)
