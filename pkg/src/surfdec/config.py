"""Line-oriented ``key value ...`` text format shared by board specs and configs.

Blank lines and ``#`` comments are ignored. Every directive keeps its line
number so parse errors can point at the offending line.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterator, TypeVar

from .errors import ConfigError

T = TypeVar("T")


@dataclass(frozen=True)
class Directive:
    key: str
    args: tuple[str, ...]
    line: int
    source: str

    def error(self, message: str) -> ConfigError:
        return ConfigError(message, self.source, self.line)

    def arity(self, n: int) -> None:
        if len(self.args) != n:
            raise self.error(f"'{self.key}' expects {n} argument(s), got {len(self.args)}")

    def convert(self, index: int, kind: Callable[[str], T], what: str = "value") -> T:
        try:
            return kind(self.args[index])
        except (ValueError, IndexError):
            raise self.error(f"bad {what} for '{self.key}': {' '.join(self.args)!r}") from None


def iter_directives(text: str, source: str = "<string>") -> Iterator[Directive]:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, *args = line.split()
        yield Directive(key.lower(), tuple(args), lineno, source)


def read_directives(path: str | Path) -> list[Directive]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read file ({exc.strerror})", str(path)) from None
    return list(iter_directives(text, str(path)))


def _list(d: Directive, kind: Callable[[str], T], what: str) -> list[T]:
    """Values separated by whitespace and/or commas."""
    items = [x for arg in d.args for x in arg.split(",") if x]
    if not items:
        raise d.error(f"'{d.key}' needs at least one value")
    try:
        return [kind(x) for x in items]
    except ValueError:
        raise d.error(f"bad {what} for '{d.key}': {' '.join(d.args)!r}") from None


def parse_float_list(d: Directive) -> list[float]:
    return _list(d, float, "number")


def parse_int_list(d: Directive) -> list[int]:
    return _list(d, int, "integer")
