"""Language profiles: stopwords, suffix-strip tables, process markers.

Profile files are plain UTF-8 text with ``[stopwords]``, ``[suffixes]`` and
``[process_markers]`` sections, one entry per line, ``#`` comments allowed.
Suffix stripping is deliberately crude (strip the longest listed suffix when
a minimum stem remains); full morphology is out of scope and the shipped
tables are meant to be edited per corpus.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import InvalidArgumentError

MIN_STEM = 3

_SECTIONS = ("stopwords", "suffixes", "process_markers")


@dataclass(frozen=True)
class LanguageProfile:
    name: str
    stopwords: frozenset[str]
    suffixes: tuple[str, ...]  # sorted longest-first
    process_markers: tuple[str, ...]

    def normalize_token(self, surface: str) -> str:
        """NFC lowercase, then strip the longest listed suffix if a stem of
        at least MIN_STEM characters remains."""
        word = unicodedata.normalize("NFC", surface).lower()
        for suffix in self.suffixes:
            if word.endswith(suffix) and len(word) - len(suffix) >= MIN_STEM:
                return word[: -len(suffix)]
        return word

    def is_stopword(self, surface: str) -> bool:
        return unicodedata.normalize("NFC", surface).lower() in self.stopwords


def parse_profile(text: str, name: str = "custom") -> LanguageProfile:
    sections: dict[str, list[str]] = {s: [] for s in _SECTIONS}
    current: str | None = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip().lower()
            if current not in sections:
                raise InvalidArgumentError(f"unknown profile section [{current}] in {name}")
            continue
        if current is None:
            raise InvalidArgumentError(f"profile entry outside any section in {name}: {line!r}")
        sections[current].append(unicodedata.normalize("NFC", line).lower())
    return LanguageProfile(
        name=name,
        stopwords=frozenset(sections["stopwords"]),
        suffixes=tuple(sorted(set(sections["suffixes"]), key=lambda s: (-len(s), s))),
        process_markers=tuple(sorted(set(sections["process_markers"]), key=lambda s: (-len(s), s))),
    )


def load_profile(path: str | Path) -> LanguageProfile:
    p = Path(path)
    return parse_profile(p.read_text(encoding="utf-8"), name=p.stem)


def builtin_profile(lang: str) -> LanguageProfile:
    """Shipped profiles: ``en``, ``uk``."""
    ref = resources.files("ontoforge.data.profiles").joinpath(f"{lang}.profile")
    try:
        text = ref.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise InvalidArgumentError(f"no builtin profile for language {lang!r}") from None
    return parse_profile(text, name=lang)


def combined_profile(*profiles: LanguageProfile) -> LanguageProfile:
    """Union of several profiles; used for cross-language label matching."""
    stop: set[str] = set()
    suffixes: set[str] = set()
    markers: set[str] = set()
    for p in profiles:
        stop |= p.stopwords
        suffixes |= set(p.suffixes)
        markers |= set(p.process_markers)
    return LanguageProfile(
        name="+".join(p.name for p in profiles),
        stopwords=frozenset(stop),
        suffixes=tuple(sorted(suffixes, key=lambda s: (-len(s), s))),
        process_markers=tuple(sorted(markers, key=lambda s: (-len(s), s))),
    )
