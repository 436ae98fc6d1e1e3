from __future__ import annotations

from dataclasses import dataclass

import pytest

from ontoforge.profiles import builtin_profile


@dataclass
class Doc:
    id: str
    text: str


@pytest.fixture(scope="session")
def en_profile():
    return builtin_profile("en")


@pytest.fixture(scope="session")
def uk_profile():
    return builtin_profile("uk")


def make_doc(doc_id: str, text: str) -> Doc:
    return Doc(id=doc_id, text=text)
