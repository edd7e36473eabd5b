from __future__ import annotations

import pytest

from fusion_algebra.characters import CharacterTable
from fusion_algebra.weight_lattice import AlgebraSpec

_TABLES: dict[tuple[int, int], CharacterTable] = {}


def table_for(r: int, k: int) -> CharacterTable:
    key = (r, k)
    if key not in _TABLES:
        _TABLES[key] = CharacterTable(AlgebraSpec(r, k))
    return _TABLES[key]


@pytest.fixture
def tables():
    return table_for
