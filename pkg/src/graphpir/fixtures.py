"""Bundled reference patterns with their settled capacities.

These seven storage patterns exercise every regime the package handles:
exact matching bounds with and without cover certificates, redundant
servers and redundant storage, and mixed-replication patterns whose
capacity needs the composite scheme. ``regenerate`` writes them out as
JSON documents for the CLI and for fixture diffing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .capacity import capacity_report
from .storage import StoragePattern, pattern_to_document, validate


@dataclass(frozen=True)
class Fixture:
    name: str
    pattern: StoragePattern
    x: int
    t: int
    capacity: str            # exact, as "p/q"
    expect: dict             # extra facts pinned by tests and fixture files


def _fx(name, n, sets, capacity, expect, x=0, t=1):
    return Fixture(
        name=name,
        pattern=validate(n, sets),
        x=x,
        t=t,
        capacity=capacity,
        expect=expect,
    )


FIXTURES = {
    f.name: f
    for f in [
        # One server turns out to be redundant: the best scheme never
        # contacts it, and the bounds close at 1/3.
        _fx(
            "redundant_server",
            4,
            [(2, (1, 2, 4)), (2, (1, 2, 3)), (2, (1, 4)), (2, (3, 4))],
            "1/3",
            {
                "rho": [3, 3, 2, 2],
                "rho_min": 2,
                "lower_witness": [1, 3, 4],
                "redundant": [2],
            },
        ),
        # Uniformly 3-replicated with no exact cover, yet the bounds meet.
        _fx(
            "triple_no_cover",
            4,
            [(1, (1, 2, 4)), (1, (1, 2, 3)), (1, (1, 3, 4))],
            "1/2",
            {"b_cover": None, "two_matching": 4},
        ),
        # Asymmetric 3-replication across five servers.
        _fx(
            "skewed_triples",
            5,
            [(1, (1, 3, 4)), (1, (3, 4, 5)), (1, (2, 3, 5))],
            "2/5",
            {"b_cover": None, "two_matching": 5},
        ),
        # One set is over-replicated; the extra copies are pure redundancy.
        _fx(
            "overreplicated_set",
            5,
            [(1, (1, 3, 4)), (1, (1, 3, 4, 5)), (1, (2, 3, 5))],
            "2/5",
            {"truncates_to": [1, 3, 4]},
        ),
        # Dropping the two fringe servers lifts the rate from 3/5 to 2/3.
        _fx(
            "redundant_servers_pair",
            5,
            [(1, (1, 2, 3, 4)), (1, (2, 3, 4, 5))],
            "2/3",
            {"lower_witness": [2, 3, 4], "direct_rate": "3/5"},
        ),
        # Mixed 2-/3-replication: the composite scheme downloads 7 symbols
        # for 2 decoded ones.
        _fx(
            "mixed_light_heavy",
            5,
            [(1, (1, 2, 3)), (1, (2, 3, 4)), (1, (1, 3, 5)), (1, (2, 4))],
            "2/7",
            {"composite_download": 7, "stable_set": [], "two_matching": 3},
        ),
        # Eight servers, mixed replication; the optimal stable set is
        # nonempty and the composite scheme downloads 9 symbols.
        _fx(
            "eight_server_chain",
            8,
            [
                (1, (1, 2, 3)),
                (1, (1, 3, 4)),
                (1, (4, 5, 7)),
                (1, (4, 6, 7)),
                (1, (7, 8)),
            ],
            "2/9",
            {
                "composite_download": 9,
                "stable_set": [5, 6],
                "two_matching": 5,
                "heavy": [1, 2, 3, 4, 5, 6],
                "light": [7, 8],
            },
        ),
    ]
}


def fixture_document(fixture: Fixture) -> dict:
    return {
        "name": fixture.name,
        "pattern": pattern_to_document(fixture.pattern, fixture.x, fixture.t),
        "expected": {"capacity": fixture.capacity, **fixture.expect},
    }


def regenerate(directory) -> list[Path]:
    """Write every fixture as <name>.json under ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for fixture in FIXTURES.values():
        path = directory / f"{fixture.name}.json"
        path.write_text(
            json.dumps(fixture_document(fixture), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        written.append(path)
    return written
