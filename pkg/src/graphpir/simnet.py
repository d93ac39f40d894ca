"""In-process multi-server sessions.

One actor per server, each constructed from nothing but its own storage;
the user actor sends each server its query and collects the answers. The
actors exchange immutable values only, so the serial scheduler and the
thread-pool scheduler produce bit-identical reports.
"""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .errors import FormatError, PreconditionError
from .field import PrimeField
from .scheme import (
    Demand,
    MessageStore,
    Query,
    SeededTape,
    ServerStorage,
    answer,
    build_instance,
    composite_retrieve,
    decode,
    decode_compute,
    encode_storage,
    evaluate_plaintext,
    gen_queries,
)
from .storage import StoragePattern, pattern_from_document, pattern_to_document

MODES = ("retrieve", "compute", "composite")


@dataclass(frozen=True)
class SessionConfig:
    pattern: StoragePattern
    x: int
    t: int
    q: int | None
    seed: int
    mode: str
    mu: int | None = None
    kappa: int | None = None
    lambdas: tuple[tuple[int, ...], ...] | None = None

    @classmethod
    def from_document(cls, doc: dict, path: str = "$") -> SessionConfig:
        if not isinstance(doc, dict):
            raise FormatError(path, "expected an object")
        if "pattern" not in doc:
            raise FormatError(f"{path}.pattern", "missing required field")
        pattern, x, t, q = pattern_from_document(doc["pattern"], f"{path}.pattern")
        seed = doc.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise FormatError(f"{path}.seed", "expected an integer")
        mode = doc.get("mode", "retrieve")
        if mode not in MODES:
            raise FormatError(f"{path}.mode", f"expected one of {MODES}, got {mode!r}")
        demand = doc.get("demand", {})
        if not isinstance(demand, dict):
            raise FormatError(f"{path}.demand", "expected an object")
        mu = kappa = None
        lambdas = None
        if mode in ("retrieve", "composite"):
            mu = demand.get("m", 1)
            kappa = demand.get("k", 1)
            for key, value in (("m", mu), ("k", kappa)):
                if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                    raise FormatError(f"{path}.demand.{key}", "expected a positive integer")
        else:
            raw = demand.get("lambda")
            if raw is None:
                raise FormatError(f"{path}.demand.lambda", "missing coefficient vectors")
            if not isinstance(raw, list):
                raise FormatError(f"{path}.demand.lambda", "expected an array of arrays")
            rows = []
            for i, row in enumerate(raw):
                if not isinstance(row, list) or not all(
                    isinstance(v, int) and not isinstance(v, bool) for v in row
                ):
                    raise FormatError(
                        f"{path}.demand.lambda[{i}]", "expected an array of integers"
                    )
                rows.append(tuple(row))
            lambdas = tuple(rows)
        return cls(
            pattern=pattern, x=x, t=t, q=q, seed=seed, mode=mode,
            mu=mu, kappa=kappa, lambdas=lambdas,
        )


class ServerActor:
    """A server: holds exactly its own storage, answers exactly its own
    queries. Nothing else ever reaches it."""

    def __init__(self, storage: ServerStorage):
        self._storage = storage

    @property
    def server_id(self) -> int:
        return self._storage.server

    def handle(self, query: Query):
        return answer(self._storage, query)


@dataclass
class SessionReport:
    mode: str
    seed: int
    q: int
    decoded: list[int]
    expected: list[int]
    matched: bool
    downloads: dict[int, int]
    total_download: int
    rate: Fraction
    transcript: dict
    transcript_hash: str
    elapsed_ms: float
    extras: dict = dc_field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "mode": self.mode,
            "seed": self.seed,
            "q": self.q,
            "decoded": self.decoded,
            "expected": self.expected,
            "matched": self.matched,
            "downloads": {str(k): v for k, v in sorted(self.downloads.items())},
            "total_download": self.total_download,
            "rate": str(self.rate),
            "transcript": self.transcript,
            "transcript_hash": self.transcript_hash,
            "elapsed_ms": self.elapsed_ms,
            **self.extras,
        }


def _transcript_hash(payload: dict) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _serialize_queries(queries) -> dict:
    return {
        str(q.server): {
            f"{m},{ell}": [e.value for e in vec]
            for (m, ell), vec in sorted(q.vectors.items())
        }
        for q in queries
    }


def run_session(config: SessionConfig, scheduler: str = "serial") -> SessionReport:
    """Execute one full session and report what was downloaded and decoded.

    ``scheduler`` picks how the per-server answer calls run: "serial" or
    "threads". Both must produce identical reports; the answers are pure
    functions of (storage, query).
    """
    start = time.perf_counter()
    if config.mode == "composite":
        report = _run_composite(config)
    else:
        report = _run_base(config, scheduler)
    report.elapsed_ms = (time.perf_counter() - start) * 1000.0
    return report


def _schedule(actors, queries, scheduler: str):
    jobs = list(zip(actors, queries))
    if scheduler == "threads":
        with ThreadPoolExecutor(max_workers=max(1, len(jobs))) as pool:
            return list(pool.map(lambda job: job[0].handle(job[1]), jobs))
    if scheduler == "serial":
        return [actor.handle(query) for actor, query in jobs]
    raise PreconditionError(f"unknown scheduler {scheduler!r}")


def _run_base(config: SessionConfig, scheduler: str) -> SessionReport:
    compute = config.mode == "compute"
    instance = build_instance(
        config.pattern, config.x, config.t, q=config.q, compute_ready=compute
    )
    tape = SeededTape(instance.field.q, config.seed, label="session")
    store = MessageStore.random(instance, tape)
    if compute:
        demand = Demand.compute(config.lambdas)
    else:
        demand = Demand.retrieve(config.mu, config.kappa)
    storages = encode_storage(instance, store, tape)
    actors = [ServerActor(s) for s in storages]
    queries = gen_queries(instance, demand, tape)
    answers = _schedule(actors, queries, scheduler)
    if compute:
        decoded_elems = (decode_compute(instance, answers),)
    else:
        decoded_elems = decode(instance, answers, demand)
    expected = evaluate_plaintext(store, demand, instance.pattern)
    expected_elems = expected if isinstance(expected, tuple) else (expected,)
    decoded = [e.value for e in decoded_elems]
    expected_values = [e.value for e in expected_elems]
    downloads = {n: 1 for n in instance.pattern.server_ids()}
    payload = {
        "mode": config.mode,
        "seed": config.seed,
        "q": instance.field.q,
        "pattern": pattern_to_document(config.pattern, config.x, config.t),
        "demand": {"m": config.mu, "k": config.kappa}
        if not compute
        else {"lambda": [list(v) for v in config.lambdas]},
        "storage": {
            str(s.server): {
                f"{m},{ell}": [e.value for e in vec]
                for (m, ell), vec in sorted(s.shares.items())
            }
            for s in storages
        },
        "queries": _serialize_queries(queries),
        "answers": [a.value for a in answers],
        "decoded": decoded,
    }
    return SessionReport(
        mode=config.mode,
        seed=config.seed,
        q=instance.field.q,
        decoded=decoded,
        expected=expected_values,
        matched=decoded == expected_values,
        downloads=downloads,
        total_download=instance.n_servers,
        rate=Fraction(len(decoded), instance.n_servers),
        transcript=payload,
        transcript_hash=_transcript_hash(payload),
        elapsed_ms=0.0,
        extras={"block_length": instance.block_length},
    )


def _run_composite(config: SessionConfig) -> SessionReport:
    transcript = composite_retrieve(
        config.pattern,
        config.t,
        Demand.retrieve(config.mu, config.kappa),
        config.seed,
        q=config.q,
    )
    decoded = [e.value for e in transcript.decoded]
    expected = [e.value for e in transcript.expected]
    payload = {
        "mode": "composite",
        "seed": config.seed,
        "q": transcript.q,
        "pattern": pattern_to_document(config.pattern, config.x, config.t),
        "demand": {"m": config.mu, "k": config.kappa},
        "stable_set": list(transcript.stable_set),
        "answers": {str(k): v for k, v in sorted(transcript.answers.items())},
        "decoded": decoded,
    }
    return SessionReport(
        mode="composite",
        seed=config.seed,
        q=transcript.q,
        decoded=decoded,
        expected=expected,
        matched=decoded == expected,
        downloads=transcript.downloads,
        total_download=transcript.total_download,
        rate=Fraction(len(decoded), transcript.total_download),
        transcript=payload,
        transcript_hash=_transcript_hash(payload),
        elapsed_ms=0.0,
        extras={
            "stable_set": list(transcript.stable_set),
            "outer_servers": list(transcript.outer_servers),
            "inner_servers": list(transcript.inner_servers),
        },
    )


# -- actor wire formats --------------------------------------------------------

def storage_to_doc(storage: ServerStorage) -> dict:
    return {
        "server": storage.server,
        "q": storage.field.q,
        "shares": {
            f"{m},{ell}": [e.value for e in vec]
            for (m, ell), vec in sorted(storage.shares.items())
        },
    }


def storage_from_doc(doc: dict) -> ServerStorage:
    fld = PrimeField(doc["q"])
    shares = {}
    for key, values in doc["shares"].items():
        m, ell = (int(p) for p in key.split(","))
        shares[(m, ell)] = tuple(fld.element(v) for v in values)
    return ServerStorage(server=doc["server"], field=fld, shares=shares)


def query_to_doc(query: Query) -> dict:
    return {
        "server": query.server,
        "q": query.field.q,
        "vectors": {
            f"{m},{ell}": [e.value for e in vec]
            for (m, ell), vec in sorted(query.vectors.items())
        },
    }


def query_from_doc(doc: dict) -> Query:
    fld = PrimeField(doc["q"])
    vectors = {}
    for key, values in doc["vectors"].items():
        m, ell = (int(p) for p in key.split(","))
        vectors[(m, ell)] = tuple(fld.element(v) for v in values)
    return Query(server=doc["server"], field=fld, vectors=vectors)
