"""Service configuration and state-directory layout.

A state directory holds everything a service instance needs to come back
after a restart::

    <state>/config.json   host/port, store defaults, topology, validators
    <state>/chain.jsonl   the persisted ledger, one canonical block per line
    <state>/beads/        bead content, one directory per bead

The directory is chosen by, in priority order: an explicit CLI/API value,
the ETRUS_STATE_DIR environment variable, then ``./state``.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .contract import StoreParams
from .ledger import Validator

STATE_DIR_ENV = "ETRUS_STATE_DIR"
DEFAULT_HOST = "127.0.0.1"
DEFAULT_PORT = 8650


def default_topology(node_count: int = 10) -> list[dict]:
    return [{"node_id": f"node-{i:02d}", "online": True} for i in range(node_count)]


def default_validators() -> list[dict]:
    return [
        {"id": "validator-a", "stake": 5},
        {"id": "validator-b", "stake": 3},
        {"id": "validator-c", "stake": 2},
    ]


def resolve_state_dir(explicit: str | os.PathLike | None = None) -> Path:
    if explicit:
        return Path(explicit)
    env = os.environ.get(STATE_DIR_ENV)
    if env:
        return Path(env)
    return Path("state")


@dataclass
class ServiceConfig:
    state_dir: Path
    host: str = DEFAULT_HOST
    port: int = DEFAULT_PORT
    store: StoreParams = field(default_factory=StoreParams)
    topology: list[dict] = field(default_factory=default_topology)
    validators: list[dict] = field(default_factory=default_validators)

    def validator_objects(self) -> list[Validator]:
        return [Validator(v["id"], v["stake"]) for v in self.validators]

    def to_dict(self) -> dict:
        return {
            "host": self.host,
            "port": self.port,
            "store": self.store.to_dict(),
            "topology": self.topology,
            "validators": self.validators,
        }

    def save(self) -> Path:
        path = self.state_dir / "config.json"
        self.state_dir.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path

    @classmethod
    def load_or_create(cls, state_dir: Path | str, **overrides) -> ServiceConfig:
        """Read ``config.json`` if present, else write one with defaults.

        ``overrides`` (host, port, store, topology, validators) replace the
        loaded values but are not persisted unless the file is new.
        """
        state_dir = Path(state_dir)
        path = state_dir / "config.json"
        if path.exists():
            raw = json.loads(path.read_text(encoding="utf-8"))
            config = cls(
                state_dir=state_dir,
                host=raw.get("host", DEFAULT_HOST),
                port=raw.get("port", DEFAULT_PORT),
                store=StoreParams.from_dict(raw.get("store", {})),
                topology=raw.get("topology", default_topology()),
                validators=raw.get("validators", default_validators()),
            )
            for name, value in overrides.items():
                if value is not None:
                    setattr(config, name, value)
            return config
        config = cls(state_dir=state_dir)
        for name, value in overrides.items():
            if value is not None:
                setattr(config, name, value)
        config.save()
        return config
