from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path

import pytest

from phl.client import PodClient, WsgiTransport
from phl.server import PhlServer
from phl.store import PodStore

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

FROZEN = datetime(2026, 8, 25, 12, 0, 0, tzinfo=timezone.utc)

TOKENS = {
    "bob-token": "https://bob.uthsc.edu/profile/card#me",
    "alice-token": "https://alice.uthsc.edu/profile/card#me",
    "mary-token": "https://mary.uthsc.edu/profile/card#me",
    "clinic-token": "https://clinic.uthsc.edu/profile/card#me",
}


@pytest.fixture
def store(tmp_path) -> PodStore:
    return PodStore(tmp_path / "pods", clock=lambda: FROZEN)


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def seeded_store(store) -> PodStore:
    from phl.cli import seed_world

    seed_world(store, FIXTURES / "seed")
    return store


class Web:
    """An in-process server plus ready-made clients for each actor."""

    def __init__(self, store: PodStore):
        self.store = store
        self.server = PhlServer(store, tokens=TOKENS)
        self.transport = WsgiTransport(self.server.wsgi_app)

    def client(self, token=None, origin=None) -> PodClient:
        return PodClient(self.transport, token=token, origin=origin)

    @property
    def bob(self) -> PodClient:
        return self.client("bob-token")

    @property
    def alice(self) -> PodClient:
        return self.client("alice-token")

    @property
    def mary(self) -> PodClient:
        return self.client("mary-token")

    @property
    def clinic(self) -> PodClient:
        return self.client("clinic-token")

    @property
    def anon(self) -> PodClient:
        return self.client(None)


@pytest.fixture
def web(seeded_store) -> Web:
    return Web(seeded_store)


@pytest.fixture
def empty_web(store) -> Web:
    return Web(store)


def write_config(directory: Path, **overrides) -> Path:
    """A config file pointing at a pod tree under the same directory."""
    config = {
        "storage_root": "pods",
        "host": "127.0.0.1",
        "port": 8090,
        "frozen_time": "2026-08-25T12:00:00Z",
        "tokens": dict(TOKENS),
        "recommender": {
            "origin": "https://diabetesSelfManagement.app.com",
            "candidates": str(FIXTURES / "recommender" / "candidates.jsonl"),
            "thresholds": {"walkability": 0.4, "heart_rate": 100},
        },
    }
    config.update(overrides)
    path = directory / "config.json"
    path.write_text(json.dumps(config, indent=2))
    return path
