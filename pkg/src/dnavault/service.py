"""HTTP/1.1 REST facade over the storage contract.

Endpoints (JSON responses unless noted):

    POST /files                      raw body; headers X-Owner, optional X-Key -> 201 receipt
    GET  /files/{hash}               header X-Requester, optional X-Key -> 200 raw bytes
    POST /files/{hash}/permissions   JSON {"action": "grant"|"revoke", "grantee": ...}; X-Owner
    GET  /chain                      {"height", "tip_hash", "valid", ["failure_height"]}
    GET  /chain/blocks/{i}           canonical block JSON
    GET  /nodes                      node states plus a redundancy audit
    POST /nodes/{id}/fail            mark a node offline
    POST /nodes/{id}/restore         bring it back

Identity is carried in plain headers; there is no authentication layer.
All mutations funnel through one lock (single writer); reads run
concurrently against the current snapshot.
"""

from __future__ import annotations

import json
import logging
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from . import ledger
from .config import ServiceConfig
from .contract import StorageContract
from .errors import (
    BeadUnavailable,
    DecodeFailed,
    DuplicateFile,
    EmptyInput,
    InsufficientNodes,
    IntegrityMismatch,
    NotOwner,
    PermissionDenied,
    StorageError,
    UnknownFile,
    UnknownNode,
)
from .network import Cluster
from .synthesis import load_bead

log = logging.getLogger(__name__)

ERROR_STATUS = {
    EmptyInput: 400,
    DuplicateFile: 409,
    InsufficientNodes: 503,
    UnknownFile: 404,
    PermissionDenied: 403,
    NotOwner: 403,
    BeadUnavailable: 503,
    DecodeFailed: 500,
    IntegrityMismatch: 500,
    UnknownNode: 404,
}


def status_for(exc: Exception) -> int:
    for cls, status in ERROR_STATUS.items():
        if isinstance(exc, cls):
            return status
    if isinstance(exc, ValueError):
        return 400
    return 500


class StorageService:
    """Contract engine bound to a state directory, shared by HTTP and CLI."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.cluster = Cluster.from_topology(config.topology)
        chain_path = config.state_dir / "chain.jsonl"
        chain = ledger.load_chain(chain_path) if chain_path.exists() else None
        self.contract = StorageContract(
            cluster=self.cluster,
            validators=config.validator_objects(),
            defaults=config.store,
            chain=chain,
            state_dir=config.state_dir,
        )
        self._write_lock = threading.Lock()
        self._rehydrate_beads()

    def _rehydrate_beads(self) -> None:
        """Re-install persisted bead content per the ledger's placement map."""
        beads_dir = self.config.state_dir / "beads"
        cache = {}
        for record in ledger.fold_records(self.contract.chain).values():
            for bead_id, node_id in record.bead_locations:
                if node_id not in self.cluster.nodes:
                    continue  # topology shrank since upload; replica is gone
                if bead_id not in cache:
                    bead_path = beads_dir / bead_id
                    if not bead_path.exists():
                        continue
                    cache[bead_id] = load_bead(beads_dir, bead_id)
                self.cluster.install_bead(node_id, cache[bead_id])

    # --- operations (raise StorageError subclasses on failure) ---

    def upload(self, owner: str, body: bytes, key: str | None = None) -> dict:
        with self._write_lock:
            params = self.contract.with_key(key) if key else None
            receipt = self.contract.upload_file(owner, body, params)
        return receipt.to_dict()

    def download(self, requester: str, file_hash: str, key: str | None = None) -> bytes:
        return self.contract.download_file(requester, file_hash, key)

    def change_permission(self, owner: str, file_hash: str, action: str, grantee: str) -> int:
        if action not in ("grant", "revoke"):
            raise ValueError(f"action must be 'grant' or 'revoke', not {action!r}")
        if not grantee:
            raise ValueError("grantee must be non-empty")
        with self._write_lock:
            if action == "grant":
                return self.contract.grant_permission(owner, file_hash, grantee)
            return self.contract.revoke_permission(owner, file_hash, grantee)

    def chain_info(self) -> dict:
        chain = self.contract.chain
        ok, height = ledger.verify_chain(chain)
        info = {"height": chain[-1].index, "tip_hash": chain[-1].block_hash, "valid": ok}
        if not ok:
            info["failure_height"] = height
        return info

    def block_at(self, index: int) -> dict | None:
        chain = self.contract.chain
        if not 0 <= index < len(chain):
            return None
        return chain[index].to_dict()

    def nodes_info(self) -> dict:
        report = self.cluster.audit_redundancy(self.contract.chain)
        return {
            "nodes": [
                {"node_id": n.node_id, "online": n.online, "beads": len(n.beads)}
                for n in self.cluster.nodes.values()
            ],
            "audit": {
                "placements": len(report.entries),
                "under_replicated": [
                    {
                        "file_hash": e.file_hash,
                        "bead_id": e.bead_id,
                        "expected": e.replicas_expected,
                        "live": e.replicas_live,
                    }
                    for e in report.flagged
                ],
            },
        }

    def set_node(self, node_id: str, online: bool) -> dict:
        with self._write_lock:
            node = self.cluster.restore_node(node_id) if online else self.cluster.fail_node(node_id)
            # fault state survives restarts and separate CLI invocations
            for entry in self.config.topology:
                if entry["node_id"] == node_id:
                    entry["online"] = node.online
            self.config.save()
        return {"node_id": node.node_id, "online": node.online}


_FILE_ROUTE = re.compile(r"^/files/([0-9a-fA-F]{64})$")
_PERM_ROUTE = re.compile(r"^/files/([0-9a-fA-F]{64})/permissions$")
_BLOCK_ROUTE = re.compile(r"^/chain/blocks/(\d+)$")
_NODE_ROUTE = re.compile(r"^/nodes/([^/]+)/(fail|restore)$")


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "dnavault"

    @property
    def service(self) -> StorageService:
        return self.server.service  # type: ignore[attr-defined]

    def log_message(self, fmt, *args):  # route request logs away from stderr
        log.debug("%s %s", self.address_string(), fmt % args)

    # --- response helpers ---

    def _send_json(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_bytes(self, payload: bytes) -> None:
        self.send_response(200)
        self.send_header("Content-Type", "application/octet-stream")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def _send_error(self, exc: Exception) -> None:
        self._send_json(status_for(exc), {"error": type(exc).__name__, "detail": str(exc)})

    def _body(self) -> bytes:
        length = int(self.headers.get("Content-Length") or 0)
        return self.rfile.read(length) if length else b""

    # --- dispatch ---

    def do_GET(self):
        try:
            match = _FILE_ROUTE.match(self.path)
            if match:
                requester = self.headers.get("X-Requester", "")
                key = self.headers.get("X-Key") or None
                data = self.service.download(requester, match.group(1).lower(), key)
                self._send_bytes(data)
                return
            if self.path == "/chain":
                self._send_json(200, self.service.chain_info())
                return
            match = _BLOCK_ROUTE.match(self.path)
            if match:
                block = self.service.block_at(int(match.group(1)))
                if block is None:
                    self._send_json(404, {"error": "NotFound", "detail": f"no block at {match.group(1)}"})
                else:
                    self._send_json(200, block)
                return
            if self.path == "/nodes":
                self._send_json(200, self.service.nodes_info())
                return
            self._send_json(404, {"error": "NotFound", "detail": self.path})
        except Exception as exc:  # noqa: BLE001 - every failure becomes a status
            if not isinstance(exc, (StorageError, ValueError)):
                log.exception("unhandled error on GET %s", self.path)
            self._send_error(exc)

    def do_POST(self):
        try:
            if self.path == "/files":
                body = self._body()
                if not body:
                    raise EmptyInput("request body is empty")
                owner = self.headers.get("X-Owner", "")
                key = self.headers.get("X-Key") or None
                receipt = self.service.upload(owner, body, key)
                self._send_json(201, receipt)
                return
            match = _PERM_ROUTE.match(self.path)
            if match:
                payload = json.loads(self._body() or b"{}")
                owner = self.headers.get("X-Owner", "")
                height = self.service.change_permission(
                    owner, match.group(1).lower(), payload.get("action", ""), payload.get("grantee", "")
                )
                self._send_json(200, {"block": height})
                return
            match = _NODE_ROUTE.match(self.path)
            if match:
                node_id, action = match.groups()
                self._send_json(200, self.service.set_node(node_id, action == "restore"))
                return
            self._send_json(404, {"error": "NotFound", "detail": self.path})
        except json.JSONDecodeError as exc:
            self._send_json(400, {"error": "BadRequest", "detail": f"invalid JSON body: {exc}"})
        except Exception as exc:  # noqa: BLE001
            if not isinstance(exc, (StorageError, ValueError)):
                log.exception("unhandled error on POST %s", self.path)
            self._send_error(exc)


def make_server(config: ServiceConfig) -> ThreadingHTTPServer:
    """Build (but do not start) the HTTP server; port 0 picks a free port."""
    service = StorageService(config)
    server = ThreadingHTTPServer((config.host, config.port), _Handler)
    server.service = service  # type: ignore[attr-defined]
    return server


def serve(config: ServiceConfig) -> None:
    server = make_server(config)
    host, port = server.server_address[:2]
    print(f"dnavault service on http://{host}:{port} (state: {config.state_dir})", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
