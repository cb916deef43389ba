"""Command-line interface.

Every data subcommand is a thin client of the corresponding REST endpoint:
point it at a running service with ``--url`` and it speaks HTTP; without
``--url`` it opens the state directory (``--state``, else $ETRUS_STATE_DIR,
else ./state) and calls the very same service operations in-process.

Exit codes are stable per error class so scripts can branch on them:

    0  success                      7  InsufficientNodes
    1  unexpected failure           8  BeadUnavailable
    2  usage / bad input            9  DecodeFailed
    3  DuplicateFile               10  IntegrityMismatch
    4  UnknownFile                 11  UnknownNode
    5  PermissionDenied            12  chain verification failed
    6  NotOwner                    13  connection error
"""

from __future__ import annotations

import argparse
import json
import math
import random
import sys
import time
import urllib.error
import urllib.request
from pathlib import Path

from . import ledger
from .config import ServiceConfig, resolve_state_dir
from .contract import StorageContract, StoreParams
from .errors import StorageError
from .ledger import Validator
from .network import Cluster
from .service import StorageService, serve
from .synthesis import ErrorModel

EXIT_CODES = {
    "EmptyInput": 2,
    "ValueError": 2,
    "BadRequest": 2,
    "DuplicateFile": 3,
    "UnknownFile": 4,
    "NotFound": 4,
    "PermissionDenied": 5,
    "NotOwner": 6,
    "InsufficientNodes": 7,
    "BeadUnavailable": 8,
    "DecodeFailed": 9,
    "IntegrityMismatch": 10,
    "UnknownNode": 11,
}
EXIT_CHAIN_INVALID = 12
EXIT_CONNECTION = 13


class CliFailure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _fail_for(error_name: str, detail: str) -> CliFailure:
    return CliFailure(EXIT_CODES.get(error_name, 1), f"{error_name}: {detail}")


# --- transport-agnostic client -------------------------------------------------


class HttpClient:
    """Talks to a running service over REST."""

    def __init__(self, base_url: str):
        self.base_url = base_url.rstrip("/")

    def _request(self, method: str, path: str, body: bytes | None = None, headers: dict | None = None):
        req = urllib.request.Request(self.base_url + path, data=body, method=method, headers=headers or {})
        try:
            with urllib.request.urlopen(req) as resp:
                return resp.status, resp.read()
        except urllib.error.HTTPError as exc:
            return exc.code, exc.read()
        except urllib.error.URLError as exc:
            raise CliFailure(EXIT_CONNECTION, f"cannot reach {self.base_url}: {exc.reason}") from exc

    def _json_or_fail(self, status: int, body: bytes) -> dict:
        payload = json.loads(body.decode("utf-8"))
        if status >= 400:
            raise _fail_for(payload.get("error", "Error"), payload.get("detail", ""))
        return payload

    def upload(self, owner: str, data: bytes, key: str | None) -> dict:
        headers = {"X-Owner": owner, "Content-Type": "application/octet-stream"}
        if key:
            headers["X-Key"] = key
        return self._json_or_fail(*self._request("POST", "/files", data, headers))

    def download(self, requester: str, file_hash: str, key: str | None) -> bytes:
        headers = {"X-Requester": requester}
        if key:
            headers["X-Key"] = key
        status, body = self._request("GET", f"/files/{file_hash}", headers=headers)
        if status != 200:
            payload = json.loads(body.decode("utf-8"))
            raise _fail_for(payload.get("error", "Error"), payload.get("detail", ""))
        return body

    def change_permission(self, owner: str, file_hash: str, action: str, grantee: str) -> dict:
        body = json.dumps({"action": action, "grantee": grantee}).encode("utf-8")
        headers = {"X-Owner": owner, "Content-Type": "application/json"}
        return self._json_or_fail(*self._request("POST", f"/files/{file_hash}/permissions", body, headers))

    def chain_info(self) -> dict:
        return self._json_or_fail(*self._request("GET", "/chain"))

    def nodes_info(self) -> dict:
        return self._json_or_fail(*self._request("GET", "/nodes"))

    def set_node(self, node_id: str, online: bool) -> dict:
        action = "restore" if online else "fail"
        return self._json_or_fail(*self._request("POST", f"/nodes/{node_id}/{action}"))


class LocalClient:
    """Runs the same operations in-process against a state directory."""

    def __init__(self, state_dir: Path):
        self.service = StorageService(ServiceConfig.load_or_create(state_dir))

    def _wrap(self, fn, *args):
        try:
            return fn(*args)
        except StorageError as exc:
            raise _fail_for(type(exc).__name__, str(exc)) from exc
        except ValueError as exc:
            raise CliFailure(2, str(exc)) from exc

    def upload(self, owner, data, key):
        return self._wrap(self.service.upload, owner, data, key)

    def download(self, requester, file_hash, key):
        return self._wrap(self.service.download, requester, file_hash, key)

    def change_permission(self, owner, file_hash, action, grantee):
        return {"block": self._wrap(self.service.change_permission, owner, file_hash, action, grantee)}

    def chain_info(self):
        return self.service.chain_info()

    def nodes_info(self):
        return self.service.nodes_info()

    def set_node(self, node_id, online):
        return self._wrap(self.service.set_node, node_id, online)


def _client(args) -> HttpClient | LocalClient:
    if args.url:
        return HttpClient(args.url)
    return LocalClient(resolve_state_dir(args.state))


def _emit(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=True))


# --- subcommand implementations ---------------------------------------------------


def _cmd_serve(args) -> int:
    config = ServiceConfig.load_or_create(resolve_state_dir(args.state), host=args.host, port=args.port)
    serve(config)
    return 0


def _cmd_upload(args) -> int:
    data = Path(args.path).read_bytes()
    receipt = _client(args).upload(args.owner, data, args.key)
    _emit(receipt)
    return 0


def _cmd_download(args) -> int:
    data = _client(args).download(args.requester, args.hash, args.key)
    out = Path(args.out)
    out.write_bytes(data)
    _emit({"file_hash": args.hash, "bytes": len(data), "out": str(out)})
    return 0


def _cmd_perms(args) -> int:
    result = _client(args).change_permission(args.owner, args.hash, args.action, args.user)
    _emit(result)
    return 0


def _cmd_chain_show(args) -> int:
    _emit(_client(args).chain_info())
    return 0


def _cmd_chain_verify(args) -> int:
    if args.url:
        info = HttpClient(args.url).chain_info()
        if info["valid"]:
            print(f"chain OK height={info['height']} tip={info['tip_hash']}")
            return 0
        print(f"chain INVALID at height {info.get('failure_height')}")
        return EXIT_CHAIN_INVALID
    chain_path = resolve_state_dir(args.state) / "chain.jsonl"
    ok, height = ledger.verify_chain_file(chain_path)
    if ok:
        blocks = ledger.load_chain(chain_path)
        print(f"chain OK height={blocks[-1].index} tip={blocks[-1].block_hash}")
        return 0
    print(f"chain INVALID at height {height}")
    return EXIT_CHAIN_INVALID


def _cmd_nodes_list(args) -> int:
    _emit(_client(args).nodes_info())
    return 0


def _cmd_nodes_set(args, online: bool) -> int:
    _emit(_client(args).set_node(args.node_id, online))
    return 0


def _cmd_bench(args) -> int:
    """One seeded in-memory roundtrip; prints a single machine-readable line."""
    node_count = max(args.replication, 6)
    cluster = Cluster([f"bench-{i:02d}" for i in range(node_count)])
    params = StoreParams(
        replication=args.replication,
        coverage=args.coverage,
        error_model=ErrorModel(substitution_rate=args.error_rate, rng_seed=args.seed),
    )
    contract = StorageContract(cluster, [Validator("bench", 1)], defaults=params)
    data = random.Random(args.seed).randbytes(args.size)

    start = time.perf_counter()
    ok = True
    error = None
    receipt = None
    try:
        receipt = contract.upload_file("bench", data, params)
        ok = contract.download_file("bench", receipt.file_hash) == data
    except StorageError as exc:
        ok = False
        error = type(exc).__name__
    elapsed = time.perf_counter() - start

    k = math.ceil(args.size / params.segment_size)
    result = {
        "ok": ok,
        "elapsed_s": round(elapsed, 3),
        "droplets": max(k, math.ceil(k * params.overhead)),
        "size": args.size,
    }
    if error:
        result["error"] = error
    _emit(result)
    if ok:
        return 0
    return EXIT_CODES.get(error or "", EXIT_CODES["DecodeFailed"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dnavault", description="Simulated DNA-bead file storage")
    parser.add_argument("--state", help="state directory (default: $ETRUS_STATE_DIR or ./state)")
    parser.add_argument("--url", help="talk to a running service instead of local state")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the REST service")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.set_defaults(fn=_cmd_serve)

    p = sub.add_parser("upload", help="store a file")
    p.add_argument("path")
    p.add_argument("--owner", required=True)
    p.add_argument("--key", default=None, help="optional encryption key sequence (A/C/G/T)")
    p.set_defaults(fn=_cmd_upload)

    p = sub.add_parser("download", help="retrieve a file by content hash")
    p.add_argument("hash")
    p.add_argument("--as", dest="requester", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--key", default=None)
    p.set_defaults(fn=_cmd_download)

    p = sub.add_parser("perms", help="manage read permissions")
    perm_sub = p.add_subparsers(dest="action", required=True)
    for action in ("grant", "revoke"):
        pa = perm_sub.add_parser(action)
        pa.add_argument("hash")
        pa.add_argument("user")
        pa.add_argument("--owner", required=True)
        pa.set_defaults(fn=_cmd_perms, action=action)

    p = sub.add_parser("chain", help="inspect the ledger")
    chain_sub = p.add_subparsers(dest="chain_cmd", required=True)
    chain_sub.add_parser("show").set_defaults(fn=_cmd_chain_show)
    chain_sub.add_parser("verify").set_defaults(fn=_cmd_chain_verify)

    p = sub.add_parser("nodes", help="inspect or fault-inject storage nodes")
    nodes_sub = p.add_subparsers(dest="nodes_cmd", required=True)
    nodes_sub.add_parser("list").set_defaults(fn=_cmd_nodes_list)
    pf = nodes_sub.add_parser("fail")
    pf.add_argument("node_id")
    pf.set_defaults(fn=lambda a: _cmd_nodes_set(a, online=False))
    pr = nodes_sub.add_parser("restore")
    pr.add_argument("node_id")
    pr.set_defaults(fn=lambda a: _cmd_nodes_set(a, online=True))

    p = sub.add_parser("bench", help="benchmark harnesses")
    bench_sub = p.add_subparsers(dest="bench_cmd", required=True)
    pb = bench_sub.add_parser("roundtrip", help="seeded in-memory upload/download")
    pb.add_argument("--size", type=int, default=65536)
    pb.add_argument("--error-rate", type=float, default=0.0, dest="error_rate")
    pb.add_argument("--coverage", type=int, default=5)
    pb.add_argument("--replication", type=int, default=3)
    pb.add_argument("--seed", type=int, default=0)
    pb.set_defaults(fn=_cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except CliFailure as exc:
        print(str(exc), file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(str(exc), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
