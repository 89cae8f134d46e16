"""External model transport: line-delimited JSON over child stdio, or HTTP.

Frame format, one object per line:
    request   {"id": ..., "input": ..., "mode": "all|step|token", "stop_hint": "FULL|LINE|TOKEN"}
    response  {"id": ..., "output": ...}         (or {"id": ..., "error": ...})

A serving adapter writes one handshake line first:
    {"hello": "symchain/1", "modes": ["all", "step", "token"]}

The same request/response bodies travel over HTTP POST /generate.  Channel
failures (dead process, unparseable frame, id mismatch) raise TransportError;
a structured error response raises ProtocolError, which scores the instance
malformed instead of aborting the run.
"""

from __future__ import annotations

import json
import shlex
import subprocess
import urllib.error
import urllib.request
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import IO

from .errors import ProtocolError, SymchainError, TransportError
from .ports import ModelPort, ModelRequest, ModelResponse, StopHint
from .rendering import OutputStrategy

PROTOCOL_VERSION = "symchain/1"
ALL_MODES = [s.value for s in OutputStrategy]


def handshake_obj() -> dict:
    return {"hello": PROTOCOL_VERSION, "modes": ALL_MODES}


def request_to_obj(req: ModelRequest) -> dict:
    return {
        "id": req.id,
        "input": req.input,
        "mode": req.mode.value,
        "stop_hint": req.stop_hint.value,
    }


def request_from_obj(obj: dict) -> ModelRequest:
    try:
        return ModelRequest(
            id=str(obj["id"]),
            input=str(obj["input"]),
            mode=OutputStrategy(obj["mode"]),
            stop_hint=StopHint(obj["stop_hint"]),
        )
    except (KeyError, ValueError) as exc:
        raise ProtocolError(f"bad request frame: {exc}") from exc


def _decode_response(line: str, req: ModelRequest) -> ModelResponse:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise TransportError(f"unparseable response frame: {line[:80]!r}") from exc
    if not isinstance(obj, dict):
        raise TransportError(f"response frame is not an object: {line[:80]!r}")
    if "error" in obj:
        raise ProtocolError(str(obj["error"]))
    if obj.get("id") != req.id:
        raise TransportError(f"response id {obj.get('id')!r} does not match request {req.id!r}")
    output = obj.get("output")
    if not isinstance(output, str):
        raise TransportError("response frame lacks a string 'output'")
    return ModelResponse(id=req.id, output=output)


class SubprocessPort:
    """Spawns `cmd` and speaks the stdio frame protocol with it."""

    def __init__(self, cmd: str | list[str]):
        argv = shlex.split(cmd) if isinstance(cmd, str) else cmd
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise TransportError(f"cannot start model command {argv!r}: {exc}") from exc
        greeting = self._proc.stdout.readline()
        if not greeting:
            raise TransportError("model process closed its stream before the handshake")
        try:
            hello = json.loads(greeting)
        except json.JSONDecodeError as exc:
            raise TransportError(f"bad handshake line: {greeting[:80]!r}") from exc
        if not isinstance(hello, dict) or not str(hello.get("hello", "")).startswith("symchain/"):
            raise TransportError(f"unexpected handshake: {hello!r}")
        self.modes = hello.get("modes", ALL_MODES)

    def request(self, req: ModelRequest) -> ModelResponse:
        if self._proc.poll() is not None:
            raise TransportError("model process has exited")
        try:
            self._proc.stdin.write(json.dumps(request_to_obj(req)) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise TransportError(f"model process pipe failed: {exc}") from exc
        line = self._proc.stdout.readline()
        if not line:
            raise TransportError("model process closed its stream mid-session")
        return _decode_response(line, req)

    def close(self) -> None:
        if self._proc.poll() is None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()


class HttpPort:
    """POSTs request bodies to `<base_url>/generate`."""

    def __init__(self, base_url: str):
        self.base_url = base_url.rstrip("/")

    def request(self, req: ModelRequest) -> ModelResponse:
        body = json.dumps(request_to_obj(req)).encode("utf-8")
        http_req = urllib.request.Request(
            self.base_url + "/generate",
            data=body,
            headers={"Content-Type": "application/json"},
        )
        try:
            with urllib.request.urlopen(http_req) as resp:
                line = resp.read().decode("utf-8")
        except (urllib.error.URLError, OSError) as exc:
            raise TransportError(f"HTTP request failed: {exc}") from exc
        return _decode_response(line, req)

    def close(self) -> None:
        pass


# ----------------------------------------------------------------- serving ---

def serve_stdio(port: ModelPort, stdin: IO[str], stdout: IO[str]) -> None:
    """Answer frames until EOF.  Never drops a request silently: decode or
    handler problems come back as structured error responses."""
    stdout.write(json.dumps(handshake_obj()) + "\n")
    stdout.flush()
    for raw in stdin:
        raw = raw.strip()
        if not raw:
            continue
        stdout.write(json.dumps(_handle_frame(port, raw)) + "\n")
        stdout.flush()


def _handle_frame(port: ModelPort, raw: str) -> dict:
    req_id = None
    try:
        obj = json.loads(raw)
        if isinstance(obj, dict):
            req_id = obj.get("id")
        req = request_from_obj(obj)
        resp = port.request(req)
        return {"id": resp.id, "output": resp.output}
    except json.JSONDecodeError as exc:
        return {"id": req_id, "error": f"bad frame: {exc.msg}"}
    except SymchainError as exc:
        return {"id": req_id, "error": str(exc)}


def serve_http(port: ModelPort, tcp_port: int) -> ThreadingHTTPServer:
    """Serve POST /generate (and GET /hello) until shutdown() is called."""

    class Handler(BaseHTTPRequestHandler):
        def log_message(self, fmt, *args):  # stay quiet on stdio
            pass

        def _send(self, code: int, obj: dict) -> None:
            body = json.dumps(obj).encode("utf-8")
            self.send_response(code)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_GET(self):
            if self.path in ("/", "/hello"):
                self._send(200, handshake_obj())
            else:
                self._send(404, {"error": "unknown path"})

        def do_POST(self):
            if self.path != "/generate":
                self._send(404, {"error": "unknown path"})
                return
            length = int(self.headers.get("Content-Length", "0"))
            raw = self.rfile.read(length).decode("utf-8")
            self._send(200, _handle_frame(port, raw))

    server = ThreadingHTTPServer(("127.0.0.1", tcp_port), Handler)
    return server
