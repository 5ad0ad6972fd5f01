"""Adapter bridging out-of-process solvers onto the StudentSolver interface.

Wire protocol (newline-delimited UTF-8 JSON, strict request/response
alternation):

    -> {"cmd":"init","seed":7,"config":{}}      <- {"ok":true,"name":...,"version":"1"}
    -> {"cmd":"train","passes":1,"problems":[<canonical records>]}
                                                <- {"ok":true}
    -> {"cmd":"solve","problem":<record without "equation"/"answer">}
                                                <- {"equation":"N1 + N2"} | {"abstain":true}
    -> {"cmd":"shutdown"}                       <- {"ok":true}, then exit 0

Transports: a child process on standard streams, or a TCP socket.  Faulty
solve replies either abort the run or count as abstentions, per
configuration; init/train faults always raise.
"""

from __future__ import annotations

import json
import queue
import socket
import subprocess
import sys
import threading
from dataclasses import dataclass, field
from typing import Sequence

from .. import expr
from ..errors import EquationError, ProtocolError, ProtocolTimeout, SpawnError
from ..problem import MappedProblem, to_record
from .base import SolveResult

ON_FAULT_MODES = ("abort-run", "treat-as-abstain")


@dataclass
class ExternalStudentConfig:
    argv: Sequence[str] | None = None  # child-process transport
    address: tuple[str, int] | None = None  # TCP transport
    solve_timeout_s: float = 30.0
    train_timeout_s: float = 600.0
    on_fault: str = "abort-run"
    init_config: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.argv is None) == (self.address is None):
            raise ValueError("configure exactly one of argv/address")
        if self.on_fault not in ON_FAULT_MODES:
            raise ValueError(f"on_fault must be one of {ON_FAULT_MODES}")


class _ProcessTransport:
    def __init__(self, argv: Sequence[str]):
        try:
            self.proc = subprocess.Popen(
                list(argv),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=sys.stderr,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise SpawnError(f"cannot spawn {argv!r}: {exc}") from exc
        self._lines: queue.Queue[str | None] = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

    def _pump(self) -> None:
        assert self.proc.stdout is not None
        for line in self.proc.stdout:
            self._lines.put(line)
        self._lines.put(None)  # EOF marker

    def send_line(self, line: str) -> None:
        assert self.proc.stdin is not None
        try:
            self.proc.stdin.write(line + "\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, ValueError) as exc:
            raise ProtocolError(f"worker pipe closed: {exc}") from exc

    def recv_line(self, timeout: float) -> str:
        try:
            line = self._lines.get(timeout=timeout)
        except queue.Empty:
            raise ProtocolTimeout(f"no reply within {timeout}s") from None
        if line is None:
            raise ProtocolError("worker closed its output stream")
        return line

    def close(self) -> None:
        if self.proc.poll() is None:
            try:
                if self.proc.stdin:
                    self.proc.stdin.close()
            except OSError:
                pass
            try:
                self.proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self.proc.kill()
                self.proc.wait()

    def exit_code(self) -> int | None:
        return self.proc.poll()


class _SocketTransport:
    def __init__(self, address: tuple[str, int]):
        try:
            self.sock = socket.create_connection(address, timeout=10)
        except OSError as exc:
            raise SpawnError(f"cannot connect to {address}: {exc}") from exc
        self._file = self.sock.makefile("r", encoding="utf-8")

    def send_line(self, line: str) -> None:
        try:
            self.sock.sendall((line + "\n").encode("utf-8"))
        except OSError as exc:
            raise ProtocolError(f"socket send failed: {exc}") from exc

    def recv_line(self, timeout: float) -> str:
        self.sock.settimeout(timeout)
        try:
            line = self._file.readline()
        except socket.timeout:
            raise ProtocolTimeout(f"no reply within {timeout}s") from None
        except OSError as exc:
            raise ProtocolError(f"socket recv failed: {exc}") from exc
        if not line:
            raise ProtocolError("peer closed the connection")
        return line

    def close(self) -> None:
        try:
            self._file.close()
            self.sock.close()
        except OSError:
            pass

    def exit_code(self) -> int | None:
        return None


def solve_payload(problem: MappedProblem) -> dict:
    """Canonical record minus the fields the solver must produce."""
    record = to_record(problem)
    record.pop("equation", None)
    record.pop("answer", None)
    return record


class ExternalStudent:
    """StudentSolver running behind the wire protocol."""

    def __init__(self, cfg: ExternalStudentConfig):
        self.cfg = cfg
        self._transport: _ProcessTransport | _SocketTransport | None = None
        self.worker_name = ""

    def _ensure_transport(self):
        if self._transport is None:
            if self.cfg.argv is not None:
                self._transport = _ProcessTransport(self.cfg.argv)
            else:
                self._transport = _SocketTransport(self.cfg.address)  # type: ignore[arg-type]
        return self._transport

    def _request(self, message: dict, timeout: float) -> dict:
        transport = self._ensure_transport()
        transport.send_line(json.dumps(message, ensure_ascii=False))
        line = transport.recv_line(timeout)
        try:
            reply = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"worker reply is not JSON: {line!r}") from exc
        if not isinstance(reply, dict):
            raise ProtocolError(f"worker reply is not an object: {line!r}")
        return reply

    # -- StudentSolver -----------------------------------------------------------

    def reset(self, seed: int) -> None:
        reply = self._request(
            {"cmd": "init", "seed": seed, "config": dict(self.cfg.init_config)},
            self.cfg.solve_timeout_s,
        )
        if not reply.get("ok"):
            raise ProtocolError(f"init rejected: {reply}")
        self.worker_name = str(reply.get("name", ""))

    def train(self, problems: Sequence[MappedProblem], passes: int = 1) -> None:
        reply = self._request(
            {
                "cmd": "train",
                "passes": passes,
                "problems": [to_record(p) for p in problems],
            },
            self.cfg.train_timeout_s,
        )
        if not reply.get("ok"):
            raise ProtocolError(f"train rejected: {reply}")

    def solve(self, problem: MappedProblem) -> SolveResult:
        try:
            reply = self._request(
                {"cmd": "solve", "problem": solve_payload(problem)},
                self.cfg.solve_timeout_s,
            )
            if reply.get("abstain"):
                return SolveResult(abstained=True)
            equation = reply.get("equation")
            if not isinstance(equation, str):
                raise ProtocolError(f"solve reply lacks an equation: {reply}")
            try:
                template = expr.parse_equation(equation)
            except EquationError as exc:
                raise ProtocolError(f"unparseable equation from worker: {equation!r}") from exc
            return SolveResult(
                equation=template,
                diagnostics=float(reply.get("confidence", 0.0)),
            )
        except (ProtocolError, ProtocolTimeout):
            if self.cfg.on_fault == "treat-as-abstain":
                return SolveResult(abstained=True)
            raise

    # -- lifecycle -----------------------------------------------------------------

    def close(self) -> int | None:
        """Send shutdown and reap the worker; returns its exit code."""
        if self._transport is None:
            return None
        try:
            self._request({"cmd": "shutdown"}, self.cfg.solve_timeout_s)
        except (ProtocolError, ProtocolTimeout):
            pass
        self._transport.close()
        code = self._transport.exit_code()
        self._transport = None
        return code

    def __enter__(self) -> "ExternalStudent":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


def run_conformance(
    cfg: ExternalStudentConfig,
    problems: Sequence[MappedProblem],
    *,
    messages: int = 200,
    seed: int = 7,
) -> dict:
    """Protocol conformance drill: init/train/solve/shutdown, mixed order.

    Sends `messages` requests total and requires every reply in time, a
    well-formed answer or abstention for each solve, and a clean exit.
    Returns a summary dict; raises on any protocol violation.
    """
    student = ExternalStudent(cfg)
    sent = 0
    solves = 0
    abstentions = 0
    student.reset(seed)
    sent += 1
    batch = list(problems)
    while sent < messages - 1:
        step = sent % 10
        if step == 0:
            student.reset(seed + sent)
            sent += 1
        elif step == 1:
            student.train(batch, passes=1)
            sent += 1
        else:
            result = student.solve(batch[sent % len(batch)])
            if result.abstained:
                abstentions += 1
            solves += 1
            sent += 1
    exit_code = student.close()
    sent += 1
    return {
        "messages": sent,
        "solves": solves,
        "abstentions": abstentions,
        "exit_code": exit_code,
        "worker": student.worker_name,
    }
