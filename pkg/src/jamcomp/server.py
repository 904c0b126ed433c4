"""WebSocket transport for live sessions.

Each connection runs one independent session speaking exactly the
newline-delimited JSON payloads of the stdio transport, one object per
text frame.  All sessions share a single model loaded once; the model is
never mutated, so no locking is needed.
"""

from __future__ import annotations

import logging
from typing import Optional

from websockets.sync.server import Server, serve

from jamcomp.session import SessionHandler
from jamcomp.training import HmmModel

logger = logging.getLogger(__name__)


def session_endpoint(model: HmmModel, alpha: float = 0.5):
    """Connection handler: one SessionHandler per client."""

    def handle(connection) -> None:
        handler = SessionHandler(model, alpha)
        logger.info("session opened: %s", connection.remote_address)
        for frame in connection:
            if isinstance(frame, bytes):
                frame = frame.decode("utf-8", errors="replace")
            for outbound in handler.handle_line(frame):
                connection.send(outbound)
            if handler.aborted:
                break
        logger.info("session closed: %s", connection.remote_address)

    return handle


def make_server(model: HmmModel, host: str = "127.0.0.1", port: int = 0,
                alpha: float = 0.5) -> Server:
    """Bind a session server; port 0 picks a free port.  The caller owns
    the serve_forever/shutdown lifecycle."""
    return serve(session_endpoint(model, alpha), host, port)


def bound_port(server: Server) -> int:
    return server.socket.getsockname()[1]


def run_server(model: HmmModel, host: str, port: int, alpha: float = 0.5,
               ready: Optional[object] = None) -> None:
    """Serve sessions until interrupted.  `ready`, when given, is an
    event set once the socket is listening (used by tests)."""
    with make_server(model, host, port, alpha) as server:
        logger.info("listening on %s:%d", host, bound_port(server))
        if ready is not None:
            ready.set()
        server.serve_forever()
