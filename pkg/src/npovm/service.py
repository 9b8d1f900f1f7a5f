"""HTTP service exposing the toolkit commands.

Every endpoint computes a full report and returns it with HTTP 200; the
report's `exit_code`/`status` fields carry the outcome (verification
failures are results, not transport errors).  Malformed request bodies are
rejected by the schema layer with 422.
"""

from __future__ import annotations

from fastapi import FastAPI

from . import __version__, handlers
from .models import (
    AsdRequest,
    DemoRequest,
    ImplementRequest,
    InvertRequest,
    SimulateRequest,
    VerifyRequest,
)

app = FastAPI(title="npovm", version=__version__)


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/implement")
def implement(req: ImplementRequest) -> dict:
    return handlers.handle_implement(req)


@app.post("/invert")
def invert(req: InvertRequest) -> dict:
    return handlers.handle_invert(req)


@app.post("/verify")
def verify(req: VerifyRequest) -> dict:
    return handlers.handle_verify(req)


@app.post("/asd")
def asd(req: AsdRequest) -> dict:
    return handlers.handle_asd(req)


@app.post("/demo-pt")
def demo_pt(req: DemoRequest) -> dict:
    return handlers.handle_demo_pt(req)


@app.post("/simulate")
def simulate(req: SimulateRequest) -> dict:
    return handlers.handle_simulate(req)
