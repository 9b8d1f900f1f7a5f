"""Pydantic request schemas shared by the HTTP service and the CLI."""

from __future__ import annotations

from pydantic import BaseModel, Field


class Tolerances(BaseModel):
    ratio: float = Field(default=1e-9, gt=0)
    psd: float = Field(default=1e-10, gt=0)
    fixed: float = Field(default=1e-9, gt=0)


class ImplementRequest(BaseModel):
    decomposition: dict
    samples: int = Field(default=200, ge=1)
    seed: int = 42
    tolerances: Tolerances = Tolerances()


class InvertRequest(BaseModel):
    povm: dict
    reject: str
    subspace: dict
    c0: float | None = None
    samples: int = Field(default=200, ge=1)
    seed: int = 42
    tolerances: Tolerances = Tolerances()


class VerifyRequest(BaseModel):
    family: dict
    povm: dict
    subspace: dict
    reject: str | None = None
    samples: int = Field(default=200, ge=1)
    seed: int = 42
    tolerances: Tolerances = Tolerances()


class AsdRequest(BaseModel):
    input: dict
    samples: int = Field(default=200, ge=1)
    seed: int = 42
    tolerances: Tolerances = Tolerances()


class DemoRequest(BaseModel):
    samples: int = Field(default=200, ge=1)
    shots: int = Field(default=100_000, ge=0)
    seed: int = 42
    tolerances: Tolerances = Tolerances()


class SimulateRequest(BaseModel):
    povm: dict
    state: dict
    reject: str
    shots: int = Field(default=100_000, ge=0)
    seed: int = 42
    tolerances: Tolerances = Tolerances()
