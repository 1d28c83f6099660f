"""Request/response models for the service and the CLI client.

These are the wire contracts; numeric payloads are plain lists so they
serialize to JSON with round-tripping float representations.
"""

from __future__ import annotations

from typing import Literal, Optional, Union

from pydantic import BaseModel, Field

ChainKind = Literal["free", "censored"]
StartSpec = Union[float, Literal["all-plus", "all-minus", "bottom"]]


class ChainRequest(BaseModel):
    n: int = Field(ge=2)
    beta: float = Field(ge=0)
    kind: ChainKind = "free"


class KernelResponse(BaseModel):
    n: int
    beta: float
    kind: ChainKind
    states: list[float]
    p: list[float]
    q: list[float]
    h: list[float]


class StationaryResponse(BaseModel):
    n: int
    beta: float
    kind: ChainKind
    states: list[float]
    pi: list[float]
    log_pi: list[float]
    route_deviation: float


class TvCurveRequest(ChainRequest):
    start: StartSpec = "all-plus"
    t_max: int = Field(ge=0)
    record_every: int = Field(default=1, ge=1)


class CurveResponse(BaseModel):
    t: list[int]
    value: list[float]


class MixRequest(ChainRequest):
    start: StartSpec = "all-plus"
    eps: float = Field(default=0.25, gt=0, lt=1)
    cap_steps: int = Field(default=10**9, ge=1)


class MixResponse(BaseModel):
    steps: int
    lower_bound_only: bool


class GapRequest(ChainRequest):
    pass


class SpectralResponse(BaseModel):
    gap: float
    lambda_second: float
    lambda_min: float
    method: str
    residual: float
    n_states: int
    top_eigenvalue: float
    second_dominates: bool


class FullGapRequest(BaseModel):
    n: int = Field(ge=2, le=12)
    beta: float = Field(ge=0)


class ElectricRequest(ChainRequest):
    pass


class ElectricResponse(BaseModel):
    n: int
    beta: float
    kind: ChainKind
    ref_state: int
    log_c_S: float
    log_w_total: float
    states: list[float]
    log_r: list[float]
    log_c: list[float]
    log_c_loop: list[float]
    log_w: list[float]


class ZetaRequest(BaseModel):
    beta: float


class ZetaResponse(BaseModel):
    beta: float
    zeta: float


class TexpRequest(BaseModel):
    n: int = Field(ge=2)
    beta: float


class TexpResponse(BaseModel):
    n: int
    beta: float
    zeta: float
    integral: float
    log_value: float
    value: Optional[float]


class HittingRequest(ChainRequest):
    source: float
    target: float


class HittingResponse(BaseModel):
    source_state: float
    target_state: float
    log_expected: float
    expected: Optional[float]
    method: str


class SimulateRequest(BaseModel):
    n: int = Field(ge=2)
    beta: float = Field(ge=0)
    mode: Literal["hitting", "coalescence"] = "hitting"
    start: StartSpec = "all-plus"
    target_kind: Literal["abs_le", "le", "ge"] = "abs_le"
    target_value: Optional[float] = None
    censored: bool = False
    reps: int = Field(default=200, ge=2)
    seed: int = 0
    cap_steps: int = Field(default=10**9, ge=1)
    workers: int = Field(default=1, ge=1)
    include_samples: bool = False


class TrialSummaryResponse(BaseModel):
    reps: int
    mean: float
    se: float
    quantiles: dict[str, float]
    master_seed: int
    seeds: list[int]
    capped: int
    valid: bool
    cap: int
    samples: Optional[list[int]] = None
    bound_curve: Optional[CurveResponse] = None


class ScanRequest(BaseModel):
    kind: Literal[
        "cutoff-scan", "critical-scan", "lowtemp-scan", "limit-law", "censored-scan", "verify"
    ]
    n: list[int] = Field(default_factory=list)
    beta: list[float] = Field(default_factory=list)
    alpha: list[float] = Field(default_factory=list)
    eps: list[float] = Field(default_factory=lambda: [0.9, 0.75, 0.25, 0.1])
    seed: int = 0
    reps: int = Field(default=200, ge=2)
    workers: int = Field(default=1, ge=1)
    cap_steps: int = Field(default=10**9, ge=1)
    suites: list[str] = Field(default_factory=list)


class VerdictModel(BaseModel):
    name: str
    passed: Optional[bool]
    detail: str


class ReportResponse(BaseModel):
    kind: str
    records: list[dict]
    verdicts: list[VerdictModel]
    env: dict
    passed: bool


class VerifyRequest(BaseModel):
    suites: list[str] = Field(default_factory=list)
