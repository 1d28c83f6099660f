"""Service layer: one function per operation, shared by the HTTP API and the
CLI client, plus the FastAPI application wiring.

Run the API with:  uvicorn glauberlab.service:app
"""

from __future__ import annotations

import io

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import __version__
from . import acceptance
from . import electric as el
from . import harness
from . import magchain as mc
from . import simulate as sim
from . import spectral as sp
from .model import ConsistencyError, DomainError, ModelParams
from .schemas import (
    ChainRequest,
    CurveResponse,
    ElectricRequest,
    ElectricResponse,
    FullGapRequest,
    GapRequest,
    HittingRequest,
    HittingResponse,
    KernelResponse,
    MixRequest,
    MixResponse,
    ReportResponse,
    ScanRequest,
    SimulateRequest,
    SpectralResponse,
    StationaryResponse,
    TexpRequest,
    TexpResponse,
    TrialSummaryResponse,
    TvCurveRequest,
    VerifyRequest,
    ZetaRequest,
    ZetaResponse,
)


def _chain(n: int, beta: float, kind: str) -> mc.MagChain:
    params = ModelParams(n, beta)
    if kind == "censored":
        return mc.build_censored_kernel(params)
    return mc.build_kernel(params)


def _start_index(chain: mc.MagChain, start) -> int:
    if start == "all-plus":
        return chain.top_index()
    if start == "all-minus" or start == "bottom":
        return 0
    return chain.state_index(float(start))


def run_kernel(req: ChainRequest) -> KernelResponse:
    chain = _chain(req.n, req.beta, req.kind)
    return KernelResponse(
        n=req.n,
        beta=req.beta,
        kind=req.kind,
        states=[float(s) for s in chain.states],
        p=[float(x) for x in chain.p],
        q=[float(x) for x in chain.q],
        h=[float(x) for x in chain.h],
    )


def run_stationary(req: ChainRequest) -> StationaryResponse:
    chain = _chain(req.n, req.beta, req.kind)
    pi, dev = mc.stationary(chain, return_deviation=True)
    return StationaryResponse(
        n=req.n,
        beta=req.beta,
        kind=req.kind,
        states=[float(s) for s in chain.states],
        pi=[float(x) for x in pi.probabilities],
        log_pi=[float(x) for x in pi.log_p],
        route_deviation=dev,
    )


def run_tvcurve(req: TvCurveRequest) -> CurveResponse:
    chain = _chain(req.n, req.beta, req.kind)
    series = mc.tv_curve(
        chain, _start_index(chain, req.start), req.t_max, record_every=req.record_every
    )
    return CurveResponse(
        t=[int(t) for t in series.times], value=[float(v) for v in series.values]
    )


def run_mix(req: MixRequest) -> MixResponse:
    chain = _chain(req.n, req.beta, req.kind)
    res = mc.mixing_time(chain, _start_index(chain, req.start), req.eps, cap=req.cap_steps)
    return MixResponse(steps=res.steps, lower_bound_only=res.lower_bound_only)


def run_gap(req: GapRequest) -> SpectralResponse:
    chain = _chain(req.n, req.beta, req.kind)
    return SpectralResponse(**sp.chain_gap(chain).to_json_dict())


def run_fullgap(req: FullGapRequest) -> SpectralResponse:
    return SpectralResponse(**sp.full_dynamics_gap(ModelParams(req.n, req.beta)).to_json_dict())


def run_electric(req: ElectricRequest) -> ElectricResponse:
    chain = _chain(req.n, req.beta, req.kind)
    net = el.network(chain)
    return ElectricResponse(
        n=req.n,
        beta=req.beta,
        kind=req.kind,
        ref_state=net.ref_state,
        log_c_S=net.log_c_S,
        log_w_total=net.log_w_total,
        states=[float(s) for s in chain.states],
        log_r=[float(x) for x in net.log_r],
        log_c=[float(x) for x in net.log_c],
        log_c_loop=[float(x) for x in net.log_c_loop],
        log_w=[float(x) for x in net.log_w],
    )


def run_zeta(req: ZetaRequest) -> ZetaResponse:
    return ZetaResponse(beta=req.beta, zeta=el.zeta(req.beta))


def run_texp(req: TexpRequest) -> TexpResponse:
    res = el.t_exp(ModelParams(req.n, req.beta))
    return TexpResponse(
        n=req.n,
        beta=req.beta,
        zeta=res.zeta,
        integral=res.integral,
        log_value=res.log_value,
        value=res.value,
    )


def run_hitting(req: HittingRequest) -> HittingResponse:
    chain = _chain(req.n, req.beta, req.kind)
    rep = el.hitting_time(chain, chain.state_index(req.source), chain.state_index(req.target))
    return HittingResponse(
        source_state=rep.source_state,
        target_state=rep.target_state,
        log_expected=rep.log_expected,
        expected=rep.expected,
        method=rep.method,
    )


def run_simulate(req: SimulateRequest) -> TrialSummaryResponse:
    params = ModelParams(req.n, req.beta)
    if req.mode == "coalescence":
        summary, curve = sim.estimate_coalescence(
            params, reps=req.reps, master_seed=req.seed, cap=req.cap_steps, workers=req.workers
        )
        bound = CurveResponse(
            t=[int(t) for t in curve.times], value=[float(v) for v in curve.values]
        )
    else:
        if req.target_value is None:
            raise DomainError("hitting mode needs target_value")
        target = sim.HittingTarget(req.target_kind, req.target_value)
        summary = sim.estimate_hitting(
            params,
            req.start,
            target,
            reps=req.reps,
            master_seed=req.seed,
            cap=req.cap_steps,
            workers=req.workers,
            censored=req.censored,
        )
        bound = None
    payload = summary.to_json_dict(include_samples=req.include_samples)
    return TrialSummaryResponse(**payload, bound_curve=bound)


def run_scan(req: ScanRequest) -> ReportResponse:
    spec = harness.ExperimentSpec(
        kind=req.kind,
        n_list=list(req.n),
        beta_list=list(req.beta),
        alpha_list=list(req.alpha),
        eps_list=list(req.eps),
        seed=req.seed,
        reps=req.reps,
        workers=req.workers,
        cap_steps=req.cap_steps,
        suites=list(req.suites),
    )
    report = harness.run_scan(spec)
    return ReportResponse(**report.to_json_dict(), passed=report.passed())


def run_verify(req: VerifyRequest, stream=None) -> ReportResponse:
    report = acceptance.verify(req.suites or None, stream=stream)
    return ReportResponse(**report.to_json_dict(), passed=report.passed())


app = FastAPI(
    title="glauberlab",
    version=__version__,
    description=(
        "Exact analysis and Monte Carlo simulation of heat-bath Glauber dynamics "
        "on the mean-field Ising model."
    ),
)


@app.exception_handler(DomainError)
async def _domain_error(request: Request, exc: DomainError):
    return JSONResponse(status_code=422, content={"detail": str(exc)})


@app.exception_handler(ConsistencyError)
async def _consistency_error(request: Request, exc: ConsistencyError):
    return JSONResponse(status_code=500, content={"detail": str(exc)})


@app.get("/healthz")
def healthz() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/kernel", response_model=KernelResponse)
def kernel_endpoint(req: ChainRequest):
    return run_kernel(req)


@app.post("/stationary", response_model=StationaryResponse)
def stationary_endpoint(req: ChainRequest):
    return run_stationary(req)


@app.post("/tvcurve", response_model=CurveResponse)
def tvcurve_endpoint(req: TvCurveRequest):
    return run_tvcurve(req)


@app.post("/mix", response_model=MixResponse)
def mix_endpoint(req: MixRequest):
    return run_mix(req)


@app.post("/gap", response_model=SpectralResponse)
def gap_endpoint(req: GapRequest):
    return run_gap(req)


@app.post("/fullgap", response_model=SpectralResponse)
def fullgap_endpoint(req: FullGapRequest):
    return run_fullgap(req)


@app.post("/electric", response_model=ElectricResponse)
def electric_endpoint(req: ElectricRequest):
    return run_electric(req)


@app.post("/zeta", response_model=ZetaResponse)
def zeta_endpoint(req: ZetaRequest):
    return run_zeta(req)


@app.post("/texp", response_model=TexpResponse)
def texp_endpoint(req: TexpRequest):
    return run_texp(req)


@app.post("/hitting", response_model=HittingResponse)
def hitting_endpoint(req: HittingRequest):
    return run_hitting(req)


@app.post("/simulate", response_model=TrialSummaryResponse)
def simulate_endpoint(req: SimulateRequest):
    return run_simulate(req)


@app.post("/scan", response_model=ReportResponse)
def scan_endpoint(req: ScanRequest):
    return run_scan(req)


@app.post("/verify", response_model=ReportResponse)
def verify_endpoint(req: VerifyRequest):
    buf = io.StringIO()
    return run_verify(req, stream=buf)
