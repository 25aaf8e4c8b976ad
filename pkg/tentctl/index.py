import logging
from typing import Any, Dict, List

from fastapi import FastAPI, HTTPException

from tentctl.cantor_stats import cycle_point_cloud, histogram_rows, sample_first_type
from tentctl.config import settings
from tentctl.control_design import classify_theta, count_cycles
from tentctl.errors import ParameterError
from tentctl.exact_oracle import enumerate_cycles
from tentctl.hp_real import parse_rational
from tentctl.orbit_finder import grid_search, resolve_precision, search_seeds
from tentctl.schemas import CantorRequest, FindRequest, GraphRequest
from tentctl.tent_map import ControlConfig, MapParams, Regime, graph_rows

logging.basicConfig(level=getattr(logging, settings.log_level, logging.INFO))

app = FastAPI(title="tentctl")


def _bad_request(e: ParameterError) -> HTTPException:
    logging.warning(f"Rejected request ({e.field}): {e}")
    return HTTPException(status_code=400, detail={"field": e.field, "message": str(e)})


@app.get("/")
async def health():
    return {"status": "ok"}


@app.get("/api/settings")
async def settings_status():
    """Effective runtime settings"""
    return settings.get_status()


@app.get("/api/count")
def count(period: int) -> Dict[str, int]:
    try:
        return {"T": period, "count": count_cycles(period)}
    except ParameterError as e:
        raise _bad_request(e)


@app.get("/api/enumerate")
def enumerate_endpoint(H: str, period: int) -> List[Dict[str, Any]]:
    try:
        return [cycle.to_record() for cycle in enumerate_cycles(MapParams(H), period)]
    except ParameterError as e:
        raise _bad_request(e)


@app.post("/api/find")
def find(request: FindRequest) -> List[Dict[str, Any]]:
    try:
        params = MapParams(request.H)
        if request.theta is not None:
            theta = parse_rational(request.theta, field="theta")
            if classify_theta(params, request.period, theta) is None:
                raise ParameterError(f"theta={theta} lies outside both regime intervals", field="theta")
        options = dict(
            precision=resolve_precision(params, request.period, request.precision),
            offset=request.offset,
            theta=request.theta,
            threshold=request.threshold,
            max_iters=request.max_iters,
        )
        if request.seeds:
            cycles = search_seeds(params, request.period, request.regime, request.seeds, **options)
        else:
            offset = options.pop("offset")
            cycles = grid_search(params, request.period, request.regime, offset, request.grid, **options)
        return [cycle.to_record() for cycle in cycles]
    except ParameterError as e:
        raise _bad_request(e)


@app.post("/api/graph")
def graph(request: GraphRequest) -> List[List[str]]:
    try:
        params = MapParams(request.H)
        theta = parse_rational(request.theta, field="theta")
        regime = classify_theta(params, request.period, theta)
        if regime is None:
            raise ParameterError(f"theta={theta} lies outside both regime intervals", field="theta")
        cfg = ControlConfig(params, request.period, regime, theta)
        precision = resolve_precision(params, request.period, request.precision)
        return [[str(v) for v in row] for row in graph_rows(cfg, request.samples, precision)]
    except ParameterError as e:
        raise _bad_request(e)


@app.post("/api/cantor")
def cantor(request: CantorRequest) -> List[Dict[str, Any]]:
    try:
        if request.mode == "first-type":
            points = sample_first_type(request.depth, request.count, request.seed)
        else:
            if request.H is None or request.period is None:
                raise ParameterError("cycles mode needs H and period", field="H")
            cloud = cycle_point_cloud(
                MapParams(request.H),
                request.period,
                regimes=[Regime.parse(r) for r in request.regimes],
                include_subcycles=request.include_subcycles,
            )
            points = cloud.points
        return [
            {"bin_left": left, "bin_right": right, "count": count, "density": density}
            for left, right, count, density in histogram_rows(points, request.bins)
        ]
    except ParameterError as e:
        raise _bad_request(e)
