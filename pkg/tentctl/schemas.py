"""
Request models for the HTTP service
"""
from typing import List, Literal, Optional

from pydantic import BaseModel, Field


class FindRequest(BaseModel):
    H: str = Field(..., description="slope as rational text, e.g. '3' or '5/2'")
    period: int = Field(..., ge=1)
    regime: Literal["pos", "neg"]
    offset: Optional[str] = Field(None, description="regime offset c, |c| < 1")
    theta: Optional[str] = Field(None, description="control parameter as rational text")
    seeds: Optional[List[str]] = None
    grid: int = Field(20, ge=2, le=2000)
    precision: Optional[int] = Field(None, ge=1)
    threshold: Optional[str] = None
    max_iters: Optional[int] = Field(None, ge=1)


class GraphRequest(BaseModel):
    H: str
    period: int = Field(..., ge=1)
    theta: str
    samples: int = Field(200, ge=2, le=20000)
    precision: Optional[int] = Field(None, ge=1)


class CantorRequest(BaseModel):
    mode: Literal["cycles", "first-type"]
    bins: int = Field(50, ge=1)
    H: Optional[str] = None
    period: Optional[int] = Field(None, ge=1)
    regimes: List[Literal["pos", "neg"]] = ["pos", "neg"]
    include_subcycles: bool = True
    depth: int = Field(25, ge=1)
    count: int = Field(200000, ge=1, le=2_000_000)
    seed: int = Field(0, ge=0, lt=2 ** 64)
