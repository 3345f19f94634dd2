from pydantic import BaseModel, Field
from typing import Optional, List, Dict, Any
from enum import Enum
from datetime import datetime

# Enums
class SuiteName(str, Enum):
    LINE_BASIS = "line-basis"
    FOURIER_DELTA = "fourier-delta"
    RESIDUE_LEMMAS = "residue-lemmas"
    CONVOLUTION = "convolution"
    ROUNDTRIP = "roundtrip"
    N2_CLOSED_FORM = "n2-closed-form"
    LIE_DIM = "lie-dim"
    ALL = "all"

class OutputFormat(str, Enum):
    JSON = "json"
    TEXT = "text"

class ViolationKind(str, Enum):
    SESQUILINEARITY = "sesquilinearity"
    GRADING = "grading"

# Verification Schemas
class Counterexample(BaseModel):
    input: str
    expected: str
    got: str

class VerificationReport(BaseModel):
    suite: str
    n: int
    degree_r: Optional[int] = None
    cases_total: int = 0
    cases_failed: int = 0
    first_counterexample: Optional[Counterexample] = None
    elapsed_ms: float = 0.0
    details: Optional[Dict[str, Any]] = None

    @property
    def passed(self) -> bool:
        return self.cases_failed == 0

    def to_json_dict(self) -> Dict[str, Any]:
        data = self.model_dump(mode="json")
        if data.get("details") is None:
            data.pop("details", None)
        return data

    def to_text(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        lines = [
            f"[{status}] {self.suite} n<={self.n}: {self.cases_total - self.cases_failed}/{self.cases_total} cases "
            f"in {self.elapsed_ms:.0f} ms"
        ]
        if self.details:
            for key, value in self.details.items():
                lines.append(f"  {key}: {value}")
        if self.first_counterexample:
            ce = self.first_counterexample
            lines.append(f"  input:    {ce.input}")
            lines.append(f"  expected: {ce.expected}")
            lines.append(f"  got:      {ce.got}")
        return "\n".join(lines)

# Classical operation validation
class Violation(BaseModel):
    kind: ViolationKind
    forest: str
    tensor: str
    line: Optional[int] = None
    residual: str

class ValidationReport(BaseModel):
    degree_r: int
    tensors_checked: int = 0
    violations: List[Violation] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

# Filtration audit of chiral operations
class FiltrationCase(BaseModel):
    level: int
    input: str
    bound: int
    observed: int
    ok: bool

class FiltrationWitness(BaseModel):
    degree_r: int
    family_size: int = 0
    sampled: bool = False
    cases: List[FiltrationCase] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(case.ok for case in self.cases)

    @property
    def violations(self) -> List[FiltrationCase]:
        return [case for case in self.cases if not case.ok]

# Request Schemas
class DecomposeRequest(BaseModel):
    graph: str = Field(..., min_length=3, max_length=2000, description="n=<k>; edges=i->j,...")

class ResidueRequest(BaseModel):
    expr: str = Field(..., min_length=1, max_length=4000)
    line: str = Field(..., min_length=1, max_length=200, description="i1>i2>...")
    n: Optional[int] = Field(None, ge=1, le=8)

class FourierRequest(BaseModel):
    expr: str = Field(..., min_length=1, max_length=4000)
    forest: str = Field(..., min_length=1, max_length=200)

class ConvolveRequest(BaseModel):
    f: str = Field(..., min_length=1, max_length=4000, description="function of w1..wp")
    q: str = Field(..., min_length=1, max_length=4000, description="polynomial in L1..Lp")
    p: Optional[int] = Field(None, ge=0, le=8)

class VerifyRequest(BaseModel):
    suite: SuiteName = SuiteName.ALL
    n: int = Field(3, ge=1, le=6)
    seed: Optional[int] = None

# Response Schemas
class ExpressionResponse(BaseModel):
    result: str
    n: int
    processing_time: float

class LieDimensionResponse(BaseModel):
    n: int
    dimension: int
    bracket_words: List[str]

class VerifyResponse(BaseModel):
    seed: int
    passed: bool
    reports: List[Dict[str, Any]]

# Health Check Schemas
class HealthCheck(BaseModel):
    status: str
    timestamp: datetime
    version: str
    environment: str
    services: Dict[str, Dict[str, Any]]
