import pytest
from fastapi.testclient import TestClient

from app.core.config import settings
from app.main import app

API = settings.API_V1_STR + "/operad"


@pytest.fixture
def client():
    return TestClient(app)


def test_health(client):
    """Test health endpoint"""
    response = client.get("/health")
    assert response.status_code == 200
    data = response.json()
    assert data["status"] == "healthy"
    assert "cache" in data["services"]


def test_root(client):
    response = client.get("/")
    assert response.status_code == 200
    assert settings.APP_NAME in response.json()["message"]


@pytest.mark.parametrize("path,payload,expected", [
    ("/decompose", {"graph": "n=3; edges=2->1,1->3"}, "-[1>2>3] - [1>3>2]"),
    ("/residue", {"expr": "(z1-z2)^-2*(z1-z3)^-1", "line": "1>2"}, "-(w2-w3)^-2"),
    ("/fourier", {"expr": "(z1-z2)^-1", "forest": "1>2"}, "1"),
    ("/convolve", {"f": "(w1-w2)^-1", "q": "L1*L2"}, "-1/2*L1^2*L2 - 1/6*L1^3"),
])
def test_expression_endpoints(client, path, payload, expected):
    """Test the text-in, text-out endpoints"""
    response = client.post(API + path, json=payload)
    assert response.status_code == 200
    data = response.json()
    assert data["result"] == expected
    assert data["processing_time"] >= 0


@pytest.mark.parametrize("path,payload", [
    ("/decompose", {"graph": "nonsense"}),
    ("/residue", {"expr": "z1^-1", "line": "1>2"}),
    ("/fourier", {"expr": "z1 +", "forest": "1>2"}),
    ("/residue", {"expr": "1/0", "line": "1>2"}),
    ("/convolve", {"f": "(w1-w2)^-1", "q": "(L1-L2)^-1"}),
])
def test_domain_errors_are_400(client, path, payload):
    response = client.post(API + path, json=payload)
    assert response.status_code == 400
    assert response.json()["detail"]


def test_lie_dim(client):
    """Test the dimension and bracket basis endpoint"""
    response = client.get(API + "/lie-dim/4")
    assert response.status_code == 200
    data = response.json()
    assert data["dimension"] == 6
    assert len(data["bracket_words"]) == 6
    assert data["bracket_words"][0] == "[x1,[x2,[x3,x4]]]"
    assert client.get(API + "/lie-dim/9").status_code == 400


def test_verify(client):
    """Test a verification run over HTTP"""
    response = client.post(API + "/verify", json={"suite": "lie-dim", "n": 3, "seed": 5})
    assert response.status_code == 200
    data = response.json()
    assert data["seed"] == 5
    assert data["passed"] is True
    assert data["reports"][0]["details"] == {"dims": [1, 1, 2]}


def test_verify_validates_request(client):
    assert client.post(API + "/verify", json={"suite": "bogus"}).status_code == 422
    assert client.post(API + "/verify", json={"suite": "lie-dim", "n": 0}).status_code == 422
